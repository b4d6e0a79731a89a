use serde::{Deserialize, Serialize};

/// Absolute-plus-relative comparison tolerance.
///
/// Two values `a` and `b` are considered equal when
/// `|a - b| <= tol * (1 + max(|a|, |b|))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance(pub f64);

impl Tolerance {
    pub const DEFAULT: Tolerance = Tolerance(1e-9);

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn close(self, a: f64, b: f64) -> bool {
        (a - b).abs() <= self.0 * (1.0 + a.abs().max(b.abs()))
    }

    /// `x >= -tol * (1 + scale)`.
    pub fn non_negative(self, x: f64, scale: f64) -> bool {
        x >= -self.0 * (1.0 + scale.abs())
    }

    /// `lhs >= rhs` up to tolerance.
    pub fn at_least(self, lhs: f64, rhs: f64) -> bool {
        lhs >= rhs - self.0 * (1.0 + lhs.abs().max(rhs.abs()))
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance::DEFAULT
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_part_scales_with_magnitude() {
        let tol = Tolerance(1e-9);
        assert!(tol.close(1e6, 1e6 + 1e-4));
        assert!(!tol.close(1.0, 1.0 + 1e-8));
        assert!(tol.non_negative(-1e-10, 0.0));
        assert!(!tol.non_negative(-1e-6, 0.0));
        assert!(tol.at_least(3.0, 3.0 + 1e-10));
    }
}
