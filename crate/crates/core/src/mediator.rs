//! The mediator: a bidder that wins a primary slot, forks it into secondary
//! slots on its landing page and resells them through its own sub-auction.
//!
//! Secondary slot `j` behind primary slot `l` is noticed with probability
//! `γ̃_j = γ_l · f · γ_j` for `j ≤ L`, where `f` is the mediator's fitness.
//! The common factor `γ_l · f` cancels out of the sub-auction's equilibrium
//! price recursion, so sub-auction prices and the mediator's own score can
//! be computed before the primary auction is run.

use serde::{Deserialize, Serialize};

use crate::auction::{check_ranked, score_at, AgentId, CtrCurve};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MediatorProfile {
    pub id: AgentId,
    /// Relevance in the primary auction.
    pub relevance_p: f64,
    /// Amplification of the position effect on the landing page.
    pub alpha: f64,
    /// Number of secondary slots `L`.
    pub secondary_slots: usize,
}

impl MediatorProfile {
    pub fn new(
        id: impl Into<AgentId>,
        relevance_p: f64,
        alpha: f64,
        secondary_slots: usize,
    ) -> Result<Self> {
        let m = MediatorProfile {
            id: id.into(),
            relevance_p,
            alpha,
            secondary_slots,
        };
        m.validate()?;
        Ok(m)
    }

    fn validate(&self) -> Result<()> {
        if !(self.relevance_p > 0.0 && self.relevance_p <= 1.0) {
            return Err(Error::InvalidRelevance {
                agent: self.id.to_string(),
                value: self.relevance_p,
            });
        }
        let f = self.fitness();
        if !(self.alpha.is_finite() && self.alpha > 0.0 && f > 0.0) {
            return Err(Error::InvalidFitness {
                agent: self.id.to_string(),
                fitness: f,
            });
        }
        if self.secondary_slots == 0 {
            return Err(Error::NoSecondarySlots);
        }
        Ok(())
    }

    /// `f = e_M^p · α`.
    pub fn fitness(&self) -> f64 {
        self.relevance_p * self.alpha
    }

    /// Checks `f · γ_1 < 1` and `L ≤ K` against the curve in use.
    pub fn validate_against(&self, ctr: &CtrCurve) -> Result<()> {
        self.validate()?;
        if self.secondary_slots > ctr.slots() {
            return Err(Error::TooManySecondarySlots {
                secondary: self.secondary_slots,
                slots: ctr.slots(),
            });
        }
        let f = self.fitness();
        if f * ctr.top() >= 1.0 {
            return Err(Error::FitnessTooLarge {
                agent: self.id.to_string(),
                fitness: f,
                top_ctr: ctr.top(),
            });
        }
        Ok(())
    }

    /// Same mediator with `α` rescaled so the fitness equals `fitness`.
    pub fn with_fitness(&self, fitness: f64) -> Self {
        MediatorProfile {
            alpha: fitness / self.relevance_p,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EffectiveCtrCurve {
    pub primary_slot: usize,
    pub fitness: f64,
    gammas: Vec<f64>,
}

impl EffectiveCtrCurve {
    /// `γ̃_j`, zero past `L`.
    pub fn at(&self, j: usize) -> f64 {
        assert!(j >= 1, "slots are 1-based");
        self.gammas.get(j - 1).copied().unwrap_or(0.0)
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    /// The effective curve is itself a valid position curve because
    /// `γ_l · f · γ_1 < 1`.
    pub fn as_ctr_curve(&self) -> Result<CtrCurve> {
        CtrCurve::new(self.gammas.clone())
    }
}

pub fn effective_ctr(
    ctr: &CtrCurve,
    primary_slot: usize,
    mediator: &MediatorProfile,
) -> Result<EffectiveCtrCurve> {
    mediator.validate_against(ctr)?;
    if primary_slot == 0 || primary_slot > ctr.slots() {
        return Err(Error::SlotOutOfRange {
            slot: primary_slot,
            slots: ctr.slots(),
        });
    }
    let f = mediator.fitness();
    let scale = ctr.at(primary_slot) * f;
    let gammas = (1..=mediator.secondary_slots)
        .map(|j| scale * ctr.at(j))
        .collect();
    Ok(EffectiveCtrCurve {
        primary_slot,
        fitness: f,
        gammas,
    })
}

/// Sub-auction price-scores `r^s_2 ..= r^s_{L+1}` from the reduced recursion
/// `γ_i r_{i+1} = Σ_{j=i}^{L-1} (γ_j − γ_{j+1}) s_{j+1} + γ_L s_{L+1}`.
pub fn s_auction_price_scores(
    ctr: &CtrCurve,
    secondary_slots: usize,
    ranked_s_scores: &[f64],
) -> Result<Vec<f64>> {
    if secondary_slots == 0 {
        return Err(Error::NoSecondarySlots);
    }
    if secondary_slots > ctr.slots() {
        return Err(Error::TooManySecondarySlots {
            secondary: secondary_slots,
            slots: ctr.slots(),
        });
    }
    check_ranked(ranked_s_scores)?;
    let l = secondary_slots;
    let mut prices = vec![0.0; l];
    let mut acc = ctr.at(l) * score_at(ranked_s_scores, l + 1);
    prices[l - 1] = acc / ctr.at(l);
    for i in (1..l).rev() {
        acc += ctr.drop_at(i) * score_at(ranked_s_scores, i + 1);
        prices[i - 1] = acc / ctr.at(i);
    }
    Ok(prices)
}

/// The mediator's primary-auction score, computed two ways.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MediatorScore {
    /// `f · Σ_{j=1}^{L} γ_j r^s_{j+1}`.
    pub summation: f64,
    /// `f · (Σ_{j=1}^{L-1} (γ_j − γ_{j+1}) j s_{j+1} + γ_L L s_{L+1})`.
    pub closed_form: f64,
}

impl MediatorScore {
    pub fn value(&self) -> f64 {
        self.summation
    }
}

/// Expected sub-auction revenue per primary impression, scaled by fitness.
/// Never depends on which primary slot the mediator ends up in.
pub fn mediator_score(
    ctr: &CtrCurve,
    mediator: &MediatorProfile,
    ranked_s_scores: &[f64],
) -> Result<MediatorScore> {
    let l = mediator.secondary_slots;
    let prices = s_auction_price_scores(ctr, l, ranked_s_scores)?;
    let f = mediator.fitness();
    let summation = f * prices
        .iter()
        .enumerate()
        .map(|(i, r)| ctr.at(i + 1) * r)
        .sum::<f64>();
    let telescoped = (1..l)
        .map(|j| ctr.drop_at(j) * j as f64 * score_at(ranked_s_scores, j + 1))
        .sum::<f64>()
        + ctr.at(l) * l as f64 * score_at(ranked_s_scores, l + 1);
    Ok(MediatorScore {
        summation,
        closed_form: f * telescoped,
    })
}

/// `u_M = γ_l s_M − Σ_{j=l}^{K} (γ_j − γ_{j+1}) s_{σ(j+1)}`, where
/// `scores_below[0]` is `s_{σ(l+1)}`. A mediator without a slot earns 0.
pub fn mediator_payoff(
    ctr: &CtrCurve,
    slot: Option<usize>,
    mediator_score: f64,
    scores_below: &[f64],
) -> Result<f64> {
    let l = match slot {
        Some(l) if l >= 1 && l <= ctr.slots() => l,
        _ => return Ok(0.0),
    };
    check_ranked(scores_below)?;
    let paid: f64 = (l..=ctr.slots())
        .map(|j| ctr.drop_at(j) * score_at(scores_below, j + 1 - l))
        .sum();
    Ok(ctr.at(l) * mediator_score - paid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::auction::{sne_price_scores, validate_ctr_curve};

    fn ctr(g: &[f64]) -> CtrCurve {
        validate_ctr_curve(g).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn effective_ctr_scales_base_curve() {
        let c = ctr(&[1.0, 0.5]);
        let m = MediatorProfile::new("M", 0.8, 1.0, 2).unwrap();
        let eff = effective_ctr(&c, 2, &m).unwrap();
        assert!(close(eff.at(1), 0.4) && close(eff.at(2), 0.2));
        assert_eq!(eff.at(3), 0.0);
        assert_eq!(effective_ctr(&c, 3, &m).unwrap_err().code(), "E-SLOT");
        assert_eq!(effective_ctr(&c, 0, &m).unwrap_err().code(), "E-SLOT");
        let wide = MediatorProfile::new("M", 0.8, 1.0, 3).unwrap();
        assert_eq!(
            effective_ctr(&c, 1, &wide).unwrap_err().code(),
            "E-SECONDARY-SLOTS"
        );
    }

    #[test]
    fn degenerate_mediators_rejected() {
        assert_eq!(
            MediatorProfile::new("M", 0.8, 0.0, 1).unwrap_err().code(),
            "E-FITNESS"
        );
        assert_eq!(
            MediatorProfile::new("M", 0.0, 1.0, 1).unwrap_err().code(),
            "E-RELEVANCE"
        );
        let m = MediatorProfile::new("M", 1.0, 1.0, 1).unwrap();
        assert_eq!(
            m.validate_against(&ctr(&[1.0])).unwrap_err().code(),
            "E-FITNESS-BOUND"
        );
        // f may exceed 1 as long as f·γ_1 < 1.
        let m = MediatorProfile::new("M", 0.9, 1.5, 1).unwrap();
        assert!(m.validate_against(&ctr(&[0.7])).is_ok());
    }

    #[test]
    fn sub_auction_prices() {
        let c = ctr(&[1.0, 0.5]);
        assert_eq!(
            s_auction_price_scores(&c, 2, &[8.0, 5.0, 3.0]).unwrap(),
            vec![4.0, 3.0]
        );
        assert_eq!(
            s_auction_price_scores(&c, 1, &[8.0, 5.0]).unwrap(),
            vec![5.0]
        );
        assert_eq!(s_auction_price_scores(&c, 1, &[8.0]).unwrap(), vec![0.0]);
        assert_eq!(
            s_auction_price_scores(&c, 2, &[3.0, 5.0]).unwrap_err(),
            Error::UnsortedScores { position: 2 }
        );
    }

    #[test]
    fn sub_auction_prices_match_effective_curve_recursion() {
        let c = ctr(&[0.9, 0.6, 0.35, 0.2]);
        let m = MediatorProfile::new("M", 0.7, 1.2, 3).unwrap();
        let s = [9.0, 7.5, 4.0, 3.9, 1.0];
        let reduced = s_auction_price_scores(&c, 3, &s).unwrap();
        for l in 1..=4 {
            let eff = effective_ctr(&c, l, &m).unwrap().as_ctr_curve().unwrap();
            let direct = sne_price_scores(&eff, &s).unwrap();
            for (a, b) in reduced.iter().zip(&direct) {
                assert!(close(*a, *b), "l={l}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn mediator_score_examples() {
        let c = ctr(&[1.0, 0.5]);
        let m = MediatorProfile::new("M", 0.8, 1.0, 2).unwrap();
        let sm = mediator_score(&c, &m, &[8.0, 5.0, 3.0]).unwrap();
        assert!(close(sm.summation, 4.4) && close(sm.closed_form, 4.4));
        let m1 = MediatorProfile::new("M", 0.5, 1.0, 1).unwrap();
        let sm = mediator_score(&c, &m1, &[8.0, 5.0]).unwrap();
        assert!(close(sm.value(), 2.5) && close(sm.closed_form, 2.5));
        assert_eq!(mediator_score(&c, &m, &[]).unwrap().value(), 0.0);
    }

    #[test]
    fn mediator_payoff_examples() {
        let c = ctr(&[1.0, 0.5]);
        assert!(close(
            mediator_payoff(&c, Some(2), 4.4, &[4.0]).unwrap(),
            0.2
        ));
        // Marginal winner: s_M equals r_{l+1}.
        assert!(close(
            mediator_payoff(&c, Some(2), 4.0, &[4.0, 1.0]).unwrap(),
            0.0
        ));
        assert_eq!(mediator_payoff(&c, None, 4.4, &[4.0]).unwrap(), 0.0);
        assert_eq!(mediator_payoff(&c, Some(3), 4.4, &[]).unwrap(), 0.0);
    }
}
