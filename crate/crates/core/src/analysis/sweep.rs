use serde::Serialize;

use super::{compare, MarketScenario};
use crate::error::{Error, Result};
use crate::tolerance::Tolerance;

/// One fitness value of a sweep. Deltas are piecewise in fitness, so the
/// mediator's rank and slot are reported alongside.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub fitness: f64,
    pub mediator_rank: Option<usize>,
    pub mediator_slot: Option<usize>,
    pub mediator_score: f64,
    pub revenue_delta: f64,
    pub efficiency_delta: f64,
    pub mediator_payoff: f64,
    pub min_advertiser_delta: f64,
    /// Mediator placed and no advertiser worse off.
    pub win_win: bool,
}

/// Evenly spaced fitness values from `f_min` to `f_max` inclusive.
pub fn fitness_sweep(
    scenario: &MarketScenario,
    f_min: f64,
    f_max: f64,
    steps: usize,
    tol: Tolerance,
) -> Result<Vec<SweepRow>> {
    if scenario.mediator.is_none() {
        return Err(Error::MediatorRequired);
    }
    if !(f_min > 0.0 && f_min <= f_max) {
        return Err(Error::InvalidSweep(format!(
            "need 0 < f_min <= f_max, got [{f_min}, {f_max}]"
        )));
    }
    if f_max * scenario.ctr.top() >= 1.0 {
        return Err(Error::InvalidSweep(format!(
            "f_max {f_max} times top CTR {} must be below 1",
            scenario.ctr.top()
        )));
    }
    if steps == 0 {
        return Err(Error::InvalidSweep("steps must be at least 1".into()));
    }
    (0..steps)
        .map(|i| {
            let f = if steps == 1 {
                f_min
            } else {
                f_min + (f_max - f_min) * i as f64 / (steps - 1) as f64
            };
            let report = compare(&scenario.with_fitness(f)?)?;
            let with = &report.with_mediator;
            let min_delta = report
                .advertisers
                .iter()
                .map(|a| a.delta.direct)
                .fold(f64::INFINITY, f64::min);
            Ok(SweepRow {
                fitness: f,
                mediator_rank: with.mediator_rank,
                mediator_slot: with.mediator_slot,
                mediator_score: with.mediator_score.value(),
                revenue_delta: report.revenue_delta.direct,
                efficiency_delta: report.efficiency_delta.direct,
                mediator_payoff: with.mediator_payoff,
                min_advertiser_delta: min_delta,
                win_win: with.mediator_won() && tol.non_negative(min_delta, 0.0),
            })
        })
        .collect()
}
