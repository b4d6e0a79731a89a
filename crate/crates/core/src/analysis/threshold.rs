//! Minimum mediator fitness at which a previously winning advertiser is
//! fully compensated by the sub-auction.
//!
//! The closed-form threshold takes the mediator's slot `l` as given, but `l`
//! itself moves with fitness. Within one slot regime the advertiser's payoff
//! delta is affine in `f` (the mediator's score `f·B` enters the primary loss
//! through a single gap term), so each regime has at most one root. We solve
//! every regime, keep roots that land back in their own regime, and report
//! the smallest one at which the delta turns from negative to non-negative.

use serde::Serialize;

use super::{primary_loss, run_baseline, run_with_mediator, secondary_auction, MarketScenario};
use crate::auction::{score_at, AgentId, CtrCurve};
use crate::error::{Error, Result};
use crate::mediator::mediator_score;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ThresholdOutcome {
    /// Delta is zero at `fitness`, negative just below and positive just
    /// above, with the mediator in primary slot `mediator_slot`.
    Threshold { fitness: f64, mediator_slot: usize },
    /// The sub-auction cannot pay the advertiser anything at any fitness.
    Undefined,
    /// No self-consistent crossing inside `0 < f < 1/γ_1`.
    NoFixedPoint,
    /// Preconditions do not hold for this scenario or agent.
    Inapplicable { reason: String },
}

impl ThresholdOutcome {
    pub fn fitness(&self) -> Option<f64> {
        match self {
            ThresholdOutcome::Threshold { fitness, .. } => Some(*fitness),
            _ => None,
        }
    }

    fn inapplicable(reason: &str) -> Self {
        ThresholdOutcome::Inapplicable {
            reason: reason.to_owned(),
        }
    }
}

/// `Σ_{i=t}^{K} (γ_i − γ_{i+1}) (s_t − s_{i+1})`: the sub-auction payoff per
/// unit of `γ_l · f` for the bidder at sub-auction rank `t` when `L = K`.
fn compensation(ctr: &CtrCurve, s_scores: &[f64], t: usize) -> f64 {
    let own = score_at(s_scores, t);
    (t..=ctr.slots())
        .map(|i| ctr.drop_at(i) * (own - score_at(s_scores, i + 1)))
        .sum()
}

/// The threshold quotient for fixed `l`: primary loss of the advertiser at
/// mediated rank `j`, over `γ_l` times its per-fitness sub-auction payoff at
/// sub-auction rank `t`. `None` when the denominator is not positive.
pub fn fitness_threshold_formula(
    ctr: &CtrCurve,
    sigma_scores: &[f64],
    mediator_slot: usize,
    rank: usize,
    tau_scores: &[f64],
    s_rank: usize,
) -> Option<f64> {
    let numerator = primary_loss(ctr, sigma_scores, mediator_slot, rank);
    let denominator = ctr.at(mediator_slot) * compensation(ctr, tau_scores, s_rank);
    (denominator > 0.0).then(|| numerator / denominator)
}

/// Requires `L = K` and a sub-auction ranking identical to the baseline
/// primary ranking; otherwise returns [`ThresholdOutcome::Inapplicable`].
pub fn min_fitness_for_no_loss(
    scenario: &MarketScenario,
    agent: &AgentId,
) -> Result<ThresholdOutcome> {
    let mediator = scenario.mediator.as_ref().ok_or(Error::MediatorRequired)?;
    if scenario.advertiser(agent).is_none() {
        return Err(Error::UnknownAgent(agent.to_string()));
    }
    let ctr = &scenario.ctr;
    let k = ctr.slots();
    if mediator.secondary_slots != k {
        return Ok(ThresholdOutcome::inapplicable(
            "requires as many secondary slots as primary slots",
        ));
    }
    let base = run_baseline(scenario)?;
    let tau = secondary_auction(scenario, k)?;
    if tau.ranking.agents() != base.p_auction.ranking.agents() {
        return Ok(ThresholdOutcome::inapplicable(
            "requires the sub-auction ranking to equal the baseline ranking",
        ));
    }
    let Some(b) = base.p_auction.slot_of(agent) else {
        return Ok(ThresholdOutcome::inapplicable(
            "agent won no primary slot in the baseline",
        ));
    };
    let comp = compensation(ctr, &tau.scores, b);
    if comp <= 0.0 {
        return Ok(ThresholdOutcome::Undefined);
    }
    let unit_score = mediator_score(ctr, &mediator.with_fitness(1.0), &tau.scores)?.value();
    if unit_score <= 0.0 {
        return Ok(ThresholdOutcome::NoFixedPoint);
    }

    let base_scores = &base.p_auction.scores;
    let f_cap = 1.0 / ctr.top();
    let mut best: Option<(f64, usize)> = None;
    for l in 1..=k {
        let j = if b < l { b } else { b + 1 };
        let delta_at = |f: f64| {
            let mut sigma = base_scores.clone();
            sigma.insert((l - 1).min(sigma.len()), f * unit_score);
            f * ctr.at(l) * comp - primary_loss(ctr, &sigma, l, j)
        };
        let intercept = delta_at(0.0);
        let slope = delta_at(1.0) - intercept;
        if slope <= 0.0 {
            continue;
        }
        let root = -intercept / slope;
        if !(root > 0.0 && root < f_cap) || best.is_some_and(|(f, _)| f <= root) {
            continue;
        }
        let probe = run_with_mediator(&scenario.with_fitness(root)?)?;
        if probe.mediator_slot == Some(l) {
            best = Some((root, l));
        }
    }
    Ok(match best {
        Some((fitness, mediator_slot)) => ThresholdOutcome::Threshold {
            fitness,
            mediator_slot,
        },
        None => ThresholdOutcome::NoFixedPoint,
    })
}
