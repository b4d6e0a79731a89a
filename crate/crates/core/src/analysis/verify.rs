use std::fmt;

use serde::Serialize;

use super::{ComparisonReport, MarketScenario};
use crate::auction::{verify_sne, SneVerdict};
use crate::error::Result;
use crate::tolerance::Tolerance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    /// Primary auction with the mediator bidding.
    Primary,
    /// The mediator's sub-auction, on the effective curve.
    Secondary,
    /// Primary auction without the mediator.
    Baseline,
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tier::Primary => "primary",
            Tier::Secondary => "secondary",
            Tier::Baseline => "baseline",
        })
    }
}

/// Runs the equilibrium check on every auction the report holds. The
/// sub-auction is only checked when the mediator won a slot, since otherwise
/// it is never held.
pub fn equilibrium_checks(
    scenario: &MarketScenario,
    report: &ComparisonReport,
    tol: Tolerance,
) -> Result<Vec<(Tier, SneVerdict)>> {
    let with = &report.with_mediator;
    let mut out = vec![(
        Tier::Primary,
        verify_sne(
            &scenario.ctr,
            &with.p_auction.scores,
            &with.p_auction.price_scores,
            tol,
        )?,
    )];
    if let Some(eff) = &with.effective_ctr {
        let curve = eff.as_ctr_curve()?;
        out.push((
            Tier::Secondary,
            verify_sne(
                &curve,
                &with.s_auction.scores,
                &with.s_auction.price_scores,
                tol,
            )?,
        ));
    }
    let base = &report.baseline.p_auction;
    out.push((
        Tier::Baseline,
        verify_sne(&scenario.ctr, &base.scores, &base.price_scores, tol)?,
    ));
    Ok(out)
}

/// Every failed check for one scenario: equilibrium witnesses first, then
/// the report's own invariant violations.
pub fn market_failures(
    scenario: &MarketScenario,
    report: &ComparisonReport,
    tol: Tolerance,
) -> Result<Vec<String>> {
    let mut out: Vec<String> = equilibrium_checks(scenario, report, tol)?
        .into_iter()
        .filter_map(|(tier, verdict)| match verdict {
            SneVerdict::Pass => None,
            SneVerdict::Fail(w) => Some(format!(
                "{tier} auction not in equilibrium: rank {} earns {} but {} at {}",
                w.position,
                w.payoff_held,
                w.payoff_alternative,
                if w.alternative > scenario.ctr.slots() {
                    "no slot".to_owned()
                } else {
                    format!("slot {}", w.alternative)
                }
            )),
        })
        .collect();
    out.extend(report.violations(tol));
    Ok(out)
}
