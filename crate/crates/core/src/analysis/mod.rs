//! Market-level pipeline: the equilibrium with the mediator, the baseline
//! without it, and the comparative statics between the two.
//!
//! Every delta is computed twice, once by subtracting the two runs and once
//! through the telescoped closed form. The two routes share no code past the
//! equilibrium price recursion, so their agreement is a real check.

mod sweep;
mod threshold;
mod verify;

pub use sweep::{fitness_sweep, SweepRow};
pub use threshold::{fitness_threshold_formula, min_fitness_for_no_loss, ThresholdOutcome};
pub use verify::{equilibrium_checks, market_failures, Tier};

use std::collections::HashSet;

use serde::Serialize;

use crate::auction::{
    auction_revenue, score_at, slot_payoff, solve_sne, solve_with, AdvertiserProfile, AgentId,
    CtrCurve, Entrant, SneOutcome,
};
use crate::error::{Error, Result};
use crate::mediator::{
    effective_ctr, mediator_payoff, mediator_score, s_auction_price_scores, EffectiveCtrCurve,
    MediatorProfile, MediatorScore,
};
use crate::tolerance::Tolerance;

#[derive(Debug, Clone, PartialEq)]
pub struct MarketScenario {
    pub ctr: CtrCurve,
    pub advertisers: Vec<AdvertiserProfile>,
    pub mediator: Option<MediatorProfile>,
}

impl MarketScenario {
    pub fn new(
        ctr: CtrCurve,
        advertisers: Vec<AdvertiserProfile>,
        mediator: Option<MediatorProfile>,
    ) -> Result<Self> {
        let scenario = MarketScenario {
            ctr,
            advertisers,
            mediator,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<()> {
        if self.advertisers.is_empty() {
            return Err(Error::NoAdvertisers);
        }
        let mut seen = HashSet::new();
        for a in &self.advertisers {
            a.validate()?;
            if !seen.insert(&a.id) {
                return Err(Error::DuplicateAgent(a.id.to_string()));
            }
        }
        if let Some(m) = &self.mediator {
            if seen.contains(&m.id) {
                return Err(Error::DuplicateAgent(m.id.to_string()));
            }
            m.validate_against(&self.ctr)?;
        }
        Ok(())
    }

    pub fn advertiser(&self, id: &AgentId) -> Option<&AdvertiserProfile> {
        self.advertisers.iter().find(|a| &a.id == id)
    }

    /// Same market with the mediator's fitness replaced.
    pub fn with_fitness(&self, fitness: f64) -> Result<Self> {
        let mediator = self.mediator.as_ref().ok_or(Error::MediatorRequired)?;
        MarketScenario::new(
            self.ctr.clone(),
            self.advertisers.clone(),
            Some(mediator.with_fitness(fitness)),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgentPayoff {
    pub id: AgentId,
    pub p_slot: Option<usize>,
    pub s_slot: Option<usize>,
    pub p_payoff: f64,
    pub s_payoff: f64,
}

impl AgentPayoff {
    pub fn total(&self) -> f64 {
        self.p_payoff + self.s_payoff
    }
}

/// Aggregates shared by both market outcomes.
pub trait MarketOutcome {
    fn revenue(&self) -> f64;
    fn efficiency(&self) -> f64;
    /// Sum of every agent's payoff, the mediator's included.
    fn total_payoff(&self) -> f64;
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaselineOutcome {
    pub p_auction: SneOutcome,
    pub revenue: f64,
    pub efficiency: f64,
    pub payoffs: Vec<AgentPayoff>,
}

impl BaselineOutcome {
    pub fn payoff(&self, id: &AgentId) -> Option<&AgentPayoff> {
        self.payoffs.iter().find(|p| &p.id == id)
    }
}

impl MarketOutcome for BaselineOutcome {
    fn revenue(&self) -> f64 {
        self.revenue
    }
    fn efficiency(&self) -> f64 {
        self.efficiency
    }
    fn total_payoff(&self) -> f64 {
        self.payoffs.iter().map(AgentPayoff::total).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MediatedOutcome {
    pub mediator: AgentId,
    pub fitness: f64,
    pub secondary_slots: usize,
    /// The sub-auction among advertisers with positive secondary value. When
    /// the mediator loses it is reported but never held.
    pub s_auction: SneOutcome,
    pub mediator_score: MediatorScore,
    /// `s_M / e_M`.
    pub mediator_value: f64,
    /// Rank among all primary bidders, losing ranks included.
    pub mediator_rank: Option<usize>,
    /// Primary slot `l`; `None` means the market falls back to the baseline.
    pub mediator_slot: Option<usize>,
    pub effective_ctr: Option<EffectiveCtrCurve>,
    pub p_auction: SneOutcome,
    pub revenue: f64,
    pub efficiency: f64,
    pub mediator_payoff: f64,
    pub payoffs: Vec<AgentPayoff>,
}

impl MediatedOutcome {
    pub fn mediator_won(&self) -> bool {
        self.mediator_slot.is_some()
    }

    pub fn payoff(&self, id: &AgentId) -> Option<&AgentPayoff> {
        self.payoffs.iter().find(|p| &p.id == id)
    }
}

impl MarketOutcome for MediatedOutcome {
    fn revenue(&self) -> f64 {
        self.revenue
    }
    fn efficiency(&self) -> f64 {
        self.efficiency
    }
    fn total_payoff(&self) -> f64 {
        self.payoffs.iter().map(AgentPayoff::total).sum::<f64>() + self.mediator_payoff
    }
}

/// Where the mediator sits, as far as the efficiency sum is concerned.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MediatorPlacement {
    pub slot: usize,
    pub fitness: f64,
    pub secondary_slots: usize,
}

/// Social value of the allocation. Without a mediator this is
/// `Σ_j γ_j s_{σ(j)}`; with one, the mediator's own slot is replaced by the
/// value its sub-auction winners draw through it,
/// `γ_l f Σ_{j ≤ L} γ_j s^s_{τ(j)}`.
pub fn efficiency(
    ctr: &CtrCurve,
    ranked_p_scores: &[f64],
    placement: Option<&MediatorPlacement>,
    ranked_s_scores: &[f64],
) -> f64 {
    let primary: f64 = (1..=ctr.slots())
        .filter(|&j| placement.is_none_or(|p| p.slot != j))
        .map(|j| ctr.at(j) * score_at(ranked_p_scores, j))
        .sum();
    let resold = placement.map_or(0.0, |p| {
        ctr.at(p.slot)
            * p.fitness
            * (1..=p.secondary_slots)
                .map(|j| ctr.at(j) * score_at(ranked_s_scores, j))
                .sum::<f64>()
    });
    primary + resold
}

fn primary_entrants(scenario: &MarketScenario) -> Vec<Entrant> {
    scenario
        .advertisers
        .iter()
        .filter(|a| a.in_primary())
        .map(|a| Entrant {
            id: a.id.clone(),
            score: a.score_p(),
            relevance: a.e_p,
        })
        .collect()
}

/// The mediator's sub-auction; its prices never depend on the primary slot.
pub fn secondary_auction(scenario: &MarketScenario, slots: usize) -> Result<SneOutcome> {
    let entrants: Vec<Entrant> = scenario
        .advertisers
        .iter()
        .filter(|a| a.in_secondary())
        .map(|a| Entrant {
            id: a.id.clone(),
            score: a.score_s(),
            relevance: a.e_s,
        })
        .collect();
    solve_with(&entrants, |scores| {
        s_auction_price_scores(&scenario.ctr, slots, scores)
    })
}

/// Equilibrium among advertisers only.
pub fn run_baseline(scenario: &MarketScenario) -> Result<BaselineOutcome> {
    scenario.validate()?;
    let ctr = &scenario.ctr;
    let p_auction = solve_sne(ctr, &primary_entrants(scenario))?;
    let revenue = auction_revenue(ctr, &p_auction.price_scores)?;
    let efficiency = efficiency(ctr, &p_auction.scores, None, &[]);
    let payoffs = scenario
        .advertisers
        .iter()
        .map(|a| AgentPayoff {
            id: a.id.clone(),
            p_slot: p_auction.slot_of(&a.id),
            s_slot: None,
            p_payoff: p_auction.payoff_of(ctr, &a.id),
            s_payoff: 0.0,
        })
        .collect();
    Ok(BaselineOutcome {
        p_auction,
        revenue,
        efficiency,
        payoffs,
    })
}

/// Equilibrium with the mediator: sub-auction first, then the mediator's
/// score, then the primary auction with her in it.
pub fn run_with_mediator(scenario: &MarketScenario) -> Result<MediatedOutcome> {
    scenario.validate()?;
    let ctr = &scenario.ctr;
    let mediator = scenario.mediator.as_ref().ok_or(Error::MediatorRequired)?;
    let s_auction = secondary_auction(scenario, mediator.secondary_slots)?;
    let m_score = mediator_score(ctr, mediator, &s_auction.scores)?;
    let s_m = m_score.value();

    let mut entrants = primary_entrants(scenario);
    if s_m > 0.0 {
        entrants.push(Entrant {
            id: mediator.id.clone(),
            score: s_m,
            relevance: mediator.relevance_p,
        });
    }
    let contested = solve_sne(ctr, &entrants)?;
    let mediator_rank = contested.ranking.position_of(&mediator.id);
    let mediator_slot = contested.slot_of(&mediator.id);

    let shell = |p_auction: SneOutcome| MediatedOutcome {
        mediator: mediator.id.clone(),
        fitness: mediator.fitness(),
        secondary_slots: mediator.secondary_slots,
        s_auction: s_auction.clone(),
        mediator_score: m_score,
        mediator_value: s_m / mediator.relevance_p,
        mediator_rank,
        mediator_slot,
        effective_ctr: None,
        p_auction,
        revenue: 0.0,
        efficiency: 0.0,
        mediator_payoff: 0.0,
        payoffs: Vec::new(),
    };

    let Some(l) = mediator_slot else {
        let base = run_baseline(scenario)?;
        let mut out = shell(base.p_auction);
        out.revenue = base.revenue;
        out.efficiency = base.efficiency;
        out.payoffs = base.payoffs;
        return Ok(out);
    };

    let eff = effective_ctr(ctr, l, mediator)?;
    let revenue = auction_revenue(ctr, &contested.price_scores)?;
    let placement = MediatorPlacement {
        slot: l,
        fitness: mediator.fitness(),
        secondary_slots: mediator.secondary_slots,
    };
    let efficiency = efficiency(ctr, &contested.scores, Some(&placement), &s_auction.scores);
    let u_m = mediator_payoff(ctr, Some(l), s_m, &contested.scores[l..])?;
    let payoffs = scenario
        .advertisers
        .iter()
        .map(|a| {
            let s_slot = s_auction.slot_of(&a.id);
            let s_payoff = s_slot.map_or(0.0, |t| {
                slot_payoff(a.score_s(), eff.at(t), s_auction.price_score_for(t))
            });
            AgentPayoff {
                id: a.id.clone(),
                p_slot: contested.slot_of(&a.id),
                s_slot,
                p_payoff: contested.payoff_of(ctr, &a.id),
                s_payoff,
            }
        })
        .collect();

    let mut out = shell(contested);
    out.effective_ctr = Some(eff);
    out.revenue = revenue;
    out.efficiency = efficiency;
    out.mediator_payoff = u_m;
    out.payoffs = payoffs;
    Ok(out)
}

fn check_same_market(with: &MediatedOutcome, base: &BaselineOutcome) -> Result<()> {
    let without: Vec<&AgentId> = with
        .p_auction
        .ranking
        .agents()
        .iter()
        .filter(|id| **id != with.mediator)
        .collect();
    let baseline: Vec<&AgentId> = base.p_auction.ranking.agents().iter().collect();
    if without != baseline || with.payoffs.len() != base.payoffs.len() {
        return Err(Error::ScenarioMismatch);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RevenueDelta {
    /// `R − R0`.
    pub direct: f64,
    /// `Σ_{j ≥ max(1, l−1)} (γ_j − γ_{j+1}) j (s_{σ(j+1)} − s_{σ(j+2)})`.
    pub telescoped: f64,
}

pub fn revenue_delta(
    ctr: &CtrCurve,
    with: &MediatedOutcome,
    base: &BaselineOutcome,
) -> Result<RevenueDelta> {
    check_same_market(with, base)?;
    let telescoped = with.mediator_slot.map_or(0.0, |l| {
        let s = &with.p_auction.scores;
        (l.saturating_sub(1).max(1)..=ctr.slots())
            .map(|j| ctr.drop_at(j) * j as f64 * (score_at(s, j + 1) - score_at(s, j + 2)))
            .sum()
    });
    Ok(RevenueDelta {
        direct: with.revenue - base.revenue,
        telescoped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EfficiencyDelta {
    /// `E − E0`.
    pub direct: f64,
    /// `γ_l f Σ_j γ_j s^s_{τ(j)} − γ_l r^p_{l+1}`.
    pub intermediate: f64,
}

pub fn efficiency_delta(
    ctr: &CtrCurve,
    with: &MediatedOutcome,
    base: &BaselineOutcome,
) -> Result<EfficiencyDelta> {
    check_same_market(with, base)?;
    let intermediate = with.mediator_slot.map_or(0.0, |l| {
        let resold: f64 = (1..=with.secondary_slots)
            .map(|j| ctr.at(j) * score_at(&with.s_auction.scores, j))
            .sum();
        ctr.at(l) * with.fitness * resold - ctr.at(l) * with.p_auction.price_score_for(l)
    });
    Ok(EfficiencyDelta {
        direct: with.efficiency - base.efficiency,
        intermediate,
    })
}

/// Primary-side payoff lost by the advertiser at rank `j` of the mediated
/// ranking when the mediator takes slot `l`:
/// `Σ_{i ≥ max(l−1, j−1)} (γ_i − γ_{i+1}) (s_{σ(i+1)} − s_{σ(i+2)})`.
pub(crate) fn primary_loss(ctr: &CtrCurve, sigma_scores: &[f64], l: usize, j: usize) -> f64 {
    let start = (l.max(j)).saturating_sub(1).max(1);
    (start..=ctr.slots())
        .map(|i| ctr.drop_at(i) * (score_at(sigma_scores, i + 1) - score_at(sigma_scores, i + 2)))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PayoffDelta {
    /// `u − u^0` from the two runs.
    pub direct: f64,
    /// `u^s − primary loss`.
    pub closed_form: f64,
}

pub fn advertiser_payoff_delta(
    ctr: &CtrCurve,
    with: &MediatedOutcome,
    base: &BaselineOutcome,
    agent: &AgentId,
) -> Result<PayoffDelta> {
    check_same_market(with, base)?;
    let now = with
        .payoff(agent)
        .ok_or_else(|| Error::UnknownAgent(agent.to_string()))?;
    let before = base
        .payoff(agent)
        .ok_or_else(|| Error::UnknownAgent(agent.to_string()))?;
    let closed_form = match with.mediator_slot {
        None => 0.0,
        Some(l) => {
            let loss = with
                .p_auction
                .ranking
                .position_of(agent)
                .map_or(0.0, |j| primary_loss(ctr, &with.p_auction.scores, l, j));
            now.s_payoff - loss
        }
    };
    Ok(PayoffDelta {
        direct: now.total() - before.total(),
        closed_form,
    })
}

/// `E − (R + Σ u)`; zero up to rounding for any equilibrium outcome.
pub fn accounting_check(outcome: &impl MarketOutcome) -> f64 {
    outcome.efficiency() - (outcome.revenue() + outcome.total_payoff())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdvertiserComparison {
    pub id: AgentId,
    pub baseline_slot: Option<usize>,
    pub new_slot: Option<usize>,
    pub s_slot: Option<usize>,
    pub baseline_payoff: f64,
    pub payoff: f64,
    pub s_payoff: f64,
    pub delta: PayoffDelta,
    pub threshold: ThresholdOutcome,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AccountingResiduals {
    pub with_mediator: f64,
    pub baseline: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub with_mediator: MediatedOutcome,
    pub baseline: BaselineOutcome,
    pub revenue_delta: RevenueDelta,
    pub efficiency_delta: EfficiencyDelta,
    pub advertisers: Vec<AdvertiserComparison>,
    pub accounting: AccountingResiduals,
}

pub fn compare(scenario: &MarketScenario) -> Result<ComparisonReport> {
    let with = run_with_mediator(scenario)?;
    let base = run_baseline(scenario)?;
    let ctr = &scenario.ctr;
    let revenue = revenue_delta(ctr, &with, &base)?;
    let efficiency = efficiency_delta(ctr, &with, &base)?;
    let advertisers = scenario
        .advertisers
        .iter()
        .map(|a| {
            let now = with
                .payoff(&a.id)
                .expect("every advertiser has a payoff row");
            let before = base
                .payoff(&a.id)
                .expect("every advertiser has a payoff row");
            Ok(AdvertiserComparison {
                id: a.id.clone(),
                baseline_slot: before.p_slot,
                new_slot: now.p_slot,
                s_slot: now.s_slot,
                baseline_payoff: before.total(),
                payoff: now.total(),
                s_payoff: now.s_payoff,
                delta: advertiser_payoff_delta(ctr, &with, &base, &a.id)?,
                threshold: min_fitness_for_no_loss(scenario, &a.id)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let accounting = AccountingResiduals {
        with_mediator: accounting_check(&with),
        baseline: accounting_check(&base),
    };
    Ok(ComparisonReport {
        with_mediator: with,
        baseline: base,
        revenue_delta: revenue,
        efficiency_delta: efficiency,
        advertisers,
        accounting,
    })
}

impl ComparisonReport {
    /// Every violated invariant, as a human-readable line. Empty when the
    /// report is internally consistent.
    pub fn violations(&self, tol: Tolerance) -> Vec<String> {
        let mut out = Vec::new();
        let rd = self.revenue_delta;
        if !tol.non_negative(rd.direct, self.with_mediator.revenue) {
            out.push(format!("revenue decreased: R - R0 = {}", rd.direct));
        }
        if !tol.close(rd.direct, rd.telescoped) {
            out.push(format!(
                "revenue delta forms disagree: direct {} vs telescoped {}",
                rd.direct, rd.telescoped
            ));
        }
        let ed = self.efficiency_delta;
        if !tol.non_negative(ed.direct, self.with_mediator.efficiency) {
            out.push(format!("efficiency decreased: E - E0 = {}", ed.direct));
        }
        if !tol.close(ed.direct, ed.intermediate) {
            out.push(format!(
                "efficiency delta forms disagree: direct {} vs intermediate {}",
                ed.direct, ed.intermediate
            ));
        }
        let ms = self.with_mediator.mediator_score;
        if !tol.close(ms.summation, ms.closed_form) {
            out.push(format!(
                "mediator score forms disagree: {} vs {}",
                ms.summation, ms.closed_form
            ));
        }
        if self.with_mediator.mediator_won()
            && !tol.non_negative(self.with_mediator.mediator_payoff, ms.value())
        {
            out.push(format!(
                "mediator payoff negative: {}",
                self.with_mediator.mediator_payoff
            ));
        }
        for a in &self.advertisers {
            if !tol.close(a.delta.direct, a.delta.closed_form) {
                out.push(format!(
                    "payoff delta forms disagree for {}: direct {} vs closed form {}",
                    a.id, a.delta.direct, a.delta.closed_form
                ));
            }
        }
        let residuals = [
            (
                "with mediator",
                self.accounting.with_mediator,
                self.with_mediator.efficiency,
            ),
            (
                "baseline",
                self.accounting.baseline,
                self.baseline.efficiency,
            ),
        ];
        for (label, residual, e) in residuals {
            if residual.abs() > tol.value() * (1.0 + e.abs()) {
                out.push(format!("accounting residual ({label}) = {residual}"));
            }
        }
        out
    }
}
