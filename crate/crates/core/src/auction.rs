//! Position-auction primitives: click-through curves, rank-by-revenue
//! ordering, the equilibrium price-score recursion and an independent
//! equilibrium checker.
//!
//! Slots and ranks are 1-based throughout. A ranked score vector holds the
//! participants' scores `s = e * v` in rank order; any rank past its end is
//! read as a zero score. A price-score vector for a `K`-slot curve holds
//! `r_2 ..= r_{K+1}`, where the occupant of slot `j` pays `r_{j+1}` per unit
//! of relevance.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerance::Tolerance;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentId(String);

impl AgentId {
    pub fn new(id: impl Into<String>) -> Self {
        AgentId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for AgentId {
    fn from(s: &str) -> Self {
        AgentId(s.to_owned())
    }
}

/// Position effects `γ_1 > γ_2 > … > γ_K > 0`, with `γ_j = 0` for `j > K`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct CtrCurve {
    gammas: Vec<f64>,
}

impl CtrCurve {
    pub fn new(gammas: Vec<f64>) -> Result<Self> {
        if gammas.is_empty() {
            return Err(Error::EmptyCtr);
        }
        for (i, &g) in gammas.iter().enumerate() {
            if !(g > 0.0 && g <= 1.0) {
                return Err(Error::CtrOutOfRange {
                    slot: i + 1,
                    value: g,
                });
            }
        }
        for (i, w) in gammas.windows(2).enumerate() {
            if w[1] >= w[0] {
                return Err(Error::CtrNotDecreasing {
                    slot: i + 2,
                    prev: w[0],
                    next: w[1],
                });
            }
        }
        Ok(CtrCurve { gammas })
    }

    /// Number of slots `K`.
    pub fn slots(&self) -> usize {
        self.gammas.len()
    }

    /// `γ_slot`, zero past the last slot.
    pub fn at(&self, slot: usize) -> f64 {
        assert!(slot >= 1, "slots are 1-based");
        self.gammas.get(slot - 1).copied().unwrap_or(0.0)
    }

    /// `γ_slot - γ_{slot+1}`.
    pub fn drop_at(&self, slot: usize) -> f64 {
        self.at(slot) - self.at(slot + 1)
    }

    pub fn top(&self) -> f64 {
        self.gammas[0]
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    /// The first `slots` entries. A prefix of a valid curve is valid.
    pub fn truncated(&self, slots: usize) -> Result<CtrCurve> {
        if slots == 0 || slots > self.slots() {
            return Err(Error::SlotOutOfRange {
                slot: slots,
                slots: self.slots(),
            });
        }
        Ok(CtrCurve {
            gammas: self.gammas[..slots].to_vec(),
        })
    }
}

pub fn validate_ctr_curve(gammas: &[f64]) -> Result<CtrCurve> {
    CtrCurve::new(gammas.to_vec())
}

/// One advertiser's per-click values and relevances for both auction tiers.
/// A zero valuation means the advertiser stays out of that tier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdvertiserProfile {
    pub id: AgentId,
    pub v_p: f64,
    pub e_p: f64,
    pub v_s: f64,
    pub e_s: f64,
}

impl AdvertiserProfile {
    pub fn new(id: impl Into<AgentId>, v_p: f64, e_p: f64, v_s: f64, e_s: f64) -> Result<Self> {
        let profile = AdvertiserProfile {
            id: id.into(),
            v_p,
            e_p,
            v_s,
            e_s,
        };
        profile.validate()?;
        Ok(profile)
    }

    pub fn validate(&self) -> Result<()> {
        for v in [self.v_p, self.v_s] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidValuation {
                    agent: self.id.to_string(),
                    value: v,
                });
            }
        }
        for e in [self.e_p, self.e_s] {
            if !(e > 0.0 && e <= 1.0) {
                return Err(Error::InvalidRelevance {
                    agent: self.id.to_string(),
                    value: e,
                });
            }
        }
        Ok(())
    }

    pub fn score_p(&self) -> f64 {
        self.v_p * self.e_p
    }

    pub fn score_s(&self) -> f64 {
        self.v_s * self.e_s
    }

    pub fn in_primary(&self) -> bool {
        self.v_p > 0.0
    }

    pub fn in_secondary(&self) -> bool {
        self.v_s > 0.0
    }
}

impl From<String> for AgentId {
    fn from(s: String) -> Self {
        AgentId(s)
    }
}

/// An allocation: rank `j` holds `σ(j)`.
#[derive(Debug, Clone, Serialize)]
pub struct Ranking {
    order: Vec<AgentId>,
    #[serde(skip)]
    index: HashMap<AgentId, usize>,
}

impl PartialEq for Ranking {
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order
    }
}

impl Ranking {
    fn from_order(order: Vec<AgentId>) -> Result<Self> {
        let mut index = HashMap::with_capacity(order.len());
        for (i, id) in order.iter().enumerate() {
            if index.insert(id.clone(), i + 1).is_some() {
                return Err(Error::DuplicateAgent(id.to_string()));
            }
        }
        Ok(Ranking { order, index })
    }

    pub fn agents(&self) -> &[AgentId] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn agent_at(&self, position: usize) -> Option<&AgentId> {
        position.checked_sub(1).and_then(|i| self.order.get(i))
    }

    pub fn position_of(&self, agent: &AgentId) -> Option<usize> {
        self.index.get(agent).copied()
    }
}

/// Sort by score descending, ties by ascending agent id.
pub fn rank_by_score(entries: &[(AgentId, f64)]) -> Result<Ranking> {
    for (i, (_, s)) in entries.iter().enumerate() {
        if !(s.is_finite() && *s >= 0.0) {
            return Err(Error::InvalidScore {
                position: i + 1,
                value: *s,
            });
        }
    }
    let mut sorted: Vec<&(AgentId, f64)> = entries.iter().collect();
    sorted.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Ranking::from_order(sorted.into_iter().map(|(id, _)| id.clone()).collect())
}

/// Score at 1-based rank, zero past the end.
pub(crate) fn score_at(scores: &[f64], rank: usize) -> f64 {
    rank.checked_sub(1)
        .and_then(|i| scores.get(i))
        .copied()
        .unwrap_or(0.0)
}

pub(crate) fn check_ranked(scores: &[f64]) -> Result<()> {
    for (i, &s) in scores.iter().enumerate() {
        if !(s.is_finite() && s >= 0.0) {
            return Err(Error::InvalidScore {
                position: i + 1,
                value: s,
            });
        }
        if i > 0 && s > scores[i - 1] {
            return Err(Error::UnsortedScores { position: i + 1 });
        }
    }
    Ok(())
}

/// Equilibrium price-scores `r_2 ..= r_{K+1}` from
/// `γ_i r_{i+1} = Σ_{j=i}^{K} (γ_j − γ_{j+1}) s_{j+1}`, accumulated from the
/// bottom slot upward.
pub fn sne_price_scores(ctr: &CtrCurve, ranked_scores: &[f64]) -> Result<Vec<f64>> {
    check_ranked(ranked_scores)?;
    let k = ctr.slots();
    let mut prices = vec![0.0; k];
    let mut acc = 0.0;
    for i in (1..=k).rev() {
        acc += ctr.drop_at(i) * score_at(ranked_scores, i + 1);
        prices[i - 1] = acc / ctr.at(i);
    }
    Ok(prices)
}

/// Raw generalized-second-price charge: slot `i` pays `s_{i+1} / e_i` per
/// click. Input is `(score, relevance)` in rank order.
pub fn gsp_next_score_prices(ranked: &[(f64, f64)]) -> Result<Vec<f64>> {
    let scores: Vec<f64> = ranked.iter().map(|(s, _)| *s).collect();
    check_ranked(&scores)?;
    ranked
        .iter()
        .enumerate()
        .map(|(i, &(_, e))| {
            if e.is_nan() || e <= 0.0 {
                return Err(Error::InvalidRelevance {
                    agent: format!("rank {}", i + 1),
                    value: e,
                });
            }
            Ok(score_at(&scores, i + 2) / e)
        })
        .collect()
}

/// `R = Σ_j γ_j r_{j+1}`.
pub fn auction_revenue(ctr: &CtrCurve, price_scores: &[f64]) -> Result<f64> {
    if price_scores.len() != ctr.slots() {
        return Err(Error::LengthMismatch {
            expected: ctr.slots(),
            actual: price_scores.len(),
        });
    }
    Ok(price_scores
        .iter()
        .enumerate()
        .map(|(i, r)| ctr.at(i + 1) * r)
        .sum())
}

/// `R = Σ_j (γ_j − γ_{j+1}) · j · s_{j+1}`.
pub fn revenue_closed_form(ctr: &CtrCurve, ranked_scores: &[f64]) -> Result<f64> {
    check_ranked(ranked_scores)?;
    Ok((1..=ctr.slots())
        .map(|j| ctr.drop_at(j) * j as f64 * score_at(ranked_scores, j + 1))
        .sum())
}

/// `γ_j (s − r_{j+1})`; negative values are allowed for deviation probes.
pub fn slot_payoff(score: f64, ctr_at_slot: f64, price_score: f64) -> f64 {
    ctr_at_slot * (score - price_score)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SneViolation {
    /// Rank of the agent that would deviate.
    pub position: usize,
    /// Slot it prefers; `K + 1` means dropping out.
    pub alternative: usize,
    pub payoff_held: f64,
    pub payoff_alternative: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum SneVerdict {
    Pass,
    Fail(SneViolation),
}

impl SneVerdict {
    pub fn passed(&self) -> bool {
        matches!(self, SneVerdict::Pass)
    }
}

/// Checks `γ_i (s_i − r_{i+1}) ≥ γ_j (s_i − r_{j+1})` for every ranked agent
/// `i` (winners and losers) and every slot `j`, plus the option of not
/// winning at all. Reports the first violation in rank-then-slot order.
pub fn verify_sne(
    ctr: &CtrCurve,
    ranked_scores: &[f64],
    price_scores: &[f64],
    tol: Tolerance,
) -> Result<SneVerdict> {
    let k = ctr.slots();
    if price_scores.len() != k {
        return Err(Error::LengthMismatch {
            expected: k,
            actual: price_scores.len(),
        });
    }
    let price_for = |slot: usize| {
        if slot <= k {
            price_scores[slot - 1]
        } else {
            0.0
        }
    };
    for (idx, &s) in ranked_scores.iter().enumerate() {
        let position = idx + 1;
        let held = slot_payoff(s, ctr.at(position), price_for(position));
        for alternative in 1..=k + 1 {
            if alternative == position {
                continue;
            }
            let alt = slot_payoff(s, ctr.at(alternative), price_for(alternative));
            if !tol.at_least(held, alt) {
                return Ok(SneVerdict::Fail(SneViolation {
                    position,
                    alternative,
                    payoff_held: held,
                    payoff_alternative: alt,
                }));
            }
        }
    }
    Ok(SneVerdict::Pass)
}

/// A bidder entering one auction tier.
#[derive(Debug, Clone, PartialEq)]
pub struct Entrant {
    pub id: AgentId,
    pub score: f64,
    pub relevance: f64,
}

/// Equilibrium of one auction tier.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SneOutcome {
    pub ranking: Ranking,
    /// Participants' scores in rank order.
    pub scores: Vec<f64>,
    #[serde(skip)]
    pub relevances: Vec<f64>,
    /// `r_2 ..= r_{K+1}`.
    pub price_scores: Vec<f64>,
    /// Per-click price of each winning slot, `r_{j+1} / e_{σ(j)}`.
    pub per_click_prices: Vec<f64>,
    /// Equilibrium bids of the winners. The top bid is not pinned by the
    /// recursion and is reported as the truthful value.
    pub derived_bids: Vec<f64>,
}

impl SneOutcome {
    pub fn winners(&self) -> usize {
        self.scores.len().min(self.price_scores.len())
    }

    /// Slot won by `agent`, if any.
    pub fn slot_of(&self, agent: &AgentId) -> Option<usize> {
        self.ranking
            .position_of(agent)
            .filter(|&p| p <= self.price_scores.len())
    }

    /// `r_{slot+1}`.
    pub fn price_score_for(&self, slot: usize) -> f64 {
        slot.checked_sub(1)
            .and_then(|i| self.price_scores.get(i))
            .copied()
            .unwrap_or(0.0)
    }

    /// Equilibrium payoff `γ_j (s − r_{j+1})` of `agent`; zero for losers.
    pub fn payoff_of(&self, ctr: &CtrCurve, agent: &AgentId) -> f64 {
        match self.slot_of(agent) {
            Some(slot) => slot_payoff(
                self.scores[slot - 1],
                ctr.at(slot),
                self.price_score_for(slot),
            ),
            None => 0.0,
        }
    }
}

/// Ranks the entrants and computes the equilibrium profile for `ctr`.
pub fn solve_sne(ctr: &CtrCurve, entrants: &[Entrant]) -> Result<SneOutcome> {
    solve_with(entrants, |scores| sne_price_scores(ctr, scores))
}

/// Ranks the entrants and prices them with `price_scores`, which maps the
/// ranked scores to `r_2 ..= r_{K+1}`.
pub(crate) fn solve_with(
    entrants: &[Entrant],
    price_scores: impl FnOnce(&[f64]) -> Result<Vec<f64>>,
) -> Result<SneOutcome> {
    let keyed: Vec<(AgentId, f64)> = entrants.iter().map(|e| (e.id.clone(), e.score)).collect();
    let ranking = rank_by_score(&keyed)?;
    let by_id: HashMap<&AgentId, &Entrant> = entrants.iter().map(|e| (&e.id, e)).collect();
    let ordered: Vec<&Entrant> = ranking.agents().iter().map(|id| by_id[id]).collect();
    for e in &ordered {
        if !(e.relevance > 0.0 && e.relevance <= 1.0) {
            return Err(Error::InvalidRelevance {
                agent: e.id.to_string(),
                value: e.relevance,
            });
        }
    }
    let scores: Vec<f64> = ordered.iter().map(|e| e.score).collect();
    let relevances: Vec<f64> = ordered.iter().map(|e| e.relevance).collect();
    let price_scores = price_scores(&scores)?;
    let winners = scores.len().min(price_scores.len());
    let per_click_prices = (0..winners)
        .map(|i| price_scores[i] / relevances[i])
        .collect();
    let derived_bids = (0..winners)
        .map(|i| {
            if i == 0 {
                scores[0] / relevances[0]
            } else {
                price_scores[i - 1] / relevances[i]
            }
        })
        .collect();
    Ok(SneOutcome {
        ranking,
        scores,
        relevances,
        price_scores,
        per_click_prices,
        derived_bids,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctr(g: &[f64]) -> CtrCurve {
        validate_ctr_curve(g).unwrap()
    }

    fn ids(r: &Ranking) -> Vec<&str> {
        r.agents().iter().map(AgentId::as_str).collect()
    }

    #[test]
    fn ctr_curve_validation() {
        let c = ctr(&[1.0, 0.5]);
        assert_eq!(c.slots(), 2);
        assert_eq!(c.at(3), 0.0);
        assert_eq!(ctr(&[1.0, 0.6, 0.3, 0.1]).slots(), 4);
        assert_eq!(
            validate_ctr_curve(&[0.5, 0.5]).unwrap_err().code(),
            "E-CTR-ORDER"
        );
        assert_eq!(validate_ctr_curve(&[]).unwrap_err(), Error::EmptyCtr);
        assert_eq!(
            validate_ctr_curve(&[1.2]).unwrap_err().code(),
            "E-CTR-RANGE"
        );
        assert_eq!(
            validate_ctr_curve(&[0.5, 0.0]).unwrap_err().code(),
            "E-CTR-RANGE"
        );
        assert_eq!(
            validate_ctr_curve(&[f64::NAN]).unwrap_err().code(),
            "E-CTR-RANGE"
        );
    }

    #[test]
    fn ranking_orders_and_breaks_ties_by_id() {
        let r = rank_by_score(&[("A".into(), 10.0), ("B".into(), 6.0), ("C".into(), 4.0)]).unwrap();
        assert_eq!(ids(&r), ["A", "B", "C"]);
        let r = rank_by_score(&[("B".into(), 4.0), ("A".into(), 4.0)]).unwrap();
        assert_eq!(ids(&r), ["A", "B"]);
        let r = rank_by_score(&[
            ("A".into(), 10.0),
            ("B".into(), 4.0),
            ("C".into(), 3.0),
            ("M".into(), 4.4),
        ])
        .unwrap();
        assert_eq!(ids(&r), ["A", "M", "B", "C"]);
        assert_eq!(r.position_of(&"M".into()), Some(2));
        assert_eq!(r.agent_at(4).map(AgentId::as_str), Some("C"));
        assert_eq!(r.agent_at(0), None);
    }

    #[test]
    fn ranking_rejects_duplicates_and_negative_scores() {
        let err = rank_by_score(&[("A".into(), 1.0), ("A".into(), 2.0)]).unwrap_err();
        assert_eq!(err, Error::DuplicateAgent("A".into()));
        assert_eq!(
            rank_by_score(&[("A".into(), -1.0)]).unwrap_err().code(),
            "E-SCORE"
        );
    }

    #[test]
    fn price_recursion_examples() {
        let c = ctr(&[1.0, 0.5]);
        assert_eq!(
            sne_price_scores(&c, &[10.0, 6.0, 4.0]).unwrap(),
            vec![5.0, 4.0]
        );
        let r = sne_price_scores(&c, &[10.0, 4.4, 4.0, 3.0]).unwrap();
        assert!((r[0] - 4.2).abs() < 1e-12 && (r[1] - 4.0).abs() < 1e-12);
        assert_eq!(sne_price_scores(&ctr(&[0.8]), &[7.0]).unwrap(), vec![0.0]);
        assert_eq!(
            sne_price_scores(&c, &[4.0, 6.0]).unwrap_err(),
            Error::UnsortedScores { position: 2 }
        );
    }

    #[test]
    fn gsp_prices() {
        assert_eq!(
            gsp_next_score_prices(&[(10.0, 1.0), (6.0, 1.0)]).unwrap(),
            vec![6.0, 0.0]
        );
        let p = gsp_next_score_prices(&[(10.0, 0.5), (6.0, 1.0), (4.0, 1.0)]).unwrap();
        assert_eq!(p[0], 12.0);
        assert_eq!(gsp_next_score_prices(&[(3.0, 0.3)]).unwrap(), vec![0.0]);
        assert_eq!(
            gsp_next_score_prices(&[(3.0, 0.0)]).unwrap_err().code(),
            "E-RELEVANCE"
        );
    }

    #[test]
    fn revenue_both_routes() {
        let c = ctr(&[1.0, 0.5]);
        assert_eq!(auction_revenue(&c, &[5.0, 4.0]).unwrap(), 7.0);
        assert!((auction_revenue(&c, &[4.2, 4.0]).unwrap() - 6.2).abs() < 1e-12);
        assert_eq!(auction_revenue(&c, &[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(
            auction_revenue(&c, &[1.0]).unwrap_err(),
            Error::LengthMismatch {
                expected: 2,
                actual: 1
            }
        );
        assert_eq!(revenue_closed_form(&c, &[10.0, 6.0, 4.0]).unwrap(), 7.0);
        assert!((revenue_closed_form(&c, &[10.0, 4.4, 4.0, 3.0]).unwrap() - 6.2).abs() < 1e-12);
        assert_eq!(revenue_closed_form(&c, &[9.0]).unwrap(), 0.0);
    }

    #[test]
    fn slot_payoff_examples() {
        assert_eq!(slot_payoff(10.0, 1.0, 5.0), 5.0);
        assert_eq!(slot_payoff(10.0, 0.0, 123.0), 0.0);
        assert_eq!(slot_payoff(4.0, 0.5, 4.0), 0.0);
    }

    #[test]
    fn verifier_accepts_recursion_and_rejects_inverted_prices() {
        let c = ctr(&[1.0, 0.5]);
        let s = [10.0, 6.0, 4.0];
        let r = sne_price_scores(&c, &s).unwrap();
        assert!(verify_sne(&c, &s, &r, Tolerance::DEFAULT).unwrap().passed());
        // Still an equilibrium: slot-1 price raised within the envelope.
        assert!(verify_sne(&c, &s, &[6.1, 4.0], Tolerance::DEFAULT)
            .unwrap()
            .passed());
        let verdict = verify_sne(&c, &s, &[3.0, 4.0], Tolerance::DEFAULT).unwrap();
        assert_eq!(
            verdict,
            SneVerdict::Fail(SneViolation {
                position: 2,
                alternative: 1,
                payoff_held: 1.0,
                payoff_alternative: 3.0,
            })
        );
        assert!(verify_sne(&ctr(&[1.0]), &[5.0], &[0.0], Tolerance::DEFAULT)
            .unwrap()
            .passed());
        assert!(verify_sne(&c, &s, &[1.0], Tolerance::DEFAULT).is_err());
    }

    #[test]
    fn solve_reports_prices_and_bids() {
        let c = ctr(&[1.0, 0.5]);
        let entrants = [
            Entrant {
                id: "B".into(),
                score: 6.0,
                relevance: 1.0,
            },
            Entrant {
                id: "A".into(),
                score: 10.0,
                relevance: 0.5,
            },
            Entrant {
                id: "C".into(),
                score: 4.0,
                relevance: 0.8,
            },
        ];
        let out = solve_sne(&c, &entrants).unwrap();
        assert_eq!(ids(&out.ranking), ["A", "B", "C"]);
        assert_eq!(out.price_scores, vec![5.0, 4.0]);
        assert_eq!(out.per_click_prices, vec![10.0, 4.0]);
        // Top bid is truthful (20), B bids r_2 / e_B = 5.
        assert_eq!(out.derived_bids, vec![20.0, 5.0]);
        assert_eq!(out.slot_of(&"C".into()), None);
        assert_eq!(out.payoff_of(&c, &"A".into()), 5.0);
        assert_eq!(out.payoff_of(&c, &"B".into()), 1.0);
        assert_eq!(out.payoff_of(&c, &"C".into()), 0.0);
    }
}
