//! Seeded random markets.
//!
//! Scenario `i` of seed `s` draws from its own ChaCha stream (`s`, `i`), so
//! any single scenario can be regenerated without replaying the ones before
//! it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::MarketScenario;
use crate::auction::{AdvertiserProfile, CtrCurve};
use crate::error::{Error, Result};
use crate::mediator::MediatorProfile;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeneratorParams {
    pub min_advertisers: usize,
    pub max_advertisers: usize,
    pub min_slots: usize,
    pub max_slots: usize,
    /// Valuations are uniform on `[0, value_max]`.
    pub value_max: f64,
    /// Relevances are uniform on `[relevance_min, 1]`.
    pub relevance_min: f64,
    /// `γ_1` is uniform on `[top_ctr_min, 1]`.
    pub top_ctr_min: f64,
    /// `γ_{j+1} / γ_j` is uniform on `[ratio_min, ratio_max]`.
    pub ratio_min: f64,
    pub ratio_max: f64,
    /// `α` is uniform on `(0, alpha_max)`, redrawn until `f·γ_1 < 1`.
    pub alpha_max: f64,
    /// Probability that an advertiser bids in the sub-auction.
    pub secondary_participation: f64,
    /// Force `L = K` and a sub-auction order equal to the primary order.
    pub aligned: bool,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            min_advertisers: 1,
            max_advertisers: 50,
            min_slots: 1,
            max_slots: 10,
            value_max: 10.0,
            relevance_min: 0.1,
            top_ctr_min: 0.5,
            ratio_min: 0.3,
            ratio_max: 0.9,
            alpha_max: 3.0,
            secondary_participation: 1.0,
            aligned: false,
        }
    }
}

impl GeneratorParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidGeneratorParams(msg.to_owned()));
        if self.min_advertisers == 0 || self.min_advertisers > self.max_advertisers {
            return bad("need 1 <= min_advertisers <= max_advertisers");
        }
        if self.min_slots == 0 || self.min_slots > self.max_slots {
            return bad("need 1 <= min_slots <= max_slots");
        }
        if !(self.value_max.is_finite() && self.value_max > 0.0) {
            return bad("value_max must be positive");
        }
        if !(self.relevance_min > 0.0 && self.relevance_min <= 1.0) {
            return bad("relevance_min must lie in (0, 1]");
        }
        if !(self.top_ctr_min > 0.0 && self.top_ctr_min <= 1.0) {
            return bad("top_ctr_min must lie in (0, 1]");
        }
        if !(self.ratio_min > 0.0 && self.ratio_min <= self.ratio_max && self.ratio_max < 1.0) {
            return bad("need 0 < ratio_min <= ratio_max < 1");
        }
        if !(self.alpha_max.is_finite() && self.alpha_max > 0.0) {
            return bad("alpha_max must be positive");
        }
        if !(0.0..=1.0).contains(&self.secondary_participation) {
            return bad("secondary_participation must lie in [0, 1]");
        }
        Ok(())
    }
}

fn rng_for(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Scenario `index` of the stream for `seed`.
pub fn generate_scenario(
    seed: u64,
    index: u64,
    params: &GeneratorParams,
) -> Result<MarketScenario> {
    params.validate()?;
    let mut rng = rng_for(seed, index);
    let k = rng.gen_range(params.min_slots..=params.max_slots);
    let n = rng.gen_range(params.min_advertisers..=params.max_advertisers);
    let top = rng.gen_range(params.top_ctr_min..=1.0);
    let mut gammas = Vec::with_capacity(k);
    let mut g = top;
    for _ in 0..k {
        gammas.push(g);
        g *= rng.gen_range(params.ratio_min..=params.ratio_max);
    }
    let ctr = CtrCurve::new(gammas)?;

    let relevance = |rng: &mut ChaCha8Rng| rng.gen_range(params.relevance_min..=1.0);
    let mut advertisers = Vec::with_capacity(n);
    for i in 0..n {
        let v_p = rng.gen_range(0.0..=params.value_max);
        let e_p = relevance(&mut rng);
        let joins = rng.gen_bool(params.secondary_participation);
        let v_s = if joins {
            rng.gen_range(0.0..=params.value_max)
        } else {
            0.0
        };
        let e_s = relevance(&mut rng);
        advertisers.push(AdvertiserProfile::new(
            format!("a{:03}", i + 1),
            v_p,
            e_p,
            v_s,
            e_s,
        )?);
    }

    if params.aligned {
        align_secondary_scores(&mut advertisers, &mut rng, params);
    }

    let relevance_p = relevance(&mut rng);
    let alpha = loop {
        let a = rng.gen_range(0.0..params.alpha_max);
        if a > 0.0 && relevance_p * a * ctr.top() < 1.0 {
            break a;
        }
    };
    let slots = if params.aligned {
        k
    } else {
        rng.gen_range(1..=k)
    };
    let mediator = MediatorProfile::new("m", relevance_p, alpha, slots)?;
    MarketScenario::new(ctr, advertisers, Some(mediator))
}

/// Redraws secondary scores so that their order matches the primary order:
/// the k-th best primary bidder gets the k-th largest secondary score.
fn align_secondary_scores(
    advertisers: &mut [AdvertiserProfile],
    rng: &mut ChaCha8Rng,
    params: &GeneratorParams,
) {
    let mut order: Vec<usize> = (0..advertisers.len()).collect();
    order.sort_by(|&a, &b| {
        let (x, y) = (&advertisers[a], &advertisers[b]);
        y.score_p()
            .total_cmp(&x.score_p())
            .then_with(|| x.id.cmp(&y.id))
    });
    let mut scores: Vec<f64> = (0..advertisers.len())
        .map(|_| rng.gen_range(f64::MIN_POSITIVE..=params.value_max))
        .collect();
    scores.sort_by(|a, b| b.total_cmp(a));
    scores.dedup();
    // Identical draws are vanishingly rare; pad so every bidder has a score.
    while scores.len() < advertisers.len() {
        let last = *scores.last().expect("at least one score");
        scores.push(last * 0.5);
    }
    for (rank, &i) in order.iter().enumerate() {
        let a = &mut advertisers[i];
        a.v_s = scores[rank] / a.e_s;
    }
}

/// Deterministic stream of `count` scenarios.
#[derive(Debug, Clone)]
pub struct ScenarioStream {
    seed: u64,
    next: u64,
    count: u64,
    params: GeneratorParams,
}

impl Iterator for ScenarioStream {
    type Item = MarketScenario;

    fn next(&mut self) -> Option<MarketScenario> {
        if self.next >= self.count {
            return None;
        }
        let s = generate_scenario(self.seed, self.next, &self.params)
            .expect("parameters validated when the stream was created");
        self.next += 1;
        Some(s)
    }
}

pub fn generate_scenarios(
    seed: u64,
    count: u64,
    params: GeneratorParams,
) -> Result<ScenarioStream> {
    if count == 0 {
        return Err(Error::InvalidGeneratorParams(
            "count must be at least 1".into(),
        ));
    }
    params.validate()?;
    Ok(ScenarioStream {
        seed,
        next: 0,
        count,
        params,
    })
}
