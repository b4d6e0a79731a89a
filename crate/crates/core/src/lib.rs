//! Equilibrium analytics for rank-by-revenue, generalized-second-price
//! position auctions in which a for-profit mediator buys a primary slot and
//! resells the traffic through its own sub-auction.
//!
//! The engine computes the symmetric Nash equilibrium of both auction tiers,
//! compares the market against the same market without the mediator, and
//! checks each comparative-statics identity along two independent routes.
//!
//! ```
//! use gsp_mediator::{compare, parse_scenario};
//!
//! let scenario = parse_scenario(r#"
//! schema_version = 1
//! ctr = [1.0, 0.5]
//!
//! [mediator]
//! id = "M"
//! e_p = 0.8
//! alpha = 1.0
//! slots = 2
//!
//! [[advertisers]]
//! id = "A"
//! v_p = 10.0
//! e_p = 1.0
//!
//! [[advertisers]]
//! id = "B"
//! v_p = 4.0
//! e_p = 1.0
//! v_s = 5.0
//!
//! [[advertisers]]
//! id = "C"
//! v_p = 3.0
//! e_p = 1.0
//! v_s = 8.0
//!
//! [[advertisers]]
//! id = "D"
//! v_p = 0.0
//! e_p = 1.0
//! v_s = 3.0
//! "#).unwrap();
//! let report = compare(&scenario).unwrap();
//! assert!((report.revenue_delta.direct - 1.2).abs() < 1e-9);
//! ```

pub mod analysis;
pub mod auction;
pub mod error;
pub mod mediator;
pub mod scenario_io;
pub mod tolerance;

pub use analysis::{
    accounting_check, advertiser_payoff_delta, compare, efficiency, efficiency_delta,
    equilibrium_checks, fitness_sweep, fitness_threshold_formula, market_failures,
    min_fitness_for_no_loss, revenue_delta, run_baseline, run_with_mediator, AdvertiserComparison,
    AgentPayoff, BaselineOutcome, ComparisonReport, MarketOutcome, MarketScenario, MediatedOutcome,
    PayoffDelta, SweepRow, ThresholdOutcome, Tier,
};
pub use auction::{
    auction_revenue, gsp_next_score_prices, rank_by_score, revenue_closed_form, slot_payoff,
    sne_price_scores, solve_sne, validate_ctr_curve, verify_sne, AdvertiserProfile, AgentId,
    CtrCurve, Entrant, Ranking, SneOutcome, SneVerdict, SneViolation,
};
pub use error::{Error, Result};
pub use mediator::{
    effective_ctr, mediator_payoff, mediator_score, s_auction_price_scores, EffectiveCtrCurve,
    MediatorProfile, MediatorScore,
};
pub use scenario_io::{
    generate_scenario, generate_scenarios, parse_scenario, serialize_scenario,
    write_baseline_report, write_report, write_sweep, GeneratorParams, ReportFormat,
    ScenarioDocument,
};
pub use tolerance::Tolerance;
