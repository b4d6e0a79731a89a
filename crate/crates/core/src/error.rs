use thiserror::Error;

/// Everything that can go wrong while validating or evaluating a market.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("click-through curve is empty")]
    EmptyCtr,
    #[error("click-through curve not strictly decreasing at slot {slot} ({prev} then {next})")]
    CtrNotDecreasing { slot: usize, prev: f64, next: f64 },
    #[error("click-through rate {value} at slot {slot} is outside (0, 1]")]
    CtrOutOfRange { slot: usize, value: f64 },
    #[error("agent {agent}: valuation {value} must be finite and non-negative")]
    InvalidValuation { agent: String, value: f64 },
    #[error("agent {agent}: relevance {value} must lie in (0, 1]")]
    InvalidRelevance { agent: String, value: f64 },
    #[error("duplicate agent id {0}")]
    DuplicateAgent(String),
    #[error("score {value} at rank {position} must be finite and non-negative")]
    InvalidScore { position: usize, value: f64 },
    #[error("scores not sorted non-increasing at rank {position}")]
    UnsortedScores { position: usize },
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("slot {slot} outside 1..={slots}")]
    SlotOutOfRange { slot: usize, slots: usize },
    #[error("mediator must offer at least one secondary slot")]
    NoSecondarySlots,
    #[error("mediator offers {secondary} secondary slots but the curve only has {slots}")]
    TooManySecondarySlots { secondary: usize, slots: usize },
    #[error("mediator {agent}: fitness {fitness} must be finite and positive")]
    InvalidFitness { agent: String, fitness: f64 },
    #[error("mediator {agent}: fitness {fitness} times top CTR {top_ctr} must be below 1")]
    FitnessTooLarge {
        agent: String,
        fitness: f64,
        top_ctr: f64,
    },
    #[error("scenario has no advertisers")]
    NoAdvertisers,
    #[error("mediator required for this operation")]
    MediatorRequired,
    #[error("outcomes were not computed from the same scenario")]
    ScenarioMismatch,
    #[error("invalid fitness sweep: {0}")]
    InvalidSweep(String),
    #[error("unknown agent {0}")]
    UnknownAgent(String),
    #[error("unsupported schema_version {0}")]
    UnsupportedSchema(u32),
    #[error("invalid generator parameters: {0}")]
    InvalidGeneratorParams(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Stable machine-readable code, one per variant.
    pub fn code(&self) -> &'static str {
        match self {
            Error::EmptyCtr => "E-CTR-EMPTY",
            Error::CtrNotDecreasing { .. } => "E-CTR-ORDER",
            Error::CtrOutOfRange { .. } => "E-CTR-RANGE",
            Error::InvalidValuation { .. } => "E-VALUATION",
            Error::InvalidRelevance { .. } => "E-RELEVANCE",
            Error::DuplicateAgent(_) => "E-DUPLICATE-ID",
            Error::InvalidScore { .. } => "E-SCORE",
            Error::UnsortedScores { .. } => "E-UNSORTED",
            Error::LengthMismatch { .. } => "E-LENGTH",
            Error::SlotOutOfRange { .. } => "E-SLOT",
            Error::NoSecondarySlots => "E-NO-SECONDARY-SLOTS",
            Error::TooManySecondarySlots { .. } => "E-SECONDARY-SLOTS",
            Error::InvalidFitness { .. } => "E-FITNESS",
            Error::FitnessTooLarge { .. } => "E-FITNESS-BOUND",
            Error::NoAdvertisers => "E-NO-ADVERTISERS",
            Error::MediatorRequired => "E-MEDIATOR-REQUIRED",
            Error::ScenarioMismatch => "E-SCENARIO-MISMATCH",
            Error::InvalidSweep(_) => "E-SWEEP",
            Error::UnknownAgent(_) => "E-UNKNOWN-AGENT",
            Error::UnsupportedSchema(_) => "E-SCHEMA",
            Error::InvalidGeneratorParams(_) => "E-GENERATOR",
            Error::Parse(_) => "E-SYNTAX",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
