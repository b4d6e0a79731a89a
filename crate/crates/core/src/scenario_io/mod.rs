//! Scenario files, seeded scenario generation and report rendering.

mod document;
mod generate;
mod report;

pub use document::{
    parse_scenario, serialize_scenario, AdvertiserRecord, GeneratorBlock, MediatorRecord,
    ScenarioDocument, SCHEMA_VERSION,
};
pub use generate::{generate_scenario, generate_scenarios, GeneratorParams, ScenarioStream};
pub use report::{format_number, write_baseline_report, write_report, write_sweep, ReportFormat};
