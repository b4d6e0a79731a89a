use serde::{Deserialize, Serialize};

use super::generate::GeneratorParams;
use crate::analysis::MarketScenario;
use crate::auction::{AdvertiserProfile, CtrCurve};
use crate::error::{Error, Result};
use crate::mediator::MediatorProfile;

pub const SCHEMA_VERSION: u32 = 1;

/// On-disk scenario, TOML encoded.
///
/// ```toml
/// schema_version = 1
/// ctr = [1.0, 0.5]
///
/// [mediator]
/// id = "M"
/// e_p = 0.8
/// alpha = 1.0
/// slots = 2
///
/// [[advertisers]]
/// id = "A"
/// v_p = 10.0
/// e_p = 1.0
/// v_s = 0.0
/// e_s = 1.0
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDocument {
    pub schema_version: u32,
    pub ctr: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mediator: Option<MediatorRecord>,
    pub advertisers: Vec<AdvertiserRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorBlock>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdvertiserRecord {
    pub id: String,
    pub v_p: f64,
    pub e_p: f64,
    #[serde(default)]
    pub v_s: f64,
    #[serde(default = "unit")]
    pub e_s: f64,
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediatorRecord {
    pub id: String,
    pub e_p: f64,
    pub alpha: f64,
    pub slots: usize,
}

/// Provenance of a generated scenario: enough to regenerate it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorBlock {
    pub seed: u64,
    pub index: u64,
    pub params: GeneratorParams,
}

#[derive(Deserialize)]
struct VersionProbe {
    schema_version: Option<u32>,
}

impl ScenarioDocument {
    pub fn from_scenario(scenario: &MarketScenario, generator: Option<GeneratorBlock>) -> Self {
        ScenarioDocument {
            schema_version: SCHEMA_VERSION,
            ctr: scenario.ctr.gammas().to_vec(),
            mediator: scenario.mediator.as_ref().map(|m| MediatorRecord {
                id: m.id.to_string(),
                e_p: m.relevance_p,
                alpha: m.alpha,
                slots: m.secondary_slots,
            }),
            advertisers: scenario
                .advertisers
                .iter()
                .map(|a| AdvertiserRecord {
                    id: a.id.to_string(),
                    v_p: a.v_p,
                    e_p: a.e_p,
                    v_s: a.v_s,
                    e_s: a.e_s,
                })
                .collect(),
            generator,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let probe: VersionProbe = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        match probe.schema_version {
            Some(SCHEMA_VERSION) => {}
            Some(v) => return Err(Error::UnsupportedSchema(v)),
            None => return Err(Error::Parse("missing field `schema_version`".into())),
        }
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario documents always serialize")
    }

    pub fn to_scenario(&self) -> Result<MarketScenario> {
        let ctr = CtrCurve::new(self.ctr.clone())?;
        let advertisers = self
            .advertisers
            .iter()
            .map(|a| AdvertiserProfile::new(a.id.as_str(), a.v_p, a.e_p, a.v_s, a.e_s))
            .collect::<Result<Vec<_>>>()?;
        let mediator = self
            .mediator
            .as_ref()
            .map(|m| MediatorProfile::new(m.id.as_str(), m.e_p, m.alpha, m.slots))
            .transpose()?;
        MarketScenario::new(ctr, advertisers, mediator)
    }
}

/// Parses and fully validates a scenario file.
pub fn parse_scenario(text: &str) -> Result<MarketScenario> {
    ScenarioDocument::parse(text)?.to_scenario()
}

pub fn serialize_scenario(scenario: &MarketScenario) -> String {
    ScenarioDocument::from_scenario(scenario, None).to_toml()
}
