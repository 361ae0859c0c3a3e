//! Scenario files: JSON description of a neighborhood and a simulation run.

use std::collections::{BTreeMap, BTreeSet};
use std::net::Ipv4Addr;
use std::path::Path;
use std::time::Duration;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::latency::{LatencyDist, WiredLinkModel, WiredTechnology, WirelessLinkModel, DEFAULT_ACTIVE_DWELL};
use super::topology::{default_ip, edge_list_to_indices, random_graph, ApNode, Band, Topology};
use super::NetemuError;
use crate::agent::AgentConfig;
use crate::types::{millis_f64, ApId, ChannelId, SimTime};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApConfig {
    pub id: String,
    #[serde(default)]
    pub ssid: Option<String>,
    pub channel: u16,
    #[serde(default = "default_wired")]
    pub wired: WiredTechnology,
    #[serde(default)]
    pub load: u64,
    #[serde(default)]
    pub ip: Option<Ipv4Addr>,
    #[serde(default)]
    pub key_seed: Option<u64>,
    #[serde(default)]
    pub boot_at_ms: f64,
}

fn default_wired() -> WiredTechnology {
    WiredTechnology::Cable
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WirelessConfig {
    pub bitrate_bps: f64,
    pub dwell_ms: f64,
    pub loss: f64,
    pub per_link_delay_ms: f64,
}

impl Default for WirelessConfig {
    fn default() -> Self {
        WirelessConfig {
            bitrate_bps: 6e6,
            dwell_ms: DEFAULT_ACTIVE_DWELL.as_secs_f64() * 1e3,
            loss: 0.0,
            per_link_delay_ms: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub duration_ms: f64,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { duration_ms: 60_000.0, seed: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AgentSection {
    pub kcmi_ms: f64,
    pub jitter: f64,
}

impl Default for AgentSection {
    fn default() -> Self {
        let d = AgentConfig::default();
        AgentSection { kcmi_ms: d.kcmi.as_secs_f64() * 1e3, jitter: d.jitter }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub aps: Vec<ApConfig>,
    #[serde(default)]
    pub links: Option<Vec<(String, String)>>,
    #[serde(default)]
    pub density: Option<f64>,
    /// Seed of the random topology in density mode.
    #[serde(default)]
    pub seed: Option<u64>,
    pub channels: Vec<u16>,
    #[serde(default)]
    pub band: Band,
    #[serde(default)]
    pub wireless: WirelessConfig,
    #[serde(default)]
    pub sim: SimConfig,
    #[serde(default)]
    pub agent: AgentSection,
    /// Overrides of the default last-mile latency per technology.
    #[serde(default)]
    pub wired_profiles: BTreeMap<WiredTechnology, LatencyDist>,
    /// Applications started on every AP: "channel", "dca".
    #[serde(default)]
    pub apps: Vec<String>,
}

/// Everything the emulator needs besides the topology.
#[derive(Clone, Debug, PartialEq)]
pub struct SimSettings {
    pub wireless: WirelessLinkModel,
    pub agent: AgentConfig,
    pub seed: u64,
    pub duration: Duration,
    /// Per-AP boot time; missing entries boot at zero.
    pub boot_at: Vec<SimTime>,
    pub trace: bool,
}

impl Default for SimSettings {
    fn default() -> Self {
        SimSettings {
            wireless: WirelessLinkModel::default(),
            agent: AgentConfig::default(),
            seed: 1,
            duration: Duration::from_secs(60),
            boot_at: Vec::new(),
            trace: false,
        }
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, NetemuError> {
        serde_json::from_str(text).map_err(|e| NetemuError::Config {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, NetemuError> {
        let text = std::fs::read_to_string(path).map_err(|e| NetemuError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn settings(&self) -> Result<SimSettings, NetemuError> {
        let wireless = WirelessLinkModel {
            bitrate_bps: self.wireless.bitrate_bps,
            per_link_delay: millis_f64(self.wireless.per_link_delay_ms),
            loss_probability: self.wireless.loss,
            dwell: millis_f64(self.wireless.dwell_ms),
        };
        wireless.validate()?;
        if !(self.wireless.dwell_ms >= 0.0) || !(self.wireless.per_link_delay_ms >= 0.0) {
            return Err(NetemuError::InvalidModel("durations must be nonnegative".into()));
        }
        let agent =
            AgentConfig { kcmi: millis_f64(self.agent.kcmi_ms), jitter: self.agent.jitter, ..AgentConfig::default() };
        agent.validate().map_err(|e| NetemuError::InvalidModel(e.to_string()))?;
        if !(self.sim.duration_ms >= 0.0) {
            return Err(NetemuError::InvalidModel("duration must be nonnegative".into()));
        }
        Ok(SimSettings {
            wireless,
            agent,
            seed: self.sim.seed,
            duration: millis_f64(self.sim.duration_ms),
            boot_at: self.aps.iter().map(|a| SimTime::from_millis_f64(a.boot_at_ms)).collect(),
            trace: false,
        })
    }
}

/// Seed of an AP's identity key, stable across scenarios that reuse the id.
pub fn identity_seed_for(id: &str) -> u64 {
    let digest = Sha256::digest(id.as_bytes());
    u64::from_be_bytes(digest[..8].try_into().expect("8 octets"))
}

pub fn build_topology(config: &ScenarioConfig) -> Result<Topology, NetemuError> {
    if config.aps.is_empty() {
        return Err(NetemuError::InvalidTopology("scenario names no access points".into()));
    }
    if config.channels.is_empty() {
        return Err(NetemuError::InvalidTopology("scenario names no channels".into()));
    }
    let channels: Vec<ChannelId> = config.channels.iter().map(|&c| ChannelId(c)).collect();
    let mut ids = BTreeMap::new();
    let mut aps = Vec::with_capacity(config.aps.len());
    for (i, ap) in config.aps.iter().enumerate() {
        if ids.insert(ap.id.as_str(), i).is_some() {
            return Err(NetemuError::InvalidTopology(format!("duplicate AP id {}", ap.id)));
        }
        if !config.channels.contains(&ap.channel) {
            return Err(NetemuError::UnknownChannel { ap: ap.id.clone(), channel: ChannelId(ap.channel) });
        }
        let latency = config.wired_profiles.get(&ap.wired).cloned().unwrap_or_else(|| ap.wired.default_latency());
        latency.validate()?;
        aps.push(ApNode {
            id: ApId::new(ap.id.clone()),
            ssid: ap.ssid.clone().unwrap_or_else(|| format!("net-{}", ap.id)),
            channel: ChannelId(ap.channel),
            wired: WiredLinkModel { technology: ap.wired, last_mile_latency: latency },
            ip: ap.ip.unwrap_or_else(|| default_ip(i)),
            load: ap.load,
            identity_seed: ap.key_seed.unwrap_or_else(|| identity_seed_for(&ap.id)),
        });
    }
    let n = aps.len();
    let adjacency = match (&config.links, config.density) {
        (Some(_), Some(_)) => {
            return Err(NetemuError::InvalidTopology("give either links or density, not both".into()))
        }
        (Some(links), None) => {
            let edges = edge_list_to_indices(&ids, links)?;
            super::topology::adjacency_from_edges(n, &edges)
        }
        (None, Some(density)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed.unwrap_or(config.sim.seed));
            random_graph(n, density, &mut rng)?
        }
        (None, None) => vec![BTreeSet::new(); n],
    };
    let topology = Topology { aps, adjacency, channels, band: config.band };
    topology.validate()?;
    Ok(topology)
}
