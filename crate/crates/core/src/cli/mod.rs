//! Scenario runner behind the `resfi` binary: `run`, `curves` and `latency`.
//!
//! Every function here is deterministic for a fixed scenario and seed; reports
//! carry virtual time only.

use std::collections::BTreeMap;
use std::time::Duration;

use serde::Serialize;
use thiserror::Error;

use crate::agent::{AgentCounters, AgentState};
use crate::analysis::{airtime_curves, curves_csv, AnalysisError, CurveParams};
use crate::api::AgentEvent;
use crate::apps::{build_app, count_conflicts, is_independent_dominating, CHANNEL_NAMESPACE, DCA_NAMESPACE};
use crate::netemu::{ApStats, Emulator, NetemuError, ScenarioConfig, WiredTechnology};
use crate::types::{ChannelId, SimTime};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Config(String),
    #[error("invariant violated: {}", .0.join("; "))]
    Invariant(Vec<String>),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Invariant(_) => 3,
        }
    }
}

impl From<NetemuError> for CliError {
    fn from(e: NetemuError) -> Self {
        match e {
            NetemuError::Io(msg) => CliError::Io(std::io::Error::other(msg)),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Io(io) => CliError::Io(io),
            other => CliError::Config(other.to_string()),
        }
    }
}

/// Command-line overrides of a scenario.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub duration_ms: Option<f64>,
    pub apps: Option<Vec<String>>,
}

impl RunOptions {
    fn apply(&self, config: &ScenarioConfig) -> Result<ScenarioConfig, CliError> {
        let mut config = config.clone();
        if let Some(seed) = self.seed {
            config.sim.seed = seed;
        }
        if let Some(d) = self.duration_ms {
            if !(d >= 0.0) {
                return Err(CliError::Usage(format!("duration must be nonnegative, got {d}")));
            }
            config.sim.duration_ms = d;
        }
        if let Some(apps) = &self.apps {
            config.apps = apps.clone();
        }
        Ok(config)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PeerReport {
    pub epoch: u64,
    pub suspect: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ApReport {
    pub id: String,
    pub state: &'static str,
    pub channel: ChannelId,
    pub key_epoch: u64,
    pub deaf_time_ms: f64,
    pub counters: AgentCounters,
    pub medium: ApStats,
    /// Epoch of each neighbor's key as seen by this AP.
    pub peers: BTreeMap<String, PeerReport>,
    pub apps: BTreeMap<String, serde_json::Value>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Totals {
    pub wired_sent: u64,
    pub wired_delivered: u64,
    pub wired_offline_dropped: u64,
    pub wired_in_flight: u64,
    pub received: u64,
    pub accepted: u64,
    pub dropped: u64,
    pub deferred_pending: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClusterReport {
    pub heads: Vec<String>,
    pub members: BTreeMap<String, String>,
    pub undecided: Vec<String>,
    pub independent_dominating: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub seed: u64,
    pub virtual_duration_ms: f64,
    pub aps: Vec<ApReport>,
    pub totals: Totals,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub channel_map: Option<BTreeMap<String, ChannelId>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub channel_conflicts: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clusters: Option<ClusterReport>,
    pub violations: Vec<String>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// One line per AP for humans.
    pub fn summary(&self) -> String {
        let mut out = format!("{} APs, {:.0} ms virtual\n", self.aps.len(), self.virtual_duration_ms);
        for ap in &self.aps {
            out.push_str(&format!(
                "  {:<10} {:<13} ch {:>3}  epoch {:>3}  peers {:>2}  rx {:>5}  dropped {:>3}\n",
                ap.id,
                ap.state,
                ap.channel,
                ap.key_epoch,
                ap.peers.len(),
                ap.counters.received,
                ap.counters.total_dropped()
            ));
        }
        if let Some(c) = self.channel_conflicts {
            out.push_str(&format!("channel conflicts: {c}\n"));
        }
        if let Some(c) = &self.clusters {
            out.push_str(&format!("clusterheads: {}\n", c.heads.join(", ")));
        }
        if !self.violations.is_empty() {
            out.push_str(&format!("VIOLATIONS: {}\n", self.violations.join("; ")));
        }
        out
    }
}

fn state_name(state: AgentState) -> &'static str {
    match state {
        AgentState::Off => "off",
        AgentState::Bootstrapping => "bootstrapping",
        AgentState::Standard => "standard",
    }
}

/// Builds the emulator for `config` with its applications registered.
pub fn build_emulator(config: &ScenarioConfig) -> Result<Emulator, CliError> {
    let mut emu = Emulator::from_scenario(config)?;
    for name in &config.apps {
        for i in 0..emu.len() {
            let (ns, app) = build_app(name).map_err(|e| CliError::Config(e.to_string()))?;
            emu.register_app(i, Some(ns), app).map_err(|e| CliError::Config(e.to_string()))?;
        }
    }
    Ok(emu)
}

/// Runs the scenario for its duration and collects the report.
pub fn run(config: &ScenarioConfig, options: &RunOptions) -> Result<RunReport, CliError> {
    let config = options.apply(config)?;
    let mut emu = build_emulator(&config)?;
    emu.run();
    Ok(report(&emu, &config))
}

/// Snapshot of counters and application outcomes, with identity checks.
pub fn report(emu: &Emulator, config: &ScenarioConfig) -> RunReport {
    let mut violations = Vec::new();
    let mut totals = Totals { wired_in_flight: emu.wired_in_flight(), ..Totals::default() };
    let mut aps = Vec::with_capacity(emu.len());
    for (i, agent) in emu.agents().iter().enumerate() {
        let c = agent.counters();
        let stats = emu.stats(i);
        let pending = agent.deferred_len() as u64;
        if c.received != c.accepted + c.total_dropped() + pending {
            violations.push(format!(
                "{}: received {} != accepted {} + dropped {} + deferred {}",
                agent.id(),
                c.received,
                c.accepted,
                c.total_dropped(),
                pending
            ));
        }
        if c.received != stats.wired_delivered {
            violations.push(format!(
                "{}: agent saw {} messages, medium delivered {}",
                agent.id(),
                c.received,
                stats.wired_delivered
            ));
        }
        totals.wired_sent += stats.wired_sent;
        totals.wired_delivered += stats.wired_delivered;
        totals.wired_offline_dropped += stats.wired_offline_dropped;
        totals.received += c.received;
        totals.accepted += c.accepted;
        totals.dropped += c.total_dropped();
        totals.deferred_pending += pending;

        let peers = agent
            .neighbors()
            .iter()
            .map(|(id, rec)| (id.to_string(), PeerReport { epoch: rec.epoch, suspect: rec.suspect }))
            .collect();
        let apps = (0..agent.app_count())
            .map(|slot| (agent.app_namespace(slot).unwrap_or("*").to_owned(), agent.app_snapshot(slot)))
            .collect();
        aps.push(ApReport {
            id: agent.id().to_string(),
            state: state_name(agent.state()),
            channel: emu.channel_of(i),
            key_epoch: agent.group_key().epoch,
            deaf_time_ms: stats.deaf_time_us as f64 / 1e3,
            counters: c.clone(),
            medium: stats.clone(),
            peers,
            apps,
        });
    }
    if totals.wired_sent != totals.wired_delivered + totals.wired_offline_dropped + totals.wired_in_flight {
        violations.push(format!(
            "wired sent {} != delivered {} + offline {} + in flight {}",
            totals.wired_sent, totals.wired_delivered, totals.wired_offline_dropped, totals.wired_in_flight
        ));
    }

    let adjacency = &emu.topology().adjacency;
    let uses =
        |ns: &str| emu.agents().first().is_some_and(|a| (0..a.app_count()).any(|s| a.app_namespace(s) == Some(ns)));
    let (channel_map, channel_conflicts) = if uses(CHANNEL_NAMESPACE) {
        let assignment: Vec<ChannelId> = (0..emu.len()).map(|i| emu.channel_of(i)).collect();
        let map = emu.agents().iter().zip(&assignment).map(|(a, &c)| (a.id().to_string(), c)).collect();
        (Some(map), Some(count_conflicts(adjacency, &assignment)))
    } else {
        (None, None)
    };
    let clusters = uses(DCA_NAMESPACE).then(|| cluster_report(&aps, emu));

    RunReport {
        seed: config.sim.seed,
        virtual_duration_ms: emu.now().as_millis_f64(),
        aps,
        totals,
        channel_map,
        channel_conflicts,
        clusters,
        violations,
    }
}

fn cluster_report(aps: &[ApReport], emu: &Emulator) -> ClusterReport {
    let mut heads = Vec::new();
    let mut members = BTreeMap::new();
    let mut undecided = Vec::new();
    let mut head_idx = std::collections::BTreeSet::new();
    for (i, ap) in aps.iter().enumerate() {
        let snap = &ap.apps[DCA_NAMESPACE];
        match snap["role"].as_str() {
            Some("clusterhead") => {
                heads.push(ap.id.clone());
                head_idx.insert(i);
            }
            Some("member") => {
                members.insert(ap.id.clone(), snap["head"].as_str().unwrap_or_default().to_owned());
            }
            _ => undecided.push(ap.id.clone()),
        }
    }
    let independent_dominating =
        undecided.is_empty() && is_independent_dominating(&emu.topology().adjacency, &head_idx);
    ClusterReport { heads, members, undecided, independent_dominating }
}

/// Rows of the airtime curves as CSV text.
pub fn curves(params: &CurveParams) -> Result<String, CliError> {
    Ok(curves_csv(&airtime_curves(params)?))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LatencySummary {
    pub samples: usize,
    pub mean_ms: f64,
    pub min_ms: f64,
    pub p50_ms: f64,
    pub p90_ms: f64,
    pub p99_ms: f64,
    pub max_ms: f64,
}

impl LatencySummary {
    pub fn from_samples(samples: &[f64]) -> Option<Self> {
        if samples.is_empty() {
            return None;
        }
        let mut v = samples.to_vec();
        v.sort_by(f64::total_cmp);
        let pct = |p: f64| v[((p * v.len() as f64).ceil() as usize).clamp(1, v.len()) - 1];
        Some(LatencySummary {
            samples: v.len(),
            mean_ms: v.iter().sum::<f64>() / v.len() as f64,
            min_ms: v[0],
            p50_ms: pct(0.5),
            p90_ms: pct(0.9),
            p99_ms: pct(0.99),
            max_ms: v[v.len() - 1],
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LatencyReport {
    pub seed: u64,
    pub dwell_ms: f64,
    pub key_changes: usize,
    /// KCM sent to new key installed, per receiving neighbor.
    pub overall: Option<LatencySummary>,
    /// Same, grouped by the receiver's wired technology.
    pub by_technology: BTreeMap<WiredTechnology, LatencySummary>,
    pub violations: Vec<String>,
}

impl LatencyReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Spacing between forced key changes in [`latency_experiment`].
pub const LATENCY_SPACING: Duration = Duration::from_secs(2);

/// Forces key changes round-robin every [`LATENCY_SPACING`] after bootstrap and
/// measures the time from each KCM to the new key being installed at each neighbor.
pub fn latency_experiment(config: &ScenarioConfig, options: &RunOptions) -> Result<LatencyReport, CliError> {
    let config = options.apply(config)?;
    let mut emu = build_emulator(&config)?;
    let end = SimTime::ZERO + Duration::from_secs_f64(config.sim.duration_ms.max(0.0) / 1e3);
    let settle = bootstrap_bound(&config);
    emu.run_before(SimTime::ZERO + settle.min(end.since(SimTime::ZERO)));
    let mut next = emu.now();
    let mut turn = 0usize;
    let mut key_changes = 0;
    while next < end {
        emu.run_before(next);
        emu.perform_key_change(turn % emu.len());
        key_changes += 1;
        turn += 1;
        next = next + LATENCY_SPACING;
    }
    emu.run_before(end);

    let mut last_kcm: BTreeMap<usize, SimTime> = BTreeMap::new();
    let mut all = Vec::new();
    let mut by_tech: BTreeMap<WiredTechnology, Vec<f64>> = BTreeMap::new();
    for e in emu.events() {
        match &e.event {
            AgentEvent::KcmSent { .. } => {
                last_kcm.insert(e.ap, e.at);
            }
            AgentEvent::KeyInstalled { sender, .. } => {
                let Ok(s) = emu.index_of(sender) else { continue };
                let Some(&t0) = last_kcm.get(&s) else { continue };
                let ms = e.at.since(t0).as_secs_f64() * 1e3;
                all.push(ms);
                by_tech.entry(emu.topology().aps[e.ap].wired.technology).or_default().push(ms);
            }
            _ => {}
        }
    }
    let violations = report(&emu, &config).violations;
    Ok(LatencyReport {
        seed: config.sim.seed,
        dwell_ms: emu.settings().wireless.dwell.as_secs_f64() * 1e3,
        key_changes,
        overall: LatencySummary::from_samples(&all),
        by_technology: by_tech
            .into_iter()
            .filter_map(|(t, v)| LatencySummary::from_samples(&v).map(|s| (t, s)))
            .collect(),
        violations,
    })
}

/// Upper bound on the time all agents need to finish bootstrapping.
fn bootstrap_bound(config: &ScenarioConfig) -> Duration {
    let last_boot = config.aps.iter().map(|a| a.boot_at_ms).fold(0.0, f64::max);
    let scan = config.wireless.dwell_ms * config.channels.len() as f64;
    Duration::from_secs_f64((last_boot + scan) / 1e3) + Duration::from_secs(1)
}

/// `config` with every AP on the given wired technology.
pub fn with_technology(config: &ScenarioConfig, technology: WiredTechnology) -> ScenarioConfig {
    let mut config = config.clone();
    for ap in &mut config.aps {
        ap.wired = technology;
    }
    config
}
