//! Deterministic discrete-event emulation of the wireless side channel and the
//! wired backhaul.
//!
//! Wireless: APs in mutual reception range answer probe requests sent on their
//! current channel; a scanning AP is deaf for one dwell time per channel.
//! Wired: per-subscriber pub/sub delivery with last-mile latency sampled at
//! both ends and FIFO order per ordered pair.

mod clock;
mod emulator;
mod latency;
mod scenario;
mod topology;
mod trace;

pub use clock::VirtualClock;
pub use emulator::{ApStats, Emulator, LoggedEvent, Medium, WireCapture};
pub use latency::{
    LatencyDist, Segment, WiredLinkModel, WiredTechnology, WirelessLinkModel, DEFAULT_ACTIVE_DWELL, MAX_ACTIVE_DWELL,
    PASSIVE_FULL_SCAN,
};
pub use scenario::{
    build_topology, identity_seed_for, AgentSection, ApConfig, ScenarioConfig, SimConfig, SimSettings, WirelessConfig,
};
pub use topology::{
    adjacency_from_edges, bfs, default_ip, generated_id, graph_diameter, random_connected_graph, random_graph, ApNode,
    Band, Topology,
};
pub use trace::{Trace, TraceRecord};

use thiserror::Error;

use crate::types::ChannelId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetemuError {
    #[error("config error at line {line}, column {column}: {message}")]
    Config { line: usize, column: usize, message: String },
    #[error("{0}")]
    Io(String),
    #[error("invalid topology: {0}")]
    InvalidTopology(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("unknown access point {0}")]
    UnknownAp(String),
    #[error("{ap} references unknown channel {channel}")]
    UnknownChannel { ap: String, channel: ChannelId },
}
