use std::net::Ipv4Addr;

use serde::Serialize;

use super::ApiError;
use crate::types::{ApId, ChannelId, SimTime};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ScanToken(pub u64);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScanKind {
    /// Every channel of the band, in order.
    Full,
    Single(ChannelId),
}

/// Active scan request; `ie` is the raw vendor element appended to every probe request.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScanRequest {
    pub kind: ScanKind,
    pub ssid: Option<String>,
    pub ie: Option<Vec<u8>>,
}

/// Probe request as seen by a responder.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbeRequest {
    pub source: ApId,
    pub channel: ChannelId,
    pub ssid: Option<String>,
    pub ie: Option<Vec<u8>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbeResponse {
    pub bssid: ApId,
    pub ssid: String,
    pub channel: ChannelId,
    pub ie: Option<Vec<u8>>,
}

/// Timers an agent can arm on its backend.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AgentTimer {
    KeyChange { generation: u64 },
    Expiry(ApId),
    App { slot: usize, token: u64 },
}

/// Observable agent milestones, used by backends for tracing and metrics.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AgentEvent {
    Booted,
    KcmSent { epoch: u64 },
    KeyInstalled { sender: ApId, epoch: u64 },
    NeighborAdded(ApId),
    NeighborRemoved(ApId),
    NeighborSuspect(ApId),
    Dropped { reason: &'static str, sender: Option<ApId> },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ClientInfo {
    pub mac: String,
    pub rssi_dbm: i32,
    pub tx_rate_kbps: u32,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LinkStats {
    pub packets: u64,
    pub bytes: u64,
}

/// Contract between an agent and the platform it runs on.
///
/// Scans complete asynchronously: the backend later hands the collected
/// responses to the agent together with the returned [`ScanToken`]. Probe
/// requests addressed to this AP reach the agent through its probe hook, which
/// realizes both `subscribeToProbeRequests` and `addIEtoProbeResponses`.
pub trait Southbound {
    fn now(&self) -> SimTime;

    // Framework API.
    fn wired_interface(&self) -> Ipv4Addr;
    fn perform_active_scan(&mut self, request: ScanRequest) -> ScanToken;
    /// Publishes on this node's socket; `to` restricts delivery to one subscriber.
    fn publish(&mut self, to: Option<&ApId>, payload: Vec<u8>);
    fn subscribe(&mut self, publisher: Ipv4Addr);
    fn unsubscribe(&mut self, publisher: Ipv4Addr);
    fn set_timer(&mut self, at: SimTime, timer: AgentTimer);
    fn report(&mut self, _event: AgentEvent) {}

    // RRM API.
    fn get_rf_channel(&self) -> ChannelId;
    fn set_rf_channel(&mut self, channel: ChannelId) -> Result<(), ApiError>;
    fn get_channels(&self) -> Vec<ChannelId>;
    fn get_network_load(&self, kind: u8) -> Result<u64, ApiError>;
    fn get_tx_power(&self, mac: &str) -> i32;
    fn set_tx_power(&mut self, mac: &str, dbm: i32);
    fn get_channel_width(&self, mac: &str) -> u32;
    fn set_channel_width(&mut self, mac: &str, mhz: u32);
    fn get_client_info(&self) -> Vec<ClientInfo>;
    fn get_rx_stats(&self, mac: &str) -> LinkStats;
    fn get_tx_stats(&self, mac: &str) -> LinkStats;
    fn inject_raw_frame(&mut self, frame: &[u8]);
    fn start_vap(&mut self, ssid: &str) -> Result<(), ApiError>;
    fn enable_rts_cts(&mut self, mac: &str, enabled: bool);
    fn deauthenticate_sta(&mut self, mac: &str);
}
