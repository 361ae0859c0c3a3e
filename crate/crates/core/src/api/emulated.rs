use std::net::Ipv4Addr;

use serde::Serialize;

use super::southbound::{AgentEvent, AgentTimer, ClientInfo, LinkStats, ScanRequest, ScanToken, Southbound};
use super::ApiError;
use crate::netemu::Medium;
use crate::types::{ApId, ChannelId, SimTime};

/// RRM call recorded by the emulated radio.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "call", rename_all = "snake_case")]
pub enum RrmCall {
    SetChannel { channel: u16 },
    SetTxPower { mac: String, dbm: i32 },
    SetChannelWidth { mac: String, mhz: u32 },
    InjectRawFrame { len: usize },
    StartVap { ssid: String },
    EnableRtsCts { mac: String, enabled: bool },
    DeauthenticateSta { mac: String },
}

const DEFAULT_TX_POWER_DBM: i32 = 20;
const DEFAULT_CHANNEL_WIDTH_MHZ: u32 = 20;

/// [`Southbound`] bound to one AP of the emulated medium.
pub struct EmulatedBackend<'a> {
    medium: &'a mut Medium,
    ap: usize,
}

impl<'a> EmulatedBackend<'a> {
    pub fn new(medium: &'a mut Medium, ap: usize) -> Self {
        EmulatedBackend { medium, ap }
    }

    fn record(&mut self, call: RrmCall) {
        self.medium.rrm[self.ap].calls.push(call);
    }
}

impl Southbound for EmulatedBackend<'_> {
    fn now(&self) -> SimTime {
        self.medium.now()
    }

    fn wired_interface(&self) -> Ipv4Addr {
        self.medium.topology.aps[self.ap].ip
    }

    fn perform_active_scan(&mut self, request: ScanRequest) -> ScanToken {
        self.medium.start_scan(self.ap, request)
    }

    fn publish(&mut self, to: Option<&ApId>, payload: Vec<u8>) {
        self.medium.publish(self.ap, to, payload);
    }

    fn subscribe(&mut self, publisher: Ipv4Addr) {
        self.medium.subscribe(self.ap, publisher);
    }

    fn unsubscribe(&mut self, publisher: Ipv4Addr) {
        self.medium.unsubscribe(self.ap, publisher);
    }

    fn set_timer(&mut self, at: SimTime, timer: AgentTimer) {
        self.medium.set_timer(self.ap, at, timer);
    }

    fn report(&mut self, event: AgentEvent) {
        self.medium.log_event(self.ap, event);
    }

    fn get_rf_channel(&self) -> ChannelId {
        self.medium.topology.aps[self.ap].channel
    }

    fn set_rf_channel(&mut self, channel: ChannelId) -> Result<(), ApiError> {
        if !self.medium.topology.channels.contains(&channel) {
            return Err(ApiError::UnknownChannel(channel));
        }
        let now = self.medium.now();
        let old = self.medium.topology.aps[self.ap].channel;
        let id = self.medium.topology.aps[self.ap].id.to_string();
        self.medium.trace.record(
            now,
            "channel_change",
            &id,
            "",
            || serde_json::json!({"old": old.0, "new": channel.0}),
        );
        self.medium.topology.aps[self.ap].channel = channel;
        self.record(RrmCall::SetChannel { channel: channel.0 });
        Ok(())
    }

    fn get_channels(&self) -> Vec<ChannelId> {
        self.medium.topology.channels.clone()
    }

    fn get_network_load(&self, kind: u8) -> Result<u64, ApiError> {
        match kind {
            1 => Ok(self.medium.topology.aps[self.ap].load),
            2 => Ok(self.medium.rrm[self.ap].tx_bytes),
            other => Err(ApiError::UnknownStatType(other)),
        }
    }

    fn get_tx_power(&self, mac: &str) -> i32 {
        self.medium.rrm[self.ap].tx_power.get(mac).copied().unwrap_or(DEFAULT_TX_POWER_DBM)
    }

    fn set_tx_power(&mut self, mac: &str, dbm: i32) {
        self.medium.rrm[self.ap].tx_power.insert(mac.to_owned(), dbm);
        self.record(RrmCall::SetTxPower { mac: mac.to_owned(), dbm });
    }

    fn get_channel_width(&self, mac: &str) -> u32 {
        self.medium.rrm[self.ap].channel_width.get(mac).copied().unwrap_or(DEFAULT_CHANNEL_WIDTH_MHZ)
    }

    fn set_channel_width(&mut self, mac: &str, mhz: u32) {
        self.medium.rrm[self.ap].channel_width.insert(mac.to_owned(), mhz);
        self.record(RrmCall::SetChannelWidth { mac: mac.to_owned(), mhz });
    }

    /// One synthetic station per unit of configured load.
    fn get_client_info(&self) -> Vec<ClientInfo> {
        (0..self.medium.topology.aps[self.ap].load)
            .map(|k| ClientInfo {
                mac: format!(
                    "02:00:{:02x}:{:02x}:{:02x}:{:02x}",
                    (self.ap >> 8) & 0xff,
                    self.ap & 0xff,
                    (k >> 8) & 0xff,
                    k & 0xff
                ),
                rssi_dbm: -60,
                tx_rate_kbps: 54_000,
            })
            .collect()
    }

    fn get_rx_stats(&self, _mac: &str) -> LinkStats {
        LinkStats::default()
    }

    fn get_tx_stats(&self, _mac: &str) -> LinkStats {
        LinkStats::default()
    }

    fn inject_raw_frame(&mut self, frame: &[u8]) {
        self.record(RrmCall::InjectRawFrame { len: frame.len() });
    }

    fn start_vap(&mut self, ssid: &str) -> Result<(), ApiError> {
        self.record(RrmCall::StartVap { ssid: ssid.to_owned() });
        Ok(())
    }

    fn enable_rts_cts(&mut self, mac: &str, enabled: bool) {
        self.record(RrmCall::EnableRtsCts { mac: mac.to_owned(), enabled });
    }

    fn deauthenticate_sta(&mut self, mac: &str) {
        self.record(RrmCall::DeauthenticateSta { mac: mac.to_owned() });
    }
}
