use std::time::Duration;

use rand::Rng;

use super::{AgentCore, AgentState, MessageType};
use crate::api::{ApiError, ClientInfo, Credential, LinkStats, MessageDocument, Northbound, Southbound};
use crate::crypto::{open_unicast, seal_group, seal_unicast, sign};
use crate::types::{ApId, ChannelId, SimTime};

/// Northbound view of one agent, handed to application callbacks.
pub(crate) struct AgentApi<'a> {
    core: &'a mut AgentCore,
    sb: &'a mut dyn Southbound,
    namespace: &'a str,
    slot: Option<usize>,
}

impl<'a> AgentApi<'a> {
    pub(crate) fn new(
        core: &'a mut AgentCore,
        sb: &'a mut dyn Southbound,
        namespace: &'a str,
        slot: Option<usize>,
    ) -> Self {
        AgentApi { core, sb, namespace, slot }
    }

    fn running(&self) -> Result<(), ApiError> {
        if self.core.state == AgentState::Off {
            return Err(ApiError::NotRunning);
        }
        Ok(())
    }
}

impl Northbound for AgentApi<'_> {
    fn node_id(&self) -> ApId {
        self.core.id.clone()
    }

    fn now(&self) -> SimTime {
        self.sb.now()
    }

    fn get_neighbors(&self) -> Vec<ApId> {
        self.core.neighbors.keys().cloned().collect()
    }

    fn send_to_neighbor(&mut self, node: &ApId, doc: &MessageDocument) -> Result<(), ApiError> {
        self.running()?;
        let rec = self.core.neighbors.get(node).ok_or_else(|| ApiError::UnknownNeighbor(node.clone()))?;
        let public_key = rec.identity.public_key.clone();
        let plain = serde_json::to_vec(doc).expect("json value serializes");
        let inner = seal_group(&plain, &self.core.group.material);
        let body = seal_unicast(&inner, &public_key, &mut self.core.rng);
        self.core.send(self.sb, MessageType::Data, self.namespace, 1, Some(node), body);
        self.core.counters.sent_unicast += 1;
        Ok(())
    }

    fn send_to_neighbors(&mut self, doc: &MessageDocument, ttl: u8) -> Result<(), ApiError> {
        if ttl == 0 {
            return Err(ApiError::InvalidTtl(ttl));
        }
        self.running()?;
        let plain = serde_json::to_vec(doc).expect("json value serializes");
        let body = seal_group(&plain, &self.core.group.material);
        let seq = self.core.send(self.sb, MessageType::Data, self.namespace, ttl, None, body);
        let id = self.core.id.clone();
        self.core.flood.observe(&id, seq, ttl);
        self.core.counters.sent_broadcast += 1;
        Ok(())
    }

    fn get_resfi_credentials(&self, param: u8) -> Result<Credential, ApiError> {
        match param {
            1 => Ok(Credential::WiredAddress(self.sb.wired_interface())),
            2 => Ok(Credential::PublicKey(self.core.identity.public_key().der().to_vec())),
            other => Err(ApiError::BadSelector(other)),
        }
    }

    fn use_private_rsa_key(&mut self, data: &[u8], mode: u8) -> Result<Vec<u8>, ApiError> {
        match mode {
            1 => Ok(sign(data, &self.core.identity).0),
            2 => Ok(open_unicast(data, &self.core.identity)?),
            other => Err(ApiError::BadMode(other)),
        }
    }

    fn set_timer(&mut self, delay: Duration, token: u64) -> Result<(), ApiError> {
        let slot = self.slot.ok_or(ApiError::NoTimerContext)?;
        let at = self.sb.now() + delay;
        self.sb.set_timer(at, crate::api::AgentTimer::App { slot, token });
        Ok(())
    }

    fn random_unit(&mut self) -> f64 {
        self.core.rng.gen()
    }

    fn get_network_load(&self, kind: u8) -> Result<u64, ApiError> {
        self.sb.get_network_load(kind)
    }

    fn get_channels(&self) -> Vec<ChannelId> {
        self.sb.get_channels()
    }

    fn get_channel(&self) -> ChannelId {
        self.sb.get_rf_channel()
    }

    fn set_channel(&mut self, channel: ChannelId) -> Result<(), ApiError> {
        self.sb.set_rf_channel(channel)
    }

    fn set_tx_power(&mut self, mac: &str, dbm: i32) {
        self.sb.set_tx_power(mac, dbm);
    }

    fn set_channel_width(&mut self, mac: &str, mhz: u32) {
        self.sb.set_channel_width(mac, mhz);
    }

    fn inject_frame(&mut self, frame: &[u8]) {
        self.sb.inject_raw_frame(frame);
    }

    fn enable_rts_cts(&mut self, mac: &str, enabled: bool) {
        self.sb.enable_rts_cts(mac, enabled);
    }

    fn start_vap(&mut self, ssid: &str) -> Result<(), ApiError> {
        self.sb.start_vap(ssid)
    }

    fn deauthenticate_sta(&mut self, mac: &str) {
        self.sb.deauthenticate_sta(mac);
    }

    fn get_client_info(&self) -> Vec<ClientInfo> {
        self.sb.get_client_info()
    }

    fn get_rx_stats(&self, mac: &str) -> LinkStats {
        self.sb.get_rx_stats(mac)
    }

    fn get_tx_stats(&self, mac: &str) -> LinkStats {
        self.sb.get_tx_stats(mac)
    }
}
