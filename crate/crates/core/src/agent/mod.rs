//! Per-AP ResFi agent: bootstrapping, key rotation, neighbor lifecycle,
//! signed and encrypted wired messaging with TTL flooding, and application hosting.
//!
//! The agent is sans-io. Every entry point takes the [`Southbound`] backend of
//! its AP; scan results, wired payloads and timers are fed back in by whoever
//! drives the backend (the emulator in this crate).

mod dedup;
mod message;
mod neighbor;
mod northbound;

pub use dedup::{FloodFilter, Observation, DEDUP_WINDOW};
pub use message::{ControlMessage, DecodeError, KcmBody, MessageType, LENGTH_PREFIX_LEN};
pub use neighbor::{ApIdentity, NeighborRecord};

use std::collections::{BTreeMap, VecDeque};
use std::net::Ipv4Addr;
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use crate::api::{
    AgentEvent, AgentTimer, ApiError, Application, Northbound, ProbeRequest, ProbeResponse, ScanKind, ScanRequest,
    ScanToken, Southbound,
};
use crate::crypto::{
    decode_ie_with_oui, encode_ie_with_oui, generate_group_key, open_group, open_unicast, seal_group, sign, verify,
    GroupKey, IdentityKeypair, KeyMaterial, PublicKey, ResFiIe, DEFAULT_OUI,
};
use crate::types::{ApId, ChannelId, SimTime};
use northbound::AgentApi;

/// Namespace used by messages sent outside any registered application.
pub const DEFAULT_NAMESPACE: &str = "resfi.default";

#[derive(Clone, Debug, PartialEq)]
pub struct AgentConfig {
    /// Key change message interval.
    pub kcmi: Duration,
    /// Each interval is `kcmi + U(0, jitter * kcmi)`.
    pub jitter: f64,
    /// Extra single-channel scans after a KCM rescan finds nothing.
    pub rescan_retries: u8,
    pub oui: [u8; 3],
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig { kcmi: Duration::from_secs(60), jitter: 0.1, rescan_retries: 1, oui: DEFAULT_OUI }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("key change interval must be positive")]
    NonPositiveKcmi,
    #[error("jitter fraction must lie in [0, 1), got {0}")]
    BadJitter(f64),
}

impl AgentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.kcmi.is_zero() {
            return Err(ConfigError::NonPositiveKcmi);
        }
        if !(0.0..1.0).contains(&self.jitter) {
            return Err(ConfigError::BadJitter(self.jitter));
        }
        Ok(())
    }

    /// Removal deadline relative to the last KCM.
    pub fn expiry_timeout(&self) -> Duration {
        self.kcmi * 2
    }

    /// Draws the delay until the next key change.
    pub fn draw_interval(&self, rng: &mut impl Rng) -> Duration {
        let extra = if self.jitter > 0.0 { rng.gen_range(0.0..=self.jitter) } else { 0.0 };
        self.kcmi + self.kcmi.mul_f64(extra)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentState {
    Off,
    Bootstrapping,
    Standard,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    Malformed,
    UnknownSender,
    Misaddressed,
    BadSignature,
    Replay,
    WrongKey,
    /// Deferred behind a rescan when the neighbor was removed.
    Expired,
}

impl DropReason {
    pub fn as_str(self) -> &'static str {
        match self {
            DropReason::Malformed => "malformed",
            DropReason::UnknownSender => "unknown_sender",
            DropReason::Misaddressed => "misaddressed",
            DropReason::BadSignature => "bad_signature",
            DropReason::Replay => "replay",
            DropReason::WrongKey => "wrong_key",
            DropReason::Expired => "expired",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct AgentCounters {
    pub sent_broadcast: u64,
    pub sent_unicast: u64,
    pub sent_kcm: u64,
    pub forwarded: u64,
    pub received: u64,
    pub accepted: u64,
    pub dropped: BTreeMap<DropReason, u64>,
    pub deferred: u64,
    pub delivered: u64,
    pub duplicates: u64,
    pub echoes: u64,
    pub unroutable: u64,
    pub keys_installed: u64,
    pub rescans: u64,
    pub rescan_failures: u64,
    pub malformed_ies: u64,
}

impl AgentCounters {
    pub fn dropped(&self, reason: DropReason) -> u64 {
        self.dropped.get(&reason).copied().unwrap_or(0)
    }

    pub fn total_dropped(&self) -> u64 {
        self.dropped.values().sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum ScanPurpose {
    Bootstrap,
    Rescan { sender: ApId, attempt: u8 },
}

#[derive(Clone, Debug)]
struct PendingScan {
    request: ScanRequest,
    purpose: ScanPurpose,
}

enum Notice {
    Start,
    NewLink(ApId),
    LinkFailure(ApId),
    Rx { namespace: String, sender: ApId, doc: Value },
}

struct AppSlot {
    namespace: Option<String>,
    app: Box<dyn Application>,
}

/// Protocol state of one agent, everything except the hosted applications.
pub struct AgentCore {
    id: ApId,
    ssid: String,
    identity: IdentityKeypair,
    config: AgentConfig,
    group: GroupKey,
    state: AgentState,
    started: bool,
    neighbors: BTreeMap<ApId, NeighborRecord>,
    seq: u64,
    rng: ChaCha8Rng,
    key_generation: u64,
    active_scan: Option<(ScanToken, PendingScan)>,
    scan_queue: VecDeque<PendingScan>,
    deferred: BTreeMap<ApId, VecDeque<Vec<u8>>>,
    flood: FloodFilter,
    counters: AgentCounters,
    notices: VecDeque<Notice>,
}

/// A ResFi agent together with its applications.
pub struct Agent {
    core: AgentCore,
    apps: Vec<AppSlot>,
}

impl Agent {
    pub fn new(id: ApId, ssid: String, identity: IdentityKeypair, config: AgentConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let group = generate_group_key(&mut rng, 0);
        Agent {
            core: AgentCore {
                id,
                ssid,
                identity,
                config,
                group,
                state: AgentState::Off,
                started: false,
                neighbors: BTreeMap::new(),
                seq: 0,
                rng,
                key_generation: 0,
                active_scan: None,
                scan_queue: VecDeque::new(),
                deferred: BTreeMap::new(),
                flood: FloodFilter::new(),
                counters: AgentCounters::default(),
                notices: VecDeque::new(),
            },
            apps: Vec::new(),
        }
    }

    pub fn id(&self) -> &ApId {
        &self.core.id
    }

    pub fn ssid(&self) -> &str {
        &self.core.ssid
    }

    pub fn state(&self) -> AgentState {
        self.core.state
    }

    pub fn is_started(&self) -> bool {
        self.core.started
    }

    pub fn config(&self) -> &AgentConfig {
        &self.core.config
    }

    pub fn group_key(&self) -> &GroupKey {
        &self.core.group
    }

    pub fn public_key(&self) -> &PublicKey {
        self.core.identity.public_key()
    }

    pub fn identity(&self) -> &IdentityKeypair {
        &self.core.identity
    }

    pub fn neighbors(&self) -> &BTreeMap<ApId, NeighborRecord> {
        &self.core.neighbors
    }

    pub fn neighbor(&self, id: &ApId) -> Option<&NeighborRecord> {
        self.core.neighbors.get(id)
    }

    pub fn counters(&self) -> &AgentCounters {
        &self.core.counters
    }

    /// Wired messages currently held back behind a rescan.
    pub fn deferred_len(&self) -> usize {
        self.core.deferred.values().map(VecDeque::len).sum()
    }

    pub fn app_count(&self) -> usize {
        self.apps.len()
    }

    pub fn app_snapshot(&self, slot: usize) -> Value {
        self.apps.get(slot).map_or(Value::Null, |s| s.app.snapshot())
    }

    pub fn app_namespace(&self, slot: usize) -> Option<&str> {
        self.apps.get(slot).and_then(|s| s.namespace.as_deref())
    }

    /// Adds an application; `namespace = None` makes it the default handler.
    pub fn register_application(
        &mut self,
        namespace: Option<&str>,
        app: Box<dyn Application>,
    ) -> Result<usize, ApiError> {
        if self.apps.iter().any(|s| s.namespace.as_deref() == namespace) {
            return Err(ApiError::DuplicateNamespace(namespace.unwrap_or("*").to_owned()));
        }
        self.apps.push(AppSlot { namespace: namespace.map(str::to_owned), app });
        Ok(self.apps.len() - 1)
    }

    pub fn boot(&mut self, sb: &mut dyn Southbound) {
        self.core.boot(sb);
        self.dispatch(sb);
    }

    pub fn handle_probe_request(&mut self, sb: &mut dyn Southbound, request: &ProbeRequest) -> Option<ProbeResponse> {
        let response = self.core.handle_probe_request(sb, request);
        self.dispatch(sb);
        response
    }

    pub fn on_scan_complete(&mut self, sb: &mut dyn Southbound, token: ScanToken, responses: Vec<ProbeResponse>) {
        self.core.on_scan_complete(sb, token, responses);
        self.dispatch(sb);
    }

    pub fn handle_wired_message(&mut self, sb: &mut dyn Southbound, raw: &[u8]) {
        self.core.handle_wired_message(sb, raw);
        self.dispatch(sb);
    }

    pub fn on_timer(&mut self, sb: &mut dyn Southbound, timer: AgentTimer) {
        match timer {
            AgentTimer::App { slot, token } => {
                if self.core.state == AgentState::Off {
                    return;
                }
                let Agent { core, apps } = self;
                if let Some(s) = apps.get_mut(slot) {
                    let ns = s.namespace.as_deref().unwrap_or(DEFAULT_NAMESPACE);
                    s.app.on_timer(&mut AgentApi::new(core, sb, ns, Some(slot)), token);
                }
            }
            other => self.core.on_timer(sb, other),
        }
        self.dispatch(sb);
    }

    pub fn perform_key_change(&mut self, sb: &mut dyn Southbound) {
        self.core.perform_key_change(sb);
    }

    /// Tears down every neighbor and bootstraps again with the backend's new address.
    pub fn handle_ip_change(&mut self, sb: &mut dyn Southbound) {
        self.core.handle_ip_change(sb);
        self.dispatch(sb);
    }

    pub fn handle_channel_change(&mut self, sb: &mut dyn Southbound, channel: ChannelId) -> Result<(), ApiError> {
        sb.set_rf_channel(channel)
    }

    pub fn power_off(&mut self, _sb: &mut dyn Southbound) {
        self.core.power_off();
    }

    /// Runs `f` against the northbound API outside any callback.
    pub fn with_api<R>(
        &mut self,
        sb: &mut dyn Southbound,
        namespace: &str,
        f: impl FnOnce(&mut dyn Northbound) -> R,
    ) -> R {
        let result = f(&mut AgentApi::new(&mut self.core, sb, namespace, None));
        self.dispatch(sb);
        result
    }

    fn dispatch(&mut self, sb: &mut dyn Southbound) {
        let Agent { core, apps } = self;
        while let Some(notice) = core.notices.pop_front() {
            match notice {
                Notice::Start => {
                    for (i, s) in apps.iter_mut().enumerate() {
                        let ns = s.namespace.as_deref().unwrap_or(DEFAULT_NAMESPACE);
                        s.app.on_start(&mut AgentApi::new(core, sb, ns, Some(i)));
                    }
                }
                Notice::NewLink(peer) => {
                    for (i, s) in apps.iter_mut().enumerate() {
                        let ns = s.namespace.as_deref().unwrap_or(DEFAULT_NAMESPACE);
                        s.app.on_new_link(&mut AgentApi::new(core, sb, ns, Some(i)), &peer);
                    }
                }
                Notice::LinkFailure(peer) => {
                    for (i, s) in apps.iter_mut().enumerate() {
                        let ns = s.namespace.as_deref().unwrap_or(DEFAULT_NAMESPACE);
                        s.app.on_link_failure(&mut AgentApi::new(core, sb, ns, Some(i)), &peer);
                    }
                }
                Notice::Rx { namespace, sender, doc } => {
                    let slot = apps
                        .iter()
                        .position(|s| s.namespace.as_deref() == Some(namespace.as_str()))
                        .or_else(|| apps.iter().position(|s| s.namespace.is_none()));
                    match slot {
                        Some(i) => {
                            core.counters.delivered += 1;
                            let s = &mut apps[i];
                            let ns = s.namespace.as_deref().unwrap_or(DEFAULT_NAMESPACE);
                            s.app.on_receive(&mut AgentApi::new(core, sb, ns, Some(i)), &sender, &doc);
                        }
                        None => core.counters.unroutable += 1,
                    }
                }
            }
        }
    }
}

impl AgentCore {
    fn next_seq(&mut self) -> u64 {
        self.seq += 1;
        self.seq
    }

    fn drop_message(&mut self, sb: &mut dyn Southbound, reason: DropReason, sender: Option<&ApId>) {
        *self.counters.dropped.entry(reason).or_default() += 1;
        sb.report(AgentEvent::Dropped { reason: reason.as_str(), sender: sender.cloned() });
    }

    fn big_ie(&self, sb: &dyn Southbound) -> Vec<u8> {
        let ie = ResFiIe::Big {
            key: self.group.material,
            wired_ip: sb.wired_interface(),
            public_key: self.identity.public_key().clone(),
        };
        encode_ie_with_oui(&ie, self.config.oui)
    }

    fn small_ie(&self) -> Vec<u8> {
        encode_ie_with_oui(&ResFiIe::Small { key: self.group.material }, self.config.oui)
    }

    fn boot(&mut self, sb: &mut dyn Southbound) {
        self.state = AgentState::Bootstrapping;
        let request = ScanRequest { kind: ScanKind::Full, ssid: None, ie: Some(self.big_ie(sb)) };
        self.enqueue_scan(sb, PendingScan { request, purpose: ScanPurpose::Bootstrap });
    }

    fn enqueue_scan(&mut self, sb: &mut dyn Southbound, scan: PendingScan) {
        self.scan_queue.push_back(scan);
        self.start_next_scan(sb);
    }

    fn start_next_scan(&mut self, sb: &mut dyn Southbound) {
        if self.active_scan.is_some() {
            return;
        }
        if let Some(scan) = self.scan_queue.pop_front() {
            let token = sb.perform_active_scan(scan.request.clone());
            self.active_scan = Some((token, scan));
        }
    }

    fn rescan_pending(&self, sender: &ApId) -> bool {
        let is_for = |p: &PendingScan| matches!(&p.purpose, ScanPurpose::Rescan { sender: s, .. } if s == sender);
        self.active_scan.as_ref().is_some_and(|(_, p)| is_for(p)) || self.scan_queue.iter().any(is_for)
    }

    fn arm_expiry(&mut self, sb: &mut dyn Southbound, peer: &ApId, last_kcm: SimTime) {
        let at = last_kcm + self.config.expiry_timeout() + Duration::from_micros(1);
        sb.set_timer(at, AgentTimer::Expiry(peer.clone()));
    }

    fn upsert_neighbor(
        &mut self,
        sb: &mut dyn Southbound,
        peer: &ApId,
        key: KeyMaterial,
        wired_ip: Ipv4Addr,
        public_key: PublicKey,
        ssid: Option<String>,
        channel: Option<ChannelId>,
    ) {
        if peer == &self.id {
            return;
        }
        let now = sb.now();
        match self.neighbors.get_mut(peer) {
            Some(rec) => {
                if rec.identity.wired_address != wired_ip {
                    sb.unsubscribe(rec.identity.wired_address);
                    sb.subscribe(wired_ip);
                    rec.identity.wired_address = wired_ip;
                }
                rec.identity.public_key = public_key;
                if ssid.is_some() {
                    rec.identity.ssid = ssid;
                }
                if channel.is_some() {
                    rec.identity.channel = channel;
                }
                rec.install_key(key);
                rec.last_kcm = now;
                rec.suspect = false;
            }
            None => {
                let identity = ApIdentity { ap_id: peer.clone(), wired_address: wired_ip, public_key, ssid, channel };
                self.neighbors.insert(peer.clone(), NeighborRecord::new(identity, key, now));
                sb.subscribe(wired_ip);
                sb.report(AgentEvent::NeighborAdded(peer.clone()));
                self.notices.push_back(Notice::NewLink(peer.clone()));
            }
        }
        self.arm_expiry(sb, peer, now);
    }

    fn remove_neighbor(&mut self, sb: &mut dyn Southbound, peer: &ApId) {
        let Some(rec) = self.neighbors.remove(peer) else { return };
        sb.unsubscribe(rec.identity.wired_address);
        if let Some(queue) = self.deferred.remove(peer) {
            for _ in 0..queue.len() {
                self.drop_message(sb, DropReason::Expired, Some(peer));
            }
        }
        self.scan_queue.retain(|p| !matches!(&p.purpose, ScanPurpose::Rescan { sender, .. } if sender == peer));
        sb.report(AgentEvent::NeighborRemoved(peer.clone()));
        self.notices.push_back(Notice::LinkFailure(peer.clone()));
    }

    fn handle_probe_request(&mut self, sb: &mut dyn Southbound, request: &ProbeRequest) -> Option<ProbeResponse> {
        if self.state == AgentState::Off || request.source == self.id {
            return None;
        }
        if request.ssid.as_deref().is_some_and(|s| s != self.ssid) {
            return None;
        }
        let mut answer_big = false;
        if let Some(bytes) = &request.ie {
            match decode_ie_with_oui(bytes, self.config.oui) {
                Ok(ResFiIe::Big { key, wired_ip, public_key }) => {
                    self.upsert_neighbor(sb, &request.source, key, wired_ip, public_key, None, None);
                    answer_big = true;
                }
                Ok(ResFiIe::Small { .. }) => {}
                Err(_) => self.counters.malformed_ies += 1,
            }
        }
        let ie = if answer_big { self.big_ie(sb) } else { self.small_ie() };
        Some(ProbeResponse {
            bssid: self.id.clone(),
            ssid: self.ssid.clone(),
            channel: sb.get_rf_channel(),
            ie: Some(ie),
        })
    }

    fn on_scan_complete(&mut self, sb: &mut dyn Southbound, token: ScanToken, responses: Vec<ProbeResponse>) {
        let scan = match self.active_scan.take() {
            Some((t, scan)) if t == token => scan,
            other => {
                self.active_scan = other;
                return;
            }
        };
        if self.state != AgentState::Off {
            match scan.purpose {
                ScanPurpose::Bootstrap => self.finish_bootstrap(sb, responses),
                ScanPurpose::Rescan { sender, attempt } => {
                    self.finish_rescan(sb, scan.request, sender, attempt, responses)
                }
            }
        }
        self.start_next_scan(sb);
    }

    fn finish_bootstrap(&mut self, sb: &mut dyn Southbound, responses: Vec<ProbeResponse>) {
        for r in responses {
            let Some(bytes) = &r.ie else { continue };
            match decode_ie_with_oui(bytes, self.config.oui) {
                Ok(ResFiIe::Big { key, wired_ip, public_key }) => {
                    self.upsert_neighbor(
                        sb,
                        &r.bssid,
                        key,
                        wired_ip,
                        public_key,
                        Some(r.ssid.clone()),
                        Some(r.channel),
                    );
                }
                Ok(ResFiIe::Small { .. }) => {}
                Err(_) => self.counters.malformed_ies += 1,
            }
        }
        self.state = AgentState::Standard;
        sb.report(AgentEvent::Booted);
        if !self.started {
            self.started = true;
            self.schedule_key_change(sb);
            self.notices.push_back(Notice::Start);
        }
    }

    fn finish_rescan(
        &mut self,
        sb: &mut dyn Southbound,
        request: ScanRequest,
        sender: ApId,
        attempt: u8,
        responses: Vec<ProbeResponse>,
    ) {
        if !self.neighbors.contains_key(&sender) {
            return;
        }
        let oui = self.config.oui;
        let key = responses
            .iter()
            .filter(|r| r.bssid == sender)
            .find_map(|r| r.ie.as_ref().and_then(|b| decode_ie_with_oui(b, oui).ok()).map(|ie| (*ie.key(), r.channel)));
        match key {
            Some((key, channel)) => {
                let rec = self.neighbors.get_mut(&sender).expect("checked above");
                rec.install_key(key);
                rec.suspect = false;
                rec.identity.channel = Some(channel);
                let epoch = rec.epoch;
                self.counters.keys_installed += 1;
                sb.report(AgentEvent::KeyInstalled { sender: sender.clone(), epoch });
            }
            None if attempt < self.config.rescan_retries => {
                let retry = PendingScan { request, purpose: ScanPurpose::Rescan { sender, attempt: attempt + 1 } };
                self.scan_queue.push_front(retry);
                return;
            }
            None => {
                self.counters.rescan_failures += 1;
                if let Some(rec) = self.neighbors.get_mut(&sender) {
                    rec.suspect = true;
                }
                sb.report(AgentEvent::NeighborSuspect(sender.clone()));
            }
        }
        self.drain_deferred(sb, &sender);
    }

    fn drain_deferred(&mut self, sb: &mut dyn Southbound, sender: &ApId) {
        while !self.rescan_pending(sender) {
            let Some(raw) = self.deferred.get_mut(sender).and_then(VecDeque::pop_front) else { break };
            match ControlMessage::decode(&raw) {
                Ok(msg) => self.process_message(sb, msg),
                Err(_) => self.drop_message(sb, DropReason::Malformed, Some(sender)),
            }
        }
        if self.deferred.get(sender).is_some_and(VecDeque::is_empty) {
            self.deferred.remove(sender);
        }
    }

    fn handle_wired_message(&mut self, sb: &mut dyn Southbound, raw: &[u8]) {
        if self.state == AgentState::Off {
            return;
        }
        self.counters.received += 1;
        let msg = match ControlMessage::decode(raw) {
            Ok(m) => m,
            Err(_) => return self.drop_message(sb, DropReason::Malformed, None),
        };
        if !self.neighbors.contains_key(&msg.sender) {
            return self.drop_message(sb, DropReason::UnknownSender, Some(&msg.sender));
        }
        if self.rescan_pending(&msg.sender) {
            self.counters.deferred += 1;
            self.deferred.entry(msg.sender.clone()).or_default().push_back(raw.to_vec());
            return;
        }
        self.process_message(sb, msg);
    }

    /// Verify, replay check, open, then dispatch or forward.
    fn process_message(&mut self, sb: &mut dyn Southbound, msg: ControlMessage) {
        let sender = msg.sender.clone();
        let Some(rec) = self.neighbors.get(&sender) else {
            return self.drop_message(sb, DropReason::UnknownSender, Some(&sender));
        };
        if msg.to.as_ref().is_some_and(|to| to != &self.id) {
            return self.drop_message(sb, DropReason::Misaddressed, Some(&sender));
        }
        if !verify(&msg.signing_bytes(), &msg.signature, &rec.identity.public_key) {
            return self.drop_message(sb, DropReason::BadSignature, Some(&sender));
        }
        if msg.seq <= rec.last_seq_seen {
            return self.drop_message(sb, DropReason::Replay, Some(&sender));
        }
        let opened = if msg.to.is_some() {
            open_unicast(&msg.body_sealed, &self.identity).and_then(|inner| open_group(&inner, &rec.group_key))
        } else {
            open_group(&msg.body_sealed, &rec.group_key)
        };
        let Ok(plain) = opened else {
            return self.drop_message(sb, DropReason::WrongKey, Some(&sender));
        };
        match msg.msg_type {
            MessageType::Kcm => {
                let Ok(body) = serde_json::from_slice::<KcmBody>(&plain) else {
                    return self.drop_message(sb, DropReason::Malformed, Some(&sender));
                };
                self.accept(&sender, msg.seq);
                self.handle_kcm(sb, &sender, body);
            }
            MessageType::Data => {
                let Ok(doc) = serde_json::from_slice::<Value>(&plain) else {
                    return self.drop_message(sb, DropReason::Malformed, Some(&sender));
                };
                self.accept(&sender, msg.seq);
                if msg.origin == self.id {
                    self.counters.echoes += 1;
                    return;
                }
                let obs = self.flood.observe(&msg.origin, msg.origin_seq, msg.ttl);
                if obs.first {
                    self.notices.push_back(Notice::Rx {
                        namespace: msg.namespace.clone(),
                        sender: msg.origin.clone(),
                        doc,
                    });
                } else {
                    self.counters.duplicates += 1;
                }
                if obs.improved && msg.ttl > 1 && msg.to.is_none() {
                    self.forward(sb, &msg, &plain);
                }
            }
        }
    }

    fn accept(&mut self, sender: &ApId, seq: u64) {
        if let Some(rec) = self.neighbors.get_mut(sender) {
            rec.last_seq_seen = seq;
        }
        self.counters.accepted += 1;
    }

    fn handle_kcm(&mut self, sb: &mut dyn Southbound, sender: &ApId, body: KcmBody) {
        let now = sb.now();
        let channel = ChannelId(body.channel);
        if let Some(rec) = self.neighbors.get_mut(sender) {
            rec.last_kcm = now;
            rec.identity.channel = Some(channel);
            rec.identity.ssid = Some(body.ssid.clone());
        }
        self.arm_expiry(sb, sender, now);
        self.counters.rescans += 1;
        let request = ScanRequest { kind: ScanKind::Single(channel), ssid: Some(body.ssid), ie: None };
        self.enqueue_scan(
            sb,
            PendingScan { request, purpose: ScanPurpose::Rescan { sender: sender.clone(), attempt: 0 } },
        );
    }

    /// Re-seals with our own group key and rebroadcasts one hop further.
    fn forward(&mut self, sb: &mut dyn Southbound, msg: &ControlMessage, plain: &[u8]) {
        let seq = self.next_seq();
        let mut out = ControlMessage {
            sender: self.id.clone(),
            seq,
            msg_type: MessageType::Data,
            ttl: msg.ttl - 1,
            namespace: msg.namespace.clone(),
            origin: msg.origin.clone(),
            origin_seq: msg.origin_seq,
            to: None,
            body_sealed: seal_group(plain, &self.group.material),
            signature: Vec::new(),
        };
        out.signature = sign(&out.signing_bytes(), &self.identity).0;
        self.counters.forwarded += 1;
        sb.publish(None, out.encode());
    }

    fn send(
        &mut self,
        sb: &mut dyn Southbound,
        msg_type: MessageType,
        namespace: &str,
        ttl: u8,
        to: Option<&ApId>,
        body_sealed: Vec<u8>,
    ) -> u64 {
        let seq = self.next_seq();
        let mut msg = ControlMessage {
            sender: self.id.clone(),
            seq,
            msg_type,
            ttl,
            namespace: namespace.to_owned(),
            origin: self.id.clone(),
            origin_seq: seq,
            to: to.cloned(),
            body_sealed,
            signature: Vec::new(),
        };
        msg.signature = sign(&msg.signing_bytes(), &self.identity).0;
        sb.publish(to, msg.encode());
        seq
    }

    fn schedule_key_change(&mut self, sb: &mut dyn Southbound) {
        self.key_generation += 1;
        let delay = self.config.draw_interval(&mut self.rng);
        let at = sb.now() + delay;
        sb.set_timer(at, AgentTimer::KeyChange { generation: self.key_generation });
    }

    /// Broadcasts a KCM under the old key, then switches to a fresh key.
    fn perform_key_change(&mut self, sb: &mut dyn Southbound) {
        if self.state != AgentState::Standard {
            return;
        }
        let body = KcmBody { channel: sb.get_rf_channel().0, ssid: self.ssid.clone() };
        let plain = serde_json::to_vec(&body).expect("kcm body serializes");
        let sealed = seal_group(&plain, &self.group.material);
        self.send(sb, MessageType::Kcm, "", 1, None, sealed);
        self.group = generate_group_key(&mut self.rng, self.group.epoch);
        self.counters.sent_kcm += 1;
        sb.report(AgentEvent::KcmSent { epoch: self.group.epoch });
    }

    fn on_timer(&mut self, sb: &mut dyn Southbound, timer: AgentTimer) {
        if self.state == AgentState::Off {
            return;
        }
        match timer {
            AgentTimer::KeyChange { generation } if generation == self.key_generation => {
                self.perform_key_change(sb);
                self.schedule_key_change(sb);
            }
            AgentTimer::KeyChange { .. } => {}
            AgentTimer::Expiry(peer) => {
                let now = sb.now();
                let timeout = self.config.expiry_timeout();
                if self.neighbors.get(&peer).is_some_and(|rec| now.since(rec.last_kcm) > timeout) {
                    self.remove_neighbor(sb, &peer);
                }
            }
            AgentTimer::App { .. } => {}
        }
    }

    fn handle_ip_change(&mut self, sb: &mut dyn Southbound) {
        if self.state == AgentState::Off {
            return;
        }
        let peers: Vec<ApId> = self.neighbors.keys().cloned().collect();
        for peer in peers {
            self.remove_neighbor(sb, &peer);
        }
        self.boot(sb);
    }

    fn power_off(&mut self) {
        self.state = AgentState::Off;
        self.active_scan = None;
        self.scan_queue.clear();
        self.key_generation += 1;
    }
}
