use std::collections::{BTreeMap, BTreeSet};
use std::net::Ipv4Addr;
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use super::clock::VirtualClock;
use super::latency::WirelessLinkModel;
use super::scenario::{build_topology, ScenarioConfig, SimSettings};
use super::topology::Topology;
use super::trace::Trace;
use super::NetemuError;
use crate::agent::Agent;
use crate::api::{
    AgentEvent, AgentTimer, ApiError, Application, EmulatedBackend, Northbound, ProbeRequest, ProbeResponse, RrmCall,
    ScanKind, ScanRequest, ScanToken,
};
use crate::crypto::generate_identity;
use crate::types::{ApId, ChannelId, SimTime};

pub(crate) enum Event {
    Boot(usize),
    ScanProbe { token: ScanToken, index: usize },
    ScanComplete { token: ScanToken },
    Wired { from: usize, to: usize, payload: Vec<u8> },
    Timer { ap: usize, timer: AgentTimer },
}

pub(crate) struct ActiveScan {
    pub ap: usize,
    pub request: ScanRequest,
    pub channels: Vec<ChannelId>,
    pub responses: Vec<ProbeResponse>,
}

/// Per-AP medium counters.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ApStats {
    pub scans_full: u64,
    pub scans_single: u64,
    pub deaf_time_us: u64,
    pub probe_responses_received: u64,
    pub probe_responses_lost: u64,
    /// Wired copies enqueued by this AP.
    pub wired_sent: u64,
    /// Wired copies handed to this AP's agent.
    pub wired_delivered: u64,
    /// Copies addressed to this AP that arrived while it was powered off.
    pub wired_offline_dropped: u64,
}

impl ApStats {
    pub fn deaf_time(&self) -> Duration {
        Duration::from_micros(self.deaf_time_us)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WireCapture {
    pub at: SimTime,
    pub from: ApId,
    pub to: ApId,
    pub payload: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoggedEvent {
    pub at: SimTime,
    pub ap: usize,
    pub event: AgentEvent,
}

/// Recorded RRM state of one emulated radio.
#[derive(Clone, Debug, Default)]
pub(crate) struct RrmState {
    pub tx_power: BTreeMap<String, i32>,
    pub channel_width: BTreeMap<String, u32>,
    pub tx_bytes: u64,
    pub calls: Vec<RrmCall>,
}

/// Shared state of the emulated world, everything except the agents.
pub struct Medium {
    pub(crate) topology: Topology,
    pub(crate) wireless: WirelessLinkModel,
    pub(crate) clock: VirtualClock<Event>,
    pub(crate) powered: Vec<bool>,
    subscriptions: BTreeMap<Ipv4Addr, BTreeSet<usize>>,
    fifo_tail: BTreeMap<(usize, usize), SimTime>,
    wired_rng: ChaCha8Rng,
    wireless_rng: ChaCha8Rng,
    pub(crate) trace: Trace,
    pub(crate) stats: Vec<ApStats>,
    tap: Option<Vec<WireCapture>>,
    next_token: u64,
    pub(crate) scans: BTreeMap<ScanToken, ActiveScan>,
    pub(crate) rrm: Vec<RrmState>,
    pub(crate) events: Vec<LoggedEvent>,
}

impl Medium {
    fn new(topology: Topology, settings: &SimSettings) -> Self {
        let n = topology.len();
        Medium {
            topology,
            wireless: settings.wireless.clone(),
            clock: VirtualClock::new(),
            powered: vec![false; n],
            subscriptions: BTreeMap::new(),
            fifo_tail: BTreeMap::new(),
            wired_rng: ChaCha8Rng::seed_from_u64(settings.seed ^ 0x0057_4952_4544),
            wireless_rng: ChaCha8Rng::seed_from_u64(settings.seed ^ 0x5749_5245_4c45_5353),
            trace: Trace::new(settings.trace),
            stats: vec![ApStats::default(); n],
            tap: None,
            next_token: 0,
            scans: BTreeMap::new(),
            rrm: vec![RrmState::default(); n],
            events: Vec::new(),
        }
    }

    pub fn now(&self) -> SimTime {
        self.clock.now()
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub(crate) fn id(&self, i: usize) -> &ApId {
        &self.topology.aps[i].id
    }

    pub(crate) fn start_scan(&mut self, ap: usize, request: ScanRequest) -> ScanToken {
        let token = ScanToken(self.next_token);
        self.next_token += 1;
        let channels = match request.kind {
            ScanKind::Full => self.topology.channels.clone(),
            ScanKind::Single(c) => vec![c],
        };
        let now = self.now();
        let dwell = self.wireless.dwell;
        let stats = &mut self.stats[ap];
        match request.kind {
            ScanKind::Full => stats.scans_full += 1,
            ScanKind::Single(_) => stats.scans_single += 1,
        }
        stats.deaf_time_us += dwell.as_micros() as u64 * channels.len() as u64;
        let n = channels.len();
        self.trace.record(now, "scan_start", self.topology.aps[ap].id.as_str(), "", || {
            json!({"token": token.0, "channels": channels.iter().map(|c| c.0).collect::<Vec<_>>(),
                   "ssid": request.ssid, "ie_len": request.ie.as_ref().map(Vec::len)})
        });
        for index in 0..n {
            self.clock.schedule(now + dwell * index as u32, Event::ScanProbe { token, index });
        }
        self.clock.schedule(now + dwell * n as u32, Event::ScanComplete { token });
        self.scans.insert(token, ActiveScan { ap, request, channels, responses: Vec::new() });
        token
    }

    pub(crate) fn subscribe(&mut self, subscriber: usize, publisher: Ipv4Addr) {
        self.subscriptions.entry(publisher).or_default().insert(subscriber);
    }

    pub(crate) fn unsubscribe(&mut self, subscriber: usize, publisher: Ipv4Addr) {
        if let Some(set) = self.subscriptions.get_mut(&publisher) {
            set.remove(&subscriber);
            if set.is_empty() {
                self.subscriptions.remove(&publisher);
            }
        }
    }

    pub fn is_subscribed(&self, subscriber: usize, publisher: Ipv4Addr) -> bool {
        self.subscriptions.get(&publisher).is_some_and(|s| s.contains(&subscriber))
    }

    /// Pub/sub publish from `from`'s socket. Non-subscribers never see the payload.
    pub(crate) fn publish(&mut self, from: usize, to: Option<&ApId>, payload: Vec<u8>) {
        let ip = self.topology.aps[from].ip;
        let targets: Vec<usize> = match self.subscriptions.get(&ip) {
            Some(subs) => subs.iter().copied().filter(|&s| to.is_none_or(|t| self.id(s) == t)).collect(),
            None => Vec::new(),
        };
        if targets.is_empty() && to.is_some() {
            let now = self.now();
            self.trace.record(
                now,
                "wired_unsubscribed",
                self.topology.aps[from].id.as_str(),
                to.map_or("", ApId::as_str),
                || json!({"len": payload.len()}),
            );
        }
        for to in targets {
            self.enqueue_wired(from, to, payload.clone());
        }
    }

    /// Schedules delivery after both last-mile delays, preserving per-pair FIFO order.
    pub(crate) fn enqueue_wired(&mut self, from: usize, to: usize, payload: Vec<u8>) {
        let now = self.now();
        let delay = self.topology.aps[from].wired.last_mile_latency.sample(&mut self.wired_rng)
            + self.topology.aps[to].wired.last_mile_latency.sample(&mut self.wired_rng);
        let tail = self.fifo_tail.entry((from, to)).or_insert(SimTime::ZERO);
        let at = (now + delay).max(*tail);
        *tail = at;
        self.stats[from].wired_sent += 1;
        if let Some(tap) = self.tap.as_mut() {
            tap.push(WireCapture {
                at: now,
                from: self.topology.aps[from].id.clone(),
                to: self.topology.aps[to].id.clone(),
                payload: payload.clone(),
            });
        }
        let (src, dst) = (self.topology.aps[from].id.as_str(), self.topology.aps[to].id.as_str());
        self.trace.record(
            now,
            "wired_send",
            src,
            dst,
            || json!({"len": payload.len(), "deliver_ms": at.as_millis_f64()}),
        );
        self.clock.schedule(at, Event::Wired { from, to, payload });
    }

    pub(crate) fn set_timer(&mut self, ap: usize, at: SimTime, timer: AgentTimer) {
        self.clock.schedule(at, Event::Timer { ap, timer });
    }

    pub(crate) fn log_event(&mut self, ap: usize, event: AgentEvent) {
        let now = self.now();
        if self.trace.enabled() {
            let (kind, peer, detail) = describe(&event);
            self.trace.record(now, kind, self.topology.aps[ap].id.as_str(), &peer, || detail);
        }
        self.events.push(LoggedEvent { at: now, ap, event });
    }

    /// Wired copies scheduled but not yet delivered.
    pub fn wired_in_flight(&self) -> u64 {
        self.clock.iter().filter(|e| matches!(e, Event::Wired { .. })).count() as u64
    }
}

fn describe(event: &AgentEvent) -> (&'static str, String, serde_json::Value) {
    match event {
        AgentEvent::Booted => ("boot_done", String::new(), json!({})),
        AgentEvent::KcmSent { epoch } => ("kcm_sent", String::new(), json!({ "epoch": epoch })),
        AgentEvent::KeyInstalled { sender, epoch } => ("key_installed", sender.to_string(), json!({ "epoch": epoch })),
        AgentEvent::NeighborAdded(n) => ("neighbor_added", n.to_string(), json!({})),
        AgentEvent::NeighborRemoved(n) => ("neighbor_removed", n.to_string(), json!({})),
        AgentEvent::NeighborSuspect(n) => ("neighbor_suspect", n.to_string(), json!({})),
        AgentEvent::Dropped { reason, sender } => {
            ("drop", sender.as_ref().map(ToString::to_string).unwrap_or_default(), json!({ "reason": reason }))
        }
    }
}

/// The emulated neighborhood: a [`Medium`] plus one agent per AP.
pub struct Emulator {
    medium: Medium,
    agents: Vec<Agent>,
    settings: SimSettings,
}

impl Emulator {
    pub fn new(topology: Topology, settings: SimSettings) -> Result<Self, NetemuError> {
        topology.validate()?;
        settings.wireless.validate()?;
        settings.agent.validate().map_err(|e| NetemuError::InvalidModel(e.to_string()))?;
        let mut medium = Medium::new(topology, &settings);
        let mut agents = Vec::with_capacity(medium.topology.len());
        for (i, ap) in medium.topology.aps.iter().enumerate() {
            let seed = settings.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (i as u64 + 1);
            agents.push(Agent::new(
                ap.id.clone(),
                ap.ssid.clone(),
                generate_identity(ap.identity_seed),
                settings.agent.clone(),
                seed,
            ));
        }
        for i in 0..agents.len() {
            let at = settings.boot_at.get(i).copied().unwrap_or(SimTime::ZERO);
            medium.clock.schedule(at, Event::Boot(i));
        }
        Ok(Emulator { medium, agents, settings })
    }

    pub fn from_scenario(config: &ScenarioConfig) -> Result<Self, NetemuError> {
        let topology = build_topology(config)?;
        let settings = config.settings()?;
        Self::new(topology, settings)
    }

    pub fn settings(&self) -> &SimSettings {
        &self.settings
    }

    pub fn medium(&self) -> &Medium {
        &self.medium
    }

    pub fn topology(&self) -> &Topology {
        &self.medium.topology
    }

    pub fn now(&self) -> SimTime {
        self.medium.now()
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    pub fn index_of(&self, id: &ApId) -> Result<usize, NetemuError> {
        self.medium.topology.index_of(id).ok_or_else(|| NetemuError::UnknownAp(id.to_string()))
    }

    pub fn agent(&self, i: usize) -> &Agent {
        &self.agents[i]
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn stats(&self, i: usize) -> &ApStats {
        &self.medium.stats[i]
    }

    pub fn events(&self) -> &[LoggedEvent] {
        &self.medium.events
    }

    pub fn trace(&self) -> &Trace {
        &self.medium.trace
    }

    pub fn set_tracing(&mut self, on: bool) {
        self.medium.trace.set_enabled(on);
    }

    pub fn is_powered(&self, i: usize) -> bool {
        self.medium.powered[i]
    }

    pub fn channel_of(&self, i: usize) -> ChannelId {
        self.medium.topology.aps[i].channel
    }

    pub fn rrm_calls(&self, i: usize) -> &[RrmCall] {
        &self.medium.rrm[i].calls
    }

    pub fn set_tx_bytes(&mut self, i: usize, bytes: u64) {
        self.medium.rrm[i].tx_bytes = bytes;
    }

    /// Starts recording every wired payload put on the backhaul.
    pub fn enable_wire_tap(&mut self) {
        self.medium.tap.get_or_insert_with(Vec::new);
    }

    pub fn captures(&self) -> &[WireCapture] {
        self.medium.tap.as_deref().unwrap_or(&[])
    }

    fn split(&mut self, i: usize) -> (&mut Agent, EmulatedBackend<'_>) {
        let Emulator { medium, agents, .. } = self;
        (&mut agents[i], EmulatedBackend::new(medium, i))
    }

    /// Registers an application on AP `i`; `namespace = None` installs the default handler.
    pub fn register_app(
        &mut self,
        i: usize,
        namespace: Option<&str>,
        app: Box<dyn Application>,
    ) -> Result<usize, ApiError> {
        self.agents[i].register_application(namespace, app)
    }

    /// Runs `f` with the northbound API of AP `i`, sending under `namespace`.
    pub fn with_api<R>(&mut self, i: usize, namespace: &str, f: impl FnOnce(&mut dyn Northbound) -> R) -> R {
        let (agent, mut backend) = self.split(i);
        agent.with_api(&mut backend, namespace, f)
    }

    pub fn app_snapshot(&self, i: usize, slot: usize) -> serde_json::Value {
        self.agents[i].app_snapshot(slot)
    }

    /// Processes the next event; false when the queue is empty.
    pub fn step(&mut self) -> bool {
        let Some((_, event)) = self.medium.clock.pop() else {
            return false;
        };
        match event {
            Event::Boot(i) => {
                self.medium.powered[i] = true;
                let (agent, mut be) = self.split(i);
                agent.boot(&mut be);
            }
            Event::ScanProbe { token, index } => {
                let Some(scan) = self.medium.scans.get(&token) else { return true };
                let (ap, channel) = (scan.ap, scan.channels[index]);
                if !self.medium.powered[ap] {
                    return true;
                }
                let ssid = scan.request.ssid.clone();
                let ie = scan.request.ie.clone();
                let responses = self.probe_channel(ap, channel, ssid.as_deref(), ie.as_deref());
                if let Some(scan) = self.medium.scans.get_mut(&token) {
                    scan.responses.extend(responses);
                }
            }
            Event::ScanComplete { token } => {
                let Some(scan) = self.medium.scans.remove(&token) else { return true };
                let now = self.now();
                let id = self.medium.id(scan.ap).to_string();
                let bssids: Vec<String> = scan.responses.iter().map(|r| r.bssid.to_string()).collect();
                self.medium.trace.record(now, "scan_done", &id, "", || json!({"token": token.0, "responses": bssids}));
                if self.medium.powered[scan.ap] {
                    let (agent, mut be) = self.split(scan.ap);
                    agent.on_scan_complete(&mut be, token, scan.responses);
                }
            }
            Event::Wired { from, to, payload } => {
                let now = self.now();
                let (src, dst) = (self.medium.id(from).to_string(), self.medium.id(to).to_string());
                if !self.medium.powered[to] {
                    self.medium.stats[to].wired_offline_dropped += 1;
                    self.medium.trace.record(now, "wired_drop_offline", &src, &dst, || json!({"len": payload.len()}));
                } else {
                    self.medium.stats[to].wired_delivered += 1;
                    self.medium.trace.record(now, "wired_deliver", &src, &dst, || json!({"len": payload.len()}));
                    let (agent, mut be) = self.split(to);
                    agent.handle_wired_message(&mut be, &payload);
                }
            }
            Event::Timer { ap, timer } => {
                if self.medium.powered[ap] {
                    let (agent, mut be) = self.split(ap);
                    agent.on_timer(&mut be, timer);
                }
            }
        }
        true
    }

    /// Fires every event scheduled at or before `t`, then sets the clock to `t`.
    pub fn run_until(&mut self, t: SimTime) {
        while self.medium.clock.peek_time().is_some_and(|next| next <= t) {
            self.step();
        }
        self.medium.clock.advance_to(t);
    }

    pub fn run_for(&mut self, d: Duration) {
        let t = self.now() + d;
        self.run_until(t);
    }

    /// Fires every event scheduled strictly before `t`, then sets the clock to `t`.
    pub fn run_before(&mut self, t: SimTime) {
        while self.medium.clock.peek_time().is_some_and(|next| next < t) {
            self.step();
        }
        self.medium.clock.advance_to(t);
    }

    /// Runs the configured scenario duration, `[0, duration)`.
    pub fn run(&mut self) {
        self.run_before(SimTime::ZERO + self.settings.duration);
    }

    fn probe_channel(
        &mut self,
        requester: usize,
        channel: ChannelId,
        ssid: Option<&str>,
        ie: Option<&[u8]>,
    ) -> Vec<ProbeResponse> {
        let now = self.now();
        let source = self.medium.id(requester).clone();
        let candidates: Vec<usize> = self.medium.topology.neighbors(requester).collect();
        let mut out = Vec::new();
        for j in candidates {
            let node = &self.medium.topology.aps[j];
            if !self.medium.powered[j] || node.channel != channel || ssid.is_some_and(|s| s != node.ssid) {
                continue;
            }
            let request = ProbeRequest {
                source: source.clone(),
                channel,
                ssid: ssid.map(str::to_owned),
                ie: ie.map(<[u8]>::to_vec),
            };
            let (agent, mut be) = self.split(j);
            let Some(response) = agent.handle_probe_request(&mut be, &request) else { continue };
            let lost = self.medium.wireless_rng.gen::<f64>() < self.medium.wireless.loss_probability;
            let dst = self.medium.id(j).to_string();
            self.medium.trace.record(
                now,
                "probe",
                source.as_str(),
                &dst,
                || json!({"channel": channel.0, "lost": lost, "ie_len": response.ie.as_ref().map(Vec::len)}),
            );
            if lost {
                self.medium.stats[requester].probe_responses_lost += 1;
            } else {
                self.medium.stats[requester].probe_responses_received += 1;
                out.push(response);
            }
        }
        out
    }

    /// Immediate single-channel probe from `requester`; the requester accrues one dwell of deafness.
    pub fn active_scan(
        &mut self,
        requester: &ApId,
        channel: ChannelId,
        ssid: Option<&str>,
        ie: Option<&[u8]>,
    ) -> Result<Vec<ProbeResponse>, NetemuError> {
        let i = self.index_of(requester)?;
        if !self.medium.topology.channels.contains(&channel) {
            return Err(NetemuError::UnknownChannel { ap: requester.to_string(), channel });
        }
        let stats = &mut self.medium.stats[i];
        stats.scans_single += 1;
        stats.deaf_time_us += self.medium.wireless.dwell.as_micros() as u64;
        Ok(self.probe_channel(i, channel, ssid, ie))
    }

    /// Immediate probe of every channel in order; union of the responses.
    pub fn full_scan(&mut self, requester: &ApId, ie: Option<&[u8]>) -> Result<Vec<ProbeResponse>, NetemuError> {
        let i = self.index_of(requester)?;
        let channels = self.medium.topology.channels.clone();
        let stats = &mut self.medium.stats[i];
        stats.scans_full += 1;
        stats.deaf_time_us += self.medium.wireless.dwell.as_micros() as u64 * channels.len() as u64;
        let mut out = Vec::new();
        for c in channels {
            out.extend(self.probe_channel(i, c, None, ie));
        }
        Ok(out)
    }

    /// Raw backhaul injection, subject to the pub/sub contract. Returns whether a delivery was scheduled.
    pub fn send_wired(&mut self, from: &ApId, to: &ApId, payload: Vec<u8>) -> Result<bool, NetemuError> {
        let (f, t) = (self.index_of(from)?, self.index_of(to)?);
        let ip = self.medium.topology.aps[f].ip;
        if !self.medium.is_subscribed(t, ip) {
            return Ok(false);
        }
        self.medium.enqueue_wired(f, t, payload);
        Ok(true)
    }

    /// Silences AP `i`: no probe responses, no wired traffic, no timers.
    pub fn power_off(&mut self, i: usize) {
        let now = self.now();
        let id = self.medium.id(i).to_string();
        self.medium.trace.record(now, "power_off", &id, "", || json!({}));
        let (agent, mut be) = self.split(i);
        agent.power_off(&mut be);
        self.medium.powered[i] = false;
    }

    /// Assigns a new wired address to AP `i`; the agent re-bootstraps.
    pub fn change_ip(&mut self, i: usize, ip: Ipv4Addr) -> Result<(), NetemuError> {
        if let Some(other) = self.medium.topology.index_of_ip(ip) {
            if other != i {
                return Err(NetemuError::InvalidTopology(format!("address {ip} already in use")));
            }
        }
        let now = self.now();
        let id = self.medium.id(i).to_string();
        let old = self.medium.topology.aps[i].ip;
        self.medium.trace.record(now, "ip_change", &id, "", || json!({"old": old.to_string(), "new": ip.to_string()}));
        self.medium.topology.aps[i].ip = ip;
        let (agent, mut be) = self.split(i);
        agent.handle_ip_change(&mut be);
        Ok(())
    }

    /// Forces an immediate key change on AP `i`, outside its schedule.
    pub fn perform_key_change(&mut self, i: usize) {
        let (agent, mut be) = self.split(i);
        agent.perform_key_change(&mut be);
    }

    /// Operator-initiated channel switch on AP `i`.
    pub fn change_channel(&mut self, i: usize, channel: ChannelId) -> Result<(), ApiError> {
        let (agent, mut be) = self.split(i);
        agent.handle_channel_change(&mut be, channel)
    }

    /// Total wired copies enqueued so far, over all APs.
    pub fn wired_enqueued(&self) -> u64 {
        self.medium.stats.iter().map(|s| s.wired_sent).sum()
    }

    pub fn wired_in_flight(&self) -> u64 {
        self.medium.wired_in_flight()
    }
}
