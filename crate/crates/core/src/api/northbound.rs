use std::net::Ipv4Addr;
use std::time::Duration;

use serde_json::Value;

use super::southbound::{ClientInfo, LinkStats};
use super::ApiError;
use crate::types::{ApId, ChannelId, SimTime};

/// JSON document exchanged between applications. Binary data travels base64-encoded.
pub type MessageDocument = Value;

/// Result of [`Northbound::get_resfi_credentials`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Credential {
    /// Selector 1: public address of this RRM unit.
    WiredAddress(Ipv4Addr),
    /// Selector 2: DER-encoded RSA public key.
    PublicKey(Vec<u8>),
}

/// Framework and RRM calls available to applications.
pub trait Northbound {
    fn node_id(&self) -> ApId;
    fn now(&self) -> SimTime;

    /// Current neighbors (subscribed and not expired).
    fn get_neighbors(&self) -> Vec<ApId>;
    /// One-hop unicast, additionally sealed with the receiver's public key.
    fn send_to_neighbor(&mut self, node: &ApId, doc: &MessageDocument) -> Result<(), ApiError>;
    /// Broadcast to direct neighbors; `ttl > 1` floods up to `ttl` hops.
    fn send_to_neighbors(&mut self, doc: &MessageDocument, ttl: u8) -> Result<(), ApiError>;
    fn get_resfi_credentials(&self, param: u8) -> Result<Credential, ApiError>;
    /// Mode 1 signs `data`, mode 2 opens a blob sealed to this node's public key.
    fn use_private_rsa_key(&mut self, data: &[u8], mode: u8) -> Result<Vec<u8>, ApiError>;

    /// Fires [`Application::on_timer`] with `token` after `delay`.
    fn set_timer(&mut self, delay: Duration, token: u64) -> Result<(), ApiError>;
    /// Uniform sample in `[0, 1)` from the agent's seeded generator.
    fn random_unit(&mut self) -> f64;

    // RRM (suggested) API.
    /// 1 = number of served stations, 2 = total downlink TX bytes.
    fn get_network_load(&self, kind: u8) -> Result<u64, ApiError>;
    fn get_channels(&self) -> Vec<ChannelId>;
    fn get_channel(&self) -> ChannelId;
    fn set_channel(&mut self, channel: ChannelId) -> Result<(), ApiError>;
    fn set_tx_power(&mut self, mac: &str, dbm: i32);
    fn set_channel_width(&mut self, mac: &str, mhz: u32);
    fn inject_frame(&mut self, frame: &[u8]);
    fn enable_rts_cts(&mut self, mac: &str, enabled: bool);
    fn start_vap(&mut self, ssid: &str) -> Result<(), ApiError>;
    fn deauthenticate_sta(&mut self, mac: &str);
    fn get_client_info(&self) -> Vec<ClientInfo>;
    fn get_rx_stats(&self, mac: &str) -> LinkStats;
    fn get_tx_stats(&self, mac: &str) -> LinkStats;
}

/// An RRM application hosted by an agent.
///
/// Callbacks run on the agent's event loop and must return promptly.
pub trait Application {
    /// Called once the agent has finished bootstrapping.
    fn on_start(&mut self, _api: &mut dyn Northbound) {}
    fn on_receive(&mut self, api: &mut dyn Northbound, sender: &ApId, doc: &MessageDocument);
    fn on_new_link(&mut self, _api: &mut dyn Northbound, _neighbor: &ApId) {}
    fn on_link_failure(&mut self, _api: &mut dyn Northbound, _neighbor: &ApId) {}
    fn on_timer(&mut self, _api: &mut dyn Northbound, _token: u64) {}
    /// Application state for run reports.
    fn snapshot(&self) -> Value {
        Value::Null
    }
}

type RxFn = Box<dyn FnMut(&mut dyn Northbound, &ApId, &MessageDocument)>;
type LinkFn = Box<dyn FnMut(&mut dyn Northbound, &ApId)>;

/// Closure-based application: the `regCallbacks(rx, newLink, linkFailure)` style.
#[derive(Default)]
pub struct Callbacks {
    rx: Option<RxFn>,
    new_link: Option<LinkFn>,
    link_failure: Option<LinkFn>,
}

impl Callbacks {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn on_rx(mut self, f: impl FnMut(&mut dyn Northbound, &ApId, &MessageDocument) + 'static) -> Self {
        self.rx = Some(Box::new(f));
        self
    }

    pub fn on_new_link(mut self, f: impl FnMut(&mut dyn Northbound, &ApId) + 'static) -> Self {
        self.new_link = Some(Box::new(f));
        self
    }

    pub fn on_link_failure(mut self, f: impl FnMut(&mut dyn Northbound, &ApId) + 'static) -> Self {
        self.link_failure = Some(Box::new(f));
        self
    }
}

impl Application for Callbacks {
    fn on_receive(&mut self, api: &mut dyn Northbound, sender: &ApId, doc: &MessageDocument) {
        if let Some(f) = self.rx.as_mut() {
            f(api, sender, doc);
        }
    }

    fn on_new_link(&mut self, api: &mut dyn Northbound, neighbor: &ApId) {
        if let Some(f) = self.new_link.as_mut() {
            f(api, neighbor);
        }
    }

    fn on_link_failure(&mut self, api: &mut dyn Northbound, neighbor: &ApId) {
        if let Some(f) = self.link_failure.as_mut() {
            f(api, neighbor);
        }
    }
}

/// Lets the caller keep a handle on an application after registering it.
impl<A: Application> Application for std::rc::Rc<std::cell::RefCell<A>> {
    fn on_start(&mut self, api: &mut dyn Northbound) {
        self.borrow_mut().on_start(api);
    }
    fn on_receive(&mut self, api: &mut dyn Northbound, sender: &ApId, doc: &MessageDocument) {
        self.borrow_mut().on_receive(api, sender, doc);
    }
    fn on_new_link(&mut self, api: &mut dyn Northbound, neighbor: &ApId) {
        self.borrow_mut().on_new_link(api, neighbor);
    }
    fn on_link_failure(&mut self, api: &mut dyn Northbound, neighbor: &ApId) {
        self.borrow_mut().on_link_failure(api, neighbor);
    }
    fn on_timer(&mut self, api: &mut dyn Northbound, token: u64) {
        self.borrow_mut().on_timer(api, token);
    }
    fn snapshot(&self) -> Value {
        self.borrow().snapshot()
    }
}
