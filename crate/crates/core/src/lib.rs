//! ResFi: coordination of residential WiFi access points over a secured
//! wired overlay bootstrapped through 802.11 probe frames.
//!
//! Layers, bottom-up: [`crypto`] (identity and group keys, IE codec),
//! [`netemu`] (discrete-event wireless and wired emulation), [`agent`] (per-AP
//! protocol state machine), [`api`] (application and backend contracts),
//! [`apps`] (channel selection, clustering, end-to-end security),
//! [`analysis`] (closed-form airtime overhead) and [`cli`] (scenario runner).

pub mod agent;
pub mod analysis;
pub mod api;
pub mod apps;
pub mod cli;
pub mod crypto;
pub mod netemu;
pub mod types;

pub use types::{ApId, ChannelId, SimTime};
