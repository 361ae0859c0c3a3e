//! Northbound application API and the southbound backend contract.
//!
//! Applications are written against [`Northbound`] only. An agent talks to its
//! radio, wired uplink and timers exclusively through a [`Southbound`] backend;
//! [`EmulatedBackend`] binds that contract to the in-process emulator.

mod emulated;
mod northbound;
mod southbound;

pub use emulated::{EmulatedBackend, RrmCall};
pub use northbound::{Application, Callbacks, Credential, MessageDocument, Northbound};
pub use southbound::{
    AgentEvent, AgentTimer, ClientInfo, LinkStats, ProbeRequest, ProbeResponse, ScanKind, ScanRequest, ScanToken,
    Southbound,
};

use thiserror::Error;

use crate::crypto::CryptoError;
use crate::types::{ApId, ChannelId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ApiError {
    #[error("{0} is not a current neighbor")]
    UnknownNeighbor(ApId),
    #[error("ttl must be at least 1, got {0}")]
    InvalidTtl(u8),
    #[error("namespace {0:?} is already registered")]
    DuplicateNamespace(String),
    #[error("unknown credential selector {0}")]
    BadSelector(u8),
    #[error("unknown private key mode {0}")]
    BadMode(u8),
    #[error("unknown channel {0}")]
    UnknownChannel(ChannelId),
    #[error("unknown network load type {0}")]
    UnknownStatType(u8),
    #[error("agent is not running")]
    NotRunning,
    #[error("timers are only available inside application callbacks")]
    NoTimerContext,
    #[error(transparent)]
    Crypto(#[from] CryptoError),
}
