use std::net::Ipv4Addr;

use crate::crypto::{KeyMaterial, PublicKey};
use crate::types::{ApId, ChannelId, SimTime};

/// What an AP learns about a peer from its big IE and probe responses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApIdentity {
    pub ap_id: ApId,
    pub wired_address: Ipv4Addr,
    pub public_key: PublicKey,
    /// Unknown until the peer answers one of our probes or sends a KCM.
    pub ssid: Option<String>,
    pub channel: Option<ChannelId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NeighborRecord {
    pub identity: ApIdentity,
    pub group_key: KeyMaterial,
    /// Number of distinct group keys observed from this peer, starting at 1.
    pub epoch: u64,
    pub last_kcm: SimTime,
    pub subscribed: bool,
    pub last_seq_seen: u64,
    /// Set when a rescan after a KCM found nothing twice.
    pub suspect: bool,
}

impl NeighborRecord {
    pub(crate) fn new(identity: ApIdentity, group_key: KeyMaterial, now: SimTime) -> Self {
        NeighborRecord {
            identity,
            group_key,
            epoch: 1,
            last_kcm: now,
            subscribed: true,
            last_seq_seen: 0,
            suspect: false,
        }
    }

    /// Installs `key`, counting a new epoch when it differs from the current one.
    pub(crate) fn install_key(&mut self, key: KeyMaterial) -> bool {
        if key == self.group_key {
            return false;
        }
        self.group_key = key;
        self.epoch += 1;
        true
    }
}
