//! End-to-end security inside a cluster.
//!
//! The head floods its RSA public key to the members, which answer with their
//! own. Afterwards any two of them can exchange blobs that only the target's
//! private key opens, even across forwarding APs.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Duration;

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::AppError;
use crate::api::{Application, Credential, MessageDocument, Northbound};
use crate::crypto::{seal_unicast, PublicKey};
use crate::types::ApId;

pub const E2E_NAMESPACE: &str = "de.tu-berlin.e2e";

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClusterRole {
    Head { members: BTreeSet<ApId> },
    Member { head: ApId },
}

#[derive(Clone, Debug, PartialEq)]
pub struct E2eConfig {
    pub role: ClusterRole,
    /// Hop budget for key and data floods.
    pub ttl: u8,
    /// Head re-announces its key this often until all members answered.
    pub announce_every: Duration,
    pub max_announcements: u32,
}

impl E2eConfig {
    pub fn head(members: impl IntoIterator<Item = ApId>, ttl: u8) -> Self {
        E2eConfig {
            role: ClusterRole::Head { members: members.into_iter().collect() },
            ttl,
            announce_every: Duration::from_secs(1),
            max_announcements: 3,
        }
    }

    pub fn member(head: ApId, ttl: u8) -> Self {
        E2eConfig { role: ClusterRole::Member { head }, ..Self::head([], ttl) }
    }
}

const ANNOUNCE: u64 = 1;

/// Key directory plus end-to-end inbox for one cluster participant.
#[derive(Debug)]
pub struct E2eKeyApp {
    config: E2eConfig,
    directory: BTreeMap<ApId, PublicKey>,
    inbox: Vec<(ApId, Vec<u8>)>,
    seen_blobs: Vec<Vec<u8>>,
    announcements: u32,
    rng: Option<ChaCha8Rng>,
    foreign_blobs: u64,
}

impl E2eKeyApp {
    pub fn new(config: E2eConfig) -> Self {
        E2eKeyApp {
            config,
            directory: BTreeMap::new(),
            inbox: Vec::new(),
            seen_blobs: Vec::new(),
            announcements: 0,
            rng: None,
            foreign_blobs: 0,
        }
    }

    /// Known public keys, including this node's own.
    pub fn directory(&self) -> &BTreeMap<ApId, PublicKey> {
        &self.directory
    }

    /// Decrypted end-to-end payloads addressed to this node.
    pub fn inbox(&self) -> &[(ApId, Vec<u8>)] {
        &self.inbox
    }

    /// Sealed blobs this node relayed or observed but could not read.
    pub fn observed_blobs(&self) -> &[Vec<u8>] {
        &self.seen_blobs
    }

    /// Configured peers whose key has not arrived.
    pub fn missing(&self) -> Vec<ApId> {
        let wanted: Vec<ApId> = match &self.config.role {
            ClusterRole::Head { members } => members.iter().cloned().collect(),
            ClusterRole::Member { head } => vec![head.clone()],
        };
        wanted.into_iter().filter(|p| !self.directory.contains_key(p)).collect()
    }

    /// Seals `plaintext` for `target` and floods it within the ttl budget.
    pub fn send_e2e(&mut self, api: &mut dyn Northbound, target: &ApId, plaintext: &[u8]) -> Result<(), AppError> {
        let key = self.directory.get(target).ok_or_else(|| AppError::UnknownPeer(target.clone()))?;
        let rng = self.rng.get_or_insert_with(|| seeded(api));
        let blob = seal_unicast(plaintext, key, rng);
        let msg = json!({"type": "data", "from": api.node_id(), "to": target, "blob": B64.encode(blob)});
        api.send_to_neighbors(&msg, self.config.ttl)?;
        Ok(())
    }

    fn announce(&mut self, api: &mut dyn Northbound, to: Option<&ApId>) {
        let Ok(Credential::PublicKey(der)) = api.get_resfi_credentials(2) else { return };
        let msg = json!({"type": "key", "from": api.node_id(), "to": to, "key": B64.encode(der)});
        let _ = api.send_to_neighbors(&msg, self.config.ttl);
    }

    fn accepts_key_from(&self, from: &ApId, to: Option<&str>, me: &ApId) -> bool {
        match &self.config.role {
            ClusterRole::Head { members } => members.contains(from) && to == Some(me.as_str()),
            ClusterRole::Member { head } => head == from,
        }
    }
}

fn seeded(api: &mut dyn Northbound) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64((api.random_unit() * (1u64 << 53) as f64) as u64)
}

impl Application for E2eKeyApp {
    fn on_start(&mut self, api: &mut dyn Northbound) {
        self.rng = Some(seeded(api));
        if let Ok(Credential::PublicKey(der)) = api.get_resfi_credentials(2) {
            if let Ok(key) = PublicKey::from_der(&der) {
                self.directory.insert(api.node_id(), key);
            }
        }
        if matches!(self.config.role, ClusterRole::Head { .. }) {
            let _ = api.set_timer(self.config.announce_every, ANNOUNCE);
        }
    }

    fn on_receive(&mut self, api: &mut dyn Northbound, _sender: &ApId, doc: &MessageDocument) {
        let Some(from) = doc["from"].as_str().map(ApId::new) else { return };
        let me = api.node_id();
        match doc["type"].as_str() {
            Some("key") => {
                if !self.accepts_key_from(&from, doc["to"].as_str(), &me) {
                    return;
                }
                let Some(key) = doc["key"].as_str().and_then(|k| B64.decode(k).ok()) else { return };
                let Ok(key) = PublicKey::from_der(&key) else { return };
                let fresh = self.directory.insert(from.clone(), key).is_none();
                if fresh && matches!(self.config.role, ClusterRole::Member { .. }) {
                    self.announce(api, Some(&from));
                }
            }
            Some("data") => {
                let Some(blob) = doc["blob"].as_str().and_then(|b| B64.decode(b).ok()) else { return };
                if doc["to"].as_str() != Some(me.as_str()) {
                    self.seen_blobs.push(blob);
                    return;
                }
                match api.use_private_rsa_key(&blob, 2) {
                    Ok(plain) => self.inbox.push((from, plain)),
                    Err(_) => self.foreign_blobs += 1,
                }
            }
            _ => {}
        }
    }

    fn on_timer(&mut self, api: &mut dyn Northbound, token: u64) {
        if token != ANNOUNCE || self.missing().is_empty() || self.announcements >= self.config.max_announcements {
            return;
        }
        self.announcements += 1;
        self.announce(api, None);
        let _ = api.set_timer(self.config.announce_every, ANNOUNCE);
    }

    fn snapshot(&self) -> Value {
        json!({
            "directory": self.directory.keys().collect::<Vec<_>>(),
            "missing": self.missing(),
            "inbox": self.inbox.len(),
            "unreadable": self.foreign_blobs,
        })
    }
}
