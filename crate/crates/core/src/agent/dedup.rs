use std::collections::BTreeMap;

use crate::types::ApId;

/// Width of the out-of-order window per originator.
pub const DEDUP_WINDOW: u64 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Observation {
    /// First copy of this (origin, seq): deliver it.
    pub first: bool,
    /// Carries more remaining hops than any earlier copy: worth forwarding.
    pub improved: bool,
}

#[derive(Clone, Debug, Default)]
struct OriginState {
    high: u64,
    best_ttl: BTreeMap<u64, u8>,
}

/// Flood deduplication: per-originator high-water mark plus a bounded window.
#[derive(Clone, Debug, Default)]
pub struct FloodFilter {
    origins: BTreeMap<ApId, OriginState>,
}

impl FloodFilter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn observe(&mut self, origin: &ApId, seq: u64, ttl: u8) -> Observation {
        let state = self.origins.entry(origin.clone()).or_default();
        if seq + DEDUP_WINDOW <= state.high {
            return Observation { first: false, improved: false };
        }
        let obs = match state.best_ttl.get_mut(&seq) {
            None => {
                state.best_ttl.insert(seq, ttl);
                Observation { first: true, improved: true }
            }
            Some(best) if ttl > *best => {
                *best = ttl;
                Observation { first: false, improved: true }
            }
            Some(_) => Observation { first: false, improved: false },
        };
        if seq > state.high {
            state.high = seq;
            let floor = seq.saturating_sub(DEDUP_WINDOW);
            state.best_ttl = state.best_ttl.split_off(&(floor + 1));
        }
        obs
    }
}
