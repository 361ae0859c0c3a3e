//! Hminmax distributed channel selection.
//!
//! Every AP periodically tells its direct neighbors `{node, ch, load}`. On
//! each update it computes, per channel `c`, the worst pairwise load conflict
//! `Hc[c] = max(self_load + nb_load)` over neighbors on `c` and moves to the
//! channel with the smallest `Hc`.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::AppError;
use crate::api::{Application, MessageDocument, Northbound};
use crate::types::{ApId, ChannelId};

pub const CHANNEL_NAMESPACE: &str = "de.tu-berlin.ch-assign";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NeighborInfo {
    pub load: u64,
    pub ch: ChannelId,
}

/// `Hc` for every channel in `channels`, in the same order.
pub fn conflict_weights<'a>(
    self_load: u64,
    nb_info: impl IntoIterator<Item = &'a NeighborInfo>,
    channels: &[ChannelId],
) -> Vec<u64> {
    let mut hc = vec![0u64; channels.len()];
    for nb in nb_info {
        if let Some(k) = channels.iter().position(|&c| c == nb.ch) {
            hc[k] = hc[k].max(self_load + nb.load);
        }
    }
    hc
}

/// Channel minimizing `Hc`, ties broken by the lowest channel id.
pub fn channel_selection_step(
    self_load: u64,
    nb_info: &BTreeMap<ApId, NeighborInfo>,
    channels: &[ChannelId],
) -> Result<ChannelId, AppError> {
    if channels.is_empty() {
        return Err(AppError::EmptyChannelList);
    }
    let hc = conflict_weights(self_load, nb_info.values(), channels);
    Ok(argmin(&hc, channels))
}

fn argmin(hc: &[u64], channels: &[ChannelId]) -> ChannelId {
    let k = (0..channels.len()).min_by_key(|&k| (hc[k], channels[k])).expect("nonempty");
    channels[k]
}

/// Applies the switching rule: move only when `Hc` drops by more than `margin`.
pub fn next_channel<'a>(
    current: ChannelId,
    self_load: u64,
    nb_info: impl IntoIterator<Item = &'a NeighborInfo>,
    channels: &[ChannelId],
    margin: u64,
) -> Result<ChannelId, AppError> {
    if channels.is_empty() {
        return Err(AppError::EmptyChannelList);
    }
    let hc = conflict_weights(self_load, nb_info, channels);
    let best = argmin(&hc, channels);
    let Some(cur) = channels.iter().position(|&c| c == current) else {
        return Ok(best);
    };
    let best_k = channels.iter().position(|&c| c == best).expect("member");
    Ok(if hc[best_k] + margin < hc[cur] { best } else { current })
}

/// Edges whose endpoints share a channel.
pub fn count_conflicts(adjacency: &[BTreeSet<usize>], assignment: &[ChannelId]) -> usize {
    adjacency
        .iter()
        .enumerate()
        .map(|(a, adj)| adj.iter().filter(|&&b| b > a && assignment[a] == assignment[b]).count())
        .sum()
}

/// Fewest conflicting edges over all assignments of `channel_count` channels (exhaustive).
pub fn optimal_conflicts(adjacency: &[BTreeSet<usize>], channel_count: usize) -> usize {
    let n = adjacency.len();
    let channels: Vec<ChannelId> = (0..channel_count as u16).map(ChannelId).collect();
    let mut assignment = vec![channels[0]; n];
    let mut best = usize::MAX;
    let total = channel_count.pow(n as u32);
    for code in 0..total {
        let mut rest = code;
        for slot in assignment.iter_mut() {
            *slot = channels[rest % channel_count];
            rest /= channel_count;
        }
        best = best.min(count_conflicts(adjacency, &assignment));
        if best == 0 {
            break;
        }
    }
    best
}

/// Smallest number of colors giving a proper coloring (exhaustive).
pub fn chromatic_number(adjacency: &[BTreeSet<usize>]) -> usize {
    (1..=adjacency.len().max(1)).find(|&k| optimal_conflicts(adjacency, k) == 0).unwrap_or(adjacency.len())
}

/// One node's move under full knowledge of its neighbors' channels.
pub fn best_response(
    node: usize,
    adjacency: &[BTreeSet<usize>],
    loads: &[u64],
    assignment: &[ChannelId],
    channels: &[ChannelId],
    margin: u64,
) -> ChannelId {
    let info: Vec<NeighborInfo> =
        adjacency[node].iter().map(|&j| NeighborInfo { load: loads[j], ch: assignment[j] }).collect();
    next_channel(assignment[node], loads[node], &info, channels, margin).expect("nonempty channels")
}

/// Quiescent states reachable from `initial` when nodes move one at a time in any order.
pub fn reachable_fixpoints(
    adjacency: &[BTreeSet<usize>],
    loads: &[u64],
    channels: &[ChannelId],
    initial: Vec<ChannelId>,
    margin: u64,
) -> Vec<Vec<ChannelId>> {
    let mut seen = HashSet::from([initial.clone()]);
    let mut stack = vec![initial];
    let mut fixpoints = Vec::new();
    while let Some(state) = stack.pop() {
        let mut moved = false;
        for node in 0..state.len() {
            let ch = best_response(node, adjacency, loads, &state, channels, margin);
            if ch != state[node] {
                moved = true;
                let mut next = state.clone();
                next[node] = ch;
                if seen.insert(next.clone()) {
                    stack.push(next);
                }
            }
        }
        if !moved {
            fixpoints.push(state);
        }
    }
    fixpoints.sort();
    fixpoints
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChannelSelectionConfig {
    /// Pause between two announcements, before backoff.
    pub period: Duration,
    /// Each announcement is delayed by `U(0, jitter / 2)`.
    pub jitter: Duration,
    pub margin: u64,
}

impl Default for ChannelSelectionConfig {
    fn default() -> Self {
        ChannelSelectionConfig { period: Duration::from_secs(1), jitter: Duration::from_secs(1), margin: 0 }
    }
}

const ANNOUNCE: u64 = 1;

/// Periodic min-max channel selection; register it under [`CHANNEL_NAMESPACE`].
#[derive(Debug, Default)]
pub struct ChannelSelectionApp {
    config: ChannelSelectionConfig,
    nb_info: BTreeMap<ApId, NeighborInfo>,
    switches: u64,
    last_channel: Option<ChannelId>,
}

impl ChannelSelectionApp {
    pub fn new(config: ChannelSelectionConfig) -> Self {
        ChannelSelectionApp { config, ..Default::default() }
    }

    pub fn neighbor_info(&self) -> &BTreeMap<ApId, NeighborInfo> {
        &self.nb_info
    }

    fn backoff(&self, api: &mut dyn Northbound) -> Duration {
        self.config.jitter.mul_f64(api.random_unit() / 2.0)
    }

    fn announce(&mut self, api: &mut dyn Northbound) {
        let load = api.get_network_load(1).unwrap_or(0);
        let ch = api.get_channel();
        self.last_channel = Some(ch);
        let msg = json!({"node": api.node_id(), "ch": ch.0, "load": load});
        let _ = api.send_to_neighbors(&msg, 1);
    }

    fn reselect(&mut self, api: &mut dyn Northbound) {
        let load = api.get_network_load(1).unwrap_or(0);
        let channels = api.get_channels();
        let current = api.get_channel();
        if let Ok(ch) = next_channel(current, load, self.nb_info.values(), &channels, self.config.margin) {
            if ch != current && api.set_channel(ch).is_ok() {
                self.switches += 1;
            }
        }
    }
}

impl Application for ChannelSelectionApp {
    fn on_start(&mut self, api: &mut dyn Northbound) {
        let delay = self.backoff(api);
        let _ = api.set_timer(delay, ANNOUNCE);
    }

    fn on_receive(&mut self, api: &mut dyn Northbound, _sender: &ApId, doc: &MessageDocument) {
        let (Some(node), Some(ch), Some(load)) = (doc["node"].as_str(), doc["ch"].as_u64(), doc["load"].as_u64())
        else {
            return;
        };
        self.nb_info.insert(ApId::new(node), NeighborInfo { load, ch: ChannelId(ch as u16) });
        self.reselect(api);
    }

    fn on_link_failure(&mut self, _api: &mut dyn Northbound, neighbor: &ApId) {
        self.nb_info.remove(neighbor);
    }

    fn on_timer(&mut self, api: &mut dyn Northbound, token: u64) {
        if token == ANNOUNCE {
            self.announce(api);
            let delay = self.config.period + self.backoff(api);
            let _ = api.set_timer(delay, ANNOUNCE);
        }
    }

    fn snapshot(&self) -> Value {
        json!({
            "channel": self.last_channel.map(|c| c.0),
            "switches": self.switches,
            "neighbors": self.nb_info.len(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netemu::adjacency_from_edges;

    fn chs(v: &[u16]) -> Vec<ChannelId> {
        v.iter().map(|&c| ChannelId(c)).collect()
    }

    fn info(entries: &[(&str, u16, u64)]) -> BTreeMap<ApId, NeighborInfo> {
        entries.iter().map(|&(n, ch, load)| (ApId::from(n), NeighborInfo { load, ch: ChannelId(ch) })).collect()
    }

    #[test]
    fn picks_free_channel() {
        let nb = info(&[("b", 1, 3), ("c", 2, 7)]);
        assert_eq!(conflict_weights(5, nb.values(), &chs(&[1, 2, 3])), vec![8, 12, 0]);
        assert_eq!(channel_selection_step(5, &nb, &chs(&[1, 2, 3])).unwrap(), ChannelId(3));
    }

    #[test]
    fn no_neighbors_lowest_id() {
        assert_eq!(channel_selection_step(5, &BTreeMap::new(), &chs(&[11, 1, 6])).unwrap(), ChannelId(1));
        assert_eq!(channel_selection_step(5, &BTreeMap::new(), &[]), Err(AppError::EmptyChannelList));
    }

    #[test]
    fn max_rule() {
        let nb = info(&[("b", 1, 3), ("c", 1, 9)]);
        assert_eq!(conflict_weights(5, nb.values(), &chs(&[1])), vec![14]);
        assert_eq!(channel_selection_step(5, &nb, &chs(&[1])).unwrap(), ChannelId(1));
    }

    #[test]
    fn margin_blocks_small_gains() {
        let nb = info(&[("b", 1, 3), ("c", 2, 4)]);
        let channels = chs(&[1, 2]);
        assert_eq!(next_channel(ChannelId(2), 1, nb.values(), &channels, 0).unwrap(), ChannelId(1));
        assert_eq!(next_channel(ChannelId(2), 1, nb.values(), &channels, 1).unwrap(), ChannelId(2));
        let tie = info(&[("b", 1, 3), ("c", 2, 3)]);
        assert_eq!(next_channel(ChannelId(2), 1, tie.values(), &channels, 0).unwrap(), ChannelId(2));
    }

    #[test]
    fn two_nodes_two_channels_separate() {
        let adj = adjacency_from_edges(2, &[(0, 1)]);
        let fps = reachable_fixpoints(&adj, &[1, 1], &chs(&[1, 2]), chs(&[1, 1]), 0);
        assert!(!fps.is_empty());
        assert!(fps.iter().all(|s| count_conflicts(&adj, s) == 0));
    }

    #[test]
    fn triangle_three_channels_proper_coloring() {
        let adj = adjacency_from_edges(3, &[(0, 1), (1, 2), (0, 2)]);
        let channels = chs(&[1, 2, 3]);
        let fps = reachable_fixpoints(&adj, &[1, 1, 1], &channels, chs(&[1, 1, 1]), 0);
        assert!(fps.iter().all(|s| count_conflicts(&adj, s) == 0));
        // brute force: among all 27 states the fixpoints are exactly the proper colorings
        for code in 0..27usize {
            let s: Vec<ChannelId> = (0..3).map(|i| channels[code / 3usize.pow(i) % 3]).collect();
            let fixed = (0..3).all(|i| best_response(i, &adj, &[1, 1, 1], &s, &channels, 0) == s[i]);
            assert_eq!(fixed, count_conflicts(&adj, &s) == 0, "{s:?}");
        }
    }

    #[test]
    fn chromatic_numbers() {
        assert_eq!(chromatic_number(&adjacency_from_edges(3, &[])), 1);
        assert_eq!(chromatic_number(&adjacency_from_edges(4, &[(0, 1), (1, 2), (2, 3)])), 2);
        assert_eq!(chromatic_number(&adjacency_from_edges(3, &[(0, 1), (1, 2), (0, 2)])), 3);
        assert_eq!(optimal_conflicts(&adjacency_from_edges(3, &[(0, 1), (1, 2), (0, 2)]), 2), 1);
    }
}
