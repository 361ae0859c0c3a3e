//! Wireless reception graph of the emulated neighborhood.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::net::Ipv4Addr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::latency::WiredLinkModel;
use super::NetemuError;
use crate::types::{ApId, ChannelId};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Band {
    #[serde(rename = "2.4GHz", alias = "band2g4")]
    Band2G4,
    #[default]
    #[serde(rename = "5GHz", alias = "band5g")]
    Band5G,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ApNode {
    pub id: ApId,
    pub ssid: String,
    pub channel: ChannelId,
    pub wired: WiredLinkModel,
    pub ip: Ipv4Addr,
    /// Synthetic number of served stations.
    pub load: u64,
    pub identity_seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Topology {
    pub aps: Vec<ApNode>,
    pub adjacency: Vec<BTreeSet<usize>>,
    pub channels: Vec<ChannelId>,
    pub band: Band,
}

impl Topology {
    /// APs `ap0..` on `channels[0]` with cable uplinks over the given adjacency.
    pub fn generated(adjacency: Vec<BTreeSet<usize>>, channels: &[u16]) -> Self {
        let aps = (0..adjacency.len())
            .map(|i| {
                let id = generated_id(i);
                ApNode {
                    ssid: format!("net-{id}"),
                    channel: ChannelId(channels[0]),
                    wired: WiredLinkModel::new(super::latency::WiredTechnology::Cable),
                    ip: default_ip(i),
                    load: 0,
                    identity_seed: super::scenario::identity_seed_for(id.as_str()),
                    id,
                }
            })
            .collect();
        Topology { aps, adjacency, channels: channels.iter().map(|&c| ChannelId(c)).collect(), band: Band::default() }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)], channels: &[u16]) -> Self {
        Self::generated(adjacency_from_edges(n, edges), channels)
    }

    pub fn with_wired(mut self, wired: WiredLinkModel) -> Self {
        for ap in &mut self.aps {
            ap.wired = wired.clone();
        }
        self
    }

    /// Checks irreflexivity, symmetry and channel membership.
    pub fn validate(&self) -> Result<(), NetemuError> {
        if self.aps.is_empty() {
            return Err(NetemuError::InvalidTopology("no access points".into()));
        }
        if self.channels.is_empty() {
            return Err(NetemuError::InvalidTopology("no channels".into()));
        }
        if self.adjacency.len() != self.aps.len() {
            return Err(NetemuError::InvalidTopology("adjacency size mismatch".into()));
        }
        let mut ids = BTreeSet::new();
        let mut ips = BTreeSet::new();
        for (i, ap) in self.aps.iter().enumerate() {
            if !ids.insert(&ap.id) {
                return Err(NetemuError::InvalidTopology(format!("duplicate AP id {}", ap.id)));
            }
            if !ips.insert(ap.ip) {
                return Err(NetemuError::InvalidTopology(format!("duplicate wired address {}", ap.ip)));
            }
            if !self.channels.contains(&ap.channel) {
                return Err(NetemuError::UnknownChannel { ap: ap.id.to_string(), channel: ap.channel });
            }
            for &j in &self.adjacency[i] {
                if j == i {
                    return Err(NetemuError::InvalidTopology(format!("{} is adjacent to itself", ap.id)));
                }
                if j >= self.aps.len() || !self.adjacency[j].contains(&i) {
                    return Err(NetemuError::InvalidTopology(format!("asymmetric link at {}", ap.id)));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.aps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.aps.is_empty()
    }

    pub fn index_of(&self, id: &ApId) -> Option<usize> {
        self.aps.iter().position(|ap| &ap.id == id)
    }

    pub fn index_of_ip(&self, ip: Ipv4Addr) -> Option<usize> {
        self.aps.iter().position(|ap| ap.ip == ip)
    }

    pub fn are_adjacent(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].contains(&b)
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[i].iter().copied()
    }

    /// Undirected edges with `a < b`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (a, adj) in self.adjacency.iter().enumerate() {
            out.extend(adj.iter().filter(|&&b| b > a).map(|&b| (a, b)));
        }
        out
    }

    pub fn mean_degree(&self) -> f64 {
        let total: usize = self.adjacency.iter().map(BTreeSet::len).sum();
        total as f64 / self.aps.len() as f64
    }

    /// Hop distances from `src`; `None` for unreachable nodes.
    pub fn bfs_distances(&self, src: usize) -> Vec<Option<usize>> {
        bfs(&self.adjacency, src)
    }

    pub fn is_connected(&self) -> bool {
        self.bfs_distances(0).iter().all(Option::is_some)
    }

    pub fn diameter(&self) -> Option<usize> {
        graph_diameter(&self.adjacency)
    }
}

pub fn bfs(adjacency: &[BTreeSet<usize>], src: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; adjacency.len()];
    dist[src] = Some(0);
    let mut queue = VecDeque::from([src]);
    while let Some(u) = queue.pop_front() {
        let d = dist[u].expect("queued nodes have a distance");
        for &v in &adjacency[u] {
            if dist[v].is_none() {
                dist[v] = Some(d + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

pub fn graph_diameter(adjacency: &[BTreeSet<usize>]) -> Option<usize> {
    let mut best = 0;
    for src in 0..adjacency.len() {
        for d in bfs(adjacency, src) {
            best = best.max(d?);
        }
    }
    Some(best)
}

pub fn adjacency_from_edges(n: usize, edges: &[(usize, usize)]) -> Vec<BTreeSet<usize>> {
    let mut adj = vec![BTreeSet::new(); n];
    for &(a, b) in edges {
        adj[a].insert(b);
        adj[b].insert(a);
    }
    adj
}

/// G(n, p) with `p = density / (n - 1)`, so the expected degree equals `density`.
pub fn random_graph(n: usize, density: f64, rng: &mut impl Rng) -> Result<Vec<BTreeSet<usize>>, NetemuError> {
    if !(density >= 0.0) {
        return Err(NetemuError::InvalidTopology(format!("density must be nonnegative, got {density}")));
    }
    let mut adj = vec![BTreeSet::new(); n];
    if n < 2 {
        return Ok(adj);
    }
    let p = (density / (n - 1) as f64).min(1.0);
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen::<f64>() < p {
                adj[a].insert(b);
                adj[b].insert(a);
            }
        }
    }
    Ok(adj)
}

/// Random connected graph: a random spanning tree plus G(n, p) extra edges,
/// with `p` chosen so the mean degree is close to `density` (at least 2(n-1)/n).
pub fn random_connected_graph(n: usize, density: f64, seed: u64) -> Vec<BTreeSet<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut adj = vec![BTreeSet::new(); n];
    if n < 2 {
        return adj;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    for k in 1..n {
        let parent = order[rng.gen_range(0..k)];
        adj[order[k]].insert(parent);
        adj[parent].insert(order[k]);
    }
    let tree_degree = 2.0 * (n - 1) as f64 / n as f64;
    let spare_pairs = (n * (n - 1) / 2 - (n - 1)) as f64;
    if spare_pairs > 0.0 {
        let p = ((density - tree_degree).max(0.0) * n as f64 / 2.0 / spare_pairs).min(1.0);
        for a in 0..n {
            for b in a + 1..n {
                if !adj[a].contains(&b) && rng.gen::<f64>() < p {
                    adj[a].insert(b);
                    adj[b].insert(a);
                }
            }
        }
    }
    adj
}

/// Deterministic private address for the `i`-th AP.
pub fn default_ip(i: usize) -> Ipv4Addr {
    Ipv4Addr::from(u32::from(Ipv4Addr::new(10, 0, 0, 1)) + i as u32)
}

/// Labels used for generated nodes: ap0, ap1, ...
pub fn generated_id(i: usize) -> ApId {
    ApId::new(format!("ap{i}"))
}

pub(crate) fn edge_list_to_indices(
    ids: &BTreeMap<&str, usize>,
    links: &[(String, String)],
) -> Result<Vec<(usize, usize)>, NetemuError> {
    links
        .iter()
        .map(|(a, b)| {
            let ia = *ids.get(a.as_str()).ok_or_else(|| NetemuError::UnknownAp(a.clone()))?;
            let ib = *ids.get(b.as_str()).ok_or_else(|| NetemuError::UnknownAp(b.clone()))?;
            if ia == ib {
                return Err(NetemuError::InvalidTopology(format!("self-adjacency at {a}")));
            }
            Ok((ia, ib))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_matches_mean_degree() {
        let mut total = 0.0;
        for seed in 0..30 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let adj = random_graph(100, 16.8, &mut rng).unwrap();
            let deg: usize = adj.iter().map(BTreeSet::len).sum();
            total += deg as f64 / 100.0;
        }
        assert!((total / 30.0 - 16.8).abs() < 1.5);
    }

    #[test]
    fn connected_generator_is_connected() {
        for seed in 0..50 {
            let n = 2 + (seed as usize % 14);
            let adj = random_connected_graph(n, 3.0, seed);
            assert!(bfs(&adj, 0).iter().all(Option::is_some));
            for (a, s) in adj.iter().enumerate() {
                assert!(!s.contains(&a));
                assert!(s.iter().all(|&b| adj[b].contains(&a)));
            }
        }
    }

    #[test]
    fn negative_density_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(random_graph(5, -1.0, &mut rng).is_err());
    }

    #[test]
    fn chain_diameter() {
        let adj = adjacency_from_edges(4, &[(0, 1), (1, 2), (2, 3)]);
        assert_eq!(graph_diameter(&adj), Some(3));
        let split = adjacency_from_edges(3, &[(0, 1)]);
        assert_eq!(graph_diameter(&split), None);
    }

    #[test]
    fn default_ips_unique() {
        let ips: BTreeSet<_> = (0..1000).map(default_ip).collect();
        assert_eq!(ips.len(), 1000);
    }
}
