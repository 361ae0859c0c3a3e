//! Weight-based distributed clustering (DCA).
//!
//! A node joins the heaviest adjacent clusterhead. Without one, it declares
//! itself clusterhead once it outweighs every undecided neighbor. The heads
//! end up forming an independent dominating set.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::api::{Application, MessageDocument, Northbound};
use crate::types::ApId;

pub const DCA_NAMESPACE: &str = "de.tu-berlin.dca";

/// Synthetic load first, AP id as tiebreak, so weights are unique.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Weight {
    pub load: u64,
    pub id: ApId,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "role", content = "head", rename_all = "snake_case")]
pub enum Role<H> {
    Undecided,
    Clusterhead,
    Member(H),
}

impl<H> Role<H> {
    pub fn is_decided(&self) -> bool {
        !matches!(self, Role::Undecided)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClusterState<W, H> {
    pub role: Role<H>,
    pub weight: W,
}

/// One DCA decision of `own` given the last known state of each neighbor.
pub fn dca_round<W: Ord, H: Clone>(own: &ClusterState<W, H>, neighbors: &[(H, ClusterState<W, H>)]) -> Role<H> {
    if own.role.is_decided() {
        return own.role.clone();
    }
    let head = neighbors
        .iter()
        .filter(|(_, s)| matches!(s.role, Role::Clusterhead))
        .max_by(|a, b| a.1.weight.cmp(&b.1.weight));
    if let Some((id, _)) = head {
        return Role::Member(id.clone());
    }
    let heaviest =
        neighbors.iter().filter(|(_, s)| matches!(s.role, Role::Undecided)).all(|(_, s)| own.weight > s.weight);
    if heaviest {
        Role::Clusterhead
    } else {
        Role::Undecided
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DcaOutcome {
    pub roles: Vec<Role<usize>>,
    /// Synchronous rounds until every node decided.
    pub rounds: usize,
}

impl DcaOutcome {
    pub fn heads(&self) -> BTreeSet<usize> {
        (0..self.roles.len()).filter(|&i| self.roles[i] == Role::Clusterhead).collect()
    }
}

/// Runs synchronous rounds on an index graph until all nodes decided.
pub fn simulate_dca<W: Ord + Clone>(adjacency: &[BTreeSet<usize>], weights: &[W]) -> DcaOutcome {
    let n = adjacency.len();
    let mut states: Vec<ClusterState<W, usize>> =
        weights.iter().map(|w| ClusterState { role: Role::Undecided, weight: w.clone() }).collect();
    let mut rounds = 0;
    while states.iter().any(|s| !s.role.is_decided()) {
        rounds += 1;
        let next: Vec<Role<usize>> = (0..n)
            .map(|i| {
                let nbs: Vec<(usize, ClusterState<W, usize>)> =
                    adjacency[i].iter().map(|&j| (j, states[j].clone())).collect();
                dca_round(&states[i], &nbs)
            })
            .collect();
        for (s, r) in states.iter_mut().zip(next) {
            s.role = r;
        }
        assert!(rounds <= n, "DCA must terminate within n rounds");
    }
    DcaOutcome { roles: states.into_iter().map(|s| s.role).collect(), rounds }
}

/// True when no two heads are adjacent and every node is a head or adjacent to one.
pub fn is_independent_dominating(adjacency: &[BTreeSet<usize>], heads: &BTreeSet<usize>) -> bool {
    let independent = heads.iter().all(|&h| adjacency[h].is_disjoint(heads));
    let dominating = (0..adjacency.len()).all(|i| heads.contains(&i) || !adjacency[i].is_disjoint(heads));
    independent && dominating
}

#[derive(Clone, Debug, PartialEq)]
pub struct DcaConfig {
    pub round: Duration,
    /// Rounds to wait for silent neighbors before deciding without them.
    pub patience: u32,
}

impl Default for DcaConfig {
    fn default() -> Self {
        DcaConfig { round: Duration::from_millis(500), patience: 3 }
    }
}

const ROUND: u64 = 1;

/// DCA over the wired overlay: one-hop state broadcasts, one decision per round.
#[derive(Debug, Default)]
pub struct DcaApp {
    config: DcaConfig,
    weight: Option<Weight>,
    role: Option<Role<ApId>>,
    known: BTreeMap<ApId, ClusterState<Weight, ApId>>,
    round: u32,
    decided_at: Option<u32>,
}

impl DcaApp {
    pub fn new(config: DcaConfig) -> Self {
        DcaApp { config, ..Default::default() }
    }

    pub fn role(&self) -> Role<ApId> {
        self.role.clone().unwrap_or(Role::Undecided)
    }

    fn decide(&mut self, api: &mut dyn Northbound) {
        let Some(weight) = self.weight.clone() else { return };
        let own = ClusterState { role: self.role(), weight };
        if own.role.is_decided() {
            return;
        }
        let neighbors = api.get_neighbors();
        let heard: Vec<(ApId, ClusterState<Weight, ApId>)> =
            neighbors.iter().filter_map(|n| self.known.get(n).map(|s| (n.clone(), s.clone()))).collect();
        if heard.len() < neighbors.len() && self.round <= self.config.patience {
            return;
        }
        let role = dca_round(&own, &heard);
        if role.is_decided() {
            self.decided_at = Some(self.round);
        }
        self.role = Some(role);
    }

    fn broadcast(&self, api: &mut dyn Northbound) {
        let Some(w) = &self.weight else { return };
        let (role, head) = match self.role() {
            Role::Undecided => ("undecided", Value::Null),
            Role::Clusterhead => ("clusterhead", Value::Null),
            Role::Member(h) => ("member", json!(h)),
        };
        let msg = json!({"node": w.id, "load": w.load, "role": role, "head": head});
        let _ = api.send_to_neighbors(&msg, 1);
    }
}

impl Application for DcaApp {
    fn on_start(&mut self, api: &mut dyn Northbound) {
        let load = api.get_network_load(1).unwrap_or(0);
        self.weight = Some(Weight { load, id: api.node_id() });
        self.role = Some(Role::Undecided);
        self.broadcast(api);
        let _ = api.set_timer(self.config.round, ROUND);
    }

    fn on_receive(&mut self, _api: &mut dyn Northbound, _sender: &ApId, doc: &MessageDocument) {
        let (Some(node), Some(load)) = (doc["node"].as_str(), doc["load"].as_u64()) else { return };
        let role = match (doc["role"].as_str(), doc["head"].as_str()) {
            (Some("clusterhead"), _) => Role::Clusterhead,
            (Some("member"), Some(h)) => Role::Member(ApId::new(h)),
            (Some("undecided"), _) => Role::Undecided,
            _ => return,
        };
        let id = ApId::new(node);
        self.known.insert(id.clone(), ClusterState { role, weight: Weight { load, id } });
    }

    fn on_link_failure(&mut self, _api: &mut dyn Northbound, neighbor: &ApId) {
        self.known.remove(neighbor);
    }

    fn on_timer(&mut self, api: &mut dyn Northbound, token: u64) {
        if token != ROUND {
            return;
        }
        self.round += 1;
        let was_decided = self.role().is_decided();
        self.decide(api);
        if !was_decided {
            self.broadcast(api);
        }
        if !self.role().is_decided() {
            let _ = api.set_timer(self.config.round, ROUND);
        }
    }

    fn snapshot(&self) -> Value {
        let (role, head) = match self.role() {
            Role::Undecided => ("undecided", Value::Null),
            Role::Clusterhead => ("clusterhead", Value::Null),
            Role::Member(h) => ("member", json!(h)),
        };
        json!({"role": role, "head": head, "decided_round": self.decided_at})
    }
}
