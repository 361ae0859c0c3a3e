mod common;

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::rc::Rc;
use std::time::Duration;

use resfi::apps::{
    count_conflicts, is_independent_dominating, simulate_dca, ChannelSelectionApp, ChannelSelectionConfig, DcaApp,
    DcaConfig, E2eConfig, E2eKeyApp, Role, Weight, CHANNEL_NAMESPACE, DCA_NAMESPACE, E2E_NAMESPACE,
};
use resfi::crypto::open_unicast;
use resfi::netemu::{adjacency_from_edges, graph_diameter, Emulator, Topology};
use resfi::{ApId, ChannelId};

use common::settings;

fn loaded(mut topo: Topology, loads: &[u64]) -> Topology {
    for (ap, &l) in topo.aps.iter_mut().zip(loads) {
        ap.load = l;
    }
    topo
}

fn channel_emulator(topo: Topology) -> Emulator {
    let mut emu = Emulator::new(topo, settings(Duration::from_secs(60))).unwrap();
    for i in 0..emu.len() {
        let app = ChannelSelectionApp::new(ChannelSelectionConfig::default());
        emu.register_app(i, Some(CHANNEL_NAMESPACE), Box::new(app)).unwrap();
    }
    emu
}

fn channels(emu: &Emulator) -> Vec<ChannelId> {
    (0..emu.len()).map(|i| emu.channel_of(i)).collect()
}

#[test]
fn two_aps_end_on_distinct_channels() {
    let topo = loaded(Topology::from_edges(2, &[(0, 1)], &[1, 6]), &[2, 3]);
    let mut emu = channel_emulator(topo);
    emu.run_for(Duration::from_secs(20));
    let ch = channels(&emu);
    assert_ne!(ch[0], ch[1]);
}

#[test]
fn lone_ap_keeps_lowest_channel() {
    let topo = loaded(Topology::from_edges(1, &[], &[1, 6, 11]), &[4]);
    let mut emu = channel_emulator(topo);
    emu.run_for(Duration::from_secs(10));
    assert_eq!(emu.channel_of(0), ChannelId(1));
    assert!(emu.rrm_calls(0).is_empty());
}

#[test]
fn triangle_three_channels_colors_properly() {
    let topo = loaded(Topology::from_edges(3, &[(0, 1), (1, 2), (0, 2)], &[1, 6, 11]), &[1, 2, 3]);
    let mut emu = channel_emulator(topo);
    emu.run_for(Duration::from_secs(30));
    let adj = emu.topology().adjacency.clone();
    assert_eq!(count_conflicts(&adj, &channels(&emu)), 0);
    let snap = emu.app_snapshot(0, 0);
    assert_eq!(snap["neighbors"], 2);
}

#[test]
fn dca_over_overlay_matches_round_model() {
    let edges = [(0, 1), (1, 2), (2, 3), (3, 4), (1, 5)];
    let loads = [3, 1, 2, 7, 4, 0];
    let topo = loaded(Topology::from_edges(6, &edges, &[36]), &loads);
    let adj = topo.adjacency.clone();
    let weights: Vec<Weight> = topo.aps.iter().map(|ap| Weight { load: ap.load, id: ap.id.clone() }).collect();
    let mut emu = Emulator::new(topo, settings(Duration::from_secs(60))).unwrap();
    for i in 0..emu.len() {
        emu.register_app(i, Some(DCA_NAMESPACE), Box::new(DcaApp::new(DcaConfig::default()))).unwrap();
    }
    emu.run_for(Duration::from_secs(10));

    let model = simulate_dca(&adj, &weights);
    assert!(is_independent_dominating(&adj, &model.heads()));
    for (i, role) in model.roles.iter().enumerate() {
        let snap = emu.app_snapshot(i, 0);
        match role {
            Role::Clusterhead => assert_eq!(snap["role"], "clusterhead", "ap{i}"),
            Role::Member(h) => {
                assert_eq!(snap["role"], "member", "ap{i}");
                assert_eq!(snap["head"], format!("ap{h}"));
            }
            Role::Undecided => unreachable!(),
        }
    }
}

fn e2e_chain() -> (Emulator, Vec<Rc<RefCell<E2eKeyApp>>>) {
    let topo = Topology::from_edges(3, &[(0, 1), (1, 2)], &[36]);
    let mut emu = Emulator::new(topo, settings(Duration::from_secs(60))).unwrap();
    let head = ApId::from("ap0");
    let configs = [
        E2eConfig::head([ApId::from("ap1"), ApId::from("ap2")], 2),
        E2eConfig::member(head.clone(), 2),
        E2eConfig::member(head, 2),
    ];
    let apps: Vec<_> = configs.into_iter().map(|c| Rc::new(RefCell::new(E2eKeyApp::new(c)))).collect();
    for (i, app) in apps.iter().enumerate() {
        emu.register_app(i, Some(E2E_NAMESPACE), Box::new(app.clone())).unwrap();
    }
    emu.run_for(Duration::from_secs(5));
    (emu, apps)
}

#[test]
fn e2e_keys_propagate_across_two_hops() {
    let (emu, apps) = e2e_chain();
    let dir: BTreeSet<String> = apps[0].borrow().directory().keys().map(|k| k.to_string()).collect();
    assert_eq!(dir, BTreeSet::from(["ap0".into(), "ap1".into(), "ap2".into()]));
    assert!(apps[0].borrow().missing().is_empty());
    for (i, app) in apps.iter().enumerate().skip(1) {
        assert!(app.borrow().missing().is_empty());
        assert_eq!(app.borrow().directory()[&ApId::from("ap0")], *emu.agent(0).public_key());
        assert_eq!(app.borrow().directory()[&ApId::new(format!("ap{i}"))], *emu.agent(i).public_key());
    }
}

#[test]
fn two_hop_member_reads_head_unicast_but_forwarder_cannot() {
    let (mut emu, apps) = e2e_chain();
    let target = ApId::from("ap2");
    emu.with_api(0, E2E_NAMESPACE, |api| apps[0].borrow_mut().send_e2e(api, &target, b"cluster secret")).unwrap();
    emu.run_for(Duration::from_secs(1));
    assert_eq!(apps[2].borrow().inbox(), &[(ApId::from("ap0"), b"cluster secret".to_vec())]);

    let relay = apps[1].borrow();
    assert_eq!(relay.observed_blobs().len(), 1);
    assert!(relay.inbox().is_empty());
    assert!(open_unicast(&relay.observed_blobs()[0], emu.agent(1).identity()).is_err());
}

#[test]
fn member_signs_for_head() {
    let (mut emu, apps) = e2e_chain();
    let sig = emu.with_api(2, E2E_NAMESPACE, |api| api.use_private_rsa_key(b"report", 1)).unwrap();
    let key = apps[0].borrow().directory()[&ApId::from("ap2")].clone();
    assert!(resfi::crypto::verify(b"report", &sig, &key));
}

#[test]
fn single_node_cluster_directory_has_one_entry() {
    let topo = Topology::from_edges(1, &[], &[36]);
    let mut emu = Emulator::new(topo, settings(Duration::from_secs(60))).unwrap();
    let app = Rc::new(RefCell::new(E2eKeyApp::new(E2eConfig::head([], 1))));
    emu.register_app(0, Some(E2E_NAMESPACE), Box::new(app.clone())).unwrap();
    emu.run_for(Duration::from_secs(5));
    assert_eq!(app.borrow().directory().len(), 1);
    assert!(app.borrow().missing().is_empty());
}

#[test]
fn member_beyond_ttl_is_reported_missing() {
    let topo = Topology::from_edges(3, &[(0, 1), (1, 2)], &[36]);
    let mut emu = Emulator::new(topo, settings(Duration::from_secs(60))).unwrap();
    let head = Rc::new(RefCell::new(E2eKeyApp::new(E2eConfig::head([ApId::from("ap2")], 1))));
    let far = Rc::new(RefCell::new(E2eKeyApp::new(E2eConfig::member(ApId::from("ap0"), 1))));
    emu.register_app(0, Some(E2E_NAMESPACE), Box::new(head.clone())).unwrap();
    emu.register_app(2, Some(E2E_NAMESPACE), Box::new(far.clone())).unwrap();
    emu.run_for(Duration::from_secs(10));
    assert_eq!(head.borrow().missing(), vec![ApId::from("ap2")]);
    assert_eq!(emu.app_snapshot(0, 0)["missing"], serde_json::json!(["ap2"]));
}

#[test]
fn apps_only_use_the_northbound_api() {
    for file in ["channel.rs", "dca.rs", "e2e.rs", "mod.rs"] {
        let path = format!("{}/src/apps/{file}", env!("CARGO_MANIFEST_DIR"));
        let text = std::fs::read_to_string(&path).unwrap();
        let body = text.split("#[cfg(test)]").next().unwrap();
        for forbidden in ["crate::agent", "crate::netemu", "Southbound", "EmulatedBackend"] {
            assert!(!body.contains(forbidden), "{file} references {forbidden}");
        }
    }
}

#[test]
fn dca_rounds_follow_weight_chains_not_diameter() {
    let n = 12;
    let mut edges: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
    edges.extend((0..n).map(|i| (i, n)));
    let adj = adjacency_from_edges(n + 1, &edges);
    let mut weights: Vec<Weight> =
        (0..n).map(|i| Weight { load: i as u64 + 1, id: ApId::new(format!("p{i:02}")) }).collect();
    weights.push(Weight { load: 0, id: ApId::from("hub") });
    let out = simulate_dca(&adj, &weights);
    assert!(is_independent_dominating(&adj, &out.heads()));
    assert_eq!(graph_diameter(&adj), Some(2));
    assert_eq!(out.rounds, n);
}
