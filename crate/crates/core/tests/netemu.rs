mod common;

use std::time::Duration;

use common::*;
use resfi::netemu::{random_connected_graph, Emulator, LatencyDist, Topology, WiredLinkModel, WiredTechnology};
use serde_json::json;

#[test]
fn wired_delivery_is_fifo_per_pair() {
    let wired = WiredLinkModel { technology: WiredTechnology::Dsl, last_mile_latency: LatencyDist::uniform(1.0, 80.0) };
    let topo = Topology::from_edges(2, &[(0, 1)], &[1, 6, 11]).with_wired(wired);
    let (mut emu, logs) = with_recorders(topo, settings(Duration::from_secs(3600)));
    emu.run_for(Duration::from_secs(1));
    let peer = emu.agent(1).id().clone();
    for k in 0..200 {
        emu.with_api(0, NS, |api| api.send_to_neighbor(&peer, &json!({ "k": k }))).unwrap();
        emu.run_for(Duration::from_micros(300));
    }
    emu.run_for(Duration::from_secs(1));
    let got: Vec<i64> = logs[1]
        .borrow()
        .iter()
        .filter_map(|s| match s {
            Seen::Rx(_, doc) => doc["k"].as_i64(),
            _ => None,
        })
        .collect();
    assert_eq!(got, (0..200).collect::<Vec<_>>());
}

fn traced_run(seed: u64) -> String {
    let mut s = settings(Duration::from_secs(5));
    s.seed = seed;
    s.trace = true;
    let topo = Topology::generated(random_connected_graph(8, 3.0, 77), &[1, 6, 11])
        .with_wired(WiredLinkModel::new(WiredTechnology::Cable));
    let mut emu = Emulator::new(topo, s).unwrap();
    emu.run_for(Duration::from_secs(30));
    emu.trace().to_jsonl()
}

#[test]
fn trace_is_deterministic_per_seed() {
    let a = traced_run(3);
    assert!(!a.is_empty());
    assert_eq!(a, traced_run(3));
    assert_ne!(a, traced_run(4));
}
