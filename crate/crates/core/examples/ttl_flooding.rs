//! A broadcast with ttl k reaches exactly the k-hop neighborhood, once per node.
use std::time::Duration;

use resfi::api::Callbacks;
use resfi::netemu::{Emulator, SimSettings, Topology};
use serde_json::json;

fn main() {
    let edges: Vec<(usize, usize)> = (0..7).map(|i| (i, i + 1)).collect();
    let topo = Topology::from_edges(8, &edges, &[1, 6, 11]);
    let mut emu = Emulator::new(topo, SimSettings::default()).expect("valid topology");
    for i in 0..emu.len() {
        let app = Callbacks::new().on_rx(move |api, from, doc| {
            println!("  {} got {doc} from {from} at {}", api.node_id(), api.now());
        });
        emu.register_app(i, Some("demo.flood"), Box::new(app)).unwrap();
    }
    emu.run_for(Duration::from_secs(2));

    for ttl in [1, 3] {
        println!("ap0 floods with ttl {ttl}:");
        emu.with_api(0, "demo.flood", |api| api.send_to_neighbors(&json!({ "ttl": ttl }), ttl)).unwrap();
        emu.run_for(Duration::from_secs(1));
    }
}
