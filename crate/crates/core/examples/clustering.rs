//! Distributed clustering over the overlay, checked against the round model.
use std::time::Duration;

use resfi::apps::{is_independent_dominating, simulate_dca, DcaApp, DcaConfig, Weight, DCA_NAMESPACE};
use resfi::netemu::{random_connected_graph, Emulator, SimSettings, Topology};

fn main() {
    let adjacency = random_connected_graph(12, 3.0, 9);
    let mut topo = Topology::generated(adjacency.clone(), &[36]);
    for (i, ap) in topo.aps.iter_mut().enumerate() {
        ap.load = (i as u64 * 7) % 5;
    }
    let weights: Vec<Weight> = topo.aps.iter().map(|ap| Weight { load: ap.load, id: ap.id.clone() }).collect();
    let model = simulate_dca(&adjacency, &weights);
    println!("model: heads {:?} after {} rounds", model.heads(), model.rounds);
    println!("independent dominating: {}", is_independent_dominating(&adjacency, &model.heads()));

    let mut emu = Emulator::new(topo, SimSettings::default()).expect("valid topology");
    for i in 0..emu.len() {
        emu.register_app(i, Some(DCA_NAMESPACE), Box::new(DcaApp::new(DcaConfig::default()))).unwrap();
    }
    emu.run_for(Duration::from_secs(15));
    for i in 0..emu.len() {
        println!("{:>5} load {} {}", emu.agent(i).id().to_string(), weights[i].load, emu.app_snapshot(i, 0));
    }
}
