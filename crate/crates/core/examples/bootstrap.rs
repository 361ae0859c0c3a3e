//! Ten APs boot, scan their channels and bootstrap the wired overlay.
use std::time::Duration;

use resfi::netemu::{random_connected_graph, Emulator, SimSettings, Topology};

fn main() {
    let topo = Topology::generated(random_connected_graph(10, 3.0, 1), &[1, 6, 11]);
    let mut emu = Emulator::new(topo, SimSettings::default()).expect("valid topology");
    emu.run_for(Duration::from_secs(2));

    for agent in emu.agents() {
        let peers: Vec<String> = agent.neighbors().keys().map(|p| p.to_string()).collect();
        println!("{:>5} {:?} -> {}", agent.id().to_string(), agent.state(), peers.join(" "));
    }
    let mutual =
        (0..emu.len()).all(|a| emu.topology().neighbors(a).all(|b| emu.agent(b).neighbor(emu.agent(a).id()).is_some()));
    println!("all radio links known on both ends: {mutual}");
}
