//! Load-aware channel selection on a small mesh of APs.
use std::time::Duration;

use resfi::apps::{count_conflicts, ChannelSelectionApp, ChannelSelectionConfig, CHANNEL_NAMESPACE};
use resfi::netemu::{Emulator, SimSettings, Topology};

fn main() {
    let edges = [(0, 1), (0, 2), (1, 2), (2, 3), (3, 4), (1, 4), (4, 5)];
    let mut topo = Topology::from_edges(6, &edges, &[1, 6, 11]);
    for (ap, load) in topo.aps.iter_mut().zip([4, 2, 5, 1, 3, 2]) {
        ap.load = load;
    }
    let adjacency = topo.adjacency.clone();
    let mut emu = Emulator::new(topo, SimSettings::default()).expect("valid topology");
    for i in 0..emu.len() {
        let app = ChannelSelectionApp::new(ChannelSelectionConfig::default());
        emu.register_app(i, Some(CHANNEL_NAMESPACE), Box::new(app)).unwrap();
    }

    for t in [0u64, 5, 30] {
        emu.run_for(Duration::from_secs(t.max(1)));
        let map: Vec<_> = (0..emu.len()).map(|i| emu.channel_of(i)).collect();
        println!("t={:>6}: {:?} conflicts={}", emu.now().to_string(), map, count_conflicts(&adjacency, &map));
    }
    for i in 0..emu.len() {
        println!("{} {}", emu.agent(i).id(), emu.app_snapshot(i, 0));
    }
}
