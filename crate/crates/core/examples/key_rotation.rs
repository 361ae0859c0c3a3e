//! Group keys rotate every KCMI; neighbors follow each change.
use std::time::Duration;

use resfi::netemu::{Emulator, SimSettings, Topology};

fn main() {
    let mut settings = SimSettings::default();
    settings.agent.kcmi = Duration::from_secs(10);
    let topo = Topology::from_edges(3, &[(0, 1), (1, 2)], &[1, 6, 11]);
    let mut emu = Emulator::new(topo, settings).expect("valid topology");

    for minute in 1..=3 {
        emu.run_for(Duration::from_secs(60));
        println!("after {minute} min:");
        for agent in emu.agents() {
            let epochs: Vec<String> = agent.neighbors().iter().map(|(id, rec)| format!("{id}@{}", rec.epoch)).collect();
            println!("  {} own epoch {}, sees {}", agent.id(), agent.group_key().epoch, epochs.join(", "));
        }
    }

    emu.perform_key_change(0);
    emu.run_for(Duration::from_secs(1));
    let view = emu.agent(1).neighbor(emu.agent(0).id()).unwrap();
    println!("forced change: ap1 holds ap0's current key: {}", view.group_key == emu.agent(0).group_key().material);
}
