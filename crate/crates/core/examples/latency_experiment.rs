//! KCM-to-installed-key latency for each wired technology.
use resfi::cli::{latency_experiment, with_technology, RunOptions};
use resfi::netemu::{ScenarioConfig, WiredTechnology};

fn main() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/clique3.json");
    let mut config = ScenarioConfig::load(std::path::Path::new(path)).expect("bundled scenario");
    config.apps.clear();
    config.agent.kcmi_ms = 3_600_000.0;
    config.sim.duration_ms = 60_000.0;
    config.wireless.dwell_ms = 100.0;

    for tech in [WiredTechnology::GigabitLan, WiredTechnology::Cable, WiredTechnology::Dsl] {
        let report = latency_experiment(&with_technology(&config, tech), &RunOptions::default()).unwrap();
        let s = report.overall.unwrap();
        println!("{tech:?}: {} samples, mean {:.1} ms, p50 {:.1}, p99 {:.1}", s.samples, s.mean_ms, s.p50_ms, s.p99_ms);
    }
}
