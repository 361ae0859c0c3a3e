//! Cluster-wide public key exchange and end-to-end sealed unicast across a relay.
use std::cell::RefCell;
use std::rc::Rc;
use std::time::Duration;

use resfi::apps::{E2eConfig, E2eKeyApp, E2E_NAMESPACE};
use resfi::crypto::open_unicast;
use resfi::netemu::{Emulator, SimSettings, Topology};
use resfi::ApId;

fn main() {
    let topo = Topology::from_edges(3, &[(0, 1), (1, 2)], &[36]);
    let mut emu = Emulator::new(topo, SimSettings::default()).expect("valid topology");
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
    for (i, app) in apps.iter().enumerate() {
        let known: Vec<String> = app.borrow().directory().keys().map(|k| k.to_string()).collect();
        println!("ap{i} knows keys of {}", known.join(", "));
    }

    let target = ApId::from("ap2");
    emu.with_api(0, E2E_NAMESPACE, |api| apps[0].borrow_mut().send_e2e(api, &target, b"meet at channel 44")).unwrap();
    emu.run_for(Duration::from_secs(1));
    for (from, text) in apps[2].borrow().inbox() {
        println!("ap2 read from {from}: {}", String::from_utf8_lossy(text));
    }
    let relay = apps[1].borrow();
    let blob = &relay.observed_blobs()[0];
    println!(
        "relay ap1 forwarded {} sealed octets, can open: {}",
        blob.len(),
        open_unicast(blob, emu.agent(1).identity()).is_ok()
    );
}
