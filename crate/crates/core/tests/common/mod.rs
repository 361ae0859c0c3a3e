#![allow(dead_code)]

use std::cell::RefCell;
use std::rc::Rc;
use std::time::Duration;

use resfi::api::{Application, MessageDocument, Northbound};
use resfi::netemu::{Emulator, SimSettings, Topology};
use resfi::ApId;

#[derive(Clone, Debug, PartialEq)]
pub enum Seen {
    Rx(ApId, MessageDocument),
    NewLink(ApId),
    LinkFailure(ApId),
    Start,
}

/// Application that logs every callback into a shared vector.
pub struct Recorder(pub Rc<RefCell<Vec<Seen>>>);

impl Application for Recorder {
    fn on_start(&mut self, _api: &mut dyn Northbound) {
        self.0.borrow_mut().push(Seen::Start);
    }
    fn on_receive(&mut self, _api: &mut dyn Northbound, sender: &ApId, doc: &MessageDocument) {
        self.0.borrow_mut().push(Seen::Rx(sender.clone(), doc.clone()));
    }
    fn on_new_link(&mut self, _api: &mut dyn Northbound, n: &ApId) {
        self.0.borrow_mut().push(Seen::NewLink(n.clone()));
    }
    fn on_link_failure(&mut self, _api: &mut dyn Northbound, n: &ApId) {
        self.0.borrow_mut().push(Seen::LinkFailure(n.clone()));
    }
}

pub type Log = Rc<RefCell<Vec<Seen>>>;

pub const NS: &str = "test.ns";

pub fn settings(kcmi: Duration) -> SimSettings {
    let mut s = SimSettings::default();
    s.agent.kcmi = kcmi;
    s
}

/// Emulator over `topology` with a recorder registered under [`NS`] on every AP.
pub fn with_recorders(topology: Topology, settings: SimSettings) -> (Emulator, Vec<Log>) {
    let mut emu = Emulator::new(topology, settings).expect("valid topology");
    let logs: Vec<Log> = (0..emu.len()).map(|_| Rc::new(RefCell::new(Vec::new()))).collect();
    for (i, log) in logs.iter().enumerate() {
        emu.register_app(i, Some(NS), Box::new(Recorder(log.clone()))).unwrap();
    }
    (emu, logs)
}

pub fn rx_count(log: &Log) -> usize {
    log.borrow().iter().filter(|s| matches!(s, Seen::Rx(..))).count()
}

pub fn count(log: &Log, want: &Seen) -> usize {
    log.borrow().iter().filter(|s| *s == want).count()
}
