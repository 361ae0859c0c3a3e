use std::io::{self, Write};

use serde::Serialize;
use serde_json::Value;

use crate::types::SimTime;

/// One line of the event trace.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceRecord {
    pub t_ms: f64,
    pub kind: &'static str,
    pub src: String,
    pub dst: String,
    pub detail: Value,
}

#[derive(Debug, Default)]
pub struct Trace {
    enabled: bool,
    records: Vec<TraceRecord>,
}

impl Trace {
    pub fn new(enabled: bool) -> Self {
        Trace { enabled, records: Vec::new() }
    }

    pub fn enabled(&self) -> bool {
        self.enabled
    }

    pub fn set_enabled(&mut self, on: bool) {
        self.enabled = on;
    }

    pub fn record(&mut self, t: SimTime, kind: &'static str, src: &str, dst: &str, detail: impl FnOnce() -> Value) {
        if self.enabled {
            self.records.push(TraceRecord {
                t_ms: t.as_millis_f64(),
                kind,
                src: src.to_owned(),
                dst: dst.to_owned(),
                detail: detail(),
            });
        }
    }

    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    pub fn write_jsonl(&self, mut out: impl Write) -> io::Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut out, r)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("json is utf-8")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn jsonl_shape() {
        let mut t = Trace::new(true);
        t.record(SimTime::from_micros(1500), "wired_send", "a", "b", || json!({"len": 3}));
        let line = t.to_jsonl();
        assert_eq!(line, "{\"t_ms\":1.5,\"kind\":\"wired_send\",\"src\":\"a\",\"dst\":\"b\",\"detail\":{\"len\":3}}\n");
        let mut off = Trace::new(false);
        off.record(SimTime::ZERO, "x", "", "", || unreachable!());
        assert!(off.records().is_empty());
    }
}
