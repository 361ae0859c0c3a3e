//! Link models: the shared-channel wireless link and last-mile wired latency.

use std::time::Duration;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::NetemuError;
use crate::types::millis_f64;

/// Broadband access technology of an AP's wired uplink.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WiredTechnology {
    GigabitLan,
    Cable,
    Dsl,
}

impl WiredTechnology {
    pub fn default_latency(self) -> LatencyDist {
        match self {
            WiredTechnology::GigabitLan => LatencyDist::uniform(0.05, 0.2),
            WiredTechnology::Cable => LatencyDist::uniform(0.0, 10.0),
            WiredTechnology::Dsl => LatencyDist::uniform(20.0, 60.0),
        }
    }
}

/// One piece of a piecewise-uniform distribution, bounds in milliseconds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub weight: f64,
    pub lo_ms: f64,
    pub hi_ms: f64,
}

/// Piecewise-uniform one-way delay distribution in milliseconds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatencyDist {
    pub segments: Vec<Segment>,
}

impl LatencyDist {
    pub fn uniform(lo_ms: f64, hi_ms: f64) -> Self {
        LatencyDist { segments: vec![Segment { weight: 1.0, lo_ms, hi_ms }] }
    }

    pub fn fixed(ms: f64) -> Self {
        Self::uniform(ms, ms)
    }

    pub fn validate(&self) -> Result<(), NetemuError> {
        if self.segments.is_empty() {
            return Err(NetemuError::InvalidModel("latency distribution has no segments".into()));
        }
        for s in &self.segments {
            if !(s.weight > 0.0) || !(s.lo_ms >= 0.0) || !(s.hi_ms >= s.lo_ms) || !s.hi_ms.is_finite() {
                return Err(NetemuError::InvalidModel(format!("bad latency segment {s:?}")));
            }
        }
        Ok(())
    }

    pub fn mean_ms(&self) -> f64 {
        let total: f64 = self.segments.iter().map(|s| s.weight).sum();
        self.segments.iter().map(|s| s.weight / total * (s.lo_ms + s.hi_ms) / 2.0).sum()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Duration {
        let total: f64 = self.segments.iter().map(|s| s.weight).sum();
        let mut pick = rng.gen::<f64>() * total;
        let mut chosen = self.segments.last().expect("validated non-empty");
        for s in &self.segments {
            if pick < s.weight {
                chosen = s;
                break;
            }
            pick -= s.weight;
        }
        let u: f64 = rng.gen();
        millis_f64(chosen.lo_ms + u * (chosen.hi_ms - chosen.lo_ms))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WiredLinkModel {
    pub technology: WiredTechnology,
    pub last_mile_latency: LatencyDist,
}

impl WiredLinkModel {
    pub fn new(technology: WiredTechnology) -> Self {
        WiredLinkModel { technology, last_mile_latency: technology.default_latency() }
    }
}

/// Fixed-bandwidth link between APs in mutual reception range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WirelessLinkModel {
    pub bitrate_bps: f64,
    pub per_link_delay: Duration,
    pub loss_probability: f64,
    /// Listen time per channel of an active scan.
    pub dwell: Duration,
}

impl Default for WirelessLinkModel {
    fn default() -> Self {
        WirelessLinkModel {
            bitrate_bps: 6e6,
            per_link_delay: Duration::ZERO,
            loss_probability: 0.0,
            dwell: DEFAULT_ACTIVE_DWELL,
        }
    }
}

/// Best measured single-channel active scan.
pub const DEFAULT_ACTIVE_DWELL: Duration = Duration::from_millis(30);
/// Upper end of the measured single-channel active scan range.
pub const MAX_ACTIVE_DWELL: Duration = Duration::from_millis(100);
/// Measured full passive scan; exposed for comparison, never used by the protocol.
pub const PASSIVE_FULL_SCAN: Duration = Duration::from_millis(6300);

impl WirelessLinkModel {
    pub fn validate(&self) -> Result<(), NetemuError> {
        if !(self.bitrate_bps > 0.0) {
            return Err(NetemuError::InvalidModel(format!("bitrate must be positive, got {}", self.bitrate_bps)));
        }
        if !(0.0..=1.0).contains(&self.loss_probability) {
            return Err(NetemuError::InvalidModel(format!(
                "loss probability must lie in [0,1], got {}",
                self.loss_probability
            )));
        }
        Ok(())
    }

    /// Time on air of a frame plus propagation delay.
    pub fn frame_delay(&self, octets: usize) -> Duration {
        Duration::from_secs_f64(octets as f64 * 8.0 / self.bitrate_bps) + self.per_link_delay
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn defaults_stay_in_their_intervals() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (tech, lo, hi) in [
            (WiredTechnology::Cable, 0.0, 10.0),
            (WiredTechnology::Dsl, 20.0, 60.0),
            (WiredTechnology::GigabitLan, 0.05, 0.2),
        ] {
            let dist = tech.default_latency();
            for _ in 0..2000 {
                let ms = dist.sample(&mut rng).as_secs_f64() * 1e3;
                assert!(ms >= lo - 1e-3 && ms <= hi + 1e-3, "{tech:?} sample {ms}");
            }
        }
    }

    #[test]
    fn piecewise_weights_respected() {
        let dist = LatencyDist {
            segments: vec![
                Segment { weight: 3.0, lo_ms: 0.0, hi_ms: 1.0 },
                Segment { weight: 1.0, lo_ms: 50.0, hi_ms: 60.0 },
            ],
        };
        dist.validate().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 20_000;
        let high = (0..n).filter(|_| dist.sample(&mut rng) >= Duration::from_millis(50)).count();
        let frac = high as f64 / n as f64;
        assert!((frac - 0.25).abs() < 0.02, "{frac}");
        assert!((dist.mean_ms() - (0.75 * 0.5 + 0.25 * 55.0)).abs() < 1e-12);
    }

    #[test]
    fn invalid_models_rejected() {
        assert!(LatencyDist::uniform(5.0, 1.0).validate().is_err());
        assert!(LatencyDist { segments: vec![] }.validate().is_err());
        let mut w = WirelessLinkModel::default();
        w.loss_probability = 1.5;
        assert!(w.validate().is_err());
        w.loss_probability = 0.0;
        w.bitrate_bps = 0.0;
        assert!(w.validate().is_err());
    }

    #[test]
    fn frame_delay_is_airtime() {
        let w = WirelessLinkModel::default();
        assert_eq!(w.frame_delay(75), Duration::from_micros(100));
    }
}
