//! Closed-form wireless airtime overhead of key rotation: ResFi (probe
//! request/response per neighbor) against RxIP++ (beacon stuffing plus scans).
//!
//! Costs of one reconfiguration are divided by the reconfiguration period; the
//! beacon term of RxIP++ is already a rate and is used as-is. All results are
//! fractions of airtime.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netemu::Band;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("channel count must be at least 1")]
    ZeroChannels,
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("{0} must be nonnegative")]
    Negative(&'static str),
    #[error("{0} must not be empty")]
    Empty(&'static str),
    #[error("params line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Octets a frame occupies on air at `bitrate_bps`, in seconds. No preamble.
pub fn frame_airtime(size_octets: u32, bitrate_bps: f64) -> Result<f64, AnalysisError> {
    if !(bitrate_bps > 0.0) {
        return Err(AnalysisError::NonPositive("bitrate"));
    }
    Ok(f64::from(size_octets) * 8.0 / bitrate_bps)
}

/// Beacon IE added per beacon by RxIP++: address, group key and public key.
pub const BEACON_IE_OCTETS: u32 = 209;
/// Probe request without a ResFi IE.
pub const PROBE_REQUEST_OCTETS: u32 = 64;
/// Probe response carrying the small ResFi IE (212 + 38).
pub const PROBE_RESPONSE_OCTETS: u32 = 250;
pub const BEACON_RATE_HZ: f64 = 10.0;
/// Single-channel active scan.
pub const DEFAULT_T_SCAN: f64 = 0.030;
pub const DEFAULT_PERIOD: f64 = 60.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverheadParams {
    pub c: u32,
    /// Neighboring APs; fractional for density averages.
    pub n: f64,
    pub t_beacon_ie: f64,
    pub r_beacon: f64,
    pub t_scan: f64,
    pub t_preq: f64,
    pub t_prep: f64,
    /// Seconds between reconfigurations.
    pub period: f64,
}

impl OverheadParams {
    pub fn validate(&self) -> Result<(), AnalysisError> {
        if self.c == 0 {
            return Err(AnalysisError::ZeroChannels);
        }
        for (name, v) in [
            ("n", self.n),
            ("t_beacon_ie", self.t_beacon_ie),
            ("r_beacon", self.r_beacon),
            ("t_scan", self.t_scan),
            ("t_preq", self.t_preq),
            ("t_prep", self.t_prep),
        ] {
            if !(v >= 0.0) {
                return Err(AnalysisError::Negative(name));
            }
        }
        if !(self.period > 0.0) {
            return Err(AnalysisError::NonPositive("period"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandProfile {
    pub band: Band,
    pub mgmt_bitrate_bps: f64,
    pub default_density: f64,
    pub channel_count: u32,
}

impl BandProfile {
    pub const BAND_2G4: BandProfile =
        BandProfile { band: Band::Band2G4, mgmt_bitrate_bps: 1e6, default_density: 16.8, channel_count: 3 };
    pub const BAND_5G: BandProfile =
        BandProfile { band: Band::Band5G, mgmt_bitrate_bps: 6e6, default_density: 5.1, channel_count: 19 };

    pub fn all() -> [BandProfile; 2] {
        [Self::BAND_2G4, Self::BAND_5G]
    }

    pub fn of(band: Band) -> BandProfile {
        match band {
            Band::Band2G4 => Self::BAND_2G4,
            Band::Band5G => Self::BAND_5G,
        }
    }

    /// Default frame sizes and scan time at this band's density, period 60 s.
    pub fn params(&self) -> OverheadParams {
        let air = |octets| f64::from(octets) * 8.0 / self.mgmt_bitrate_bps;
        OverheadParams {
            c: self.channel_count,
            n: self.default_density,
            t_beacon_ie: air(BEACON_IE_OCTETS),
            r_beacon: BEACON_RATE_HZ,
            t_scan: DEFAULT_T_SCAN,
            t_preq: air(PROBE_REQUEST_OCTETS),
            t_prep: air(PROBE_RESPONSE_OCTETS),
            period: DEFAULT_PERIOD,
        }
    }
}

pub fn overhead_rxipp(p: &OverheadParams) -> Result<f64, AnalysisError> {
    p.validate()?;
    let beacon = p.n * p.t_beacon_ie * p.r_beacon / f64::from(p.c);
    let scan = (p.n - 1.0).max(0.0) * p.t_scan / p.period;
    Ok(beacon + scan)
}

pub fn overhead_resfi(p: &OverheadParams) -> Result<f64, AnalysisError> {
    p.validate()?;
    let n1 = (p.n - 1.0).max(0.0);
    let n2 = (p.n - 2.0).max(0.0);
    let probes = p.t_preq + p.t_prep;
    let cost = n1 * probes + n1 * p.t_scan + n1 * n2 * probes / f64::from(p.c);
    Ok(cost / p.period)
}

/// Shortest period keeping ResFi overhead at or below `max_overhead`.
pub fn resfi_min_period(p: &OverheadParams, max_overhead: f64) -> Result<f64, AnalysisError> {
    if !(max_overhead > 0.0) {
        return Err(AnalysisError::NonPositive("max_overhead"));
    }
    let per_second = overhead_resfi(&OverheadParams { period: 1.0, ..*p })?;
    Ok(per_second / max_overhead)
}

/// Same for RxIP++; `None` when beacon stuffing alone exceeds the budget.
pub fn rxipp_min_period(p: &OverheadParams, max_overhead: f64) -> Result<Option<f64>, AnalysisError> {
    if !(max_overhead > 0.0) {
        return Err(AnalysisError::NonPositive("max_overhead"));
    }
    let beacon = overhead_rxipp(&OverheadParams { t_scan: 0.0, ..*p })?;
    let scan_cost = (p.n - 1.0).max(0.0) * p.t_scan;
    if beacon >= max_overhead {
        return Ok(None);
    }
    Ok(Some(scan_cost / (max_overhead - beacon)))
}

/// Parameters for [`airtime_curves`]. Every field may be overridden from JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurveParams {
    pub bands: Vec<Band>,
    pub n_range: Vec<f64>,
    pub periods: Vec<f64>,
    pub t_scan: f64,
    pub r_beacon: f64,
    pub beacon_ie_octets: u32,
    pub probe_request_octets: u32,
    pub probe_response_octets: u32,
    /// Overrides the band's channel count.
    pub c: Option<u32>,
    /// Override the airtimes derived from the octet counts, in seconds.
    pub t_beacon_ie: Option<f64>,
    pub t_preq: Option<f64>,
    pub t_prep: Option<f64>,
}

impl Default for CurveParams {
    fn default() -> Self {
        CurveParams {
            bands: vec![Band::Band2G4, Band::Band5G],
            n_range: (0..=40).map(f64::from).collect(),
            periods: vec![10.0, 20.0, 30.0, 60.0, 120.0, 300.0],
            t_scan: DEFAULT_T_SCAN,
            r_beacon: BEACON_RATE_HZ,
            beacon_ie_octets: BEACON_IE_OCTETS,
            probe_request_octets: PROBE_REQUEST_OCTETS,
            probe_response_octets: PROBE_RESPONSE_OCTETS,
            c: None,
            t_beacon_ie: None,
            t_preq: None,
            t_prep: None,
        }
    }
}

impl CurveParams {
    pub fn from_json(text: &str) -> Result<Self, AnalysisError> {
        serde_json::from_str(text).map_err(|e| AnalysisError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, AnalysisError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Model inputs for one (band, N, period) point.
    pub fn params_for(&self, band: Band, n: f64, period: f64) -> Result<OverheadParams, AnalysisError> {
        let profile = BandProfile::of(band);
        let rate = profile.mgmt_bitrate_bps;
        let p = OverheadParams {
            c: self.c.unwrap_or(profile.channel_count),
            n,
            t_beacon_ie: self.t_beacon_ie.map_or_else(|| frame_airtime(self.beacon_ie_octets, rate), Ok)?,
            r_beacon: self.r_beacon,
            t_scan: self.t_scan,
            t_preq: self.t_preq.map_or_else(|| frame_airtime(self.probe_request_octets, rate), Ok)?,
            t_prep: self.t_prep.map_or_else(|| frame_airtime(self.probe_response_octets, rate), Ok)?,
            period,
        };
        p.validate()?;
        Ok(p)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurveRow {
    pub band: Band,
    pub n: f64,
    pub period_s: f64,
    pub airtime_resfi: f64,
    pub airtime_rxipp: f64,
}

/// Available airtime `1 - O` for both models, band-major, then period, then N.
pub fn airtime_curves(params: &CurveParams) -> Result<Vec<CurveRow>, AnalysisError> {
    if params.bands.is_empty() {
        return Err(AnalysisError::Empty("bands"));
    }
    if params.n_range.is_empty() {
        return Err(AnalysisError::Empty("n_range"));
    }
    if params.periods.is_empty() {
        return Err(AnalysisError::Empty("periods"));
    }
    let mut rows = Vec::new();
    for &band in &params.bands {
        for &period in &params.periods {
            for &n in &params.n_range {
                let p = params.params_for(band, n, period)?;
                rows.push(CurveRow {
                    band,
                    n,
                    period_s: period,
                    airtime_resfi: 1.0 - overhead_resfi(&p)?,
                    airtime_rxipp: 1.0 - overhead_rxipp(&p)?,
                });
            }
        }
    }
    Ok(rows)
}

pub const CSV_HEADER: &str = "band,N,period_s,airtime_resfi,airtime_rxipp";

pub fn curves_csv(rows: &[CurveRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let band = match r.band {
            Band::Band2G4 => "2.4GHz",
            Band::Band5G => "5GHz",
        };
        let _ = writeln!(out, "{band},{},{},{:.9},{:.9}", r.n, r.period_s, r.airtime_resfi, r.airtime_rxipp);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn airtime_examples() {
        assert!((frame_airtime(215, 6e6).unwrap() - 286.666_666e-6).abs() < 1e-9);
        assert_eq!(frame_airtime(0, 6e6).unwrap(), 0.0);
        assert!((frame_airtime(64, 1e6).unwrap() - 512e-6).abs() < 1e-15);
        assert!(frame_airtime(64, 0.0).is_err());
    }

    #[test]
    fn resfi_small_n() {
        let mut p = BandProfile::BAND_2G4.params();
        p.n = 1.0;
        assert_eq!(overhead_resfi(&p).unwrap(), 0.0);
        p.n = 0.0;
        assert_eq!(overhead_resfi(&p).unwrap(), 0.0);
        p.n = 2.0;
        p.c = 1;
        let want = (p.t_preq + p.t_prep + p.t_scan) / p.period;
        assert!((overhead_resfi(&p).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn rxipp_small_n() {
        let mut p = BandProfile::BAND_5G.params();
        p.n = 0.0;
        assert_eq!(overhead_rxipp(&p).unwrap(), 0.0);
        p.n = 1.0;
        let beacon_only = p.t_beacon_ie * p.r_beacon / f64::from(p.c);
        assert!((overhead_rxipp(&p).unwrap() - beacon_only).abs() < 1e-15);
    }

    #[test]
    fn zero_channels_rejected() {
        let mut p = BandProfile::BAND_5G.params();
        p.c = 0;
        assert!(matches!(overhead_resfi(&p), Err(AnalysisError::ZeroChannels)));
        assert!(matches!(overhead_rxipp(&p), Err(AnalysisError::ZeroChannels)));
    }

    #[test]
    fn thresholds_invert_the_model() {
        let p = BandProfile::BAND_2G4.params();
        let period = resfi_min_period(&p, 0.01).unwrap();
        let at = overhead_resfi(&OverheadParams { period, ..p }).unwrap();
        assert!((at - 0.01).abs() < 1e-12);
        assert_eq!(rxipp_min_period(&p, 0.01).unwrap(), None);
    }

    #[test]
    fn params_json_overrides() {
        let cp = CurveParams::from_json(r#"{"n_range":[0],"periods":[60],"c":5,"t_preq":0.001}"#).unwrap();
        let p = cp.params_for(Band::Band2G4, 3.0, 60.0).unwrap();
        assert_eq!(p.c, 5);
        assert_eq!(p.t_preq, 0.001);
        assert_eq!(p.t_prep, 250.0 * 8.0 / 1e6);
        let err = CurveParams::from_json("{\n  \"bogus\": 1}").unwrap_err();
        assert!(matches!(err, AnalysisError::Parse { line: 2, .. }));
    }
}
