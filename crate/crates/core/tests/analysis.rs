use proptest::prelude::*;
use resfi::analysis::{
    airtime_curves, curves_csv, overhead_resfi, overhead_rxipp, resfi_min_period, BandProfile, CurveParams,
    OverheadParams, CSV_HEADER,
};
use resfi::netemu::Band;

// Reference values from exact rational arithmetic.
const RXIPP_2G4: f64 = 0.101532;
const RESFI_2G4: f64 = 0.011824860444444444;
const RXIPP_5G: f64 = 0.002798;
const RESFI_5G: f64 = 0.00208327665497076;

#[test]
fn golden_values() {
    let p24 = BandProfile::BAND_2G4.params();
    let p5 = BandProfile::BAND_5G.params();
    assert!((overhead_rxipp(&p24).unwrap() - RXIPP_2G4).abs() < 1e-15);
    assert!((overhead_resfi(&p24).unwrap() - RESFI_2G4).abs() < 1e-15);
    assert!((overhead_rxipp(&p5).unwrap() - RXIPP_5G).abs() < 1e-15);
    assert!((overhead_resfi(&p5).unwrap() - RESFI_5G).abs() < 1e-15);
}

#[test]
fn golden_values_are_bit_stable() {
    let p24 = BandProfile::BAND_2G4.params();
    assert_eq!(overhead_rxipp(&p24).unwrap().to_bits(), 0x3FB9_FE00_4B7F_5A54);
}

#[test]
fn resfi_is_quadratic_in_n() {
    let p = OverheadParams { t_scan: 0.0, ..BandProfile::BAND_2G4.params() };
    let at = |n: f64| overhead_resfi(&OverheadParams { n, ..p }).unwrap();
    let ratio = at(64.0) / at(32.0);
    assert!((ratio - 4.0).abs() / 4.0 < 0.15, "{ratio}");
    assert!((ratio - 4.002932551319648).abs() < 1e-9);
}

#[test]
fn five_ghz_tolerates_faster_updates() {
    let p24 = resfi_min_period(&BandProfile::BAND_2G4.params(), 0.01).unwrap();
    let p5 = resfi_min_period(&BandProfile::BAND_5G.params(), 0.01).unwrap();
    assert!((p24 - 70.94916266666667).abs() < 1e-9);
    assert!((p5 - 12.499659929824562).abs() < 1e-9);
    assert!(p5 < p24);
}

#[test]
fn default_curves_shape() {
    let params = CurveParams::default();
    let rows = airtime_curves(&params).unwrap();
    assert_eq!(rows.len(), params.n_range.len() * params.periods.len() * 2);
    let csv = curves_csv(&rows);
    assert_eq!(csv.lines().next(), Some(CSV_HEADER));
    assert_eq!(csv.lines().count(), rows.len() + 1);
    for pair in rows.windows(2) {
        if pair[0].band == pair[1].band && pair[0].period_s == pair[1].period_s {
            assert!(pair[1].airtime_resfi <= pair[0].airtime_resfi);
            assert!(pair[1].airtime_rxipp <= pair[0].airtime_rxipp);
        }
    }
}

#[test]
fn zero_neighbors_full_airtime() {
    let params = CurveParams { n_range: vec![0.0], ..CurveParams::default() };
    for row in airtime_curves(&params).unwrap() {
        assert_eq!(row.airtime_resfi, 1.0);
        assert_eq!(row.airtime_rxipp, 1.0);
    }
}

#[test]
fn empty_ranges_rejected() {
    assert!(airtime_curves(&CurveParams { periods: vec![], ..CurveParams::default() }).is_err());
    assert!(airtime_curves(&CurveParams { bands: vec![], ..CurveParams::default() }).is_err());
    let bad = CurveParams { periods: vec![0.0], ..CurveParams::default() };
    assert!(airtime_curves(&bad).is_err());
}

#[test]
fn resfi_beats_rxipp_at_60s() {
    for profile in BandProfile::all() {
        for n in 2..=40 {
            let p = OverheadParams { n: f64::from(n), ..profile.params() };
            assert!(overhead_resfi(&p).unwrap() < overhead_rxipp(&p).unwrap(), "{:?} N={n}", profile.band);
        }
    }
}

fn params() -> impl Strategy<Value = OverheadParams> {
    (1u32..20, 0.0..50.0f64, 0.0..0.01f64, 0.0..20.0f64, 0.0..0.2f64, 0.0..0.01f64, 0.0..0.01f64, 0.1..600.0f64)
        .prop_map(|(c, n, t_beacon_ie, r_beacon, t_scan, t_preq, t_prep, period)| OverheadParams {
            c,
            n,
            t_beacon_ie,
            r_beacon,
            t_scan,
            t_preq,
            t_prep,
            period,
        })
}

proptest! {
    #[test]
    fn overheads_nonnegative_and_monotone(p in params(), dn in 0.0..5.0f64, dt in 0.0..0.05f64) {
        let r = overhead_resfi(&p).unwrap();
        let x = overhead_rxipp(&p).unwrap();
        prop_assert!(r >= 0.0 && x >= 0.0);
        let more_n = OverheadParams { n: p.n + dn, ..p };
        prop_assert!(overhead_resfi(&more_n).unwrap() >= r);
        prop_assert!(overhead_rxipp(&more_n).unwrap() >= x);
        let slower = OverheadParams { t_scan: p.t_scan + dt, t_preq: p.t_preq + dt, t_prep: p.t_prep + dt, t_beacon_ie: p.t_beacon_ie + dt, ..p };
        prop_assert!(overhead_resfi(&slower).unwrap() >= r);
        prop_assert!(overhead_rxipp(&slower).unwrap() >= x);
    }

    #[test]
    fn resfi_zero_below_two_aps(p in params(), n in 0.0..=1.0f64) {
        prop_assert_eq!(overhead_resfi(&OverheadParams { n, ..p }).unwrap(), 0.0);
    }
}

#[test]
fn band_labels_in_csv() {
    let params =
        CurveParams { n_range: vec![1.0], periods: vec![60.0], bands: vec![Band::Band5G], ..Default::default() };
    let csv = curves_csv(&airtime_curves(&params).unwrap());
    assert!(csv.lines().nth(1).unwrap().starts_with("5GHz,1,60,"));
}
