//! Management overhead of ResFi and RxIP++ side by side.
use resfi::analysis::{
    overhead_resfi, overhead_rxipp, resfi_min_period, rxipp_min_period, BandProfile, OverheadParams,
};

fn main() {
    for profile in BandProfile::all() {
        println!("{:?} at {} bit/s, {} channels", profile.band, profile.mgmt_bitrate_bps, profile.channel_count);
        println!("{:>4} {:>10} {:>10}", "N", "resfi", "rxipp");
        for n in [1.0, 2.0, 5.0, 10.0, profile.default_density, 20.0, 40.0] {
            let p = OverheadParams { n, ..profile.params() };
            println!("{n:>4} {:>10.6} {:>10.6}", overhead_resfi(&p).unwrap(), overhead_rxipp(&p).unwrap());
        }
        let p = profile.params();
        println!(
            "shortest period under 1% overhead: resfi {:.1} s, rxipp {:?}",
            resfi_min_period(&p, 0.01).unwrap(),
            rxipp_min_period(&p, 0.01).unwrap()
        );
        println!();
    }
}
