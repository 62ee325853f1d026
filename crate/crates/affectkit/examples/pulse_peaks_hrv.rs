//! Pulse peak detection on a BVP trace and the time-domain HRV block
//! derived from the interbeat intervals.
//!
//! Run with: `cargo run --example pulse_peaks_hrv`

use affectkit::features::{detect_bvp_peaks, hrv_block, ibi_from_peaks};

fn main() -> affectkit::Result<()> {
    let rate = 64.0;
    // ~72 bpm pulse with slow respiratory-style rate wander.
    let mut phase = 0.0f64;
    let bvp: Vec<f64> = (0..(60.0 * rate) as usize)
        .map(|i| {
            let t = i as f64 / rate;
            let hr = 72.0 + 3.0 * (std::f64::consts::TAU * t / 13.0).sin();
            phase += hr / 60.0 / rate;
            (std::f64::consts::TAU * phase).sin()
        })
        .collect();

    let peaks = detect_bvp_peaks(&bvp, rate)?;
    let ibis = ibi_from_peaks(&peaks, rate)?;
    let hrv = hrv_block(&ibis);

    println!("{} peaks over 60 s", peaks.len());
    println!("mean HR   = {:.1} bpm", hrv.hr_mean);
    println!("mean IBI  = {:.3} s", hrv.ibi_mean);
    println!("SDNN      = {:.4} s", hrv.sdnn);
    println!("RMSSD     = {:.4} s", hrv.rmssd);
    println!("pNN50     = {:.3}", hrv.pnn50);
    Ok(())
}
