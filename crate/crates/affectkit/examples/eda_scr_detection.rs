//! Tonic/phasic decomposition of an EDA trace and SCR peak detection.
//!
//! Run with: `cargo run --example eda_scr_detection`

use affectkit::features::eda_decompose;

fn main() {
    let rate = 4.0;
    // Slow drift with two injected skin conductance responses.
    let burst = |t: f64, start: f64, amp: f64| {
        let dt = t - start;
        if dt < 0.0 {
            0.0
        } else if dt < 1.0 {
            amp * dt
        } else {
            amp * (-(dt - 1.0) / 4.0).exp()
        }
    };
    let x: Vec<f64> = (0..(60.0 * rate) as usize)
        .map(|i| {
            let t = i as f64 / rate;
            2.0 + 0.002 * t + burst(t, 14.0, 0.35) + burst(t, 41.0, 0.5)
        })
        .collect();

    let d = eda_decompose(&x, rate, 0.01);
    println!("{} SCR peaks detected", d.scr_peaks.len());
    for p in &d.scr_peaks {
        println!(
            "  apex at t = {:.2} s, amplitude {:.3} above the preceding trough",
            p.index as f64 / rate,
            p.amplitude
        );
    }
    let residual: f64 = x
        .iter()
        .zip(d.tonic.iter().zip(&d.phasic))
        .map(|(&v, (&t, &p))| (v - (t + p)).abs())
        .fold(0.0, f64::max);
    println!("max |x - (tonic + phasic)| = {residual:e}");
}
