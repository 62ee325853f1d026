//! The three preprocessing steps on a raw pulse trace: winsorization,
//! zero-phase low-pass filtering, min-max normalization.
//!
//! Run with: `cargo run --example preprocess_signals`

use affectkit::preprocess::{butterworth_lowpass, minmax_normalize, winsorize};

fn main() -> affectkit::Result<()> {
    let rate = 64.0;
    // 1.2 Hz pulse plus mains-like 25 Hz interference and one artifact spike.
    let mut raw: Vec<f64> = (0..(60.0 * rate) as usize)
        .map(|i| {
            let t = i as f64 / rate;
            (std::f64::consts::TAU * 1.2 * t).sin() + 0.4 * (std::f64::consts::TAU * 25.0 * t).sin()
        })
        .collect();
    raw[1000] = 9.0;

    let clipped = winsorize(&raw, 0.01, 0.99)?;
    println!("winsorize: artifact {} clipped to {:.4}", raw[1000], clipped[1000]);

    let filtered = butterworth_lowpass(&clipped, rate, 10.0, 4)?;
    let amp_at = |x: &[f64], f: f64| {
        let (mut s, mut c) = (0.0, 0.0);
        for (i, &v) in x.iter().enumerate() {
            let ph = std::f64::consts::TAU * f * i as f64 / rate;
            s += v * ph.sin();
            c += v * ph.cos();
        }
        2.0 / x.len() as f64 * (s * s + c * c).sqrt()
    };
    println!(
        "filter: 1.2 Hz component kept at {:.4}, 25 Hz interference down to {:.6}",
        amp_at(&filtered, 1.2),
        amp_at(&filtered, 25.0)
    );

    let normalized = minmax_normalize(&filtered);
    let (min, max) = normalized
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    println!("normalize: output spans [{min}, {max}]");
    Ok(())
}
