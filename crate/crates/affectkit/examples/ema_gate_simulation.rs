//! Offline simulation of the prompt gate: minimum idle time between prompts
//! plus a random ask probability.
//!
//! Run with: `cargo run --example ema_gate_simulation`

use affectkit::ema::{simulate_gate, GateDecision, GatePolicy};

fn main() -> affectkit::Result<()> {
    // One detection every 4 minutes over a simulated day.
    let detections: Vec<f64> = (0..360).map(|i| i as f64 * 240.0).collect();
    let policy = GatePolicy { min_idle: 1800.0, ask_probability: 0.5, seed: 7 };

    let (decisions, summary) = simulate_gate(&policy, &detections)?;
    println!(
        "{} detections -> {} prompts, {} idle-suppressed, {} random-suppressed",
        detections.len(),
        summary.prompts,
        summary.suppressed_idle,
        summary.suppressed_random
    );

    println!("first ten decisions:");
    for (t, d) in detections.iter().zip(&decisions).take(10) {
        println!("  t = {:>6.0} s  {}", t, d.as_str());
    }

    let prompt_times: Vec<f64> = detections
        .iter()
        .zip(&decisions)
        .filter(|(_, d)| matches!(d, GateDecision::Prompt))
        .map(|(&t, _)| t)
        .collect();
    let min_gap = prompt_times.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    println!("smallest gap between prompts: {min_gap:.0} s (idle floor {})", policy.min_idle);
    Ok(())
}
