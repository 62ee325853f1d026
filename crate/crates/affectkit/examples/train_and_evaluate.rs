//! End-to-end in memory: synthesize a corpus, window and preprocess it,
//! extract features, then run the split/cross-validation/held-out protocol.
//!
//! Run with: `cargo run --release --example train_and_evaluate`

use affectkit::config::AppConfig;
use affectkit::eval::evaluate_full;
use affectkit::features::extract_matrix;
use affectkit::ingest::resolve_events;
use affectkit::preprocess::preprocess_window;
use affectkit::synth::{generate_corpus, SynthConfig};
use affectkit::windowing::extract_all;

fn main() -> affectkit::Result<()> {
    let cfg = AppConfig {
        synth: SynthConfig {
            n_strong: 60,
            n_neutral: 30,
            n_mistake: 4,
            sessions: 4,
            ..SynthConfig::default()
        },
        ..AppConfig::default()
    };

    let corpus = generate_corpus(&cfg.synth, cfg.seed)?;
    let (kept, excluded) = resolve_events(&corpus.annotations);
    println!("{} events kept, {} excluded", kept.len(), excluded.len());

    let (windows, dropped) = extract_all(&corpus.sessions, &kept, cfg.window_seconds)?;
    assert!(dropped.is_empty());
    let processed: affectkit::Result<Vec<_>> =
        windows.iter().map(|w| preprocess_window(w, &cfg.preprocess)).collect();
    let matrix = extract_matrix(&processed?, &cfg.features);
    println!("feature matrix: {} x {}", matrix.n_rows(), matrix.n_features());

    let (report, model) = evaluate_full(
        &matrix,
        cfg.sampling.test_fraction,
        cfg.sampling.k_folds,
        &cfg.learner_settings(),
        cfg.seed,
        &cfg.config_hash(),
    )?;

    for fold in &report.folds {
        println!(
            "fold {}: F1 = {:.3} ({} features kept)",
            fold.fold,
            fold.metrics.f1.unwrap_or(0.0),
            fold.kept_features
        );
    }
    println!("pooled CV F1  = {:.3}", report.pooled.f1.unwrap_or(0.0));
    if let Some(h) = &report.heldout {
        println!("held-out F1   = {:.3}", h.f1.unwrap_or(0.0));
    }
    println!("final model: {} stages over {} features", model.alphas.len(), model.feature_names.len());
    Ok(())
}
