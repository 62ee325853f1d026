//! Save a trained model and load it back; predictions are bit-identical.
//!
//! Run with: `cargo run --example model_roundtrip`

use affectkit::features::{FeatureMatrix, FeatureVector};
use affectkit::model::{load_model, save_model, train_adaboost, ModelConfig, TrainingMeta};

fn main() -> affectkit::Result<()> {
    let rows: Vec<FeatureVector> = (0..60)
        .map(|i| {
            let x = (i as f64 * 0.37).sin();
            let y = (i as f64 * 0.11).cos();
            FeatureVector {
                event_id: format!("r{i}"),
                label: (x + 0.3 * y > 0.1) as u8,
                values: vec![x, y],
            }
        })
        .collect();
    let m = FeatureMatrix { feature_names: vec!["x".into(), "y".into()], rows };

    let out = train_adaboost(
        &m,
        &ModelConfig { rounds: 30, max_depth: 2, min_leaf: 1 },
        TrainingMeta { seed: 7, config_hash: "example".into(), rounds_requested: 30, rounds_trained: 0 },
    )?;
    let model = out.model.with_medians(vec![0.0, 0.0]);
    println!(
        "trained {} stages, training error {:.3} (bound {:.3})",
        model.alphas.len(),
        out.training_error,
        out.error_bound
    );

    let path = std::env::temp_dir().join("affectkit-example-model.json");
    save_model(&model, &path)?;
    let loaded = load_model(&path)?;

    let mut max_bit_diff = 0u64;
    for i in 0..1000 {
        let v = [(i as f64 * 0.013).sin() * 2.0, (i as f64 * 0.029).cos() * 2.0];
        let (l1, s1) = model.predict_values(&v);
        let (l2, s2) = loaded.predict_values(&v);
        assert_eq!(l1, l2);
        max_bit_diff = max_bit_diff.max(s1.to_bits() ^ s2.to_bits());
    }
    println!("round trip through {} -> scores bit-identical ({max_bit_diff:#x} xor)", path.display());
    println!("model digest: {}", model.digest());
    Ok(())
}
