//! SMOTE balancing of an imbalanced feature matrix, with the stored
//! provenance of every synthetic row.
//!
//! Run with: `cargo run --example smote_balancing`

use affectkit::features::{FeatureMatrix, FeatureVector};
use affectkit::sampling::{domains, smote};

fn main() -> affectkit::Result<()> {
    // 20 majority rows, 8 minority rows in a 2-D feature space.
    let mut rows = Vec::new();
    for i in 0..20 {
        rows.push(FeatureVector {
            event_id: format!("maj-{i}"),
            label: 1,
            values: vec![1.0 + 0.05 * i as f64, 2.0 - 0.03 * i as f64],
        });
    }
    for i in 0..8 {
        rows.push(FeatureVector {
            event_id: format!("min-{i}"),
            label: 0,
            values: vec![-1.0 - 0.1 * i as f64, -0.5 + 0.07 * i as f64],
        });
    }
    let m = FeatureMatrix { feature_names: vec!["f0".into(), "f1".into()], rows };

    let (neg, pos) = m.class_counts();
    println!("before: {neg} neutral vs {pos} strong");

    let out = smote(&m, 5, 42, domains::SMOTE_FINAL)?;
    let (neg, pos) = out.matrix.class_counts();
    println!("after:  {neg} neutral vs {pos} strong ({} synthetic)", out.provenance.len());

    for (p, row) in out.provenance.iter().zip(&out.matrix.rows[m.n_rows()..]).take(4) {
        println!(
            "  {} = row {} + {:.3} * (row {} - row {}) -> [{:.3}, {:.3}]",
            row.event_id, p.base, p.u, p.neighbor, p.base, row.values[0], row.values[1]
        );
    }
    Ok(())
}
