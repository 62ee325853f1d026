//! Discrete two-class AdaBoost over CART trees: training, prediction, and a
//! versioned on-disk format with bit-exact round trips.
//!
//! Training follows the classic discrete formulation. Labels {0, 1} are
//! remapped to {-1, +1}; weights start uniform; each round fits a tree on
//! the current weights, measures the weighted error `e_t`, assigns the stage
//! weight `a_t = ln((1 - e_t) / e_t) / 2`, and reweights samples by
//! `exp(-a_t * y * h_t(x))` before renormalizing. A perfect round keeps its
//! stage with a capped weight and stops; a round at or beyond 0.5 discards
//! the stage and stops (signalled in the trace, or an error when it happens
//! on the first round). Tree fitting itself has no randomness, so a model is
//! a pure function of (matrix, config).

mod tree;

pub use tree::{train_tree, DecisionTree, TreeNode};

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, FeatureVector};

/// On-disk format marker; files without it are rejected as corrupt.
pub const MODEL_MAGIC: &str = "affectkit-model";
/// Current model schema version.
pub const MODEL_SCHEMA_VERSION: u64 = 1;

/// Numerical floor for a round's weighted error when computing the stage
/// weight of a perfect round.
const EPSILON_FLOOR: f64 = 1e-10;

/// Model training hyperparameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    /// Boosting rounds to attempt.
    pub rounds: usize,
    /// Maximum depth of each base tree.
    pub max_depth: usize,
    /// Minimum rows per leaf.
    pub min_leaf: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self { rounds: 100, max_depth: 3, min_leaf: 1 }
    }
}

/// Provenance recorded inside a model file.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub seed: u64,
    pub config_hash: String,
    pub rounds_requested: usize,
    pub rounds_trained: usize,
}

/// A trained boosted ensemble plus everything prediction needs: the feature
/// names the trees index into and the training-set medians used to fill
/// missing values at prediction time.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdaBoostModel {
    magic: String,
    schema_version: u64,
    pub feature_names: Vec<String>,
    pub medians: Vec<f64>,
    pub trees: Vec<DecisionTree>,
    pub alphas: Vec<f64>,
    pub meta: TrainingMeta,
}

/// Per-round training facts, kept so oracle tests can replay a run.
#[derive(Debug, Clone)]
pub struct BoostRound {
    pub feature: Option<usize>,
    pub threshold: Option<f64>,
    pub epsilon: f64,
    pub alpha: f64,
    /// Normalized sample weights after this round's update.
    pub weights_after: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub model: AdaBoostModel,
    pub trace: Vec<BoostRound>,
    /// Round index at which boosting stopped on a degenerate (>= 0.5) error,
    /// if it did.
    pub degenerate_at: Option<usize>,
    pub training_error: f64,
    /// Product of `2 * sqrt(e_t (1 - e_t))` over trained rounds; the
    /// training error never exceeds it.
    pub error_bound: f64,
}

/// Train a discrete AdaBoost ensemble.
pub fn train_adaboost(m: &FeatureMatrix, cfg: &ModelConfig, meta: TrainingMeta) -> Result<TrainOutput> {
    if m.rows.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    let n = m.n_rows();
    let labels = m.labels();
    let signed: Vec<f64> = labels.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();

    let mut weights = vec![1.0 / n as f64; n];
    let mut trees: Vec<DecisionTree> = Vec::new();
    let mut alphas: Vec<f64> = Vec::new();
    let mut trace: Vec<BoostRound> = Vec::new();
    let mut degenerate_at = None;

    for round in 0..cfg.rounds.max(1) {
        let tree = train_tree(m, &weights, cfg.max_depth, cfg.min_leaf)?;
        let predictions: Vec<f64> = m.rows.iter().map(|r| tree.predict_signed(&r.values)).collect();
        let epsilon: f64 = weights
            .iter()
            .zip(&predictions)
            .zip(&signed)
            .filter(|((_, &p), &y)| p != y)
            .map(|((&w, _), _)| w)
            .sum();

        if epsilon >= 0.5 {
            // The weak learner stopped being weak-better-than-chance; the
            // stage is discarded and boosting stops here.
            if trees.is_empty() {
                return Err(Error::DegenerateRound { round, epsilon });
            }
            degenerate_at = Some(round);
            break;
        }

        let eps_eff = epsilon.max(EPSILON_FLOOR);
        let alpha = 0.5 * ((1.0 - eps_eff) / eps_eff).ln();

        for ((w, &p), &y) in weights.iter_mut().zip(&predictions).zip(&signed) {
            *w *= (-alpha * y * p).exp();
        }
        let z: f64 = weights.iter().sum();
        for w in weights.iter_mut() {
            *w /= z;
        }

        let (feature, threshold) = match tree.nodes.first() {
            Some(TreeNode::Split { feature, threshold, .. }) => (Some(*feature), Some(*threshold)),
            _ => (None, None),
        };
        trace.push(BoostRound { feature, threshold, epsilon, alpha, weights_after: weights.clone() });
        trees.push(tree);
        alphas.push(alpha);

        if epsilon == 0.0 {
            break; // perfect stage kept with its capped weight
        }
    }

    let model = AdaBoostModel {
        magic: MODEL_MAGIC.to_string(),
        schema_version: MODEL_SCHEMA_VERSION,
        feature_names: m.feature_names.clone(),
        medians: vec![f64::NAN; m.n_features()],
        trees,
        alphas,
        meta: TrainingMeta {
            rounds_trained: trace.len(),
            ..meta
        },
    };

    let training_error = m
        .rows
        .iter()
        .zip(&labels)
        .filter(|(row, &y)| model.predict_values(&row.values).0 != y)
        .count() as f64
        / n as f64;
    let error_bound: f64 = trace
        .iter()
        .map(|r| {
            let e = r.epsilon.max(EPSILON_FLOOR);
            2.0 * (e * (1.0 - e)).sqrt()
        })
        .product();
    // The boosting bound is a theorem; breaking it means the update step is
    // wrong.
    if training_error > error_bound + 1e-9 {
        return Err(Error::Internal(format!(
            "boosting bound violated: training error {training_error} > bound {error_bound}"
        )));
    }

    Ok(TrainOutput { model, trace, degenerate_at, training_error, error_bound })
}

impl AdaBoostModel {
    /// Attach prediction-time medians (aligned with `feature_names`).
    pub fn with_medians(mut self, medians: Vec<f64>) -> Self {
        debug_assert_eq!(medians.len(), self.feature_names.len());
        self.medians = medians;
        self
    }

    /// Predict from values already aligned with `feature_names`.
    /// Returns `(label, score)` where the score is the signed stage-weight
    /// sum; a zero score conservatively maps to label 0.
    pub fn predict_values(&self, values: &[f64]) -> (u8, f64) {
        let filled: Vec<f64>;
        let values = if values.iter().any(|v| !v.is_finite()) {
            filled = values
                .iter()
                .zip(&self.medians)
                .map(|(&v, &med)| if v.is_finite() { v } else { med })
                .collect();
            &filled
        } else {
            values
        };
        let score: f64 = self
            .trees
            .iter()
            .zip(&self.alphas)
            .map(|(t, &a)| a * t.predict_signed(values))
            .sum();
        ((score > 0.0) as u8, score)
    }

    /// Column mapping from a matrix's feature order onto the model's; fails
    /// when the matrix lacks a feature the model needs.
    pub fn projection(&self, feature_names: &[String]) -> Result<Vec<usize>> {
        self.feature_names
            .iter()
            .map(|name| {
                feature_names
                    .iter()
                    .position(|f| f == name)
                    .ok_or_else(|| Error::FeatureMismatch { missing: name.clone() })
            })
            .collect()
    }

    /// Predict one row of a (possibly wider) matrix via a projection from
    /// [`AdaBoostModel::projection`].
    pub fn predict_projected(&self, row: &FeatureVector, projection: &[usize]) -> (u8, f64) {
        let values: Vec<f64> = projection.iter().map(|&j| row.values[j]).collect();
        self.predict_values(&values)
    }

    /// SHA-256 of the serialized model; equal inputs and config produce
    /// equal digests.
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("model serializes");
        let mut hasher = Sha256::new();
        hasher.update(json.as_bytes());
        let out = hasher.finalize();
        out.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Serialize a model to its versioned JSON file format.
///
/// The model must carry finite prediction-time medians (attached by the
/// fitting pipeline via [`AdaBoostModel::with_medians`]); JSON cannot
/// represent the in-memory NaN placeholder.
pub fn save_model(model: &AdaBoostModel, path: &Path) -> Result<()> {
    if model.medians.iter().any(|m| !m.is_finite()) {
        return Err(Error::Internal(
            "model has no prediction-time medians attached; fit them before saving".into(),
        ));
    }
    let json = serde_json::to_string_pretty(model)
        .map_err(|e| Error::Internal(format!("model serialization failed: {e}")))?;
    std::fs::write(path, json).map_err(|e| Error::Io { path: path.to_path_buf(), source: e })
}

/// Load a model, verifying the magic marker and schema version.
pub fn load_model(path: &Path) -> Result<AdaBoostModel> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io { path: path.to_path_buf(), source: e })?;
    let model: AdaBoostModel = serde_json::from_str(&text).map_err(|e| Error::CorruptModel {
        path: path.to_path_buf(),
        detail: e.to_string(),
    })?;
    if model.magic != MODEL_MAGIC {
        return Err(Error::CorruptModel {
            path: path.to_path_buf(),
            detail: format!("bad magic {:?}", model.magic),
        });
    }
    if model.schema_version != MODEL_SCHEMA_VERSION {
        return Err(Error::VersionMismatch {
            path: path.to_path_buf(),
            found: model.schema_version,
            supported: MODEL_SCHEMA_VERSION,
        });
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureVector;

    fn matrix_1d(x: &[f64], y: &[u8]) -> FeatureMatrix {
        FeatureMatrix {
            feature_names: vec!["x".into()],
            rows: x
                .iter()
                .zip(y)
                .enumerate()
                .map(|(i, (&v, &l))| FeatureVector {
                    event_id: format!("r{i}"),
                    label: l,
                    values: vec![v],
                })
                .collect(),
        }
    }

    fn meta() -> TrainingMeta {
        TrainingMeta { seed: 0, config_hash: "test".into(), rounds_requested: 0, rounds_trained: 0 }
    }

    #[test]
    fn stage_weight_closed_form() {
        // e = 0.25 -> a = ln(3) / 2.
        let alpha = 0.5 * ((1.0 - 0.25f64) / 0.25).ln();
        assert!((alpha - 0.549306144334055).abs() < 1e-12);
    }

    /// Hand-stepped three-round trace on a fixed 8-point instance.
    ///
    /// x = 0..=7, labels + + + - - - - +; depth-1 stumps.
    /// Round 1: split at 2.5, e = 1/8, a = ln(7)/2,
    ///          weights [1/14 x7, 1/2].
    /// Round 2: split at 6.5, e = 3/14, a = ln(11/3)/2,
    ///          weights [1/6 x3, 1/22 x4, 7/22].
    /// Round 3: split at 2.5 (both leaves +1), e = 2/11, a = ln(9/2)/2,
    ///          weights [11/108 x3, 1/8 x4, 7/36].
    #[test]
    fn three_round_trace_matches_hand_computation() {
        let x = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0];
        let y = [1u8, 1, 1, 0, 0, 0, 0, 1];
        let m = matrix_1d(&x, &y);
        let out = train_adaboost(
            &m,
            &ModelConfig { rounds: 3, max_depth: 1, min_leaf: 1 },
            meta(),
        )
        .unwrap();
        assert_eq!(out.trace.len(), 3);

        let expect_eps = [1.0 / 8.0, 3.0 / 14.0, 2.0 / 11.0];
        let expect_alpha = [
            0.5 * 7.0f64.ln(),
            0.5 * (11.0f64 / 3.0).ln(),
            0.5 * 4.5f64.ln(),
        ];
        let expect_thresholds = [2.5, 6.5, 2.5];
        let expect_weights: [Vec<f64>; 3] = [
            vec![1.0 / 14.0, 1.0 / 14.0, 1.0 / 14.0, 1.0 / 14.0, 1.0 / 14.0, 1.0 / 14.0, 1.0 / 14.0, 0.5],
            vec![1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 22.0, 1.0 / 22.0, 1.0 / 22.0, 1.0 / 22.0, 7.0 / 22.0],
            vec![11.0 / 108.0, 11.0 / 108.0, 11.0 / 108.0, 0.125, 0.125, 0.125, 0.125, 7.0 / 36.0],
        ];

        for t in 0..3 {
            let round = &out.trace[t];
            assert!((round.epsilon - expect_eps[t]).abs() <= 1e-12, "round {t} epsilon");
            assert!((round.alpha - expect_alpha[t]).abs() <= 1e-12, "round {t} alpha");
            assert_eq!(round.threshold, Some(expect_thresholds[t]), "round {t} threshold");
            assert!((round.weights_after.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            for (i, (&got, &want)) in round.weights_after.iter().zip(&expect_weights[t]).enumerate() {
                assert!((got - want).abs() <= 1e-12, "round {t} weight {i}: {got} vs {want}");
            }
        }

        // The three stages classify the training set perfectly, inside the bound.
        assert_eq!(out.training_error, 0.0);
        assert!(out.training_error <= out.error_bound + 1e-12);
        for (row, &label) in m.rows.iter().zip(&m.labels()) {
            assert_eq!(out.model.predict_values(&row.values).0, label);
        }
    }

    #[test]
    fn two_moons_reaches_zero_training_error_with_shallow_trees() {
        // Two interleaved crescents, 20 points each.
        let rows: Vec<FeatureVector> = (0..40)
            .map(|i| {
                let t = (i % 20) as f64 / 19.0 * std::f64::consts::PI;
                let (label, x, y) = if i < 20 {
                    (0u8, t.cos(), t.sin())
                } else {
                    (1u8, 1.0 - t.cos(), 0.5 - t.sin())
                };
                FeatureVector { event_id: format!("m{i}"), label, values: vec![x, y] }
            })
            .collect();
        let m = FeatureMatrix { feature_names: vec!["x".into(), "y".into()], rows };
        let out = train_adaboost(
            &m,
            &ModelConfig { rounds: 50, max_depth: 2, min_leaf: 1 },
            meta(),
        )
        .unwrap();
        assert_eq!(out.training_error, 0.0);
        assert!(out.training_error <= out.error_bound + 1e-12);
    }

    #[test]
    fn xor_reaches_perfect_training_accuracy() {
        let m = FeatureMatrix {
            feature_names: vec!["a".into(), "b".into()],
            rows: [(0.0, 0.0, 0u8), (0.0, 1.0, 1), (1.0, 0.0, 1), (1.0, 1.0, 0)]
                .iter()
                .enumerate()
                .map(|(i, &(a, b, l))| FeatureVector {
                    event_id: format!("r{i}"),
                    label: l,
                    values: vec![a, b],
                })
                .collect(),
        };
        let out = train_adaboost(
            &m,
            &ModelConfig { rounds: 50, max_depth: 2, min_leaf: 1 },
            meta(),
        )
        .unwrap();
        assert_eq!(out.training_error, 0.0);
        assert!(out.trace.len() <= 50);
    }

    #[test]
    fn perfect_first_round_caps_alpha_and_stops() {
        let m = matrix_1d(&[1.0, 2.0, 8.0, 9.0], &[0, 0, 1, 1]);
        let out = train_adaboost(&m, &ModelConfig { rounds: 10, max_depth: 1, min_leaf: 1 }, meta()).unwrap();
        assert_eq!(out.trace.len(), 1);
        let cap = 0.5 * ((1.0 - 1e-10f64) / 1e-10).ln();
        assert!((out.trace[0].alpha - cap).abs() < 1e-9);
        assert_eq!(out.training_error, 0.0);
    }

    #[test]
    fn degenerate_first_round_is_an_error() {
        // Identical points with conflicting labels: no stump beats chance.
        let m = matrix_1d(&[1.0, 1.0, 1.0, 1.0], &[0, 1, 0, 1]);
        assert!(matches!(
            train_adaboost(&m, &ModelConfig { rounds: 5, max_depth: 1, min_leaf: 1 }, meta()),
            Err(Error::DegenerateRound { .. })
        ));
    }

    #[test]
    fn tie_score_predicts_no_affect() {
        let m = matrix_1d(&[1.0, 2.0, 8.0, 9.0], &[0, 0, 1, 1]);
        let out = train_adaboost(&m, &ModelConfig { rounds: 1, max_depth: 1, min_leaf: 1 }, meta()).unwrap();
        let mut model = out.model;

        // Single tree voting +1 with stage weight 1 scores exactly 1.0.
        model.alphas = vec![1.0];
        assert_eq!(model.predict_values(&[9.0]), (1, 1.0));
        // Duplicate the single stage with opposite-voting trees by hand:
        // force two equal alphas and predict a point each tree labels
        // differently -> score 0 -> label 0.
        model.alphas = vec![0.6, 0.6];
        let mut flipped = model.trees[0].clone();
        if let TreeNode::Split { left, right, .. } = &mut flipped.nodes[0] {
            std::mem::swap(left, right);
        }
        model.trees.push(flipped);
        let (label, score) = model.predict_values(&[5.0]);
        assert_eq!(score, 0.0);
        assert_eq!(label, 0);
    }

    #[test]
    fn determinism_same_input_same_digest() {
        let x: Vec<f64> = (0..40).map(|i| (i as f64 * 0.7).sin()).collect();
        let y: Vec<u8> = (0..40).map(|i| ((i * 7) % 3 == 0) as u8).collect();
        let m = matrix_1d(&x, &y);
        let cfg = ModelConfig { rounds: 20, max_depth: 2, min_leaf: 1 };
        let a = train_adaboost(&m, &cfg, meta()).unwrap();
        let b = train_adaboost(&m, &cfg, meta()).unwrap();
        assert_eq!(a.model.digest(), b.model.digest());
    }

    #[test]
    fn save_load_round_trip_is_exact() {
        let x: Vec<f64> = (0..30).map(|i| (i as f64 * 1.3).cos()).collect();
        let y: Vec<u8> = (0..30).map(|i| (i % 2) as u8).collect();
        let m = matrix_1d(&x, &y);
        let out = train_adaboost(&m, &ModelConfig { rounds: 15, max_depth: 2, min_leaf: 1 }, meta()).unwrap();
        let model = out.model.with_medians(vec![0.0]);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        save_model(&model, &path).unwrap();
        let loaded = load_model(&path).unwrap();

        for i in 0..200 {
            let v = [(i as f64 * 0.11).sin() * 3.0];
            let (l1, s1) = model.predict_values(&v);
            let (l2, s2) = loaded.predict_values(&v);
            assert_eq!(l1, l2);
            assert_eq!(s1.to_bits(), s2.to_bits());
        }
    }

    #[test]
    fn wrong_magic_is_corrupt() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        std::fs::write(&path, r#"{"magic":"nope","schema_version":1,"feature_names":[],"medians":[],"trees":[],"alphas":[],"meta":{"seed":0,"config_hash":"","rounds_requested":0,"rounds_trained":0}}"#).unwrap();
        assert!(matches!(load_model(&path), Err(Error::CorruptModel { .. })));
    }

    #[test]
    fn future_schema_version_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        std::fs::write(&path, format!(r#"{{"magic":"{MODEL_MAGIC}","schema_version":999,"feature_names":[],"medians":[],"trees":[],"alphas":[],"meta":{{"seed":0,"config_hash":"","rounds_requested":0,"rounds_trained":0}}}}"#)).unwrap();
        assert!(matches!(load_model(&path), Err(Error::VersionMismatch { found: 999, .. })));
    }

    #[test]
    fn feature_projection_reorders_and_rejects_missing() {
        let m = matrix_1d(&[1.0, 2.0, 8.0, 9.0], &[0, 0, 1, 1]);
        let out = train_adaboost(&m, &ModelConfig { rounds: 1, max_depth: 1, min_leaf: 1 }, meta()).unwrap();
        let wide = vec!["pad".to_string(), "x".to_string()];
        let projection = out.model.projection(&wide).unwrap();
        assert_eq!(projection, vec![1]);
        let narrow = vec!["pad".to_string()];
        assert!(matches!(
            out.model.projection(&narrow),
            Err(Error::FeatureMismatch { .. })
        ));
    }
}
