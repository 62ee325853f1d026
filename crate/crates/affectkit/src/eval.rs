//! Binary classification metrics and the leakage-free evaluation protocol.
//!
//! Protocol composition: the matrix is first split 80:20 with stratification.
//! k-fold cross-validation runs on the training portion only; each fold fits
//! its own median imputer, feature selection, SMOTE balancing, and model on
//! that fold's training rows and scores its validation rows. The held-out
//! 20% is scored exactly once, by a final model refit on the whole training
//! portion. No validation or test row ever contributes to imputation
//! medians, selection statistics, SMOTE neighborhoods, or tree fitting.
//!
//! F1 is reported for the positive (strong-affect) class, both per fold and
//! pooled over folds, alongside the held-out figure.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{select_features, FeatureMatrix, MedianImputer, SelectionConfig};
use crate::model::{train_adaboost, AdaBoostModel, ModelConfig, TrainingMeta};
use crate::sampling::{domains, kfold_indices, smote, stratified_split};

/// Confusion counts for the positive class (label 1).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub true_pos: usize,
    pub false_pos: usize,
    pub true_neg: usize,
    pub false_neg: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.true_pos + self.false_pos + self.true_neg + self.false_neg
    }

    pub fn add(&mut self, other: &Confusion) {
        self.true_pos += other.true_pos;
        self.false_pos += other.false_pos;
        self.true_neg += other.true_neg;
        self.false_neg += other.false_neg;
    }
}

/// Exact confusion counts from parallel truth/prediction vectors.
pub fn confusion(truth: &[u8], pred: &[u8]) -> Result<Confusion> {
    if truth.len() != pred.len() {
        return Err(Error::LengthMismatch { left: truth.len(), right: pred.len() });
    }
    let mut c = Confusion::default();
    for (&t, &p) in truth.iter().zip(pred) {
        match (t, p) {
            (1, 1) => c.true_pos += 1,
            (0, 1) => c.false_pos += 1,
            (0, 0) => c.true_neg += 1,
            (1, 0) => c.false_neg += 1,
            _ => return Err(Error::Internal("labels must be binary".into())),
        }
    }
    Ok(c)
}

pub fn precision(c: &Confusion) -> Option<f64> {
    let denom = c.true_pos + c.false_pos;
    (denom > 0).then(|| c.true_pos as f64 / denom as f64)
}

pub fn recall(c: &Confusion) -> Option<f64> {
    let denom = c.true_pos + c.false_neg;
    (denom > 0).then(|| c.true_pos as f64 / denom as f64)
}

/// F1 for the positive class. Zero when nothing positive was found but
/// positives existed somewhere; undefined (error) when the positive class is
/// entirely absent from both truth and prediction.
pub fn f1_score(c: &Confusion) -> Result<f64> {
    if c.true_pos == 0 {
        if c.false_pos == 0 && c.false_neg == 0 {
            return Err(Error::MetricUndefined);
        }
        return Ok(0.0);
    }
    let p = precision(c).unwrap_or(0.0);
    let r = recall(c).unwrap_or(0.0);
    Ok(2.0 * p * r / (p + r))
}

/// Metrics for one scored set of rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SetMetrics {
    pub confusion: Confusion,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
}

impl SetMetrics {
    fn from_confusion(c: Confusion) -> Self {
        Self {
            confusion: c,
            precision: precision(&c),
            recall: recall(&c),
            f1: f1_score(&c).ok(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FoldMetrics {
    pub fold: usize,
    #[serde(flatten)]
    pub metrics: SetMetrics,
    pub kept_features: usize,
}

/// Full evaluation report: per-fold and pooled cross-validation metrics plus
/// the optional held-out score, with the seed, config hash, and effective
/// config snapshot that produced them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub seed: u64,
    pub config_hash: String,
    /// Snapshot of the effective configuration, attached by the caller that
    /// owns it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
    pub folds: Vec<FoldMetrics>,
    pub pooled: SetMetrics,
    pub heldout: Option<SetMetrics>,
    pub train_rows: usize,
    pub test_rows: usize,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())
            .map_err(|e| Error::Io { path: path.to_path_buf(), source: e })
    }

    /// Flat per-fold CSV, one line per fold.
    pub fn fold_metrics_csv(&self) -> String {
        let mut out = format!("# config_hash={} seed={}\n", self.config_hash, self.seed);
        out.push_str("fold,tp,fp,tn,fn,precision,recall,f1,kept_features\n");
        let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for f in &self.folds {
            let c = &f.metrics.confusion;
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                f.fold,
                c.true_pos,
                c.false_pos,
                c.true_neg,
                c.false_neg,
                cell(f.metrics.precision),
                cell(f.metrics.recall),
                cell(f.metrics.f1),
                f.kept_features,
            ));
        }
        out
    }
}

/// Per-fold learning settings shared by cross-validation and the final fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct LearnerSettings {
    pub selection: SelectionConfig,
    pub smote_k: usize,
    pub model: ModelConfig,
}

impl Default for LearnerSettings {
    fn default() -> Self {
        Self { selection: SelectionConfig::default(), smote_k: 5, model: ModelConfig::default() }
    }
}

/// Fit the learning pipeline (impute -> select -> balance -> boost) on
/// `train` and return a model ready to score rows through a projection.
pub fn fit_learner(
    train: &FeatureMatrix,
    settings: &LearnerSettings,
    seed: u64,
    smote_domain: u64,
    config_hash: &str,
) -> Result<AdaBoostModel> {
    let imputer = MedianImputer::fit(train);
    let mut train = train.clone();
    imputer.apply(&mut train);

    let (selected, _) = select_features(&train, settings.selection.var_eps, settings.selection.corr_max)?;
    let balanced = smote(&selected, settings.smote_k, seed, smote_domain)?;

    let out = train_adaboost(
        &balanced.matrix,
        &settings.model,
        TrainingMeta {
            seed,
            config_hash: config_hash.to_string(),
            rounds_requested: settings.model.rounds,
            rounds_trained: 0,
        },
    )?;

    // Medians must be re-expressed in the selected feature order for
    // prediction-time imputation.
    let selected_medians = out
        .model
        .feature_names
        .iter()
        .map(|name| {
            let j = train.feature_names.iter().position(|f| f == name).expect("selected from train");
            imputer.medians[j]
        })
        .collect();
    Ok(out.model.with_medians(selected_medians))
}

fn score(model: &AdaBoostModel, rows: &FeatureMatrix) -> Result<Confusion> {
    let projection = model.projection(&rows.feature_names)?;
    let pred: Vec<u8> = rows
        .rows
        .iter()
        .map(|r| model.predict_projected(r, &projection).0)
        .collect();
    confusion(&rows.labels(), &pred)
}

/// Stratified k-fold cross-validation with the full per-fold pipeline.
pub fn cross_validate(
    m: &FeatureMatrix,
    k: usize,
    settings: &LearnerSettings,
    seed: u64,
    config_hash: &str,
) -> Result<EvalReport> {
    let folds = kfold_indices(&m.labels(), k, seed)?;

    let fold_results: Result<Vec<(FoldMetrics, Confusion)>> = folds
        .par_iter()
        .enumerate()
        .map(|(fold, (train_idx, valid_idx))| {
            let train = m.subset_rows(train_idx);
            let valid = m.subset_rows(valid_idx);
            // Provenance check: a row must never sit on both sides.
            for row in &valid.rows {
                if train.rows.iter().any(|t| t.event_id == row.event_id) {
                    return Err(Error::Internal(format!(
                        "row {} leaked into fold {fold} training set",
                        row.event_id
                    )));
                }
            }
            let model = fit_learner(
                &train,
                settings,
                seed,
                domains::SMOTE_FOLD_BASE + fold as u64,
                config_hash,
            )?;
            // Missing validation values are filled from the fold's training
            // medians inside predict_values; nothing is fit on validation rows.
            let c = score(&model, &valid)?;
            Ok((
                FoldMetrics {
                    fold,
                    metrics: SetMetrics::from_confusion(c),
                    kept_features: model.feature_names.len(),
                },
                c,
            ))
        })
        .collect();

    let fold_results = fold_results?;
    let mut pooled = Confusion::default();
    for (_, c) in &fold_results {
        pooled.add(c);
    }

    Ok(EvalReport {
        seed,
        config_hash: config_hash.to_string(),
        config: None,
        folds: fold_results.into_iter().map(|(f, _)| f).collect(),
        pooled: SetMetrics::from_confusion(pooled),
        heldout: None,
        train_rows: m.n_rows(),
        test_rows: 0,
    })
}

/// The full protocol: split, cross-validate the training portion, refit on
/// all training rows, score the held-out portion once. Returns the report
/// and the final model.
pub fn evaluate_full(
    m: &FeatureMatrix,
    test_fraction: f64,
    k: usize,
    settings: &LearnerSettings,
    seed: u64,
    config_hash: &str,
) -> Result<(EvalReport, AdaBoostModel)> {
    let (train, test) = stratified_split(m, test_fraction, seed)?;
    let mut report = cross_validate(&train, k, settings, seed, config_hash)?;

    let final_model = fit_learner(&train, settings, seed, domains::SMOTE_FINAL, config_hash)?;
    let heldout = score(&final_model, &test)?;
    report.heldout = Some(SetMetrics::from_confusion(heldout));
    report.train_rows = train.n_rows();
    report.test_rows = test.n_rows();
    Ok((report, final_model))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureVector;
    use rand::Rng;

    #[test]
    fn confusion_counts_exactly() {
        let c = confusion(&[1, 1, 0, 0], &[1, 0, 0, 1]).unwrap();
        assert_eq!(c, Confusion { true_pos: 1, false_neg: 1, true_neg: 1, false_pos: 1 });
        assert_eq!(c.total(), 4);
    }

    #[test]
    fn identical_vectors_have_no_errors() {
        let c = confusion(&[1, 0, 1], &[1, 0, 1]).unwrap();
        assert_eq!(c.false_pos + c.false_neg, 0);
    }

    #[test]
    fn confusion_rejects_length_mismatch() {
        assert!(matches!(confusion(&[1], &[1, 0]), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn f1_known_values() {
        let c = Confusion { true_pos: 1, false_pos: 1, false_neg: 1, true_neg: 0 };
        assert_eq!(f1_score(&c).unwrap(), 0.5);
        // p = r = 0.9 -> f1 = 2 * 0.81 / 1.8 = 0.9
        let c = Confusion { true_pos: 9, false_pos: 1, false_neg: 1, true_neg: 0 };
        assert!((f1_score(&c).unwrap() - 0.9).abs() < 1e-12);
        let c = Confusion { true_pos: 0, false_pos: 0, false_neg: 3, true_neg: 5 };
        assert_eq!(f1_score(&c).unwrap(), 0.0);
    }

    #[test]
    fn f1_undefined_without_positives() {
        let c = Confusion { true_pos: 0, false_pos: 0, false_neg: 0, true_neg: 7 };
        assert!(matches!(f1_score(&c), Err(Error::MetricUndefined)));
    }

    /// Separable two-cluster data with a little noise.
    fn toy_matrix(n_per_class: usize, seed: u64) -> FeatureMatrix {
        let mut rng = crate::sampling::seeded_rng(seed, 77);
        let mut rows = Vec::new();
        for i in 0..2 * n_per_class {
            let label = (i % 2) as u8;
            let center = if label == 1 { 1.0 } else { 0.0 };
            let values: Vec<f64> = (0..6)
                .map(|_| center + rng.gen_range(-0.35..0.35))
                .collect();
            rows.push(FeatureVector { event_id: format!("r{i}"), label, values });
        }
        FeatureMatrix {
            feature_names: (0..6).map(|j| format!("f{j}")).collect(),
            rows,
        }
    }

    fn fast_settings() -> LearnerSettings {
        LearnerSettings {
            selection: SelectionConfig::default(),
            smote_k: 3,
            model: ModelConfig { rounds: 20, max_depth: 2, min_leaf: 1 },
        }
    }

    #[test]
    fn cross_validate_produces_per_fold_and_pooled_metrics() {
        let m = toy_matrix(30, 5);
        let report = cross_validate(&m, 5, &fast_settings(), 11, "h").unwrap();
        assert_eq!(report.folds.len(), 5);
        let mut pooled = Confusion::default();
        for f in &report.folds {
            pooled.add(&f.metrics.confusion);
        }
        assert_eq!(pooled, report.pooled.confusion);
        assert_eq!(pooled.total(), m.n_rows());
        assert!(report.pooled.f1.unwrap() > 0.8, "pooled f1 {:?}", report.pooled.f1);
    }

    #[test]
    fn cross_validate_is_deterministic() {
        let m = toy_matrix(25, 9);
        let a = cross_validate(&m, 5, &fast_settings(), 3, "h").unwrap();
        let b = cross_validate(&m, 5, &fast_settings(), 3, "h").unwrap();
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn evaluate_full_scores_heldout_once() {
        let m = toy_matrix(40, 2);
        let (report, model) = evaluate_full(&m, 0.2, 5, &fast_settings(), 13, "h").unwrap();
        let held = report.heldout.as_ref().unwrap();
        assert_eq!(held.confusion.total(), 16);
        assert_eq!(report.train_rows, 64);
        assert_eq!(report.test_rows, 16);
        assert!(!model.feature_names.is_empty());
    }

    /// A label-copy feature present only in validation rows must not lift
    /// validation F1: it is never seen at training time. Training rows carry
    /// independent noise in that column, and the injection happens per fold
    /// so the same physical column is noise on one side and the label on the
    /// other.
    #[test]
    fn label_copy_in_validation_rows_cannot_inflate_f1() {
        let m = toy_matrix(30, 21);
        let clean = cross_validate(&m, 5, &fast_settings(), 17, "h").unwrap();

        let mut rng = crate::sampling::seeded_rng(99, 1);
        let mut sentinel = m.clone();
        sentinel.feature_names.push("sentinel".into());
        for row in &mut sentinel.rows {
            row.values.push(rng.gen_range(0.0..1.0));
        }
        let folds = kfold_indices(&m.labels(), 5, 17).unwrap();
        let mut inflated = Confusion::default();
        for (fold, (train_idx, valid_idx)) in folds.iter().enumerate() {
            let train = sentinel.subset_rows(train_idx);
            let mut valid = sentinel.subset_rows(valid_idx);
            let j = valid.feature_names.len() - 1;
            for row in &mut valid.rows {
                row.values[j] = row.label as f64;
            }
            let model = fit_learner(&train, &fast_settings(), 17, domains::SMOTE_FOLD_BASE + fold as u64, "h").unwrap();
            inflated.add(&score(&model, &valid).unwrap());
        }
        let f1_clean = clean.pooled.f1.unwrap();
        let f1_sentinel = f1_score(&inflated).unwrap();
        assert!(
            f1_sentinel - f1_clean <= 0.02 + 1e-12,
            "sentinel inflated F1: {f1_sentinel} vs {f1_clean}"
        );
    }
}
