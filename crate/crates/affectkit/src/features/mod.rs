//! The fixed 64-feature catalog computed from preprocessed windows, plus
//! feature selection and median imputation.
//!
//! Catalog layout, in declared order:
//!
//! * eight descriptive statistics (mean, std, min, max, skewness, kurtosis,
//!   first-difference mean, first-difference std) for each of BVP, EDA, SKT,
//!   ACC magnitude, ACC_X, ACC_Y, ACC_Z (56 features);
//! * six time-domain HRV features from detected pulse peaks (mean HR, HR
//!   std, mean IBI, SDNN, RMSSD, pNN50 at 50 ms), missing (NaN) when fewer
//!   than three peaks are found, to be imputed from training-set medians;
//! * SCR count and mean SCR amplitude from the EDA phasic component.
//!
//! Features are extracted per window, independently and deterministically,
//! so extraction parallelizes without affecting output.

pub mod bvp;
pub mod eda;
pub mod stats;

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{ChannelKind, WindowSample};

pub use bvp::{detect_bvp_peaks, hrv_block, ibi_from_peaks, HrvBlock};
pub use eda::{eda_decompose, EdaDecomposition, ScrPeak};

/// Feature-extraction parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    /// Minimum phasic rise (normalized units) for an SCR peak.
    pub scr_threshold: f64,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self { scr_threshold: 0.01 }
    }
}

/// Feature-selection parameters for [`select_features`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectionConfig {
    /// Features with variance at or below this are dropped.
    pub var_eps: f64,
    /// Features correlated beyond this |Pearson r| with a kept feature are
    /// dropped.
    pub corr_max: f64,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self { var_eps: 1e-12, corr_max: 0.95 }
    }
}

const STAT_NAMES: [&str; 8] = [
    "mean", "std", "min", "max", "skew", "kurt", "diff_mean", "diff_std",
];
const STAT_CHANNELS: [&str; 7] = ["bvp", "eda", "skt", "acc_mag", "acc_x", "acc_y", "acc_z"];
const HRV_NAMES: [&str; 6] = [
    "hrv_hr_mean", "hrv_hr_std", "hrv_ibi_mean", "hrv_sdnn", "hrv_rmssd", "hrv_pnn50",
];
const SCR_NAMES: [&str; 2] = ["eda_scr_count", "eda_scr_amp_mean"];

/// Number of features in the catalog.
pub const FEATURE_COUNT: usize = 64;

/// The catalog's feature names in declared (column) order.
pub fn feature_names() -> Vec<String> {
    let mut names = Vec::with_capacity(FEATURE_COUNT);
    for ch in STAT_CHANNELS {
        for stat in STAT_NAMES {
            names.push(format!("{ch}_{stat}"));
        }
    }
    names.extend(HRV_NAMES.iter().map(|s| s.to_string()));
    names.extend(SCR_NAMES.iter().map(|s| s.to_string()));
    debug_assert_eq!(names.len(), FEATURE_COUNT);
    names
}

/// One labelled feature row; values align with the owning matrix's
/// `feature_names`.
#[derive(Debug, Clone)]
pub struct FeatureVector {
    pub event_id: String,
    pub label: u8,
    pub values: Vec<f64>,
}

/// Rectangular labelled dataset: shared ordered feature names plus rows.
#[derive(Debug, Clone, Default)]
pub struct FeatureMatrix {
    pub feature_names: Vec<String>,
    pub rows: Vec<FeatureVector>,
}

impl FeatureMatrix {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn labels(&self) -> Vec<u8> {
        self.rows.iter().map(|r| r.label).collect()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r.values[j]).collect()
    }

    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.rows.iter().filter(|r| r.label == 1).count();
        (self.rows.len() - pos, pos)
    }

    /// New matrix keeping only the given rows, in the given order.
    pub fn subset_rows(&self, indices: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            feature_names: self.feature_names.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }

    /// New matrix keeping only the given feature columns, in the given order.
    pub fn select_columns(&self, indices: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            feature_names: indices.iter().map(|&j| self.feature_names[j].clone()).collect(),
            rows: self
                .rows
                .iter()
                .map(|r| FeatureVector {
                    event_id: r.event_id.clone(),
                    label: r.label,
                    values: indices.iter().map(|&j| r.values[j]).collect(),
                })
                .collect(),
        }
    }

    /// Serialize as CSV: optional `# key=value` comment lines, then the
    /// `event_id,label,...` header, then one row per vector.
    pub fn to_csv(&self, comment: Option<&str>) -> String {
        let mut out = String::new();
        if let Some(c) = comment {
            let _ = writeln!(out, "# {c}");
        }
        let _ = write!(out, "event_id,label");
        for name in &self.feature_names {
            let _ = write!(out, ",{name}");
        }
        out.push('\n');
        for row in &self.rows {
            let _ = write!(out, "{},{}", row.event_id, row.label);
            for v in &row.values {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path, comment: Option<&str>) -> Result<()> {
        std::fs::write(path, self.to_csv(comment))
            .map_err(|e| Error::Io { path: path.to_path_buf(), source: e })
    }

    pub fn from_csv_str(text: &str, origin: &Path) -> Result<FeatureMatrix> {
        let bad = |detail: String| Error::MalformedHeader { path: origin.to_path_buf(), detail };
        let mut lines = text
            .lines()
            .filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
        let header = lines.next().ok_or_else(|| bad("empty feature CSV".into()))?;
        let mut cols = header.split(',');
        if cols.next() != Some("event_id") || cols.next() != Some("label") {
            return Err(bad("feature CSV must start with event_id,label".into()));
        }
        let feature_names: Vec<String> = cols.map(|s| s.to_string()).collect();

        let mut rows = Vec::new();
        for line in lines {
            let mut fields = line.split(',');
            let event_id = fields.next().unwrap_or_default().to_string();
            let label: u8 = fields
                .next()
                .and_then(|s| s.trim().parse().ok())
                .filter(|l| *l <= 1)
                .ok_or_else(|| bad(format!("row {event_id}: label must be 0 or 1")))?;
            let values: Vec<f64> = fields
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad(format!("row {event_id}: unparseable value")))?;
            if values.len() != feature_names.len() {
                return Err(bad(format!(
                    "row {event_id}: {} values for {} features",
                    values.len(),
                    feature_names.len()
                )));
            }
            rows.push(FeatureVector { event_id, label, values });
        }
        Ok(FeatureMatrix { feature_names, rows })
    }

    pub fn read_csv(path: &Path) -> Result<FeatureMatrix> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io { path: path.to_path_buf(), source: e })?;
        Self::from_csv_str(&text, path)
    }
}

fn stat_block(out: &mut Vec<f64>, x: &[f64]) {
    use stats::*;
    let diffs = first_diff(x);
    out.push(mean(x));
    out.push(std_dev(x));
    out.push(min(x));
    out.push(max(x));
    out.push(skewness(x));
    out.push(kurtosis(x));
    // A window has hundreds of samples, so diffs are never empty in practice;
    // degenerate inputs yield NaN and flow into imputation like any missing value.
    out.push(mean(&diffs));
    out.push(std_dev(&diffs));
}

/// Compute the full 64-feature catalog for one preprocessed window.
///
/// Features that cannot be computed (HRV without enough peaks, SCR amplitude
/// without any SCR) are NaN and must be imputed before model consumption.
pub fn extract_features(w: &WindowSample, cfg: &FeatureConfig) -> FeatureVector {
    let mut values = Vec::with_capacity(FEATURE_COUNT);

    let get = |kind: ChannelKind| w.channel(kind).map(|c| c.samples.as_slice()).unwrap_or(&[]);
    let bvp_slice = get(ChannelKind::Bvp);
    let eda_slice = get(ChannelKind::Eda);
    let acc = [get(ChannelKind::AccX), get(ChannelKind::AccY), get(ChannelKind::AccZ)];
    let acc_mag: Vec<f64> = (0..acc[0].len().min(acc[1].len()).min(acc[2].len()))
        .map(|i| (acc[0][i].powi(2) + acc[1][i].powi(2) + acc[2][i].powi(2)).sqrt())
        .collect();

    stat_block(&mut values, bvp_slice);
    stat_block(&mut values, eda_slice);
    stat_block(&mut values, get(ChannelKind::Skt));
    stat_block(&mut values, &acc_mag);
    stat_block(&mut values, acc[0]);
    stat_block(&mut values, acc[1]);
    stat_block(&mut values, acc[2]);

    let bvp_rate = w.channel(ChannelKind::Bvp).map(|c| c.sampling_rate).unwrap_or(64.0);
    let hrv = match detect_bvp_peaks(bvp_slice, bvp_rate) {
        Ok(peaks) => match ibi_from_peaks(&peaks, bvp_rate) {
            Ok(ibis) => hrv_block(&ibis),
            Err(_) => HrvBlock::missing(),
        },
        Err(_) => HrvBlock::missing(),
    };
    values.extend([hrv.hr_mean, hrv.hr_std, hrv.ibi_mean, hrv.sdnn, hrv.rmssd, hrv.pnn50]);

    let eda_rate = w.channel(ChannelKind::Eda).map(|c| c.sampling_rate).unwrap_or(4.0);
    let decomposition = eda_decompose(eda_slice, eda_rate, cfg.scr_threshold);
    values.push(decomposition.scr_peaks.len() as f64);
    if decomposition.scr_peaks.is_empty() {
        values.push(f64::NAN);
    } else {
        values.push(
            decomposition.scr_peaks.iter().map(|p| p.amplitude).sum::<f64>()
                / decomposition.scr_peaks.len() as f64,
        );
    }

    debug_assert_eq!(values.len(), FEATURE_COUNT);
    FeatureVector { event_id: w.event_id.clone(), label: w.label, values }
}

/// Extract the feature matrix for a batch of windows (in parallel, order
/// preserved).
pub fn extract_matrix(windows: &[WindowSample], cfg: &FeatureConfig) -> FeatureMatrix {
    let rows: Vec<FeatureVector> = windows.par_iter().map(|w| extract_features(w, cfg)).collect();
    FeatureMatrix { feature_names: feature_names(), rows }
}

fn finite_column(m: &FeatureMatrix, j: usize) -> Vec<f64> {
    m.rows.iter().map(|r| r.values[j]).filter(|v| v.is_finite()).collect()
}

fn column_variance(m: &FeatureMatrix, j: usize) -> f64 {
    let col = finite_column(m, j);
    if col.is_empty() {
        return 0.0;
    }
    let s = stats::std_dev(&col);
    s * s
}

/// Drop near-constant features, then greedily drop any feature too strongly
/// correlated (|Pearson r| > `corr_max`) with an already-kept feature,
/// scanning in declared column order.
///
/// Deterministic, never grows the feature set, and idempotent on its own
/// output.
pub fn select_features(
    m: &FeatureMatrix,
    var_eps: f64,
    corr_max: f64,
) -> Result<(FeatureMatrix, Vec<String>)> {
    if m.rows.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    let mut kept: Vec<usize> = Vec::new();
    for j in 0..m.n_features() {
        if column_variance(m, j) <= var_eps {
            continue;
        }
        let col_j = m.column(j);
        let correlated = kept.iter().any(|&k| {
            let r = stats::pearson(&m.column(k), &col_j);
            r.is_finite() && r.abs() > corr_max
        });
        if !correlated {
            kept.push(j);
        }
    }
    if kept.is_empty() {
        return Err(Error::AllFeaturesDropped);
    }
    let reduced = m.select_columns(&kept);
    let names = reduced.feature_names.clone();
    Ok((reduced, names))
}

/// Per-feature medians learned from a training matrix, used to fill missing
/// (NaN) values without looking at validation or test rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MedianImputer {
    pub medians: Vec<f64>,
}

impl MedianImputer {
    pub fn fit(m: &FeatureMatrix) -> Self {
        let medians = (0..m.n_features())
            .map(|j| {
                let mut col = finite_column(m, j);
                if col.is_empty() {
                    return 0.0;
                }
                col.sort_by(f64::total_cmp);
                crate::preprocess::quantile_sorted(&col, 0.5)
            })
            .collect();
        Self { medians }
    }

    pub fn apply(&self, m: &mut FeatureMatrix) {
        for row in &mut m.rows {
            for (v, &median) in row.values.iter_mut().zip(&self.medians) {
                if !v.is_finite() {
                    *v = median;
                }
            }
        }
    }
}
