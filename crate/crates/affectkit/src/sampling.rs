//! Stratified train/test splitting, stratified k-fold indices, and SMOTE
//! minority oversampling.
//!
//! Every operation takes an explicit seed and owns its generator, so results
//! are reproducible regardless of call order or parallelism. Balancing is
//! applied to extracted feature vectors (SMOTE's interpolation is defined in
//! feature space) and only ever inside a training fold; validation and test
//! rows are never touched.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, FeatureVector};

/// Domain-separated deterministic RNG: one logical stream per (seed, domain)
/// pair, so independent pipeline stages never share randomness.
pub fn seeded_rng(seed: u64, domain: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(domain);
    rng
}

/// RNG stream domains used across the pipeline.
pub mod domains {
    pub const SPLIT: u64 = 1;
    pub const KFOLD: u64 = 2;
    pub const SMOTE_FOLD_BASE: u64 = 0x100;
    pub const SMOTE_FINAL: u64 = 0x1ff;
}

fn class_indices(labels: &[u8]) -> (Vec<usize>, Vec<usize>) {
    let mut neg = Vec::new();
    let mut pos = Vec::new();
    for (i, &l) in labels.iter().enumerate() {
        if l == 1 {
            pos.push(i)
        } else {
            neg.push(i)
        }
    }
    (neg, pos)
}

fn shuffle(indices: &mut [usize], rng: &mut ChaCha8Rng) {
    // Fisher-Yates; explicit so the sequence is pinned to this crate rather
    // than to rand's shuffle implementation details.
    for i in (1..indices.len()).rev() {
        let j = rng.gen_range(0..=i);
        indices.swap(i, j);
    }
}

/// Stratified split into train/test with per-class test counts of
/// `round(class_count * test_fraction)`. Deterministic given the seed; the
/// two parts are disjoint and exhaustive, rows in original matrix order.
pub fn stratified_split(
    m: &FeatureMatrix,
    test_fraction: f64,
    seed: u64,
) -> Result<(FeatureMatrix, FeatureMatrix)> {
    let labels = m.labels();
    let (neg, pos) = class_indices(&labels);
    for (label, class) in [(0u8, &neg), (1u8, &pos)] {
        if class.len() < 2 {
            return Err(Error::ClassTooSmall { label, count: class.len(), need: 2 });
        }
    }

    let mut rng = seeded_rng(seed, domains::SPLIT);
    let mut test_idx = Vec::new();
    for class in [&neg, &pos] {
        let mut idx = class.clone();
        shuffle(&mut idx, &mut rng);
        let n_test = (class.len() as f64 * test_fraction).round() as usize;
        test_idx.extend_from_slice(&idx[..n_test]);
    }
    test_idx.sort_unstable();
    let in_test: std::collections::BTreeSet<usize> = test_idx.iter().copied().collect();
    let train_idx: Vec<usize> = (0..m.n_rows()).filter(|i| !in_test.contains(i)).collect();

    Ok((m.subset_rows(&train_idx), m.subset_rows(&test_idx)))
}

/// Stratified k-fold validation indices: class indices are shuffled and
/// dealt round-robin, so folds are disjoint, cover every row, and keep class
/// proportions within one row.
pub fn kfold_indices(labels: &[u8], k: usize, seed: u64) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    let (neg, pos) = class_indices(labels);
    for (label, class) in [(0u8, &neg), (1u8, &pos)] {
        if class.len() < k {
            return Err(Error::ClassTooSmall { label, count: class.len(), need: k });
        }
    }

    let mut rng = seeded_rng(seed, domains::KFOLD);
    let mut folds: Vec<Vec<usize>> = vec![Vec::new(); k];
    for class in [&neg, &pos] {
        let mut idx = class.clone();
        shuffle(&mut idx, &mut rng);
        for (i, row) in idx.into_iter().enumerate() {
            folds[i % k].push(row);
        }
    }

    Ok((0..k)
        .map(|f| {
            let mut valid = folds[f].clone();
            valid.sort_unstable();
            let in_valid: std::collections::BTreeSet<usize> = valid.iter().copied().collect();
            let train: Vec<usize> = (0..labels.len()).filter(|i| !in_valid.contains(i)).collect();
            (train, valid)
        })
        .collect())
}

/// How one synthetic SMOTE row was built: `row = base + u * (neighbor - base)`,
/// with `base`/`neighbor` indexing the input matrix.
#[derive(Debug, Clone, Copy)]
pub struct SmoteProvenance {
    pub base: usize,
    pub neighbor: usize,
    pub u: f64,
}

/// A balanced matrix plus, for every appended synthetic row, the provenance
/// needed to reproduce it.
#[derive(Debug)]
pub struct SmoteOutput {
    pub matrix: FeatureMatrix,
    pub provenance: Vec<SmoteProvenance>,
}

fn euclidean_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// The `k` nearest minority neighbors of `of` (excluding itself), ties
/// broken by lowest row index.
fn nearest_neighbors(minority: &[usize], m: &FeatureMatrix, of: usize, k: usize) -> Vec<usize> {
    let mut dists: Vec<(f64, usize)> = minority
        .iter()
        .filter(|&&j| j != of)
        .map(|&j| (euclidean_sq(&m.rows[of].values, &m.rows[j].values), j))
        .collect();
    dists.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    dists.truncate(k);
    dists.into_iter().map(|(_, j)| j).collect()
}

/// The minority rows and each one's k nearest minority neighbors, exactly as
/// SMOTE will use them. Exposed so the neighborhood computation can be
/// checked against independent oracles.
pub fn minority_neighborhoods(m: &FeatureMatrix, k: usize) -> Result<Vec<(usize, Vec<usize>)>> {
    let labels = m.labels();
    let (neg, pos) = class_indices(&labels);
    let minority = if neg.len() <= pos.len() { neg } else { pos };
    if minority.len() <= k {
        return Err(Error::MinorityTooSmall { count: minority.len(), k });
    }
    Ok(minority
        .iter()
        .map(|&i| (i, nearest_neighbors(&minority, m, i, k)))
        .collect())
}

/// Balance the minority class up to the majority count by interpolating
/// synthetic rows between minority samples and their nearest minority
/// neighbors.
///
/// Original rows are returned unchanged and in place; synthetic rows are
/// appended. An already balanced matrix comes back as-is.
pub fn smote(m: &FeatureMatrix, k_neighbors: usize, seed: u64, domain: u64) -> Result<SmoteOutput> {
    let labels = m.labels();
    let (neg, pos) = class_indices(&labels);
    if neg.len() == pos.len() {
        return Ok(SmoteOutput { matrix: m.clone(), provenance: Vec::new() });
    }
    let (minority, majority_count, minority_label) = if neg.len() < pos.len() {
        (neg, pos.len(), 0u8)
    } else {
        (pos, neg.len(), 1u8)
    };
    if minority.len() <= k_neighbors {
        return Err(Error::MinorityTooSmall { count: minority.len(), k: k_neighbors });
    }

    // Neighborhoods are fixed by the input matrix, so compute them once.
    let neighborhoods: Vec<Vec<usize>> = minority
        .iter()
        .map(|&i| nearest_neighbors(&minority, m, i, k_neighbors))
        .collect();

    let mut rng = seeded_rng(seed, domain);
    let needed = majority_count - minority.len();
    let mut out = m.clone();
    let mut provenance = Vec::with_capacity(needed);
    for s in 0..needed {
        // Cycle through minority samples so the synthetic mass spreads evenly.
        let slot = s % minority.len();
        let base = minority[slot];
        let neighbor = neighborhoods[slot][rng.gen_range(0..k_neighbors)];
        let u: f64 = rng.gen();
        let values: Vec<f64> = m.rows[base]
            .values
            .iter()
            .zip(&m.rows[neighbor].values)
            .map(|(&x, &nn)| x + u * (nn - x))
            .collect();
        out.rows.push(FeatureVector {
            event_id: format!("syn-{s:04}"),
            label: minority_label,
            values,
        });
        provenance.push(SmoteProvenance { base, neighbor, u });
    }

    Ok(SmoteOutput { matrix: out, provenance })
}
