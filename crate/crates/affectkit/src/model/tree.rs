//! Weighted CART-style binary decision trees.
//!
//! Splits minimize the weighted Gini impurity of the children. Candidate
//! thresholds sit at midpoints between consecutive distinct sorted feature
//! values; ties resolve to the lowest feature index, then the lowest
//! threshold, so training is fully deterministic. A node splits whenever it
//! is impure, depth remains, and a split satisfying `min_leaf` exists; a
//! zero-gain split is allowed, which is what lets a depth-2 tree shatter
//! XOR-like data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        class: u8,
        /// Weighted class probabilities [p0, p1]; sums to 1.
        prob: [f64; 2],
    },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DecisionTree {
    pub nodes: Vec<TreeNode>,
    pub max_depth: usize,
}

impl DecisionTree {
    /// Class prediction for one row of feature values.
    pub fn predict(&self, values: &[f64]) -> u8 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                TreeNode::Leaf { class, .. } => return *class,
                TreeNode::Split { feature, threshold, left, right } => {
                    at = if values[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    /// Prediction mapped onto {-1, +1} for boosting.
    pub fn predict_signed(&self, values: &[f64]) -> f64 {
        if self.predict(values) == 1 {
            1.0
        } else {
            -1.0
        }
    }
}

/// Weighted class totals (w0, w1) for a set of row indices.
fn class_weights(rows: &[usize], labels: &[u8], weights: &[f64]) -> (f64, f64) {
    let mut w = (0.0, 0.0);
    for &i in rows {
        if labels[i] == 1 {
            w.1 += weights[i];
        } else {
            w.0 += weights[i];
        }
    }
    w
}

/// Weighted Gini contribution of one child: `W * (1 - p0^2 - p1^2)`.
fn gini_term(w0: f64, w1: f64) -> f64 {
    let total = w0 + w1;
    if total <= 0.0 {
        return 0.0;
    }
    total * (1.0 - ((w0 / total).powi(2) + (w1 / total).powi(2)))
}

struct Split {
    feature: usize,
    threshold: f64,
    cost: f64,
}

fn best_split(
    rows: &[usize],
    m: &FeatureMatrix,
    labels: &[u8],
    weights: &[f64],
    min_leaf: usize,
) -> Option<Split> {
    let mut best: Option<Split> = None;
    for feature in 0..m.n_features() {
        let mut order: Vec<usize> = rows.to_vec();
        order.sort_by(|&a, &b| {
            m.rows[a].values[feature]
                .total_cmp(&m.rows[b].values[feature])
                .then(a.cmp(&b))
        });

        let (total0, total1) = class_weights(rows, labels, weights);
        let mut left = (0.0, 0.0);
        for cut in 1..order.len() {
            let prev = order[cut - 1];
            if labels[prev] == 1 {
                left.1 += weights[prev];
            } else {
                left.0 += weights[prev];
            }
            let v_prev = m.rows[prev].values[feature];
            let v_next = m.rows[order[cut]].values[feature];
            if v_prev == v_next {
                continue; // no threshold between equal values
            }
            if cut < min_leaf || order.len() - cut < min_leaf {
                continue;
            }
            let cost = gini_term(left.0, left.1) + gini_term(total0 - left.0, total1 - left.1);
            let threshold = v_prev / 2.0 + v_next / 2.0;
            // Strict improvement only: with features scanned in order and
            // thresholds ascending, ties keep the earliest candidate.
            if best.as_ref().is_none_or(|b| cost < b.cost) {
                best = Some(Split { feature, threshold, cost });
            }
        }
    }
    best
}

fn make_leaf(rows: &[usize], labels: &[u8], weights: &[f64]) -> TreeNode {
    let (w0, w1) = class_weights(rows, labels, weights);
    let total = w0 + w1;
    let prob = if total > 0.0 { [w0 / total, w1 / total] } else { [0.5, 0.5] };
    // Weight ties go to class 0: the conservative "no affect" call.
    TreeNode::Leaf { class: if w1 > w0 { 1 } else { 0 }, prob }
}

/// Train a CART tree on weighted rows.
pub fn train_tree(
    m: &FeatureMatrix,
    weights: &[f64],
    max_depth: usize,
    min_leaf: usize,
) -> Result<DecisionTree> {
    if m.rows.is_empty() || m.n_features() == 0 {
        return Err(Error::EmptyMatrix);
    }
    if weights.len() != m.n_rows() {
        return Err(Error::LengthMismatch { left: weights.len(), right: m.n_rows() });
    }
    if weights.iter().any(|&w| w < 0.0) || weights.iter().sum::<f64>() <= 0.0 {
        return Err(Error::Internal("sample weights must be >= 0 with positive sum".into()));
    }
    let labels = m.labels();
    let rows: Vec<usize> = (0..m.n_rows()).collect();

    let grower = Grower {
        m,
        labels: &labels,
        weights,
        max_depth: max_depth.max(1),
        min_leaf: min_leaf.max(1),
    };
    let mut nodes = Vec::new();
    grower.grow(&mut nodes, rows, 0);
    Ok(DecisionTree { nodes, max_depth: max_depth.max(1) })
}

struct Grower<'a> {
    m: &'a FeatureMatrix,
    labels: &'a [u8],
    weights: &'a [f64],
    max_depth: usize,
    min_leaf: usize,
}

impl Grower<'_> {
    fn grow(&self, nodes: &mut Vec<TreeNode>, rows: Vec<usize>, depth: usize) -> usize {
        let id = nodes.len();
        let (w0, w1) = class_weights(&rows, self.labels, self.weights);
        let pure = w0 == 0.0 || w1 == 0.0;
        if pure || depth >= self.max_depth || rows.len() < 2 * self.min_leaf {
            nodes.push(make_leaf(&rows, self.labels, self.weights));
            return id;
        }
        let Some(split) = best_split(&rows, self.m, self.labels, self.weights, self.min_leaf) else {
            nodes.push(make_leaf(&rows, self.labels, self.weights));
            return id;
        };

        nodes.push(TreeNode::Split { feature: split.feature, threshold: split.threshold, left: 0, right: 0 });
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
            .into_iter()
            .partition(|&i| self.m.rows[i].values[split.feature] <= split.threshold);
        let left = self.grow(nodes, left_rows, depth + 1);
        let right = self.grow(nodes, right_rows, depth + 1);
        if let TreeNode::Split { left: l, right: r, .. } = &mut nodes[id] {
            *l = left;
            *r = right;
        }
        id
    }
}
