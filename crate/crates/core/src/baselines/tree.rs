use serde::{Deserialize, Serialize};

use super::ProvenanceFeatureVector;
use crate::corpus::{ClassLabel, ProvenanceLabel};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeConfig {
    pub max_depth: usize,
    pub min_leaf: usize,
}

impl Default for TreeConfig {
    fn default() -> Self {
        Self {
            max_depth: 10,
            min_leaf: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Leaf {
        /// Training instances per class reaching this leaf.
        counts: Vec<usize>,
        label: ProvenanceLabel,
    },
    /// Samples with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    pub root: TreeNode,
    pub config: TreeConfig,
}

impl TreeModel {
    pub fn depth(&self) -> usize {
        fn go(n: &TreeNode) -> usize {
            match n {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + go(left).max(go(right)),
            }
        }
        go(&self.root)
    }

    pub fn leaves(&self) -> Vec<&TreeNode> {
        fn go<'a>(n: &'a TreeNode, out: &mut Vec<&'a TreeNode>) {
            match n {
                TreeNode::Leaf { .. } => out.push(n),
                TreeNode::Split { left, right, .. } => {
                    go(left, out);
                    go(right, out);
                }
            }
        }
        let mut out = Vec::new();
        go(&self.root, &mut out);
        out
    }

    pub fn predict_row(&self, x: &[f64]) -> ProvenanceLabel {
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf { label, .. } => return *label,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if x[*feature] <= *threshold { left } else { right };
                }
            }
        }
    }
}

pub fn gini(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    1.0 - counts.iter().map(|&c| (c as f64 / n as f64).powi(2)).sum::<f64>()
}

fn class_counts(labels: &[usize], rows: &[usize]) -> Vec<usize> {
    let mut c = vec![0; ProvenanceLabel::count()];
    for &r in rows {
        c[labels[r]] += 1;
    }
    c
}

/// Majority class; a tie resolves to `NonProv`.
fn majority(counts: &[usize]) -> ProvenanceLabel {
    let prov = counts[ProvenanceLabel::Prov.index()];
    let non = counts[ProvenanceLabel::NonProv.index()];
    if prov > non {
        ProvenanceLabel::Prov
    } else {
        ProvenanceLabel::NonProv
    }
}

struct Best {
    impurity: f64,
    feature: usize,
    threshold: f64,
}

#[allow(clippy::needless_range_loop)]
fn best_split(x: &[Vec<f64>], labels: &[usize], rows: &[usize], min_leaf: usize) -> Option<Best> {
    let n = rows.len();
    let classes = ProvenanceLabel::count();
    let total = class_counts(labels, rows);
    let mut best: Option<Best> = None;
    for feature in 0..x[rows[0]].len() {
        let mut order = rows.to_vec();
        order.sort_by(|&a, &b| x[a][feature].total_cmp(&x[b][feature]));
        let mut left = vec![0usize; classes];
        for i in 0..n - 1 {
            left[labels[order[i]]] += 1;
            let (lo, hi) = (x[order[i]][feature], x[order[i + 1]][feature]);
            if lo == hi || i + 1 < min_leaf || n - i - 1 < min_leaf {
                continue;
            }
            let right: Vec<usize> = total.iter().zip(&left).map(|(t, l)| t - l).collect();
            let nl = (i + 1) as f64;
            let impurity = (nl * gini(&left) + (n as f64 - nl) * gini(&right)) / n as f64;
            if best.as_ref().is_none_or(|b| impurity < b.impurity) {
                best = Some(Best {
                    impurity,
                    feature,
                    threshold: lo + (hi - lo) / 2.0,
                });
            }
        }
    }
    best
}

fn grow(x: &[Vec<f64>], labels: &[usize], rows: Vec<usize>, depth: usize, config: &TreeConfig) -> TreeNode {
    let counts = class_counts(labels, &rows);
    let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
    let leaf = |counts: Vec<usize>| TreeNode::Leaf {
        label: majority(&counts),
        counts,
    };
    if pure || depth >= config.max_depth {
        return leaf(counts);
    }
    let Some(best) = best_split(x, labels, &rows, config.min_leaf) else {
        return leaf(counts);
    };
    let (l, r): (Vec<usize>, Vec<usize>) = rows.into_iter().partition(|&i| x[i][best.feature] <= best.threshold);
    TreeNode::Split {
        feature: best.feature,
        threshold: best.threshold,
        left: Box::new(grow(x, labels, l, depth + 1, config)),
        right: Box::new(grow(x, labels, r, depth + 1, config)),
    }
}

/// Greedy CART over raw feature rows. Candidate thresholds are midpoints of
/// consecutive distinct values; the lowest weighted Gini wins, earlier
/// features and smaller thresholds breaking ties.
pub fn tree_fit_rows(x: &[Vec<f64>], labels: &[ProvenanceLabel], config: TreeConfig) -> Result<TreeModel> {
    if x.is_empty() || x.len() != labels.len() {
        return Err(Error::invalid(format!(
            "tree needs a non-empty training set with one label per row ({} rows, {} labels)",
            x.len(),
            labels.len()
        )));
    }
    if config.min_leaf == 0 {
        return Err(Error::invalid("min_leaf must be at least 1"));
    }
    let width = x[0].len();
    if let Some(bad) = x.iter().find(|r| r.len() != width || r.iter().any(|v| !v.is_finite())) {
        return Err(Error::invalid(format!("malformed feature row {bad:?}")));
    }
    let idx: Vec<usize> = labels.iter().map(|l| l.index()).collect();
    Ok(TreeModel {
        root: grow(x, &idx, (0..x.len()).collect(), 0, &config),
        config,
    })
}

pub fn tree_fit(
    features: &[ProvenanceFeatureVector],
    labels: &[ProvenanceLabel],
    config: TreeConfig,
) -> Result<TreeModel> {
    let rows: Vec<Vec<f64>> = features.iter().map(ProvenanceFeatureVector::to_vec).collect();
    tree_fit_rows(&rows, labels, config)
}

pub fn tree_predict(model: &TreeModel, features: &ProvenanceFeatureVector) -> ProvenanceLabel {
    model.predict_row(&features.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use ProvenanceLabel::{NonProv, Prov};

    #[test]
    fn all_prov_is_a_single_leaf() {
        let x = vec![vec![1.0], vec![2.0], vec![3.0]];
        let m = tree_fit_rows(&x, &[Prov, Prov, Prov], TreeConfig::default()).unwrap();
        assert_eq!(m.depth(), 0);
        assert_eq!(m.predict_row(&[100.0]), Prov);
    }

    #[test]
    fn one_dimensional_midpoint() {
        let x = vec![vec![0.1], vec![0.2], vec![0.8], vec![0.9]];
        let m = tree_fit_rows(&x, &[NonProv, NonProv, Prov, Prov], TreeConfig::default()).unwrap();
        assert_eq!(m.depth(), 1);
        let TreeNode::Split { feature, threshold, .. } = &m.root else {
            panic!()
        };
        assert_eq!(*feature, 0);
        assert!((threshold - 0.5).abs() < 1e-12);
        for leaf in m.leaves() {
            let TreeNode::Leaf { counts, .. } = leaf else {
                unreachable!()
            };
            assert_eq!(gini(counts), 0.0);
        }
    }

    #[test]
    fn zero_depth_is_global_majority() {
        let x = vec![vec![0.0], vec![1.0], vec![2.0]];
        let cfg = TreeConfig {
            max_depth: 0,
            min_leaf: 2,
        };
        let m = tree_fit_rows(&x, &[Prov, Prov, NonProv], cfg).unwrap();
        assert_eq!(m.depth(), 0);
        assert_eq!(m.predict_row(&[2.0]), Prov);
    }

    #[test]
    fn leaf_ties_go_to_nonprov() {
        let x = vec![vec![0.0], vec![0.0]];
        let m = tree_fit_rows(&x, &[Prov, NonProv], TreeConfig::default()).unwrap();
        assert_eq!(m.predict_row(&[0.0]), NonProv);
    }

    #[test]
    fn empty_training_set_is_an_error() {
        assert!(tree_fit(&[], &[], TreeConfig::default()).is_err());
    }

    #[test]
    fn xor_needs_zero_gain_first_split() {
        let x = vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]];
        let labels = [NonProv, Prov, Prov, NonProv];
        let m = tree_fit_rows(
            &x,
            &labels,
            TreeConfig {
                max_depth: 10,
                min_leaf: 1,
            },
        )
        .unwrap();
        for (r, l) in x.iter().zip(labels) {
            assert_eq!(m.predict_row(r), l);
        }
    }

    proptest! {
        #[test]
        fn consistent_data_gets_pure_leaves(
            rows in prop::collection::btree_map(prop::collection::vec(0u8..6, 3), any::<bool>(), 1..40)
        ) {
            let (x, labels): (Vec<Vec<f64>>, Vec<ProvenanceLabel>) = rows
                .into_iter()
                .map(|(k, b)| (k.into_iter().map(f64::from).collect(), if b { Prov } else { NonProv }))
                .unzip();
            let m = tree_fit_rows(&x, &labels, TreeConfig { max_depth: 64, min_leaf: 1 }).unwrap();
            for leaf in m.leaves() {
                let TreeNode::Leaf { counts, .. } = leaf else { unreachable!() };
                prop_assert_eq!(gini(counts), 0.0);
                prop_assert!(counts.iter().sum::<usize>() > 0);
            }
            for (r, l) in x.iter().zip(&labels) {
                prop_assert_eq!(m.predict_row(r), *l);
            }
            let again = tree_fit_rows(&x, &labels, TreeConfig { max_depth: 64, min_leaf: 1 }).unwrap();
            prop_assert_eq!(m, again);
        }
    }
}
