use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Instance indices of one cross-validation split, each list ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

fn folds_from_assignment(n: usize, k: usize, fold_of: impl Fn(usize) -> usize) -> Vec<Fold> {
    let mut folds = vec![
        Fold {
            train: Vec::new(),
            test: Vec::new(),
        };
        k
    ];
    for i in 0..n {
        let f = fold_of(i);
        for (j, fold) in folds.iter_mut().enumerate() {
            if j == f {
                fold.test.push(i);
            } else {
                fold.train.push(i);
            }
        }
    }
    folds
}

/// K-fold split keeping every group wholly inside one test fold.
///
/// Groups are shuffled, then each is assigned to the fold currently holding
/// the fewest instances (lowest fold index on ties).
pub fn grouped_kfold<T, K>(instances: &[T], k: usize, group_key: impl Fn(&T) -> K, seed: u64) -> Result<Vec<Fold>>
where
    K: Ord,
{
    if k < 2 {
        return Err(Error::invalid(format!("k must be at least 2, got {k}")));
    }
    let mut groups: BTreeMap<K, Vec<usize>> = BTreeMap::new();
    for (i, inst) in instances.iter().enumerate() {
        groups.entry(group_key(inst)).or_default().push(i);
    }
    if groups.len() < k {
        return Err(Error::invalid(format!("{} groups cannot fill {k} folds", groups.len())));
    }
    let mut members: Vec<Vec<usize>> = groups.into_values().collect();
    members.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let mut sizes = vec![0usize; k];
    let mut fold_of = vec![0usize; instances.len()];
    for group in &members {
        let target = (0..k).min_by_key(|&f| (sizes[f], f)).unwrap_or(0);
        sizes[target] += group.len();
        for &i in group {
            fold_of[i] = target;
        }
    }
    Ok(folds_from_assignment(instances.len(), k, |i| fold_of[i]))
}

/// Shuffled k-fold split with fold sizes differing by at most one.
pub fn ungrouped_kfold<T>(instances: &[T], k: usize, seed: u64) -> Result<Vec<Fold>> {
    if k < 2 {
        return Err(Error::invalid(format!("k must be at least 2, got {k}")));
    }
    let n = instances.len();
    if n < k {
        return Err(Error::invalid(format!("{n} instances cannot fill {k} folds")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut fold_of = vec![0usize; n];
    let (base, extra) = (n / k, n % k);
    let mut pos = 0;
    for f in 0..k {
        let size = base + usize::from(f < extra);
        for &i in &order[pos..pos + size] {
            fold_of[i] = f;
        }
        pos += size;
    }
    Ok(folds_from_assignment(n, k, |i| fold_of[i]))
}
