use std::collections::{BTreeSet, HashSet};

use rayon::prelude::*;

use super::metrics::weighted_prf_indices;
use super::report::EvalReport;
use crate::corpus::{ClassLabel, Fold, FunctionInstance, FunctionLabel, ProvenanceInstance, ProvenanceLabel};
use crate::error::{Error, Result};

/// Caps the worker threads used for folds and runs.
pub const THREADS_ENV: &str = "CITESCOPE_THREADS";

/// An instance with a stable id and a gold label.
pub trait Labeled {
    type Label: ClassLabel;
    fn id(&self) -> &str;
    fn label(&self) -> Self::Label;
}

impl Labeled for FunctionInstance {
    type Label = FunctionLabel;
    fn id(&self) -> &str {
        &self.id
    }
    fn label(&self) -> FunctionLabel {
        self.label
    }
}

impl Labeled for ProvenanceInstance {
    type Label = ProvenanceLabel;
    fn id(&self) -> &str {
        &self.id
    }
    fn label(&self) -> ProvenanceLabel {
        self.label
    }
}

/// A pool sized by `CITESCOPE_THREADS` when set, rayon's default otherwise.
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::invalid(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| Error::invalid(e.to_string()))
}

/// Rejects folds whose test part shares an id with the training part, and
/// runs in which an instance is tested twice.
fn check_folds<T: Labeled>(instances: &[T], folds: &[Fold], run: usize) -> Result<()> {
    if folds.is_empty() {
        return Err(Error::invalid(format!("run {run}: splitter produced no folds")));
    }
    let mut tested = HashSet::new();
    for (f, fold) in folds.iter().enumerate() {
        if let Some(&bad) = fold.train.iter().chain(&fold.test).find(|&&i| i >= instances.len()) {
            return Err(Error::invalid(format!("run {run} fold {f}: index {bad} out of range")));
        }
        if fold.test.is_empty() || fold.train.is_empty() {
            return Err(Error::invalid(format!("run {run} fold {f}: empty train or test split")));
        }
        let train_ids: HashSet<&str> = fold.train.iter().map(|&i| instances[i].id()).collect();
        if let Some(&leak) = fold.test.iter().find(|&&i| train_ids.contains(instances[i].id())) {
            return Err(Error::invalid(format!(
                "run {run} fold {f}: test instance {:?} also appears in training",
                instances[leak].id()
            )));
        }
        for &i in &fold.test {
            if !tested.insert(i) {
                return Err(Error::invalid(format!(
                    "run {run}: instance {:?} is tested in more than one fold",
                    instances[i].id()
                )));
            }
        }
    }
    Ok(())
}

fn select<'a, T>(instances: &'a [T], idx: &[usize]) -> Vec<&'a T> {
    idx.iter().map(|&i| &instances[i]).collect()
}

/// Pools each run's fold predictions and scores them.
fn assemble<T: Labeled>(
    instances: &[T],
    folds: &[Vec<Fold>],
    predictions: &[Vec<Vec<T::Label>>],
) -> Result<EvalReport> {
    let classes = T::Label::names();
    let mut runs = Vec::with_capacity(folds.len());
    let mut fold_scores = Vec::with_capacity(folds.len());
    for (run_folds, run_preds) in folds.iter().zip(predictions) {
        let mut gold = Vec::new();
        let mut pred = Vec::new();
        let mut per_fold = Vec::with_capacity(run_folds.len());
        for (fold, p) in run_folds.iter().zip(run_preds) {
            let g: Vec<usize> = fold.test.iter().map(|&i| instances[i].label().index()).collect();
            let p: Vec<usize> = p.iter().map(|l| l.index()).collect();
            per_fold.push(weighted_prf_indices(classes.clone(), &g, &p)?.weighted);
            gold.extend(g);
            pred.extend(p);
        }
        runs.push(weighted_prf_indices(classes.clone(), &gold, &pred)?);
        fold_scores.push(per_fold);
    }
    Ok(EvalReport::from_runs(classes, runs, fold_scores))
}

fn check_prediction_count(expected: usize, got: usize, run: usize, fold: usize) -> Result<()> {
    if expected != got {
        return Err(Error::Fold {
            run,
            fold,
            source: Box::new(Error::shape(format!("{got} predictions for {expected} test instances"))),
        });
    }
    Ok(())
}

fn split_runs<T: Labeled>(
    instances: &[T],
    seeds: &[u64],
    splitter: &impl Fn(u64) -> Result<Vec<Fold>>,
) -> Result<Vec<Vec<Fold>>> {
    if seeds.is_empty() {
        return Err(Error::invalid("cross-validation needs at least one run seed"));
    }
    seeds
        .iter()
        .enumerate()
        .map(|(run, &seed)| {
            let folds = splitter(seed)?;
            check_folds(instances, &folds, run)?;
            Ok(folds)
        })
        .collect()
}

/// `runs × k` train/test cycles. Run `r` splits with `splitter(seeds[r])` and
/// trains every fold with `seeds[r]`; per-run scores pool that run's fold
/// predictions. Jobs run in parallel; results do not depend on their order.
pub fn cross_validate<T, S, F>(instances: &[T], splitter: S, seeds: &[u64], fit_predict: F) -> Result<EvalReport>
where
    T: Labeled + Sync,
    S: Fn(u64) -> Result<Vec<Fold>>,
    F: Fn(&[&T], &[&T], u64) -> Result<Vec<T::Label>> + Sync,
{
    let folds = split_runs(instances, seeds, &splitter)?;
    let jobs: Vec<(usize, usize)> = folds
        .iter()
        .enumerate()
        .flat_map(|(r, fs)| (0..fs.len()).map(move |f| (r, f)))
        .collect();
    let results: Vec<Result<Vec<T::Label>>> = thread_pool()?.install(|| {
        jobs.par_iter()
            .map(|&(run, f)| {
                let fold = &folds[run][f];
                let preds = fit_predict(
                    &select(instances, &fold.train),
                    &select(instances, &fold.test),
                    seeds[run],
                )
                .map_err(|e| Error::Fold {
                    run,
                    fold: f,
                    source: Box::new(e),
                })?;
                check_prediction_count(fold.test.len(), preds.len(), run, f)?;
                Ok(preds)
            })
            .collect()
    });
    let mut predictions: Vec<Vec<Vec<T::Label>>> = folds.iter().map(|_| Vec::new()).collect();
    for (&(run, _), r) in jobs.iter().zip(results) {
        predictions[run].push(r?);
    }
    assemble(instances, &folds, &predictions)
}

/// Cross-validation of a model trained on two datasets at once. Fold `f`
/// of run `r` trains on the `f`-th training split of both datasets and is
/// scored on both test splits.
#[allow(clippy::type_complexity)]
pub fn cross_validate_joint<A, B, SA, SB, F>(
    a: &[A],
    b: &[B],
    splitter_a: SA,
    splitter_b: SB,
    seeds: &[u64],
    fit_predict: F,
) -> Result<(EvalReport, EvalReport)>
where
    A: Labeled + Sync,
    B: Labeled + Sync,
    SA: Fn(u64) -> Result<Vec<Fold>>,
    SB: Fn(u64) -> Result<Vec<Fold>>,
    F: Fn(&[&A], &[&A], &[&B], &[&B], u64) -> Result<(Vec<A::Label>, Vec<B::Label>)> + Sync,
{
    let folds_a = split_runs(a, seeds, &splitter_a)?;
    let folds_b = split_runs(b, seeds, &splitter_b)?;
    if folds_a.iter().zip(&folds_b).any(|(x, y)| x.len() != y.len()) {
        return Err(Error::invalid("the two splitters produced different fold counts"));
    }
    let jobs: Vec<(usize, usize)> = folds_a
        .iter()
        .enumerate()
        .flat_map(|(r, fs)| (0..fs.len()).map(move |f| (r, f)))
        .collect();
    type Pair<A, B> = (Vec<<A as Labeled>::Label>, Vec<<B as Labeled>::Label>);
    let results: Vec<Result<Pair<A, B>>> = thread_pool()?.install(|| {
        jobs.par_iter()
            .map(|&(run, f)| {
                let (fa, fb) = (&folds_a[run][f], &folds_b[run][f]);
                let (pa, pb) = fit_predict(
                    &select(a, &fa.train),
                    &select(a, &fa.test),
                    &select(b, &fb.train),
                    &select(b, &fb.test),
                    seeds[run],
                )
                .map_err(|e| Error::Fold {
                    run,
                    fold: f,
                    source: Box::new(e),
                })?;
                check_prediction_count(fa.test.len(), pa.len(), run, f)?;
                check_prediction_count(fb.test.len(), pb.len(), run, f)?;
                Ok((pa, pb))
            })
            .collect()
    });
    let mut pred_a: Vec<Vec<Vec<A::Label>>> = folds_a.iter().map(|_| Vec::new()).collect();
    let mut pred_b: Vec<Vec<Vec<B::Label>>> = folds_a.iter().map(|_| Vec::new()).collect();
    for (&(run, _), r) in jobs.iter().zip(results) {
        let (pa, pb) = r?;
        pred_a[run].push(pa);
        pred_b[run].push(pb);
    }
    Ok((assemble(a, &folds_a, &pred_a)?, assemble(b, &folds_b, &pred_b)?))
}

/// Training ids and test ids of a fold never overlap.
pub fn ids_disjoint<T: Labeled>(instances: &[T], fold: &Fold) -> bool {
    let train: BTreeSet<&str> = fold.train.iter().map(|&i| instances[i].id()).collect();
    fold.test.iter().all(|&i| !train.contains(instances[i].id()))
}
