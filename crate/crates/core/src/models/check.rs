//! Finite-difference verification of whole-model gradients.

use ndarray::Array2;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{
    CnnModel, DcnnModel, FunctionExample, ModelKind, MtlBatch, MtlModel, Parameterized, ProvenanceExample, SingleTask,
};
use crate::corpus::{ClassLabel, FunctionLabel, ProvenanceLabel};
use crate::error::Result;
use crate::nn::{grad_check_coords, GradCheckReport};
use crate::text::SequenceMatrix;
use crate::util::derive_seed;

/// Which coordinates to probe.
#[derive(Debug, Clone, Copy)]
pub enum Coverage {
    All,
    /// A seeded uniform sample over all coordinates.
    Sample {
        count: usize,
        seed: u64,
    },
    /// Up to `count` seeded coordinates from every named tensor, so small
    /// tensors such as biases are always probed.
    PerTensor {
        count: usize,
        seed: u64,
    },
}

fn sample_sorted(seed: u64, total: usize, count: usize) -> Vec<usize> {
    let mut v = index::sample(&mut ChaCha8Rng::seed_from_u64(seed), total, count.min(total)).into_vec();
    v.sort_unstable();
    v
}

fn coords(model: &dyn Parameterized, coverage: Coverage) -> Vec<usize> {
    let total = model.parameter_count();
    match coverage {
        Coverage::All => (0..total).collect(),
        Coverage::Sample { count, seed } => sample_sorted(seed, total, count),
        Coverage::PerTensor { count, seed } => {
            let mut out = Vec::new();
            let mut offset = 0;
            let mut t = 0;
            model.visit(&mut |_, a| {
                out.extend(
                    sample_sorted(derive_seed(seed, t), a.len(), count)
                        .into_iter()
                        .map(|i| offset + i),
                );
                offset += a.len();
                t += 1;
            });
            out
        }
    }
}

/// Checks a single-task model's analytic gradients on `batch`.
pub fn check_single<M: SingleTask + Clone>(
    model: &M,
    batch: &[&M::Example],
    epsilon: f64,
    coverage: Coverage,
) -> Result<GradCheckReport> {
    let (_, grads) = model.loss_and_grads(batch)?;
    let analytic = model.flatten_grads(&grads);
    let params = model.flatten();
    let mut probe_model = model.clone();
    let f = |theta: &[f64]| {
        probe_model.assign_flat(theta)?;
        probe_model.probe(batch)
    };
    grad_check_coords(f, &params, &analytic, &coords(model, coverage), epsilon)
}

/// Checks the joint model on one task's batch, over every parameter
/// (off-path parameters must come out as zero on both sides).
pub fn check_mtl(model: &MtlModel, batch: MtlBatch, epsilon: f64, coverage: Coverage) -> Result<GradCheckReport> {
    let (_, grads) = model.loss_and_grads(batch)?;
    let analytic = model.flatten_grads(&grads);
    let params = model.flatten();
    let mut probe_model = model.clone();
    let f = |theta: &[f64]| {
        probe_model.assign_flat(theta)?;
        probe_model.probe(batch)
    };
    grad_check_coords(f, &params, &analytic, &coords(model, coverage), epsilon)
}

/// Standard-normal inputs of shape `dim × width`.
pub fn random_sequences<R: Rng>(rng: &mut R, dim: usize, width: usize, n: usize) -> Vec<SequenceMatrix> {
    (0..n)
        .map(|_| {
            SequenceMatrix(Array2::from_shape_simple_fn((dim, width), || {
                StandardNormal.sample(rng)
            }))
        })
        .collect()
}

/// Sizes for [`check_random_model`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckSetup {
    pub window: usize,
    pub filters: usize,
    pub width: usize,
    pub dim: usize,
    pub batch: usize,
    pub epsilon: f64,
    pub seed: u64,
}

/// Builds a seeded network of `kind`, random inputs and labels, and checks
/// its gradients. A joint network yields one report per task.
pub fn check_random_model(
    kind: ModelKind,
    setup: CheckSetup,
    coverage: Coverage,
) -> Result<Vec<(String, GradCheckReport)>> {
    let CheckSetup {
        window,
        filters,
        width,
        dim,
        batch,
        epsilon,
        seed,
    } = setup;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0x4743));
    let citing = random_sequences(&mut rng, dim, width, batch);
    let fragments = random_sequences(&mut rng, dim, width, batch);
    let functions: Vec<FunctionExample> = citing
        .iter()
        .map(|c| FunctionExample {
            citing: c.clone(),
            label: FunctionLabel::ALL[rng.random_range(0..FunctionLabel::count())],
        })
        .collect();
    let pairs: Vec<ProvenanceExample> = citing
        .iter()
        .zip(&fragments)
        .map(|(c, f)| ProvenanceExample {
            citing: c.clone(),
            fragment: f.clone(),
            label: ProvenanceLabel::ALL[rng.random_range(0..ProvenanceLabel::count())],
        })
        .collect();
    let f_refs: Vec<&FunctionExample> = functions.iter().collect();
    let p_refs: Vec<&ProvenanceExample> = pairs.iter().collect();
    Ok(match kind {
        ModelKind::Cnn => {
            let m = CnnModel::init(seed, dim, window, filters);
            vec![("cnn".into(), check_single(&m, &f_refs, epsilon, coverage)?)]
        }
        ModelKind::Dcnn => {
            let m = DcnnModel::init(seed, dim, window, filters);
            vec![("dcnn".into(), check_single(&m, &p_refs, epsilon, coverage)?)]
        }
        ModelKind::Mtl => {
            let m = MtlModel::init(seed, dim, window, filters);
            vec![
                (
                    "mtl/function".into(),
                    check_mtl(&m, MtlBatch::Function(&f_refs), epsilon, coverage)?,
                ),
                (
                    "mtl/provenance".into(),
                    check_mtl(&m, MtlBatch::Provenance(&p_refs), epsilon, coverage)?,
                ),
            ]
        }
    })
}
