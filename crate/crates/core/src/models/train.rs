use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::pass::supervised_pass;
use super::{
    CnnModel, DcnnModel, FunctionExample, Grads, MtlModel, Parameterized, ProvenanceExample, FUNCTION_HEAD,
    PROVENANCE_HEAD,
};
use crate::corpus::ClassLabel;
use crate::error::{Error, Result};
use crate::nn::{OptimizerState, Probe, RmsPropConfig};
use crate::util::derive_seed;

const SHUFFLE_STREAM: u64 = 0x5348_5546;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub window: usize,
    pub filters: usize,
    pub lr: f64,
    pub rho: f64,
    pub eps: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        let opt = RmsPropConfig::default();
        Self {
            epochs: 30,
            batch_size: 256,
            window: 5,
            filters: 256,
            lr: opt.lr,
            rho: opt.rho,
            eps: opt.eps,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn optimizer(&self) -> RmsPropConfig {
        RmsPropConfig {
            lr: self.lr,
            rho: self.rho,
            eps: self.eps,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 || self.window == 0 || self.filters == 0 {
            return Err(Error::invalid(
                "epochs, batch size, window and filters must be positive",
            ));
        }
        if !(self.lr.is_finite() && self.lr >= 0.0)
            || !(0.0..1.0).contains(&self.rho)
            || !(self.eps.is_finite() && self.eps > 0.0)
        {
            return Err(Error::invalid(format!(
                "bad optimizer settings lr={} rho={} eps={}",
                self.lr, self.rho, self.eps
            )));
        }
        Ok(())
    }

    fn shuffler(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(derive_seed(self.seed, SHUFFLE_STREAM))
    }
}

/// A model trained on one task with a single loss.
pub trait SingleTask: Parameterized {
    type Example: Sync;

    /// Mean cross-entropy over `batch` and its gradient for every parameter.
    fn loss_and_grads(&self, batch: &[&Self::Example]) -> Result<(f64, Grads)>;

    /// Loss plus the activation-regime fingerprint, for gradient checking.
    fn probe(&self, batch: &[&Self::Example]) -> Result<Probe>;
}

impl SingleTask for CnnModel {
    type Example = FunctionExample;

    fn loss_and_grads(&self, batch: &[&FunctionExample]) -> Result<(f64, Grads)> {
        let (citing, labels) = function_inputs(batch);
        let out = supervised_pass(&self.towers(citing), "head", &self.head, &labels, true)?;
        Ok((out.loss, out.grads))
    }

    fn probe(&self, batch: &[&FunctionExample]) -> Result<Probe> {
        let (citing, labels) = function_inputs(batch);
        let out = supervised_pass(&self.towers(citing), "head", &self.head, &labels, false)?;
        Ok(Probe {
            loss: out.loss,
            regime: out.regime,
        })
    }
}

impl SingleTask for DcnnModel {
    type Example = ProvenanceExample;

    fn loss_and_grads(&self, batch: &[&ProvenanceExample]) -> Result<(f64, Grads)> {
        let (citing, fragment, labels) = provenance_inputs(batch);
        let out = supervised_pass(&self.towers(citing, fragment), "head", &self.head, &labels, true)?;
        Ok((out.loss, out.grads))
    }

    fn probe(&self, batch: &[&ProvenanceExample]) -> Result<Probe> {
        let (citing, fragment, labels) = provenance_inputs(batch);
        let out = supervised_pass(&self.towers(citing, fragment), "head", &self.head, &labels, false)?;
        Ok(Probe {
            loss: out.loss,
            regime: out.regime,
        })
    }
}

fn function_inputs<'a>(batch: &[&'a FunctionExample]) -> (Vec<&'a crate::text::SequenceMatrix>, Vec<usize>) {
    (
        batch.iter().map(|e| &e.citing).collect(),
        batch.iter().map(|e| e.label.index()).collect(),
    )
}

type ProvInputs<'a> = (
    Vec<&'a crate::text::SequenceMatrix>,
    Vec<&'a crate::text::SequenceMatrix>,
    Vec<usize>,
);

fn provenance_inputs<'a>(batch: &[&'a ProvenanceExample]) -> ProvInputs<'a> {
    (
        batch.iter().map(|e| &e.citing).collect(),
        batch.iter().map(|e| &e.fragment).collect(),
        batch.iter().map(|e| e.label.index()).collect(),
    )
}

/// Shuffled minibatch training with one RMSProp step per batch. Returns the
/// per-epoch mean training loss (instance-weighted over the epoch's batches).
pub fn train_single<M: SingleTask>(model: &mut M, data: &[M::Example], config: &TrainConfig) -> Result<Vec<f64>> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::invalid("cannot train on an empty dataset"));
    }
    let mut optimizer = OptimizerState::new(config.optimizer());
    let mut rng = config.shuffler();
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut history = Vec::with_capacity(config.epochs);
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<&M::Example> = chunk.iter().map(|&i| &data[i]).collect();
            let (loss, grads) = model.loss_and_grads(&batch)?;
            model.apply_grads(&grads, &mut optimizer)?;
            total += loss * batch.len() as f64;
        }
        history.push(total / data.len() as f64);
    }
    Ok(history)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Function,
    Provenance,
}

#[derive(Debug, Clone, Copy)]
pub enum MtlBatch<'a> {
    Function(&'a [&'a FunctionExample]),
    Provenance(&'a [&'a ProvenanceExample]),
}

impl MtlBatch<'_> {
    pub fn task(&self) -> Task {
        match self {
            Self::Function(_) => Task::Function,
            Self::Provenance(_) => Task::Provenance,
        }
    }
}

impl MtlModel {
    /// Function loss; gradients cover the shared tower and function head only.
    pub fn function_loss_and_grads(&self, batch: &[&FunctionExample]) -> Result<(f64, Grads)> {
        let (citing, labels) = function_inputs(batch);
        let out = supervised_pass(
            &self.function_towers(citing),
            FUNCTION_HEAD,
            &self.function_head,
            &labels,
            true,
        )?;
        Ok((out.loss, out.grads))
    }

    /// Provenance loss; gradients cover the shared tower, fragment tower and
    /// provenance head.
    pub fn provenance_loss_and_grads(&self, batch: &[&ProvenanceExample]) -> Result<(f64, Grads)> {
        let (citing, fragment, labels) = provenance_inputs(batch);
        let out = supervised_pass(
            &self.provenance_towers(citing, fragment),
            PROVENANCE_HEAD,
            &self.provenance_head,
            &labels,
            true,
        )?;
        Ok((out.loss, out.grads))
    }

    pub fn probe(&self, batch: MtlBatch) -> Result<Probe> {
        let out = match batch {
            MtlBatch::Function(b) => {
                let (citing, labels) = function_inputs(b);
                supervised_pass(
                    &self.function_towers(citing),
                    FUNCTION_HEAD,
                    &self.function_head,
                    &labels,
                    false,
                )?
            }
            MtlBatch::Provenance(b) => {
                let (citing, fragment, labels) = provenance_inputs(b);
                supervised_pass(
                    &self.provenance_towers(citing, fragment),
                    PROVENANCE_HEAD,
                    &self.provenance_head,
                    &labels,
                    false,
                )?
            }
        };
        Ok(Probe {
            loss: out.loss,
            regime: out.regime,
        })
    }

    pub fn loss_and_grads(&self, batch: MtlBatch) -> Result<(f64, Grads)> {
        match batch {
            MtlBatch::Function(b) => self.function_loss_and_grads(b),
            MtlBatch::Provenance(b) => self.provenance_loss_and_grads(b),
        }
    }
}

/// One selective update: only the parameters on `task`'s path move.
pub fn mtl_step(model: &mut MtlModel, optimizer: &mut OptimizerState, task: Task, batch: MtlBatch) -> Result<f64> {
    if batch.task() != task {
        return Err(Error::invalid(format!(
            "{:?} batch passed for the {task:?} task",
            batch.task()
        )));
    }
    let (loss, grads) = model.loss_and_grads(batch)?;
    model.apply_grads(&grads, optimizer)?;
    Ok(loss)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MtlHistory {
    /// Mean of the two per-task epoch losses.
    pub averaged: Vec<f64>,
    pub function: Vec<f64>,
    pub provenance: Vec<f64>,
}

/// Alternating-batch joint training.
///
/// Each epoch shuffles both datasets and interleaves their batches
/// function, provenance, function, ... The task with fewer batches cycles
/// through its batches again until the larger one is exhausted.
pub fn mtl_fit(
    model: &mut MtlModel,
    function_data: &[FunctionExample],
    provenance_data: &[ProvenanceExample],
    config: &TrainConfig,
) -> Result<MtlHistory> {
    config.validate()?;
    if function_data.is_empty() || provenance_data.is_empty() {
        return Err(Error::invalid("joint training needs both datasets non-empty"));
    }
    let mut optimizer = OptimizerState::new(config.optimizer());
    let mut rng = config.shuffler();
    let mut f_order: Vec<usize> = (0..function_data.len()).collect();
    let mut p_order: Vec<usize> = (0..provenance_data.len()).collect();
    let mut history = MtlHistory {
        averaged: Vec::with_capacity(config.epochs),
        function: Vec::with_capacity(config.epochs),
        provenance: Vec::with_capacity(config.epochs),
    };
    for _ in 0..config.epochs {
        f_order.shuffle(&mut rng);
        p_order.shuffle(&mut rng);
        let f_batches: Vec<Vec<&FunctionExample>> = f_order
            .chunks(config.batch_size)
            .map(|c| c.iter().map(|&i| &function_data[i]).collect())
            .collect();
        let p_batches: Vec<Vec<&ProvenanceExample>> = p_order
            .chunks(config.batch_size)
            .map(|c| c.iter().map(|&i| &provenance_data[i]).collect())
            .collect();
        let steps = f_batches.len().max(p_batches.len());
        let (mut f_loss, mut p_loss) = (0.0, 0.0);
        for i in 0..steps {
            let fb = &f_batches[i % f_batches.len()];
            f_loss += mtl_step(model, &mut optimizer, Task::Function, MtlBatch::Function(fb))?;
            let pb = &p_batches[i % p_batches.len()];
            p_loss += mtl_step(model, &mut optimizer, Task::Provenance, MtlBatch::Provenance(pb))?;
        }
        let (f_mean, p_mean) = (f_loss / steps as f64, p_loss / steps as f64);
        history.function.push(f_mean);
        history.provenance.push(p_mean);
        history.averaged.push((f_mean + p_mean) / 2.0);
    }
    Ok(history)
}
