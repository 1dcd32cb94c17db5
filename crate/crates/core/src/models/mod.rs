//! The three neural architectures and their training loops.
//!
//! * [`CnnModel`]: one convolutional tower over the citing sentence, a
//!   4-way softmax head (citation function).
//! * [`DcnnModel`]: independent towers over the citing sentence and the
//!   candidate fragment, pooled features concatenated into a 2-way head
//!   (citation provenance).
//! * [`MtlModel`]: both tasks at once; the citing-sentence tower is a single
//!   object shared by the two heads, the fragment tower belongs to
//!   provenance alone.
//!
//! Networks read only the citing sentence (and fragment); the surrounding
//! context sentences are left to the baselines.

pub mod check;
mod checkpoint;
mod data;
mod params;
mod pass;
mod pipeline;
mod predict;
mod train;

use ndarray::{ArrayViewD, ArrayViewMutD};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use checkpoint::{ArchitectureDescriptor, ModelCheckpoint, ModelKind, NeuralModel, CHECKPOINT_FILE, VOCAB_FILE};
pub use data::Featurizer;
pub use params::{Grads, Parameterized};
pub use pass::Tower;
pub use pipeline::Fitted;
pub use predict::{
    argmax, predict_function, predict_mtl_function, predict_mtl_provenance, predict_provenance, Prediction,
};
pub use train::{mtl_fit, mtl_step, train_single, MtlBatch, MtlHistory, SingleTask, Task, TrainConfig};

use crate::corpus::{ClassLabel, FunctionLabel, ProvenanceLabel};
use crate::error::{Error, Result};
use crate::nn::DenseLayer;
use crate::text::SequenceMatrix;
use pass::{forward_probs, visit_dense, visit_dense_mut, TowerInput};

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionExample {
    pub citing: SequenceMatrix,
    pub label: FunctionLabel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProvenanceExample {
    pub citing: SequenceMatrix,
    pub fragment: SequenceMatrix,
    pub label: ProvenanceLabel,
}

fn check_head(head: &DenseLayer, inputs: usize, outputs: usize) -> Result<()> {
    if head.inputs() != inputs || head.outputs() != outputs {
        return Err(Error::shape(format!(
            "head is {}→{}, expected {inputs}→{outputs}",
            head.inputs(),
            head.outputs()
        )));
    }
    Ok(())
}

fn column(probs: ndarray::Array2<f64>) -> Vec<f64> {
    probs.column(0).to_vec()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CnnModel {
    pub tower: Tower,
    pub head: DenseLayer,
}

impl CnnModel {
    pub fn new(tower: Tower, head: DenseLayer) -> Result<Self> {
        check_head(&head, tower.filters(), FunctionLabel::count())?;
        Ok(Self { tower, head })
    }

    pub fn init(seed: u64, dim: usize, window: usize, filters: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tower = Tower::init(&mut rng, window, dim, filters);
        let head = DenseLayer::init(&mut rng, filters, FunctionLabel::count());
        Self { tower, head }
    }

    pub(crate) fn towers<'a>(&'a self, citing: Vec<&'a SequenceMatrix>) -> Vec<TowerInput<'a>> {
        vec![TowerInput {
            name: "tower",
            tower: &self.tower,
            inputs: citing,
        }]
    }
}

impl Parameterized for CnnModel {
    fn visit(&self, f: &mut dyn FnMut(&str, ArrayViewD<f64>)) {
        self.tower.visit("tower", f);
        visit_dense("head", &self.head, f);
    }

    fn visit_mut(&mut self, f: &mut dyn FnMut(&str, ArrayViewMutD<f64>)) {
        self.tower.visit_mut("tower", f);
        visit_dense_mut("head", &mut self.head, f);
    }
}

/// `softmax(head(maxpool(conv(citing))))` over the four function classes.
pub fn cnn_forward(model: &CnnModel, citing: &SequenceMatrix) -> Result<Vec<f64>> {
    forward_probs(&model.towers(vec![citing]), &model.head).map(column)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DcnnModel {
    pub citing_tower: Tower,
    pub fragment_tower: Tower,
    pub head: DenseLayer,
}

impl DcnnModel {
    pub fn new(citing_tower: Tower, fragment_tower: Tower, head: DenseLayer) -> Result<Self> {
        check_head(
            &head,
            citing_tower.filters() + fragment_tower.filters(),
            ProvenanceLabel::count(),
        )?;
        Ok(Self {
            citing_tower,
            fragment_tower,
            head,
        })
    }

    pub fn init(seed: u64, dim: usize, window: usize, filters: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let citing_tower = Tower::init(&mut rng, window, dim, filters);
        let fragment_tower = Tower::init(&mut rng, window, dim, filters);
        let head = DenseLayer::init(&mut rng, 2 * filters, ProvenanceLabel::count());
        Self {
            citing_tower,
            fragment_tower,
            head,
        }
    }

    pub(crate) fn towers<'a>(
        &'a self,
        citing: Vec<&'a SequenceMatrix>,
        fragment: Vec<&'a SequenceMatrix>,
    ) -> Vec<TowerInput<'a>> {
        vec![
            TowerInput {
                name: "citing_tower",
                tower: &self.citing_tower,
                inputs: citing,
            },
            TowerInput {
                name: "fragment_tower",
                tower: &self.fragment_tower,
                inputs: fragment,
            },
        ]
    }
}

impl Parameterized for DcnnModel {
    fn visit(&self, f: &mut dyn FnMut(&str, ArrayViewD<f64>)) {
        self.citing_tower.visit("citing_tower", f);
        self.fragment_tower.visit("fragment_tower", f);
        visit_dense("head", &self.head, f);
    }

    fn visit_mut(&mut self, f: &mut dyn FnMut(&str, ArrayViewMutD<f64>)) {
        self.citing_tower.visit_mut("citing_tower", f);
        self.fragment_tower.visit_mut("fragment_tower", f);
        visit_dense_mut("head", &mut self.head, f);
    }
}

/// Probabilities over `{Prov, NonProv}` from the concatenated tower features.
pub fn dcnn_forward(model: &DcnnModel, citing: &SequenceMatrix, fragment: &SequenceMatrix) -> Result<Vec<f64>> {
    forward_probs(&model.towers(vec![citing], vec![fragment]), &model.head).map(column)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MtlModel {
    pub shared_citing_tower: Tower,
    pub fragment_tower: Tower,
    pub function_head: DenseLayer,
    pub provenance_head: DenseLayer,
}

pub const SHARED_TOWER: &str = "shared_citing_tower";
pub const FRAGMENT_TOWER: &str = "fragment_tower";
pub const FUNCTION_HEAD: &str = "function_head";
pub const PROVENANCE_HEAD: &str = "provenance_head";

impl MtlModel {
    pub fn new(
        shared_citing_tower: Tower,
        fragment_tower: Tower,
        function_head: DenseLayer,
        provenance_head: DenseLayer,
    ) -> Result<Self> {
        check_head(&function_head, shared_citing_tower.filters(), FunctionLabel::count())?;
        check_head(
            &provenance_head,
            shared_citing_tower.filters() + fragment_tower.filters(),
            ProvenanceLabel::count(),
        )?;
        Ok(Self {
            shared_citing_tower,
            fragment_tower,
            function_head,
            provenance_head,
        })
    }

    pub fn init(seed: u64, dim: usize, window: usize, filters: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shared_citing_tower = Tower::init(&mut rng, window, dim, filters);
        let fragment_tower = Tower::init(&mut rng, window, dim, filters);
        let function_head = DenseLayer::init(&mut rng, filters, FunctionLabel::count());
        let provenance_head = DenseLayer::init(&mut rng, 2 * filters, ProvenanceLabel::count());
        Self {
            shared_citing_tower,
            fragment_tower,
            function_head,
            provenance_head,
        }
    }

    pub(crate) fn function_towers<'a>(&'a self, citing: Vec<&'a SequenceMatrix>) -> Vec<TowerInput<'a>> {
        vec![TowerInput {
            name: SHARED_TOWER,
            tower: &self.shared_citing_tower,
            inputs: citing,
        }]
    }

    pub(crate) fn provenance_towers<'a>(
        &'a self,
        citing: Vec<&'a SequenceMatrix>,
        fragment: Vec<&'a SequenceMatrix>,
    ) -> Vec<TowerInput<'a>> {
        vec![
            TowerInput {
                name: SHARED_TOWER,
                tower: &self.shared_citing_tower,
                inputs: citing,
            },
            TowerInput {
                name: FRAGMENT_TOWER,
                tower: &self.fragment_tower,
                inputs: fragment,
            },
        ]
    }
}

impl Parameterized for MtlModel {
    fn visit(&self, f: &mut dyn FnMut(&str, ArrayViewD<f64>)) {
        self.shared_citing_tower.visit(SHARED_TOWER, f);
        self.fragment_tower.visit(FRAGMENT_TOWER, f);
        visit_dense(FUNCTION_HEAD, &self.function_head, f);
        visit_dense(PROVENANCE_HEAD, &self.provenance_head, f);
    }

    fn visit_mut(&mut self, f: &mut dyn FnMut(&str, ArrayViewMutD<f64>)) {
        self.shared_citing_tower.visit_mut(SHARED_TOWER, f);
        self.fragment_tower.visit_mut(FRAGMENT_TOWER, f);
        visit_dense_mut(FUNCTION_HEAD, &mut self.function_head, f);
        visit_dense_mut(PROVENANCE_HEAD, &mut self.provenance_head, f);
    }
}

/// Function-task probabilities through the shared tower.
pub fn mtl_function_forward(model: &MtlModel, citing: &SequenceMatrix) -> Result<Vec<f64>> {
    forward_probs(&model.function_towers(vec![citing]), &model.function_head).map(column)
}

/// Provenance-task probabilities through the shared and fragment towers.
pub fn mtl_provenance_forward(
    model: &MtlModel,
    citing: &SequenceMatrix,
    fragment: &SequenceMatrix,
) -> Result<Vec<f64>> {
    forward_probs(
        &model.provenance_towers(vec![citing], vec![fragment]),
        &model.provenance_head,
    )
    .map(column)
}
