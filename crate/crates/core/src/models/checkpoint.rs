use std::fs;
use std::path::Path;

use ndarray::{ArrayViewD, ArrayViewMutD, Ix2};
use serde::{Deserialize, Serialize};

use super::{CnnModel, DcnnModel, Featurizer, MtlModel, Parameterized};
use crate::error::{Error, Result};
use crate::nn::checkpoint::TensorContainer;
use crate::text::{EmbeddingTable, Vocabulary};
use crate::util::write_atomic;

pub const CHECKPOINT_FILE: &str = "checkpoint.json";
pub const VOCAB_FILE: &str = "vocab.jsonl";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Cnn,
    Dcnn,
    Mtl,
}

/// Everything needed to rebuild a network around its stored tensors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchitectureDescriptor {
    pub kind: ModelKind,
    pub window: usize,
    pub filters: usize,
    pub dim: usize,
    pub citing_width: usize,
    pub fragment_width: usize,
    /// Vocabulary file, relative to the checkpoint.
    pub vocabulary: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum NeuralModel {
    Cnn(CnnModel),
    Dcnn(DcnnModel),
    Mtl(MtlModel),
}

impl NeuralModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            Self::Cnn(_) => ModelKind::Cnn,
            Self::Dcnn(_) => ModelKind::Dcnn,
            Self::Mtl(_) => ModelKind::Mtl,
        }
    }

    fn init(kind: ModelKind, dim: usize, window: usize, filters: usize) -> Self {
        match kind {
            ModelKind::Cnn => Self::Cnn(CnnModel::init(0, dim, window, filters)),
            ModelKind::Dcnn => Self::Dcnn(DcnnModel::init(0, dim, window, filters)),
            ModelKind::Mtl => Self::Mtl(MtlModel::init(0, dim, window, filters)),
        }
    }

    fn inner(&self) -> &dyn Parameterized {
        match self {
            Self::Cnn(m) => m,
            Self::Dcnn(m) => m,
            Self::Mtl(m) => m,
        }
    }

    fn inner_mut(&mut self) -> &mut dyn Parameterized {
        match self {
            Self::Cnn(m) => m,
            Self::Dcnn(m) => m,
            Self::Mtl(m) => m,
        }
    }
}

impl Parameterized for NeuralModel {
    fn visit(&self, f: &mut dyn FnMut(&str, ArrayViewD<f64>)) {
        self.inner().visit(f)
    }

    fn visit_mut(&mut self, f: &mut dyn FnMut(&str, ArrayViewMutD<f64>)) {
        self.inner_mut().visit_mut(f)
    }
}

/// On-disk form: `checkpoint.json` holds the descriptor, the parameter
/// tensors and the embedding rows of the vocabulary (row 0 is padding);
/// `vocab.jsonl` sits next to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelCheckpoint {
    pub architecture: ArchitectureDescriptor,
    pub parameters: TensorContainer,
    pub embeddings: TensorContainer,
}

impl ModelCheckpoint {
    pub fn new(model: &NeuralModel, featurizer: &Featurizer, window: usize, filters: usize) -> Self {
        let mut embeddings = TensorContainer::default();
        embeddings.push("rows", featurizer.table.rows_for(&featurizer.vocab).view().into_dyn());
        Self {
            architecture: ArchitectureDescriptor {
                kind: model.kind(),
                window,
                filters,
                dim: featurizer.table.dim(),
                citing_width: featurizer.citing_width,
                fragment_width: featurizer.fragment_width,
                vocabulary: VOCAB_FILE.to_string(),
            },
            parameters: model.to_container(),
            embeddings,
        }
    }

    /// Writes `checkpoint.json` and the vocabulary into `dir`.
    pub fn save(&self, dir: &Path, vocab: &Vocabulary) -> Result<()> {
        write_atomic(&dir.join(&self.architecture.vocabulary), vocab.to_jsonl().as_bytes())?;
        write_atomic(&dir.join(CHECKPOINT_FILE), serde_json::to_string(self)?.as_bytes())
    }

    /// Reads a checkpoint file, or `checkpoint.json` inside a directory.
    pub fn load(path: &Path) -> Result<(NeuralModel, Featurizer)> {
        let file = if path.is_dir() {
            path.join(CHECKPOINT_FILE)
        } else {
            path.to_path_buf()
        };
        let text = fs::read_to_string(&file).map_err(|e| Error::io(&file, e))?;
        let ckpt: ModelCheckpoint = serde_json::from_str(&text)?;
        let arch = &ckpt.architecture;
        let vocab_path = file.parent().unwrap_or(Path::new(".")).join(&arch.vocabulary);
        let vocab_text = fs::read_to_string(&vocab_path).map_err(|e| Error::io(&vocab_path, e))?;
        let vocab = Vocabulary::from_jsonl(&vocab_text)?;
        let rows = ckpt
            .embeddings
            .get("rows")?
            .into_dimensionality::<Ix2>()
            .map_err(|e| Error::shape(e.to_string()))?;
        let table = EmbeddingTable::from_rows(&vocab, &rows)?;
        let mut model = NeuralModel::init(arch.kind, arch.dim, arch.window, arch.filters);
        model.load_container(&ckpt.parameters)?;
        let featurizer = Featurizer {
            vocab,
            table,
            citing_width: arch.citing_width,
            fragment_width: arch.fragment_width,
        };
        Ok((model, featurizer))
    }
}
