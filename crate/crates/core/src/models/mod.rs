//! The integration model zoo.
//!
//! Two plain variational models ([`CncVae`], [`HVae`]) and four graph
//! models ([`CncVgae`], [`CncDgi`], [`TwoGraphDgi`], [`HeteroDgi`]).
//! Every model trains unsupervised and exposes a deterministic
//! `encode` producing an `N x ls` embedding row-aligned with its
//! inputs.

mod dgi;
mod vae;
mod vgae;

pub use dgi::{
    apply_corruption, build_hetero_graph, corrupt_rows, CncDgi, HeteroDgi, TwoGraphDgi,
};
pub use vae::{CncVae, HVae, VaeSpec};
pub use vgae::{binary_adjacency_with_loops, CncVgae};

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::graphbuild::{GraphError, GraphStats};
use crate::nn::RegularizerKind;
use crate::numcore::{Matrix, NumError};

#[derive(Clone, Debug, PartialEq)]
pub enum ModelError {
    Num(NumError),
    Graph(GraphError),
    Contract(String),
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::Num(e) => write!(f, "{e}"),
            ModelError::Graph(e) => write!(f, "{e}"),
            ModelError::Contract(msg) => write!(f, "{msg}"),
        }
    }
}

impl core::error::Error for ModelError {}

impl From<NumError> for ModelError {
    fn from(e: NumError) -> Self {
        ModelError::Num(e)
    }
}

impl From<GraphError> for ModelError {
    fn from(e: GraphError) -> Self {
        ModelError::Graph(e)
    }
}

pub type Result<T> = core::result::Result<T, ModelError>;

/// Which of the six architectures to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    CncVae,
    HVae,
    CncVgae,
    CncDgi,
    TwoGraphDgi,
    HeteroDgi,
}

impl ModelKind {
    pub const ALL: [ModelKind; 6] = [
        ModelKind::CncVae,
        ModelKind::HVae,
        ModelKind::CncVgae,
        ModelKind::CncDgi,
        ModelKind::TwoGraphDgi,
        ModelKind::HeteroDgi,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::CncVae => "cnc-vae",
            ModelKind::HVae => "h-vae",
            ModelKind::CncVgae => "cnc-vgae",
            ModelKind::CncDgi => "cnc-dgi",
            ModelKind::TwoGraphDgi => "2g-dgi",
            ModelKind::HeteroDgi => "hetero-dgi",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|k| k.name() == s)
    }

    /// True for the models that consume graphs.
    pub fn is_graph_model(&self) -> bool {
        !matches!(self, ModelKind::CncVae | ModelKind::HVae)
    }

    /// True for the models that build one graph per modality.
    pub fn uses_per_modality_graphs(&self) -> bool {
        matches!(self, ModelKind::TwoGraphDgi | ModelKind::HeteroDgi)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Mid-training merge of two `N x ls` latent blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Integration {
    /// Parameter-free element average.
    Average,
    /// A learnable `2ls -> ls` dense layer on the concatenation.
    Dense,
}

/// Hyper-parameters shared by the graph models.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphModelSpec {
    /// Number of graph convolutions in the encoder (1..=3).
    pub conv_layers: usize,
    /// Embedding width `ls`.
    pub latent_size: usize,
    /// Width of dense layers (hetero projection, VGAE hidden).
    pub dense_size: usize,
    /// Latent merge used by the two-branch models.
    pub integration: Integration,
    /// Latent regularizer; only the adjacency-reconstruction model
    /// reads it.
    pub reg: RegularizerKind,
    pub epochs: usize,
    pub learning_rate: f64,
}

impl Default for GraphModelSpec {
    fn default() -> Self {
        Self {
            conv_layers: 2,
            latent_size: 64,
            dense_size: 128,
            integration: Integration::Average,
            reg: RegularizerKind::Kl,
            epochs: 150,
            learning_rate: 0.001,
        }
    }
}

impl GraphModelSpec {
    /// Per-architecture defaults: the depth and integration each model
    /// worked best with.
    pub fn for_kind(kind: ModelKind) -> Self {
        match kind {
            ModelKind::CncVgae => Self {
                conv_layers: 3,
                reg: RegularizerKind::Kl,
                ..Self::default()
            },
            ModelKind::HeteroDgi => Self {
                integration: Integration::Dense,
                ..Self::default()
            },
            _ => Self::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.conv_layers) {
            return Err(ModelError::Contract(format!(
                "conv_layers must be in 1..=3, got {}",
                self.conv_layers
            )));
        }
        if self.latent_size == 0 || self.dense_size == 0 {
            return Err(ModelError::Contract(
                "latent_size and dense_size must be positive".into(),
            ));
        }
        if self.epochs == 0 {
            return Err(ModelError::Contract("epochs must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(ModelError::Contract("learning_rate must be > 0".into()));
        }
        if let RegularizerKind::Mmd { bandwidth } = self.reg {
            if !(bandwidth > 0.0) {
                return Err(ModelError::Contract("mmd bandwidth must be > 0".into()));
            }
        }
        Ok(())
    }
}

/// An `N x ls` embedding plus a record of where it came from.
#[derive(Clone, Debug)]
pub struct Embedding {
    /// Row `i` corresponds to input object `i`.
    pub h: Matrix,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, Default)]
pub struct Provenance {
    pub model: String,
    pub spec_summary: String,
    /// Stats of the graph(s) the model consumed; empty for the plain
    /// variational models.
    pub graph_stats: Vec<GraphStats>,
    /// Per-epoch training losses (one sequence per trained network).
    pub loss_history: Vec<Vec<f64>>,
}

impl Embedding {
    pub fn latent_dim(&self) -> usize {
        self.h.cols()
    }

    pub fn n_rows(&self) -> usize {
        self.h.rows()
    }
}
