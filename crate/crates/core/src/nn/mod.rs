//! Neural building blocks: layers and loss functions.

pub mod layers;
pub mod losses;

pub use layers::{
    dropout, glorot_uniform, standard_normal_matrix, BatchNorm, Dense, GaussianHead, Gcn,
    LayerActivation, DROPOUT_RATE,
};
pub use losses::{
    bce, dgi_loss, kl_diag_gaussian, mmd, mse, vae_loss, vgae_loss, vgae_recon, RegTerm, ReconKind,
    RegularizerKind, PROB_EPS,
};
