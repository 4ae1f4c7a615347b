//! Loss functions, all expressed as tape graphs so that every model
//! trains through the same differentiation path.

use alloc::string::ToString;

#[cfg(not(feature = "std"))]
use num_traits::Float as _;

use crate::numcore::{Matrix, NumError, Result, Tape, Var};

/// Clamp bound for probabilities entering a logarithm.
pub const PROB_EPS: f64 = 1e-7;

/// Reconstruction loss selector: squared error for continuous data,
/// cross entropy for categorical data.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReconKind {
    Mse,
    Bce,
}

/// Latent regularizer selector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RegularizerKind {
    Kl,
    /// Gaussian-kernel discrepancy against prior samples; `bandwidth`
    /// is the kernel sigma.
    Mmd { bandwidth: f64 },
}

impl RegularizerKind {
    /// Default kernel bandwidth for a given latent width:
    /// `sigma^2 = ls / 2`.
    pub fn mmd_for_latent(latent: usize) -> Self {
        RegularizerKind::Mmd {
            bandwidth: (latent as f64 / 2.0).sqrt(),
        }
    }
}

/// Mean over all entries of the squared difference.
pub fn mse(tape: &mut Tape, x: Var, x_hat: Var) -> Result<Var> {
    let diff = tape.sub(x, x_hat)?;
    let sq = tape.mul(diff, diff)?;
    tape.mean_all(sq)
}

/// `-mean[x ln x_hat + (1 - x) ln(1 - x_hat)]` with `x_hat` clamped to
/// `[PROB_EPS, 1 - PROB_EPS]`. `x` must lie in `[0, 1]`.
pub fn bce(tape: &mut Tape, x: Var, x_hat: Var) -> Result<Var> {
    if tape.value(x).data().iter().any(|&v| !(0.0..=1.0).contains(&v)) {
        return Err(NumError::Contract(
            "bce: targets must lie in [0, 1]".to_string(),
        ));
    }
    let ln_p = tape.ln_clamped(x_hat, PROB_EPS, 1.0 - PROB_EPS)?;
    let one_minus_hat = tape.affine(x_hat, -1.0, 1.0)?;
    let ln_q = tape.ln_clamped(one_minus_hat, PROB_EPS, 1.0 - PROB_EPS)?;
    let one_minus_x = tape.affine(x, -1.0, 1.0)?;
    let pos = tape.mul(x, ln_p)?;
    let neg = tape.mul(one_minus_x, ln_q)?;
    let term = tape.add(pos, neg)?;
    let mean = tape.mean_all(term)?;
    tape.scale(mean, -1.0)
}

/// Closed-form divergence of a diagonal Gaussian from the unit
/// Gaussian: `0.5 * sum_f(exp(lv) + mu^2 - 1 - lv)`, averaged over the
/// batch rows.
pub fn kl_diag_gaussian(tape: &mut Tape, mu: Var, logvar: Var) -> Result<Var> {
    let e = tape.exp(logvar)?;
    let mu2 = tape.mul(mu, mu)?;
    let lv_plus_one = tape.affine(logvar, 1.0, 1.0)?;
    let sum = tape.add(e, mu2)?;
    let term = tape.sub(sum, lv_plus_one)?;
    let per_row = tape.row_sums(term);
    let mean = tape.mean_all(per_row)?;
    tape.scale(mean, 0.5)
}

/// Squared pairwise distances between the rows of `a` and the rows of
/// `b`, as a tape node.
fn pairwise_sq_dists(tape: &mut Tape, a: Var, b: Var) -> Result<Var> {
    let aa = tape.mul(a, a)?;
    let aa = tape.row_sums(aa); // n x 1
    let bb = tape.mul(b, b)?;
    let bb = tape.row_sums(bb);
    let bb_row = tape.transpose(bb); // 1 x m
    let bt = tape.transpose(b);
    let ab = tape.matmul(a, bt)?;
    let d = tape.scale(ab, -2.0)?;
    let d = tape.add_broadcast(d, aa)?;
    tape.add_broadcast(d, bb_row)
}

/// Gaussian-kernel maximum mean discrepancy between two equally sized
/// sample sets.
///
/// Uses the paired estimator: diagonal pairs are excluded from the two
/// same-set terms and the matched pairs `(i, i)` are excluded from the
/// cross term, so two elementwise-identical sets score exactly zero.
pub fn mmd(tape: &mut Tape, z: Var, prior: Var, bandwidth: f64) -> Result<Var> {
    let n = tape.value(z).rows();
    if tape.value(prior).rows() != n {
        return Err(NumError::Dim {
            op: "mmd",
            lhs: tape.value(z).shape(),
            rhs: tape.value(prior).shape(),
        });
    }
    if n < 2 {
        return Err(NumError::Contract(
            "mmd needs at least 2 samples per set".to_string(),
        ));
    }
    if !(bandwidth > 0.0) {
        return Err(NumError::Contract("mmd bandwidth must be > 0".to_string()));
    }
    let gamma = -1.0 / (2.0 * bandwidth * bandwidth);
    let off_diag = Matrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { 1.0 })?;
    let denom = (n * (n - 1)) as f64;

    let kernel_mean = |tape: &mut Tape, a: Var, b: Var| -> Result<Var> {
        let d2 = pairwise_sq_dists(tape, a, b)?;
        let scaled = tape.scale(d2, gamma)?;
        let k = tape.exp(scaled)?;
        let masked = tape.mul_const(k, off_diag.clone())?;
        let total = tape.sum_all(masked)?;
        tape.scale(total, 1.0 / denom)
    };

    let k_zz = kernel_mean(tape, z, z)?;
    let k_pp = kernel_mean(tape, prior, prior)?;
    let k_zp = kernel_mean(tape, z, prior)?;
    let same = tape.add(k_zz, k_pp)?;
    let cross = tape.scale(k_zp, -2.0)?;
    tape.add(same, cross)
}

/// Inputs to the latent regularizer of [`vae_loss`].
pub enum RegTerm {
    Kl { mu: Var, logvar: Var },
    Mmd { z: Var, prior: Var, bandwidth: f64 },
}

/// Composite objective `recon + beta * regularizer`.
pub fn vae_loss(
    tape: &mut Tape,
    x: Var,
    x_hat: Var,
    recon: ReconKind,
    reg: RegTerm,
    beta: f64,
) -> Result<Var> {
    if beta < 0.0 {
        return Err(NumError::Contract("beta must be >= 0".to_string()));
    }
    let recon_term = match recon {
        ReconKind::Mse => mse(tape, x, x_hat)?,
        ReconKind::Bce => bce(tape, x, x_hat)?,
    };
    let reg_term = match reg {
        RegTerm::Kl { mu, logvar } => kl_diag_gaussian(tape, mu, logvar)?,
        RegTerm::Mmd { z, prior, bandwidth } => mmd(tape, z, prior, bandwidth)?,
    };
    let weighted = tape.scale(reg_term, beta)?;
    tape.add(recon_term, weighted)
}

/// Adjacency reconstruction term of the graph autoencoder objective:
/// positively weighted cross entropy between `sigmoid(Z Z^T)` and the
/// self-looped binary target, with positive-class weight
/// `(N^2 - |pos|) / |pos|`.
pub fn vgae_recon(tape: &mut Tape, z: Var, a_target: &Matrix) -> Result<Var> {
    let n = tape.value(z).rows();
    if a_target.shape() != (n, n) {
        return Err(NumError::Dim {
            op: "vgae_recon",
            lhs: (n, n),
            rhs: a_target.shape(),
        });
    }
    if a_target.data().iter().any(|&v| v != 0.0 && v != 1.0) {
        return Err(NumError::Contract(
            "vgae_recon: target adjacency must be binary".to_string(),
        ));
    }
    let positives = a_target.data().iter().filter(|&&v| v == 1.0).count();
    if positives == 0 {
        return Err(NumError::Contract(
            "vgae_recon: target adjacency has no positive entries".to_string(),
        ));
    }
    let total = (n * n) as f64;
    let pos_weight = (total - positives as f64) / positives as f64;

    let zt = tape.transpose(z);
    let logits = tape.matmul(z, zt)?;
    let p = tape.sigmoid(logits)?;
    let ln_p = tape.ln_clamped(p, PROB_EPS, 1.0 - PROB_EPS)?;
    let one_minus_p = tape.affine(p, -1.0, 1.0)?;
    let ln_q = tape.ln_clamped(one_minus_p, PROB_EPS, 1.0 - PROB_EPS)?;

    let pos_mask = a_target.scale(pos_weight)?;
    let neg_mask = a_target.affine(-1.0, 1.0)?;
    let pos = tape.mul_const(ln_p, pos_mask)?;
    let neg = tape.mul_const(ln_q, neg_mask)?;
    let term = tape.add(pos, neg)?;
    let mean = tape.mean_all(term)?;
    let recon = tape.scale(mean, -1.0)?;
    Ok(recon)
}

/// Full graph autoencoder objective: [`vgae_recon`] plus the
/// per-node-averaged Gaussian divergence.
pub fn vgae_loss(tape: &mut Tape, z: Var, mu: Var, logvar: Var, a_target: &Matrix) -> Result<Var> {
    let recon = vgae_recon(tape, z, a_target)?;
    let kl = kl_diag_gaussian(tape, mu, logvar)?;
    tape.add(recon, kl)
}

/// Noise-contrastive objective over discriminator scores:
/// `-(sum ln pos + sum ln(1 - neg)) / (N + M)`. Scores must already be
/// sigmoid outputs.
pub fn dgi_loss(tape: &mut Tape, pos_scores: Var, neg_scores: Var) -> Result<Var> {
    let n = tape.value(pos_scores).len();
    let m = tape.value(neg_scores).len();
    if n == 0 || m == 0 {
        return Err(NumError::Contract(
            "dgi_loss needs non-empty score sets".to_string(),
        ));
    }
    let ln_pos = tape.ln_clamped(pos_scores, PROB_EPS, 1.0 - PROB_EPS)?;
    let sum_pos = tape.sum_all(ln_pos)?;
    let one_minus_neg = tape.affine(neg_scores, -1.0, 1.0)?;
    let ln_neg = tape.ln_clamped(one_minus_neg, PROB_EPS, 1.0 - PROB_EPS)?;
    let sum_neg = tape.sum_all(ln_neg)?;
    let total = tape.add(sum_pos, sum_neg)?;
    tape.scale(total, -1.0 / (n + m) as f64)
}
