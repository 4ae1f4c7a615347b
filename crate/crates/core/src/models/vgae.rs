//! Variational graph autoencoder over the graph built on concatenated
//! inputs: shared graph convolutions, convolutional mean/log-variance
//! heads, inner-product decoding against the self-looped adjacency.

use alloc::format;
use alloc::vec::Vec;

use super::{GraphModelSpec, ModelError, Result};
use crate::graphbuild::NormalizedAdjacency;
use crate::nn::losses::{kl_diag_gaussian, mmd, vgae_recon};
use crate::nn::{standard_normal_matrix, Gcn, LayerActivation, RegularizerKind};
use crate::numcore::{Matrix, Tape, Var};
use crate::rng::{streams, SplitRng};

#[derive(Clone, Debug)]
pub struct CncVgae {
    shared: Vec<Gcn>,
    mu_head: Gcn,
    loss_history: Vec<f64>,
}

impl CncVgae {
    /// `a_target` is the binary adjacency with unit self-loops that the
    /// inner product decodes against.
    pub fn train(
        x: &Matrix,
        adj: &NormalizedAdjacency,
        a_target: &Matrix,
        spec: &GraphModelSpec,
        seed: u64,
    ) -> Result<Self> {
        spec.validate()?;
        let n = x.rows();
        if adj.n_nodes() != n {
            return Err(ModelError::Contract(format!(
                "adjacency over {} nodes does not match {n} feature rows",
                adj.n_nodes()
            )));
        }
        let ls = spec.latent_size;
        let ds = spec.dense_size;
        let lr = spec.learning_rate;
        let mut init_rng = SplitRng::derive(seed, streams::INIT);

        // `conv_layers` counts every convolution stage including the
        // parallel heads: depth d means d - 1 shared layers.
        let shared_count = spec.conv_layers - 1;
        let mut shared = Vec::with_capacity(shared_count);
        for i in 0..shared_count {
            let fan_in = if i == 0 { x.cols() } else { ds };
            shared.push(Gcn::new(fan_in, ds, LayerActivation::PRelu, lr, &mut init_rng));
        }
        let head_in = if shared_count == 0 { x.cols() } else { ds };
        let mut mu_head = Gcn::new(head_in, ls, LayerActivation::Linear, lr, &mut init_rng);
        let mut logvar_head = Gcn::new(head_in, ls, LayerActivation::Linear, lr, &mut init_rng);

        let mut eps_rng = SplitRng::derive(seed, streams::REPARAM);
        let mut prior_rng = SplitRng::derive(seed, streams::PRIOR);
        let mut loss_history = Vec::with_capacity(spec.epochs);

        for _ in 0..spec.epochs {
            let mut tape = Tape::new();
            let adj_var = tape.leaf(adj.matrix().clone());
            let mut h = tape.leaf(x.clone());
            let shared_vars: Vec<_> = shared.iter().map(|l| l.push(&mut tape)).collect();
            let mu_vars = mu_head.push(&mut tape);
            let lv_vars = logvar_head.push(&mut tape);

            for (layer, vars) in shared.iter().zip(&shared_vars) {
                h = layer.forward(&mut tape, vars, adj_var, h)?;
            }
            let mu = mu_head.forward(&mut tape, &mu_vars, adj_var, h)?;
            let logvar = logvar_head.forward(&mut tape, &lv_vars, adj_var, h)?;
            let z = reparametrize(&mut tape, mu, logvar, &mut eps_rng)?;

            let recon = vgae_recon(&mut tape, z, a_target)?;
            let reg = match spec.reg {
                RegularizerKind::Kl => kl_diag_gaussian(&mut tape, mu, logvar)?,
                RegularizerKind::Mmd { bandwidth } => {
                    let prior = tape.leaf(standard_normal_matrix(n, ls, &mut prior_rng));
                    mmd(&mut tape, z, prior, bandwidth)?
                }
            };
            let loss = tape.add(recon, reg)?;
            tape.backward(loss)?;

            for (layer, vars) in shared.iter_mut().zip(&shared_vars) {
                layer.apply_grads(&tape, vars)?;
            }
            mu_head.apply_grads(&tape, &mu_vars)?;
            logvar_head.apply_grads(&tape, &lv_vars)?;
            loss_history.push(tape.value(loss).as_scalar()?);
        }

        Ok(Self {
            shared,
            mu_head,
            loss_history,
        })
    }

    /// Deterministic embedding: the posterior mean.
    pub fn encode(&self, x: &Matrix, adj: &NormalizedAdjacency) -> Result<Matrix> {
        if adj.n_nodes() != x.rows() {
            return Err(ModelError::Contract(
                "encode inputs do not match the trained graph".into(),
            ));
        }
        let mut tape = Tape::new();
        let adj_var = tape.leaf(adj.matrix().clone());
        let mut h = tape.leaf(x.clone());
        let shared_vars: Vec<_> = self.shared.iter().map(|l| l.push(&mut tape)).collect();
        let mu_vars = self.mu_head.push(&mut tape);
        for (layer, vars) in self.shared.iter().zip(&shared_vars) {
            h = layer.forward(&mut tape, vars, adj_var, h)?;
        }
        let mu = self.mu_head.forward(&mut tape, &mu_vars, adj_var, h)?;
        Ok(tape.value(mu).clone())
    }

    pub fn loss_history(&self) -> &[f64] {
        &self.loss_history
    }
}

fn reparametrize(
    tape: &mut Tape,
    mu: Var,
    logvar: Var,
    eps_rng: &mut SplitRng,
) -> crate::numcore::Result<Var> {
    let (rows, cols) = tape.value(mu).shape();
    let half = tape.scale(logvar, 0.5)?;
    let std = tape.exp(half)?;
    let eps = standard_normal_matrix(rows, cols, eps_rng);
    let noise = tape.mul_const(std, eps)?;
    tape.add(mu, noise)
}

/// Binary adjacency with unit self-loops, the decoding target.
pub fn binary_adjacency_with_loops(graph: &crate::graphbuild::Graph) -> Matrix {
    let n = graph.n_nodes();
    let mut a = Matrix::zeros(n, n);
    for &(i, j) in graph.edges() {
        a.set(i, j, 1.0);
        a.set(j, i, 1.0);
    }
    for i in 0..n {
        a.set(i, i, 1.0);
    }
    a
}
