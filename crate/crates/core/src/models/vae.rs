//! Variational autoencoders over concatenated or hierarchically
//! integrated feature blocks.

use alloc::vec::Vec;
use alloc::{format, vec};

use super::{ModelError, Result};
use crate::nn::losses::{bce, kl_diag_gaussian, mmd, mse};
use crate::nn::{
    dropout, standard_normal_matrix, BatchNorm, Dense, GaussianHead, LayerActivation, ReconKind,
    RegularizerKind, DROPOUT_RATE,
};
use crate::numcore::{Matrix, Tape, Var};
use crate::rng::{derive_seed, streams, SplitRng};

/// Hyper-parameters of the plain variational models.
#[derive(Clone, Debug, PartialEq)]
pub struct VaeSpec {
    /// Dense layer width `ds`, one of {128, 256, 512}.
    pub dense_size: usize,
    /// Latent width `ls`, one of {32, 64}.
    pub latent_size: usize,
    /// Weight of the latent regularizer, one of {1, 25, 50, 100}.
    pub beta: f64,
    /// Reconstruction loss per input block; `None` derives it from the
    /// block's categorical flag.
    pub recon_override: Option<Vec<ReconKind>>,
    pub reg: RegularizerKind,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
}

impl Default for VaeSpec {
    fn default() -> Self {
        Self {
            dense_size: 128,
            latent_size: 32,
            beta: 25.0,
            recon_override: None,
            reg: RegularizerKind::mmd_for_latent(32),
            epochs: 150,
            batch_size: 64,
            learning_rate: 0.001,
        }
    }
}

impl VaeSpec {
    pub fn validate(&self) -> Result<()> {
        if ![128, 256, 512].contains(&self.dense_size) {
            return Err(ModelError::Contract(format!(
                "dense_size must be one of 128/256/512, got {}",
                self.dense_size
            )));
        }
        if ![32, 64].contains(&self.latent_size) {
            return Err(ModelError::Contract(format!(
                "latent_size must be 32 or 64, got {}",
                self.latent_size
            )));
        }
        if ![1.0, 25.0, 50.0, 100.0].contains(&self.beta) {
            return Err(ModelError::Contract(format!(
                "beta must be one of 1/25/50/100, got {}",
                self.beta
            )));
        }
        if self.epochs == 0 {
            return Err(ModelError::Contract("epochs must be >= 1".into()));
        }
        if self.batch_size < 2 {
            return Err(ModelError::Contract("batch_size must be >= 2".into()));
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

/// One encoder/decoder pair over a list of feature blocks. The encoder
/// sees the concatenation; the decoder reconstructs each block through
/// its own output head so the reconstruction loss can be split per
/// block and summed.
#[derive(Clone, Debug)]
pub(crate) struct VaeNet {
    enc: Dense,
    enc_bn: BatchNorm,
    head: GaussianHead,
    dec: Dense,
    dec_bn: BatchNorm,
    outs: Vec<Dense>,
    recon: Vec<ReconKind>,
    spec: VaeSpec,
}

impl VaeNet {
    fn init(block_dims: &[usize], recon: Vec<ReconKind>, spec: &VaeSpec, seed: u64) -> Self {
        let mut rng = SplitRng::derive(seed, streams::INIT);
        let total: usize = block_dims.iter().sum();
        let lr = spec.learning_rate;
        let enc = Dense::new(total, spec.dense_size, LayerActivation::Elu, lr, &mut rng);
        let enc_bn = BatchNorm::new(spec.dense_size, lr);
        let head = GaussianHead::new(spec.dense_size, spec.latent_size, lr, &mut rng);
        let dec = Dense::new(
            spec.latent_size,
            spec.dense_size,
            LayerActivation::Elu,
            lr,
            &mut rng,
        );
        let dec_bn = BatchNorm::new(spec.dense_size, lr);
        let outs = block_dims
            .iter()
            .zip(&recon)
            .map(|(&dim, kind)| {
                let act = match kind {
                    ReconKind::Bce => LayerActivation::Sigmoid,
                    ReconKind::Mse => LayerActivation::Linear,
                };
                Dense::new(spec.dense_size, dim, act, lr, &mut rng)
            })
            .collect();
        Self {
            enc,
            enc_bn,
            head,
            dec,
            dec_bn,
            outs,
            recon,
            spec: spec.clone(),
        }
    }

    /// Train on full blocks; returns the per-epoch mean batch loss.
    fn train(&mut self, blocks: &[&Matrix], seed: u64) -> Result<Vec<f64>> {
        let n = blocks[0].rows();
        let concat = concat_blocks(blocks)?;
        let mut batch_rng = SplitRng::derive(seed, streams::BATCH);
        let mut drop_rng = SplitRng::derive(seed, streams::DROPOUT);
        let mut eps_rng = SplitRng::derive(seed, streams::REPARAM);
        let mut prior_rng = SplitRng::derive(seed, streams::PRIOR);

        let mut history = Vec::with_capacity(self.spec.epochs);
        for _ in 0..self.spec.epochs {
            let order = batch_rng.permutation(n);
            let mut epoch_loss = 0.0;
            let mut batches = 0.0;
            for chunk in chunks_min2(&order, self.spec.batch_size) {
                let loss = self.train_step(
                    &concat,
                    blocks,
                    &chunk,
                    &mut drop_rng,
                    &mut eps_rng,
                    &mut prior_rng,
                )?;
                epoch_loss += loss;
                batches += 1.0;
            }
            history.push(epoch_loss / batches);
        }
        Ok(history)
    }

    fn train_step(
        &mut self,
        concat: &Matrix,
        blocks: &[&Matrix],
        rows: &[usize],
        drop_rng: &mut SplitRng,
        eps_rng: &mut SplitRng,
        prior_rng: &mut SplitRng,
    ) -> Result<f64> {
        let b = rows.len();
        let ls = self.spec.latent_size;
        let mut tape = Tape::new();

        let x = tape.leaf(concat.gather_rows(rows)?);
        let enc_vars = self.enc.push(&mut tape);
        let enc_bn_vars = self.enc_bn.push(&mut tape);
        let head_vars = self.head.push(&mut tape);
        let dec_vars = self.dec.push(&mut tape);
        let dec_bn_vars = self.dec_bn.push(&mut tape);
        let out_vars: Vec<_> = self.outs.iter().map(|o| o.push(&mut tape)).collect();

        let h = self.enc.forward(&mut tape, &enc_vars, x)?;
        let h = self.enc_bn.forward_train(&mut tape, &enc_bn_vars, h)?;
        let h = dropout(&mut tape, h, DROPOUT_RATE, true, drop_rng)?;
        let eps = standard_normal_matrix(b, ls, eps_rng);
        let sample = self.head.forward(&mut tape, &head_vars, h, eps)?;

        let d = self.dec.forward(&mut tape, &dec_vars, sample.z)?;
        let d = self.dec_bn.forward_train(&mut tape, &dec_bn_vars, d)?;
        let d = dropout(&mut tape, d, DROPOUT_RATE, true, drop_rng)?;

        let mut recon_total: Option<Var> = None;
        for ((block, out), (kind, vars)) in blocks
            .iter()
            .zip(&self.outs)
            .zip(self.recon.iter().zip(&out_vars))
        {
            let target = tape.leaf(block.gather_rows(rows)?);
            let x_hat = out.forward(&mut tape, vars, d)?;
            let term = match kind {
                ReconKind::Mse => mse(&mut tape, target, x_hat)?,
                ReconKind::Bce => bce(&mut tape, target, x_hat)?,
            };
            recon_total = Some(match recon_total {
                Some(acc) => tape.add(acc, term)?,
                None => term,
            });
        }
        let recon = recon_total.expect("at least one block");

        let reg = match self.spec.reg {
            RegularizerKind::Kl => kl_diag_gaussian(&mut tape, sample.mu, sample.logvar)?,
            RegularizerKind::Mmd { bandwidth } => {
                let prior = tape.leaf(standard_normal_matrix(b, ls, prior_rng));
                mmd(&mut tape, sample.z, prior, bandwidth)?
            }
        };
        let weighted = tape.scale(reg, self.spec.beta)?;
        let loss = tape.add(recon, weighted)?;
        tape.backward(loss)?;

        self.enc.apply_grads(&tape, &enc_vars)?;
        self.enc_bn.apply_grads(&tape, &enc_bn_vars)?;
        self.head.apply_grads(&tape, &head_vars)?;
        self.dec.apply_grads(&tape, &dec_vars)?;
        self.dec_bn.apply_grads(&tape, &dec_bn_vars)?;
        for (out, vars) in self.outs.iter_mut().zip(&out_vars) {
            out.apply_grads(&tape, vars)?;
        }
        Ok(tape.value(loss).as_scalar()?)
    }

    /// Deterministic eval-mode encoding: running batch-norm stats, no
    /// dropout, and the posterior mean instead of a sample.
    fn encode(&self, blocks: &[&Matrix]) -> Result<Matrix> {
        let concat = concat_blocks(blocks)?;
        let mut tape = Tape::new();
        let x = tape.leaf(concat);
        let enc_vars = self.enc.push(&mut tape);
        let enc_bn_vars = self.enc_bn.push(&mut tape);
        let head_vars = self.head.push(&mut tape);
        let h = self.enc.forward(&mut tape, &enc_vars, x)?;
        let h = self.enc_bn.forward_eval(&mut tape, &enc_bn_vars, h)?;
        let rows = tape.value(h).rows();
        let sample = self
            .head
            .forward(&mut tape, &head_vars, h, Matrix::zeros(rows, self.spec.latent_size))?;
        Ok(tape.value(sample.mu).clone())
    }
}

fn concat_blocks(blocks: &[&Matrix]) -> Result<Matrix> {
    let mut iter = blocks.iter();
    let first = iter
        .next()
        .ok_or_else(|| ModelError::Contract("at least one input block required".into()))?;
    let mut acc = (*first).clone();
    for block in iter {
        acc = acc.concat_cols(block)?;
    }
    Ok(acc)
}

/// Row-index chunks of size `batch`; a trailing chunk of one row is
/// merged into its predecessor (the regularizer needs two samples).
fn chunks_min2(order: &[usize], batch: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for chunk in order.chunks(batch) {
        out.push(chunk.to_vec());
    }
    if out.len() >= 2 && out.last().is_some_and(|c| c.len() < 2) {
        let last = out.pop().expect("non-empty");
        out.last_mut().expect("non-empty").extend(last);
    }
    out
}

/// Early-integration model: both feature matrices are concatenated and
/// a single variational network is trained on the result. The
/// embedding is the posterior mean.
#[derive(Clone, Debug)]
pub struct CncVae {
    net: VaeNet,
    loss_history: Vec<f64>,
}

impl CncVae {
    pub fn train(
        x1: &Matrix,
        x2: &Matrix,
        recon: (ReconKind, ReconKind),
        spec: &VaeSpec,
        seed: u64,
    ) -> Result<Self> {
        spec.validate()?;
        if x1.rows() != x2.rows() {
            return Err(ModelError::Contract(format!(
                "input row counts differ: {} vs {}",
                x1.rows(),
                x2.rows()
            )));
        }
        let recon = match &spec.recon_override {
            Some(kinds) if kinds.len() == 2 => vec![kinds[0], kinds[1]],
            Some(kinds) => {
                return Err(ModelError::Contract(format!(
                    "recon_override has {} kinds for 2 blocks",
                    kinds.len()
                )))
            }
            None => vec![recon.0, recon.1],
        };
        let mut net = VaeNet::init(&[x1.cols(), x2.cols()], recon, spec, seed);
        let loss_history = net.train(&[x1, x2], seed)?;
        Ok(Self { net, loss_history })
    }

    pub fn encode(&self, x1: &Matrix, x2: &Matrix) -> Result<Matrix> {
        self.net.encode(&[x1, x2])
    }

    pub fn loss_history(&self) -> &[f64] {
        &self.loss_history
    }
}

/// Hierarchical model: one low-level network per modality, then a
/// high-level network over the concatenated posterior means. Trains
/// `modalities + 1` networks in total.
#[derive(Clone, Debug)]
pub struct HVae {
    low: Vec<VaeNet>,
    high: VaeNet,
    loss_histories: Vec<Vec<f64>>,
}

impl HVae {
    pub fn train(modalities: &[(&Matrix, ReconKind)], spec: &VaeSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        if modalities.len() < 2 {
            return Err(ModelError::Contract(
                "hierarchical integration needs at least 2 modalities".into(),
            ));
        }
        let n = modalities[0].0.rows();
        if modalities.iter().any(|(m, _)| m.rows() != n) {
            return Err(ModelError::Contract("modalities must share row count".into()));
        }

        let mut loss_histories = Vec::new();
        let mut low = Vec::new();
        let mut mus: Vec<Matrix> = Vec::new();
        for (idx, (x, kind)) in modalities.iter().enumerate() {
            let child_seed = derive_seed(seed, 0x10 + idx as u64);
            let mut net = VaeNet::init(&[x.cols()], vec![*kind], spec, child_seed);
            loss_histories.push(net.train(&[x], child_seed)?);
            mus.push(net.encode(&[x])?);
            low.push(net);
        }

        let stacked = {
            let refs: Vec<&Matrix> = mus.iter().collect();
            concat_blocks(&refs)?
        };
        let high_seed = derive_seed(seed, 0x0f);
        let mut high = VaeNet::init(&[stacked.cols()], vec![ReconKind::Mse], spec, high_seed);
        loss_histories.push(high.train(&[&stacked], high_seed)?);

        Ok(Self {
            low,
            high,
            loss_histories,
        })
    }

    pub fn encode(&self, modalities: &[&Matrix]) -> Result<Matrix> {
        if modalities.len() != self.low.len() {
            return Err(ModelError::Contract(format!(
                "expected {} modalities, got {}",
                self.low.len(),
                modalities.len()
            )));
        }
        let mut mus = Vec::new();
        for (net, x) in self.low.iter().zip(modalities) {
            mus.push(net.encode(&[x])?);
        }
        let refs: Vec<&Matrix> = mus.iter().collect();
        let stacked = concat_blocks(&refs)?;
        self.high.encode(&[&stacked])
    }

    /// Total number of networks trained (modalities + 1).
    pub fn networks_trained(&self) -> usize {
        self.low.len() + 1
    }

    /// Input width of the high-level network.
    pub fn high_level_input_dim(&self) -> usize {
        self.low.len() * self.low[0].spec.latent_size
    }

    pub fn loss_histories(&self) -> &[Vec<f64>] {
        &self.loss_histories
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::layers::random_matrix;

    fn quick_spec() -> VaeSpec {
        VaeSpec {
            epochs: 3,
            batch_size: 16,
            ..Default::default()
        }
    }

    #[test]
    fn cnc_vae_trains_and_encodes_deterministically() {
        let mut rng = SplitRng::seed_from(41);
        let x1 = random_matrix(48, 10, 1.0, &mut rng);
        let x2 = random_matrix(48, 6, 1.0, &mut rng);
        let spec = quick_spec();
        let model =
            CncVae::train(&x1, &x2, (ReconKind::Mse, ReconKind::Mse), &spec, 7).unwrap();
        let h1 = model.encode(&x1, &x2).unwrap();
        let h2 = model.encode(&x1, &x2).unwrap();
        assert_eq!(h1, h2);
        assert_eq!(h1.shape(), (48, 32));
        assert_eq!(model.loss_history().len(), 3);

        let again =
            CncVae::train(&x1, &x2, (ReconKind::Mse, ReconKind::Mse), &spec, 7).unwrap();
        assert_eq!(h1, again.encode(&x1, &x2).unwrap());
    }

    #[test]
    fn cnc_vae_rejects_row_mismatch() {
        let mut rng = SplitRng::seed_from(42);
        let x1 = random_matrix(10, 4, 1.0, &mut rng);
        let x2 = random_matrix(11, 4, 1.0, &mut rng);
        assert!(CncVae::train(&x1, &x2, (ReconKind::Mse, ReconKind::Mse), &quick_spec(), 1).is_err());
    }

    #[test]
    fn vae_spec_grid_is_enforced() {
        let mut spec = quick_spec();
        spec.dense_size = 100;
        assert!(spec.validate().is_err());
        let mut spec = quick_spec();
        spec.beta = 2.0;
        assert!(spec.validate().is_err());
    }

    #[test]
    fn h_vae_trains_n_plus_one_networks() {
        let mut rng = SplitRng::seed_from(43);
        let x1 = random_matrix(40, 8, 1.0, &mut rng);
        let x2 = random_matrix(40, 5, 1.0, &mut rng);
        let spec = quick_spec();
        let model = HVae::train(
            &[(&x1, ReconKind::Mse), (&x2, ReconKind::Mse)],
            &spec,
            3,
        )
        .unwrap();
        assert_eq!(model.networks_trained(), 3);
        assert_eq!(model.high_level_input_dim(), 2 * spec.latent_size);
        let h = model.encode(&[&x1, &x2]).unwrap();
        assert_eq!(h.shape(), (40, 32));
    }
}
