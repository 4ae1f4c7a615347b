//! Trainable layers: dense, graph convolution, batch normalization,
//! dropout, and the Gaussian reparametrization head.


#[cfg(not(feature = "std"))]
use num_traits::Float as _;

use crate::numcore::{Matrix, Param, Result, Tape, Var};
use crate::rng::SplitRng;

/// Activation applied by a layer after its linear transform.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LayerActivation {
    Linear,
    Sigmoid,
    Elu,
    /// Parametric ReLU with a learnable scalar slope (init 0.25).
    PRelu,
}

/// Glorot-uniform weight matrix.
pub fn glorot_uniform(fan_in: usize, fan_out: usize, rng: &mut SplitRng) -> Matrix {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    Matrix::from_fn(fan_in, fan_out, |_, _| rng.uniform(-limit, limit))
        .expect("bounded draws are finite")
}

const PRELU_INIT: f64 = 0.25;

fn make_slope(act: LayerActivation, lr: f64) -> Option<Param> {
    (act == LayerActivation::PRelu).then(|| {
        Param::with_learning_rate(Matrix::scalar(PRELU_INIT).expect("finite"), lr)
    })
}

fn apply_activation(
    tape: &mut Tape,
    x: Var,
    act: LayerActivation,
    slope: Option<Var>,
) -> Result<Var> {
    match act {
        LayerActivation::Linear => Ok(x),
        LayerActivation::Sigmoid => tape.sigmoid(x),
        LayerActivation::Elu => tape.elu(x),
        LayerActivation::PRelu => tape.prelu(x, slope.expect("prelu layers own a slope")),
    }
}

/// Fully connected layer: `activation(x W + b)`.
#[derive(Clone, Debug)]
pub struct Dense {
    pub w: Param,
    pub b: Param,
    act: LayerActivation,
    slope: Option<Param>,
}

/// Tape handles for one training step of a [`Dense`] layer.
#[derive(Clone, Copy, Debug)]
pub struct DenseVars {
    w: Var,
    b: Var,
    slope: Option<Var>,
}

impl Dense {
    pub fn new(
        input: usize,
        output: usize,
        act: LayerActivation,
        lr: f64,
        rng: &mut SplitRng,
    ) -> Self {
        Self {
            w: Param::with_learning_rate(glorot_uniform(input, output, rng), lr),
            b: Param::with_learning_rate(Matrix::zeros(1, output), lr),
            act,
            slope: make_slope(act, lr),
        }
    }

    pub fn push(&self, tape: &mut Tape) -> DenseVars {
        DenseVars {
            w: self.w.push(tape),
            b: self.b.push(tape),
            slope: self.slope.as_ref().map(|s| s.push(tape)),
        }
    }

    pub fn forward(&self, tape: &mut Tape, vars: &DenseVars, x: Var) -> Result<Var> {
        let lin = tape.matmul(x, vars.w)?;
        let lin = tape.add_broadcast(lin, vars.b)?;
        apply_activation(tape, lin, self.act, vars.slope)
    }

    pub fn apply_grads(&mut self, tape: &Tape, vars: &DenseVars) -> Result<()> {
        self.w.apply_grad(tape, vars.w)?;
        self.b.apply_grad(tape, vars.b)?;
        if let (Some(s), Some(v)) = (self.slope.as_mut(), vars.slope) {
            s.apply_grad(tape, v)?;
        }
        Ok(())
    }

    pub fn output_dim(&self) -> usize {
        self.w.value.cols()
    }
}

/// Graph convolution: `activation(adj (x W))`, no bias term.
#[derive(Clone, Debug)]
pub struct Gcn {
    pub w: Param,
    act: LayerActivation,
    slope: Option<Param>,
}

#[derive(Clone, Copy, Debug)]
pub struct GcnVars {
    w: Var,
    slope: Option<Var>,
}

impl Gcn {
    pub fn new(
        input: usize,
        output: usize,
        act: LayerActivation,
        lr: f64,
        rng: &mut SplitRng,
    ) -> Self {
        Self {
            w: Param::with_learning_rate(glorot_uniform(input, output, rng), lr),
            act,
            slope: make_slope(act, lr),
        }
    }

    pub fn push(&self, tape: &mut Tape) -> GcnVars {
        GcnVars {
            w: self.w.push(tape),
            slope: self.slope.as_ref().map(|s| s.push(tape)),
        }
    }

    /// `adj` is the normalized adjacency registered as a constant leaf.
    pub fn forward(&self, tape: &mut Tape, vars: &GcnVars, adj: Var, x: Var) -> Result<Var> {
        let xw = tape.matmul(x, vars.w)?;
        let agg = tape.matmul(adj, xw)?;
        apply_activation(tape, agg, self.act, vars.slope)
    }

    pub fn apply_grads(&mut self, tape: &Tape, vars: &GcnVars) -> Result<()> {
        self.w.apply_grad(tape, vars.w)?;
        if let (Some(s), Some(v)) = (self.slope.as_mut(), vars.slope) {
            s.apply_grad(tape, v)?;
        }
        Ok(())
    }

    pub fn output_dim(&self) -> usize {
        self.w.value.cols()
    }
}

const BN_EPS: f64 = 1e-5;
const BN_MOMENTUM: f64 = 0.9;

/// Per-feature batch normalization with learnable scale/shift and
/// running statistics for eval mode.
#[derive(Clone, Debug)]
pub struct BatchNorm {
    pub gamma: Param,
    pub beta: Param,
    running_mean: Matrix,
    running_var: Matrix,
}

#[derive(Clone, Copy, Debug)]
pub struct BatchNormVars {
    gamma: Var,
    beta: Var,
}

impl BatchNorm {
    pub fn new(features: usize, lr: f64) -> Self {
        Self {
            gamma: Param::with_learning_rate(
                Matrix::filled(1, features, 1.0).expect("finite"),
                lr,
            ),
            beta: Param::with_learning_rate(Matrix::zeros(1, features), lr),
            running_mean: Matrix::zeros(1, features),
            running_var: Matrix::filled(1, features, 1.0).expect("finite"),
        }
    }

    pub fn push(&self, tape: &mut Tape) -> BatchNormVars {
        BatchNormVars {
            gamma: self.gamma.push(tape),
            beta: self.beta.push(tape),
        }
    }

    /// Training-mode forward; updates the running statistics.
    pub fn forward_train(
        &mut self,
        tape: &mut Tape,
        vars: &BatchNormVars,
        x: Var,
    ) -> Result<Var> {
        let rows = tape.value(x).rows();
        let inv_n = 1.0 / rows as f64;

        let mean = tape.col_sums(x);
        let mean = tape.scale(mean, inv_n)?;
        let neg_mean = tape.scale(mean, -1.0)?;
        let centered = tape.add_broadcast(x, neg_mean)?;
        let sq = tape.mul(centered, centered)?;
        let var = tape.col_sums(sq);
        let var = tape.scale(var, inv_n)?;
        let var_eps = tape.affine(var, 1.0, BN_EPS)?;
        let std = tape.sqrt(var_eps)?;
        let inv_std = tape.recip(std)?;
        let normalized = tape.mul_broadcast(centered, inv_std)?;

        // Track running stats from the realized batch values.
        let batch_mean = tape.value(mean).clone();
        let batch_var = tape.value(var).clone();
        self.running_mean = self
            .running_mean
            .scale(BN_MOMENTUM)?
            .add(&batch_mean.scale(1.0 - BN_MOMENTUM)?)?;
        self.running_var = self
            .running_var
            .scale(BN_MOMENTUM)?
            .add(&batch_var.scale(1.0 - BN_MOMENTUM)?)?;

        let scaled = tape.mul_broadcast(normalized, vars.gamma)?;
        tape.add_broadcast(scaled, vars.beta)
    }

    /// Eval-mode forward using the running statistics.
    pub fn forward_eval(&self, tape: &mut Tape, vars: &BatchNormVars, x: Var) -> Result<Var> {
        let neg_mean = tape.leaf(self.running_mean.scale(-1.0)?);
        let inv_std = tape.leaf(
            self.running_var
                .map("bn_inv_std", |v| 1.0 / (v + BN_EPS).sqrt())?,
        );
        let centered = tape.add_broadcast(x, neg_mean)?;
        let normalized = tape.mul_broadcast(centered, inv_std)?;
        let scaled = tape.mul_broadcast(normalized, vars.gamma)?;
        tape.add_broadcast(scaled, vars.beta)
    }

    pub fn apply_grads(&mut self, tape: &Tape, vars: &BatchNormVars) -> Result<()> {
        self.gamma.apply_grad(tape, vars.gamma)?;
        self.beta.apply_grad(tape, vars.beta)?;
        Ok(())
    }
}

/// Dropout rate used across the models.
pub const DROPOUT_RATE: f64 = 0.2;

/// Zero each entry with probability `rate` and rescale survivors by
/// `1/(1-rate)`; identity in eval mode.
pub fn dropout(
    tape: &mut Tape,
    x: Var,
    rate: f64,
    training: bool,
    rng: &mut SplitRng,
) -> Result<Var> {
    if !training || rate == 0.0 {
        return Ok(x);
    }
    let (rows, cols) = tape.value(x).shape();
    let keep_scale = 1.0 / (1.0 - rate);
    let mask = Matrix::from_fn(rows, cols, |_, _| {
        if rng.bernoulli(rate) {
            0.0
        } else {
            keep_scale
        }
    })?;
    tape.mul_const(x, mask)
}

/// Dense mu/logvar heads plus the reparametrized sample
/// `z = mu + exp(logvar / 2) * eps`.
#[derive(Clone, Debug)]
pub struct GaussianHead {
    pub mu: Dense,
    pub logvar: Dense,
}

#[derive(Clone, Copy, Debug)]
pub struct GaussianHeadVars {
    mu: DenseVars,
    logvar: DenseVars,
}

/// The tape nodes produced by a head forward pass.
#[derive(Clone, Copy, Debug)]
pub struct GaussianSample {
    pub mu: Var,
    pub logvar: Var,
    pub z: Var,
}

impl GaussianHead {
    pub fn new(input: usize, latent: usize, lr: f64, rng: &mut SplitRng) -> Self {
        Self {
            mu: Dense::new(input, latent, LayerActivation::Linear, lr, rng),
            logvar: Dense::new(input, latent, LayerActivation::Linear, lr, rng),
        }
    }

    pub fn push(&self, tape: &mut Tape) -> GaussianHeadVars {
        GaussianHeadVars {
            mu: self.mu.push(tape),
            logvar: self.logvar.push(tape),
        }
    }

    /// `eps` must be a standard-normal draw of shape `rows x latent`.
    pub fn forward(
        &self,
        tape: &mut Tape,
        vars: &GaussianHeadVars,
        h: Var,
        eps: Matrix,
    ) -> Result<GaussianSample> {
        let mu = self.mu.forward(tape, &vars.mu, h)?;
        let logvar = self.logvar.forward(tape, &vars.logvar, h)?;
        let half = tape.scale(logvar, 0.5)?;
        let std = tape.exp(half)?;
        let noise = tape.mul_const(std, eps)?;
        let z = tape.add(mu, noise)?;
        Ok(GaussianSample { mu, logvar, z })
    }

    pub fn apply_grads(&mut self, tape: &Tape, vars: &GaussianHeadVars) -> Result<()> {
        self.mu.apply_grads(tape, &vars.mu)?;
        self.logvar.apply_grads(tape, &vars.logvar)?;
        Ok(())
    }

    pub fn latent_dim(&self) -> usize {
        self.mu.output_dim()
    }
}

/// Standard-normal matrix draw, used for reparametrization noise and
/// regularizer prior samples.
pub fn standard_normal_matrix(rows: usize, cols: usize, rng: &mut SplitRng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.standard_normal()).expect("normal draws are finite")
}

/// Collect Glorot-style random matrices for tests.
pub fn random_matrix(rows: usize, cols: usize, scale: f64, rng: &mut SplitRng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.standard_normal() * scale).expect("finite")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitRng;

    #[test]
    fn gcn_with_identity_adjacency_is_a_biasless_dense() {
        let mut rng = SplitRng::seed_from(21);
        let x = random_matrix(5, 4, 1.0, &mut rng);
        let gcn = Gcn::new(4, 3, LayerActivation::Elu, 0.001, &mut rng);

        let mut tape = Tape::new();
        let adj = tape.leaf(Matrix::identity(5));
        let xv = tape.leaf(x.clone());
        let gv = gcn.push(&mut tape);
        let out_gcn = gcn.forward(&mut tape, &gv, adj, xv).unwrap();

        // Dense with the same weights and a zero bias.
        let mut dense = Dense::new(4, 3, LayerActivation::Elu, 0.001, &mut rng);
        dense.w = gcn.w.clone();
        let dv = dense.push(&mut tape);
        let out_dense = dense.forward(&mut tape, &dv, xv).unwrap();

        let diff = tape
            .value(out_gcn)
            .sub(tape.value(out_dense))
            .unwrap()
            .max_abs();
        assert!(diff < 1e-12, "gcn/dense mismatch {diff}");
    }

    #[test]
    fn batchnorm_training_standardizes_features() {
        let mut rng = SplitRng::seed_from(22);
        let x = Matrix::from_fn(200, 3, |_, j| 5.0 * (j as f64 + 1.0) + rng.standard_normal() * (j as f64 + 1.0))
            .unwrap();
        let mut bn = BatchNorm::new(3, 0.001);
        let mut tape = Tape::new();
        let xv = tape.leaf(x);
        let vars = bn.push(&mut tape);
        let out = bn.forward_train(&mut tape, &vars, xv).unwrap();
        let y = tape.value(out);
        for j in 0..3 {
            let mean: f64 = (0..200).map(|i| y.get(i, j)).sum::<f64>() / 200.0;
            let var: f64 = (0..200).map(|i| (y.get(i, j) - mean).powi(2)).sum::<f64>() / 200.0;
            assert!(mean.abs() < 1e-10, "feature {j} mean {mean}");
            assert!((var - 1.0).abs() < 1e-3, "feature {j} var {var}");
        }
    }

    #[test]
    fn dropout_eval_is_identity_and_train_rate_matches() {
        let mut rng = SplitRng::seed_from(23);
        let x = Matrix::filled(250, 400, 1.0).unwrap();
        let mut tape = Tape::new();
        let xv = tape.leaf(x.clone());
        let eval = dropout(&mut tape, xv, DROPOUT_RATE, false, &mut rng).unwrap();
        assert_eq!(tape.value(eval), &x);

        let train = dropout(&mut tape, xv, DROPOUT_RATE, true, &mut rng).unwrap();
        let out = tape.value(train);
        let zeros = out.data().iter().filter(|&&v| v == 0.0).count();
        let frac = zeros as f64 / out.len() as f64;
        assert!((frac - DROPOUT_RATE).abs() < 0.01, "zero fraction {frac}");
        let kept: Vec<f64> = out.data().iter().copied().filter(|&v| v != 0.0).collect();
        assert!(kept.iter().all(|&v| (v - 1.25).abs() < 1e-12));
    }

    #[test]
    fn gaussian_head_zero_eps_returns_mu() {
        let mut rng = SplitRng::seed_from(24);
        let head = GaussianHead::new(4, 2, 0.001, &mut rng);
        let h = random_matrix(6, 4, 1.0, &mut rng);
        let mut tape = Tape::new();
        let hv = tape.leaf(h);
        let vars = head.push(&mut tape);
        let s = head
            .forward(&mut tape, &vars, hv, Matrix::zeros(6, 2))
            .unwrap();
        let diff = tape.value(s.z).sub(tape.value(s.mu)).unwrap().max_abs();
        assert!(diff < 1e-12);
    }

    #[test]
    fn glorot_respects_fan_limits() {
        let mut rng = SplitRng::seed_from(25);
        let w = glorot_uniform(30, 20, &mut rng);
        let limit = (6.0f64 / 50.0).sqrt();
        assert!(w.data().iter().all(|v| v.abs() <= limit));
    }
}
