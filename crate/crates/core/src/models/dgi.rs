//! Contrastive graph models: a shared objective that scores node
//! representations against a graph summary, with negatives produced by
//! shuffling node features while keeping the edges in place.

use alloc::string::ToString;
use alloc::vec::Vec;
use alloc::{format, vec};

use super::{GraphModelSpec, Integration, ModelError, Result};
use crate::graphbuild::{Graph, NormalizedAdjacency};
use crate::nn::losses::dgi_loss;
use crate::nn::{Dense, Gcn, LayerActivation};
use crate::numcore::{Matrix, Param, Tape, Var};
use crate::rng::{streams, SplitRng};

/// Permute the rows of a feature matrix (the negative-sample
/// corruption; edges stay in place).
pub fn corrupt_rows(x: &Matrix, rng: &mut SplitRng) -> Matrix {
    let perm = rng.permutation(x.rows());
    apply_corruption(x, &perm)
}

/// Apply an explicit row permutation; the identity permutation returns
/// the input unchanged.
pub fn apply_corruption(x: &Matrix, perm: &[usize]) -> Matrix {
    x.gather_rows(perm).expect("permutation indices are in range")
}

/// Summary vector: sigmoid of the column-wise mean of `h` (`1 x ls`).
fn readout(tape: &mut Tape, h: Var) -> crate::numcore::Result<Var> {
    let rows = tape.value(h).rows();
    let sums = tape.col_sums(h);
    let mean = tape.scale(sums, 1.0 / rows as f64)?;
    tape.sigmoid(mean)
}

/// Bilinear discriminator: `sigmoid(h W s^T)` for every row of `h`.
fn discriminate(tape: &mut Tape, h: Var, w: Var, s: Var) -> crate::numcore::Result<Var> {
    let hw = tape.matmul(h, w)?;
    let st = tape.transpose(s);
    let scores = tape.matmul(hw, st)?;
    tape.sigmoid(scores)
}

fn gcn_stack(
    input_dim: usize,
    latent: usize,
    layers: usize,
    lr: f64,
    rng: &mut SplitRng,
) -> Vec<Gcn> {
    (0..layers)
        .map(|i| {
            let fan_in = if i == 0 { input_dim } else { latent };
            Gcn::new(fan_in, latent, LayerActivation::PRelu, lr, rng)
        })
        .collect()
}

fn stack_forward(
    tape: &mut Tape,
    stack: &[Gcn],
    vars: &[crate::nn::layers::GcnVars],
    adj: Var,
    mut x: Var,
) -> crate::numcore::Result<Var> {
    for (layer, v) in stack.iter().zip(vars) {
        x = layer.forward(tape, v, adj, x)?;
    }
    Ok(x)
}

/// Mean positive/negative discriminator scores of the final epoch.
#[derive(Clone, Copy, Debug, Default)]
pub struct ScoreSummary {
    pub mean_positive: f64,
    pub mean_negative: f64,
}

/// Early-integration contrastive model: one graph over the
/// concatenated features, a stack of graph convolutions as encoder.
#[derive(Clone, Debug)]
pub struct CncDgi {
    layers: Vec<Gcn>,
    loss_history: Vec<f64>,
    scores: ScoreSummary,
}

impl CncDgi {
    pub fn train(
        x: &Matrix,
        adj: &NormalizedAdjacency,
        spec: &GraphModelSpec,
        seed: u64,
    ) -> Result<Self> {
        spec.validate()?;
        check_nodes("cnc-dgi", x, adj)?;
        let mut init_rng = SplitRng::derive(seed, streams::INIT);
        let mut corrupt_rng = SplitRng::derive(seed, streams::CORRUPT);
        let ls = spec.latent_size;
        let mut layers = gcn_stack(x.cols(), ls, spec.conv_layers, spec.learning_rate, &mut init_rng);
        let mut w_d = Param::with_learning_rate(
            crate::nn::glorot_uniform(ls, ls, &mut init_rng),
            spec.learning_rate,
        );

        let mut loss_history = Vec::with_capacity(spec.epochs);
        let mut scores = ScoreSummary::default();
        for _ in 0..spec.epochs {
            let mut tape = Tape::new();
            let adj_var = tape.leaf(adj.matrix().clone());
            let pos_in = tape.leaf(x.clone());
            let neg_in = tape.leaf(corrupt_rows(x, &mut corrupt_rng));
            let layer_vars: Vec<_> = layers.iter().map(|l| l.push(&mut tape)).collect();
            let wd_var = w_d.push(&mut tape);

            let h_pos = stack_forward(&mut tape, &layers, &layer_vars, adj_var, pos_in)?;
            let h_neg = stack_forward(&mut tape, &layers, &layer_vars, adj_var, neg_in)?;
            let s = readout(&mut tape, h_pos)?;
            let pos_scores = discriminate(&mut tape, h_pos, wd_var, s)?;
            let neg_scores = discriminate(&mut tape, h_neg, wd_var, s)?;
            scores = ScoreSummary {
                mean_positive: tape.value(pos_scores).mean(),
                mean_negative: tape.value(neg_scores).mean(),
            };
            let loss = dgi_loss(&mut tape, pos_scores, neg_scores)?;
            tape.backward(loss)?;
            for (layer, vars) in layers.iter_mut().zip(&layer_vars) {
                layer.apply_grads(&tape, vars)?;
            }
            w_d.apply_grad(&tape, wd_var)?;
            loss_history.push(tape.value(loss).as_scalar()?);
        }
        Ok(Self {
            layers,
            loss_history,
            scores,
        })
    }

    pub fn encode(&self, x: &Matrix, adj: &NormalizedAdjacency) -> Result<Matrix> {
        check_nodes("cnc-dgi", x, adj)?;
        let mut tape = Tape::new();
        let adj_var = tape.leaf(adj.matrix().clone());
        let xv = tape.leaf(x.clone());
        let vars: Vec<_> = self.layers.iter().map(|l| l.push(&mut tape)).collect();
        let h = stack_forward(&mut tape, &self.layers, &vars, adj_var, xv)?;
        Ok(tape.value(h).clone())
    }

    pub fn loss_history(&self) -> &[f64] {
        &self.loss_history
    }

    pub fn final_scores(&self) -> ScoreSummary {
        self.scores
    }
}

/// Mid-integration contrastive model: one graph and one convolution
/// stack per modality, latents merged by the integration layer, the
/// merged representation scored against its summary. Negatives shuffle
/// each modality independently.
#[derive(Clone, Debug)]
pub struct TwoGraphDgi {
    branch1: Vec<Gcn>,
    branch2: Vec<Gcn>,
    merge: Option<Dense>,
    integration: Integration,
    loss_history: Vec<f64>,
    scores: ScoreSummary,
}

impl TwoGraphDgi {
    pub fn train(
        x1: &Matrix,
        adj1: &NormalizedAdjacency,
        x2: &Matrix,
        adj2: &NormalizedAdjacency,
        spec: &GraphModelSpec,
        seed: u64,
    ) -> Result<Self> {
        spec.validate()?;
        check_nodes("2g-dgi", x1, adj1)?;
        check_nodes("2g-dgi", x2, adj2)?;
        if x1.rows() != x2.rows() {
            return Err(ModelError::Contract(format!(
                "modalities describe different object counts: {} vs {}",
                x1.rows(),
                x2.rows()
            )));
        }
        let ls = spec.latent_size;
        let lr = spec.learning_rate;
        let mut init_rng = SplitRng::derive(seed, streams::INIT);
        let mut branch1 = gcn_stack(x1.cols(), ls, spec.conv_layers, lr, &mut init_rng);
        let mut branch2 = gcn_stack(x2.cols(), ls, spec.conv_layers, lr, &mut init_rng);
        let mut merge = match spec.integration {
            Integration::Average => None,
            Integration::Dense => Some(Dense::new(
                2 * ls,
                ls,
                LayerActivation::Linear,
                lr,
                &mut init_rng,
            )),
        };
        let mut w_d = Param::with_learning_rate(crate::nn::glorot_uniform(ls, ls, &mut init_rng), lr);
        let mut corrupt_rng = SplitRng::derive(seed, streams::CORRUPT);

        let mut loss_history = Vec::with_capacity(spec.epochs);
        let mut scores = ScoreSummary::default();
        for _ in 0..spec.epochs {
            let mut tape = Tape::new();
            let a1 = tape.leaf(adj1.matrix().clone());
            let a2 = tape.leaf(adj2.matrix().clone());
            let p1 = tape.leaf(x1.clone());
            let p2 = tape.leaf(x2.clone());
            let n1 = tape.leaf(corrupt_rows(x1, &mut corrupt_rng));
            let n2 = tape.leaf(corrupt_rows(x2, &mut corrupt_rng));

            let b1_vars: Vec<_> = branch1.iter().map(|l| l.push(&mut tape)).collect();
            let b2_vars: Vec<_> = branch2.iter().map(|l| l.push(&mut tape)).collect();
            let merge_vars = merge.as_ref().map(|m| m.push(&mut tape));
            let wd_var = w_d.push(&mut tape);

            let encode = |tape: &mut Tape, xa: Var, xb: Var| -> Result<Var> {
                let h1 = stack_forward(tape, &branch1, &b1_vars, a1, xa)?;
                let h2 = stack_forward(tape, &branch2, &b2_vars, a2, xb)?;
                integrate(tape, h1, h2, &merge, &merge_vars)
            };
            let h_pos = encode(&mut tape, p1, p2)?;
            let h_neg = encode(&mut tape, n1, n2)?;
            let s = readout(&mut tape, h_pos)?;
            let pos_scores = discriminate(&mut tape, h_pos, wd_var, s)?;
            let neg_scores = discriminate(&mut tape, h_neg, wd_var, s)?;
            scores = ScoreSummary {
                mean_positive: tape.value(pos_scores).mean(),
                mean_negative: tape.value(neg_scores).mean(),
            };
            let loss = dgi_loss(&mut tape, pos_scores, neg_scores)?;
            tape.backward(loss)?;

            for (layer, vars) in branch1.iter_mut().zip(&b1_vars) {
                layer.apply_grads(&tape, vars)?;
            }
            for (layer, vars) in branch2.iter_mut().zip(&b2_vars) {
                layer.apply_grads(&tape, vars)?;
            }
            if let (Some(m), Some(vars)) = (merge.as_mut(), &merge_vars) {
                m.apply_grads(&tape, vars)?;
            }
            w_d.apply_grad(&tape, wd_var)?;
            loss_history.push(tape.value(loss).as_scalar()?);
        }

        Ok(Self {
            branch1,
            branch2,
            merge,
            integration: spec.integration,
            loss_history,
            scores,
        })
    }

    pub fn encode(
        &self,
        x1: &Matrix,
        adj1: &NormalizedAdjacency,
        x2: &Matrix,
        adj2: &NormalizedAdjacency,
    ) -> Result<Matrix> {
        let (h1, h2) = self.encode_branches(x1, adj1, x2, adj2)?;
        let mut tape = Tape::new();
        let v1 = tape.leaf(h1);
        let v2 = tape.leaf(h2);
        let merge_vars = self.merge.as_ref().map(|m| m.push(&mut tape));
        let h = integrate(&mut tape, v1, v2, &self.merge, &merge_vars)?;
        Ok(tape.value(h).clone())
    }

    /// Per-branch latents before integration.
    pub fn encode_branches(
        &self,
        x1: &Matrix,
        adj1: &NormalizedAdjacency,
        x2: &Matrix,
        adj2: &NormalizedAdjacency,
    ) -> Result<(Matrix, Matrix)> {
        check_nodes("2g-dgi", x1, adj1)?;
        check_nodes("2g-dgi", x2, adj2)?;
        let mut tape = Tape::new();
        let a1 = tape.leaf(adj1.matrix().clone());
        let a2 = tape.leaf(adj2.matrix().clone());
        let v1 = tape.leaf(x1.clone());
        let v2 = tape.leaf(x2.clone());
        let b1_vars: Vec<_> = self.branch1.iter().map(|l| l.push(&mut tape)).collect();
        let b2_vars: Vec<_> = self.branch2.iter().map(|l| l.push(&mut tape)).collect();
        let h1 = stack_forward(&mut tape, &self.branch1, &b1_vars, a1, v1)?;
        let h2 = stack_forward(&mut tape, &self.branch2, &b2_vars, a2, v2)?;
        Ok((tape.value(h1).clone(), tape.value(h2).clone()))
    }

    pub fn integration(&self) -> Integration {
        self.integration
    }

    pub fn loss_history(&self) -> &[f64] {
        &self.loss_history
    }

    pub fn final_scores(&self) -> ScoreSummary {
        self.scores
    }
}

fn integrate(
    tape: &mut Tape,
    h1: Var,
    h2: Var,
    merge: &Option<Dense>,
    merge_vars: &Option<crate::nn::layers::DenseVars>,
) -> Result<Var> {
    match (merge, merge_vars) {
        (None, _) => {
            let sum = tape.add(h1, h2)?;
            Ok(tape.scale(sum, 0.5)?)
        }
        (Some(m), Some(vars)) => {
            let cat = tape.concat_cols(h1, h2)?;
            Ok(m.forward(tape, vars, cat)?)
        }
        (Some(_), None) => Err(ModelError::Contract(
            "dense integration layer registered without tape vars".to_string(),
        )),
    }
}

/// Stack two graphs over the same objects into one 2N-node typed graph:
/// node type 1 holds rows `0..N`, type 2 rows `N..2N`, and `N` type-3
/// cross edges `(i, N + i)` with weight 1 tie the two views together.
pub fn build_hetero_graph(g1: &Graph, g2: &Graph) -> Result<Graph> {
    let n = g1.n_nodes();
    if g2.n_nodes() != n {
        return Err(ModelError::Contract(format!(
            "graphs describe different object counts: {n} vs {}",
            g2.n_nodes()
        )));
    }
    let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(g1.n_edges() + g2.n_edges() + n);
    let mut weights: Vec<f64> = Vec::with_capacity(pairs.capacity());
    let mut types: Vec<u8> = Vec::with_capacity(pairs.capacity());
    for (idx, &(i, j)) in g1.edges().iter().enumerate() {
        pairs.push((i, j));
        weights.push(g1.weights()[idx]);
        types.push(1);
    }
    for (idx, &(i, j)) in g2.edges().iter().enumerate() {
        pairs.push((i + n, j + n));
        weights.push(g2.weights()[idx]);
        types.push(2);
    }
    for i in 0..n {
        pairs.push((i, i + n));
        weights.push(1.0);
        types.push(3);
    }
    let mut graph = Graph::from_parts(2 * n, pairs, weights, Some(types))?;
    let mut node_types = vec![1u8; n];
    node_types.extend(vec![2u8; n]);
    graph.set_node_types(node_types);
    Ok(graph)
}

/// Contrastive model over the stacked 2N-node heterogeneous graph. Each
/// modality is first projected to a shared width, the projections are
/// stacked, one shared convolution stack runs over all 2N nodes, and a
/// type-respecting split feeds the integration layer. Negatives shuffle
/// rows within each type block.
#[derive(Clone, Debug)]
pub struct HeteroDgi {
    proj1: Dense,
    proj2: Dense,
    layers: Vec<Gcn>,
    merge: Option<Dense>,
    loss_history: Vec<f64>,
    scores: ScoreSummary,
}

impl HeteroDgi {
    /// `adj` must be the normalized adjacency of the 2N-node graph from
    /// [`build_hetero_graph`].
    pub fn train(
        x1: &Matrix,
        x2: &Matrix,
        adj: &NormalizedAdjacency,
        spec: &GraphModelSpec,
        seed: u64,
    ) -> Result<Self> {
        spec.validate()?;
        let n = x1.rows();
        if x2.rows() != n {
            return Err(ModelError::Contract(format!(
                "modalities describe different object counts: {n} vs {}",
                x2.rows()
            )));
        }
        if adj.n_nodes() != 2 * n {
            return Err(ModelError::Contract(format!(
                "hetero adjacency has {} nodes, expected {}",
                adj.n_nodes(),
                2 * n
            )));
        }
        let ls = spec.latent_size;
        let ds = spec.dense_size;
        let lr = spec.learning_rate;
        let mut init_rng = SplitRng::derive(seed, streams::INIT);
        let mut proj1 = Dense::new(x1.cols(), ds, LayerActivation::Linear, lr, &mut init_rng);
        let mut proj2 = Dense::new(x2.cols(), ds, LayerActivation::Linear, lr, &mut init_rng);
        let mut layers = gcn_stack(ds, ls, spec.conv_layers, lr, &mut init_rng);
        let mut merge = match spec.integration {
            Integration::Average => None,
            Integration::Dense => Some(Dense::new(
                2 * ls,
                ls,
                LayerActivation::Linear,
                lr,
                &mut init_rng,
            )),
        };
        let mut w_d = Param::with_learning_rate(crate::nn::glorot_uniform(ls, ls, &mut init_rng), lr);
        let mut corrupt_rng = SplitRng::derive(seed, streams::CORRUPT);

        let mut loss_history = Vec::with_capacity(spec.epochs);
        let mut scores = ScoreSummary::default();
        for _ in 0..spec.epochs {
            let mut tape = Tape::new();
            let adj_var = tape.leaf(adj.matrix().clone());
            let p1 = tape.leaf(x1.clone());
            let p2 = tape.leaf(x2.clone());
            let n1 = tape.leaf(corrupt_rows(x1, &mut corrupt_rng));
            let n2 = tape.leaf(corrupt_rows(x2, &mut corrupt_rng));

            let proj1_vars = proj1.push(&mut tape);
            let proj2_vars = proj2.push(&mut tape);
            let layer_vars: Vec<_> = layers.iter().map(|l| l.push(&mut tape)).collect();
            let merge_vars = merge.as_ref().map(|m| m.push(&mut tape));
            let wd_var = w_d.push(&mut tape);

            let encode = |tape: &mut Tape, xa: Var, xb: Var| -> Result<Var> {
                let pa = proj1.forward(tape, &proj1_vars, xa)?;
                let pb = proj2.forward(tape, &proj2_vars, xb)?;
                let stacked = tape.concat_rows(pa, pb)?;
                let h_all = stack_forward(tape, &layers, &layer_vars, adj_var, stacked)?;
                let h1 = tape.slice_rows(h_all, 0, n)?;
                let h2 = tape.slice_rows(h_all, n, n)?;
                integrate(tape, h1, h2, &merge, &merge_vars)
            };
            let h_pos = encode(&mut tape, p1, p2)?;
            let h_neg = encode(&mut tape, n1, n2)?;
            let s = readout(&mut tape, h_pos)?;
            let pos_scores = discriminate(&mut tape, h_pos, wd_var, s)?;
            let neg_scores = discriminate(&mut tape, h_neg, wd_var, s)?;
            scores = ScoreSummary {
                mean_positive: tape.value(pos_scores).mean(),
                mean_negative: tape.value(neg_scores).mean(),
            };
            let loss = dgi_loss(&mut tape, pos_scores, neg_scores)?;
            tape.backward(loss)?;

            proj1.apply_grads(&tape, &proj1_vars)?;
            proj2.apply_grads(&tape, &proj2_vars)?;
            for (layer, vars) in layers.iter_mut().zip(&layer_vars) {
                layer.apply_grads(&tape, vars)?;
            }
            if let (Some(m), Some(vars)) = (merge.as_mut(), &merge_vars) {
                m.apply_grads(&tape, vars)?;
            }
            w_d.apply_grad(&tape, wd_var)?;
            loss_history.push(tape.value(loss).as_scalar()?);
        }

        Ok(Self {
            proj1,
            proj2,
            layers,
            merge,
            loss_history,
            scores,
        })
    }

    pub fn encode(&self, x1: &Matrix, x2: &Matrix, adj: &NormalizedAdjacency) -> Result<Matrix> {
        let n = x1.rows();
        if adj.n_nodes() != 2 * n || x2.rows() != n {
            return Err(ModelError::Contract(
                "encode inputs do not match the trained graph".to_string(),
            ));
        }
        let mut tape = Tape::new();
        let adj_var = tape.leaf(adj.matrix().clone());
        let v1 = tape.leaf(x1.clone());
        let v2 = tape.leaf(x2.clone());
        let proj1_vars = self.proj1.push(&mut tape);
        let proj2_vars = self.proj2.push(&mut tape);
        let layer_vars: Vec<_> = self.layers.iter().map(|l| l.push(&mut tape)).collect();
        let merge_vars = self.merge.as_ref().map(|m| m.push(&mut tape));
        let pa = self.proj1.forward(&mut tape, &proj1_vars, v1)?;
        let pb = self.proj2.forward(&mut tape, &proj2_vars, v2)?;
        let stacked = tape.concat_rows(pa, pb)?;
        let h_all = stack_forward(&mut tape, &self.layers, &layer_vars, adj_var, stacked)?;
        let h1 = tape.slice_rows(h_all, 0, n)?;
        let h2 = tape.slice_rows(h_all, n, n)?;
        let h = integrate(&mut tape, h1, h2, &self.merge, &merge_vars)?;
        Ok(tape.value(h).clone())
    }

    pub fn loss_history(&self) -> &[f64] {
        &self.loss_history
    }

    pub fn final_scores(&self) -> ScoreSummary {
        self.scores
    }
}

fn check_nodes(model: &str, x: &Matrix, adj: &NormalizedAdjacency) -> Result<()> {
    if adj.n_nodes() != x.rows() {
        return Err(ModelError::Contract(format!(
            "{model}: adjacency over {} nodes does not match {} feature rows",
            adj.n_nodes(),
            x.rows()
        )));
    }
    Ok(())
}
