//! Embedding evaluation: stratified splits, a Gaussian Naive Bayes
//! probe, the end-to-end pipeline (graph -> model -> embedding ->
//! classifier), and the parameter-sweep grid.
//!
//! Models train unsupervised on all rows; the splits only govern which
//! rows fit and score the classifier.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[cfg(not(feature = "std"))]
use num_traits::Float as _;

use crate::graphbuild::{
    edge_homophily, euclidean_distances, exp_edge_weight, graph_stats, hybrid_edges, knn_edges,
    normalize_adjacency, radius_edges, Graph, GraphError, GraphStats,
};
use crate::models::{
    binary_adjacency_with_loops, build_hetero_graph, CncDgi, CncVae, CncVgae, Embedding,
    GraphModelSpec, HVae, HeteroDgi, ModelError, ModelKind, Provenance, TwoGraphDgi, VaeSpec,
};
use crate::nn::ReconKind;
use crate::numcore::Matrix;
use crate::rng::{derive_seed, streams, SplitRng};
use crate::synthgen::{sample_graph_with_homophily, MultiModalDataset, SynthError};

#[derive(Clone, Debug, PartialEq)]
pub enum EvalError {
    /// A class has too few members for the requested split.
    ClassTooSmall {
        class: usize,
        size: usize,
        needed: usize,
    },
    /// The classifier needs at least two classes in its training rows.
    SingleClass,
    Contract(String),
    Model(ModelError),
    Graph(GraphError),
    Synth(SynthError),
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::ClassTooSmall {
                class,
                size,
                needed,
            } => write!(f, "class {class} has {size} members, needs at least {needed}"),
            EvalError::SingleClass => write!(f, "training rows contain a single class"),
            EvalError::Contract(msg) => write!(f, "{msg}"),
            EvalError::Model(e) => write!(f, "model stage: {e}"),
            EvalError::Graph(e) => write!(f, "graph stage: {e}"),
            EvalError::Synth(e) => write!(f, "data stage: {e}"),
        }
    }
}

impl core::error::Error for EvalError {}

impl From<ModelError> for EvalError {
    fn from(e: ModelError) -> Self {
        EvalError::Model(e)
    }
}

impl From<GraphError> for EvalError {
    fn from(e: GraphError) -> Self {
        EvalError::Graph(e)
    }
}

impl From<SynthError> for EvalError {
    fn from(e: SynthError) -> Self {
        EvalError::Synth(e)
    }
}

impl From<crate::numcore::NumError> for EvalError {
    fn from(e: crate::numcore::NumError) -> Self {
        EvalError::Model(ModelError::Num(e))
    }
}

pub type Result<T> = core::result::Result<T, EvalError>;

/// Assignment of every sample to a train/test role, stratified by one
/// label class.
#[derive(Clone, Debug, PartialEq)]
pub enum FoldPlan {
    /// Single stratified split; `true` marks test rows.
    Holdout { is_test: Vec<bool>, seed: u64 },
    /// Stratified k-fold; `assignment[i]` is the fold in which sample
    /// `i` is a test row.
    KFold {
        assignment: Vec<usize>,
        k: usize,
        seed: u64,
    },
}

impl FoldPlan {
    pub fn len(&self) -> usize {
        match self {
            FoldPlan::Holdout { is_test, .. } => is_test.len(),
            FoldPlan::KFold { assignment, .. } => assignment.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of (train, test) splits this plan yields.
    pub fn n_splits(&self) -> usize {
        match self {
            FoldPlan::Holdout { .. } => 1,
            FoldPlan::KFold { k, .. } => *k,
        }
    }

    /// Train/test row indices of split `fold`.
    pub fn split(&self, fold: usize) -> (Vec<usize>, Vec<usize>) {
        match self {
            FoldPlan::Holdout { is_test, .. } => {
                debug_assert_eq!(fold, 0);
                let mut train = Vec::new();
                let mut test = Vec::new();
                for (i, &t) in is_test.iter().enumerate() {
                    if t {
                        test.push(i);
                    } else {
                        train.push(i);
                    }
                }
                (train, test)
            }
            FoldPlan::KFold { assignment, .. } => {
                let mut train = Vec::new();
                let mut test = Vec::new();
                for (i, &f) in assignment.iter().enumerate() {
                    if f == fold {
                        test.push(i);
                    } else {
                        train.push(i);
                    }
                }
                (train, test)
            }
        }
    }
}

fn class_members(labels: &[usize]) -> Vec<Vec<usize>> {
    let classes = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut members = vec![Vec::new(); classes];
    for (i, &y) in labels.iter().enumerate() {
        members[y].push(i);
    }
    members
}

/// Stratified 75/25 holdout split.
pub fn split_75_25(labels: &[usize], seed: u64) -> Result<FoldPlan> {
    let members = class_members(labels);
    for (class, m) in members.iter().enumerate() {
        if m.len() < 4 {
            return Err(EvalError::ClassTooSmall {
                class,
                size: m.len(),
                needed: 4,
            });
        }
    }
    let mut rng = SplitRng::derive(seed, streams::FOLDS);
    let mut is_test = vec![false; labels.len()];
    for mut m in members {
        rng.shuffle(&mut m);
        let n_test = ((m.len() as f64) * 0.25).round() as usize;
        for &i in m.iter().take(n_test) {
            is_test[i] = true;
        }
    }
    Ok(FoldPlan::Holdout { is_test, seed })
}

/// Stratified k-fold plan; every sample lands in exactly one test fold
/// and per-fold class counts stay within one of `n_class / k`.
pub fn stratified_kfold(labels: &[usize], k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(EvalError::Contract(format!("k must be >= 2, got {k}")));
    }
    let members = class_members(labels);
    for (class, m) in members.iter().enumerate() {
        if m.len() < k {
            return Err(EvalError::ClassTooSmall {
                class,
                size: m.len(),
                needed: k,
            });
        }
    }
    let mut rng = SplitRng::derive(seed, streams::FOLDS);
    let mut assignment = vec![0usize; labels.len()];
    // One cursor shared across classes keeps global fold sizes within
    // one of each other as well.
    let mut cursor = 0usize;
    for mut m in members {
        rng.shuffle(&mut m);
        for &i in &m {
            assignment[i] = cursor % k;
            cursor += 1;
        }
    }
    Ok(FoldPlan::KFold {
        assignment,
        k,
        seed,
    })
}

const NB_VAR_FLOOR: f64 = 1e-9;

/// Gaussian Naive Bayes fit on `(train_h, train_y)`, evaluated row by
/// row on `test_h`. Per-class per-feature variances are floored at
/// 1e-9 so constant embedding dimensions survive.
pub fn gaussian_nb(train_h: &Matrix, train_y: &[usize], test_h: &Matrix) -> Result<Vec<usize>> {
    if train_h.rows() != train_y.len() {
        return Err(EvalError::Contract(format!(
            "{} training rows vs {} labels",
            train_h.rows(),
            train_y.len()
        )));
    }
    if train_h.cols() != test_h.cols() {
        return Err(EvalError::Contract(format!(
            "train has {} features, test has {}",
            train_h.cols(),
            test_h.cols()
        )));
    }
    let members = class_members(train_y);
    let present: Vec<usize> = (0..members.len()).filter(|&c| !members[c].is_empty()).collect();
    if present.len() < 2 {
        return Err(EvalError::SingleClass);
    }
    let f = train_h.cols();
    let n = train_h.rows() as f64;

    struct ClassStats {
        class: usize,
        log_prior: f64,
        mean: Vec<f64>,
        var: Vec<f64>,
    }
    let mut stats = Vec::with_capacity(present.len());
    for &c in &present {
        let rows = &members[c];
        let nc = rows.len() as f64;
        let mut mean = vec![0.0; f];
        for &i in rows {
            for (j, m) in mean.iter_mut().enumerate() {
                *m += train_h.get(i, j);
            }
        }
        for m in mean.iter_mut() {
            *m /= nc;
        }
        let mut var = vec![0.0; f];
        for &i in rows {
            for (j, v) in var.iter_mut().enumerate() {
                let d = train_h.get(i, j) - mean[j];
                *v += d * d;
            }
        }
        for v in var.iter_mut() {
            *v = (*v / nc).max(NB_VAR_FLOOR);
        }
        stats.push(ClassStats {
            class: c,
            log_prior: (nc / n).ln(),
            mean,
            var,
        });
    }

    let ln_2pi = (2.0 * core::f64::consts::PI).ln();
    let mut predictions = Vec::with_capacity(test_h.rows());
    for i in 0..test_h.rows() {
        let row = test_h.row(i);
        let mut best = (stats[0].class, f64::NEG_INFINITY);
        for s in &stats {
            let mut log_p = s.log_prior;
            for j in 0..f {
                let d = row[j] - s.mean[j];
                log_p -= 0.5 * (ln_2pi + s.var[j].ln() + d * d / s.var[j]);
            }
            if log_p > best.1 {
                best = (s.class, log_p);
            }
        }
        predictions.push(best.0);
    }
    Ok(predictions)
}

pub fn accuracy(predicted: &[usize], truth: &[usize]) -> f64 {
    debug_assert_eq!(predicted.len(), truth.len());
    if predicted.is_empty() {
        return 0.0;
    }
    let hits = predicted.iter().zip(truth).filter(|(p, t)| p == t).count();
    hits as f64 / predicted.len() as f64
}

/// How the pipeline obtains its graph(s).
#[derive(Clone, Debug, PartialEq)]
pub enum GraphSource {
    Knn { k: usize },
    Radius { r: f64 },
    Hybrid { k: usize, r: f64 },
    /// Label-driven sampler with an exact realized homophily.
    SyntheticHomophily { target_h: f64, total_edges: usize },
}

impl GraphSource {
    pub fn k(&self) -> Option<usize> {
        match self {
            GraphSource::Knn { k } | GraphSource::Hybrid { k, .. } => Some(*k),
            _ => None,
        }
    }

    pub fn r(&self) -> Option<f64> {
        match self {
            GraphSource::Radius { r } | GraphSource::Hybrid { r, .. } => Some(*r),
            _ => None,
        }
    }
}

/// Model selection plus its hyper-parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum ModelSpec {
    CncVae(VaeSpec),
    HVae(VaeSpec),
    CncVgae(GraphModelSpec),
    CncDgi(GraphModelSpec),
    TwoGraphDgi(GraphModelSpec),
    HeteroDgi(GraphModelSpec),
}

impl ModelSpec {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelSpec::CncVae(_) => ModelKind::CncVae,
            ModelSpec::HVae(_) => ModelKind::HVae,
            ModelSpec::CncVgae(_) => ModelKind::CncVgae,
            ModelSpec::CncDgi(_) => ModelKind::CncDgi,
            ModelSpec::TwoGraphDgi(_) => ModelKind::TwoGraphDgi,
            ModelSpec::HeteroDgi(_) => ModelKind::HeteroDgi,
        }
    }

    pub fn epochs(&self) -> usize {
        match self {
            ModelSpec::CncVae(s) | ModelSpec::HVae(s) => s.epochs,
            ModelSpec::CncVgae(s)
            | ModelSpec::CncDgi(s)
            | ModelSpec::TwoGraphDgi(s)
            | ModelSpec::HeteroDgi(s) => s.epochs,
        }
    }

    fn summary(&self) -> String {
        match self {
            ModelSpec::CncVae(s) | ModelSpec::HVae(s) => format!(
                "ds={} ls={} beta={} reg={:?} epochs={}",
                s.dense_size, s.latent_size, s.beta, s.reg, s.epochs
            ),
            ModelSpec::CncVgae(s)
            | ModelSpec::CncDgi(s)
            | ModelSpec::TwoGraphDgi(s)
            | ModelSpec::HeteroDgi(s) => format!(
                "conv={} ls={} ds={} integration={:?} reg={:?} epochs={}",
                s.conv_layers, s.latent_size, s.dense_size, s.integration, s.reg, s.epochs
            ),
        }
    }
}

/// Which classifier split the pipeline evaluates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplitKind {
    Holdout75_25,
    KFold(usize),
}

/// One pipeline run: dataset pair + model + graph recipe + split.
#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub model: ModelSpec,
    /// Required for the graph models, ignored by the plain ones.
    pub graph: Option<GraphSource>,
    pub modalities: (String, String),
    pub label_class: String,
    pub split: SplitKind,
    pub seed: u64,
}

/// One report line; `runtime_s` is stamped by the driver because wall
/// time is not a pure function of the inputs.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub model: String,
    pub modalities: String,
    pub label_class: String,
    pub k: Option<usize>,
    pub r: Option<f64>,
    pub homophily: Option<f64>,
    pub edges: Option<usize>,
    pub isolated: Option<usize>,
    pub seed: u64,
    pub train_acc: f64,
    pub test_acc: f64,
    pub epochs: usize,
}

/// Everything a pipeline run produces.
#[derive(Clone, Debug)]
pub struct PipelineOutput {
    pub rows: Vec<ReportRow>,
    pub embedding: Embedding,
    pub graph_stats: Vec<GraphStats>,
    /// Final loss of each trained network.
    pub final_losses: Vec<f64>,
}

fn build_graph(
    x: &Matrix,
    labels: &[usize],
    source: &GraphSource,
    seed: u64,
    tag: u64,
) -> Result<Graph> {
    match source {
        GraphSource::Knn { k } => {
            let dist = euclidean_distances(x);
            let g = knn_edges(x, *k)?;
            Ok(exp_edge_weight(&g, &dist)?)
        }
        GraphSource::Radius { r } => {
            let dist = euclidean_distances(x);
            let g = radius_edges(x, *r);
            Ok(exp_edge_weight(&g, &dist)?)
        }
        GraphSource::Hybrid { k, r } => {
            let dist = euclidean_distances(x);
            let g = hybrid_edges(x, *k, *r)?;
            Ok(exp_edge_weight(&g, &dist)?)
        }
        GraphSource::SyntheticHomophily {
            target_h,
            total_edges,
        } => {
            let mut rng = SplitRng::derive(seed, derive_seed(streams::GRAPH, tag));
            Ok(sample_graph_with_homophily(
                labels,
                *target_h,
                *total_edges,
                &mut rng,
            )?)
        }
    }
}

fn recon_kind(dataset: &MultiModalDataset, name: &str) -> Result<ReconKind> {
    match dataset.is_categorical(name) {
        Some(true) => Ok(ReconKind::Bce),
        Some(false) => Ok(ReconKind::Mse),
        None => Err(EvalError::Contract(format!("unknown modality {name}"))),
    }
}

/// Build graph(s), train the model, and encode the full dataset.
pub fn train_and_encode(
    dataset: &MultiModalDataset,
    cfg: &PipelineConfig,
) -> Result<(Embedding, Vec<GraphStats>, Vec<Vec<f64>>)> {
    let (name1, name2) = (&cfg.modalities.0, &cfg.modalities.1);
    let x1 = dataset
        .modality(name1)
        .ok_or_else(|| EvalError::Contract(format!("unknown modality {name1}")))?;
    let x2 = dataset
        .modality(name2)
        .ok_or_else(|| EvalError::Contract(format!("unknown modality {name2}")))?;
    let labels = &dataset
        .label(&cfg.label_class)
        .ok_or_else(|| EvalError::Contract(format!("unknown label class {}", cfg.label_class)))?
        .values;
    let model_seed = derive_seed(cfg.seed, 0xA11);

    let needs_graph = cfg.model.kind().is_graph_model();
    let source = match (&cfg.graph, needs_graph) {
        (Some(s), true) => Some(s),
        (None, true) => {
            return Err(EvalError::Contract(format!(
                "{} requires a graph source",
                cfg.model.kind()
            )))
        }
        (_, false) => None,
    };

    let stats_labels: &[(&str, &[usize])] = &[(cfg.label_class.as_str(), labels.as_slice())];
    let mut all_stats = Vec::new();

    let (h, histories, model_name) = match &cfg.model {
        ModelSpec::CncVae(spec) => {
            let recon = (recon_kind(dataset, name1)?, recon_kind(dataset, name2)?);
            let model = CncVae::train(x1, x2, recon, spec, model_seed)?;
            let h = model.encode(x1, x2)?;
            (h, vec![model.loss_history().to_vec()], "cnc-vae")
        }
        ModelSpec::HVae(spec) => {
            let inputs = [
                (x1, recon_kind(dataset, name1)?),
                (x2, recon_kind(dataset, name2)?),
            ];
            let model = HVae::train(&inputs, spec, model_seed)?;
            let h = model.encode(&[x1, x2])?;
            (h, model.loss_histories().to_vec(), "h-vae")
        }
        ModelSpec::CncVgae(spec) => {
            let xcat = x1.concat_cols(x2)?;
            let g = build_graph(&xcat, labels, source.expect("graph checked"), cfg.seed, 0)?;
            all_stats.push(graph_stats(&g, stats_labels));
            let adj = normalize_adjacency(&g);
            let target = binary_adjacency_with_loops(&g);
            let model = CncVgae::train(&xcat, &adj, &target, spec, model_seed)?;
            let h = model.encode(&xcat, &adj)?;
            (h, vec![model.loss_history().to_vec()], "cnc-vgae")
        }
        ModelSpec::CncDgi(spec) => {
            let xcat = x1.concat_cols(x2)?;
            let g = build_graph(&xcat, labels, source.expect("graph checked"), cfg.seed, 0)?;
            all_stats.push(graph_stats(&g, stats_labels));
            let adj = normalize_adjacency(&g);
            let model = CncDgi::train(&xcat, &adj, spec, model_seed)?;
            let h = model.encode(&xcat, &adj)?;
            (h, vec![model.loss_history().to_vec()], "cnc-dgi")
        }
        ModelSpec::TwoGraphDgi(spec) => {
            let g1 = build_graph(x1, labels, source.expect("graph checked"), cfg.seed, 1)?;
            let g2 = build_graph(x2, labels, source.expect("graph checked"), cfg.seed, 2)?;
            all_stats.push(graph_stats(&g1, stats_labels));
            all_stats.push(graph_stats(&g2, stats_labels));
            let adj1 = normalize_adjacency(&g1);
            let adj2 = normalize_adjacency(&g2);
            let model = TwoGraphDgi::train(x1, &adj1, x2, &adj2, spec, model_seed)?;
            let h = model.encode(x1, &adj1, x2, &adj2)?;
            (h, vec![model.loss_history().to_vec()], "2g-dgi")
        }
        ModelSpec::HeteroDgi(spec) => {
            let g1 = build_graph(x1, labels, source.expect("graph checked"), cfg.seed, 1)?;
            let g2 = build_graph(x2, labels, source.expect("graph checked"), cfg.seed, 2)?;
            let hetero = build_hetero_graph(&g1, &g2)?;
            let mut doubled = labels.clone();
            doubled.extend_from_slice(labels);
            all_stats.push(graph_stats(
                &hetero,
                &[(cfg.label_class.as_str(), doubled.as_slice())],
            ));
            let adj = normalize_adjacency(&hetero);
            let model = HeteroDgi::train(x1, x2, &adj, spec, model_seed)?;
            let h = model.encode(x1, x2, &adj)?;
            (h, vec![model.loss_history().to_vec()], "hetero-dgi")
        }
    };

    let embedding = Embedding {
        h,
        provenance: Provenance {
            model: model_name.to_string(),
            spec_summary: cfg.model.summary(),
            graph_stats: all_stats.clone(),
            loss_history: histories.clone(),
        },
    };
    Ok((embedding, all_stats, histories))
}

/// Full pipeline: graph(s) -> model -> embedding -> classifier.
pub fn run_pipeline(dataset: &MultiModalDataset, cfg: &PipelineConfig) -> Result<PipelineOutput> {
    let labels = &dataset
        .label(&cfg.label_class)
        .ok_or_else(|| EvalError::Contract(format!("unknown label class {}", cfg.label_class)))?
        .values;
    let (embedding, stats, histories) = train_and_encode(dataset, cfg)?;

    let plan = match cfg.split {
        SplitKind::Holdout75_25 => split_75_25(labels, cfg.seed)?,
        SplitKind::KFold(k) => stratified_kfold(labels, k, cfg.seed)?,
    };

    // Aggregate graph columns: edge-weighted homophily over all graphs
    // the model consumed.
    let (homophily, edges, isolated) = if stats.is_empty() {
        (None, None, None)
    } else {
        let total_edges: usize = stats.iter().map(|s| s.edge_count).sum();
        let total_isolated: usize = stats.iter().map(|s| s.isolated_count).sum();
        let h = if total_edges > 0 {
            let weighted: f64 = stats
                .iter()
                .filter_map(|s| {
                    s.homophily
                        .first()
                        .map(|(_, h)| h * s.edge_count as f64)
                })
                .sum();
            Some(weighted / total_edges as f64)
        } else {
            None
        };
        (h, Some(total_edges), Some(total_isolated))
    };

    let mut rows = Vec::with_capacity(plan.n_splits());
    for fold in 0..plan.n_splits() {
        let (train_idx, test_idx) = plan.split(fold);
        let train_h = embedding.h.gather_rows(&train_idx)?;
        let test_h = embedding.h.gather_rows(&test_idx)?;
        let train_y: Vec<usize> = train_idx.iter().map(|&i| labels[i]).collect();
        let test_y: Vec<usize> = test_idx.iter().map(|&i| labels[i]).collect();
        let train_pred = gaussian_nb(&train_h, &train_y, &train_h)?;
        let test_pred = gaussian_nb(&train_h, &train_y, &test_h)?;
        rows.push(ReportRow {
            model: cfg.model.kind().name().to_string(),
            modalities: format!("{}+{}", cfg.modalities.0, cfg.modalities.1),
            label_class: cfg.label_class.clone(),
            k: cfg.graph.as_ref().and_then(|g| g.k()),
            r: cfg.graph.as_ref().and_then(|g| g.r()),
            homophily,
            edges,
            isolated,
            seed: cfg.seed,
            train_acc: accuracy(&train_pred, &train_y),
            test_acc: accuracy(&test_pred, &test_y),
            epochs: cfg.model.epochs(),
        });
    }

    let final_losses = histories
        .iter()
        .filter_map(|h| h.last().copied())
        .collect();
    Ok(PipelineOutput {
        rows,
        embedding,
        graph_stats: stats,
        final_losses,
    })
}

/// Train/test accuracy of the classifier on the raw concatenated
/// features, the no-model baseline.
pub fn raw_feature_baseline(
    dataset: &MultiModalDataset,
    modalities: (&str, &str),
    label_class: &str,
    split: SplitKind,
    seed: u64,
) -> Result<(f64, f64)> {
    let x1 = dataset
        .modality(modalities.0)
        .ok_or_else(|| EvalError::Contract(format!("unknown modality {}", modalities.0)))?;
    let x2 = dataset
        .modality(modalities.1)
        .ok_or_else(|| EvalError::Contract(format!("unknown modality {}", modalities.1)))?;
    let labels = &dataset
        .label(label_class)
        .ok_or_else(|| EvalError::Contract(format!("unknown label class {label_class}")))?
        .values;
    let x = x1.concat_cols(x2)?;
    let plan = match split {
        SplitKind::Holdout75_25 => split_75_25(labels, seed)?,
        SplitKind::KFold(k) => stratified_kfold(labels, k, seed)?,
    };
    let mut train_accs = Vec::new();
    let mut test_accs = Vec::new();
    for fold in 0..plan.n_splits() {
        let (train_idx, test_idx) = plan.split(fold);
        let train_h = x.gather_rows(&train_idx)?;
        let test_h = x.gather_rows(&test_idx)?;
        let train_y: Vec<usize> = train_idx.iter().map(|&i| labels[i]).collect();
        let test_y: Vec<usize> = test_idx.iter().map(|&i| labels[i]).collect();
        train_accs.push(accuracy(&gaussian_nb(&train_h, &train_y, &train_h)?, &train_y));
        test_accs.push(accuracy(&gaussian_nb(&train_h, &train_y, &test_h)?, &test_y));
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    Ok((mean(&train_accs), mean(&test_accs)))
}

/// Cartesian sweep over graph parameters, models, label classes, and
/// repeat seeds.
#[derive(Clone, Debug)]
pub struct SweepGrid {
    pub models: Vec<ModelSpec>,
    pub modalities: (String, String),
    pub label_classes: Vec<String>,
    pub k_values: Vec<usize>,
    pub r_values: Vec<f64>,
    /// Independent seeds per cell (mean/std reported downstream).
    pub repeats: usize,
    pub base_seed: u64,
    pub split: SplitKind,
}

/// One unit of sweep work. Graph-free models carry no `k`/`r`.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepCell {
    pub model: ModelSpec,
    pub label_class: String,
    pub k: Option<usize>,
    pub r: Option<f64>,
    pub repeat: usize,
    pub seed: u64,
}

impl SweepCell {
    /// Stable identity used for resumability; matches the identifying
    /// report columns.
    pub fn key(&self, modalities: &(String, String)) -> String {
        format!(
            "{}|{}+{}|{}|{}|{}|{}",
            self.model.kind().name(),
            modalities.0,
            modalities.1,
            self.label_class,
            self.k.map(|k| k.to_string()).unwrap_or_else(|| "-".into()),
            self.r.map(|r| format!("{r}")).unwrap_or_else(|| "-".into()),
            self.seed
        )
    }

    pub fn pipeline_config(&self, grid: &SweepGrid) -> PipelineConfig {
        let graph = match (self.k, self.r) {
            (Some(k), Some(r)) => Some(GraphSource::Hybrid { k, r }),
            _ => None,
        };
        PipelineConfig {
            model: self.model.clone(),
            graph,
            modalities: grid.modalities.clone(),
            label_class: self.label_class.clone(),
            split: grid.split,
            seed: self.seed,
        }
    }
}

fn fnv1a(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x1000_0000_01b3);
    }
    h
}

impl SweepGrid {
    pub fn cells(&self) -> Vec<SweepCell> {
        let mut out = Vec::new();
        for model in &self.models {
            // Graph-free models ignore the (k, r) grid: one cell per
            // (label class, repeat).
            let grid_points: Vec<(Option<usize>, Option<f64>)> =
                if model.kind().is_graph_model() {
                    self.k_values
                        .iter()
                        .flat_map(|&k| self.r_values.iter().map(move |&r| (Some(k), Some(r))))
                        .collect()
                } else {
                    vec![(None, None)]
                };
            for label_class in &self.label_classes {
                for &(k, r) in &grid_points {
                    for repeat in 0..self.repeats {
                        let ident = format!(
                            "{}|{}|{}|{}|{}",
                            model.kind().name(),
                            label_class,
                            k.map(|k| k.to_string()).unwrap_or_else(|| "-".into()),
                            r.map(|r| format!("{r}")).unwrap_or_else(|| "-".into()),
                            repeat
                        );
                        let seed = derive_seed(self.base_seed, fnv1a(&ident));
                        out.push(SweepCell {
                            model: model.clone(),
                            label_class: label_class.clone(),
                            k,
                            r,
                            repeat,
                            seed,
                        });
                    }
                }
            }
        }
        out
    }
}

/// Homophily of the hybrid graph a sweep cell would build, computed
/// without training (used to audit how `r` shifts graph quality).
pub fn cell_graph_homophily(
    dataset: &MultiModalDataset,
    modalities: (&str, &str),
    label_class: &str,
    k: usize,
    r: f64,
) -> Result<f64> {
    let x1 = dataset
        .modality(modalities.0)
        .ok_or_else(|| EvalError::Contract(format!("unknown modality {}", modalities.0)))?;
    let x2 = dataset
        .modality(modalities.1)
        .ok_or_else(|| EvalError::Contract(format!("unknown modality {}", modalities.1)))?;
    let labels = &dataset
        .label(label_class)
        .ok_or_else(|| EvalError::Contract(format!("unknown label class {label_class}")))?
        .values;
    let x = x1.concat_cols(x2)?;
    let g = hybrid_edges(&x, k, r)?;
    Ok(edge_homophily(&g, labels)?)
}
