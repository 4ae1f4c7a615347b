//! Cross-model training invariants on small synthetic inputs.

use graphomic_core::eval::{
    run_pipeline, GraphSource, ModelSpec, PipelineConfig, SplitKind,
};
use graphomic_core::graphbuild::{normalize_adjacency, Graph};
use graphomic_core::models::{
    CncDgi, CncVae, GraphModelSpec, HeteroDgi, Integration, TwoGraphDgi, VaeSpec,
};
use graphomic_core::nn::ReconKind;
use graphomic_core::synthgen::{
    sample_graph_with_homophily, sample_synthetic_dataset, SynthConfig,
};
use graphomic_core::{Matrix, SplitRng};

fn small_dataset(seed: u64) -> graphomic_core::synthgen::MultiModalDataset {
    sample_synthetic_dataset(&SynthConfig {
        n_per_class: 60,
        dims_alpha: 8,
        dims_beta: 6,
        seed,
        ..Default::default()
    })
    .unwrap()
}

fn graph_source() -> GraphSource {
    GraphSource::SyntheticHomophily {
        target_h: 0.9,
        total_edges: 600,
    }
}

fn quick_graph_spec() -> GraphModelSpec {
    GraphModelSpec {
        epochs: 40,
        latent_size: 8,
        dense_size: 16,
        ..Default::default()
    }
}

fn quick_vae_spec() -> VaeSpec {
    VaeSpec {
        epochs: 40,
        batch_size: 32,
        ..Default::default()
    }
}

/// Loss at each epoch stays within 5% of the best seen so far for at
/// least 80% of the epochs (training may wobble but must not diverge).
fn assert_soft_monotone(name: &str, losses: &[f64]) {
    assert!(!losses.is_empty(), "{name}: empty loss history");
    let mut best = f64::INFINITY;
    let mut ok = 0usize;
    for &l in losses {
        best = best.min(l);
        if l <= 1.05 * best {
            ok += 1;
        }
    }
    let frac = ok as f64 / losses.len() as f64;
    assert!(
        frac >= 0.8,
        "{name}: only {frac:.2} of epochs within 1.05x of the running minimum"
    );
}

#[test]
fn every_model_trains_without_divergence() {
    // The graph models train full-batch, so a small graph is enough;
    // the minibatch models need enough batches per epoch for the
    // epoch-mean loss to be a stable readout.
    let ds = small_dataset(11);
    let big = sample_synthetic_dataset(&SynthConfig {
        seed: 11,
        ..Default::default()
    })
    .unwrap();
    let graph_models = [
        ModelSpec::CncVgae(quick_graph_spec()),
        ModelSpec::CncDgi(quick_graph_spec()),
        ModelSpec::TwoGraphDgi(quick_graph_spec()),
        ModelSpec::HeteroDgi(GraphModelSpec {
            integration: Integration::Dense,
            ..quick_graph_spec()
        }),
    ];
    let vae_models = [
        ModelSpec::CncVae(quick_vae_spec()),
        ModelSpec::HVae(quick_vae_spec()),
    ];
    let runs = graph_models
        .into_iter()
        .map(|m| (m, &ds))
        .chain(vae_models.into_iter().map(|m| (m, &big)));
    for (model, data) in runs {
        let name = model.kind().name().to_string();
        let cfg = PipelineConfig {
            model,
            graph: Some(graph_source()),
            modalities: ("alpha".into(), "beta".into()),
            label_class: "synthetic".into(),
            split: SplitKind::Holdout75_25,
            seed: 5,
        };
        let out = run_pipeline(data, &cfg).unwrap();
        for losses in &out.embedding.provenance.loss_history {
            assert_soft_monotone(&name, losses);
        }
    }
}

#[test]
fn dgi_family_separates_scores_on_homophilous_graphs() {
    let ds = small_dataset(13);
    let x1 = ds.modality("alpha").unwrap();
    let x2 = ds.modality("beta").unwrap();
    let labels = &ds.label("synthetic").unwrap().values;
    let spec = quick_graph_spec();

    let mut rng = SplitRng::seed_from(7);
    let g1 = sample_graph_with_homophily(labels, 0.8, 600, &mut rng).unwrap();
    let g2 = sample_graph_with_homophily(labels, 0.8, 600, &mut rng).unwrap();
    let adj1 = normalize_adjacency(&g1);
    let adj2 = normalize_adjacency(&g2);

    let xcat = x1.concat_cols(x2).unwrap();
    let cnc = CncDgi::train(&xcat, &adj1, &spec, 3).unwrap();
    let s = cnc.final_scores();
    assert!(s.mean_positive > s.mean_negative, "cnc-dgi: {s:?}");

    let two = TwoGraphDgi::train(x1, &adj1, x2, &adj2, &spec, 3).unwrap();
    let s = two.final_scores();
    assert!(s.mean_positive > s.mean_negative, "2g-dgi: {s:?}");

    let hetero_graph = graphomic_core::models::build_hetero_graph(&g1, &g2).unwrap();
    let hadj = normalize_adjacency(&hetero_graph);
    let hetero = HeteroDgi::train(
        x1,
        x2,
        &hadj,
        &GraphModelSpec {
            integration: Integration::Dense,
            ..quick_graph_spec()
        },
        3,
    )
    .unwrap();
    let s = hetero.final_scores();
    assert!(s.mean_positive > s.mean_negative, "hetero-dgi: {s:?}");
}

/// A trained encoder is permutation-equivariant: permuting the input
/// rows (and the graph nodes consistently) permutes the embedding rows.
#[test]
fn trained_encoders_are_permutation_equivariant() {
    let ds = small_dataset(17);
    let x1 = ds.modality("alpha").unwrap();
    let x2 = ds.modality("beta").unwrap();
    let labels = &ds.label("synthetic").unwrap().values;
    let xcat = x1.concat_cols(x2).unwrap();
    let n = xcat.rows();

    let mut rng = SplitRng::seed_from(23);
    let graph = sample_graph_with_homophily(labels, 0.8, 600, &mut rng).unwrap();
    let adj = normalize_adjacency(&graph);
    let spec = quick_graph_spec();
    let model = CncDgi::train(&xcat, &adj, &spec, 9).unwrap();
    let h = model.encode(&xcat, &adj).unwrap();

    let perm = {
        let mut r = SplitRng::seed_from(31);
        r.permutation(n)
    };
    // Row i of the permuted input holds original row perm[i]; the
    // permuted graph relabels node perm[i] -> i.
    let x_perm = xcat.gather_rows(&perm).unwrap();
    let mut inverse = vec![0usize; n];
    for (new, &old) in perm.iter().enumerate() {
        inverse[old] = new;
    }
    let g_perm = Graph::new(
        n,
        graph.edges().iter().map(|&(a, b)| (inverse[a], inverse[b])),
    )
    .unwrap();
    let adj_perm = normalize_adjacency(&g_perm);
    let h_perm = model.encode(&x_perm, &adj_perm).unwrap();

    let expected = h.gather_rows(&perm).unwrap();
    let diff = h_perm.sub(&expected).unwrap().max_abs();
    assert!(diff < 1e-9, "encode equivariance violated: {diff}");

    // The plain variational encoder is row-wise, so the same holds.
    let vae = CncVae::train(x1, x2, (ReconKind::Mse, ReconKind::Mse), &quick_vae_spec(), 9)
        .unwrap();
    let hv = vae.encode(x1, x2).unwrap();
    let hv_perm = vae
        .encode(
            &x1.gather_rows(&perm).unwrap(),
            &x2.gather_rows(&perm).unwrap(),
        )
        .unwrap();
    let diff = hv_perm.sub(&hv.gather_rows(&perm).unwrap()).unwrap().max_abs();
    assert!(diff < 1e-9, "vae encode equivariance violated: {diff}");
}

/// Without class separation there is nothing to classify: held-out
/// accuracy sits at chance.
#[test]
fn zero_offset_dataset_scores_at_chance() {
    let ds = sample_synthetic_dataset(&SynthConfig {
        n_per_class: 300,
        dims_alpha: 8,
        dims_beta: 6,
        theta_alpha: 0.0,
        theta_beta: 0.0,
        seed: 2,
        ..Default::default()
    })
    .unwrap();
    // The graph-free model sees only the features; a label-sampled
    // graph would smuggle the labels back in through its structure.
    let cfg = PipelineConfig {
        model: ModelSpec::CncVae(VaeSpec {
            epochs: 10,
            ..Default::default()
        }),
        graph: None,
        modalities: ("alpha".into(), "beta".into()),
        label_class: "synthetic".into(),
        split: SplitKind::Holdout75_25,
        seed: 4,
    };
    let out = run_pipeline(&ds, &cfg).unwrap();
    let acc = out.rows[0].test_acc;
    assert!((acc - 0.5).abs() <= 0.08, "expected chance level, got {acc}");
}

/// Encoding twice gives identical embeddings of the right shape, row
/// order preserved.
#[test]
fn encode_is_stable_and_row_aligned() {
    let ds = small_dataset(19);
    let x1 = ds.modality("alpha").unwrap();
    let x2 = ds.modality("beta").unwrap();
    let spec = quick_vae_spec();
    let model = CncVae::train(x1, x2, (ReconKind::Mse, ReconKind::Mse), &spec, 1).unwrap();
    let a = model.encode(x1, x2).unwrap();
    let b = model.encode(x1, x2).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.shape(), (ds.n_rows(), spec.latent_size));

    // Moving one row to the front moves exactly that embedding row.
    let order: Vec<usize> = (0..ds.n_rows()).rev().collect();
    let reversed = model
        .encode(
            &x1.gather_rows(&order).unwrap(),
            &x2.gather_rows(&order).unwrap(),
        )
        .unwrap();
    let diff = reversed
        .sub(&a.gather_rows(&order).unwrap())
        .unwrap()
        .max_abs();
    assert!(diff < 1e-9);
}

/// The normalized adjacency has spectral radius at most 1 (checked by
/// power iteration).
#[test]
fn normalized_adjacency_spectral_radius_is_bounded() {
    let ds = small_dataset(29);
    let labels = &ds.label("synthetic").unwrap().values;
    let mut rng = SplitRng::seed_from(41);
    let g = sample_graph_with_homophily(labels, 0.7, 500, &mut rng).unwrap();
    let adj = normalize_adjacency(&g);
    let n = adj.n_nodes();
    let mut v = Matrix::from_fn(n, 1, |i, _| 1.0 + (i % 7) as f64 * 0.1).unwrap();
    let mut radius = 0.0;
    for _ in 0..200 {
        let next = adj.matrix().matmul(&v).unwrap();
        let norm = next.data().iter().map(|x| x * x).sum::<f64>().sqrt();
        radius = norm / v.data().iter().map(|x| x * x).sum::<f64>().sqrt();
        v = next.scale(1.0 / norm).unwrap();
    }
    assert!(radius <= 1.0 + 1e-9, "spectral radius {radius}");
}
