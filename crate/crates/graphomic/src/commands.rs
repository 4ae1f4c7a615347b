//! Implementations behind the CLI subcommands.

use std::path::{Path, PathBuf};

use serde_json::json;

use graphomic_core::eval::{run_pipeline, GraphSource, PipelineConfig, SplitKind, SweepGrid};
use graphomic_core::graphbuild::{
    edge_homophily, euclidean_distances, exp_edge_weight, graph_stats, hybrid_edges, knn_edges,
    radius_edges, GraphStats,
};
use graphomic_core::models::ModelKind;
use graphomic_core::synthgen::{pca_separation_check, sample_synthetic_dataset};

use crate::config::{
    build_model_spec, load_json, to_canonical_json, SweepConfig, SynthGenConfig, TrainConfig,
};
use crate::ingest::ingest;
use crate::io::{
    atomic_write, fmt3, read_graph_csv, read_labels_csv, read_matrix_csv, write_graph_csv,
    write_labels_csv, write_matrix_csv,
};
use crate::svg::{heatmap_svg, scatter_svg};
use crate::AppError;

pub type Result<T> = std::result::Result<T, AppError>;

fn config_err(msg: impl std::fmt::Display) -> AppError {
    AppError::Config(msg.to_string())
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| AppError::Data(format!("{}: {e}", dir.display())))
}

/// `gen-synth`: sample the two-modality dataset and write it as CSVs
/// plus a meta.json echoing the configuration.
pub fn gen_synth(config_path: &Path, out_dir: &Path) -> Result<()> {
    let cfg: SynthGenConfig = load_json(config_path)?;
    let synth = cfg.to_synth_config();
    synth.validate().map_err(config_err)?;
    let dataset = sample_synthetic_dataset(&synth).map_err(|e| AppError::Data(e.to_string()))?;
    ensure_dir(out_dir)?;

    let width = dataset.n_rows().to_string().len().max(4);
    let ids: Vec<String> = (0..dataset.n_rows())
        .map(|i| format!("s{i:0width$}"))
        .collect();
    for name in dataset.modality_names() {
        let m = dataset.modality(name).expect("listed modality");
        write_matrix_csv(&out_dir.join(format!("{name}.csv")), &ids, m)?;
    }
    let classes: Vec<(String, Vec<usize>)> = dataset
        .labels()
        .iter()
        .map(|(name, lv)| (name.clone(), lv.values.clone()))
        .collect();
    write_labels_csv(&out_dir.join("labels.csv"), &ids, &classes)?;

    let meta = json!({
        "categorical": [],
        "seed": cfg.seed,
        "generator": serde_json::to_value(&cfg).expect("config serializes"),
    });
    atomic_write(
        &out_dir.join("meta.json"),
        (serde_json::to_string_pretty(&meta).expect("meta serializes") + "\n").as_bytes(),
    )?;
    println!(
        "wrote {} samples x ({}) to {}",
        dataset.n_rows(),
        dataset.modality_names().join(", "),
        out_dir.display()
    );
    Ok(())
}

/// `build-graph`: construct a graph from a feature CSV and store it as
/// an `i,j,weight` edge list with `exp(-distance)` weights.
pub fn build_graph(
    features: &Path,
    method: &str,
    k: Option<usize>,
    r: Option<f64>,
    out: &Path,
) -> Result<()> {
    let (_, _, x) = read_matrix_csv(features)?;
    let graph = match method {
        "knn" => {
            let k = k.ok_or_else(|| config_err("method knn requires --k"))?;
            knn_edges(&x, k).map_err(config_err)?
        }
        "radius" => {
            let r = r.ok_or_else(|| config_err("method radius requires --r"))?;
            radius_edges(&x, r)
        }
        "hybrid" => {
            let k = k.ok_or_else(|| config_err("method hybrid requires --k"))?;
            let r = r.ok_or_else(|| config_err("method hybrid requires --r"))?;
            hybrid_edges(&x, k, r).map_err(config_err)?
        }
        other => {
            return Err(config_err(format!(
                "unknown method {other:?}; expected knn, radius, or hybrid"
            )))
        }
    };
    let dist = euclidean_distances(&x);
    let weighted = exp_edge_weight(&graph, &dist).map_err(|e| AppError::Data(e.to_string()))?;
    write_graph_csv(out, &weighted)?;
    let echo = json!({
        "features": features.display().to_string(),
        "method": method,
        "k": k,
        "r": r,
        "nodes": x.rows(),
        "edges": weighted.n_edges(),
    });
    atomic_write(
        &out.with_extension("meta.json"),
        (serde_json::to_string_pretty(&echo).expect("echo serializes") + "\n").as_bytes(),
    )?;
    println!(
        "{} nodes, {} edges, {} isolated -> {}",
        weighted.n_nodes(),
        weighted.n_edges(),
        weighted.isolated_count(),
        out.display()
    );
    Ok(())
}

fn stats_json(stats: &GraphStats) -> serde_json::Value {
    json!({
        "n_nodes": stats.n_nodes,
        "edges": stats.edge_count,
        "isolated": stats.isolated_count,
        "degree_histogram": stats
            .degree_histogram
            .iter()
            .map(|(d, c)| json!({"degree": d, "nodes": c}))
            .collect::<Vec<_>>(),
        "homophily": stats
            .homophily
            .iter()
            .map(|(name, h)| json!({"label_class": name, "value": h}))
            .collect::<Vec<_>>(),
    })
}

/// `homophily`: edge homophily of a stored graph per label class, plus
/// structural stats, written as JSON. Prints the homophily values.
pub fn homophily(graph_path: &Path, labels_path: &Path, out: &Path) -> Result<()> {
    let (ids, class_names, raw) = read_labels_csv(labels_path)?;
    let graph = read_graph_csv(graph_path, ids.len())?;
    let mut encoded: Vec<(String, Vec<usize>)> = Vec::new();
    for (c, name) in class_names.iter().enumerate() {
        encoded.push((name.clone(), crate::ingest::encode_label_column(&raw[c])));
    }
    let label_refs: Vec<(&str, &[usize])> = encoded
        .iter()
        .map(|(n, v)| (n.as_str(), v.as_slice()))
        .collect();
    let stats = graph_stats(&graph, &label_refs);
    atomic_write(
        out,
        (serde_json::to_string_pretty(&stats_json(&stats)).expect("stats serialize") + "\n")
            .as_bytes(),
    )?;
    if graph.n_edges() == 0 {
        println!("graph has no edges; homophily undefined");
        return Ok(());
    }
    if encoded.len() == 1 {
        let h = edge_homophily(&graph, &encoded[0].1).map_err(|e| AppError::Data(e.to_string()))?;
        println!("{}", fmt3(h));
    } else {
        for (name, values) in &encoded {
            let h = edge_homophily(&graph, values).map_err(|e| AppError::Data(e.to_string()))?;
            println!("{name} {}", fmt3(h));
        }
    }
    Ok(())
}

/// `train`: run the pipeline once, write the embedding CSV and a
/// run.json recording spec, seed, graph stats, and final losses.
pub fn train(model_name: &str, spec_path: &Path, data_dir: &Path, out: &Path) -> Result<()> {
    let kind = ModelKind::parse(model_name)
        .ok_or_else(|| config_err(format!("unknown model {model_name:?}")))?;
    let cfg: TrainConfig = load_json(spec_path)?;
    let ingested = ingest(data_dir)?;
    let ds = &ingested.dataset;

    let modalities = match &cfg.modalities {
        Some(pair) => pair.clone(),
        None => {
            let names = ds.modality_names();
            if names.len() < 2 {
                return Err(config_err("dataset has fewer than 2 modalities"));
            }
            (names[0].to_string(), names[1].to_string())
        }
    };
    let label_class = match &cfg.label_class {
        Some(name) => name.clone(),
        None => {
            let mut names = ds.labels().keys();
            match (names.next(), names.next()) {
                (Some(only), None) => only.clone(),
                _ => return Err(config_err("dataset has several label classes; set label_class")),
            }
        }
    };
    let model = build_model_spec(kind, &cfg.vae, &cfg.graph_model)?;
    let pipeline = PipelineConfig {
        model,
        graph: cfg.graph.as_ref().map(|g| g.to_source()),
        modalities,
        label_class,
        split: cfg
            .split
            .as_ref()
            .map(|s| s.to_kind())
            .unwrap_or(SplitKind::Holdout75_25),
        seed: cfg.seed,
    };
    validate_pipeline(&pipeline).map_err(config_err)?;

    let output = run_pipeline(ds, &pipeline)?;

    let embedding_csv = out.with_extension("embedding.csv");
    write_matrix_csv(&embedding_csv, &ingested.ids, &output.embedding.h)?;

    let run = json!({
        "model": kind.name(),
        "seed": cfg.seed,
        "spec": serde_json::from_str::<serde_json::Value>(&to_canonical_json(&cfg))
            .expect("canonical json parses"),
        "graph_stats": output.graph_stats.iter().map(stats_json).collect::<Vec<_>>(),
        "final_losses": output.final_losses,
        "embedding_csv": embedding_csv.display().to_string(),
        "folds": output
            .rows
            .iter()
            .enumerate()
            .map(|(i, row)| json!({
                "fold": i,
                "train_acc": row.train_acc,
                "test_acc": row.test_acc,
            }))
            .collect::<Vec<_>>(),
    });
    atomic_write(
        out,
        (serde_json::to_string_pretty(&run).expect("run serializes") + "\n").as_bytes(),
    )?;
    for row in &output.rows {
        println!(
            "{} {} train {} test {}",
            row.model,
            row.label_class,
            fmt3(row.train_acc),
            fmt3(row.test_acc)
        );
    }
    Ok(())
}

/// Reject configurations the pipeline itself would only catch late.
fn validate_pipeline(cfg: &PipelineConfig) -> std::result::Result<(), String> {
    match &cfg.model {
        graphomic_core::eval::ModelSpec::CncVae(s) | graphomic_core::eval::ModelSpec::HVae(s) => {
            s.validate().map_err(|e| e.to_string())
        }
        graphomic_core::eval::ModelSpec::CncVgae(s)
        | graphomic_core::eval::ModelSpec::CncDgi(s)
        | graphomic_core::eval::ModelSpec::TwoGraphDgi(s)
        | graphomic_core::eval::ModelSpec::HeteroDgi(s) => {
            s.validate().map_err(|e| e.to_string())
        }
    }?;
    if cfg.model.kind().is_graph_model() && cfg.graph.is_none() {
        return Err(format!("{} requires a graph section", cfg.model.kind()));
    }
    if let Some(GraphSource::SyntheticHomophily { target_h, .. }) = cfg.graph {
        if !(0.0..=1.0).contains(&target_h) {
            return Err(format!("target_h {target_h} outside [0, 1]"));
        }
    }
    Ok(())
}

/// `sweep`: execute the (k, r) x models x labels grid, resumable.
pub fn sweep(config_path: &Path, out: &Path) -> Result<()> {
    let cfg: SweepConfig = load_json(config_path)?;
    if cfg.models.is_empty() {
        return Err(config_err("sweep needs at least one model"));
    }
    let data_dir = PathBuf::from(&cfg.data);
    let ingested = ingest(&data_dir)?;
    let ds = &ingested.dataset;

    let modalities = match &cfg.modalities {
        Some(pair) => pair.clone(),
        None => {
            let names = ds.modality_names();
            if names.len() < 2 {
                return Err(config_err("dataset has fewer than 2 modalities"));
            }
            (names[0].to_string(), names[1].to_string())
        }
    };
    let label_classes = match &cfg.label_classes {
        Some(list) if !list.is_empty() => list.clone(),
        _ => ds.labels().keys().cloned().collect(),
    };
    for label in &label_classes {
        if ds.label(label).is_none() {
            return Err(config_err(format!("unknown label class {label:?}")));
        }
    }
    let mut models = Vec::new();
    for name in &cfg.models {
        let kind = ModelKind::parse(name)
            .ok_or_else(|| config_err(format!("unknown model {name:?}")))?;
        models.push(build_model_spec(kind, &cfg.vae, &cfg.graph_model)?);
    }
    let grid = SweepGrid {
        models,
        modalities,
        label_classes,
        k_values: cfg.k_values.clone(),
        r_values: cfg.r_values.clone(),
        repeats: cfg.repeats,
        base_seed: cfg.seed,
        split: cfg
            .split
            .as_ref()
            .map(|s| s.to_kind())
            .unwrap_or(SplitKind::Holdout75_25),
    };

    // Archive the configuration beside the report.
    atomic_write(
        &out.with_extension("config.json"),
        to_canonical_json(&cfg).as_bytes(),
    )?;

    let outcome = crate::sweep::run_sweep(ds, &grid, out)?;
    println!(
        "sweep: {} run, {} skipped (already in report), {} failed",
        outcome.executed, outcome.skipped, outcome.failed
    );
    for (desc, mean, std) in &outcome.summary {
        println!("{desc}: test acc {} +- {}", fmt3(*mean), fmt3(*std));
    }
    if outcome.failed > 0 {
        return Err(AppError::Data(format!("{} sweep cells failed", outcome.failed)));
    }
    Ok(())
}

/// `plot --report`: one accuracy heatmap per (model, label class).
pub fn plot_report(report_path: &Path, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let records = crate::report::read_report(report_path)?;
    let rows: Vec<_> = records
        .iter()
        .filter(|r| r.row.k.is_some() && r.row.r.is_some())
        .collect();
    if rows.is_empty() {
        eprintln!("warning: report has no grid rows to plot; nothing written");
        return Ok(Vec::new());
    }
    ensure_dir(out_dir)?;
    let mut groups: std::collections::BTreeMap<(String, String), Vec<&graphomic_core::eval::ReportRow>> =
        std::collections::BTreeMap::new();
    for rec in &rows {
        groups
            .entry((rec.row.model.clone(), rec.row.label_class.clone()))
            .or_default()
            .push(&rec.row);
    }
    let mut written = Vec::new();
    for ((model, label), group) in &groups {
        let svg = heatmap_svg(model, label, group);
        let path = out_dir.join(format!("heatmap_{model}_{label}.svg"));
        atomic_write(&path, svg.as_bytes())?;
        written.push(path);
    }
    println!("wrote {} heatmap(s) to {}", written.len(), out_dir.display());
    Ok(written)
}

/// `plot --pca-data`: principal-component scatter of one modality,
/// colored by a label class.
pub fn plot_pca(
    data_dir: &Path,
    modality: &str,
    label_class: &str,
    out_dir: &Path,
) -> Result<PathBuf> {
    let ingested = ingest(data_dir)?;
    let check = pca_separation_check(&ingested.dataset, modality, label_class)
        .map_err(|e| AppError::Data(e.to_string()))?;
    let labels = &ingested
        .dataset
        .label(label_class)
        .expect("checked by pca")
        .values;
    ensure_dir(out_dir)?;
    let title = format!(
        "{modality} by {label_class} (overlap {})",
        fmt3(check.overlap_score)
    );
    let svg = scatter_svg(&title, &check.projection, labels);
    let path = out_dir.join(format!("pca_{modality}_{label_class}.svg"));
    atomic_write(&path, svg.as_bytes())?;
    println!("wrote {}", path.display());
    Ok(path)
}
