//! End-to-end tests of the `graphomic` binary: every subcommand, the
//! documented exit codes, and the file formats they exchange.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use graphomic::ingest::ingest;
use graphomic::io::write_graph_csv;
use graphomic_core::synthgen::{sample_class_pair_edges, PairCounts};
use graphomic_core::SplitRng;
use tempfile::tempdir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_graphomic"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn assert_code(out: &Output, code: i32) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

/// Small dataset on disk for the data-driven commands.
fn gen_dataset(dir: &Path) -> PathBuf {
    let cfg = dir.join("synth.json");
    write(
        &cfg,
        r#"{"seed": 7, "n_per_class": 40, "dims_alpha": 6, "dims_beta": 4}"#,
    );
    let data = dir.join("data");
    let out = run(&[
        "gen-synth",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        data.to_str().unwrap(),
    ]);
    assert_code(&out, 0);
    data
}

#[test]
fn gen_synth_outputs_reingest_and_are_deterministic() {
    let dir = tempdir().unwrap();
    let data = gen_dataset(dir.path());
    for file in ["alpha.csv", "beta.csv", "labels.csv", "meta.json"] {
        assert!(data.join(file).exists(), "{file} missing");
    }
    let ingested = ingest(&data).unwrap();
    assert_eq!(ingested.dataset.n_rows(), 80);
    assert_eq!(ingested.dataset.modality("alpha").unwrap().cols(), 6);
    assert_eq!(ingested.meta.seed, Some(7));

    // Re-running with the same config reproduces the files exactly.
    let data2 = dir.path().join("data2");
    let cfg = dir.path().join("synth.json");
    let out = run(&[
        "gen-synth",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        data2.to_str().unwrap(),
    ]);
    assert_code(&out, 0);
    for file in ["alpha.csv", "beta.csv", "labels.csv"] {
        assert_eq!(
            std::fs::read(data.join(file)).unwrap(),
            std::fs::read(data2.join(file)).unwrap(),
            "{file} differs between identical runs"
        );
    }
}

#[test]
fn gen_synth_rejects_unknown_keys_with_exit_2() {
    let dir = tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    write(&cfg, r#"{"seed": 1, "n_per_clas": 10}"#);
    let out = run(&[
        "gen-synth",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().join("x").to_str().unwrap(),
    ]);
    assert_code(&out, 2);
}

#[test]
fn build_graph_and_homophily_round_trip() {
    let dir = tempdir().unwrap();
    let data = gen_dataset(dir.path());
    let graph = dir.path().join("graph.csv");
    let out = run(&[
        "build-graph",
        "--features",
        data.join("alpha.csv").to_str().unwrap(),
        "--method",
        "hybrid",
        "--k",
        "3",
        "--r",
        "0.5",
        "--out",
        graph.to_str().unwrap(),
    ]);
    assert_code(&out, 0);
    let text = std::fs::read_to_string(&graph).unwrap();
    assert!(text.starts_with("i,j,weight\n"));
    assert!(text.lines().count() > 1);

    let stats = dir.path().join("stats.json");
    let out = run(&[
        "homophily",
        "--graph",
        graph.to_str().unwrap(),
        "--labels",
        data.join("labels.csv").to_str().unwrap(),
        "--out",
        stats.to_str().unwrap(),
    ]);
    assert_code(&out, 0);
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&stats).unwrap()).unwrap();
    assert!(parsed["edges"].as_u64().unwrap() > 0);
}

#[test]
fn homophily_prints_one_for_pure_intra_class_graph() {
    let dir = tempdir().unwrap();
    let data = gen_dataset(dir.path());
    // 40 nodes per class: sample only intra-class edges.
    let labels: Vec<usize> = (0..80).map(|i| usize::from(i >= 40)).collect();
    let mut rng = SplitRng::seed_from(3);
    let g = sample_class_pair_edges(
        &labels,
        PairCounts {
            intra_first: 200,
            cross: 0,
            intra_second: 200,
        },
        &mut rng,
    )
    .unwrap();
    let graph = dir.path().join("pure.csv");
    write_graph_csv(&graph, &g).unwrap();
    let out = run(&[
        "homophily",
        "--graph",
        graph.to_str().unwrap(),
        "--labels",
        data.join("labels.csv").to_str().unwrap(),
        "--out",
        dir.path().join("stats.json").to_str().unwrap(),
    ]);
    assert_code(&out, 0);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.trim(), "1.000", "stdout: {stdout}");
}

#[test]
fn train_writes_run_record_and_embedding() {
    let dir = tempdir().unwrap();
    let data = gen_dataset(dir.path());
    let spec = dir.path().join("spec.json");
    write(
        &spec,
        r#"{
  "seed": 3,
  "graph": {"method": "synthetic-homophily", "target_h": 0.9, "total_edges": 400},
  "graph_model": {"conv_layers": 1, "latent_size": 8, "dense_size": 16, "epochs": 3}
}"#,
    );
    let out_json = dir.path().join("run.json");
    let out = run(&[
        "train",
        "--model",
        "cnc-dgi",
        "--spec",
        spec.to_str().unwrap(),
        "--data",
        data.to_str().unwrap(),
        "--out",
        out_json.to_str().unwrap(),
    ]);
    assert_code(&out, 0);
    let run_record: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_json).unwrap()).unwrap();
    assert_eq!(run_record["model"], "cnc-dgi");
    assert_eq!(run_record["seed"], 3);
    assert!(run_record["final_losses"].as_array().unwrap().len() == 1);
    let embedding = PathBuf::from(run_record["embedding_csv"].as_str().unwrap());
    assert!(embedding.exists());
    let (ids, _, h) = graphomic::io::read_matrix_csv(&embedding).unwrap();
    assert_eq!(ids.len(), 80);
    assert_eq!(h.cols(), 8);
}

#[test]
fn train_with_bad_spec_key_exits_2() {
    let dir = tempdir().unwrap();
    let data = gen_dataset(dir.path());
    let spec = dir.path().join("spec.json");
    write(&spec, r#"{"seed": 3, "graphmodel": {}}"#);
    let out = run(&[
        "train",
        "--model",
        "cnc-dgi",
        "--spec",
        spec.to_str().unwrap(),
        "--data",
        data.to_str().unwrap(),
        "--out",
        dir.path().join("run.json").to_str().unwrap(),
    ]);
    assert_code(&out, 2);
}

#[test]
fn train_with_missing_data_dir_exits_3() {
    let dir = tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    write(&spec, r#"{"seed": 3}"#);
    let out = run(&[
        "train",
        "--model",
        "cnc-vae",
        "--spec",
        spec.to_str().unwrap(),
        "--data",
        dir.path().join("nowhere").to_str().unwrap(),
        "--out",
        dir.path().join("run.json").to_str().unwrap(),
    ]);
    assert_code(&out, 3);
}

#[test]
fn sweep_single_cell_writes_report_and_resumes() {
    let dir = tempdir().unwrap();
    let data = gen_dataset(dir.path());
    let cfg = dir.path().join("sweep.json");
    write(
        &cfg,
        &format!(
            r#"{{
  "seed": 2,
  "data": "{}",
  "models": ["cnc-dgi"],
  "k_values": [2],
  "r_values": [0.5],
  "repeats": 1,
  "graph_model": {{"conv_layers": 1, "latent_size": 8, "dense_size": 16, "epochs": 2}}
}}"#,
            data.display()
        ),
    );
    let report = dir.path().join("report.csv");
    let out = run(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_code(&out, 0);
    let text = std::fs::read_to_string(&report).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "model,modalities,label_class,k,r,homophily,edges,isolated,seed,train_acc,test_acc,epochs,runtime_s"
    );
    assert_eq!(lines.len(), 2, "expected header + one row: {text}");
    assert!(dir.path().join("report.config.json").exists());

    // Resuming executes nothing and appends nothing.
    let out = run(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_code(&out, 0);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("0 run, 1 skipped"), "stdout: {stdout}");
    assert_eq!(std::fs::read_to_string(&report).unwrap().lines().count(), 2);
}

#[test]
fn plot_renders_svgs_and_warns_on_empty_report() {
    let dir = tempdir().unwrap();
    let report = dir.path().join("report.csv");
    write(
        &report,
        "model,modalities,label_class,k,r,homophily,edges,isolated,seed,train_acc,test_acc,epochs,runtime_s\n\
         cnc-dgi,alpha+beta,synthetic,2,0.5,0.9,400,0,1,0.99,0.91,3,1.5\n\
         cnc-dgi,alpha+beta,synthetic,4,0.5,0.9,400,0,1,0.99,0.93,3,1.5\n",
    );
    let plots = dir.path().join("plots");
    let out = run(&[
        "plot",
        "--report",
        report.to_str().unwrap(),
        "--out",
        plots.to_str().unwrap(),
    ]);
    assert_code(&out, 0);
    let svg = plots.join("heatmap_cnc-dgi_synthetic.svg");
    assert!(svg.exists());
    let xml = std::fs::read_to_string(&svg).unwrap();
    let mut reader = quick_xml::Reader::from_str(&xml);
    loop {
        match reader.read_event() {
            Ok(quick_xml::events::Event::Eof) => break,
            Ok(_) => {}
            Err(e) => panic!("svg not well-formed: {e}"),
        }
    }

    // Empty report: warning, exit 0, nothing written.
    let empty = dir.path().join("empty.csv");
    write(
        &empty,
        "model,modalities,label_class,k,r,homophily,edges,isolated,seed,train_acc,test_acc,epochs,runtime_s\n",
    );
    let plots2 = dir.path().join("plots2");
    let out = run(&[
        "plot",
        "--report",
        empty.to_str().unwrap(),
        "--out",
        plots2.to_str().unwrap(),
    ]);
    assert_code(&out, 0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    assert!(!plots2.exists() || std::fs::read_dir(&plots2).unwrap().next().is_none());
}

#[test]
fn plot_pca_scatter_from_dataset() {
    let dir = tempdir().unwrap();
    let data = gen_dataset(dir.path());
    let plots = dir.path().join("plots");
    let out = run(&[
        "plot",
        "--pca-data",
        data.to_str().unwrap(),
        "--modality",
        "alpha",
        "--label-class",
        "synthetic",
        "--out",
        plots.to_str().unwrap(),
    ]);
    assert_code(&out, 0);
    assert!(plots.join("pca_alpha_synthetic.svg").exists());
}
