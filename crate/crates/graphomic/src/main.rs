use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use graphomic::commands;

/// Graph construction, unsupervised graph/variational models, and
/// embedding evaluation for multi-modal tabular data.
#[derive(Parser)]
#[command(name = "graphomic", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the synthetic two-modality dataset into a directory.
    GenSynth {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a graph from a feature CSV.
    BuildGraph {
        #[arg(long)]
        features: PathBuf,
        /// knn, radius, or hybrid.
        #[arg(long)]
        method: String,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        r: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Edge homophily and structural stats of a stored graph.
    Homophily {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train one model and write its embedding plus a run record.
    Train {
        /// cnc-vae, h-vae, cnc-vgae, cnc-dgi, 2g-dgi, or hetero-dgi.
        #[arg(long)]
        model: String,
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a (k, r) x models x label-classes grid, resumably.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Emit SVG plots from a report or a PCA projection.
    Plot {
        /// Report CSV to render as accuracy heatmaps.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Dataset directory for a PCA scatter.
        #[arg(long)]
        pca_data: Option<PathBuf>,
        #[arg(long, default_value = "alpha")]
        modality: String,
        #[arg(long, default_value = "synthetic")]
        label_class: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), graphomic::AppError> {
    match cli.command {
        Command::GenSynth { config, out } => commands::gen_synth(&config, &out),
        Command::BuildGraph {
            features,
            method,
            k,
            r,
            out,
        } => commands::build_graph(&features, &method, k, r, &out),
        Command::Homophily { graph, labels, out } => commands::homophily(&graph, &labels, &out),
        Command::Train {
            model,
            spec,
            data,
            out,
        } => commands::train(&model, &spec, &data, &out),
        Command::Sweep { config, out } => commands::sweep(&config, &out),
        Command::Plot {
            report,
            pca_data,
            modality,
            label_class,
            out,
        } => match (report, pca_data) {
            (Some(report), None) => commands::plot_report(&report, &out).map(|_| ()),
            (None, Some(data)) => {
                commands::plot_pca(&data, &modality, &label_class, &out).map(|_| ())
            }
            _ => Err(graphomic::AppError::Config(
                "plot needs exactly one of --report or --pca-data".into(),
            )),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
