//! Sweep driver: runs the grid through a worker pool, appends report
//! rows through a serialized sink, and resumes past completed cells.

use std::collections::BTreeMap;
use std::collections::HashSet;
use std::fs::OpenOptions;
use std::io::Write as _;
use std::path::Path;
use std::sync::Mutex;
use std::time::Instant;

use graphomic_core::eval::{run_pipeline, SweepCell, SweepGrid};
use graphomic_core::synthgen::MultiModalDataset;

use crate::report::{format_line, read_report, row_key, ReportRecord, REPORT_HEADER};
use crate::AppError;

pub type Result<T> = std::result::Result<T, AppError>;

/// Worker count: `GRAPHOMIC_THREADS` when set, logical cores otherwise.
pub fn worker_threads() -> usize {
    std::env::var("GRAPHOMIC_THREADS")
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}

pub struct SweepOutcome {
    pub executed: usize,
    pub skipped: usize,
    pub failed: usize,
    /// `(cell description, mean test accuracy, std over repeats)`.
    pub summary: Vec<(String, f64, f64)>,
}

/// Run every cell of the grid, appending to `report_path`. Cells whose
/// identifying key already appears in the report are skipped, so an
/// interrupted sweep resumes without duplicates.
pub fn run_sweep(
    dataset: &MultiModalDataset,
    grid: &SweepGrid,
    report_path: &Path,
) -> Result<SweepOutcome> {
    let mut done: HashSet<String> = HashSet::new();
    let mut existing: Vec<ReportRecord> = Vec::new();
    if report_path.exists() {
        existing = read_report(report_path)?;
        for rec in &existing {
            done.insert(row_key(&rec.row));
        }
    }

    let cells = grid.cells();
    let (pending, skipped): (Vec<&SweepCell>, Vec<&SweepCell>) = cells
        .iter()
        .partition(|cell| !done.contains(&cell.key(&grid.modalities)));

    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(report_path)
        .map_err(|e| AppError::Data(format!("{}: {e}", report_path.display())))?;
    let need_header = existing.is_empty()
        && std::fs::metadata(report_path)
            .map(|m| m.len() == 0)
            .unwrap_or(true);
    let sink = Mutex::new(file);
    if need_header {
        writeln!(sink.lock().expect("sink"), "{REPORT_HEADER}")
            .map_err(|e| AppError::Data(format!("{}: {e}", report_path.display())))?;
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_threads())
        .build()
        .map_err(|e| AppError::Other(format!("worker pool: {e}")))?;

    let new_records: Mutex<Vec<ReportRecord>> = Mutex::new(Vec::new());
    let failures: Mutex<Vec<String>> = Mutex::new(Vec::new());
    pool.install(|| {
        rayon::scope(|scope| {
            for cell in &pending {
                let sink = &sink;
                let new_records = &new_records;
                let failures = &failures;
                scope.spawn(move |_| {
                    let cfg = cell.pipeline_config(grid);
                    let start = Instant::now();
                    match run_pipeline(dataset, &cfg) {
                        Ok(output) => {
                            let runtime_s = start.elapsed().as_secs_f64();
                            let mut guard = sink.lock().expect("sink");
                            for row in output.rows {
                                let rec = ReportRecord {
                                    row,
                                    runtime_s,
                                };
                                // One write call per line keeps appends atomic
                                // from the readers' point of view.
                                let _ = writeln!(guard, "{}", format_line(&rec));
                                new_records.lock().expect("records").push(rec);
                            }
                            let _ = guard.flush();
                        }
                        Err(e) => {
                            failures
                                .lock()
                                .expect("failures")
                                .push(format!("{}: {e}", cell.key(&grid.modalities)));
                        }
                    }
                });
            }
        });
    });

    let failures = failures.into_inner().expect("failures");
    for f in &failures {
        eprintln!("sweep cell failed: {f}");
    }

    let mut all = existing;
    let executed = {
        let new_records = new_records.into_inner().expect("records");
        let n = new_records.len();
        all.extend(new_records);
        n
    };

    // Per-cell mean and std of test accuracy over repeat seeds.
    let mut groups: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for rec in &all {
        let row = &rec.row;
        let desc = format!(
            "{} {} {} k={} r={}",
            row.model,
            row.modalities,
            row.label_class,
            row.k.map(|k| k.to_string()).unwrap_or_else(|| "-".into()),
            row.r.map(|r| format!("{r}")).unwrap_or_else(|| "-".into()),
        );
        groups.entry(desc).or_default().push(row.test_acc);
    }
    let summary = groups
        .into_iter()
        .map(|(desc, accs)| {
            let mean = accs.iter().sum::<f64>() / accs.len() as f64;
            let var =
                accs.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / accs.len() as f64;
            (desc, mean, var.sqrt())
        })
        .collect();

    Ok(SweepOutcome {
        executed,
        skipped: skipped.len(),
        failed: failures.len(),
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use graphomic_core::eval::{ModelSpec, SplitKind};
    use graphomic_core::models::GraphModelSpec;
    use graphomic_core::synthgen::{sample_synthetic_dataset, SynthConfig};
    use tempfile::tempdir;

    fn tiny_grid() -> SweepGrid {
        SweepGrid {
            models: vec![ModelSpec::CncDgi(GraphModelSpec {
                epochs: 2,
                latent_size: 4,
                dense_size: 8,
                ..Default::default()
            })],
            modalities: ("alpha".into(), "beta".into()),
            label_classes: vec!["synthetic".into()],
            k_values: vec![2],
            r_values: vec![0.5, 1.0],
            repeats: 1,
            base_seed: 3,
            split: SplitKind::Holdout75_25,
        }
    }

    #[test]
    fn sweep_writes_rows_and_resumes_without_duplicates() {
        let ds = sample_synthetic_dataset(&SynthConfig {
            n_per_class: 30,
            dims_alpha: 4,
            dims_beta: 3,
            seed: 1,
            ..Default::default()
        })
        .unwrap();
        let dir = tempdir().unwrap();
        let report = dir.path().join("report.csv");
        let grid = tiny_grid();

        std::env::set_var("GRAPHOMIC_THREADS", "2");
        let first = run_sweep(&ds, &grid, &report).unwrap();
        assert_eq!(first.executed, 2);
        assert_eq!(first.skipped, 0);
        assert_eq!(first.failed, 0);

        let rows = read_report(&report).unwrap();
        assert_eq!(rows.len(), 2);

        // Resume: nothing to do, no duplicates appended.
        let second = run_sweep(&ds, &grid, &report).unwrap();
        assert_eq!(second.executed, 0);
        assert_eq!(second.skipped, 2);
        let rows = read_report(&report).unwrap();
        assert_eq!(rows.len(), 2);
        let mut keys: Vec<String> = rows.iter().map(|r| row_key(&r.row)).collect();
        keys.sort();
        keys.dedup();
        assert_eq!(keys.len(), 2);
    }
}
