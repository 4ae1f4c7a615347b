//! The report CSV: one line per (run, fold) with fixed columns.

use std::path::Path;

use graphomic_core::eval::ReportRow;

use crate::io::{fmt3, fmt_f64};
use crate::AppError;

pub type Result<T> = std::result::Result<T, AppError>;

pub const REPORT_HEADER: &str =
    "model,modalities,label_class,k,r,homophily,edges,isolated,seed,train_acc,test_acc,epochs,runtime_s";

/// A report row plus the wall time its run took. The runtime is kept
/// out of [`ReportRow`] because rows must be pure functions of their
/// inputs.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportRecord {
    pub row: ReportRow,
    pub runtime_s: f64,
}

fn opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

pub fn format_line(rec: &ReportRecord) -> String {
    let row = &rec.row;
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{}",
        row.model,
        row.modalities,
        row.label_class,
        opt(&row.k),
        row.r.map(fmt_f64).unwrap_or_default(),
        row.homophily.map(fmt3).unwrap_or_default(),
        opt(&row.edges),
        opt(&row.isolated),
        row.seed,
        fmt3(row.train_acc),
        fmt3(row.test_acc),
        row.epochs,
        fmt3(rec.runtime_s),
    )
}

fn parse_opt<T: std::str::FromStr>(s: &str) -> std::result::Result<Option<T>, T::Err> {
    if s.is_empty() {
        Ok(None)
    } else {
        s.parse().map(Some)
    }
}

pub fn parse_line(line: &str) -> Result<ReportRecord> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != 13 {
        return Err(AppError::Data(format!(
            "report line has {} fields, expected 13: {line:?}",
            fields.len()
        )));
    }
    let bad = |what: &str| AppError::Data(format!("report line: bad {what} in {line:?}"));
    Ok(ReportRecord {
        row: ReportRow {
            model: fields[0].to_string(),
            modalities: fields[1].to_string(),
            label_class: fields[2].to_string(),
            k: parse_opt(fields[3]).map_err(|_| bad("k"))?,
            r: parse_opt(fields[4]).map_err(|_| bad("r"))?,
            homophily: parse_opt(fields[5]).map_err(|_| bad("homophily"))?,
            edges: parse_opt(fields[6]).map_err(|_| bad("edges"))?,
            isolated: parse_opt(fields[7]).map_err(|_| bad("isolated"))?,
            seed: fields[8].parse().map_err(|_| bad("seed"))?,
            train_acc: fields[9].parse().map_err(|_| bad("train_acc"))?,
            test_acc: fields[10].parse().map_err(|_| bad("test_acc"))?,
            epochs: fields[11].parse().map_err(|_| bad("epochs"))?,
        },
        runtime_s: fields[12].parse().map_err(|_| bad("runtime_s"))?,
    })
}

pub fn read_report(path: &Path) -> Result<Vec<ReportRecord>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| AppError::Data(format!("{}: {e}", path.display())))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == REPORT_HEADER => {}
        Some(h) => {
            return Err(AppError::Data(format!(
                "{}: unexpected header {h:?}",
                path.display()
            )))
        }
        None => return Ok(Vec::new()),
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(parse_line)
        .collect()
}

/// The identifying part of a row, matching [`SweepCell::key`] from the
/// core crate: model, modalities, label class, k, r, seed.
pub fn row_key(row: &ReportRow) -> String {
    format!(
        "{}|{}|{}|{}|{}|{}",
        row.model,
        row.modalities,
        row.label_class,
        row.k.map(|k| k.to_string()).unwrap_or_else(|| "-".into()),
        row.r.map(fmt_f64).unwrap_or_else(|| "-".into()),
        row.seed
    )
}
