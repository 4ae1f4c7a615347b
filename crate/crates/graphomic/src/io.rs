//! CSV and JSON file formats.
//!
//! Matrices travel as CSV with a header row and the sample id in
//! column 0; graphs as `i,j,weight` edge lists; all floats use `.` as
//! the decimal separator and `\n` line endings regardless of locale.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use graphomic_core::graphbuild::Graph;
use graphomic_core::Matrix;

use crate::AppError;

pub type Result<T> = std::result::Result<T, AppError>;

/// Shortest round-trip decimal form of a float.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// Three-decimal form used for accuracies and homophily.
pub fn fmt3(v: f64) -> String {
    format!("{v:.3}")
}

fn data_err(path: &Path, msg: impl std::fmt::Display) -> AppError {
    AppError::Data(format!("{}: {msg}", path.display()))
}

/// Split one CSV line; the formats here never quote fields.
fn split_line(line: &str) -> Vec<&str> {
    line.split(',').map(|f| f.trim()).collect()
}

/// Write a matrix with ids in column 0 and `f0..fN` feature headers.
pub fn write_matrix_csv(path: &Path, ids: &[String], matrix: &Matrix) -> Result<()> {
    if ids.len() != matrix.rows() {
        return Err(AppError::Other(format!(
            "{} ids for {} rows",
            ids.len(),
            matrix.rows()
        )));
    }
    let mut out = String::new();
    out.push_str("id");
    for j in 0..matrix.cols() {
        let _ = write!(out, ",f{j}");
    }
    out.push('\n');
    for (i, id) in ids.iter().enumerate() {
        out.push_str(id);
        for &v in matrix.row(i) {
            out.push(',');
            out.push_str(&fmt_f64(v));
        }
        out.push('\n');
    }
    atomic_write(path, out.as_bytes())
}

/// Read a matrix CSV; returns `(ids, feature names, matrix)`.
pub fn read_matrix_csv(path: &Path) -> Result<(Vec<String>, Vec<String>, Matrix)> {
    let text = fs::read_to_string(path).map_err(|e| data_err(path, e))?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| data_err(path, "empty file"))?;
    let header_fields = split_line(header);
    if header_fields.len() < 2 {
        return Err(data_err(path, "header needs an id column and at least one feature"));
    }
    let feature_names: Vec<String> = header_fields[1..].iter().map(|s| s.to_string()).collect();
    let cols = feature_names.len();

    let mut ids = Vec::new();
    let mut data = Vec::new();
    for (line_no, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields = split_line(line);
        if fields.len() != cols + 1 {
            return Err(data_err(
                path,
                format!(
                    "line {}: {} fields, expected {}",
                    line_no + 1,
                    fields.len(),
                    cols + 1
                ),
            ));
        }
        ids.push(fields[0].to_string());
        for &f in &fields[1..] {
            let v: f64 = f
                .parse()
                .map_err(|_| data_err(path, format!("line {}: bad number {f:?}", line_no + 1)))?;
            data.push(v);
        }
    }
    let matrix = Matrix::new(ids.len(), cols, data)
        .map_err(|e| data_err(path, format!("invalid matrix: {e}")))?;
    Ok((ids, feature_names, matrix))
}

/// Write a labels table: id column plus one integer column per class.
pub fn write_labels_csv(
    path: &Path,
    ids: &[String],
    classes: &[(String, Vec<usize>)],
) -> Result<()> {
    let mut out = String::new();
    out.push_str("id");
    for (name, values) in classes {
        if values.len() != ids.len() {
            return Err(AppError::Other(format!(
                "label class {name} has {} values for {} ids",
                values.len(),
                ids.len()
            )));
        }
        let _ = write!(out, ",{name}");
    }
    out.push('\n');
    for (i, id) in ids.iter().enumerate() {
        out.push_str(id);
        for (_, values) in classes {
            let _ = write!(out, ",{}", values[i]);
        }
        out.push('\n');
    }
    atomic_write(path, out.as_bytes())
}

/// Raw labels table: `(ids, class names, values[class][row])`, values
/// as uninterpreted strings.
pub fn read_labels_csv(path: &Path) -> Result<(Vec<String>, Vec<String>, Vec<Vec<String>>)> {
    let text = fs::read_to_string(path).map_err(|e| data_err(path, e))?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| data_err(path, "empty file"))?;
    let header_fields = split_line(header);
    if header_fields.len() < 2 {
        return Err(data_err(path, "labels need an id column and at least one class"));
    }
    let class_names: Vec<String> = header_fields[1..].iter().map(|s| s.to_string()).collect();
    let mut ids = Vec::new();
    let mut columns: Vec<Vec<String>> = vec![Vec::new(); class_names.len()];
    for (line_no, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields = split_line(line);
        if fields.len() != class_names.len() + 1 {
            return Err(data_err(
                path,
                format!(
                    "line {}: {} fields, expected {}",
                    line_no + 1,
                    fields.len(),
                    class_names.len() + 1
                ),
            ));
        }
        ids.push(fields[0].to_string());
        for (c, &f) in fields[1..].iter().enumerate() {
            columns[c].push(f.to_string());
        }
    }
    Ok((ids, class_names, columns))
}

/// Edge list as `i,j,weight`.
pub fn write_graph_csv(path: &Path, graph: &Graph) -> Result<()> {
    let mut out = String::from("i,j,weight\n");
    for (idx, &(i, j)) in graph.edges().iter().enumerate() {
        let _ = writeln!(out, "{i},{j},{}", fmt_f64(graph.weights()[idx]));
    }
    atomic_write(path, out.as_bytes())
}

pub fn read_graph_csv(path: &Path, n_nodes: usize) -> Result<Graph> {
    let text = fs::read_to_string(path).map_err(|e| data_err(path, e))?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| data_err(path, "empty file"))?;
    if split_line(header) != vec!["i", "j", "weight"] {
        return Err(data_err(path, "expected header i,j,weight"));
    }
    let mut pairs = Vec::new();
    let mut weights = Vec::new();
    for (line_no, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields = split_line(line);
        if fields.len() != 3 {
            return Err(data_err(
                path,
                format!("line {}: expected i,j,weight", line_no + 1),
            ));
        }
        let parse_idx = |s: &str| -> Result<usize> {
            s.parse()
                .map_err(|_| data_err(path, format!("line {}: bad index {s:?}", line_no + 1)))
        };
        pairs.push((parse_idx(fields[0])?, parse_idx(fields[1])?));
        weights.push(fields[2].parse::<f64>().map_err(|_| {
            data_err(path, format!("line {}: bad weight {:?}", line_no + 1, fields[2]))
        })?);
    }
    Graph::from_parts(n_nodes, pairs, weights, None)
        .map_err(|e| data_err(path, format!("invalid graph: {e}")))
}

/// Number of nodes implied by a feature CSV (data rows).
pub fn count_csv_rows(path: &Path) -> Result<usize> {
    let text = fs::read_to_string(path).map_err(|e| data_err(path, e))?;
    Ok(text.lines().skip(1).filter(|l| !l.trim().is_empty()).count())
}

/// Write through a temp file then rename, so readers never observe a
/// half-written file.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp).map_err(|e| data_err(&tmp, e))?;
        f.write_all(bytes).map_err(|e| data_err(&tmp, e))?;
        f.flush().map_err(|e| data_err(&tmp, e))?;
    }
    fs::rename(&tmp, path).map_err(|e| data_err(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use graphomic_core::SplitRng;
    use tempfile::tempdir;

    #[test]
    fn matrix_csv_round_trip_is_exact() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let mut rng = SplitRng::seed_from(1);
        let m = Matrix::from_fn(7, 3, |_, _| rng.standard_normal()).unwrap();
        let ids: Vec<String> = (0..7).map(|i| format!("s{i:04}")).collect();
        write_matrix_csv(&path, &ids, &m).unwrap();
        let (rids, names, back) = read_matrix_csv(&path).unwrap();
        assert_eq!(rids, ids);
        assert_eq!(names, vec!["f0", "f1", "f2"]);
        assert_eq!(back, m);
    }

    #[test]
    fn ragged_rows_are_rejected_with_line_numbers() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "id,f0,f1\na,1,2\nb,3\n").unwrap();
        let err = read_matrix_csv(&path).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 3"), "message: {msg}");
    }

    #[test]
    fn graph_csv_round_trip() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("g.csv");
        let g = Graph::from_parts(5, vec![(0, 1), (2, 4)], vec![0.5, 0.25], None).unwrap();
        write_graph_csv(&path, &g).unwrap();
        let back = read_graph_csv(&path, 5).unwrap();
        assert_eq!(back, g);
    }
}
