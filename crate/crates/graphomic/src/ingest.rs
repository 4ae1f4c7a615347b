//! Dataset ingestion from a directory of CSV files.
//!
//! Layout: `labels.csv` (id column plus one column per label class),
//! one `<modality>.csv` per modality, optional `meta.json` flagging
//! categorical modalities, optional `folds.csv` with precomputed fold
//! assignments. All files are joined on the sample id; the labels file
//! fixes the row order.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use graphomic_core::eval::FoldPlan;
use graphomic_core::synthgen::{LabelVector, MultiModalDataset};

use crate::io::{read_labels_csv, read_matrix_csv};
use crate::AppError;

pub type Result<T> = std::result::Result<T, AppError>;

/// Optional dataset metadata.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetMeta {
    /// Names of modalities holding 0/1 categorical data.
    #[serde(default)]
    pub categorical: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Generator configuration echo, when the dataset was synthesized.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<serde_json::Value>,
}

/// An ingested dataset: aligned modalities and labels, plus sample ids
/// and any precomputed fold plan.
#[derive(Clone, Debug)]
pub struct IngestedDataset {
    pub ids: Vec<String>,
    pub dataset: MultiModalDataset,
    pub folds: Option<FoldPlan>,
    pub meta: DatasetMeta,
}

fn data_err(msg: impl std::fmt::Display) -> AppError {
    AppError::Data(msg.to_string())
}

/// Map raw label strings to contiguous class ids. Integer columns keep
/// their numeric order; other columns are mapped by sorted unique
/// value, so the mapping does not depend on row order.
pub(crate) fn encode_label_column(raw: &[String]) -> Vec<usize> {
    let as_ints: Option<Vec<i64>> = raw.iter().map(|s| s.parse::<i64>().ok()).collect();
    let keys: Vec<String> = match as_ints {
        Some(ints) => {
            let mut sorted: Vec<i64> = ints.clone();
            sorted.sort_unstable();
            sorted.dedup();
            return ints
                .iter()
                .map(|v| sorted.binary_search(v).expect("value present"))
                .collect();
        }
        None => raw.to_vec(),
    };
    let mut sorted = keys.clone();
    sorted.sort();
    sorted.dedup();
    keys.iter()
        .map(|v| sorted.binary_search(v).expect("value present"))
        .collect()
}

pub fn ingest(dir: &Path) -> Result<IngestedDataset> {
    let labels_path = dir.join("labels.csv");
    if !labels_path.exists() {
        return Err(data_err(format!("{}: labels.csv not found", dir.display())));
    }
    let (ids, class_names, raw_columns) = read_labels_csv(&labels_path)?;
    if ids.is_empty() {
        return Err(data_err("labels.csv has no samples"));
    }
    {
        let mut seen = BTreeSet::new();
        for id in &ids {
            if !seen.insert(id) {
                return Err(data_err(format!("labels.csv: duplicate sample id {id:?}")));
            }
        }
    }
    let order: BTreeMap<&str, usize> = ids
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();

    let meta: DatasetMeta = {
        let meta_path = dir.join("meta.json");
        if meta_path.exists() {
            crate::config::load_json(&meta_path)
                .map_err(|e| data_err(format!("meta.json: {e}")))?
        } else {
            DatasetMeta::default()
        }
    };

    // Every other .csv except the reserved names is a modality.
    let mut modality_files: Vec<(String, std::path::PathBuf)> = Vec::new();
    let entries =
        std::fs::read_dir(dir).map_err(|e| data_err(format!("{}: {e}", dir.display())))?;
    for entry in entries {
        let entry = entry.map_err(|e| data_err(e))?;
        let path = entry.path();
        let Some(stem) = path.file_stem().and_then(|s| s.to_str()) else {
            continue;
        };
        if path.extension().and_then(|e| e.to_str()) != Some("csv") {
            continue;
        }
        if stem == "labels" || stem == "folds" || stem.starts_with("embedding") {
            continue;
        }
        modality_files.push((stem.to_string(), path));
    }
    modality_files.sort();
    if modality_files.is_empty() {
        return Err(data_err(format!(
            "{}: no modality CSV files found",
            dir.display()
        )));
    }

    let mut modalities = Vec::new();
    let mut categorical = Vec::new();
    for (name, path) in &modality_files {
        let (mod_ids, _, matrix) = read_matrix_csv(path)?;
        if mod_ids.len() != ids.len() {
            let have: BTreeSet<&str> = mod_ids.iter().map(|s| s.as_str()).collect();
            let missing: Vec<&str> = ids
                .iter()
                .map(|s| s.as_str())
                .filter(|id| !have.contains(id))
                .take(5)
                .collect();
            return Err(data_err(format!(
                "modality {name}: {} samples, labels have {}; missing ids: {missing:?}",
                mod_ids.len(),
                ids.len()
            )));
        }
        // Join on id: reorder rows to the labels order.
        let mut perm = vec![usize::MAX; ids.len()];
        for (row, id) in mod_ids.iter().enumerate() {
            match order.get(id.as_str()) {
                Some(&target) => perm[target] = row,
                None => {
                    return Err(data_err(format!(
                        "modality {name}: unknown sample id {id:?}"
                    )))
                }
            }
        }
        if let Some(pos) = perm.iter().position(|&p| p == usize::MAX) {
            return Err(data_err(format!(
                "modality {name}: missing sample id {:?}",
                ids[pos]
            )));
        }
        let reordered = matrix
            .gather_rows(&perm)
            .map_err(|e| data_err(format!("modality {name}: {e}")))?;
        categorical.push(meta.categorical.iter().any(|c| c == name));
        modalities.push((name.clone(), reordered));
    }

    let mut labels = BTreeMap::new();
    for (c, class) in class_names.iter().enumerate() {
        let values = encode_label_column(&raw_columns[c]);
        let lv = LabelVector::new(values)
            .map_err(|e| data_err(format!("label class {class}: {e}")))?;
        labels.insert(class.clone(), lv);
    }

    let dataset = MultiModalDataset::new(modalities, categorical, labels)
        .map_err(|e| data_err(format!("{e}")))?;

    let folds = {
        let folds_path = dir.join("folds.csv");
        if folds_path.exists() {
            Some(read_folds(&folds_path, &order, ids.len())?)
        } else {
            None
        }
    };

    Ok(IngestedDataset {
        ids,
        dataset,
        folds,
        meta,
    })
}

fn read_folds(path: &Path, order: &BTreeMap<&str, usize>, n: usize) -> Result<FoldPlan> {
    let (fold_ids, names, columns) = read_labels_csv(path)?;
    if names.len() != 1 || names[0] != "fold" {
        return Err(data_err(format!(
            "{}: expected header id,fold",
            path.display()
        )));
    }
    let mut assignment = vec![usize::MAX; n];
    for (row, id) in fold_ids.iter().enumerate() {
        let Some(&target) = order.get(id.as_str()) else {
            return Err(data_err(format!(
                "{}: unknown sample id {id:?}",
                path.display()
            )));
        };
        assignment[target] = columns[0][row]
            .parse()
            .map_err(|_| data_err(format!("{}: bad fold {:?}", path.display(), columns[0][row])))?;
    }
    if let Some(pos) = assignment.iter().position(|&a| a == usize::MAX) {
        return Err(data_err(format!(
            "{}: no fold for sample index {pos}",
            path.display()
        )));
    }
    let k = assignment.iter().copied().max().unwrap_or(0) + 1;
    Ok(FoldPlan::KFold {
        assignment,
        k,
        seed: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn write(dir: &Path, name: &str, text: &str) {
        std::fs::write(dir.join(name), text).unwrap();
    }

    #[test]
    fn ingest_joins_on_id_regardless_of_row_order() {
        let dir = tempdir().unwrap();
        write(dir.path(), "labels.csv", "id,y\na,0\nb,1\nc,0\nd,1\n");
        // Modality rows deliberately shuffled.
        write(dir.path(), "x.csv", "id,f0\nc,3\na,1\nd,4\nb,2\n");
        let ingested = ingest(dir.path()).unwrap();
        assert_eq!(ingested.ids, vec!["a", "b", "c", "d"]);
        let x = ingested.dataset.modality("x").unwrap();
        assert_eq!(x.data(), &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(ingested.dataset.label("y").unwrap().values, vec![0, 1, 0, 1]);
    }

    #[test]
    fn missing_id_is_named_in_the_error() {
        let dir = tempdir().unwrap();
        write(dir.path(), "labels.csv", "id,y\na,0\nb,1\nc,0\nnoble,1\n");
        write(dir.path(), "x.csv", "id,f0\na,1\nb,2\nc,3\nzz,4\n");
        let err = ingest(dir.path()).unwrap_err().to_string();
        assert!(err.contains("zz") || err.contains("noble"), "error: {err}");
    }

    #[test]
    fn string_labels_map_deterministically() {
        let dir = tempdir().unwrap();
        write(dir.path(), "labels.csv", "id,er\na,ER+\nb,ER-\nc,ER+\nd,ER-\n");
        write(dir.path(), "x.csv", "id,f0\na,1\nb,2\nc,3\nd,4\n");
        let ingested = ingest(dir.path()).unwrap();
        // Sorted unique: "ER+" < "ER-".
        assert_eq!(ingested.dataset.label("er").unwrap().values, vec![0, 1, 0, 1]);
    }

    #[test]
    fn categorical_flags_come_from_meta() {
        let dir = tempdir().unwrap();
        write(dir.path(), "labels.csv", "id,y\na,0\nb,1\n");
        write(dir.path(), "clin.csv", "id,f0\na,1\nb,0\n");
        write(dir.path(), "expr.csv", "id,f0\na,0.5\nb,0.7\n");
        write(dir.path(), "meta.json", r#"{"categorical": ["clin"]}"#);
        let ingested = ingest(dir.path()).unwrap();
        assert_eq!(ingested.dataset.is_categorical("clin"), Some(true));
        assert_eq!(ingested.dataset.is_categorical("expr"), Some(false));
    }

    #[test]
    fn precomputed_folds_are_loaded() {
        let dir = tempdir().unwrap();
        write(dir.path(), "labels.csv", "id,y\na,0\nb,1\nc,0\nd,1\n");
        write(dir.path(), "x.csv", "id,f0\na,1\nb,2\nc,3\nd,4\n");
        write(dir.path(), "folds.csv", "id,fold\na,0\nb,1\nc,0\nd,1\n");
        let ingested = ingest(dir.path()).unwrap();
        match ingested.folds.unwrap() {
            FoldPlan::KFold { assignment, k, .. } => {
                assert_eq!(assignment, vec![0, 1, 0, 1]);
                assert_eq!(k, 2);
            }
            _ => panic!("expected kfold"),
        }
    }
}
