//! Synthetic two-class, two-modality Gaussian dataset and synthetic
//! graphs with exact class-pair edge counts.
//!
//! Class means sit at `mu - theta` and `mu + theta` per feature, with a
//! shared standard deviation chosen large enough that the classes
//! overlap in any 2-D principal-component projection while remaining
//! learnable.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[cfg(not(feature = "std"))]
use num_traits::Float as _;

use crate::graphbuild::Graph;
use crate::numcore::Matrix;
use crate::rng::SplitRng;

#[derive(Clone, Debug, PartialEq)]
pub enum SynthError {
    /// Invalid generator configuration.
    Config(String),
    /// Requested more edges than the class pair can host.
    Capacity {
        what: &'static str,
        requested: usize,
        available: usize,
    },
    /// Violated precondition, with a short description.
    Contract(String),
}

impl fmt::Display for SynthError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SynthError::Config(msg) => write!(f, "invalid config: {msg}"),
            SynthError::Capacity {
                what,
                requested,
                available,
            } => write!(f, "{what}: requested {requested} edges, only {available} available"),
            SynthError::Contract(msg) => write!(f, "{msg}"),
        }
    }
}

impl core::error::Error for SynthError {}

pub type Result<T> = core::result::Result<T, SynthError>;

/// Configuration of the synthetic generator.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthConfig {
    pub n_per_class: usize,
    /// Feature count of the first modality ("alpha").
    pub dims_alpha: usize,
    /// Feature count of the second modality ("beta").
    pub dims_beta: usize,
    /// Uniform range the alpha feature means are drawn from.
    pub mu_range_alpha: (f64, f64),
    /// Uniform range the beta feature means are drawn from.
    pub mu_range_beta: (f64, f64),
    /// Class offset applied to every alpha feature mean.
    pub theta_alpha: f64,
    /// Class offset applied to every beta feature mean.
    pub theta_beta: f64,
    /// Shared standard deviation.
    pub sigma: f64,
    /// Optional per-feature standard deviations overriding `sigma`.
    pub sigma_alpha: Option<Vec<f64>>,
    pub sigma_beta: Option<Vec<f64>>,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_per_class: 500,
            dims_alpha: 50,
            dims_beta: 30,
            mu_range_alpha: (-1.0, 1.0),
            mu_range_beta: (-0.5, 0.5),
            theta_alpha: 0.3,
            theta_beta: 0.3,
            sigma: 1.0,
            sigma_alpha: None,
            sigma_beta: None,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_per_class == 0 {
            return Err(SynthError::Config("n_per_class must be positive".into()));
        }
        if self.dims_alpha < 2 || self.dims_beta < 2 {
            return Err(SynthError::Config("each modality needs at least 2 features".into()));
        }
        if !(self.sigma > 0.0) {
            return Err(SynthError::Config("sigma must be > 0".into()));
        }
        if self.theta_alpha < 0.0 || self.theta_beta < 0.0 {
            return Err(SynthError::Config("theta values must be >= 0".into()));
        }
        for (name, sig, dims) in [
            ("sigma_alpha", &self.sigma_alpha, self.dims_alpha),
            ("sigma_beta", &self.sigma_beta, self.dims_beta),
        ] {
            if let Some(s) = sig {
                if s.len() != dims {
                    return Err(SynthError::Config(format!(
                        "{name} has {} entries for {dims} features",
                        s.len()
                    )));
                }
                if s.iter().any(|&v| !(v > 0.0)) {
                    return Err(SynthError::Config(format!("{name} entries must be > 0")));
                }
            }
        }
        for (name, (lo, hi)) in [
            ("mu_range_alpha", self.mu_range_alpha),
            ("mu_range_beta", self.mu_range_beta),
        ] {
            if !(lo < hi) {
                return Err(SynthError::Config(format!("{name} must be an interval")));
            }
        }
        Ok(())
    }
}

/// A vector of class ids `0..class_count` over the dataset rows.
#[derive(Clone, Debug, PartialEq)]
pub struct LabelVector {
    pub values: Vec<usize>,
    pub class_count: usize,
}

impl LabelVector {
    pub fn new(values: Vec<usize>) -> Result<Self> {
        let class_count = values.iter().copied().max().map_or(0, |m| m + 1);
        let mut seen = vec![false; class_count];
        for &v in &values {
            seen[v] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(SynthError::Contract(
                "label classes must be contiguous 0..class_count with every class non-empty"
                    .to_string(),
            ));
        }
        Ok(Self {
            values,
            class_count,
        })
    }
}

/// Two or more aligned feature matrices over the same objects, plus one
/// or more named label classes.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiModalDataset {
    modalities: Vec<(String, Matrix)>,
    /// True for modalities holding categorical (0/1) data.
    categorical: Vec<bool>,
    labels: BTreeMap<String, LabelVector>,
    n_rows: usize,
}

impl MultiModalDataset {
    pub fn new(
        modalities: Vec<(String, Matrix)>,
        categorical: Vec<bool>,
        labels: BTreeMap<String, LabelVector>,
    ) -> Result<Self> {
        let Some(first) = modalities.first() else {
            return Err(SynthError::Contract("at least one modality required".into()));
        };
        let n_rows = first.1.rows();
        if categorical.len() != modalities.len() {
            return Err(SynthError::Contract(
                "one categorical flag per modality required".into(),
            ));
        }
        for (name, m) in &modalities {
            if m.rows() != n_rows {
                return Err(SynthError::Contract(format!(
                    "modality {name} has {} rows, expected {n_rows}",
                    m.rows()
                )));
            }
        }
        for (name, lv) in &labels {
            if lv.values.len() != n_rows {
                return Err(SynthError::Contract(format!(
                    "label class {name} has {} entries, expected {n_rows}",
                    lv.values.len()
                )));
            }
        }
        Ok(Self {
            modalities,
            categorical,
            labels,
            n_rows,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn modality_names(&self) -> Vec<&str> {
        self.modalities.iter().map(|(n, _)| n.as_str()).collect()
    }

    pub fn modality(&self, name: &str) -> Option<&Matrix> {
        self.modalities
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, m)| m)
    }

    pub fn is_categorical(&self, name: &str) -> Option<bool> {
        self.modalities
            .iter()
            .position(|(n, _)| n == name)
            .map(|i| self.categorical[i])
    }

    pub fn labels(&self) -> &BTreeMap<String, LabelVector> {
        &self.labels
    }

    pub fn label(&self, class: &str) -> Option<&LabelVector> {
        self.labels.get(class)
    }
}

/// Draw the two-modality dataset: `2 * n_per_class` rows, class 0 rows
/// first, one binary label class named `"synthetic"`.
pub fn sample_synthetic_dataset(cfg: &SynthConfig) -> Result<MultiModalDataset> {
    cfg.validate()?;
    let mut rng = SplitRng::derive(cfg.seed, crate::rng::streams::DATASET);
    let n = cfg.n_per_class;

    let mut draw_modality = |dims: usize,
                             mu_range: (f64, f64),
                             theta: f64,
                             sigma_vec: &Option<Vec<f64>>|
     -> Result<Matrix> {
        let mu: Vec<f64> = (0..dims).map(|_| rng.uniform(mu_range.0, mu_range.1)).collect();
        let sigma: Vec<f64> = match sigma_vec {
            Some(s) => s.clone(),
            None => vec![cfg.sigma; dims],
        };
        let mut data = Vec::with_capacity(2 * n * dims);
        for class in 0..2 {
            let offset = if class == 0 { -theta } else { theta };
            for _ in 0..n {
                for f in 0..dims {
                    data.push(mu[f] + offset + sigma[f] * rng.standard_normal());
                }
            }
        }
        Matrix::new(2 * n, dims, data)
            .map_err(|e| SynthError::Contract(format!("sampling failed: {e}")))
    };

    let alpha = draw_modality(cfg.dims_alpha, cfg.mu_range_alpha, cfg.theta_alpha, &cfg.sigma_alpha)?;
    let beta = draw_modality(cfg.dims_beta, cfg.mu_range_beta, cfg.theta_beta, &cfg.sigma_beta)?;

    let mut values = vec![0usize; n];
    values.extend(vec![1usize; n]);
    let mut labels = BTreeMap::new();
    labels.insert("synthetic".to_string(), LabelVector::new(values)?);

    MultiModalDataset::new(
        vec![("alpha".to_string(), alpha), ("beta".to_string(), beta)],
        vec![false, false],
        labels,
    )
}

/// Top-2 principal components (power iteration with deflation) plus a
/// class-overlap score: 1 minus the accuracy of a nearest-centroid
/// split in the 2-D projection.
#[derive(Clone, Debug)]
pub struct PcaCheck {
    /// `N x 2` projection onto the top two components.
    pub projection: Matrix,
    /// First and second principal directions (unit length).
    pub components: (Vec<f64>, Vec<f64>),
    /// 1 - nearest-centroid accuracy; ~0.5 for inseparable classes.
    pub overlap_score: f64,
}

const POWER_ITERS: usize = 200;
const POWER_TOL: f64 = 1e-9;

pub fn pca_separation_check(
    dataset: &MultiModalDataset,
    modality: &str,
    label_class: &str,
) -> Result<PcaCheck> {
    let x = dataset
        .modality(modality)
        .ok_or_else(|| SynthError::Contract(format!("unknown modality {modality}")))?;
    let y = dataset
        .label(label_class)
        .ok_or_else(|| SynthError::Contract(format!("unknown label class {label_class}")))?;
    if x.cols() < 2 {
        return Err(SynthError::Contract(
            "pca check needs at least 2 features".to_string(),
        ));
    }
    let (n, f) = x.shape();

    let mean = x.col_sums().scale(1.0 / n as f64).expect("finite");
    let mut centered = x.clone();
    for i in 0..n {
        for j in 0..f {
            let v = centered.get(i, j) - mean.get(0, j);
            centered.set(i, j, v);
        }
    }
    let cov = centered
        .transpose()
        .matmul(&centered)
        .expect("shapes agree")
        .scale(1.0 / (n.max(2) - 1) as f64)
        .expect("finite");

    let power = |cov: &Matrix, seed_dim: usize| -> Vec<f64> {
        let mut v: Vec<f64> = (0..f).map(|i| if i == seed_dim { 1.0 } else { 1e-3 }).collect();
        normalize(&mut v);
        for _ in 0..POWER_ITERS {
            let mut next = vec![0.0; f];
            for i in 0..f {
                let row = cov.row(i);
                next[i] = row.iter().zip(&v).map(|(a, b)| a * b).sum();
            }
            normalize(&mut next);
            let delta: f64 = next
                .iter()
                .zip(&v)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            v = next;
            if delta < POWER_TOL {
                break;
            }
        }
        v
    };

    let v1 = power(&cov, 0);
    // Deflate the leading eigen-direction and iterate again.
    let lambda1 = rayleigh(&cov, &v1);
    let mut deflated = cov.clone();
    for i in 0..f {
        for j in 0..f {
            let v = deflated.get(i, j) - lambda1 * v1[i] * v1[j];
            deflated.set(i, j, v);
        }
    }
    let v2 = power(&deflated, 1);

    let dirs = Matrix::from_fn(f, 2, |i, j| if j == 0 { v1[i] } else { v2[i] })
        .expect("unit vectors are finite");
    let projection = centered.matmul(&dirs).expect("shapes agree");

    // Nearest-centroid accuracy in the projection.
    let mut centroids = [[0.0f64; 2]; 2];
    let mut counts = [0usize; 2];
    for i in 0..n {
        let c = y.values[i].min(1);
        centroids[c][0] += projection.get(i, 0);
        centroids[c][1] += projection.get(i, 1);
        counts[c] += 1;
    }
    for (c, &count) in counts.iter().enumerate() {
        if count > 0 {
            centroids[c][0] /= count as f64;
            centroids[c][1] /= count as f64;
        }
    }
    let mut correct = 0usize;
    for i in 0..n {
        let p = [projection.get(i, 0), projection.get(i, 1)];
        let d0 = (p[0] - centroids[0][0]).powi(2) + (p[1] - centroids[0][1]).powi(2);
        let d1 = (p[0] - centroids[1][0]).powi(2) + (p[1] - centroids[1][1]).powi(2);
        let pred = usize::from(d1 < d0);
        if pred == y.values[i].min(1) {
            correct += 1;
        }
    }
    let accuracy = correct as f64 / n as f64;

    Ok(PcaCheck {
        projection,
        components: (v1, v2),
        overlap_score: 1.0 - accuracy,
    })
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
}

fn rayleigh(cov: &Matrix, v: &[f64]) -> f64 {
    let f = v.len();
    let mut cv = vec![0.0; f];
    for (i, slot) in cv.iter_mut().enumerate() {
        *slot = cov.row(i).iter().zip(v).map(|(a, b)| a * b).sum();
    }
    v.iter().zip(&cv).map(|(a, b)| a * b).sum()
}

/// Exact edge counts per class pair: `intra_first` edges inside class 0,
/// `intra_second` inside class 1, `cross` between the classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairCounts {
    pub intra_first: usize,
    pub cross: usize,
    pub intra_second: usize,
}

impl PairCounts {
    pub fn total(&self) -> usize {
        self.intra_first + self.cross + self.intra_second
    }

    /// Resulting edge homophily, `(z + y) / (x + y + z)`.
    pub fn homophily(&self) -> f64 {
        (self.intra_first + self.intra_second) as f64 / self.total() as f64
    }
}

/// Sample exactly the requested number of intra- and inter-class edges,
/// uniformly without replacement, over a binary label vector.
pub fn sample_class_pair_edges(
    labels: &[usize],
    counts: PairCounts,
    rng: &mut SplitRng,
) -> Result<Graph> {
    let first: Vec<usize> = labels
        .iter()
        .enumerate()
        .filter(|(_, &y)| y == 0)
        .map(|(i, _)| i)
        .collect();
    let second: Vec<usize> = labels
        .iter()
        .enumerate()
        .filter(|(_, &y)| y == 1)
        .map(|(i, _)| i)
        .collect();
    if first.len() + second.len() != labels.len() {
        return Err(SynthError::Contract(
            "pair-count sampling requires binary labels 0/1".to_string(),
        ));
    }

    let mut pairs = Vec::with_capacity(counts.total());
    sample_intra(&first, counts.intra_first, "intra-class-0 edges", rng, &mut pairs)?;
    sample_intra(&second, counts.intra_second, "intra-class-1 edges", rng, &mut pairs)?;
    sample_cross(&first, &second, counts.cross, rng, &mut pairs)?;

    Graph::new(labels.len(), pairs).map_err(|e| SynthError::Contract(e.to_string()))
}

fn sample_intra(
    members: &[usize],
    count: usize,
    what: &'static str,
    rng: &mut SplitRng,
    out: &mut Vec<(usize, usize)>,
) -> Result<()> {
    let n = members.len();
    let capacity = n * n.saturating_sub(1) / 2;
    if count > capacity {
        return Err(SynthError::Capacity {
            what,
            requested: count,
            available: capacity,
        });
    }
    if count == 0 {
        return Ok(());
    }
    if count * 3 >= capacity {
        // Dense request: enumerate and take a shuffled prefix.
        let mut all: Vec<(usize, usize)> = Vec::with_capacity(capacity);
        for i in 0..n {
            for j in (i + 1)..n {
                all.push((members[i], members[j]));
            }
        }
        rng.shuffle(&mut all);
        out.extend(all.into_iter().take(count));
    } else {
        let mut seen = BTreeSet::new();
        while seen.len() < count {
            let a = rng.uniform_usize(n);
            let b = rng.uniform_usize(n);
            if a == b {
                continue;
            }
            let pair = (members[a.min(b)], members[a.max(b)]);
            seen.insert(pair);
        }
        out.extend(seen);
    }
    Ok(())
}

fn sample_cross(
    first: &[usize],
    second: &[usize],
    count: usize,
    rng: &mut SplitRng,
    out: &mut Vec<(usize, usize)>,
) -> Result<()> {
    let capacity = first.len() * second.len();
    if count > capacity {
        return Err(SynthError::Capacity {
            what: "cross-class edges",
            requested: count,
            available: capacity,
        });
    }
    if count == 0 {
        return Ok(());
    }
    if count * 3 >= capacity {
        let mut all: Vec<(usize, usize)> = Vec::with_capacity(capacity);
        for &a in first {
            for &b in second {
                all.push((a.min(b), a.max(b)));
            }
        }
        rng.shuffle(&mut all);
        out.extend(all.into_iter().take(count));
    } else {
        let mut seen = BTreeSet::new();
        while seen.len() < count {
            let a = first[rng.uniform_usize(first.len())];
            let b = second[rng.uniform_usize(second.len())];
            seen.insert((a.min(b), a.max(b)));
        }
        out.extend(seen);
    }
    Ok(())
}

/// Sample a graph whose realized edge homophily is exactly
/// `round(target_h * total_edges) / total_edges`, intra edges split
/// evenly (+-1) between the two classes.
pub fn sample_graph_with_homophily(
    labels: &[usize],
    target_h: f64,
    total_edges: usize,
    rng: &mut SplitRng,
) -> Result<Graph> {
    if !(0.0..=1.0).contains(&target_h) {
        return Err(SynthError::Contract(format!(
            "target homophily {target_h} outside [0, 1]"
        )));
    }
    if total_edges == 0 {
        return Err(SynthError::Contract("total_edges must be positive".to_string()));
    }
    let intra = (target_h * total_edges as f64).round() as usize;
    let counts = PairCounts {
        intra_first: intra.div_ceil(2),
        intra_second: intra / 2,
        cross: total_edges - intra,
    };
    sample_class_pair_edges(labels, counts, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphbuild::edge_homophily;

    fn balanced_labels(n_per_class: usize) -> Vec<usize> {
        let mut v = vec![0usize; n_per_class];
        v.extend(vec![1usize; n_per_class]);
        v
    }

    #[test]
    fn dataset_is_balanced_with_expected_shapes() {
        let cfg = SynthConfig {
            n_per_class: 50,
            ..Default::default()
        };
        let ds = sample_synthetic_dataset(&cfg).unwrap();
        assert_eq!(ds.n_rows(), 100);
        assert_eq!(ds.modality("alpha").unwrap().shape(), (100, 50));
        assert_eq!(ds.modality("beta").unwrap().shape(), (100, 30));
        let y = ds.label("synthetic").unwrap();
        assert_eq!(y.values.iter().filter(|&&v| v == 0).count(), 50);
        assert_eq!(y.values.iter().filter(|&&v| v == 1).count(), 50);
    }

    #[test]
    fn tiny_sigma_recovers_class_means_exactly() {
        let cfg = SynthConfig {
            n_per_class: 20,
            sigma: 1e-12,
            theta_alpha: 0.7,
            seed: 3,
            ..Default::default()
        };
        let ds = sample_synthetic_dataset(&cfg).unwrap();
        let x = ds.modality("alpha").unwrap();
        // Rows within one class collapse onto the class mean, and the
        // class rows differ by exactly 2 * theta per feature.
        for f in 0..x.cols() {
            let a = x.get(0, f);
            let b = x.get(20, f);
            assert!((x.get(10, f) - a).abs() < 1e-9);
            assert!((b - a - 1.4).abs() < 1e-9);
        }
    }

    #[test]
    fn empirical_means_match_within_standard_error() {
        let cfg = SynthConfig {
            seed: 12,
            ..Default::default()
        };
        let ds = sample_synthetic_dataset(&cfg).unwrap();
        let n = cfg.n_per_class;
        let bound = 3.0 * cfg.sigma / (n as f64).sqrt();
        // Per-feature class gap is exactly 2 * theta by construction;
        // the empirical gap must agree within joint standard error.
        for (name, theta) in [("alpha", cfg.theta_alpha), ("beta", cfg.theta_beta)] {
            let x = ds.modality(name).unwrap();
            for f in 0..x.cols() {
                let mean_a: f64 = (0..n).map(|i| x.get(i, f)).sum::<f64>() / n as f64;
                let mean_b: f64 = (n..2 * n).map(|i| x.get(i, f)).sum::<f64>() / n as f64;
                let gap = mean_b - mean_a;
                assert!(
                    (gap - 2.0 * theta).abs() < bound * core::f64::consts::SQRT_2,
                    "{name} feature {f}: gap {gap}"
                );
            }
        }
    }

    #[test]
    fn theta_zero_drops_class_separation() {
        let cfg = SynthConfig {
            n_per_class: 200,
            theta_alpha: 0.0,
            theta_beta: 0.0,
            seed: 5,
            ..Default::default()
        };
        let ds = sample_synthetic_dataset(&cfg).unwrap();
        let check = pca_separation_check(&ds, "alpha", "synthetic").unwrap();
        assert!(
            (check.overlap_score - 0.5).abs() < 0.12,
            "overlap {}",
            check.overlap_score
        );
    }

    #[test]
    fn pca_separates_far_blobs_and_components_are_orthogonal() {
        let cfg = SynthConfig {
            n_per_class: 100,
            theta_alpha: 5.0,
            theta_beta: 5.0,
            sigma: 0.2,
            seed: 6,
            ..Default::default()
        };
        let ds = sample_synthetic_dataset(&cfg).unwrap();
        let check = pca_separation_check(&ds, "alpha", "synthetic").unwrap();
        assert!(check.overlap_score < 0.05, "overlap {}", check.overlap_score);
        let dot: f64 = check
            .components
            .0
            .iter()
            .zip(&check.components.1)
            .map(|(a, b)| a * b)
            .sum();
        assert!(dot.abs() < 1e-8, "components not orthogonal: {dot}");
    }

    #[test]
    fn pca_rejects_single_feature() {
        let m = Matrix::from_fn(4, 1, |i, _| i as f64).unwrap();
        let mut labels = BTreeMap::new();
        labels.insert("y".to_string(), LabelVector::new(vec![0, 0, 1, 1]).unwrap());
        let ds =
            MultiModalDataset::new(vec![("solo".to_string(), m)], vec![false], labels).unwrap();
        assert!(pca_separation_check(&ds, "solo", "y").is_err());
    }

    #[test]
    fn pure_intra_edges_have_full_homophily() {
        let labels = balanced_labels(100);
        let mut rng = SplitRng::seed_from(1);
        let g = sample_class_pair_edges(
            &labels,
            PairCounts {
                intra_first: 2000,
                cross: 0,
                intra_second: 2000,
            },
            &mut rng,
        )
        .unwrap();
        assert_eq!(g.n_edges(), 4000);
        assert_eq!(edge_homophily(&g, &labels).unwrap(), 1.0);
    }

    #[test]
    fn equal_counts_give_two_thirds_homophily() {
        let labels = balanced_labels(100);
        let mut rng = SplitRng::seed_from(2);
        let counts = PairCounts {
            intra_first: 1000,
            cross: 1000,
            intra_second: 1000,
        };
        let g = sample_class_pair_edges(&labels, counts, &mut rng).unwrap();
        let h = edge_homophily(&g, &labels).unwrap();
        assert!((h - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(h, counts.homophily());
    }

    #[test]
    fn infeasible_counts_are_capacity_errors() {
        let labels = balanced_labels(10); // capacity per class: 45
        let mut rng = SplitRng::seed_from(3);
        let err = sample_class_pair_edges(
            &labels,
            PairCounts {
                intra_first: 46,
                cross: 0,
                intra_second: 0,
            },
            &mut rng,
        )
        .unwrap_err();
        assert!(matches!(
            err,
            SynthError::Capacity {
                requested: 46,
                available: 45,
                ..
            }
        ));
    }

    #[test]
    fn homophily_target_is_hit_exactly() {
        let labels = balanced_labels(500);
        for (target, total) in [(0.98, 5000), (0.51, 4000), (0.73, 3333)] {
            let mut rng = SplitRng::seed_from(4);
            let g = sample_graph_with_homophily(&labels, target, total, &mut rng).unwrap();
            let h = edge_homophily(&g, &labels).unwrap();
            let expected = (target * total as f64).round() / total as f64;
            assert_eq!(h, expected, "target {target}");
            assert!((h - target).abs() <= 1.0 / total as f64 + 1e-12);
            assert_eq!(g.n_edges(), total);
        }
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let labels = balanced_labels(50);
        let draw = |seed| {
            let mut rng = SplitRng::seed_from(seed);
            sample_graph_with_homophily(&labels, 0.7, 500, &mut rng).unwrap()
        };
        assert_eq!(draw(9), draw(9));
        assert_ne!(draw(9), draw(10));
    }
}
