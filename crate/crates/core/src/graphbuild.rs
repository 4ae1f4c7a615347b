//! Graph construction from feature matrices and graph quality metrics.
//!
//! Edges are stored once as `(i, j)` with `i < j`; self-loops never
//! appear in the stored edge list and are introduced only by adjacency
//! normalization.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[cfg(not(feature = "std"))]
use num_traits::Float as _;

use crate::numcore::Matrix;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GraphError {
    /// A metric is undefined on this input (e.g. homophily of an empty
    /// edge set).
    UndefinedMetric(&'static str),
    /// Violated precondition, with a short description.
    Contract(String),
}

impl fmt::Display for GraphError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphError::UndefinedMetric(what) => write!(f, "{what} is undefined on this input"),
            GraphError::Contract(msg) => write!(f, "{msg}"),
        }
    }
}

impl core::error::Error for GraphError {}

pub type Result<T> = core::result::Result<T, GraphError>;

/// Undirected weighted graph over `n_nodes` nodes, with optional node
/// and edge type tags for the heterogeneous case.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    n_nodes: usize,
    edges: Vec<(usize, usize)>,
    weights: Vec<f64>,
    node_types: Option<Vec<u8>>,
    edge_types: Option<Vec<u8>>,
}

impl Graph {
    /// Build from an edge list; pairs are reordered to `i < j`,
    /// deduplicated, canonically sorted, and given unit weights.
    pub fn new(n_nodes: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut edges = Vec::new();
        for (a, b) in pairs {
            if a == b {
                return Err(GraphError::Contract(format!("self-loop at node {a}")));
            }
            if a >= n_nodes || b >= n_nodes {
                return Err(GraphError::Contract(format!(
                    "edge ({a}, {b}) out of bounds for {n_nodes} nodes"
                )));
            }
            edges.push((a.min(b), a.max(b)));
        }
        edges.sort_unstable();
        edges.dedup();
        let weights = vec![1.0; edges.len()];
        Ok(Self {
            n_nodes,
            edges,
            weights,
            node_types: None,
            edge_types: None,
        })
    }

    /// Build from parallel edge/weight/type lists as read from disk.
    pub fn from_parts(
        n_nodes: usize,
        pairs: Vec<(usize, usize)>,
        weights: Vec<f64>,
        edge_types: Option<Vec<u8>>,
    ) -> Result<Self> {
        if weights.len() != pairs.len() {
            return Err(GraphError::Contract(format!(
                "{} weights for {} edges",
                weights.len(),
                pairs.len()
            )));
        }
        if let Some(t) = &edge_types {
            if t.len() != pairs.len() {
                return Err(GraphError::Contract(format!(
                    "{} edge types for {} edges",
                    t.len(),
                    pairs.len()
                )));
            }
        }
        let mut rows: Vec<((usize, usize), f64, u8)> = Vec::with_capacity(pairs.len());
        for (idx, (a, b)) in pairs.into_iter().enumerate() {
            if a == b {
                return Err(GraphError::Contract(format!("self-loop at node {a}")));
            }
            if a >= n_nodes || b >= n_nodes {
                return Err(GraphError::Contract(format!(
                    "edge ({a}, {b}) out of bounds for {n_nodes} nodes"
                )));
            }
            let ty = edge_types.as_ref().map(|t| t[idx]).unwrap_or(0);
            rows.push(((a.min(b), a.max(b)), weights[idx], ty));
        }
        rows.sort_unstable_by(|x, y| x.0.cmp(&y.0));
        for w in rows.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(GraphError::Contract(format!(
                    "duplicate edge ({}, {})",
                    w[0].0 .0, w[0].0 .1
                )));
            }
        }
        let has_types = edge_types.is_some();
        let edges: Vec<_> = rows.iter().map(|r| r.0).collect();
        let weights: Vec<_> = rows.iter().map(|r| r.1).collect();
        let types: Vec<_> = rows.iter().map(|r| r.2).collect();
        Ok(Self {
            n_nodes,
            edges,
            weights,
            node_types: None,
            edge_types: has_types.then_some(types),
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn node_types(&self) -> Option<&[u8]> {
        self.node_types.as_deref()
    }

    pub fn edge_types(&self) -> Option<&[u8]> {
        self.edge_types.as_deref()
    }

    pub(crate) fn set_node_types(&mut self, types: Vec<u8>) {
        debug_assert_eq!(types.len(), self.n_nodes);
        self.node_types = Some(types);
    }

    /// Unweighted degree of every node.
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.n_nodes];
        for &(i, j) in &self.edges {
            deg[i] += 1;
            deg[j] += 1;
        }
        deg
    }

    pub fn isolated_count(&self) -> usize {
        self.degrees().iter().filter(|&&d| d == 0).count()
    }

    /// True if every edge of `self` also appears in `other`.
    pub fn is_subgraph_of(&self, other: &Graph) -> bool {
        self.edges.iter().all(|e| other.edges.binary_search(e).is_ok())
    }
}

/// Pairwise Euclidean distances between the rows of `x`.
///
/// Symmetric with a zero diagonal.
pub fn euclidean_distances(x: &Matrix) -> Matrix {
    let n = x.rows();
    let mut out = Matrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let mut acc = 0.0;
            for (a, b) in x.row(i).iter().zip(x.row(j)) {
                let d = a - b;
                acc += d * d;
            }
            let d = acc.sqrt();
            out.set(i, j, d);
            out.set(j, i, d);
        }
    }
    out
}

/// K-nearest-neighbour graph: edge `(i, j)` iff `j` is among `i`'s `k`
/// nearest or vice versa (symmetrized union). Distance ties break
/// toward the lower node index. Every node ends with degree >= k, so no
/// node is isolated.
pub fn knn_edges(x: &Matrix, k: usize) -> Result<Graph> {
    let n = x.rows();
    if k == 0 || k > n.saturating_sub(1) {
        return Err(GraphError::Contract(format!(
            "knn: k = {k} out of range 1..={} for {n} nodes",
            n.saturating_sub(1)
        )));
    }
    let dist = euclidean_distances(x);
    knn_edges_from_distances(&dist, k)
}

pub(crate) fn knn_edges_from_distances(dist: &Matrix, k: usize) -> Result<Graph> {
    let n = dist.rows();
    let mut pairs = Vec::new();
    let mut order: Vec<usize> = Vec::with_capacity(n - 1);
    for i in 0..n {
        order.clear();
        order.extend((0..n).filter(|&j| j != i));
        order.sort_by(|&a, &b| {
            dist.get(i, a)
                .partial_cmp(&dist.get(i, b))
                .expect("distances are finite")
                .then(a.cmp(&b))
        });
        for &j in order.iter().take(k) {
            pairs.push((i, j));
        }
    }
    Graph::new(n, pairs)
}

/// Radius graph: edge iff the Euclidean distance is strictly below `r`.
/// Isolated nodes are permitted.
pub fn radius_edges(x: &Matrix, r: f64) -> Graph {
    let dist = euclidean_distances(x);
    radius_edges_from_distances(&dist, r)
}

pub(crate) fn radius_edges_from_distances(dist: &Matrix, r: f64) -> Graph {
    let n = dist.rows();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if dist.get(i, j) < r {
                pairs.push((i, j));
            }
        }
    }
    Graph::new(n, pairs).expect("radius pairs are valid by construction")
}

/// Union of the KNN and radius graphs; inherits the KNN guarantee that
/// no node is isolated.
pub fn hybrid_edges(x: &Matrix, k: usize, r: f64) -> Result<Graph> {
    let n = x.rows();
    if k == 0 || k > n.saturating_sub(1) {
        return Err(GraphError::Contract(format!(
            "hybrid: k = {k} out of range 1..={} for {n} nodes",
            n.saturating_sub(1)
        )));
    }
    let dist = euclidean_distances(x);
    let knn = knn_edges_from_distances(&dist, k)?;
    let radius = radius_edges_from_distances(&dist, r);
    let pairs = knn.edges().iter().chain(radius.edges()).copied();
    Graph::new(n, pairs)
}

/// Attach `exp(-s)` edge weights, `s` being the endpoint distance.
pub fn exp_edge_weight(graph: &Graph, distances: &Matrix) -> Result<Graph> {
    let n = graph.n_nodes();
    if distances.shape() != (n, n) {
        return Err(GraphError::Contract(format!(
            "distance matrix is {}x{}, expected {n}x{n}",
            distances.rows(),
            distances.cols()
        )));
    }
    let mut out = graph.clone();
    for (idx, &(i, j)) in graph.edges().iter().enumerate() {
        out.weights[idx] = (-distances.get(i, j)).exp();
    }
    Ok(out)
}

/// How the self-looped adjacency is degree-normalized.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormKind {
    /// `D'^{-1/2} (A + I) D'^{-1/2}`; symmetric.
    Symmetric,
    /// `D'^{-1} (A + I)`; every row sums to one (mean pooling).
    MeanPool,
}

/// Dense degree-normalized adjacency with unit self-loops.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedAdjacency {
    matrix: Matrix,
    kind: NormKind,
}

impl NormalizedAdjacency {
    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn kind(&self) -> NormKind {
        self.kind
    }

    pub fn n_nodes(&self) -> usize {
        self.matrix.rows()
    }
}

/// Symmetric normalization of the weighted adjacency plus unit
/// self-loops. An isolated node keeps a unit self-loop row.
pub fn normalize_adjacency(graph: &Graph) -> NormalizedAdjacency {
    normalize_adjacency_with(graph, NormKind::Symmetric)
}

pub fn normalize_adjacency_with(graph: &Graph, kind: NormKind) -> NormalizedAdjacency {
    let n = graph.n_nodes();
    let mut a = Matrix::zeros(n, n);
    for (idx, &(i, j)) in graph.edges().iter().enumerate() {
        let w = graph.weights()[idx];
        a.set(i, j, w);
        a.set(j, i, w);
    }
    for i in 0..n {
        a.set(i, i, 1.0);
    }
    let degrees: Vec<f64> = (0..n).map(|i| a.row(i).iter().sum()).collect();
    match kind {
        NormKind::Symmetric => {
            let inv_sqrt: Vec<f64> = degrees.iter().map(|&d| 1.0 / d.sqrt()).collect();
            for i in 0..n {
                for j in 0..n {
                    let v = a.get(i, j);
                    if v != 0.0 {
                        a.set(i, j, v * inv_sqrt[i] * inv_sqrt[j]);
                    }
                }
            }
        }
        NormKind::MeanPool => {
            for i in 0..n {
                let inv = 1.0 / degrees[i];
                for j in 0..n {
                    let v = a.get(i, j);
                    if v != 0.0 {
                        a.set(i, j, v * inv);
                    }
                }
            }
        }
    }
    NormalizedAdjacency { matrix: a, kind }
}

/// Fraction of edges whose endpoints carry the same label.
pub fn edge_homophily(graph: &Graph, labels: &[usize]) -> Result<f64> {
    if graph.n_edges() == 0 {
        return Err(GraphError::UndefinedMetric("edge homophily"));
    }
    if labels.len() != graph.n_nodes() {
        return Err(GraphError::Contract(format!(
            "{} labels for {} nodes",
            labels.len(),
            graph.n_nodes()
        )));
    }
    let same = graph
        .edges()
        .iter()
        .filter(|&&(i, j)| labels[i] == labels[j])
        .count();
    Ok(same as f64 / graph.n_edges() as f64)
}

/// Structural summary of a graph, with per-label-class homophily when
/// label vectors are supplied.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphStats {
    pub n_nodes: usize,
    pub edge_count: usize,
    pub isolated_count: usize,
    /// `(degree, how many nodes have it)`, ascending by degree.
    pub degree_histogram: Vec<(usize, usize)>,
    /// `(label class name, edge homophily)`; empty when no labels were
    /// given or the graph has no edges.
    pub homophily: Vec<(String, f64)>,
}

pub fn graph_stats(graph: &Graph, labels: &[(&str, &[usize])]) -> GraphStats {
    let degrees = graph.degrees();
    let mut hist: BTreeMap<usize, usize> = BTreeMap::new();
    for &d in &degrees {
        *hist.entry(d).or_insert(0) += 1;
    }
    let mut homophily = Vec::new();
    if graph.n_edges() > 0 {
        for &(name, y) in labels {
            if let Ok(h) = edge_homophily(graph, y) {
                homophily.push((String::from(name), h));
            }
        }
    }
    GraphStats {
        n_nodes: graph.n_nodes(),
        edge_count: graph.n_edges(),
        isolated_count: degrees.iter().filter(|&&d| d == 0).count(),
        degree_histogram: hist.into_iter().collect(),
        homophily,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitRng;

    fn points(rows: &[&[f64]]) -> Matrix {
        let cols = rows[0].len();
        let data: Vec<f64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Matrix::new(rows.len(), cols, data).unwrap()
    }

    #[test]
    fn distances_345_triangle() {
        let x = points(&[&[0.0, 0.0], &[3.0, 4.0]]);
        let d = euclidean_distances(&x);
        assert_eq!(d.get(0, 1), 5.0);
        assert_eq!(d.get(1, 0), 5.0);
        assert_eq!(d.get(0, 0), 0.0);
    }

    #[test]
    fn distances_match_bruteforce() {
        let mut rng = SplitRng::seed_from(5);
        let x = Matrix::from_fn(20, 5, |_, _| rng.standard_normal()).unwrap();
        let d = euclidean_distances(&x);
        for i in 0..20 {
            for j in 0..20 {
                let mut acc = 0.0;
                for f in 0..5 {
                    let diff = x.get(i, f) - x.get(j, f);
                    acc += diff * diff;
                }
                assert!((d.get(i, j) - acc.sqrt()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn knn_collinear_points() {
        let x = points(&[&[0.0], &[1.0], &[2.0]]);
        let g = knn_edges(&x, 1).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
    }

    #[test]
    fn knn_full_k_gives_complete_graph() {
        let mut rng = SplitRng::seed_from(9);
        let x = Matrix::from_fn(6, 3, |_, _| rng.standard_normal()).unwrap();
        let g = knn_edges(&x, 5).unwrap();
        assert_eq!(g.n_edges(), 6 * 5 / 2);
    }

    #[test]
    fn knn_guarantees_min_degree() {
        let mut rng = SplitRng::seed_from(10);
        let x = Matrix::from_fn(40, 4, |_, _| rng.standard_normal()).unwrap();
        let g = knn_edges(&x, 4).unwrap();
        assert!(g.degrees().iter().all(|&d| d >= 4));
        assert_eq!(g.isolated_count(), 0);
    }

    #[test]
    fn knn_rejects_bad_k() {
        let x = points(&[&[0.0], &[1.0]]);
        assert!(knn_edges(&x, 0).is_err());
        assert!(knn_edges(&x, 2).is_err());
    }

    #[test]
    fn radius_extremes() {
        let x = points(&[&[0.0], &[1.0], &[5.0]]);
        assert_eq!(radius_edges(&x, 0.5).n_edges(), 0);
        assert_eq!(radius_edges(&x, 100.0).n_edges(), 3);
    }

    #[test]
    fn radius_is_monotone_in_r() {
        let mut rng = SplitRng::seed_from(11);
        let x = Matrix::from_fn(25, 3, |_, _| rng.standard_normal()).unwrap();
        let small = radius_edges(&x, 0.5);
        let large = radius_edges(&x, 1.0);
        assert!(small.is_subgraph_of(&large));
    }

    #[test]
    fn hybrid_reduces_to_knn_when_r_tiny() {
        let mut rng = SplitRng::seed_from(12);
        let x = Matrix::from_fn(15, 3, |_, _| rng.standard_normal()).unwrap();
        let h = hybrid_edges(&x, 2, 1e-12).unwrap();
        let k = knn_edges(&x, 2).unwrap();
        assert_eq!(h.edges(), k.edges());
    }

    #[test]
    fn hybrid_is_a_superset_of_both() {
        let mut rng = SplitRng::seed_from(13);
        let x = Matrix::from_fn(15, 3, |_, _| rng.standard_normal()).unwrap();
        let h = hybrid_edges(&x, 2, 1.5).unwrap();
        let k = knn_edges(&x, 2).unwrap();
        let r = radius_edges(&x, 1.5);
        assert!(k.is_subgraph_of(&h));
        assert!(r.is_subgraph_of(&h));
        assert!(h.n_edges() >= k.n_edges().max(r.n_edges()));
    }

    #[test]
    fn exp_weights_closed_forms() {
        let x = points(&[&[0.0], &[core::f64::consts::LN_2]]);
        let g = knn_edges(&x, 1).unwrap();
        let d = euclidean_distances(&x);
        let w = exp_edge_weight(&g, &d).unwrap();
        assert!((w.weights()[0] - 0.5).abs() < 1e-12);
        // distances beyond ln(10) give weights below 0.1
        let far = points(&[&[0.0], &[2.303]]);
        let g2 = knn_edges(&far, 1).unwrap();
        let w2 = exp_edge_weight(&g2, &euclidean_distances(&far)).unwrap();
        assert!(w2.weights()[0] <= 0.1);
    }

    #[test]
    fn normalization_single_node_and_k2() {
        let lonely = Graph::new(1, []).unwrap();
        assert_eq!(normalize_adjacency(&lonely).matrix().data(), &[1.0]);

        let k2 = Graph::new(2, [(0, 1)]).unwrap();
        let a = normalize_adjacency(&k2);
        for v in a.matrix().data() {
            assert!((v - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn mean_pool_rows_sum_to_one() {
        let mut rng = SplitRng::seed_from(14);
        let x = Matrix::from_fn(12, 3, |_, _| rng.standard_normal()).unwrap();
        let g = knn_edges(&x, 3).unwrap();
        let a = normalize_adjacency_with(&g, NormKind::MeanPool);
        let sums = a.matrix().row_sums();
        for i in 0..12 {
            assert!((sums.get(i, 0) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn symmetric_normalization_is_symmetric_and_isolated_rows_are_unit() {
        let g = Graph::new(4, [(0, 1), (1, 2)]).unwrap(); // node 3 isolated
        let a = normalize_adjacency(&g);
        let m = a.matrix();
        for i in 0..4 {
            for j in 0..4 {
                assert!((m.get(i, j) - m.get(j, i)).abs() < 1e-12);
            }
        }
        assert_eq!(m.get(3, 3), 1.0);
        for j in 0..3 {
            assert_eq!(m.get(3, j), 0.0);
        }
    }

    #[test]
    fn homophily_matches_bruteforce() {
        let mut rng = SplitRng::seed_from(15);
        let x = Matrix::from_fn(50, 3, |_, _| rng.standard_normal()).unwrap();
        let g = knn_edges(&x, 3).unwrap();
        let labels: Vec<usize> = (0..50).map(|_| rng.uniform_usize(3)).collect();
        let h = edge_homophily(&g, &labels).unwrap();
        let mut same = 0usize;
        for &(i, j) in g.edges() {
            if labels[i] == labels[j] {
                same += 1;
            }
        }
        assert_eq!(h, same as f64 / g.n_edges() as f64);
    }

    #[test]
    fn homophily_extremes_and_empty_error() {
        let k2 = Graph::new(2, [(0, 1)]).unwrap();
        assert_eq!(edge_homophily(&k2, &[0, 0]).unwrap(), 1.0);
        assert_eq!(edge_homophily(&k2, &[0, 1]).unwrap(), 0.0);
        let empty = Graph::new(2, []).unwrap();
        assert!(matches!(
            edge_homophily(&empty, &[0, 1]),
            Err(GraphError::UndefinedMetric(_))
        ));
    }

    #[test]
    fn stats_counts() {
        let empty = Graph::new(5, []).unwrap();
        let s = graph_stats(&empty, &[]);
        assert_eq!(s.isolated_count, 5);
        assert_eq!(s.edge_count, 0);

        let k3 = Graph::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let s = graph_stats(&k3, &[("lab", &[0, 0, 1][..])]);
        assert_eq!(s.degree_histogram, alloc::vec![(2, 3)]);
        assert_eq!(s.homophily.len(), 1);
        assert!((s.homophily[0].1 - 1.0 / 3.0).abs() < 1e-12);
    }
}
