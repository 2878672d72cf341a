//! Undirected communication graphs, their Laplacians, and the i.i.d.
//! link-failure network model.
//!
//! Edges are stored canonically as `(i, j)` with `i < j`, sorted
//! lexicographically. Every iteration over edges (Laplacian assembly,
//! link-failure draws, serialization) follows that order, so a fixed seed
//! yields a bit-reproducible sequence of sampled graphs.

use std::collections::BTreeSet;
use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;

use crate::error::{Error, Result};

/// Tolerance for treating a Laplacian eigenvalue as zero.
pub const SPECTRAL_EPS: f64 = 1e-9;
/// Minimum algebraic connectivity for a graph to count as connected.
pub const CONNECTIVITY_EPS: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    num_nodes: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Build a graph from unordered node pairs. Pairs may be given in either
    /// orientation; self-loops, duplicates and out-of-range endpoints are
    /// rejected.
    pub fn new(num_nodes: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if num_nodes == 0 {
            return Err(Error::InvalidGraph("graph needs at least one node".into()));
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at node {a}")));
            }
            if a >= num_nodes || b >= num_nodes {
                return Err(Error::InvalidGraph(format!(
                    "edge {{{a},{b}}} has an endpoint outside 0..{num_nodes}"
                )));
            }
            if !set.insert((a.min(b), a.max(b))) {
                return Err(Error::InvalidGraph(format!("duplicate edge {{{a},{b}}}")));
            }
        }
        Ok(Graph {
            num_nodes,
            edges: set.into_iter().collect(),
        })
    }

    pub fn empty(num_nodes: usize) -> Result<Self> {
        Graph::new(num_nodes, [])
    }

    pub fn complete(num_nodes: usize) -> Result<Self> {
        Graph::new(
            num_nodes,
            (0..num_nodes).flat_map(|i| (i + 1..num_nodes).map(move |j| (i, j))),
        )
    }

    pub fn path(num_nodes: usize) -> Result<Self> {
        Graph::new(num_nodes, (1..num_nodes).map(|i| (i - 1, i)))
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Edges in canonical sorted order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn contains_edge(&self, a: usize, b: usize) -> bool {
        self.edges.binary_search(&(a.min(b), a.max(b))).is_ok()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.num_nodes];
        for &(i, j) in &self.edges {
            deg[i] += 1;
            deg[j] += 1;
        }
        deg
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    /// Neighbor lists, each sorted ascending.
    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.num_nodes];
        for &(i, j) in &self.edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    /// Combinatorial connectivity check (breadth-first search).
    pub fn is_connected(&self) -> bool {
        let adj = self.neighbors();
        let mut seen = vec![false; self.num_nodes];
        let mut queue = vec![0];
        seen[0] = true;
        while let Some(u) = queue.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Relabel nodes: node `i` becomes `perm[i]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Graph> {
        if perm.len() != self.num_nodes {
            return Err(Error::DimensionMismatch {
                expected: self.num_nodes,
                got: perm.len(),
            });
        }
        Graph::new(
            self.num_nodes,
            self.edges.iter().map(|&(i, j)| (perm[i], perm[j])),
        )
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "graph(N={}, |E|={})", self.num_nodes, self.edges.len())
    }
}

/// Graph Laplacian `L = D - A` of an unweighted undirected graph.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianMatrix(DMatrix<f64>);

impl LaplacianMatrix {
    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }
}

/// `L_ij = -1` for every edge, diagonal = degree.
pub fn laplacian_of(graph: &Graph) -> LaplacianMatrix {
    let n = graph.num_nodes();
    let mut m = DMatrix::zeros(n, n);
    for &(i, j) in graph.edges() {
        m[(i, j)] = -1.0;
        m[(j, i)] = -1.0;
        m[(i, i)] += 1.0;
        m[(j, j)] += 1.0;
    }
    LaplacianMatrix(m)
}

fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    if !m.is_square() {
        return Err(Error::InvariantViolation(format!(
            "matrix is {}x{}, expected square",
            m.nrows(),
            m.ncols()
        )));
    }
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (m[(i, j)], m[(j, i)]);
            if (a - b).abs() > SPECTRAL_EPS * (1.0 + a.abs().max(b.abs())) {
                return Err(Error::InvariantViolation(format!(
                    "matrix not symmetric at ({i},{j}): {a} vs {b}"
                )));
            }
        }
    }
    Ok(())
}

/// Eigenvalues of a symmetric matrix in ascending order.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    check_symmetric(m)?;
    let mut values: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Second-smallest eigenvalue of a (possibly expected) Laplacian, clamped to
/// zero when it lies within [`SPECTRAL_EPS`] of zero. A 1×1 matrix has no
/// second eigenvalue; a single node is trivially connected and reports 0.
pub fn algebraic_connectivity(lap: &DMatrix<f64>) -> Result<f64> {
    let values = symmetric_eigenvalues(lap)?;
    let lambda2 = values.get(1).copied().unwrap_or(0.0);
    Ok(if lambda2.abs() <= SPECTRAL_EPS { 0.0 } else { lambda2 })
}

/// Base graph with independent per-link, per-iteration failures.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomNetworkModel {
    base: Graph,
    p_fail: f64,
}

impl RandomNetworkModel {
    pub fn new(base: Graph, p_fail: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_fail) {
            return Err(Error::InvalidSpec(format!(
                "link failure probability {p_fail} outside [0, 1]"
            )));
        }
        Ok(RandomNetworkModel { base, p_fail })
    }

    /// A network whose links never fail.
    pub fn fixed(base: Graph) -> Self {
        RandomNetworkModel { base, p_fail: 0.0 }
    }

    pub fn base_graph(&self) -> &Graph {
        &self.base
    }

    pub fn p_fail(&self) -> f64 {
        self.p_fail
    }

    pub fn num_nodes(&self) -> usize {
        self.base.num_nodes()
    }
}

/// Draw one network realization. Exactly one uniform is consumed per base
/// edge, in canonical order, whatever `p_fail` is.
pub fn sample_network<R: Rng + ?Sized>(model: &RandomNetworkModel, rng: &mut R) -> Graph {
    let keep = 1.0 - model.p_fail;
    let edges = model
        .base
        .edges()
        .iter()
        .copied()
        .filter(|_| rng.random::<f64>() < keep)
        .collect();
    Graph {
        num_nodes: model.base.num_nodes(),
        edges,
    }
}

/// `E[L(k)] = (1 - p_fail) · L(base)`.
pub fn expected_laplacian(model: &RandomNetworkModel) -> DMatrix<f64> {
    laplacian_of(&model.base).into_matrix() * (1.0 - model.p_fail)
}

/// How the connection radius of a geometric graph is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Radius {
    Fixed(f64),
    /// Smallest radius connecting the drawn placement, plus a 10% margin.
    Auto,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeometricGraphSpec {
    pub num_nodes: usize,
    pub radius: Radius,
    pub retry_limit: usize,
    /// Placements whose graph exceeds this degree are redrawn.
    pub max_degree: Option<usize>,
}

impl GeometricGraphSpec {
    pub fn new(num_nodes: usize, radius: Radius) -> Self {
        GeometricGraphSpec {
            num_nodes,
            radius,
            retry_limit: 10_000,
            max_degree: None,
        }
    }

    pub fn with_max_degree(mut self, max_degree: usize) -> Self {
        self.max_degree = Some(max_degree);
        self
    }

    fn validate(&self) -> Result<()> {
        if self.num_nodes == 0 {
            return Err(Error::InvalidSpec("geometric graph needs at least one node".into()));
        }
        if let Radius::Fixed(r) = self.radius {
            if !(r > 0.0 && r <= std::f64::consts::SQRT_2) {
                return Err(Error::InvalidSpec(format!(
                    "connection radius {r} outside (0, sqrt 2]"
                )));
            }
        }
        if self.retry_limit == 0 {
            return Err(Error::InvalidSpec("retry limit must be positive".into()));
        }
        Ok(())
    }
}

impl fmt::Display for GeometricGraphSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let radius = match self.radius {
            Radius::Fixed(r) => format!("{r}"),
            Radius::Auto => "auto".into(),
        };
        write!(
            f,
            "geometric graph N={}, radius={}, retry_limit={}, max_degree={}",
            self.num_nodes,
            radius,
            self.retry_limit,
            self.max_degree.map_or("none".into(), |d| d.to_string())
        )
    }
}

const AUTO_RADIUS_MARGIN: f64 = 1.1;

fn disk_graph(points: &[(f64, f64)], radius: f64) -> Graph {
    let n = points.len();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let (dx, dy) = (points[i].0 - points[j].0, points[i].1 - points[j].1);
            if (dx * dx + dy * dy).sqrt() <= radius {
                edges.push((i, j));
            }
        }
    }
    Graph { num_nodes: n, edges }
}

/// Binary search over the sorted pairwise distances for the smallest radius
/// whose disk graph is connected.
fn connecting_radius(points: &[(f64, f64)]) -> f64 {
    let n = points.len();
    let mut dists: Vec<f64> = (0..n)
        .flat_map(|i| {
            (i + 1..n).map(move |j| {
                let (dx, dy) = (points[i].0 - points[j].0, points[i].1 - points[j].1);
                (dx * dx + dy * dy).sqrt()
            })
        })
        .collect();
    if dists.is_empty() {
        return 0.0;
    }
    dists.sort_by(f64::total_cmp);
    let (mut lo, mut hi) = (0, dists.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if disk_graph(points, dists[mid]).is_connected() {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    dists[lo]
}

/// Random geometric graph on the unit square, redrawn wholesale until it is
/// connected (and within the degree cap, when one is set).
pub fn generate_geometric_graph<R: Rng + ?Sized>(
    spec: &GeometricGraphSpec,
    rng: &mut R,
) -> Result<Graph> {
    spec.validate()?;
    for _ in 0..spec.retry_limit {
        let points: Vec<(f64, f64)> = (0..spec.num_nodes)
            .map(|_| (rng.random::<f64>(), rng.random::<f64>()))
            .collect();
        let radius = match spec.radius {
            Radius::Fixed(r) => r,
            Radius::Auto => {
                (connecting_radius(&points) * AUTO_RADIUS_MARGIN).min(std::f64::consts::SQRT_2)
            }
        };
        let graph = disk_graph(&points, radius);
        if spec.max_degree.is_some_and(|cap| graph.max_degree() > cap) {
            continue;
        }
        let lambda2 = algebraic_connectivity(laplacian_of(&graph).as_matrix())?;
        if spec.num_nodes == 1 || lambda2 > CONNECTIVITY_EPS {
            return Ok(graph);
        }
    }
    Err(Error::GenerationFailure {
        attempts: spec.retry_limit,
        spec: spec.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Purpose, StreamKey};

    fn assert_matrix(m: &DMatrix<f64>, rows: &[&[f64]]) {
        assert_eq!(m.nrows(), rows.len());
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                assert_eq!(m[(i, j)], v, "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn laplacian_single_edge() {
        let g = Graph::new(3, [(0, 1)]).unwrap();
        assert_matrix(
            laplacian_of(&g).as_matrix(),
            &[&[1.0, -1.0, 0.0], &[-1.0, 1.0, 0.0], &[0.0, 0.0, 0.0]],
        );
    }

    #[test]
    fn laplacian_empty_and_path() {
        let empty = Graph::empty(3).unwrap();
        assert_eq!(laplacian_of(&empty).as_matrix(), &DMatrix::zeros(3, 3));
        let path = Graph::path(3).unwrap();
        assert_matrix(
            laplacian_of(&path).as_matrix(),
            &[&[1.0, -1.0, 0.0], &[-1.0, 2.0, -1.0], &[0.0, -1.0, 1.0]],
        );
    }

    #[test]
    fn rejects_malformed_graphs() {
        assert!(Graph::new(3, [(1, 1)]).is_err());
        assert!(Graph::new(3, [(0, 1), (1, 0)]).is_err());
        assert!(Graph::new(3, [(0, 3)]).is_err());
        assert!(Graph::new(0, []).is_err());
    }

    #[test]
    fn connectivity_of_known_graphs() {
        let k4 = laplacian_of(&Graph::complete(4).unwrap());
        assert!((algebraic_connectivity(k4.as_matrix()).unwrap() - 4.0).abs() < 1e-9);
        let p3 = laplacian_of(&Graph::path(3).unwrap());
        assert!((algebraic_connectivity(p3.as_matrix()).unwrap() - 1.0).abs() < 1e-9);
        let split = laplacian_of(&Graph::new(3, [(0, 1)]).unwrap());
        assert_eq!(algebraic_connectivity(split.as_matrix()).unwrap(), 0.0);
    }

    #[test]
    fn non_symmetric_input_is_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, 0.0, 0.0]);
        assert!(matches!(
            algebraic_connectivity(&m),
            Err(Error::InvariantViolation(_))
        ));
    }

    #[test]
    fn degenerate_failure_probabilities() {
        let base = Graph::complete(5).unwrap();
        let mut rng = stream(1, StreamKey::new(0, 0, Purpose::Network));
        let never = RandomNetworkModel::new(base.clone(), 0.0).unwrap();
        let always = RandomNetworkModel::new(base.clone(), 1.0).unwrap();
        for _ in 0..100 {
            assert_eq!(sample_network(&never, &mut rng), base);
            assert_eq!(sample_network(&always, &mut rng).num_edges(), 0);
        }
        assert!(RandomNetworkModel::new(base, 1.5).is_err());
    }

    #[test]
    fn expected_laplacian_scales_by_survival() {
        let base = Graph::new(2, [(0, 1)]).unwrap();
        let half = RandomNetworkModel::new(base.clone(), 0.5).unwrap();
        assert_matrix(&expected_laplacian(&half), &[&[0.5, -0.5], &[-0.5, 0.5]]);
        let none = RandomNetworkModel::new(base.clone(), 1.0).unwrap();
        assert_eq!(expected_laplacian(&none), DMatrix::zeros(2, 2));
        let all = RandomNetworkModel::new(base.clone(), 0.0).unwrap();
        assert_eq!(expected_laplacian(&all), laplacian_of(&base).into_matrix());
    }

    #[test]
    fn geometric_trivial_cases() {
        let mut rng = stream(3, StreamKey::new(0, 0, Purpose::Instance));
        let two = GeometricGraphSpec::new(2, Radius::Fixed(std::f64::consts::SQRT_2));
        for _ in 0..20 {
            assert_eq!(generate_geometric_graph(&two, &mut rng).unwrap().edges(), &[(0, 1)]);
        }
        let one = GeometricGraphSpec::new(1, Radius::Auto);
        assert_eq!(generate_geometric_graph(&one, &mut rng).unwrap().num_edges(), 0);
    }

    #[test]
    fn geometric_retry_exhaustion_reports_settings() {
        let mut rng = stream(3, StreamKey::new(0, 0, Purpose::Instance));
        let mut spec = GeometricGraphSpec::new(30, Radius::Fixed(0.01));
        spec.retry_limit = 5;
        let err = generate_geometric_graph(&spec, &mut rng).unwrap_err();
        assert!(matches!(err, Error::GenerationFailure { attempts: 5, .. }));
        assert!(err.to_string().contains("N=30"));
    }

    #[test]
    fn auto_radius_respects_degree_cap() {
        let mut rng = stream(9, StreamKey::new(0, 0, Purpose::Instance));
        let spec = GeometricGraphSpec::new(10, Radius::Auto).with_max_degree(7);
        for _ in 0..20 {
            let g = generate_geometric_graph(&spec, &mut rng).unwrap();
            assert!(g.is_connected());
            assert!(g.max_degree() <= 7);
        }
    }
}
