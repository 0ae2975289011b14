//! Weighted undirected graphs, Laplacians, node partitions, and the
//! partition-level operations used by the reduction: almost-equitable tests,
//! reduced (quotient) Laplacians, and the closest AEP-compatible Laplacian.
//!
//! Node indices are 0-based throughout.

use std::sync::OnceLock;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::{asymmetry, max_abs, sym_eig, Mat, SymmetricEig};

/// Threshold on the second-smallest Laplacian eigenvalue for connectivity.
pub const CONNECTIVITY_TOL: f64 = 1e-9;

/// Relative tolerance of the AEP invariance test.
pub const AEP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub w: f64,
}

/// Undirected graph on nodes `0..n_nodes` with one weight per unordered pair.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    n_nodes: usize,
    edges: Vec<Edge>,
}

impl WeightedGraph {
    /// Validates indices, self-loops, duplicate pairs, and finiteness. Negative
    /// weights are accepted here and rejected by [`Laplacian::from_graph`].
    pub fn new(n_nodes: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::new();
        for (i, j, w) in edges {
            if i >= n_nodes || j >= n_nodes {
                return Err(Error::InvalidGraph(format!("edge ({i}, {j}) references a node outside 0..{n_nodes}")));
            }
            if i == j {
                return Err(Error::InvalidGraph(format!("self-loop at node {i}")));
            }
            if !w.is_finite() {
                return Err(Error::InvalidGraph(format!("edge ({i}, {j}) has non-finite weight")));
            }
            if !seen.insert((i.min(j), i.max(j))) {
                return Err(Error::InvalidGraph(format!("duplicate edge ({i}, {j})")));
            }
            out.push(Edge { i, j, w });
        }
        Ok(Self { n_nodes, edges: out })
    }

    pub fn path(n_nodes: usize, weight: f64) -> Self {
        let edges = (1..n_nodes).map(|i| (i - 1, i, weight));
        Self::new(n_nodes, edges).expect("path graph is valid")
    }

    pub fn complete(n_nodes: usize, weight: f64) -> Self {
        let edges = (0..n_nodes).flat_map(|i| ((i + 1)..n_nodes).map(move |j| (i, j, weight)));
        Self::new(n_nodes, edges).expect("complete graph is valid")
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn adjacency(&self) -> Mat {
        let mut a = Mat::zeros(self.n_nodes, self.n_nodes);
        for e in &self.edges {
            a[(e.i, e.j)] = e.w;
            a[(e.j, e.i)] = e.w;
        }
        a
    }

    /// `d_pq(j)`: total weight from node `j` into `cell`, for `j ∉ cell`.
    pub fn degree_wrt_cell(&self, j: usize, cell: &[usize]) -> Result<f64> {
        if cell.contains(&j) {
            return Err(Error::NodeInCell { node: j });
        }
        Ok(self
            .edges
            .iter()
            .filter_map(|e| {
                if e.i == j && cell.contains(&e.j) || e.j == j && cell.contains(&e.i) {
                    Some(e.w)
                } else {
                    None
                }
            })
            .sum())
    }
}

/// Symmetric PSD matrix with zero row sums.
///
/// Matrices produced by [`project_to_aep_laplacian`] may carry positive
/// off-diagonal entries (negative edge weights); those are accepted and
/// flagged by [`Laplacian::has_negative_weights`].
#[derive(Debug, Clone)]
pub struct Laplacian {
    mat: Mat,
    has_negative_weights: bool,
    spectral: OnceLock<SymmetricEig>,
}

impl PartialEq for Laplacian {
    fn eq(&self, other: &Self) -> bool {
        self.mat == other.mat
    }
}

impl Laplacian {
    pub fn from_graph(g: &WeightedGraph) -> Result<Self> {
        if let Some(e) = g.edges.iter().find(|e| e.w < 0.0) {
            return Err(Error::NegativeWeight { i: e.i, j: e.j, weight: e.w });
        }
        let a = g.adjacency();
        let degrees = DVector::from_iterator(g.n_nodes, a.row_iter().map(|r| r.sum()));
        let mat = Mat::from_diagonal(&degrees) - a;
        Ok(Self { mat, has_negative_weights: false, spectral: OnceLock::new() })
    }

    /// Accepts any symmetric PSD matrix with zero row sums.
    pub fn from_matrix(mat: Mat) -> Result<Self> {
        let n = mat.nrows();
        if mat.ncols() != n {
            return Err(Error::NotSquare { rows: n, cols: mat.ncols() });
        }
        let scale = 1.0 + max_abs(&mat);
        let asym = asymmetry(&mat).unwrap_or(f64::INFINITY);
        if asym > 1e-10 * scale {
            return Err(Error::InvalidLaplacian(format!("asymmetry {asym:e}")));
        }
        let row_sum = mat.row_iter().fold(0.0_f64, |acc, r| acc.max(r.sum().abs()));
        if row_sum > 1e-10 * scale {
            return Err(Error::InvalidLaplacian(format!("row sum {row_sum:e}")));
        }
        let mat = (&mat + mat.transpose()) * 0.5;
        let eig = sym_eig(&mat)?;
        if n > 0 && eig.eigenvalues[0] < -1e-9 * scale {
            return Err(Error::InvalidLaplacian(format!("negative eigenvalue {:e}", eig.eigenvalues[0])));
        }
        let has_negative_weights =
            (0..n).any(|i| (0..n).any(|j| i != j && mat[(i, j)] > 1e-12 * scale));
        let spectral = OnceLock::new();
        let _ = spectral.set(eig);
        Ok(Self { mat, has_negative_weights, spectral })
    }

    pub fn matrix(&self) -> &Mat {
        &self.mat
    }

    pub fn n(&self) -> usize {
        self.mat.nrows()
    }

    pub fn has_negative_weights(&self) -> bool {
        self.has_negative_weights
    }

    pub fn spectral(&self) -> &SymmetricEig {
        self.spectral.get_or_init(|| sym_eig(&self.mat).expect("Laplacian is symmetric by construction"))
    }

    pub fn eigenvalues(&self) -> &[f64] {
        self.spectral().eigenvalues.as_slice()
    }

    pub fn is_connected(&self) -> bool {
        self.n() <= 1 || self.eigenvalues()[1] > CONNECTIVITY_TOL
    }

    /// Eigenvalues above [`CONNECTIVITY_TOL`], ascending, with multiplicity.
    pub fn nonzero_eigenvalues(&self) -> Vec<f64> {
        self.eigenvalues().iter().copied().filter(|&l| l > CONNECTIVITY_TOL).collect()
    }

    /// Weight from node `j` into `cell`, read off the matrix as `−Σ_{i∈cell} L_ij`.
    pub fn degree_into_cell(&self, j: usize, cell: &[usize]) -> Result<f64> {
        if cell.contains(&j) {
            return Err(Error::NodeInCell { node: j });
        }
        Ok(-cell.iter().map(|&i| self.mat[(i, j)]).sum::<f64>())
    }
}

pub fn laplacian_from_graph(g: &WeightedGraph) -> Result<Laplacian> {
    Laplacian::from_graph(g)
}

/// Disjoint nonempty cells covering `0..n_nodes`, with characteristic matrix
/// `P` and orthogonal projector `𝒫 = P(PᵀP)⁻¹Pᵀ` onto `Im P`.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    cells: Vec<Vec<usize>>,
    cell_of: Vec<usize>,
    char_matrix: Mat,
    projector: Mat,
}

impl Partition {
    pub fn new(n_nodes: usize, cells: Vec<Vec<usize>>) -> Result<Self> {
        let mut cell_of = vec![usize::MAX; n_nodes];
        for (p, cell) in cells.iter().enumerate() {
            if cell.is_empty() {
                return Err(Error::InvalidPartition { reason: format!("cell {p} is empty"), node: None });
            }
            for &v in cell {
                if v >= n_nodes {
                    return Err(Error::InvalidPartition {
                        reason: format!("node {v} in cell {p} is outside 0..{n_nodes}"),
                        node: Some(v),
                    });
                }
                if cell_of[v] != usize::MAX {
                    return Err(Error::InvalidPartition {
                        reason: format!("node {v} appears in cells {} and {p}", cell_of[v]),
                        node: Some(v),
                    });
                }
                cell_of[v] = p;
            }
        }
        if let Some(v) = cell_of.iter().position(|&p| p == usize::MAX) {
            return Err(Error::InvalidPartition { reason: format!("node {v} is not in any cell"), node: Some(v) });
        }
        let k = cells.len();
        let char_matrix = Mat::from_fn(n_nodes, k, |i, p| if cell_of[i] == p { 1.0 } else { 0.0 });
        let projector = Mat::from_fn(n_nodes, n_nodes, |i, j| {
            if cell_of[i] == cell_of[j] {
                1.0 / cells[cell_of[i]].len() as f64
            } else {
                0.0
            }
        });
        Ok(Self { cells, cell_of, char_matrix, projector })
    }

    /// Builds a partition from a cell label per node; labels are renumbered in
    /// order of first appearance.
    pub fn from_labels(labels: &[usize]) -> Result<Self> {
        let mut map = std::collections::HashMap::new();
        let mut cells: Vec<Vec<usize>> = Vec::new();
        for (node, &label) in labels.iter().enumerate() {
            let p = *map.entry(label).or_insert_with(|| {
                cells.push(Vec::new());
                cells.len() - 1
            });
            cells[p].push(node);
        }
        Self::new(labels.len(), cells)
    }

    pub fn singletons(n_nodes: usize) -> Self {
        Self::new(n_nodes, (0..n_nodes).map(|i| vec![i]).collect()).expect("singletons are valid")
    }

    pub fn single_cell(n_nodes: usize) -> Self {
        Self::new(n_nodes, vec![(0..n_nodes).collect()]).expect("one cell is valid")
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_nodes(&self) -> usize {
        self.cell_of.len()
    }

    pub fn cell_of(&self, node: usize) -> usize {
        self.cell_of[node]
    }

    pub fn cell_size(&self, p: usize) -> usize {
        self.cells[p].len()
    }

    pub fn char_matrix(&self) -> &Mat {
        &self.char_matrix
    }

    pub fn projector(&self) -> &Mat {
        &self.projector
    }

    /// `(PᵀP)^power`, a diagonal matrix of cell sizes raised to `power`.
    pub fn gram_pow(&self, power: f64) -> Mat {
        Mat::from_diagonal(&DVector::from_iterator(
            self.num_cells(),
            self.cells.iter().map(|c| (c.len() as f64).powf(power)),
        ))
    }

    pub fn is_trivial(&self) -> bool {
        self.num_cells() == self.n_nodes()
    }
}

/// `π` is almost equitable iff `L·Im P ⊆ Im P`, tested as `‖(I − 𝒫) L P‖_max` small.
pub fn is_almost_equitable(l: &Laplacian, pi: &Partition) -> bool {
    aep_residual(l, pi) <= AEP_TOL * (1.0 + max_abs(l.matrix()))
}

pub fn aep_residual(l: &Laplacian, pi: &Partition) -> f64 {
    let n = l.n();
    let lp = l.matrix() * pi.char_matrix();
    max_abs(&((Mat::identity(n, n) - pi.projector()) * lp))
}

/// Definitional AEP test: for every pair of distinct cells `C_p, C_q`, the
/// degree `d_pq(j)` is the same for all `j ∈ C_q`.
pub fn is_almost_equitable_by_degrees(l: &Laplacian, pi: &Partition) -> bool {
    let tol = AEP_TOL * (1.0 + max_abs(l.matrix()));
    for (p, cp) in pi.cells().iter().enumerate() {
        for (q, cq) in pi.cells().iter().enumerate() {
            if p == q {
                continue;
            }
            let degrees: Vec<f64> =
                cq.iter().map(|&j| l.degree_into_cell(j, cp).expect("j is outside C_p")).collect();
            let (lo, hi) = degrees.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &d| (lo.min(d), hi.max(d)));
            if hi - lo > tol {
                return false;
            }
        }
    }
    true
}

/// `N × m` leader selector: `M_ij = 1` iff node `i` is leader `j`.
pub fn leader_matrix(n_nodes: usize, leaders: &[usize]) -> Result<Mat> {
    let mut seen = vec![false; n_nodes];
    for &v in leaders {
        if v >= n_nodes {
            return Err(Error::InvalidLeaders { reason: format!("leader {v} is outside 0..{n_nodes}"), node: Some(v) });
        }
        if seen[v] {
            return Err(Error::InvalidLeaders { reason: format!("leader {v} listed twice"), node: Some(v) });
        }
        seen[v] = true;
    }
    Ok(Mat::from_fn(n_nodes, leaders.len(), |i, j| if leaders[j] == i { 1.0 } else { 0.0 }))
}

/// Quotient network of a partition.
#[derive(Debug, Clone)]
pub struct ReducedGraph {
    /// `L̂ = (PᵀP)⁻¹PᵀLP`, in general nonsymmetric.
    pub laplacian_hat: Mat,
    /// `â_pq = (1/|C_p|) Σ_{j∈C_q} d_pq(j)`, zero diagonal.
    pub adjacency_hat: Mat,
    /// `M̂ = (PᵀP)⁻¹PᵀM`.
    pub m_hat: Mat,
}

impl ReducedGraph {
    /// Directed-graph Laplacian rebuilt from `â`.
    pub fn laplacian_from_adjacency(&self) -> Mat {
        let k = self.adjacency_hat.nrows();
        let mut l = -self.adjacency_hat.clone();
        for p in 0..k {
            l[(p, p)] = self.adjacency_hat.row(p).sum();
        }
        l
    }
}

pub fn reduce_graph(l: &Laplacian, pi: &Partition, leaders: &[usize]) -> Result<ReducedGraph> {
    if pi.n_nodes() != l.n() {
        return Err(Error::Dimension(format!("partition covers {} nodes, graph has {}", pi.n_nodes(), l.n())));
    }
    let m = leader_matrix(l.n(), leaders)?;
    let p = pi.char_matrix();
    let gram_inv = pi.gram_pow(-1.0);
    let laplacian_hat = &gram_inv * p.transpose() * l.matrix() * p;
    let m_hat = &gram_inv * p.transpose() * m;
    let k = pi.num_cells();
    let mut adjacency_hat = Mat::zeros(k, k);
    for (pp, cp) in pi.cells().iter().enumerate() {
        for (q, cq) in pi.cells().iter().enumerate() {
            if pp == q {
                continue;
            }
            let total: f64 = cq.iter().map(|&j| l.degree_into_cell(j, cp).expect("j is outside C_p")).sum();
            adjacency_hat[(pp, q)] = total / cp.len() as f64;
        }
    }
    Ok(ReducedGraph { laplacian_hat, adjacency_hat, m_hat })
}

/// `L̄ = (PᵀP)^{-1/2} PᵀLP (PᵀP)^{-1/2}`: symmetric and similar to `L̂`.
pub fn symmetrized_reduced_laplacian(l: &Laplacian, pi: &Partition) -> Mat {
    let p = pi.char_matrix();
    let d = pi.gram_pow(-0.5);
    let lbar = &d * p.transpose() * l.matrix() * p * &d;
    (&lbar + lbar.transpose()) * 0.5
}

/// Eigenvalues of `L̂`, computed from its symmetric similar `L̄`, ascending.
pub fn reduced_eigenvalues(l: &Laplacian, pi: &Partition) -> Vec<f64> {
    let lbar = symmetrized_reduced_laplacian(l, pi);
    sym_eig(&lbar).expect("L̄ is symmetric").eigenvalues.iter().copied().collect()
}

/// Frobenius-closest Laplacian-like matrix for which `π` is almost equitable.
#[derive(Debug, Clone)]
pub struct AepProjection {
    /// `L_AEP = 𝒫L𝒫 + (I − 𝒫)L(I − 𝒫)`.
    pub matrix: Mat,
    /// `‖L − L_AEP‖_F`.
    pub delta_frobenius: f64,
    pub has_negative_weights: bool,
}

impl AepProjection {
    pub fn laplacian(&self) -> Result<Laplacian> {
        Laplacian::from_matrix(self.matrix.clone())
    }

    pub fn delta(&self, original: &Laplacian) -> Mat {
        original.matrix() - &self.matrix
    }
}

pub fn project_to_aep_laplacian(l: &Laplacian, pi: &Partition) -> AepProjection {
    let n = l.n();
    let proj = pi.projector();
    let comp = Mat::identity(n, n) - proj;
    let lm = l.matrix();
    let aep = proj * lm * proj + &comp * lm * &comp;
    let aep = (&aep + aep.transpose()) * 0.5;
    let delta_frobenius = (lm - &aep).norm();
    let scale = 1.0 + max_abs(lm);
    let has_negative_weights = (0..n).any(|i| (0..n).any(|j| i != j && aep[(i, j)] > 1e-12 * scale));
    AepProjection { matrix: aep, delta_frobenius, has_negative_weights }
}
