//! State-space assembly for leader-follower networks of identical agents.
//!
//! The full network is `ẋ = (I⊗A − L⊗B)x + (M⊗E)u, y = (L⊗I)x`; the reduced
//! network replaces `L, M` by `L̂, M̂` and reads out through `LP⊗I`.

use crate::error::{Error, Result};
use crate::graph::{
    leader_matrix, reduce_graph, reduced_eigenvalues, symmetrized_reduced_laplacian, Laplacian, Partition,
    CONNECTIVITY_TOL,
};
use crate::linalg::{is_hurwitz, is_symmetric, kron, Mat, StateSpace, HURWITZ_MARGIN, SYMMETRY_TOL};

/// Agent model `ẋᵢ = A xᵢ + B (coupling) + E uᵢ`.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentDynamics {
    pub a: Mat,
    pub b: Mat,
    pub e: Mat,
}

impl AgentDynamics {
    pub fn new(a: Mat, b: Mat, e: Mat) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::NotSquare { rows: n, cols: a.ncols() });
        }
        if b.nrows() != n || b.ncols() != n {
            return Err(Error::Dimension(format!("B is {}x{}, expected {n}x{n}", b.nrows(), b.ncols())));
        }
        if e.nrows() != n {
            return Err(Error::Dimension(format!("E has {} rows, expected {n}", e.nrows())));
        }
        Ok(Self { a, b, e })
    }

    /// `A = 0, B = 1, E = 1`.
    pub fn single_integrator() -> Self {
        Self { a: Mat::zeros(1, 1), b: Mat::identity(1, 1), e: Mat::identity(1, 1) }
    }

    /// Agent state dimension `n`.
    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    /// Agent input dimension `r`.
    pub fn r(&self) -> usize {
        self.e.ncols()
    }

    pub fn is_single_integrator(&self) -> bool {
        self.n() == 1 && self.r() == 1 && self.a[(0, 0)] == 0.0 && self.b[(0, 0)] == 1.0 && self.e[(0, 0)] == 1.0
    }

    pub fn is_symmetric(&self) -> bool {
        is_symmetric(&self.a, SYMMETRY_TOL) && is_symmetric(&self.b, SYMMETRY_TOL)
    }

    /// `A − λB`.
    pub fn coupled(&self, lambda: f64) -> Mat {
        &self.a - &self.b * lambda
    }
}

#[derive(Debug, Clone)]
pub struct NetworkSystem {
    laplacian: Laplacian,
    leaders: Vec<usize>,
    dynamics: AgentDynamics,
    m_matrix: Mat,
}

impl NetworkSystem {
    pub fn new(laplacian: Laplacian, leaders: Vec<usize>, dynamics: AgentDynamics) -> Result<Self> {
        let m_matrix = leader_matrix(laplacian.n(), &leaders)?;
        Ok(Self { laplacian, leaders, dynamics, m_matrix })
    }

    pub fn laplacian(&self) -> &Laplacian {
        &self.laplacian
    }

    pub fn leaders(&self) -> &[usize] {
        &self.leaders
    }

    pub fn dynamics(&self) -> &AgentDynamics {
        &self.dynamics
    }

    /// `N × m` leader selector `M`.
    pub fn m_matrix(&self) -> &Mat {
        &self.m_matrix
    }

    pub fn n_nodes(&self) -> usize {
        self.laplacian.n()
    }

    pub fn n_leaders(&self) -> usize {
        self.leaders.len()
    }

    /// Same agents and leaders on a different coupling matrix.
    pub fn with_laplacian(&self, laplacian: Laplacian) -> Result<Self> {
        Self::new(laplacian, self.leaders.clone(), self.dynamics.clone())
    }
}

/// `S_λ = (A − λB, E, λI)`, one per nonzero Laplacian eigenvalue.
#[derive(Debug, Clone)]
pub struct AuxSystem {
    pub lambda: f64,
    pub realization: StateSpace,
}

pub fn aux_system(dynamics: &AgentDynamics, lambda: f64) -> AuxSystem {
    let n = dynamics.n();
    AuxSystem {
        lambda,
        realization: StateSpace { a: dynamics.coupled(lambda), b: dynamics.e.clone(), c: Mat::identity(n, n) * lambda },
    }
}

fn network_matrix(dynamics: &AgentDynamics, coupling: &Mat) -> Mat {
    let k = coupling.nrows();
    kron(&Mat::identity(k, k), &dynamics.a) - kron(coupling, &dynamics.b)
}

fn check_partition(ns: &NetworkSystem, pi: &Partition) -> Result<()> {
    if pi.n_nodes() != ns.n_nodes() {
        return Err(Error::Dimension(format!("partition covers {} nodes, network has {}", pi.n_nodes(), ns.n_nodes())));
    }
    Ok(())
}

pub fn assemble_full(ns: &NetworkSystem) -> StateSpace {
    let d = ns.dynamics();
    let n = d.n();
    StateSpace {
        a: network_matrix(d, ns.laplacian().matrix()),
        b: kron(ns.m_matrix(), &d.e),
        c: kron(ns.laplacian().matrix(), &Mat::identity(n, n)),
    }
}

pub fn assemble_reduced(ns: &NetworkSystem, pi: &Partition) -> Result<StateSpace> {
    check_partition(ns, pi)?;
    let d = ns.dynamics();
    let n = d.n();
    let reduced = reduce_graph(ns.laplacian(), pi, ns.leaders())?;
    Ok(StateSpace {
        a: network_matrix(d, &reduced.laplacian_hat),
        b: kron(&reduced.m_hat, &d.e),
        c: kron(&(ns.laplacian().matrix() * pi.char_matrix()), &Mat::identity(n, n)),
    })
}

/// Projection pair `W = P(PᵀP)⁻¹ ⊗ I`, `V = P ⊗ I` with `WᵀV = I`.
#[derive(Debug, Clone)]
pub struct PetrovGalerkin {
    pub w: Mat,
    pub v: Mat,
}

impl PetrovGalerkin {
    pub fn new(pi: &Partition, agent_dim: usize) -> Self {
        let id = Mat::identity(agent_dim, agent_dim);
        let p = pi.char_matrix();
        Self { w: kron(&(p * pi.gram_pow(-1.0)), &id), v: kron(p, &id) }
    }

    /// `(WᵀAV, WᵀB, CV)`.
    pub fn project(&self, sys: &StateSpace) -> StateSpace {
        let wt = self.w.transpose();
        StateSpace { a: &wt * &sys.a * &self.v, b: wt * &sys.b, c: &sys.c * &self.v }
    }
}

/// Realization of `S − Ŝ` with block-diagonal dynamics
/// `diag(I⊗A − L⊗B, I⊗A − L̄⊗B)`, valid for any partition.
pub fn assemble_error_system(ns: &NetworkSystem, pi: &Partition) -> Result<StateSpace> {
    check_partition(ns, pi)?;
    let d = ns.dynamics();
    let n = d.n();
    let id = Mat::identity(n, n);
    let l = ns.laplacian().matrix();
    let p = pi.char_matrix();
    let lbar = symmetrized_reduced_laplacian(ns.laplacian(), pi);

    let a_full = network_matrix(d, l);
    let a_red = network_matrix(d, &lbar);
    let (nf, nr) = (a_full.nrows(), a_red.nrows());
    let mut a = Mat::zeros(nf + nr, nf + nr);
    a.view_mut((0, 0), (nf, nf)).copy_from(&a_full);
    a.view_mut((nf, nf), (nr, nr)).copy_from(&a_red);

    // (PᵀP)^{1/2} M̂ = (PᵀP)^{-1/2} PᵀM
    let b_full = kron(ns.m_matrix(), &d.e);
    let b_red = kron(&(pi.gram_pow(-0.5) * p.transpose() * ns.m_matrix()), &d.e);
    let mut b = Mat::zeros(nf + nr, b_full.ncols());
    b.view_mut((0, 0), (nf, b_full.ncols())).copy_from(&b_full);
    b.view_mut((nf, 0), (nr, b_full.ncols())).copy_from(&b_red);

    let c_full = kron(l, &id);
    let c_red = -kron(&(l * p * pi.gram_pow(-0.5)), &id);
    let mut c = Mat::zeros(c_full.nrows(), nf + nr);
    c.view_mut((0, 0), (c_full.nrows(), nf)).copy_from(&c_full);
    c.view_mut((0, nf), (c_full.nrows(), nr)).copy_from(&c_red);

    StateSpace::new(a, b, c)
}

pub fn aux_systems(ns: &NetworkSystem) -> Result<Vec<AuxSystem>> {
    if !ns.laplacian().is_connected() {
        return Err(Error::Disconnected);
    }
    Ok(ns.laplacian().nonzero_eigenvalues().into_iter().map(|l| aux_system(ns.dynamics(), l)).collect())
}

/// `A − λB` Hurwitz for every nonzero `λ ∈ σ(L)`.
pub fn is_synchronized(ns: &NetworkSystem) -> bool {
    ns.laplacian().nonzero_eigenvalues().iter().all(|&l| is_hurwitz(&ns.dynamics().coupled(l), HURWITZ_MARGIN))
}

/// `A − λ̂B` Hurwitz for every nonzero `λ̂ ∈ σ(L̂)`.
pub fn reduced_synchronization_preserved(ns: &NetworkSystem, pi: &Partition) -> bool {
    reduced_eigenvalues(ns.laplacian(), pi)
        .into_iter()
        .filter(|&l| l > CONNECTIVITY_TOL)
        .all(|l| is_hurwitz(&ns.dynamics().coupled(l), HURWITZ_MARGIN))
}
