//! A-priori error bounds for clustering-based reduction and the aggregated
//! [`BoundReport`].
//!
//! The AEP bounds are driven by the auxiliary systems `S_λ` over the
//! eigenvalues lost in the reduction, `σ(L) ∖ σ(L̂)`, and by how many
//! cellmates each leader has. For arbitrary partitions of single-integrator
//! networks, [`triangle_bound_general`] goes through the closest
//! AEP-compatible Laplacian.

use serde::{Deserialize, Serialize};

use crate::engines::{NormEngine, NormKind, NormRegistry};
use crate::error::{Error, Result};
use crate::graph::{
    is_almost_equitable, project_to_aep_laplacian, reduce_graph, reduced_eigenvalues, Partition, CONNECTIVITY_TOL,
};
use crate::linalg::{sym_eig, Mat, StateSpace};
use crate::netsys::{
    assemble_error_system, assemble_full, aux_system, is_synchronized, reduced_synchronization_preserved,
    NetworkSystem,
};
use crate::norms::{aux_h2_sq, hinf_norm_dc, NormResult};

/// Relative tolerance for matching `σ(L̂)` against `σ(L)`.
pub const SPECTRUM_MATCH_TOL: f64 = 1e-7;

/// A report field that is either computed or refused with a reason.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Entry<T> {
    Present(T),
    Absent(Absence),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Absence {
    pub code: String,
    pub message: String,
}

impl<T> Entry<T> {
    pub fn absent(code: &str, message: impl Into<String>) -> Self {
        Entry::Absent(Absence { code: code.to_string(), message: message.into() })
    }

    pub fn value(&self) -> Option<&T> {
        match self {
            Entry::Present(v) => Some(v),
            Entry::Absent(_) => None,
        }
    }

    pub fn is_present(&self) -> bool {
        matches!(self, Entry::Present(_))
    }

    pub fn map<U>(&self, f: impl FnOnce(&T) -> U) -> Entry<U> {
        match self {
            Entry::Present(v) => Entry::Present(f(v)),
            Entry::Absent(a) => Entry::Absent(a.clone()),
        }
    }
}

impl<T> From<Result<T>> for Entry<T> {
    fn from(r: Result<T>) -> Self {
        match r {
            Ok(v) => Entry::Present(v),
            Err(e) => Entry::absent(e.code(), e.to_string()),
        }
    }
}

/// `1 − 1/|C_{k_i}|` for each leader `i`, in leader order.
pub fn cellmate_terms(ns: &NetworkSystem, pi: &Partition) -> Vec<f64> {
    ns.leaders().iter().map(|&v| 1.0 - 1.0 / pi.cell_size(pi.cell_of(v)) as f64).collect()
}

pub fn leaders_share_cell(ns: &NetworkSystem, pi: &Partition) -> bool {
    let mut cells: Vec<usize> = ns.leaders().iter().map(|&v| pi.cell_of(v)).collect();
    cells.sort_unstable();
    cells.windows(2).any(|w| w[0] == w[1])
}

/// Multiset difference `full ∖ reduced`: each reduced value is matched to the
/// closest unmatched full value within `tol`; unmatched full values remain.
pub fn spectrum_difference(full: &[f64], reduced: &[f64], tol: f64) -> Vec<f64> {
    let mut matched = vec![false; full.len()];
    for &r in reduced {
        let best = (0..full.len())
            .filter(|&i| !matched[i])
            .min_by(|&a, &b| (full[a] - r).abs().total_cmp(&(full[b] - r).abs()));
        if let Some(i) = best {
            if (full[i] - r).abs() <= tol {
                matched[i] = true;
            }
        }
    }
    full.iter().zip(&matched).filter(|(_, &m)| !m).map(|(&v, _)| v).collect()
}

/// Nonzero eigenvalues of `L` that are not eigenvalues of `L̂`.
pub fn lost_eigenvalues(ns: &NetworkSystem, pi: &Partition) -> Vec<f64> {
    let full = ns.laplacian().eigenvalues();
    let lambda_max = full.last().copied().unwrap_or(0.0);
    spectrum_difference(full, &reduced_eigenvalues(ns.laplacian(), pi), SPECTRUM_MATCH_TOL * (1.0 + lambda_max))
        .into_iter()
        .filter(|&l| l > CONNECTIVITY_TOL)
        .collect()
}

fn check_partition(ns: &NetworkSystem, pi: &Partition) -> Result<()> {
    if pi.n_nodes() != ns.n_nodes() {
        return Err(Error::Dimension(format!("partition covers {} nodes, network has {}", pi.n_nodes(), ns.n_nodes())));
    }
    Ok(())
}

fn check_aep_network(ns: &NetworkSystem, pi: &Partition) -> Result<()> {
    check_partition(ns, pi)?;
    if !ns.laplacian().is_connected() {
        return Err(Error::Disconnected);
    }
    if !is_almost_equitable(ns.laplacian(), pi) {
        return Err(Error::NotAep);
    }
    if !is_synchronized(ns) {
        return Err(Error::NotSynchronized);
    }
    Ok(())
}

/// Absolute and relative bound with the auxiliary-system constants behind them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AepBound {
    pub abs: f64,
    /// `None` when the lower-bound constant vanishes while the numerator does not.
    pub rel: Option<f64>,
    pub s_max: f64,
    pub s_min: f64,
}

fn ratio_sqrt(num: f64, den: f64) -> Option<f64> {
    if num == 0.0 {
        Some(0.0)
    } else if den > 0.0 {
        Some((num / den).sqrt())
    } else {
        None
    }
}

/// H2 bound for an AEP:
/// `‖S − Ŝ‖² ≤ S²_max Σᵢ(1 − 1/|C_{k_i}|)` and the matching relative bound
/// with denominator `S²_min · m(1 − 1/N)`.
pub fn h2_bound_aep(ns: &NetworkSystem, pi: &Partition) -> Result<AepBound> {
    check_aep_network(ns, pi)?;
    let d = ns.dynamics();
    let mut s_max_sq: f64 = 0.0;
    for l in lost_eigenvalues(ns, pi) {
        s_max_sq = s_max_sq.max(aux_h2_sq(d, l)?);
    }
    let mut s_min_sq = f64::INFINITY;
    for l in ns.laplacian().nonzero_eigenvalues() {
        s_min_sq = s_min_sq.min(aux_h2_sq(d, l)?);
    }
    if !s_min_sq.is_finite() {
        s_min_sq = 0.0;
    }
    let sum: f64 = cellmate_terms(ns, pi).iter().sum();
    let m = ns.n_leaders() as f64;
    let n = ns.n_nodes() as f64;
    let num = s_max_sq * sum;
    Ok(AepBound {
        abs: num.sqrt(),
        rel: ratio_sqrt(num, s_min_sq * m * (1.0 - 1.0 / n)),
        s_max: s_max_sq.sqrt(),
        s_min: s_min_sq.sqrt(),
    })
}

/// `λ_max(I_m − 𝟙𝟙ᵀ/N)`: `1` for `m ≥ 2`, `1 − 1/N` for `m = 1`, `0` for `m = 0`.
pub fn leader_spread(m: usize, n_nodes: usize) -> f64 {
    match m {
        0 => 0.0,
        1 => 1.0 - 1.0 / n_nodes as f64,
        _ => 1.0,
    }
}

/// Leader factor of the H∞ results: `max_i(1 − 1/|C_{k_i}|)` when leaders sit
/// in distinct cells, `1` otherwise.
pub fn hinf_leader_factor(ns: &NetworkSystem, pi: &Partition) -> f64 {
    if leaders_share_cell(ns, pi) {
        1.0
    } else {
        cellmate_terms(ns, pi).into_iter().fold(0.0, f64::max)
    }
}

/// Exact H∞ quantities for single-integrator networks with an AEP.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingleIntegratorHinf {
    /// `‖S − Ŝ‖_H∞`.
    pub error: f64,
    /// `‖S‖_H∞ = √λ_max(I_m − 𝟙𝟙ᵀ/N)`.
    pub full_norm: f64,
}

pub fn hinf_error_single_integrator(ns: &NetworkSystem, pi: &Partition) -> Result<SingleIntegratorHinf> {
    check_partition(ns, pi)?;
    if !ns.dynamics().is_single_integrator() {
        return Err(Error::NotSingleIntegrator);
    }
    if !ns.laplacian().is_connected() {
        return Err(Error::Disconnected);
    }
    if !is_almost_equitable(ns.laplacian(), pi) {
        return Err(Error::NotAep);
    }
    Ok(SingleIntegratorHinf {
        error: hinf_leader_factor(ns, pi).sqrt(),
        full_norm: leader_spread(ns.n_leaders(), ns.n_nodes()).sqrt(),
    })
}

/// `S_λ(0) = λ(λB − A)⁻¹E`.
pub fn aux_dc_gain(ns: &NetworkSystem, lambda: f64) -> Result<Mat> {
    let d = ns.dynamics();
    let m = -d.coupled(lambda);
    let sol = m.lu().solve(&d.e).ok_or(Error::Singular)?;
    Ok(sol * lambda)
}

/// H∞ bound for an AEP with symmetric `A`, `B`. `S_max` is `max ‖S_λ‖_H∞`
/// over lost eigenvalues, each evaluated in closed form at DC with witness
/// `A − λB`; `S_min` is `min σ_min(S_λ(0))` over all nonzero eigenvalues.
/// The relative bound uses `‖S‖²_H∞ ≥ S²_min λ_max(I_m − 𝟙𝟙ᵀ/N)`.
pub fn hinf_bound_symmetric(ns: &NetworkSystem, pi: &Partition) -> Result<AepBound> {
    check_partition(ns, pi)?;
    if !ns.dynamics().is_symmetric() {
        return Err(Error::NotSymmetricDynamics);
    }
    check_aep_network(ns, pi)?;
    let d = ns.dynamics();
    let mut s_max: f64 = 0.0;
    for l in lost_eigenvalues(ns, pi) {
        let aux = aux_system(d, l);
        let witness = d.coupled(l);
        s_max = s_max.max(hinf_norm_dc(&aux.realization, &witness)?.value);
    }
    let mut s_min_sq = f64::INFINITY;
    for l in ns.laplacian().nonzero_eigenvalues() {
        let g = aux_dc_gain(ns, l)?;
        let gram = g.transpose() * &g;
        let smallest = if g.ncols() > g.nrows() { 0.0 } else { sym_eig(&((&gram + gram.transpose()) * 0.5))?.eigenvalues[0] };
        s_min_sq = s_min_sq.min(smallest.max(0.0));
    }
    if !s_min_sq.is_finite() {
        s_min_sq = 0.0;
    }
    let factor = hinf_leader_factor(ns, pi);
    let num = s_max * s_max * factor;
    Ok(AepBound {
        abs: num.sqrt(),
        rel: ratio_sqrt(num, s_min_sq * leader_spread(ns.n_leaders(), ns.n_nodes())),
        s_max,
        s_min: s_min_sq.sqrt(),
    })
}

/// `‖S − Ŝ‖ ≤ term₁ + term₂ + term₃` through the closest AEP-compatible
/// Laplacian `L_AEP`, with `ΔL = L − L_AEP`:
/// term₁ = `2‖ΔL(sI + L)⁻¹M‖`, term₂ the AEP result on `L_AEP`,
/// term₃ = `‖ΔLP(sI + L̂)⁻¹M̂‖`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangleBound {
    pub total: f64,
    pub terms: [f64; 3],
}

pub fn triangle_bound_general(ns: &NetworkSystem, pi: &Partition, kind: NormKind) -> Result<TriangleBound> {
    let reg = NormRegistry::default();
    triangle_bound_with(ns, pi, kind, reg.get_kind(NormRegistry::default_name(kind), kind)?)
}

pub fn triangle_bound_with(
    ns: &NetworkSystem,
    pi: &Partition,
    kind: NormKind,
    engine: &dyn NormEngine,
) -> Result<TriangleBound> {
    check_partition(ns, pi)?;
    if !ns.dynamics().is_single_integrator() {
        return Err(Error::NotSingleIntegrator);
    }
    if !ns.laplacian().is_connected() {
        return Err(Error::Disconnected);
    }
    if engine.kind() != kind {
        return Err(Error::UnknownName(format!("{} is not a {kind} engine", engine.name())));
    }
    let l = ns.laplacian().matrix();
    let projection = project_to_aep_laplacian(ns.laplacian(), pi);
    let delta = l - &projection.matrix;

    let first = StateSpace::new(-l, ns.m_matrix().clone(), delta.clone())?;
    let term1 = 2.0 * engine.evaluate(&first)?.value;

    let aep_network = ns.with_laplacian(projection.laplacian()?)?;
    let term2 = match kind {
        NormKind::H2 => h2_bound_aep(&aep_network, pi)?.abs,
        NormKind::Hinf => hinf_error_single_integrator(&aep_network, pi)?.error,
    };

    let reduced = reduce_graph(ns.laplacian(), pi, ns.leaders())?;
    let third = StateSpace::new(-&reduced.laplacian_hat, reduced.m_hat, &delta * pi.char_matrix())?;
    let term3 = engine.evaluate(&third)?.value;

    Ok(TriangleBound { total: term1 + term2 + term3, terms: [term1, term2, term3] })
}

/// Which parts of [`full_report_with`] to evaluate, and with which engines.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportOptions {
    pub h2: bool,
    pub hinf: bool,
    pub triangle: bool,
    pub h2_engine: String,
    pub hinf_engine: String,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            h2: true,
            hinf: true,
            triangle: true,
            h2_engine: NormRegistry::default_name(NormKind::H2).to_string(),
            hinf_engine: NormRegistry::default_name(NormKind::Hinf).to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub aep: bool,
    pub connected: bool,
    pub synchronized: bool,
    pub reduced_synchronized: bool,
    pub leaders_share_cell: bool,
    pub cellmate_terms: Vec<f64>,
    pub s_max_h2: Entry<f64>,
    pub s_min_h2: Entry<f64>,
    pub s_max_hinf: Entry<f64>,
    pub s_min_hinf: Entry<f64>,
    pub abs_h2_bound: Entry<f64>,
    pub rel_h2_bound: Entry<f64>,
    pub abs_hinf_bound: Entry<f64>,
    pub rel_hinf_bound: Entry<f64>,
    /// Exact `‖S − Ŝ‖_H∞` for single-integrator agents.
    pub exact_hinf_error: Entry<f64>,
    pub full_h2_norm: Entry<NormResult>,
    pub full_hinf_norm: Entry<NormResult>,
    pub true_h2_error: Entry<NormResult>,
    pub true_hinf_error: Entry<NormResult>,
    pub true_rel_h2_error: Entry<f64>,
    pub true_rel_hinf_error: Entry<f64>,
    pub triangle_h2: Entry<TriangleBound>,
    pub triangle_hinf: Entry<TriangleBound>,
}

/// Every bound and true error with default options and engines.
pub fn full_report(ns: &NetworkSystem, pi: &Partition) -> BoundReport {
    full_report_with(ns, pi, &ReportOptions::default(), &NormRegistry::default())
        .expect("default engines are registered")
}

/// Fails only when an engine name is unknown; every other problem is
/// recorded per field.
pub fn full_report_with(
    ns: &NetworkSystem,
    pi: &Partition,
    opts: &ReportOptions,
    registry: &NormRegistry,
) -> Result<BoundReport> {
    let h2_engine = registry.get_kind(&opts.h2_engine, NormKind::H2)?;
    let hinf_engine = registry.get_kind(&opts.hinf_engine, NormKind::Hinf)?;
    let compatible = check_partition(ns, pi);
    let aep = compatible.is_ok() && is_almost_equitable(ns.laplacian(), pi);
    fn skipped<T>(what: &str) -> Entry<T> {
        Entry::absent("not_requested", format!("{what} not requested"))
    }

    let error_sys = compatible.clone().and_then(|_| assemble_error_system(ns, pi));
    let full_sys = assemble_full(ns);

    let relative = |err: &Entry<NormResult>, full: &Entry<NormResult>| -> Entry<f64> {
        match (err, full) {
            (Entry::Present(e), Entry::Present(f)) => Entry::from(
                ratio_sqrt(e.value * e.value, f.value * f.value)
                    .ok_or_else(|| Error::Degenerate("full-system norm is zero".into())),
            ),
            (Entry::Absent(a), _) | (_, Entry::Absent(a)) => Entry::Absent(a.clone()),
        }
    };
    let split = |bound: &Entry<AepBound>| -> (Entry<f64>, Entry<f64>, Entry<f64>, Entry<f64>) {
        (
            bound.map(|b| b.s_max),
            bound.map(|b| b.s_min),
            bound.map(|b| b.abs),
            match bound {
                Entry::Present(b) => Entry::from(
                    b.rel.ok_or_else(|| Error::Degenerate("lower-bound constant is zero".into())),
                ),
                Entry::Absent(a) => Entry::Absent(a.clone()),
            },
        )
    };

    let (s_max_h2, s_min_h2, abs_h2_bound, rel_h2_bound, full_h2_norm, true_h2_error, triangle_h2);
    if opts.h2 {
        (s_max_h2, s_min_h2, abs_h2_bound, rel_h2_bound) = split(&Entry::from(h2_bound_aep(ns, pi)));
        full_h2_norm = Entry::from(h2_engine.evaluate(&full_sys));
        true_h2_error = Entry::from(error_sys.clone().and_then(|s| h2_engine.evaluate(&s)));
        triangle_h2 = if opts.triangle {
            Entry::from(triangle_bound_with(ns, pi, NormKind::H2, h2_engine))
        } else {
            skipped("triangle bound")
        };
    } else {
        (s_max_h2, s_min_h2, abs_h2_bound, rel_h2_bound) =
            (skipped("h2"), skipped("h2"), skipped("h2"), skipped("h2"));
        (full_h2_norm, true_h2_error, triangle_h2) = (skipped("h2"), skipped("h2"), skipped("h2"));
    }

    let (s_max_hinf, s_min_hinf, abs_hinf_bound, rel_hinf_bound, exact_hinf_error);
    let (full_hinf_norm, true_hinf_error, triangle_hinf);
    if opts.hinf {
        (s_max_hinf, s_min_hinf, abs_hinf_bound, rel_hinf_bound) = split(&Entry::from(hinf_bound_symmetric(ns, pi)));
        exact_hinf_error = Entry::from(hinf_error_single_integrator(ns, pi).map(|r| r.error));
        full_hinf_norm = Entry::from(hinf_engine.evaluate(&full_sys));
        true_hinf_error = Entry::from(error_sys.clone().and_then(|s| hinf_engine.evaluate(&s)));
        triangle_hinf = if opts.triangle {
            Entry::from(triangle_bound_with(ns, pi, NormKind::Hinf, hinf_engine))
        } else {
            skipped("triangle bound")
        };
    } else {
        (s_max_hinf, s_min_hinf, abs_hinf_bound, rel_hinf_bound, exact_hinf_error) =
            (skipped("hinf"), skipped("hinf"), skipped("hinf"), skipped("hinf"), skipped("hinf"));
        (full_hinf_norm, true_hinf_error, triangle_hinf) = (skipped("hinf"), skipped("hinf"), skipped("hinf"));
    }

    Ok(BoundReport {
        aep,
        connected: ns.laplacian().is_connected(),
        synchronized: is_synchronized(ns),
        reduced_synchronized: compatible.is_ok() && reduced_synchronization_preserved(ns, pi),
        leaders_share_cell: compatible.is_ok() && leaders_share_cell(ns, pi),
        cellmate_terms: if compatible.is_ok() { cellmate_terms(ns, pi) } else { vec![] },
        true_rel_h2_error: relative(&true_h2_error, &full_h2_norm),
        true_rel_hinf_error: relative(&true_hinf_error, &full_hinf_norm),
        s_max_h2,
        s_min_h2,
        s_max_hinf,
        s_min_hinf,
        abs_h2_bound,
        rel_h2_bound,
        abs_hinf_bound,
        rel_hinf_bound,
        exact_hinf_error,
        full_h2_norm,
        full_hinf_norm,
        true_h2_error,
        true_hinf_error,
        triangle_h2,
        triangle_hinf,
    })
}
