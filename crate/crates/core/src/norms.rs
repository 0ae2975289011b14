//! H2 and H-infinity norms.
//!
//! Exact routes: kernel-conditioned Lyapunov (H2), spectral sums over
//! auxiliary systems (H2), and the DC-gain closed form (H∞). Oracle routes:
//! log-grid quadrature of the H2 integral and an adaptive frequency sweep.
//! Oracles deflate marginal modes first (they must be unobservable) and work
//! on a Hessenberg form so each frequency costs `O(n²)`.

use std::collections::BTreeMap;

use nalgebra::linalg::Hessenberg;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{is_almost_equitable, symmetrized_reduced_laplacian, Partition, CONNECTIVITY_TOL};
use crate::linalg::{
    asymmetry, eigenvalues, kron, max_abs, null_basis_sym, pinv, solve_lyapunov, solve_lyapunov_with_kernel,
    spectral_norm, spectral_norm_c, sym_eig, to_complex, CMat, Mat, StateSpace, RANK_TOL,
};
use crate::netsys::{is_synchronized, reduced_synchronization_preserved, AgentDynamics, NetworkSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMethod {
    LyapunovKernel,
    SpectralFormula,
    DcGainClosedForm,
    FrequencySweep,
    FrequencyQuadrature,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormResult {
    pub value: f64,
    pub method: NormMethod,
    /// Method-specific diagnostics: residuals, grid sizes, peak location.
    pub certificate: BTreeMap<String, f64>,
}

impl NormResult {
    fn new(value: f64, method: NormMethod, certificate: impl IntoIterator<Item = (&'static str, f64)>) -> Self {
        Self {
            value,
            method,
            certificate: certificate.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        }
    }
}

/// `‖S‖_H2` from `tr(BᵀXB)` with `AᵀX + XA + CᵀC = 0`, `X₊(A) ⊆ ker X`.
pub fn h2_norm(sys: &StateSpace) -> Result<NormResult> {
    let sol = solve_lyapunov_with_kernel(&sys.a, &sys.b, &sys.c)?;
    let residual = max_abs(&(sys.a.transpose() * &sol.x + &sol.x * &sys.a + sys.c.transpose() * &sys.c));
    Ok(NormResult::new(
        sol.h2sq.max(0.0).sqrt(),
        NormMethod::LyapunovKernel,
        [
            ("lyapunov_residual", residual),
            ("kernel_residual", sol.kernel_residual),
            ("stable_dim", sol.stable_dim as f64),
        ],
    ))
}

/// `‖S_λ‖²_H2 = tr(EᵀXE)` with `(A − λB)ᵀX + X(A − λB) + λ²I = 0`.
pub fn aux_h2_sq(dynamics: &AgentDynamics, lambda: f64) -> Result<f64> {
    let n = dynamics.n();
    let x = solve_lyapunov(&dynamics.coupled(lambda), &(Mat::identity(n, n) * (lambda * lambda)))?;
    Ok((dynamics.e.transpose() * x * &dynamics.e).trace().max(0.0))
}

/// `Σ_i (WWᵀ)_ii ‖S_λi‖²` over nonzero eigenpairs `(λ_i, u_i)` of a symmetric
/// coupling matrix, with `W` the projected input map.
fn spectral_sum(dynamics: &AgentDynamics, coupling: &Mat, input: &Mat) -> Result<(f64, usize)> {
    let eig = sym_eig(coupling)?;
    let w = eig.eigenvectors.transpose() * input;
    let mut total = 0.0;
    let mut terms = 0;
    for i in 0..eig.dim() {
        let lambda = eig.eigenvalues[i];
        if lambda <= CONNECTIVITY_TOL {
            continue;
        }
        let weight = w.row(i).norm_squared();
        total += weight * aux_h2_sq(dynamics, lambda)?;
        terms += 1;
    }
    Ok((total, terms))
}

/// `‖S‖²_H2 = Σ_i (UᵀMMᵀU)_ii ‖S_λi‖²_H2` over nonzero `λ_i ∈ σ(L)`.
pub fn h2_norm_network_spectral(ns: &NetworkSystem) -> Result<NormResult> {
    if !ns.laplacian().is_connected() {
        return Err(Error::Disconnected);
    }
    if !is_synchronized(ns) {
        return Err(Error::NotSynchronized);
    }
    let (sq, terms) = spectral_sum(ns.dynamics(), ns.laplacian().matrix(), ns.m_matrix())?;
    Ok(NormResult::new(sq.sqrt(), NormMethod::SpectralFormula, [("terms", terms as f64)]))
}

/// Reduced analogue: eigenpairs of `L̄` and `W = Ûᵀ(PᵀP)^{-1/2}PᵀM`.
pub fn h2_norm_reduced_spectral(ns: &NetworkSystem, pi: &Partition) -> Result<NormResult> {
    if pi.n_nodes() != ns.n_nodes() {
        return Err(Error::Dimension("partition does not match network".into()));
    }
    if !ns.laplacian().is_connected() {
        return Err(Error::Disconnected);
    }
    if !is_almost_equitable(ns.laplacian(), pi) {
        return Err(Error::NotAep);
    }
    if !reduced_synchronization_preserved(ns, pi) {
        return Err(Error::NotSynchronized);
    }
    let lbar = symmetrized_reduced_laplacian(ns.laplacian(), pi);
    let input = pi.gram_pow(-0.5) * pi.char_matrix().transpose() * ns.m_matrix();
    let (sq, terms) = spectral_sum(ns.dynamics(), &lbar, &input)?;
    Ok(NormResult::new(sq.sqrt(), NormMethod::SpectralFormula, [("terms", terms as f64)]))
}

/// `CA = XC` witnesses for the network systems built here: `I⊗A − L⊗B`
/// (which is `−L` for single integrators).
pub fn network_witness(ns: &NetworkSystem) -> Mat {
    let d = ns.dynamics();
    let l = ns.laplacian().matrix();
    kron(&Mat::identity(l.nrows(), l.nrows()), &d.a) - kron(l, &d.b)
}

/// `‖S‖_H∞ = ‖S(0)‖₂ = σ_max(−CA⁺B)` for symmetric `A` when a symmetric `X`
/// with `CA = XC` exists and `ker A ⊆ ker C`.
pub fn hinf_norm_dc(sys: &StateSpace, witness: &Mat) -> Result<NormResult> {
    let n = sys.states();
    if witness.nrows() != sys.outputs() || witness.ncols() != sys.outputs() {
        return Err(Error::Dimension(format!("witness must be {0}x{0}", sys.outputs())));
    }
    let x_asym = asymmetry(witness).unwrap_or(f64::INFINITY);
    if x_asym > 1e-9 * (1.0 + max_abs(witness)) {
        return Err(Error::WitnessInvalid { residual: x_asym });
    }
    let a_asym = asymmetry(&sys.a).unwrap_or(f64::INFINITY);
    if a_asym > 1e-9 * (1.0 + max_abs(&sys.a)) {
        return Err(Error::NotSymmetric { asymmetry: a_asym });
    }
    let ca = &sys.c * &sys.a;
    let witness_residual = max_abs(&(&ca - witness * &sys.c));
    if witness_residual > 1e-9 * (1.0 + max_abs(&ca) + max_abs(witness) * max_abs(&sys.c)) {
        return Err(Error::WitnessInvalid { residual: witness_residual });
    }
    let a = (&sys.a + sys.a.transpose()) * 0.5;
    let kernel = null_basis_sym(&a, RANK_TOL)?;
    let kernel_residual = if kernel.ncols() == 0 { 0.0 } else { max_abs(&(&sys.c * &kernel)) };
    if kernel_residual > 1e-8 * (1.0 + max_abs(&sys.c)) {
        return Err(Error::KernelViolated { residual: kernel_residual });
    }
    let dc = -(&sys.c * pinv(&a, RANK_TOL)? * &sys.b);
    Ok(NormResult::new(
        spectral_norm(&dc),
        NormMethod::DcGainClosedForm,
        [
            ("witness_residual", witness_residual),
            ("kernel_residual", kernel_residual),
            ("kernel_dim", kernel.ncols() as f64),
            ("states", n as f64),
        ],
    ))
}

/// Frequency response of the stable part of a system, in Hessenberg
/// coordinates `A = Q H Qᵀ`.
#[derive(Debug, Clone)]
pub struct FrequencyResponse {
    h: Mat,
    b: Mat,
    c: Mat,
    poles: Vec<Complex64>,
}

impl FrequencyResponse {
    /// Fails with `UnstablePoles` when a marginal or unstable mode is observable.
    pub fn new(sys: &StateSpace) -> Result<Self> {
        let stable = sys.stable_part().map_err(|e| match e {
            Error::KernelConditionViolated { residual } => Error::UnstablePoles { residual },
            other => other,
        })?;
        let poles = if stable.states() == 0 { vec![] } else { eigenvalues(&stable.a)? };
        if stable.states() == 0 {
            return Ok(Self { h: stable.a, b: stable.b, c: stable.c, poles });
        }
        let (q, h) = Hessenberg::new(stable.a).unpack();
        Ok(Self { b: q.transpose() * stable.b, c: stable.c * q, h, poles })
    }

    pub fn states(&self) -> usize {
        self.h.nrows()
    }

    pub fn poles(&self) -> &[Complex64] {
        &self.poles
    }

    pub fn is_zero(&self) -> bool {
        self.states() == 0 || self.b.ncols() == 0 || self.c.nrows() == 0
    }

    /// `G(iω)`.
    pub fn eval(&self, omega: f64) -> Result<CMat> {
        if self.is_zero() {
            return Ok(CMat::zeros(self.c.nrows(), self.b.ncols()));
        }
        let x = hessenberg_solve(&self.h, Complex64::new(0.0, omega), &self.b)?;
        Ok(to_complex(&self.c) * x)
    }

    /// `σ_max(G(iω))`.
    pub fn gain(&self, omega: f64) -> Result<f64> {
        Ok(spectral_norm_c(&self.eval(omega)?))
    }

    /// `‖G(iω)‖_F²`.
    pub fn frobenius_sq(&self, omega: f64) -> Result<f64> {
        Ok(self.eval(omega)?.iter().map(|z| z.norm_sqr()).sum())
    }
}

/// Solves `(sI − H) X = R` for upper Hessenberg `H` by Gaussian elimination
/// with adjacent-row pivoting.
fn hessenberg_solve(h: &Mat, s: Complex64, rhs: &Mat) -> Result<CMat> {
    let n = h.nrows();
    let mut m = CMat::from_fn(n, n, |i, j| {
        if i > j + 1 {
            Complex64::new(0.0, 0.0)
        } else if i == j {
            s - h[(i, j)]
        } else {
            Complex64::new(-h[(i, j)], 0.0)
        }
    });
    let mut x = to_complex(rhs);
    for k in 0..n.saturating_sub(1) {
        if m[(k + 1, k)].norm() > m[(k, k)].norm() {
            m.swap_rows(k, k + 1);
            x.swap_rows(k, k + 1);
        }
        let pivot = m[(k, k)];
        if pivot.norm() == 0.0 {
            continue;
        }
        let factor = m[(k + 1, k)] / pivot;
        if factor.norm() == 0.0 {
            continue;
        }
        for j in k..n {
            let v = m[(k, j)];
            m[(k + 1, j)] -= factor * v;
        }
        for c in 0..x.ncols() {
            let v = x[(k, c)];
            x[(k + 1, c)] -= factor * v;
        }
    }
    for k in (0..n).rev() {
        let pivot = m[(k, k)];
        if pivot.norm() == 0.0 {
            return Err(Error::Singular);
        }
        for c in 0..x.ncols() {
            let mut acc = x[(k, c)];
            for j in (k + 1)..n {
                acc -= m[(k, j)] * x[(j, c)];
            }
            x[(k, c)] = acc / pivot;
        }
    }
    Ok(x)
}

/// Grid parameters of the H∞ sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub omega_min: f64,
    pub omega_max: f64,
    pub coarse_per_decade: usize,
    pub fine_per_decade: usize,
    /// Half-width, in decades, of the fine grid around each peak.
    pub fine_half_width: f64,
    pub max_peaks: usize,
    /// Golden-section stopping width relative to the peak frequency.
    pub golden_rel_tol: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            omega_min: 1e-6,
            omega_max: 1e6,
            coarse_per_decade: 40,
            fine_per_decade: 400,
            fine_half_width: 0.5,
            max_peaks: 5,
            golden_rel_tol: 1e-6,
        }
    }
}

fn log_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let decades = (hi / lo).log10();
    let count = ((decades * per_decade as f64).ceil() as usize).max(1);
    (0..=count).map(|i| lo * 10f64.powf(decades * i as f64 / count as f64)).collect()
}

/// `sup_ω σ_max(G(iω))` by coarse log sweep, fine sweeps around the largest
/// local maxima, and golden-section refinement.
pub fn hinf_norm_sweep(sys: &StateSpace) -> Result<NormResult> {
    hinf_norm_sweep_with(sys, &SweepConfig::default())
}

pub fn hinf_norm_sweep_with(sys: &StateSpace, cfg: &SweepConfig) -> Result<NormResult> {
    let fr = FrequencyResponse::new(sys)?;
    if fr.is_zero() {
        return Ok(NormResult::new(0.0, NormMethod::FrequencySweep, [("evaluations", 0.0)]));
    }
    let mut evaluations = 0usize;
    let mut eval = |w: f64| -> Result<f64> {
        evaluations += 1;
        fr.gain(w)
    };

    let mut grid = vec![0.0];
    grid.extend(log_grid(cfg.omega_min, cfg.omega_max, cfg.coarse_per_decade));
    grid.extend(fr.poles().iter().flat_map(|p| [p.im.abs(), p.norm()]).filter(|w| *w > 0.0));
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let gains = grid.iter().map(|&w| eval(w)).collect::<Result<Vec<f64>>>()?;

    let (mut best_w, mut best) = (grid[0], gains[0]);
    for (&w, &g) in grid.iter().zip(&gains) {
        if g > best {
            best = g;
            best_w = w;
        }
    }

    let mut peaks: Vec<usize> = (1..grid.len())
        .filter(|&i| gains[i] >= gains[i - 1] && (i + 1 == grid.len() || gains[i] >= gains[i + 1]))
        .collect();
    peaks.sort_by(|&a, &b| gains[b].total_cmp(&gains[a]));
    peaks.truncate(cfg.max_peaks);
    let refined = peaks.len();

    let half = 10f64.powf(cfg.fine_half_width);
    for &i in &peaks {
        let centre = grid[i];
        let fine = log_grid(centre / half, centre * half, cfg.fine_per_decade);
        let fine_gains = fine.iter().map(|&w| eval(w)).collect::<Result<Vec<f64>>>()?;
        let j = (0..fine.len()).max_by(|&a, &b| fine_gains[a].total_cmp(&fine_gains[b])).unwrap_or(0);
        if fine_gains[j] > best {
            best = fine_gains[j];
            best_w = fine[j];
        }
        let (mut a, mut b) = (fine[j.saturating_sub(1)], fine[(j + 1).min(fine.len() - 1)]);
        let ratio = (5f64.sqrt() - 1.0) / 2.0;
        let mut x1 = b - ratio * (b - a);
        let mut x2 = a + ratio * (b - a);
        let (mut f1, mut f2) = (eval(x1)?, eval(x2)?);
        while b - a > cfg.golden_rel_tol * fine[j] {
            if f1 >= f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - ratio * (b - a);
                f1 = eval(x1)?;
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + ratio * (b - a);
                f2 = eval(x2)?;
            }
        }
        for (w, g) in [(x1, f1), (x2, f2)] {
            if g > best {
                best = g;
                best_w = w;
            }
        }
    }

    Ok(NormResult::new(
        best,
        NormMethod::FrequencySweep,
        [
            ("peak_frequency", best_w),
            ("evaluations", evaluations as f64),
            ("coarse_points", grid.len() as f64),
            ("coarse_per_decade", cfg.coarse_per_decade as f64),
            ("fine_per_decade", cfg.fine_per_decade as f64),
            ("refined_peaks", refined as f64),
            ("omega_min", cfg.omega_min),
            ("omega_max", cfg.omega_max),
            ("stable_dim", fr.states() as f64),
        ],
    ))
}

/// Quadrature points per decade of the fine trapezoid rule.
pub const QUADRATURE_PER_DECADE: usize = 100;

/// `‖S‖²_H2 = (1/π) ∫₀^∞ ‖G(iω)‖_F² dω` on a log grid spanning four decades
/// beyond the pole magnitudes, with first-order tail corrections and one
/// Richardson step between spacings `h` and `h/2`.
pub fn h2_norm_quadrature(sys: &StateSpace) -> Result<NormResult> {
    let fr = FrequencyResponse::new(sys)?;
    if fr.is_zero() {
        return Ok(NormResult::new(0.0, NormMethod::FrequencyQuadrature, [("points", 0.0)]));
    }
    let mags: Vec<f64> = fr.poles().iter().map(|p| p.norm()).collect();
    let lo = 1e-4 * mags.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = 1e4 * mags.iter().copied().fold(0.0, f64::max);
    let (t_lo, t_hi) = (lo.ln(), hi.ln());
    let half_steps = ((hi / lo).log10() * QUADRATURE_PER_DECADE as f64 / 2.0).ceil() as usize;
    let fine_steps = 2 * half_steps;
    let h = (t_hi - t_lo) / fine_steps as f64;
    let values = (0..=fine_steps)
        .map(|i| {
            let w = (t_lo + h * i as f64).exp();
            Ok(fr.frobenius_sq(w)? * w)
        })
        .collect::<Result<Vec<f64>>>()?;
    let trap = |stride: usize| -> f64 {
        let pts: Vec<f64> = values.iter().step_by(stride).copied().collect();
        let inner: f64 = pts[1..pts.len() - 1].iter().sum();
        (inner + 0.5 * (pts[0] + pts[pts.len() - 1])) * h * stride as f64
    };
    let (coarse, fine) = (trap(2), trap(1));
    let integral = (4.0 * fine - coarse) / 3.0 + values[0] + values[fine_steps];
    let sq = (integral / std::f64::consts::PI).max(0.0);
    Ok(NormResult::new(
        sq.sqrt(),
        NormMethod::FrequencyQuadrature,
        [
            ("points", values.len() as f64),
            ("points_per_decade", QUADRATURE_PER_DECADE as f64),
            ("omega_lo", lo),
            ("omega_hi", hi),
            ("richardson_delta", (fine - coarse).abs() / std::f64::consts::PI),
        ],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Laplacian, WeightedGraph};
    use crate::netsys::{assemble_error_system, assemble_full, assemble_reduced};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn scalar(a: f64, b: f64, c: f64) -> StateSpace {
        StateSpace::new(Mat::from_element(1, 1, a), Mat::from_element(1, 1, b), Mat::from_element(1, 1, c)).unwrap()
    }

    fn random_mat(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Mat {
        Mat::from_fn(r, c, |_, _| rng.gen_range(-1.0..1.0))
    }

    fn random_network(seed: u64, n: usize) -> NetworkSystem {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nodes = 5;
        let edges: Vec<_> = (0..nodes)
            .flat_map(|i| ((i + 1)..nodes).map(move |j| (i, j)))
            .filter(|&(i, j)| j == i + 1 || (i * 7 + j * 3 + seed as usize).is_multiple_of(3))
            .map(|(i, j)| (i, j, 0.5 + (i + 2 * j) as f64 / 10.0))
            .collect();
        let l = Laplacian::from_graph(&WeightedGraph::new(nodes, edges).unwrap()).unwrap();
        let g = random_mat(&mut rng, n, n);
        let h = random_mat(&mut rng, n, n);
        let a = -(&g * g.transpose()) - Mat::identity(n, n) * 0.2 + random_mat(&mut rng, n, n) * 0.2;
        let b = &h * h.transpose() + Mat::identity(n, n) * 0.3;
        let d = AgentDynamics::new(a, b, random_mat(&mut rng, n, 2)).unwrap();
        NetworkSystem::new(l, vec![0, 3], d).unwrap()
    }

    #[test]
    fn first_order_lag() {
        let sys = scalar(-1.0, 1.0, 1.0);
        assert!((h2_norm(&sys).unwrap().value - 0.5f64.sqrt()).abs() < 1e-14);
        let sweep = hinf_norm_sweep(&sys).unwrap();
        assert!((sweep.value - 1.0).abs() < 1e-12);
        assert_eq!(sweep.certificate["peak_frequency"], 0.0);
    }

    #[test]
    fn aux_norms_single_integrator() {
        for lambda in [0.3, 1.0, 2.0, 7.5] {
            let sq = aux_h2_sq(&AgentDynamics::single_integrator(), lambda).unwrap();
            assert!((sq - lambda / 2.0).abs() < 1e-12);
            let lag = scalar(-lambda, 1.0, lambda);
            let q = h2_norm_quadrature(&lag).unwrap().value;
            assert!((q * q - lambda / 2.0).abs() < 1e-6 * lambda);
            assert!((hinf_norm_sweep(&lag).unwrap().value - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn k2_full_network_h2() {
        let l = Laplacian::from_graph(&WeightedGraph::complete(2, 1.0)).unwrap();
        let ns = NetworkSystem::new(l, vec![0], AgentDynamics::single_integrator()).unwrap();
        let lyap = h2_norm(&assemble_full(&ns)).unwrap().value;
        assert!((lyap * lyap - 0.5).abs() < 1e-12);
        let spectral = h2_norm_network_spectral(&ns).unwrap().value;
        assert!((spectral * spectral - 0.5).abs() < 1e-12);
        let quad = h2_norm_quadrature(&assemble_full(&ns)).unwrap().value;
        assert!((quad - lyap).abs() <= 1e-4 * lyap);
    }

    #[test]
    fn leaderless_spectral_is_zero() {
        let l = Laplacian::from_graph(&WeightedGraph::path(4, 1.0)).unwrap();
        let ns = NetworkSystem::new(l, vec![], AgentDynamics::single_integrator()).unwrap();
        assert_eq!(h2_norm_network_spectral(&ns).unwrap().value, 0.0);
        assert_eq!(h2_norm(&assemble_full(&ns)).unwrap().value, 0.0);
    }

    #[test]
    fn spectral_matches_lyapunov_on_random_networks() {
        for seed in 0..6 {
            let ns = random_network(seed, 2);
            if !is_synchronized(&ns) {
                continue;
            }
            let lyap = h2_norm(&assemble_full(&ns)).unwrap().value;
            let spectral = h2_norm_network_spectral(&ns).unwrap().value;
            assert!((lyap - spectral).abs() <= 1e-8 * lyap, "seed {seed}: {lyap} vs {spectral}");
            let quad = h2_norm_quadrature(&assemble_full(&ns)).unwrap().value;
            assert!((lyap - quad).abs() <= 1e-4 * lyap, "seed {seed}: {lyap} vs {quad}");
        }
    }

    #[test]
    fn reduced_spectral_matches_lyapunov() {
        let l = Laplacian::from_graph(&WeightedGraph::complete(3, 1.0)).unwrap();
        let pi = Partition::new(3, vec![vec![0], vec![1, 2]]).unwrap();
        let ns = NetworkSystem::new(l, vec![1], AgentDynamics::single_integrator()).unwrap();
        let lyap = h2_norm(&assemble_reduced(&ns, &pi).unwrap()).unwrap().value;
        let spectral = h2_norm_reduced_spectral(&ns, &pi).unwrap().value;
        assert!((lyap - spectral).abs() <= 1e-8 * lyap);
        let singletons = Partition::singletons(3);
        let full = h2_norm_network_spectral(&ns).unwrap().value;
        assert!((h2_norm_reduced_spectral(&ns, &singletons).unwrap().value - full).abs() < 1e-12);
        let path = Laplacian::from_graph(&WeightedGraph::path(5, 1.0)).unwrap();
        let ns = NetworkSystem::new(path, vec![0], AgentDynamics::single_integrator()).unwrap();
        let pi = Partition::new(5, vec![vec![0, 1, 2], vec![3, 4]]).unwrap();
        assert!(matches!(h2_norm_reduced_spectral(&ns, &pi), Err(Error::NotAep)));
    }

    #[test]
    fn kernel_violation_surfaces() {
        let sys = scalar(0.0, 1.0, 1.0);
        assert!(matches!(h2_norm(&sys), Err(Error::KernelConditionViolated { .. })));
        assert!(matches!(hinf_norm_sweep(&sys), Err(Error::UnstablePoles { .. })));
    }

    #[test]
    fn resonant_peak() {
        // ω_n² / (s² + 2ζω_n s + ω_n²) peaks at ω_n√(1−2ζ²) with 1/(2ζ√(1−ζ²))
        let (wn, zeta): (f64, f64) = (3.0, 0.1);
        let a = Mat::from_row_slice(2, 2, &[0.0, 1.0, -wn * wn, -2.0 * zeta * wn]);
        let b = Mat::from_column_slice(2, 1, &[0.0, wn * wn]);
        let c = Mat::from_row_slice(1, 2, &[1.0, 0.0]);
        let sys = StateSpace::new(a, b, c).unwrap();
        let res = hinf_norm_sweep(&sys).unwrap();
        let peak = 1.0 / (2.0 * zeta * (1.0 - zeta * zeta).sqrt());
        assert!((res.value - peak).abs() <= 1e-5 * peak);
        assert!((res.certificate["peak_frequency"] - wn * (1.0 - 2.0 * zeta * zeta).sqrt()).abs() < 1e-3);
    }

    #[test]
    fn hessenberg_response_matches_dense_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 7;
        let a = random_mat(&mut rng, n, n) - Mat::identity(n, n) * 4.0;
        let sys = StateSpace::new(a, random_mat(&mut rng, n, 2), random_mat(&mut rng, 3, n)).unwrap();
        let fr = FrequencyResponse::new(&sys).unwrap();
        for w in [0.0, 0.01, 1.0, 13.0] {
            let dense = sys.transfer_at(Complex64::new(0.0, w)).unwrap();
            let hess = fr.eval(w).unwrap();
            assert!(crate::linalg::max_abs_c(&(dense - hess)) < 1e-12);
        }
    }

    #[test]
    fn dc_closed_form_single_integrator() {
        let l = Laplacian::from_graph(&WeightedGraph::path(5, 1.0)).unwrap();
        let ns = NetworkSystem::new(l.clone(), vec![0, 3], AgentDynamics::single_integrator()).unwrap();
        let full = assemble_full(&ns);
        let dc = hinf_norm_dc(&full, &network_witness(&ns)).unwrap();
        assert!((dc.value - 1.0).abs() < 1e-12);
        assert!((hinf_norm_sweep(&full).unwrap().value - 1.0).abs() < 1e-6);

        let pi = Partition::new(5, vec![vec![0, 4], vec![1, 3], vec![2]]).unwrap();
        assert!(is_almost_equitable(&l, &pi));
        let ns = NetworkSystem::new(l, vec![0], AgentDynamics::single_integrator()).unwrap();
        let err = assemble_error_system(&ns, &pi).unwrap();
        let witness = network_witness(&ns);
        let dc = hinf_norm_dc(&err, &witness).unwrap();
        assert!((dc.value * dc.value - 0.5).abs() < 1e-9);
        assert!((hinf_norm_sweep(&err).unwrap().value - dc.value).abs() < 1e-6 * dc.value);
    }

    #[test]
    fn dc_closed_form_diagonal() {
        let a = Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, -3.0, -0.5]));
        let b = Mat::from_row_slice(3, 2, &[1.0, 0.2, -0.4, 1.0, 0.3, 0.3]);
        let sys = StateSpace::new(a.clone(), b, Mat::identity(3, 3)).unwrap();
        let dc = hinf_norm_dc(&sys, &a).unwrap().value;
        let sweep = hinf_norm_sweep(&sys).unwrap().value;
        assert!((dc - sweep).abs() <= 1e-6 * sweep);
    }

    #[test]
    fn dc_rejects_bad_witness_and_kernel() {
        let a = Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, -3.0]));
        let sys = StateSpace::new(a, Mat::identity(2, 2), Mat::identity(2, 2)).unwrap();
        assert!(matches!(hinf_norm_dc(&sys, &Mat::identity(2, 2)), Err(Error::WitnessInvalid { .. })));
        let sys = StateSpace::new(Mat::zeros(1, 1), Mat::identity(1, 1), Mat::identity(1, 1)).unwrap();
        assert!(matches!(hinf_norm_dc(&sys, &Mat::zeros(1, 1)), Err(Error::KernelViolated { .. })));
    }

    #[test]
    fn adding_a_leader_never_decreases_h2() {
        let ns = random_network(3, 2);
        let base = h2_norm(&assemble_full(&ns)).unwrap().value;
        let more = NetworkSystem::new(ns.laplacian().clone(), vec![0, 3, 4], ns.dynamics().clone()).unwrap();
        assert!(h2_norm(&assemble_full(&more)).unwrap().value >= base);
    }
}
