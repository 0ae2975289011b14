//! Lyapunov equations `AᵀX + XA + Q = 0`, including the kernel-conditioned
//! variant for matrices with marginal or unstable modes that are invisible at
//! the output.

use num_complex::Complex64;

use super::{complex_schur, ensure_square, max_abs, max_real_part, range_basis, to_complex, CMat, Mat, HURWITZ_MARGIN};
use crate::error::{Error, Result};

/// Solve `AᵀX + XA + Q = 0` for Hurwitz `A`.
///
/// Uses a complex Schur form `A = U T U*` and column-wise substitution on
/// `T* Y + Y T + U*QU = 0` (Bartels-Stewart with a triangular factor).
pub fn solve_lyapunov(a: &Mat, q: &Mat) -> Result<Mat> {
    let n = ensure_square(a)?;
    if q.nrows() != n || q.ncols() != n {
        return Err(Error::Dimension(format!("Q is {}x{}, A is {n}x{n}", q.nrows(), q.ncols())));
    }
    if n == 0 {
        return Ok(Mat::zeros(0, 0));
    }
    let max_re = max_real_part(a)?;
    if max_re >= -HURWITZ_MARGIN {
        return Err(Error::NotHurwitz { max_real_part: max_re });
    }
    solve_hurwitz_unchecked(a, q)
}

fn solve_hurwitz_unchecked(a: &Mat, q: &Mat) -> Result<Mat> {
    let n = a.nrows();
    let (u, t) = complex_schur(&to_complex(a))?;
    let q_t: CMat = u.adjoint() * to_complex(q) * &u;

    let mut y = CMat::zeros(n, n);
    let mut rhs = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        for i in 0..n {
            let mut acc = -q_t[(i, j)];
            for k in 0..j {
                acc -= y[(i, k)] * t[(k, j)];
            }
            rhs[i] = acc;
        }
        // (T* + t_jj I) y_j = rhs, T* lower triangular
        let tjj = t[(j, j)];
        for i in 0..n {
            let mut acc = rhs[i];
            for l in 0..i {
                acc -= t[(l, i)].conj() * y[(l, j)];
            }
            let denom = t[(i, i)].conj() + tjj;
            if denom.norm() == 0.0 {
                return Err(Error::Singular);
            }
            y[(i, j)] = acc / denom;
        }
    }
    let x = &u * y * u.adjoint();
    let xr = x.map(|z| z.re);
    Ok((&xr + xr.transpose()) * 0.5)
}

/// Complementary invariant subspaces of a square matrix: the stable part
/// (eigenvalues with `Re λ < -margin`) and the generalized unstable part.
#[derive(Debug, Clone)]
pub struct SpectralSplit {
    /// Orthonormal basis of the stable invariant subspace.
    pub stable: Mat,
    /// Orthonormal basis of `X₊(A)`.
    pub unstable: Mat,
}

/// Split `A` into stable and closed-right-half-plane invariant subspaces.
///
/// The spectral projector onto `X₊(A)` is `(I + sign(A + σI)) / 2`, with the
/// shift `σ` placed in the middle of the real-part gap between the two groups
/// and the sign function computed by scaled Newton iteration.
pub fn spectral_split(a: &Mat, margin: f64) -> Result<SpectralSplit> {
    let n = ensure_square(a)?;
    let eigs = super::eigenvalues(a)?;
    let (unstable, stable): (Vec<Complex64>, Vec<Complex64>) = eigs.iter().partition(|z| z.re >= -margin);
    if unstable.is_empty() {
        return Ok(SpectralSplit { stable: Mat::identity(n, n), unstable: Mat::zeros(n, 0) });
    }
    if stable.is_empty() {
        return Ok(SpectralSplit { stable: Mat::zeros(n, 0), unstable: Mat::identity(n, n) });
    }
    let stable_edge = stable.iter().fold(f64::NEG_INFINITY, |acc, z| acc.max(z.re));
    let unstable_edge = unstable.iter().fold(f64::INFINITY, |acc, z| acc.min(z.re));
    let shift = -(stable_edge + unstable_edge) / 2.0;
    let shifted = a + Mat::identity(n, n) * shift;
    let sign = matrix_sign(&shifted)?;
    let proj_unstable = (Mat::identity(n, n) + &sign) * 0.5;
    let proj_stable = (Mat::identity(n, n) - &sign) * 0.5;
    Ok(SpectralSplit {
        stable: range_basis(&proj_stable, stable.len()),
        unstable: range_basis(&proj_unstable, unstable.len()),
    })
}

fn matrix_sign(z0: &Mat) -> Result<Mat> {
    let n = z0.nrows();
    let mut z = z0.clone();
    let mut scaling = true;
    for _ in 0..200 {
        let lu = z.clone().lu();
        let log_det: f64 = lu.u().diagonal().iter().map(|d| d.abs().ln()).sum();
        let inv = lu.try_inverse().ok_or(Error::Singular)?;
        let c = if scaling { (-log_det / n as f64).exp() } else { 1.0 };
        let next = (&z * c + inv / c) * 0.5;
        let delta = max_abs(&(&next - &z));
        let size = max_abs(&next);
        z = next;
        if delta <= 1e-2 * size {
            scaling = false;
        }
        if delta <= 1e-14 * size {
            return Ok(z);
        }
    }
    Err(Error::NoConvergence("matrix sign iteration".into()))
}

/// Solution of the kernel-conditioned Lyapunov problem.
#[derive(Debug, Clone)]
pub struct KernelLyapunov {
    /// The unique PSD solution of `AᵀX + XA + CᵀC = 0` with `X₊(A) ⊆ ker X`.
    pub x: Mat,
    /// `tr(Bᵀ X B)`, the squared H2 norm of `(A, B, C)`.
    pub h2sq: f64,
    /// `‖C V₊‖_max` for the computed basis `V₊` of `X₊(A)`.
    pub kernel_residual: f64,
    /// Dimension of the stable block that was actually solved.
    pub stable_dim: usize,
}

/// Lyapunov solve for `(A, B, C)` when `X₊(A) ⊆ ker C`.
///
/// The state space is split into `X₋ ⊕ X₊`; only the stable block carries a
/// nonzero Gramian, which is then embedded back with zero blocks.
pub fn solve_lyapunov_with_kernel(a: &Mat, b: &Mat, c: &Mat) -> Result<KernelLyapunov> {
    let n = ensure_square(a)?;
    if b.nrows() != n || c.ncols() != n {
        return Err(Error::Dimension(format!(
            "A is {n}x{n}, B has {} rows, C has {} columns",
            b.nrows(),
            c.ncols()
        )));
    }
    let split = spectral_split(a, HURWITZ_MARGIN)?;
    let kernel_residual = max_abs(&(c * &split.unstable));
    if kernel_residual > 1e-8 * (1.0 + max_abs(c)) {
        return Err(Error::KernelConditionViolated { residual: kernel_residual });
    }
    let s = split.stable.ncols();
    if s == 0 {
        return Ok(KernelLyapunov { x: Mat::zeros(n, n), h2sq: 0.0, kernel_residual, stable_dim: 0 });
    }
    if s == n {
        let x = solve_hurwitz_unchecked(a, &(c.transpose() * c))?;
        let h2sq = gramian_factor_product(a, b, c)?.norm_squared();
        return Ok(KernelLyapunov { x, h2sq, kernel_residual, stable_dim: n });
    }
    let reduced = stable_block(a, b, c, &split)?;
    let x_minus = solve_hurwitz_unchecked(&reduced.a, &(reduced.c.transpose() * &reduced.c))?;
    let h2sq = gramian_factor_product(&reduced.a, &reduced.b, &reduced.c)?.norm_squared();

    // X = T⁻ᵀ diag(X₋, 0) T⁻¹ with T = [V₋ V₊]
    let t_inv = reduced.t_inv;
    let rows_minus = t_inv.rows(0, s).into_owned();
    let x = rows_minus.transpose() * x_minus * rows_minus;
    let x = (&x + x.transpose()) * 0.5;
    Ok(KernelLyapunov { x, h2sq: h2sq.max(0.0), kernel_residual, stable_dim: s })
}

/// `W = Uᴴ G` with `‖W‖²_F = tr(BᵀXB)` for `AᵀX + XA + CᵀC = 0`, `A` Hurwitz.
///
/// `U` is the triangular square-root factor of the Gramian in Schur
/// coordinates, built column by column (Hammarling's method) without ever
/// forming `X`. Cancellation between modes then happens in the linear product
/// `Uᴴ G`, so systems whose transfer function vanishes come out at rounding
/// level instead of at its square root.
pub(crate) fn gramian_factor_product(a: &Mat, b: &Mat, c: &Mat) -> Result<CMat> {
    let n = a.nrows();
    if n == 0 {
        return Ok(CMat::zeros(0, b.ncols()));
    }
    let (q, t) = complex_schur(&to_complex(a))?;
    let cq = to_complex(c) * &q;
    let p = cq.nrows();
    let rev = |i: usize| n - 1 - i;

    // Reversed, conjugate-transposed form: Tr Y + Y Trᴴ + F Fᴴ = 0, Tr upper triangular.
    let tr = CMat::from_fn(n, n, |i, j| t[(rev(j), rev(i))].conj());
    let mut f = CMat::from_fn(n, p, |i, k| cq[(k, rev(i))].conj());
    let mut u = CMat::zeros(n, n);
    for k in (0..n).rev() {
        let alpha = tr[(k, k)];
        if alpha.re >= 0.0 {
            return Err(Error::NotHurwitz { max_real_part: alpha.re });
        }
        let b_row: Vec<Complex64> = (0..p).map(|l| f[(k, l)]).collect();
        let b_norm = b_row.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let nu = b_norm / (-2.0 * alpha.re).sqrt();
        u[(k, k)] = Complex64::new(nu, 0.0);
        if nu == 0.0 || k == 0 {
            continue;
        }
        // (T₁ + ᾱI) u = −(a ν + F₁ b̄ / ν), back substitution on the leading block
        let mut col = vec![Complex64::new(0.0, 0.0); k];
        for i in (0..k).rev() {
            let mut acc = -tr[(i, k)] * nu;
            for l in 0..p {
                acc -= f[(i, l)] * b_row[l].conj() / nu;
            }
            for j in (i + 1)..k {
                acc -= tr[(i, j)] * col[j];
            }
            col[i] = acc / (tr[(i, i)] + alpha.conj());
        }
        for i in 0..k {
            u[(i, k)] = col[i];
            for l in 0..p {
                f[(i, l)] -= col[i] * b_row[l] / nu;
            }
        }
    }
    let qb = q.adjoint() * to_complex(b);
    let g = CMat::from_fn(n, b.ncols(), |i, j| qb[(rev(i), j)]);
    Ok(u.adjoint() * g)
}

pub(crate) struct StableBlock {
    pub a: Mat,
    pub b: Mat,
    pub c: Mat,
    pub t_inv: Mat,
}

/// Restriction of `(A, B, C)` to the stable invariant subspace, in the
/// coordinates `x = [V₋ V₊] (x₋, x₊)`.
pub(crate) fn stable_block(a: &Mat, b: &Mat, c: &Mat, split: &SpectralSplit) -> Result<StableBlock> {
    let s = split.stable.ncols();
    let n = a.nrows();
    let mut t = Mat::zeros(n, n);
    t.view_mut((0, 0), (n, s)).copy_from(&split.stable);
    t.view_mut((0, s), (n, n - s)).copy_from(&split.unstable);
    let t_inv = t.try_inverse().ok_or(Error::Singular)?;
    let a_t = &t_inv * a * &split.stable;
    let b_t = &t_inv * b;
    Ok(StableBlock {
        a: a_t.rows(0, s).into_owned(),
        b: b_t.rows(0, s).into_owned(),
        c: c * &split.stable,
        t_inv,
    })
}
