//! Dense linear-algebra kernels shared by the graph, network, and norm layers.
//!
//! Everything here works on `nalgebra` dynamic matrices. Symmetric problems go
//! through [`sym_eig`]; general square matrices are handled through Schur and
//! matrix-sign-function based routines in [`lyapunov`].

mod lyapunov;
mod statespace;

pub use lyapunov::{solve_lyapunov, solve_lyapunov_with_kernel, spectral_split, KernelLyapunov, SpectralSplit};
pub use statespace::StateSpace;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Mat = DMatrix<f64>;
pub type CMat = DMatrix<Complex64>;

/// Eigenvalues with real part at or above `-HURWITZ_MARGIN` count as marginal/unstable.
pub const HURWITZ_MARGIN: f64 = 1e-9;

/// Relative cutoff under which eigenvalues are treated as zero in pseudoinverses.
pub const RANK_TOL: f64 = 1e-10;

pub const SYMMETRY_TOL: f64 = 1e-10;

/// Largest absolute entry, `‖M‖_max`.
pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

pub fn max_abs_c(m: &CMat) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.norm()))
}

pub fn ensure_square(m: &Mat) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    Ok(m.nrows())
}

/// `‖M − Mᵀ‖_max`; `None` for rectangular input.
pub fn asymmetry(m: &Mat) -> Option<f64> {
    if m.nrows() != m.ncols() {
        return None;
    }
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    Some(worst)
}

pub fn is_symmetric(m: &Mat, rel_tol: f64) -> bool {
    matches!(asymmetry(m), Some(a) if a <= rel_tol * (1.0 + max_abs(m)))
}

/// Orthogonal eigendecomposition of a symmetric matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SymmetricEig {
    pub eigenvalues: DVector<f64>,
    /// Column `i` pairs with `eigenvalues[i]`.
    pub eigenvectors: Mat,
}

impl SymmetricEig {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `U Λ Uᵀ`.
    pub fn reconstruct(&self) -> Mat {
        let u = &self.eigenvectors;
        u * Mat::from_diagonal(&self.eigenvalues) * u.transpose()
    }

    pub fn max_abs_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }
}

pub fn sym_eig(m: &Mat) -> Result<SymmetricEig> {
    ensure_square(m)?;
    let asym = asymmetry(m).unwrap_or(f64::INFINITY);
    if asym > SYMMETRY_TOL * (1.0 + max_abs(m)) {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    let n = m.nrows();
    if n == 0 {
        return Ok(SymmetricEig { eigenvalues: DVector::zeros(0), eigenvectors: Mat::zeros(0, 0) });
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut eigenvectors = Mat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(SymmetricEig { eigenvalues, eigenvectors })
}

/// Moore-Penrose pseudoinverse of a symmetric matrix, `U Λ⁺ Uᵀ`.
///
/// Eigenvalues with `|λ| ≤ rank_tol · max|λ|` are dropped.
pub fn pinv(m: &Mat, rank_tol: f64) -> Result<Mat> {
    let eig = sym_eig(m)?;
    Ok(pinv_from_eig(&eig, rank_tol))
}

pub fn pinv_from_eig(eig: &SymmetricEig, rank_tol: f64) -> Mat {
    let cutoff = rank_tol * eig.max_abs_eigenvalue();
    let inv = eig.eigenvalues.map(|l| if l.abs() > cutoff && l != 0.0 { 1.0 / l } else { 0.0 });
    let u = &eig.eigenvectors;
    u * Mat::from_diagonal(&inv) * u.transpose()
}

pub fn kron(a: &Mat, b: &Mat) -> Mat {
    a.kronecker(b)
}

/// Eigenvalues of a general real square matrix.
pub fn eigenvalues(m: &Mat) -> Result<Vec<Complex64>> {
    let n = ensure_square(m)?;
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![Complex64::new(m[(0, 0)], 0.0)]);
    }
    if asymmetry(m) == Some(0.0) {
        return Ok(m.clone().symmetric_eigenvalues().iter().map(|&v| Complex64::new(v, 0.0)).collect());
    }
    let schur = with_schur_retries(|eps| nalgebra::Schur::try_new(m.clone(), eps, 10_000))
        .ok_or_else(|| Error::NoConvergence("real Schur decomposition".into()))?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

/// Complex Schur form `A = U T U*`, returned as `(U, T)`.
pub(crate) fn complex_schur(a: &CMat) -> Result<(CMat, CMat)> {
    with_schur_retries(|eps| nalgebra::Schur::try_new(a.clone(), eps, 20_000))
        .map(|s| s.unpack())
        .ok_or_else(|| Error::NoConvergence("complex Schur decomposition".into()))
}

/// The QR iteration's deflation test at exactly machine epsilon can stall on
/// matrices with exactly repeated eigenvalues; loosen it by small factors.
fn with_schur_retries<T>(mut attempt: impl FnMut(f64) -> Option<T>) -> Option<T> {
    [1.0, 4.0, 16.0, 64.0, 256.0].iter().find_map(|k| attempt(k * f64::EPSILON))
}

pub fn max_real_part(m: &Mat) -> Result<f64> {
    Ok(eigenvalues(m)?.iter().fold(f64::NEG_INFINITY, |acc, z| acc.max(z.re)))
}

/// True iff every eigenvalue has real part `< -margin`.
pub fn is_hurwitz(m: &Mat, margin: f64) -> bool {
    match max_real_part(m) {
        Ok(r) => r < -margin,
        Err(_) => false,
    }
}

pub fn to_complex(m: &Mat) -> CMat {
    m.map(|v| Complex64::new(v, 0.0))
}

/// Largest singular value, from the top eigenvalue of the smaller Gram matrix.
///
/// Gram eigenvalues are used instead of an SVD because the dense SVD routine
/// loses accuracy on matrices with repeated singular values.
pub fn spectral_norm(m: &Mat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let gram = if m.nrows() <= m.ncols() { m * m.transpose() } else { m.transpose() * m };
    top_eigenvalue(&gram).max(0.0).sqrt()
}

pub fn spectral_norm_c(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let gram = if m.nrows() <= m.ncols() { m * m.adjoint() } else { m.adjoint() * m };
    // Hermitian G = R + iJ has the same spectrum (doubled) as [[R, -J], [J, R]].
    let k = gram.nrows();
    let mut real = Mat::zeros(2 * k, 2 * k);
    for i in 0..k {
        for j in 0..k {
            let z = gram[(i, j)];
            real[(i, j)] = z.re;
            real[(i + k, j + k)] = z.re;
            real[(i, j + k)] = -z.im;
            real[(i + k, j)] = z.im;
        }
    }
    top_eigenvalue(&real).max(0.0).sqrt()
}

fn top_eigenvalue(sym: &Mat) -> f64 {
    let sym = (sym + sym.transpose()) * 0.5;
    sym.symmetric_eigenvalues().iter().fold(f64::NEG_INFINITY, |a, v| a.max(*v))
}

/// Orthonormal basis (as columns) of the column space of `m`, keeping exactly `rank` directions.
pub(crate) fn range_basis(m: &Mat, rank: usize) -> Mat {
    let n = m.nrows();
    if rank == 0 {
        return Mat::zeros(n, 0);
    }
    let gram = m * m.transpose();
    let eig = SymmetricEigen::new((&gram + gram.transpose()) * 0.5);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut basis = Mat::zeros(n, rank);
    for (dst, &src) in order.iter().take(rank).enumerate() {
        basis.set_column(dst, &eig.eigenvectors.column(src));
    }
    basis
}

/// Orthonormal basis of the null space of a symmetric matrix.
pub fn null_basis_sym(m: &Mat, rank_tol: f64) -> Result<Mat> {
    let eig = sym_eig(m)?;
    let cutoff = rank_tol.max(f64::EPSILON) * (1.0 + eig.max_abs_eigenvalue());
    let idx: Vec<usize> = (0..eig.dim()).filter(|&i| eig.eigenvalues[i].abs() <= cutoff).collect();
    let mut basis = Mat::zeros(m.nrows(), idx.len());
    for (dst, &src) in idx.iter().enumerate() {
        basis.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn path5() -> Mat {
        Mat::from_row_slice(
            5,
            5,
            &[
                1., -1., 0., 0., 0., -1., 2., -1., 0., 0., 0., -1., 2., -1., 0., 0., 0., -1., 2., -1., 0., 0., 0.,
                -1., 1.,
            ],
        )
    }

    fn random_sym(rng: &mut ChaCha8Rng, n: usize) -> Mat {
        let g = Mat::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        &g + g.transpose()
    }

    #[test]
    fn identity_eigendecomposition() {
        let eig = sym_eig(&Mat::identity(3, 3)).unwrap();
        assert!(eig.eigenvalues.iter().all(|&l| (l - 1.0).abs() < 1e-14));
        let u = &eig.eigenvectors;
        assert!(max_abs(&(u.transpose() * u - Mat::identity(3, 3))) < 1e-10);
    }

    #[test]
    fn path_laplacian_has_simple_zero() {
        let eig = sym_eig(&path5()).unwrap();
        assert!(eig.eigenvalues[0].abs() < 1e-12);
        assert!(eig.eigenvalues[1] > 1e-3);
        for w in eig.eigenvalues.as_slice().windows(2) {
            assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn random_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = random_sym(&mut rng, 6);
        let eig = sym_eig(&m).unwrap();
        assert!(max_abs(&(eig.reconstruct() - &m)) <= 1e-9 * (1.0 + max_abs(&m)));
    }

    #[test]
    fn rejects_asymmetric() {
        let m = Mat::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(matches!(sym_eig(&m), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn pinv_diagonal() {
        let m = Mat::from_diagonal(&DVector::from_vec(vec![0.0, 2.0]));
        let p = pinv(&m, RANK_TOL).unwrap();
        let expected = Mat::from_diagonal(&DVector::from_vec(vec![0.0, 0.5]));
        assert!(max_abs(&(p - expected)) < 1e-15);
        assert_eq!(pinv(&Mat::zeros(3, 3), RANK_TOL).unwrap(), Mat::zeros(3, 3));
    }

    #[test]
    fn pinv_of_path_laplacian() {
        let l = path5();
        let lp = pinv(&l, RANK_TOL).unwrap();
        let expected = Mat::identity(5, 5) - Mat::from_element(5, 5, 1.0 / 5.0);
        assert!(max_abs(&(&l * &lp - expected)) < 1e-12);
    }

    #[test]
    fn kron_examples() {
        let m = Mat::from_row_slice(2, 2, &[1., 2., 3., 4.]);
        let k = kron(&Mat::identity(2, 2), &m);
        assert_eq!(k.view((0, 0), (2, 2)), m);
        assert_eq!(k.view((2, 2), (2, 2)), m);
        assert_eq!(max_abs(&k.view((0, 2), (2, 2)).into_owned()), 0.0);
        let ones = Mat::from_element(2, 1, 1.0);
        let e1 = Mat::from_column_slice(2, 1, &[1.0, 0.0]);
        assert_eq!(kron(&ones, &e1).as_slice(), &[1.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn hurwitz_scalars() {
        assert!(is_hurwitz(&Mat::from_element(1, 1, -1.0), HURWITZ_MARGIN));
        assert!(!is_hurwitz(&Mat::from_element(1, 1, 0.0), HURWITZ_MARGIN));
        // single integrator: A - λB = 0 - 2·1
        assert!(is_hurwitz(&Mat::from_element(1, 1, -2.0), HURWITZ_MARGIN));
        let rot = Mat::from_row_slice(2, 2, &[-0.1, 5.0, -5.0, -0.1]);
        assert!(is_hurwitz(&rot, HURWITZ_MARGIN));
        let center = Mat::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        assert!(!is_hurwitz(&center, HURWITZ_MARGIN));
    }
}
