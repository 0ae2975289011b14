use num_complex::Complex64;

use super::{ensure_square, max_abs, spectral_split, to_complex, CMat, Mat, HURWITZ_MARGIN};
use crate::error::{Error, Result};

/// Continuous-time realization `ẋ = A x + B u, y = C x`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    pub a: Mat,
    pub b: Mat,
    pub c: Mat,
}

impl StateSpace {
    pub fn new(a: Mat, b: Mat, c: Mat) -> Result<Self> {
        let n = ensure_square(&a)?;
        if b.nrows() != n {
            return Err(Error::Dimension(format!("B has {} rows, expected {n}", b.nrows())));
        }
        if c.ncols() != n {
            return Err(Error::Dimension(format!("C has {} columns, expected {n}", c.ncols())));
        }
        Ok(Self { a, b, c })
    }

    pub fn states(&self) -> usize {
        self.a.nrows()
    }

    pub fn inputs(&self) -> usize {
        self.b.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.c.nrows()
    }

    /// `C (sI − A)⁻¹ B` by a dense complex solve.
    pub fn transfer_at(&self, s: Complex64) -> Result<CMat> {
        let n = self.states();
        let m = CMat::identity(n, n) * s - to_complex(&self.a);
        let rhs = to_complex(&self.b);
        let sol = m.lu().solve(&rhs).ok_or(Error::Singular)?;
        Ok(to_complex(&self.c) * sol)
    }

    /// Restriction to the stable invariant subspace, valid when every
    /// marginal/unstable mode is unobservable (`X₊(A) ⊆ ker C`). The transfer
    /// function is unchanged.
    pub fn stable_part(&self) -> Result<StateSpace> {
        let split = spectral_split(&self.a, HURWITZ_MARGIN)?;
        let residual = max_abs(&(&self.c * &split.unstable));
        if residual > 1e-8 * (1.0 + max_abs(&self.c)) {
            return Err(Error::KernelConditionViolated { residual });
        }
        if split.unstable.ncols() == 0 {
            return Ok(self.clone());
        }
        let block = super::lyapunov::stable_block(&self.a, &self.b, &self.c, &split)?;
        Ok(StateSpace { a: block.a, b: block.b, c: block.c })
    }
}
