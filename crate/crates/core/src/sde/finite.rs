//! Finite-dimensional collapse equation with commuting self-adjoint
//! collapse operators, integrated by Euler–Maruyama plus renormalization.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub const MAX_FINITE_DIM: usize = 64;
const COMMUTATOR_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteState {
    pub vector: DVector<Complex64>,
    pub hamiltonian: DMatrix<Complex64>,
    pub collapse_ops: Vec<DMatrix<Complex64>>,
    pub hbar: f64,
}

impl FiniteState {
    /// Validates dimensions, Hermiticity and pairwise commutation, and
    /// normalizes the vector.
    pub fn new(
        vector: DVector<Complex64>,
        hamiltonian: DMatrix<Complex64>,
        collapse_ops: Vec<DMatrix<Complex64>>,
    ) -> Result<Self> {
        let dim = vector.len();
        if dim == 0 || dim > MAX_FINITE_DIM {
            return Err(Error::ConfigInvalid(format!(
                "finite dimension must be in 1..={MAX_FINITE_DIM}, got {dim}"
            )));
        }
        let square = |m: &DMatrix<Complex64>| m.nrows() == dim && m.ncols() == dim;
        if !square(&hamiltonian) || !collapse_ops.iter().all(square) {
            return Err(Error::ConfigInvalid("operator dimensions do not match the state".into()));
        }
        for (i, m) in std::iter::once(&hamiltonian).chain(&collapse_ops).enumerate() {
            if (m - m.adjoint()).norm() > COMMUTATOR_TOLERANCE * m.norm().max(1.0) {
                return Err(Error::ConfigInvalid(format!("operator {i} is not Hermitian")));
            }
        }
        for i in 0..collapse_ops.len() {
            for j in i + 1..collapse_ops.len() {
                let (a, b) = (&collapse_ops[i], &collapse_ops[j]);
                // Frobenius norm bounds the operator norm from above.
                let residual = (a * b - b * a).norm();
                if residual > COMMUTATOR_TOLERANCE {
                    return Err(Error::NonCommuting(i, j, residual));
                }
            }
        }
        let mut state = Self {
            vector,
            hamiltonian,
            collapse_ops,
            hbar: 1.0,
        };
        state.normalize()?;
        Ok(state)
    }

    /// H = 0 and a single diagonal collapse operator.
    pub fn diagonal(amplitudes: &[Complex64], spectrum: &[f64]) -> Result<Self> {
        let dim = amplitudes.len();
        if spectrum.len() != dim {
            return Err(Error::LengthMismatch {
                expected: dim,
                actual: spectrum.len(),
            });
        }
        let l = DMatrix::from_diagonal(&DVector::from_iterator(
            dim,
            spectrum.iter().map(|&a| Complex64::new(a, 0.0)),
        ));
        Self::new(
            DVector::from_column_slice(amplitudes),
            DMatrix::zeros(dim, dim),
            vec![l],
        )
    }

    pub fn dim(&self) -> usize {
        self.vector.len()
    }

    fn normalize(&mut self) -> Result<()> {
        let n2 = self.vector.norm_squared();
        if !(n2 > 1e-30) || !n2.is_finite() {
            return Err(Error::ZeroNorm(n2));
        }
        self.vector /= Complex64::new(n2.sqrt(), 0.0);
        Ok(())
    }

    /// ⟨L⟩ for a self-adjoint operator.
    pub fn expectation(&self, op: &DMatrix<Complex64>) -> f64 {
        self.vector.dotc(&(op * &self.vector)).re
    }

    /// ‖(L − ⟨L⟩)ψ‖².
    pub fn variance(&self, op: &DMatrix<Complex64>) -> f64 {
        let mean = Complex64::new(self.expectation(op), 0.0);
        (op * &self.vector - &self.vector * mean).norm_squared()
    }

    /// |c_n|² in the computational basis.
    pub fn populations(&self) -> Vec<f64> {
        self.vector.iter().map(|c| c.norm_sqr()).collect()
    }
}

/// One Euler–Maruyama step of the multi-operator collapse equation,
/// followed by renormalization. One increment per collapse operator.
pub fn step_finite(state: &mut FiniteState, dw: &[f64], dt: f64, lambda: f64) -> Result<()> {
    if dw.len() != state.collapse_ops.len() {
        return Err(Error::LengthMismatch {
            expected: state.collapse_ops.len(),
            actual: dw.len(),
        });
    }
    let psi = &state.vector;
    let mut delta = (&state.hamiltonian * psi) * Complex64::new(0.0, -dt / state.hbar);
    let sl = lambda.sqrt();
    for (op, &d) in state.collapse_ops.iter().zip(dw) {
        let mean = Complex64::new(state.expectation(op), 0.0);
        let shifted = op * psi - psi * mean;
        let shifted2 = op * &shifted - &shifted * mean;
        delta += &shifted * Complex64::new(sl * d, 0.0);
        delta -= &shifted2 * Complex64::new(0.5 * lambda * dt, 0.0);
    }
    state.vector += delta;
    state.normalize()
}
