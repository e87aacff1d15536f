use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Eigenvalue sequence a_n of a self-adjoint collapse operator with
/// discrete spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spectrum {
    /// a_n = n
    Linear,
    /// a_n = √n
    Sqrt,
    /// a_n = n²
    Quadratic,
    Custom(Vec<f64>),
}

impl Spectrum {
    pub fn eigenvalue(&self, n: usize) -> Result<f64> {
        match self {
            Spectrum::Linear => Ok(n as f64),
            Spectrum::Sqrt => Ok((n as f64).sqrt()),
            Spectrum::Quadratic => Ok((n * n) as f64),
            Spectrum::Custom(v) => v.get(n).copied().ok_or(Error::LengthMismatch {
                expected: n + 1,
                actual: v.len(),
            }),
        }
    }

    /// a_{n+1} − a_n, without cancellation for the closed-form spectra.
    pub fn gap(&self, n: usize) -> Result<f64> {
        match self {
            Spectrum::Linear => Ok(1.0),
            Spectrum::Sqrt => Ok(1.0 / ((n as f64 + 1.0).sqrt() + (n as f64).sqrt())),
            Spectrum::Quadratic => Ok((2 * n + 1) as f64),
            Spectrum::Custom(_) => Ok(self.eigenvalue(n + 1)? - self.eigenvalue(n)?),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleTerm {
    pub n: usize,
    pub gap: f64,
    pub delta_a2: f64,
    /// Largest overlap with an eigenvector, max(|α|², |β|²).
    pub max_overlap: f64,
}

/// ΔA² of ψ_n = α φ_n + β φ_{n+1} for n in `ns`:
/// |α|²|β|²(a_{n+1} − a_n)².
///
/// Each ψ_n is a normalized superposition of two eigenvectors, so it is
/// not itself an eigenvector, yet ΔA² → 0 whenever the gaps close.
pub fn counterexample_sequence(
    ns: impl IntoIterator<Item = usize>,
    alpha: Complex64,
    beta: Complex64,
    spectrum: &Spectrum,
) -> Result<Vec<CounterexampleTerm>> {
    let w = alpha.norm_sqr() + beta.norm_sqr();
    if !((w - 1.0).abs() <= 1e-12) {
        return Err(Error::BadWeights(w));
    }
    let weight = alpha.norm_sqr() * beta.norm_sqr();
    let max_overlap = alpha.norm_sqr().max(beta.norm_sqr());
    ns.into_iter()
        .map(|n| {
            let gap = spectrum.gap(n)?;
            if !(gap > 0.0) {
                return Err(Error::ConfigInvalid(format!("spectrum not increasing at n = {n}")));
            }
            Ok(CounterexampleTerm {
                n,
                gap,
                delta_a2: weight * gap * gap,
                max_overlap,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_weights() {
        let a = Complex64::new(0.8, 0.0);
        assert!(matches!(
            counterexample_sequence([1], a, a, &Spectrum::Linear),
            Err(Error::BadWeights(_))
        ));
    }

    #[test]
    fn eigenvector_case() {
        let t = counterexample_sequence([3], Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), &Spectrum::Linear)
            .unwrap();
        assert_eq!((t[0].delta_a2, t[0].max_overlap), (0.0, 1.0));
    }

    #[test]
    fn sqrt_spectrum_closes_gaps() {
        let h = Complex64::new(0.5f64.sqrt(), 0.0);
        let terms = counterexample_sequence([1, 100, 10_000], h, h, &Spectrum::Sqrt).unwrap();
        assert!(terms.windows(2).all(|w| w[1].delta_a2 < w[0].delta_a2));
        assert!(terms[2].delta_a2 < 1e-5);
        assert!(terms.iter().all(|t| (t.max_overlap - 0.5).abs() < 1e-15));
    }
}
