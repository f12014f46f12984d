use nalgebra::{DMatrix, Schur};
use serde::{Deserialize, Serialize};

use super::{exterior_power, scaled_product, ExponentSpectrum, SquareMatrix};
use crate::{Error, Result};

/// Largest total log-magnitude a directly formed product may reach.
const LOG_RANGE: f64 = 700.0;

/// A period-`ℓ` sequence of invertible matrices `A_1, …, A_ℓ` of equal
/// dimension; the orbit at step `i` is moved by `A_{i mod ℓ}`.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicCocycle {
    factors: Vec<SquareMatrix>,
}

/// JSON layout: `{"dim": d, "period": ℓ, "factors": [[row-major reals], …]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CocycleDoc {
    pub dim: usize,
    pub period: usize,
    pub factors: Vec<Vec<f64>>,
}

impl PeriodicCocycle {
    pub fn new(factors: Vec<SquareMatrix>) -> Result<Self> {
        let Some(first) = factors.first() else {
            return Err(Error::pre("cocycle needs at least one factor"));
        };
        let dim = first.dim();
        for (i, f) in factors.iter().enumerate() {
            if f.dim() != dim {
                return Err(Error::pre(format!("factor {i} has dim {} but expected {dim}", f.dim())));
            }
            if !f.is_invertible() {
                return Err(Error::pre(format!("factor {i} is not invertible")));
            }
        }
        Ok(Self { factors })
    }

    pub fn single(m: SquareMatrix) -> Result<Self> {
        Self::new(vec![m])
    }

    /// The same matrix repeated `period` times.
    pub fn repeated(m: SquareMatrix, period: usize) -> Result<Self> {
        Self::new(vec![m; period.max(1)])
    }

    pub fn period(&self) -> usize {
        self.factors.len()
    }

    pub fn dim(&self) -> usize {
        self.factors[0].dim()
    }

    pub fn factors(&self) -> &[SquareMatrix] {
        &self.factors
    }

    /// Factor applied at step `i` (indices wrap around the period).
    pub fn factor(&self, i: usize) -> &SquareMatrix {
        &self.factors[i % self.period()]
    }

    /// Cyclic rotation of the base point: the cocycle seen from orbit point `shift`.
    pub fn rotated(&self, shift: usize) -> Self {
        let p = self.period();
        Self { factors: (0..p).map(|i| self.factors[(i + shift) % p].clone()).collect() }
    }

    /// Per-factor conjugation `P⁻¹ A_i P`.
    pub fn conjugated(&self, p: &SquareMatrix) -> Result<Self> {
        let pinv = p.inverse()?;
        Self::new(self.factors.iter().map(|a| pinv.mul(a).mul(p)).collect())
    }

    /// Product over one period, normalised, with the log of the removed scale.
    pub(crate) fn period_product_scaled(&self) -> (DMatrix<f64>, f64) {
        scaled_product(self.dim(), self.factors.iter().map(|f| f.as_matrix()))
    }

    pub fn from_doc(doc: &CocycleDoc) -> Result<Self> {
        if doc.factors.len() != doc.period {
            return Err(Error::pre(format!(
                "field `period` is {} but `factors` has {} entries",
                doc.period,
                doc.factors.len()
            )));
        }
        let factors = doc
            .factors
            .iter()
            .enumerate()
            .map(|(i, f)| {
                SquareMatrix::from_row_major(doc.dim, f).map_err(|e| Error::pre(format!("field `factors[{i}]`: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(factors)
    }

    pub fn to_doc(&self) -> CocycleDoc {
        CocycleDoc {
            dim: self.dim(),
            period: self.period(),
            factors: self.factors.iter().map(SquareMatrix::to_row_major).collect(),
        }
    }
}

/// `A_n ∘ … ∘ A_1` taken cyclically along the cocycle; `n = 0` gives the identity.
///
/// Returns a range error when the product could leave the floating-point
/// range; callers needing long products should use the log-domain routines.
pub fn cocycle_product(c: &PeriodicCocycle, n: usize) -> Result<SquareMatrix> {
    let (mut grow, mut shrink) = (0.0f64, 0.0f64);
    for i in 0..n {
        let sv = c.factor(i).singular_values();
        grow += sv[0].ln();
        shrink += sv[sv.len() - 1].ln();
        if grow > LOG_RANGE || shrink < -LOG_RANGE {
            return Err(Error::Range(format!(
                "product of {n} factors exceeds e^±{LOG_RANGE}; use log-domain operations"
            )));
        }
    }
    let mut p = DMatrix::<f64>::identity(c.dim(), c.dim());
    for i in 0..n {
        p = c.factor(i).as_matrix() * p;
    }
    SquareMatrix::new(p)
}

/// Exponents at the period: `(1/ℓ)·log|eig(A_ℓ⋯A_1)|`, sorted, with
/// algebraic multiplicity.
pub fn lyapunov_exponents_periodic(c: &PeriodicCocycle) -> Result<ExponentSpectrum> {
    let moduli = period_eigen_log_moduli(c)?;
    ExponentSpectrum::new(moduli.into_iter().map(|m| m / c.period() as f64).collect())
}

/// Log-moduli of the eigenvalues of the period product, sorted ascending.
///
/// The product of the `k` largest moduli is the spectral radius of the k-th
/// exterior power of the product, and each exterior product is formed with
/// renormalisation, so moduli spread over hundreds of orders of magnitude
/// stay resolvable. The top power uses the exact `Σ log|det A_i|`.
pub(crate) fn period_eigen_log_moduli(c: &PeriodicCocycle) -> Result<Vec<f64>> {
    let d = c.dim();
    let mut radii = Vec::with_capacity(d + 1);
    radii.push(0.0);
    for k in 1..d {
        let powers: Vec<DMatrix<f64>> = c.factors().iter().map(|f| exterior_power(f.as_matrix(), k)).collect();
        let (p, log_scale) = scaled_product(powers[0].nrows(), powers.iter());
        let rho = complex_eigenvalues(&p)?.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::num(format!("exterior power {k} of the period product has zero spectral radius")));
        }
        radii.push(rho.ln() + log_scale);
    }
    radii.push(c.factors().iter().map(|f| f.det().abs().ln()).sum());
    let mut out: Vec<f64> = radii.windows(2).map(|w| w[1] - w[0]).collect();
    if out.iter().any(|x| !x.is_finite()) {
        return Err(Error::num("period product has an eigenvalue of zero modulus"));
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

pub(crate) fn complex_eigenvalues(p: &DMatrix<f64>) -> Result<Vec<nalgebra::Complex<f64>>> {
    let schur = Schur::try_new(p.clone(), f64::EPSILON, 100_000)
        .ok_or_else(|| Error::num("Schur iteration did not converge"))?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}
