//! Small dense linear algebra used throughout the crate.
//!
//! Everything that grows exponentially is tracked in the log domain: products
//! of cocycle factors are renormalised as they are formed and the discarded
//! scale is carried separately.

mod cocycle;
mod grassmann;
mod matrix;
mod spectrum;
mod symplectic;

pub use cocycle::{cocycle_product, lyapunov_exponents_periodic, CocycleDoc, PeriodicCocycle};
pub(crate) use cocycle::{complex_eigenvalues, period_eigen_log_moduli};
pub use grassmann::{
    exterior_power, grassmann_jacobian, sample_subspace, sampled_sup_jacobian, top_k_log_growth, top_k_log_jacobian,
    SubspaceBasis,
};
pub use matrix::SquareMatrix;
pub use spectrum::ExponentSpectrum;
pub use symplectic::{
    lagrangian_to_standard, standard_symplectic_form, symplectic_defect, LagrangianNormalizer, LAGRANGIAN_TOL,
};

use nalgebra::DMatrix;

/// Product of `factors` applied in order (first factor acts first), with the
/// running product renormalised whenever its norm leaves `[1e-100, 1e100]`.
///
/// Returns the normalised product and the natural log of the removed scale.
pub(crate) fn scaled_product<'a, I>(dim: usize, factors: I) -> (DMatrix<f64>, f64)
where
    I: IntoIterator<Item = &'a DMatrix<f64>>,
{
    let mut p = DMatrix::<f64>::identity(dim, dim);
    let mut log_scale = 0.0;
    for a in factors {
        p = a * p;
        let s = p.norm();
        if !(1e-100..=1e100).contains(&s) && s > 0.0 && s.is_finite() {
            p /= s;
            log_scale += s.ln();
        }
    }
    (p, log_scale)
}

fn to_faer(m: &DMatrix<f64>) -> faer::Mat<f64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Singular values sorted in descending order.
///
/// nalgebra's dynamic SVD loses accuracy on nearly rank-deficient input, so
/// this goes through faer.
pub(crate) fn singular_values_desc(m: &DMatrix<f64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut sv = to_faer(m)
        .singular_values()
        .unwrap_or_else(|_| m.clone().svd(false, false).singular_values.iter().copied().collect());
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Orthonormal basis of the `rank` leading left singular vectors.
pub(crate) fn leading_left_singular(m: &DMatrix<f64>, rank: usize) -> Option<DMatrix<f64>> {
    let svd = to_faer(m).svd().ok()?;
    let s = svd.S().column_vector();
    let u = svd.U();
    let mut order: Vec<usize> = (0..s.nrows()).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    let cols: Vec<usize> = order.into_iter().take(rank).collect();
    if cols.len() < rank {
        return None;
    }
    Some(DMatrix::from_fn(m.nrows(), rank, |i, j| u[(i, cols[j])]))
}

/// Spectral (operator 2-) norm.
pub(crate) fn op_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    singular_values_desc(m)[0]
}

/// Orthonormal basis of the column span via thin QR, with sign fixed so the
/// diagonal of R is nonnegative.
pub(crate) fn orthonormalize(b: &DMatrix<f64>) -> DMatrix<f64> {
    let qr = b.clone().qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..q.ncols() {
        if r[(j, j)] < 0.0 {
            let mut col = q.column_mut(j);
            col.neg_mut();
        }
    }
    q
}
