use nalgebra::{DMatrix, SymmetricEigen};

use super::{op_norm, SquareMatrix, SubspaceBasis};
use crate::{Error, Result};

/// Absolute tolerance on `ω(e_i, e_j)` when testing a frame for isotropy.
pub const LAGRANGIAN_TOL: f64 = 1e-9;

/// `J = [[0, I_d], [−I_d, 0]]`.
pub fn standard_symplectic_form(d: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * d, 2 * d);
    for i in 0..d {
        j[(i, d + i)] = 1.0;
        j[(d + i, i)] = -1.0;
    }
    j
}

/// `‖MᵀJM − J‖` in operator norm; zero exactly for symplectic matrices.
pub fn symplectic_defect(m: &SquareMatrix) -> Result<f64> {
    let n = m.dim();
    if !n.is_multiple_of(2) {
        return Err(Error::pre(format!("symplectic defect needs even dimension, got {n}")));
    }
    let j = standard_symplectic_form(n / 2);
    let a = m.as_matrix();
    Ok(op_norm(&(a.transpose() * &j * a - j)))
}

/// Output of [`lagrangian_to_standard`].
#[derive(Clone, Debug)]
pub struct LagrangianNormalizer {
    /// Symplectic `A` with `A(L) = ℝ^d × {0}^d`.
    pub matrix: SquareMatrix,
    /// `‖A‖` (operator norm).
    pub norm: f64,
    /// `‖A⁻¹‖` (operator norm).
    pub inverse_norm: f64,
}

/// Symplectic change of coordinates sending a Lagrangian subspace onto the
/// first coordinate half-space.
///
/// The frame is orthonormalised by its polar factor `U = B (BᵀB)^{-1/2}`.
/// Writing `U = [X; Y]`, isotropy makes `X + iY` unitary, so
/// `Q = [[X, −Y], [Y, X]]` is orthogonal and symplectic with `Q e_i = u_i`;
/// the returned matrix is `Qᵀ`, whose norms are both 1.
pub fn lagrangian_to_standard(basis: &SubspaceBasis) -> Result<LagrangianNormalizer> {
    let ambient = basis.ambient_dim();
    if !ambient.is_multiple_of(2) || basis.rank() * 2 != ambient {
        return Err(Error::pre(format!(
            "a Lagrangian subspace of ℝ^{ambient} needs rank {}, got {}",
            ambient / 2,
            basis.rank()
        )));
    }
    let d = basis.rank();
    let b = basis.vectors();
    let omega = b.transpose() * standard_symplectic_form(d) * b;
    for i in 0..d {
        for j in (i + 1)..d {
            let w = omega[(i, j)];
            if w.abs() > LAGRANGIAN_TOL {
                return Err(Error::pre(format!("subspace is not Lagrangian: ω(e_{i}, e_{j}) = {w:.3e}")));
            }
        }
    }
    let gram = SymmetricEigen::new(b.transpose() * b);
    let inv_sqrt = &gram.eigenvectors
        * DMatrix::from_diagonal(&gram.eigenvalues.map(|l| 1.0 / l.sqrt()))
        * gram.eigenvectors.transpose();
    let u = b * inv_sqrt;
    let x = u.rows(0, d).into_owned();
    let y = u.rows(d, d).into_owned();
    let mut q = DMatrix::zeros(2 * d, 2 * d);
    q.view_mut((0, 0), (d, d)).copy_from(&x);
    q.view_mut((0, d), (d, d)).copy_from(&(-&y));
    q.view_mut((d, 0), (d, d)).copy_from(&y);
    q.view_mut((d, d), (d, d)).copy_from(&x);
    let a = q.transpose();
    let norm = op_norm(&a);
    let inverse_norm = op_norm(&q);
    Ok(LagrangianNormalizer { matrix: SquareMatrix::new(a)?, norm, inverse_norm })
}
