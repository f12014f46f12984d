use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{op_norm, singular_values_desc};
use crate::{Error, Result};

/// Smallest singular value accepted for a cocycle factor.
pub(crate) const INVERTIBILITY_FLOOR: f64 = 1e-300;

/// A square matrix with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct SquareMatrix(DMatrix<f64>);

impl SquareMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::pre(format!("matrix must be square and nonempty, got {}x{}", m.nrows(), m.ncols())));
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::pre("matrix has non-finite entries"));
        }
        Ok(Self(m))
    }

    pub fn from_row_major(dim: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::pre(format!(
                "expected {} row-major entries for dim {dim}, got {}",
                dim * dim,
                entries.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn diag(entries: &[f64]) -> Self {
        Self(DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(entries)))
    }

    /// Planar rotation by `theta`.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self(DMatrix::from_row_slice(2, 2, &[c, -s, s, c]))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn to_row_major(&self) -> Vec<f64> {
        let d = self.dim();
        (0..d).flat_map(|i| (0..d).map(move |j| (i, j))).map(|ij| self.0[ij]).collect()
    }

    pub fn det(&self) -> f64 {
        self.0.determinant()
    }

    pub fn singular_values(&self) -> Vec<f64> {
        singular_values_desc(&self.0)
    }

    pub fn operator_norm(&self) -> f64 {
        op_norm(&self.0)
    }

    pub fn is_invertible(&self) -> bool {
        self.singular_values().last().is_some_and(|&s| s > INVERTIBILITY_FLOOR)
    }

    pub fn inverse(&self) -> Result<Self> {
        if !self.is_invertible() {
            return Err(Error::pre("matrix is singular"));
        }
        self.0.clone().try_inverse().map(Self).ok_or_else(|| Error::num("inversion failed"))
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn mul(&self, rhs: &SquareMatrix) -> Self {
        Self(&self.0 * &rhs.0)
    }
}

impl From<SquareMatrix> for DMatrix<f64> {
    fn from(m: SquareMatrix) -> Self {
        m.0
    }
}

/// Row-major nested-array form used in JSON documents.
#[derive(Serialize, Deserialize)]
struct Rows(Vec<Vec<f64>>);

impl Serialize for SquareMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let d = self.dim();
        Rows((0..d).map(|i| (0..d).map(|j| self.0[(i, j)]).collect()).collect()).serialize(s)
    }
}

impl<'de> Deserialize<'de> for SquareMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let Rows(rows) = Rows::deserialize(d)?;
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(serde::de::Error::custom("matrix rows must all have length equal to the row count"));
        }
        let flat: Vec<f64> = rows.into_iter().flatten().collect();
        SquareMatrix::from_row_major(n, &flat).map_err(serde::de::Error::custom)
    }
}
