use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{op_norm, orthonormalize, scaled_product, singular_values_desc, PeriodicCocycle, SquareMatrix};
use crate::{Error, Result};

const RANK_TOL: f64 = 1e-12;

/// `k` linearly independent column vectors spanning a subspace of `ℝ^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct SubspaceBasis {
    vectors: DMatrix<f64>,
}

impl SubspaceBasis {
    pub fn new(vectors: DMatrix<f64>) -> Result<Self> {
        let (d, k) = vectors.shape();
        if k == 0 || k > d {
            return Err(Error::pre(format!("basis needs 1 ≤ k ≤ d, got k={k}, d={d}")));
        }
        if vectors.iter().any(|x| !x.is_finite()) {
            return Err(Error::pre("basis has non-finite entries"));
        }
        let sv = singular_values_desc(&vectors);
        if sv[k - 1] <= RANK_TOL * sv[0] {
            return Err(Error::pre(format!(
                "basis is rank deficient (singular value ratio {:.3e})",
                sv[k - 1] / sv[0]
            )));
        }
        Ok(Self { vectors })
    }

    /// Basis from column vectors given as slices.
    pub fn from_columns(columns: &[&[f64]]) -> Result<Self> {
        let d = columns.first().map_or(0, |c| c.len());
        if columns.iter().any(|c| c.len() != d) {
            return Err(Error::pre("basis columns have unequal lengths"));
        }
        let flat: Vec<f64> = columns.iter().flat_map(|c| c.iter().copied()).collect();
        Self::new(DMatrix::from_column_slice(d, columns.len(), &flat))
    }

    /// The span of the coordinate vectors with the given (0-based) indices.
    pub fn coordinate(ambient: usize, axes: &[usize]) -> Result<Self> {
        let mut m = DMatrix::zeros(ambient, axes.len());
        for (j, &a) in axes.iter().enumerate() {
            if a >= ambient {
                return Err(Error::pre(format!("axis {a} out of range for dim {ambient}")));
            }
            m[(a, j)] = 1.0;
        }
        Self::new(m)
    }

    pub fn ambient_dim(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn rank(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    pub fn orthonormal(&self) -> DMatrix<f64> {
        orthonormalize(&self.vectors)
    }
}

/// k-volume expansion factor of `m` restricted to `span(e)`:
/// `√det(BᵀMᵀMB) / √det(BᵀB)`, evaluated on an orthonormalised basis.
pub fn grassmann_jacobian(m: &SquareMatrix, e: &SubspaceBasis) -> Result<f64> {
    if m.dim() != e.ambient_dim() {
        return Err(Error::pre("matrix and subspace dimensions differ"));
    }
    let q = e.orthonormal();
    let image = m.as_matrix() * q;
    let r = image.qr().r();
    Ok((0..r.ncols()).map(|i| r[(i, i)].abs()).product())
}

/// `Σ_{i≤k} log s_i(m)` with singular values in descending order; this is
/// the log of the supremum of [`grassmann_jacobian`] over k-planes.
pub fn top_k_log_jacobian(m: &SquareMatrix, k: usize) -> Result<f64> {
    if k > m.dim() {
        return Err(Error::pre(format!("k={k} exceeds dimension {}", m.dim())));
    }
    let sv = m.singular_values();
    Ok(sv.iter().take(k).map(|s| s.ln()).sum())
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// k-th exterior power: the matrix of all `k×k` minors, rows and columns
/// indexed by lexicographically ordered k-subsets.
pub fn exterior_power(m: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let d = m.nrows();
    let subsets = combinations(d, k);
    let n = subsets.len();
    DMatrix::from_fn(n, n, |a, b| {
        let (rows, cols) = (&subsets[a], &subsets[b]);
        DMatrix::from_fn(k, k, |i, j| m[(rows[i], cols[j])]).determinant()
    })
}

/// `log sup_{E ∈ Grass_k} Jac(A^{(n)}, E)` for the n-step product along the
/// cocycle, computed on exterior powers with log-domain renormalisation.
pub fn top_k_log_growth(c: &PeriodicCocycle, k: usize, n: usize) -> Result<f64> {
    let d = c.dim();
    if k > d {
        return Err(Error::pre(format!("k={k} exceeds dimension {d}")));
    }
    if k == 0 || n == 0 {
        return Ok(0.0);
    }
    if k == d {
        return Ok((0..n).map(|i| c.factor(i).det().abs().ln()).sum());
    }
    let powers: Vec<DMatrix<f64>> = c.factors().iter().map(|f| exterior_power(f.as_matrix(), k)).collect();
    let size = powers[0].nrows();
    let (p, log_scale) = scaled_product(size, (0..n).map(|i| &powers[i % powers.len()]));
    let norm = op_norm(&p);
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::num("exterior power product degenerated"));
    }
    Ok(norm.ln() + log_scale)
}

fn gaussian_frame(d: usize, k: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(d, k, |_, _| StandardNormal.sample(rng))
}

/// Uniformly distributed k-plane (orthonormalised Gaussian frame).
pub fn sample_subspace(d: usize, k: usize, rng: &mut ChaCha8Rng) -> Result<SubspaceBasis> {
    SubspaceBasis::new(orthonormalize(&gaussian_frame(d, k, rng)))
}

/// Largest [`grassmann_jacobian`] found over `samples` seeded k-planes.
///
/// The first fifth of the budget is spent on uniform planes; the rest
/// perturbs the incumbent with a geometrically shrinking step. Only Jacobian
/// evaluations are used, so the result is independent of the SVD route.
pub fn sampled_sup_jacobian(m: &SquareMatrix, k: usize, samples: usize, seed: u64) -> Result<f64> {
    let d = m.dim();
    if k == 0 {
        return Ok(1.0);
    }
    if k > d || samples == 0 {
        return Err(Error::pre("need 1 ≤ k ≤ d and at least one sample"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let uniform = (samples / 5).max(1);
    let mut best_frame = orthonormalize(&gaussian_frame(d, k, &mut rng));
    let mut best = grassmann_jacobian(m, &SubspaceBasis::new(best_frame.clone())?)?;
    for _ in 1..uniform {
        let frame = orthonormalize(&gaussian_frame(d, k, &mut rng));
        let j = grassmann_jacobian(m, &SubspaceBasis::new(frame.clone())?)?;
        if j > best {
            best = j;
            best_frame = frame;
        }
    }
    let local = samples - uniform;
    let (start, end) = (0.5f64, 1e-5f64);
    for t in 0..local {
        let step = start * (end / start).powf(t as f64 / local.max(1) as f64);
        let frame = orthonormalize(&(&best_frame + gaussian_frame(d, k, &mut rng) * step));
        let Ok(basis) = SubspaceBasis::new(frame.clone()) else { continue };
        let j = grassmann_jacobian(m, &basis)?;
        if j > best {
            best = j;
            best_frame = frame;
        }
    }
    Ok(best)
}
