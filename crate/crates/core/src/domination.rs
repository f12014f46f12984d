//! N-domination of invariant splittings along periodic orbits.
//!
//! A splitting `E ⊕ F` with `dim E = index` is N-dominated when
//! `‖Aⁿ|E‖ ≤ m(Aⁿ|F)/2` at every orbit point for all `n ≥ N`. The worst
//! ratio over the orbit is submultiplicative in `n`, so the bound holding on
//! `[N, 2N−1]` already gives it for all `n ≥ N`; that window is the
//! certificate used here.

use std::collections::BTreeMap;

use nalgebra::{Complex, DMatrix};
use rayon::prelude::*;
use serde::Serialize;

use crate::exponents::SplittingLabel;
use crate::linalg::{
    complex_eigenvalues, leading_left_singular, op_norm, orthonormalize, period_eigen_log_moduli, scaled_product,
    PeriodicCocycle, SubspaceBasis,
};
use crate::{Error, Result};

/// Relative modulus gap below which two eigenvalue clusters are not separated.
pub const CLUSTER_REL_GAP: f64 = 1e-6;
/// Largest principal-angle sine accepted for `A_j E_j = E_{j+1}`.
pub const INVARIANCE_TOL: f64 = 1e-8;

/// `log(1/2)` with a relative slack of `1e-12`, so exact halvings pass.
fn log_half() -> f64 {
    (0.5 * (1.0 + 1e-12f64)).ln()
}

/// A splitting `E ⊕ F` given by bases at every orbit point.
#[derive(Clone, Debug)]
pub struct CandidateSplitting {
    index: usize,
    e: Vec<SubspaceBasis>,
    f: Vec<SubspaceBasis>,
}

impl CandidateSplitting {
    /// `e[j]`, `f[j]` are the bundles at orbit point `j`.
    pub fn new(index: usize, e: Vec<SubspaceBasis>, f: Vec<SubspaceBasis>) -> Result<Self> {
        if e.is_empty() || e.len() != f.len() {
            return Err(Error::pre("splitting needs one E and one F basis per orbit point"));
        }
        let d = e[0].ambient_dim();
        for (be, bf) in e.iter().zip(&f) {
            if be.ambient_dim() != d || bf.ambient_dim() != d {
                return Err(Error::pre("splitting bases live in different ambient dimensions"));
            }
            if be.rank() != index || be.rank() + bf.rank() != d {
                return Err(Error::pre(format!(
                    "bundle dimensions {} + {} do not match index {index} in dimension {d}",
                    be.rank(),
                    bf.rank()
                )));
            }
        }
        Ok(Self { index, e, f })
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn period(&self) -> usize {
        self.e.len()
    }

    pub fn e(&self, j: usize) -> &SubspaceBasis {
        &self.e[j % self.e.len()]
    }

    pub fn f(&self, j: usize) -> &SubspaceBasis {
        &self.f[j % self.f.len()]
    }
}

/// Candidates at every resolvable modulus cut, plus the cuts that were too
/// close to call.
#[derive(Clone, Debug)]
pub struct InvariantSplittings {
    pub candidates: Vec<CandidateSplitting>,
    /// Indices where two clusters sit within [`CLUSTER_REL_GAP`] of each other.
    pub unresolvable: Vec<usize>,
}

/// Modulus cuts of the period product: `(resolvable, unresolvable)` indices.
fn modulus_cuts(c: &PeriodicCocycle) -> Result<(Vec<usize>, Vec<usize>)> {
    let lm = period_eigen_log_moduli(c)?;
    let (mut cuts, mut close) = (Vec::new(), Vec::new());
    for i in 1..lm.len() {
        let gap = lm[i] - lm[i - 1];
        let equal = 1e-9 * lm[i].abs().max(lm[i - 1].abs()).max(1.0);
        if gap > CLUSTER_REL_GAP.ln_1p() {
            cuts.push(i);
        } else if gap > equal {
            close.push(i);
        }
    }
    Ok((cuts, close))
}

/// Range of `∏ (P − μ I)` over `kill`, as an orthonormal basis of dimension `rank`.
fn polynomial_range(p: &DMatrix<f64>, kill: &[Complex<f64>], rank: usize) -> Result<DMatrix<f64>> {
    let d = p.nrows();
    let pc = p.map(|x| Complex::new(x, 0.0));
    let mut m = DMatrix::<Complex<f64>>::identity(d, d);
    for &mu in kill {
        m = (&pc - DMatrix::<Complex<f64>>::identity(d, d) * mu) * m;
        let s = m.norm();
        if s > 0.0 && s.is_finite() {
            m /= Complex::new(s, 0.0);
        }
    }
    let imag = m.map(|z| z.im).norm();
    if imag > 1e-8 {
        return Err(Error::num("spectral projector is not real: a conjugate pair straddles the cut"));
    }
    let u = leading_left_singular(&m.map(|z| z.re), rank)
        .ok_or_else(|| Error::num("SVD did not return left singular vectors"))?;
    Ok(orthonormalize(&u))
}

fn eigen_by_modulus(p: &DMatrix<f64>) -> Result<Vec<Complex<f64>>> {
    let mut ev = complex_eigenvalues(p)?;
    ev.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    Ok(ev)
}

/// Sine of the largest principal angle from `span(x)` into `span(y)`
/// (both orthonormal).
fn subspace_gap(x: &DMatrix<f64>, y: &DMatrix<f64>) -> f64 {
    let proj = y * (y.transpose() * x);
    op_norm(&(x - proj))
}

/// One candidate per resolvable cut between modulus clusters of the period
/// product, transported along the orbit.
///
/// `F` (the more expanded bundle) is read off the forward period product and
/// pushed forward; `E` is read off the inverse product and pulled back, so
/// both transports are contracting on errors.
pub fn invariant_splittings(c: &PeriodicCocycle) -> Result<InvariantSplittings> {
    let (cuts, unresolvable) = modulus_cuts(c)?;
    if cuts.is_empty() {
        return Ok(InvariantSplittings { candidates: Vec::new(), unresolvable });
    }
    let d = c.dim();
    let l = c.period();
    let inverses = c.factors().iter().map(|a| a.inverse().map(|m| m.into_inner())).collect::<Result<Vec<_>>>()?;
    let (p, _) = c.period_product_scaled();
    let (q, _) = scaled_product(d, inverses.iter().rev());
    let ev_p = eigen_by_modulus(&p)?;
    let ev_q = eigen_by_modulus(&q)?;

    let mut candidates = Vec::with_capacity(cuts.len());
    for &i in &cuts {
        let f0 = polynomial_range(&p, &ev_p[..i], d - i)?;
        let e0 = polynomial_range(&q, &ev_q[..d - i], i)?;
        let mut f = vec![f0];
        for j in 0..l - 1 {
            f.push(orthonormalize(&(c.factor(j).as_matrix() * &f[j])));
        }
        let mut e = vec![DMatrix::zeros(d, i); l];
        e[0] = e0.clone();
        let mut next = e0;
        for j in (1..l).rev() {
            next = orthonormalize(&(&inverses[j] * &next));
            e[j] = next.clone();
        }
        let e = e.into_iter().map(SubspaceBasis::new).collect::<Result<Vec<_>>>()?;
        let f = f.into_iter().map(SubspaceBasis::new).collect::<Result<Vec<_>>>()?;
        let s = CandidateSplitting::new(i, e, f)?;
        let r = invariance_residual(c, &s)?;
        if r > INVARIANCE_TOL {
            return Err(Error::num(format!("splitting at index {i} is not invariant to tolerance (residual {r:.3e})")));
        }
        candidates.push(s);
    }
    Ok(InvariantSplittings { candidates, unresolvable })
}

/// Largest principal-angle sine of `A_j E_j` against `E_{j+1}` (and the same
/// for `F`) over the orbit.
pub fn invariance_residual(c: &PeriodicCocycle, s: &CandidateSplitting) -> Result<f64> {
    if s.period() != c.period() {
        return Err(Error::pre(format!(
            "splitting has {} orbit points but the cocycle has period {}",
            s.period(),
            c.period()
        )));
    }
    if s.e(0).ambient_dim() != c.dim() {
        return Err(Error::pre("splitting and cocycle dimensions differ"));
    }
    let mut worst = 0.0f64;
    for j in 0..c.period() {
        let a = c.factor(j).as_matrix();
        for (x, y) in [(s.e(j), s.e(j + 1)), (s.f(j), s.f(j + 1))] {
            let img = orthonormalize(&(a * x.orthonormal()));
            worst = worst.max(subspace_gap(&img, &y.orthonormal()));
        }
    }
    Ok(worst)
}

/// Verdict on a domination check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum DominationStatus {
    /// Certified for all `n ≥ N`.
    Dominated,
    /// Some `n ≥ N` in the tested range violates the bound.
    NotDominated,
    /// The bound held on the tested range but no certificate fits below the horizon.
    Undetermined,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DominationReport {
    pub index: usize,
    pub requested_n: usize,
    pub status: DominationStatus,
    /// Least `N₀` with the bound for every `n ≥ N₀`, when certified below the horizon.
    pub smallest_n: Option<usize>,
    pub tested_up_to: usize,
    /// `n ↦` worst ratio over the orbit (may underflow to 0; see the log map).
    pub worst_ratio: BTreeMap<usize, f64>,
    pub worst_log_ratio: BTreeMap<usize, f64>,
    /// Worst ratio over one full period, when the period is within the horizon.
    pub period_ratio: Option<f64>,
}

impl DominationReport {
    pub fn is_dominated(&self) -> bool {
        self.status == DominationStatus::Dominated
    }
}

/// Restriction `Q_{j+1}ᵀ A_j Q_j` of each factor to an invariant bundle.
fn restricted_blocks(c: &PeriodicCocycle, basis: impl Fn(usize) -> DMatrix<f64>) -> Vec<DMatrix<f64>> {
    (0..c.period()).map(|j| basis(j + 1).transpose() * c.factor(j).as_matrix() * basis(j)).collect()
}

/// `log max_j ‖Aⁿ|E_j‖ / m(Aⁿ|F_j)` for `n = 1..=horizon`.
fn worst_log_ratios(c: &PeriodicCocycle, s: &CandidateSplitting, horizon: usize) -> Result<Vec<f64>> {
    let l = c.period();
    let be = restricted_blocks(c, |j| s.e(j).orthonormal());
    let bf_inv = restricted_blocks(c, |j| s.f(j).orthonormal())
        .into_iter()
        .map(|b| b.try_inverse().ok_or_else(|| Error::num("restriction to F is singular")))
        .collect::<Result<Vec<_>>>()?;
    let per_point: Vec<Vec<f64>> = (0..l)
        .into_par_iter()
        .map(|j| {
            let mut me = DMatrix::identity(be[0].nrows(), be[0].nrows());
            let mut wf = DMatrix::identity(bf_inv[0].nrows(), bf_inv[0].nrows());
            let (mut se, mut sf) = (0.0, 0.0);
            (0..horizon)
                .map(|t| {
                    me = &be[(j + t) % l] * &me;
                    wf = &wf * &bf_inv[(j + t) % l];
                    let ne = op_norm(&me);
                    let nf = op_norm(&wf);
                    me /= ne;
                    wf /= nf;
                    se += ne.ln();
                    sf += nf.ln();
                    se + sf
                })
                .collect()
        })
        .collect();
    Ok((0..horizon).map(|t| per_point.iter().map(|v| v[t]).fold(f64::NEG_INFINITY, f64::max)).collect())
}

/// Check N-domination of `s` and compute its worst ratios for `1 ≤ n ≤ horizon`.
pub fn check_n_domination(
    c: &PeriodicCocycle,
    s: &CandidateSplitting,
    n: usize,
    horizon: usize,
) -> Result<DominationReport> {
    if n == 0 {
        return Err(Error::pre("N must be positive"));
    }
    if horizon < n {
        return Err(Error::pre(format!("horizon {horizon} is below N = {n}")));
    }
    let r = invariance_residual(c, s)?;
    if r > INVARIANCE_TOL {
        return Err(Error::pre(format!("splitting is not invariant (residual {r:.3e})")));
    }
    let logs = worst_log_ratios(c, s, horizon)?;
    let ok = |m: usize| logs[m - 1] <= log_half();
    let smallest_n = (1..=horizon.div_ceil(2)).find(|&n0| 2 * n0 - 1 <= horizon && (n0..2 * n0).all(ok));
    let status = match smallest_n {
        Some(n0) if n0 <= n => DominationStatus::Dominated,
        _ if (n..=horizon).any(|m| !ok(m)) => DominationStatus::NotDominated,
        _ => DominationStatus::Undetermined,
    };
    let worst_log_ratio: BTreeMap<usize, f64> = logs.iter().enumerate().map(|(t, &x)| (t + 1, x)).collect();
    Ok(DominationReport {
        index: s.index(),
        requested_n: n,
        status,
        smallest_n,
        tested_up_to: horizon,
        worst_ratio: worst_log_ratio.iter().map(|(&k, &v)| (k, v.exp())).collect(),
        period_ratio: worst_log_ratio.get(&c.period()).map(|v| v.exp()),
        worst_log_ratio,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DominatedCut {
    pub index: usize,
    pub smallest_n: usize,
}

/// The dominated cuts found up to some `Nmax`.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FinestSplitting {
    pub dim: usize,
    pub cuts: Vec<DominatedCut>,
    pub unresolvable: Vec<usize>,
}

impl FinestSplitting {
    /// Blocks of the finest dominated splitting: intervals between accepted cuts.
    pub fn blocks(&self) -> SplittingLabel {
        let cuts: Vec<usize> = self.cuts.iter().map(|c| c.index).collect();
        SplittingLabel::from_cuts(self.dim, &cuts).expect("cuts come from valid indices")
    }
}

/// Every cut whose splitting is N-dominated for some `N ≤ nmax`.
pub fn finest_dominated_splitting(c: &PeriodicCocycle, nmax: usize) -> Result<FinestSplitting> {
    if nmax == 0 {
        return Err(Error::pre("Nmax must be at least 1"));
    }
    let found = invariant_splittings(c)?;
    let reports =
        found.candidates.par_iter().map(|s| check_n_domination(c, s, nmax, 2 * nmax)).collect::<Result<Vec<_>>>()?;
    let cuts = reports
        .iter()
        .filter(|r| r.is_dominated())
        .map(|r| DominatedCut { index: r.index, smallest_n: r.smallest_n.expect("dominated implies certified") })
        .collect();
    Ok(FinestSplitting { dim: c.dim(), cuts, unresolvable: found.unresolvable })
}

/// Period at least `t` and no N-dominated splitting at any index.
pub fn tn_weak(c: &PeriodicCocycle, t: usize, n: usize) -> Result<bool> {
    if t == 0 || n == 0 {
        return Err(Error::pre("T and N must be at least 1"));
    }
    if c.period() < t {
        return Ok(false);
    }
    Ok(finest_dominated_splitting(c, n)?.cuts.is_empty())
}
