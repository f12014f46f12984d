use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;

use crate::exponents::delta;
use crate::interval::Interval;
use crate::linalg::{ExponentSpectrum, SquareMatrix};
use crate::{Error, Result};

/// Inputs of the construction: exponent data at the saddle, the tangency
/// transfer expansions and the size parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ConstructionParams {
    pub d0: usize,
    /// Stable dimension.
    pub k: usize,
    pub lambda: ExponentSpectrum,
    pub mu: Vec<f64>,
    pub eta: f64,
    pub rho: f64,
    pub n: u64,
    pub ell: u64,
    pub m: u64,
    #[serde(rename = "Cbound", alias = "cBound")]
    pub c_bound: f64,
    /// Translation added by the second shear, in absolute coordinates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub translation: Option<Vec<f64>>,
}

fn homothety_block(v: &[f64]) -> bool {
    let tol = 1e-12 * v.iter().fold(1.0f64, |a, x| a.max(x.abs()));
    v.windows(2).all(|w| (w[1] - w[0]).abs() <= tol)
}

impl ConstructionParams {
    /// The running example: a planar saddle with exponents `∓1`.
    pub fn planar_example(ell: u64) -> Self {
        Self {
            d0: 2,
            k: 1,
            lambda: ExponentSpectrum::new(vec![-1.0, 1.0]).unwrap(),
            mu: vec![1.0, 1.0],
            eta: 0.1,
            rho: 1.0,
            n: 5,
            ell,
            m: 2,
            c_bound: 1.0,
            translation: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.d0;
        if d < 2 {
            return Err(Error::pre("d0 must be at least 2"));
        }
        if self.lambda.dim() != d {
            return Err(Error::pre(format!("lambda has {} exponents, d0 = {d}", self.lambda.dim())));
        }
        if self.k == 0 || self.k >= d {
            return Err(Error::pre(format!("stable dimension k = {} must satisfy 1 ≤ k < d0 = {d}", self.k)));
        }
        let l = self.lambda.exponents();
        if !homothety_block(&l[..self.k]) || !homothety_block(&l[self.k..]) {
            return Err(Error::pre("lambda is not homothety-prepared: stable and unstable blocks must be constant"));
        }
        if !(l[self.k - 1] < 0.0 && l[self.k] > 0.0) {
            return Err(Error::pre("lambda must have exactly k negative and d0 − k positive exponents"));
        }
        if self.mu.len() != d || self.mu.iter().any(|x| !x.is_finite() || *x == 0.0) {
            return Err(Error::pre("mu must list d0 finite nonzero values"));
        }
        // η < 1 is the regime of interest but not needed for the formulas;
        // inflated η is how the L bound is deliberately broken.
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::pre("eta must be positive"));
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(Error::pre("rho must be positive"));
        }
        if self.n == 0 || self.ell == 0 || self.m == 0 {
            return Err(Error::pre("n, ell and m must be at least 1"));
        }
        let worst = self.mu.iter().fold(0.0f64, |a, x| a.max(x.abs()).max(x.abs().recip()));
        if !(self.c_bound > 0.0) || self.c_bound < worst * (1.0 - 1e-12) {
            return Err(Error::pre(format!("Cbound = {} does not bound max(|μ_i|, |μ_i|⁻¹) = {worst}", self.c_bound)));
        }
        if let Some(a) = &self.translation {
            if a.len() != d || a.iter().any(|x| !x.is_finite()) {
                return Err(Error::pre("translation must list d0 finite values"));
            }
        }
        Ok(())
    }

    pub fn return_time(&self) -> u64 {
        self.ell + self.m + 2 * self.n
    }

    /// `λ_i`, with indices taken mod `d0` (0-based).
    pub(crate) fn lam(&self, i: usize) -> f64 {
        self.lambda.exponents()[i % self.d0]
    }

    pub fn is_conservative(&self) -> bool {
        self.lambda.sum().abs() <= 1e-12 && self.mu.iter().map(|m| m.abs().ln()).sum::<f64>().abs() <= 1e-12
    }
}

/// Scales of the construction, all in log domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DerivedScales {
    /// `log|Λ_i|`.
    pub log_lambda_cap: Vec<f64>,
    /// Sign of `Λ_i` (that of `μ_i`).
    pub lambda_cap_sign: Vec<f64>,
    /// `log δ`.
    pub log_delta: f64,
    /// `log δ_i`.
    pub log_delta_sides: Vec<f64>,
    /// Log of the strict upper bound on `L`.
    pub log_bound: f64,
    #[serde(with = "biguint_string")]
    pub l: BigUint,
    pub log_l: f64,
    pub return_time: u64,
    pub entropy: f64,
}

pub(crate) mod biguint_string {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_str_radix(10))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        BigUint::parse_bytes(s.as_bytes(), 10).ok_or_else(|| serde::de::Error::custom("not a decimal integer"))
    }
}

/// Natural log of a big integer, accurate to a few ulps.
pub fn log_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 64 {
        return (x.to_u64().expect("fits in u64") as f64).ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_u64().expect("fits in u64") as f64;
    top.ln() + shift as f64 * LN_2
}

/// `floor(e^x)` for `x ≥ 0` as a big integer.
fn floor_exp(x: f64) -> BigUint {
    let e2 = x / LN_2;
    if e2 < 62.0 {
        return BigUint::from(x.exp().floor() as u64);
    }
    let shift = e2.floor() as u64 - 52;
    let mantissa = (e2 - shift as f64).exp2().floor() as u64;
    BigUint::from(mantissa) << shift
}

/// Scales, the number of branches `L = floor(bound/2)` and the resulting
/// entropy `log L/(ℓ+m+2n)`.
pub fn derive_scales(p: &ConstructionParams) -> Result<DerivedScales> {
    p.validate()?;
    let (d, k, n, ell) = (p.d0, p.k, p.n as f64, p.ell as f64);
    let log_lambda_cap: Vec<f64> =
        (0..d).map(|i| p.mu[i].abs().ln() + (ell + n) * p.lam(i) + n * p.lam(i + 1)).collect();
    let lambda_cap_sign = p.mu.iter().map(|m| m.signum()).collect();
    let log_delta = -p.c_bound.ln() + (p.lam(0) + p.lam(d - 1)) * n + p.rho.ln();
    let mut log_delta_sides = Vec::with_capacity(d);
    for i in 0..d {
        let s = if i < k {
            log_delta + log_lambda_cap[..i].iter().sum::<f64>()
        } else {
            log_delta - log_lambda_cap[i..].iter().sum::<f64>()
        };
        log_delta_sides.push(s);
    }
    if let Some(i) = (0..d).find(|&i| log_delta_sides[i] > log_delta + 1e-12 * log_delta.abs().max(1.0)) {
        return Err(Error::Infeasible(format!(
            "side δ_{} = e^{:.4} exceeds δ = e^{:.4}; increase ell",
            i + 1,
            log_delta_sides[i],
            log_delta
        )));
    }
    let stable: f64 = log_lambda_cap[..k].iter().sum();
    let unstable: f64 = log_lambda_cap[k..].iter().sum();
    let log_bound = (p.eta / 8.0).ln() + n * (p.lam(k) - p.lam(0)) + (-stable).min(unstable);
    let log_half = log_bound - LN_2;
    if !log_half.is_finite() || log_half < LN_2 {
        return Err(Error::Infeasible(format!(
            "L bound (η/8)·e^{{n(λ_{{k+1}}−λ_1)}}·min(...) = {:.4} leaves L = floor(bound/2) < 2",
            log_bound.exp()
        )));
    }
    let l = floor_exp(log_half);
    let log_l = log_biguint(&l);
    let return_time = p.return_time();
    Ok(DerivedScales {
        log_lambda_cap,
        lambda_cap_sign,
        log_delta,
        log_delta_sides,
        log_bound,
        l,
        log_l,
        return_time,
        entropy: log_l / return_time as f64,
    })
}

/// `log L/(ℓ+m+2n)`.
pub fn model_entropy(s: &DerivedScales) -> f64 {
    s.entropy
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EntropyGap {
    pub entropy: f64,
    pub delta: f64,
    /// `Δ − entropy`.
    pub gap: f64,
}

/// Model entropy together with its distance to `Δ` of the saddle.
pub fn entropy_gap(p: &ConstructionParams, s: &DerivedScales) -> EntropyGap {
    let d = delta(&p.lambda).delta;
    EntropyGap { entropy: s.entropy, delta: d, gap: d - s.entropy }
}

/// `h/|λ^s| + h/λ^u` for a conformal horseshoe.
pub fn conformal_hausdorff_dimension(h: f64, lambda_s: f64, lambda_u: f64) -> Result<f64> {
    if !(h >= 0.0) {
        return Err(Error::pre("entropy must be nonnegative"));
    }
    if !(lambda_s < 0.0 && lambda_u > 0.0) {
        return Err(Error::pre(format!("exponents ({lambda_s}, {lambda_u}) are not hyperbolic")));
    }
    Ok(h / lambda_s.abs() + h / lambda_u)
}

/// Homothety factors and tangency permutation that prepare a saddle for
/// the construction.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PreparationTargets {
    /// `exp(−Δ⁻/k)`, the contraction of the stable homothety.
    pub stable_factor: f64,
    /// `exp(Δ⁺/(d₀−k))`.
    pub unstable_factor: f64,
    /// Cyclic shift `e_i ↦ e_{i+1}`.
    pub permutation: SquareMatrix,
}

pub fn preparation_targets(spec: &ExponentSpectrum, k: usize) -> Result<PreparationTargets> {
    let d = spec.dim();
    if k == 0 || k >= d {
        return Err(Error::pre(format!("k = {k} must satisfy 1 ≤ k < {d}")));
    }
    let r = delta(spec);
    if r.delta_minus == 0.0 || r.delta_plus == 0.0 {
        return Err(Error::pre("orbit is not a saddle: Δ⁺ or Δ⁻ vanishes"));
    }
    let mut perm = nalgebra::DMatrix::zeros(d, d);
    for i in 0..d {
        perm[((i + 1) % d, i)] = 1.0;
    }
    Ok(PreparationTargets {
        stable_factor: (-r.delta_minus / k as f64).exp(),
        unstable_factor: (r.delta_plus / (d - k) as f64).exp(),
        permutation: SquareMatrix::new(perm)?,
    })
}

/// Worst log-ratios of the half-sides of `g^j(R)`, `0 ≤ j ≤ ℓ`, to their
/// allowed sizes: `δ` for the first `d0 − 1` coordinates and `ρ` for the last.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct IterateContainment {
    /// Upper bound on `max log(e^{λ_i j}δ_i/δ)` over `i < d0`, `j ≤ ℓ`.
    pub max_log_side_over_delta: f64,
    /// Upper bound on `max log(e^{λ_{d0} j}δ_{d0}/ρ)` over `j ≤ ℓ`.
    pub max_log_last_over_rho: f64,
    pub holds: bool,
}

/// Rigorous enclosures of the log-domain scales, recomputed from the
/// parameters with outward rounding.
#[derive(Clone, Debug)]
pub(crate) struct ScaleEnclosure {
    pub log_lambda_cap: Vec<Interval>,
    pub log_delta: Interval,
    pub log_delta_sides: Vec<Interval>,
}

impl ScaleEnclosure {
    pub fn new(p: &ConstructionParams) -> Self {
        let (d, k) = (p.d0, p.k);
        let n = Interval::point(p.n as f64);
        let ln_pos = |x: f64| Interval::point(x.abs()).ln();
        let log_lambda_cap: Vec<Interval> = (0..d)
            .map(|i| {
                ln_pos(p.mu[i])
                    + Interval::point((p.ell + p.n) as f64) * Interval::point(p.lam(i))
                    + n * Interval::point(p.lam(i + 1))
            })
            .collect();
        let log_delta =
            -ln_pos(p.c_bound) + (Interval::point(p.lam(0)) + Interval::point(p.lam(d - 1))) * n + ln_pos(p.rho);
        let sum = |v: &[Interval]| v.iter().fold(Interval::point(0.0), |a, &b| a + b);
        let log_delta_sides = (0..d)
            .map(|i| if i < k { log_delta + sum(&log_lambda_cap[..i]) } else { log_delta - sum(&log_lambda_cap[i..]) })
            .collect();
        Self { log_lambda_cap, log_delta, log_delta_sides }
    }
}

/// Check that `g^j(R)` stays within `δ` in the first `d0 − 1` coordinates
/// and within `ρ` in the last one for `0 ≤ j ≤ ℓ`.
///
/// Half-sides are `e^{λ_i j} δ_i`, monotone in `j`, so only `j = 0` and
/// `j = ℓ` matter. The ratios are evaluated in their cancelled forms
/// (`δ_1/δ = 1`, `δ_{d0}/ρ = e^{−λ_{d0}ℓ}/(C|μ_{d0}|)`) so that equalities
/// such as `δ_1 = δ` are decided exactly.
pub fn iterate_containment(p: &ConstructionParams) -> Result<IterateContainment> {
    p.validate()?;
    let enc = ScaleEnclosure::new(p);
    let (d, k) = (p.d0, p.k);
    let sum = |v: &[Interval]| v.iter().fold(Interval::point(0.0), |a, &b| a + b);
    let ratio = |i: usize| if i < k { sum(&enc.log_lambda_cap[..i]) } else { -sum(&enc.log_lambda_cap[i..]) };
    let at = |base: Interval, i: usize, j: u64| {
        if j == 0 {
            base
        } else {
            base + Interval::point(p.lam(i)) * Interval::point(j as f64)
        }
    };
    let worst = |base: Interval, i: usize| at(base, i, 0).hi().max(at(base, i, p.ell).hi());
    let max_log_side_over_delta = (0..d - 1).map(|i| worst(ratio(i), i)).fold(f64::NEG_INFINITY, f64::max);
    // log(δ_{d0}/ρ) = −log C − log|μ_{d0}| − λ_{d0}ℓ; the λ_{d0}ℓ term cancels at j = ℓ.
    let last = -Interval::point(p.c_bound).ln() - Interval::point(p.mu[d - 1].abs()).ln();
    let lam = Interval::point(p.lam(d - 1));
    let at_zero = last - lam * Interval::point(p.ell as f64);
    let max_log_last_over_rho = at_zero.hi().max(last.hi());
    let holds = max_log_side_over_delta <= 0.0 && max_log_last_over_rho <= 0.0;
    Ok(IterateContainment { max_log_side_over_delta, max_log_last_over_rho, holds })
}
