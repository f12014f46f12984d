use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::LN_2;

use super::model::AffineHorseshoeModel;
use super::scales::{biguint_string, ConstructionParams, DerivedScales, ScaleEnclosure};
use crate::interval::Interval;
use crate::symbolic::TransitionMatrix;
use crate::{Error, Result};

/// The rectangle `R`, its stable slices `R^s_j` and their images `R^u_j`.
///
/// All sides are log half-widths. In the normalised coordinates
/// `u_i = x_i/δ_i`, `R = [−1, 1]^{d0}` and `R^s_j` restricts the last
/// coordinate to `[(j − 1/8)/L, (j + 1/8)/L]`.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RectangleFamily {
    pub d0: usize,
    pub k: usize,
    /// `log δ_i`.
    pub log_half_sides: Vec<f64>,
    /// `log δ′_i`, the half-sides of each `R^u_j`.
    pub log_image_half_sides: Vec<f64>,
    #[serde(with = "biguint_string")]
    pub slices: BigUint,
    #[serde(skip)]
    params: ConstructionParams,
    #[serde(skip)]
    enclosure: ScaleEnclosure,
}

fn log_big(x: &BigUint) -> Interval {
    let bits = x.bits();
    if bits <= 53 {
        return Interval::point(x.to_u64().expect("fits") as f64).ln();
    }
    let shift = bits - 53;
    let top = (x >> shift).to_u64().expect("fits") as f64;
    // x ∈ [top·2^s, (top + 1)·2^s)
    let mant = Interval::new(top, top + 1.0).ln();
    mant + Interval::point(shift as f64) * Interval::around(LN_2)
}

impl RectangleFamily {
    /// Rectangles for `p` with `L` from `s`, optionally reduced to at most
    /// `cap` slices.
    pub fn new(p: &ConstructionParams, s: &DerivedScales, cap: Option<u64>) -> Result<Self> {
        p.validate()?;
        let (d, k) = (p.d0, p.k);
        let mut slices = s.l.clone();
        if let Some(c) = cap {
            if c < 2 {
                return Err(Error::pre("slice cap must be at least 2"));
            }
            slices = slices.min(BigUint::from(c));
        }
        let log_l = log_big(&slices).mid();
        let n = p.n as f64;
        let sides = s.log_delta_sides.clone();
        let mut image = sides.clone();
        image[0] = -p.eta.ln() + n * (p.lam(0) - p.lam(k)) + s.log_lambda_cap[k - 1] + sides[k - 1];
        image[k] = p.eta.ln() - 8f64.ln() - log_l + n * (p.lam(k) - p.lam(0)) + sides[0];
        Ok(Self {
            d0: d,
            k,
            log_half_sides: sides,
            log_image_half_sides: image,
            slices,
            params: p.clone(),
            enclosure: ScaleEnclosure::new(p),
        })
    }

    fn slice_count_f64(&self) -> f64 {
        self.slices.to_f64().unwrap_or(f64::INFINITY)
    }

    /// Normalised bounds of `R^s_j`: full in every coordinate but the last.
    pub fn stable_slice(&self, j: u64) -> Vec<(f64, f64)> {
        let l = self.slice_count_f64();
        let mut b = vec![(-1.0, 1.0); self.d0];
        b[self.d0 - 1] = ((j as f64 - 0.125) / l, (j as f64 + 0.125) / l);
        b
    }

    /// Normalised bounds of `R^u_j`, the image of `R^s_j`.
    pub fn unstable_slice(&self, j: u64) -> Vec<(f64, f64)> {
        let l = self.slice_count_f64();
        let mut b = vec![(-1.0, 1.0); self.d0];
        let w1 = (self.log_image_half_sides[0] - self.log_half_sides[0]).exp();
        b[0] = (j as f64 / l - w1, j as f64 / l + w1);
        let wk = (self.log_image_half_sides[self.k] - self.log_half_sides[self.k]).exp();
        b[self.k] = (-wk, wk);
        b
    }

    /// `R^s_j ⊂ R` and the slices are pairwise disjoint, decided on integers:
    /// `8(L−1) + 1 ≤ 8L` and `8j + 1 < 8(j+1) − 1`.
    pub fn slices_nested_and_disjoint(&self) -> bool {
        let l = &self.slices;
        let last = (l - 1u32) * 8u32 + 1u32;
        last <= l * 8u32 && 1u32 < 7u32
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum VerificationMode {
    Exhaustive,
    /// Endpoints plus seeded random slices only.
    Sampled,
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    /// Above this many slices, rows are sampled.
    pub exhaustive_limit: u64,
    pub samples: usize,
    pub seed: u64,
    /// Largest slice count for which the transition matrix is materialised.
    pub dense_limit: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { exhaustive_limit: 1 << 16, samples: 64, seed: 0, dense_limit: 1024 }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct InequalityMargin {
    pub inequality: String,
    /// Slack of the inequality (log-domain where the check is in logs).
    pub margin: f64,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MarkovReport {
    #[serde(with = "biguint_string")]
    pub slices: BigUint,
    pub mode: VerificationMode,
    pub rows_checked: u64,
    pub all_ones: bool,
    pub margins: Vec<InequalityMargin>,
    /// The `L×L` transition matrix, when small enough to store.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<TransitionMatrix>,
}

const BRANCH: &str = "branch window: L·δ′₁/δ < 1/8";
const STABLE: &str = "stable containment: j/L + δ′₁/δ ≤ 1";
const STABLE_LOW: &str = "stable containment: j/L − δ′₁/δ ≥ −1";
const UNSTABLE: &str = "unstable crossing: δ′_{k+1} ≥ δ_{k+1}";
const SHIFT: &str = "shifted coordinates: image side equals δ_i";

fn compatible(a: &ConstructionParams, b: &ConstructionParams) -> bool {
    a.d0 == b.d0
        && a.k == b.k
        && a.lambda == b.lambda
        && a.mu == b.mu
        && a.n == b.n
        && a.ell == b.ell
        && a.m == b.m
        && a.rho == b.rho
        && a.c_bound == b.c_bound
}

struct Coefficients {
    log_c1: Interval,
    log_e: Interval,
    log_l: Interval,
    /// `a_i/δ_i`, exact zero when there is no translation.
    alpha: Vec<Option<Interval>>,
}

fn coefficients(model: &AffineHorseshoeModel, rects: &RectangleFamily) -> Coefficients {
    let p = &model.params;
    let enc = &rects.enclosure;
    let (d, k) = (p.d0, p.k);
    let n = Interval::point(p.n as f64);
    let ln_eta = Interval::point(p.eta).ln();
    let gap = (Interval::point(p.lam(k)) - Interval::point(p.lam(0))) * n;
    let log_c1 = -ln_eta - gap + enc.log_lambda_cap[k - 1] + enc.log_delta_sides[k - 1] - enc.log_delta;
    let log_e = ln_eta + gap + enc.log_delta - enc.log_delta_sides[k];
    let alpha = (0..d)
        .map(|i| {
            let a = p.translation.as_ref().map_or(0.0, |t| t[i]);
            (a != 0.0).then(|| {
                let mag = (Interval::point(a.abs()).ln() - enc.log_delta_sides[i]).exp();
                if a < 0.0 {
                    -mag
                } else {
                    mag
                }
            })
        })
        .collect();
    Coefficients { log_c1, log_e, log_l: log_big(&rects.slices), alpha }
}

fn fail(inequality: &str, margin: f64) -> Error {
    Error::Geometric { inequality: inequality.to_string(), margin }
}

/// Slack of `j/L + α_1 + c1 ≤ 1` on row `j`.
fn row_margin(c: &Coefficients, l: &BigUint, j: &BigUint) -> f64 {
    match c.alpha[0] {
        None => log_big(&(l - j)).lo() - c.log_l.hi() - c.log_c1.hi(),
        Some(a) => {
            let frac = if j.is_zero() { Interval::point(0.0) } else { (log_big(j) - c.log_l).exp() };
            1.0 - (frac + a + c.log_c1.exp()).hi()
        }
    }
}

fn random_below(l: &BigUint, rng: &mut ChaCha8Rng) -> BigUint {
    let bits = l.bits();
    let words = bits.div_ceil(32) as usize;
    loop {
        let mut digits: Vec<u32> = (0..words).map(|_| rng.random()).collect();
        let excess = (words as u64 * 32 - bits) as u32;
        if let Some(top) = digits.last_mut() {
            *top >>= excess;
        }
        let x = BigUint::new(digits);
        if &x < l {
            return x;
        }
    }
}

/// Check that every stable slice's image crosses `R` with full unstable
/// length and stays inside its stable factor.
pub fn verify_markov_crossings(model: &AffineHorseshoeModel, rects: &RectangleFamily) -> Result<MarkovReport> {
    verify_markov_crossings_with(model, rects, &VerifyOptions::default())
}

/// As [`verify_markov_crossings`] with explicit sampling options.
///
/// In normalised coordinates the branch-`j` map is `u′_1 = c₁u_k + j/L`,
/// `u′_{k+1} = −E(u_{d0} − j/L)`, `u′_i = u_{i−1}` otherwise (plus the
/// normalised translation). Only the first coordinate depends on `j`, so the
/// entry `(j, j′)` factors into a row condition on `j` and a column condition
/// on `j′`; both are evaluated with outward-rounded enclosures.
pub fn verify_markov_crossings_with(
    model: &AffineHorseshoeModel,
    rects: &RectangleFamily,
    opts: &VerifyOptions,
) -> Result<MarkovReport> {
    if !compatible(&model.params, &rects.params) {
        return Err(Error::pre("model and rectangles come from incompatible parameters"));
    }
    let c = coefficients(model, rects);
    let (d, k) = (model.dim(), model.params.k);
    let l = &rects.slices;
    let mut margins = Vec::new();

    let branch = (Interval::point(0.125).ln()).lo() - (c.log_l + c.log_c1).hi();
    margins.push(InequalityMargin { inequality: BRANCH.into(), margin: branch });
    if !(branch > 0.0) {
        return Err(fail(BRANCH, branch));
    }
    let low = match c.alpha[0] {
        None => -c.log_c1.hi(),
        Some(a) => (a - c.log_c1.exp()).lo() + 1.0,
    };
    margins.push(InequalityMargin { inequality: STABLE_LOW.into(), margin: low });
    if low < 0.0 {
        return Err(fail(STABLE_LOW, low));
    }
    let unstable = match c.alpha[k] {
        None => c.log_e.lo() - Interval::point(8.0).ln().hi() - c.log_l.hi(),
        Some(a) => {
            let w = (c.log_e - Interval::point(8.0).ln() - c.log_l).exp();
            (a.lo() + w.lo() - 1.0).min(w.lo() - a.hi() - 1.0)
        }
    };
    margins.push(InequalityMargin { inequality: UNSTABLE.into(), margin: unstable });
    if unstable < 0.0 {
        return Err(fail(UNSTABLE, unstable));
    }
    let shift = (1..d).filter(|&i| i != k).map(|i| c.alpha[i].map_or(0.0, |a| -a.abs().hi())).fold(0.0f64, f64::min);
    margins.push(InequalityMargin { inequality: SHIFT.into(), margin: shift });
    if shift < 0.0 {
        return Err(fail(SHIFT, shift));
    }

    let exhaustive = *l <= BigUint::from(opts.exhaustive_limit);
    let rows: Vec<BigUint> = if exhaustive {
        let count = l.to_u64().expect("below the exhaustive limit");
        (0..count).map(BigUint::from).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mut v = vec![BigUint::zero(), l - 1u32];
        v.extend((0..opts.samples).map(|_| random_below(l, &mut rng)));
        v
    };
    let row_margins: Vec<f64> = rows.par_iter().map(|j| row_margin(&c, l, j)).collect();
    let worst = row_margins.iter().copied().fold(f64::INFINITY, f64::min);
    margins.push(InequalityMargin { inequality: STABLE.into(), margin: worst });
    if let Some(pos) = row_margins.iter().position(|&m| m < 0.0) {
        return Err(fail(&format!("{STABLE} (j = {})", rows[pos]), row_margins[pos]));
    }
    // Column condition: slab j′ lies inside the covered range [−1, 1] of the
    // last coordinate, i.e. 8j′ + 1 ≤ 8L; the largest j′ = L − 1 decides it.
    if (l - 1u32) * 8u32 + 1u32 > l * 8u32 {
        return Err(fail("slab containment: (j′ + 1/8)/L ≤ 1", -1.0));
    }

    let matrix = (*l <= BigUint::from(opts.dense_limit))
        .then(|| TransitionMatrix::all_ones(l.to_usize().expect("below the dense limit")));
    Ok(MarkovReport {
        slices: l.clone(),
        mode: if exhaustive { VerificationMode::Exhaustive } else { VerificationMode::Sampled },
        rows_checked: rows.len() as u64,
        all_ones: true,
        margins,
        matrix,
    })
}
