//! Evaluable model systems with exact differentials.
//!
//! Torus systems live on `[0, 1)^d` and reduce every coordinate mod 1 after
//! each step. Iterating chaotic torus maps in double precision loses all
//! information after roughly 50 steps, and no shadowing is claimed, so the
//! sampled-system horizon is capped at [`TORUS_HORIZON`].
//!
//! The standard map uses the convention
//! `y' = y + (K/2π) sin 2πx`, `x' = x + y'`, with differential
//! `[[1 + K cos 2πx, 1], [K cos 2πx, 1]]` in `(x, y)` order.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize};

use crate::estimators::{Ball, Cell, SampledSystem};
use crate::horseshoe::{assemble_model, derive_scales, AffineHorseshoeModel, ConstructionParams};
use crate::linalg::{PeriodicCocycle, SquareMatrix};
use crate::symbolic::{ShiftPoint, TransitionMatrix};
use crate::{Error, Result};

/// Iterates trusted for sampled torus dynamics.
pub const TORUS_HORIZON: usize = 64;
/// Largest admitted closure defect `d(f^ℓ(p), p)` of a periodic orbit.
pub const PERIODIC_TOL: f64 = 1e-9;

/// Serialized description of a system: `{"kind": "...", "params": {...}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SystemSpec {
    /// `x ↦ Mx mod 1` for an integer matrix with `|det M| = 1`.
    ToralAutomorphism {
        matrix: Vec<Vec<i64>>,
    },
    StandardMap {
        #[serde(rename = "K", alias = "k")]
        k: f64,
    },
    /// Translation of the torus by `angle` (one entry per coordinate).
    Rotation {
        #[serde(deserialize_with = "one_or_many")]
        angle: Vec<f64>,
    },
    Shift {
        matrix: TransitionMatrix,
    },
    AffineHorseshoe(HorseshoeSource),
}

fn one_or_many<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(f64),
        Many(Vec<f64>),
    }
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(x) => vec![x],
        OneOrMany::Many(v) => v,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub enum HorseshoeSource {
    /// The return map assembled from construction parameters.
    Model(Box<ConstructionParams>),
    Uniform(UniformHorseshoe),
}

/// Planar affine horseshoe on `[0, 1]²` with `branches` equal branches:
/// coordinate 0 is contracted by `contraction`, coordinate 1 expanded by
/// `expansion`. The maximal invariant set is the product of two self-similar
/// Cantor sets.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct UniformHorseshoe {
    pub branches: u32,
    pub contraction: f64,
    pub expansion: f64,
}

impl UniformHorseshoe {
    /// The horseshoe whose invariant set is the middle-thirds dust.
    pub fn middle_thirds() -> Self {
        Self { branches: 2, contraction: 1.0 / 3.0, expansion: 3.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.branches < 2 {
            return Err(Error::pre("a uniform horseshoe needs at least 2 branches"));
        }
        let l = self.branches as f64;
        if !(self.contraction > 0.0 && self.contraction * l <= 1.0) {
            return Err(Error::pre("contraction must lie in (0, 1/branches]"));
        }
        if !(self.expansion >= l && self.expansion.is_finite()) {
            return Err(Error::pre("expansion must be at least the number of branches"));
        }
        Ok(())
    }

    pub fn entropy(&self) -> f64 {
        (self.branches as f64).ln()
    }

    /// Left end of the unstable strip of branch `j`.
    fn strip(&self, j: u32) -> f64 {
        j as f64 * (1.0 - 1.0 / self.expansion) / (self.branches - 1) as f64
    }

    /// Left end of the stable image strip of branch `j`.
    fn image_strip(&self, j: u32) -> f64 {
        j as f64 * (1.0 - self.contraction) / (self.branches - 1) as f64
    }

    fn branch_of(&self, t: f64, width: f64, left: impl Fn(u32) -> f64) -> Option<u32> {
        (0..self.branches).find(|&j| {
            let a = left(j);
            t >= a - 1e-15 && t <= a + width + 1e-15
        })
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>> {
        let j = self
            .branch_of(x[1], 1.0 / self.expansion, |j| self.strip(j))
            .filter(|_| (0.0..=1.0).contains(&x[0]))
            .ok_or_else(|| out_of_chart(x))?;
        Ok(vec![self.contraction * x[0] + self.image_strip(j), self.expansion * (x[1] - self.strip(j))])
    }

    pub fn inverse_evaluate(&self, z: &[f64]) -> Result<Vec<f64>> {
        let j = self
            .branch_of(z[0], self.contraction, |j| self.image_strip(j))
            .filter(|_| (0.0..=1.0).contains(&z[1]))
            .ok_or_else(|| out_of_chart(z))?;
        Ok(vec![(z[0] - self.image_strip(j)) / self.contraction, z[1] / self.expansion + self.strip(j)])
    }

    /// `count` points of the invariant Cantor set, each carrying `depth`
    /// random digits per coordinate.
    pub fn attractor_cloud(&self, count: usize, depth: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut cloud = Vec::with_capacity(count);
        for _ in 0..count {
            let (mut s, mut u) = (0.0, 0.0);
            for _ in 0..depth {
                s = self.contraction * s + self.image_strip(rng.random_range(0..self.branches));
                u = u / self.expansion + self.strip(rng.random_range(0..self.branches));
            }
            cloud.push(vec![s, u]);
        }
        Ok(cloud)
    }
}

fn out_of_chart(x: &[f64]) -> Error {
    Error::pre(format!("point {x:?} is outside the horseshoe chart"))
}

impl SystemSpec {
    /// Arnold's cat map `[[2, 1], [1, 1]]`.
    pub fn cat_map() -> Self {
        SystemSpec::ToralAutomorphism { matrix: vec![vec![2, 1], vec![1, 1]] }
    }

    pub fn standard_map(k: f64) -> Self {
        SystemSpec::StandardMap { k }
    }

    pub fn rotation(angle: Vec<f64>) -> Self {
        SystemSpec::Rotation { angle }
    }

    pub fn full_shift(symbols: usize) -> Self {
        SystemSpec::Shift { matrix: TransitionMatrix::all_ones(symbols) }
    }

    pub fn golden_mean_shift() -> Self {
        SystemSpec::Shift { matrix: TransitionMatrix::golden_mean() }
    }

    pub fn middle_thirds() -> Self {
        SystemSpec::AffineHorseshoe(HorseshoeSource::Uniform(UniformHorseshoe::middle_thirds()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(Error::Json)
    }

    /// The shift, for symbolic estimators.
    pub fn as_shift(&self) -> Option<ShiftSystem> {
        match self {
            SystemSpec::Shift { matrix } => Some(ShiftSystem::new(matrix.clone())),
            _ => None,
        }
    }
}

/// A system ready for evaluation.
#[derive(Clone, Debug)]
pub enum System {
    Toral { matrix: SquareMatrix, inverse: SquareMatrix },
    StandardMap { k: f64 },
    Rotation { angle: Vec<f64> },
    Horseshoe(Box<AffineHorseshoeModel>),
    UniformHorseshoe(UniformHorseshoe),
    Shift(ShiftSystem),
}

impl System {
    pub fn new(spec: &SystemSpec) -> Result<Self> {
        Ok(match spec {
            SystemSpec::ToralAutomorphism { matrix } => {
                let d = matrix.len();
                if d == 0 || matrix.iter().any(|r| r.len() != d) {
                    return Err(Error::pre("params.matrix: toral matrix must be square and nonempty"));
                }
                let entries: Vec<f64> = matrix.iter().flatten().map(|&v| v as f64).collect();
                let m = SquareMatrix::from_row_major(d, &entries)?;
                let det = m.det().round();
                if det.abs() != 1.0 {
                    return Err(Error::pre(format!("params.matrix: |det| must be 1, got {det}")));
                }
                // The inverse of a unimodular integer matrix is integer.
                let inv = m.inverse()?.into_inner().map(f64::round);
                let id = m.as_matrix() * &inv;
                if id != DMatrix::identity(d, d) {
                    return Err(Error::num("integer inverse of the toral matrix is inexact"));
                }
                System::Toral { matrix: m, inverse: SquareMatrix::new(inv)? }
            }
            SystemSpec::StandardMap { k } => {
                if !k.is_finite() {
                    return Err(Error::pre("params.K must be finite"));
                }
                System::StandardMap { k: *k }
            }
            SystemSpec::Rotation { angle } => {
                if angle.is_empty() || angle.iter().any(|a| !a.is_finite()) {
                    return Err(Error::pre("params.angle must be a finite number or nonempty list"));
                }
                System::Rotation { angle: angle.clone() }
            }
            SystemSpec::Shift { matrix } => System::Shift(ShiftSystem::new(matrix.clone())),
            SystemSpec::AffineHorseshoe(HorseshoeSource::Model(p)) => {
                let s = derive_scales(p)?;
                System::Horseshoe(Box::new(assemble_model(p, &s)?))
            }
            SystemSpec::AffineHorseshoe(HorseshoeSource::Uniform(u)) => {
                u.validate()?;
                System::UniformHorseshoe(*u)
            }
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            System::Toral { matrix, .. } => matrix.dim(),
            System::StandardMap { .. } | System::UniformHorseshoe(_) => 2,
            System::Rotation { angle } => angle.len(),
            System::Horseshoe(m) => m.dim(),
            System::Shift(_) => 0,
        }
    }

    pub fn is_torus(&self) -> bool {
        matches!(self, System::Toral { .. } | System::StandardMap { .. } | System::Rotation { .. })
    }

    pub fn is_conservative(&self) -> bool {
        match self {
            System::Toral { .. } | System::StandardMap { .. } | System::Rotation { .. } => true,
            System::Horseshoe(m) => m.is_conservative(),
            System::UniformHorseshoe(u) => (u.contraction * u.expansion - 1.0).abs() <= 1e-12,
            System::Shift(_) => false,
        }
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if let System::Shift(_) = self {
            return Err(Error::pre("shift systems act on symbol sequences, not points"));
        }
        if x.len() != self.dim() {
            return Err(Error::pre(format!("point has dimension {}, system has {}", x.len(), self.dim())));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::pre("point has non-finite coordinates"));
        }
        Ok(())
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        Ok(match self {
            System::Toral { matrix, .. } => mat_vec_mod_one(matrix, x),
            System::StandardMap { k } => {
                let y = mod_one(x[1] + k / TAU * (TAU * x[0]).sin());
                vec![mod_one(x[0] + y), y]
            }
            System::Rotation { angle } => x.iter().zip(angle).map(|(a, b)| mod_one(a + b)).collect(),
            System::Horseshoe(m) => {
                if !m.in_chart(x) {
                    return Err(out_of_chart(x));
                }
                m.evaluate(x)
            }
            System::UniformHorseshoe(u) => u.evaluate(x)?,
            System::Shift(_) => unreachable!(),
        })
    }

    pub fn inverse_evaluate(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.check_point(z)?;
        Ok(match self {
            System::Toral { inverse, .. } => mat_vec_mod_one(inverse, z),
            System::StandardMap { k } => {
                let x = mod_one(z[0] - z[1]);
                vec![x, mod_one(z[1] - k / TAU * (TAU * x).sin())]
            }
            System::Rotation { angle } => z.iter().zip(angle).map(|(a, b)| mod_one(a - b)).collect(),
            System::Horseshoe(m) => {
                let x = m.inverse_evaluate(z);
                if !m.in_chart(&x) {
                    return Err(out_of_chart(z));
                }
                x
            }
            System::UniformHorseshoe(u) => u.inverse_evaluate(z)?,
            System::Shift(_) => unreachable!(),
        })
    }

    pub fn differential(&self, x: &[f64]) -> Result<SquareMatrix> {
        self.check_point(x)?;
        match self {
            System::Toral { matrix, .. } => Ok(matrix.clone()),
            System::StandardMap { k } => {
                let c = k * (TAU * x[0]).cos();
                SquareMatrix::from_row_major(2, &[1.0 + c, 1.0, c, 1.0])
            }
            System::Rotation { angle } => Ok(SquareMatrix::identity(angle.len())),
            System::Horseshoe(m) => {
                if !m.in_chart(x) {
                    return Err(out_of_chart(x));
                }
                SquareMatrix::new(m.differential(x))
            }
            System::UniformHorseshoe(u) => {
                u.evaluate(x)?;
                Ok(SquareMatrix::diag(&[u.contraction, u.expansion]))
            }
            System::Shift(_) => unreachable!(),
        }
    }

    /// `n` forward steps.
    pub fn iterate(&self, x: &[f64], n: usize) -> Result<Vec<f64>> {
        (0..n).try_fold(x.to_vec(), |y, _| self.evaluate(&y))
    }

    /// Euclidean distance, with each torus coordinate taken mod 1.
    pub fn distance(&self, x: &[f64], y: &[f64]) -> f64 {
        let torus = self.is_torus();
        x.iter()
            .zip(y)
            .map(|(a, b)| {
                let d = (a - b).abs();
                let d = if torus { d.min(1.0 - d) } else { d };
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Displacement `f(x) − y`, reduced to `[−1/2, 1/2)` on the torus.
    fn displacement(&self, fx: &[f64], y: &[f64]) -> Vec<f64> {
        fx.iter().zip(y).map(|(a, b)| if self.is_torus() { mod_one(a - b + 0.5) - 0.5 } else { a - b }).collect()
    }
}

/// `x mod 1` in `[0, 1)`.
pub fn mod_one(x: f64) -> f64 {
    let r = x - x.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

fn mat_vec_mod_one(m: &SquareMatrix, x: &[f64]) -> Vec<f64> {
    let m = m.as_matrix();
    (0..x.len()).map(|i| mod_one(x.iter().enumerate().map(|(j, v)| m[(i, j)] * v).sum())).collect()
}

/// Cocycle of differentials along a periodic orbit given by its points.
pub fn periodic_orbit_cocycle(sys: &System, orbit: &[Vec<f64>]) -> Result<PeriodicCocycle> {
    if orbit.is_empty() {
        return Err(Error::pre("orbit must contain at least one point"));
    }
    let l = orbit.len();
    let mut factors = Vec::with_capacity(l);
    for (i, p) in orbit.iter().enumerate() {
        let defect = sys.distance(&sys.evaluate(p)?, &orbit[(i + 1) % l]);
        if !(defect < PERIODIC_TOL) {
            return Err(Error::pre(format!("orbit is not periodic: closure defect {defect:e} after point {i}")));
        }
        factors.push(sys.differential(p)?);
    }
    PeriodicCocycle::new(factors)
}

/// Locate a periodic orbit of exact period dividing `period` by seeded
/// multi-start damped Newton iteration on `f^period(x) − x`.
///
/// Only orbits with closure defect below [`PERIODIC_TOL`] are returned.
pub fn find_periodic_orbit(sys: &System, period: usize, starts: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if period == 0 || starts == 0 {
        return Err(Error::pre("period and starts must be positive"));
    }
    if !sys.is_torus() {
        return Err(Error::pre("periodic orbit search runs on torus systems"));
    }
    let d = sys.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let residual = |x: &[f64]| -> Result<(Vec<f64>, f64)> {
        let r = sys.displacement(&sys.iterate(x, period)?, x);
        let norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        Ok((r, norm))
    };
    for _ in 0..starts {
        let mut x: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
        let (mut r, mut norm) = residual(&x)?;
        for _ in 0..100 {
            if norm < 1e-13 {
                break;
            }
            let mut jac = DMatrix::identity(d, d);
            let mut y = x.clone();
            for _ in 0..period {
                jac = sys.differential(&y)?.as_matrix() * jac;
                y = sys.evaluate(&y)?;
            }
            jac -= DMatrix::identity(d, d);
            let Some(step) = jac.lu().solve(&DVector::from_vec(r.clone())) else { break };
            let mut t = 1.0;
            let mut improved = false;
            while t > 1e-6 {
                let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, s)| mod_one(a - t * s)).collect();
                let (tr, tn) = residual(&trial)?;
                if tn < norm {
                    (x, r, norm, improved) = (trial, tr, tn, true);
                    break;
                }
                t *= 0.5;
            }
            if !improved {
                break;
            }
        }
        let orbit: Vec<Vec<f64>> =
            (0..period).scan(x.clone(), |y, _| Some(std::mem::replace(y, sys.evaluate(y).ok()?))).collect();
        if orbit.len() == period && periodic_orbit_cocycle(sys, &orbit).is_ok() {
            return Ok(orbit);
        }
    }
    Err(Error::num(format!("no orbit of period {period} found from {starts} starts")))
}

/// A subshift of finite type acting by the left shift on [`ShiftPoint`]s.
///
/// Symbolic Bowen balls use the bi-infinite metric `2^{−min |k|}`, so cells
/// of the Bowen partition are exactly the balls.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftSystem {
    matrix: TransitionMatrix,
}

/// Most words the exhaustive samplers will enumerate.
pub const MAX_EXHAUSTIVE_WORDS: usize = 1 << 24;

impl ShiftSystem {
    pub fn new(matrix: TransitionMatrix) -> Self {
        Self { matrix }
    }

    pub fn matrix(&self) -> &TransitionMatrix {
        &self.matrix
    }

    /// First symbol with a self-loop: used as the constant tails of samples.
    fn fill(&self) -> Result<u32> {
        (0..self.matrix.size())
            .find(|&s| self.matrix.get(s, s))
            .map(|s| s as u32)
            .ok_or_else(|| Error::pre("sampling needs a symbol with a self-loop for the tails"))
    }

    /// Every admissible point that is constant (the fill symbol) outside the
    /// positions `lo..=hi`.
    pub fn exhaustive_words(&self, lo: i64, hi: i64) -> Result<Vec<ShiftPoint>> {
        if hi < lo {
            return Err(Error::pre("empty sampling window"));
        }
        let f = self.fill()? as usize;
        let a = self.matrix.size();
        let len = (hi - lo + 1) as usize;
        let mut words: Vec<Vec<u32>> = (0..a).filter(|&s| self.matrix.get(f, s)).map(|s| vec![s as u32]).collect();
        for _ in 1..len {
            let mut next = Vec::new();
            for w in &words {
                let last = *w.last().unwrap() as usize;
                for s in (0..a).filter(|&s| self.matrix.get(last, s)) {
                    let mut v = w.clone();
                    v.push(s as u32);
                    next.push(v);
                }
            }
            if next.len() > MAX_EXHAUSTIVE_WORDS {
                return Err(Error::pre(format!("more than {MAX_EXHAUSTIVE_WORDS} words on a window of length {len}")));
            }
            words = next;
        }
        Ok(words
            .into_iter()
            .filter(|w| self.matrix.get(*w.last().unwrap() as usize, f))
            .map(|w| ShiftPoint::from_word(&w, lo, f as u32))
            .collect())
    }

    /// `count` points of the full shift with i.i.d. symbols of law `probs` on
    /// positions `lo..=hi`; outside the window the sequences are constant.
    pub fn bernoulli_words(&self, probs: &[f64], lo: i64, hi: i64, count: usize, seed: u64) -> Result<Vec<ShiftPoint>> {
        if !self.matrix.is_all_ones() || probs.len() != self.matrix.size() {
            return Err(Error::pre("Bernoulli samples need a full shift and one weight per symbol"));
        }
        if hi < lo {
            return Err(Error::pre("empty sampling window"));
        }
        let dist = WeightedIndex::new(probs).map_err(|e| Error::pre(format!("invalid weights: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let len = (hi - lo + 1) as usize;
        Ok((0..count)
            .map(|_| {
                let w: Vec<u32> = (0..len).map(|_| dist.sample(&mut rng) as u32).collect();
                ShiftPoint::from_word(&w, lo, 0)
            })
            .collect())
    }
}

/// Least `j ≥ 0` with `2^{−j}` inside the ball.
fn agreement_radius(ball: Ball) -> i64 {
    let mut j = 0;
    while !ball.contains(0.5f64.powi(j)) && j < 1100 {
        j += 1;
    }
    j as i64
}

impl SampledSystem for ShiftSystem {
    type State = ShiftPoint;

    fn forward(&self, x: &ShiftPoint) -> Result<ShiftPoint> {
        Ok(x.shifted(1))
    }

    fn backward(&self, x: &ShiftPoint) -> Result<ShiftPoint> {
        Ok(x.shifted(-1))
    }

    fn distance(&self, x: &ShiftPoint, y: &ShiftPoint) -> f64 {
        crate::symbolic::shift_metric(x, y)
    }

    fn horizon(&self) -> usize {
        usize::MAX
    }

    /// Symbols on `[−(J−1), n−1+(J−1)]` where `2^{−J}` is the largest
    /// distance inside the ball.
    fn bowen_cell(&self, orbit: &[ShiftPoint], ball: Ball) -> Cell {
        let j = agreement_radius(ball);
        if j == 0 {
            return Vec::new();
        }
        let x = &orbit[0];
        let n = orbit.len() as i64;
        (-(j - 1)..n + j - 1).map(|k| x.symbol(k) as i64).collect()
    }

    fn any_neighbor_cell(&self, cell: &Cell, _ball: Ball, hit: &mut dyn FnMut(&Cell) -> bool) -> bool {
        hit(cell)
    }

    fn cells_are_balls(&self) -> bool {
        true
    }

    fn ball_note(&self) -> &'static str {
        "bi-infinite symbolic Bowen ball, decided exactly"
    }
}

impl SampledSystem for System {
    type State = Vec<f64>;

    fn forward(&self, x: &Vec<f64>) -> Result<Vec<f64>> {
        self.evaluate(x)
    }

    fn backward(&self, x: &Vec<f64>) -> Result<Vec<f64>> {
        self.inverse_evaluate(x)
    }

    fn distance(&self, x: &Vec<f64>, y: &Vec<f64>) -> f64 {
        System::distance(self, x, y)
    }

    fn horizon(&self) -> usize {
        TORUS_HORIZON
    }

    /// Grid cell of the last orbit point, with side at least the radius.
    fn bowen_cell(&self, orbit: &[Vec<f64>], ball: Ball) -> Cell {
        let x = orbit.last().expect("nonempty orbit");
        let r = ball.radius();
        if self.is_torus() {
            let m = (1.0 / r).floor().max(1.0);
            if m < 3.0 {
                return Vec::new();
            }
            x.iter().map(|&v| ((v * m).floor() as i64).rem_euclid(m as i64)).collect()
        } else {
            x.iter().map(|&v| (v / r).floor() as i64).collect()
        }
    }

    /// Visits the `3^d` cells around `cell`. Torus cells come from at least
    /// three classes per axis, so the wrap creates no repeats.
    fn any_neighbor_cell(&self, cell: &Cell, ball: Ball, hit: &mut dyn FnMut(&Cell) -> bool) -> bool {
        let m = self.is_torus().then(|| (1.0 / ball.radius()).floor() as i64);
        let mut nc = cell.clone();
        (0..3usize.pow(cell.len() as u32)).any(|mut code| {
            for (slot, &c) in nc.iter_mut().zip(cell) {
                let o = [0, -1, 1][code % 3];
                code /= 3;
                *slot = m.map_or(c + o, |m| (c + o).rem_euclid(m));
            }
            hit(&nc)
        })
    }

    fn ball_note(&self) -> &'static str {
        "forward (N, eps) Bowen ball on sampled points"
    }
}
