use nalgebra::DMatrix;
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use super::profile::OscillationProfile;
use super::scales::{biguint_string, ConstructionParams, DerivedScales};
use crate::{Error, Result};

/// A real number stored as sign and log-magnitude; `sign == 0` is zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LogReal {
    pub sign: f64,
    pub log_abs: f64,
}

impl LogReal {
    pub const ZERO: LogReal = LogReal { sign: 0.0, log_abs: 0.0 };
    pub const ONE: LogReal = LogReal { sign: 1.0, log_abs: 0.0 };

    pub fn new(sign: f64, log_abs: f64) -> Self {
        if sign == 0.0 {
            Self::ZERO
        } else {
            Self { sign: sign.signum(), log_abs }
        }
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            Self::new(x.signum(), x.abs().ln())
        }
    }

    pub fn value(self) -> f64 {
        if self.sign == 0.0 {
            0.0
        } else {
            self.sign * self.log_abs.exp()
        }
    }

    pub fn mul(self, o: LogReal) -> Self {
        Self::new(self.sign * o.sign, self.log_abs + o.log_abs)
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0.0
    }
}

/// One piece of the return map, in the local coordinates around the orbit.
/// Coordinates are 0-based here.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum Piece {
    /// `steps` iterates of the linear saddle: `x_i ↦ e^{λ_i·steps} x_i`.
    Homothety { steps: u64, rates: Vec<f64> },
    /// `x_target ↦ x_target + c·x_source`, then `x ↦ x + offset`.
    Shear { target: usize, source: usize, coefficient: LogReal, offset: Vec<f64> },
    /// The tangency transit: `e_i ↦ μ_i e_{i+1}` (cyclic), over `steps` iterates.
    Transfer { steps: u64, mu: Vec<f64> },
    /// `x_target ↦ x_target − A·Φ(r·x_source)` with `A = amplitude`, `r = e^{log_rate}`.
    Oscillation { target: usize, source: usize, amplitude: LogReal, log_rate: f64, bumps: f64 },
}

impl Piece {
    pub fn steps(&self) -> u64 {
        match self {
            Piece::Homothety { steps, .. } | Piece::Transfer { steps, .. } => *steps,
            _ => 0,
        }
    }

    /// `log|det|` of the piece (of its derivative, for the oscillation).
    pub fn log_abs_det(&self) -> f64 {
        match self {
            Piece::Homothety { steps, rates } => *steps as f64 * rates.iter().sum::<f64>(),
            Piece::Transfer { mu, .. } => mu.iter().map(|m| m.abs().ln()).sum(),
            Piece::Shear { .. } | Piece::Oscillation { .. } => 0.0,
        }
    }

    pub fn apply(&self, x: &mut [f64]) {
        match self {
            Piece::Homothety { steps, rates } => {
                for (xi, r) in x.iter_mut().zip(rates) {
                    *xi *= (r * *steps as f64).exp();
                }
            }
            Piece::Shear { target, source, coefficient, offset } => {
                x[*target] += coefficient.value() * x[*source];
                for (xi, a) in x.iter_mut().zip(offset) {
                    *xi += a;
                }
            }
            Piece::Transfer { mu, .. } => {
                let d = x.len();
                let old = x.to_vec();
                for i in 0..d {
                    x[(i + 1) % d] = mu[i] * old[i];
                }
            }
            Piece::Oscillation { target, source, amplitude, log_rate, bumps } => {
                if amplitude.is_zero() {
                    return;
                }
                let phi = OscillationProfile::new(*bumps);
                x[*target] -= amplitude.value() * phi.eval(log_rate.exp() * x[*source]);
            }
        }
    }

    /// Exact inverse of [`Piece::apply`].
    pub fn apply_inverse(&self, x: &mut [f64]) {
        match self {
            Piece::Homothety { steps, rates } => {
                for (xi, r) in x.iter_mut().zip(rates) {
                    *xi *= (-r * *steps as f64).exp();
                }
            }
            Piece::Shear { target, source, coefficient, offset } => {
                for (xi, a) in x.iter_mut().zip(offset) {
                    *xi -= a;
                }
                x[*target] -= coefficient.value() * x[*source];
            }
            Piece::Transfer { mu, .. } => {
                let d = x.len();
                let old = x.to_vec();
                for i in 0..d {
                    x[i] = old[(i + 1) % d] / mu[i];
                }
            }
            Piece::Oscillation { target, source, amplitude, log_rate, bumps } => {
                if amplitude.is_zero() {
                    return;
                }
                let phi = OscillationProfile::new(*bumps);
                x[*target] += amplitude.value() * phi.eval(log_rate.exp() * x[*source]);
            }
        }
    }

    /// Derivative of the piece at `x`.
    pub fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let d = x.len();
        let mut j = DMatrix::identity(d, d);
        match self {
            Piece::Homothety { steps, rates } => {
                for (i, r) in rates.iter().enumerate() {
                    j[(i, i)] = (r * *steps as f64).exp();
                }
            }
            Piece::Shear { target, source, coefficient, .. } => j[(*target, *source)] += coefficient.value(),
            Piece::Transfer { mu, .. } => {
                j.fill(0.0);
                for i in 0..d {
                    j[((i + 1) % d, i)] = mu[i];
                }
            }
            Piece::Oscillation { target, source, amplitude, log_rate, bumps } => {
                if !amplitude.is_zero() {
                    let phi = OscillationProfile::new(*bumps);
                    let r = log_rate.exp();
                    j[(*target, *source)] -= amplitude.value() * r * phi.derivative(r * x[*source]);
                }
            }
        }
        j
    }
}

/// The piecewise-affine local model of one return to the rectangle `R`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AffineHorseshoeModel {
    pub params: ConstructionParams,
    /// Number of oscillation branches.
    #[serde(with = "biguint_string")]
    pub l: BigUint,
    pub log_l: f64,
    pub log_delta: f64,
    pub log_lambda_cap: Vec<f64>,
    pub lambda_cap_sign: Vec<f64>,
    /// `log δ_i`: the model's chart is the box `∏ [−δ_i, δ_i]`.
    pub log_delta_sides: Vec<f64>,
    pub pieces: Vec<Piece>,
}

/// Build the model: `ℓ` homothety steps, the first shear, `n` steps, the
/// transit, the oscillation, `n` steps and the second shear.
///
/// The model takes `η` from `p` and the branch count from `s`, so pairing
/// parameters with scales derived for a different `η` yields a model that
/// violates the `L` bound.
pub fn assemble_model(p: &ConstructionParams, s: &DerivedScales) -> Result<AffineHorseshoeModel> {
    p.validate()?;
    let d = p.d0;
    if s.log_lambda_cap.len() != d || s.log_delta_sides.len() != d {
        return Err(Error::pre("scales were derived for a different dimension"));
    }
    let k = p.k;
    let n = p.n as f64;
    let rates = p.lambda.exponents().to_vec();
    let eta = p.eta.ln();
    let shear1 = LogReal::new(
        (p.mu[k - 1] / p.mu[d - 1]).signum(),
        -eta + n * (p.lam(k - 1) - p.lam(d - 1)) + p.mu[k - 1].abs().ln() - p.mu[d - 1].abs().ln(),
    );
    let amplitude = LogReal::new(1.0, eta - n * p.lam(0) + s.log_delta - s.log_l);
    let log_rate = n * p.lam(0) + s.log_l - s.log_delta;
    let shear2 = LogReal::new(1.0, -eta + n * (p.lam(0) - p.lam(k)));
    let zeros = vec![0.0; d];
    let pieces = vec![
        Piece::Homothety { steps: p.ell, rates: rates.clone() },
        Piece::Shear { target: d - 1, source: k - 1, coefficient: shear1, offset: zeros.clone() },
        Piece::Homothety { steps: p.n, rates: rates.clone() },
        Piece::Transfer { steps: p.m, mu: p.mu.clone() },
        Piece::Oscillation { target: k, source: 0, amplitude, log_rate, bumps: s.log_l.exp() },
        Piece::Homothety { steps: p.n, rates },
        Piece::Shear { target: 0, source: k, coefficient: shear2, offset: p.translation.clone().unwrap_or(zeros) },
    ];
    Ok(AffineHorseshoeModel {
        params: p.clone(),
        l: s.l.clone(),
        log_l: s.log_l,
        log_delta: s.log_delta,
        log_lambda_cap: s.log_lambda_cap.clone(),
        lambda_cap_sign: s.lambda_cap_sign.clone(),
        log_delta_sides: s.log_delta_sides.clone(),
        pieces,
    })
}

/// The affine return map on the branch through `R^s_j`, in absolute
/// coordinates: `z_i = c_i·x_{σ(i)} + b_i`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BranchMap {
    pub j: u64,
    /// `(target, source, coefficient)` rows of the weighted permutation.
    pub linear: Vec<(usize, usize, LogReal)>,
    pub offset: Vec<f64>,
}

impl BranchMap {
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut z = self.offset.clone();
        for &(t, s, c) in &self.linear {
            z[t] += c.value() * x[s];
        }
        z
    }
}

impl AffineHorseshoeModel {
    pub fn dim(&self) -> usize {
        self.params.d0
    }

    pub fn return_time(&self) -> u64 {
        self.pieces.iter().map(Piece::steps).sum()
    }

    /// Iterate the pieces one by one in floating point. Only meaningful while
    /// the intermediate coordinates stay in range.
    pub fn evaluate(&self, x: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        for p in &self.pieces {
            p.apply(&mut y);
        }
        y
    }

    /// Inverse of [`AffineHorseshoeModel::evaluate`], pieces undone in reverse.
    pub fn inverse_evaluate(&self, z: &[f64]) -> Vec<f64> {
        let mut y = z.to_vec();
        for p in self.pieces.iter().rev() {
            p.apply_inverse(&mut y);
        }
        y
    }

    /// Derivative of the return map at `x` by the chain rule over the pieces.
    pub fn differential(&self, x: &[f64]) -> DMatrix<f64> {
        let d = x.len();
        let mut y = x.to_vec();
        let mut j = DMatrix::identity(d, d);
        for p in &self.pieces {
            j = p.jacobian(&y) * j;
            p.apply(&mut y);
        }
        j
    }

    /// `x` lies in the chart `∏ [−δ_i, δ_i]`, up to a relative slack `1e-9`.
    pub fn in_chart(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().zip(&self.log_delta_sides).all(|(xi, ld)| xi.abs() <= ld.exp() * (1.0 + 1e-9))
    }

    pub fn piece_log_dets(&self) -> Vec<f64> {
        self.pieces.iter().map(Piece::log_abs_det).collect()
    }

    /// Every piece preserves volume to `1e-9`.
    pub fn is_conservative(&self) -> bool {
        self.piece_log_dets().iter().all(|l| l.abs() <= 1e-9)
    }

    /// The same model with both shears and the oscillation switched off.
    pub fn linear_limit(&self) -> Self {
        let mut m = self.clone();
        for p in &mut m.pieces {
            match p {
                Piece::Shear { coefficient, offset, .. } => {
                    *coefficient = LogReal::ZERO;
                    offset.iter_mut().for_each(|a| *a = 0.0);
                }
                Piece::Oscillation { amplitude, .. } => *amplitude = LogReal::ZERO,
                _ => {}
            }
        }
        m
    }

    fn cap(&self, i: usize) -> LogReal {
        LogReal::new(self.lambda_cap_sign[i], self.log_lambda_cap[i])
    }

    /// `ln(η e^{(λ_{k+1}−λ_1)n})`.
    fn log_expansion(&self) -> f64 {
        let p = &self.params;
        p.eta.ln() + p.n as f64 * (p.lam(p.k) - p.lam(0))
    }

    /// Closed form of the return map on branch `j`.
    pub fn branch_map(&self, j: u64) -> BranchMap {
        let p = &self.params;
        let (d, k) = (p.d0, p.k);
        let g = self.log_expansion();
        let mut linear = Vec::with_capacity(d);
        linear.push((0, k - 1, LogReal::new(1.0, -g).mul(self.cap(k - 1))));
        for i in 1..d {
            if i == k {
                linear.push((k, d - 1, LogReal::new(-1.0, g).mul(self.cap(d - 1))));
            } else {
                linear.push((i, i - 1, self.cap(i - 1)));
            }
        }
        let mut offset = p.translation.clone().unwrap_or_else(|| vec![0.0; d]);
        let step = (j as f64).ln() + self.log_delta - self.log_l;
        if j > 0 {
            offset[0] += step.exp();
            offset[k] += (g + step).exp();
        }
        BranchMap { j, linear, offset }
    }

    /// Per-step Lyapunov exponents of the horseshoe, sorted: the linear part of
    /// every branch is the same weighted permutation, so each cycle of the
    /// permutation contributes its mean log coefficient divided by the return time.
    pub fn return_exponents(&self) -> Vec<f64> {
        let map = self.branch_map(0);
        let d = self.dim();
        let mut source = vec![0; d];
        let mut log_c = vec![0.0; d];
        for &(t, s, c) in &map.linear {
            source[t] = s;
            log_c[t] = c.log_abs;
        }
        let time = self.return_time() as f64;
        let mut seen = vec![false; d];
        let mut out = Vec::with_capacity(d);
        for start in 0..d {
            if seen[start] {
                continue;
            }
            let (mut i, mut len, mut sum) = (start, 0usize, 0.0);
            while !seen[i] {
                seen[i] = true;
                sum += log_c[i];
                len += 1;
                i = source[i];
            }
            out.extend(std::iter::repeat_n(sum / (len as f64 * time), len));
        }
        out.sort_by(f64::total_cmp);
        out
    }

    /// Pieces as affine maps with their branch predicates, for export.
    pub fn affine_pieces(&self) -> Vec<AffinePieceDoc> {
        let d = self.dim();
        let identity = || {
            let mut m = vec![vec![LogReal::ZERO; d]; d];
            (0..d).for_each(|i| m[i][i] = LogReal::ONE);
            m
        };
        let mut out = Vec::new();
        for p in &self.pieces {
            match p {
                Piece::Homothety { steps, rates } => {
                    let mut m = identity();
                    (0..d).for_each(|i| m[i][i] = LogReal::new(1.0, rates[i] * *steps as f64));
                    out.push(AffinePieceDoc::plain("homothety", *steps, m, vec![0.0; d]));
                }
                Piece::Shear { target, source, coefficient, offset } => {
                    let mut m = identity();
                    m[*target][*source] = *coefficient;
                    out.push(AffinePieceDoc::plain("shear", 0, m, offset.clone()));
                }
                Piece::Transfer { steps, mu } => {
                    let mut m = vec![vec![LogReal::ZERO; d]; d];
                    (0..d).for_each(|i| m[(i + 1) % d][i] = LogReal::from_f64(mu[i]));
                    out.push(AffinePieceDoc::plain("transfer", *steps, m, vec![0.0; d]));
                }
                Piece::Oscillation { target, source, amplitude, log_rate, .. } => {
                    let mut m = identity();
                    m[*target][*source] = LogReal::new(-1.0, amplitude.log_abs + log_rate);
                    if amplitude.is_zero() {
                        m[*target][*source] = LogReal::ZERO;
                    }
                    let mut per = vec![LogReal::ZERO; d];
                    per[*target] = *amplitude;
                    let rate = format!("e^{log_rate:.6}");
                    out.push(AffinePieceDoc {
                        kind: "oscillation".into(),
                        steps: 0,
                        matrix: m,
                        offset: vec![0.0; d],
                        offset_per_branch: Some(per),
                        branch: format!("|{rate}·x_{} − j| ≤ 1/4 for some 0 ≤ j < L", source + 1),
                    });
                    out.push(AffinePieceDoc {
                        kind: "oscillation".into(),
                        steps: 0,
                        matrix: identity(),
                        offset: vec![0.0; d],
                        offset_per_branch: None,
                        branch: format!("{rate}·x_{} ≤ −1/2 or ≥ L − 1/2", source + 1),
                    });
                }
            }
        }
        out
    }
}

/// An affine piece `x ↦ Mx + b (+ j·b_j on branch j)` with its domain.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AffinePieceDoc {
    pub kind: String,
    pub steps: u64,
    pub matrix: Vec<Vec<LogReal>>,
    pub offset: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offset_per_branch: Option<Vec<LogReal>>,
    pub branch: String,
}

impl AffinePieceDoc {
    fn plain(kind: &str, steps: u64, matrix: Vec<Vec<LogReal>>, offset: Vec<f64>) -> Self {
        Self { kind: kind.into(), steps, matrix, offset, offset_per_branch: None, branch: "everywhere".into() }
    }
}
