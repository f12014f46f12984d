use serde::Serialize;

/// Sup of |Φ|, reached inside the transition arcs.
pub const PHI_SUP: f64 = 0.263_374_485_596_707_8;
/// Sup of |Φ′|, reached at the middle of each transition arc.
pub const PHI_LIPSCHITZ: f64 = 16.0 / 9.0;

/// The oscillation profile `Φ` with `L` bumps.
///
/// On each cell `[j − 1/2, j + 1/2]`, `j < L`, it is the identity on
/// `|t| ≤ 1/4` (with `t = x − j`) and a cubic Hermite arc down to a flat zero
/// at `|t| = 1/2`; it vanishes outside `[−1/2, L − 1/2]`. The arcs are the
/// same for every `L`, so both sup norms are `L`-independent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OscillationProfile {
    l: f64,
}

/// Arc on `[1/4, 1/2]`: value `1/4`, slope 1 at the left end, value and slope 0 at the right.
fn arc(t: f64) -> (f64, f64) {
    let s = 4.0 * (t - 0.25);
    let v = (3.0 * s * s * s - 5.0 * s * s + s + 1.0) / 4.0;
    let dv = 9.0 * s * s - 10.0 * s + 1.0;
    (v, dv)
}

impl OscillationProfile {
    /// `l` is the number of bumps; it may exceed the exactly representable
    /// integers, in which case the support edge is only approximate.
    pub fn new(l: f64) -> Self {
        assert!(l >= 2.0, "profile needs at least two bumps");
        Self { l }
    }

    pub fn bumps(&self) -> f64 {
        self.l
    }

    fn local(&self, x: f64) -> Option<f64> {
        if x <= -0.5 || x >= self.l - 0.5 {
            return None;
        }
        Some(x - x.round())
    }

    /// `(Φ(x), Φ′(x))`.
    pub fn eval_with_derivative(&self, x: f64) -> (f64, f64) {
        let Some(t) = self.local(x) else { return (0.0, 0.0) };
        if t.abs() <= 0.25 {
            (t, 1.0)
        } else if t > 0.0 {
            arc(t)
        } else {
            let (v, dv) = arc(-t);
            (-v, dv)
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval_with_derivative(x).0
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.eval_with_derivative(x).1
    }
}

/// `Φ` for `L` bumps.
pub fn oscillation_profile(l: u64) -> OscillationProfile {
    OscillationProfile::new(l as f64)
}
