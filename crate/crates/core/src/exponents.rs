//! Exponent functionals of a periodic orbit.
//!
//! `Δ⁺ = Σ λ_i⁺`, `Δ⁻ = Σ λ_i⁻`, `Δ = min(Δ⁺, Δ⁻)`; the restricted variant
//! applies the same to a contiguous block of the sorted spectrum, and `Δ*`
//! is the maximum of the restricted values over a family of orbits and the
//! blocks of their splittings.

use std::collections::BTreeMap;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::linalg::{lyapunov_exponents_periodic, ExponentSpectrum, PeriodicCocycle};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DeltaReport {
    pub delta_plus: f64,
    pub delta_minus: f64,
    pub delta: f64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub restricted_deltas: BTreeMap<String, f64>,
}

/// Ordered partition of the exponent indices `0..d` into contiguous blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplittingLabel {
    blocks: Vec<Range<usize>>,
}

impl SplittingLabel {
    pub fn new(dim: usize, blocks: Vec<Range<usize>>) -> Result<Self> {
        let mut next = 0;
        for b in &blocks {
            if b.start != next || b.end <= b.start {
                return Err(Error::pre(format!(
                    "splitting blocks must be nonempty, contiguous and ordered; bad block {b:?}"
                )));
            }
            next = b.end;
        }
        if next != dim {
            return Err(Error::pre(format!("splitting covers 0..{next} but dimension is {dim}")));
        }
        Ok(Self { blocks })
    }

    pub fn trivial(dim: usize) -> Self {
        Self { blocks: vec![0..dim] }
    }

    /// Blocks between consecutive cut indices (a cut `i` separates `0..i` from `i..`).
    pub fn from_cuts(dim: usize, cuts: &[usize]) -> Result<Self> {
        let mut edges = vec![0];
        edges.extend_from_slice(cuts);
        edges.push(dim);
        Self::new(dim, edges.windows(2).map(|w| w[0]..w[1]).collect())
    }

    pub fn blocks(&self) -> &[Range<usize>] {
        &self.blocks
    }

    pub fn dim(&self) -> usize {
        self.blocks.last().map_or(0, |b| b.end)
    }
}

fn plus_minus(exponents: &[f64]) -> (f64, f64) {
    exponents.iter().fold((0.0, 0.0), |(p, m), &x| (p + x.max(0.0), m + (-x).max(0.0)))
}

pub fn delta(spec: &ExponentSpectrum) -> DeltaReport {
    let (delta_plus, delta_minus) = plus_minus(spec.exponents());
    DeltaReport { delta_plus, delta_minus, delta: delta_plus.min(delta_minus), restricted_deltas: BTreeMap::new() }
}

/// `Δ` of the sub-spectrum `block` (0-based, half-open).
pub fn delta_restricted(spec: &ExponentSpectrum, block: Range<usize>) -> Result<f64> {
    if block.start >= block.end || block.end > spec.dim() {
        return Err(Error::pre(format!("block {block:?} is empty or outside 0..{}", spec.dim())));
    }
    let (p, m) = plus_minus(&spec.exponents()[block]);
    Ok(p.min(m))
}

/// Full report including one restricted value per block, labelled `"a..b"`.
pub fn delta_with_splitting(spec: &ExponentSpectrum, splitting: &SplittingLabel) -> Result<DeltaReport> {
    if splitting.dim() != spec.dim() {
        return Err(Error::pre("splitting and spectrum dimensions differ"));
    }
    let mut report = delta(spec);
    for b in splitting.blocks() {
        report.restricted_deltas.insert(format!("{}..{}", b.start, b.end), delta_restricted(spec, b.clone())?);
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeltaStar {
    pub value: f64,
    /// Set when the family was empty and the value defaulted to zero.
    pub empty_family: bool,
}

/// Maximum of `Δ_{E_i}` over the given spectra and their splitting blocks.
///
/// On a finite family this is a lower bound for the supremum over all
/// periodic orbits.
pub fn delta_star_spectra(family: &[(ExponentSpectrum, SplittingLabel)]) -> Result<DeltaStar> {
    if family.is_empty() {
        return Ok(DeltaStar { value: 0.0, empty_family: true });
    }
    let mut best = 0.0f64;
    for (spec, split) in family {
        if split.dim() != spec.dim() {
            return Err(Error::pre("splitting and spectrum dimensions differ"));
        }
        for b in split.blocks() {
            best = best.max(delta_restricted(spec, b.clone())?);
        }
    }
    Ok(DeltaStar { value: best, empty_family: false })
}

pub fn delta_star(family: &[(PeriodicCocycle, SplittingLabel)]) -> Result<DeltaStar> {
    let spectra =
        family.iter().map(|(c, s)| Ok((lyapunov_exponents_periodic(c)?, s.clone()))).collect::<Result<Vec<_>>>()?;
    delta_star_spectra(&spectra)
}

/// `Δ(spec) − h`; negative values flag an estimate above the Ruelle bound.
pub fn ruelle_gap(entropy_estimate: f64, spec: &ExponentSpectrum) -> Result<f64> {
    if !(entropy_estimate >= 0.0) {
        return Err(Error::pre(format!("entropy estimate must be ≥ 0, got {entropy_estimate}")));
    }
    Ok(delta(spec).delta - entropy_estimate)
}
