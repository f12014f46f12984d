use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Lyapunov exponents (nats per iteration) sorted in nondecreasing order,
/// repeated according to multiplicity.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ExponentSpectrum(Vec<f64>);

impl ExponentSpectrum {
    pub fn new(mut exponents: Vec<f64>) -> Result<Self> {
        if exponents.is_empty() {
            return Err(Error::pre("spectrum must be nonempty"));
        }
        if exponents.iter().any(|x| !x.is_finite()) {
            return Err(Error::pre("spectrum has non-finite exponents"));
        }
        exponents.sort_by(f64::total_cmp);
        Ok(Self(exponents))
    }

    pub fn exponents(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Spectrum of the inverse map: negated and re-sorted.
    pub fn reversed(&self) -> Self {
        let mut v: Vec<f64> = self.0.iter().map(|x| -x).collect();
        v.sort_by(f64::total_cmp);
        Self(v)
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.0.iter().map(|x| c * x).collect())
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }
}

impl<'de> Deserialize<'de> for ExponentSpectrum {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        ExponentSpectrum::new(v).map_err(serde::de::Error::custom)
    }
}
