use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Half-integer Matérn smoothness levels with closed-form correlations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Smoothness {
    #[serde(rename = "1/2")]
    Half,
    #[serde(rename = "3/2")]
    ThreeHalves,
    #[serde(rename = "5/2")]
    FiveHalves,
}

impl Smoothness {
    pub fn nu(self) -> f64 {
        match self {
            Smoothness::Half => 0.5,
            Smoothness::ThreeHalves => 1.5,
            Smoothness::FiveHalves => 2.5,
        }
    }
}

/// Isotropic Matérn covariance `amplitude * rho(|u1 - u2| / lengthscale)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub smoothness: Smoothness,
    pub lengthscale: f64,
    pub amplitude: f64,
}

impl KernelSpec {
    pub fn new(smoothness: Smoothness, lengthscale: f64, amplitude: f64) -> Result<Self> {
        let spec = KernelSpec {
            smoothness,
            lengthscale,
            amplitude,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lengthscale > 0.0 && self.lengthscale.is_finite()) {
            return Err(Error::invalid(format!(
                "lengthscale must be positive and finite, got {}",
                self.lengthscale
            )));
        }
        if !(self.amplitude > 0.0 && self.amplitude.is_finite()) {
            return Err(Error::invalid(format!(
                "amplitude must be positive and finite, got {}",
                self.amplitude
            )));
        }
        Ok(())
    }

    /// Correlation at Euclidean distance `r`.
    #[inline]
    pub fn correlation(&self, r: f64) -> f64 {
        let s = r / self.lengthscale;
        match self.smoothness {
            Smoothness::Half => (-s).exp(),
            Smoothness::ThreeHalves => {
                let t = 3f64.sqrt() * s;
                (1.0 + t) * (-t).exp()
            }
            Smoothness::FiveHalves => {
                let t = 5f64.sqrt() * s;
                (1.0 + t + t * t / 3.0) * (-t).exp()
            }
        }
    }

    /// Covariance between two points of equal length; no dimension check.
    #[inline]
    pub(crate) fn cov(&self, u1: &[f64], u2: &[f64]) -> f64 {
        let r2: f64 = u1.iter().zip(u2).map(|(a, b)| (a - b) * (a - b)).sum();
        self.amplitude * self.correlation(r2.sqrt())
    }
}

/// Kernel value between two points.
pub fn kernel_eval(spec: &KernelSpec, u1: &[f64], u2: &[f64]) -> Result<f64> {
    if u1.len() != u2.len() {
        return Err(Error::invalid(format!(
            "kernel arguments have dimensions {} and {}",
            u1.len(),
            u2.len()
        )));
    }
    Ok(spec.cov(u1, u2))
}
