//! Ulam discretisation of transfer operators and the spectral and
//! stochastic diagnostics built on it.

mod stochastic;
mod ulam;

pub use stochastic::{
    correlation_decay, empirical_deviation_probe, CorrelationReport, CorrelationStatus, DeviationFit, DeviationProbe,
};
pub use ulam::{
    build_ulam, leading_eigen, perturbed_leading_eigenvalue, spectral_gap, spectral_report, BuildMethod, GapEstimate,
    LambdaPoint, LeadingEigen, SpectralReport, UlamOperator,
};

use crate::dynamics::DynamicsError;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpectralError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("slow spectral convergence: residual {residual:e} after {iterations} iterations")]
    SlowConvergence { iterations: usize, residual: f64 },
    #[error("observable is not centred: stationary mean {0:e}")]
    NotCentered(f64),
    #[error("all mass below smallest u: no exceedances on the grid")]
    NoExceedances,
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

pub type Result<T> = std::result::Result<T, SpectralError>;

/// A step function constant on the `k` uniform bins of `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinFunction {
    values: Vec<f64>,
}

impl BinFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return Err(SpectralError::InvalidInput("bin function needs finite values on at least one bin".into()));
        }
        Ok(BinFunction { values })
    }

    /// Bin averages of `f` sampled at bin midpoints.
    pub fn from_fn(k: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new((0..k).map(|i| f((i as f64 + 0.5) / k as f64)).collect())
    }

    /// `1_[0, 1/2) - 1/2` on `k` bins (`k` even).
    pub fn coin(k: usize) -> Result<Self> {
        if k < 2 || !k.is_multiple_of(2) {
            return Err(SpectralError::InvalidInput(format!("coin observable needs an even bin count, got {k}")));
        }
        Self::new((0..k).map(|i| if i < k / 2 { 0.5 } else { -0.5 }).collect())
    }

    pub fn bins(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        let k = self.values.len();
        self.values[((x * k as f64) as usize).min(k - 1)]
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn variation(&self) -> f64 {
        self.values.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
    }

    /// `|phi|_inf + V(phi)`.
    pub fn bv_norm(&self) -> f64 {
        self.sup() + self.variation()
    }

    /// Lebesgue `L^1` norm.
    pub fn l1(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum::<f64>() / self.values.len() as f64
    }

    /// Mean against bin masses `w` on the same bins.
    pub fn mean_against(&self, w: &[f64]) -> f64 {
        self.values.iter().zip(w).map(|(v, w)| v * w).sum()
    }

    /// `phi - mean_against(w)`.
    pub fn centered(&self, w: &[f64]) -> Self {
        let m = self.mean_against(w);
        BinFunction { values: self.values.iter().map(|v| v - m).collect() }
    }
}
