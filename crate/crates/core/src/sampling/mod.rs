//! Coordinate-sampling distributions and the sum-tree that draws from them.

mod sumtree;

pub use sumtree::{linear_scan_sample, SumTree};

use rand::Rng;

use crate::error::{Error, Result};

/// Weights below this fraction of the largest weight are treated as exact zeros.
pub const FLUSH_RTOL: f64 = 1e-14;

pub const DEFAULT_SIGMA: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Refresh {
    Static,
    PerEpoch,
    PerIteration,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SamplingScheme {
    Uniform,
    SupportsetUniform,
    Adaptive,
    AdaUniform { sigma: f64 },
    Importance,
    AdaGap,
    GapPerEpoch,
}

impl SamplingScheme {
    /// All seven schemes in catalogue order.
    pub fn all(sigma: f64) -> [SamplingScheme; 7] {
        [
            SamplingScheme::Uniform,
            SamplingScheme::SupportsetUniform,
            SamplingScheme::Adaptive,
            SamplingScheme::AdaUniform { sigma },
            SamplingScheme::Importance,
            SamplingScheme::AdaGap,
            SamplingScheme::GapPerEpoch,
        ]
    }

    pub fn parse(name: &str, sigma: f64) -> Result<Self> {
        let scheme = match name.replace('-', "_").to_ascii_lowercase().as_str() {
            "uniform" => SamplingScheme::Uniform,
            "supportset_uniform" | "supportset" => SamplingScheme::SupportsetUniform,
            "adaptive" => SamplingScheme::Adaptive,
            "ada_uniform" => SamplingScheme::AdaUniform { sigma },
            "importance" => SamplingScheme::Importance,
            "ada_gap" => SamplingScheme::AdaGap,
            "gap_per_epoch" => SamplingScheme::GapPerEpoch,
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "unknown sampling scheme {name:?}"
                )))
            }
        };
        if !(0.0..=1.0).contains(&sigma) {
            return Err(Error::InvalidArgument(format!(
                "sigma {sigma} not in [0, 1]"
            )));
        }
        Ok(scheme)
    }

    pub fn name(&self) -> &'static str {
        match self {
            SamplingScheme::Uniform => "uniform",
            SamplingScheme::SupportsetUniform => "supportset_uniform",
            SamplingScheme::Adaptive => "adaptive",
            SamplingScheme::AdaUniform { .. } => "ada_uniform",
            SamplingScheme::Importance => "importance",
            SamplingScheme::AdaGap => "ada_gap",
            SamplingScheme::GapPerEpoch => "gap_per_epoch",
        }
    }

    pub fn refresh(&self) -> Refresh {
        match self {
            SamplingScheme::Uniform | SamplingScheme::Importance => Refresh::Static,
            SamplingScheme::GapPerEpoch => Refresh::PerEpoch,
            _ => Refresh::PerIteration,
        }
    }

    pub fn needs_residuals(&self) -> bool {
        matches!(
            self,
            SamplingScheme::SupportsetUniform
                | SamplingScheme::Adaptive
                | SamplingScheme::AdaUniform { .. }
        )
    }

    pub fn needs_gaps(&self) -> bool {
        matches!(self, SamplingScheme::AdaGap | SamplingScheme::GapPerEpoch)
    }
}

/// Per-coordinate inputs a distribution may draw on. Unused fields may be empty.
#[derive(Debug, Clone, Copy, Default)]
pub struct DistributionInputs<'a> {
    pub kappa: &'a [f64],
    pub gaps: &'a [f64],
    pub col_norms: &'a [f64],
    pub lipschitz: &'a [f64],
}

/// Nonnegative weights with their cached sum.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector {
    weights: Vec<f64>,
    total: f64,
}

impl ProbabilityVector {
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if let Some(i) = weights.iter().position(|w| !(*w >= 0.0 && w.is_finite())) {
            return Err(Error::InvalidArgument(format!(
                "weight {i} = {} is invalid",
                weights[i]
            )));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::NoSamplingMass);
        }
        Ok(Self { weights, total })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn p(&self, i: usize) -> f64 {
        self.weights[i] / self.total
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.weights.iter().map(|w| w / self.total).collect()
    }

    /// Smallest positive probability.
    pub fn p_min_positive(&self) -> f64 {
        self.weights
            .iter()
            .filter(|&&w| w > 0.0)
            .fold(f64::INFINITY, |m, &w| m.min(w))
            / self.total
    }

    /// First coordinate of `support` that gets zero probability, if any.
    pub fn incoherence(&self, support: &[bool]) -> Option<usize> {
        support
            .iter()
            .zip(&self.weights)
            .position(|(&s, &w)| s && w == 0.0)
    }

    pub fn check_coherent(&self, support: &[bool]) -> Result<()> {
        match self.incoherence(support) {
            Some(i) => Err(Error::Incoherent(i)),
            None => Ok(()),
        }
    }
}

/// Zeroes every entry below `FLUSH_RTOL` times the largest entry; negatives become zero.
pub fn flush_small(weights: &mut [f64]) {
    let max = weights.iter().fold(0.0f64, |m, &w| m.max(w));
    let cut = FLUSH_RTOL * max;
    for w in weights.iter_mut() {
        if !(*w > cut) || *w <= 0.0 {
            *w = 0.0;
        }
    }
}

/// Flushed `κ_i‖a_i‖`, the weights of the adaptive rule.
pub fn residual_weights(kappa: &[f64], col_norms: &[f64]) -> Vec<f64> {
    let mut w: Vec<f64> = kappa
        .iter()
        .zip(col_norms)
        .map(|(k, a)| k.abs() * a)
        .collect();
    flush_small(&mut w);
    w
}

/// Support set: coordinates whose flushed residual weight is nonzero.
pub fn support_mask(kappa: &[f64], col_norms: &[f64]) -> Vec<bool> {
    residual_weights(kappa, col_norms)
        .iter()
        .map(|&w| w > 0.0)
        .collect()
}

pub fn build_distribution(
    scheme: &SamplingScheme,
    inputs: &DistributionInputs,
) -> Result<ProbabilityVector> {
    let n = inputs.col_norms.len();
    let need = |v: &[f64], what: &str| -> Result<()> {
        if v.len() == n {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "{} needs {what} of length {n}, got {}",
                scheme.name(),
                v.len()
            )))
        }
    };
    let weights = match *scheme {
        SamplingScheme::Uniform => inputs
            .col_norms
            .iter()
            .map(|&a| if a > 0.0 { 1.0 } else { 0.0 })
            .collect(),
        SamplingScheme::SupportsetUniform => {
            need(inputs.kappa, "residuals")?;
            residual_weights(inputs.kappa, inputs.col_norms)
                .iter()
                .map(|&w| if w > 0.0 { 1.0 } else { 0.0 })
                .collect()
        }
        SamplingScheme::Adaptive => {
            need(inputs.kappa, "residuals")?;
            residual_weights(inputs.kappa, inputs.col_norms)
        }
        SamplingScheme::AdaUniform { sigma } => {
            need(inputs.kappa, "residuals")?;
            let r = residual_weights(inputs.kappa, inputs.col_norms);
            let m = r.iter().filter(|&&w| w > 0.0).count();
            let sum: f64 = r.iter().sum();
            r.iter()
                .map(|&w| {
                    if w > 0.0 {
                        sigma / m as f64 + (1.0 - sigma) * w / sum
                    } else {
                        0.0
                    }
                })
                .collect()
        }
        SamplingScheme::Importance => {
            need(inputs.lipschitz, "Lipschitz constants")?;
            inputs
                .lipschitz
                .iter()
                .zip(inputs.col_norms)
                .map(|(l, a)| l * a)
                .collect()
        }
        SamplingScheme::AdaGap | SamplingScheme::GapPerEpoch => {
            need(inputs.gaps, "coordinate gaps")?;
            let mut g = inputs.gaps.to_vec();
            flush_small(&mut g);
            g
        }
    };
    ProbabilityVector::from_weights(weights)
}

/// Draws one index from a sum-tree using exactly one uniform variate.
pub fn sample<R: Rng + ?Sized>(tree: &SumTree, rng: &mut R) -> Result<usize> {
    tree.sample(rng.random::<f64>())
}
