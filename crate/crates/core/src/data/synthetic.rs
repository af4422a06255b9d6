use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use super::{Dataset, Orientation};
use crate::error::{Error, Result};
use crate::linalg::{OpCounter, SparseColumnMatrix};

/// Log-scale spread of the per-column norms, so column norms are not all alike.
const COLUMN_SCALE_SIGMA: f64 = 0.5;

/// A generated instance together with the vector used to produce it.
#[derive(Debug, Clone)]
pub struct Synthetic {
    pub dataset: Dataset,
    /// Planted coefficients (Lasso) or separating direction (SVM).
    pub truth: Vec<f64>,
}

/// Dense Gaussian Lasso instance with one column per feature.
///
/// Entries are `N(0, 1/d)` times a log-normal per-column scale; `y = A·truth + noise·N(0, 1)`
/// where `truth` has `ceil(support_frac·n)` standard-normal nonzeros.
pub fn synthetic_lasso(
    d: usize,
    n: usize,
    support_frac: f64,
    noise: f64,
    seed: u64,
) -> Result<Synthetic> {
    if !(support_frac > 0.0 && support_frac <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "support fraction {support_frac} not in (0, 1]"
        )));
    }
    if d == 0 || n == 0 {
        return Err(Error::InvalidArgument("dimensions must be positive".into()));
    }
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "noise level {noise} must be finite and nonnegative"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entry = Normal::new(0.0, 1.0 / (d as f64).sqrt()).expect("valid normal");
    let scale = Normal::new(0.0, COLUMN_SCALE_SIGMA).expect("valid normal");

    let mut dense = Vec::with_capacity(d * n);
    for _ in 0..n {
        let s = scale.sample(&mut rng).exp();
        dense.extend((0..d).map(|_| s * entry.sample(&mut rng)));
    }
    let matrix = SparseColumnMatrix::from_dense(d, n, &dense)?;

    let k = ((support_frac * n as f64).ceil() as usize).min(n);
    let mut truth = vec![0.0; n];
    for j in sample(&mut rng, n, k) {
        let mut v: f64 = StandardNormal.sample(&mut rng);
        while v == 0.0 {
            v = StandardNormal.sample(&mut rng);
        }
        truth[j] = v;
    }
    let mut y = matrix.mat_vec(&truth, &mut OpCounter::new());
    if noise > 0.0 {
        for yi in &mut y {
            let z: f64 = StandardNormal.sample(&mut rng);
            *yi += noise * z;
        }
    }
    Ok(Synthetic {
        dataset: Dataset::new(matrix, y, Orientation::FeaturesAsColumns)?,
        truth,
    })
}

/// Sparse linear-separator SVM instance with one column per datapoint.
///
/// Each feature is present with probability `density` (at least one per datapoint);
/// labels are the sign against a Gaussian direction, flipped with probability `flip_prob`.
pub fn synthetic_svm(
    d: usize,
    n: usize,
    density: f64,
    flip_prob: f64,
    seed: u64,
) -> Result<Synthetic> {
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "density {density} not in (0, 1]"
        )));
    }
    if !(0.0..=1.0).contains(&flip_prob) {
        return Err(Error::InvalidArgument(format!(
            "flip probability {flip_prob} not in [0, 1]"
        )));
    }
    if d == 0 || n == 0 {
        return Err(Error::InvalidArgument("dimensions must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = Normal::new(0.0, COLUMN_SCALE_SIGMA).expect("valid normal");
    let truth: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();

    let mut columns = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let s = scale.sample(&mut rng).exp();
        let forced = rng.random_range(0..d);
        let mut col = Vec::new();
        for r in 0..d {
            if r == forced || rng.random::<f64>() < density {
                let z: f64 = StandardNormal.sample(&mut rng);
                if z != 0.0 {
                    col.push((r, s * z));
                }
            }
        }
        if col.is_empty() {
            col.push((forced, s));
        }
        let margin: f64 = col.iter().map(|&(r, v)| truth[r] * v).sum();
        let mut label = if margin >= 0.0 { 1.0 } else { -1.0 };
        if rng.random::<f64>() < flip_prob {
            label = -label;
        }
        labels.push(label);
        columns.push(col);
    }
    let matrix = SparseColumnMatrix::from_columns(d, columns)?;
    Ok(Synthetic {
        dataset: Dataset::new(matrix, labels, Orientation::DatapointsAsColumns)?,
        truth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_lasso_reproduces_targets() {
        let s = synthetic_lasso(20, 30, 0.12, 0.0, 1).unwrap();
        let y = s.dataset.matrix.mat_vec(&s.truth, &mut OpCounter::new());
        assert_eq!(y, s.dataset.targets);
        assert_eq!(s.truth.iter().filter(|v| **v != 0.0).count(), 4);
    }

    #[test]
    fn lasso_seed_determinism() {
        let a = synthetic_lasso(10, 12, 0.5, 0.1, 7).unwrap();
        let b = synthetic_lasso(10, 12, 0.5, 0.1, 7).unwrap();
        let c = synthetic_lasso(10, 12, 0.5, 0.1, 8).unwrap();
        assert_eq!(a.dataset, b.dataset);
        assert_ne!(a.dataset.matrix, c.dataset.matrix);
    }

    #[test]
    fn lasso_rejects_bad_fraction() {
        assert!(synthetic_lasso(5, 5, 0.0, 0.0, 0).is_err());
        assert!(synthetic_lasso(5, 5, 1.5, 0.0, 0).is_err());
    }

    #[test]
    fn svm_has_pm1_labels_and_no_empty_columns() {
        let s = synthetic_svm(50, 300, 0.1, 0.05, 3).unwrap();
        s.dataset.check_pm1_labels().unwrap();
        assert!(s.dataset.matrix.columns().all(|c| !c.is_empty()));
        let pos = s.dataset.targets.iter().filter(|&&t| t > 0.0).count();
        assert!(pos > 0 && pos < 300);
    }
}
