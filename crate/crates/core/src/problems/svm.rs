use super::{PrimalDualState, Residual, KINK_TOL};
use crate::data::{Dataset, Orientation};
use crate::error::{Error, Result};
use crate::linalg::{norm_sq, OpCounter, SparseColumnMatrix};

/// Dual of the hinge-loss SVM with columns as datapoints.
///
/// `O_A(α) = −(1/n) Σ α_i y_i + (λ/2)‖w‖²` over `α_i y_i ∈ [0, 1]`, with
/// `w = (1/(λn)) Σ α_i a_i`. In template form the matrix columns are `a_i / n`
/// and `f(v) = ‖v‖²/(2λ)`, so `β = λ`.
#[derive(Debug, Clone)]
pub struct HingeSvm {
    matrix: SparseColumnMatrix,
    labels: Vec<f64>,
    lambda: f64,
    norms_sq: Vec<f64>,
}

impl HingeSvm {
    /// Rejects all-zero datapoints; see [`Dataset::drop_zero_columns`].
    pub fn new(ds: &Dataset, lambda: f64) -> Result<Self> {
        if ds.orientation != Orientation::DatapointsAsColumns {
            return Err(Error::Orientation {
                expected: Orientation::DatapointsAsColumns.name(),
                found: ds.orientation.name(),
            });
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        if ds.n() == 0 {
            return Err(Error::EmptyDataset);
        }
        ds.check_pm1_labels()?;
        let norms_sq: Vec<f64> = ds.matrix.column_norms().iter().map(|v| v * v).collect();
        if let Some(i) = norms_sq.iter().position(|&q| q == 0.0) {
            return Err(Error::ZeroColumn(i));
        }
        Ok(Self {
            matrix: ds.matrix.clone(),
            labels: ds.targets.clone(),
            lambda,
            norms_sq,
        })
    }

    pub fn matrix(&self) -> &SparseColumnMatrix {
        &self.matrix
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    fn n(&self) -> f64 {
        self.matrix.n_cols() as f64
    }

    pub fn beta(&self) -> f64 {
        self.lambda
    }

    /// The support of `g_i` is the unit segment `[0, y_i]`.
    pub fn lipschitz(&self, _i: usize) -> f64 {
        1.0
    }

    pub fn template_col_norm_sq(&self, i: usize) -> f64 {
        self.norms_sq[i] / (self.n() * self.n())
    }

    pub fn initial_state(&self) -> PrimalDualState {
        PrimalDualState {
            alpha: vec![0.0; self.matrix.n_cols()],
            w: vec![0.0; self.matrix.n_rows()],
            t: 0,
            ops: OpCounter::new(),
        }
    }

    pub fn compute_w(&self, alpha: &[f64], ops: &mut OpCounter) -> Vec<f64> {
        let scale = 1.0 / (self.lambda * self.n());
        let scaled: Vec<f64> = alpha.iter().map(|a| a * scale).collect();
        self.matrix.mat_vec(&scaled, ops)
    }

    pub fn image(&self, state: &PrimalDualState) -> Vec<f64> {
        state.w.clone()
    }

    pub fn dual_obj(&self, state: &PrimalDualState) -> f64 {
        let linear: f64 = state
            .alpha
            .iter()
            .zip(&self.labels)
            .map(|(a, y)| a * y)
            .sum();
        -linear / self.n() + 0.5 * self.lambda * norm_sq(&state.w)
    }

    /// `(λ/2)‖w‖² + (1/n) Σ [1 − y_i a_i^T w]_+`.
    pub fn primal_obj(&self, state: &PrimalDualState) -> f64 {
        let dots = self
            .matrix
            .transpose_mat_vec(&state.w, &mut OpCounter::new());
        let hinge: f64 = dots
            .iter()
            .zip(&self.labels)
            .map(|(d, y)| (1.0 - y * d).max(0.0))
            .sum();
        0.5 * self.lambda * norm_sq(&state.w) + hinge / self.n()
    }

    pub fn coordinate_gap(&self, i: usize, alpha_i: f64, dot: f64) -> f64 {
        let y = self.labels[i];
        ((1.0 - y * dot).max(0.0) - alpha_i * y + alpha_i * dot) / self.n()
    }

    pub fn residual(&self, i: usize, alpha_i: f64, dot: f64) -> Residual {
        let y = self.labels[i];
        let margin = y * dot;
        if margin < 1.0 - KINK_TOL {
            Residual::to_point(alpha_i, y)
        } else if margin > 1.0 + KINK_TOL {
            Residual::to_point(alpha_i, 0.0)
        } else {
            Residual::to_segment(alpha_i, y)
        }
    }

    pub fn coordinate_step(&self, i: usize, alpha_i: f64, dot: f64) -> f64 {
        let y = self.labels[i];
        let step = (1.0 - y * dot) * self.lambda * self.n() / self.norms_sq[i];
        y * (step + y * alpha_i).clamp(0.0, 1.0) - alpha_i
    }

    pub fn objective_change(&self, i: usize, _alpha_i: f64, dot: f64, delta: f64) -> f64 {
        let n = self.n();
        let y = self.labels[i];
        delta * dot / n + delta * delta * self.norms_sq[i] / (2.0 * self.lambda * n * n)
            - delta * y / n
    }

    pub fn apply_update(&self, state: &mut PrimalDualState, i: usize, delta: f64) -> Result<()> {
        if delta == 0.0 {
            state.ops.record_column(self.matrix.column(i).nnz());
            return Ok(());
        }
        let c = delta / (self.lambda * self.n());
        self.matrix
            .add_scaled_column(i, c, &mut state.w, &mut state.ops);
        state.alpha[i] += delta;
        let s = state.alpha[i] * self.labels[i];
        if !(-1e-12..=1.0 + 1e-12).contains(&s) {
            return Err(Error::Invariant(format!(
                "alpha_{i} y_{i} = {s} outside [0, 1]"
            )));
        }
        Ok(())
    }
}
