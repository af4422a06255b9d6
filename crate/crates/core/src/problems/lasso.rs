use super::{PrimalDualState, Residual, KINK_TOL};
use crate::data::{Dataset, Orientation};
use crate::error::{Error, Result};
use crate::linalg::{dot, norm_sq, OpCounter, SparseColumnMatrix};

/// `min_α ‖Aα − y‖² + λ‖α‖₁` with columns as features.
///
/// `g_i` is restricted to `|α_i| ≤ B`, which makes `g_i*(u) = B[|u| − λ]_+`
/// finite everywhere. The restriction is never active along the iterates.
#[derive(Debug, Clone)]
pub struct Lasso {
    matrix: SparseColumnMatrix,
    y: Vec<f64>,
    lambda: f64,
    radius: f64,
    norms_sq: Vec<f64>,
}

/// `B = f(A·0)/λ = ‖y‖²/λ`. Zero means `α = 0` is already optimal.
pub fn compute_support_radius(y: &[f64], lambda: f64) -> f64 {
    norm_sq(y) / lambda
}

/// Smallest `λ` for which `α = 0` is optimal: `2‖A^T y‖_∞`.
pub fn lasso_lambda_max(ds: &Dataset) -> f64 {
    let aty = ds
        .matrix
        .transpose_mat_vec(&ds.targets, &mut OpCounter::new());
    2.0 * aty.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

impl Lasso {
    pub fn new(ds: &Dataset, lambda: f64) -> Result<Self> {
        if ds.orientation != Orientation::FeaturesAsColumns {
            return Err(Error::Orientation {
                expected: Orientation::FeaturesAsColumns.name(),
                found: ds.orientation.name(),
            });
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        let radius = compute_support_radius(&ds.targets, lambda);
        if radius == 0.0 {
            log::warn!("targets are zero: alpha = 0 is optimal");
        }
        let norms_sq: Vec<f64> = ds.matrix.column_norms().iter().map(|v| v * v).collect();
        let zero = norms_sq.iter().filter(|&&q| q == 0.0).count();
        if zero > 0 {
            log::warn!("{zero} zero columns are never updated");
        }
        Ok(Self {
            matrix: ds.matrix.clone(),
            y: ds.targets.clone(),
            lambda,
            radius,
            norms_sq,
        })
    }

    pub fn matrix(&self) -> &SparseColumnMatrix {
        &self.matrix
    }

    pub fn targets(&self) -> &[f64] {
        &self.y
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn support_radius(&self) -> f64 {
        self.radius
    }

    pub fn beta(&self) -> f64 {
        0.5
    }

    pub fn lipschitz(&self, _i: usize) -> f64 {
        self.radius
    }

    pub fn template_col_norm_sq(&self, i: usize) -> f64 {
        self.norms_sq[i]
    }

    pub fn initial_state(&self) -> PrimalDualState {
        PrimalDualState {
            alpha: vec![0.0; self.matrix.n_cols()],
            w: self.y.iter().map(|v| -2.0 * v).collect(),
            t: 0,
            ops: OpCounter::new(),
        }
    }

    pub fn compute_w(&self, alpha: &[f64], ops: &mut OpCounter) -> Vec<f64> {
        let mut w = self.matrix.mat_vec(alpha, ops);
        for (wi, yi) in w.iter_mut().zip(&self.y) {
            *wi = 2.0 * (*wi - yi);
        }
        w
    }

    pub fn image(&self, state: &PrimalDualState) -> Vec<f64> {
        state
            .w
            .iter()
            .zip(&self.y)
            .map(|(w, y)| 0.5 * w + y)
            .collect()
    }

    /// `‖Aα − y‖² + λ‖α‖₁`, with `Aα − y = w/2`.
    pub fn dual_obj(&self, state: &PrimalDualState) -> f64 {
        0.25 * norm_sq(&state.w) + self.lambda * state.alpha.iter().map(|a| a.abs()).sum::<f64>()
    }

    /// `w^T y + ‖w‖²/4 + Σ B[|a_i^T w| − λ]_+`.
    pub fn primal_obj(&self, state: &PrimalDualState) -> f64 {
        let dots = self
            .matrix
            .transpose_mat_vec(&state.w, &mut OpCounter::new());
        let hinge: f64 = dots.iter().map(|d| (d.abs() - self.lambda).max(0.0)).sum();
        dot(&state.w, &self.y) + 0.25 * norm_sq(&state.w) + self.radius * hinge
    }

    pub fn coordinate_gap(&self, _i: usize, alpha_i: f64, dot: f64) -> f64 {
        self.radius * (dot.abs() - self.lambda).max(0.0)
            + self.lambda * alpha_i.abs()
            + alpha_i * dot
    }

    pub fn residual(&self, _i: usize, alpha_i: f64, dot: f64) -> Residual {
        let band = KINK_TOL * self.lambda;
        let excess = dot.abs() - self.lambda;
        let end = -self.radius * dot.signum();
        if excess < -band {
            Residual::to_point(alpha_i, 0.0)
        } else if excess > band {
            Residual::to_point(alpha_i, end)
        } else {
            Residual::to_segment(alpha_i, end)
        }
    }

    /// Soft-thresholded coordinate minimizer; zero for empty columns.
    pub fn coordinate_step(&self, i: usize, alpha_i: f64, dot: f64) -> f64 {
        let q = self.norms_sq[i];
        if q == 0.0 {
            return 0.0;
        }
        let z = alpha_i - 0.5 * dot / q;
        let tau = 0.5 * self.lambda / q;
        let next = z.signum() * (z.abs() - tau).max(0.0);
        next - alpha_i
    }

    pub fn objective_change(&self, i: usize, alpha_i: f64, dot: f64, delta: f64) -> f64 {
        delta * dot
            + delta * delta * self.norms_sq[i]
            + self.lambda * ((alpha_i + delta).abs() - alpha_i.abs())
    }

    pub fn apply_update(&self, state: &mut PrimalDualState, i: usize, delta: f64) -> Result<()> {
        if delta == 0.0 {
            state.ops.record_column(self.matrix.column(i).nnz());
            return Ok(());
        }
        self.matrix
            .add_scaled_column(i, 2.0 * delta, &mut state.w, &mut state.ops);
        state.alpha[i] += delta;
        if state.alpha[i].abs() > self.radius * (1.0 + 1e-12) {
            return Err(Error::Invariant(format!(
                "|alpha_{i}| = {} exceeds support radius {}",
                state.alpha[i].abs(),
                self.radius
            )));
        }
        Ok(())
    }
}
