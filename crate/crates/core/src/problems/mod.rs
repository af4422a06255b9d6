//! Concrete primal-dual problem pairs.
//!
//! Both problems are written in the separable template
//! `O_A(α) = f(Aα) + Σ g_i(α_i)` with primal vector `w = ∇f(Aα)`. Every
//! per-coordinate quantity (gap, residual, exact update) depends only on
//! `α_i` and the scalar `a_i^T w`, so the solver computes that dot product
//! once per iteration and hands it to the scalar routines here.

mod lasso;
mod svm;

pub use lasso::{compute_support_radius, lasso_lambda_max, Lasso};
pub use svm::HingeSvm;

use crate::data::Dataset;
use crate::error::Result;
use crate::linalg::{OpCounter, SparseColumnMatrix};

/// Half-width of the band in which a dot product counts as sitting on a kink
/// of the conjugate. Relative to `λ` for the Lasso, absolute on the margin for the SVM.
pub const KINK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Lasso,
    Svm,
}

impl ProblemKind {
    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Lasso => "lasso",
            ProblemKind::Svm => "svm",
        }
    }
}

impl std::str::FromStr for ProblemKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "lasso" => Ok(ProblemKind::Lasso),
            "svm" => Ok(ProblemKind::Svm),
            other => Err(format!("unknown problem {other:?} (expected lasso or svm)")),
        }
    }
}

/// Iterate `α`, primal vector `w = ∇f(Aα)`, iteration count and work tally.
///
/// `w` is maintained incrementally; [`ProblemInstance::image`] recovers `Aα`
/// (or its scaled SVM counterpart) from it.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimalDualState {
    pub alpha: Vec<f64>,
    pub w: Vec<f64>,
    pub t: u64,
    pub ops: OpCounter,
}

/// Distance from `α_i` to the optimality set `∂g_i*(-a_i^T w)`, and the nearest point of that set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    pub kappa: f64,
    pub target: f64,
}

impl Residual {
    fn to_segment(alpha: f64, end: f64) -> Residual {
        // Nearest point to `alpha` on the segment [0, end].
        let (lo, hi) = if end < 0.0 { (end, 0.0) } else { (0.0, end) };
        let target = alpha.clamp(lo, hi);
        Residual {
            kappa: (alpha - target).abs(),
            target,
        }
    }

    fn to_point(alpha: f64, target: f64) -> Residual {
        Residual {
            kappa: (alpha - target).abs(),
            target,
        }
    }
}

#[derive(Debug, Clone)]
pub enum ProblemInstance {
    Lasso(Lasso),
    Svm(HingeSvm),
}

macro_rules! dispatch {
    ($self:ident, $p:ident => $e:expr) => {
        match $self {
            ProblemInstance::Lasso($p) => $e,
            ProblemInstance::Svm($p) => $e,
        }
    };
}

impl ProblemInstance {
    pub fn lasso(ds: &Dataset, lambda: f64) -> Result<Self> {
        Lasso::new(ds, lambda).map(ProblemInstance::Lasso)
    }

    pub fn svm(ds: &Dataset, lambda: f64) -> Result<Self> {
        HingeSvm::new(ds, lambda).map(ProblemInstance::Svm)
    }

    pub fn kind(&self) -> ProblemKind {
        match self {
            ProblemInstance::Lasso(_) => ProblemKind::Lasso,
            ProblemInstance::Svm(_) => ProblemKind::Svm,
        }
    }

    pub fn matrix(&self) -> &SparseColumnMatrix {
        dispatch!(self, p => p.matrix())
    }

    pub fn n(&self) -> usize {
        self.matrix().n_cols()
    }

    pub fn d(&self) -> usize {
        self.matrix().n_rows()
    }

    pub fn lambda(&self) -> f64 {
        dispatch!(self, p => p.lambda())
    }

    /// `f` is `1/β`-smooth.
    pub fn beta(&self) -> f64 {
        dispatch!(self, p => p.beta())
    }

    /// Radius bounding the support of `g_i`.
    pub fn lipschitz(&self, i: usize) -> f64 {
        dispatch!(self, p => p.lipschitz(i))
    }

    /// Strong convexity of `g_i`; zero for both shipped problems.
    pub fn strong_convexity(&self, _i: usize) -> f64 {
        0.0
    }

    /// Squared norm of column `i` of the template matrix (`a_i` for the Lasso, `a_i / n` for the SVM).
    pub fn template_col_norm_sq(&self, i: usize) -> f64 {
        dispatch!(self, p => p.template_col_norm_sq(i))
    }

    pub fn initial_state(&self) -> PrimalDualState {
        dispatch!(self, p => p.initial_state())
    }

    /// `w(α)` from scratch; work is tallied in `ops`.
    pub fn compute_w(&self, alpha: &[f64], ops: &mut OpCounter) -> Vec<f64> {
        dispatch!(self, p => p.compute_w(alpha, ops))
    }

    /// `Aα` for the Lasso, `(1/(λn)) Σ α_i a_i` for the SVM.
    pub fn image(&self, state: &PrimalDualState) -> Vec<f64> {
        dispatch!(self, p => p.image(state))
    }

    pub fn dual_obj(&self, state: &PrimalDualState) -> f64 {
        dispatch!(self, p => p.dual_obj(state))
    }

    pub fn primal_obj(&self, state: &PrimalDualState) -> f64 {
        dispatch!(self, p => p.primal_obj(state))
    }

    /// `G_i` from `α_i` and `a_i^T w`.
    pub fn coordinate_gap(&self, i: usize, alpha_i: f64, dot: f64) -> f64 {
        dispatch!(self, p => p.coordinate_gap(i, alpha_i, dot))
    }

    pub fn residual(&self, i: usize, alpha_i: f64, dot: f64) -> Residual {
        dispatch!(self, p => p.residual(i, alpha_i, dot))
    }

    /// Exact minimizing step `Δα_i` along coordinate `i`.
    pub fn coordinate_step(&self, i: usize, alpha_i: f64, dot: f64) -> f64 {
        dispatch!(self, p => p.coordinate_step(i, alpha_i, dot))
    }

    /// `O_A(α + Δ e_i) − O_A(α)` in closed form.
    pub fn objective_change(&self, i: usize, alpha_i: f64, dot: f64, delta: f64) -> f64 {
        dispatch!(self, p => p.objective_change(i, alpha_i, dot, delta))
    }

    /// `α_i += Δ` with the matching incremental `w` update; one column op even for `Δ = 0`.
    ///
    /// Fails if the iterate leaves the domain where the conjugate is valid.
    pub fn apply_update(&self, state: &mut PrimalDualState, i: usize, delta: f64) -> Result<()> {
        dispatch!(self, p => p.apply_update(state, i, delta))
    }

    /// `a_i^T w` for every column.
    pub fn dots(&self, state: &PrimalDualState, ops: &mut OpCounter) -> Vec<f64> {
        self.matrix().transpose_mat_vec(&state.w, ops)
    }

    pub fn coordinate_gaps(&self, state: &PrimalDualState) -> Vec<f64> {
        let dots = self.dots(state, &mut OpCounter::new());
        self.gaps_from_dots(&state.alpha, &dots)
    }

    pub fn gaps_from_dots(&self, alpha: &[f64], dots: &[f64]) -> Vec<f64> {
        alpha
            .iter()
            .zip(dots)
            .enumerate()
            .map(|(i, (&a, &d))| self.coordinate_gap(i, a, d))
            .collect()
    }

    pub fn residuals(&self, state: &PrimalDualState) -> Vec<Residual> {
        let dots = self.dots(state, &mut OpCounter::new());
        self.residuals_from_dots(&state.alpha, &dots)
    }

    pub fn residuals_from_dots(&self, alpha: &[f64], dots: &[f64]) -> Vec<Residual> {
        alpha
            .iter()
            .zip(dots)
            .enumerate()
            .map(|(i, (&a, &d))| self.residual(i, a, d))
            .collect()
    }

    /// `Σ G_i`, equal to `O_A + O_B` when `w = w(α)`.
    pub fn total_gap(&self, state: &PrimalDualState) -> f64 {
        self.coordinate_gaps(state).iter().sum()
    }
}
