//! The coordinate descent loop: sample a coordinate, take the exact step,
//! update `w` incrementally, refresh the sampling distribution when the
//! scheme asks for it, and emit a checkpoint record every `trace_every`
//! iterations.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::analysis::{
    default_s_grid, descent_inequality_check, f_t, f_t_gap, kappa_bound_violations,
};
use crate::error::{Error, Result};
use crate::linalg::{norm_sq, OpCounter};
use crate::problems::{PrimalDualState, ProblemInstance};
use crate::sampling::{
    build_distribution, sample, support_mask, DistributionInputs, ProbabilityVector, Refresh,
    SamplingScheme, SumTree,
};

/// Absolute slack of the per-iteration descent inequality, scaled by `max(1, |O_A|)`.
pub const DESCENT_SLACK: f64 = 1e-10;
/// Slack of the per-iteration monotonicity check, scaled by `max(1, |O_A|)`.
pub const MONOTONE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub scheme: SamplingScheme,
    pub max_epochs: u64,
    pub gap_tol: f64,
    pub seed: u64,
    /// Iterations between checkpoints; `None` means one epoch.
    pub trace_every: Option<u64>,
    pub record_theory: bool,
    /// Optimal `O_A`, used to report suboptimality.
    pub suboptimality_ref: Option<f64>,
}

impl SolverConfig {
    pub fn new(scheme: SamplingScheme) -> Self {
        Self {
            scheme,
            max_epochs: 100,
            gap_tol: 0.0,
            seed: 0,
            trace_every: None,
            record_theory: false,
            suboptimality_ref: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.max_epochs < 1 {
            return Err(Error::InvalidArgument(
                "max_epochs must be at least 1".into(),
            ));
        }
        if !(self.gap_tol >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "gap tolerance {} must be nonnegative",
                self.gap_tol
            )));
        }
        if self.trace_every == Some(0) {
            return Err(Error::InvalidArgument(
                "trace_every must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Theory quantities at a checkpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryPoint {
    /// One-step constant under the distribution the scheme samples from at this state;
    /// infinite if that distribution misses a support coordinate.
    pub f_t: f64,
    /// Gap-sampling constant; `None` once every gap or residual vanishes.
    pub f_t_gap: Option<f64>,
    pub chi_g: Option<f64>,
    pub chi_f: Option<f64>,
    /// Smallest probability on the support set.
    pub p_min: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    /// Iterations divided by `n`.
    pub epoch: f64,
    pub iterations: u64,
    /// Column passes spent by the algorithm (updates and distribution refreshes).
    pub vector_ops: u64,
    pub dual_obj: f64,
    pub primal_obj: f64,
    /// `O_A + O_B`.
    pub gap: f64,
    /// `Σ G_i`, equal to `gap` up to rounding.
    pub coordinate_gap_sum: f64,
    pub suboptimality: Option<f64>,
    pub support_size: usize,
    /// `‖w_incremental − w(α)‖ / ‖w(α)‖` before the checkpoint resets `w`.
    pub w_drift: f64,
    pub theory: Option<TheoryPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    BudgetExhausted,
    GapTolReached,
    SupportEmpty,
}

impl Termination {
    pub fn name(self) -> &'static str {
        match self {
            Termination::BudgetExhausted => "budget_exhausted",
            Termination::GapTolReached => "gap_tol_reached",
            Termination::SupportEmpty => "support_empty",
        }
    }
}

/// Work spent on distribution refreshes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RefreshStats {
    pub refreshes: u64,
    pub column_ops: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescentViolation {
    pub t: u64,
    pub i: usize,
    pub s: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotonicityViolation {
    pub t: u64,
    pub i: usize,
    pub increase: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaViolation {
    pub t: u64,
    pub i: usize,
    pub kappa: f64,
    pub bound: f64,
}

/// Per-iteration and per-checkpoint audit results, collected when theory recording is on.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TheoryLog {
    pub iterations_checked: u64,
    pub descent_violations: Vec<DescentViolation>,
    pub monotonicity_violations: Vec<MonotonicityViolation>,
    pub kappa_violations: Vec<KappaViolation>,
    /// `(t, i)` where a refreshed distribution missed a support coordinate.
    pub coherence_violations: Vec<(u64, usize)>,
    pub coherence_checks: u64,
    pub kappa_checks: u64,
}

impl TheoryLog {
    pub fn is_clean(&self) -> bool {
        self.descent_violations.is_empty()
            && self.monotonicity_violations.is_empty()
            && self.kappa_violations.is_empty()
            && self.coherence_violations.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub state: PrimalDualState,
    pub trace: Vec<TraceRecord>,
    pub termination: Termination,
    pub refresh: RefreshStats,
    pub theory: Option<TheoryLog>,
}

impl RunResult {
    /// Running maximum and mean of the logged one-step constants.
    pub fn f_t_summary(&self) -> Option<(f64, f64)> {
        summarize(self.trace.iter().filter_map(|r| r.theory.map(|t| t.f_t)))
    }

    pub fn f_t_gap_summary(&self) -> Option<(f64, f64)> {
        summarize(
            self.trace
                .iter()
                .filter_map(|r| r.theory.and_then(|t| t.f_t_gap)),
        )
    }
}

fn summarize(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (mut max, mut sum, mut count) = (f64::NEG_INFINITY, 0.0, 0usize);
    for v in values {
        max = max.max(v);
        sum += v;
        count += 1;
    }
    (count > 0).then(|| (max, sum / count as f64))
}

/// Per-coordinate quantities needed by a distribution refresh.
struct Snapshot {
    kappa: Vec<f64>,
    gaps: Vec<f64>,
}

fn snapshot(problem: &ProblemInstance, state: &PrimalDualState, ops: &mut OpCounter) -> Snapshot {
    let dots = problem.dots(state, ops);
    Snapshot {
        kappa: problem
            .residuals_from_dots(&state.alpha, &dots)
            .iter()
            .map(|r| r.kappa)
            .collect(),
        gaps: problem.gaps_from_dots(&state.alpha, &dots),
    }
}

/// Builds the distribution the scheme samples from at `state`.
///
/// Residual- and gap-based schemes make a full pass over the columns, tallied
/// in `state.ops`; uniform and importance use cached column norms only.
pub fn refresh_distribution(
    scheme: &SamplingScheme,
    problem: &ProblemInstance,
    state: &mut PrimalDualState,
) -> Result<(ProbabilityVector, Option<Vec<bool>>)> {
    let norms = problem.matrix().column_norms();
    let lipschitz: Vec<f64> = (0..problem.n()).map(|i| problem.lipschitz(i)).collect();
    if !(scheme.needs_residuals() || scheme.needs_gaps()) {
        let p = build_distribution(
            scheme,
            &DistributionInputs {
                col_norms: norms,
                lipschitz: &lipschitz,
                ..Default::default()
            },
        )?;
        return Ok((p, None));
    }
    let mut ops = state.ops;
    let snap = snapshot(problem, state, &mut ops);
    state.ops = ops;
    let support = support_mask(&snap.kappa, norms);
    let p = build_distribution(
        scheme,
        &DistributionInputs {
            kappa: &snap.kappa,
            gaps: &snap.gaps,
            col_norms: norms,
            lipschitz: &lipschitz,
        },
    )?;
    Ok((p, Some(support)))
}

struct Checkpoint {
    record: TraceRecord,
    kappa: Vec<f64>,
}

fn checkpoint(
    problem: &ProblemInstance,
    state: &mut PrimalDualState,
    config: &SolverConfig,
    static_dist: Option<&ProbabilityVector>,
) -> Result<Checkpoint> {
    let mut monitor = OpCounter::new();
    let fresh = problem.compute_w(&state.alpha, &mut monitor);
    let diff: Vec<f64> = state.w.iter().zip(&fresh).map(|(a, b)| a - b).collect();
    let scale = norm_sq(&fresh).sqrt();
    let w_drift = if scale > 0.0 {
        norm_sq(&diff).sqrt() / scale
    } else {
        norm_sq(&diff).sqrt()
    };
    state.w = fresh;

    let snap = snapshot(problem, state, &mut monitor);
    let dual_obj = problem.dual_obj(state);
    let primal_obj = problem.primal_obj(state);
    let gap = dual_obj + primal_obj;
    if !(dual_obj.is_finite() && primal_obj.is_finite()) {
        let max_alpha = state.alpha.iter().fold(0.0f64, |m, a| m.max(a.abs()));
        let max_w = state.w.iter().fold(0.0f64, |m, a| m.max(a.abs()));
        return Err(Error::NonFinite {
            iteration: state.t,
            detail: format!(
                "O_A = {dual_obj}, O_B = {primal_obj}, max|alpha| = {max_alpha}, max|w| = {max_w}"
            ),
        });
    }
    let norms = problem.matrix().column_norms();
    let support = support_mask(&snap.kappa, norms);
    let support_size = support.iter().filter(|&&s| s).count();

    let theory = if config.record_theory && support_size > 0 {
        let p = match static_dist {
            Some(p) => p.clone(),
            None => {
                let lipschitz: Vec<f64> = (0..problem.n()).map(|i| problem.lipschitz(i)).collect();
                build_distribution(
                    &config.scheme,
                    &DistributionInputs {
                        kappa: &snap.kappa,
                        gaps: &snap.gaps,
                        col_norms: norms,
                        lipschitz: &lipschitz,
                    },
                )?
            }
        };
        let gc = f_t_gap(problem, &snap.kappa, &snap.gaps);
        let p_min = (0..problem.n())
            .filter(|&i| support[i])
            .map(|i| p.p(i))
            .fold(f64::INFINITY, f64::min);
        let f = match f_t(problem, &snap.kappa, &p) {
            Err(Error::Incoherent(_)) => f64::INFINITY,
            other => other?,
        };
        Some(TheoryPoint {
            f_t: f,
            f_t_gap: gc.map(|g| g.f_t_gap),
            chi_g: gc.map(|g| g.chi_g),
            chi_f: gc.map(|g| g.chi_f),
            p_min,
        })
    } else {
        None
    };

    let n = problem.n() as f64;
    Ok(Checkpoint {
        record: TraceRecord {
            epoch: state.t as f64 / n,
            iterations: state.t,
            vector_ops: state.ops.column_ops(),
            dual_obj,
            primal_obj,
            gap,
            coordinate_gap_sum: snap.gaps.iter().sum(),
            suboptimality: config.suboptimality_ref.map(|r| dual_obj - r),
            support_size,
            w_drift,
            theory,
        },
        kappa: snap.kappa,
    })
}

/// Runs coordinate descent from `α = 0`.
pub fn run(problem: &ProblemInstance, config: &SolverConfig) -> Result<RunResult> {
    config.validate()?;
    let n = problem.n() as u64;
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let budget = config.max_epochs.saturating_mul(n);
    let trace_every = config.trace_every.unwrap_or(n);
    let refresh_mode = config.scheme.refresh();
    let s_grid = default_s_grid();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut state = problem.initial_state();
    let mut trace = Vec::new();
    let mut refresh = RefreshStats::default();
    let mut log = config.record_theory.then(TheoryLog::default);
    let mut static_dist: Option<ProbabilityVector> = None;
    let mut tree: Option<SumTree> = None;

    let audit_checkpoint = |cp: &Checkpoint, t: u64, log: &mut Option<TheoryLog>| {
        if let Some(log) = log.as_mut() {
            log.kappa_checks += 1;
            for (i, kappa, bound) in kappa_bound_violations(problem, &cp.kappa) {
                log.kappa_violations
                    .push(KappaViolation { t, i, kappa, bound });
            }
        }
    };

    let cp = checkpoint(problem, &mut state, config, None)?;
    audit_checkpoint(&cp, 0, &mut log);
    let mut running_obj = cp.record.dual_obj;
    let first = stop_reason(&cp.record, config.gap_tol);
    trace.push(cp.record);
    if let Some(reason) = first {
        return Ok(RunResult {
            state,
            trace,
            termination: reason,
            refresh,
            theory: log,
        });
    }

    let mut termination = Termination::BudgetExhausted;
    while state.t < budget {
        let due = match refresh_mode {
            Refresh::Static => tree.is_none(),
            Refresh::PerEpoch => tree.is_none() || state.t.is_multiple_of(n),
            Refresh::PerIteration => true,
        };
        if due {
            let before = state.ops.column_ops();
            let built = refresh_distribution(&config.scheme, problem, &mut state);
            refresh.refreshes += 1;
            refresh.column_ops += state.ops.column_ops() - before;
            let (p, support) = match built {
                Ok(v) => v,
                Err(Error::NoSamplingMass) => {
                    if trace.last().map(|r: &TraceRecord| r.iterations) != Some(state.t) {
                        let cp = checkpoint(problem, &mut state, config, static_dist.as_ref())?;
                        audit_checkpoint(&cp, state.t, &mut log);
                        trace.push(cp.record);
                    }
                    termination = Termination::SupportEmpty;
                    break;
                }
                Err(e) => return Err(e),
            };
            if let Some(log) = log.as_mut() {
                let support = support.unwrap_or_else(|| {
                    let snap = snapshot(problem, &state, &mut OpCounter::new());
                    support_mask(&snap.kappa, problem.matrix().column_norms())
                });
                log.coherence_checks += 1;
                if let Some(i) = p.incoherence(&support) {
                    log.coherence_violations.push((state.t, i));
                }
            }
            tree = Some(SumTree::build(p.weights())?);
            if refresh_mode == Refresh::Static {
                static_dist = Some(p);
            }
        }

        let i = sample(tree.as_ref().expect("distribution built"), &mut rng)?;
        let alpha_i = state.alpha[i];
        let dot = problem.matrix().column_dot(i, &state.w, &mut state.ops);
        let delta = problem.coordinate_step(i, alpha_i, dot);
        if let Some(log) = log.as_mut() {
            let change = problem.objective_change(i, alpha_i, dot, delta);
            let scale = running_obj.abs().max(1.0);
            if change > MONOTONE_SLACK * scale {
                log.monotonicity_violations.push(MonotonicityViolation {
                    t: state.t,
                    i,
                    increase: change,
                });
            }
            let check = descent_inequality_check(
                problem,
                i,
                alpha_i,
                dot,
                -change,
                &s_grid,
                DESCENT_SLACK * scale,
            );
            if !check.passed {
                log.descent_violations.push(DescentViolation {
                    t: state.t,
                    i,
                    s: check.s,
                    margin: check.margin,
                });
            }
            log.iterations_checked += 1;
            running_obj += change;
        }
        problem.apply_update(&mut state, i, delta)?;
        state.t += 1;

        if state.t.is_multiple_of(trace_every) || state.t == budget {
            let cp = checkpoint(problem, &mut state, config, static_dist.as_ref())?;
            audit_checkpoint(&cp, state.t, &mut log);
            running_obj = cp.record.dual_obj;
            let reason = stop_reason(&cp.record, config.gap_tol);
            trace.push(cp.record);
            if let Some(reason) = reason {
                termination = reason;
                break;
            }
        }
    }

    Ok(RunResult {
        state,
        trace,
        termination,
        refresh,
        theory: log,
    })
}

fn stop_reason(record: &TraceRecord, gap_tol: f64) -> Option<Termination> {
    if record.support_size == 0 {
        Some(Termination::SupportEmpty)
    } else if record.gap <= gap_tol {
        Some(Termination::GapTolReached)
    } else {
        None
    }
}

#[cfg(test)]
mod tests;
