//! Experiment front end: dataset preparation, single runs, multi-scheme
//! comparisons over seeds, operation-count benchmarks and CSV output.

mod cli;
mod csv;

pub use cli::{
    exit_code, run_cli, trace_path, Cli, Command, EXIT_DATA, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE,
};
pub use csv::{
    write_bench_csv, write_stats_csv, write_summary_csv, write_trace_csv, TRACE_SCHEMA_VERSION,
};

use std::path::PathBuf;

use rayon::prelude::*;

use crate::analysis::{reference_solution, Reference, DEFAULT_REFERENCE_GAP};
use crate::data::{
    load_libsvm, normalize_columns, synthetic_lasso, synthetic_svm, Dataset, LoadOptions,
    Normalization,
};
use crate::error::{Error, Result};
use crate::problems::{lasso_lambda_max, ProblemInstance, ProblemKind};
use crate::sampling::{Refresh, SamplingScheme};
use crate::solver::{run, RunResult, SolverConfig, Termination, TraceRecord};

/// Epoch budget of the shared reference run.
pub const REFERENCE_EPOCHS: u64 = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    File(PathBuf),
    /// `d, n` follow the layout of the problem: rows × features for the Lasso,
    /// features × datapoints for the SVM. `frac` is the planted support fraction
    /// (Lasso) or feature density (SVM); `noise` is the target noise level
    /// (Lasso) or label-flip probability (SVM).
    Synthetic {
        d: usize,
        n: usize,
        frac: f64,
        noise: f64,
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lambda {
    Absolute(f64),
    /// Fraction of the smallest `λ` with an all-zero Lasso solution.
    FractionOfMax(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub source: DataSource,
    pub problem: ProblemKind,
    pub lambda: Lambda,
    pub schemes: Vec<SamplingScheme>,
    pub seeds: Vec<u64>,
    pub max_epochs: u64,
    pub gap_tol: f64,
    pub normalize: bool,
    pub record_theory: bool,
    pub trace_every: Option<u64>,
    pub gap_levels: Vec<f64>,
    pub out: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.schemes.is_empty() {
            return Err(Error::InvalidArgument(
                "at least one scheme is required".into(),
            ));
        }
        if self.seeds.is_empty() {
            return Err(Error::InvalidArgument(
                "at least one seed is required".into(),
            ));
        }
        let lambda_ok = match self.lambda {
            Lambda::Absolute(l) | Lambda::FractionOfMax(l) => l > 0.0 && l.is_finite(),
        };
        if !lambda_ok {
            return Err(Error::InvalidArgument("lambda must be positive".into()));
        }
        if matches!(self.lambda, Lambda::FractionOfMax(_)) && self.problem != ProblemKind::Lasso {
            return Err(Error::InvalidArgument(
                "a lambda fraction is only defined for the lasso".into(),
            ));
        }
        Ok(())
    }

    fn solver_config(
        &self,
        scheme: SamplingScheme,
        seed: u64,
        reference: Option<f64>,
    ) -> SolverConfig {
        SolverConfig {
            scheme,
            max_epochs: self.max_epochs,
            gap_tol: self.gap_tol,
            seed,
            trace_every: self.trace_every,
            record_theory: self.record_theory,
            suboptimality_ref: reference,
        }
    }
}

/// Loads or generates the data, lays it out for the problem, drops empty
/// columns, optionally normalizes, and builds the instance.
pub fn prepare_problem(spec: &ExperimentSpec) -> Result<(Dataset, ProblemInstance)> {
    spec.validate()?;
    let raw = match &spec.source {
        DataSource::File(path) => load_libsvm(
            path,
            LoadOptions {
                strict: true,
                n_features: None,
            },
        )?,
        DataSource::Synthetic {
            d,
            n,
            frac,
            noise,
            seed,
        } => match spec.problem {
            ProblemKind::Lasso => synthetic_lasso(*d, *n, *frac, *noise, *seed)?.dataset,
            ProblemKind::Svm => synthetic_svm(*d, *n, *frac, *noise, *seed)?.dataset,
        },
    };
    let laid_out = match spec.problem {
        ProblemKind::Lasso => raw.to_features_as_columns(),
        ProblemKind::Svm => raw.to_datapoints_as_columns().with_pm1_labels()?,
    };
    let before = laid_out.n();
    let mut ds = laid_out.drop_zero_columns()?;
    if ds.n() < before {
        log::info!("dropped {} empty columns", before - ds.n());
    }
    if ds.n() == 0 {
        return Err(Error::EmptyDataset);
    }
    if spec.normalize {
        ds = normalize_columns(&ds, Normalization::UnitL2)?;
    }
    let problem = match (spec.problem, spec.lambda) {
        (ProblemKind::Lasso, Lambda::Absolute(l)) => ProblemInstance::lasso(&ds, l)?,
        (ProblemKind::Lasso, Lambda::FractionOfMax(f)) => {
            ProblemInstance::lasso(&ds, f * lasso_lambda_max(&ds))?
        }
        (ProblemKind::Svm, Lambda::Absolute(l)) => ProblemInstance::svm(&ds, l)?,
        (ProblemKind::Svm, Lambda::FractionOfMax(_)) => unreachable!("rejected by validate"),
    };
    Ok((ds, problem))
}

/// First checkpoint epoch with gap at or below `eps`.
pub fn epochs_to_gap(trace: &[TraceRecord], eps: f64) -> Option<f64> {
    trace.iter().find(|r| r.gap <= eps).map(|r| r.epoch)
}

/// Epoch at which the gap crosses `eps`, interpolating linearly in `log(gap)`
/// between the two checkpoints that bracket the first crossing.
pub fn epochs_to_gap_interpolated(trace: &[TraceRecord], eps: f64) -> Option<f64> {
    let k = trace.iter().position(|r| r.gap <= eps)?;
    if k == 0 {
        return Some(trace[0].epoch);
    }
    let (a, b) = (&trace[k - 1], &trace[k]);
    if !(b.gap > 0.0 && eps > 0.0) {
        return Some(b.epoch);
    }
    let (la, lb, le) = (a.gap.ln(), b.gap.ln(), eps.ln());
    let frac = if la > lb {
        ((la - le) / (la - lb)).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Some(a.epoch + frac * (b.epoch - a.epoch))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    Run,
    Median,
    Mean,
}

impl RowKind {
    pub fn name(self) -> &'static str {
        match self {
            RowKind::Run => "run",
            RowKind::Median => "median",
            RowKind::Mean => "mean",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub scheme: String,
    pub kind: RowKind,
    pub seed: Option<u64>,
    /// One entry per requested gap level; `None` when not reached.
    pub epochs_to_gap: Vec<Option<f64>>,
    pub final_gap: Option<f64>,
    pub final_suboptimality: Option<f64>,
    pub total_vector_ops: Option<f64>,
    pub termination: Option<String>,
    pub error: Option<String>,
}

/// Outcome of one (scheme, seed) run inside a comparison.
#[derive(Debug)]
pub struct CompareRun {
    pub scheme: SamplingScheme,
    pub seed: u64,
    pub result: Result<RunResult>,
}

#[derive(Debug)]
pub struct Comparison {
    pub reference: Option<Reference>,
    pub runs: Vec<CompareRun>,
    pub rows: Vec<SummaryRow>,
}

/// Median over seeds; unreached runs count as +∞.
fn median(values: &[Option<f64>]) -> Option<f64> {
    let mut v: Vec<f64> = values.iter().map(|x| x.unwrap_or(f64::INFINITY)).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    let out = if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    };
    out.is_finite().then_some(out)
}

fn mean(values: &[Option<f64>]) -> Option<f64> {
    let v: Option<Vec<f64>> = values.iter().copied().collect();
    let v = v?;
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Runs every (scheme, seed) pair in parallel against one shared reference.
pub fn compare(spec: &ExperimentSpec, problem: &ProblemInstance) -> Result<Comparison> {
    spec.validate()?;
    let reference = reference_solution(problem, DEFAULT_REFERENCE_GAP, REFERENCE_EPOCHS)?;
    let opt = Some(reference.dual_obj);
    let jobs: Vec<(SamplingScheme, u64)> = spec
        .schemes
        .iter()
        .flat_map(|&s| spec.seeds.iter().map(move |&seed| (s, seed)))
        .collect();
    let runs: Vec<CompareRun> = jobs
        .par_iter()
        .map(|&(scheme, seed)| CompareRun {
            scheme,
            seed,
            result: run(problem, &spec.solver_config(scheme, seed, opt)),
        })
        .collect();

    let mut rows = Vec::new();
    for scheme in &spec.schemes {
        let mine: Vec<&CompareRun> = runs.iter().filter(|r| r.scheme == *scheme).collect();
        let mut interp: Vec<Vec<Option<f64>>> = vec![Vec::new(); spec.gap_levels.len()];
        let (mut gaps, mut subs, mut ops) = (Vec::new(), Vec::new(), Vec::new());
        for r in &mine {
            match &r.result {
                Ok(res) => {
                    let last = res.trace.last().expect("trace is nonempty");
                    for (k, &eps) in spec.gap_levels.iter().enumerate() {
                        interp[k].push(epochs_to_gap_interpolated(&res.trace, eps));
                    }
                    gaps.push(Some(last.gap));
                    subs.push(last.suboptimality);
                    ops.push(Some(last.vector_ops as f64));
                    rows.push(SummaryRow {
                        scheme: scheme.name().into(),
                        kind: RowKind::Run,
                        seed: Some(r.seed),
                        epochs_to_gap: spec
                            .gap_levels
                            .iter()
                            .map(|&e| epochs_to_gap(&res.trace, e))
                            .collect(),
                        final_gap: Some(last.gap),
                        final_suboptimality: last.suboptimality,
                        total_vector_ops: Some(last.vector_ops as f64),
                        termination: Some(res.termination.name().into()),
                        error: None,
                    });
                }
                Err(e) => {
                    for col in interp.iter_mut() {
                        col.push(None);
                    }
                    gaps.push(None);
                    subs.push(None);
                    ops.push(None);
                    rows.push(SummaryRow {
                        scheme: scheme.name().into(),
                        kind: RowKind::Run,
                        seed: Some(r.seed),
                        epochs_to_gap: vec![None; spec.gap_levels.len()],
                        final_gap: None,
                        final_suboptimality: None,
                        total_vector_ops: None,
                        termination: None,
                        error: Some(e.to_string()),
                    });
                }
            }
        }
        for (kind, agg) in [
            (RowKind::Median, median as fn(&[Option<f64>]) -> Option<f64>),
            (RowKind::Mean, mean),
        ] {
            rows.push(SummaryRow {
                scheme: scheme.name().into(),
                kind,
                seed: None,
                epochs_to_gap: interp.iter().map(|col| agg(col)).collect(),
                final_gap: agg(&gaps),
                final_suboptimality: agg(&subs),
                total_vector_ops: agg(&ops),
                termination: None,
                error: None,
            });
        }
    }
    Ok(Comparison {
        reference: Some(reference),
        runs,
        rows,
    })
}

/// Measured work per epoch for one scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub scheme: String,
    pub epochs: f64,
    pub n: usize,
    pub nnz: usize,
    /// Column passes spent on coordinate updates (one dot, one axpy each).
    pub update_column_ops: u64,
    pub refreshes: u64,
    pub refresh_column_ops: u64,
    pub refreshes_per_epoch: f64,
    pub refresh_column_ops_per_epoch: f64,
    /// Cost class per epoch: `nnz` or `n*nnz`.
    pub cost_class: &'static str,
}

/// Runs each scheme for the full budget (no early stop) and tallies refresh work.
pub fn bench(spec: &ExperimentSpec, problem: &ProblemInstance) -> Result<Vec<BenchRow>> {
    spec.validate()?;
    let seed = spec.seeds[0];
    spec.schemes
        .par_iter()
        .map(|&scheme| {
            let cfg = SolverConfig {
                gap_tol: 0.0,
                record_theory: false,
                suboptimality_ref: None,
                ..spec.solver_config(scheme, seed, None)
            };
            let res = run(problem, &cfg)?;
            let epochs = res.state.t as f64 / problem.n() as f64;
            let total = res.state.ops.column_ops();
            Ok(BenchRow {
                scheme: scheme.name().into(),
                epochs,
                n: problem.n(),
                nnz: problem.matrix().nnz(),
                update_column_ops: total - res.refresh.column_ops,
                refreshes: res.refresh.refreshes,
                refresh_column_ops: res.refresh.column_ops,
                refreshes_per_epoch: res.refresh.refreshes as f64 / epochs,
                refresh_column_ops_per_epoch: res.refresh.column_ops as f64 / epochs,
                cost_class: match scheme.refresh() {
                    Refresh::PerIteration => "n*nnz",
                    Refresh::Static | Refresh::PerEpoch => "nnz",
                },
            })
        })
        .collect()
}

/// Whether a run ended normally (converged or out of budget).
pub fn is_success(t: Termination) -> bool {
    matches!(
        t,
        Termination::GapTolReached | Termination::BudgetExhausted | Termination::SupportEmpty
    )
}

#[cfg(test)]
mod tests;
