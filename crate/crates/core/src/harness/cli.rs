use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use super::{
    bench, compare, is_success, prepare_problem, write_bench_csv, write_stats_csv,
    write_summary_csv, write_trace_csv, DataSource, ExperimentSpec, Lambda,
};
use crate::data::{dataset_stats, load_libsvm, synthetic_lasso, synthetic_svm, LoadOptions};
use crate::error::{Error, Result};
use crate::problems::ProblemKind;
use crate::sampling::{SamplingScheme, DEFAULT_SIGMA};
use crate::solver::{run, SolverConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

const DEFAULT_SEEDS: [u64; 5] = [0, 1, 2, 3, 4];

#[derive(Debug, Parser)]
#[command(
    name = "adacd",
    version,
    about = "Coordinate descent with adaptive sampling and gap certificates"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one scheme with one seed and write its trace.
    Solve(RunArgs),
    /// Run every scheme × seed pair and write a summary plus per-run traces.
    Compare(RunArgs),
    /// Measure update and refresh work per epoch for each scheme.
    Bench(RunArgs),
    /// Print dataset statistics.
    Stats(StatsArgs),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct DataArgs {
    /// LIBSVM-format input file.
    #[arg(long, value_name = "PATH")]
    pub data: Option<PathBuf>,
    /// Generated data: `d,n,frac,noise`.
    #[arg(long, value_name = "D,N,FRAC,NOISE", value_parser = parse_synthetic)]
    pub synthetic: Option<(usize, usize, f64, f64)>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Seed of the synthetic data generator.
    #[arg(long, default_value_t = 0)]
    pub data_seed: u64,
    #[arg(long, default_value = "lasso")]
    pub problem: ProblemKind,
    #[arg(long, default_value_t = 0.05, conflicts_with = "lambda_frac")]
    pub lambda: f64,
    /// Lasso only: λ as a fraction of the smallest λ with an all-zero solution.
    #[arg(long)]
    pub lambda_frac: Option<f64>,
    /// Comma-separated scheme names; `compare` and `bench` default to all.
    #[arg(long, value_delimiter = ',')]
    pub scheme: Vec<String>,
    /// Uniform mixing weight of the ada-uniform scheme.
    #[arg(long, default_value_t = DEFAULT_SIGMA)]
    pub sigma: f64,
    /// Comma-separated seeds; defaults to 0 for `solve` and 0..4 otherwise.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Vec<u64>,
    #[arg(long, default_value_t = 100)]
    pub epochs: u64,
    /// Stop once the duality gap is at or below this value.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Scale every column to unit Euclidean norm.
    #[arg(long)]
    pub normalize: bool,
    /// Record theory constants and audit the per-iteration inequalities.
    #[arg(long)]
    pub theory: bool,
    /// Iterations between trace rows; defaults to one epoch.
    #[arg(long)]
    pub trace_every: Option<u64>,
    /// Gap levels reported by `compare`.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "1e-1,1e-2,1e-3,1e-4,1e-6"
    )]
    pub gap_levels: Vec<f64>,
    /// Output file; standard output when omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value_t = 0)]
    pub data_seed: u64,
    /// Generator used for `--synthetic`.
    #[arg(long, default_value = "lasso")]
    pub problem: ProblemKind,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

fn parse_synthetic(s: &str) -> std::result::Result<(usize, usize, f64, f64), String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err("expected d,n,frac,noise".into());
    }
    let d = parts[0].parse().map_err(|e| format!("d: {e}"))?;
    let n = parts[1].parse().map_err(|e| format!("n: {e}"))?;
    let frac = parts[2].parse().map_err(|e| format!("frac: {e}"))?;
    let noise = parts[3].parse().map_err(|e| format!("noise: {e}"))?;
    Ok((d, n, frac, noise))
}

impl DataArgs {
    fn source(&self, seed: u64) -> DataSource {
        match (&self.data, self.synthetic) {
            (Some(path), _) => DataSource::File(path.clone()),
            (None, Some((d, n, frac, noise))) => DataSource::Synthetic {
                d,
                n,
                frac,
                noise,
                seed,
            },
            (None, None) => unreachable!("clap enforces one data source"),
        }
    }
}

impl RunArgs {
    fn spec(&self, single: bool) -> Result<ExperimentSpec> {
        let schemes = if self.scheme.is_empty() {
            if single {
                vec![SamplingScheme::Uniform]
            } else {
                SamplingScheme::all(self.sigma).to_vec()
            }
        } else {
            self.scheme
                .iter()
                .map(|s| SamplingScheme::parse(s, self.sigma))
                .collect::<Result<_>>()?
        };
        let seeds = match (self.seeds.is_empty(), single) {
            (false, _) => self.seeds.clone(),
            (true, true) => vec![0],
            (true, false) => DEFAULT_SEEDS.to_vec(),
        };
        if single && (schemes.len() != 1 || seeds.len() != 1) {
            return Err(Error::InvalidArgument(
                "solve takes exactly one scheme and one seed".into(),
            ));
        }
        Ok(ExperimentSpec {
            source: self.data.source(self.data_seed),
            problem: self.problem,
            lambda: self
                .lambda_frac
                .map_or(Lambda::Absolute(self.lambda), Lambda::FractionOfMax),
            schemes,
            seeds,
            max_epochs: self.epochs,
            gap_tol: self.tol,
            normalize: self.normalize,
            record_theory: self.theory,
            trace_every: self.trace_every,
            gap_levels: self.gap_levels.clone(),
            out: self.out.clone(),
        })
    }
}

/// Exit status for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidArgument(_) => EXIT_USAGE,
        Error::Io { .. }
        | Error::Parse { .. }
        | Error::EmptyDataset
        | Error::ZeroColumn(_)
        | Error::Orientation { .. }
        | Error::Labels(_) => EXIT_DATA,
        Error::NoSamplingMass
        | Error::VariateOutOfRange(_)
        | Error::Incoherent(_)
        | Error::NonFinite { .. }
        | Error::Invariant(_) => EXIT_NUMERICAL,
    }
}

fn io_error(path: &Path, source: io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Opens `path` for writing, or standard output when `None`.
fn with_output(
    path: Option<&Path>,
    f: impl FnOnce(&mut dyn Write) -> io::Result<()>,
) -> Result<()> {
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|e| io_error(p, e))?;
            let mut w = BufWriter::new(file);
            f(&mut w)
                .and_then(|_| w.flush())
                .map_err(|e| io_error(p, e))
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            f(&mut w)
                .and_then(|_| w.flush())
                .map_err(|e| io_error(Path::new("<stdout>"), e))
        }
    }
}

/// Trace file of one comparison run, placed next to the summary file.
pub fn trace_path(summary: &Path, scheme: &str, seed: u64) -> PathBuf {
    let stem = summary
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("summary");
    summary.with_file_name(format!("{stem}.{scheme}.seed{seed}.csv"))
}

fn cmd_solve(args: &RunArgs) -> Result<i32> {
    let spec = args.spec(true)?;
    let (_, problem) = prepare_problem(&spec)?;
    let cfg = SolverConfig {
        scheme: spec.schemes[0],
        max_epochs: spec.max_epochs,
        gap_tol: spec.gap_tol,
        seed: spec.seeds[0],
        trace_every: spec.trace_every,
        record_theory: spec.record_theory,
        suboptimality_ref: None,
    };
    let res = run(&problem, &cfg)?;
    with_output(spec.out.as_deref(), |w| {
        write_trace_csv(w, &res.trace, spec.record_theory)
    })?;
    if let Some(log) = &res.theory {
        if !log.is_clean() {
            log::warn!("theory audit found violations: {log:?}");
        }
    }
    log::info!(
        "{} after {} iterations",
        res.termination.name(),
        res.state.t
    );
    Ok(if is_success(res.termination) {
        EXIT_OK
    } else {
        EXIT_NUMERICAL
    })
}

fn cmd_compare(args: &RunArgs) -> Result<i32> {
    let spec = args.spec(false)?;
    let (_, problem) = prepare_problem(&spec)?;
    let cmp = compare(&spec, &problem)?;
    with_output(spec.out.as_deref(), |w| {
        write_summary_csv(w, &cmp.rows, &spec.gap_levels)
    })?;
    if let Some(out) = &spec.out {
        for r in &cmp.runs {
            if let Ok(res) = &r.result {
                let path = trace_path(out, r.scheme.name(), r.seed);
                let mut buf = Vec::new();
                write_trace_csv(&mut buf, &res.trace, spec.record_theory)
                    .map_err(|e| io_error(&path, e))?;
                fs::write(&path, buf).map_err(|e| io_error(&path, e))?;
            }
        }
    }
    let failed = cmp.runs.iter().filter(|r| r.result.is_err()).count();
    if failed > 0 {
        log::error!("{failed} of {} runs failed", cmp.runs.len());
        return Ok(EXIT_NUMERICAL);
    }
    Ok(EXIT_OK)
}

fn cmd_bench(args: &RunArgs) -> Result<i32> {
    let spec = args.spec(false)?;
    let (_, problem) = prepare_problem(&spec)?;
    let rows = bench(&spec, &problem)?;
    with_output(spec.out.as_deref(), |w| write_bench_csv(w, &rows))?;
    Ok(EXIT_OK)
}

fn cmd_stats(args: &StatsArgs) -> Result<i32> {
    let (name, ds) = match args.data.source(args.data_seed) {
        DataSource::File(path) => {
            let name = path
                .file_name()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            (
                name,
                load_libsvm(
                    &path,
                    LoadOptions {
                        strict: true,
                        n_features: None,
                    },
                )?,
            )
        }
        DataSource::Synthetic {
            d,
            n,
            frac,
            noise,
            seed,
        } => {
            let ds = match args.problem {
                ProblemKind::Lasso => synthetic_lasso(d, n, frac, noise, seed)?.dataset,
                ProblemKind::Svm => synthetic_svm(d, n, frac, noise, seed)?.dataset,
            };
            ("synthetic".to_string(), ds)
        }
    };
    let ds = ds.to_datapoints_as_columns();
    let stats = dataset_stats(&ds.matrix);
    with_output(args.out.as_deref(), |w| write_stats_csv(w, &name, &stats))?;
    Ok(EXIT_OK)
}

/// Parses `args` (program name first), runs the command and returns the exit status.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let outcome = match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Stats(a) => cmd_stats(a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
