//! CSV writers. Every file opens with a `# schema=N` comment line; a column
//! order change requires bumping [`TRACE_SCHEMA_VERSION`]. Floats use the
//! shortest representation that parses back to the same value; missing
//! values are empty fields.

use std::io::{self, Write};

use super::{BenchRow, SummaryRow};
use crate::data::DatasetStats;
use crate::solver::TraceRecord;

pub const TRACE_SCHEMA_VERSION: u32 = 1;

const TRACE_COLUMNS: &str =
    "epoch,iterations,vector_ops,dual_obj,primal_obj,gap,suboptimality,support_size";
const THEORY_COLUMNS: &str = "F_t,chi_G,chi_F";

/// Shortest round-trip text, switching to exponent form for very small or large magnitudes.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || !a.is_finite() || (1e-5..1e16).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn schema_line<W: Write + ?Sized>(out: &mut W) -> io::Result<()> {
    writeln!(out, "# schema={TRACE_SCHEMA_VERSION}")
}

/// One row per checkpoint; theory columns are appended when `theory` is set.
pub fn write_trace_csv<W: Write + ?Sized>(
    out: &mut W,
    trace: &[TraceRecord],
    theory: bool,
) -> io::Result<()> {
    schema_line(out)?;
    if theory {
        writeln!(out, "{TRACE_COLUMNS},{THEORY_COLUMNS}")?;
    } else {
        writeln!(out, "{TRACE_COLUMNS}")?;
    }
    for r in trace {
        write!(
            out,
            "{},{},{},{},{},{},{},{}",
            fmt_f64(r.epoch),
            r.iterations,
            r.vector_ops,
            fmt_f64(r.dual_obj),
            fmt_f64(r.primal_obj),
            fmt_f64(r.gap),
            opt(r.suboptimality),
            r.support_size
        )?;
        if theory {
            let t = r.theory;
            write!(
                out,
                ",{},{},{}",
                opt(t.map(|t| t.f_t)),
                opt(t.and_then(|t| t.chi_g)),
                opt(t.and_then(|t| t.chi_f))
            )?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Per-run rows followed by median and mean rows per scheme.
pub fn write_summary_csv<W: Write + ?Sized>(
    out: &mut W,
    rows: &[SummaryRow],
    gap_levels: &[f64],
) -> io::Result<()> {
    schema_line(out)?;
    write!(out, "scheme,row,seed")?;
    for eps in gap_levels {
        write!(out, ",epochs_to_gap_{eps:e}")?;
    }
    writeln!(
        out,
        ",final_gap,final_suboptimality,total_vector_ops,termination,error"
    )?;
    for r in rows {
        write!(
            out,
            "{},{},{}",
            r.scheme,
            r.kind.name(),
            r.seed.map(|s| s.to_string()).unwrap_or_default()
        )?;
        for e in &r.epochs_to_gap {
            write!(out, ",{}", opt(*e))?;
        }
        writeln!(
            out,
            ",{},{},{},{},{}",
            opt(r.final_gap),
            opt(r.final_suboptimality),
            opt(r.total_vector_ops),
            r.termination.as_deref().unwrap_or(""),
            r.error
                .as_deref()
                .map(|e| e.replace([',', '\n'], ";"))
                .unwrap_or_default()
        )?;
    }
    Ok(())
}

pub fn write_bench_csv<W: Write + ?Sized>(out: &mut W, rows: &[BenchRow]) -> io::Result<()> {
    schema_line(out)?;
    writeln!(
        out,
        "scheme,epochs,n,nnz,update_column_ops,refreshes,refresh_column_ops,refreshes_per_epoch,refresh_column_ops_per_epoch,cost_class"
    )?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.scheme,
            fmt_f64(r.epochs),
            r.n,
            r.nnz,
            r.update_column_ops,
            r.refreshes,
            r.refresh_column_ops,
            fmt_f64(r.refreshes_per_epoch),
            fmt_f64(r.refresh_column_ops_per_epoch),
            r.cost_class
        )?;
    }
    Ok(())
}

pub fn write_stats_csv<W: Write + ?Sized>(
    out: &mut W,
    name: &str,
    s: &DatasetStats,
) -> io::Result<()> {
    schema_line(out)?;
    writeln!(
        out,
        "dataset,d,n,nnz,density,norm_std_over_mean,norm_mean_over_std"
    )?;
    writeln!(
        out,
        "{},{},{},{},{},{},{}",
        name,
        s.d,
        s.n,
        s.nnz,
        fmt_f64(s.density),
        fmt_f64(s.norm_std_over_mean),
        fmt_f64(s.norm_mean_over_std)
    )
}
