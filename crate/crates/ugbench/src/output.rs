//! CSV writers. Reals use `{:.16e}` (17 significant digits, exact round-trip);
//! missing values are empty fields.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use unigrad::solvers::TraceRecord;

use crate::runner::JobOutput;

pub const TRACE_HEADER: &str = "k,F,H,r,beta,cert_gap,oracle_calls,wall_time_s";
pub const SUMMARY_HEADER: &str =
    "solver,seed,final_F,final_gap_or_cert,iters,oracle_calls,wall_time_s";
pub const SWEEP_HEADER: &str = "solver,param,value,mean_final_F,seeds,best";

pub fn real(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt_real(v: Option<f64>) -> String {
    v.map(real).unwrap_or_default()
}

fn create(path: &Path) -> std::io::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

pub fn trace_file_name(label: &str, seed: u64) -> String {
    format!("trace_{label}_{seed}.csv")
}

pub fn write_trace(path: &Path, trace: &[TraceRecord]) -> std::io::Result<()> {
    let mut out = create(path)?;
    writeln!(out, "{TRACE_HEADER}")?;
    for rec in trace {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            rec.k,
            real(rec.f_value),
            real(rec.h),
            real(rec.r),
            real(rec.beta),
            opt_real(rec.cert_gap),
            rec.oracle_calls,
            real(rec.wall_time_s)
        )?;
    }
    out.flush()
}

pub fn write_summary(path: &Path, runs: &[JobOutput]) -> std::io::Result<()> {
    let mut out = create(path)?;
    writeln!(out, "{SUMMARY_HEADER}")?;
    for run in runs {
        let iters = run.result.trace.last().map_or(0, |r| r.k);
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            run.job.label,
            run.job.seed,
            real(run.final_f),
            opt_real(run.final_gap),
            iters,
            run.result.oracle_calls,
            real(run.wall_time_s)
        )?;
    }
    out.flush()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub solver: String,
    /// `step` or `D`.
    pub param: &'static str,
    pub value: f64,
    pub mean_final_f: f64,
    pub seeds: usize,
    pub best: bool,
}

pub fn write_sweep(path: &Path, rows: &[SweepRow]) -> std::io::Result<()> {
    let mut out = create(path)?;
    writeln!(out, "{SWEEP_HEADER}")?;
    for row in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            row.solver,
            row.param,
            real(row.value),
            real(row.mean_final_f),
            row.seeds,
            row.best
        )?;
    }
    out.flush()
}

/// One row per (seed, k): `F` for every solver, plus the optional domination column.
pub struct WideTable {
    pub labels: Vec<String>,
    pub with_domination: bool,
    pub rows: Vec<(u64, usize, Vec<f64>, Option<f64>)>,
}

pub fn write_wide(path: &Path, table: &WideTable) -> std::io::Result<()> {
    let mut out = create(path)?;
    let mut header = String::from("seed,k");
    for label in &table.labels {
        header.push_str(&format!(",F_{label}"));
    }
    if table.with_domination {
        header.push_str(",adagrad_bound_minus_h");
    }
    writeln!(out, "{header}")?;
    for (seed, k, values, dom) in &table.rows {
        let mut line = format!("{seed},{k}");
        for v in values {
            line.push(',');
            line.push_str(&real(*v));
        }
        if table.with_domination {
            line.push(',');
            line.push_str(&opt_real(*dom));
        }
        writeln!(out, "{line}")?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_format_round_trips() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0] {
            let s = real(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
        assert_eq!(real(1.5), "1.5000000000000000e0");
    }

    #[test]
    fn trace_csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let rec = TraceRecord {
            k: 3,
            f_value: 2.0,
            h: 0.5,
            r: 0.25,
            beta: -1.0,
            cert_gap: None,
            grad_diff_norm: None,
            oracle_calls: 4,
            wall_time_s: 0.0,
        };
        write_trace(&path, &[rec]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], TRACE_HEADER);
        assert_eq!(
            lines[1],
            "3,2.0000000000000000e0,5.0000000000000000e-1,2.5000000000000000e-1,-1.0000000000000000e0,,4,0.0000000000000000e0"
        );
    }
}
