use std::collections::BTreeMap;
use std::path::Path;

use unigrad::solvers::AdagradVariant;

use crate::config::{RunConfig, Settings, SolverKind};
use crate::error::{CliError, CliResult};
use crate::output::{self, SweepRow, WideTable};
use crate::runner::{run_all, Job, JobOutput};

fn settings_of(cfg: &RunConfig) -> Vec<Settings> {
    cfg.entries.iter().map(|e| e.settings.clone()).collect()
}

/// Labels must be unique since they name the trace files.
fn unique_labels(cfg: &RunConfig) -> Vec<String> {
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    cfg.entries
        .iter()
        .map(|e| {
            let base = e.solver.label();
            let n = seen.entry(base.clone()).or_insert(0);
            *n += 1;
            if *n == 1 {
                base
            } else {
                format!("{base}-{n}")
            }
        })
        .collect()
}

fn write_runs(out: &Path, runs: &[JobOutput]) -> CliResult<()> {
    std::fs::create_dir_all(out)?;
    for run in runs {
        let path = out.join(output::trace_file_name(&run.job.label, run.job.seed));
        output::write_trace(&path, &run.result.trace)?;
    }
    output::write_summary(&out.join("summary.csv"), runs)?;
    Ok(())
}

fn report(runs: &[JobOutput]) {
    for run in runs {
        let gap = run
            .final_gap
            .map(|g| format!("{g:.3e}"))
            .unwrap_or_else(|| "-".into());
        println!(
            "{:<24} seed {:<6} F = {:.10e}  gap = {gap}  calls = {}",
            run.job.label, run.job.seed, run.final_f, run.result.oracle_calls
        );
    }
}

pub fn cmd_run(cfg: &RunConfig) -> CliResult<()> {
    let labels = unique_labels(cfg);
    let mut jobs = Vec::new();
    for (i, entry) in cfg.entries.iter().enumerate() {
        for &seed in &cfg.seeds {
            jobs.push(Job {
                entry: i,
                solver: entry.solver,
                diameter: entry.settings.diameter(),
                seed,
                label: labels[i].clone(),
                trace_every: None,
            });
        }
    }
    let runs = run_all(&settings_of(cfg), &jobs, cfg.jobs)?;
    write_runs(&cfg.out, &runs)?;
    report(&runs);
    Ok(())
}

/// Grid point for a sweep: the solver as run and the parameter it carries.
fn sweep_points(entry_solver: SolverKind, cfg: &RunConfig) -> Vec<(SolverKind, &'static str, f64)> {
    match entry_solver {
        SolverKind::Sgd { step: Some(s), .. } => vec![(entry_solver, "step", s)],
        SolverKind::Sgd {
            step: None,
            decaying,
        } => cfg
            .steps
            .iter()
            .map(|&s| {
                (
                    SolverKind::Sgd {
                        step: Some(s),
                        decaying,
                    },
                    "step",
                    s,
                )
            })
            .collect(),
        other => cfg.diameters.iter().map(|&d| (other, "D", d)).collect(),
    }
}

pub fn cmd_sweep(cfg: &RunConfig) -> CliResult<()> {
    for entry in &cfg.entries {
        let empty = match entry.solver {
            SolverKind::Sgd { step: None, .. } => cfg.steps.is_empty(),
            SolverKind::Sgd { .. } => false,
            _ => cfg.diameters.is_empty(),
        };
        if empty {
            return Err(CliError::Config(format!(
                "empty parameter grid for {}",
                entry.solver.label()
            )));
        }
    }

    let labels = unique_labels(cfg);
    let mut jobs = Vec::new();
    // (entry, label, param name, param value)
    let mut points = Vec::new();
    for (i, entry) in cfg.entries.iter().enumerate() {
        for (solver, param, value) in sweep_points(entry.solver, cfg) {
            let label = match param {
                "D" => format!("{}-D{value}", labels[i]),
                _ => match entry.solver {
                    SolverKind::Sgd { step: None, .. } => solver.label(),
                    _ => labels[i].clone(),
                },
            };
            let diameter = if param == "D" {
                value
            } else {
                entry.settings.diameter()
            };
            for &seed in &cfg.seeds {
                jobs.push(Job {
                    entry: i,
                    solver,
                    diameter,
                    seed,
                    label: label.clone(),
                    trace_every: None,
                });
            }
            points.push((i, label, param, value));
        }
    }

    let runs = run_all(&settings_of(cfg), &jobs, cfg.jobs)?;
    write_runs(&cfg.out, &runs)?;

    let n_seeds = cfg.seeds.len();
    let mut rows: Vec<SweepRow> = points
        .iter()
        .enumerate()
        .map(|(p, (_, label, param, value))| {
            let chunk = &runs[p * n_seeds..(p + 1) * n_seeds];
            let mean = chunk.iter().map(|r| r.final_f).sum::<f64>() / n_seeds as f64;
            SweepRow {
                solver: label.clone(),
                param,
                value: *value,
                mean_final_f: mean,
                seeds: n_seeds,
                best: false,
            }
        })
        .collect();
    for (i, label) in labels.iter().enumerate() {
        let best = points
            .iter()
            .enumerate()
            .filter(|(_, (e, ..))| *e == i)
            .map(|(p, _)| p)
            .min_by(|&a, &b| better_first(&rows[a], &rows[b]));
        if let Some(p) = best {
            rows[p].best = true;
            println!(
                "{label}: best {} = {} (mean final F = {:.10e} over {n_seeds} seeds)",
                rows[p].param, rows[p].value, rows[p].mean_final_f
            );
        }
    }
    output::write_sweep(&cfg.out.join("sweep.csv"), &rows)?;
    Ok(())
}

/// Orders by mean final F (NaN last), ties broken toward the smaller parameter.
fn better_first(a: &SweepRow, b: &SweepRow) -> std::cmp::Ordering {
    let key = |r: &SweepRow| {
        if r.mean_final_f.is_nan() {
            f64::INFINITY
        } else {
            r.mean_final_f
        }
    };
    key(a).total_cmp(&key(b)).then(a.value.total_cmp(&b.value))
}

pub fn cmd_compare(cfg: &RunConfig) -> CliResult<()> {
    if cfg.entries.len() < 2 {
        return Err(CliError::Config(
            "compare needs at least two solvers".into(),
        ));
    }
    let first = &cfg.entries[0].settings;
    if let Some(bad) = cfg.entries.iter().find(|e| !e.settings.same_problem(first)) {
        return Err(CliError::Config(format!(
            "compare needs one shared problem, oracle and iteration budget; {} differs",
            bad.solver.label()
        )));
    }
    let usgm = cfg
        .entries
        .iter()
        .position(|e| e.solver == SolverKind::Usgm);
    let has_adagrad = cfg
        .entries
        .iter()
        .any(|e| e.solver == SolverKind::Adagrad(AdagradVariant::GradDiff));
    // The domination check needs every USGM step, not just the traced ones.
    let domination_entry = usgm.filter(|_| has_adagrad);

    let labels = unique_labels(cfg);
    let mut jobs = Vec::new();
    for &seed in &cfg.seeds {
        for (i, entry) in cfg.entries.iter().enumerate() {
            jobs.push(Job {
                entry: i,
                solver: entry.solver,
                diameter: entry.settings.diameter(),
                seed,
                label: labels[i].clone(),
                trace_every: (Some(i) == domination_entry).then_some(1),
            });
        }
    }
    let mut runs = run_all(&settings_of(cfg), &jobs, cfg.jobs)?;

    let every = first.trace_every;
    let n = cfg.entries.len();
    let mut table = WideTable {
        labels: labels.clone(),
        with_domination: domination_entry.is_some(),
        rows: Vec::new(),
    };
    for (s, &seed) in cfg.seeds.iter().enumerate() {
        let group = &mut runs[s * n..(s + 1) * n];
        let mut domination = BTreeMap::new();
        if let Some(u) = domination_entry {
            let d = group[u].job.diameter;
            let mut sum_sq = 0.0;
            for rec in &group[u].result.trace {
                let gd = rec.grad_diff_norm.unwrap_or(0.0);
                sum_sq += gd * gd;
                domination.insert(rec.k, sum_sq.sqrt() / d - rec.h);
            }
            let iters = first.iters;
            group[u]
                .result
                .trace
                .retain(|rec| rec.k % every == 0 || rec.k == iters);
        }
        let ks: Vec<usize> = group[0].result.trace.iter().map(|r| r.k).collect();
        for (row, &k) in ks.iter().enumerate() {
            let values = group
                .iter()
                .map(|run| run.result.trace[row].f_value)
                .collect();
            table
                .rows
                .push((seed, k, values, domination.get(&k).copied()));
        }
    }

    write_runs(&cfg.out, &runs)?;
    output::write_wide(&cfg.out.join("compare.csv"), &table)?;
    report(&runs);
    if table.with_domination {
        let worst = table
            .rows
            .iter()
            .filter_map(|r| r.3)
            .fold(f64::INFINITY, f64::min);
        println!("min over k of (AdaGrad bound - H) for usgm: {worst:.3e}");
    }
    Ok(())
}
