use std::fs::File;
use std::io::BufReader;
use std::time::Instant;

use rayon::prelude::*;
use unigrad::dataio::{self, Dataset, ParseOptions};
use unigrad::problem::{BallDomain, CompositeObjective};
use unigrad::solvers::{
    run_adagrad_norm, run_projected_subgrad, run_ugm, run_usfgm, run_usgm, Silent, SolveResult,
    SolverOptions, StepRule, SurrogateMode,
};
use unigrad::MetricSpace;

use crate::config::{DataSource, OracleSpec, ProblemKind, Settings, SolverKind};
use crate::error::{CliError, CliResult};

pub struct Instance {
    pub objective: CompositeObjective,
    /// Exact optimal value when the data was generated with a known minimizer.
    pub known_optimum: Option<f64>,
}

pub fn load_dataset(settings: &Settings, seed: u64) -> CliResult<(Dataset, Option<Vec<f64>>)> {
    let logistic = settings.problem == ProblemKind::Logistic;
    let (mut ds, x_star) = match &settings.data {
        DataSource::Libsvm(path) => {
            let file = File::open(path).map_err(|e| {
                CliError::Config(format!("cannot open data file {}: {e}", path.display()))
            })?;
            let opts = ParseOptions {
                classification: logistic,
            };
            let ds = dataio::parse_libsvm(BufReader::new(file), opts, &path.display().to_string())
                .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
            (ds, None)
        }
        DataSource::Synthetic {
            m,
            n,
            seed: data_seed,
        } => {
            let s = data_seed.unwrap_or(seed);
            match settings.problem {
                ProblemKind::Logistic => (dataio::synth_classification(*m, *n, s)?, None),
                ProblemKind::LeastSquares => {
                    let (ds, x) = dataio::synth_least_squares(*m, *n, s)?;
                    (ds, Some(x))
                }
                ProblemKind::PPower(p) => {
                    let (ds, x) = dataio::synth_p_power(*m, *n, p, s)?;
                    (ds, Some(x))
                }
            }
        }
    };
    if settings.normalize {
        ds.normalize_max_abs();
    }
    // Rescaling columns moves the planted minimizer.
    let x_star = if settings.normalize { None } else { x_star };
    Ok((ds, x_star))
}

pub fn build_instance(settings: &Settings, seed: u64) -> CliResult<Instance> {
    let (ds, x_star) = load_dataset(settings, seed)?;
    let n = ds.cols();
    let domain = BallDomain::centered(n, settings.radius)?;
    let metric = match &settings.b_diag {
        None => MetricSpace::identity(n)?,
        Some(b) if b.len() == n => MetricSpace::diagonal(b.clone())?,
        Some(b) => {
            return Err(CliError::Config(format!(
                "b_diag has {} entries but the data has {n} features",
                b.len()
            )))
        }
    };
    let objective = match settings.problem {
        ProblemKind::LeastSquares => {
            CompositeObjective::least_squares(ds.features, ds.labels, domain, metric)
        }
        ProblemKind::Logistic => {
            CompositeObjective::logistic(ds.features, ds.labels, domain, metric)
        }
        ProblemKind::PPower(p) => {
            CompositeObjective::p_power(ds.features, ds.labels, p, domain, metric)
        }
    }
    .map_err(|e| match e {
        unigrad::Error::Data(msg) => CliError::Data(msg),
        other => other.into(),
    })?;
    // The planted minimizer has zero residual; it is optimal only if it is feasible.
    let known_optimum = x_star
        .filter(|x| {
            objective
                .domain()
                .contains(objective.metric(), x)
                .unwrap_or(false)
        })
        .map(|_| 0.0);
    Ok(Instance {
        objective,
        known_optimum,
    })
}

#[derive(Debug, Clone)]
pub struct Job {
    /// Index into the config's solver entries.
    pub entry: usize,
    pub solver: SolverKind,
    pub diameter: f64,
    pub seed: u64,
    pub label: String,
    /// Overrides the entry's `trace_every` (compare needs every step for some checks).
    pub trace_every: Option<usize>,
}

pub struct JobOutput {
    pub job: Job,
    pub result: SolveResult,
    pub final_f: f64,
    /// Certificate gap if the solver has one, else `F − F*` when `F*` is known.
    pub final_gap: Option<f64>,
    pub wall_time_s: f64,
}

pub fn run_job(settings: &Settings, job: &Job) -> CliResult<JobOutput> {
    let inst = build_instance(settings, job.seed)?;
    let obj = &inst.objective;
    let opts = SolverOptions::for_problem(obj, settings.iters)
        .with_diameter(job.diameter)
        .with_trace_every(job.trace_every.unwrap_or(settings.trace_every))
        .with_report(settings.report);
    let oracle = settings.oracle.with_seed(job.seed);

    let start = Instant::now();
    let result = match job.solver {
        SolverKind::Ugm => {
            if settings.oracle != OracleSpec::Exact {
                return Err(CliError::Config("ugm needs the exact oracle".into()));
            }
            run_ugm(obj, &opts, &mut Silent)?
        }
        SolverKind::Usgm => run_usgm(obj, oracle, &opts, &mut Silent)?,
        SolverKind::Usfgm => run_usfgm(
            obj,
            oracle,
            SurrogateMode::StochasticSymmetrized,
            &opts,
            &mut Silent,
        )?,
        SolverKind::UsfgmDeterministic => run_usfgm(
            obj,
            oracle,
            SurrogateMode::DeterministicBregman,
            &opts,
            &mut Silent,
        )?,
        SolverKind::Sgd { step, decaying } => {
            let step = step.ok_or_else(|| {
                CliError::Config("sgd needs a step size (sgd:STEP) outside of sweeps".into())
            })?;
            let rule = if decaying {
                StepRule::Decaying(step)
            } else {
                StepRule::Constant(step)
            };
            run_projected_subgrad(obj, oracle, rule, &opts, &mut Silent)?
        }
        SolverKind::Adagrad(variant) => run_adagrad_norm(obj, oracle, variant, &opts, &mut Silent)?,
    };
    let wall_time_s = start.elapsed().as_secs_f64();

    let last = result.trace.last();
    let final_f = match last {
        Some(rec) => rec.f_value,
        None => obj.value(&result.x)?,
    };
    let final_gap = last
        .and_then(|rec| rec.cert_gap)
        .or_else(|| inst.known_optimum.map(|f_star| final_f - f_star));
    Ok(JobOutput {
        job: job.clone(),
        result,
        final_f,
        final_gap,
        wall_time_s,
    })
}

/// Runs jobs on a pool of `threads` workers; results come back in job order.
pub fn run_all(settings: &[Settings], jobs: &[Job], threads: usize) -> CliResult<Vec<JobOutput>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {threads} worker threads: {e}")))?;
    let results: Vec<CliResult<JobOutput>> = pool.install(|| {
        jobs.par_iter()
            .map(|j| run_job(&settings[j.entry], j))
            .collect()
    });
    results.into_iter().collect()
}
