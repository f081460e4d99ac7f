//! Universal gradient methods and first-order baselines.
//!
//! Every solver works on a [`CompositeObjective`] over a ball, needs only the
//! diameter `D`, and emits one [`TraceRecord`] per iteration (or every
//! `trace_every` iterations) to an [`Observer`] and to the returned trace.

mod balance;
mod baselines;
mod ugm;
mod usfgm;
mod usgm;

use std::time::Instant;

use crate::error::{Error, Result};
use crate::problem::CompositeObjective;

pub use balance::{balance_update, reg_max_bound, BalanceInputs};
pub use baselines::{run_adagrad_norm, run_projected_subgrad, AdagradVariant, StepRule};
pub use ugm::run_ugm;
pub use usfgm::{run_usfgm, SurrogateMode};
pub use usgm::run_usgm;

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    /// Iteration count after this step (first record has `k = 1`).
    pub k: usize,
    /// Objective at the reported point (best, average or last iterate, per solver).
    pub f_value: f64,
    /// Step-size coefficient after the step (`1/step` for the subgradient baseline).
    pub h: f64,
    /// Length of the step that entered the balance equation.
    pub r: f64,
    /// The Bregman surrogate fed to the balance equation (`Aₖ₊₁`-scaled for USFGM).
    pub beta: f64,
    /// Certificate gap `εₖ*`, when the solver maintains one.
    pub cert_gap: Option<f64>,
    /// `‖gₖ₊₁ − gₖ‖*` for solvers with consecutive gradients at consecutive iterates.
    pub grad_diff_norm: Option<f64>,
    pub oracle_calls: u64,
    pub wall_time_s: f64,
}

/// Per-iteration hook.
pub trait Observer {
    fn observe(&mut self, record: &TraceRecord);
}

impl<F: FnMut(&TraceRecord)> Observer for F {
    fn observe(&mut self, record: &TraceRecord) {
        self(record)
    }
}

/// Observer that ignores everything.
pub struct Silent;

impl Observer for Silent {
    fn observe(&mut self, _record: &TraceRecord) {}
}

/// Which point's objective value goes into the trace for averaging methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportPoint {
    #[default]
    Average,
    Last,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Diameter `D` handed to the method; defaults to the ball's diameter.
    pub diameter: f64,
    pub max_iters: usize,
    /// Emit a record every `trace_every` iterations (and always at the last one).
    pub trace_every: usize,
    /// Starting point; the ball center when `None`.
    pub x0: Option<Vec<f64>>,
    pub report: ReportPoint,
}

impl SolverOptions {
    pub fn for_problem(obj: &CompositeObjective, max_iters: usize) -> Self {
        Self {
            diameter: obj.domain().diameter(),
            max_iters,
            trace_every: 1,
            x0: None,
            report: ReportPoint::Average,
        }
    }

    pub fn with_trace_every(mut self, every: usize) -> Self {
        self.trace_every = every;
        self
    }

    pub fn with_report(mut self, report: ReportPoint) -> Self {
        self.report = report;
        self
    }

    pub fn with_diameter(mut self, diameter: f64) -> Self {
        self.diameter = diameter;
        self
    }

    pub(crate) fn validate(&self, obj: &CompositeObjective) -> Result<Vec<f64>> {
        if !(self.diameter.is_finite() && self.diameter > 0.0) {
            return Err(Error::usage(format!(
                "diameter must be positive, got {}",
                self.diameter
            )));
        }
        if self.trace_every == 0 {
            return Err(Error::usage("trace_every must be at least 1"));
        }
        let x0 = match &self.x0 {
            Some(x) => x.clone(),
            None => obj.domain().center().to_vec(),
        };
        if !obj.domain().contains(obj.metric(), &x0)? {
            return Err(Error::usage("starting point lies outside the domain"));
        }
        Ok(x0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    /// The method's output point (best, average or last iterate, per solver).
    pub x: Vec<f64>,
    pub trace: Vec<TraceRecord>,
    pub final_h: f64,
    pub oracle_calls: u64,
}

/// Collects records, applies `trace_every` and forwards to the observer.
pub(crate) struct Tracer<'a> {
    start: Instant,
    every: usize,
    last: usize,
    records: Vec<TraceRecord>,
    observer: &'a mut dyn Observer,
}

impl<'a> Tracer<'a> {
    pub(crate) fn new(opts: &SolverOptions, observer: &'a mut dyn Observer) -> Self {
        Self {
            start: Instant::now(),
            every: opts.trace_every,
            last: opts.max_iters,
            records: Vec::with_capacity(opts.max_iters / opts.trace_every + 1),
            observer,
        }
    }

    /// Whether iteration `k` (1-based) will be recorded.
    pub(crate) fn wants(&self, k: usize) -> bool {
        k.is_multiple_of(self.every) || k == self.last
    }

    pub(crate) fn elapsed(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }

    pub(crate) fn push(&mut self, record: TraceRecord) {
        self.observer.observe(&record);
        self.records.push(record);
    }

    pub(crate) fn finish(self) -> Vec<TraceRecord> {
        self.records
    }
}

/// Running sum of iterates for the averaged output `x̄ₖ = (1/k) Σᵢ₌₁ᵏ xᵢ`.
#[derive(Debug, Clone)]
pub(crate) struct RunningAverage {
    sum: Vec<f64>,
    count: usize,
}

impl RunningAverage {
    pub(crate) fn new(dim: usize) -> Self {
        Self {
            sum: vec![0.0; dim],
            count: 0,
        }
    }

    pub(crate) fn add(&mut self, x: &[f64]) {
        for (s, xi) in self.sum.iter_mut().zip(x) {
            *s += xi;
        }
        self.count += 1;
    }

    pub(crate) fn mean(&self) -> Option<Vec<f64>> {
        (self.count > 0).then(|| {
            let k = self.count as f64;
            self.sum.iter().map(|s| s / k).collect()
        })
    }
}
