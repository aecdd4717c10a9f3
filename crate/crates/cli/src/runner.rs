//! Builds problems and optimizers from a configuration and drives single
//! runs and learning-rate sweeps.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use polyadapt::adapter::{AdaptiveOptimizer, StopReason, StoppingCriteria};
use polyadapt::metrics::make_metric;
use polyadapt::problems::{
    BatchObjective, LogRegDataset, LogRegProblem, NoisyValue, QuadraticProblem, RosenbrockProblem,
};
use polyadapt::types::{ParamVector, StepRecord, Validate};

use crate::config::{ConfigError, ProblemKind, RunConfig};
use crate::trace::write_trace;
use crate::{EXIT_CONFIG, EXIT_DIVERGED, EXIT_OK, OUT_DIR_ENV};

type Result<T> = std::result::Result<T, ConfigError>;

/// Outcome of one optimizer run.
#[derive(Debug)]
pub struct RunSummary {
    pub eta0: f64,
    pub final_loss: f64,
    pub final_eta: f64,
    pub iterations: usize,
    pub stop: StopReason,
    pub trace: Vec<StepRecord>,
}

impl RunSummary {
    pub fn diverged(&self) -> bool {
        self.stop == StopReason::NonFiniteLoss
    }
}

/// Loss after the last step, taken from the final trace row: the same-batch
/// re-evaluation when one ran, otherwise the pre-step value.
fn final_loss(trace: &[StepRecord]) -> f64 {
    match trace.last() {
        Some(rec) if rec.f_after.is_finite() => rec.f_after,
        Some(rec) => rec.f_before,
        None => f64::NAN,
    }
}

fn build_problem(cfg: &RunConfig) -> Result<(Box<dyn BatchObjective>, ParamVector)> {
    let seed = cfg.run.seed;
    let p = &cfg.problem;
    let (base, theta0): (Box<dyn BatchObjective>, ParamVector) = match p.kind {
        ProblemKind::Quadratic => {
            let quad = QuadraticProblem::log_spaced(p.dim, p.cond, vec![0.0; p.dim], 0.0)
                .map_err(|e| ConfigError(e.to_string()))?;
            let theta0 = match &p.theta0 {
                Some(t) => ParamVector::new(t.clone()),
                None => ParamVector::new(vec![1.0; p.dim]),
            };
            (Box::new(quad), theta0)
        }
        ProblemKind::Rosenbrock => {
            let theta0 = match &p.theta0 {
                Some(t) => ParamVector::new(t.clone()),
                None => ParamVector::new(vec![-1.5, 1.5]),
            };
            (Box::new(RosenbrockProblem), theta0)
        }
        ProblemKind::LogReg => {
            let mut ds = match &p.data {
                Some(path) => LogRegDataset::from_csv(path, p.l2, p.batch_size)
                    .map_err(|e| ConfigError(e.to_string()))?,
                None => {
                    let mut ds =
                        LogRegDataset::synthetic(seed, p.examples, p.features, p.separation)
                            .map_err(|e| ConfigError(e.to_string()))?;
                    ds.l2_reg = p.l2;
                    ds
                }
            };
            if p.batch_size >= 1 && p.batch_size <= ds.len() {
                ds.batch_size = p.batch_size;
            }
            let n = ds.n_features();
            let theta0 = match &p.theta0 {
                Some(t) => ParamVector::new(t.clone()),
                None => ParamVector::zeros(n),
            };
            (Box::new(LogRegProblem::new(ds)), theta0)
        }
    };
    validate_theta0(&theta0)?;
    if p.value_noise > 0.0 {
        Ok((
            Box::new(NoisyValue::new(
                BoxedObjective(base),
                p.value_noise,
                seed ^ 0x5EED,
            )),
            theta0,
        ))
    } else {
        Ok((base, theta0))
    }
}

fn validate_theta0(theta0: &ParamVector) -> Result<()> {
    let violations = theta0.violations();
    if violations.is_empty() {
        Ok(())
    } else {
        Err(ConfigError(violations.join("; ")))
    }
}

/// Adapter so a boxed objective can sit inside the noise wrapper.
struct BoxedObjective(Box<dyn BatchObjective>);

impl BatchObjective for BoxedObjective {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn evaluate(
        &mut self,
        theta: &ParamVector,
    ) -> polyadapt::Result<polyadapt::types::Observation> {
        self.0.evaluate(theta)
    }
    fn reevaluate(&mut self, theta: &ParamVector) -> polyadapt::Result<f64> {
        self.0.reevaluate(theta)
    }
    fn advance_batch(&mut self) {
        self.0.advance_batch()
    }
    fn steps_per_epoch(&self) -> usize {
        self.0.steps_per_epoch()
    }
}

/// Runs one experiment to completion.
pub fn execute_run(cfg: &RunConfig) -> Result<RunSummary> {
    let (mut problem, theta0) = build_problem(cfg)?;
    let adapt = cfg.effective_adapt();
    let metric = make_metric(cfg.optimizer, theta0.dim(), cfg.hyper)
        .map_err(|e| ConfigError(e.to_string()))?;
    let mut opt =
        AdaptiveOptimizer::new(metric, adapt, theta0).map_err(|e| ConfigError(e.to_string()))?;
    let stopping = StoppingCriteria {
        loss_tol: cfg.run.loss_tol,
        grad_tol: cfg.run.grad_tol,
    };
    let report = opt
        .run(problem.as_mut(), cfg.run.max_iters, &stopping)
        .map_err(|e| ConfigError(e.to_string()))?;
    let final_eta = opt.eta();
    let trace = opt.into_trace();
    Ok(RunSummary {
        eta0: cfg.adapt.eta0,
        final_loss: final_loss(&trace),
        final_eta,
        iterations: report.iterations,
        stop: report.stop,
        trace,
    })
}

/// Default output directory: $POLYADAPT_OUT_DIR when set, else the cwd.
pub fn default_out_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."))
}

fn run_trace_path(cfg: &RunConfig) -> PathBuf {
    match &cfg.run.out {
        Some(path) => path.clone(),
        None => default_out_dir().join("trace.csv"),
    }
}

fn stop_name(stop: StopReason) -> &'static str {
    match stop {
        StopReason::MaxIters => "max-iters",
        StopReason::LossTol => "loss-tol",
        StopReason::GradTol => "grad-tol",
        StopReason::NonFiniteLoss => "diverged",
    }
}

/// `run` subcommand: execute, persist the trace, print a summary line.
pub fn cmd_run(cfg: &RunConfig) -> i32 {
    let summary = match execute_run(cfg) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{e}");
            return EXIT_CONFIG;
        }
    };
    let path = run_trace_path(cfg);
    if let Err(e) = write_trace(&path, &summary.trace) {
        eprintln!("{e}");
        return EXIT_CONFIG;
    }
    println!(
        "final_loss = {:.6e}  final_eta = {:.6e}  iterations = {}  stop = {}  trace = {}",
        summary.final_loss,
        summary.final_eta,
        summary.iterations,
        stop_name(summary.stop),
        path.display()
    );
    if summary.diverged() {
        EXIT_DIVERGED
    } else {
        EXIT_OK
    }
}

/// One row of the sweep summary.
#[derive(Debug)]
pub struct SweepRow {
    pub eta0: f64,
    pub outcome: std::result::Result<RunSummary, String>,
    pub trace_path: Option<PathBuf>,
}

/// Runs the grid in parallel, one independently configured run per η₀.
/// Failures are recorded per row and do not abort the sweep.
pub fn run_sweep(
    cfg: &RunConfig,
    etas: &[f64],
    jobs: usize,
    out_dir: &Path,
) -> Result<Vec<SweepRow>> {
    if etas.is_empty() {
        return Err(ConfigError("sweep grid must not be empty".into()));
    }
    std::fs::create_dir_all(out_dir)
        .map_err(|e| ConfigError(format!("cannot create {}: {e}", out_dir.display())))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| ConfigError(format!("cannot build thread pool: {e}")))?;
    let rows = pool.install(|| {
        etas.par_iter()
            .map(|&eta0| {
                let mut run_cfg = cfg.clone();
                run_cfg.adapt.eta0 = eta0;
                let trace_path = out_dir.join(format!("sweep_eta_{eta0:e}.csv"));
                match execute_run(&run_cfg) {
                    Ok(summary) => {
                        let write = write_trace(&trace_path, &summary.trace);
                        match write {
                            Ok(()) => SweepRow {
                                eta0,
                                outcome: Ok(summary),
                                trace_path: Some(trace_path),
                            },
                            Err(e) => SweepRow {
                                eta0,
                                outcome: Err(e.0),
                                trace_path: None,
                            },
                        }
                    }
                    Err(e) => SweepRow {
                        eta0,
                        outcome: Err(e.0),
                        trace_path: None,
                    },
                }
            })
            .collect::<Vec<_>>()
    });
    Ok(rows)
}

/// `sweep` subcommand: run the grid, print the summary table.
pub fn cmd_sweep(cfg: &RunConfig, etas: &[f64], jobs: usize) -> i32 {
    let out_dir = cfg.run.out_dir.clone().unwrap_or_else(default_out_dir);
    let rows = match run_sweep(cfg, etas, jobs, &out_dir) {
        Ok(rows) => rows,
        Err(e) => {
            eprintln!("{e}");
            return EXIT_CONFIG;
        }
    };
    println!(
        "{:>12}  {:>12}  {:>12}  {:>10}  {:>10}  trace",
        "eta0", "final_loss", "final_eta", "iters", "stop"
    );
    for row in &rows {
        match &row.outcome {
            Ok(s) => println!(
                "{:>12.3e}  {:>12.4e}  {:>12.4e}  {:>10}  {:>10}  {}",
                row.eta0,
                s.final_loss,
                s.final_eta,
                s.iterations,
                stop_name(s.stop),
                row.trace_path
                    .as_ref()
                    .map(|p| p.display().to_string())
                    .unwrap_or_default()
            ),
            Err(e) => println!("{:>12.3e}  failed: {e}", row.eta0),
        }
    }
    EXIT_OK
}
