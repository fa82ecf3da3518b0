//! One driver per experiment kind; each returns a [`Report`] with checks evaluated.

mod counterexample;
mod cubic;
mod dynamic;
mod elliptic;
mod laplace;
mod sweep;

pub use counterexample::run_counterexample;
pub use cubic::run_cubic;
pub use dynamic::run_dynamic;
pub use elliptic::run_elliptic;
pub use laplace::run_laplace_study;
pub use sweep::{run_sweep, SweepRow};

use crate::config::{ExperimentConfig, Kind};
use crate::error::{ExpError, ExpResult};
use crate::report::Report;

pub fn run(cfg: &ExperimentConfig) -> ExpResult<Report> {
    let mut report = match cfg.kind {
        Kind::Elliptic => run_elliptic(cfg)?,
        Kind::Dynamic => run_dynamic(cfg)?,
        Kind::Sweep => run_sweep(cfg)?,
        Kind::Counterexample => run_counterexample(cfg)?,
        Kind::Laplace => run_laplace_study(cfg)?,
        Kind::Cubic => run_cubic(cfg)?,
    };
    report.evaluate(&cfg.checks);
    Ok(report)
}

/// Runs `job` on a pool of `cfg.workers` threads (all cores when unset).
pub(crate) fn in_pool<R: Send, F: FnOnce() -> R + Send>(cfg: &ExperimentConfig, job: F) -> ExpResult<R> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.workers {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| ExpError::Config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(job))
}

pub(crate) fn at_eps(eps: f64) -> impl FnOnce(memvisc::Error) -> ExpError {
    move |source| ExpError::Solver { eps, source }
}
