use memvisc::dynamic::{apriori_bound_check, energy_residual, integrate, oracle_convolution, ProblemData};
use memvisc::fem::TimeGrid;

use super::at_eps;
use crate::catalog::{law, Setup};
use crate::config::ExperimentConfig;
use crate::error::{ExpError, ExpResult};
use crate::report::{Report, Table};

pub(crate) fn problem(cfg: &ExperimentConfig, setup: &Setup, eps: f64) -> ExpResult<ProblemData<f64>> {
    let f = setup.dual_field(&cfg.loads.f)?;
    let g = setup.dual_field(&cfg.loads.g)?;
    let z = setup.nodal_field(&cfg.loads.z)?;
    let initial = setup.initial_data(cfg, &g, &z)?;
    Ok(ProblemData::new(eps, cfg.beta, cfg.time.horizon, setup.nodes())
        .map_err(at_eps(eps))?
        .with_f(f)
        .with_g(g)
        .with_lift(z)
        .with_initial(initial)
        .with_law(law(cfg.law)))
}

/// Single-`ε` diagnostics: energy ledger, oracle gap, balance refinement and the a-priori ratio.
pub fn run_dynamic(cfg: &ExperimentConfig) -> ExpResult<Report> {
    let spec = cfg.dynamic.clone().unwrap_or_default();
    let eps = *cfg
        .eps
        .first()
        .ok_or_else(|| ExpError::Config("dynamic runs need one eps".into()))?;
    let setup = Setup::new(cfg)?;
    let data = problem(cfg, &setup, eps)?;
    let grid = TimeGrid::new(cfg.time.horizon, cfg.time.steps)?;
    let (traj, ledger) = integrate(&data, &setup.mats, &grid).map_err(at_eps(eps))?;

    let mut report = Report::new(cfg)?;
    let mut energy = Table::new(
        "energy",
        &["t", "kinetic", "elastic", "memory", "dissipation", "work", "defect"],
    );
    for n in 0..ledger.len() {
        let defect = ledger.stored(n) + ledger.dissipation[n] - ledger.initial - ledger.work[n];
        energy.push(vec![
            traj.times[n],
            ledger.kinetic[n],
            ledger.elastic[n],
            ledger.memory[n],
            ledger.dissipation[n],
            ledger.work[n],
            defect,
        ]);
    }
    report.tables.push(energy);
    report.scalars.insert("energy_residual".into(), energy_residual(&ledger));

    if spec.oracle {
        let direct = oracle_convolution(&data, &setup.mats, &grid).map_err(at_eps(eps))?;
        let gap = traj
            .u
            .iter()
            .flatten()
            .zip(direct.u.iter().flatten())
            .fold(0.0f64, |g, (a, b)| g.max((a - b).abs()));
        report.scalars.insert("oracle_gap".into(), gap);
    }

    if !spec.energy_steps.is_empty() {
        let mut table = Table::new("refinement", &["steps", "dt", "energy_residual"]);
        for &steps in &spec.energy_steps {
            let grid = TimeGrid::new(cfg.time.horizon, steps)?;
            let (_, ledger) = integrate(&data, &setup.mats, &grid).map_err(at_eps(eps))?;
            table.push(vec![steps as f64, grid.dt(), energy_residual(&ledger)]);
        }
        let residuals = table.column("energy_residual").unwrap_or_default();
        report.series.insert(
            "energy_ratio".into(),
            residuals.windows(2).map(|p| p[0] / p[1]).collect(),
        );
        if let Some(finest) = residuals.last() {
            report.scalars.insert("energy_residual_finest".into(), *finest);
        }
        report.series.insert("refinement_residual".into(), residuals);
        report.tables.push(table);
    }

    let apriori = apriori_bound_check(&traj, &data, &setup.mats).map_err(at_eps(eps))?;
    report.scalars.insert("apriori_lhs".into(), apriori.lhs);
    report.scalars.insert("apriori_data".into(), apriori.data);
    report.scalars.insert("apriori_constant".into(), apriori.fitted_constant());
    Ok(report)
}
