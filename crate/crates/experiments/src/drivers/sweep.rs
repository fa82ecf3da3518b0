use rayon::prelude::*;

use memvisc::dynamic::{energy_residual, integrate, ProblemData};
use memvisc::elliptic::EllipticProblem;
use memvisc::fem::{spacetime_norms, FemMatrices, TimeGrid};

use super::{at_eps, in_pool};
use crate::catalog::{law, Setup};
use crate::config::ExperimentConfig;
use crate::error::ExpResult;
use crate::report::{Report, Table};

/// Distances to the stationary limit for one value of `ε`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow {
    pub eps: f64,
    /// `‖u_ε − u₀‖_{L²(0,T;V)}`
    pub l2_v: f64,
    /// `ε‖u̇_ε‖_{L²(0,T;H)}`
    pub l2_h_vel: f64,
    /// `‖u_ε − u₀‖_{L∞(η,T;V)}`
    pub linf_v_eta: f64,
    /// `ε‖u̇_ε‖_{L∞(η,T;H)}`
    pub linf_h_vel_eta: f64,
    /// `‖u_ε − u₀‖_{L∞(0,T;V)}`
    pub linf_v: f64,
    pub energy_residual: f64,
}

pub(crate) const COLUMNS: [&str; 7] = [
    "eps",
    "l2_v",
    "l2_h_vel",
    "linf_v_eta",
    "linf_h_vel_eta",
    "linf_v",
    "energy_residual",
];

impl SweepRow {
    pub(crate) fn values(&self) -> Vec<f64> {
        vec![
            self.eps,
            self.l2_v,
            self.l2_h_vel,
            self.linf_v_eta,
            self.linf_h_vel_eta,
            self.linf_v,
            self.energy_residual,
        ]
    }
}

/// Runs one `ε` and measures it against the stationary trajectory `u0`.
pub(crate) fn measure(
    data: &ProblemData<f64>,
    mats: &FemMatrices<f64>,
    grid: &TimeGrid<f64>,
    u0: &[Vec<f64>],
) -> memvisc::Result<SweepRow> {
    let (traj, ledger) = integrate(data, mats, grid)?;
    let diff: Vec<Vec<f64>> = traj
        .u
        .iter()
        .zip(u0)
        .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
        .collect();
    let eta = grid.window_start();
    let err = spacetime_norms(&diff, mats, grid, eta)?;
    let err_full = spacetime_norms(&diff, mats, grid, 0.0)?;
    let vel = spacetime_norms(&traj.u_dot, mats, grid, eta)?;
    Ok(SweepRow {
        eps: data.eps,
        l2_v: err.l2_v,
        l2_h_vel: data.eps * vel.l2_h,
        linf_v_eta: err.linf_v,
        linf_h_vel_eta: data.eps * vel.linf_h,
        linf_v: err_full.linf_v,
        energy_residual: energy_residual(&ledger),
    })
}

pub(crate) fn sweep_table(rows: &[SweepRow]) -> Table {
    let mut table = Table::new("sweep", &COLUMNS);
    for r in rows {
        table.push(r.values());
    }
    table
}

pub fn run_sweep(cfg: &ExperimentConfig) -> ExpResult<Report> {
    let setup = Setup::new(cfg)?;
    let f = setup.dual_field(&cfg.loads.f)?;
    let g = setup.dual_field(&cfg.loads.g)?;
    let z = setup.nodal_field(&cfg.loads.z)?;
    let initial = setup.initial_data(cfg, &g, &z)?;
    let grid = TimeGrid::new(cfg.time.horizon, cfg.time.steps)?.with_window(cfg.time.eta)?;
    let stationary = EllipticProblem::new(setup.mats.clone(), f.plus(&g), z.clone())?;
    let u0 = stationary.solve_stationary_trajectory(&grid);

    let rows = in_pool(cfg, || {
        cfg.eps
            .par_iter()
            .map(|&eps| {
                let data = ProblemData::new(eps, cfg.beta, cfg.time.horizon, setup.nodes())
                    .map_err(at_eps(eps))?
                    .with_f(f.clone())
                    .with_g(g.clone())
                    .with_lift(z.clone())
                    .with_initial(initial.clone())
                    .with_law(law(cfg.law));
                measure(&data, &setup.mats, &grid, &u0).map_err(at_eps(eps))
            })
            .collect::<ExpResult<Vec<_>>>()
    })??;

    let mut report = Report::new(cfg)?;
    let mode = cfg.sweep.as_ref().map(|s| s.mode).unwrap_or_default();
    report.notes.push(format!("mode: {mode:?}"));
    let table = sweep_table(&rows);
    report.series_from_table(&table, &[]);
    report.tables.push(table);
    Ok(report)
}
