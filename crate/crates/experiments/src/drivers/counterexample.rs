use rayon::prelude::*;

use memvisc::dynamic::{DampingLaw, ProblemData};
use memvisc::elliptic::EllipticProblem;
use memvisc::fem::TimeGrid;
use memvisc::profile::{Profile, SeparableField};

use super::sweep::measure;
use super::{at_eps, in_pool};
use crate::catalog::Setup;
use crate::config::{AmplitudeScaling, ExperimentConfig};
use crate::error::{ExpError, ExpResult};
use crate::report::{Report, Table};

/// Drives one elastic eigenmode at its rescaled natural frequency `√λ/ε`,
/// once without damping and once with memory, from rest and with `f = 0`.
pub fn run_counterexample(cfg: &ExperimentConfig) -> ExpResult<Report> {
    let spec = cfg
        .counterexample
        .as_ref()
        .ok_or_else(|| ExpError::Config("missing [counterexample]".into()))?;
    let setup = Setup::new(cfg)?;
    let lambda = setup.eigenvalue(spec.mode)?;
    let shape = setup.dual_shape(&crate::config::SpaceShape::Eigenmode {
        index: spec.mode,
        amplitude: 1.0,
    })?;
    let grid = TimeGrid::new(cfg.time.horizon, cfg.time.steps)?.with_window(cfg.time.eta)?;
    let n = setup.nodes();

    let load_for = |eps: f64| -> (f64, SeparableField<f64>) {
        let amplitude = match spec.scaling {
            AmplitudeScaling::Fixed => spec.amplitude,
            AmplitudeScaling::Eps => spec.amplitude * eps,
        };
        if spec.static_load {
            (0.0, SeparableField::single(Profile::Constant(amplitude), shape.clone()))
        } else {
            let omega = lambda.sqrt() / eps;
            let profile = Profile::Sine {
                amplitude,
                omega,
                phase: 0.0,
            };
            (omega, SeparableField::single(profile, shape.clone()))
        }
    };

    let rows = in_pool(cfg, || {
        cfg.eps
            .par_iter()
            .map(|&eps| {
                let (omega, g) = load_for(eps);
                let stationary = EllipticProblem::new(setup.mats.clone(), g.clone(), SeparableField::zero(n))
                    .map_err(at_eps(eps))?;
                let u0 = stationary.solve_stationary_trajectory(&grid);
                let mut out = vec![eps, omega];
                for law in [DampingLaw::Undamped, DampingLaw::Memory] {
                    let data = ProblemData::new(eps, cfg.beta, cfg.time.horizon, n)
                        .map_err(at_eps(eps))?
                        .with_g(g.clone())
                        .with_law(law);
                    let row = measure(&data, &setup.mats, &grid, &u0).map_err(at_eps(eps))?;
                    out.extend([row.l2_v, row.l2_h_vel, row.linf_v]);
                }
                Ok(out)
            })
            .collect::<ExpResult<Vec<_>>>()
    })??;

    let mut table = Table::new(
        "counterexample",
        &[
            "eps",
            "omega",
            "undamped_l2_v",
            "undamped_l2_h_vel",
            "undamped_linf_v",
            "memory_l2_v",
            "memory_l2_h_vel",
            "memory_linf_v",
        ],
    );
    for r in rows {
        table.push(r);
    }
    let mut report = Report::new(cfg)?;
    report.scalars.insert("lambda".into(), lambda);
    report.notes.push(format!(
        "eigenmode {} driven at sqrt(lambda)/eps with {:?} amplitude",
        spec.mode, spec.scaling
    ));
    report.series_from_table(&table, &["omega"]);
    report.tables.push(table);
    Ok(report)
}
