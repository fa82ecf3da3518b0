use memvisc::elliptic::EllipticProblem;
use memvisc::fem::{h1_seminorm_error, l2_error};
use memvisc::profile::SeparableField;

use crate::catalog::Setup;
use crate::config::{Coefficient, ExactSolution, ExperimentConfig, LoadTerm, SpaceShape, TimeProfile};
use crate::error::{ExpError, ExpResult};
use crate::report::{Report, Table};

/// Closed form of the configured manufactured solution as `(u, u')`.
fn exact(cfg: &ExperimentConfig, kind: ExactSolution) -> ExpResult<(impl Fn(f64) -> f64, impl Fn(f64) -> f64)> {
    match kind {
        ExactSolution::UniformBar => {
            let Coefficient::Constant(a) = cfg.coefficients.a else {
                return Err(ExpError::Config("uniform_bar needs a constant coefficient a".into()));
            };
            let c = uniform_load(&cfg.loads.f)?;
            let length = cfg.mesh.length;
            let scale = c / (2.0 * a);
            Ok((
                move |x: f64| scale * x * (length - x),
                move |x: f64| scale * (length - 2.0 * x),
            ))
        }
    }
}

fn uniform_load(terms: &[LoadTerm]) -> ExpResult<f64> {
    terms.iter().try_fold(0.0, |acc, term| match (&term.time, &term.space) {
        (TimeProfile::Constant { value: t }, SpaceShape::Constant { value: x }) => Ok(acc + t * x),
        _ => Err(ExpError::Config("uniform_bar needs constant-in-time, constant-in-space f".into())),
    })
}

/// Error of the stationary solve on `elements · 2^k` elements, `k = 0..=refinements`.
pub fn run_elliptic(cfg: &ExperimentConfig) -> ExpResult<Report> {
    let spec = cfg
        .elliptic
        .clone()
        .ok_or_else(|| ExpError::Config("missing [elliptic]".into()))?;
    let (u, du) = exact(cfg, spec.exact)?;
    let mut table = Table::new("elliptic", &["elements", "h", "err_v", "err_h"]);
    for k in 0..=spec.refinements {
        let elements = cfg.mesh.elements << k;
        let setup = Setup::with_elements(cfg, elements)?;
        let f = setup.dual_field(&cfg.loads.f)?;
        let problem = EllipticProblem::new(setup.mats.clone(), f, SeparableField::zero(setup.nodes()))?;
        let uh = problem.solve_stationary(0.0).values;
        let err_h = l2_error(&setup.mesh, &uh, &u);
        let semi = h1_seminorm_error(&setup.mesh, &uh, &du);
        let err_v = (err_h * err_h + semi * semi).sqrt();
        table.push(vec![elements as f64, cfg.mesh.length / elements as f64, err_v, err_h]);
    }

    let mut report = Report::new(cfg)?;
    report.series_from_table(&table, &["elements"]);
    let rates = |col: &str| -> Vec<f64> {
        let e = table.column(col).unwrap_or_default();
        e.windows(2).map(|p| (p[0] / p[1]).log2()).collect()
    };
    report.series.insert("rate_v".into(), rates("err_v"));
    report.series.insert("rate_h".into(), rates("err_h"));
    report.tables.push(table);
    Ok(report)
}
