use rayon::prelude::*;

use memvisc::elliptic::{lax_milgram_check, ComplexFrequency};
use memvisc::fem::interior_of;
use memvisc::laplace::{line_distance, plancherel_check, verify_coercivity, CoercivitySpec, LaplaceData, LineGrid};

use super::{at_eps, in_pool};
use crate::catalog::Setup;
use crate::config::{ExperimentConfig, LineSpec};
use crate::error::{ExpError, ExpResult};
use crate::report::{Report, Table};

fn grid(spec: &LineSpec) -> ExpResult<LineGrid<f64>> {
    Ok(LineGrid::new(spec.s1, spec.ds2, spec.k_max)?)
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.5 * (lo + hi)],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Line distances over the `ε` list, the coercivity grid and the Plancherel cross-check.
pub fn run_laplace_study(cfg: &ExperimentConfig) -> ExpResult<Report> {
    let spec = cfg
        .laplace
        .clone()
        .ok_or_else(|| ExpError::Config("missing [laplace]".into()))?;
    let setup = Setup::new(cfg)?;
    let data = LaplaceData {
        mats: setup.mats.clone(),
        beta: cfg.beta,
        horizon: cfg.time.horizon,
        h: setup.dual_field(&cfg.loads.f)?,
    };
    let line = grid(&spec.line)?;
    let mut report = Report::new(cfg)?;

    let distances = in_pool(cfg, || {
        cfg.eps
            .par_iter()
            .map(|&eps| line_distance(eps, &line, &data).map_err(at_eps(eps)))
            .collect::<ExpResult<Vec<_>>>()
    })??;
    let mut summary = Table::new("line", &["eps", "line_distance", "tail", "tail_fraction"]);
    for (i, (eps, d)) in cfg.eps.iter().zip(&distances).enumerate() {
        summary.push(vec![*eps, d.value, d.tail, d.tail / d.value]);
        let mut samples = Table::new(&format!("line_{i}"), &["s2", "norm_eps", "norm_0", "gap2"]);
        for s in d.samples.iter().step_by(spec.line.k_max.div_ceil(500).max(1)) {
            samples.push(vec![s.s2, s.norm_eps, s.norm_0, s.gap2]);
        }
        report.tables.push(samples);
    }
    report.series_from_table(&summary, &["eps"]);
    report.tables.push(summary);

    let cspec = CoercivitySpec::from_mats(&setup.mats, cfg.beta)?;
    report.scalars.insert("alpha".into(), cspec.alpha);
    if !cspec.gamma.inactive() {
        report.scalars.insert("gamma".into(), cspec.gamma.value);
    }
    let s2_values = linspace(-spec.coercivity_s2_max, spec.coercivity_s2_max, spec.coercivity_points);
    let points: Vec<(usize, f64, usize, f64)> = spec
        .coercivity_eps
        .iter()
        .enumerate()
        .flat_map(|(i, &eps)| s2_values.iter().enumerate().map(move |(j, &s2)| (i, eps, j, s2)))
        .collect();
    let rows = in_pool(cfg, || {
        points
            .par_iter()
            .map(|&(i, eps, j, s2)| {
                let s = ComplexFrequency::new(spec.line.s1, s2).map_err(at_eps(eps))?;
                let seed = cfg.seed.wrapping_add((i * s2_values.len() + j) as u64);
                let r = verify_coercivity(&cspec, &setup.mats, s, eps, spec.trials, seed).map_err(at_eps(eps))?;
                Ok(vec![eps, s2, r.k, r.passed as f64, r.trials as f64, r.min_ratio])
            })
            .collect::<ExpResult<Vec<_>>>()
    })??;
    let mut coercivity = Table::new("coercivity", &["eps", "s2", "k", "passed", "trials", "min_ratio"]);
    let mut rates = Vec::new();
    for (i, _) in spec.coercivity_eps.iter().enumerate() {
        let block = &rows[i * s2_values.len()..(i + 1) * s2_values.len()];
        let passed: f64 = block.iter().map(|r| r[3]).sum();
        let trials: f64 = block.iter().map(|r| r[4]).sum();
        rates.push(if trials > 0.0 { passed / trials } else { 1.0 });
    }
    let min_ratio = rows.iter().map(|r| r[5]).fold(f64::INFINITY, f64::min);
    for r in rows {
        coercivity.push(r);
    }
    report.series.insert("coercivity_pass_rate".into(), rates);
    if min_ratio.is_finite() {
        report.scalars.insert("coercivity_min_ratio".into(), min_ratio);
    }
    report.tables.push(coercivity);

    if !spec.plancherel.is_empty() {
        let h = setup.nodal_field(&spec.plancherel)?;
        let p = plancherel_check(&h, &grid(&spec.plancherel_line)?, cfg.time.horizon, &setup.mats.mass);
        report.scalars.insert("plancherel_line_side".into(), p.line_side);
        report.scalars.insert("plancherel_time_side".into(), p.time_side);
        report.scalars.insert("plancherel_gap".into(), p.relative_gap());
    }

    let load = data.h.eval(0.0);
    let (norm, bound) = lax_milgram_check(&setup.mats, &interior_of(&load))?;
    if bound > 0.0 {
        report.scalars.insert("lax_milgram_ratio".into(), norm / bound);
    }
    Ok(report)
}
