use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use memvisc::cubic::{product_inequality, verify_localization, CubicBox};
use memvisc::Cplx;

use crate::config::ExperimentConfig;
use crate::error::{ExpError, ExpResult};
use crate::report::{Report, Table};

/// Random `(z, w)` with `ℜz > 0 > ℜw`, magnitudes log-uniform over six decades.
fn half_plane_pair(rng: &mut ChaCha8Rng) -> (Cplx<f64>, Cplx<f64>) {
    let mut mag = || 10f64.powf(rng.random_range(-3.0..3.0));
    let (zr, zi, wr, wi) = (mag(), mag(), mag(), mag());
    let mut sign = || if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    (Cplx::new(zr, sign() * zi), Cplx::new(-wr, sign() * wi))
}

pub fn run_cubic(cfg: &ExperimentConfig) -> ExpResult<Report> {
    let spec = cfg
        .cubic
        .clone()
        .ok_or_else(|| ExpError::Config("missing [cubic]".into()))?;
    let bx = CubicBox::new(spec.beta, spec.a0, spec.b0, spec.c0, spec.c1)?;
    let loc = verify_localization(&bx, spec.samples, cfg.seed);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_0f_a11);
    let mut pairs = Table::new("product_pairs", &["z_re", "z_im", "w_re", "w_im", "margin"]);
    let mut held = 0usize;
    let mut min_rel = f64::INFINITY;
    for _ in 0..spec.pair_samples {
        let (z, w) = half_plane_pair(&mut rng);
        let check = product_inequality(z, w)?;
        if check.holds() {
            held += 1;
        }
        min_rel = min_rel.min(check.margin() / check.lhs.max(f64::MIN_POSITIVE));
        pairs.push(vec![z.re, z.im, w.re, w.im, check.margin()]);
    }

    let rate = |passed: usize, total: usize| if total == 0 { 1.0 } else { passed as f64 / total as f64 };
    let mut report = Report::new(cfg)?;
    let s = &mut report.scalars;
    s.insert("alpha".into(), loc.alpha);
    s.insert("localization_pass_rate".into(), rate(loc.passed, loc.samples));
    s.insert("sign_check_pass_rate".into(), rate(loc.sign_checks_passed, loc.samples));
    s.insert("min_left_slack".into(), loc.min_left_slack);
    s.insert("min_right_slack".into(), loc.min_right_slack);
    s.insert("max_pair_identity_error".into(), loc.max_pair_identity_error);
    s.insert("product_pass_rate".into(), rate(held, spec.pair_samples));
    if spec.pair_samples > 0 {
        s.insert("product_min_relative_margin".into(), min_rel);
    }
    if let Some((a, b)) = loc.worst {
        s.insert("worst_a".into(), a);
        s.insert("worst_b".into(), b);
    }
    report.notes.push(format!("{} samples, {} pairs", loc.samples, spec.pair_samples));
    report.tables.push(pairs);
    Ok(report)
}
