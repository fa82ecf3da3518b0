//! Root localization for `p(z) = βz³ + z² + βbz + a` over a parameter box.
//!
//! The box is `a ≥ a₀`, `b ≥ b₀`, `c₀a ≤ b ≤ c₁a` with `c₁ ≥ c₀ > 1`. Every
//! root of `p` then has real part in `(−1/β, −α)` for the explicit [`alpha_bound`].

use nalgebra::Matrix3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::{cabs, Cplx, Real};

/// Parameter box shared by every cubic in the family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CubicBox<T> {
    pub beta: T,
    pub a0: T,
    pub b0: T,
    pub c0: T,
    pub c1: T,
}

impl<T: Real> CubicBox<T> {
    pub fn new(beta: T, a0: T, b0: T, c0: T, c1: T) -> Result<Self> {
        if !(beta > T::zero()) {
            return Err(Error::InvalidParameter(format!("beta = {beta:e} must be positive")));
        }
        if !(a0 > T::zero() && b0 > T::zero()) {
            return Err(Error::InvalidParameter(format!("a0 = {a0:e} and b0 = {b0:e} must be positive")));
        }
        if !(c0 > T::one() && c1 >= c0) {
            return Err(Error::InvalidParameter(format!("need c1 >= c0 > 1, got c0 = {c0:e}, c1 = {c1:e}")));
        }
        Ok(Self { beta, a0, b0, c0, c1 })
    }

    /// Smallest admissible `a`: below `b₀/c₁` no `b` fits between `b₀` and `c₁a`.
    pub fn a_min(&self) -> T {
        let mut a = self.b0 / self.c1;
        if self.c1 * a < self.b0 {
            a *= T::one() + T::default_epsilon();
        }
        self.a0.max(a)
    }

    /// Admissible `b` range for a given `a`, or `None` when it is empty.
    pub fn b_range(&self, a: T) -> Option<(T, T)> {
        if a < self.a0 {
            return None;
        }
        let lo = (self.c0 * a).max(self.b0);
        let hi = self.c1 * a;
        (lo <= hi).then_some((lo, hi))
    }

    pub fn contains(&self, a: T, b: T) -> bool {
        self.b_range(a).is_some_and(|(lo, hi)| lo <= b && b <= hi)
    }
}

/// One member `(a, b)` of the family together with its box.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CubicSpec<T> {
    pub bounds: CubicBox<T>,
    pub a: T,
    pub b: T,
}

impl<T: Real> CubicSpec<T> {
    pub fn new(bounds: CubicBox<T>, a: T, b: T) -> Result<Self> {
        if !bounds.contains(a, b) {
            return Err(Error::InvalidParameter(format!(
                "(a, b) = ({a:e}, {b:e}) is outside the box a >= {:e}, b >= {:e}, {:e} a <= b <= {:e} a",
                bounds.a0, bounds.b0, bounds.c0, bounds.c1
            )));
        }
        Ok(Self { bounds, a, b })
    }

    pub fn beta(&self) -> T {
        self.bounds.beta
    }

    pub fn eval(&self, z: Cplx<T>) -> Cplx<T> {
        let beta = self.beta();
        ((z * beta + T::one()) * z + beta * self.b) * z + self.a
    }

    fn eval_prime(&self, z: Cplx<T>) -> Cplx<T> {
        let beta = self.beta();
        (z * (T::lit(3.0) * beta) + T::lit(2.0)) * z + beta * self.b
    }

    /// Real-root branch `q(x) = p(x)` for real `x`.
    pub fn q(&self, x: T) -> T {
        let beta = self.beta();
        ((beta * x + T::one()) * x + beta * self.b) * x + self.a
    }

    /// Real-part equation of the complex-pair branch.
    pub fn r(&self, x: T) -> T {
        let beta = self.beta();
        let eight = T::lit(8.0);
        ((eight * beta * x + eight) * x + T::lit(2.0) * (T::one() / beta + beta * self.b)) * x + self.b - self.a
    }
}

fn polish<T: Real>(spec: &CubicSpec<T>, mut z: Cplx<T>) -> Cplx<T> {
    for _ in 0..3 {
        let d = spec.eval_prime(z);
        if cabs(d) == T::zero() {
            break;
        }
        let step = spec.eval(z) / d;
        let next = z - step;
        if !(cabs(spec.eval(next)) < cabs(spec.eval(z))) {
            break;
        }
        z = next;
    }
    z
}

/// The three roots of `p`, real roots first in ascending order, then a
/// conjugate pair with the positive imaginary part first.
pub fn solve_cubic<T: Real>(spec: &CubicSpec<T>) -> [Cplx<T>; 3] {
    let beta = spec.beta();
    let companion = Matrix3::new(
        -T::one() / beta,
        -spec.b,
        -spec.a / beta,
        T::one(),
        T::zero(),
        T::zero(),
        T::zero(),
        T::one(),
        T::zero(),
    );
    let eig = companion.complex_eigenvalues();
    let mut roots: Vec<Cplx<T>> = eig.iter().copied().collect();
    let scale = roots.iter().fold(T::one(), |m, z| m.max(cabs(*z)));
    let tol = T::lit(1e3) * T::default_epsilon() * scale;
    roots.sort_by(|x, y| y.im.abs().partial_cmp(&x.im.abs()).expect("finite eigenvalues"));

    if roots[0].im.abs() > tol {
        // one real root and a conjugate pair
        let top = if roots[0].im > T::zero() { roots[0] } else { roots[0].conj() };
        let w = polish(spec, top);
        let w = if w.im > T::zero() { w } else { w.conj() };
        let x = polish(spec, Cplx::new(roots[2].re, T::zero()));
        [Cplx::new(x.re, T::zero()), w, w.conj()]
    } else {
        let mut real: Vec<T> = roots
            .iter()
            .map(|z| polish(spec, Cplx::new(z.re, T::zero())).re)
            .collect();
        real.sort_by(|x, y| x.partial_cmp(y).expect("finite roots"));
        [
            Cplx::new(real[0], T::zero()),
            Cplx::new(real[1], T::zero()),
            Cplx::new(real[2], T::zero()),
        ]
    }
}

/// Explicit `α` such that all roots over the box have real part below `−α`.
///
/// The term coming from the all-real-roots case only appears when
/// `3b₀β² < 1`; otherwise that case cannot occur.
pub fn alpha_bound<T: Real>(bounds: &CubicBox<T>) -> T {
    let CubicBox { beta, a0, b0, c0, c1 } = *bounds;
    let two = T::lit(2.0);
    let mut alpha = (T::one() / (c1 * beta)).min(beta * (c0 - T::one()) * a0 / (two * (c1 * a0 * beta * beta + T::one())));
    let disc = T::lit(3.0) * b0 * beta * beta;
    if disc < T::one() {
        let b_tilde = T::one() - (T::one() - disc).sqrt();
        alpha = alpha.min(b_tilde * a0 * beta);
    }
    alpha
}

/// Outcome of a sampling run over the box.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalizationReport<T> {
    pub alpha: T,
    pub samples: usize,
    pub passed: usize,
    /// `min (ℜz + 1/β)` over every root seen.
    pub min_left_slack: T,
    /// `min (−α − ℜz)` over every root seen.
    pub min_right_slack: T,
    pub sign_checks_passed: usize,
    /// Largest relative defect of `ℑ(w)² = 3ℜ(w)² + (2/β)ℜ(w) + b` over complex pairs.
    pub max_pair_identity_error: T,
    /// Sample with the smallest slack on either side.
    pub worst: Option<(T, T)>,
}

impl<T: Real> LocalizationReport<T> {
    pub fn all_passed(&self) -> bool {
        self.passed == self.samples && self.sign_checks_passed == self.samples
    }
}

/// Per-sample verdict used by [`verify_localization`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleCheck<T> {
    pub left_slack: T,
    pub right_slack: T,
    pub signs_ok: bool,
    pub pair_identity_error: T,
}

pub fn check_sample<T: Real>(spec: &CubicSpec<T>, alpha: T) -> SampleCheck<T> {
    let beta = spec.beta();
    let roots = solve_cubic(spec);
    let mut left = T::max_value().expect("bounded scalar");
    let mut right = left;
    let mut identity = T::zero();
    for z in roots {
        left = left.min(z.re + T::one() / beta);
        right = right.min(-alpha - z.re);
        if z.im != T::zero() {
            let x = z.re;
            let rhs = T::lit(3.0) * x * x + T::lit(2.0) / beta * x + spec.b;
            let scale = z.im * z.im + T::lit(3.0) * x * x + (T::lit(2.0) / beta * x).abs() + spec.b;
            identity = identity.max((z.im * z.im - rhs).abs() / scale);
        }
    }
    let (a, b) = (spec.a, spec.b);
    let signs_ok = spec.q(-T::one() / beta) < T::zero()
        && spec.q(-a / (beta * b)) > T::zero()
        && spec.r(-T::one() / (T::lit(2.0) * beta)) < T::zero();
    SampleCheck {
        left_slack: left,
        right_slack: right,
        signs_ok,
        pair_identity_error: identity,
    }
}

/// Draws `(a, b)` from the box: `a` log-uniform on `[a_min, 10³a₀]`, `b`
/// uniform on its admissible range, preceded by the box corners.
///
/// Sample `k` uses stream `k / 1024` of a ChaCha generator seeded with `seed`,
/// so chunks can be produced independently and in any order.
pub fn sample_box<T: Real>(bounds: &CubicBox<T>, samples: usize, seed: u64) -> Vec<(T, T)> {
    let lo = bounds.a_min();
    let hi = (T::lit(1e3) * bounds.a0).max(T::lit(1e3) * lo);
    let mut out = Vec::with_capacity(samples);
    for a in [lo, hi] {
        let (blo, bhi) = bounds.b_range(a).expect("a_min keeps the b range non-empty");
        out.push((a, blo));
        out.push((a, bhi));
    }
    if let Some((blo, _)) = bounds.b_range(bounds.a0) {
        out.push((bounds.a0, blo));
    }
    out.truncate(samples);
    const CHUNK: usize = 1024;
    let (log_lo, log_hi) = (lo.as_f64().ln(), hi.as_f64().ln());
    let mut k = out.len();
    while k < samples {
        let chunk = k / CHUNK;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(chunk as u64);
        for _ in 0..(k % CHUNK) {
            rng.random::<f64>();
            rng.random::<f64>();
        }
        while k < samples && k / CHUNK == chunk {
            let a = T::lit((log_lo + (log_hi - log_lo) * rng.random::<f64>()).exp()).max(lo).min(hi);
            let (blo, bhi) = bounds.b_range(a).expect("a within [a_min, a_max]");
            let b = blo + (bhi - blo) * T::lit(rng.random::<f64>());
            out.push((a, b));
            k += 1;
        }
    }
    out
}

pub fn verify_localization<T: Real>(bounds: &CubicBox<T>, samples: usize, seed: u64) -> LocalizationReport<T> {
    let alpha = alpha_bound(bounds);
    let big = T::max_value().expect("bounded scalar");
    let mut report = LocalizationReport {
        alpha,
        samples,
        passed: 0,
        min_left_slack: big,
        min_right_slack: big,
        sign_checks_passed: 0,
        max_pair_identity_error: T::zero(),
        worst: None,
    };
    let mut worst_slack = big;
    for (a, b) in sample_box(bounds, samples, seed) {
        let spec = CubicSpec { bounds: *bounds, a, b };
        let c = check_sample(&spec, alpha);
        if c.left_slack > T::zero() && c.right_slack > T::zero() {
            report.passed += 1;
        }
        if c.signs_ok {
            report.sign_checks_passed += 1;
        }
        report.min_left_slack = report.min_left_slack.min(c.left_slack);
        report.min_right_slack = report.min_right_slack.min(c.right_slack);
        report.max_pair_identity_error = report.max_pair_identity_error.max(c.pair_identity_error);
        let slack = c.left_slack.min(c.right_slack);
        if slack < worst_slack {
            worst_slack = slack;
            report.worst = Some((a, b));
        }
    }
    report
}

/// Both sides of `|(z − w)(z − w̄)| ≥ |ℜw||ℑw|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProductCheck<T> {
    pub lhs: T,
    pub rhs: T,
}

impl<T: Real> ProductCheck<T> {
    pub fn margin(&self) -> T {
        self.lhs - self.rhs
    }

    pub fn holds(&self) -> bool {
        self.lhs >= self.rhs
    }
}

/// Requires `ℜz > 0` and `ℜw < 0`.
pub fn product_inequality<T: Real>(z: Cplx<T>, w: Cplx<T>) -> Result<ProductCheck<T>> {
    if !(z.re > T::zero() && w.re < T::zero()) {
        return Err(Error::Precondition(format!(
            "need Re z > 0 and Re w < 0, got z = {:e}{:+e}i, w = {:e}{:+e}i",
            z.re, z.im, w.re, w.im
        )));
    }
    Ok(ProductCheck {
        lhs: cabs((z - w) * (z - w.conj())),
        rhs: w.re.abs() * w.im.abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit_box() -> CubicBox<f64> {
        CubicBox::new(1.0, 1.0, 2.0, 2.0, 2.0).unwrap()
    }

    /// Durand–Kerner iteration on the monic polynomial, independent of the eigenvalue route.
    fn durand_kerner(beta: f64, a: f64, b: f64) -> Vec<Cplx<f64>> {
        let c = [1.0 / beta, b, a / beta];
        let p = |z: Cplx<f64>| ((z + c[0]) * z + c[1]) * z + c[2];
        let seed = Cplx::new(0.4, 0.9);
        let mut r = vec![Cplx::new(1.0, 0.0), seed, seed * seed];
        for _ in 0..500 {
            for i in 0..3 {
                let mut den = Cplx::new(1.0, 0.0);
                for j in 0..3 {
                    if i != j {
                        den *= r[i] - r[j];
                    }
                }
                let step = p(r[i]) / den;
                r[i] -= step;
            }
        }
        r
    }

    fn matches(roots: &[Cplx<f64>], other: &[Cplx<f64>], tol: f64) -> bool {
        roots
            .iter()
            .all(|x| other.iter().any(|y| (x - y).norm() < tol))
    }

    #[test]
    fn reference_cubic_roots() {
        let spec = CubicSpec::new(unit_box(), 1.0, 2.0).unwrap();
        let roots = solve_cubic(&spec);
        let oracle = durand_kerner(1.0, 1.0, 2.0);
        assert!(matches(&roots, &oracle, 1e-10));
        assert!((roots[0].re + 0.569840290998).abs() < 1e-9);
        assert!((roots[1].re + 0.215079854501).abs() < 1e-9);
        assert!((roots[1].im - 1.307141278682).abs() < 1e-9);
        assert_eq!(roots[1], roots[2].conj());
        for z in roots {
            assert!(spec.eval(z).norm() <= 1e-10 * (1.0 + z.norm().powi(3)));
        }
    }

    #[test]
    fn box_guard_rejects_a_zero() {
        assert!(CubicSpec::new(unit_box(), 0.0, 2.0).is_err());
        assert!(CubicSpec::new(unit_box(), 1.0, 2.5).is_err());
        assert!(CubicBox::new(1.0, 1.0, 2.0, 1.0, 2.0).is_err());
    }

    #[test]
    fn degenerate_member_factors_out_zero() {
        // a = 0 sits outside every box; the solver still handles it
        let bounds = unit_box();
        let spec = CubicSpec { bounds, a: 0.0, b: 2.0 };
        let roots = solve_cubic(&spec);
        assert!(roots.iter().any(|z| z.norm() < 1e-12));
        let quad_disc = Cplx::new(1.0 - 4.0 * 2.0, 0.0).sqrt();
        let r1 = (Cplx::new(-1.0, 0.0) + quad_disc) / 2.0;
        assert!(roots.iter().any(|z| (z - r1).norm() < 1e-10 || (z - r1.conj()).norm() < 1e-10));
    }

    #[test]
    fn alpha_for_the_unit_box() {
        assert!((alpha_bound(&unit_box()) - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn alpha_includes_real_case_term_for_small_beta() {
        let bounds = CubicBox::new(0.1, 1.0, 2.0, 2.0, 3.0).unwrap();
        let (beta, a0, b0, c0, c1) = (0.1f64, 1.0, 2.0, 2.0, 3.0);
        let bt = 1.0 - (1.0 - 3.0 * b0 * beta * beta).sqrt();
        let expected = (bt * a0 * beta)
            .min(1.0 / (c1 * beta))
            .min(beta * (c0 - 1.0) * a0 / (2.0 * (c1 * a0 * beta * beta + 1.0)));
        assert_eq!(alpha_bound(&bounds), expected);
        assert!(expected > 0.0);
    }

    #[test]
    fn alpha_vanishes_as_c1_grows() {
        let small = alpha_bound(&CubicBox::new(1.0, 1.0, 2.0, 2.0, 1e6).unwrap());
        assert!(small <= 1e-6);
    }

    #[test]
    fn corner_sample_has_positive_slack() {
        let bounds = unit_box();
        let spec = CubicSpec::new(bounds, 1.0, 2.0).unwrap();
        let c = check_sample(&spec, alpha_bound(&bounds));
        assert!(c.left_slack > 0.0 && c.right_slack > 0.0 && c.signs_ok);
    }

    #[test]
    fn large_a_along_the_lower_edge() {
        let bounds = CubicBox::new(1.0, 1.0, 2.0, 2.0, 3.0).unwrap();
        let alpha = alpha_bound(&bounds);
        for a in [1e2, 1e4, 1e6, 1e8] {
            let c = check_sample(&CubicSpec::new(bounds, a, 2.0 * a).unwrap(), alpha);
            assert!(c.left_slack > 0.0 && c.right_slack > 0.0, "a = {a}: {c:?}");
        }
    }

    #[test]
    fn sampling_is_reproducible_and_stays_in_the_box() {
        let bounds = CubicBox::new(0.7, 0.5, 0.3, 1.5, 4.0).unwrap();
        let s1 = sample_box(&bounds, 3000, 11);
        let s2 = sample_box(&bounds, 3000, 11);
        assert_eq!(s1, s2);
        assert!(s1.iter().all(|(a, b)| bounds.contains(*a, *b)));
        assert_ne!(s1, sample_box(&bounds, 3000, 12));
    }

    #[test]
    fn unit_box_localization() {
        let report = verify_localization(&unit_box(), 2000, 7);
        assert!(report.all_passed(), "{report:?}");
        assert!(report.max_pair_identity_error < 1e-8);
    }

    #[test]
    fn product_inequality_examples() {
        let c = product_inequality(Cplx::new(1.0f64, 0.0), Cplx::new(-1.0, 1.0)).unwrap();
        assert!((c.lhs - 5.0).abs() < 1e-14 && c.rhs == 1.0);
        let real = product_inequality(Cplx::new(0.3, 2.0), Cplx::new(-0.1, 0.0)).unwrap();
        assert_eq!(real.rhs, 0.0);
        assert!(product_inequality(Cplx::new(-1.0, 0.0), Cplx::new(-1.0, 1.0)).is_err());
    }

    proptest! {
        #[test]
        fn roots_satisfy_vieta_and_the_residual_bound(
            beta in 0.05f64..3.0, a0 in 0.01f64..5.0, b0 in 0.01f64..5.0,
            c0 in 1.01f64..3.0, dc in 0.0f64..3.0, ta in 0.0f64..1.0, tb in 0.0f64..1.0,
        ) {
            let bounds = CubicBox::new(beta, a0, b0, c0, c0 + dc).unwrap();
            let a = bounds.a_min() * (1.0 + 50.0 * ta);
            let (lo, hi) = bounds.b_range(a).unwrap();
            let spec = CubicSpec::new(bounds, a, lo + (hi - lo) * tb).unwrap();
            let roots = solve_cubic(&spec);
            let sum = roots[0] + roots[1] + roots[2];
            let prod = roots[0] * roots[1] * roots[2];
            prop_assert!((sum + 1.0 / beta).norm() < 1e-9 * (1.0 + 1.0 / beta));
            prop_assert!((prod + a / beta).norm() < 1e-9 * (1.0 + a / beta));
            for z in roots {
                prop_assert!(spec.eval(z).norm() <= 1e-10 * beta.max(1.0) * (1.0 + z.norm().powi(3)) * (1.0 + a));
            }
            let conj: Vec<_> = roots.iter().map(|z| z.conj()).collect();
            prop_assert!(matches(&roots, &conj, 1e-9 * (1.0 + a)));
        }

        #[test]
        fn localization_over_random_boxes(
            beta in 0.05f64..3.0, a0 in 0.01f64..5.0, b0 in 0.01f64..5.0,
            c0 in 1.01f64..3.0, dc in 0.0f64..3.0, seed in 0u64..1000,
        ) {
            let bounds = CubicBox::new(beta, a0, b0, c0, c0 + dc).unwrap();
            let report = verify_localization(&bounds, 64, seed);
            prop_assert_eq!(report.passed, report.samples);
            prop_assert_eq!(report.sign_checks_passed, report.samples);
        }

        #[test]
        fn product_margin_is_symmetric(
            zr in 1e-3f64..10.0, zi in -10.0f64..10.0, wr in -10.0f64..-1e-3, wi in -10.0f64..10.0,
        ) {
            let z = Cplx::new(zr, zi);
            let w = Cplx::new(wr, wi);
            let c = product_inequality(z, w).unwrap();
            prop_assert!(c.holds());
            let flipped = product_inequality(z.conj(), w.conj()).unwrap();
            prop_assert!((c.margin() - flipped.margin()).abs() <= 1e-12 * (1.0 + c.lhs));
        }
    }
}
