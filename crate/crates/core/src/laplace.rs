//! Transformed problem along vertical lines `ℜs = s₁` of the right half-plane.
//!
//! Loads are transformed as functions supported on `[0, T]`. The transformed
//! dynamic operator is compared with the stationary one, and its coercivity
//! constant `K(s)` is estimated and checked against random test vectors.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cubic::{alpha_bound, CubicBox};
use crate::elliptic::{complex_norm_v, shifted_operator, solve_complex, solve_stationary_complex, ComplexFrequency};
use crate::error::{Error, Result};
use crate::fem::{generalized_modes, interior_of, CoefficientBounds, FemMatrices};
use crate::linalg::{SymTridiag, TridiagLu};
use crate::profile::SeparableField;
use crate::quadrature::GaussLegendre;
use crate::scalar::{cabs, cexp, Cplx, Real};

/// Symmetric samples `s₂ = k Δs₂`, `|k| ≤ K`, on the line `ℜs = s₁`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineGrid<T> {
    s1: T,
    ds2: T,
    k_max: usize,
}

impl<T: Real> LineGrid<T> {
    pub fn new(s1: T, ds2: T, k_max: usize) -> Result<Self> {
        if !(s1 > T::zero()) {
            return Err(Error::FrequencyNotInRightHalfPlane {
                re: s1.as_f64(),
                im: 0.0,
            });
        }
        if !(ds2 > T::zero()) || k_max == 0 {
            return Err(Error::InvalidParameter(format!(
                "line grid needs ds2 > 0 and k_max >= 1, got ds2 = {ds2:e}, k_max = {k_max}"
            )));
        }
        Ok(Self { s1, ds2, k_max })
    }

    pub fn s1(&self) -> T {
        self.s1
    }

    pub fn ds2(&self) -> T {
        self.ds2
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    /// Truncation radius `S = K Δs₂`.
    pub fn radius(&self) -> T {
        self.ds2 * T::from_count(self.k_max)
    }

    pub fn with_k_max(&self, k_max: usize) -> Result<Self> {
        Self::new(self.s1, self.ds2, k_max)
    }

    pub fn point(&self, k: i64) -> ComplexFrequency<T> {
        let s2 = self.ds2 * T::lit(k as f64);
        ComplexFrequency::new(self.s1, s2).expect("s1 > 0 by construction")
    }

    fn weight(&self, k: i64) -> T {
        if k.unsigned_abs() as usize == self.k_max {
            self.ds2 * T::lit(0.5)
        } else {
            self.ds2
        }
    }

    /// Trapezoid rule over `[−S, S]`, summed in increasing `k`.
    pub fn integrate<F: FnMut(ComplexFrequency<T>) -> T>(&self, mut f: F) -> T {
        let k = self.k_max as i64;
        (-k..=k).fold(T::zero(), |acc, j| acc + self.weight(j) * f(self.point(j)))
    }
}

/// `∫₀ᵀ e^{−st} h(t) dt` for a vector-valued `h`, by composite 16-point Gauss.
///
/// Panels double until the transform changes by less than `10⁻¹³` relative.
pub fn laplace_load<T: Real, F: Fn(T) -> Vec<T>>(h: F, s: ComplexFrequency<T>, horizon: T) -> Result<Vec<Cplx<T>>> {
    if !(horizon > T::zero()) {
        return Err(Error::InvalidParameter(format!("horizon {horizon:e} must be positive")));
    }
    let s = s.value();
    let rule = GaussLegendre::<T>::new(16);
    let transform = |panels: usize| -> Vec<Cplx<T>> {
        let width = horizon / T::from_count(panels);
        let mut acc: Vec<Cplx<T>> = Vec::new();
        for p in 0..panels {
            let lo = width * T::from_count(p);
            for (t, w) in rule.mapped(lo, lo + width) {
                let kernel = cexp(-s * t).scale(w);
                let values = h(t);
                if acc.is_empty() {
                    acc = vec![Cplx::new(T::zero(), T::zero()); values.len()];
                }
                for (a, v) in acc.iter_mut().zip(values) {
                    *a += kernel.scale(v);
                }
            }
        }
        acc
    };
    let size = |v: &[Cplx<T>]| v.iter().fold(T::zero(), |m, z| m.max(cabs(*z)));
    let oscillations = (s.im.abs() * horizon / T::lit(PI)).as_f64().ceil() as usize;
    let mut panels = oscillations.max(4);
    let mut prev = transform(panels);
    for _ in 0..14 {
        panels *= 2;
        let next = transform(panels);
        let change = next.iter().zip(&prev).fold(T::zero(), |m, (a, b)| m.max(cabs(*a - *b)));
        let scale = size(&next);
        if change <= T::lit(1e-13) * scale || scale == T::zero() {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::QuadratureNonConvergence(format!(
        "Laplace transform at s = {:e}{:+e}i did not settle with {panels} panels",
        s.re, s.im
    )))
}

/// Grid estimate of `γ`, the infimum of `|βz³ + z² + βbz + a| / (a|βz + 1|)`
/// over `ℜz ≥ 0`, `|z| ≤ R` and the admissible `(a, b)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaEstimate {
    /// Lower estimate, `raw_min − margin`; `+∞` when the parameter box is empty.
    pub value: f64,
    pub raw_min: f64,
    pub margin: f64,
    pub grid: String,
}

impl GammaEstimate {
    pub fn inactive(&self) -> bool {
        self.value == f64::INFINITY
    }
}

/// `(a, b)` box for the `γ` branch: `a₀ ≤ a`, `b₀ ≤ b`, both at most `2/(3β²)`,
/// and `c₀a ≤ b ≤ c₁a`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaBox {
    pub beta: f64,
    pub a0: f64,
    pub b0: f64,
    pub c0: f64,
    pub c1: f64,
}

impl GammaBox {
    pub fn cap(&self) -> f64 {
        2.0 / (3.0 * self.beta * self.beta)
    }

    pub fn radius(&self) -> f64 {
        (2.0 * (2.0 + self.c1) / (3.0 * self.beta * self.beta)).sqrt()
    }

    /// Admissible `a` interval, `None` when the box is empty.
    pub fn a_range(&self) -> Option<(f64, f64)> {
        let cap = self.cap();
        let lo = self.a0.max(self.b0 / self.c1);
        let hi = cap.min(cap / self.c0);
        (self.b0 <= cap && lo <= hi).then_some((lo, hi))
    }

    pub fn b_range(&self, a: f64) -> (f64, f64) {
        let lo = self.b0.max(self.c0 * a);
        (lo, self.cap().min(self.c1 * a).max(lo))
    }

    /// `min_b` of the ratio at fixed `(z, a)`; the numerator is affine in `b`.
    pub fn ratio_min_over_b(&self, z: Cplx<f64>, a: f64) -> f64 {
        let beta = self.beta;
        let c = z * z * (z * beta + 1.0) + a;
        let d = z * beta;
        let (lo, hi) = self.b_range(a);
        let dd = d.norm_sqr();
        let b = if dd == 0.0 {
            lo
        } else {
            (-(c * d.conj()).re / dd).clamp(lo, hi)
        };
        (c + d * b).norm() / (a * (z * beta + 1.0).norm())
    }

    pub fn ratio(&self, z: Cplx<f64>, a: f64, b: f64) -> f64 {
        let beta = self.beta;
        (z * z * (z * beta + 1.0) + z * (beta * b) + a).norm() / (a * (z * beta + 1.0).norm())
    }
}

fn gamma_on_grid(bx: &GammaBox, (a_lo, a_hi): (f64, f64), n: usize) -> (f64, f64) {
    let radius = bx.radius();
    let nr = n;
    let nt = n;
    let na = if a_hi > a_lo { n } else { 1 };
    let at = |i: usize, j: usize, k: usize| -> f64 {
        let r = radius * i as f64 / (nr - 1) as f64;
        let theta = 0.5 * PI * j as f64 / (nt - 1) as f64;
        let a = if na == 1 {
            a_lo
        } else {
            a_lo + (a_hi - a_lo) * k as f64 / (na - 1) as f64
        };
        bx.ratio_min_over_b(Cplx::from_polar(r, theta), a)
    };
    let mut best = (f64::INFINITY, (0, 0, 0));
    for i in 0..nr {
        for j in 0..nt {
            for k in 0..na {
                let v = at(i, j, k);
                if v < best.0 {
                    best = (v, (i, j, k));
                }
            }
        }
    }
    let (min, (i, j, k)) = best;
    let spread = |vals: [Option<f64>; 2]| vals.iter().flatten().fold(0.0f64, |m, v| m.max((v - min).abs()));
    let pad = 0.5
        * (spread([i.checked_sub(1).map(|i| at(i, j, k)), (i + 1 < nr).then(|| at(i + 1, j, k))])
            + spread([j.checked_sub(1).map(|j| at(i, j, k)), (j + 1 < nt).then(|| at(i, j + 1, k))])
            + spread([k.checked_sub(1).map(|k| at(i, j, k)), (k + 1 < na).then(|| at(i, j, k + 1))]));
    (min, pad)
}

/// Nested grid minimization in `(|z|, arg z, a)` with the `b`-minimum taken
/// exactly; the grid doubles until the minimum moves by less than `10⁻³`
/// relative. The margin adds the last change to a neighbour-difference
/// Lipschitz pad around the minimizer.
pub fn estimate_gamma(bx: &GammaBox) -> GammaEstimate {
    let Some(range) = bx.a_range() else {
        return GammaEstimate {
            value: f64::INFINITY,
            raw_min: f64::INFINITY,
            margin: 0.0,
            grid: "empty parameter box".into(),
        };
    };
    let mut n = 16;
    let (mut prev, _) = gamma_on_grid(bx, range, n);
    loop {
        n *= 2;
        let (min, pad) = gamma_on_grid(bx, range, n);
        let change = (prev - min).abs();
        if change <= 1e-3 * min || n >= 256 {
            let margin = pad + change;
            return GammaEstimate {
                value: min - margin,
                raw_min: min,
                margin,
                grid: format!("{n}x{n}x{n} over (|z|, arg z, a), R = {:.6}", bx.radius()),
            };
        }
        prev = min;
    }
}

/// Constants entering the coercivity estimate for the transformed operator.
#[derive(Clone, Debug, PartialEq)]
pub struct CoercivitySpec<T> {
    pub beta: T,
    pub bounds: CoefficientBounds<T>,
    pub poincare: T,
    pub a0: T,
    pub b0: T,
    pub c0: T,
    pub c1: T,
    pub alpha: T,
    pub gamma: GammaEstimate,
}

impl<T: Real> CoercivitySpec<T> {
    pub fn new(beta: T, bounds: CoefficientBounds<T>, poincare: T) -> Result<Self> {
        if !(beta > T::zero() && poincare > T::zero()) {
            return Err(Error::InvalidParameter("beta and the Poincaré constant must be positive".into()));
        }
        if !(bounds.a_min > T::zero() && bounds.b_min > T::zero()) {
            return Err(Error::InvalidParameter(
                "the coercivity estimate needs strictly positive lower bounds on both coefficients".into(),
            ));
        }
        let cp2 = poincare * poincare;
        let a0 = bounds.a_min / cp2;
        let b0 = (bounds.a_min + bounds.b_min) / cp2;
        let c0 = T::one() + bounds.b_min / bounds.a_max;
        let c1 = T::one() + bounds.b_max / bounds.a_min;
        let alpha = alpha_bound(&CubicBox::new(beta, a0, b0, c0, c1)?);
        let gamma = estimate_gamma(&GammaBox {
            beta: beta.as_f64(),
            a0: a0.as_f64(),
            b0: b0.as_f64(),
            c0: c0.as_f64(),
            c1: c1.as_f64(),
        });
        Ok(Self {
            beta,
            bounds,
            poincare,
            a0,
            b0,
            c0,
            c1,
            alpha,
            gamma,
        })
    }

    pub fn from_mats(mats: &FemMatrices<T>, beta: T) -> Result<Self> {
        Self::new(beta, mats.bounds(), mats.poincare_constant()?)
    }
}

/// `K(s) = min{½, α/(2√3 |s(βs+1)|), γ}`; the `γ` branch is skipped when its box is empty.
pub fn k_of_s<T: Real>(spec: &CoercivitySpec<T>, s: ComplexFrequency<T>) -> Result<T> {
    let g = &spec.gamma;
    if !(g.value > 0.0) {
        return Err(Error::GammaNotPositive {
            value: g.value,
            grid: g.grid.clone(),
        });
    }
    let s = s.value();
    let one = Cplx::new(T::one(), T::zero());
    let growth = cabs(s * (s.scale(spec.beta) + one));
    let mut k = T::lit(0.5).min(spec.alpha / (T::lit(2.0 * 3f64.sqrt()) * growth));
    if !g.inactive() {
        k = k.min(T::lit(g.value));
    }
    Ok(k)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoercivityReport<T> {
    pub k: T,
    pub trials: usize,
    pub passed: usize,
    /// `min (|⟨Sψ, ψ⟩| − c_A K(s)‖eψ‖²)` over the trials, with `‖eψ‖ = 1`.
    pub min_margin: T,
    /// `min |⟨Sψ, ψ⟩| / (c_A K(s)‖eψ‖²)`.
    pub min_ratio: T,
}

impl<T: Real> CoercivityReport<T> {
    pub fn all_passed(&self) -> bool {
        self.passed == self.trials
    }
}

fn random_test_vector<T: Real>(rng: &mut ChaCha8Rng, n: usize, smooth: bool) -> Vec<Cplx<T>> {
    if smooth {
        let coeffs: Vec<(f64, f64)> = (0..4)
            .map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        (0..n)
            .map(|i| {
                let x = (i + 1) as f64 / (n + 1) as f64;
                let (re, im) = coeffs.iter().enumerate().fold((0.0, 0.0), |(re, im), (j, (cr, ci))| {
                    let mode = ((j + 1) as f64 * PI * x).sin();
                    (re + cr * mode, im + ci * mode)
                });
                Cplx::new(T::lit(re), T::lit(im))
            })
            .collect()
    } else {
        (0..n)
            .map(|_| Cplx::new(T::lit(rng.random_range(-1.0..1.0)), T::lit(rng.random_range(-1.0..1.0))))
            .collect()
    }
}

/// Checks `|⟨S_ε(s)ψ, ψ⟩| ≥ c_A K(s)‖eψ‖²` on `trials` random interior vectors,
/// alternating rough and smooth ones.
pub fn verify_coercivity<T: Real>(
    spec: &CoercivitySpec<T>,
    mats: &FemMatrices<T>,
    s: ComplexFrequency<T>,
    eps: T,
    trials: usize,
    seed: u64,
) -> Result<CoercivityReport<T>> {
    if !(eps > T::zero() && eps < T::one()) {
        return Err(Error::Precondition(format!("eps = {eps:e} must lie in (0, 1)")));
    }
    let k = k_of_s(spec, s)?;
    let op = shifted_operator(mats, s, eps, spec.beta);
    let k1 = mats.stiff_unit.interior();
    let n = mats.interior_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let big = T::max_value().expect("bounded scalar");
    let mut report = CoercivityReport {
        k,
        trials,
        passed: 0,
        min_margin: big,
        min_ratio: big,
    };
    for trial in 0..trials {
        let psi = random_test_vector::<T>(&mut rng, n, trial % 2 == 1);
        let energy = k1.hermitian_form(&psi);
        if !(energy > T::zero()) {
            continue;
        }
        let scale = T::one() / energy.sqrt();
        let psi: Vec<Cplx<T>> = psi.iter().map(|z| z.scale(scale)).collect();
        let s_psi = op.mul_vec(&psi);
        let form = s_psi
            .iter()
            .zip(&psi)
            .fold(Cplx::new(T::zero(), T::zero()), |acc, (a, b)| acc + b.conj() * *a);
        let lhs = cabs(form);
        let rhs = spec.bounds.a_min * k * k1.hermitian_form(&psi);
        if lhs >= rhs {
            report.passed += 1;
        }
        report.min_margin = report.min_margin.min(lhs - rhs);
        report.min_ratio = report.min_ratio.min(lhs / rhs);
    }
    Ok(report)
}

/// Transformed load problem: mass, stiffness, kernel parameter and a dual load `h`.
#[derive(Clone, Debug)]
pub struct LaplaceData<T> {
    pub mats: FemMatrices<T>,
    pub beta: T,
    pub horizon: T,
    pub h: SeparableField<T>,
}

/// One sample of the line integrand.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineSample<T> {
    pub s2: T,
    pub norm_eps: T,
    pub norm_0: T,
    pub gap2: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LineDistance<T> {
    /// Trapezoid value of `∫ ‖v̂_ε − v̂₀‖²_V ds₂` over `[−S, S]`.
    pub value: T,
    /// Bound on the part of the integral beyond `|s₂| > S`.
    pub tail: T,
    /// Twice the half-line sum, evaluated from the `s₂ ≥ 0` samples only.
    pub doubled_half_line: T,
    pub samples: Vec<LineSample<T>>,
}

impl<T: Real> LineDistance<T> {
    pub fn symmetry_gap(&self) -> T {
        let gap = (self.value - self.doubled_half_line).abs();
        if self.value == T::zero() {
            gap
        } else {
            gap / self.value.abs()
        }
    }
}

struct Stationary<T> {
    lu: TridiagLu<T>,
}

fn h_dual_norm<T: Real>(lu: &TridiagLu<T>, f: &[T]) -> T {
    let fi = interior_of(f);
    crate::linalg::dot(&fi, &lu.solve(&fi)).max(T::zero()).sqrt()
}

/// Bound on `2∫_S^∞ ‖v̂_ε − v̂₀‖²_V ds₂`, or `+∞` when `S` is below the
/// radius where the inertia term dominates.
fn line_tail<T: Real>(eps: T, line: &LineGrid<T>, data: &LaplaceData<T>) -> Result<T> {
    if data.h.is_zero() {
        return Ok(T::zero());
    }
    let mats = &data.mats;
    let bounds = mats.bounds();
    let (values, _) = generalized_modes(&mats.stiff_unit.interior(), &mats.mass.interior())?;
    let lambda_max = *values.last().expect("non-empty spectrum");
    let cp = T::one() / values[0].sqrt();
    let two = T::lit(2.0);
    let s0 = (two * (bounds.a_max + bounds.b_max) * lambda_max).sqrt() / eps;
    let radius = line.radius();
    if radius < s0 {
        return Ok(T::max_value().expect("bounded scalar"));
    }
    let m_lu = mats.mass.interior().factor()?;
    let t_end = data.horizon;
    let decay = (-line.s1() * t_end).exp();
    let h = &data.h;
    let b1 = h_dual_norm(&m_lu, &h.eval(T::zero())) + decay * h_dual_norm(&m_lu, &h.eval(t_end));
    let rule = GaussLegendre::<T>::new(16);
    let curvature = rule.composite(T::zero(), t_end, 64, |t| h_dual_norm(&m_lu, &h.d2(t)));
    let b2 = h_dual_norm(&m_lu, &h.d1(T::zero())) + decay * h_dual_norm(&m_lu, &h.d1(t_end)) + curvature;
    let c_eps = two * (T::one() + lambda_max).sqrt() / (eps * eps);
    let c_zero = (T::one() + cp * cp).sqrt() * cp / bounds.a_min;
    let amp = c_eps / (radius * radius) + c_zero;
    Ok(two
        * amp
        * amp
        * (b1 * b1 / radius + b1 * b2 / (radius * radius) + b2 * b2 / (T::lit(3.0) * radius.powi(3))))
}

/// `∫ ‖v̂_ε(s) − v̂₀(s)‖²_V ds₂` along `ℜs = s₁` with a certified tail bound.
pub fn line_distance<T: Real>(eps: T, line: &LineGrid<T>, data: &LaplaceData<T>) -> Result<LineDistance<T>> {
    let mats = &data.mats;
    let stationary = Stationary {
        lu: mats.stiff_a.interior().factor()?,
    };
    let sample = |k: i64| -> Result<LineSample<T>> {
        let s = line.point(k);
        let rhs = interior_of(&data.h.laplace(s.value(), data.horizon));
        let v_eps = solve_complex(mats, s, eps, data.beta, &rhs)?.values;
        let v_0 = embed_complex(&solve_stationary_complex(&stationary.lu, &rhs));
        let diff: Vec<Cplx<T>> = v_eps.iter().zip(&v_0).map(|(a, b)| *a - *b).collect();
        let gap = complex_norm_v(mats, &diff);
        Ok(LineSample {
            s2: s.value().im,
            norm_eps: complex_norm_v(mats, &v_eps),
            norm_0: complex_norm_v(mats, &v_0),
            gap2: gap * gap,
        })
    };
    let k_max = line.k_max() as i64;
    let samples = (-k_max..=k_max).map(sample).collect::<Result<Vec<_>>>()?;
    let value = (-k_max..=k_max)
        .zip(&samples)
        .fold(T::zero(), |acc, (k, s)| acc + line.weight(k) * s.gap2);
    let half = samples[k_max as usize..]
        .iter()
        .enumerate()
        .fold(T::zero(), |acc, (k, s)| {
            let w = if k == 0 { line.ds2() * T::lit(0.5) } else { line.weight(k as i64) };
            acc + w * s.gap2
        });
    let tail = line_tail(eps, line, data)?;
    if tail > T::lit(0.1) * value {
        return Err(Error::TailTooLarge {
            tail: tail.as_f64(),
            integral: value.as_f64(),
        });
    }
    Ok(LineDistance {
        value,
        tail,
        doubled_half_line: T::lit(2.0) * half,
        samples,
    })
}

fn embed_complex<T: Real>(interior: &[Cplx<T>]) -> Vec<Cplx<T>> {
    let zero = Cplx::new(T::zero(), T::zero());
    std::iter::once(zero)
        .chain(interior.iter().copied())
        .chain(std::iter::once(zero))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlancherelReport<T> {
    /// `∫ ‖ĥ(s₁ + is₂)‖² ds₂` on the truncated grid.
    pub line_side: T,
    /// `2π ∫₀ᵀ e^{−2s₁t} ‖h(t)‖² dt`.
    pub time_side: T,
}

impl<T: Real> PlancherelReport<T> {
    pub fn relative_gap(&self) -> T {
        if self.time_side == T::zero() {
            return self.line_side.abs();
        }
        (self.line_side - self.time_side).abs() / self.time_side
    }
}

/// Both sides of the Plancherel identity for `h` in the norm `√(xᵀGx)`.
pub fn plancherel_check<T: Real>(
    h: &SeparableField<T>,
    line: &LineGrid<T>,
    horizon: T,
    gram: &SymTridiag<T>,
) -> PlancherelReport<T> {
    if h.is_zero() {
        return PlancherelReport {
            line_side: T::zero(),
            time_side: T::zero(),
        };
    }
    let line_side = line.integrate(|s| gram.hermitian_form(&h.laplace(s.value(), horizon)));
    let rule = GaussLegendre::<T>::new(16);
    let s1 = line.s1();
    let time_side = T::two_pi()
        * rule.composite(T::zero(), horizon, 64, |t| {
            (-T::lit(2.0) * s1 * t).exp() * gram.quad_form(&h.eval(t))
        });
    PlancherelReport { line_side, time_side }
}

/// Truncated Bromwich integral `(1/2π) ∫_{−S}^{S} e^{st} f̂(s) ds₂` of a scalar transform.
pub fn bromwich_diagnostic<T: Real, F: Fn(Cplx<T>) -> Cplx<T>>(f_hat: F, line: &LineGrid<T>, t: T) -> T {
    line.integrate(|s| {
        let s = s.value();
        (cexp(s.scale(t)) * f_hat(s)).re
    }) / T::two_pi()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{assemble, CoefficientField, SpatialMesh};
    use crate::profile::Profile;
    use proptest::prelude::{prop_assert, proptest, ProptestConfig};

    fn mats(n: usize, b: f64) -> (SpatialMesh<f64>, FemMatrices<f64>) {
        let mesh = SpatialMesh::uniform(1.0, n).unwrap();
        let a: Vec<f64> = (0..n).map(|e| 1.0 + 0.5 * (e % 3) as f64).collect();
        let bv: Vec<f64> = (0..n).map(|e| b * (1.0 + 0.25 * (e % 2) as f64)).collect();
        let m = assemble(&mesh, &CoefficientField::tight(a, bv).unwrap()).unwrap();
        (mesh, m)
    }

    fn s(re: f64, im: f64) -> ComplexFrequency<f64> {
        ComplexFrequency::new(re, im).unwrap()
    }

    #[test]
    fn transforms_of_simple_loads() {
        let phi = vec![0.5, -1.0, 2.0];
        let t_end = 1.3;
        for z in [s(1.0, 0.0), s(0.3, 7.0), s(2.0, -40.0)] {
            let sv = z.value();
            let one = Cplx::new(1.0, 0.0);
            let constant = laplace_load(|_| phi.clone(), z, t_end).unwrap();
            let expect = (one - (-sv * t_end).exp()) / sv;
            let decaying = laplace_load(|t: f64| phi.iter().map(|p| p * (-t).exp()).collect(), z, t_end).unwrap();
            let expect_exp = (one - (-(sv + 1.0) * t_end).exp()) / (sv + 1.0);
            for i in 0..3 {
                assert!((constant[i] - expect * phi[i]).norm() <= 1e-10 * (expect * phi[i]).norm());
                assert!((decaying[i] - expect_exp * phi[i]).norm() <= 1e-10 * (expect_exp * phi[i]).norm());
            }
        }
        let zero = laplace_load(|_| vec![0.0; 3], s(1.0, 2.0), 1.0).unwrap();
        assert!(zero.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn quadrature_agrees_with_closed_form_transforms() {
        let field = SeparableField::single(
            Profile::Sine {
                amplitude: 1.0,
                omega: 3.0,
                phase: 0.2,
            },
            vec![1.0, 2.0],
        )
        .with_term(Profile::Polynomial(vec![1.0, -1.0, 0.5]), vec![0.0, 1.0]);
        for z in [s(1.0, 0.5), s(0.2, 25.0)] {
            let quad = laplace_load(|t| field.eval(t), z, 2.0).unwrap();
            let closed = field.laplace(z.value(), 2.0);
            for (a, b) in quad.iter().zip(&closed) {
                assert!((a - b).norm() <= 1e-10 * b.norm().max(1e-3));
            }
        }
    }

    #[test]
    fn line_grid_validation() {
        assert!(LineGrid::new(0.0, 1.0, 3).is_err());
        assert!(LineGrid::new(1.0, 0.0, 3).is_err());
        let g = LineGrid::new(1.0f64, 0.25, 8).unwrap();
        assert_eq!(g.radius(), 2.0);
        // trapezoid of a constant over [-S, S]
        assert!((g.integrate(|_| 1.0) - 4.0).abs() < 1e-15);
    }

    fn unit_gamma_box() -> GammaBox {
        GammaBox {
            beta: 1.0,
            a0: 0.1,
            b0: 0.2,
            c0: 1.5,
            c1: 3.0,
        }
    }

    #[test]
    fn empty_gamma_box_is_inactive() {
        let bx = GammaBox {
            beta: 1.0,
            a0: 1.0,
            b0: 2.0,
            c0: 2.0,
            c1: 2.0,
        };
        assert!(estimate_gamma(&bx).inactive());
    }

    #[test]
    fn gamma_estimate_is_positive_and_below_sampled_values() {
        let bx = unit_gamma_box();
        let est = estimate_gamma(&bx);
        assert!(est.value > 0.0, "{est:?}");
        let (a_lo, a_hi) = bx.a_range().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let r = bx.radius() * rng.random::<f64>();
            let theta = PI * (rng.random::<f64>() - 0.5);
            let a = a_lo + (a_hi - a_lo) * rng.random::<f64>();
            let (b_lo, b_hi) = bx.b_range(a);
            let b = b_lo + (b_hi - b_lo) * rng.random::<f64>();
            let v = bx.ratio(Cplx::from_polar(r, theta), a, b);
            assert!(v.is_finite() && v > 0.0);
            assert!(v >= est.value);
        }
        // imaginary axis
        for y in [0.0, 0.3, 1.0, bx.radius()] {
            let v = bx.ratio(Cplx::new(0.0, y), a_lo, bx.b_range(a_lo).0);
            assert!(v.is_finite() && v > 0.0);
        }
    }

    #[test]
    fn shrinking_the_box_does_not_lower_gamma() {
        let wide = unit_gamma_box();
        let narrow = GammaBox { a0: 0.15, b0: 0.3, ..wide };
        assert!(estimate_gamma(&narrow).raw_min >= estimate_gamma(&wide).raw_min - 1e-12);
    }

    #[test]
    fn k_of_s_branches() {
        let (_, m) = mats(8, 0.5);
        let spec = CoercivitySpec::from_mats(&m, 1.0).unwrap();
        let near = k_of_s(&spec, s(1e-3, 0.0)).unwrap();
        let expected = 0.5f64.min(if spec.gamma.inactive() { f64::INFINITY } else { spec.gamma.value });
        assert!((near - expected).abs() < 1e-14 || near < expected);
        let far = k_of_s(&spec, s(1.0, 1e4)).unwrap();
        let sv = Cplx::new(1.0, 1e4);
        let branch = spec.alpha / (2.0 * 3f64.sqrt() * (sv * (sv * 1.0 + 1.0)).norm());
        assert!((far - branch).abs() <= 1e-15 * branch);
    }

    #[test]
    fn k_of_s_recomputes_each_branch() {
        let bounds = CoefficientBounds {
            a_min: 1.0f64,
            a_max: 1.0,
            b_min: 1.0,
            b_max: 1.0,
        };
        let spec = CoercivitySpec::new(1.0, bounds, 1.0).unwrap();
        assert_eq!((spec.a0, spec.b0, spec.c0, spec.c1), (1.0, 2.0, 2.0, 2.0));
        assert!((spec.alpha - 1.0 / 6.0).abs() < 1e-15);
        assert!(spec.gamma.inactive());
        let k = k_of_s(&spec, s(1.0, 0.0)).unwrap();
        assert!((k - (1.0 / 6.0) / (2.0 * 3f64.sqrt() * 2.0)).abs() < 1e-15);
    }

    #[test]
    fn non_positive_gamma_is_reported() {
        let (_, m) = mats(4, 0.5);
        let mut spec = CoercivitySpec::from_mats(&m, 1.0).unwrap();
        spec.gamma.value = -1.0;
        assert!(matches!(k_of_s(&spec, s(1.0, 0.0)), Err(Error::GammaNotPositive { .. })));
    }

    #[test]
    fn coercivity_holds_on_random_vectors() {
        let (_, m) = mats(15, 0.8);
        let spec = CoercivitySpec::from_mats(&m, 0.5).unwrap();
        for eps in [0.5, 0.1, 0.02] {
            for s2 in [-10.0, -1.0, 0.0, 3.0, 10.0] {
                let r = verify_coercivity(&spec, &m, s(1.0, s2), eps, 50, 9).unwrap();
                assert!(r.all_passed(), "eps {eps}, s2 {s2}: {r:?}");
            }
        }
        assert!(verify_coercivity(&spec, &m, s(1.0, 0.0), 1.0, 5, 0).is_err());
    }

    #[test]
    fn without_viscosity_the_form_dominates_the_stiffness() {
        let mesh = SpatialMesh::uniform(1.0, 10).unwrap();
        let mut m = assemble(&mesh, &CoefficientField::constant(10, 2.0, 1.0).unwrap()).unwrap();
        m.stiff_b = SymTridiag::zeros(11);
        let op = shifted_operator(&m, s(1.5, 0.0), 0.3, 1.0);
        let psi: Vec<Cplx<f64>> = (0..9).map(|i| Cplx::new((i as f64).sin(), 0.0)).collect();
        let form: Cplx<f64> = op.mul_vec(&psi).iter().zip(&psi).map(|(a, b)| b.conj() * a).sum();
        let stiff = m.stiff_unit.interior().hermitian_form(&psi);
        assert!(form.im.abs() < 1e-14);
        assert!(form.re - 2.0 * stiff >= 0.3 * 0.3 * 1.5 * 1.5 * m.mass.interior().hermitian_form(&psi) - 1e-12);
    }

    fn line_data(mesh: &SpatialMesh<f64>, m: &FemMatrices<f64>) -> LaplaceData<f64> {
        LaplaceData {
            mats: m.clone(),
            beta: 0.5,
            horizon: 1.0,
            h: SeparableField::single(
                Profile::Sine {
                    amplitude: 1.0,
                    omega: PI,
                    phase: 0.0,
                },
                mesh.load_vector(|x| (PI * x).sin()),
            ),
        }
    }

    #[test]
    fn line_distance_decreases_with_eps() {
        let (mesh, m) = mats(8, 0.8);
        let data = line_data(&mesh, &m);
        let line = LineGrid::new(1.0, 0.5, 4000).unwrap();
        let d: Vec<f64> = [0.2, 0.1, 0.05]
            .iter()
            .map(|&e| {
                let r = line_distance(e, &line, &data).unwrap();
                assert!(r.tail <= 0.1 * r.value);
                assert!(r.symmetry_gap() < 1e-12, "{}", r.symmetry_gap());
                r.value
            })
            .collect();
        assert!(d[0] > d[1] && d[1] > d[2], "{d:?}");
    }

    #[test]
    fn viscosity_enters_the_gap_at_order_eps() {
        // the memory term is part of the perturbation away from the stationary operator
        let (mesh, weak) = mats(8, 0.4);
        let (_, strong) = mats(8, 4.0);
        let line = LineGrid::new(1.0, 0.5, 4000).unwrap();
        let dw = line_distance(0.1, &line, &line_data(&mesh, &weak)).unwrap().value;
        let ds = line_distance(0.1, &line, &line_data(&mesh, &strong)).unwrap().value;
        assert!(ds > dw, "{ds} vs {dw}");
    }

    #[test]
    fn zero_load_has_zero_distance() {
        let (_, m) = mats(6, 1.0);
        let data = LaplaceData {
            mats: m,
            beta: 0.5,
            horizon: 1.0,
            h: SeparableField::zero(7),
        };
        let r = line_distance(0.1, &LineGrid::new(1.0, 1.0, 10).unwrap(), &data).unwrap();
        assert_eq!((r.value, r.tail), (0.0, 0.0));
    }

    #[test]
    fn short_lines_are_rejected() {
        let (mesh, m) = mats(8, 0.8);
        let err = line_distance(0.05, &LineGrid::new(1.0, 0.5, 20).unwrap(), &line_data(&mesh, &m));
        assert!(matches!(err, Err(Error::TailTooLarge { .. })));
    }

    fn exp_field(mesh: &SpatialMesh<f64>) -> SeparableField<f64> {
        SeparableField::single(
            Profile::Exponential {
                amplitude: 1.0,
                rate: -1.0,
            },
            mesh.interpolate(|x| x * (1.0 - x) + 0.3),
        )
    }

    #[test]
    fn plancherel_gap_shrinks_with_radius() {
        let (mesh, m) = mats(5, 1.0);
        let h = exp_field(&mesh);
        let short = LineGrid::new(1.0, 0.5, 2000).unwrap();
        let long = short.with_k_max(4000).unwrap();
        let g1 = plancherel_check(&h, &short, 1.0, &m.mass).relative_gap();
        let g2 = plancherel_check(&h, &long, 1.0, &m.mass).relative_gap();
        assert!(g2 < g1 && g1 < 1e-2, "{g1} {g2}");
        let closed = 2.0 * PI * (1.0 - (-4.0f64).exp()) / 4.0 * m.mass.quad_form(&h.terms()[0].1);
        assert!((plancherel_check(&h, &long, 1.0, &m.mass).time_side - closed).abs() < 1e-12 * closed);
        let zero = plancherel_check(&SeparableField::zero(6), &short, 1.0, &m.mass);
        assert_eq!(zero.relative_gap(), 0.0);
    }

    #[test]
    fn bromwich_recovers_a_decaying_exponential() {
        let line = LineGrid::new(1.0, 0.05, 200_000).unwrap();
        let one = Cplx::new(1.0, 0.0);
        let f_hat = |s: Cplx<f64>| (one - (-(s + 1.0)).exp()) / (s + 1.0);
        let v = bromwich_diagnostic(f_hat, &line, 0.4);
        assert!((v - (-0.4f64).exp()).abs() < 1e-3, "{v}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn coercivity_over_random_frequencies(s1 in 0.05f64..4.0, s2 in -30.0f64..30.0, eps in 0.01f64..0.99, seed in 0u64..100) {
            let (_, m) = mats(10, 0.6);
            let spec = CoercivitySpec::from_mats(&m, 0.7).unwrap();
            let r = verify_coercivity(&spec, &m, s(s1, s2), eps, 10, seed).unwrap();
            prop_assert!(r.all_passed(), "{:?}", r);
        }

        #[test]
        fn line_integrand_is_even(s2 in 0.0f64..50.0, eps in 0.05f64..0.9) {
            let (mesh, m) = mats(6, 0.8);
            let data = line_data(&mesh, &m);
            let lu = m.stiff_a.interior().factor().unwrap();
            let gap = |z: ComplexFrequency<f64>| {
                let rhs = interior_of(&data.h.laplace(z.value(), 1.0));
                let ve = solve_complex(&m, z, eps, 0.5, &rhs).unwrap().values;
                let v0 = embed_complex(&solve_stationary_complex(&lu, &rhs));
                let d: Vec<_> = ve.iter().zip(&v0).map(|(a, b)| a - b).collect();
                complex_norm_v(&m, &d)
            };
            let (a, b) = (gap(s(1.0, s2)), gap(s(1.0, -s2)));
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1e-300));
        }
    }
}
