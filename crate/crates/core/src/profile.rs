//! Scalar time profiles and separable space-time fields built from them.
//!
//! Every profile has exact first and second derivatives and an exact finite
//! Laplace transform `∫₀ᵀ e^{-st} p(t) dt`.

use crate::scalar::{cabs, cexp, Cplx, Real};

#[derive(Clone, Debug, PartialEq)]
pub enum Profile<T> {
    Constant(T),
    /// `Σ cₖ tᵏ`, coefficients in increasing degree.
    Polynomial(Vec<T>),
    /// `A sin(ωt + φ)`.
    Sine { amplitude: T, omega: T, phase: T },
    /// `A e^{rt}`.
    Exponential { amplitude: T, rate: T },
}

impl<T: Real> Profile<T> {
    pub fn eval(&self, t: T) -> T {
        self.derivative(t, 0)
    }

    pub fn d1(&self, t: T) -> T {
        self.derivative(t, 1)
    }

    pub fn d2(&self, t: T) -> T {
        self.derivative(t, 2)
    }

    pub fn derivative(&self, t: T, order: u32) -> T {
        match self {
            Profile::Constant(c) => {
                if order == 0 {
                    *c
                } else {
                    T::zero()
                }
            }
            Profile::Polynomial(c) => {
                let mut acc = T::zero();
                for (k, ck) in c.iter().enumerate().rev() {
                    if (k as u32) < order {
                        break;
                    }
                    let mut falling = T::one();
                    for j in 0..order {
                        falling *= T::from_count(k - j as usize);
                    }
                    acc = acc * t + *ck * falling;
                }
                acc
            }
            Profile::Sine {
                amplitude,
                omega,
                phase,
            } => {
                let arg = *omega * t + *phase + T::frac_pi_2() * T::from_count(order as usize);
                *amplitude * omega.powi(order as i32) * arg.sin()
            }
            Profile::Exponential { amplitude, rate } => {
                *amplitude * rate.powi(order as i32) * (*rate * t).exp()
            }
        }
    }

    /// `∫₀ᵀ e^{-st} p(t) dt`.
    pub fn laplace(&self, s: Cplx<T>, horizon: T) -> Cplx<T> {
        let zero = Cplx::new(T::zero(), T::zero());
        match self {
            Profile::Constant(c) => exp_moment(-s, horizon).scale(*c),
            Profile::Polynomial(c) => c
                .iter()
                .enumerate()
                .fold(zero, |acc, (k, ck)| acc + poly_moment(s, horizon, k).scale(*ck)),
            Profile::Sine {
                amplitude,
                omega,
                phase,
            } => {
                // sin(ωt+φ) = Im(e^{iφ} e^{iωt}) with conjugate partner
                let i = Cplx::new(T::zero(), T::one());
                let plus = exp_moment(i.scale(*omega) - s, horizon) * cexp(i.scale(*phase));
                let minus = exp_moment(-i.scale(*omega) - s, horizon) * cexp(-i.scale(*phase));
                (plus - minus) / i.scale(T::lit(2.0)) * Cplx::new(*amplitude, T::zero())
            }
            Profile::Exponential { amplitude, rate } => {
                exp_moment(Cplx::new(*rate, T::zero()) - s, horizon).scale(*amplitude)
            }
        }
    }

    pub fn scaled(&self, k: T) -> Self {
        match self {
            Profile::Constant(c) => Profile::Constant(*c * k),
            Profile::Polynomial(c) => Profile::Polynomial(c.iter().map(|v| *v * k).collect()),
            Profile::Sine {
                amplitude,
                omega,
                phase,
            } => Profile::Sine {
                amplitude: *amplitude * k,
                omega: *omega,
                phase: *phase,
            },
            Profile::Exponential { amplitude, rate } => Profile::Exponential {
                amplitude: *amplitude * k,
                rate: *rate,
            },
        }
    }
}

/// `∫₀ᵀ e^{ct} dt` with a series near `c = 0`.
fn exp_moment<T: Real>(c: Cplx<T>, horizon: T) -> Cplx<T> {
    let x = c.scale(horizon);
    if cabs(x) < T::lit(1e-3) {
        // T Σ xᵏ/(k+1)!
        let mut term = Cplx::new(T::one(), T::zero());
        let mut acc = term;
        for k in 2..8 {
            term = term * x / Cplx::new(T::from_count(k), T::zero());
            acc += term;
        }
        acc.scale(horizon)
    } else {
        (cexp(x) - Cplx::new(T::one(), T::zero())) / c
    }
}

/// `∫₀ᵀ tᵏ e^{-st} dt`.
fn poly_moment<T: Real>(s: Cplx<T>, horizon: T, k: usize) -> Cplx<T> {
    let one = Cplx::new(T::one(), T::zero());
    let x = s.scale(horizon);
    if cabs(x) < T::lit(2.0) {
        // Σ_m (-sT)^m / (m! (k+m+1)) · T^{k+1}
        let mut term = one;
        let mut acc = Cplx::new(T::zero(), T::zero());
        for m in 0..60 {
            acc += term / Cplx::new(T::from_count(k + m + 1), T::zero());
            term = term * (-x) / Cplx::new(T::from_count(m + 1), T::zero());
        }
        acc.scale(horizon.powi(k as i32 + 1))
    } else {
        // k!/s^{k+1} (1 − e^{−sT} Σ_{j≤k} (sT)^j/j!)
        let mut partial = one;
        let mut term = one;
        let mut fact = T::one();
        for j in 1..=k {
            term = term * x / Cplx::new(T::from_count(j), T::zero());
            partial += term;
            fact *= T::from_count(j);
        }
        let head = (one - cexp(-x) * partial).scale(fact);
        head / s.powu(k as u32 + 1)
    }
}

/// `Σₖ pₖ(t) φₖ` with nodal (or dual) vectors `φₖ` of a common length.
#[derive(Clone, Debug, PartialEq)]
pub struct SeparableField<T> {
    terms: Vec<(Profile<T>, Vec<T>)>,
    len: usize,
}

impl<T: Real> SeparableField<T> {
    pub fn zero(len: usize) -> Self {
        Self {
            terms: Vec::new(),
            len,
        }
    }

    pub fn single(profile: Profile<T>, shape: Vec<T>) -> Self {
        let len = shape.len();
        Self {
            terms: vec![(profile, shape)],
            len,
        }
    }

    pub fn with_term(mut self, profile: Profile<T>, shape: Vec<T>) -> Self {
        assert_eq!(shape.len(), self.len, "separable field term length");
        self.terms.push((profile, shape));
        self
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[(Profile<T>, Vec<T>)] {
        &self.terms
    }

    pub fn derivative(&self, t: T, order: u32) -> Vec<T> {
        let mut out = vec![T::zero(); self.len];
        for (p, shape) in &self.terms {
            let c = p.derivative(t, order);
            for (o, v) in out.iter_mut().zip(shape) {
                *o += c * *v;
            }
        }
        out
    }

    pub fn eval(&self, t: T) -> Vec<T> {
        self.derivative(t, 0)
    }

    pub fn d1(&self, t: T) -> Vec<T> {
        self.derivative(t, 1)
    }

    pub fn d2(&self, t: T) -> Vec<T> {
        self.derivative(t, 2)
    }

    pub fn laplace(&self, s: Cplx<T>, horizon: T) -> Vec<Cplx<T>> {
        let mut out = vec![Cplx::new(T::zero(), T::zero()); self.len];
        for (p, shape) in &self.terms {
            let c = p.laplace(s, horizon);
            for (o, v) in out.iter_mut().zip(shape) {
                *o += c.scale(*v);
            }
        }
        out
    }

    /// Applies a linear map to every spatial shape.
    pub fn map_shapes<F: Fn(&[T]) -> Vec<T>>(&self, f: F) -> Self {
        let terms: Vec<(Profile<T>, Vec<T>)> = self
            .terms
            .iter()
            .map(|(p, s)| (p.clone(), f(s)))
            .collect();
        let len = terms.first().map_or(self.len, |(_, s)| s.len());
        Self { terms, len }
    }

    pub fn scaled(&self, k: T) -> Self {
        Self {
            terms: self.terms.iter().map(|(p, s)| (p.scaled(k), s.clone())).collect(),
            len: self.len,
        }
    }

    pub fn plus(&self, other: &Self) -> Self {
        assert_eq!(self.len, other.len, "separable field length");
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self {
            terms,
            len: self.len,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::GaussLegendre;

    fn numeric_laplace(p: &Profile<f64>, s: Cplx<f64>, horizon: f64) -> Cplx<f64> {
        let rule = GaussLegendre::<f64>::new(20);
        let re = rule.composite(0.0, horizon, 64, |t| ((-s * t).exp() * p.eval(t)).re);
        let im = rule.composite(0.0, horizon, 64, |t| ((-s * t).exp() * p.eval(t)).im);
        Cplx::new(re, im)
    }

    fn catalog() -> Vec<Profile<f64>> {
        vec![
            Profile::Constant(1.5),
            Profile::Polynomial(vec![0.5, -1.0, 2.0, 0.25]),
            Profile::Sine {
                amplitude: 2.0,
                omega: 3.0,
                phase: 0.4,
            },
            Profile::Exponential {
                amplitude: -0.7,
                rate: -1.3,
            },
        ]
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-4;
        for p in catalog() {
            for &t in &[0.0, 0.37, 1.2] {
                let fd1 = (p.eval(t + h) - p.eval(t - h)) / (2.0 * h);
                let fd2 = (p.eval(t + h) - 2.0 * p.eval(t) + p.eval(t - h)) / (h * h);
                assert!((p.d1(t) - fd1).abs() < 1e-6, "{p:?}");
                assert!((p.d2(t) - fd2).abs() < 1e-4, "{p:?}");
            }
        }
    }

    #[test]
    fn polynomial_horner() {
        let p = Profile::Polynomial(vec![1.0, 2.0, 3.0]);
        assert_eq!(p.eval(2.0), 17.0);
        assert_eq!(p.d1(2.0), 14.0);
        assert_eq!(p.d2(2.0), 6.0);
        assert_eq!(p.derivative(2.0, 3), 0.0);
    }

    #[test]
    fn closed_form_transforms_match_quadrature() {
        let points = [
            Cplx::new(1.0, 0.0),
            Cplx::new(1.0, 7.5),
            Cplx::new(0.3, -2.0),
            Cplx::new(1e-5, 1e-5),
            Cplx::new(2.0, 40.0),
        ];
        for p in catalog() {
            for s in points {
                let exact = p.laplace(s, 1.5);
                let numeric = numeric_laplace(&p, s, 1.5);
                assert!((exact - numeric).norm() < 1e-11 * (1.0 + numeric.norm()), "{p:?} at {s}");
            }
        }
    }

    #[test]
    fn constant_transform_closed_form() {
        let s = Cplx::new(1.0, 2.0);
        let t = 2.0;
        let expected = (Cplx::new(1.0, 0.0) - (-s * t).exp()) / s;
        assert!((Profile::Constant(1.0).laplace(s, t) - expected).norm() < 1e-15);
    }

    #[test]
    fn separable_field_is_linear() {
        let f = SeparableField::single(Profile::Constant(2.0), vec![1.0, 2.0])
            .with_term(Profile::Polynomial(vec![0.0, 1.0]), vec![0.0, 1.0]);
        assert_eq!(f.eval(3.0), vec![2.0, 7.0]);
        assert_eq!(f.d1(3.0), vec![0.0, 1.0]);
        assert_eq!(f.scaled(2.0).eval(3.0), vec![4.0, 14.0]);
        assert_eq!(f.plus(&f).eval(1.0), vec![4.0, 10.0]);
    }
}
