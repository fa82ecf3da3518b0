use super::{History, InitialData, ProblemData};
use crate::error::{Error, Result};
use crate::fem::FemMatrices;
use crate::quadrature::GaussLegendre;
use crate::scalar::Real;

/// Data at `t = 0` that replaces the pre-history.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedData<T> {
    pub u0: Vec<T>,
    pub u1: Vec<T>,
    /// Memory datum `g⁰` as a dual vector on all nodes.
    pub g0: Vec<T>,
    kernel_time: T,
}

impl<T: Real> ReducedData<T> {
    pub fn new(u0: Vec<T>, u1: Vec<T>, g0: Vec<T>, kernel_time: T) -> Self {
        Self {
            u0,
            u1,
            g0,
            kernel_time,
        }
    }

    pub fn decay(&self, t: T) -> T {
        (-t / self.kernel_time).exp()
    }

    /// `p(t) = e^{-t/βε} g⁰`.
    pub fn p(&self, t: T) -> Vec<T> {
        let d = self.decay(t);
        self.g0.iter().map(|v| *v * d).collect()
    }
}

// e^{-σ} < 1e-14 beyond this many kernel times
const TRUNCATION: f64 = 32.236_191_301_916_64;
const FD_STEP: f64 = 1e-3;

/// Restricts the problem to `t ≥ 0`.
///
/// With a history, `u⁰ = u_in(0)`, `u¹ = u̇_in(0)` (one-sided fourth-order
/// difference for callables) and `g⁰ = −K_B ∫ ρ(−τ) u_in(τ) dτ` by truncated
/// composite Gauss quadrature with panel doubling.
pub fn reduce_history<T: Real>(data: &ProblemData<T>, mats: &FemMatrices<T>) -> Result<ReducedData<T>> {
    data.validate()?;
    let n = mats.node_count();
    let tau = data.kernel_time();
    match &data.initial {
        InitialData::Reduced { u0, u1, g0 } => {
            for v in [u0, u1, g0] {
                if v.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        got: v.len(),
                    });
                }
            }
            Ok(ReducedData::new(u0.clone(), u1.clone(), g0.clone(), tau))
        }
        InitialData::History(history) => {
            let eval = |t: T| -> Vec<T> {
                match history {
                    History::Separable(s) => s.eval(t),
                    History::Callable(c) => c(t),
                }
            };
            let u0 = eval(T::zero());
            if u0.len() != n || u0.iter().any(|v| !v.is_finite()) {
                return Err(Error::Precondition("history is not defined at τ = 0".into()));
            }
            let u1 = match history {
                History::Separable(s) => s.d1(T::zero()),
                History::Callable(c) => one_sided_derivative(c.as_ref(), T::lit(FD_STEP)),
            };
            let mean = kernel_average(&eval, tau, n)?;
            let weighted_norm = mats.norm_v(&mean);
            if !weighted_norm.is_finite() {
                return Err(Error::Precondition("history is not kernel-integrable".into()));
            }
            let g0 = mats.stiff_b.mul_vec(&mean).into_iter().map(|v| -v).collect();
            Ok(ReducedData::new(u0, u1, g0, tau))
        }
    }
}

fn one_sided_derivative<T: Real>(f: &(dyn Fn(T) -> Vec<T> + Send + Sync), h: T) -> Vec<T> {
    let coeffs = [25.0, -48.0, 36.0, -16.0, 3.0];
    let mut out = vec![T::zero(); f(T::zero()).len()];
    for (k, c) in coeffs.iter().enumerate() {
        let sample = f(-h * T::from_count(k));
        for (o, s) in out.iter_mut().zip(sample) {
            *o += T::lit(*c) * s;
        }
    }
    let scale = T::lit(12.0) * h;
    out.iter_mut().for_each(|v| *v /= scale);
    out
}

/// `∫_{-∞}^0 (βε)⁻¹ e^{τ/(βε)} u_in(τ) dτ` in the kernel variable `σ = −τ/(βε)`.
fn kernel_average<T: Real, F: Fn(T) -> Vec<T>>(eval: &F, tau: T, n: usize) -> Result<Vec<T>> {
    let rule = GaussLegendre::<T>::new(16);
    let sigma_max = T::lit(TRUNCATION);
    let integrate = |panels: usize| -> Vec<T> {
        let mut acc = vec![T::zero(); n];
        let width = sigma_max / T::from_count(panels);
        for p in 0..panels {
            let lo = width * T::from_count(p);
            for (sigma, w) in rule.mapped(lo, lo + width) {
                let weight = w * (-sigma).exp();
                for (a, u) in acc.iter_mut().zip(eval(-sigma * tau)) {
                    *a += weight * u;
                }
            }
        }
        acc
    };
    let tol = T::lit(1e-12);
    let mut panels = 8;
    let mut previous = integrate(panels);
    loop {
        panels *= 2;
        let current = integrate(panels);
        let scale = current.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        let change = current
            .iter()
            .zip(&previous)
            .fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()));
        if change <= tol * scale || scale == T::zero() {
            return Ok(current);
        }
        if panels >= 4096 {
            return Err(Error::QuadratureNonConvergence(format!(
                "history integral changed by {:e} relative at {panels} panels",
                change / scale
            )));
        }
        previous = current;
    }
}
