use super::stepper::ExpWeights;
use super::{DampingLaw, ProblemData, ReducedData};
use crate::error::{Error, Result};
use crate::fem::FemMatrices;
use crate::scalar::Real;

/// Loads of the homogeneous problem for `v = u − z`.
///
/// `h = f − ε² M z̈` and, for the memory law,
/// `ℓ = g − p − (K_A + K_B) z + Gᵀ B w_z`, where `w_z` follows the same
/// internal-variable recursion as `w` but driven by `e z`.
#[derive(Clone, Debug)]
pub struct LiftedSystem<T> {
    data: ProblemData<T>,
    reduced: ReducedData<T>,
    mats: FemMatrices<T>,
    lift_active: bool,
}

pub fn boundary_lift<T: Real>(
    data: &ProblemData<T>,
    reduced: &ReducedData<T>,
    mats: &FemMatrices<T>,
) -> Result<LiftedSystem<T>> {
    data.validate()?;
    if data.nodes() != mats.node_count() {
        return Err(Error::DimensionMismatch {
            expected: mats.node_count(),
            got: data.nodes(),
        });
    }
    Ok(LiftedSystem {
        data: data.clone(),
        reduced: reduced.clone(),
        mats: mats.clone(),
        lift_active: !data.z.is_zero(),
    })
}

fn zeros<T: Real>(n: usize) -> Vec<T> {
    vec![T::zero(); n]
}

impl<T: Real> LiftedSystem<T> {
    pub fn data(&self) -> &ProblemData<T> {
        &self.data
    }

    pub fn reduced(&self) -> &ReducedData<T> {
        &self.reduced
    }

    pub fn mats(&self) -> &FemMatrices<T> {
        &self.mats
    }

    fn n(&self) -> usize {
        self.mats.node_count()
    }

    pub fn z(&self, t: T) -> Vec<T> {
        if self.lift_active {
            self.data.z.eval(t)
        } else {
            zeros(self.n())
        }
    }

    pub fn z_dot(&self, t: T) -> Vec<T> {
        if self.lift_active {
            self.data.z.d1(t)
        } else {
            zeros(self.n())
        }
    }

    /// `v⁰ = u⁰ − z(0)` and `v¹ = u¹ − ż(0)` with the boundary values imposed.
    pub fn initial_state(&self) -> (Vec<T>, Vec<T>) {
        let fix = |mut v: Vec<T>| {
            let n = v.len();
            v[0] = T::zero();
            v[n - 1] = T::zero();
            v
        };
        let z0 = self.z(T::zero());
        let z1 = self.z_dot(T::zero());
        let v0 = self.reduced.u0.iter().zip(&z0).map(|(u, z)| *u - *z).collect();
        let v1 = self.reduced.u1.iter().zip(&z1).map(|(u, z)| *u - *z).collect();
        (fix(v0), fix(v1))
    }

    fn field_or_zero(&self, field: &crate::profile::SeparableField<T>, t: T, order: u32) -> Vec<T> {
        if field.is_zero() {
            zeros(self.n())
        } else {
            field.derivative(t, order)
        }
    }

    /// `h(t) = f(t) − ε² M z̈(t)`.
    pub fn h(&self, t: T) -> Vec<T> {
        self.h_derivative(t, 0)
    }

    fn h_derivative(&self, t: T, order: u32) -> Vec<T> {
        let mut out = self.field_or_zero(&self.data.f, t, order);
        if self.lift_active {
            let e2 = self.data.eps * self.data.eps;
            let mz = self.mats.mass.mul_vec(&self.data.z.derivative(t, order + 2));
            for (o, m) in out.iter_mut().zip(mz) {
                *o -= e2 * m;
            }
        }
        out
    }

    /// `γ = g − p` for the memory law, `g` otherwise.
    fn gamma(&self, t: T, order: u32) -> Vec<T> {
        let mut out = self.field_or_zero(&self.data.g, t, order);
        if self.data.law == DampingLaw::Memory {
            let rate = -T::one() / self.data.kernel_time();
            let d = self.reduced.decay(t) * rate.powi(order as i32);
            for (o, g) in out.iter_mut().zip(&self.reduced.g0) {
                *o -= d * *g;
            }
        }
        out
    }

    /// `ℓ(t)` given the lift's internal variable `w_z(t)`.
    pub fn ell(&self, t: T, wz: &[T]) -> Vec<T> {
        let mut out = self.gamma(t, 0);
        if !self.lift_active {
            return out;
        }
        let z = self.data.z.eval(t);
        let ka = self.mats.stiff_a.mul_vec(&z);
        match self.data.law {
            DampingLaw::Memory => {
                let kb = self.mats.stiff_b.mul_vec(&z);
                let bw = self.mats.viscous_adjoint(wz);
                for i in 0..out.len() {
                    out[i] += bw[i] - ka[i] - kb[i];
                }
            }
            DampingLaw::KelvinVoigt => {
                let kb = self.mats.stiff_b.mul_vec(&self.data.z.d1(t));
                for i in 0..out.len() {
                    out[i] -= ka[i] + self.data.eps * kb[i];
                }
            }
            DampingLaw::Undamped => {
                for i in 0..out.len() {
                    out[i] -= ka[i];
                }
            }
        }
        out
    }

    /// `ℓ̇(t)`, using `ẇ_z = (e z − w_z)/(βε)`.
    pub fn ell_dot(&self, t: T, wz: &[T]) -> Vec<T> {
        let mut out = self.gamma(t, 1);
        if !self.lift_active {
            return out;
        }
        let zd = self.data.z.d1(t);
        let ka = self.mats.stiff_a.mul_vec(&zd);
        match self.data.law {
            DampingLaw::Memory => {
                let kb = self.mats.stiff_b.mul_vec(&zd);
                let ez = self.mats.strain(&self.data.z.eval(t));
                let tau = self.data.kernel_time();
                let wz_dot: Vec<T> = ez.iter().zip(wz).map(|(e, w)| (*e - *w) / tau).collect();
                let bw = self.mats.viscous_adjoint(&wz_dot);
                for i in 0..out.len() {
                    out[i] += bw[i] - ka[i] - kb[i];
                }
            }
            DampingLaw::KelvinVoigt => {
                let kb = self.mats.stiff_b.mul_vec(&self.data.z.d2(t));
                for i in 0..out.len() {
                    out[i] -= ka[i] + self.data.eps * kb[i];
                }
            }
            DampingLaw::Undamped => {
                for i in 0..out.len() {
                    out[i] -= ka[i];
                }
            }
        }
        out
    }

    /// `h + ℓ` on all nodes.
    pub fn force(&self, t: T, wz: &[T]) -> Vec<T> {
        let h = self.h(t);
        self.ell(t, wz).into_iter().zip(h).map(|(a, b)| a + b).collect()
    }

    pub fn initial_wz(&self) -> Vec<T> {
        zeros(self.mats.element_count())
    }

    /// Advances `w_z` from `t` to `t + Δt`.
    pub fn advance_wz(&self, wz: &[T], t: T, dt: T, weights: &ExpWeights<T>) -> Vec<T> {
        if !self.lift_active || self.data.law != DampingLaw::Memory {
            return wz.to_vec();
        }
        let e0 = self.mats.strain(&self.data.z.eval(t));
        let e1 = self.mats.strain(&self.data.z.eval(t + dt));
        weights.advance(wz, &e0, &e1)
    }
}
