use super::ledger::{EnergyLedger, LedgerBuilder};
use super::{boundary_lift, reduce_history, DampingLaw, LiftedSystem, ProblemData};
use crate::error::{Error, Result};
use crate::fem::{embed, interior_of, FemMatrices, TimeGrid};
use crate::linalg::{SymTridiag, TridiagLu};
use crate::scalar::Real;

/// Exact update of `βε ẇ = e − w` over one step when `e` is linear on the step:
/// `w⁺ = E w + c₀ e + c₁ e⁺`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpWeights<T> {
    pub decay: T,
    pub c0: T,
    pub c1: T,
}

impl<T: Real> ExpWeights<T> {
    pub fn new(dt: T, kernel_time: T) -> Self {
        let x = dt / kernel_time;
        let decay = (-x).exp();
        if x < T::lit(0.1) {
            // c₁ = Σ_{k≥1} (−1)^{k+1} xᵏ/(k+1)!,  c₀ = Σ_{k≥1} (−1)^{k+1} k xᵏ/(k+1)!
            let (mut c0, mut c1) = (T::zero(), T::zero());
            let mut power = T::one();
            let mut fact = T::one();
            for k in 1..16 {
                power *= -x;
                fact *= T::from_count(k + 1);
                let term = -power / fact;
                c1 += term;
                c0 += term * T::from_count(k);
            }
            Self { decay, c0, c1 }
        } else {
            let phi1 = -(-x).exp_m1() / x;
            Self {
                decay,
                c0: phi1 - decay,
                c1: T::one() - phi1,
            }
        }
    }

    pub fn advance(&self, w: &[T], e0: &[T], e1: &[T]) -> Vec<T> {
        w.iter()
            .zip(e0.iter().zip(e1))
            .map(|(w, (a, b))| self.decay * *w + self.c0 * *a + self.c1 * *b)
            .collect()
    }
}

/// `(v, v̇, w)` at time `t`; `v` and `v̇` are nodal with zero boundary entries,
/// `w` is per element.
#[derive(Clone, Debug, PartialEq)]
pub struct State<T> {
    pub t: T,
    pub v: Vec<T>,
    pub v_dot: Vec<T>,
    pub w: Vec<T>,
}

impl<T: Real> State<T> {
    pub fn zero(nodes: usize, elements: usize) -> Self {
        Self {
            t: T::zero(),
            v: vec![T::zero(); nodes],
            v_dot: vec![T::zero(); nodes],
            w: vec![T::zero(); elements],
        }
    }
}

/// One-step map for a fixed step size, with the system matrix factored once.
#[derive(Clone, Debug)]
pub struct Stepper<T> {
    mats: FemMatrices<T>,
    law: DampingLaw,
    eps: T,
    dt: T,
    weights: ExpWeights<T>,
    lu: TridiagLu<T>,
}

impl<T: Real> Stepper<T> {
    pub fn new(mats: &FemMatrices<T>, law: DampingLaw, eps: T, beta: T, dt: T) -> Result<Self> {
        if !(dt > T::zero()) {
            return Err(Error::InvalidParameter("time step must be positive".into()));
        }
        let weights = ExpWeights::new(dt, beta * eps);
        let inertia = T::lit(2.0) * eps * eps / (dt * dt);
        let half = T::lit(0.5);
        let system = match law {
            DampingLaw::Memory => SymTridiag::lincomb(&[
                (inertia, &mats.mass),
                (half, &mats.stiff_a),
                (half * (T::one() - weights.c1), &mats.stiff_b),
            ]),
            DampingLaw::KelvinVoigt => SymTridiag::lincomb(&[
                (inertia, &mats.mass),
                (half, &mats.stiff_a),
                (eps / dt, &mats.stiff_b),
            ]),
            DampingLaw::Undamped => SymTridiag::lincomb(&[(inertia, &mats.mass), (half, &mats.stiff_a)]),
        };
        let lu = system.interior().factor()?;
        Ok(Self {
            mats: mats.clone(),
            law,
            eps,
            dt,
            weights,
            lu,
        })
    }

    pub fn weights(&self) -> &ExpWeights<T> {
        &self.weights
    }

    /// Implicit midpoint step for `(v, v̇)` with the exponential update for `w`.
    /// `force0`, `force1` are the nodal loads `h + ℓ` at both ends of the step.
    pub fn advance(&self, state: &State<T>, force0: &[T], force1: &[T]) -> State<T> {
        let m = &self.mats;
        let (eps, dt) = (self.eps, self.dt);
        let two = T::lit(2.0);
        let half = T::lit(0.5);
        let mv = m.mass.mul_vec(&state.v);
        let mvd = m.mass.mul_vec(&state.v_dot);
        let kav = m.stiff_a.mul_vec(&state.v);
        let mut rhs: Vec<T> = (0..mv.len())
            .map(|i| {
                two * eps * eps / (dt * dt) * mv[i] + two * eps * eps / dt * mvd[i] - half * kav[i]
                    + half * (force0[i] + force1[i])
            })
            .collect();
        let ev = m.strain(&state.v);
        match self.law {
            DampingLaw::Memory => {
                let kbv = m.stiff_b.mul_vec(&state.v);
                let sigma: Vec<T> = state
                    .w
                    .iter()
                    .zip(&ev)
                    .map(|(w, e)| (T::one() + self.weights.decay) * *w + self.weights.c0 * *e)
                    .collect();
                let bw = m.viscous_adjoint(&sigma);
                for i in 0..rhs.len() {
                    rhs[i] += half * bw[i] - half * kbv[i];
                }
            }
            DampingLaw::KelvinVoigt => {
                let kbv = m.stiff_b.mul_vec(&state.v);
                for i in 0..rhs.len() {
                    rhs[i] += eps / dt * kbv[i];
                }
            }
            DampingLaw::Undamped => {}
        }
        let v = embed(&self.lu.solve(&interior_of(&rhs)));
        let v_dot: Vec<T> = v
            .iter()
            .zip(&state.v)
            .zip(&state.v_dot)
            .map(|((a, b), c)| two * (*a - *b) / dt - *c)
            .collect();
        let w = self.weights.advance(&state.w, &ev, &m.strain(&v));
        State {
            t: state.t + dt,
            v,
            v_dot,
            w,
        }
    }
}

/// States on the grid, with the full displacement `u = v + z` and velocity.
#[derive(Clone, Debug)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub states: Vec<State<T>>,
    pub u: Vec<Vec<T>>,
    pub u_dot: Vec<Vec<T>>,
}

impl<T: Real> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn v_fields(&self) -> Vec<Vec<T>> {
        self.states.iter().map(|s| s.v.clone()).collect()
    }

    pub fn v_dot_fields(&self) -> Vec<Vec<T>> {
        self.states.iter().map(|s| s.v_dot.clone()).collect()
    }
}

/// Reduces the history, lifts the boundary data and integrates on `grid`.
pub fn integrate<T: Real>(
    data: &ProblemData<T>,
    mats: &FemMatrices<T>,
    grid: &TimeGrid<T>,
) -> Result<(Trajectory<T>, EnergyLedger<T>)> {
    let reduced = reduce_history(data, mats)?;
    let system = boundary_lift(data, &reduced, mats)?;
    integrate_lifted(&system, grid)
}

pub(crate) fn stiffness_guard<T: Real>(eps: T, beta: T, dt: T) {
    if eps < T::lit(1e-6) && dt > beta * eps / T::lit(4.0) {
        log::warn!(
            "eps = {:e}: step {:e} exceeds beta*eps/4 = {:e}; the memory layer is under-resolved",
            eps,
            dt,
            beta * eps / T::lit(4.0)
        );
    }
}

pub fn integrate_lifted<T: Real>(
    system: &LiftedSystem<T>,
    grid: &TimeGrid<T>,
) -> Result<(Trajectory<T>, EnergyLedger<T>)> {
    let data = system.data();
    let mats = system.mats();
    let dt = grid.dt();
    stiffness_guard(data.eps, data.beta, dt);
    let stepper = Stepper::new(mats, data.law, data.eps, data.beta, dt)?;
    let (v0, v1) = system.initial_state();
    let mut state = State {
        t: T::zero(),
        v: v0,
        v_dot: v1,
        w: vec![T::zero(); mats.element_count()],
    };
    let mut wz = system.initial_wz();
    let mut ledger = LedgerBuilder::new(system, &state);
    let mut force = system.force(T::zero(), &wz);
    ledger.record(system, &state, &wz);

    let mut states = Vec::with_capacity(grid.steps() + 1);
    states.push(state.clone());
    for n in 0..grid.steps() {
        let t0 = grid.time(n);
        let t1 = grid.time(n + 1);
        let wz_next = system.advance_wz(&wz, t0, t1 - t0, stepper.weights());
        let force_next = system.force(t1, &wz_next);
        let mut next = stepper.advance(&state, &force, &force_next);
        next.t = t1;
        if next.v.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularSystem(format!("non-finite state at step {}", n + 1)));
        }
        ledger.record(system, &next, &wz_next);
        states.push(next.clone());
        state = next;
        wz = wz_next;
        force = force_next;
    }

    let times = grid.times();
    let u = states
        .iter()
        .zip(&times)
        .map(|(s, t)| {
            let z = system.z(*t);
            s.v.iter().zip(z).map(|(a, b)| *a + b).collect()
        })
        .collect();
    let u_dot = states
        .iter()
        .zip(&times)
        .map(|(s, t)| {
            let z = system.z_dot(*t);
            s.v_dot.iter().zip(z).map(|(a, b)| *a + b).collect()
        })
        .collect();
    Ok((
        Trajectory {
            times,
            states,
            u,
            u_dot,
        },
        ledger.finish(dt),
    ))
}
