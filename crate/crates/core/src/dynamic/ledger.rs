use super::{DampingLaw, LiftedSystem, State};
use crate::linalg::dot;
use crate::quadrature::trapezoid;
use crate::scalar::Real;

/// Per-step terms of the energy-dissipation balance.
///
/// `kinetic + elastic + memory + dissipation = initial + work` holds up to the
/// time discretization error.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyLedger<T> {
    pub dt: T,
    pub kinetic: Vec<T>,
    pub elastic: Vec<T>,
    pub memory: Vec<T>,
    /// Cumulative dissipation.
    pub dissipation: Vec<T>,
    /// Cumulative external work.
    pub work: Vec<T>,
    pub initial: T,
    pub residual: Vec<T>,
}

impl<T: Real> EnergyLedger<T> {
    pub fn stored(&self, n: usize) -> T {
        self.kinetic[n] + self.elastic[n] + self.memory[n]
    }

    pub fn len(&self) -> usize {
        self.kinetic.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kinetic.is_empty()
    }

    fn defects(&self) -> Vec<T> {
        (0..self.len())
            .map(|n| (self.stored(n) + self.dissipation[n] - self.initial - self.work[n]).abs())
            .collect()
    }
}

/// `max_t |balance defect| / (1 + max_t stored energy)`, recomputed from the terms.
pub fn energy_residual<T: Real>(ledger: &EnergyLedger<T>) -> T {
    let defect = ledger.defects().into_iter().fold(T::zero(), |m, v| m.max(v));
    let energy = (0..ledger.len()).fold(T::zero(), |m, n| m.max(ledger.stored(n)));
    defect / (T::one() + energy)
}

pub(crate) struct LedgerBuilder<T> {
    initial: T,
    kinetic: Vec<T>,
    elastic: Vec<T>,
    memory: Vec<T>,
    dissipation_rate: Vec<T>,
    load_power: Vec<T>,
    lift_rate: Vec<T>,
    lift_pairing: Vec<T>,
}

impl<T: Real> LedgerBuilder<T> {
    pub fn new(system: &LiftedSystem<T>, state: &State<T>) -> Self {
        let m = system.mats();
        let eps = system.data().eps;
        let half = T::lit(0.5);
        let mut initial = half * eps * eps * m.mass.quad_form(&state.v_dot) + half * m.stiff_a.quad_form(&state.v);
        if system.data().law == DampingLaw::Memory {
            initial += half * m.stiff_b.quad_form(&state.v);
        }
        Self {
            initial,
            kinetic: Vec::new(),
            elastic: Vec::new(),
            memory: Vec::new(),
            dissipation_rate: Vec::new(),
            load_power: Vec::new(),
            lift_rate: Vec::new(),
            lift_pairing: Vec::new(),
        }
    }

    pub fn record(&mut self, system: &LiftedSystem<T>, state: &State<T>, wz: &[T]) {
        let m = system.mats();
        let data = system.data();
        let half = T::lit(0.5);
        let eps = data.eps;
        self.kinetic.push(half * eps * eps * m.mass.quad_form(&state.v_dot));
        self.elastic.push(half * m.stiff_a.quad_form(&state.v));
        let (memory, rate) = match data.law {
            DampingLaw::Memory => {
                let gap: Vec<T> = m
                    .strain(&state.v)
                    .iter()
                    .zip(&state.w)
                    .map(|(e, w)| *e - *w)
                    .collect();
                let q = m.viscous_energy(&gap);
                (half * q, q / data.kernel_time())
            }
            DampingLaw::KelvinVoigt => (T::zero(), eps * m.stiff_b.quad_form(&state.v_dot)),
            DampingLaw::Undamped => (T::zero(), T::zero()),
        };
        self.memory.push(memory);
        self.dissipation_rate.push(rate);
        let h = system.h(state.t);
        self.load_power.push(dot(&h, &state.v_dot));
        self.lift_rate.push(dot(&system.ell_dot(state.t, wz), &state.v));
        self.lift_pairing.push(dot(&system.ell(state.t, wz), &state.v));
    }

    pub fn finish(self, dt: T) -> EnergyLedger<T> {
        let cumulative = |rate: &[T]| -> Vec<T> {
            let mut out = Vec::with_capacity(rate.len());
            let mut acc = T::zero();
            out.push(acc);
            for pair in rate.windows(2) {
                acc += trapezoid(pair, dt);
                out.push(acc);
            }
            out
        };
        let dissipation = cumulative(&self.dissipation_rate);
        let power = cumulative(&self.load_power);
        let lift = cumulative(&self.lift_rate);
        let l0 = self.lift_pairing[0];
        let work: Vec<T> = (0..self.kinetic.len())
            .map(|n| power[n] - lift[n] + self.lift_pairing[n] - l0)
            .collect();
        let mut ledger = EnergyLedger {
            dt,
            kinetic: self.kinetic,
            elastic: self.elastic,
            memory: self.memory,
            dissipation,
            work,
            initial: self.initial,
            residual: Vec::new(),
        };
        ledger.residual = ledger.defects();
        ledger
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamic::{integrate, InitialData, ProblemData};
    use crate::fem::{assemble, CoefficientField, SpatialMesh, TimeGrid};
    use crate::profile::{Profile, SeparableField};

    fn instance(law: DampingLaw) -> (ProblemData<f64>, crate::fem::FemMatrices<f64>) {
        let mesh = SpatialMesh::uniform(1.0, 10).unwrap();
        let m = assemble(&mesh, &CoefficientField::constant(10, 1.0, 0.8).unwrap()).unwrap();
        let data = ProblemData::new(0.1, 0.5, 1.0, 11)
            .unwrap()
            .with_law(law)
            .with_f(SeparableField::single(
                Profile::Sine {
                    amplitude: 1.0,
                    omega: std::f64::consts::PI,
                    phase: 0.3,
                },
                mesh.load_vector(|x| (std::f64::consts::PI * x).sin()),
            ))
            .with_g(SeparableField::single(Profile::Constant(0.5), mesh.load_vector(|x| x)))
            .with_lift(SeparableField::single(
                Profile::Sine {
                    amplitude: 0.2,
                    omega: 2.0,
                    phase: 0.0,
                },
                mesh.interpolate(|x| x),
            ))
            .with_initial(InitialData::Reduced {
                u0: vec![0.0; 11],
                u1: vec![0.0; 11],
                g0: mesh.load_vector(|x| x * (1.0 - x)),
            });
        (data, m)
    }

    #[test]
    fn balance_residual_is_second_order_for_every_law() {
        for law in [DampingLaw::Memory, DampingLaw::KelvinVoigt, DampingLaw::Undamped] {
            let (data, m) = instance(law);
            let r: Vec<f64> = [400, 800, 1600]
                .iter()
                .map(|&n| {
                    let (_, ledger) = integrate(&data, &m, &TimeGrid::new(1.0, n).unwrap()).unwrap();
                    energy_residual(&ledger)
                })
                .collect();
            for pair in r.windows(2) {
                let ratio = pair[0] / pair[1];
                assert!((3.2..4.8).contains(&ratio), "{law:?}: {r:?}");
            }
        }
    }

    #[test]
    fn dissipation_is_monotone() {
        let (data, m) = instance(DampingLaw::Memory);
        let (_, ledger) = integrate(&data, &m, &TimeGrid::new(1.0, 500).unwrap()).unwrap();
        assert!(ledger.dissipation.windows(2).all(|p| p[1] >= p[0]));
        assert!(ledger.dissipation[500] > 0.0);
    }

    #[test]
    fn removing_dissipation_is_detected() {
        let (data, m) = instance(DampingLaw::Memory);
        let (_, ledger) = integrate(&data, &m, &TimeGrid::new(1.0, 500).unwrap()).unwrap();
        let mut broken = ledger.clone();
        broken.dissipation.iter_mut().for_each(|d| *d = 0.0);
        let scale = 1.0 + (0..ledger.len()).map(|n| ledger.stored(n)).fold(0.0, f64::max);
        let lost = ledger.dissipation.iter().fold(0.0f64, |a, b| a.max(*b));
        assert!(energy_residual(&broken) * scale >= lost - energy_residual(&ledger) * scale);
        assert!(energy_residual(&broken) > 100.0 * energy_residual(&ledger));
    }
}
