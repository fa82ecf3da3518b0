//! Time-dependent problem with exponential memory.
//!
//! Unknowns are split as `u = v + z` where `z` carries the boundary data and
//! `v` vanishes on the boundary. Memory enters through the strain-type internal
//! variable `w` with `βε ẇ = e v − w`, so no convolution is stored.

mod apriori;
mod history;
mod ledger;
mod lift;
mod oracle;
mod stepper;

use std::fmt;
use std::sync::Arc;

pub use apriori::{apriori_bound_check, AprioriReport};
pub use history::{reduce_history, ReducedData};
pub use ledger::{energy_residual, EnergyLedger};
pub use lift::{boundary_lift, LiftedSystem};
pub use oracle::oracle_convolution;
pub use stepper::{integrate, ExpWeights, State, Stepper, Trajectory};

use crate::error::{Error, Result};
use crate::profile::SeparableField;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DampingLaw {
    Memory,
    KelvinVoigt,
    Undamped,
}

/// Pre-history `u_in(τ)` for `τ ≤ 0`, nodal on all nodes.
#[derive(Clone)]
pub enum History<T> {
    Separable(SeparableField<T>),
    Callable(Arc<dyn Fn(T) -> Vec<T> + Send + Sync>),
}

impl<T> fmt::Debug for History<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            History::Separable(_) => f.write_str("History::Separable"),
            History::Callable(_) => f.write_str("History::Callable"),
        }
    }
}

#[derive(Clone, Debug)]
pub enum InitialData<T> {
    History(History<T>),
    /// Displacement, velocity (nodal) and the memory datum `g⁰` (dual, all nodes).
    Reduced { u0: Vec<T>, u1: Vec<T>, g0: Vec<T> },
}

/// Loads `f`, `g` are dual vectors on all nodes; `z` is nodal.
#[derive(Clone, Debug)]
pub struct ProblemData<T> {
    pub eps: T,
    pub beta: T,
    pub horizon: T,
    pub f: SeparableField<T>,
    pub g: SeparableField<T>,
    pub z: SeparableField<T>,
    pub initial: InitialData<T>,
    pub law: DampingLaw,
}

impl<T: Real> ProblemData<T> {
    /// Zero loads, zero boundary data and zero initial state on `nodes` nodes.
    pub fn new(eps: T, beta: T, horizon: T, nodes: usize) -> Result<Self> {
        let data = Self {
            eps,
            beta,
            horizon,
            f: SeparableField::zero(nodes),
            g: SeparableField::zero(nodes),
            z: SeparableField::zero(nodes),
            initial: InitialData::Reduced {
                u0: vec![T::zero(); nodes],
                u1: vec![T::zero(); nodes],
                g0: vec![T::zero(); nodes],
            },
            law: DampingLaw::Memory,
        };
        data.validate()?;
        Ok(data)
    }

    pub fn with_f(mut self, f: SeparableField<T>) -> Self {
        self.f = f;
        self
    }

    pub fn with_g(mut self, g: SeparableField<T>) -> Self {
        self.g = g;
        self
    }

    pub fn with_lift(mut self, z: SeparableField<T>) -> Self {
        self.z = z;
        self
    }

    pub fn with_initial(mut self, initial: InitialData<T>) -> Self {
        self.initial = initial;
        self
    }

    pub fn with_law(mut self, law: DampingLaw) -> Self {
        self.law = law;
        self
    }

    pub fn nodes(&self) -> usize {
        self.f.len()
    }

    pub fn kernel_time(&self) -> T {
        self.beta * self.eps
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("eps", self.eps), ("beta", self.beta), ("horizon", self.horizon)] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {:e}", v)));
            }
        }
        let n = self.f.len();
        for (name, len) in [("g", self.g.len()), ("z", self.z.len())] {
            if len != n {
                return Err(Error::InvalidParameter(format!(
                    "{name} has length {len}, expected {n}"
                )));
            }
        }
        Ok(())
    }

    /// Same problem with every datum multiplied by `k`.
    pub fn scaled(&self, k: T) -> Self {
        let initial = match &self.initial {
            InitialData::Reduced { u0, u1, g0 } => InitialData::Reduced {
                u0: u0.iter().map(|v| *v * k).collect(),
                u1: u1.iter().map(|v| *v * k).collect(),
                g0: g0.iter().map(|v| *v * k).collect(),
            },
            InitialData::History(History::Separable(s)) => InitialData::History(History::Separable(s.scaled(k))),
            InitialData::History(History::Callable(c)) => {
                let c = Arc::clone(c);
                InitialData::History(History::Callable(Arc::new(move |t| {
                    c(t).into_iter().map(|v| v * k).collect()
                })))
            }
        };
        Self {
            f: self.f.scaled(k),
            g: self.g.scaled(k),
            z: self.z.scaled(k),
            initial,
            ..self.clone()
        }
    }
}
