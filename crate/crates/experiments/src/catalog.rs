//! Turns the named load families of a config into fields on a mesh.

use std::f64::consts::PI;

use memvisc::dynamic::{DampingLaw, History, InitialData};
use memvisc::elliptic::EllipticProblem;
use memvisc::fem::{assemble, embed, generalized_modes, interior_of, CoefficientField, FemMatrices, SpatialMesh};
use memvisc::profile::{Profile, SeparableField};

use crate::config::{ExperimentConfig, HistorySpec, Law, LoadTerm, SpaceShape, TimeProfile};
use crate::error::{ExpError, ExpResult};

/// Mesh, assembled matrices and the elastic eigenmodes of one configuration.
#[derive(Clone, Debug)]
pub struct Setup {
    pub mesh: SpatialMesh<f64>,
    pub mats: FemMatrices<f64>,
    /// `(λ_k, φ_k)` of `K_A φ = λ M φ` on the interior, ascending, `M`-normalised.
    pub modes: (Vec<f64>, Vec<Vec<f64>>),
}

impl Setup {
    pub fn new(cfg: &ExperimentConfig) -> ExpResult<Self> {
        Self::with_elements(cfg, cfg.mesh.elements)
    }

    pub fn with_elements(cfg: &ExperimentConfig, elements: usize) -> ExpResult<Self> {
        let mesh = SpatialMesh::uniform(cfg.mesh.length, elements)?;
        let coeffs = CoefficientField::tight(cfg.coefficients.a.values(elements)?, cfg.coefficients.b.values(elements)?)?;
        let mats = assemble(&mesh, &coeffs)?;
        let modes = generalized_modes(&mats.stiff_a.interior(), &mats.mass.interior())?;
        Ok(Self { mesh, mats, modes })
    }

    pub fn nodes(&self) -> usize {
        self.mesh.node_count()
    }

    fn eigenmode(&self, index: usize) -> ExpResult<Vec<f64>> {
        let (_, vectors) = &self.modes;
        if index == 0 || index > vectors.len() {
            return Err(ExpError::Config(format!(
                "eigenmode index {index} outside 1..={}",
                vectors.len()
            )));
        }
        Ok(embed(&vectors[index - 1]))
    }

    pub fn eigenvalue(&self, index: usize) -> ExpResult<f64> {
        self.modes
            .0
            .get(index.wrapping_sub(1))
            .copied()
            .ok_or_else(|| ExpError::Config(format!("eigenmode index {index} out of range")))
    }

    fn shape_fn(&self, shape: &SpaceShape) -> Box<dyn Fn(f64) -> f64> {
        let length = self.mesh.length();
        match shape.clone() {
            SpaceShape::Constant { value } => Box::new(move |_| value),
            SpaceShape::Polynomial { coeffs } => {
                Box::new(move |x| coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c))
            }
            SpaceShape::Sine { mode, amplitude } => {
                Box::new(move |x| amplitude * (mode as f64 * PI * x / length).sin())
            }
            SpaceShape::Eigenmode { .. } => unreachable!("eigenmodes are handled discretely"),
        }
    }

    /// Dual vector `∫ s φ_i` (or `M φ_k` for an eigenmode).
    pub fn dual_shape(&self, shape: &SpaceShape) -> ExpResult<Vec<f64>> {
        match shape {
            SpaceShape::Eigenmode { index, amplitude } => {
                let phi = self.eigenmode(*index)?;
                Ok(self.mats.mass.mul_vec(&phi).into_iter().map(|v| v * amplitude).collect())
            }
            other => Ok(self.mesh.load_vector(self.shape_fn(other))),
        }
    }

    /// Nodal values of the shape.
    pub fn nodal_shape(&self, shape: &SpaceShape) -> ExpResult<Vec<f64>> {
        match shape {
            SpaceShape::Eigenmode { index, amplitude } => {
                Ok(self.eigenmode(*index)?.into_iter().map(|v| v * amplitude).collect())
            }
            other => Ok(self.mesh.interpolate(self.shape_fn(other))),
        }
    }

    pub fn dual_field(&self, terms: &[LoadTerm]) -> ExpResult<SeparableField<f64>> {
        self.field(terms, |s| self.dual_shape(s))
    }

    pub fn nodal_field(&self, terms: &[LoadTerm]) -> ExpResult<SeparableField<f64>> {
        self.field(terms, |s| self.nodal_shape(s))
    }

    fn field<F: Fn(&SpaceShape) -> ExpResult<Vec<f64>>>(
        &self,
        terms: &[LoadTerm],
        shape: F,
    ) -> ExpResult<SeparableField<f64>> {
        let mut out = SeparableField::zero(self.nodes());
        for term in terms {
            out = out.with_term(profile(&term.time), shape(&term.space)?);
        }
        Ok(out)
    }

    /// Pre-history equal to the stationary solution for `g(τ)` with lift `z(τ)`.
    pub fn compatible_history(&self, g: &SeparableField<f64>, z: &SeparableField<f64>) -> ExpResult<SeparableField<f64>> {
        let problem = EllipticProblem::new(self.mats.clone(), SeparableField::zero(self.nodes()), SeparableField::zero(self.nodes()))?;
        let from_load = g.map_shapes(|s| embed(&problem.resolvent(&interior_of(s))));
        let from_lift = z.map_shapes(|s| {
            let v = embed(&problem.resolvent(&self.mats.stiff_a.interior_rows(s)));
            s.iter().zip(v).map(|(a, b)| a - b).collect()
        });
        let mut out = SeparableField::zero(self.nodes());
        if !from_load.is_zero() {
            out = out.plus(&from_load);
        }
        if !from_lift.is_zero() {
            out = out.plus(&from_lift);
        }
        Ok(out)
    }

    pub fn initial_data(&self, cfg: &ExperimentConfig, g: &SeparableField<f64>, z: &SeparableField<f64>) -> ExpResult<InitialData<f64>> {
        let n = self.nodes();
        Ok(match &cfg.history {
            HistorySpec::Rest => InitialData::Reduced {
                u0: vec![0.0; n],
                u1: vec![0.0; n],
                g0: vec![0.0; n],
            },
            HistorySpec::Compatible => InitialData::History(History::Separable(self.compatible_history(g, z)?)),
            HistorySpec::Separable { terms } => InitialData::History(History::Separable(self.nodal_field(terms)?)),
        })
    }
}

pub fn profile(p: &TimeProfile) -> Profile<f64> {
    match p.clone() {
        TimeProfile::Constant { value } => Profile::Constant(value),
        TimeProfile::Polynomial { coeffs } => Profile::Polynomial(coeffs),
        TimeProfile::Sine { amplitude, omega, phase } => Profile::Sine { amplitude, omega, phase },
        TimeProfile::Exponential { amplitude, rate } => Profile::Exponential { amplitude, rate },
    }
}

pub fn law(l: Law) -> DampingLaw {
    match l {
        Law::Memory => DampingLaw::Memory,
        Law::KelvinVoigt => DampingLaw::KelvinVoigt,
        Law::Undamped => DampingLaw::Undamped,
    }
}
