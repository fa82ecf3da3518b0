//! Viscoelastic dynamics with an exponential fading-memory kernel on an
//! interval, its quasistatic limit, and the numerical checks that go with them.
//!
//! Everything numerical is generic over a [`Real`] scalar; the aliases at the
//! bottom of this file fix it to `f64`.

pub mod cubic;
pub mod dynamic;
pub mod elliptic;
pub mod error;
pub mod fem;
pub mod laplace;
pub mod linalg;
pub mod profile;
pub mod quadrature;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{Cplx, Real};

pub type Mesh = fem::SpatialMesh<f64>;
pub type Coefficients = fem::CoefficientField<f64>;
pub type Matrices = fem::FemMatrices<f64>;
pub type Grid = fem::TimeGrid<f64>;
