//! Scalar abstraction shared by every numerical module.

use std::fmt::LowerExp;

use nalgebra::{Complex, RealField};
use num_traits::FromPrimitive;

/// Real floating point type the solvers are generic over (`f32` or `f64`).
pub trait Real: RealField + Copy + FromPrimitive + LowerExp + 'static {
    /// Converts an `f64` literal; every finite literal used in this crate is representable.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in the scalar type")
    }

    fn as_f64(self) -> f64;

    /// Converts a count or index to the scalar type.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in the scalar type")
    }
}

impl Real for f32 {
    fn as_f64(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    fn as_f64(self) -> f64 {
        self
    }
}

/// Complex number over a [`Real`] scalar.
pub type Cplx<T> = Complex<T>;

pub(crate) fn cexp<T: Real>(z: Cplx<T>) -> Cplx<T> {
    nalgebra::ComplexField::exp(z)
}

pub(crate) fn cabs<T: Real>(z: Cplx<T>) -> T {
    nalgebra::ComplexField::modulus(z)
}
