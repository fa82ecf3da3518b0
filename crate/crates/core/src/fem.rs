//! Piecewise-linear finite elements on an interval `(0, L)`.
//!
//! Operators are assembled on all nodes; the homogeneous Dirichlet space is the
//! interior block. Fields passed around the crate are full nodal vectors.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::linalg::{SymTridiag, TridiagLu};
use crate::quadrature::{trapezoid, GaussLegendre};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct SpatialMesh<T> {
    nodes: Vec<T>,
}

impl<T: Real> SpatialMesh<T> {
    pub fn new(nodes: Vec<T>) -> Result<Self> {
        if nodes.len() < 3 {
            return Err(Error::InvalidMesh(format!(
                "need at least 3 nodes, got {}",
                nodes.len()
            )));
        }
        if nodes[0] != T::zero() {
            return Err(Error::InvalidMesh("first node must be 0".into()));
        }
        for (e, pair) in nodes.windows(2).enumerate() {
            if !(pair[1] > pair[0]) {
                return Err(Error::InvalidMesh(format!(
                    "element {e} has non-positive length {:e}",
                    pair[1] - pair[0]
                )));
            }
        }
        Ok(Self { nodes })
    }

    pub fn uniform(length: T, elements: usize) -> Result<Self> {
        if !(length > T::zero()) {
            return Err(Error::InvalidMesh("domain length must be positive".into()));
        }
        let h = length / T::from_count(elements.max(1));
        let mut nodes: Vec<T> = (0..=elements).map(|i| h * T::from_count(i)).collect();
        if let Some(last) = nodes.last_mut() {
            *last = length;
        }
        Self::new(nodes)
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn element_count(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn interior_count(&self) -> usize {
        self.nodes.len() - 2
    }

    pub fn length(&self) -> T {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn element_lengths(&self) -> Vec<T> {
        self.nodes.windows(2).map(|p| p[1] - p[0]).collect()
    }

    pub fn element_midpoints(&self) -> Vec<T> {
        self.nodes
            .windows(2)
            .map(|p| (p[0] + p[1]) * T::lit(0.5))
            .collect()
    }

    pub fn interpolate<F: Fn(T) -> T>(&self, f: F) -> Vec<T> {
        self.nodes.iter().map(|x| f(*x)).collect()
    }

    /// Consistent load `F_i = ∫ f φ_i` on all nodes.
    pub fn load_vector<F: Fn(T) -> T>(&self, f: F) -> Vec<T> {
        let rule = GaussLegendre::<T>::new(4);
        let mut out = vec![T::zero(); self.node_count()];
        for e in 0..self.element_count() {
            let (x0, x1) = (self.nodes[e], self.nodes[e + 1]);
            let h = x1 - x0;
            for (x, w) in rule.mapped(x0, x1) {
                let fx = f(x) * w;
                out[e] += fx * (x1 - x) / h;
                out[e + 1] += fx * (x - x0) / h;
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoefficientBounds<T> {
    pub a_min: T,
    pub a_max: T,
    pub b_min: T,
    pub b_max: T,
}

/// Per-element elasticity `a` and viscosity `b` with declared bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientField<T> {
    a: Vec<T>,
    b: Vec<T>,
    bounds: CoefficientBounds<T>,
}

impl<T: Real> CoefficientField<T> {
    pub fn new(a: Vec<T>, b: Vec<T>, bounds: CoefficientBounds<T>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: a.len(),
                got: b.len(),
            });
        }
        if !(bounds.a_min > T::zero() && bounds.a_min <= bounds.a_max) {
            return Err(Error::InvalidParameter(
                "elasticity bounds must satisfy 0 < c_A <= C_A".into(),
            ));
        }
        if !(bounds.b_min > T::zero() && bounds.b_min <= bounds.b_max) {
            return Err(Error::InvalidParameter(
                "viscosity bounds must satisfy 0 < c_B <= C_B".into(),
            ));
        }
        check_range("a", &a, bounds.a_min, bounds.a_max)?;
        check_range("b", &b, bounds.b_min, bounds.b_max)?;
        Ok(Self { a, b, bounds })
    }

    /// Bounds taken as the extreme element values.
    pub fn tight(a: Vec<T>, b: Vec<T>) -> Result<Self> {
        let (a_min, a_max) = extremes(&a);
        let (b_min, b_max) = extremes(&b);
        Self::new(
            a,
            b,
            CoefficientBounds {
                a_min,
                a_max,
                b_min,
                b_max,
            },
        )
    }

    pub fn constant(elements: usize, a: T, b: T) -> Result<Self> {
        Self::tight(vec![a; elements], vec![b; elements])
    }

    pub fn a(&self) -> &[T] {
        &self.a
    }

    pub fn b(&self) -> &[T] {
        &self.b
    }

    pub fn bounds(&self) -> CoefficientBounds<T> {
        self.bounds
    }

    /// Same field with the viscosity scaled by `factor` (bounds scaled alike).
    pub fn with_scaled_viscosity(&self, factor: T) -> Result<Self> {
        let b = self.b.iter().map(|v| *v * factor).collect();
        let mut bounds = self.bounds;
        bounds.b_min *= factor;
        bounds.b_max *= factor;
        Self::new(self.a.clone(), b, bounds)
    }
}

fn extremes<T: Real>(v: &[T]) -> (T, T) {
    v.iter().fold((T::max_value().unwrap(), T::min_value().unwrap()), |(lo, hi), x| {
        (lo.min(*x), hi.max(*x))
    })
}

fn check_range<T: Real>(field: &'static str, values: &[T], lo: T, hi: T) -> Result<()> {
    for (element, v) in values.iter().enumerate() {
        if !(*v >= lo && *v <= hi) {
            return Err(Error::CoefficientOutOfBounds {
                field,
                element,
                value: v.as_f64(),
                lower: lo.as_f64(),
                upper: hi.as_f64(),
            });
        }
    }
    Ok(())
}

/// Assembled mass and stiffness operators on all nodes.
#[derive(Clone, Debug)]
pub struct FemMatrices<T> {
    pub mass: SymTridiag<T>,
    pub stiff_a: SymTridiag<T>,
    pub stiff_b: SymTridiag<T>,
    pub stiff_unit: SymTridiag<T>,
    h: Vec<T>,
    a: Vec<T>,
    b: Vec<T>,
    bounds: CoefficientBounds<T>,
}

pub fn assemble<T: Real>(mesh: &SpatialMesh<T>, coeffs: &CoefficientField<T>) -> Result<FemMatrices<T>> {
    let ne = mesh.element_count();
    if coeffs.a().len() != ne {
        return Err(Error::DimensionMismatch {
            expected: ne,
            got: coeffs.a().len(),
        });
    }
    let n = mesh.node_count();
    let h = mesh.element_lengths();
    let mut mass = SymTridiag::zeros(n);
    let mut ka = SymTridiag::zeros(n);
    let mut kb = SymTridiag::zeros(n);
    let mut k1 = SymTridiag::zeros(n);
    let sixth = T::one() / T::lit(6.0);
    for e in 0..ne {
        let he = h[e];
        mass.add_to(e, e, he * sixth * T::lit(2.0));
        mass.add_to(e + 1, e + 1, he * sixth * T::lit(2.0));
        mass.add_to(e, e + 1, he * sixth);
        for (k, c) in [(&mut ka, coeffs.a()[e]), (&mut kb, coeffs.b()[e]), (&mut k1, T::one())] {
            let s = c / he;
            k.add_to(e, e, s);
            k.add_to(e + 1, e + 1, s);
            k.add_to(e, e + 1, -s);
        }
    }
    Ok(FemMatrices {
        mass,
        stiff_a: ka,
        stiff_b: kb,
        stiff_unit: k1,
        h,
        a: coeffs.a().to_vec(),
        b: coeffs.b().to_vec(),
        bounds: coeffs.bounds(),
    })
}

impl<T: Real> FemMatrices<T> {
    pub fn node_count(&self) -> usize {
        self.mass.dim()
    }

    pub fn interior_count(&self) -> usize {
        self.mass.dim() - 2
    }

    pub fn element_count(&self) -> usize {
        self.h.len()
    }

    pub fn element_lengths(&self) -> &[T] {
        &self.h
    }

    pub fn a(&self) -> &[T] {
        &self.a
    }

    pub fn b(&self) -> &[T] {
        &self.b
    }

    pub fn bounds(&self) -> CoefficientBounds<T> {
        self.bounds
    }

    /// Element strains `(v_{e+1} − v_e)/h_e`.
    pub fn strain(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.node_count(), "nodal field dimension");
        v.windows(2)
            .zip(&self.h)
            .map(|(p, h)| (p[1] - p[0]) / *h)
            .collect()
    }

    /// `Gᵀ diag(h) σ`: the nodal functional `u ↦ ∫ σ u′` for a piecewise-constant `σ`.
    pub fn strain_adjoint(&self, sigma: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.node_count()];
        for (e, s) in sigma.iter().enumerate() {
            out[e] -= *s;
            out[e + 1] += *s;
        }
        out
    }

    /// `Gᵀ diag(b h) σ`.
    pub fn viscous_adjoint(&self, sigma: &[T]) -> Vec<T> {
        let weighted: Vec<T> = sigma.iter().zip(&self.b).map(|(s, b)| *s * *b).collect();
        self.strain_adjoint(&weighted)
    }

    /// `Σ b_e h_e σ_e²`.
    pub fn viscous_energy(&self, sigma: &[T]) -> T {
        sigma
            .iter()
            .zip(&self.b)
            .zip(&self.h)
            .fold(T::zero(), |acc, ((s, b), h)| acc + *b * *h * *s * *s)
    }

    pub fn norm_h(&self, u: &[T]) -> T {
        self.mass.quad_form(u).max(T::zero()).sqrt()
    }

    pub fn seminorm(&self, u: &[T]) -> T {
        self.stiff_unit.quad_form(u).max(T::zero()).sqrt()
    }

    pub fn norm_v(&self, u: &[T]) -> T {
        (self.mass.quad_form(u) + self.stiff_unit.quad_form(u))
            .max(T::zero())
            .sqrt()
    }

    pub fn checked_norm_v(&self, u: &[T]) -> Result<T> {
        if u.len() != self.node_count() {
            return Err(Error::DimensionMismatch {
                expected: self.node_count(),
                got: u.len(),
            });
        }
        Ok(self.norm_v(u))
    }

    /// Norm in `V₀′` of an interior dual vector, `√(Fᵀ (M+K₁)⁻¹ F)`.
    pub fn dual_norm(&self, f: &[T]) -> Result<T> {
        let riesz = SymTridiag::lincomb(&[(T::one(), &self.mass), (T::one(), &self.stiff_unit)]).interior();
        let lu: TridiagLu<T> = riesz.factor()?;
        let x = lu.solve(f);
        Ok(crate::linalg::dot(f, &x).max(T::zero()).sqrt())
    }

    /// Discrete Korn–Poincaré constant `1/√λ_min` of `K₁u = λMu` on the interior.
    pub fn poincare_constant(&self) -> Result<T> {
        let (values, _) = generalized_modes(&self.stiff_unit.interior(), &self.mass.interior())?;
        Ok(T::one() / values[0].sqrt())
    }
}

/// Eigenpairs of `K x = λ M x` with ascending `λ` and `M`-orthonormal vectors.
pub fn generalized_modes<T: Real>(k: &SymTridiag<T>, m: &SymTridiag<T>) -> Result<(Vec<T>, Vec<Vec<T>>)> {
    let chol = m
        .to_dense()
        .cholesky()
        .ok_or_else(|| Error::EigenSolve("mass matrix is not positive definite".into()))?;
    let l = chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::EigenSolve("singular Cholesky factor".into()))?;
    let reduced: DMatrix<T> = &linv * k.to_dense() * linv.transpose();
    let sym = (&reduced + reduced.transpose()) * T::lit(0.5);
    let eig = SymmetricEigen::try_new(sym, T::default_epsilon(), 10_000)
        .ok_or_else(|| Error::EigenSolve("symmetric eigenvalue iteration did not converge".into()))?;
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[i]
            .partial_cmp(&eig.eigenvalues[j])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let lt_inv = linv.transpose();
    let mut values = Vec::with_capacity(order.len());
    let mut vectors = Vec::with_capacity(order.len());
    for i in order {
        let lambda = eig.eigenvalues[i];
        if !(lambda > T::zero()) {
            return Err(Error::EigenSolve(format!("non-positive eigenvalue {:e}", lambda)));
        }
        let y = eig.eigenvectors.column(i);
        let mut x: Vec<T> = (&lt_inv * y).iter().copied().collect();
        // fix the sign so that the first nonzero entry is positive
        if let Some(first) = x.iter().find(|v| v.abs() > T::default_epsilon()) {
            if *first < T::zero() {
                x.iter_mut().for_each(|v| *v = -*v);
            }
        }
        values.push(lambda);
        vectors.push(x);
    }
    Ok((values, vectors))
}

/// Embeds interior values into a full nodal vector with zero boundary entries.
pub fn embed<T: Real>(interior: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(interior.len() + 2);
    out.push(T::zero());
    out.extend_from_slice(interior);
    out.push(T::zero());
    out
}

pub fn interior_of<T: Clone>(full: &[T]) -> Vec<T> {
    full[1..full.len() - 1].to_vec()
}

/// Nodal values together with a marker for membership in the homogeneous space.
#[derive(Clone, Debug, PartialEq)]
pub struct NodalField<E> {
    pub values: Vec<E>,
    pub homogeneous: bool,
}

impl<E: Clone + num_traits::Zero> NodalField<E> {
    pub fn homogeneous(interior: &[E]) -> Self {
        let mut values = Vec::with_capacity(interior.len() + 2);
        values.push(E::zero());
        values.extend_from_slice(interior);
        values.push(E::zero());
        Self {
            values,
            homogeneous: true,
        }
    }

    pub fn general(values: Vec<E>) -> Self {
        Self {
            values,
            homogeneous: false,
        }
    }

    pub fn interior(&self) -> Vec<E> {
        interior_of(&self.values)
    }

    pub fn boundary_is_zero(&self) -> bool {
        let n = self.values.len();
        self.values[0].is_zero() && self.values[n - 1].is_zero()
    }
}

/// Uniform time grid on `[0, T]` with an optional window start `η`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid<T> {
    horizon: T,
    steps: usize,
    window_start: T,
}

impl<T: Real> TimeGrid<T> {
    pub fn new(horizon: T, steps: usize) -> Result<Self> {
        if !(horizon > T::zero()) || steps == 0 {
            return Err(Error::InvalidParameter(
                "time grid needs T > 0 and at least one step".into(),
            ));
        }
        Ok(Self {
            horizon,
            steps,
            window_start: T::zero(),
        })
    }

    pub fn with_window(mut self, eta: T) -> Result<Self> {
        if !(eta >= T::zero() && eta < self.horizon) {
            return Err(Error::WindowOutOfRange {
                eta: eta.as_f64(),
                horizon: self.horizon.as_f64(),
            });
        }
        self.window_start = eta;
        Ok(self)
    }

    pub fn horizon(&self) -> T {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> T {
        self.horizon / T::from_count(self.steps)
    }

    pub fn window_start(&self) -> T {
        self.window_start
    }

    pub fn time(&self, n: usize) -> T {
        if n == self.steps {
            self.horizon
        } else {
            self.dt() * T::from_count(n)
        }
    }

    pub fn times(&self) -> Vec<T> {
        (0..=self.steps).map(|n| self.time(n)).collect()
    }
}

/// Space-time norms of a sampled trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpacetimeNorms<T> {
    pub l2_v: T,
    pub l2_h: T,
    pub linf_v: T,
    pub linf_h: T,
}

/// `L²(0,T)` norms by the trapezoid rule and `L∞(η,T)` norms as grid maxima.
pub fn spacetime_norms<T: Real>(
    fields: &[Vec<T>],
    mats: &FemMatrices<T>,
    grid: &TimeGrid<T>,
    eta: T,
) -> Result<SpacetimeNorms<T>> {
    if fields.len() != grid.steps() + 1 {
        return Err(Error::DimensionMismatch {
            expected: grid.steps() + 1,
            got: fields.len(),
        });
    }
    if !(eta >= T::zero() && eta < grid.horizon()) {
        return Err(Error::WindowOutOfRange {
            eta: eta.as_f64(),
            horizon: grid.horizon().as_f64(),
        });
    }
    let sq_v: Vec<T> = fields.iter().map(|u| mats.norm_v(u).powi(2)).collect();
    let sq_h: Vec<T> = fields.iter().map(|u| mats.norm_h(u).powi(2)).collect();
    let dt = grid.dt();
    // grid points at or after η, tolerant of rounding in η/Δt
    let first = ((eta / dt) - T::lit(1e-9)).ceil().max(T::zero()).as_f64() as usize;
    let linf = |sq: &[T]| sq[first..].iter().fold(T::zero(), |m, v| m.max(*v)).sqrt();
    Ok(SpacetimeNorms {
        l2_v: trapezoid(&sq_v, dt).sqrt(),
        l2_h: trapezoid(&sq_h, dt).sqrt(),
        linf_v: linf(&sq_v),
        linf_h: linf(&sq_h),
    })
}

/// `L²` error of the piecewise-linear interpolant of `u` against `exact`.
pub fn l2_error<T: Real, F: Fn(T) -> T>(mesh: &SpatialMesh<T>, u: &[T], exact: F) -> T {
    let rule = GaussLegendre::<T>::new(5);
    let x = mesh.nodes();
    let mut acc = T::zero();
    for e in 0..mesh.element_count() {
        let h = x[e + 1] - x[e];
        for (xq, w) in rule.mapped(x[e], x[e + 1]) {
            let uh = u[e] * (x[e + 1] - xq) / h + u[e + 1] * (xq - x[e]) / h;
            let d = uh - exact(xq);
            acc += w * d * d;
        }
    }
    acc.sqrt()
}

/// `H¹` seminorm error against the exact derivative.
pub fn h1_seminorm_error<T: Real, F: Fn(T) -> T>(mesh: &SpatialMesh<T>, u: &[T], exact_dx: F) -> T {
    let rule = GaussLegendre::<T>::new(5);
    let x = mesh.nodes();
    let mut acc = T::zero();
    for e in 0..mesh.element_count() {
        let slope = (u[e + 1] - u[e]) / (x[e + 1] - x[e]);
        for (xq, w) in rule.mapped(x[e], x[e + 1]) {
            let d = slope - exact_dx(xq);
            acc += w * d * d;
        }
    }
    acc.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit_mats(elements: usize) -> FemMatrices<f64> {
        let mesh = SpatialMesh::uniform(1.0, elements).unwrap();
        let c = CoefficientField::constant(elements, 1.0, 1.0).unwrap();
        assemble(&mesh, &c).unwrap()
    }

    #[test]
    fn two_element_stiffness() {
        let m = unit_mats(2);
        let ki = m.stiff_a.interior();
        assert_eq!(ki.dim(), 1);
        assert!((ki.diag()[0] - 4.0).abs() < 1e-14);
    }

    #[test]
    fn interior_stencil_is_discrete_laplacian() {
        let m = unit_mats(8);
        let u = vec![0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0];
        let r = m.stiff_a.mul_vec(&u);
        // only the rows next to the boundary see the jump
        assert!((r[1] - 8.0).abs() < 1e-12 && (r[7] - 8.0).abs() < 1e-12);
        assert!(r[2..7].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn linear_field_has_no_interior_residual() {
        let mesh = SpatialMesh::<f64>::new(vec![0.0, 0.1, 0.35, 0.5, 0.9, 1.0]).unwrap();
        let c = CoefficientField::constant(5, 2.0, 1.0).unwrap();
        let m = assemble(&mesh, &c).unwrap();
        let u = mesh.interpolate(|x| 3.0 * x - 1.0);
        let r = m.stiff_a.interior_rows(&u);
        assert!(r.iter().all(|v| v.abs() < 1e-12));
        // boundary rows carry the flux a u′ = 6
        let full = m.stiff_a.mul_vec(&u);
        assert!((full[0] + 6.0).abs() < 1e-12 && (full[5] - 6.0).abs() < 1e-12);
    }

    #[test]
    fn energy_seminorm_of_parabola() {
        let mesh = SpatialMesh::uniform(1.0, 400).unwrap();
        let m = unit_mats(400);
        let u = mesh.interpolate(|x| x * (1.0 - x) / 2.0);
        assert!((m.seminorm(&u).powi(2) - 1.0 / 12.0).abs() < 1e-5);
    }

    #[test]
    fn poincare_converges_from_below() {
        let mut last = 0.0;
        for n in [4, 8, 16, 32, 64] {
            let cp = unit_mats(n).poincare_constant().unwrap();
            assert!(cp > last && cp <= 1.0 / std::f64::consts::PI);
            last = cp;
        }
        assert!((last - 1.0 / std::f64::consts::PI).abs() < 1e-4);

        let mesh = SpatialMesh::uniform(2.0, 64).unwrap();
        let c = CoefficientField::constant(64, 1.0, 1.0).unwrap();
        let cp2 = assemble(&mesh, &c).unwrap().poincare_constant().unwrap();
        assert!((cp2 - 2.0 * last).abs() < 1e-12);
    }

    #[test]
    fn coefficient_outside_bounds_is_rejected() {
        let bounds = CoefficientBounds {
            a_min: 1.0,
            a_max: 2.0,
            b_min: 0.5,
            b_max: 1.0,
        };
        let err = CoefficientField::new(vec![1.0, 2.5], vec![0.5, 0.5], bounds).unwrap_err();
        assert!(matches!(err, Error::CoefficientOutOfBounds { field: "a", element: 1, .. }));
    }

    #[test]
    fn bad_meshes_are_rejected() {
        assert!(SpatialMesh::new(vec![0.0, 0.5]).is_err());
        assert!(SpatialMesh::new(vec![0.0, 0.5, 0.5, 1.0]).is_err());
        assert!(SpatialMesh::new(vec![0.1, 0.5, 1.0]).is_err());
    }

    #[test]
    fn spacetime_norms_of_linear_ramp() {
        let mesh = SpatialMesh::uniform(1.0, 10).unwrap();
        let m = unit_mats(10);
        let phi = mesh.interpolate(|x| (std::f64::consts::PI * x).sin());
        let grid = TimeGrid::new(2.0, 400).unwrap();
        let fields: Vec<Vec<f64>> = grid
            .times()
            .iter()
            .map(|t| phi.iter().map(|p| t * p).collect())
            .collect();
        let norms = spacetime_norms(&fields, &m, &grid, 0.0).unwrap();
        let exact = m.norm_v(&phi) * (8.0f64 / 3.0).sqrt();
        assert!((norms.l2_v - exact).abs() / exact < 1e-5);
        assert!((norms.linf_v - 2.0 * m.norm_v(&phi)).abs() < 1e-12);

        let constant = vec![phi.clone(); 401];
        let c = spacetime_norms(&constant, &m, &grid, 0.5).unwrap();
        assert!((c.l2_v - 2f64.sqrt() * m.norm_v(&phi)).abs() < 1e-12);
        assert!(spacetime_norms(&constant, &m, &grid, 2.0).is_err());
    }

    #[test]
    fn single_precision_assembly() {
        let mesh = SpatialMesh::<f32>::uniform(1.0, 16).unwrap();
        let c = CoefficientField::constant(16, 1.0f32, 0.5).unwrap();
        let m = assemble(&mesh, &c).unwrap();
        assert!(m.stiff_a.interior().is_positive_definite());
        let cp = m.poincare_constant().unwrap();
        assert!((cp - 0.3183).abs() < 2e-3);
    }

    fn random_field() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
        (3usize..20).prop_flat_map(|ne| {
            (
                proptest::collection::vec(0.05f64..1.0, ne),
                proptest::collection::vec(0.5f64..3.0, ne),
                proptest::collection::vec(0.1f64..2.0, ne),
            )
        })
    }

    proptest! {
        #[test]
        fn assembled_operators_are_spd((lens, a, b) in random_field()) {
            let mut nodes = vec![0.0];
            for l in &lens { nodes.push(nodes.last().unwrap() + l); }
            let mesh = SpatialMesh::new(nodes).unwrap();
            let m = assemble(&mesh, &CoefficientField::tight(a.clone(), b.clone()).unwrap()).unwrap();
            prop_assert!(m.mass.interior().is_positive_definite());
            prop_assert!(m.stiff_a.interior().is_positive_definite());
            prop_assert!(m.stiff_b.interior().is_positive_definite());
            prop_assert!(m.stiff_a.to_dense() == m.stiff_a.to_dense().transpose());

            // linearity in the coefficient
            let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
            let ms = assemble(&mesh, &CoefficientField::tight(sum, b.clone()).unwrap()).unwrap();
            let combined = SymTridiag::lincomb(&[(1.0, &m.stiff_a), (1.0, &m.stiff_b)]);
            let diff = (ms.stiff_a.to_dense() - combined.to_dense()).abs().max();
            prop_assert!(diff < 1e-10 * combined.to_dense().abs().max());
        }

        #[test]
        fn discrete_poincare_holds(values in proptest::collection::vec(-1.0f64..1.0, 11)) {
            let m = unit_mats(12);
            let u = embed(&values);
            let cp = m.poincare_constant().unwrap();
            prop_assert!(m.norm_h(&u) <= cp * m.seminorm(&u) * (1.0 + 1e-10) + 1e-14);
            let lhs = m.norm_v(&u).powi(2);
            let rhs = m.norm_h(&u).powi(2) + m.seminorm(&u).powi(2);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs));
        }
    }
}
