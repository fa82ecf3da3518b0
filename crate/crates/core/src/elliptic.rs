//! Stationary solves: the quasistatic problem in time and the shifted complex
//! problem on the Laplace side.

use crate::error::{Error, Result};
use crate::fem::{embed, interior_of, FemMatrices, NodalField, TimeGrid};
use crate::linalg::{dot, SymTridiag, TridiagLu};
use crate::profile::SeparableField;
use crate::scalar::{Cplx, Real};

/// `−(a u₀′)′ = load(t)` with `u₀ = z(t)` on the boundary.
///
/// Loads are dual vectors on all nodes; only interior rows are used.
#[derive(Clone, Debug)]
pub struct EllipticProblem<T> {
    mats: FemMatrices<T>,
    load: SeparableField<T>,
    lift: SeparableField<T>,
    factor: TridiagLu<T>,
}

impl<T: Real> EllipticProblem<T> {
    pub fn new(mats: FemMatrices<T>, load: SeparableField<T>, lift: SeparableField<T>) -> Result<Self> {
        let n = mats.node_count();
        for (field, len) in [(&load, load.len()), (&lift, lift.len())] {
            if len != n && !field.is_zero() {
                return Err(Error::DimensionMismatch { expected: n, got: len });
            }
        }
        let factor = mats.stiff_a.interior().factor()?;
        Ok(Self {
            mats,
            load,
            lift,
            factor,
        })
    }

    pub fn mats(&self) -> &FemMatrices<T> {
        &self.mats
    }

    /// `R(ψ)`: interior solution of `K_A u = ψ` for an interior dual vector.
    pub fn resolvent(&self, rhs: &[T]) -> Vec<T> {
        self.factor.solve(rhs)
    }

    fn lift_at(&self, t: T) -> Vec<T> {
        if self.lift.is_zero() {
            vec![T::zero(); self.mats.node_count()]
        } else {
            self.lift.eval(t)
        }
    }

    fn load_at(&self, t: T) -> Vec<T> {
        if self.load.is_zero() {
            vec![T::zero(); self.mats.node_count()]
        } else {
            self.load.eval(t)
        }
    }

    pub fn solve_stationary(&self, t: T) -> NodalField<T> {
        let z = self.lift_at(t);
        let load = interior_of(&self.load_at(t));
        let kz = self.mats.stiff_a.interior_rows(&z);
        let rhs: Vec<T> = load.iter().zip(&kz).map(|(f, k)| *f - *k).collect();
        let v = self.factor.solve(&rhs);
        let mut u = embed(&v);
        for (ui, zi) in u.iter_mut().zip(&z) {
            *ui += *zi;
        }
        let homogeneous = z[0] == T::zero() && z[z.len() - 1] == T::zero();
        NodalField {
            values: u,
            homogeneous,
        }
    }

    /// Residual `‖K_A(u₀ − z) − (load − K_A z)‖_∞` on the interior.
    pub fn residual(&self, t: T, u: &[T]) -> T {
        let z = self.lift_at(t);
        let load = interior_of(&self.load_at(t));
        let diff: Vec<T> = u.iter().zip(&z).map(|(a, b)| *a - *b).collect();
        let lhs = self.mats.stiff_a.interior_rows(&diff);
        let kz = self.mats.stiff_a.interior_rows(&z);
        lhs.iter()
            .zip(load.iter().zip(&kz))
            .fold(T::zero(), |m, (l, (f, k))| m.max((*l - (*f - *k)).abs()))
    }

    /// Stationary solutions at every grid time.
    pub fn solve_stationary_trajectory(&self, grid: &TimeGrid<T>) -> Vec<Vec<T>> {
        grid.times()
            .into_iter()
            .map(|t| self.solve_stationary(t).values)
            .collect()
    }
}

/// Lax–Milgram data for `K_A u = F` on the interior: `(‖u‖_V, (C_P²+1)/c_A ‖F‖_{V′})`.
pub fn lax_milgram_check<T: Real>(mats: &FemMatrices<T>, rhs: &[T]) -> Result<(T, T)> {
    let u = embed(&mats.stiff_a.interior().factor()?.solve(rhs));
    let cp = mats.poincare_constant()?;
    let bound = (cp * cp + T::one()) / mats.bounds().a_min * mats.dual_norm(rhs)?;
    Ok((mats.norm_v(&u), bound))
}

/// Point `s = s₁ + i s₂` of the open right half-plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexFrequency<T> {
    s: Cplx<T>,
}

impl<T: Real> ComplexFrequency<T> {
    pub fn new(re: T, im: T) -> Result<Self> {
        if !(re > T::zero()) {
            return Err(Error::FrequencyNotInRightHalfPlane {
                re: re.as_f64(),
                im: im.as_f64(),
            });
        }
        Ok(Self { s: Cplx::new(re, im) })
    }

    pub fn value(&self) -> Cplx<T> {
        self.s
    }

    pub fn conj(&self) -> Self {
        Self { s: self.s.conj() }
    }
}

/// Interior operator `ε²s²M + K_A + K_B − (βεs+1)⁻¹ K_B`.
pub fn shifted_operator<T: Real>(
    mats: &FemMatrices<T>,
    s: ComplexFrequency<T>,
    eps: T,
    beta: T,
) -> crate::linalg::Tridiag<Cplx<T>> {
    let s = s.value();
    let one = Cplx::new(T::one(), T::zero());
    let bes = s.scale(beta * eps);
    let memory = bes / (bes + one);
    let m = mats.mass.interior();
    let ka = mats.stiff_a.interior();
    let kb = mats.stiff_b.interior();
    SymTridiag::complex_lincomb(&[((s * s).scale(eps * eps), &m), (one, &ka), (memory, &kb)])
}

/// Solves the transformed problem for an interior complex right-hand side.
pub fn solve_complex<T: Real>(
    mats: &FemMatrices<T>,
    s: ComplexFrequency<T>,
    eps: T,
    beta: T,
    rhs: &[Cplx<T>],
) -> Result<NodalField<Cplx<T>>> {
    if !(eps > T::zero() && beta > T::zero()) {
        return Err(Error::InvalidParameter("eps and beta must be positive".into()));
    }
    if rhs.len() != mats.interior_count() {
        return Err(Error::DimensionMismatch {
            expected: mats.interior_count(),
            got: rhs.len(),
        });
    }
    let breakdown = || Error::ComplexSolveBreakdown {
        re: s.value().re.as_f64(),
        im: s.value().im.as_f64(),
        eps: eps.as_f64(),
    };
    let lu = TridiagLu::factor(shifted_operator(mats, s, eps, beta)).map_err(|_| breakdown())?;
    let x = lu.solve(rhs);
    if x.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(breakdown());
    }
    Ok(NodalField::homogeneous(&x))
}

/// `K_A v = rhs` for complex interior data, via the real factorization.
pub fn solve_stationary_complex<T: Real>(lu: &TridiagLu<T>, rhs: &[Cplx<T>]) -> Vec<Cplx<T>> {
    let re: Vec<T> = rhs.iter().map(|z| z.re).collect();
    let im: Vec<T> = rhs.iter().map(|z| z.im).collect();
    lu.solve(&re)
        .into_iter()
        .zip(lu.solve(&im))
        .map(|(a, b)| Cplx::new(a, b))
        .collect()
}

/// `√(ψᴴMψ + ψᴴK₁ψ)` for a complex nodal field.
pub fn complex_norm_v<T: Real>(mats: &FemMatrices<T>, psi: &[Cplx<T>]) -> T {
    (mats.mass.hermitian_form(psi) + mats.stiff_unit.hermitian_form(psi))
        .max(T::zero())
        .sqrt()
}

pub fn complex_norm_h<T: Real>(mats: &FemMatrices<T>, psi: &[Cplx<T>]) -> T {
    mats.mass.hermitian_form(psi).max(T::zero()).sqrt()
}

/// Euclidean norm of an interior real vector (solver residual scale).
pub fn euclid<T: Real>(x: &[T]) -> T {
    dot(x, x).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{assemble, CoefficientField, SpatialMesh};
    use crate::profile::Profile;
    use proptest::prelude::*;

    fn setup(elements: usize, a: Vec<f64>) -> (SpatialMesh<f64>, FemMatrices<f64>) {
        let mesh = SpatialMesh::uniform(1.0, elements).unwrap();
        let b = vec![0.5; elements];
        let mats = assemble(&mesh, &CoefficientField::tight(a, b).unwrap()).unwrap();
        (mesh, mats)
    }

    #[test]
    fn unit_load_gives_parabola() {
        let (mesh, mats) = setup(16, vec![1.0; 16]);
        let load = SeparableField::single(Profile::Constant(1.0), mesh.load_vector(|_| 1.0));
        let prob = EllipticProblem::new(mats, load, SeparableField::zero(17)).unwrap();
        let u = prob.solve_stationary(0.0);
        assert!(u.homogeneous && u.boundary_is_zero());
        for (x, v) in mesh.nodes().iter().zip(&u.values) {
            // P1 on a 1D Poisson problem is nodally exact
            assert!((v - x * (1.0 - x) / 2.0).abs() < 1e-13);
        }
        assert!(prob.residual(0.0, &u.values) < 1e-12);
    }

    #[test]
    fn constant_boundary_data_is_reproduced() {
        let (_, mats) = setup(8, vec![1.0; 8]);
        let lift = SeparableField::single(Profile::Constant(1.0), vec![2.5; 9]);
        let prob = EllipticProblem::new(mats, SeparableField::zero(9), lift).unwrap();
        let u = prob.solve_stationary(0.3);
        assert!(u.values.iter().all(|v| (v - 2.5).abs() < 1e-13));
        assert!(!u.homogeneous);
    }

    #[test]
    fn two_material_flux_continuity() {
        // a = 1 on (0, ½), 2 on (½, 1), f = 1; closed-form piecewise parabola.
        let ne = 16;
        let a: Vec<f64> = (0..ne).map(|e| if e < ne / 2 { 1.0 } else { 2.0 }).collect();
        let (mesh, mats) = setup(ne, a);
        let load = SeparableField::single(Profile::Constant(1.0), mesh.load_vector(|_| 1.0));
        let prob = EllipticProblem::new(mats, load, SeparableField::zero(ne + 1)).unwrap();
        let u = prob.solve_stationary(0.0).values;
        // flux σ = a u′ = C − x; continuity of u at ½ with u(0)=u(1)=0 gives C = 5/12
        let c = 5.0 / 12.0;
        let exact = |x: f64| {
            if x <= 0.5 {
                c * x - x * x / 2.0
            } else {
                (c * x - x * x / 2.0 - (c - 0.5)) / 2.0
            }
        };
        for (x, v) in mesh.nodes().iter().zip(&u) {
            assert!((v - exact(*x)).abs() < 1e-12, "x = {x}: {v} vs {}", exact(*x));
        }
    }

    #[test]
    fn trajectory_follows_linear_load() {
        let (mesh, mats) = setup(10, vec![1.5; 10]);
        let shape = mesh.load_vector(|x| (3.0 * x).cos());
        let ramp = EllipticProblem::new(
            mats.clone(),
            SeparableField::single(Profile::Polynomial(vec![0.0, 1.0]), shape.clone()),
            SeparableField::zero(11),
        )
        .unwrap();
        let grid = TimeGrid::new(1.0, 10).unwrap();
        let path = ramp.solve_stationary_trajectory(&grid);
        let end = &path[10];
        for (n, u) in path.iter().enumerate() {
            let t = grid.time(n);
            for (a, b) in u.iter().zip(end) {
                assert!((a - t * b).abs() < 1e-14);
            }
        }

        let wave = EllipticProblem::new(
            mats.clone(),
            SeparableField::single(
                Profile::Sine {
                    amplitude: 1.0,
                    omega: 1.0,
                    phase: 0.0,
                },
                shape,
            ),
            SeparableField::zero(11),
        )
        .unwrap();
        let base = mats.norm_v(&ramp.solve_stationary(1.0).values);
        for t in [0.2, 0.9, 2.5] {
            let n = mats.norm_v(&wave.solve_stationary(t).values);
            assert!((n - base * f64::sin(t).abs()).abs() < 1e-12);
        }
    }

    #[test]
    fn frequency_must_be_in_right_half_plane() {
        assert!(ComplexFrequency::new(0.0, 1.0).is_err());
        assert!(ComplexFrequency::new(-1.0, 0.0).is_err());
    }

    #[test]
    fn complex_path_matches_real_shift() {
        // B ≈ 0 limit: tiny viscosity, real s; compare with (ε²s²M + K_A) real solve
        let mesh = SpatialMesh::<f64>::uniform(1.0, 12).unwrap();
        let c = CoefficientField::tight(vec![1.0; 12], vec![1e-300; 12]).unwrap();
        let mats = assemble(&mesh, &c).unwrap();
        let (eps, s) = (0.3, 2.0);
        let rhs: Vec<f64> = interior_of(&mesh.load_vector(|x| x.exp()));
        let crhs: Vec<Cplx<f64>> = rhs.iter().map(|v| Cplx::new(*v, 0.0)).collect();
        let z = solve_complex(&mats, ComplexFrequency::new(s, 0.0).unwrap(), eps, 0.5, &crhs).unwrap();
        let real = SymTridiag::lincomb(&[(eps * eps * s * s, &mats.mass), (1.0, &mats.stiff_a)])
            .interior()
            .factor()
            .unwrap()
            .solve(&rhs);
        for (a, b) in z.interior().iter().zip(&real) {
            assert!((a.re - b).abs() < 1e-13 && a.im.abs() < 1e-13);
        }
    }

    #[test]
    fn large_eps_single_mode() {
        let (_, mats) = setup(12, vec![1.0; 12]);
        let (_, modes) = crate::fem::generalized_modes(&mats.stiff_a.interior(), &mats.mass.interior()).unwrap();
        let phi = &modes[0];
        let rhs: Vec<Cplx<f64>> = mats.mass.interior().mul_vec(phi).iter().map(|v| Cplx::new(*v, 0.0)).collect();
        let s = Cplx::new(1.0, 1.0);
        let eps = 1e4;
        let sol = solve_complex(&mats, ComplexFrequency::new(1.0, 1.0).unwrap(), eps, 1.0, &rhs).unwrap();
        let expected = Cplx::new(1.0, 0.0) / (s * s * eps * eps);
        let coeff = sol
            .interior()
            .iter()
            .zip(&rhs)
            .fold(Cplx::new(0.0, 0.0), |acc, (x, r)| acc + x * r.re);
        assert!((coeff - expected).norm() < 1e-6 * expected.norm());
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let (_, mats) = setup(6, vec![1.0; 6]);
        let z = solve_complex(&mats, ComplexFrequency::new(1.0, 3.0).unwrap(), 0.1, 0.5, &[Cplx::new(0.0, 0.0); 5]).unwrap();
        assert!(z.values.iter().all(|v| v.norm() == 0.0));
    }

    proptest! {
        #[test]
        fn resolvent_is_linear(
            x in proptest::collection::vec(-1.0f64..1.0, 9),
            y in proptest::collection::vec(-1.0f64..1.0, 9),
            alpha in -3.0f64..3.0,
        ) {
            let (_, mats) = setup(10, vec![1.0, 2.0, 1.5, 1.0, 3.0, 1.0, 1.0, 2.0, 1.0, 1.2]);
            let prob = EllipticProblem::new(mats, SeparableField::zero(11), SeparableField::zero(11)).unwrap();
            let combo: Vec<f64> = x.iter().zip(&y).map(|(a, b)| alpha * a + b).collect();
            let lhs = prob.resolvent(&combo);
            let rx = prob.resolvent(&x);
            let ry = prob.resolvent(&y);
            for i in 0..9 {
                prop_assert!((lhs[i] - (alpha * rx[i] + ry[i])).abs() < 1e-12);
            }
        }

        #[test]
        fn lax_milgram_stability(rhs in proptest::collection::vec(-1.0f64..1.0, 15)) {
            let a: Vec<f64> = (0..16).map(|e| 1.0 + 0.5 * (e % 3) as f64).collect();
            let (_, mats) = setup(16, a);
            let (norm, bound) = lax_milgram_check(&mats, &rhs).unwrap();
            prop_assert!(norm <= bound * (1.0 + 1e-12));
        }

        #[test]
        fn complex_solve_conjugate_symmetry(
            s1 in 0.1f64..3.0, s2 in -20.0f64..20.0, eps in 0.01f64..1.0,
            re in proptest::collection::vec(-1.0f64..1.0, 7),
            im in proptest::collection::vec(-1.0f64..1.0, 7),
        ) {
            let (_, mats) = setup(8, vec![1.0, 2.0, 1.0, 1.0, 3.0, 1.0, 2.0, 1.0]);
            let rhs: Vec<Cplx<f64>> = re.iter().zip(&im).map(|(a, b)| Cplx::new(*a, *b)).collect();
            let conj: Vec<Cplx<f64>> = rhs.iter().map(|z| z.conj()).collect();
            let s = ComplexFrequency::new(s1, s2).unwrap();
            let x = solve_complex(&mats, s, eps, 0.7, &rhs).unwrap().values;
            let y = solve_complex(&mats, s.conj(), eps, 0.7, &conj).unwrap().values;
            let op = shifted_operator(&mats, s, eps, 0.7);
            let r = op.mul_vec(&interior_of(&x));
            for (a, b) in r.iter().zip(&rhs) {
                prop_assert!((a - b).norm() < 1e-9 * (1.0 + b.norm()));
            }
            for (a, b) in x.iter().zip(&y) {
                prop_assert!((a - b.conj()).norm() < 1e-10 * (1.0 + a.norm()));
            }
        }
    }
}
