use super::{boundary_lift, reduce_history, ExpWeights, ProblemData, Trajectory};
use crate::error::Result;
use crate::fem::{interior_of, FemMatrices};
use crate::linalg::{dot, SymTridiag};
use crate::quadrature::trapezoid;
use crate::scalar::Real;

/// Both sides of the uniform a-priori estimate.
///
/// `lhs = ε² max‖v̇‖²_H + max‖v‖²_V` and
/// `data = ε²‖v¹‖²_H + ‖v⁰‖²_V + ‖h/ε‖²_{L¹H} + ‖ℓ‖²_{W^{1,1}V′}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AprioriReport<T> {
    pub lhs: T,
    pub data: T,
}

impl<T: Real> AprioriReport<T> {
    /// Smallest constant for which this run satisfies the estimate.
    pub fn fitted_constant(&self) -> T {
        if self.data > T::zero() {
            self.lhs / self.data
        } else {
            T::zero()
        }
    }

    pub fn holds(&self, constant: T) -> bool {
        self.lhs <= constant * self.data * (T::one() + T::lit(1e-12)) + T::lit(1e-300)
    }
}

pub fn apriori_bound_check<T: Real>(
    traj: &Trajectory<T>,
    data: &ProblemData<T>,
    mats: &FemMatrices<T>,
) -> Result<AprioriReport<T>> {
    let reduced = reduce_history(data, mats)?;
    let system = boundary_lift(data, &reduced, mats)?;
    let eps = data.eps;
    let m_int = mats.mass.interior().factor()?;
    let riesz = SymTridiag::lincomb(&[(T::one(), &mats.mass), (T::one(), &mats.stiff_unit)])
        .interior()
        .factor()?;
    let dual = |lu: &crate::linalg::TridiagLu<T>, f: &[T]| -> T {
        let fi = interior_of(f);
        dot(&fi, &lu.solve(&fi)).max(T::zero()).sqrt()
    };

    let lhs = traj.states.iter().fold(T::zero(), |m, s| {
        m.max(eps * eps * mats.mass.quad_form(&s.v_dot))
    }) + traj
        .states
        .iter()
        .fold(T::zero(), |m, s| m.max(mats.norm_v(&s.v).powi(2)));

    let (v0, v1) = system.initial_state();
    let dt = traj.times.get(1).map_or(T::one(), |t1| *t1 - traj.times[0]);
    let weights = ExpWeights::new(dt, data.kernel_time());
    let mut wz = system.initial_wz();
    let (mut h_norm, mut l_norm, mut ld_norm) = (Vec::new(), Vec::new(), Vec::new());
    for (n, t) in traj.times.iter().enumerate() {
        if n > 0 {
            wz = system.advance_wz(&wz, traj.times[n - 1], *t - traj.times[n - 1], &weights);
        }
        h_norm.push(dual(&m_int, &system.h(*t)) / eps);
        l_norm.push(dual(&riesz, &system.ell(*t, &wz)));
        ld_norm.push(dual(&riesz, &system.ell_dot(*t, &wz)));
    }
    let w11 = trapezoid(&l_norm, dt) + trapezoid(&ld_norm, dt);
    let data_side = eps * eps * mats.mass.quad_form(&v1)
        + mats.norm_v(&v0).powi(2)
        + trapezoid(&h_norm, dt).powi(2)
        + w11 * w11;
    Ok(AprioriReport { lhs, data: data_side })
}
