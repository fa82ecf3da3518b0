use super::{reduce_history, DampingLaw, ProblemData, State, Trajectory};
use crate::error::{Error, Result};
use crate::fem::{FemMatrices, TimeGrid};
use crate::linalg::SymTridiag;
use crate::profile::SeparableField;
use crate::scalar::Real;

const OPERATION_LIMIT: f64 = 1e9;

/// Weights of `e(t_k)` and `e(t_{k+1})` in `∫_{t_k}^{t_{k+1}} τ⁻¹ e^{(s−c)/τ} e(s) ds`
/// for `e` linear on the interval, integrated in closed form.
fn interval_weights<T: Real>(c: T, tk: T, dt: T, tau: T) -> (T, T) {
    let lo = ((tk - c) / tau).exp();
    let hi = ((tk + dt - c) / tau).exp();
    let right = (hi * (dt - tau) + tau * lo) / dt;
    let left = (tau * hi - (dt + tau) * lo) / dt;
    (left, right)
}

/// Memory term `∫₀^{t_n} τ⁻¹ e^{−(t_n−s)/τ} e u(s) ds` from the stored strain history.
fn convolution<T: Real>(strains: &[Vec<T>], n: usize, dt: T, tau: T, elements: usize) -> Vec<T> {
    let c = dt * T::from_count(n);
    let mut acc = vec![T::zero(); elements];
    for k in 0..n {
        let (wl, wr) = interval_weights(c, dt * T::from_count(k), dt, tau);
        for e in 0..elements {
            acc[e] += wl * strains[k][e] + wr * strains[k + 1][e];
        }
    }
    acc
}

fn field_at<T: Real>(field: &SeparableField<T>, t: T, order: u32, n: usize) -> Vec<T> {
    if field.is_zero() {
        vec![T::zero(); n]
    } else {
        field.derivative(t, order)
    }
}

/// Reference solver that keeps the memory term as an explicit convolution.
///
/// Works on the full displacement with prescribed boundary values and costs
/// `O(N²)` in the number of steps.
pub fn oracle_convolution<T: Real>(
    data: &ProblemData<T>,
    mats: &FemMatrices<T>,
    grid: &TimeGrid<T>,
) -> Result<Trajectory<T>> {
    if data.law != DampingLaw::Memory {
        return Err(Error::Precondition("the convolution oracle models the memory law only".into()));
    }
    let steps = grid.steps();
    let elements = mats.element_count();
    let cost = (steps as f64 + 1.0).powi(2) * elements as f64;
    if cost > OPERATION_LIMIT {
        return Err(Error::InstanceTooLarge(format!(
            "{steps} steps on {elements} elements needs about {cost:.1e} operations"
        )));
    }
    let reduced = reduce_history(data, mats)?;
    let n_nodes = mats.node_count();
    let last = n_nodes - 1;
    let (eps, dt, tau) = (data.eps, grid.dt(), data.kernel_time());
    let half = T::lit(0.5);
    let two = T::lit(2.0);
    let stiff = SymTridiag::lincomb(&[(T::one(), &mats.stiff_a), (T::one(), &mats.stiff_b)]);

    let load = |t: T| -> Vec<T> {
        let f = field_at(&data.f, t, 0, n_nodes);
        let g = field_at(&data.g, t, 0, n_nodes);
        let p = reduced.p(t);
        (0..n_nodes).map(|i| f[i] + g[i] - p[i]).collect()
    };
    let boundary = |t: T, order: u32| -> (T, T) {
        let z = field_at(&data.z, t, order, n_nodes);
        (z[0], z[last])
    };

    let mut u = reduced.u0.clone();
    let mut u_dot = reduced.u1.clone();
    (u[0], u[last]) = boundary(T::zero(), 0);
    (u_dot[0], u_dot[last]) = boundary(T::zero(), 1);

    let omega = interval_weights(dt, T::zero(), dt, tau).1;
    let jacobian = SymTridiag::lincomb(&[
        (two * eps * eps / (dt * dt), &mats.mass),
        (half, &stiff),
        (-half * omega, &mats.stiff_b),
    ])
    .interior()
    .factor()?;

    let mut strains = vec![mats.strain(&u)];
    let mut us = vec![u.clone()];
    let mut u_dots = vec![u_dot.clone()];
    let mut memory = vec![vec![T::zero(); elements]];
    let mut load_now = load(T::zero());

    for n in 0..steps {
        let t1 = grid.time(n + 1);
        let load_next = load(t1);
        let (b0, b1) = boundary(t1, 0);
        let (d0, d1) = boundary(t1, 1);

        // residual of the step equations with interior unknowns set to zero
        let mut trial = vec![T::zero(); n_nodes];
        (trial[0], trial[last]) = (b0, b1);
        let mut trial_dot: Vec<T> = (0..n_nodes).map(|i| -two * u[i] / dt - u_dot[i]).collect();
        (trial_dot[0], trial_dot[last]) = (d0, d1);
        strains.push(mats.strain(&trial));
        let w_trial = convolution(&strains, n + 1, dt, tau, elements);
        let accel: Vec<T> = (0..n_nodes).map(|i| trial_dot[i] - u_dot[i]).collect();
        let m_acc = mats.mass.mul_vec(&accel);
        let sum_u: Vec<T> = (0..n_nodes).map(|i| u[i] + trial[i]).collect();
        let k_u = stiff.mul_vec(&sum_u);
        let sum_w: Vec<T> = (0..elements).map(|e| memory[n][e] + w_trial[e]).collect();
        let b_w = mats.viscous_adjoint(&sum_w);
        let residual: Vec<T> = (1..last)
            .map(|i| {
                -(eps * eps / dt * m_acc[i] + half * k_u[i] - half * b_w[i] - half * (load_now[i] + load_next[i]))
            })
            .collect();
        let x = jacobian.solve(&residual);

        let mut next = trial;
        for i in 1..last {
            next[i] = x[i - 1];
        }
        let mut next_dot = vec![T::zero(); n_nodes];
        for i in 1..last {
            next_dot[i] = two * (next[i] - u[i]) / dt - u_dot[i];
        }
        (next_dot[0], next_dot[last]) = (d0, d1);
        let e_next = mats.strain(&next);
        *strains.last_mut().expect("strain history is non-empty") = e_next;
        memory.push(convolution(&strains, n + 1, dt, tau, elements));
        us.push(next.clone());
        u_dots.push(next_dot.clone());
        u = next;
        u_dot = next_dot;
        load_now = load_next;
    }

    let times = grid.times();
    let states = times
        .iter()
        .enumerate()
        .map(|(n, t)| {
            let z = field_at(&data.z, *t, 0, n_nodes);
            let zd = field_at(&data.z, *t, 1, n_nodes);
            State {
                t: *t,
                v: us[n].iter().zip(&z).map(|(a, b)| *a - *b).collect(),
                v_dot: u_dots[n].iter().zip(&zd).map(|(a, b)| *a - *b).collect(),
                w: memory[n].clone(),
            }
        })
        .collect();
    Ok(Trajectory {
        times,
        states,
        u: us,
        u_dot: u_dots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamic::integrate;
    use crate::elliptic::EllipticProblem;
    use crate::fem::{assemble, CoefficientField, SpatialMesh};
    use crate::profile::Profile;

    #[test]
    fn weights_partition_the_kernel_mass() {
        let (dt, tau) = (0.013, 0.05);
        for n in [1usize, 5, 40] {
            let c = dt * n as f64;
            let total: f64 = (0..n)
                .map(|k| {
                    let (a, b) = interval_weights(c, dt * k as f64, dt, tau);
                    a + b
                })
                .sum();
            assert!((total - (1.0 - (-c / tau).exp())).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_data_gives_zero() {
        let mesh = SpatialMesh::uniform(1.0, 5).unwrap();
        let m = assemble(&mesh, &CoefficientField::constant(5, 1.0, 1.0).unwrap()).unwrap();
        let data = ProblemData::new(0.1, 0.5, 1.0, 6).unwrap();
        let traj = oracle_convolution(&data, &m, &TimeGrid::new(1.0, 20).unwrap()).unwrap();
        assert!(traj.u.iter().flatten().all(|v| *v == 0.0));
    }

    #[test]
    fn large_instances_are_refused() {
        let mesh = SpatialMesh::uniform(1.0, 100).unwrap();
        let m = assemble(&mesh, &CoefficientField::constant(100, 1.0, 1.0).unwrap()).unwrap();
        let data = ProblemData::new(0.1, 0.5, 1.0, 101).unwrap();
        let grid = TimeGrid::new(1.0, 10_000).unwrap();
        assert!(matches!(
            oracle_convolution(&data, &m, &grid),
            Err(Error::InstanceTooLarge(_))
        ));
    }

    #[test]
    fn lifted_recursion_matches_direct_convolution() {
        let mesh = SpatialMesh::<f64>::uniform(1.0, 6).unwrap();
        let m = assemble(&mesh, &CoefficientField::tight(vec![1.0, 2.0, 1.0, 1.5, 1.0, 1.0], vec![0.5; 6]).unwrap())
            .unwrap();
        let data = ProblemData::new(0.2, 0.5, 1.0, 7)
            .unwrap()
            .with_lift(SeparableField::single(
                Profile::Polynomial(vec![0.0, 1.0]),
                mesh.interpolate(|x| 1.0 + x),
            ))
            .with_f(SeparableField::single(Profile::Constant(1.0), mesh.load_vector(|_| 1.0)));
        let grid = TimeGrid::new(1.0, 400).unwrap();
        let (lifted, _) = integrate(&data, &m, &grid).unwrap();
        let direct = oracle_convolution(&data, &m, &grid).unwrap();
        let gap = lifted
            .u
            .iter()
            .flatten()
            .zip(direct.u.iter().flatten())
            .fold(0.0f64, |g, (a, b)| g.max((a - b).abs()));
        assert!(gap < 1e-6, "gap {gap:e}");
    }

    #[test]
    fn constant_load_settles_on_the_stationary_solution() {
        let mesh = SpatialMesh::<f64>::uniform(1.0, 6).unwrap();
        let m = assemble(&mesh, &CoefficientField::constant(6, 1.0, 2.0).unwrap()).unwrap();
        let load = SeparableField::single(Profile::Constant(1.0), mesh.load_vector(|_| 1.0));
        let data = ProblemData::new(1.0, 0.5, 60.0, 7).unwrap().with_g(load.clone());
        let grid = TimeGrid::new(60.0, 3000).unwrap();
        let direct = oracle_convolution(&data, &m, &grid).unwrap();
        let (recursive, _) = integrate(&data, &m, &grid).unwrap();
        let steady = EllipticProblem::new(m.clone(), load, SeparableField::zero(7))
            .unwrap()
            .solve_stationary(0.0)
            .values;
        for traj in [&direct.u[3000], &recursive.u[3000]] {
            for (a, b) in traj.iter().zip(&steady) {
                assert!((a - b).abs() < 1e-3, "{a} vs {b}");
            }
        }
    }
}
