//! Gauss–Legendre rules and composite integration on intervals.

use std::f64::consts::PI;

use crate::scalar::Real;

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    /// `n`-point rule; nodes are found in `f64` by Newton on `P_n` and then converted.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "a Gauss rule needs at least one node");
        let mut nodes = vec![0.0f64; n];
        let mut weights = vec![0.0f64; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self {
            nodes: nodes.into_iter().map(T::lit).collect(),
            weights: weights.into_iter().map(T::lit).collect(),
        }
    }

    /// `∫_a^b f` with this rule mapped to `[a, b]`.
    pub fn integrate<F: FnMut(T) -> T>(&self, a: T, b: T, mut f: F) -> T {
        let half = (b - a) * T::lit(0.5);
        let mid = (a + b) * T::lit(0.5);
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(T::zero(), |acc, (x, w)| acc + *w * f(mid + half * *x))
            * half
    }

    /// Mapped nodes and weights on `[a, b]`.
    pub fn mapped(&self, a: T, b: T) -> impl Iterator<Item = (T, T)> + '_ {
        let half = (b - a) * T::lit(0.5);
        let mid = (a + b) * T::lit(0.5);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mid + half * *x, *w * half))
    }

    /// Composite rule over `panels` equal subintervals of `[a, b]`.
    pub fn composite<F: FnMut(T) -> T>(&self, a: T, b: T, panels: usize, mut f: F) -> T {
        let h = (b - a) / T::from_count(panels);
        (0..panels).fold(T::zero(), |acc, k| {
            let lo = a + h * T::from_count(k);
            acc + self.integrate(lo, lo + h, &mut f)
        })
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Trapezoid rule on uniformly spaced samples.
pub fn trapezoid<T: Real>(values: &[T], step: T) -> T {
    match values.len() {
        0 | 1 => T::zero(),
        n => {
            let inner = values[1..n - 1].iter().fold(T::zero(), |a, v| a + *v);
            step * (inner + (values[0] + values[n - 1]) * T::lit(0.5))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two() {
        for n in 1..12 {
            let rule = GaussLegendre::<f64>::new(n);
            let s: f64 = rule.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-14, "n = {n}");
        }
    }

    #[test]
    fn exact_for_degree_2n_minus_1() {
        let rule = GaussLegendre::<f64>::new(5);
        // ∫₀¹ x⁹ = 1/10
        let v = rule.integrate(0.0, 1.0, |x| x.powi(9));
        assert!((v - 0.1).abs() < 1e-15);
    }

    #[test]
    fn composite_exponential() {
        let rule = GaussLegendre::<f64>::new(8);
        let v = rule.composite(-3.0, 0.0, 4, f64::exp);
        assert!((v - (1.0 - (-3.0f64).exp())).abs() < 1e-14);
    }

    #[test]
    fn trapezoid_linear_is_exact() {
        let xs: Vec<f64> = (0..=10).map(|k| 2.0 * k as f64 / 10.0).collect();
        assert!((trapezoid(&xs, 0.2) - 2.0).abs() < 1e-14);
    }
}
