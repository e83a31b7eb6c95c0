//! Gauss-Legendre nodes and weights of arbitrary order.
//!
//! Roots of P_n are found by Newton iteration seeded with the Tricomi cosine
//! approximation; weights follow from w_i = 2 / ((1 - x_i^2) * P_n'(x_i)^2).
//! Nodes come back ascending on [-1, 1].

use std::f64::consts::PI;

/// P_n(t) and P_n'(t) by the three-term recurrence.
fn legendre_pd(n: usize, t: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = t;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * t * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, dp)
}

/// Nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "quadrature order must be at least 1");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        // i-th root counted from the right end.
        let mut t = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..64 {
            let (p, dp) = legendre_pd(n, t);
            let dt = p / dp;
            t -= dt;
            if dt.abs() <= 1e-15 * (1.0 + t.abs()) {
                break;
            }
        }
        let (_, dp) = legendre_pd(n, t);
        let wi = 2.0 / ((1.0 - t * t) * dp * dp);
        x[n - 1 - i] = t;
        x[i] = -t;
        w[n - 1 - i] = wi;
        w[i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Nodes and weights transplanted to [a, b].
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    (
        x.iter().map(|t| mid + half * t).collect(),
        w.iter().map(|wi| wi * half).collect(),
    )
}

/// Independent 1-D reference integrator for test oracles elsewhere in the
/// crate; deliberately unrelated to the Gauss-Legendre machinery above.
#[cfg(test)]
pub(crate) mod testsupport {
    /// Adaptive Simpson on [a, b].
    pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
            let m = 0.5 * (a + b);
            let fm = f(m);
            ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
        }
        #[allow(clippy::too_many_arguments)]
        fn rec(
            f: &dyn Fn(f64) -> f64,
            a: f64,
            fa: f64,
            b: f64,
            fb: f64,
            whole: f64,
            m: f64,
            fm: f64,
            tol: f64,
            depth: u32,
        ) -> f64 {
            let (left, lm, flm) = simpson(f, a, fa, m, fm);
            let (right, rm, frm) = simpson(f, m, fm, b, fb);
            let delta = left + right - whole;
            if depth == 0 || delta.abs() <= 15.0 * tol {
                left + right + delta / 15.0
            } else {
                rec(f, a, fa, m, fm, left, lm, flm, 0.5 * tol, depth - 1)
                    + rec(f, m, fm, b, fb, right, rm, frm, 0.5 * tol, depth - 1)
            }
        }
        let fa = f(a);
        let fb = f(b);
        let (whole, m, fm) = simpson(f, a, fa, b, fb);
        rec(f, a, fa, b, fb, whole, m, fm, tol, 40)
    }
}

#[cfg(test)]
mod tests {
    use super::testsupport::adaptive_simpson;
    use super::*;

    #[test]
    fn weights_sum_to_interval_length() {
        for n in [1usize, 2, 4, 5, 24, 48] {
            let (_, w) = gauss_legendre(n);
            let s: f64 = w.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n = {n}, sum = {s}");
        }
    }

    #[test]
    fn low_order_matches_tabulated_values() {
        let (x, w) = gauss_legendre(3);
        assert!((x[0] + (0.6f64).sqrt()).abs() < 1e-15);
        assert!(x[1].abs() < 1e-15);
        assert!((w[0] - 5.0 / 9.0).abs() < 1e-15);
        assert!((w[1] - 8.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn exact_for_polynomials_up_to_degree_2n_minus_1() {
        for n in [4usize, 9, 24] {
            let (x, w) = gauss_legendre(n);
            for k in 0..2 * n {
                let num: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(k as i32)).sum();
                let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                assert!((num - exact).abs() < 2e-13, "n = {n}, k = {k}: {num} vs {exact}");
            }
        }
    }

    #[test]
    fn gaussian_integral_matches_adaptive_simpson() {
        let f = |t: f64| (-PI * t * t).exp();
        let oracle = adaptive_simpson(&f, -0.5, 0.5, 1e-14);
        let (x, w) = gauss_legendre_on(24, -0.5, 0.5);
        let num: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * f(*xi)).sum();
        assert!((num - oracle).abs() < 1e-13, "{num} vs {oracle}");
    }
}
