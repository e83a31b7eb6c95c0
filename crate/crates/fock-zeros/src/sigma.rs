//! Weierstrass sigma function of the square lattice, evaluated in log space.
//!
//! The canonical product over L = { w_mn = w1*(m+i*n) }, w1 = sqrt(pi/alpha):
//!
//! ```text
//! sigma(z) = z * prod_{w != 0} (1 - z/w) * exp(z/w + z^2/(2 w^2))
//! ```
//!
//! vanishes exactly on L, all zeros simple. Three independent evaluation
//! routes are provided and cross-checked:
//!
//! * `eval_product`: the product truncated at a Chebyshev ring M, plus an
//!   analytic correction for the omitted tail. Summed over complete rings the
//!   tail of log(sigma/z) is -sum_{j>=1} T_{4j} z^{4j}/(4j) with
//!   T_{4j} = G_{4j} - S_{4j}(M), where G_{4j} are the square-lattice
//!   Eisenstein sums (odd orders and orders not divisible by 4 vanish ring by
//!   ring) and S_{4j}(M) the part already inside the window. The first three
//!   corrections are applied; the first omitted one, of order 16, bounds the
//!   error and drives truncation-ring selection.
//! * `eval_reduced`: translate z into the fundamental cell with
//!   `lattice.reduce`, evaluate there, and restore the value through the
//!   quasi-period law sigma(z0 + w) = eps(w) sigma(z0) exp(eta(w)(z0 + w/2)),
//!   eps(w_mn) = (-1)^(m+n+mn), eta(w) = alpha * conj(w). That eta makes
//!   |sigma(z)| exp(-alpha |z|^2 / 2) doubly periodic, which every evaluator
//!   verifies against the raw product at construction.
//! * `eval_theta`: the first Jacobi theta series with square-lattice nome
//!   q = exp(-pi):
//!
//!   ```text
//!   sigma(z) = (w1/pi) * exp(alpha z^2 / 2) * theta1(pi z / w1, q) / theta1'(0, q)
//!   ```
//!
//! `eval` is the production path used by the quadrature layers: reduction to
//! the cell followed by the fully compensated series
//! log(sigma(z0)/z0) = -sum_j G_{4j} z0^{4j}/(4j), which converges on the
//! whole closed cell (corner distance 0.7072 w1 < w1).

use crate::lattice::{LatticeIndex, SquareLattice};
use crate::logcx::LogComplex;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::OnceLock;
use thiserror::Error;

/// Lemniscate constant; G_4 of the unit square lattice is its fourth power
/// over 15.
pub const LEMNISCATE: f64 = 2.622_057_554_292_119_8;

/// Number of terms of the cell series; term j carries (z0/w1)^(4j), so with
/// |z0/w1| <= 0.7072 the omitted tail sits below 1e-16.
const CELL_SERIES_TERMS: usize = 24;

/// Default relative tolerance for the truncated product.
pub const DEFAULT_PRODUCT_TOL: f64 = 1e-10;

/// Tolerance of the construction-time quasi-period self-test.
pub const DEFAULT_PERIODICITY_TOL: f64 = 1e-8;

#[derive(Debug, Error, PartialEq)]
pub enum SigmaError {
    #[error(
        "truncation ring {ring} too small for |z| = {z_abs:.6e}: tail bound {bound:.3e} \
         exceeds tolerance {tol:.3e} (smallest sufficient ring {needed}, 0 if none exists)"
    )]
    TruncationTooSmall {
        ring: u32,
        z_abs: f64,
        bound: f64,
        tol: f64,
        needed: u32,
    },
    #[error(
        "quasi-period self-test failed: relative deviation {dev:.3e} against the raw \
         product exceeds {tol:.3e}"
    )]
    PeriodicityCheckFailed { dev: f64, tol: f64 },
}

/// Unit-lattice Eisenstein sums G_{4j} = sum' w^(-4j) over Z + iZ,
/// j = 1..=CELL_SERIES_TERMS.
fn unit_eisenstein() -> &'static [f64; CELL_SERIES_TERMS] {
    static TABLE: OnceLock<[f64; CELL_SERIES_TERMS]> = OnceLock::new();
    TABLE.get_or_init(|| {
        // a_n = (2n+1) G_{2n+2}; the Laurent coefficients of the p-function
        // satisfy a_n = 3/((2n+3)(n-2)) * sum_{i=1}^{n-2} a_i a_{n-1-i} for
        // n >= 3. Seeds: a_1 = 3 G_4, a_2 = 5 G_6 = 0 on the square lattice.
        let g4 = LEMNISCATE.powi(4) / 15.0;
        let n_max = 2 * CELL_SERIES_TERMS - 1;
        let mut a = vec![0.0_f64; n_max + 1];
        a[1] = 3.0 * g4;
        for n in 3..=n_max {
            let mut s = 0.0;
            for i in 1..=n - 2 {
                s += a[i] * a[n - 1 - i];
            }
            a[n] = 3.0 * s / (((2 * n + 3) * (n - 2)) as f64);
        }
        let mut t = [0.0_f64; CELL_SERIES_TERMS];
        for (j, slot) in t.iter_mut().enumerate() {
            let n = 2 * (j + 1) - 1;
            *slot = a[n] / ((2 * n + 1) as f64);
        }
        t
    })
}

/// log of the magnitude of v minus the Gaussian exponent: for sigma this
/// quantity is invariant under both lattice periods.
pub fn weighted_mag(v: LogComplex, z: Complex64, alpha: f64) -> f64 {
    if v.is_zero() {
        return f64::NEG_INFINITY;
    }
    v.log_mag - 0.5 * alpha * z.norm_sqr()
}

#[derive(Debug, Clone)]
pub struct SigmaEvaluator {
    lattice: SquareLattice,
    truncation_ring: u32,
    tolerance: f64,
    /// eta(w1); alpha * w1 when honest. The corrupt factor used by the
    /// negative-control test hook scales this.
    eta1: f64,
}

impl SigmaEvaluator {
    /// Evaluator with an explicit truncation ring. Runs the quasi-period
    /// self-test before returning.
    pub fn new(lattice: SquareLattice, truncation_ring: u32) -> Result<Self, SigmaError> {
        Self::with_options(
            lattice,
            truncation_ring,
            DEFAULT_PRODUCT_TOL,
            DEFAULT_PERIODICITY_TOL,
        )
    }

    /// Evaluator whose truncation ring is derived from the requested product
    /// tolerance for arguments up to `radius`.
    pub fn auto_for_radius(
        lattice: SquareLattice,
        radius: f64,
        tolerance: f64,
    ) -> Result<Self, SigmaError> {
        let ring = required_ring(lattice.omega1(), radius, tolerance).unwrap_or(4096);
        Self::with_options(lattice, ring, tolerance, DEFAULT_PERIODICITY_TOL)
    }

    /// Auto truncation sized for the fundamental cell.
    pub fn auto(lattice: SquareLattice, tolerance: f64) -> Result<Self, SigmaError> {
        Self::auto_for_radius(lattice, FRAC_1_SQRT_2 * lattice.omega1(), tolerance)
    }

    pub fn with_options(
        lattice: SquareLattice,
        truncation_ring: u32,
        tolerance: f64,
        periodicity_tol: f64,
    ) -> Result<Self, SigmaError> {
        let ev = Self::unchecked(lattice, truncation_ring, tolerance, 1.0);
        ev.self_test(periodicity_tol)?;
        Ok(ev)
    }

    /// No self-test; `eta_factor != 1` deliberately corrupts the
    /// quasi-period constant. Negative-control hook for the periodicity
    /// command and tests.
    pub fn unchecked(
        lattice: SquareLattice,
        truncation_ring: u32,
        tolerance: f64,
        eta_factor: f64,
    ) -> Self {
        SigmaEvaluator {
            lattice,
            truncation_ring: truncation_ring.max(1),
            tolerance,
            eta1: eta_factor * lattice.alpha() * lattice.omega1(),
        }
    }

    pub fn lattice(&self) -> &SquareLattice {
        &self.lattice
    }

    pub fn alpha(&self) -> f64 {
        self.lattice.alpha()
    }

    pub fn truncation_ring(&self) -> u32 {
        self.truncation_ring
    }

    /// Quasi-period constant eta(w_mn); additive in the index, equal to
    /// alpha * conj(w_mn) for the honest evaluator.
    pub fn eta(&self, idx: LatticeIndex) -> Complex64 {
        // eta(w_mn) = m * eta(w1) + n * eta(i w1) = eta1 * (m - i n).
        Complex64::new(self.eta1 * idx.m as f64, -self.eta1 * idx.n as f64)
    }

    /// Sign eps(w_mn) = (-1)^(m+n+mn): +1 exactly when w/2 is again a
    /// lattice point.
    pub fn sign(&self, idx: LatticeIndex) -> f64 {
        if (idx.m + idx.n + idx.m * idx.n) & 1 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// sigma'(w_mn) = eps * exp(eta(w) * w / 2); the zeros are simple, so
    /// this is the exact factor left after dividing out (z - w_mn).
    pub fn derivative_at(&self, idx: LatticeIndex) -> LogComplex {
        let w = self.lattice.point(idx);
        let v = LogComplex::from_exponent(self.eta(idx) * w * 0.5);
        if self.sign(idx) < 0.0 {
            v.negate()
        } else {
            v
        }
    }

    /// Validate the quasi-period machinery against the raw product at ten
    /// seeded points spread over the neighbor cells.
    pub fn self_test(&self, tol: f64) -> Result<(), SigmaError> {
        let mut rng = ChaCha8Rng::seed_from_u64(0xF0C2);
        let w1 = self.lattice.omega1();
        let ring = required_ring(w1, 2.3 * w1, 1e-11).unwrap_or(24);
        let mut worst = 0.0_f64;
        for _ in 0..10 {
            let z = Complex64::new(
                (rng.gen::<f64>() * 4.0 - 2.0) * w1,
                (rng.gen::<f64>() * 4.0 - 2.0) * w1,
            );
            let direct = self
                .product_at_ring(z, ring)
                .expect("self-test ring sized for its sample radius");
            let reduced = self.eval(z);
            if direct.is_zero() && reduced.is_zero() {
                continue;
            }
            worst = worst.max(reduced.rel_diff(direct));
        }
        if worst > tol {
            return Err(SigmaError::PeriodicityCheckFailed { dev: worst, tol });
        }
        Ok(())
    }

    /// Truncated canonical product with tail correction, rooted at the
    /// configured ring. Exact zero for z on a lattice point inside the
    /// window. Errs when the tail bound at this |z| exceeds the tolerance.
    pub fn eval_product(&self, z: Complex64) -> Result<LogComplex, SigmaError> {
        let bound = product_tail_bound(self.lattice.omega1(), self.truncation_ring, z.norm());
        if !(bound <= self.tolerance) {
            return Err(SigmaError::TruncationTooSmall {
                ring: self.truncation_ring,
                z_abs: z.norm(),
                bound,
                tol: self.tolerance,
                needed: required_ring(self.lattice.omega1(), z.norm(), self.tolerance)
                    .unwrap_or(0),
            });
        }
        self.product_at_ring(z, self.truncation_ring)
    }

    fn product_at_ring(&self, z: Complex64, ring: u32) -> Result<LogComplex, SigmaError> {
        if z.re == 0.0 && z.im == 0.0 {
            return Ok(LogComplex::zero());
        }
        let mut acc = Complex64::new(0.0, 0.0);
        let mut s4 = Complex64::new(0.0, 0.0);
        let mut s8 = Complex64::new(0.0, 0.0);
        let mut s12 = Complex64::new(0.0, 0.0);
        let mut hit_zero = false;
        for r in 1..=ring {
            for idx in self.lattice.ring_indices(r) {
                let w = self.lattice.point(idx);
                let u = z / w;
                if u.re == 1.0 && u.im == 0.0 {
                    hit_zero = true;
                    continue;
                }
                acc += canonical_term(u);
                let iw2 = 1.0 / (w * w);
                let iw4 = iw2 * iw2;
                s4 += iw4;
                s8 += iw4 * iw4;
                s12 += iw4 * iw4 * iw4;
            }
        }
        if hit_zero {
            return Ok(LogComplex::zero());
        }
        let g = unit_eisenstein();
        let w1 = self.lattice.omega1();
        let t4 = Complex64::new(g[0] / w1.powi(4), 0.0) - s4;
        let zp4 = z.powi(4);
        acc -= t4 * zp4 / 4.0;
        // Orders 8 and 12: G - S carries subtraction noise of a few ulp of G,
        // amplified by |z|^(4j). Correct only where that noise is smaller
        // than the tail being removed; the bound accounts for the choice.
        if comp_beats_skip(w1, ring, z.norm(), 2) {
            let t8 = Complex64::new(g[1] / w1.powi(8), 0.0) - s8;
            acc -= t8 * zp4 * zp4 / 8.0;
        }
        if comp_beats_skip(w1, ring, z.norm(), 3) {
            let t12 = Complex64::new(g[2] / w1.powi(12), 0.0) - s12;
            acc -= t12 * zp4 * zp4 * zp4 / 12.0;
        }
        Ok(LogComplex::from_complex(z).mul_exp(acc))
    }

    /// Reduce z to the fundamental cell, evaluate the product there, and map
    /// back through the quasi-period factor.
    pub fn eval_reduced(&self, z: Complex64) -> Result<LogComplex, SigmaError> {
        let (z0, idx) = self.lattice.reduce(z);
        let base = self.eval_product(z0)?;
        Ok(self.apply_quasi_factor(base, z0, idx))
    }

    /// Production path: reduction plus the fully summed cell series. Used by
    /// every quadrature consumer; agrees with the three reference routes to
    /// the oracle tolerance.
    pub fn eval(&self, z: Complex64) -> LogComplex {
        let (z0, idx) = self.lattice.reduce(z);
        let base = if z0.re == 0.0 && z0.im == 0.0 {
            LogComplex::zero()
        } else {
            LogComplex::from_complex(z0).mul_exp(self.cell_log_sigma_over_z(z0))
        };
        self.apply_quasi_factor(base, z0, idx)
    }

    /// log(sigma(z0)/z0) for z0 in the closed fundamental cell.
    pub(crate) fn cell_log_sigma_over_z(&self, z0: Complex64) -> Complex64 {
        let t = z0 / self.lattice.omega1();
        debug_assert!(t.norm_sqr() <= 0.5 + 1e-9, "cell series needs |z0| <= w1/sqrt(2)");
        let w = t.powi(4);
        let g = unit_eisenstein();
        let mut acc = Complex64::new(0.0, 0.0);
        for j in (1..=CELL_SERIES_TERMS).rev() {
            acc = acc * w + Complex64::new(g[j - 1] / (4 * j) as f64, 0.0);
        }
        -(acc * w)
    }

    pub(crate) fn apply_quasi_factor(
        &self,
        base: LogComplex,
        z0: Complex64,
        idx: LatticeIndex,
    ) -> LogComplex {
        if idx.m == 0 && idx.n == 0 {
            return base;
        }
        let w = self.lattice.point(idx);
        let mut v = base.mul_exp(self.eta(idx) * (z0 + 0.5 * w));
        if self.sign(idx) < 0.0 {
            v = v.negate();
        }
        v
    }

    /// Theta-series route, independent of the product machinery:
    /// sigma(z) = (w1/pi) exp(alpha z^2/2) theta1(pi z/w1, q)/theta1'(0, q),
    /// q = exp(-pi).
    pub fn eval_theta(&self, z: Complex64) -> LogComplex {
        let w1 = self.lattice.omega1();
        let alpha = self.lattice.alpha();
        let v = z * (PI / w1);
        let theta = theta1_log(v);
        if theta.is_zero() {
            return theta;
        }
        let prefactor = (w1 / (PI * theta1_prime_zero())).ln();
        let zz = z * z;
        theta.mul_exp(Complex64::new(
            0.5 * alpha * zz.re + prefactor,
            0.5 * alpha * zz.im,
        ))
    }

    /// weighted_mag of sigma itself at z, via the production route.
    pub fn weighted_mag_at(&self, z: Complex64) -> f64 {
        weighted_mag(self.eval(z), z, self.lattice.alpha())
    }
}

/// log(1 - u) + u + u^2/2 without cancellation: the power series
/// -sum_{k>=3} u^k/k for small |u|, the direct expression otherwise.
fn canonical_term(u: Complex64) -> Complex64 {
    if u.norm_sqr() <= 0.25 {
        let mut power = u * u * u;
        let mut k = 3.0_f64;
        let mut s = Complex64::new(0.0, 0.0);
        loop {
            let add = power / k;
            s += add;
            if add.norm_sqr() <= 1e-64 * s.norm_sqr() || k >= 200.0 {
                break;
            }
            power *= u;
            k += 1.0;
        }
        -s
    } else {
        (Complex64::new(1.0, 0.0) - u).ln() + u + 0.5 * u * u
    }
}

/// Observed noise scale of the G - S subtractions, a few ulp of G plus
/// accumulation effects.
const COMP_NOISE: f64 = 3e-15;

/// Error left by omitting the order-4j correction entirely: the true tail
/// magnitude |T_4j| * |z|^(4j) / (4j), with |T_4j| <= 8 / ((4j-2) M^(4j-2) w1^(4j)).
fn skip_err(w1: f64, ring: u32, z_abs: f64, j: i32) -> f64 {
    let m = ring as f64;
    8.0 / ((4 * j - 2) as f64 * (4 * j) as f64) * (z_abs / w1).powi(4 * j)
        / m.powi(4 * j - 2)
}

/// Error left by applying the correction computed in doubles.
fn comp_err(w1: f64, z_abs: f64, j: i32) -> f64 {
    COMP_NOISE * unit_eisenstein()[(j - 1) as usize] * (z_abs / w1).powi(4 * j)
        / (4 * j) as f64
}

fn comp_beats_skip(w1: f64, ring: u32, z_abs: f64, j: i32) -> bool {
    comp_err(w1, z_abs, j) < skip_err(w1, ring, z_abs, j)
}

/// Bound on the relative error of the compensated product truncated at
/// `ring`, for arguments of magnitude `z_abs`. The first always-omitted
/// Eisenstein order is 16; orders 8 and 12 contribute whichever is smaller
/// of their tail and their subtraction noise, order 4 its noise floor.
/// Ring r holds 8r points at distance >= r*w1.
pub fn product_tail_bound(w1: f64, ring: u32, z_abs: f64) -> f64 {
    if z_abs == 0.0 {
        return 0.0;
    }
    let m = ring as f64;
    let q4 = (z_abs / (m * w1)).powi(4);
    if q4 >= 0.9 {
        return f64::INFINITY;
    }
    let t16 = (z_abs / w1).powi(16) / 16.0 * 8.0 / (14.0 * m.powi(14));
    let mut bound = 2.0 * t16 / (1.0 - q4) + comp_err(w1, z_abs, 1);
    for j in [2, 3] {
        bound += skip_err(w1, ring, z_abs, j).min(comp_err(w1, z_abs, j));
    }
    bound
}

/// Smallest ring whose tail bound at |z| = radius is within tol.
pub fn required_ring(w1: f64, radius: f64, tol: f64) -> Option<u32> {
    (1..=4096).find(|&ring| product_tail_bound(w1, ring, radius) <= tol)
}

/// theta1'(0, q) = 2 sum (-1)^n (2n+1) q^((n+1/2)^2) at q = exp(-pi).
fn theta1_prime_zero() -> f64 {
    static VALUE: OnceLock<f64> = OnceLock::new();
    *VALUE.get_or_init(|| {
        let mut s = 0.0;
        for n in 0..8 {
            let nf = n as f64 + 0.5;
            let term = (2.0 * n as f64 + 1.0) * (-PI * nf * nf).exp();
            s += if n % 2 == 0 { term } else { -term };
        }
        2.0 * s
    })
}

/// theta1(v, q = exp(-pi)) as a LogComplex, overflow-safe in Im v.
///
/// Terms are 2 (-1)^n q^((n+1/2)^2) sin((2n+1) v). Each is accumulated at the
/// scale of the largest term: with s = |Im v| the log-coefficient of term n
/// is l_n = -pi (n+1/2)^2 + (2n+1) s, and sin((2n+1)v) e^(-(2n+1)s) is
/// computable directly. Truncation: next term below 1e-16 of the partial sum.
fn theta1_log(v: Complex64) -> LogComplex {
    let s = v.im.abs();
    let l = |n: f64| -> f64 { -PI * (n + 0.5) * (n + 0.5) + (2.0 * n + 1.0) * s };
    // l_n peaks near n = s/pi - 1/2 and decays quadratically after.
    let peak = ((s / PI - 0.5).ceil().max(0.0)) as usize;
    let mut big = l(0.0);
    for n in 0..=peak + 1 {
        big = big.max(l(n as f64));
    }
    let mut sum = Complex64::new(0.0, 0.0);
    let mut n = 0usize;
    loop {
        let nf = n as f64;
        let coeff = (l(nf) - big).exp();
        let m = 2.0 * nf + 1.0;
        let x = m * v.re;
        let y = m * v.im;
        // sin(x + iy) e^(-|y|) = sin x (1+e^(-2|y|))/2 + i cos x sgn(y)(1-e^(-2|y|))/2
        let d = (-2.0 * y.abs()).exp();
        let scaled_sin = Complex64::new(
            x.sin() * 0.5 * (1.0 + d),
            x.cos() * y.signum() * 0.5 * (1.0 - d),
        );
        let term = coeff * scaled_sin;
        sum += if n % 2 == 0 { term } else { -term };
        let next = (l(nf + 1.0) - big).exp();
        if n > peak && next < 1e-16 * sum.norm().max(1e-30) {
            break;
        }
        n += 1;
        if n > 4000 {
            break;
        }
    }
    if sum.re == 0.0 && sum.im == 0.0 {
        return LogComplex::zero();
    }
    LogComplex::new(big + 2.0_f64.ln() + sum.norm().ln(), sum.arg())
}
