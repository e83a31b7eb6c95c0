//! Complex values carried in log-magnitude/argument form.
//!
//! A `LogComplex` represents `exp(log_mag) * exp(i*arg)`. `log_mag = -inf`
//! encodes an exact zero; `+inf` marks a pole left over from dividing a
//! nonzero value by zero. Products and quotients act additively on `log_mag`
//! and on `arg` (mod 2*pi), so magnitudes far outside double range stay
//! representable.

use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogComplex {
    /// ln of the magnitude; -inf encodes zero.
    pub log_mag: f64,
    /// Argument normalized to (-pi, pi]. Zero for exact zeros.
    pub arg: f64,
}

/// Map any angle to the branch (-pi, pi].
pub fn normalize_arg(a: f64) -> f64 {
    if !a.is_finite() {
        return 0.0;
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut r = a % two_pi;
    if r <= -std::f64::consts::PI {
        r += two_pi;
    } else if r > std::f64::consts::PI {
        r -= two_pi;
    }
    r
}

impl LogComplex {
    pub fn zero() -> Self {
        LogComplex {
            log_mag: f64::NEG_INFINITY,
            arg: 0.0,
        }
    }

    pub fn one() -> Self {
        LogComplex {
            log_mag: 0.0,
            arg: 0.0,
        }
    }

    pub fn new(log_mag: f64, arg: f64) -> Self {
        LogComplex {
            log_mag,
            arg: normalize_arg(arg),
        }
    }

    pub fn from_complex(w: Complex64) -> Self {
        if w.re == 0.0 && w.im == 0.0 {
            return Self::zero();
        }
        LogComplex {
            log_mag: w.norm().ln(),
            arg: w.arg(),
        }
    }

    /// exp(c) as a LogComplex: log_mag = Re c, arg = Im c.
    pub fn from_exponent(c: Complex64) -> Self {
        LogComplex {
            log_mag: c.re,
            arg: normalize_arg(c.im),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.log_mag == f64::NEG_INFINITY
    }

    pub fn is_pole(&self) -> bool {
        self.log_mag == f64::INFINITY
    }

    pub fn mul(self, other: LogComplex) -> LogComplex {
        if self.is_zero() || other.is_zero() {
            return LogComplex::zero();
        }
        LogComplex::new(self.log_mag + other.log_mag, self.arg + other.arg)
    }

    pub fn div(self, other: LogComplex) -> LogComplex {
        if self.is_zero() && !other.is_zero() {
            return LogComplex::zero();
        }
        LogComplex::new(self.log_mag - other.log_mag, self.arg - other.arg)
    }

    /// Multiply by exp(c).
    pub fn mul_exp(self, c: Complex64) -> LogComplex {
        if self.is_zero() {
            return self;
        }
        LogComplex::new(self.log_mag + c.re, self.arg + c.im)
    }

    /// Flip the sign of the value.
    pub fn negate(self) -> LogComplex {
        if self.is_zero() {
            return self;
        }
        LogComplex::new(self.log_mag, self.arg + std::f64::consts::PI)
    }

    /// Back to a linear-scale complex number; saturates on overflow.
    pub fn to_complex(self) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        let r = self.log_mag.exp();
        Complex64::new(r * self.arg.cos(), r * self.arg.sin())
    }

    /// Relative difference |a/b - 1| between the represented values,
    /// computed without leaving log space until the final exp.
    pub fn rel_diff(self, other: LogComplex) -> f64 {
        if self.is_zero() && other.is_zero() {
            return 0.0;
        }
        if self.is_zero() || other.is_zero() {
            return f64::INFINITY;
        }
        let dl = self.log_mag - other.log_mag;
        let da = normalize_arg(self.arg - other.arg);
        // a/b - 1 = exp(dl + i*da) - 1
        let re = dl.exp_m1() * da.cos() - 2.0 * (da / 2.0).sin().powi(2);
        let im = (1.0 + dl.exp_m1()) * da.sin();
        (re * re + im * im).sqrt()
    }
}
