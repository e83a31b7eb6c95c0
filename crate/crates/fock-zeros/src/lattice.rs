//! Square lattice geometry for the Gaussian weight parameter alpha.
//!
//! The lattice is
//!
//! ```text
//! L = { w_mn = sqrt(pi/alpha) * (m + i*n) : m, n integers }
//! ```
//!
//! with generator `w1 = sqrt(pi/alpha)`. Each lattice point owns the closed
//! square cell of side `w1` centered on it, so the cell area is `pi/alpha`.
//! Cells tile the plane; membership on shared edges follows the half-open
//! convention `[-w1/2, w1/2)` in both coordinates.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

/// Largest admissible |m|, |n|. Keeps `m * w1` a faithful double product and
/// bounds every internal enumeration.
pub const MAX_INDEX: i64 = 1 << 20;

#[derive(Debug, Error, PartialEq)]
pub enum LatticeError {
    #[error("alpha must be positive and finite, got {0}")]
    InvalidAlpha(f64),
    #[error("p must be positive, got {0}")]
    InvalidP(f64),
    #[error("lattice index ({0}, {1}) exceeds the supported bound {MAX_INDEX}")]
    IndexOutOfRange(i64, i64),
}

/// Integration/growth exponent: a finite positive p or infinity (sup norm).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PExponent {
    Finite(f64),
    Infinity,
}

impl PExponent {
    pub fn finite(self) -> Option<f64> {
        match self {
            PExponent::Finite(p) => Some(p),
            PExponent::Infinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, PExponent::Infinity)
    }
}

impl std::fmt::Display for PExponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PExponent::Finite(p) => write!(f, "{p}"),
            PExponent::Infinity => write!(f, "inf"),
        }
    }
}

impl Serialize for PExponent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            PExponent::Finite(p) => s.serialize_f64(*p),
            PExponent::Infinity => s.serialize_str("inf"),
        }
    }
}

/// Weight parameter alpha together with the exponent p of the target space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockParams {
    pub alpha: f64,
    pub p: PExponent,
}

impl FockParams {
    pub fn new(alpha: f64, p: f64) -> Result<Self, LatticeError> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(LatticeError::InvalidAlpha(alpha));
        }
        if !(p > 0.0) {
            return Err(LatticeError::InvalidP(p));
        }
        let p = if p.is_infinite() {
            PExponent::Infinity
        } else {
            PExponent::Finite(p)
        };
        Ok(FockParams { alpha, p })
    }

    pub fn sup(alpha: f64) -> Result<Self, LatticeError> {
        Self::new(alpha, f64::INFINITY)
    }
}

/// Lattice index (m, n) naming the point `w1 * (m + i*n)` and its cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct LatticeIndex {
    pub m: i64,
    pub n: i64,
}

impl LatticeIndex {
    pub fn new(m: i64, n: i64) -> Self {
        LatticeIndex { m, n }
    }

    /// Chebyshev ring number: max(|m|, |n|).
    pub fn ring(self) -> i64 {
        self.m.abs().max(self.n.abs())
    }

    pub fn checked(m: i64, n: i64) -> Result<Self, LatticeError> {
        if m.abs() > MAX_INDEX || n.abs() > MAX_INDEX {
            return Err(LatticeError::IndexOutOfRange(m, n));
        }
        Ok(LatticeIndex { m, n })
    }
}

/// Axis-aligned square cell, described by its center and half side length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub center: Complex64,
    pub half_width: f64,
}

/// The square lattice for a given alpha.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquareLattice {
    alpha: f64,
    omega1: f64,
}

impl SquareLattice {
    pub fn new(alpha: f64) -> Result<Self, LatticeError> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(LatticeError::InvalidAlpha(alpha));
        }
        Ok(SquareLattice {
            alpha,
            omega1: (std::f64::consts::PI / alpha).sqrt(),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Generator w1 = sqrt(pi/alpha); also the cell side length.
    pub fn omega1(&self) -> f64 {
        self.omega1
    }

    /// The lattice point w_mn = w1 * (m + i*n).
    pub fn point(&self, idx: LatticeIndex) -> Complex64 {
        debug_assert!(idx.m.abs() <= MAX_INDEX && idx.n.abs() <= MAX_INDEX);
        Complex64::new(self.omega1 * idx.m as f64, self.omega1 * idx.n as f64)
    }

    /// The cell owned by w_mn.
    pub fn cell(&self, idx: LatticeIndex) -> Cell {
        Cell {
            center: self.point(idx),
            half_width: 0.5 * self.omega1,
        }
    }

    /// Indices of ring r in a fixed order: ring 0 is [(0,0)]; ring r >= 1
    /// walks the square boundary counterclockwise starting at (r, -r), i.e.
    /// right edge upward, top edge leftward, left edge downward, bottom edge
    /// rightward. Ring r >= 1 holds exactly 8r indices.
    pub fn ring_indices(&self, r: u32) -> Vec<LatticeIndex> {
        let r = r as i64;
        if r == 0 {
            return vec![LatticeIndex::new(0, 0)];
        }
        let mut out = Vec::with_capacity(8 * r as usize);
        for n in -r..=r {
            out.push(LatticeIndex::new(r, n));
        }
        for m in (-r..r).rev() {
            out.push(LatticeIndex::new(m, r));
        }
        for n in (-r..r).rev() {
            out.push(LatticeIndex::new(-r, n));
        }
        for m in -r + 1..r {
            out.push(LatticeIndex::new(m, -r));
        }
        out
    }

    /// All indices of rings 0..=max_ring, grouped ring by ring. The total
    /// count is (2*max_ring + 1)^2.
    pub fn enumerate_rings(&self, max_ring: u32) -> Vec<LatticeIndex> {
        let mut out = Vec::with_capacity((2 * max_ring as usize + 1).pow(2));
        for r in 0..=max_ring {
            out.extend(self.ring_indices(r));
        }
        out
    }

    /// Translate z into the fundamental cell: returns (z0, idx) with
    /// z = z0 + point(idx) and both coordinates of z0 in [-w1/2, w1/2).
    /// Points on the upper cell boundary therefore belong to the neighbor.
    pub fn reduce(&self, z: Complex64) -> (Complex64, LatticeIndex) {
        let (x0, m) = self.reduce_axis(z.re);
        let (y0, n) = self.reduce_axis(z.im);
        assert!(
            m.abs() <= MAX_INDEX && n.abs() <= MAX_INDEX,
            "reduce: |z| too large for the supported index range"
        );
        (Complex64::new(x0, y0), LatticeIndex::new(m, n))
    }

    fn reduce_axis(&self, x: f64) -> (f64, i64) {
        let h = 0.5 * self.omega1;
        let mut m = (x / self.omega1 + 0.5).floor() as i64;
        let mut x0 = x - m as f64 * self.omega1;
        // Rounding in the floor argument can land x0 on the wrong side of a
        // half-open boundary; one correction step restores the invariant.
        if x0 < -h {
            m -= 1;
            x0 = x - m as f64 * self.omega1;
        } else if x0 >= h {
            m += 1;
            x0 = x - m as f64 * self.omega1;
        }
        (x0, m)
    }
}
