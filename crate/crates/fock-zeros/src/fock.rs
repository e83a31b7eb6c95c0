//! Weighted p-norm quadrature over lattice cells.
//!
//! For finite p the p-th norm power is (alpha/pi) times the integral of
//! exp(p * weighted_mag) over the plane, computed cell by cell with
//! tensor-product Gauss-Legendre rules and grouped into Chebyshev rings.
//! Convergence is classified from the decay exponent of the per-ring
//! contributions: a least-squares fit of ln(contribution) against ln(ring)
//! over the trailing window gives a slope s, and the ring sums behave like
//! r^s, so the series converges iff s < -1. The verdict bands around that
//! threshold are
//!
//! ```text
//! s <  -1 - margin       CONVERGENT
//! s in [-1-margin, -1-margin/2)   INCONCLUSIVE
//! s >= -1 - margin/2     DIVERGENT
//! ```
//!
//! asymmetric because the interesting boundary cases sit exactly at s = -1
//! and belong on the divergent side. CONVERGENT estimates extrapolate the
//! fitted power law past the last ring and report a finite norm.
//!
//! p = inf is served by `sup_norm`: a per-cell grid search over the same
//! rings with local refinement, a single-cell shortcut when the weighted
//! magnitude is lattice-periodic, and a growth flag when the per-ring maxima
//! keep rising through the outer window.

use crate::lattice::{Cell, FockParams, LatticeError, LatticeIndex, PExponent, SquareLattice};
use crate::logcx::LogComplex;
use crate::quad::gauss_legendre;
use crate::sigma::{weighted_mag, SigmaError, SigmaEvaluator};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FockError {
    #[error("quadrature spec invalid: {0}")]
    InvalidQuadratureSpec(String),
    #[error("norm estimation requires finite p; use the sup norm for p = inf")]
    NormRequiresFiniteP,
    #[error("embedding demo requires alpha < beta, got alpha = {alpha}, beta = {beta}")]
    EmbeddingRequiresOrderedWeights { alpha: f64, beta: f64 },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Sigma(#[from] SigmaError),
}

/// Anything with a log-space value, a lattice that partitions the plane for
/// quadrature, and a periodicity hint for the sup search.
pub trait Evaluable: Sync {
    fn eval_log(&self, z: Complex64) -> LogComplex;
    fn natural_lattice(&self) -> &SquareLattice;
    /// Whether |f| exp(-alpha |z|^2 / 2), alpha of the natural lattice, is
    /// invariant under lattice translations.
    fn lattice_periodic(&self) -> bool {
        false
    }
    /// log |f(z)| - alpha |z|^2 / 2 in the weight `alpha`.
    fn weighted_mag(&self, z: Complex64, alpha: f64) -> f64 {
        weighted_mag(self.eval_log(z), z, alpha)
    }
}

impl Evaluable for SigmaEvaluator {
    fn eval_log(&self, z: Complex64) -> LogComplex {
        self.eval(z)
    }
    fn natural_lattice(&self) -> &SquareLattice {
        self.lattice()
    }
    fn lattice_periodic(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub order: usize,
    pub max_ring: u32,
    pub fit_window: u32,
    pub exponent_margin: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            order: 24,
            max_ring: 24,
            fit_window: 8,
            exponent_margin: 0.3,
        }
    }
}

impl QuadratureSpec {
    pub fn new(order: usize, max_ring: u32, fit_window: u32) -> Result<Self, FockError> {
        let spec = QuadratureSpec {
            order,
            max_ring,
            fit_window,
            ..QuadratureSpec::default()
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_margin(mut self, margin: f64) -> Result<Self, FockError> {
        self.exponent_margin = margin;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<(), FockError> {
        if self.order < 4 || self.order > 512 {
            return Err(FockError::InvalidQuadratureSpec(format!(
                "order {} outside 4..=512",
                self.order
            )));
        }
        if self.fit_window < 3 {
            return Err(FockError::InvalidQuadratureSpec(format!(
                "fit window {} below 3",
                self.fit_window
            )));
        }
        if self.max_ring < self.fit_window + 2 {
            return Err(FockError::InvalidQuadratureSpec(format!(
                "max ring {} must be at least fit window + 2 = {}",
                self.max_ring,
                self.fit_window + 2
            )));
        }
        if !(self.exponent_margin > 0.0 && self.exponent_margin < 2.0) {
            return Err(FockError::InvalidQuadratureSpec(format!(
                "exponent margin {} outside (0, 2)",
                self.exponent_margin
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Convergent,
    Divergent,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Convergent => "CONVERGENT",
            Verdict::Divergent => "DIVERGENT",
            Verdict::Inconclusive => "INCONCLUSIVE",
        })
    }
}

#[derive(Debug, Clone)]
pub struct NormEstimate {
    pub alpha: f64,
    pub p: f64,
    pub verdict: Verdict,
    /// (alpha/pi) * sum of cell integrals of exp(p * weighted_mag), per ring.
    pub ring_contributions: Vec<f64>,
    pub partial_sum: f64,
    /// Decay exponent fitted over the trailing window; None when the
    /// contributions underflow, overflow, or vanish.
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub fit_window: u32,
    /// Extrapolated contribution of the rings beyond max_ring.
    pub tail: Option<f64>,
    /// p-th root of partial_sum + tail for convergent estimates.
    pub norm: Option<f64>,
}

/// Raw tensor Gauss-Legendre integral of exp(p * weighted_mag) over one
/// cell; no alpha/pi factor.
pub fn cell_integral<F: Evaluable + ?Sized>(
    f: &F,
    cell: Cell,
    p: f64,
    alpha: f64,
    order: usize,
) -> f64 {
    let base = gauss_legendre(order);
    integral_with_nodes(f, cell, p, alpha, &base)
}

fn integral_with_nodes<F: Evaluable + ?Sized>(
    f: &F,
    cell: Cell,
    p: f64,
    alpha: f64,
    (nodes, weights): &(Vec<f64>, Vec<f64>),
) -> f64 {
    let h = cell.half_width;
    let mut total = 0.0;
    for (ti, wi) in nodes.iter().zip(weights) {
        let x = cell.center.re + h * ti;
        let mut row = 0.0;
        for (tj, wj) in nodes.iter().zip(weights) {
            let y = cell.center.im + h * tj;
            let wm = f.weighted_mag(Complex64::new(x, y), alpha);
            let v = (p * wm).exp();
            row += wj * v;
        }
        total += wi * row;
    }
    total * h * h
}

/// When the trailing window has decayed this far below the peak ring, the
/// omitted tail is beyond double precision relative to the partial sum.
const FAST_DECAY: f64 = 1e-250;

pub fn norm_estimate<F: Evaluable + ?Sized>(
    f: &F,
    params: FockParams,
    spec: &QuadratureSpec,
) -> Result<NormEstimate, FockError> {
    spec.validate()?;
    let p = params.p.finite().ok_or(FockError::NormRequiresFiniteP)?;
    let lat = *f.natural_lattice();
    let alpha = params.alpha;
    let base = gauss_legendre(spec.order);

    let mut tagged: Vec<(u32, LatticeIndex)> = Vec::new();
    for r in 0..=spec.max_ring {
        for idx in lat.ring_indices(r) {
            tagged.push((r, idx));
        }
    }
    let raw: Vec<f64> = tagged
        .par_iter()
        .map(|&(_, idx)| integral_with_nodes(f, lat.cell(idx), p, alpha, &base))
        .collect();

    let scale = alpha / PI;
    let mut ring_contributions = vec![0.0_f64; spec.max_ring as usize + 1];
    for (&(r, _), &v) in tagged.iter().zip(&raw) {
        ring_contributions[r as usize] += v;
    }
    for c in &mut ring_contributions {
        *c *= scale;
    }
    let partial_sum: f64 = ring_contributions.iter().sum();

    let mut est = NormEstimate {
        alpha,
        p,
        verdict: Verdict::Divergent,
        ring_contributions,
        partial_sum,
        slope: None,
        intercept: None,
        fit_window: spec.fit_window,
        tail: None,
        norm: None,
    };

    if !partial_sum.is_finite() {
        return Ok(est);
    }
    let peak = est
        .ring_contributions
        .iter()
        .cloned()
        .fold(0.0_f64, f64::max);
    if peak == 0.0 {
        est.verdict = Verdict::Convergent;
        est.tail = Some(0.0);
        est.norm = Some(0.0);
        return Ok(est);
    }
    let w = spec.fit_window as usize;
    let first = est.ring_contributions.len() - w;
    let window = &est.ring_contributions[first..];
    let wmax = window.iter().cloned().fold(0.0_f64, f64::max);
    if wmax <= FAST_DECAY * peak {
        est.verdict = Verdict::Convergent;
        est.tail = Some(0.0);
        est.norm = Some(partial_sum.powf(1.0 / p));
        return Ok(est);
    }

    let floor = peak * 1e-290;
    let xs: Vec<f64> = (first..est.ring_contributions.len())
        .map(|r| (r as f64).ln())
        .collect();
    let ys: Vec<f64> = window.iter().map(|&v| v.max(floor).ln()).collect();
    let (slope, intercept) = fit_line(&xs, &ys);
    est.slope = Some(slope);
    est.intercept = Some(intercept);

    let margin = spec.exponent_margin;
    est.verdict = if slope < -1.0 - margin {
        Verdict::Convergent
    } else if slope < -1.0 - margin / 2.0 {
        Verdict::Inconclusive
    } else {
        Verdict::Divergent
    };
    if est.verdict == Verdict::Convergent {
        // In log space: extreme fitted slopes otherwise produce inf * 0.
        let edge = spec.max_ring as f64 + 0.5;
        let tail = (intercept + (slope + 1.0) * edge.ln() - (-slope - 1.0).ln()).exp();
        est.tail = Some(tail);
        est.norm = Some((partial_sum + tail).powf(1.0 / p));
    }
    Ok(est)
}

fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[derive(Debug, Clone)]
pub enum SupNorm {
    Finite {
        log_sup: f64,
        sup: f64,
        argmax: Complex64,
        ring_maxima: Vec<f64>,
    },
    /// Per-ring maxima still rising through the outer window.
    Unbounded { ring_maxima: Vec<f64> },
}

impl SupNorm {
    pub fn is_unbounded(&self) -> bool {
        matches!(self, SupNorm::Unbounded { .. })
    }
    pub fn log_sup(&self) -> Option<f64> {
        match self {
            SupNorm::Finite { log_sup, .. } => Some(*log_sup),
            SupNorm::Unbounded { .. } => None,
        }
    }
}

/// Net rise of the trailing per-ring maxima, in log units, that flags
/// unbounded growth. Polynomial growth of degree >= 1 rises by at least
/// ln(24/20) = 0.18 over the last five default rings.
const GROWTH_RISE: f64 = 0.1;

pub fn sup_norm<F: Evaluable + ?Sized>(f: &F, alpha: f64, spec: &QuadratureSpec) -> SupNorm {
    let lat = *f.natural_lattice();
    let single_cell =
        f.lattice_periodic() && (alpha - lat.alpha()).abs() <= 1e-12 * lat.alpha().abs();
    let max_ring = if single_cell { 0 } else { spec.max_ring };
    let k = spec.order.max(8);

    let mut ring_maxima = Vec::with_capacity(max_ring as usize + 1);
    let mut best = f64::NEG_INFINITY;
    let mut best_at = Complex64::new(0.0, 0.0);
    for r in 0..=max_ring {
        let cells = lat.ring_indices(r);
        let found: Vec<(f64, Complex64)> = cells
            .par_iter()
            .map(|&idx| coarse_cell_max(f, lat.cell(idx), alpha, k))
            .collect();
        let mut ring_best = f64::NEG_INFINITY;
        for (v, at) in found {
            if v > ring_best {
                ring_best = v;
            }
            if v > best {
                best = v;
                best_at = at;
            }
        }
        ring_maxima.push(ring_best);
    }

    if !single_cell && ring_maxima.len() >= 5 {
        let tail = &ring_maxima[ring_maxima.len() - 5..];
        let rising = tail.windows(2).all(|w| w[1] > w[0]);
        if rising && tail[4] - tail[0] >= GROWTH_RISE {
            return SupNorm::Unbounded { ring_maxima };
        }
    }

    // Local refinement around the best grid point.
    let mut h = lat.cell(LatticeIndex::new(0, 0)).half_width / (k as f64 - 1.0) * 2.0;
    let mut center = best_at;
    for _ in 0..16 {
        let mut local_best = best;
        let mut local_at = center;
        for i in 0..9 {
            for j in 0..9 {
                let z = Complex64::new(
                    center.re - h + 2.0 * h * i as f64 / 8.0,
                    center.im - h + 2.0 * h * j as f64 / 8.0,
                );
                let v = f.weighted_mag(z, alpha);
                if v > local_best {
                    local_best = v;
                    local_at = z;
                }
            }
        }
        best = local_best;
        center = local_at;
        h *= 0.35;
    }

    SupNorm::Finite {
        log_sup: best,
        sup: best.exp(),
        argmax: center,
        ring_maxima,
    }
}

fn coarse_cell_max<F: Evaluable + ?Sized>(
    f: &F,
    cell: Cell,
    alpha: f64,
    k: usize,
) -> (f64, Complex64) {
    let h = cell.half_width;
    let mut best = f64::NEG_INFINITY;
    let mut at = cell.center;
    for i in 0..k {
        let x = cell.center.re - h + 2.0 * h * i as f64 / (k as f64 - 1.0);
        for j in 0..k {
            let y = cell.center.im - h + 2.0 * h * j as f64 / (k as f64 - 1.0);
            let z = Complex64::new(x, y);
            let v = f.weighted_mag(z, alpha);
            if v > best {
                best = v;
                at = z;
            }
        }
    }
    (best, at)
}

#[derive(Debug, Clone, Copy)]
pub struct PointwiseCheck {
    /// max over samples of weighted_mag(z) - ln(norm); <= 0 when the
    /// pointwise bound |f(z)| exp(-alpha|z|^2/2) <= norm holds.
    pub max_gap: f64,
    pub worst: Complex64,
    pub samples: u32,
}

/// Samples the annulus 0.25 w1 <= |z| <= 3 w1 and reports the worst margin
/// of the pointwise estimate against the given norm.
pub fn pointwise_estimate_check<F: Evaluable + ?Sized>(
    f: &F,
    alpha: f64,
    norm: f64,
    samples: u32,
    seed: u64,
) -> PointwiseCheck {
    let w1 = f.natural_lattice().omega1();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ln_norm = norm.ln();
    let mut max_gap = f64::NEG_INFINITY;
    let mut worst = Complex64::new(0.0, 0.0);
    for _ in 0..samples {
        let radius = w1 * (0.25 + 2.75 * rng.gen::<f64>());
        let angle = 2.0 * PI * rng.gen::<f64>();
        let z = Complex64::from_polar(radius, angle);
        let gap = f.weighted_mag(z, alpha) - ln_norm;
        if gap > max_gap {
            max_gap = gap;
            worst = z;
        }
    }
    PointwiseCheck {
        max_gap,
        worst,
        samples,
    }
}

#[derive(Debug, Clone)]
pub enum SpaceCheck {
    Norm(NormEstimate),
    Sup(SupNorm),
}

impl SpaceCheck {
    pub fn is_divergent(&self) -> bool {
        match self {
            SpaceCheck::Norm(n) => n.verdict == Verdict::Divergent,
            SpaceCheck::Sup(s) => s.is_unbounded(),
        }
    }
    pub fn is_convergent(&self) -> bool {
        match self {
            SpaceCheck::Norm(n) => n.verdict == Verdict::Convergent,
            SpaceCheck::Sup(s) => !s.is_unbounded(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EmbeddingDemo {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// sigma_gamma measured in the smaller weight alpha: diverges.
    pub lower: SpaceCheck,
    /// sigma_gamma measured in the larger weight beta: converges.
    pub upper: SpaceCheck,
}

/// The lattice of the intermediate weight gamma = (alpha+beta)/2 is a zero
/// set whose sigma lies in every weight-beta space but no weight-alpha one;
/// this computes both sides.
pub fn embedding_demo(
    alpha: f64,
    beta: f64,
    p: PExponent,
    q: PExponent,
    spec: &QuadratureSpec,
) -> Result<EmbeddingDemo, FockError> {
    if !(alpha < beta) {
        return Err(FockError::EmbeddingRequiresOrderedWeights { alpha, beta });
    }
    let gamma = 0.5 * (alpha + beta);
    let ev = SigmaEvaluator::auto(SquareLattice::new(gamma)?, 1e-10)?;
    let side = |weight: f64, exp: PExponent| -> Result<SpaceCheck, FockError> {
        Ok(match exp {
            PExponent::Infinity => SpaceCheck::Sup(sup_norm(&ev, weight, spec)),
            PExponent::Finite(v) => {
                SpaceCheck::Norm(norm_estimate(&ev, FockParams::new(weight, v)?, spec)?)
            }
        })
    };
    Ok(EmbeddingDemo {
        alpha,
        beta,
        gamma,
        lower: side(alpha, p)?,
        upper: side(beta, q)?,
    })
}
