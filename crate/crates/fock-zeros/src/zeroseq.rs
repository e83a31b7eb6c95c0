//! Zero sequences obtained by modifying the square lattice, the dimension of
//! the space of functions vanishing on them, and certificates that a
//! sequence is a maximal zero set.
//!
//! A sequence is the lattice with finitely many points removed and finitely
//! many points (with multiplicities) added. Writing r for the number of
//! removals, a for the total added multiplicity, and N(p) = floor(2/p) + 1
//! for the least N with N p > 2, the space of weight-alpha functions
//! vanishing on the sequence has dimension
//!
//! ```text
//! k = max(0, r - a + 1)           p = inf
//! k = max(0, r - a - N(p) + 1)    p < inf
//! ```
//!
//! spanned by sigma * prod (z - b)^m * z^j / prod (z - w_i), j < k. The
//! sequence is a uniqueness set exactly when k = 0 and a maximal zero set
//! exactly when k = 1: then adding any point forces uniqueness.

use crate::fock::{norm_estimate, sup_norm, Evaluable, FockError, QuadratureSpec, SpaceCheck};
use crate::lattice::{FockParams, LatticeError, LatticeIndex, PExponent, SquareLattice};
use crate::linalg::{nullspace, CMatrix};
use crate::logcx::LogComplex;
use crate::sigma::{SigmaError, SigmaEvaluator};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ZeroSeqError {
    #[error("sequence built over alpha = {seq_alpha} but the space has alpha = {params_alpha}; \
             comparing zero sets across different weights is not meaningful here")]
    MismatchedAlpha { seq_alpha: f64, params_alpha: f64 },
    #[error("lattice point ({m}, {n}) removed more than once")]
    DuplicateRemoval { m: i64, n: i64 },
    #[error("added point {at} has zero multiplicity")]
    InvalidMultiplicity { at: usize },
    #[error("sequence has dimension k = {k}, not 1; not a maximal zero set candidate")]
    NotMaximal { k: u32 },
    #[error("witness system rank {rank} below the {needed} independent constraints; \
             constraint points degenerate against this basis")]
    DegenerateBasis { rank: usize, needed: usize },
    #[error("constraint multiplicity {multiplicity} unsupported; finite differences are \
             implemented through second derivatives")]
    UnsupportedMultiplicity { multiplicity: u32 },
    #[error("verification failed at clause {clause}: {detail}")]
    VerificationFailed {
        clause: &'static str,
        detail: String,
    },
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Sigma(#[from] SigmaError),
}

/// How close an added point must be to a lattice point to count as that
/// lattice point, relative to the lattice constant.
const MATCH_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct ZeroSequence {
    lattice: SquareLattice,
    removed: Vec<LatticeIndex>,
    added: Vec<(Complex64, u32)>,
}

impl ZeroSequence {
    /// The unmodified lattice.
    pub fn full(lattice: SquareLattice) -> Self {
        ZeroSequence {
            lattice,
            removed: Vec::new(),
            added: Vec::new(),
        }
    }

    pub fn new(
        lattice: SquareLattice,
        removed: Vec<LatticeIndex>,
        added: Vec<(Complex64, u32)>,
    ) -> Result<Self, ZeroSeqError> {
        for (i, idx) in removed.iter().enumerate() {
            if removed[..i].contains(idx) {
                return Err(ZeroSeqError::DuplicateRemoval { m: idx.m, n: idx.n });
            }
            LatticeIndex::checked(idx.m, idx.n)?;
        }
        for (i, &(_, mult)) in added.iter().enumerate() {
            if mult == 0 {
                return Err(ZeroSeqError::InvalidMultiplicity { at: i });
            }
        }
        Ok(ZeroSequence {
            lattice,
            removed,
            added,
        })
    }

    pub fn lattice(&self) -> &SquareLattice {
        &self.lattice
    }

    pub fn removed(&self) -> &[LatticeIndex] {
        &self.removed
    }

    pub fn added(&self) -> &[(Complex64, u32)] {
        &self.added
    }

    pub fn removed_count(&self) -> u32 {
        self.removed.len() as u32
    }

    pub fn added_multiplicity(&self) -> u32 {
        self.added.iter().map(|&(_, m)| m).sum()
    }

    pub fn is_removed(&self, idx: LatticeIndex) -> bool {
        self.removed.contains(&idx)
    }

    /// Added points sitting on lattice points that were not removed; the
    /// zero there is then of multiplicity 1 + m and the dimension count
    /// treats the m added units like any other added point.
    pub fn stacked_added_points(&self) -> Vec<Complex64> {
        let tol = MATCH_TOL * self.lattice.omega1();
        self.added
            .iter()
            .filter_map(|&(b, _)| {
                let (z0, idx) = self.lattice.reduce(b);
                (z0.norm() <= tol && !self.is_removed(idx)).then_some(b)
            })
            .collect()
    }

    /// Merge points into the sequence. A point landing on a removed lattice
    /// point cancels that removal first; remaining multiplicity is added.
    /// Points landing on an existing added point merge multiplicities.
    pub fn add_points(&self, points: &[(Complex64, u32)]) -> ZeroSequence {
        let tol = MATCH_TOL * self.lattice.omega1();
        let mut removed = self.removed.clone();
        let mut added = self.added.clone();
        for &(b, mult) in points {
            let mut mult = mult;
            let (z0, idx) = self.lattice.reduce(b);
            if z0.norm() <= tol {
                if let Some(pos) = removed.iter().position(|&i| i == idx) {
                    removed.remove(pos);
                    mult -= 1;
                }
            }
            if mult == 0 {
                continue;
            }
            if let Some(slot) = added.iter_mut().find(|(c, _)| (*c - b).norm() <= tol) {
                slot.1 += mult;
            } else {
                added.push((b, mult));
            }
        }
        ZeroSequence {
            lattice: self.lattice,
            removed,
            added,
        }
    }
}

/// Least N with N p > 2.
pub fn smallest_n(p: f64) -> u32 {
    assert!(p > 0.0 && p.is_finite());
    (2.0 / p).floor() as u32 + 1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    UniquenessSet,
    ZeroSet { dim: u32 },
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Classification::UniquenessSet => write!(f, "UNIQUENESS_SET"),
            Classification::ZeroSet { dim } => write!(f, "ZERO_SET(dim {dim})"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DimensionReport {
    pub params: FockParams,
    /// N(p) for finite p.
    pub n: Option<u32>,
    pub removed: u32,
    pub added: u32,
    pub k: u32,
    pub classification: Classification,
    pub basis: Vec<CanonicalFunction>,
    /// Added points stacked on surviving lattice points.
    pub stacked: Vec<Complex64>,
}

pub fn dimension(
    seq: &ZeroSequence,
    params: FockParams,
) -> Result<DimensionReport, ZeroSeqError> {
    let seq_alpha = seq.lattice.alpha();
    if (seq_alpha - params.alpha).abs() > 1e-12 * seq_alpha {
        return Err(ZeroSeqError::MismatchedAlpha {
            seq_alpha,
            params_alpha: params.alpha,
        });
    }
    let r = seq.removed.len() as i64;
    let a = seq.added_multiplicity() as i64;
    let (n, excess) = match params.p {
        PExponent::Infinity => (None, r - a + 1),
        PExponent::Finite(p) => {
            let n = smallest_n(p);
            (Some(n), r - a - n as i64 + 1)
        }
    };
    let k = excess.max(0) as u32;
    let classification = if k == 0 {
        Classification::UniquenessSet
    } else {
        Classification::ZeroSet { dim: k }
    };
    let basis = if k > 0 {
        let ev = SigmaEvaluator::auto(seq.lattice, 1e-10)?;
        (0..k)
            .map(|j| CanonicalFunction {
                sigma: ev.clone(),
                removed: seq.removed.clone(),
                added: seq.added.clone(),
                power: j,
                poly: vec![Complex64::new(1.0, 0.0)],
            })
            .collect()
    } else {
        Vec::new()
    };
    Ok(DimensionReport {
        params,
        n,
        removed: r as u32,
        added: a as u32,
        k,
        classification,
        basis,
        stacked: seq.stacked_added_points(),
    })
}

/// sigma * prod (z - b)^m * z^power * poly(z) / prod (z - w_i), evaluated in
/// log space with the divisor at the reduced index cancelled symbolically:
/// the reduced route exposes sigma(z) as z0 * exp(...), and z0 is exactly
/// z - w_idx, so dividing by that factor never goes through a small
/// difference.
#[derive(Debug, Clone)]
pub struct CanonicalFunction {
    sigma: SigmaEvaluator,
    removed: Vec<LatticeIndex>,
    added: Vec<(Complex64, u32)>,
    power: u32,
    /// Coefficients c0 + c1 z + ..., lowest first; [1] when absent.
    poly: Vec<Complex64>,
}

fn lc_powi(v: LogComplex, m: u32) -> LogComplex {
    LogComplex::new(v.log_mag * m as f64, v.arg * m as f64)
}

impl CanonicalFunction {
    pub fn new(
        sigma: SigmaEvaluator,
        removed: Vec<LatticeIndex>,
        added: Vec<(Complex64, u32)>,
        power: u32,
    ) -> Self {
        CanonicalFunction {
            sigma,
            removed,
            added,
            power,
            poly: vec![Complex64::new(1.0, 0.0)],
        }
    }

    pub fn sigma_only(sigma: SigmaEvaluator) -> Self {
        Self::new(sigma, Vec::new(), Vec::new(), 0)
    }

    pub fn with_power(&self, power: u32) -> Self {
        let mut f = self.clone();
        f.power = power;
        f
    }

    pub fn with_poly(&self, poly: Vec<Complex64>) -> Self {
        let mut f = self.clone();
        f.poly = if poly.is_empty() {
            vec![Complex64::new(1.0, 0.0)]
        } else {
            poly
        };
        f
    }

    pub fn power(&self) -> u32 {
        self.power
    }

    pub fn eval(&self, z: Complex64) -> LogComplex {
        let lat = *self.sigma.lattice();
        let (z0, idx) = lat.reduce(z);
        let cancelled = self.removed.iter().filter(|&&i| i == idx).count() as i32;

        let mut v = LogComplex::from_exponent(self.sigma.cell_log_sigma_over_z(z0));
        let lead = 1 - cancelled;
        if lead != 0 {
            if z0.re == 0.0 && z0.im == 0.0 {
                if lead > 0 {
                    v = LogComplex::zero();
                } else {
                    // more divisors than the simple lattice zero provides
                    return LogComplex::new(f64::INFINITY, 0.0);
                }
            } else {
                let f = LogComplex::from_complex(z0);
                v = v.mul(LogComplex::new(
                    f.log_mag * lead as f64,
                    f.arg * lead as f64,
                ));
            }
        }
        v = self.sigma.apply_quasi_factor(v, z0, idx);
        for &i in &self.removed {
            if i != idx {
                v = v.div(LogComplex::from_complex(z - lat.point(i)));
            }
        }
        for &(b, m) in &self.added {
            v = v.mul(lc_powi(LogComplex::from_complex(z - b), m));
        }
        if self.power > 0 {
            v = v.mul(lc_powi(LogComplex::from_complex(z), self.power));
        }
        if self.poly.len() > 1 || self.poly[0] != Complex64::new(1.0, 0.0) {
            let mut acc = Complex64::new(0.0, 0.0);
            for &c in self.poly.iter().rev() {
                acc = acc * z + c;
            }
            v = v.mul(LogComplex::from_complex(acc));
        }
        v
    }

    pub fn describe(&self) -> String {
        let mut s = String::from("sigma");
        for i in &self.removed {
            s.push_str(&format!(" / (z - w({}, {}))", i.m, i.n));
        }
        for &(b, m) in &self.added {
            s.push_str(&format!(" * (z - ({:.6}{:+.6}i))^{}", b.re, b.im, m));
        }
        if self.power > 0 {
            s.push_str(&format!(" * z^{}", self.power));
        }
        if self.poly.len() > 1 || self.poly[0] != Complex64::new(1.0, 0.0) {
            let coeffs: Vec<String> = self
                .poly
                .iter()
                .map(|c| format!("{:.6}{:+.6}i", c.re, c.im))
                .collect();
            s.push_str(&format!(" * poly({})", coeffs.join(", ")));
        }
        s
    }
}

impl Evaluable for CanonicalFunction {
    fn eval_log(&self, z: Complex64) -> LogComplex {
        self.eval(z)
    }
    fn natural_lattice(&self) -> &SquareLattice {
        self.sigma.lattice()
    }
    fn lattice_periodic(&self) -> bool {
        self.removed.is_empty()
            && self.added.is_empty()
            && self.power == 0
            && self.poly.len() == 1
    }
}

#[derive(Debug, Clone)]
pub struct BasisVerification {
    /// One membership check per basis element, in basis order.
    pub element_checks: Vec<SpaceCheck>,
    /// The next power g z^k, which must fall outside the space.
    pub next_power_check: SpaceCheck,
    /// Worst weighted magnitude over the sampled points of the sequence.
    pub worst_sample_mag: f64,
    pub sampled_points: u32,
}

/// Clause (membership): every basis element lies in the space. Clause
/// (saturation): the basis extended by one more power does not. Clause
/// (vanishing): basis elements vanish on sampled points of the sequence.
pub fn verify_basis(
    report: &DimensionReport,
    seq: &ZeroSequence,
    spec: &QuadratureSpec,
    seed: u64,
) -> Result<BasisVerification, ZeroSeqError> {
    if report.k == 0 || report.basis.is_empty() {
        return Err(ZeroSeqError::VerificationFailed {
            clause: "membership",
            detail: "uniqueness set has no basis to verify".into(),
        });
    }
    let params = report.params;
    let mut element_checks = Vec::with_capacity(report.basis.len());
    for (i, f) in report.basis.iter().enumerate() {
        let check = space_check(f, params, spec)?;
        if !check.is_convergent() {
            return Err(ZeroSeqError::VerificationFailed {
                clause: "membership",
                detail: format!("basis element {i} is not in the space: {}", verdict_of(&check)),
            });
        }
        element_checks.push(check);
    }

    let next = report.basis[0].with_power(report.k);
    let next_power_check = space_check(&next, params, spec)?;
    if !next_power_check.is_divergent() {
        return Err(ZeroSeqError::VerificationFailed {
            clause: "saturation",
            detail: format!(
                "power z^{} still lands in the space: {}",
                report.k,
                verdict_of(&next_power_check)
            ),
        });
    }

    let samples = sample_surviving(seq, 20, seed);
    let mut worst = f64::NEG_INFINITY;
    for &z in &samples {
        for f in &report.basis {
            let wm = f.weighted_mag(z, params.alpha);
            if wm > worst {
                worst = wm;
            }
        }
    }
    if worst >= -20.0 {
        return Err(ZeroSeqError::VerificationFailed {
            clause: "vanishing",
            detail: format!("weighted magnitude {worst:.3} at a sequence point"),
        });
    }
    Ok(BasisVerification {
        element_checks,
        next_power_check,
        worst_sample_mag: worst,
        sampled_points: samples.len() as u32,
    })
}

fn space_check<F: Evaluable + ?Sized>(
    f: &F,
    params: FockParams,
    spec: &QuadratureSpec,
) -> Result<SpaceCheck, ZeroSeqError> {
    Ok(match params.p {
        PExponent::Infinity => SpaceCheck::Sup(sup_norm(f, params.alpha, spec)),
        PExponent::Finite(_) => SpaceCheck::Norm(norm_estimate(f, params, spec)?),
    })
}

fn verdict_of(check: &SpaceCheck) -> String {
    match check {
        SpaceCheck::Norm(n) => n.verdict.to_string(),
        SpaceCheck::Sup(s) => if s.is_unbounded() { "UNBOUNDED" } else { "BOUNDED" }.to_string(),
    }
}

/// Points of the sequence to spot-check: surviving lattice points from the
/// nearby rings plus every added point.
fn sample_surviving(seq: &ZeroSequence, count: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<LatticeIndex> = Vec::new();
    let mut guard = 0;
    while picked.len() < count && guard < 10_000 {
        guard += 1;
        let idx = LatticeIndex::new(rng.gen_range(-6..=6), rng.gen_range(-6..=6));
        if seq.is_removed(idx) || picked.contains(&idx) {
            continue;
        }
        picked.push(idx);
    }
    let mut pts: Vec<Complex64> = picked.iter().map(|&i| seq.lattice.point(i)).collect();
    pts.extend(seq.added.iter().map(|&(b, _)| b));
    pts
}

#[derive(Debug, Clone, Copy)]
pub struct WitnessConstraint {
    pub at: Complex64,
    /// m constraints: value and derivatives through order m - 1 vanish.
    pub multiplicity: u32,
}

#[derive(Debug, Clone)]
pub struct WitnessReport {
    /// Coefficients over the basis, unit norm, largest entry positive real.
    pub coefficients: Vec<Complex64>,
    pub residual: f64,
    pub matrix_norm: f64,
    pub rows: usize,
    /// The gauged evaluation matrix the coefficients annihilate, one row
    /// per constraint unit in declaration order (value row first, then
    /// derivative rows).
    pub matrix: CMatrix,
}

/// Explicit member of the span vanishing on the extra constraints: for a
/// dimension-(k+1) basis and k constraint units this builds the k x (k+1)
/// evaluation matrix (rows gauged by exp(-alpha |a|^2 / 2), which rescales
/// rows only and leaves the null space alone) and extracts its null vector.
/// Derivative rows use central differences with step 1e-5 w1.
pub fn lemma6_witness(
    report: &DimensionReport,
    constraints: &[WitnessConstraint],
) -> Result<WitnessReport, ZeroSeqError> {
    let k_plus_1 = report.basis.len();
    let units: u32 = constraints.iter().map(|c| c.multiplicity).sum();
    if k_plus_1 < 2 || units as usize + 1 != k_plus_1 {
        return Err(ZeroSeqError::VerificationFailed {
            clause: "witness-shape",
            detail: format!(
                "need constraint units = basis size - 1, got {units} against {k_plus_1}"
            ),
        });
    }
    let alpha = report.params.alpha;
    let h = 1e-5 * report.basis[0].natural_lattice().omega1();

    let mut rows: Vec<Vec<Complex64>> = Vec::with_capacity(units as usize);
    for c in constraints {
        if c.multiplicity == 0 || c.multiplicity > 3 {
            return Err(ZeroSeqError::UnsupportedMultiplicity {
                multiplicity: c.multiplicity,
            });
        }
        let gauge = (-0.5 * alpha * c.at.norm_sqr()).exp();
        for order in 0..c.multiplicity {
            let row: Vec<Complex64> = report
                .basis
                .iter()
                .map(|f| {
                    let v = |z: Complex64| f.eval(z).to_complex();
                    let d = match order {
                        0 => v(c.at),
                        1 => {
                            (v(c.at + Complex64::new(h, 0.0)) - v(c.at - Complex64::new(h, 0.0)))
                                / (2.0 * h)
                        }
                        _ => {
                            (v(c.at + Complex64::new(h, 0.0)) - 2.0 * v(c.at)
                                + v(c.at - Complex64::new(h, 0.0)))
                                / (h * h)
                        }
                    };
                    gauge * d
                })
                .collect();
            rows.push(row);
        }
    }

    let m = CMatrix::from_rows(rows);
    let ns = nullspace(&m, 1e-12);
    if ns.rank < units as usize {
        return Err(ZeroSeqError::DegenerateBasis {
            rank: ns.rank,
            needed: units as usize,
        });
    }
    let coefficients = ns.vectors[0].clone();
    let residual = m
        .apply(&coefficients)
        .iter()
        .map(|v| v.norm_sqr())
        .sum::<f64>()
        .sqrt();
    Ok(WitnessReport {
        coefficients,
        residual,
        matrix_norm: m.frobenius(),
        rows: units as usize,
        matrix: m,
    })
}

#[derive(Debug, Clone)]
pub struct MaximalityCertificate {
    pub params: FockParams,
    pub generator: String,
    pub verification: BasisVerification,
    /// Random points whose addition was checked to force uniqueness.
    pub probes: Vec<Complex64>,
}

/// k must be exactly 1; the generator is then verified as a basis and the
/// sequence enlarged by random probe points must come out a uniqueness set.
pub fn maximality_certificate(
    seq: &ZeroSequence,
    params: FockParams,
    spec: &QuadratureSpec,
    seed: u64,
) -> Result<MaximalityCertificate, ZeroSeqError> {
    let report = dimension(seq, params)?;
    if report.k != 1 {
        return Err(ZeroSeqError::NotMaximal { k: report.k });
    }
    let verification = verify_basis(&report, seq, spec, seed)?;

    let w1 = seq.lattice.omega1();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_cafe);
    let mut probes = Vec::with_capacity(5);
    while probes.len() < 5 {
        let z = Complex64::new(
            (rng.gen::<f64>() * 4.0 - 2.0) * w1,
            (rng.gen::<f64>() * 4.0 - 2.0) * w1,
        );
        let (z0, _) = seq.lattice.reduce(z);
        if z0.norm() < 1e-3 * w1 {
            continue;
        }
        let enlarged = seq.add_points(&[(z, 1)]);
        let rep = dimension(&enlarged, params)?;
        if rep.classification != Classification::UniquenessSet {
            return Err(ZeroSeqError::VerificationFailed {
                clause: "probe",
                detail: format!("adding {z} left dimension {}", rep.k),
            });
        }
        probes.push(z);
    }
    Ok(MaximalityCertificate {
        params,
        generator: report.basis[0].describe(),
        verification,
        probes,
    })
}

/// Convenience: enlarge and reclassify.
pub fn uniqueness_after_adding(
    seq: &ZeroSequence,
    points: &[(Complex64, u32)],
    params: FockParams,
) -> Result<DimensionReport, ZeroSeqError> {
    dimension(&seq.add_points(points), params)
}
