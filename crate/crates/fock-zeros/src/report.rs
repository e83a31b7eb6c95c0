//! Report documents emitted by the command-line front end. Every report
//! carries the fully resolved run configuration, field order is fixed by the
//! struct declarations, and maps are sorted, so identical runs serialize to
//! identical bytes. Values that can be infinite are wrapped in [`Ext`],
//! which serializes non-finite numbers as the strings "inf", "-inf", "nan"
//! instead of the null that a bare f64 would produce.

use crate::fock::{NormEstimate, SpaceCheck, SupNorm};
use crate::lattice::PExponent;
use crate::zeroseq::{BasisVerification, MaximalityCertificate, WitnessReport};
use num_complex::Complex64;
use serde::{Serialize, Serializer};
use std::collections::BTreeMap;

/// f64 that stays readable in JSON when infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ext(pub f64);

impl Serialize for Ext {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else if self.0.is_nan() {
            s.serialize_str("nan")
        } else if self.0 > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ComplexJson {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexJson {
    fn from(z: Complex64) -> Self {
        ComplexJson { re: z.re, im: z.im }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ResolvedConfig {
    pub alpha: f64,
    pub p: PExponent,
    pub trunc_ring: Option<u32>,
    pub quad_order: u32,
    pub max_ring: u32,
    pub seed: u64,
    pub tolerances: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RouteValue {
    pub log_mag: Ext,
    pub arg: f64,
    pub weighted_mag: Ext,
}

#[derive(Debug, Serialize)]
pub struct SigmaReport {
    pub config: ResolvedConfig,
    pub z: ComplexJson,
    pub product: RouteValue,
    pub reduced: RouteValue,
    pub theta: RouteValue,
    /// Pairwise relative differences product/reduced, product/theta,
    /// reduced/theta.
    pub pairwise: [Ext; 3],
    pub oracle_tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct PeriodicityReport {
    pub config: ResolvedConfig,
    pub samples: u32,
    pub max_deviation: Ext,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct NormJson {
    pub verdict: String,
    pub partial_sum: Ext,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norm: Option<Ext>,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail: Option<Ext>,
    pub fit_window: u32,
    pub ring_contributions: Vec<Ext>,
}

impl From<&NormEstimate> for NormJson {
    fn from(e: &NormEstimate) -> Self {
        NormJson {
            verdict: e.verdict.to_string(),
            partial_sum: Ext(e.partial_sum),
            norm: e.norm.map(Ext),
            slope: e.slope,
            intercept: e.intercept,
            tail: e.tail.map(Ext),
            fit_window: e.fit_window,
            ring_contributions: e.ring_contributions.iter().map(|&v| Ext(v)).collect(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SupJson {
    pub bounded: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sup: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub log_sup: Option<Ext>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub argmax: Option<ComplexJson>,
    pub ring_maxima: Vec<Ext>,
}

impl From<&SupNorm> for SupJson {
    fn from(s: &SupNorm) -> Self {
        match s {
            SupNorm::Finite {
                log_sup,
                sup,
                argmax,
                ring_maxima,
            } => SupJson {
                bounded: true,
                sup: Some(*sup),
                log_sup: Some(Ext(*log_sup)),
                argmax: Some((*argmax).into()),
                ring_maxima: ring_maxima.iter().map(|&v| Ext(v)).collect(),
            },
            SupNorm::Unbounded { ring_maxima } => SupJson {
                bounded: false,
                sup: None,
                log_sup: None,
                argmax: None,
                ring_maxima: ring_maxima.iter().map(|&v| Ext(v)).collect(),
            },
        }
    }
}

/// One membership check, either an integral estimate or a sup-norm search.
#[derive(Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CheckJson {
    Norm(NormJson),
    Sup(SupJson),
}

impl From<&SpaceCheck> for CheckJson {
    fn from(c: &SpaceCheck) -> Self {
        match c {
            SpaceCheck::Norm(n) => CheckJson::Norm(n.into()),
            SpaceCheck::Sup(s) => CheckJson::Sup(s.into()),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct NormReport {
    pub config: ResolvedConfig,
    pub function: String,
    pub estimate: NormJson,
}

#[derive(Debug, Serialize)]
pub struct VerificationJson {
    pub element_checks: Vec<CheckJson>,
    pub next_power_check: CheckJson,
    pub worst_sample_mag: Ext,
    pub sampled_points: u32,
    pub pass: bool,
}

impl From<&BasisVerification> for VerificationJson {
    fn from(v: &BasisVerification) -> Self {
        VerificationJson {
            element_checks: v.element_checks.iter().map(CheckJson::from).collect(),
            next_power_check: (&v.next_power_check).into(),
            worst_sample_mag: Ext(v.worst_sample_mag),
            sampled_points: v.sampled_points,
            pass: true,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct AddedJson {
    pub re: f64,
    pub im: f64,
    pub multiplicity: u32,
}

#[derive(Debug, Serialize)]
pub struct DimReport {
    pub config: ResolvedConfig,
    pub removed: Vec<[i64; 2]>,
    pub added: Vec<AddedJson>,
    /// Least N with N p > 2, for finite p.
    pub n: Option<u32>,
    pub k: u32,
    pub classification: String,
    pub basis: Vec<String>,
    /// Added points sitting on surviving lattice points; each multiplicity
    /// unit is counted like an ordinary added point, an extrapolation the
    /// dimension count makes explicit here.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stacked_note: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification: Option<VerificationJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification_error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateJson>,
}

#[derive(Debug, Serialize)]
pub struct CertificateJson {
    pub maximal: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification: Option<VerificationJson>,
    pub probes: Vec<ComplexJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

impl From<&MaximalityCertificate> for CertificateJson {
    fn from(c: &MaximalityCertificate) -> Self {
        CertificateJson {
            maximal: true,
            k: Some(1),
            generator: Some(c.generator.clone()),
            verification: Some((&c.verification).into()),
            probes: c.probes.iter().map(|&z| z.into()).collect(),
            failure: None,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct CertifyReport {
    pub config: ResolvedConfig,
    pub removed: Vec<[i64; 2]>,
    pub added: Vec<AddedJson>,
    pub certificate: CertificateJson,
}

#[derive(Debug, Serialize)]
pub struct WitnessJson {
    pub coefficients: Vec<ComplexJson>,
    pub residual: f64,
    pub matrix_norm: f64,
    pub rows: usize,
}

impl From<&WitnessReport> for WitnessJson {
    fn from(w: &WitnessReport) -> Self {
        WitnessJson {
            coefficients: w.coefficients.iter().map(|&c| c.into()).collect(),
            residual: w.residual,
            matrix_norm: w.matrix_norm,
            rows: w.rows,
        }
    }
}

/// Stable pretty-printed JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serialization");
    s.push('\n');
    s
}
