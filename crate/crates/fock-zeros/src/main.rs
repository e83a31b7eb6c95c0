//! Command-line front end. Every command resolves its full configuration,
//! runs the verification it names, and emits one JSON document (heatmaps
//! emit a CSV grid instead, plus an optional PGM rendering). Exit codes:
//! 0 success, 1 a checked property failed, 2 usage or parse error,
//! 3 internal verification failure.

use clap::{Parser, Subcommand};
use fock_zeros::fock::{norm_estimate, Evaluable, QuadratureSpec};
use fock_zeros::funcspec::{parse_complex, FuncSpec};
use fock_zeros::lattice::{FockParams, LatticeIndex, SquareLattice};
use fock_zeros::logcx::LogComplex;
use fock_zeros::report::{
    to_json, AddedJson, CertificateJson, CertifyReport, DimReport, Ext, NormReport,
    PeriodicityReport, ResolvedConfig, RouteValue, SigmaReport, VerificationJson,
};
use fock_zeros::sigma::{required_ring, weighted_mag, SigmaEvaluator};
use fock_zeros::zeroseq::{
    dimension, maximality_certificate, verify_basis, ZeroSeqError, ZeroSequence,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "fock-zeros",
    version,
    about = "Verifications around lattice zero sequences in Gaussian-weighted function spaces"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,

    /// Weight parameter of the space and its lattice.
    #[arg(long, global = true, default_value_t = std::f64::consts::PI)]
    alpha: f64,

    /// Integrability exponent; a positive number or "inf".
    #[arg(long, global = true, default_value = "2")]
    p: String,

    /// Truncation ring for the product route; derived from the tolerance
    /// when absent.
    #[arg(long, global = true)]
    trunc_ring: Option<u32>,

    /// Gauss-Legendre points per cell axis.
    #[arg(long, global = true, default_value_t = 24)]
    quad_order: usize,

    /// Outermost lattice ring covered by quadrature and sup scans.
    #[arg(long, global = true, default_value_t = 24)]
    max_ring: u32,

    /// Seed for every randomized sample draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Also write the report (or grid) to this path.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Override a named tolerance, e.g. --tol periodicity=1e-9. Known
    /// names: periodicity, oracle, residual, exponent_margin.
    #[arg(long = "tol", global = true, value_name = "NAME=VALUE")]
    tol: Vec<String>,

    /// Scale the quasi-period constant (negative-control hook).
    #[arg(long, global = true, hide = true)]
    corrupt_eta: Option<f64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate sigma at one point via all three routes.
    Sigma {
        /// Point, as "re,im" or a complex literal like "0.5+0.25i".
        #[arg(long, allow_hyphen_values = true)]
        z: String,
    },
    /// Check invariance of the weighted magnitude under both lattice
    /// periods on seeded random points.
    Periodicity {
        #[arg(long, default_value_t = 100)]
        samples: u32,
    },
    /// Estimate the weighted p-norm of a function descriptor.
    Norm {
        /// e.g. "sigma / (z - w(0,0)) * poly(1, 0.5i)"
        spec: String,
    },
    /// Dimension of the space of functions vanishing on a modified lattice,
    /// with basis verification and, at dimension 1, a maximality
    /// certificate.
    Dim {
        /// Lattice index to remove, as "m,n". Repeatable.
        #[arg(long = "remove", value_name = "M,N", allow_hyphen_values = true)]
        remove: Vec<String>,
        /// Point to add, as "re,im" or "re,im,mult". Repeatable.
        #[arg(long = "add", value_name = "RE,IM[,MULT]", allow_hyphen_values = true)]
        add: Vec<String>,
    },
    /// Weighted log-magnitude of a descriptor on a grid, as CSV.
    Heatmap {
        spec: String,
        /// One grid corner, "re,im" or complex literal.
        #[arg(long, allow_hyphen_values = true)]
        corner0: String,
        /// Opposite grid corner.
        #[arg(long, allow_hyphen_values = true)]
        corner1: String,
        /// Samples per axis, at most 8192.
        #[arg(long, default_value_t = 256)]
        resolution: u32,
        /// Also render an 8-bit PGM, clipped to [-20, max].
        #[arg(long)]
        pgm: Option<PathBuf>,
    },
    /// Certify that a modified lattice is a maximal zero set.
    Certify {
        #[arg(long = "remove", value_name = "M,N", allow_hyphen_values = true)]
        remove: Vec<String>,
        #[arg(long = "add", value_name = "RE,IM[,MULT]", allow_hyphen_values = true)]
        add: Vec<String>,
    },
}

enum Failure {
    Usage(String),
    Internal(String),
}

impl Failure {
    fn usage<T: std::fmt::Display>(e: T) -> Failure {
        Failure::Usage(e.to_string())
    }
    fn internal<T: std::fmt::Display>(e: T) -> Failure {
        Failure::Internal(e.to_string())
    }
}

struct Ctx {
    params: FockParams,
    lattice: SquareLattice,
    quad: QuadratureSpec,
    config: ResolvedConfig,
    tols: BTreeMap<String, f64>,
    trunc_ring: Option<u32>,
    seed: u64,
    out: Option<PathBuf>,
    corrupt_eta: Option<f64>,
}

const KNOWN_TOLS: [(&str, f64); 4] = [
    ("exponent_margin", 0.3),
    ("oracle", 1e-8),
    ("periodicity", 1e-8),
    ("residual", 1e-10),
];

fn main() -> ExitCode {
    init_threads();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Internal(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_INTERNAL)
        }
    }
}

fn init_threads() {
    if let Ok(v) = std::env::var("FOCK_ZEROS_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
        }
    }
}

fn build_ctx(cli: &Cli) -> Result<Ctx, Failure> {
    let p = parse_p(&cli.p)?;
    let params = FockParams::new(cli.alpha, p).map_err(Failure::usage)?;
    let lattice = SquareLattice::new(cli.alpha).map_err(Failure::usage)?;

    let mut tols: BTreeMap<String, f64> =
        KNOWN_TOLS.iter().map(|&(k, v)| (k.to_string(), v)).collect();
    for entry in &cli.tol {
        let (name, value) = entry
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("tolerance {entry:?} is not NAME=VALUE")))?;
        let name = name.trim();
        if !KNOWN_TOLS.iter().any(|&(k, _)| k == name) {
            return Err(Failure::Usage(format!("unknown tolerance name {name:?}")));
        }
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("tolerance value {value:?} is not a number")))?;
        if !(value > 0.0 && value.is_finite()) {
            return Err(Failure::Usage(format!(
                "tolerance {name} must be positive and finite, got {value}"
            )));
        }
        tols.insert(name.to_string(), value);
    }

    let quad = QuadratureSpec::new(cli.quad_order, cli.max_ring, 8)
        .and_then(|s| s.with_margin(tols["exponent_margin"]))
        .map_err(Failure::usage)?;

    let config = ResolvedConfig {
        alpha: cli.alpha,
        p: params.p,
        trunc_ring: cli.trunc_ring,
        quad_order: cli.quad_order as u32,
        max_ring: cli.max_ring,
        seed: cli.seed,
        tolerances: tols.clone(),
    };
    Ok(Ctx {
        params,
        lattice,
        quad,
        config,
        tols,
        trunc_ring: cli.trunc_ring,
        seed: cli.seed,
        out: cli.out.clone(),
        corrupt_eta: cli.corrupt_eta,
    })
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let ctx = build_ctx(&cli)?;
    match &cli.cmd {
        Cmd::Sigma { z } => cmd_sigma(&ctx, z),
        Cmd::Periodicity { samples } => cmd_periodicity(&ctx, *samples),
        Cmd::Norm { spec } => cmd_norm(&ctx, spec),
        Cmd::Dim { remove, add } => cmd_dim(&ctx, remove, add),
        Cmd::Heatmap {
            spec,
            corner0,
            corner1,
            resolution,
            pgm,
        } => cmd_heatmap(&ctx, spec, corner0, corner1, *resolution, pgm.as_deref()),
        Cmd::Certify { remove, add } => cmd_certify(&ctx, remove, add),
    }
}

fn parse_p(s: &str) -> Result<f64, Failure> {
    let t = s.trim();
    if t.eq_ignore_ascii_case("inf") {
        return Ok(f64::INFINITY);
    }
    t.parse::<f64>()
        .map_err(|_| Failure::Usage(format!("p must be a positive number or \"inf\", got {t:?}")))
}

/// "re,im" or a complex literal.
fn parse_point(s: &str) -> Result<Complex64, Failure> {
    if let Some((a, b)) = s.split_once(',') {
        let re: f64 = a
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("bad real part {a:?}")))?;
        let im: f64 = b
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("bad imaginary part {b:?}")))?;
        Ok(Complex64::new(re, im))
    } else {
        parse_complex(s).map_err(Failure::usage)
    }
}

fn parse_removals(specs: &[String]) -> Result<Vec<LatticeIndex>, Failure> {
    specs
        .iter()
        .map(|s| {
            let (m, n) = s
                .split_once(',')
                .ok_or_else(|| Failure::Usage(format!("removal {s:?} is not M,N")))?;
            let m: i64 = m
                .trim()
                .parse()
                .map_err(|_| Failure::Usage(format!("bad index {s:?}")))?;
            let n: i64 = n
                .trim()
                .parse()
                .map_err(|_| Failure::Usage(format!("bad index {s:?}")))?;
            Ok(LatticeIndex::new(m, n))
        })
        .collect()
}

fn parse_additions(specs: &[String]) -> Result<Vec<(Complex64, u32)>, Failure> {
    specs
        .iter()
        .map(|s| {
            let parts: Vec<&str> = s.split(',').collect();
            if parts.len() != 2 && parts.len() != 3 {
                return Err(Failure::Usage(format!(
                    "addition {s:?} is not RE,IM or RE,IM,MULT"
                )));
            }
            let re: f64 = parts[0]
                .trim()
                .parse()
                .map_err(|_| Failure::Usage(format!("bad real part in {s:?}")))?;
            let im: f64 = parts[1]
                .trim()
                .parse()
                .map_err(|_| Failure::Usage(format!("bad imaginary part in {s:?}")))?;
            let mult: u32 = if parts.len() == 3 {
                parts[2]
                    .trim()
                    .parse()
                    .map_err(|_| Failure::Usage(format!("bad multiplicity in {s:?}")))?
            } else {
                1
            };
            Ok((Complex64::new(re, im), mult))
        })
        .collect()
}

/// Print to stdout and mirror to --out when given.
fn emit(out: Option<&std::path::Path>, text: &str) -> Result<(), Failure> {
    print!("{text}");
    if let Some(path) = out {
        std::fs::write(path, text)
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

fn route_value(v: LogComplex, z: Complex64, alpha: f64) -> RouteValue {
    RouteValue {
        log_mag: Ext(v.log_mag),
        arg: v.arg,
        weighted_mag: Ext(weighted_mag(v, z, alpha)),
    }
}

fn cmd_sigma(ctx: &Ctx, z_str: &str) -> Result<u8, Failure> {
    let z = parse_point(z_str)?;
    let oracle = ctx.tols["oracle"];
    let prod_tol = (oracle / 10.0).clamp(1e-12, 1e-6);
    let w1 = ctx.lattice.omega1();

    let ring = match ctx.trunc_ring {
        Some(r) => r,
        None => required_ring(w1, z.norm().max(0.1 * w1), prod_tol).ok_or_else(|| {
            Failure::Internal(format!(
                "truncated product cannot reach tolerance {prod_tol:.1e} at |z| = {:.3}; \
                 pass --trunc-ring to force a ring or relax --tol oracle",
                z.norm()
            ))
        })?,
    };
    let ev = SigmaEvaluator::with_options(ctx.lattice, ring, prod_tol, ctx.tols["periodicity"])
        .map_err(Failure::internal)?;

    let product = ev.eval_product(z).map_err(Failure::internal)?;
    let reduced = ev.eval(z);
    let theta = ev.eval_theta(z);

    let pairwise = [
        product.rel_diff(reduced),
        product.rel_diff(theta),
        reduced.rel_diff(theta),
    ];
    let pass = pairwise.iter().all(|d| *d <= oracle);
    let alpha = ctx.params.alpha;
    let report = SigmaReport {
        config: ctx.config.clone(),
        z: z.into(),
        product: route_value(product, z, alpha),
        reduced: route_value(reduced, z, alpha),
        theta: route_value(theta, z, alpha),
        pairwise: [Ext(pairwise[0]), Ext(pairwise[1]), Ext(pairwise[2])],
        oracle_tolerance: oracle,
        pass,
    };
    emit(ctx.out.as_deref(), &to_json(&report))?;
    Ok(if pass { 0 } else { EXIT_FAIL })
}

fn cmd_periodicity(ctx: &Ctx, samples: u32) -> Result<u8, Failure> {
    let ev = match ctx.corrupt_eta {
        Some(factor) => {
            SigmaEvaluator::unchecked(ctx.lattice, ctx.trunc_ring.unwrap_or(12), 1e-10, factor)
        }
        None => match ctx.trunc_ring {
            Some(r) => {
                SigmaEvaluator::with_options(ctx.lattice, r, 1e-10, ctx.tols["periodicity"])
                    .map_err(Failure::internal)?
            }
            None => SigmaEvaluator::auto(ctx.lattice, 1e-10).map_err(Failure::internal)?,
        },
    };
    let w1 = ctx.lattice.omega1();
    let periods = [Complex64::new(w1, 0.0), Complex64::new(0.0, w1)];
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let mut max_dev = 0.0_f64;
    for _ in 0..samples {
        let z = Complex64::new(
            (rng.gen::<f64>() * 12.0 - 6.0) * w1,
            (rng.gen::<f64>() * 12.0 - 6.0) * w1,
        );
        let base = ev.weighted_mag_at(z);
        for &w in &periods {
            let dev = (ev.weighted_mag_at(z + w) - base).abs();
            if dev > max_dev {
                max_dev = dev;
            }
        }
    }
    let tolerance = ctx.tols["periodicity"];
    let pass = max_dev < tolerance;
    let warning =
        (samples == 0).then(|| "no samples drawn; the pass is vacuous".to_string());
    let report = PeriodicityReport {
        config: ctx.config.clone(),
        samples,
        max_deviation: Ext(max_dev),
        tolerance,
        pass,
        warning,
    };
    emit(ctx.out.as_deref(), &to_json(&report))?;
    Ok(if pass { 0 } else { EXIT_FAIL })
}

fn cmd_norm(ctx: &Ctx, spec_str: &str) -> Result<u8, Failure> {
    if ctx.params.p.is_infinite() {
        return Err(Failure::Usage(
            "norm needs a finite p; sup-norm evidence is part of dim/certify output".into(),
        ));
    }
    let fs = FuncSpec::parse(spec_str).map_err(Failure::usage)?;
    let ev = SigmaEvaluator::auto(ctx.lattice, 1e-10).map_err(Failure::internal)?;
    let f = fs.function(ev);
    let est = norm_estimate(&f, ctx.params, &ctx.quad).map_err(Failure::internal)?;
    let report = NormReport {
        config: ctx.config.clone(),
        function: f.describe(),
        estimate: (&est).into(),
    };
    emit(ctx.out.as_deref(), &to_json(&report))?;
    Ok(0)
}

fn build_sequence(
    ctx: &Ctx,
    remove: &[String],
    add: &[String],
) -> Result<ZeroSequence, Failure> {
    let removed = parse_removals(remove)?;
    let added = parse_additions(add)?;
    ZeroSequence::new(ctx.lattice, removed, added).map_err(Failure::usage)
}

fn removals_json(seq: &ZeroSequence) -> Vec<[i64; 2]> {
    seq.removed().iter().map(|i| [i.m, i.n]).collect()
}

fn additions_json(seq: &ZeroSequence) -> Vec<AddedJson> {
    seq.added()
        .iter()
        .map(|&(b, m)| AddedJson {
            re: b.re,
            im: b.im,
            multiplicity: m,
        })
        .collect()
}

fn cmd_dim(ctx: &Ctx, remove: &[String], add: &[String]) -> Result<u8, Failure> {
    let seq = build_sequence(ctx, remove, add)?;
    let rep = dimension(&seq, ctx.params).map_err(Failure::internal)?;

    let mut verification = None;
    let mut verification_error = None;
    let mut certificate = None;
    let mut code = 0;
    if rep.k >= 1 {
        match verify_basis(&rep, &seq, &ctx.quad, ctx.seed) {
            Ok(v) => {
                verification = Some(VerificationJson::from(&v));
                if rep.k == 1 {
                    let cert = maximality_certificate(&seq, ctx.params, &ctx.quad, ctx.seed)
                        .map_err(Failure::internal)?;
                    certificate = Some(CertificateJson::from(&cert));
                }
            }
            Err(e) => {
                verification_error = Some(e.to_string());
                code = EXIT_FAIL;
            }
        }
    }
    let stacked_note = (!rep.stacked.is_empty()).then(|| {
        format!(
            "{} added point(s) sit on surviving lattice points; each added \
             multiplicity unit is counted like an ordinary added point",
            rep.stacked.len()
        )
    });
    let report = DimReport {
        config: ctx.config.clone(),
        removed: removals_json(&seq),
        added: additions_json(&seq),
        n: rep.n,
        k: rep.k,
        classification: rep.classification.to_string(),
        basis: rep.basis.iter().map(|b| b.describe()).collect(),
        stacked_note,
        verification,
        verification_error,
        certificate,
    };
    emit(ctx.out.as_deref(), &to_json(&report))?;
    Ok(code)
}

fn cmd_certify(ctx: &Ctx, remove: &[String], add: &[String]) -> Result<u8, Failure> {
    let seq = build_sequence(ctx, remove, add)?;
    let (certificate, code) = match maximality_certificate(&seq, ctx.params, &ctx.quad, ctx.seed)
    {
        Ok(cert) => (CertificateJson::from(&cert), 0),
        Err(ZeroSeqError::NotMaximal { k }) => (
            CertificateJson {
                maximal: false,
                k: Some(k),
                generator: None,
                verification: None,
                probes: Vec::new(),
                failure: Some(format!(
                    "dimension is {k}; a maximal zero set has dimension exactly 1"
                )),
            },
            EXIT_FAIL,
        ),
        Err(e @ ZeroSeqError::VerificationFailed { .. }) => (
            CertificateJson {
                maximal: false,
                k: Some(1),
                generator: None,
                verification: None,
                probes: Vec::new(),
                failure: Some(e.to_string()),
            },
            EXIT_INTERNAL,
        ),
        Err(e) => return Err(Failure::internal(e)),
    };
    let report = CertifyReport {
        config: ctx.config.clone(),
        removed: removals_json(&seq),
        added: additions_json(&seq),
        certificate,
    };
    emit(ctx.out.as_deref(), &to_json(&report))?;
    Ok(code)
}

fn cmd_heatmap(
    ctx: &Ctx,
    spec_str: &str,
    corner0: &str,
    corner1: &str,
    resolution: u32,
    pgm: Option<&std::path::Path>,
) -> Result<u8, Failure> {
    if resolution == 0 || resolution > 8192 {
        return Err(Failure::Usage(format!(
            "resolution {resolution} outside 1..=8192"
        )));
    }
    let c0 = parse_point(corner0)?;
    let c1 = parse_point(corner1)?;
    let fs = FuncSpec::parse(spec_str).map_err(Failure::usage)?;
    let ev = SigmaEvaluator::auto(ctx.lattice, 1e-10).map_err(Failure::internal)?;
    let f = fs.function(ev);
    let alpha = ctx.params.alpha;

    let n = resolution as usize;
    let step = |a: f64, b: f64, i: usize| {
        if n == 1 {
            a
        } else {
            a + (b - a) * i as f64 / (n - 1) as f64
        }
    };
    let grid: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|row| {
            let im = step(c0.im, c1.im, row);
            (0..n)
                .map(|col| f.weighted_mag(Complex64::new(step(c0.re, c1.re, col), im), alpha))
                .collect()
        })
        .collect();

    let mut csv = String::new();
    csv.push_str(&format!(
        "# weighted log-magnitude grid; alpha={alpha}; re0={}; im0={}; re1={}; im1={}; \
         resolution={resolution}; layout=row-major, rows scan im from im0 to im1, \
         columns scan re from re0 to re1; function={}\n",
        c0.re,
        c0.im,
        c1.re,
        c1.im,
        f.describe()
    ));
    for row in &grid {
        let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        csv.push_str(&line.join(","));
        csv.push('\n');
    }
    match &ctx.out {
        Some(path) => std::fs::write(path, &csv)
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{csv}"),
    }

    if let Some(path) = pgm {
        let lo = -20.0_f64;
        let hi = grid
            .iter()
            .flatten()
            .copied()
            .filter(|v| v.is_finite())
            .fold(lo, f64::max);
        let scale = if hi > lo { 255.0 / (hi - lo) } else { 0.0 };
        let mut bytes = Vec::with_capacity(n * n + 32);
        bytes.extend_from_slice(format!("P5\n{n} {n}\n255\n").as_bytes());
        for row in &grid {
            for &v in row {
                let clipped = if v.is_nan() { lo } else { v.clamp(lo, hi) };
                bytes.push(((clipped - lo) * scale).round() as u8);
            }
        }
        let mut file = std::fs::File::create(path)
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
        file.write_all(&bytes)
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(0)
}
