//! Acceptance gate. Each test checks one numbered criterion and prints a
//! single pass/fail line with the pinned tolerances; run with
//! `cargo test --test acceptance -- --nocapture` to see all lines.

use fock_zeros::fock::{
    cell_integral, embedding_demo, norm_estimate, QuadratureSpec, Verdict,
};
use fock_zeros::lattice::{FockParams, LatticeIndex, PExponent, SquareLattice};
use fock_zeros::logcx::LogComplex;
use fock_zeros::sigma::SigmaEvaluator;
use fock_zeros::zeroseq::{
    dimension, lemma6_witness, verify_basis, CanonicalFunction, WitnessConstraint, ZeroSequence,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::process::Command;
use std::time::Instant;

fn check(criterion: u32, pass: bool, detail: &str) {
    println!(
        "criterion {criterion} {} - {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion} failed: {detail}");
}

fn lat(alpha: f64) -> SquareLattice {
    SquareLattice::new(alpha).unwrap()
}

fn removals(r: usize) -> Vec<LatticeIndex> {
    [(0, 0), (1, 0), (0, 1), (-1, 0)][..r]
        .iter()
        .map(|&(m, n)| LatticeIndex::new(m, n))
        .collect()
}

#[test]
fn criterion_1_weighted_magnitude_is_doubly_periodic() {
    let start = Instant::now();
    let mut worst = 0.0_f64;
    for alpha in [PI / 2.0, PI, 2.0 * PI] {
        let lattice = lat(alpha);
        let w1 = lattice.omega1();
        let ev = SigmaEvaluator::auto(lattice, 1e-10).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0001);
        let mut drawn = 0;
        while drawn < 200 {
            let z = Complex64::new(
                (rng.gen::<f64>() * 12.0 - 6.0) * w1,
                (rng.gen::<f64>() * 12.0 - 6.0) * w1,
            );
            if z.norm() > 6.0 * w1 {
                continue;
            }
            drawn += 1;
            let base = ev.weighted_mag_at(z);
            for w in [Complex64::new(w1, 0.0), Complex64::new(0.0, w1)] {
                worst = worst.max((ev.weighted_mag_at(z + w) - base).abs());
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    check(
        1,
        worst < 1e-8 && elapsed < 5.0,
        &format!(
            "max |weighted-mag shift| {worst:.2e} < 1e-8 over 200 points x 2 periods x 3 \
             weights, {elapsed:.2}s < 5s"
        ),
    );
}

#[test]
fn criterion_2_three_evaluation_routes_agree() {
    let lattice = lat(PI);
    let w1 = lattice.omega1();
    let ev = SigmaEvaluator::auto(lattice, 1e-10).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0002);
    let mut worst = 0.0_f64;
    let mut drawn = 0;
    while drawn < 100 {
        let z = Complex64::new(
            (rng.gen::<f64>() - 0.5) * w1,
            (rng.gen::<f64>() - 0.5) * w1,
        );
        if z.norm() <= 1e-3 * w1 {
            continue;
        }
        drawn += 1;
        let product = ev.eval_product(z).unwrap();
        let reduced = ev.eval(z);
        let theta = ev.eval_theta(z);
        worst = worst
            .max(product.rel_diff(reduced))
            .max(product.rel_diff(theta))
            .max(reduced.rel_diff(theta));
    }
    // sigma(z)/z -> 1 at small |z|
    let z = Complex64::new(1e-3 * w1, 0.0);
    let ratio_err = ev
        .eval(z)
        .div(LogComplex::from_complex(z))
        .rel_diff(LogComplex::one());
    check(
        2,
        worst < 1e-8 && ratio_err < 1e-6,
        &format!(
            "pairwise route difference {worst:.2e} < 1e-8 on 100 cell samples \
             (|z| > 1e-3); sigma(z)/z - 1 = {ratio_err:.2e} < 1e-6 at |z| = 1e-3"
        ),
    );
}

#[test]
fn criterion_3_sigma_norm_diverges_with_uniform_cells() {
    let lattice = lat(PI);
    let ev = SigmaEvaluator::auto(lattice, 1e-10).unwrap();
    let spec = QuadratureSpec::default();
    let mut worst_cell_dev = 0.0_f64;
    let mut worst_slope_err = 0.0_f64;
    let mut all_divergent = true;
    for p in [1.0, 2.0, 4.0] {
        // the weighted integrand is doubly periodic, so every cell carries
        // the same mass
        let mut cells = Vec::new();
        for r in 0..=5 {
            for idx in lattice.ring_indices(r) {
                cells.push(cell_integral(&ev, lattice.cell(idx), p, PI, spec.order));
            }
        }
        let mean = cells.iter().sum::<f64>() / cells.len() as f64;
        for c in &cells {
            worst_cell_dev = worst_cell_dev.max((c - mean).abs() / mean);
        }
        let est = norm_estimate(&ev, FockParams::new(PI, p).unwrap(), &spec).unwrap();
        all_divergent &= est.verdict == Verdict::Divergent;
        worst_slope_err = worst_slope_err.max((est.slope.unwrap() - 1.0).abs());
    }
    check(
        3,
        worst_cell_dev < 1e-6 && worst_slope_err < 0.1 && all_divergent,
        &format!(
            "cell spread {worst_cell_dev:.2e} < 1e-6 over rings 0-5; ring-growth slope \
             within {worst_slope_err:.3} <= 0.1 of 1; verdict DIVERGENT for p in {{1,2,4}}"
        ),
    );
}

#[test]
fn criterion_4_threshold_law_for_divisor_counts() {
    let start = Instant::now();
    let lattice = lat(PI);
    let ev = SigmaEvaluator::auto(lattice, 1e-10).unwrap();
    let spec = QuadratureSpec::default();
    let mut worst_slope_err = 0.0_f64;
    let mut verdict_hits = 0;
    let mut cases = 0;
    for n in 1..=3usize {
        let f = CanonicalFunction::new(ev.clone(), removals(n), vec![], 0);
        for p in [1.0, 2.0, 2.5, 3.0] {
            cases += 1;
            let est = norm_estimate(&f, FockParams::new(PI, p).unwrap(), &spec).unwrap();
            let want = if (n as f64) * p > 2.0 {
                Verdict::Convergent
            } else {
                Verdict::Divergent
            };
            if est.verdict == want {
                verdict_hits += 1;
            }
            let expected_slope = 1.0 - n as f64 * p;
            worst_slope_err =
                worst_slope_err.max((est.slope.unwrap() - expected_slope).abs());
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    check(
        4,
        verdict_hits == cases && worst_slope_err < 0.15 && elapsed < 60.0,
        &format!(
            "{verdict_hits}/{cases} verdicts match the N*p > 2 predicate; fitted exponent \
             within {worst_slope_err:.3} <= 0.15 of 1 - N*p; {elapsed:.1}s < 60s"
        ),
    );
}

#[test]
fn criterion_5_dimension_table_with_verified_bases() {
    let lattice = lat(PI);
    let spec = QuadratureSpec::default();
    let mut ok = true;
    let mut detail = String::new();
    for (p, expected) in [
        (f64::INFINITY, [1u32, 2, 3, 4]),
        (2.0, [0, 0, 1, 2]),
    ] {
        let params = FockParams::new(PI, p).unwrap();
        for (r, &want) in expected.iter().enumerate() {
            let seq = ZeroSequence::new(lattice, removals(r), vec![]).unwrap();
            let rep = dimension(&seq, params).unwrap();
            if rep.k != want {
                ok = false;
                detail = format!("p={p} r={r}: k={} wanted {want}", rep.k);
                break;
            }
            if rep.k >= 1 {
                if let Err(e) = verify_basis(&rep, &seq, &spec, 0xACCE_0005) {
                    ok = false;
                    detail = format!("p={p} r={r}: verification failed: {e}");
                    break;
                }
            }
        }
    }
    if ok {
        detail = "k = r+1 at p=inf and k in {0,0,1,2} at p=2 for r in 0..=3; every basis \
                  verified (members in space, next power out, vanishing below -20)"
            .to_string();
    }
    check(5, ok, &detail);
}

#[test]
fn criterion_6_witness_annihilates_a_double_constraint() {
    let lattice = lat(PI);
    let params = FockParams::new(PI, 2.0).unwrap();
    let seq = ZeroSequence::new(lattice, removals(4), vec![]).unwrap();
    let rep = dimension(&seq, params).unwrap();
    assert_eq!(rep.k, 3, "need the dim-3 example");
    let a = Complex64::new(0.37, 0.21);
    let witness = lemma6_witness(
        &rep,
        &[WitnessConstraint {
            at: a,
            multiplicity: 2,
        }],
    )
    .unwrap();

    let residual_ok = witness.residual <= 1e-10 * witness.matrix_norm;

    // combined function vanishes at the constraint point
    let f_at = |z: Complex64| -> Complex64 {
        rep.basis
            .iter()
            .zip(&witness.coefficients)
            .map(|(b, &c)| c * b.eval(z).to_complex())
            .sum()
    };
    let wm = f_at(a).norm().ln() - 0.5 * PI * a.norm_sqr();
    let vanish_ok = wm <= -18.0;

    // derivative row agrees with an independent half-step recomputation
    let gauge = (-0.5 * PI * a.norm_sqr()).exp();
    let h2 = 0.5e-5 * lattice.omega1();
    let mut row_dev = 0.0_f64;
    for (j, b) in rep.basis.iter().enumerate() {
        let d2 = (b.eval(a + Complex64::new(h2, 0.0)).to_complex()
            - b.eval(a - Complex64::new(h2, 0.0)).to_complex())
            / (2.0 * h2)
            * gauge;
        let d1 = witness.matrix.at(1, j);
        row_dev = row_dev.max((d2 - d1).norm() / d2.norm().max(1e-30));
    }
    check(
        6,
        residual_ok && vanish_ok && row_dev < 1e-6,
        &format!(
            "residual {:.1e} <= 1e-10 * |A| ({:.1e}); combined weighted magnitude {wm:.1} \
             <= -18 at the double point; derivative rows match half-step recomputation \
             within {row_dev:.1e} < 1e-6",
            witness.residual,
            1e-10 * witness.matrix_norm
        ),
    );
}

fn run_cli(args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_fock-zeros"))
        .args(args)
        .output()
        .expect("spawn fock-zeros");
    (out.status.code().unwrap_or(-1), out.stdout)
}

#[test]
fn criterion_7_certify_exit_codes() {
    let cases: [(&[&str], i32, Option<u64>); 4] = [
        (&["certify", "--p", "inf"], 0, Some(1)),
        (&["certify", "--p", "2", "--remove", "0,0", "--remove", "1,0"], 0, Some(1)),
        (&["certify", "--p", "2", "--remove", "0,0"], 1, Some(0)),
        (
            &[
                "certify", "--p", "2", "--remove", "0,0", "--remove", "1,0", "--remove",
                "0,1",
            ],
            1,
            Some(2),
        ),
    ];
    let mut ok = true;
    let mut detail = String::new();
    for (args, want_code, want_k) in cases {
        let (code, stdout) = run_cli(args);
        let doc: serde_json::Value = serde_json::from_slice(&stdout).expect("report JSON");
        let k = doc["certificate"]["k"].as_u64();
        if code != want_code || k != want_k {
            ok = false;
            detail = format!("{args:?}: exit {code} (wanted {want_code}), k {k:?} (wanted {want_k:?})");
            break;
        }
    }
    if ok {
        detail = "maximal for (p=inf, full lattice) and (p=2, two removals) with exit 0; \
                  NotMaximal k=0 and k=2 with exit 1 for one and three removals"
            .to_string();
    }
    check(7, ok, &detail);
}

#[test]
fn criterion_8_norm_comparison_across_weights() {
    let spec = QuadratureSpec::default();
    let demo = embedding_demo(
        PI,
        2.0 * PI,
        PExponent::Finite(2.0),
        PExponent::Finite(2.0),
        &spec,
    )
    .unwrap();
    let gamma_ok = (demo.gamma - 1.5 * PI).abs() < 1e-12;
    check(
        8,
        gamma_ok && demo.lower.is_divergent() && demo.upper.is_convergent(),
        &format!(
            "sigma at gamma = 3pi/2: DIVERGENT in the alpha = pi space, CONVERGENT in the \
             beta = 2pi space (divergent={}, convergent={})",
            demo.lower.is_divergent(),
            demo.upper.is_convergent()
        ),
    );
}

#[test]
fn criterion_9_reports_are_byte_identical_across_runs() {
    let dir = std::env::temp_dir().join(format!("fock-zeros-acc-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let runs: [&[&str]; 5] = [
        &["sigma", "--z", "0.4,0.3", "--seed", "99"],
        &["periodicity", "--samples", "40", "--seed", "99"],
        &["norm", "sigma / (z - w(0,0)) / (z - w(1,0))", "--p", "2", "--seed", "99"],
        &[
            "dim", "--p", "2", "--remove", "0,0", "--remove", "1,0", "--remove", "0,1",
            "--seed", "99",
        ],
        &["certify", "--p", "2", "--remove", "0,0", "--remove", "1,0", "--seed", "99"],
    ];
    let mut ok = true;
    let mut detail = String::new();
    for (i, args) in runs.iter().enumerate() {
        let out_a = dir.join(format!("{i}-a.json"));
        let out_b = dir.join(format!("{i}-b.json"));
        let mut args_a: Vec<&str> = args.to_vec();
        let a_path = out_a.to_str().unwrap().to_string();
        args_a.extend(["--out", &a_path]);
        let (code_a, stdout_a) = run_cli(&args_a);
        let mut args_b: Vec<&str> = args.to_vec();
        let b_path = out_b.to_str().unwrap().to_string();
        args_b.extend(["--out", &b_path]);
        let (code_b, stdout_b) = run_cli(&args_b);
        let file_a = std::fs::read(&out_a).unwrap();
        let file_b = std::fs::read(&out_b).unwrap();
        if code_a != code_b || stdout_a != stdout_b || file_a != file_b || file_a != stdout_a
        {
            ok = false;
            detail = format!("{:?} differed between identical runs", args[0]);
            break;
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
    if ok {
        detail = "sigma, periodicity, norm, dim, and certify each produced byte-identical \
                  stdout and --out documents across two runs with the same seed"
            .to_string();
    }
    check(9, ok, &detail);
}
