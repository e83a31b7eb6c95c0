//! Randomized invariant checks for the lattice geometry, log-space
//! arithmetic, and the dimension count.

use fock_zeros::lattice::{FockParams, LatticeIndex, SquareLattice};
use fock_zeros::logcx::{normalize_arg, LogComplex};
use fock_zeros::zeroseq::{dimension, smallest_n, Classification, ZeroSequence};
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

fn finite_complex(range: f64) -> impl Strategy<Value = Complex64> {
    (-range..range, -range..range).prop_map(|(re, im)| Complex64::new(re, im))
}

proptest! {
    #[test]
    fn reduce_lands_in_the_half_open_cell(
        alpha in 0.2f64..20.0,
        z in finite_complex(40.0),
    ) {
        let lat = SquareLattice::new(alpha).unwrap();
        let h = 0.5 * lat.omega1();
        let (z0, idx) = lat.reduce(z);
        prop_assert!((-h..h).contains(&z0.re), "re {} outside [{}, {})", z0.re, -h, h);
        prop_assert!((-h..h).contains(&z0.im), "im {} outside [{}, {})", z0.im, -h, h);
        let back = z0 + lat.point(idx);
        prop_assert!((back - z).norm() <= 1e-12 * (1.0 + z.norm()));
    }

    #[test]
    fn rings_partition_the_index_square(r in 0u32..40) {
        let lat = SquareLattice::new(PI).unwrap();
        let ring = lat.ring_indices(r);
        let expected = if r == 0 { 1 } else { 8 * r as usize };
        prop_assert_eq!(ring.len(), expected);
        for idx in &ring {
            prop_assert_eq!(idx.ring(), r as i64);
        }
        let mut sorted: Vec<_> = ring.iter().map(|i| (i.m, i.n)).collect();
        sorted.sort_unstable();
        sorted.dedup();
        prop_assert_eq!(sorted.len(), expected, "ring contains duplicates");
    }

    #[test]
    fn enumerate_rings_counts_match(max in 0u32..12) {
        let lat = SquareLattice::new(2.0 * PI).unwrap();
        let all = lat.enumerate_rings(max);
        prop_assert_eq!(all.len(), (2 * max as usize + 1).pow(2));
    }

    #[test]
    fn log_complex_roundtrip(w in finite_complex(50.0)) {
        prop_assume!(w.norm() > 1e-6);
        let back = LogComplex::from_complex(w).to_complex();
        prop_assert!((back - w).norm() <= 1e-12 * w.norm());
    }

    #[test]
    fn log_complex_mul_matches_complex_product(
        a in finite_complex(20.0),
        b in finite_complex(20.0),
    ) {
        prop_assume!(a.norm() > 1e-6 && b.norm() > 1e-6);
        let v = LogComplex::from_complex(a).mul(LogComplex::from_complex(b));
        prop_assert!((v.to_complex() - a * b).norm() <= 1e-10 * (a * b).norm());
        prop_assert!(v.arg > -PI && v.arg <= PI + 1e-15, "arg {} not normalized", v.arg);
    }

    #[test]
    fn normalize_arg_is_idempotent_and_in_range(a in -50.0f64..50.0) {
        let n = normalize_arg(a);
        prop_assert!(n > -PI - 1e-15 && n <= PI + 1e-15);
        prop_assert!((normalize_arg(n) - n).abs() <= 1e-15);
        // same point on the circle
        let d = (a - n) / (2.0 * PI);
        prop_assert!((d - d.round()).abs() <= 1e-9, "shift {} not a whole turn", d);
    }

    #[test]
    fn smallest_n_is_the_threshold(p in 0.05f64..10.0) {
        let n = smallest_n(p);
        prop_assert!(n as f64 * p > 2.0);
        prop_assert!((n as f64 - 1.0) * p <= 2.0);
    }

    #[test]
    fn dimension_count_matches_the_removal_excess(
        r in 0usize..5,
        a in 0usize..5,
        sup in proptest::bool::ANY,
    ) {
        let lat = SquareLattice::new(PI).unwrap();
        let removed: Vec<_> = [(0, 0), (1, 0), (0, 1), (-1, 0), (1, 1)][..r]
            .iter()
            .map(|&(m, n)| LatticeIndex::new(m, n))
            .collect();
        let added: Vec<_> = (0..a)
            .map(|j| (Complex64::new(0.21 + 0.13 * j as f64, 0.37 - 0.11 * j as f64), 1))
            .collect();
        let seq = ZeroSequence::new(lat, removed, added).unwrap();
        let params = if sup {
            FockParams::sup(PI).unwrap()
        } else {
            FockParams::new(PI, 2.0).unwrap()
        };
        let rep = dimension(&seq, params).unwrap();
        // p = infinity keeps every function with at most r - a extra zeros;
        // finite p additionally needs smallest_n(p) vanishing orders of slack
        let slack = if sup { 0 } else { smallest_n(2.0) as i64 };
        let expect = (r as i64 - a as i64 - slack + 1).max(0) as u32;
        prop_assert_eq!(rep.k, expect);
        match rep.classification {
            Classification::UniquenessSet => prop_assert_eq!(expect, 0),
            Classification::ZeroSet { dim } => prop_assert_eq!(dim, expect),
        }
        prop_assert_eq!(rep.basis.len(), expect as usize);
    }
}

#[test]
fn adding_points_drains_the_dimension_one_at_a_time() {
    let lat = SquareLattice::new(PI).unwrap();
    let removed = vec![
        LatticeIndex::new(0, 0),
        LatticeIndex::new(1, 0),
        LatticeIndex::new(0, 1),
    ];
    let params = FockParams::sup(PI).unwrap();
    let mut seq = ZeroSequence::new(lat, removed, vec![]).unwrap();
    let mut prev = dimension(&seq, params).unwrap().k;
    assert_eq!(prev, 4);
    for j in 0..5 {
        let b = Complex64::new(0.4 + 0.05 * j as f64, -0.3 + 0.07 * j as f64);
        seq = seq.add_points(&[(b, 1)]);
        let k = dimension(&seq, params).unwrap().k;
        assert_eq!(k, prev.saturating_sub(1));
        prev = k;
    }
    assert_eq!(prev, 0);
}

#[test]
fn adding_a_removed_lattice_point_back_restores_the_full_sequence_count() {
    let lat = SquareLattice::new(PI).unwrap();
    let idx = LatticeIndex::new(2, -1);
    let seq = ZeroSequence::new(lat, vec![idx], vec![]).unwrap();
    let restored = seq.add_points(&[(lat.point(idx), 1)]);
    assert_eq!(restored.removed_count(), 0);
    assert_eq!(restored.added_multiplicity(), 0);
}
