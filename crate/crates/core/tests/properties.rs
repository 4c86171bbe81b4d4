use proptest::prelude::*;

use pvqubo::evaluation::{decode_assignment, intra_group_distance, silhouette, Assignment};
use pvqubo::profiles::{
    centered_similarity, distance_matrix, kernel_matrix, normalize_01, normalize_max_abs,
    Centering, KernelExponent, MatrixKind, ProfileSet, SimilarityMatrix,
};
use pvqubo::qubo::{
    build_distance_qubo, build_kernel_qubo, ising_energy, ising_from_qubo, qubo_from_ising,
    var_index, BitVector, QuboModel,
};

fn profile_set(max_n: usize) -> impl Strategy<Value = ProfileSet> {
    (2..=max_n, 1..=6usize).prop_flat_map(|(n, t)| {
        prop::collection::vec(prop::collection::vec(-5.0..5.0f64, t), n)
            .prop_map(|rows| ProfileSet::new(rows).unwrap())
    })
}

fn profiles_with_labels(max_n: usize, max_g: usize) -> impl Strategy<Value = (ProfileSet, Vec<usize>, usize)> {
    (profile_set(max_n), 1..=max_g).prop_flat_map(|(p, g)| {
        let n = p.len();
        (Just(p), prop::collection::vec(0..g, n), Just(g))
    })
}

fn random_qubo(max_n: usize) -> impl Strategy<Value = (QuboModel, BitVector)> {
    (1..=max_n).prop_flat_map(|n| {
        (
            prop::collection::vec(-3.0..3.0f64, n * (n + 1) / 2),
            -3.0..3.0f64,
            prop::collection::vec(any::<bool>(), n),
        )
            .prop_map(move |(upper, offset, bits)| {
                let mut q = QuboModel::zeros(n);
                let mut k = 0;
                for i in 0..n {
                    for j in i..n {
                        q.add(i, j, upper[k]);
                        k += 1;
                    }
                }
                q.set_offset(offset);
                (q, BitVector::from_bits(bits))
            })
    })
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
}

fn positions(values: &[f64]) -> (usize, usize) {
    let mut lo = 0;
    let mut hi = 0;
    for (k, &v) in values.iter().enumerate() {
        if v < values[lo] {
            lo = k;
        }
        if v > values[hi] {
            hi = k;
        }
    }
    (lo, hi)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn distances_are_a_metric(p in profile_set(8)) {
        let d = distance_matrix(&p);
        let n = d.n();
        for i in 0..n {
            prop_assert_eq!(d.get(i, i), 0.0);
            for j in 0..n {
                prop_assert!(d.get(i, j) >= 0.0);
                prop_assert_eq!(d.get(i, j), d.get(j, i));
                for k in 0..n {
                    prop_assert!(d.get(i, k) <= d.get(i, j) + d.get(j, k) + 1e-9);
                }
            }
        }
    }

    #[test]
    fn kernel_decreases_with_distance(p in profile_set(8), sigma in 0.05..5.0f64) {
        let d = distance_matrix(&p);
        let k = kernel_matrix(&d, sigma, KernelExponent::Distance).unwrap();
        let pairs: Vec<(f64, f64)> = d.values().iter().copied().zip(k.values().iter().copied()).collect();
        for &(da, ka) in &pairs {
            prop_assert!((0.0..=1.0).contains(&ka));
            for &(db, kb) in &pairs {
                if da < db {
                    prop_assert!(ka >= kb);
                }
            }
        }
    }

    #[test]
    fn standard_centering_zeroes_row_sums(p in profile_set(8), sigma in 0.1..3.0f64) {
        let k = kernel_matrix(&distance_matrix(&p), sigma, KernelExponent::Distance).unwrap();
        let c = centered_similarity(&k, Centering::Standard).unwrap();
        for i in 0..c.n() {
            prop_assert!(c.row(i).iter().sum::<f64>().abs() < 1e-9);
        }
    }

    #[test]
    fn normalizing_keeps_extreme_positions(
        values in prop::collection::vec(-10.0..10.0f64, 9),
    ) {
        let rows: Vec<Vec<f64>> = values.chunks(3).map(<[f64]>::to_vec).collect();
        let m = SimilarityMatrix::from_rows(&rows, MatrixKind::CenteredSimilarity).unwrap();
        let want = positions(m.values());
        if let Ok(u) = normalize_01(&m) {
            prop_assert_eq!(positions(u.values()), want);
            prop_assert!(u.values().iter().all(|v| (0.0..=1.0).contains(v)));
        }
        if let Ok(s) = normalize_max_abs(&m) {
            prop_assert_eq!(positions(s.values()), want);
            prop_assert!(s.values().iter().all(|v| v.abs() <= 1.0));
        }
    }

    #[test]
    fn ising_conversion_keeps_energy((q, x) in random_qubo(8)) {
        let ising = ising_from_qubo(&q);
        let e = q.energy(&x).unwrap();
        prop_assert!(close(ising_energy(&ising, &x.to_spins()).unwrap(), e));
        let back = qubo_from_ising(&ising);
        prop_assert!(close(back.energy(&x).unwrap(), e));
    }

    #[test]
    fn no_coupling_across_groups_of_distinct_profiles(
        p in profile_set(6),
        g in 2..=4usize,
        sigma in 0.1..2.0f64,
    ) {
        let d = distance_matrix(&p);
        let k = kernel_matrix(&d, sigma, KernelExponent::Distance).unwrap();
        let c = centered_similarity(&k, Centering::SubtractAll).unwrap();
        for q in [build_distance_qubo(&d, g, 1.0).unwrap(), build_kernel_qubo(&c, g, 1.0).unwrap()] {
            for i in 0..d.n() {
                for j in i + 1..d.n() {
                    for a in 0..g {
                        for b in 0..g {
                            if a != b {
                                prop_assert_eq!(q.get(var_index(i, a, g), var_index(j, b, g)), 0.0);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn silhouette_is_bounded_and_label_free(
        (p, labels, g) in profiles_with_labels(9, 4),
        shift in 0..4usize,
    ) {
        let d = distance_matrix(&p);
        let a = Assignment::new(labels.clone(), g).unwrap();
        let result = silhouette(&a, &d);
        if a.non_empty_groups() < 2 {
            prop_assert!(result.is_err());
            return Ok(());
        }
        let s = result.unwrap();
        prop_assert!((-1.0..=1.0).contains(&s));
        let renamed = Assignment::new(labels.iter().map(|l| (l + shift) % g).collect(), g).unwrap();
        prop_assert!(close(silhouette(&renamed, &d).unwrap(), s));
    }

    #[test]
    fn merging_groups_never_lowers_intra_distance((p, labels, g) in profiles_with_labels(9, 4)) {
        let d = distance_matrix(&p);
        let before = intra_group_distance(&Assignment::new(labels.clone(), g).unwrap(), &d).unwrap();
        let merged: Vec<usize> = labels.iter().map(|&l| if l == g - 1 { 0 } else { l }).collect();
        let after = intra_group_distance(&Assignment::new(merged, g).unwrap(), &d).unwrap();
        prop_assert!(after >= before - 1e-12);
    }

    #[test]
    fn decode_inverts_encode((p, labels, g) in profiles_with_labels(9, 4)) {
        let a = Assignment::new(labels, g).unwrap();
        let bits = a.to_bits();
        prop_assert_eq!(bits.count_ones(), p.len());
        let (back, violations) = decode_assignment(&bits, p.len(), g).unwrap();
        prop_assert_eq!(violations, 0);
        prop_assert_eq!(back.groups(), a.groups());
    }

    #[test]
    fn feasible_distance_energy_is_intra_distance(
        (p, labels, g) in profiles_with_labels(9, 4),
        lambda in 0.1..50.0f64,
    ) {
        let d = distance_matrix(&p);
        let q = build_distance_qubo(&d, g, lambda).unwrap();
        let a = Assignment::new(labels, g).unwrap();
        let e = q.energy(&a.to_bits()).unwrap();
        prop_assert!(close(e, intra_group_distance(&a, &d).unwrap()));
    }
}
