use proptest::prelude::*;
use regulus_core::flag::OPPOSITION_EPS;
use regulus_core::scan::{self, BallSpec, ScanOptions, ScanVerdict};
use regulus_core::{GroupWord, Generators, RationalMatrix};

/// Symmetric square of a 2x2 integer matrix: an irreducible copy of
/// `SL_2` in `SL_3`, where `sigma1/sigma2 = s^2` for `s = sigma1` upstairs.
fn sym2(a: i64, b: i64, c: i64, d: i64) -> RationalMatrix {
    RationalMatrix::from_i64(3, &[a * a, a * b, b * b, 2 * a * c, a * d + b * c, 2 * b * d, c * c, c * d, d * d]).unwrap()
}

fn sanov() -> Generators {
    [("a".to_string(), sym2(1, 2, 0, 1)), ("b".to_string(), sym2(1, 0, 2, 1))].into_iter().collect()
}

fn integer_matrix() -> impl Strategy<Value = RationalMatrix> {
    proptest::collection::vec(-3i64..=3, 9).prop_filter_map("singular", |e| {
        let m = RationalMatrix::from_i64(3, &e).ok()?;
        m.inverse().ok()?;
        Some(m)
    })
}

fn word() -> impl Strategy<Value = GroupWord> {
    proptest::collection::vec((prop_oneof![Just("a"), Just("b")], prop_oneof![Just(-1i64), Just(1)]), 1..=3)
        .prop_map(GroupWord::from_pairs)
}

fn named(ms: Vec<RationalMatrix>) -> Generators {
    ms.into_iter().enumerate().map(|(i, m)| (format!("g{i}"), m)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn free_sphere_sizes(gens in proptest::collection::vec(integer_matrix(), 1..=3), r in 1usize..=4) {
        let k = gens.len();
        let spec = BallSpec::new(named(gens), r, false).unwrap();
        let sphere = scan::enumerate_sphere(&spec, r).unwrap();
        prop_assert_eq!(sphere.len(), 2 * k * (2 * k - 1).pow(r as u32 - 1));
    }

    #[test]
    fn subgroups_of_a_regular_group_have_no_bounded_witness(words in proptest::collection::vec(word(), 1..=2)) {
        let parent = sanov();
        let mut gens = Vec::new();
        for w in &words {
            let m = w.eval(&parent).unwrap();
            if !m.is_identity() {
                gens.push(m);
            }
        }
        prop_assume!(!gens.is_empty());
        let spec = BallSpec::new(named(gens), 6, true).unwrap();
        let report = scan::sphere_stats(&spec, &ScanOptions::default()).unwrap();
        prop_assert_ne!(report.verdict, ScanVerdict::BoundedWitness, "{:?}", words);
    }

    #[test]
    fn limit_sample_flags_are_incident(gens in proptest::collection::vec(integer_matrix(), 1..=2)) {
        let spec = BallSpec::new(named(gens), 4, true).unwrap();
        let sample = scan::limit_set_sample(&spec, 2.0).unwrap();
        for s in &sample.flags {
            prop_assert!(s.flag.hyperplane.incidence(&s.flag.point).unwrap() <= OPPOSITION_EPS);
        }
        prop_assert_eq!(sample.empty_warning, sample.flags.is_empty());
    }

    #[test]
    fn scans_are_deterministic(gens in proptest::collection::vec(integer_matrix(), 1..=2)) {
        let spec = BallSpec::new(named(gens), 5, true).unwrap();
        let a = scan::sphere_stats(&spec, &ScanOptions::default()).unwrap();
        let b = scan::sphere_stats(&spec, &ScanOptions::default()).unwrap();
        prop_assert_eq!(a, b);
    }
}
