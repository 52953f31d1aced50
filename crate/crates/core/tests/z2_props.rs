use num_traits::{Signed, Zero};
use proptest::prelude::*;
use regulus_core::rational::{self, frac, int};
use regulus_core::svd;
use regulus_core::z2::{self, UnipotentTriple, VerdictKind, WitnessKind, Z2UnipotentRep};
use regulus_core::{GroupWord, Rational, RationalMatrix};

fn small_rational() -> impl Strategy<Value = Rational> {
    (-6i64..=6, 1i64..=3).prop_map(|(p, q)| frac(p, q))
}

/// Commuting pairs: `(a, c)` of both generators proportional to a common
/// `(p, q)`, integer `a`. Zero `p`, `q` or multipliers give every normal form.
fn rep() -> impl Strategy<Value = Z2UnipotentRep> {
    (
        prop_oneof![Just(0i64), -3i64..=3],
        prop_oneof![Just(0i64), Just(1i64), -3i64..=3],
        prop_oneof![Just(0i64), -3i64..=3],
        prop_oneof![Just(0i64), -3i64..=3],
        small_rational(),
        small_rational(),
    )
        .prop_map(|(p, q, k1, k2, b1, b2)| {
            let x = UnipotentTriple::new(int(k1 * p), b1, int(k1 * q));
            let y = UnipotentTriple::new(int(k2 * p), b2, int(k2 * q));
            Z2UnipotentRep::new(x, y).unwrap()
        })
}

/// Reps with `a c != 0` on both generators.
fn generic_rep() -> impl Strategy<Value = Z2UnipotentRep> {
    let nonzero = || prop_oneof![-3i64..=-1, 1i64..=3];
    (nonzero(), nonzero(), nonzero(), nonzero(), small_rational(), small_rational()).prop_map(
        |(p, q, k1, k2, b1, b2)| {
            let x = UnipotentTriple::new(int(k1 * p), b1, int(k1 * q));
            let y = UnipotentTriple::new(int(k2 * p), b2, int(k2 * q));
            Z2UnipotentRep::new(x, y).unwrap()
        },
    )
}

fn antidiagonal(g: &RationalMatrix) -> RationalMatrix {
    let mut out = RationalMatrix::identity(3);
    for i in 0..3 {
        for j in 0..3 {
            out.set(i, j, g.get(2 - i, 2 - j).clone());
        }
    }
    out
}

fn has_ac(t: &UnipotentTriple) -> bool {
    !t.x.is_zero() && !t.z.is_zero()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn dual_swaps_line_and_plane(r in rep()) {
        let gens = z2::dual_rep(&r.generators()).unwrap();
        let x = UnipotentTriple::from_matrix(&antidiagonal(&gens["x"])).unwrap();
        let y = UnipotentTriple::from_matrix(&antidiagonal(&gens["y"])).unwrap();
        let dual = Z2UnipotentRep::new(x, y).unwrap();
        prop_assert_eq!(&dual, &r.dual());
        match (z2::classify_z2(&r), z2::classify_z2(&dual)) {
            (Ok(v), Ok(d)) => prop_assert_eq!(d.kind, v.kind.dual()),
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "{r}: {a:?} vs dual {b:?}"),
        }
    }

    #[test]
    fn closed_form_matches_matrix_powers(r in rep(), n in -6i64..=6, m in -6i64..=6) {
        let w = GroupWord::from_pairs([("x", n), ("y", m)]);
        let direct = UnipotentTriple::from_matrix(&w.eval(&r.generators()).unwrap()).unwrap();
        prop_assert_eq!(r.eval(n, m), direct);
    }

    #[test]
    fn derived_constants_from_matrix_entries(r in rep()) {
        let gx = r.x().to_matrix();
        let gy = r.y().to_matrix();
        prop_assert_eq!(r.big_b_x(), &(gx.get(0, 2) - gx.get(0, 1) * gx.get(0, 1) / int(2)));
        prop_assert_eq!(r.big_b_y(), &(gy.get(0, 2) - gy.get(0, 1) * gy.get(0, 1) / int(2)));
        if r.a_x().is_zero() {
            prop_assert!(r.lambda().is_none() && r.z_xy().is_none());
            return Ok(());
        }
        prop_assert_eq!(r.lambda().unwrap(), &(gx.get(1, 2) / gx.get(0, 1)));
        if !has_ac(&r.x()) {
            return Ok(());
        }
        let (nr, lambda) = r.normalize().unwrap();
        prop_assert!(nr.is_normalized());
        prop_assert_eq!(&lambda, r.lambda().unwrap());
        // x^{a_y} y^{-a_x} has a = 0, and its (1,3) entry is -a_x Z / 2
        let (ax, ay) = (rational::floor(nr.a_x()), rational::floor(nr.a_y()));
        let ax: i64 = ax.try_into().unwrap();
        let ay: i64 = ay.try_into().unwrap();
        let w = GroupWord::from_pairs([("x", ay), ("y", -ax)]);
        let g = w.eval(&nr.generators()).unwrap();
        prop_assert!(g.get(0, 1).is_zero());
        let z = -int(2) * g.get(0, 2) / int(ax);
        prop_assert_eq!(nr.z_xy().unwrap(), &z);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn witness_bracketing(r in generic_rep(), t in 1i64..=10_000) {
        let (nr, _) = r.normalize().unwrap();
        let z = nr.z_xy().unwrap().clone();
        prop_assume!(!z.is_zero());
        let m = if z.is_positive() { -t } else { t };
        let (n, triple) = z2::witness_claim2(&nr, m).unwrap();
        let a = int(n) * nr.a_x() + int(m) * nr.a_y();
        prop_assert_eq!(&triple.x, &a);
        let target = (int(m) * &z).abs();
        let slack = nr.a_x().abs();
        prop_assert!(rational::sqrt_ge(&target, &(&a - &slack)), "a = {a}, |mZ| = {target}");
        prop_assert!(rational::sqrt_le(&target, &(&a + &slack)), "a = {a}, |mZ| = {target}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// For lattice types the ratio is `f(L(n, m))` with `f(v) = |v|_2^2 / |v|_1`
    /// and `L` the linear map to the two nonzero coordinates. `f` has
    /// sup-norm gradient at most 3, so sphere minima can drop by at most
    /// `3 max |L e_i|_1` per step, and `f(v) >= |v|_2 / sqrt 2` forces
    /// `min(r) >= r sigma_min(L) / 2`.
    #[test]
    fn regular_reps_have_growing_sphere_minima(r in rep()) {
        let v = z2::classify_z2(&r);
        let kind = match v {
            Ok(v) => v.kind,
            Err(_) => return Ok(()),
        };
        let coords = |t: UnipotentTriple| -> [f64; 2] {
            let pick = if kind == VerdictKind::RegularLatticeLineType { [t.x, t.y] } else { [t.y, t.z] };
            [rational::to_f64(&pick[0]), rational::to_f64(&pick[1])]
        };
        prop_assume!(matches!(kind, VerdictKind::RegularLatticeLineType | VerdictKind::RegularLatticePlaneType));
        let (c1, c2) = (coords(r.eval(1, 0)), coords(r.eval(0, 1)));
        let defect = 3.0 * (c1[0].abs() + c1[1].abs()).max(c2[0].abs() + c2[1].abs());
        let det = (c1[0] * c2[1] - c1[1] * c2[0]).abs();
        let fro = c1.iter().chain(&c2).map(|x| x * x).sum::<f64>();
        // smallest singular value of the 2x2 matrix [c1 c2]
        let sigma_min = det / ((fro + ((fro * fro - 4.0 * det * det).max(0.0)).sqrt()) / 2.0).sqrt();
        let mut prev = rational::to_f64(&z2::min_sphere_ratio(&r, 1).unwrap());
        for radius in 2..=200 {
            let cur = rational::to_f64(&z2::min_sphere_ratio(&r, radius).unwrap());
            prop_assert!(cur >= prev - defect * (1.0 + 1e-12), "r = {radius}: {cur} < {prev} - {defect}");
            prop_assert!(cur >= radius as f64 * sigma_min / 2.0 * (1.0 - 1e-9), "r = {radius}: {cur}");
            prev = cur;
        }
    }

    #[test]
    fn not_regular_witness_stays_bounded(r in rep()) {
        let v = z2::classify_z2(&r);
        prop_assume!(matches!(v.as_ref().map(|v| v.kind), Ok(VerdictKind::NotRegular)));
        let v = v.unwrap();
        let w = v.witness.unwrap();
        prop_assert!(matches!(w.kind, WitnessKind::Claim2 | WitnessKind::MixedReduced));
        for t in 1..=10_000u64 {
            let (n, m) = w.exponents(t).unwrap();
            let g = r.eval(n, m).to_matrix();
            let gap = svd::gap_ratio(&g).unwrap();
            prop_assert!(gap <= w.bound, "t = {t}: gap {gap} > bound {}", w.bound);
        }
        let (n, m) = w.exponents(10_000).unwrap();
        let norm = rational::to_f64(&r.eval(n, m).to_matrix().frobenius_norm_sq());
        prop_assert!(norm >= 10_000.0);
    }
}
