use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regulus_core::flag::{self, ProjPoint};
use regulus_core::pingpong::{self, BallUnionSet};
use regulus_core::RationalMatrix;

fn random_point(rng: &mut ChaCha8Rng, d: usize) -> ProjPoint {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if let Ok(p) = ProjPoint::new(&v) {
            return p;
        }
    }
}

fn random_invertible(rng: &mut ChaCha8Rng, d: usize) -> RationalMatrix {
    loop {
        let e: Vec<i64> = (0..d * d).map(|_| rng.gen_range(-4..=4)).collect();
        let m = RationalMatrix::from_i64(d, &e).unwrap();
        if m.inverse().is_ok() {
            return m;
        }
    }
}

#[test]
fn global_lipschitz_bound_holds_on_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..100 {
        let d = if i % 2 == 0 { 3 } else { 4 };
        let g = random_invertible(&mut rng, d);
        let l = pingpong::global_lipschitz(&g).unwrap();
        for _ in 0..10_000 {
            let p = random_point(&mut rng, d);
            let q = random_point(&mut rng, d);
            let before = flag::fs_distance(&p, &q).unwrap();
            let after = flag::fs_distance(&pingpong::apply_point(&g, &p).unwrap(), &pingpong::apply_point(&g, &q).unwrap()).unwrap();
            assert!(after <= l * before * (1.0 + 1e-6) + 1e-12, "{g:?}: {after} > {l} * {before}");
        }
    }
}

fn unit(d: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-1.0f64..1.0, d).prop_filter("zero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-3)
}

fn matrix() -> impl Strategy<Value = RationalMatrix> {
    proptest::collection::vec(-2i64..=2, 9).prop_filter_map("singular", |e| {
        let mut m = RationalMatrix::from_i64(3, &e).ok()?;
        for i in 0..3 {
            let v = m.get(i, i) + regulus_core::rational::int(3);
            m.set(i, i, v);
        }
        m.inverse().ok()?;
        Some(m)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inclusion_is_monotone(
        g in matrix(),
        centers in proptest::collection::vec(unit(3), 1..=3),
        ra in 0.02f64..0.15,
        rb in 0.05f64..0.5,
        grow in 0.0f64..0.3,
    ) {
        let h = 0.05;
        let a_centers: Vec<ProjPoint> = centers.iter().map(|c| ProjPoint::new(c).unwrap()).collect();
        let a = BallUnionSet::new(a_centers.clone(), vec![ra; a_centers.len()]).unwrap();
        let b_centers: Vec<ProjPoint> = a_centers.iter().map(|c| pingpong::apply_point(&g, c).unwrap()).collect();
        let b = BallUnionSet::new(b_centers.clone(), vec![rb; b_centers.len()]).unwrap();
        let base = match pingpong::map_set_inclusion(&g, &a, &b, h) {
            Ok(inc) => inc,
            Err(_) => return Ok(()),
        };
        prop_assume!(base.holds);
        let bigger = BallUnionSet::new(b_centers.clone(), vec![(rb + grow).min(1.5); b_centers.len()]).unwrap();
        let extra = bigger.union(&BallUnionSet::single(ProjPoint::basis(3, 0), 0.1).unwrap()).unwrap();
        for wider in [bigger, extra] {
            let inc = pingpong::map_set_inclusion(&g, &a, &wider, h).unwrap();
            prop_assert!(inc.holds);
        }
        if a_centers.len() > 1 {
            let fewer = BallUnionSet::new(a_centers[1..].to_vec(), vec![ra; a_centers.len() - 1]).unwrap();
            prop_assert!(pingpong::map_set_inclusion(&g, &fewer, &b, h).unwrap().holds);
        }
        let thinner = BallUnionSet::new(a_centers.clone(), vec![ra / 2.0; a_centers.len()]).unwrap();
        prop_assert!(pingpong::map_set_inclusion(&g, &thinner, &b, h).unwrap().holds);
    }
}
