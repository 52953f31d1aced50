use proptest::prelude::*;
use regulus_core::flag::{self, ProjFlag, ProjHyperplane, ProjPoint};
use regulus_core::rational::{frac, int};
use regulus_core::svd;
use regulus_core::{Rational, RationalMatrix};

fn unit_vec(d: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-1.0f64..1.0, d).prop_filter("zero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-4)
}

fn point(d: usize) -> impl Strategy<Value = ProjPoint> {
    unit_vec(d).prop_map(|v| ProjPoint::new(&v).unwrap())
}

/// Random flag: a point and a conormal orthogonalized against it.
fn random_flag(d: usize) -> impl Strategy<Value = ProjFlag> {
    (unit_vec(d), unit_vec(d)).prop_filter_map("degenerate", move |(p, c)| {
        let pp: f64 = p.iter().map(|x| x * x).sum();
        let t: f64 = p.iter().zip(&c).map(|(a, b)| a * b).sum::<f64>() / pp;
        let c: Vec<f64> = c.iter().zip(&p).map(|(ci, pi)| ci - t * pi).collect();
        if c.iter().map(|x| x * x).sum::<f64>() < 1e-6 {
            return None;
        }
        ProjFlag::from_numeric(&p, &c).ok()
    })
}

fn small_matrix() -> impl Strategy<Value = RationalMatrix> {
    proptest::collection::vec(-5i64..=5, 9).prop_filter_map("singular", |e| {
        let m = RationalMatrix::from_i64(3, &e).ok()?;
        m.inverse().ok()?;
        Some(m)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn fs_distance_triangle_inequality(p in point(4), q in point(4), r in point(4)) {
        let pq = flag::fs_distance(&p, &q).unwrap();
        let qr = flag::fs_distance(&q, &r).unwrap();
        let pr = flag::fs_distance(&p, &r).unwrap();
        prop_assert!(pr <= pq + qr + 1e-9);
        prop_assert!((0.0..=std::f64::consts::FRAC_PI_2 + 1e-12).contains(&pq));
        prop_assert_eq!(pq, flag::fs_distance(&q, &p).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn opposition_is_symmetric(f in random_flag(3), g in random_flag(3)) {
        prop_assert_eq!(flag::opposition_margin(&f, &g).unwrap(), flag::opposition_margin(&g, &f).unwrap());
        prop_assert_eq!(flag::flag_opposite(&f, &g).unwrap(), flag::flag_opposite(&g, &f).unwrap());
    }

    #[test]
    fn inverse_attracts_onto_repelling_hyperplane(g in small_matrix()) {
        let gap = svd::gap_ratio(&g).unwrap();
        prop_assume!(gap > 1.0 + 1e-6);
        let limit = flag::attracting_flag(&g).unwrap();
        let inv = flag::attracting_flag(&g.inverse().unwrap());
        prop_assume!(inv.is_ok());
        let inv = inv.unwrap();
        let inc = limit.repelling.hyperplane.incidence(&inv.attracting.point).unwrap();
        prop_assert!(inc <= 1e-6, "incidence {inc}");
    }

    #[test]
    fn unipotent_radical_translates_chart(
        x in (-50i64..50, 1i64..20),
        y in (-50i64..50, 1i64..20),
        p in proptest::collection::vec((-50i64..50, 1i64..20), 2),
        w in (1i64..50, 1i64..20),
    ) {
        let (x, y) = (frac(x.0, x.1), frac(y.0, y.1));
        let mut g = RationalMatrix::identity(3);
        g.set(0, 2, x.clone());
        g.set(1, 2, y.clone());
        let conormal = [int(0), int(0), int(1)];
        let w = frac(w.0, w.1);
        let hom: Vec<Rational> = vec![frac(p[0].0, p[0].1) * &w, frac(p[1].0, p[1].1) * &w, w.clone()];
        let before = flag::affine_chart_exact(&conormal, &hom).unwrap();
        let after = flag::affine_chart_exact(&conormal, &flag::apply_exact(&g, &hom)).unwrap();
        prop_assert_eq!(&after[0] - &before[0], x);
        prop_assert_eq!(&after[1] - &before[1], y);
    }
}

#[test]
fn basis_flags_are_opposite_when_transverse() {
    let f = ProjFlag::new(ProjPoint::basis(3, 0), ProjHyperplane::kernel_of_basis(3, 2)).unwrap();
    let g = ProjFlag::new(ProjPoint::basis(3, 2), ProjHyperplane::kernel_of_basis(3, 0)).unwrap();
    assert_eq!(flag::opposition_margin(&f, &g).unwrap(), 1.0);
    assert!(!flag::flag_opposite(&f, &f).unwrap());
}
