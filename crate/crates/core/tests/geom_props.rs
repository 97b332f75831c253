mod common;

use common::*;
use polyflex::geom::{
    classify_segment_triangle, orient6, resolve_needs_study, PairTag, Point3, Resolution, Shared,
    SignPolicy,
};
use polyflex::numfield::{FieldElem, FieldTower};
use proptest::prelude::*;

fn coord(range: i64, den: i64) -> impl Strategy<Value = Q> {
    (-range..=range, 1..=den).prop_map(|(n, d)| qr(n, d))
}

fn v3s(range: i64, den: i64) -> impl Strategy<Value = V3> {
    [coord(range, den), coord(range, den), coord(range, den)]
}

/// Small integer grids make coplanar, collinear and boundary cases common.
fn grid() -> impl Strategy<Value = V3> {
    v3s(2, 1)
}

fn tag_of(t: PairTag) -> Expect {
    match t {
        PairTag::Disjoint => Expect::Disjoint,
        PairTag::Intersecting => Expect::Intersecting,
        PairTag::SharedSubsimplex => Expect::SharedSubsimplex,
        PairTag::NeedsStudy => Expect::NeedsStudy,
    }
}

fn to_f64(p: &Point3) -> Point3<f64> {
    p.to_f64()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn classifier_matches_barycentric_oracle(
        y in [v3s(20, 5), v3s(20, 5), v3s(20, 5)],
        z in [v3s(20, 5), v3s(20, 5)],
    ) {
        prop_assume!(nondegenerate_triangle(&y) && z[0] != z[1]);
        let want = expect_unshared(&z, &y);
        let [y1, y2, y3] = y.each_ref().map(pt);
        let got = classify_segment_triangle(&pt(&z[0]), &pt(&z[1]), &y1, &y2, &y3, Shared::None, SignPolicy::Exact).unwrap();
        prop_assert_eq!(tag_of(got.tag), want);
    }

    #[test]
    fn classifier_on_degenerate_grid(y in [grid(), grid(), grid()], z in [grid(), grid()], k in 0usize..3, share in any::<bool>()) {
        prop_assume!(nondegenerate_triangle(&y));
        let z = if share { [y[k].clone(), z[1].clone()] } else { z };
        prop_assume!(z[0] != z[1]);
        let [y1, y2, y3] = y.each_ref().map(pt);
        let shared = if share {
            Shared::OneVertex { segment_end: 0, triangle_vertex: k }
        } else {
            Shared::None
        };
        let want = if share { expect_shared_vertex(&z, &y) } else { expect_unshared(&z, &y) };
        let got = classify_segment_triangle(&pt(&z[0]), &pt(&z[1]), &y1, &y2, &y3, shared, SignPolicy::Exact).unwrap();
        prop_assert_eq!(tag_of(got.tag), want);
    }

    #[test]
    fn resolver_matches_set_oracle(y in [grid(), grid(), grid()], z in [grid(), grid()], k in 0usize..3, share in any::<bool>()) {
        prop_assume!(nondegenerate_triangle(&y));
        let z = if share { [y[k].clone(), z[1].clone()] } else { z };
        prop_assume!(z[0] != z[1]);
        let [y1, y2, y3] = y.each_ref().map(pt);
        let (shared, want) = if share {
            let s = Shared::OneVertex { segment_end: 0, triangle_vertex: k };
            let w = if shared_vertex_proper(&z, &y) { Resolution::ProperIntersection } else { Resolution::TouchOnly };
            (s, w)
        } else {
            let w = if segment_meets_triangle(&z, &y) { Resolution::ProperIntersection } else { Resolution::Disjoint };
            (Shared::None, w)
        };
        let got = resolve_needs_study(&pt(&z[0]), &pt(&z[1]), &y1, &y2, &y3, shared, SignPolicy::Exact).unwrap();
        prop_assert_eq!(got, want, "z = {:?}, y = {:?}", z, y);
    }

    #[test]
    fn resolver_agrees_with_classifier_when_decided(y in [grid(), grid(), grid()], z in [grid(), grid()]) {
        prop_assume!(nondegenerate_triangle(&y) && z[0] != z[1]);
        let [y1, y2, y3] = y.each_ref().map(pt);
        let (z1, z2) = (pt(&z[0]), pt(&z[1]));
        let c = classify_segment_triangle(&z1, &z2, &y1, &y2, &y3, Shared::None, SignPolicy::Exact).unwrap().tag;
        let r = resolve_needs_study(&z1, &z2, &y1, &y2, &y3, Shared::None, SignPolicy::Exact).unwrap();
        match c {
            PairTag::Intersecting => prop_assert_eq!(r, Resolution::ProperIntersection),
            PairTag::Disjoint => prop_assert_eq!(r, Resolution::Disjoint),
            _ => {}
        }
    }

    #[test]
    fn orient6_antisymmetric_and_translation_invariant(p in [v3s(30, 7), v3s(30, 7), v3s(30, 7), v3s(30, 7)], t in v3s(30, 7)) {
        let [a, b, c, d] = p.each_ref().map(pt);
        let g = orient6(&a, &b, &c, &d).unwrap();
        prop_assert_eq!(orient6(&b, &a, &c, &d).unwrap(), -&g);
        prop_assert_eq!(orient6(&a, &c, &b, &d).unwrap(), -&g);
        prop_assert_eq!(orient6(&a, &b, &d, &c).unwrap(), -&g);
        prop_assert_eq!(orient6(&b, &c, &a, &d).unwrap(), g.clone());
        let tp = pt(&t);
        let [ta, tb, tc, td] = [&a, &b, &c, &d].map(|x| x.add(&tp));
        prop_assert_eq!(orient6(&ta, &tb, &tc, &td).unwrap(), g);
    }

    #[test]
    fn classifier_invariant_under_relabeling(y in [v3s(6, 2), v3s(6, 2), v3s(6, 2)], z in [v3s(6, 2), v3s(6, 2)]) {
        prop_assume!(nondegenerate_triangle(&y) && z[0] != z[1]);
        let [y1, y2, y3] = y.each_ref().map(pt);
        let (z1, z2) = (pt(&z[0]), pt(&z[1]));
        let base = classify_segment_triangle(&z1, &z2, &y1, &y2, &y3, Shared::None, SignPolicy::Exact).unwrap().tag;
        for (a, b, c) in [(&y2, &y3, &y1), (&y3, &y1, &y2), (&y2, &y1, &y3), (&y1, &y3, &y2)] {
            for (p, q) in [(&z1, &z2), (&z2, &z1)] {
                let t = classify_segment_triangle(p, q, a, b, c, Shared::None, SignPolicy::Exact).unwrap().tag;
                prop_assert_eq!(t, base);
            }
        }
    }

    #[test]
    fn float_mode_matches_exact_on_small_integers(y in [grid(), grid(), grid()], z in [grid(), grid()]) {
        prop_assume!(nondegenerate_triangle(&y) && z[0] != z[1]);
        let [y1, y2, y3] = y.each_ref().map(pt);
        let (z1, z2) = (pt(&z[0]), pt(&z[1]));
        let exact = classify_segment_triangle(&z1, &z2, &y1, &y2, &y3, Shared::None, SignPolicy::Exact).unwrap();
        let [f1, f2, f3] = [&y1, &y2, &y3].map(to_f64);
        let float = classify_segment_triangle(&to_f64(&z1), &to_f64(&z2), &f1, &f2, &f3, Shared::None, SignPolicy::Epsilon(1e-9)).unwrap();
        prop_assert_eq!(exact.tag, float.tag);
    }
}

#[test]
fn irrational_coordinates_classify() {
    // the segment runs along x = √2 - 1 through the unit triangle's interior
    let t = FieldTower::rationals().adjoin(&FieldElem::from_int(2)).unwrap();
    let c = &t.generator(1) - &FieldElem::from_int(1);
    let third = FieldElem::from_ratio(1, 4);
    let z1 = Point3::new(c.clone(), third.clone(), FieldElem::from_int(-1));
    let z2 = Point3::new(c, third, FieldElem::from_int(1));
    let y = [
        Point3::from_ints(0, 0, 0),
        Point3::from_ints(1, 0, 0),
        Point3::from_ints(0, 1, 0),
    ];
    let v = classify_segment_triangle(&z1, &z2, &y[0], &y[1], &y[2], Shared::None, SignPolicy::Exact)
        .unwrap();
    assert_eq!(v.tag, PairTag::Intersecting);
}
