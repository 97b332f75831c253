mod common;

use std::sync::LazyLock;

use common::*;
use num_traits::{Signed, Zero};
use polyflex::geom::{dist2, SignPolicy};
use polyflex::mesh::VertexId;
use polyflex::steffen::{
    build_steffen, expected_volume, oriented_volume, select_branch, select_branch_side,
    trilaterate, Side, SteffenError, SteffenModel, HALF_TURN,
};
use polyflex::{FieldElem, Point3};
use proptest::prelude::*;

static MODEL: LazyLock<SteffenModel> = LazyLock::new(|| build_steffen().unwrap());

fn p(i: u32) -> &'static Point3 {
    MODEL.realization.point(VertexId(i))
}

fn coord() -> impl Strategy<Value = Q> {
    (-40i64..=40, 1i64..=4).prop_map(|(n, d)| qr(n, d))
}

fn v3s() -> impl Strategy<Value = V3> {
    [coord(), coord(), coord()]
}

fn qd2(a: &V3, b: &V3) -> Q {
    (0..3).map(|k| (&a[k] - &b[k]) * (&a[k] - &b[k])).sum()
}

fn det3(m: [[Q; 3]; 3]) -> Q {
    &m[0][0] * (&m[1][1] * &m[2][2] - &m[1][2] * &m[2][1])
        - &m[0][1] * (&m[1][0] * &m[2][2] - &m[1][2] * &m[2][0])
        + &m[0][2] * (&m[1][0] * &m[2][1] - &m[1][1] * &m[2][0])
}

/// `r1 − |x − c1|²` for the point `x` of the radical line in the centers'
/// plane; negative when the spheres have no common point. Cramer's rule.
fn oracle_height_sq(c: &[V3; 3], r: &[Q; 3]) -> Option<Q> {
    let d = |a: &V3, b: &V3| [&a[0] - &b[0], &a[1] - &b[1], &a[2] - &b[2]];
    let u = d(&c[1], &c[0]);
    let v = d(&c[2], &c[0]);
    let w = [
        &u[1] * &v[2] - &u[2] * &v[1],
        &u[2] * &v[0] - &u[0] * &v[2],
        &u[0] * &v[1] - &u[1] * &v[0],
    ];
    let dot = |a: &V3, b: &V3| -> Q { (0..3).map(|k| &a[k] * &b[k]).sum() };
    let rhs = [
        (&r[0] - &r[1] + dot(&u, &u)) / q(2),
        (&r[0] - &r[2] + dot(&v, &v)) / q(2),
        q(0),
    ];
    let m = [u.clone(), v.clone(), w.clone()];
    let den = det3(m.clone());
    if den.is_zero() {
        return None;
    }
    let x: Vec<Q> = (0..3)
        .map(|col| {
            let mut mc = m.clone();
            for row in 0..3 {
                mc[row][col] = rhs[row].clone();
            }
            det3(mc) / &den
        })
        .collect();
    let x = [x[0].clone(), x[1].clone(), x[2].clone()];
    Some(&r[0] - dot(&x, &x))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn trilateration_recovers_a_rational_point(c in [v3s(), v3s(), v3s()], x in v3s()) {
        let r = c.each_ref().map(|ci| qd2(ci, &x));
        prop_assume!(oracle_height_sq(&c, &r).is_some());
        let [c1, c2, c3] = c.each_ref().map(pt);
        let [r1, r2, r3] = r.each_ref().map(|v| FieldElem::from_rational(v.clone()));
        let t = trilaterate(&c1, &r1, &c2, &r2, &c3, &r3).unwrap();
        prop_assert!(t.candidates.contains(&pt(&x)));
        for cand in &t.candidates {
            for (ci, ri) in [(&c1, &r1), (&c2, &r2), (&c3, &r3)] {
                prop_assert_eq!(&dist2(cand, ci).unwrap(), ri);
            }
        }
    }

    #[test]
    fn trilateration_residuals_vanish_exactly(c in [v3s(), v3s(), v3s()], r in [(1i64..4000), (1i64..4000), (1i64..4000)]) {
        let r = r.map(q);
        let Some(h) = oracle_height_sq(&c, &r) else {
            return Ok(());
        };
        let [c1, c2, c3] = c.each_ref().map(pt);
        let [r1, r2, r3] = r.each_ref().map(|v| FieldElem::from_rational(v.clone()));
        match trilaterate(&c1, &r1, &c2, &r2, &c3, &r3) {
            Err(SteffenError::NegativeDiscriminant) => prop_assert!(h.is_negative()),
            Err(e) => prop_assert!(false, "unexpected error {e}"),
            Ok(t) => {
                prop_assert!(!h.is_negative());
                prop_assert_eq!(t.tangent, h.is_zero());
                prop_assert!(t.tower.depth() <= 1);
                for cand in &t.candidates {
                    for (ci, ri) in [(&c1, &r1), (&c2, &r2), (&c3, &r3)] {
                        prop_assert_eq!(&dist2(cand, ci).unwrap(), ri);
                    }
                }
            }
        }
    }

    #[test]
    fn volume_does_not_depend_on_apex(a in v3s()) {
        let apex = pt(&a);
        let (vol, _) = oriented_volume(&MODEL.realization, &apex).unwrap();
        prop_assert_eq!(vol, expected_volume(&MODEL.tower).unwrap());
    }
}

#[test]
fn volume_with_vertex_apices() {
    let want = expected_volume(&MODEL.tower).unwrap();
    for i in 1..=9 {
        let (vol, _) = oriented_volume(&MODEL.realization, p(i)).unwrap();
        assert_eq!(vol, want, "apex v{i}");
    }
}

#[test]
fn half_turn_symmetry() {
    for (a, b) in HALF_TURN {
        let (pa, pb) = (p(a), p(b));
        assert_eq!(pb.x, -&pa.x, "v{a} -> v{b}");
        assert_eq!(pb.y, -&pa.y, "v{a} -> v{b}");
        assert_eq!(pb.z, pa.z, "v{a} -> v{b}");
    }
}

#[test]
fn every_branch_lives_in_the_full_tower() {
    assert_eq!(MODEL.tower.depth(), 3);
    assert_eq!(MODEL.branches.len(), 4);
    for b in &MODEL.branches {
        assert_eq!(b.tower_depth, 3, "{:?}", b.vertex);
    }
}

#[test]
fn v6_from_its_worked_example() {
    let (r1, r4, r9) = (FieldElem::from_int(100), FieldElem::from_int(25), FieldElem::from_int(144));
    let t = trilaterate(p(1), &r1, p(4), &r4, p(9), &r9).unwrap();
    let [c0, c1] = &t.candidates;
    let k = select_branch([c0, c1], [p(1), p(2), p(4)], p(3), SignPolicy::Exact).unwrap();
    let want = p(6).to_f64();
    let got = t.candidates[k].to_f64();
    assert!(got.distance(&want) < 1e-12, "{got:?} vs {want:?}");
    let other = t.candidates[1 - k].to_f64();
    assert!(other.distance(&want) > 1.0);
    // exact check: the chosen point satisfies the three sphere equations
    for (c, r) in [(p(1), &r1), (p(4), &r4), (p(9), &r9)] {
        assert_eq!(&dist2(&t.candidates[k], &c.lift(&t.tower).unwrap()).unwrap(), r);
    }
}

#[test]
fn select_branch_small_cases() {
    let plane = [
        Point3::from_ints(0, 0, 0),
        Point3::from_ints(1, 0, 0),
        Point3::from_ints(0, 1, 0),
    ];
    let pl = [&plane[0], &plane[1], &plane[2]];
    let up = Point3::from_ints(3, -2, 1);
    let hi = Point3::from_ints(0, 0, 2);
    let lo = Point3::from_ints(5, 5, -3);
    assert_eq!(select_branch([&hi, &lo], pl, &up, SignPolicy::Exact).unwrap(), 1);
    assert_eq!(select_branch([&lo, &hi], pl, &up, SignPolicy::Exact).unwrap(), 0);
    assert_eq!(select_branch_side([&hi, &lo], pl, &up, Side::Same, SignPolicy::Exact).unwrap(), 0);
    assert!(matches!(
        select_branch([&hi, &hi], pl, &up, SignPolicy::Exact),
        Err(SteffenError::AmbiguousBranch)
    ));
    let flat = Point3::from_ints(7, 7, 0);
    assert!(matches!(
        select_branch([&hi, &lo], pl, &flat, SignPolicy::Exact),
        Err(SteffenError::ReferenceOnPlane)
    ));
    let f = |p: &Point3| p.to_f64();
    let fpl = plane.each_ref().map(f);
    let k = select_branch([&f(&hi), &f(&lo)], [&fpl[0], &fpl[1], &fpl[2]], &f(&up), SignPolicy::Epsilon(1e-9));
    assert_eq!(k.unwrap(), 1);
}

/// The printed radical expressions for v6, evaluated with interval arithmetic
/// that knows nothing about the tower.
fn v6_enclosures(bits: u32) -> [Iv; 3] {
    let k = |n: i64| Iv::point(q(n));
    let s = |n: &str| Iv::point(n.parse::<Q>().unwrap());
    let root = |x: Iv| x.sqrt(bits);
    let s5146 = root(k(5146));
    let a = s("23829556819105727").add(&s("373057935372156").mul(&s5146));
    let s31a = root(k(31).mul(&a));
    let s166a = root(k(166).mul(&a));
    let x = s("258783870279")
        .add(&k(-389769468).mul(&s5146))
        .add(&k(102).mul(&s31a))
        .mul(&Iv::point(qr(1, 51998549858)));
    let y = s("-89746193059")
        .add(&k(533205663).mul(&s5146))
        .add(&k(-33).mul(&s31a))
        .add(&k(-11).mul(&s166a))
        .mul(&Iv::point(qr(1, 25999274929)));
    let z = k(6920764197)
        .mul(&root(k(31)))
        .add(&k(714577358).mul(&root(k(166))))
        .add(&k(-187).mul(&root(a)))
        .mul(&Iv::point(qr(1, 25999274929)));
    [x, y, z]
}

#[test]
fn v6_approximations_match_radicals_to_20_digits() {
    let tol = qr(1, 10).pow(20);
    let oracle = v6_enclosures(200);
    for (k, (iv, c)) in oracle.iter().zip(p(6).coords()).enumerate() {
        assert!(iv.width() < tol, "oracle too wide");
        let d = c.approx(25);
        assert!(d.width() < tol);
        assert!(d.lo <= iv.hi && iv.lo <= d.hi, "component {k}: {} vs [{}, {}]", d.to_decimal_string(22), iv.lo, iv.hi);
        assert!((&d.midpoint() - &iv.lo).abs() < tol, "component {k}");
    }
}
