//! Independent reference implementations for the test suites. Nothing here
//! calls into the library's predicates.

#![allow(dead_code)]

use std::collections::BTreeMap;

use num_bigint::{BigInt, Sign as BigSign};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use polyflex::geom::SignPolicy;
use polyflex::mesh::{realize, Edge, Face, Realization, SurfaceComplex, VertexId};
use polyflex::{FieldElem, Point3};
use rand::Rng;

pub type Q = BigRational;
pub type V3 = [Q; 3];

pub fn q(n: i64) -> Q {
    Q::from_integer(n.into())
}

pub fn qr(n: i64, d: i64) -> Q {
    Q::new(n.into(), d.into())
}

pub fn v3(p: &Point3) -> V3 {
    [&p.x, &p.y, &p.z].map(|c| c.as_rational().expect("rational coordinate").clone())
}

pub fn pt(v: &V3) -> Point3 {
    Point3::new(
        FieldElem::from_rational(v[0].clone()),
        FieldElem::from_rational(v[1].clone()),
        FieldElem::from_rational(v[2].clone()),
    )
}

fn sub(a: &V3, b: &V3) -> V3 {
    [&a[0] - &b[0], &a[1] - &b[1], &a[2] - &b[2]]
}

fn add(a: &V3, b: &V3) -> V3 {
    [&a[0] + &b[0], &a[1] + &b[1], &a[2] + &b[2]]
}

fn scale(a: &V3, k: &Q) -> V3 {
    [&a[0] * k, &a[1] * k, &a[2] * k]
}

fn dot(a: &V3, b: &V3) -> Q {
    &a[0] * &b[0] + &a[1] * &b[1] + &a[2] * &b[2]
}

fn cross(a: &V3, b: &V3) -> V3 {
    [
        &a[1] * &b[2] - &a[2] * &b[1],
        &a[2] * &b[0] - &a[0] * &b[2],
        &a[0] * &b[1] - &a[1] * &b[0],
    ]
}

/// Determinant of the 3×3 matrix with columns `a, b, c`.
fn det(a: &V3, b: &V3, c: &V3) -> Q {
    &a[0] * (&b[1] * &c[2] - &b[2] * &c[1]) - &b[0] * (&a[1] * &c[2] - &a[2] * &c[1])
        + &c[0] * (&a[1] * &b[2] - &a[2] * &b[1])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Expect {
    Disjoint,
    Intersecting,
    SharedSubsimplex,
    NeedsStudy,
}

/// Solve `z1 + s (z2 - z1) = y1 + a (y2 - y1) + b (y3 - y1)` by Cramer's rule.
fn cramer(z: &[V3; 2], y: &[V3; 3]) -> Option<(Q, Q, Q)> {
    let d = sub(&z[1], &z[0]);
    let e1 = sub(&y[1], &y[0]);
    let e2 = sub(&y[2], &y[0]);
    let rhs = sub(&z[0], &y[0]);
    // s d - a e1 - b e2 = -rhs
    let m = [d.clone(), scale(&e1, &q(-1)), scale(&e2, &q(-1))];
    let det0 = det(&m[0], &m[1], &m[2]);
    if det0.is_zero() {
        return None;
    }
    let r = scale(&rhs, &q(-1));
    let s = det(&r, &m[1], &m[2]) / &det0;
    let a = det(&m[0], &r, &m[2]) / &det0;
    let b = det(&m[0], &m[1], &r) / &det0;
    Some((s, a, b))
}

/// What the sign-only classifier is expected to answer for a pair with no
/// shared vertex, decided from barycentric coordinates of the crossing point.
pub fn expect_unshared(z: &[V3; 2], y: &[V3; 3]) -> Expect {
    let n = cross(&sub(&y[1], &y[0]), &sub(&y[2], &y[0]));
    let h0 = dot(&n, &sub(&z[0], &y[0]));
    let h1 = dot(&n, &sub(&z[1], &y[0]));
    if h0.is_zero() || h1.is_zero() {
        return Expect::NeedsStudy;
    }
    if h0.is_positive() == h1.is_positive() {
        return Expect::Disjoint;
    }
    let (_, a, b) = cramer(z, y).expect("segment crosses the plane");
    let l1 = q(1) - &a - &b;
    let bary = [l1, a, b];
    if bary.iter().any(Zero::is_zero) {
        Expect::NeedsStudy
    } else if bary.iter().all(Signed::is_positive) {
        Expect::Intersecting
    } else {
        Expect::Disjoint
    }
}

/// Expected classifier answer when `z[0]` is the triangle vertex `y[k]`.
pub fn expect_shared_vertex(z: &[V3; 2], y: &[V3; 3]) -> Expect {
    let n = cross(&sub(&y[1], &y[0]), &sub(&y[2], &y[0]));
    if dot(&n, &sub(&z[1], &y[0])).is_zero() {
        Expect::NeedsStudy
    } else {
        Expect::SharedSubsimplex
    }
}

/// Barycentric coordinates of a point assumed to lie in the triangle's plane.
fn bary_in_plane(p: &V3, y: &[V3; 3]) -> [Q; 3] {
    let e1 = sub(&y[1], &y[0]);
    let e2 = sub(&y[2], &y[0]);
    let w = sub(p, &y[0]);
    // Gram system
    let (a11, a12, a22) = (dot(&e1, &e1), dot(&e1, &e2), dot(&e2, &e2));
    let (b1, b2) = (dot(&w, &e1), dot(&w, &e2));
    let g = &a11 * &a22 - &a12 * &a12;
    let a = (&b1 * &a22 - &b2 * &a12) / &g;
    let b = (&b2 * &a11 - &b1 * &a12) / &g;
    [q(1) - &a - &b, a, b]
}

fn in_closed_triangle(p: &V3, y: &[V3; 3]) -> bool {
    let n = cross(&sub(&y[1], &y[0]), &sub(&y[2], &y[0]));
    dot(&n, &sub(p, &y[0])).is_zero() && bary_in_plane(p, y).iter().all(|c| !c.is_negative())
}

/// Closed segment `z` meets closed triangle `y`. Coplanar cases are reduced to
/// checking the finitely many candidate points where the intersection's
/// endpoints can sit.
pub fn segment_meets_triangle(z: &[V3; 2], y: &[V3; 3]) -> bool {
    let n = cross(&sub(&y[1], &y[0]), &sub(&y[2], &y[0]));
    let h0 = dot(&n, &sub(&z[0], &y[0]));
    let h1 = dot(&n, &sub(&z[1], &y[0]));
    if !h0.is_zero() && !h1.is_zero() && h0.is_positive() == h1.is_positive() {
        return false;
    }
    if !(h0.is_zero() && h1.is_zero()) {
        // single crossing point at s = h0 / (h0 - h1)
        let s = &h0 / (&h0 - &h1);
        let p = add(&z[0], &scale(&sub(&z[1], &z[0]), &s));
        return in_closed_triangle(&p, y);
    }
    // coplanar: the intersection, if any, contains an endpoint of the segment
    // or a point where the segment meets a triangle side
    if in_closed_triangle(&z[0], y) || in_closed_triangle(&z[1], y) {
        return true;
    }
    (0..3).any(|i| {
        let (a, b) = (&y[i], &y[(i + 1) % 3]);
        coplanar_segments_meet(&z[0], &z[1], a, b)
    })
}

fn coplanar_segments_meet(p0: &V3, p1: &V3, q0: &V3, q1: &V3) -> bool {
    let d = sub(p1, p0);
    let e = sub(q1, q0);
    let c = cross(&d, &e);
    let w = sub(q0, p0);
    if c.iter().all(Zero::is_zero) {
        // parallel: overlap only if collinear, then compare projections on d
        if !cross(&d, &w).iter().all(Zero::is_zero) {
            return false;
        }
        let dd = dot(&d, &d);
        let t0 = dot(&w, &d) / &dd;
        let t1 = dot(&sub(q1, p0), &d) / &dd;
        let (lo, hi) = if t0 <= t1 { (t0, t1) } else { (t1, t0) };
        return hi >= q(0) && lo <= q(1);
    }
    let cc = dot(&c, &c);
    let s = dot(&cross(&w, &e), &c) / &cc;
    let t = dot(&cross(&w, &d), &c) / &cc;
    s >= q(0) && s <= q(1) && t >= q(0) && t <= q(1)
}

/// With `z[0] = y[k]`: does the closed segment meet the closed triangle in
/// more than that vertex? Probes a point a tiny step along the segment.
pub fn shared_vertex_proper(z: &[V3; 2], y: &[V3; 3]) -> bool {
    let n = cross(&sub(&y[1], &y[0]), &sub(&y[2], &y[0]));
    if !dot(&n, &sub(&z[1], &y[0])).is_zero() {
        return false;
    }
    let tiny = qr(1, 1_000_000_000);
    let p = add(&z[0], &scale(&sub(&z[1], &z[0]), &tiny));
    in_closed_triangle(&p, y)
}

pub fn rand_q<R: Rng>(rng: &mut R, range: i64, den: i64) -> Q {
    qr(rng.gen_range(-range..=range), rng.gen_range(1..=den))
}

pub fn rand_v3<R: Rng>(rng: &mut R, range: i64, den: i64) -> V3 {
    [rand_q(rng, range, den), rand_q(rng, range, den), rand_q(rng, range, den)]
}

pub fn nondegenerate_triangle(y: &[V3; 3]) -> bool {
    !cross(&sub(&y[1], &y[0]), &sub(&y[2], &y[0]))
        .iter()
        .all(Zero::is_zero)
}

/// Rational enclosure `[lo, hi]` of a real number.
#[derive(Clone, Debug)]
pub struct Iv {
    pub lo: Q,
    pub hi: Q,
}

impl Iv {
    pub fn point(x: Q) -> Iv {
        Iv { lo: x.clone(), hi: x }
    }

    pub fn add(&self, o: &Iv) -> Iv {
        Iv {
            lo: &self.lo + &o.lo,
            hi: &self.hi + &o.hi,
        }
    }

    pub fn mul(&self, o: &Iv) -> Iv {
        let c = [
            &self.lo * &o.lo,
            &self.lo * &o.hi,
            &self.hi * &o.lo,
            &self.hi * &o.hi,
        ];
        let lo = c.iter().min().unwrap().clone();
        let hi = c.iter().max().unwrap().clone();
        Iv { lo, hi }
    }

    /// Outward-rounded square root with `bits` fractional bits.
    pub fn sqrt(&self, bits: u32) -> Iv {
        assert!(!self.lo.is_negative(), "square root of a negative enclosure");
        let scale = BigInt::one() << (2 * bits);
        let den = BigInt::one() << bits;
        let floor_sqrt = |x: &Q| -> BigInt {
            let scaled = (x * Q::from_integer(scale.clone())).floor().to_integer();
            scaled.sqrt()
        };
        let lo = Q::new(floor_sqrt(&self.lo), den.clone());
        let hi = Q::new(floor_sqrt(&self.hi) + 1, den);
        Iv { lo, hi }
    }

    pub fn width(&self) -> Q {
        &self.hi - &self.lo
    }

    pub fn sign(&self) -> Option<i8> {
        if self.lo.is_positive() {
            Some(1)
        } else if self.hi.is_negative() {
            Some(-1)
        } else if self.lo.is_zero() && self.hi.is_zero() {
            Some(0)
        } else {
            None
        }
    }
}

/// Enclosure of an element from its dense coefficients, evaluating every
/// generator independently by integer square roots.
pub fn enclose(x: &FieldElem, bits: u32) -> Iv {
    let tower = x.tower();
    let mut gens: Vec<Iv> = Vec::new();
    for level in 1..=tower.depth() {
        let d = enclose_with(&tower.radicand(level), &gens);
        gens.push(d.sqrt(bits));
    }
    enclose_with(x, &gens)
}

fn enclose_with(x: &FieldElem, gens: &[Iv]) -> Iv {
    let mut acc = Iv::point(q(0));
    for (mask, c) in x.coefficients().iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let mut term = Iv::point(c.clone());
        for (bit, g) in gens.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                term = term.mul(g);
            }
        }
        acc = acc.add(&term);
    }
    acc
}

pub fn sign_i8(s: polyflex::Sign) -> i8 {
    s.as_i8()
}

pub fn big_sign(x: &Q) -> i8 {
    match x.numer().sign() {
        BigSign::Minus => -1,
        BigSign::NoSign => 0,
        BigSign::Plus => 1,
    }
}

/// Two tetrahedra glued into one sphere along a face, with the apex of one
/// pushed through the other.
pub fn two_tetra_fixture() -> Realization {
    let ids = [1, 2, 3, 4, 5].map(VertexId);
    let f = |a, b, c| Face([VertexId(a), VertexId(b), VertexId(c)]);
    let complex = SurfaceComplex {
        vertex_ids: ids.to_vec(),
        edges: [(1, 2), (1, 3), (2, 3), (1, 4), (2, 4), (3, 4), (1, 5), (2, 5), (3, 5)]
            .iter()
            .map(|&(a, b)| Edge::new(VertexId(a), VertexId(b)))
            .collect(),
        faces: vec![f(1, 2, 4), f(2, 3, 4), f(3, 1, 4), f(2, 1, 5), f(3, 2, 5), f(1, 3, 5)],
        with_boundary: false,
    };
    let coords: BTreeMap<_, _> = [
        (1, (0, 0, 0)),
        (2, (6, 0, 0)),
        (3, (0, 6, 0)),
        (4, (1, 1, 6)),
        (5, (2, 2, 8)),
    ]
    .into_iter()
    .map(|(i, (x, y, z))| (VertexId(i), Point3::from_ints(x, y, z)))
    .collect();
    realize(complex, coords, SignPolicy::Exact).expect("fixture is valid")
}

