//! Exact 3D primitives built on the oriented-volume determinant
//! `g(x0, x1, x2, x3) = det(x1 - x0, x2 - x0, x3 - x0)`, which is six times the
//! signed volume of the tetrahedron `x0 x1 x2 x3`.
//!
//! Everything here is generic over [`Scalar`], so the same predicates run on
//! exact [`FieldElem`] coordinates and on `f64` with an epsilon sign policy.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numfield::{FieldElem, Sign};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeomError {
    #[error("coordinates belong to incompatible towers")]
    IncompatibleTowers,
    #[error("segment endpoints coincide")]
    DegenerateSegment,
    #[error("triangle vertices are collinear")]
    DegenerateTriangle,
    #[error("declared shared vertex has different coordinates in the edge and the face")]
    SharedVertexMismatch,
}

/// How signs are decided: exactly, or with `|x| <= eps` treated as zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SignPolicy {
    Exact,
    Epsilon(f64),
}

/// Ring operations plus a sign test; implemented for [`FieldElem`] and `f64`.
pub trait Scalar: Clone + fmt::Debug + Send + Sync + 'static {
    fn zero() -> Self;
    fn from_i64(n: i64) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    /// Panics on division by zero.
    fn div(&self, other: &Self) -> Self;
    fn sign(&self, policy: SignPolicy) -> Sign;
    fn to_f64(&self) -> f64;

    /// Whether two values can be combined (always true except across towers).
    fn compatible(&self, _other: &Self) -> bool {
        true
    }
}

impl Scalar for FieldElem {
    fn zero() -> Self {
        FieldElem::zero()
    }

    fn from_i64(n: i64) -> Self {
        FieldElem::from_int(n)
    }

    fn add(&self, other: &Self) -> Self {
        self + other
    }

    fn sub(&self, other: &Self) -> Self {
        self - other
    }

    fn mul(&self, other: &Self) -> Self {
        self * other
    }

    fn div(&self, other: &Self) -> Self {
        self / other
    }

    fn sign(&self, _policy: SignPolicy) -> Sign {
        FieldElem::sign(self)
    }

    fn to_f64(&self) -> f64 {
        FieldElem::to_f64(self)
    }

    fn compatible(&self, other: &Self) -> bool {
        self.is_compatible(other)
    }
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }

    fn from_i64(n: i64) -> Self {
        n as f64
    }

    fn add(&self, other: &Self) -> Self {
        self + other
    }

    fn sub(&self, other: &Self) -> Self {
        self - other
    }

    fn mul(&self, other: &Self) -> Self {
        self * other
    }

    fn div(&self, other: &Self) -> Self {
        assert!(*other != 0.0, "division by zero");
        self / other
    }

    fn sign(&self, policy: SignPolicy) -> Sign {
        match policy {
            SignPolicy::Exact => Sign::of_f64(*self, 0.0),
            SignPolicy::Epsilon(eps) => Sign::of_f64(*self, eps),
        }
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Point3<S = FieldElem> {
    pub x: S,
    pub y: S,
    pub z: S,
}

impl<S: Scalar> Point3<S> {
    pub fn new(x: S, y: S, z: S) -> Self {
        Point3 { x, y, z }
    }

    pub fn origin() -> Self {
        Point3::new(S::zero(), S::zero(), S::zero())
    }

    pub fn coords(&self) -> [&S; 3] {
        [&self.x, &self.y, &self.z]
    }

    pub fn sub(&self, o: &Self) -> Self {
        Point3::new(self.x.sub(&o.x), self.y.sub(&o.y), self.z.sub(&o.z))
    }

    pub fn add(&self, o: &Self) -> Self {
        Point3::new(self.x.add(&o.x), self.y.add(&o.y), self.z.add(&o.z))
    }

    pub fn scale(&self, k: &S) -> Self {
        Point3::new(self.x.mul(k), self.y.mul(k), self.z.mul(k))
    }

    pub fn dot(&self, o: &Self) -> S {
        self.x.mul(&o.x).add(&self.y.mul(&o.y)).add(&self.z.mul(&o.z))
    }

    pub fn cross(&self, o: &Self) -> Self {
        Point3::new(
            self.y.mul(&o.z).sub(&self.z.mul(&o.y)),
            self.z.mul(&o.x).sub(&self.x.mul(&o.z)),
            self.x.mul(&o.y).sub(&self.y.mul(&o.x)),
        )
    }

    pub fn is_zero(&self, policy: SignPolicy) -> bool {
        self.coords().iter().all(|c| c.sign(policy) == Sign::Zero)
    }

    pub fn same_point(&self, o: &Self, policy: SignPolicy) -> bool {
        self.sub(o).is_zero(policy)
    }

    pub fn to_f64(&self) -> Point3<f64> {
        Point3::new(self.x.to_f64(), self.y.to_f64(), self.z.to_f64())
    }

    fn compatible_with(&self, o: &Self) -> bool {
        self.coords()
            .iter()
            .all(|a| o.coords().iter().all(|b| a.compatible(b)))
    }
}

impl Point3<FieldElem> {
    pub fn from_ints(x: i64, y: i64, z: i64) -> Self {
        Point3::new(x.into(), y.into(), z.into())
    }

    pub fn lift(&self, tower: &crate::numfield::FieldTower) -> Result<Self, GeomError> {
        let l = |c: &FieldElem| c.lift(tower).map_err(|_| GeomError::IncompatibleTowers);
        Ok(Point3::new(l(&self.x)?, l(&self.y)?, l(&self.z)?))
    }

    pub fn approx(&self, digits: u32) -> [crate::numfield::DecimalInterval; 3] {
        [self.x.approx(digits), self.y.approx(digits), self.z.approx(digits)]
    }
}

impl Point3<f64> {
    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(&self, o: &Self) -> f64 {
        self.sub(o).norm()
    }
}

fn check_compatible<S: Scalar>(points: &[&Point3<S>]) -> Result<(), GeomError> {
    let first = points[0];
    if points.iter().all(|p| first.compatible_with(p)) {
        Ok(())
    } else {
        Err(GeomError::IncompatibleTowers)
    }
}

pub(crate) fn orient6_unchecked<S: Scalar>(
    x0: &Point3<S>,
    x1: &Point3<S>,
    x2: &Point3<S>,
    x3: &Point3<S>,
) -> S {
    let a = x1.sub(x0);
    let b = x2.sub(x0);
    let c = x3.sub(x0);
    a.cross(&b).dot(&c)
}

/// Six times the oriented volume of the tetrahedron `x0 x1 x2 x3`.
pub fn orient6<S: Scalar>(
    x0: &Point3<S>,
    x1: &Point3<S>,
    x2: &Point3<S>,
    x3: &Point3<S>,
) -> Result<S, GeomError> {
    check_compatible(&[x0, x1, x2, x3])?;
    Ok(orient6_unchecked(x0, x1, x2, x3))
}

/// `((a - origin) × (b - origin)) · (c - origin)`.
pub fn mixed_product<S: Scalar>(
    a: &Point3<S>,
    b: &Point3<S>,
    c: &Point3<S>,
    origin: &Point3<S>,
) -> Result<S, GeomError> {
    orient6(origin, a, b, c)
}

/// Squared Euclidean distance.
pub fn dist2<S: Scalar>(p: &Point3<S>, q: &Point3<S>) -> Result<S, GeomError> {
    check_compatible(&[p, q])?;
    let d = p.sub(q);
    Ok(d.dot(&d))
}

/// Which simplex a segment and a triangle share combinatorially.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Shared {
    None,
    /// Segment endpoint `segment_end` (0 or 1) is triangle vertex `triangle_vertex` (0..3).
    OneVertex {
        segment_end: usize,
        triangle_vertex: usize,
    },
    /// The segment is an edge of the triangle.
    Edge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PairTag {
    Disjoint,
    Intersecting,
    SharedSubsimplex,
    NeedsStudy,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairVerdict {
    pub tag: PairTag,
    pub detail: String,
}

impl PairVerdict {
    fn new(tag: PairTag, detail: &str) -> Self {
        PairVerdict {
            tag,
            detail: detail.to_string(),
        }
    }
}

pub const REASON_SHARED_VERTEX_COPLANAR: &str =
    "edge lies in the plane of the face through their shared vertex";
pub const REASON_ENDPOINT_ON_PLANE: &str = "an edge endpoint lies in the plane of the face";
pub const REASON_LINE_THROUGH_BOUNDARY: &str =
    "the edge crosses the plane of the face but its line meets the face boundary";

struct Arranged<'a, S> {
    z: [&'a Point3<S>; 2],
    y: [&'a Point3<S>; 3],
}

/// Relabel so that the shared vertex is `z[0] = y[0]`. The triangle is only rotated
/// cyclically, which keeps its orientation.
fn arrange<'a, S: Scalar>(
    z: [&'a Point3<S>; 2],
    y: [&'a Point3<S>; 3],
    segment_end: usize,
    triangle_vertex: usize,
) -> Arranged<'a, S> {
    let z = if segment_end == 0 { z } else { [z[1], z[0]] };
    let t = triangle_vertex % 3;
    let y = [y[t], y[(t + 1) % 3], y[(t + 2) % 3]];
    Arranged { z, y }
}

fn check_nondegenerate<S: Scalar>(
    z: [&Point3<S>; 2],
    y: [&Point3<S>; 3],
    policy: SignPolicy,
) -> Result<(), GeomError> {
    check_compatible(&[z[0], z[1], y[0], y[1], y[2]])?;
    if z[0].same_point(z[1], policy) {
        return Err(GeomError::DegenerateSegment);
    }
    if triangle_normal(y).is_zero(policy) {
        return Err(GeomError::DegenerateTriangle);
    }
    Ok(())
}

fn triangle_normal<S: Scalar>(y: [&Point3<S>; 3]) -> Point3<S> {
    y[1].sub(y[0]).cross(&y[2].sub(y[0]))
}

/// Classify closed segment `z1 z2` against closed triangle `y1 y2 y3` using only
/// signs of the oriented-volume determinant.
///
/// With no shared vertex: endpoints strictly on one side of the face plane give
/// `Disjoint`; endpoints strictly on opposite sides combined with three nonzero
/// equal-signed `g(z1, z2, y_i, y_j)` give `Intersecting`, nonzero mixed signs give
/// `Disjoint`, and any zero gives `NeedsStudy`. With a shared vertex, the pair only
/// touches there unless the other endpoint lies in the face plane (`NeedsStudy`).
pub fn classify_segment_triangle<S: Scalar>(
    z1: &Point3<S>,
    z2: &Point3<S>,
    y1: &Point3<S>,
    y2: &Point3<S>,
    y3: &Point3<S>,
    shared: Shared,
    policy: SignPolicy,
) -> Result<PairVerdict, GeomError> {
    let z = [z1, z2];
    let y = [y1, y2, y3];
    check_nondegenerate(z, y, policy)?;
    match shared {
        Shared::Edge => Ok(PairVerdict::new(PairTag::SharedSubsimplex, "")),
        Shared::OneVertex {
            segment_end,
            triangle_vertex,
        } => {
            let a = arrange(z, y, segment_end, triangle_vertex);
            if !a.z[0].same_point(a.y[0], policy) {
                return Err(GeomError::SharedVertexMismatch);
            }
            let g = orient6_unchecked(a.y[0], a.y[1], a.y[2], a.z[1]);
            if g.sign(policy) != Sign::Zero {
                Ok(PairVerdict::new(PairTag::SharedSubsimplex, ""))
            } else {
                Ok(PairVerdict::new(
                    PairTag::NeedsStudy,
                    REASON_SHARED_VERTEX_COPLANAR,
                ))
            }
        }
        Shared::None => {
            let a = orient6_unchecked(y1, y2, y3, z1).sign(policy);
            let b = orient6_unchecked(y1, y2, y3, z2).sign(policy);
            match a * b {
                Sign::Positive => Ok(PairVerdict::new(PairTag::Disjoint, "")),
                Sign::Zero => Ok(PairVerdict::new(PairTag::NeedsStudy, REASON_ENDPOINT_ON_PLANE)),
                Sign::Negative => {
                    let s1 = orient6_unchecked(z1, z2, y2, y3).sign(policy);
                    let s2 = orient6_unchecked(z1, z2, y3, y1).sign(policy);
                    let s3 = orient6_unchecked(z1, z2, y1, y2).sign(policy);
                    if [s1, s2, s3].contains(&Sign::Zero) {
                        Ok(PairVerdict::new(
                            PairTag::NeedsStudy,
                            REASON_LINE_THROUGH_BOUNDARY,
                        ))
                    } else if s1 == s2 && s2 == s3 {
                        Ok(PairVerdict::new(PairTag::Intersecting, ""))
                    } else {
                        Ok(PairVerdict::new(PairTag::Disjoint, ""))
                    }
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Resolution {
    /// The only common points lie in the declared shared simplex.
    TouchOnly,
    ProperIntersection,
    Disjoint,
}

/// Complete case analysis for a segment/triangle pair, including every
/// degenerate configuration the sign classifier leaves open.
pub fn resolve_needs_study<S: Scalar>(
    z1: &Point3<S>,
    z2: &Point3<S>,
    y1: &Point3<S>,
    y2: &Point3<S>,
    y3: &Point3<S>,
    shared: Shared,
    policy: SignPolicy,
) -> Result<Resolution, GeomError> {
    let z = [z1, z2];
    let y = [y1, y2, y3];
    check_nondegenerate(z, y, policy)?;
    let plane = Plane::new(y, policy);
    match shared {
        Shared::Edge => Ok(Resolution::TouchOnly),
        Shared::OneVertex {
            segment_end,
            triangle_vertex,
        } => {
            let a = arrange(z, y, segment_end, triangle_vertex);
            if !a.z[0].same_point(a.y[0], policy) {
                return Err(GeomError::SharedVertexMismatch);
            }
            let plane = Plane::new(a.y, policy);
            if plane.side(a.z[1]) != Sign::Zero {
                return Ok(Resolution::TouchOnly);
            }
            // Coplanar: the intersection is convex and contains the shared vertex,
            // so it is larger than that vertex iff the edge direction points into
            // the face's angle at it.
            let (v0, v1, v2, w) = (a.y[0], a.y[1], a.y[2], a.z[1]);
            if plane.orient2(v0, v1, w) != Sign::Negative
                && plane.orient2(v0, w, v2) != Sign::Negative
            {
                Ok(Resolution::ProperIntersection)
            } else {
                Ok(Resolution::TouchOnly)
            }
        }
        Shared::None => {
            let a = plane.side(z1);
            let b = plane.side(z2);
            let hit = match (a, b) {
                (Sign::Zero, Sign::Zero) => coplanar_segment_meets_triangle(&plane, z, y),
                (Sign::Zero, _) => plane.contains_closed(y, z1),
                (_, Sign::Zero) => plane.contains_closed(y, z2),
                _ if a == b => false,
                _ => {
                    let s1 = orient6_unchecked(z1, z2, y2, y3).sign(policy);
                    let s2 = orient6_unchecked(z1, z2, y3, y1).sign(policy);
                    let s3 = orient6_unchecked(z1, z2, y1, y2).sign(policy);
                    let signs = [s1, s2, s3];
                    !(signs.contains(&Sign::Positive) && signs.contains(&Sign::Negative))
                }
            };
            Ok(if hit {
                Resolution::ProperIntersection
            } else {
                Resolution::Disjoint
            })
        }
    }
}

/// The supporting plane of a nondegenerate triangle, with in-plane orientation
/// tests expressed through the same determinant.
struct Plane<'a, S> {
    y: [&'a Point3<S>; 3],
    normal: Point3<S>,
    policy: SignPolicy,
}

impl<'a, S: Scalar> Plane<'a, S> {
    fn new(y: [&'a Point3<S>; 3], policy: SignPolicy) -> Self {
        Plane {
            y,
            normal: triangle_normal(y),
            policy,
        }
    }

    fn side(&self, p: &Point3<S>) -> Sign {
        orient6_unchecked(self.y[0], self.y[1], self.y[2], p).sign(self.policy)
    }

    /// Orientation of coplanar `p q r` seen from the normal: `det(q - p, r - p, n)`.
    fn orient2(&self, p: &Point3<S>, q: &Point3<S>, r: &Point3<S>) -> Sign {
        let apex = p.add(&self.normal);
        orient6_unchecked(p, q, r, &apex).sign(self.policy)
    }

    fn contains_closed(&self, y: [&Point3<S>; 3], p: &Point3<S>) -> bool {
        (0..3).all(|i| self.orient2(y[i], y[(i + 1) % 3], p) != Sign::Negative)
    }

    /// `p` on closed segment `a b`, given collinearity.
    fn between(&self, a: &Point3<S>, b: &Point3<S>, p: &Point3<S>) -> bool {
        p.sub(a).dot(&p.sub(b)).sign(self.policy) != Sign::Positive
    }

    fn segments_meet(
        &self,
        a: &Point3<S>,
        b: &Point3<S>,
        c: &Point3<S>,
        d: &Point3<S>,
    ) -> bool {
        let d1 = self.orient2(a, b, c);
        let d2 = self.orient2(a, b, d);
        let d3 = self.orient2(c, d, a);
        let d4 = self.orient2(c, d, b);
        if d1 * d2 == Sign::Negative && d3 * d4 == Sign::Negative {
            return true;
        }
        (d1 == Sign::Zero && self.between(a, b, c))
            || (d2 == Sign::Zero && self.between(a, b, d))
            || (d3 == Sign::Zero && self.between(c, d, a))
            || (d4 == Sign::Zero && self.between(c, d, b))
    }
}

fn coplanar_segment_meets_triangle<S: Scalar>(
    plane: &Plane<'_, S>,
    z: [&Point3<S>; 2],
    y: [&Point3<S>; 3],
) -> bool {
    plane.contains_closed(y, z[0])
        || plane.contains_closed(y, z[1])
        || (0..3).any(|i| plane.segments_meet(z[0], z[1], y[i], y[(i + 1) % 3]))
}
