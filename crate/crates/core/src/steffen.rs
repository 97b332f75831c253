//! The Steffen flexible polyhedron: combinatorics, exact coordinates over
//! Q(√31, √166, √a), and exact volume.
//!
//! The vertices v1..v4 and v9 have closed-form coordinates. Each of v5..v8 is
//! the intersection of three spheres around already known vertices; of the two
//! mirror solutions the one on the prescribed side of a fold plane is kept.
//! Which plane, reference vertex and side applies to each vertex is read from
//! `data/steffen.json` together with the edge lengths and faces.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::sync::LazyLock;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{dist2, mixed_product, GeomError, Point3, Scalar, SignPolicy};
use crate::mesh::{
    check_edge_lengths, realize, Edge, Face, MeshError, Realization, SurfaceComplex, VertexId,
};
use crate::numfield::{FieldElem, FieldError, FieldTower, Sign};

const DATA: &str = include_str!("../data/steffen.json");

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SteffenError {
    #[error("sphere centers are collinear")]
    CollinearCenters,
    #[error("spheres do not meet (negative discriminant)")]
    NegativeDiscriminant,
    #[error("reference point lies on the branch plane")]
    ReferenceOnPlane,
    #[error("cannot tell the two candidates apart by the branch plane")]
    AmbiguousBranch,
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("surface is not closed")]
    NotClosed,
    #[error("surface is not orientable")]
    NotOrientable,
    #[error("bad data file: {0}")]
    Data(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Same,
    Opposite,
}

/// How one of v5..v8 is placed: its three known neighbors, and the plane and
/// reference vertex deciding between the two sphere intersections.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrilaterationRule {
    pub vertex: u32,
    pub from: [u32; 3],
    pub plane: [u32; 3],
    pub reference: u32,
    pub side: Side,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SteffenData {
    pub vertices: Vec<u32>,
    /// `[i, j, length]`
    pub edges: Vec<[u32; 3]>,
    pub faces: Vec<[u32; 3]>,
    pub trilaterations: Vec<TrilaterationRule>,
}

impl SteffenData {
    pub fn complex(&self) -> SurfaceComplex {
        SurfaceComplex {
            vertex_ids: self.vertices.iter().copied().map(VertexId).collect(),
            edges: self
                .edges
                .iter()
                .map(|&[a, b, _]| Edge::new(VertexId(a), VertexId(b)))
                .collect(),
            faces: self.faces.iter().map(|f| Face(f.map(VertexId))).collect(),
            with_boundary: false,
        }
    }

    pub fn lengths(&self) -> Vec<(Edge, i64)> {
        self.edges
            .iter()
            .map(|&[a, b, l]| (Edge::new(VertexId(a), VertexId(b)), i64::from(l)))
            .collect()
    }

    pub fn length(&self, a: u32, b: u32) -> Option<i64> {
        let e = Edge::new(VertexId(a), VertexId(b));
        self.lengths().into_iter().find(|(f, _)| *f == e).map(|(_, l)| l)
    }
}

/// The shipped combinatorial tables.
pub fn steffen_data() -> SteffenData {
    serde_json::from_str(DATA).expect("embedded steffen.json is valid")
}

/// Q(√31)(√166).
pub fn canonical_tower() -> FieldTower {
    static TOWER: LazyLock<FieldTower> = LazyLock::new(|| {
        FieldTower::rationals()
            .adjoin(&FieldElem::from_int(31))
            .and_then(|t| t.adjoin(&FieldElem::from_int(166)))
            .expect("31 and 166 are independent non-squares")
    });
    TOWER.clone()
}

/// v1, v2, v3, v4 and v9 over [`canonical_tower`].
pub fn base_vertices() -> BTreeMap<VertexId, Point3> {
    let t = canonical_tower();
    let s31 = t.generator(1);
    let s166 = t.generator(2);
    let half = |n: i64| FieldElem::from_ratio(n, 2);
    let z = FieldElem::zero;
    let pts = [
        (1, Point3::new(z(), half(-17), &s166 * &half(1))),
        (2, Point3::new(z(), half(17), &s166 * &half(1))),
        (3, Point3::new(half(-11), z(), z())),
        (4, Point3::new(half(11), z(), z())),
        (9, Point3::new(z(), z(), &s31 * &half(-3))),
    ];
    pts.into_iter()
        .map(|(i, p)| (VertexId(i), p.lift(&t).expect("rationals lift anywhere")))
        .collect()
}

/// Solution line of three sphere equations: the points `foot ± λ·normal` with
/// `λ² = lambda_sq` satisfy all three.
#[derive(Clone, Debug)]
pub struct TrilaterationFrame<S> {
    pub foot: Point3<S>,
    pub normal: Point3<S>,
    pub lambda_sq: S,
}

/// Reduce three spheres to a point on their radical line, the line direction and
/// the squared offset along it.
pub fn trilateration_frame<S: Scalar>(
    centers: [&Point3<S>; 3],
    radii_sq: [&S; 3],
    policy: SignPolicy,
) -> Result<TrilaterationFrame<S>, SteffenError> {
    let [c1, c2, c3] = centers;
    let [r1, r2, r3] = radii_sq;
    let u = c2.sub(c1);
    let v = c3.sub(c1);
    let w = u.cross(&v);
    let g = w.dot(&w);
    if g.sign(policy) == Sign::Zero {
        return Err(SteffenError::CollinearCenters);
    }
    let (uu, uv, vv) = (u.dot(&u), u.dot(&v), v.dot(&v));
    let two = S::from_i64(2);
    // (x - c1)·u = b1 and (x - c1)·v = b2 from differences of the sphere equations
    let b1 = r1.sub(r2).add(&uu).div(&two);
    let b2 = r1.sub(r3).add(&vv).div(&two);
    let alpha = b1.mul(&vv).sub(&b2.mul(&uv)).div(&g);
    let beta = b2.mul(&uu).sub(&b1.mul(&uv)).div(&g);
    let y0 = u.scale(&alpha).add(&v.scale(&beta));
    let lambda_sq = r1.sub(&y0.dot(&y0)).div(&g);
    Ok(TrilaterationFrame {
        foot: c1.add(&y0),
        normal: w,
        lambda_sq,
    })
}

#[derive(Clone, Debug)]
pub struct Trilateration {
    /// Tower holding both candidates; extends the input tower by at most one level.
    pub tower: FieldTower,
    /// `foot + λ·normal` and `foot − λ·normal` with `λ ≥ 0`.
    pub candidates: [Point3; 2],
    /// The spheres touch in a single point and both candidates coincide.
    pub tangent: bool,
}

fn deepest_tower<'a>(elems: impl IntoIterator<Item = &'a FieldElem>) -> FieldTower {
    elems
        .into_iter()
        .map(|e| e.tower())
        .max_by_key(|t| t.depth())
        .cloned()
        .unwrap_or_else(FieldTower::rationals)
}

/// Exact intersection of three spheres given by centers and squared radii.
/// The square root of the discriminant is adjoined only when it is not already
/// in the field.
pub fn trilaterate(
    c1: &Point3,
    r1sq: &FieldElem,
    c2: &Point3,
    r2sq: &FieldElem,
    c3: &Point3,
    r3sq: &FieldElem,
) -> Result<Trilateration, SteffenError> {
    for p in [c2, c3] {
        if !c1.coords().iter().all(|a| p.coords().iter().all(|b| a.is_compatible(b))) {
            return Err(SteffenError::Field(FieldError::IncompatibleTowers));
        }
    }
    let f = trilateration_frame([c1, c2, c3], [r1sq, r2sq, r3sq], SignPolicy::Exact)?;
    let tower = deepest_tower(
        f.foot
            .coords()
            .into_iter()
            .chain(f.normal.coords())
            .chain([&f.lambda_sq]),
    );
    match f.lambda_sq.sign() {
        Sign::Negative => Err(SteffenError::NegativeDiscriminant),
        Sign::Zero => {
            let p = f.foot.lift(&tower)?;
            Ok(Trilateration {
                tower,
                candidates: [p.clone(), p],
                tangent: true,
            })
        }
        Sign::Positive => {
            let (r, rest) = f.lambda_sq.split_square_content();
            let (tower, root) = FieldElem::sqrt_adjoining(&tower, &rest)?;
            let lambda = root.scale(&r);
            let foot = f.foot.lift(&tower)?;
            let offset = f.normal.lift(&tower)?.scale(&lambda);
            Ok(Trilateration {
                tower,
                candidates: [foot.add(&offset), foot.sub(&offset)],
                tangent: false,
            })
        }
    }
}

/// Keep the candidate on the opposite side of `plane` from `reference`.
pub fn select_branch<S: Scalar>(
    candidates: [&Point3<S>; 2],
    plane: [&Point3<S>; 3],
    reference: &Point3<S>,
    policy: SignPolicy,
) -> Result<usize, SteffenError> {
    select_branch_side(candidates, plane, reference, Side::Opposite, policy)
}

/// Index of the candidate whose mixed product against `plane` has the sign
/// `side` requires relative to `reference`.
pub fn select_branch_side<S: Scalar>(
    candidates: [&Point3<S>; 2],
    plane: [&Point3<S>; 3],
    reference: &Point3<S>,
    side: Side,
    policy: SignPolicy,
) -> Result<usize, SteffenError> {
    let [a, b, c] = plane;
    let s = |p: &Point3<S>| -> Result<Sign, SteffenError> {
        Ok(mixed_product(&b.sub(a), &c.sub(a), &p.sub(a), &Point3::origin())?.sign(policy))
    };
    let want = match (s(reference)?, side) {
        (Sign::Zero, _) => return Err(SteffenError::ReferenceOnPlane),
        (r, Side::Same) => r,
        (r, Side::Opposite) => r.flip(),
    };
    let hits: Vec<usize> = (0..2)
        .filter_map(|i| match s(candidates[i]) {
            Ok(sg) if sg == want => Some(Ok(i)),
            Ok(_) => None,
            Err(e) => Some(Err(e)),
        })
        .collect::<Result<_, _>>()?;
    match hits.as_slice() {
        [i] => Ok(*i),
        _ => Err(SteffenError::AmbiguousBranch),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchRecord {
    pub vertex: VertexId,
    /// 0 for `foot + λ·normal`, 1 for `foot − λ·normal`.
    pub branch: usize,
    pub tower_depth: usize,
}

#[derive(Clone, Debug)]
pub struct SteffenModel {
    pub complex: SurfaceComplex,
    pub realization: Realization<FieldElem>,
    pub tower: FieldTower,
    pub branches: Vec<BranchRecord>,
}

/// Vertex pairs exchanged by the half-turn `(x, y, z) ↦ (−x, −y, z)`.
pub const HALF_TURN: [(u32, u32); 5] = [(1, 2), (3, 4), (5, 8), (6, 7), (9, 9)];

/// Build S_0 exactly and check every structural invariant.
pub fn build_steffen() -> Result<SteffenModel, SteffenError> {
    build_from_data(&steffen_data())
}

pub fn build_from_data(data: &SteffenData) -> Result<SteffenModel, SteffenError> {
    let mut coords = base_vertices();
    let mut tower = canonical_tower();
    let mut branches = Vec::new();
    for rule in &data.trilaterations {
        let pt = |coords: &BTreeMap<VertexId, Point3>,
                  tower: &FieldTower,
                  i: u32|
         -> Result<Point3, SteffenError> {
            coords
                .get(&VertexId(i))
                .ok_or_else(|| SteffenError::Data(format!("v{i} used before it is placed")))?
                .lift(tower)
                .map_err(SteffenError::from)
        };
        let len_sq = |i: u32| -> Result<FieldElem, SteffenError> {
            let l = data.length(rule.vertex, i).ok_or_else(|| {
                SteffenError::Data(format!("no edge between v{} and v{i}", rule.vertex))
            })?;
            Ok(FieldElem::from_int(l * l))
        };
        let [a, b, c] = rule.from;
        let tri = trilaterate(
            &pt(&coords, &tower, a)?,
            &len_sq(a)?,
            &pt(&coords, &tower, b)?,
            &len_sq(b)?,
            &pt(&coords, &tower, c)?,
            &len_sq(c)?,
        )?;
        tower = tri.tower.clone();
        let plane = rule.plane.map(|i| pt(&coords, &tower, i));
        let [p0, p1, p2] = plane;
        let (p0, p1, p2) = (p0?, p1?, p2?);
        let reference = pt(&coords, &tower, rule.reference)?;
        let k = select_branch_side(
            [&tri.candidates[0], &tri.candidates[1]],
            [&p0, &p1, &p2],
            &reference,
            rule.side,
            SignPolicy::Exact,
        )?;
        let [c0, c1] = tri.candidates;
        coords.insert(VertexId(rule.vertex), if k == 0 { c0 } else { c1 });
        branches.push(BranchRecord {
            vertex: VertexId(rule.vertex),
            branch: k,
            tower_depth: tower.depth(),
        });
    }
    let coords = coords
        .into_iter()
        .map(|(v, p)| Ok((v, p.lift(&tower)?)))
        .collect::<Result<BTreeMap<_, _>, SteffenError>>()?;
    let complex = data.complex();
    let realization = realize(complex.clone(), coords, SignPolicy::Exact)?;
    let model = SteffenModel {
        complex,
        realization,
        tower,
        branches,
    };
    check_invariants(&model, data)?;
    Ok(model)
}

fn violation(msg: impl Into<String>) -> SteffenError {
    SteffenError::InvariantViolation(msg.into())
}

fn check_invariants(m: &SteffenModel, data: &SteffenData) -> Result<(), SteffenError> {
    let r = &m.realization;
    let p = |i: u32| r.point(VertexId(i));
    let expected: Vec<(Edge, FieldElem)> = data
        .lengths()
        .into_iter()
        .map(|(e, l)| (e, FieldElem::from_int(l)))
        .collect();
    if let Some(bad) = check_edge_lengths(r, &expected)?.first() {
        return Err(violation(format!(
            "edge {} has squared length {}, expected {}",
            bad.edge, bad.actual_sq, bad.expected_sq
        )));
    }
    let is = |a: u32, b: u32, want: i64| -> Result<(), SteffenError> {
        let d = dist2(p(a), p(b))?;
        if d == FieldElem::from_int(want) {
            Ok(())
        } else {
            Err(violation(format!("dist2(v{a}, v{b}) = {d}, expected {want}")))
        }
    };
    is(3, 4, 121)?;
    is(9, 3, 100)?;
    is(9, 4, 100)?;
    let v9 = p(9);
    if !(v9.x.is_zero() && v9.y.is_zero() && v9.z.sign() == Sign::Negative) {
        return Err(violation("v9 is not on the negative z-axis"));
    }
    let (v1, v2) = (p(1), p(2));
    if !(v1.x == v2.x && v1.y == -&v2.y && v1.z == v2.z) {
        return Err(violation("v1 and v2 are not mirror images under y -> -y"));
    }
    for (a, b) in HALF_TURN {
        let (pa, pb) = (p(a), p(b));
        if !(pb.x == -&pa.x && pb.y == -&pa.y && pb.z == pa.z) {
            return Err(violation(format!("half-turn does not map v{a} to v{b}")));
        }
    }
    Ok(())
}

/// Orient all faces coherently (each edge traversed once in each direction),
/// starting from the first face as given.
pub fn orient_faces(c: &SurfaceComplex) -> Result<Vec<Face>, SteffenError> {
    let mut by_edge: HashMap<Edge, Vec<usize>> = HashMap::new();
    for (i, f) in c.faces.iter().enumerate() {
        for e in f.edges() {
            by_edge.entry(e).or_default().push(i);
        }
    }
    if c.with_boundary || by_edge.values().any(|fs| fs.len() != 2) {
        return Err(SteffenError::NotClosed);
    }
    let directed = |f: &Face| -> [(VertexId, VertexId); 3] {
        let [a, b, c] = f.0;
        [(a, b), (b, c), (c, a)]
    };
    let mut out: Vec<Option<Face>> = vec![None; c.faces.len()];
    let mut queue = VecDeque::new();
    for start in 0..c.faces.len() {
        if out[start].is_some() {
            continue;
        }
        out[start] = Some(c.faces[start]);
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            let fi = out[i].expect("queued faces are oriented");
            for (a, b) in directed(&fi) {
                for &j in &by_edge[&Edge::new(a, b)] {
                    if j == i {
                        continue;
                    }
                    // the neighbor must run the shared edge as b -> a
                    let g = c.faces[j];
                    let g = if directed(&g).contains(&(b, a)) { g } else { g.reversed() };
                    match out[j] {
                        None => {
                            out[j] = Some(g);
                            queue.push_back(j);
                        }
                        Some(h) if h.0 == g.0 || directed(&h).contains(&(b, a)) => {}
                        Some(_) => return Err(SteffenError::NotOrientable),
                    }
                }
            }
        }
    }
    Ok(out.into_iter().map(|f| f.expect("every face visited")).collect())
}

/// `Σ orient6(apex, a, b, c) / 6` over the faces as stored.
pub fn signed_volume<S: Scalar>(r: &Realization<S>, apex: &Point3<S>) -> Result<S, SteffenError> {
    let mut total = S::zero();
    for f in &r.complex().faces {
        let [a, b, c] = f.0.map(|v| r.point(v));
        total = total.add(&crate::geom::orient6(apex, a, b, c)?);
    }
    Ok(total.div(&S::from_i64(6)))
}

/// Enclosed volume of a closed surface, with faces reoriented coherently and
/// flipped as a whole when needed so the result is positive.
pub fn volume<S: Scalar>(r: &Realization<S>) -> Result<S, SteffenError> {
    oriented_volume(r, &Point3::origin()).map(|(v, _)| v)
}

/// Volume taken with `apex` as the common tip, plus the coherent face list that
/// makes it positive.
pub fn oriented_volume<S: Scalar>(
    r: &Realization<S>,
    apex: &Point3<S>,
) -> Result<(S, Vec<Face>), SteffenError> {
    let faces = orient_faces(r.complex())?;
    let oriented = r.with_faces(faces.clone())?;
    let v = signed_volume(&oriented, apex)?;
    if v.sign(r.policy()) == Sign::Negative {
        let flipped = faces.iter().map(Face::reversed).collect();
        Ok((S::zero().sub(&v), flipped))
    } else {
        Ok((v, faces))
    }
}

/// Exact 187√166/12.
pub fn expected_volume(tower: &FieldTower) -> Result<FieldElem, FieldError> {
    let s166 = tower.generator(2);
    s166.checked_mul(&FieldElem::from_rational(BigRational::new(187.into(), 12.into())))
}

/// Vertices on the boundary of a single tetrahedron fixture built from the
/// Steffen coordinates of `ids`.
pub fn tetrahedron_of(
    m: &SteffenModel,
    ids: [u32; 4],
) -> Result<Realization<FieldElem>, SteffenError> {
    let coords: BTreeMap<VertexId, Point3> = ids
        .iter()
        .map(|&i| (VertexId(i), m.realization.point(VertexId(i)).clone()))
        .collect();
    let c = crate::mesh::tetrahedron_complex(ids);
    Ok(realize(c, coords, SignPolicy::Exact)?)
}

/// Distinct radicands of the tower levels, outermost last.
pub fn tower_radicands(t: &FieldTower) -> Vec<FieldElem> {
    (1..=t.depth()).map(|l| t.radicand(l)).collect()
}

/// Vertices not touched by any trilateration rule.
pub fn base_ids(data: &SteffenData) -> BTreeSet<u32> {
    let placed: BTreeSet<u32> = data.trilaterations.iter().map(|r| r.vertex).collect();
    data.vertices.iter().copied().filter(|v| !placed.contains(v)).collect()
}
