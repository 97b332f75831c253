//! Abstract triangulated surfaces and their realizations in 3-space.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{dist2, Point3, Scalar, SignPolicy};
use crate::numfield::Sign;

#[derive(
    Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct VertexId(pub u32);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Unordered vertex pair, stored sorted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge(pub [VertexId; 2]);

impl Edge {
    pub fn new(a: VertexId, b: VertexId) -> Edge {
        if a <= b {
            Edge([a, b])
        } else {
            Edge([b, a])
        }
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.0.contains(&v)
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{},{}}}", self.0[0], self.0[1])
    }
}

/// Vertex triple; the stored order carries the face orientation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Face(pub [VertexId; 3]);

impl Face {
    pub fn sorted(&self) -> [VertexId; 3] {
        let mut v = self.0;
        v.sort();
        v
    }

    pub fn edges(&self) -> [Edge; 3] {
        let [a, b, c] = self.0;
        [Edge::new(a, b), Edge::new(b, c), Edge::new(c, a)]
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.0.contains(&v)
    }

    pub fn position(&self, v: VertexId) -> Option<usize> {
        self.0.iter().position(|&w| w == v)
    }

    pub fn reversed(&self) -> Face {
        let [a, b, c] = self.0;
        Face([a, c, b])
    }
}

impl fmt::Display for Face {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.sorted();
        write!(f, "{{{a},{b},{c}}}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceComplex {
    pub vertex_ids: Vec<VertexId>,
    pub edges: Vec<Edge>,
    pub faces: Vec<Face>,
    #[serde(default)]
    pub with_boundary: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Violation {
    DuplicateVertex(VertexId),
    UnknownVertex(VertexId),
    LoopEdge(VertexId),
    DuplicateEdge(Edge),
    RepeatedFaceVertex(Face),
    DuplicateFace(Face),
    MissingFaceEdge { face: Face, edge: Edge },
    EdgeFaceCount { edge: Edge, count: usize },
    Disconnected { components: usize },
    EulerCharacteristic(i64),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateVertex(v) => write!(f, "vertex {v} listed twice"),
            Violation::UnknownVertex(v) => write!(f, "vertex {v} is not declared"),
            Violation::LoopEdge(v) => write!(f, "edge {{{v},{v}}} is a loop"),
            Violation::DuplicateEdge(e) => write!(f, "edge {e} listed twice"),
            Violation::RepeatedFaceVertex(t) => write!(f, "face {t} repeats a vertex"),
            Violation::DuplicateFace(t) => write!(f, "face {t} listed twice"),
            Violation::MissingFaceEdge { face, edge } => {
                write!(f, "edge {edge} of face {face} is not in the edge list")
            }
            Violation::EdgeFaceCount { edge, count } => write!(f, "edge {edge} in {count} face(s)"),
            Violation::Disconnected { components } => {
                write!(f, "complex has {components} connected components")
            }
            Violation::EulerCharacteristic(chi) => {
                write!(f, "V - E + F = {chi}, expected 2 for a closed sphere-type surface")
            }
        }
    }
}

/// Every structural problem with `c`; empty iff it is a valid surface.
pub fn validate_complex(c: &SurfaceComplex) -> Vec<Violation> {
    let mut out = BTreeSet::new();
    let mut verts = BTreeSet::new();
    for &v in &c.vertex_ids {
        if !verts.insert(v) {
            out.insert(Violation::DuplicateVertex(v));
        }
    }

    let mut edge_set = BTreeSet::new();
    for e in &c.edges {
        let e = Edge::new(e.0[0], e.0[1]);
        for v in e.0 {
            if !verts.contains(&v) {
                out.insert(Violation::UnknownVertex(v));
            }
        }
        if e.0[0] == e.0[1] {
            out.insert(Violation::LoopEdge(e.0[0]));
        }
        if !edge_set.insert(e) {
            out.insert(Violation::DuplicateEdge(e));
        }
    }

    let mut face_set = BTreeSet::new();
    let mut edge_faces: HashMap<Edge, usize> = edge_set.iter().map(|&e| (e, 0)).collect();
    for t in &c.faces {
        for v in t.0 {
            if !verts.contains(&v) {
                out.insert(Violation::UnknownVertex(v));
            }
        }
        let s = t.sorted();
        if s[0] == s[1] || s[1] == s[2] {
            out.insert(Violation::RepeatedFaceVertex(Face(s)));
            continue;
        }
        if !face_set.insert(s) {
            out.insert(Violation::DuplicateFace(Face(s)));
        }
        for e in t.edges() {
            match edge_faces.get_mut(&e) {
                Some(n) => *n += 1,
                None => {
                    out.insert(Violation::MissingFaceEdge {
                        face: Face(s),
                        edge: e,
                    });
                }
            }
        }
    }
    for (&edge, &count) in &edge_faces {
        let ok = if c.with_boundary {
            count == 1 || count == 2
        } else {
            count == 2
        };
        if !ok {
            out.insert(Violation::EdgeFaceCount { edge, count });
        }
    }

    let components = count_components(&verts, &edge_set);
    if components > 1 {
        out.insert(Violation::Disconnected { components });
    }
    if !c.with_boundary {
        let chi = verts.len() as i64 - edge_set.len() as i64 + face_set.len() as i64;
        if chi != 2 {
            out.insert(Violation::EulerCharacteristic(chi));
        }
    }
    out.into_iter().collect()
}

fn count_components(verts: &BTreeSet<VertexId>, edges: &BTreeSet<Edge>) -> usize {
    let index: HashMap<VertexId, usize> = verts.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut parent: Vec<usize> = (0..verts.len()).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for e in edges {
        if let (Some(&a), Some(&b)) = (index.get(&e.0[0]), index.get(&e.0[1])) {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            parent[ra] = rb;
        }
    }
    (0..verts.len())
        .filter(|&i| find(&mut parent, i) == i)
        .count()
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeshError {
    #[error("invalid complex: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidComplex(Vec<Violation>),
    #[error("vertex {0} has no coordinates")]
    MissingVertexCoordinates(VertexId),
    #[error("face {0} is geometrically degenerate")]
    DegenerateFace(Face),
    #[error("coordinates belong to incompatible towers")]
    IncompatibleTowers,
    #[error("edge {0} is not in the complex")]
    UnknownEdge(Edge),
    #[error("epsilon must be positive and finite, got {0}")]
    BadEpsilon(f64),
}

/// A complex together with vertex coordinates and the sign policy used for all
/// geometric decisions on it.
#[derive(Clone, Debug)]
pub struct Realization<S = crate::numfield::FieldElem> {
    complex: SurfaceComplex,
    coords: BTreeMap<VertexId, Point3<S>>,
    policy: SignPolicy,
}

impl<S: Scalar> Realization<S> {
    pub fn complex(&self) -> &SurfaceComplex {
        &self.complex
    }

    pub fn coords(&self) -> &BTreeMap<VertexId, Point3<S>> {
        &self.coords
    }

    pub fn policy(&self) -> SignPolicy {
        self.policy
    }

    pub fn point(&self, v: VertexId) -> &Point3<S> {
        &self.coords[&v]
    }

    pub fn to_float(&self, eps: f64) -> Result<Realization<f64>, MeshError> {
        let coords = self
            .coords
            .iter()
            .map(|(&v, p)| (v, p.to_f64()))
            .collect();
        realize(self.complex.clone(), coords, SignPolicy::Epsilon(eps))
    }

    /// Same geometry with a different (reoriented) face list.
    pub fn with_faces(&self, faces: Vec<Face>) -> Result<Realization<S>, MeshError> {
        let mut c = self.complex.clone();
        c.faces = faces;
        realize(c, self.coords.clone(), self.policy)
    }
}

/// Attach coordinates to a validated complex, rejecting degenerate faces.
pub fn realize<S: Scalar>(
    complex: SurfaceComplex,
    coords: BTreeMap<VertexId, Point3<S>>,
    policy: SignPolicy,
) -> Result<Realization<S>, MeshError> {
    if let SignPolicy::Epsilon(eps) = policy {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(MeshError::BadEpsilon(eps));
        }
    }
    let violations = validate_complex(&complex);
    if !violations.is_empty() {
        return Err(MeshError::InvalidComplex(violations));
    }
    for v in &complex.vertex_ids {
        if !coords.contains_key(v) {
            return Err(MeshError::MissingVertexCoordinates(*v));
        }
    }
    if let Some(first) = coords.values().next() {
        let all_ok = coords
            .values()
            .flat_map(|p| p.coords())
            .all(|c| first.x.compatible(c));
        if !all_ok {
            return Err(MeshError::IncompatibleTowers);
        }
    }
    for t in &complex.faces {
        let [a, b, c] = t.0.map(|v| &coords[&v]);
        let n = b.sub(a).cross(&c.sub(a));
        if n.is_zero(policy) {
            return Err(MeshError::DegenerateFace(*t));
        }
    }
    Ok(Realization {
        complex,
        coords,
        policy,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct LengthMismatch<S> {
    pub edge: Edge,
    pub expected_sq: S,
    pub actual_sq: S,
}

/// Compare squared edge lengths against `expected` (lengths, not squares).
pub fn check_edge_lengths<S: Scalar>(
    r: &Realization<S>,
    expected: &[(Edge, S)],
) -> Result<Vec<LengthMismatch<S>>, MeshError> {
    let known: BTreeSet<Edge> = r.complex.edges.iter().map(|e| Edge::new(e.0[0], e.0[1])).collect();
    let mut out = Vec::new();
    for (edge, len) in expected {
        let edge = Edge::new(edge.0[0], edge.0[1]);
        if !known.contains(&edge) {
            return Err(MeshError::UnknownEdge(edge));
        }
        let actual = dist2(r.point(edge.0[0]), r.point(edge.0[1]))
            .map_err(|_| MeshError::IncompatibleTowers)?;
        let want = len.mul(len);
        if actual.sub(&want).sign(r.policy) != Sign::Zero {
            out.push(LengthMismatch {
                edge,
                expected_sq: want,
                actual_sq: actual,
            });
        }
    }
    Ok(out)
}

/// Boundary of the tetrahedron on ids `ids`, outward-oriented when the
/// coordinates have `orient6(ids) > 0`.
pub fn tetrahedron_complex(ids: [u32; 4]) -> SurfaceComplex {
    let [a, b, c, d] = ids.map(VertexId);
    SurfaceComplex {
        vertex_ids: vec![a, b, c, d],
        edges: vec![
            Edge::new(a, b),
            Edge::new(a, c),
            Edge::new(a, d),
            Edge::new(b, c),
            Edge::new(b, d),
            Edge::new(c, d),
        ],
        faces: vec![Face([b, c, d]), Face([a, d, c]), Face([a, b, d]), Face([a, c, b])],
        with_boundary: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numfield::FieldElem;

    fn unit_tet_coords() -> BTreeMap<VertexId, Point3> {
        [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)]
            .iter()
            .enumerate()
            .map(|(i, &(x, y, z))| (VertexId(i as u32 + 1), Point3::from_ints(x, y, z)))
            .collect()
    }

    #[test]
    fn tetrahedron_is_valid() {
        assert!(validate_complex(&tetrahedron_complex([1, 2, 3, 4])).is_empty());
    }

    #[test]
    fn open_tetrahedron_reports_boundary_edges() {
        let mut c = tetrahedron_complex([1, 2, 3, 4]);
        c.faces.pop();
        let v = validate_complex(&c);
        let msgs: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        assert!(msgs.iter().any(|m| m.ends_with("in 1 face(s)")), "{msgs:?}");
        assert_eq!(msgs.iter().filter(|m| m.contains("in 1 face")).count(), 3);
        c.with_boundary = true;
        assert!(validate_complex(&c).is_empty());
    }

    #[test]
    fn validation_is_order_independent() {
        let c = tetrahedron_complex([1, 2, 3, 4]);
        let mut broken = c.clone();
        broken.edges.remove(0);
        broken.edges.push(Edge::new(VertexId(1), VertexId(1)));
        let mut shuffled = broken.clone();
        shuffled.edges.reverse();
        shuffled.faces.rotate_left(2);
        assert_eq!(validate_complex(&broken), validate_complex(&shuffled));
        assert!(!validate_complex(&broken).is_empty());
    }

    #[test]
    fn realize_rejects_missing_and_degenerate() {
        let c = tetrahedron_complex([1, 2, 3, 4]);
        let mut coords = unit_tet_coords();
        assert!(realize(c.clone(), coords.clone(), SignPolicy::Exact).is_ok());
        coords.insert(VertexId(3), Point3::from_ints(2, 0, 0));
        match realize(c.clone(), coords.clone(), SignPolicy::Exact) {
            Err(MeshError::DegenerateFace(_)) => {}
            other => panic!("{other:?}"),
        }
        coords.remove(&VertexId(4));
        assert_eq!(
            realize(c, coords, SignPolicy::Exact).unwrap_err(),
            MeshError::MissingVertexCoordinates(VertexId(4))
        );
    }

    #[test]
    fn edge_length_mismatch_is_reported() {
        let r = realize(tetrahedron_complex([1, 2, 3, 4]), unit_tet_coords(), SignPolicy::Exact)
            .unwrap();
        let e12 = Edge::new(VertexId(1), VertexId(2));
        let e23 = Edge::new(VertexId(2), VertexId(3));
        assert!(check_edge_lengths(&r, &[(e12, FieldElem::one())]).unwrap().is_empty());
        let bad = check_edge_lengths(&r, &[(e23, FieldElem::one())]).unwrap();
        assert_eq!(bad.len(), 1);
        assert_eq!(bad[0].actual_sq, FieldElem::from_int(2));
        let unknown = Edge::new(VertexId(1), VertexId(9));
        assert_eq!(
            check_edge_lengths(&r, &[(unknown, FieldElem::one())]).unwrap_err(),
            MeshError::UnknownEdge(unknown)
        );
    }
}
