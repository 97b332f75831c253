//! Exhaustive edge × face scan deciding whether a realized surface is embedded.
//!
//! A realized surface self-intersects iff some closed edge meets some closed face
//! outside their common simplex, so it is enough to test every (edge, face) pair.
//! Each pair is classified by [`classify_segment_triangle`]; pairs the sign tests
//! cannot settle go to `out1`, detected crossings go to `out2`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use rayon::prelude::*;

use crate::geom::{
    classify_segment_triangle, resolve_needs_study, GeomError, PairTag, Resolution, Scalar,
    Shared,
};
use crate::mesh::{Edge, Face, Realization, VertexId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Embedded,
    NotEmbedded,
    Inconclusive,
}

impl Verdict {
    /// Process exit status for the CLI.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Embedded => 0,
            Verdict::NotEmbedded => 1,
            Verdict::Inconclusive => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SharedKind {
    Subset,
    OnePoint(VertexId),
    Disjoint,
}

/// Purely combinatorial relation between an edge and a face.
pub fn shared_classification(edge: Edge, face: Face) -> SharedKind {
    let [a, b] = edge.0;
    match (face.contains(a), face.contains(b)) {
        (true, true) => SharedKind::Subset,
        (true, false) => SharedKind::OnePoint(a),
        (false, true) => SharedKind::OnePoint(b),
        (false, false) => SharedKind::Disjoint,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StudyEntry {
    pub edge: Edge,
    pub face: [VertexId; 3],
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IntersectionEntry {
    pub edge: Edge,
    pub face: [VertexId; 3],
    /// Found by the degenerate-case resolver rather than the sign test.
    pub resolved: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ResolutionRecord {
    pub edge: Edge,
    pub face: [VertexId; 3],
    pub reason: String,
    pub resolution: Resolution,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub verdict: Verdict,
    pub out1: Vec<StudyEntry>,
    pub out2: Vec<IntersectionEntry>,
    pub resolutions: Vec<ResolutionRecord>,
    pub pairs_scanned: usize,
}

impl CheckReport {
    fn from_entries(
        mut out1: Vec<StudyEntry>,
        mut out2: Vec<IntersectionEntry>,
        mut resolutions: Vec<ResolutionRecord>,
        pairs_scanned: usize,
    ) -> CheckReport {
        out1.sort();
        out2.sort();
        resolutions.sort();
        let verdict = if !out2.is_empty() {
            Verdict::NotEmbedded
        } else if !out1.is_empty() {
            Verdict::Inconclusive
        } else {
            Verdict::Embedded
        };
        CheckReport {
            verdict,
            out1,
            out2,
            resolutions,
            pairs_scanned,
        }
    }

    /// Lines of the "requires additional study" report.
    pub fn out1_lines(&self) -> Vec<String> {
        self.out1
            .iter()
            .map(|e| {
                format!(
                    "The case of (edge {}, face {}) requires additional study",
                    e.edge,
                    Face(e.face)
                )
            })
            .collect()
    }

    /// Lines of the intersection report.
    pub fn out2_lines(&self) -> Vec<String> {
        self.out2
            .iter()
            .map(|e| format!("The edge {} intersects the face {}", e.edge, Face(e.face)))
            .collect()
    }

    /// `(edge, sorted face)` pairs listed in `out2`.
    pub fn intersecting_pairs(&self) -> Vec<(Edge, [VertexId; 3])> {
        self.out2.iter().map(|e| (e.edge, e.face)).collect()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CheckOptions {
    /// Settle `NeedsStudy` pairs with the exact degenerate-case resolver.
    pub resolve_degenerate: bool,
    /// Worker count; `None` uses the global pool, `Some(1)` runs inline.
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CheckError {
    #[error("pair (edge {edge}, face {face}): {source}")]
    Pair {
        edge: Edge,
        face: Face,
        #[source]
        source: GeomError,
    },
    #[error("could not start worker pool: {0}")]
    Pool(String),
}

enum Outcome {
    Study(StudyEntry),
    Hit(IntersectionEntry),
    Resolved(ResolutionRecord, Option<IntersectionEntry>),
}

fn check_pair<S: Scalar>(
    r: &Realization<S>,
    edge: Edge,
    face: Face,
    opts: CheckOptions,
) -> Result<Option<Outcome>, CheckError> {
    let shared = match shared_classification(edge, face) {
        SharedKind::Subset => return Ok(None),
        SharedKind::OnePoint(v) => Shared::OneVertex {
            segment_end: if edge.0[0] == v { 0 } else { 1 },
            triangle_vertex: face.position(v).expect("shared vertex is on the face"),
        },
        SharedKind::Disjoint => Shared::None,
    };
    let policy = r.policy();
    let [z1, z2] = edge.0.map(|v| r.point(v));
    let [y1, y2, y3] = face.0.map(|v| r.point(v));
    let err = |source| CheckError::Pair { edge, face, source };
    let verdict = classify_segment_triangle(z1, z2, y1, y2, y3, shared, policy).map_err(err)?;
    let sorted = face.sorted();
    Ok(match verdict.tag {
        PairTag::Disjoint | PairTag::SharedSubsimplex => None,
        PairTag::Intersecting => Some(Outcome::Hit(IntersectionEntry {
            edge,
            face: sorted,
            resolved: false,
        })),
        PairTag::NeedsStudy if opts.resolve_degenerate => {
            let res = resolve_needs_study(z1, z2, y1, y2, y3, shared, policy).map_err(err)?;
            let hit = (res == Resolution::ProperIntersection).then_some(IntersectionEntry {
                edge,
                face: sorted,
                resolved: true,
            });
            Some(Outcome::Resolved(
                ResolutionRecord {
                    edge,
                    face: sorted,
                    reason: verdict.detail,
                    resolution: res,
                },
                hit,
            ))
        }
        PairTag::NeedsStudy => Some(Outcome::Study(StudyEntry {
            edge,
            face: sorted,
            reason: verdict.detail,
        })),
    })
}

/// Test every (edge, face) pair of `r`. The report is independent of the
/// number of workers.
pub fn check_embedded<S: Scalar>(
    r: &Realization<S>,
    opts: CheckOptions,
) -> Result<CheckReport, CheckError> {
    let c = r.complex();
    let pairs: Vec<(Edge, Face)> = c
        .edges
        .iter()
        .flat_map(|e| {
            let e = Edge::new(e.0[0], e.0[1]);
            c.faces.iter().map(move |f| (e, *f))
        })
        .collect();
    let run = |pairs: &[(Edge, Face)]| -> Result<Vec<Option<Outcome>>, CheckError> {
        match opts.threads {
            Some(1) => pairs
                .iter()
                .map(|&(e, f)| check_pair(r, e, f, opts))
                .collect(),
            _ => pairs
                .par_iter()
                .map(|&(e, f)| check_pair(r, e, f, opts))
                .collect(),
        }
    };
    let outcomes = match opts.threads {
        Some(n) if n > 1 => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CheckError::Pool(e.to_string()))?
            .install(|| run(&pairs))?,
        _ => run(&pairs)?,
    };

    let mut out1 = Vec::new();
    let mut out2 = Vec::new();
    let mut resolutions = Vec::new();
    for o in outcomes.into_iter().flatten() {
        match o {
            Outcome::Study(s) => out1.push(s),
            Outcome::Hit(h) => out2.push(h),
            Outcome::Resolved(rec, hit) => {
                resolutions.push(rec);
                out2.extend(hit);
            }
        }
    }
    Ok(CheckReport::from_entries(out1, out2, resolutions, pairs.len()))
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::geom::{Point3, SignPolicy};
    use crate::mesh::{realize, tetrahedron_complex};

    fn v(i: u32) -> VertexId {
        VertexId(i)
    }

    #[test]
    fn combinatorial_sharing() {
        let f = Face([v(1), v(2), v(3)]);
        assert_eq!(shared_classification(Edge::new(v(1), v(2)), f), SharedKind::Subset);
        assert_eq!(
            shared_classification(Edge::new(v(1), v(4)), f),
            SharedKind::OnePoint(v(1))
        );
        assert_eq!(shared_classification(Edge::new(v(4), v(5)), f), SharedKind::Disjoint);
    }

    #[test]
    fn regular_tetrahedron_is_embedded() {
        let coords: BTreeMap<_, _> = [(1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)]
            .iter()
            .enumerate()
            .map(|(i, &(x, y, z))| (v(i as u32 + 1), Point3::from_ints(x, y, z)))
            .collect();
        let r = realize(tetrahedron_complex([1, 2, 3, 4]), coords, SignPolicy::Exact).unwrap();
        let rep = check_embedded(&r, CheckOptions::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::Embedded);
        assert!(rep.out1.is_empty() && rep.out2.is_empty());
        assert_eq!(rep.pairs_scanned, 24);
    }

    #[test]
    fn report_lines_use_templates() {
        let rep = CheckReport::from_entries(
            vec![StudyEntry {
                edge: Edge::new(v(2), v(1)),
                face: [v(3), v(4), v(5)],
                reason: String::new(),
            }],
            vec![IntersectionEntry {
                edge: Edge::new(v(2), v(3)),
                face: [v(7), v(8), v(9)],
                resolved: false,
            }],
            vec![],
            1,
        );
        assert_eq!(rep.verdict, Verdict::NotEmbedded);
        assert_eq!(
            rep.out1_lines(),
            vec!["The case of (edge {1,2}, face {3,4,5}) requires additional study"]
        );
        assert_eq!(rep.out2_lines(), vec!["The edge {2,3} intersects the face {7,8,9}"]);
    }
}
