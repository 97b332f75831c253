//! File formats: the JSON model, the legacy four-list CSV inputs, OBJ export and
//! the flex animation file.
//!
//! JSON model:
//!
//! ```json
//! {"tower": [<expr>...], "mode": "exact", "vertices": [{"id": 1, "coords": [<expr>, <expr>, <expr>]}],
//!  "edges": [[1, 2]], "faces": [[1, 2, 3]]}
//! ```
//!
//! `tower` is optional and pins the order in which radicals are adjoined, so an
//! exact model written by [`exact_model`] parses back to an identical file. In
//! float mode a coordinate may also be a plain decimal string or JSON number.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Read;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{Point3, Scalar, SignPolicy};
use crate::mesh::{realize, Edge, Face, MeshError, Realization, SurfaceComplex, VertexId};
use crate::numfield::{Expr, ExprContext, FieldElem, FieldError};

pub const DEFAULT_EPSILON: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("number error: {0}")]
    Number(#[from] FieldError),
    #[error("invalid model: {0}")]
    Mesh(#[from] MeshError),
    #[error("vertex {0} is given inconsistent coordinates")]
    InconsistentVertex(VertexId),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for ModelError {
    fn from(e: serde_json::Error) -> Self {
        ModelError::Parse(e.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeTag {
    Exact,
    Float,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoordValue {
    Decimal(String),
    Number(f64),
    Expr(Expr),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexRecord {
    pub id: u32,
    pub coords: [CoordValue; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tower: Vec<Expr>,
    pub mode: ModeTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    pub vertices: Vec<VertexRecord>,
    pub edges: Vec<[u32; 2]>,
    pub faces: Vec<[u32; 3]>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub with_boundary: bool,
}

/// A loaded model in whichever arithmetic its file asked for.
#[derive(Clone, Debug)]
pub enum AnyRealization {
    Exact(Realization<FieldElem>),
    Float(Realization<f64>),
}

impl AnyRealization {
    pub fn complex(&self) -> &SurfaceComplex {
        match self {
            AnyRealization::Exact(r) => r.complex(),
            AnyRealization::Float(r) => r.complex(),
        }
    }

    /// Convert to float mode (a no-op apart from the epsilon for float models).
    pub fn into_float(self, eps: f64) -> Result<Realization<f64>, ModelError> {
        Ok(match self {
            AnyRealization::Exact(r) => r.to_float(eps)?,
            AnyRealization::Float(r) => {
                realize(r.complex().clone(), r.coords().clone(), SignPolicy::Epsilon(eps))?
            }
        })
    }
}

fn complex_of(file: &ModelFile) -> SurfaceComplex {
    SurfaceComplex {
        vertex_ids: file.vertices.iter().map(|v| VertexId(v.id)).collect(),
        edges: file
            .edges
            .iter()
            .map(|&[a, b]| Edge::new(VertexId(a), VertexId(b)))
            .collect(),
        faces: file.faces.iter().map(|f| Face(f.map(VertexId))).collect(),
        with_boundary: file.with_boundary,
    }
}

fn exact_coord(ctx: &mut ExprContext, c: &CoordValue) -> Result<FieldElem, ModelError> {
    match c {
        CoordValue::Expr(e) => Ok(ctx.eval(e)?),
        CoordValue::Decimal(s) => Ok(ctx.eval(&Expr::Rat(s.clone()))?),
        CoordValue::Number(x) => {
            let r = num_rational::BigRational::from_float(*x)
                .ok_or_else(|| ModelError::Parse(format!("non-finite coordinate {x}")))?;
            Ok(FieldElem::from_rational(r))
        }
    }
}

fn float_coord(ctx: &mut ExprContext, c: &CoordValue) -> Result<f64, ModelError> {
    match c {
        CoordValue::Number(x) => Ok(*x),
        CoordValue::Decimal(s) => s
            .trim()
            .parse::<f64>()
            .or_else(|_| ctx.eval(&Expr::Rat(s.clone())).map(|v| v.to_f64()))
            .map_err(|_| ModelError::Parse(format!("bad decimal {s:?}"))),
        CoordValue::Expr(e) => Ok(ctx.eval(e)?.to_f64()),
    }
}

/// Interpret a parsed model file. `eps_override` replaces the file's epsilon in
/// float mode.
pub fn realize_model(file: &ModelFile, eps_override: Option<f64>) -> Result<AnyRealization, ModelError> {
    let complex = complex_of(file);
    let mut ctx = ExprContext::default();
    ctx.declare_levels(&file.tower)?;
    match file.mode {
        ModeTag::Exact => {
            let mut coords = BTreeMap::new();
            for v in &file.vertices {
                let [x, y, z] = &v.coords;
                let p = Point3::new(
                    exact_coord(&mut ctx, x)?,
                    exact_coord(&mut ctx, y)?,
                    exact_coord(&mut ctx, z)?,
                );
                coords.insert(VertexId(v.id), p);
            }
            // every coordinate into the final tower
            let tower = ctx.tower().clone();
            let coords = coords
                .into_iter()
                .map(|(k, p)| Ok((k, p.lift(&tower).map_err(|_| FieldError::IncompatibleTowers)?)))
                .collect::<Result<BTreeMap<_, _>, FieldError>>()?;
            Ok(AnyRealization::Exact(realize(complex, coords, SignPolicy::Exact)?))
        }
        ModeTag::Float => {
            let eps = eps_override.or(file.epsilon).unwrap_or(DEFAULT_EPSILON);
            let mut coords = BTreeMap::new();
            for v in &file.vertices {
                let [x, y, z] = &v.coords;
                let p = Point3::new(
                    float_coord(&mut ctx, x)?,
                    float_coord(&mut ctx, y)?,
                    float_coord(&mut ctx, z)?,
                );
                coords.insert(VertexId(v.id), p);
            }
            Ok(AnyRealization::Float(realize(
                complex,
                coords,
                SignPolicy::Epsilon(eps),
            )?))
        }
    }
}

pub fn parse_model(json: &str, eps_override: Option<f64>) -> Result<AnyRealization, ModelError> {
    let file: ModelFile = serde_json::from_str(json)?;
    realize_model(&file, eps_override)
}

pub fn read_model(path: &std::path::Path, eps_override: Option<f64>) -> Result<AnyRealization, ModelError> {
    let mut s = String::new();
    std::fs::File::open(path)?.read_to_string(&mut s)?;
    parse_model(&s, eps_override)
}

fn file_skeleton(c: &SurfaceComplex) -> (Vec<[u32; 2]>, Vec<[u32; 3]>) {
    (
        c.edges.iter().map(|e| e.0.map(|v| v.0)).collect(),
        c.faces.iter().map(|f| f.0.map(|v| v.0)).collect(),
    )
}

/// Exact model file; coordinates become canonical expression trees.
pub fn exact_model(r: &Realization<FieldElem>) -> ModelFile {
    let tower = r
        .coords()
        .values()
        .flat_map(|p| p.coords())
        .map(|c| c.tower())
        .max_by_key(|t| t.depth())
        .cloned()
        .unwrap_or_else(crate::numfield::FieldTower::rationals);
    let ctx = ExprContext::new(tower);
    let vertices = r
        .complex()
        .vertex_ids
        .iter()
        .map(|&v| {
            let p = r.point(v);
            VertexRecord {
                id: v.0,
                coords: p.coords().map(|c| CoordValue::Expr(Expr::from_elem(c))),
            }
        })
        .collect();
    let (edges, faces) = file_skeleton(r.complex());
    ModelFile {
        tower: ctx.level_exprs(),
        mode: ModeTag::Exact,
        epsilon: None,
        vertices,
        edges,
        faces,
        with_boundary: r.complex().with_boundary,
    }
}

/// Float model file with coordinates as decimal strings at `digits` places.
pub fn float_model<S: Scalar>(r: &Realization<S>, digits: usize, eps: f64) -> ModelFile {
    let vertices = r
        .complex()
        .vertex_ids
        .iter()
        .map(|&v| {
            let p = r.point(v).to_f64();
            VertexRecord {
                id: v.0,
                coords: [p.x, p.y, p.z].map(|c| CoordValue::Decimal(format!("{c:.digits$}"))),
            }
        })
        .collect();
    let (edges, faces) = file_skeleton(r.complex());
    ModelFile {
        tower: Vec::new(),
        mode: ModeTag::Float,
        epsilon: Some(eps),
        vertices,
        edges,
        faces,
        with_boundary: r.complex().with_boundary,
    }
}

/// Float model with decimals computed from exact intervals, so every printed
/// digit is correctly rounded.
pub fn float_model_exact(r: &Realization<FieldElem>, digits: u32, eps: f64) -> ModelFile {
    let mut m = float_model(r, digits as usize, eps);
    for rec in &mut m.vertices {
        let p = r.point(VertexId(rec.id));
        rec.coords = p
            .coords()
            .map(|c| CoordValue::Decimal(c.approx(digits + 4).to_decimal_string(digits)));
    }
    m
}

pub fn to_json(file: &ModelFile) -> String {
    serde_json::to_string_pretty(file).expect("model serialization cannot fail")
}

/// Wavefront OBJ with vertices in id order. Coordinates are rounded, so the
/// file is marked approximate.
pub fn to_obj<S: Scalar>(r: &Realization<S>, digits: usize) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# approximate: coordinates rounded to {digits} decimals");
    let ids: Vec<VertexId> = r.coords().keys().copied().collect();
    let index: BTreeMap<VertexId, usize> = ids.iter().enumerate().map(|(i, &v)| (v, i + 1)).collect();
    for v in &ids {
        let p = r.point(*v).to_f64();
        let _ = writeln!(out, "v {:.*} {:.*} {:.*}", digits, p.x, digits, p.y, digits, p.z);
    }
    for f in &r.complex().faces {
        let [a, b, c] = f.0.map(|v| index[&v]);
        let _ = writeln!(out, "f {a} {b} {c}");
    }
    out
}

/// The four legacy lists: edges `s`, edges with endpoint coordinates `ss`,
/// faces `t`, faces with vertex coordinates `tt`, each as CSV text.
///
/// Rows: `s`: `i,j`; `ss`: `i,j,x_i,y_i,z_i,x_j,y_j,z_j`; `t`: `i,j,k`;
/// `tt`: `i,j,k` followed by nine coordinates. A coordinate cell is a rational
/// or decimal literal, or a quoted JSON expression tree.
pub struct SplitInputs<'a> {
    pub s: &'a str,
    pub ss: &'a str,
    pub t: &'a str,
    pub tt: &'a str,
}

fn csv_rows(text: &str) -> Result<Vec<Vec<String>>, ModelError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| ModelError::Parse(e.to_string()))?;
        if rec.iter().all(|c| c.is_empty()) {
            continue;
        }
        rows.push(rec.iter().map(str::to_string).collect());
    }
    Ok(rows)
}

fn parse_id(s: &str) -> Result<u32, ModelError> {
    s.parse().map_err(|_| ModelError::Parse(format!("bad vertex id {s:?}")))
}

fn parse_cell(s: &str) -> Result<CoordValue, ModelError> {
    if s.starts_with('{') {
        Ok(CoordValue::Expr(serde_json::from_str(s)?))
    } else {
        Ok(CoordValue::Decimal(s.to_string()))
    }
}

/// Merge the legacy lists into one model, failing on any vertex given two
/// different coordinate triples.
pub fn merge_split_inputs(inputs: &SplitInputs<'_>, mode: ModeTag) -> Result<ModelFile, ModelError> {
    let mut coords: BTreeMap<u32, [CoordValue; 3]> = BTreeMap::new();
    let mut record = |id: u32, cells: &[String]| -> Result<(), ModelError> {
        let c = [parse_cell(&cells[0])?, parse_cell(&cells[1])?, parse_cell(&cells[2])?];
        match coords.get(&id) {
            Some(prev) if *prev != c => Err(ModelError::InconsistentVertex(VertexId(id))),
            Some(_) => Ok(()),
            None => {
                coords.insert(id, c);
                Ok(())
            }
        }
    };
    let edges = csv_rows(inputs.s)?
        .iter()
        .map(|r| match r.as_slice() {
            [a, b] => Ok([parse_id(a)?, parse_id(b)?]),
            _ => Err(ModelError::Parse(format!("s row needs 2 ids: {r:?}"))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    for r in csv_rows(inputs.ss)? {
        if r.len() != 8 {
            return Err(ModelError::Parse(format!("ss row needs 8 cells: {r:?}")));
        }
        record(parse_id(&r[0])?, &r[2..5])?;
        record(parse_id(&r[1])?, &r[5..8])?;
    }
    let faces = csv_rows(inputs.t)?
        .iter()
        .map(|r| match r.as_slice() {
            [a, b, c] => Ok([parse_id(a)?, parse_id(b)?, parse_id(c)?]),
            _ => Err(ModelError::Parse(format!("t row needs 3 ids: {r:?}"))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    for r in csv_rows(inputs.tt)? {
        if r.len() != 12 {
            return Err(ModelError::Parse(format!("tt row needs 12 cells: {r:?}")));
        }
        for k in 0..3 {
            record(parse_id(&r[k])?, &r[3 + 3 * k..6 + 3 * k])?;
        }
    }
    let vertices = coords
        .into_iter()
        .map(|(id, coords)| VertexRecord { id, coords })
        .collect();
    Ok(ModelFile {
        tower: Vec::new(),
        mode,
        epsilon: None,
        vertices,
        edges,
        faces,
        with_boundary: false,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameVertex {
    pub id: u32,
    pub coords: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnimationFrame {
    pub t: f64,
    pub vertices: Vec<FrameVertex>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Animation {
    pub frames: Vec<AnimationFrame>,
}

impl AnimationFrame {
    pub fn from_realization(t: f64, r: &Realization<f64>) -> AnimationFrame {
        AnimationFrame {
            t,
            vertices: r
                .coords()
                .iter()
                .map(|(v, p)| FrameVertex {
                    id: v.0,
                    coords: [p.x, p.y, p.z],
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::tetrahedron_complex;

    fn unit_tet() -> Realization<FieldElem> {
        let coords = [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)]
            .iter()
            .enumerate()
            .map(|(i, &(x, y, z))| (VertexId(i as u32 + 1), Point3::from_ints(x, y, z)))
            .collect();
        realize(tetrahedron_complex([1, 2, 3, 4]), coords, SignPolicy::Exact).unwrap()
    }

    #[test]
    fn exact_round_trip_is_bit_exact() {
        let json = to_json(&exact_model(&unit_tet()));
        let back = match parse_model(&json, None).unwrap() {
            AnyRealization::Exact(r) => r,
            AnyRealization::Float(_) => panic!("mode changed"),
        };
        assert_eq!(to_json(&exact_model(&back)), json);
    }

    #[test]
    fn float_mode_accepts_decimals_and_numbers() {
        let json = r#"{"mode":"float","vertices":[
            {"id":1,"coords":["0","0","0"]},{"id":2,"coords":[1.0,0,0]},
            {"id":3,"coords":["0","1.0","0"]},{"id":4,"coords":[{"rat":"0"},{"rat":"0"},{"rat":"1"}]}],
            "edges":[[1,2],[1,3],[1,4],[2,3],[2,4],[3,4]],
            "faces":[[2,3,4],[1,4,3],[1,2,4],[1,3,2]]}"#;
        match parse_model(json, None).unwrap() {
            AnyRealization::Float(r) => {
                assert_eq!(r.policy(), SignPolicy::Epsilon(DEFAULT_EPSILON));
                assert_eq!(r.point(VertexId(4)).z, 1.0);
            }
            AnyRealization::Exact(_) => panic!("wrong mode"),
        }
    }

    #[test]
    fn obj_lists_vertices_then_faces() {
        let obj = to_obj(&unit_tet(), 3);
        let lines: Vec<&str> = obj.lines().collect();
        assert!(lines[0].starts_with("# approximate"));
        assert_eq!(lines[2], "v 1.000 0.000 0.000");
        assert_eq!(lines.iter().filter(|l| l.starts_with("f ")).count(), 4);
    }

    #[test]
    fn split_inputs_detect_conflicting_coordinates() {
        let s = "1,2\n1,3\n1,4\n2,3\n2,4\n3,4\n";
        let t = "2,3,4\n1,4,3\n1,2,4\n1,3,2\n";
        let ss = "1,2,0,0,0,1,0,0\n1,3,0,0,0,0,1,0\n1,4,0,0,0,0,0,1\n";
        let tt = "2,3,4,1,0,0,0,1,0,0,0,1\n";
        let m = merge_split_inputs(&SplitInputs { s, ss, t, tt }, ModeTag::Exact).unwrap();
        assert_eq!(m.vertices.len(), 4);
        assert!(parse_model(&serde_json::to_string(&m).unwrap(), None).is_ok());

        let tt_bad = "2,3,4,1,0,0,0,1,0,0,0,2\n";
        let err = merge_split_inputs(&SplitInputs { s, ss, t, tt: tt_bad }, ModeTag::Exact);
        assert!(matches!(err, Err(ModelError::InconsistentVertex(VertexId(4)))));
    }

    #[test]
    fn split_inputs_accept_expression_cells() {
        let ss = "1,2,\"{\"\"sqrt\"\":{\"\"rat\"\":\"\"2\"\"}}\",0,0,1,0,0\n";
        let m = merge_split_inputs(
            &SplitInputs { s: "1,2\n", ss, t: "", tt: "" },
            ModeTag::Exact,
        )
        .unwrap();
        assert!(matches!(m.vertices[0].coords[0], CoordValue::Expr(Expr::Sqrt(_))));
    }
}
