//! The flex family S_t in floating point.
//!
//! v1..v4 stay fixed, v9 runs along the circle γ in the plane x = 0 (both
//! spheres of radius 10 around v3 and v4 meet there), and v5..v8 are
//! re-trilaterated from their three neighbors. Between consecutive parameter
//! values the candidate nearest to the previous position is kept, starting from
//! the exact t = 0 model.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::checker::{check_embedded, CheckError, CheckOptions, CheckReport, Verdict};
use crate::geom::{Point3, SignPolicy};
use crate::mesh::{realize, Edge, MeshError, Realization, VertexId};
use crate::steffen::{build_steffen, steffen_data, trilateration_frame, SteffenData, SteffenError};

/// Largest parameter step taken while following a branch.
pub const MAX_STEP: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlexError {
    #[error("v{vertex} cannot be placed at t = {t}: spheres do not meet")]
    DiscriminantNegative { vertex: u32, t: f64 },
    #[error("bracket [{lo}, {hi}] does not separate Embedded from not Embedded")]
    BracketInvalid { lo: f64, hi: f64 },
    #[error("|t| must be below pi, got {0}")]
    OutOfRange(f64),
    #[error(transparent)]
    Steffen(#[from] SteffenError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Check(#[from] CheckError),
}

/// Radius of γ: 10² − (11/2)² = 279/4.
pub fn gamma_radius() -> f64 {
    1.5 * 31f64.sqrt()
}

/// v9 at parameter `t`; positive `t` moves it toward positive y.
pub fn v9_of_t(t: f64) -> Point3<f64> {
    let r = gamma_radius();
    Point3::new(0.0, r * t.sin(), -r * t.cos())
}

/// Chord and arc length between v9(−t) and v9(t).
pub fn v9_displacement(t: f64) -> (f64, f64) {
    let r = gamma_radius();
    (2.0 * r * t.abs().sin(), 2.0 * r * t.abs())
}

#[derive(Clone, Debug)]
pub struct FlexFrame {
    pub t: f64,
    pub realization: Realization<f64>,
    /// Chosen trilateration candidate per moving vertex (0 = `+λ`, 1 = `−λ`).
    pub branch_record: Vec<(VertexId, usize)>,
}

fn seed() -> Result<&'static BTreeMap<VertexId, Point3<f64>>, FlexError> {
    static SEED: OnceLock<Result<BTreeMap<VertexId, Point3<f64>>, SteffenError>> = OnceLock::new();
    SEED.get_or_init(|| {
        build_steffen().map(|m| {
            m.realization
                .coords()
                .iter()
                .map(|(&v, p)| (v, p.to_f64()))
                .collect()
        })
    })
    .as_ref()
    .map_err(|e| FlexError::Steffen(e.clone()))
}

fn data() -> &'static SteffenData {
    static DATA: OnceLock<SteffenData> = OnceLock::new();
    DATA.get_or_init(steffen_data)
}

/// One continuation step: place every moving vertex at `t` near `prev`.
fn advance(
    prev: &BTreeMap<VertexId, Point3<f64>>,
    t: f64,
    record: &mut Vec<(VertexId, usize)>,
) -> Result<BTreeMap<VertexId, Point3<f64>>, FlexError> {
    let d = data();
    let mut next = prev.clone();
    next.insert(VertexId(9), v9_of_t(t));
    record.clear();
    for rule in &d.trilaterations {
        let v = rule.vertex;
        let centers = rule.from.map(|i| next[&VertexId(i)].clone());
        let radii = rule.from.map(|i| {
            let l = d.length(v, i).expect("rule neighbors are edges") as f64;
            l * l
        });
        let f = trilateration_frame(
            [&centers[0], &centers[1], &centers[2]],
            [&radii[0], &radii[1], &radii[2]],
            SignPolicy::Epsilon(f64::MIN_POSITIVE),
        )?;
        if f.lambda_sq < 0.0 {
            return Err(FlexError::DiscriminantNegative { vertex: v, t });
        }
        let off = f.normal.scale(&f.lambda_sq.sqrt());
        let cands = [f.foot.add(&off), f.foot.sub(&off)];
        let old = &prev[&VertexId(v)];
        let k = if cands[0].distance(old) <= cands[1].distance(old) { 0 } else { 1 };
        next.insert(VertexId(v), cands[k].clone());
        record.push((VertexId(v), k));
    }
    Ok(next)
}

/// Realize S_t by following the flex from the exact t = 0 model.
pub fn realize_flex(t: f64, epsilon: f64) -> Result<FlexFrame, FlexError> {
    if !t.is_finite() || t.abs() >= std::f64::consts::PI {
        return Err(FlexError::OutOfRange(t));
    }
    let mut coords = seed()?.clone();
    let n = (t.abs() / MAX_STEP).ceil().max(1.0) as usize;
    let mut record = Vec::new();
    for i in 1..=n {
        coords = advance(&coords, t * i as f64 / n as f64, &mut record)?;
    }
    let realization = realize(data().complex(), coords, SignPolicy::Epsilon(epsilon))?;
    Ok(FlexFrame {
        t,
        realization,
        branch_record: record,
    })
}

/// Largest `| |p_i − p_j| − length |` over the 21 edges.
pub fn max_edge_residual(frame: &FlexFrame) -> f64 {
    data()
        .lengths()
        .into_iter()
        .map(|(e, l)| {
            let r = &frame.realization;
            (r.point(e.0[0]).distance(r.point(e.0[1])) - l as f64).abs()
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanSample {
    pub t: f64,
    pub verdict: Option<Verdict>,
    pub out1: Vec<(Edge, [VertexId; 3])>,
    pub out2: Vec<(Edge, [VertexId; 3])>,
    pub max_edge_residual: Option<f64>,
    pub error: Option<String>,
}

/// Float-mode check of a single frame.
pub fn check_frame(frame: &FlexFrame) -> Result<CheckReport, FlexError> {
    Ok(check_embedded(
        &frame.realization,
        CheckOptions {
            resolve_degenerate: false,
            threads: Some(1),
        },
    )?)
}

pub fn verdict_at(t: f64, epsilon: f64) -> Result<CheckReport, FlexError> {
    check_frame(&realize_flex(t, epsilon)?)
}

fn sample(t: f64, epsilon: f64) -> ScanSample {
    match realize_flex(t, epsilon).and_then(|f| Ok((check_frame(&f)?, max_edge_residual(&f)))) {
        Ok((rep, res)) => ScanSample {
            t,
            verdict: Some(rep.verdict),
            out1: rep.out1.iter().map(|e| (e.edge, e.face)).collect(),
            out2: rep.intersecting_pairs(),
            max_edge_residual: Some(res),
            error: None,
        },
        Err(e) => ScanSample {
            t,
            verdict: None,
            out1: Vec::new(),
            out2: Vec::new(),
            max_edge_residual: None,
            error: Some(e.to_string()),
        },
    }
}

/// `steps + 1` evenly spaced parameters from `t_from` to `t_to`.
pub fn scan_parameters(t_from: f64, t_to: f64, steps: usize) -> Vec<f64> {
    let steps = steps.max(1);
    (0..=steps)
        .map(|i| t_from + (t_to - t_from) * i as f64 / steps as f64)
        .collect()
}

/// Check each sample in parallel; failures are recorded per sample.
pub fn scan_embeddedness(t_from: f64, t_to: f64, steps: usize, epsilon: f64) -> Vec<ScanSample> {
    scan_parameters(t_from, t_to, steps)
        .into_par_iter()
        .map(|t| sample(t, epsilon))
        .collect()
}

/// Parameters where consecutive samples change verdict.
pub fn verdict_changes(samples: &[ScanSample]) -> Vec<(f64, f64)> {
    samples
        .windows(2)
        .filter(|w| w[0].verdict != w[1].verdict)
        .map(|w| (w[0].t, w[1].t))
        .collect()
}

/// Bisect between an Embedded and a non-Embedded parameter down to `tolerance`.
pub fn max_embedded_t(
    t_lo: f64,
    t_hi: f64,
    tolerance: f64,
    epsilon: f64,
) -> Result<(f64, f64), FlexError> {
    let embedded = |t: f64| -> Result<bool, FlexError> {
        Ok(verdict_at(t, epsilon)?.verdict == Verdict::Embedded)
    };
    if !(embedded(t_lo)? && !embedded(t_hi)?) {
        return Err(FlexError::BracketInvalid { lo: t_lo, hi: t_hi });
    }
    let (mut lo, mut hi) = (t_lo, t_hi);
    while (hi - lo).abs() > tolerance {
        let mid = 0.5 * (lo + hi);
        if embedded(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo, hi))
}

/// Image of `p` under the half-turn `(x, y, z) ↦ (−x, −y, z)`.
pub fn half_turn(p: &Point3<f64>) -> Point3<f64> {
    Point3::new(-p.x, -p.y, p.z)
}
