//! Exact verification that a triangulated surface in 3-space is embedded, plus an
//! exact construction of Steffen's flexible polyhedron and a floating-point study
//! of its flex.
//!
//! The layers, bottom up:
//!
//! - [`numfield`]: exact numbers in towers of real quadratic extensions of `Q`.
//! - [`geom`]: the oriented-volume predicate and the segment/triangle classifier.
//! - [`mesh`]: abstract surfaces, their realizations, and structural validation.
//! - [`checker`]: the exhaustive edge × face scan.
//! - [`steffen`]: exact construction of the Steffen polyhedron and its volume.
//! - [`flex`]: the one-parameter flex, in floating point.
//! - [`model`]: JSON model files, legacy list inputs, OBJ export, text reports.

pub mod checker;
pub mod flex;
pub mod geom;
pub mod mesh;
pub mod model;
pub mod numfield;
pub mod steffen;

pub use checker::{check_embedded, CheckOptions, CheckReport, Verdict};
pub use geom::{Point3, Scalar};
pub use mesh::{Realization, SurfaceComplex, VertexId};
pub use numfield::{FieldElem, FieldTower, Sign};
