//! Frenet invariants of curves in three-dimensional Lie groups with a
//! bi-invariant metric, and numerical study of Bertrand couples.
//!
//! The pipeline runs `curve` (sampling and arc-length reparametrization),
//! `frenet` (frame, curvatures, classification) and `bertrand` (fit, mate,
//! couple checks); `analysis` wires them to JSON configs and reports.

// `!(x > y)` is used on purpose so that NaN falls on the rejecting side
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod bertrand;
pub mod curve;
pub mod error;
pub mod frenet;
pub mod lie;
pub mod stats;

pub use bertrand::{BertrandFit, CoupleReport, MateCurve, MateMode};
pub use curve::{CurveSamples, CurveSource, CurveSpec, Family, Profile};
pub use error::{Error, Result};
pub use frenet::{ClassificationReport, ClassifyOptions, FrenetData, FrenetOptions};
pub use lie::{AlgebraVector, GroupKind, GroupPoint, GroupStructure};
