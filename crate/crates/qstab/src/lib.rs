//! Finite geodesic metric graphs (Cayley balls, hyperbolic tilings, coned-off
//! and cusped spaces) together with estimators for quasigeodesic stability:
//! stability functions, t-middles, middle-recurrence constants, sublinearly
//! contracting projections, and the relatively-hyperbolic stability criteria.
//!
//! All graphs are unit-weight and immutable after construction; every
//! estimator is a pure function of its inputs, with lexicographic geodesic
//! tie-breaking so reported constants are reproducible bit-for-bit.

pub mod group_spaces;
pub mod metric_core;
pub mod relhyp;
pub mod stability_lab;

pub use metric_core::{Frac, MetricGraph, PathRec, VertexSet};
