//! Cayley-graph balls and tiling graphs for the built-in group families,
//! plus orbit maps and distortion measurement for subgroups.

mod ball;
mod dehn;
mod orbit;
mod spec;
mod tiling;
pub mod words;

pub use ball::{cayley_ball, cayley_ball_with_budget, CayleyBall, DEFAULT_VERTEX_BUDGET};
pub use dehn::Presentation;
pub use orbit::{
    distortion_profile, orbit_map, DistortionProfile, DistortionVerdict, OrbitMap,
};
pub use spec::GroupSpec;
pub use tiling::{tiling_graph, TilingGraph};

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GroupError {
    #[error("presentation fails the C'(1/6) small-cancellation condition: {0}")]
    NotSmallCancellation(String),
    #[error("word oracle inconsistency: {0}")]
    OracleInconsistent(String),
    #[error("ball exceeds the vertex budget of {0}")]
    BallTooLarge(usize),
    #[error("orbit image escapes the ambient ball")]
    ImageEscapesBall,
    #[error("{{{0},{1}}} is not a hyperbolic tiling type")]
    NotHyperbolicType(u32, u32),
    #[error("tiling {{{0},{1}}} not supported: layer construction requires p >= 4 and q >= 4")]
    UnsupportedTiling(u32, u32),
    #[error("bad group spec: {0}")]
    BadSpec(String),
    #[error("bad word: {0}")]
    BadWord(String),
}
