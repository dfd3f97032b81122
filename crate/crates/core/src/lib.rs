//! Frame-dependent linking numbers in L = ℝ² × S¹, the frame-indexed
//! compactifications of L to S³, decorated-graph chain systems and the
//! framed-knot correspondence.

pub mod error;
pub mod rational;
pub mod rng;
pub mod geometry;
pub mod homology;
pub mod curve;
pub mod linking;
pub mod compactification;
pub mod graph;
pub mod chains;
pub mod knot;
pub mod cli;

pub use error::{Error, Result};
pub use homology::{FrameInt, LatticeClass, UnimodularMatrix};
pub use curve::PLCurve;
pub use graph::{DecoratedGraph, TData};
