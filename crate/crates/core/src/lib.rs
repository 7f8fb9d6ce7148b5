//! Ultrametric fitting for Euclidean point sets.
//!
//! The fast path builds a hashing spanner, takes its minimum spanning tree,
//! estimates cut weights within a factor of five, and reads the ultrametric
//! off the cartesian tree of those weights. The exact cut-weight algorithm
//! and the classic linkage methods are provided as baselines, together with
//! a distortion harness.

pub mod cli;
pub mod cutweight;
pub mod dendro;
pub mod error;
pub mod eval;
pub mod linkage;
pub mod mst;
pub mod pipeline;
pub mod points;
pub mod spanner;
pub mod unionfind;

pub use cutweight::EdgeHeights;
pub use dendro::Dendrogram;
pub use error::{Error, Result};
pub use eval::DistortionReport;
pub use mst::SpanningTree;
pub use pipeline::{Algorithm, FitResult};
pub use points::{Multiplicity, PointSet, WeightedEdge};
pub use spanner::{SpannerConfig, SpannerGraph};
