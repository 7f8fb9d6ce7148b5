//! End-to-end fitting algorithms.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use crate::cutweight::{approximate_cut_weights, exact_cut_weights, EdgeHeights};
use crate::dendro::{build_dendrogram, Dendrogram};
use crate::error::{Error, Result};
use crate::linkage::{agglomerate, LinkageMethod};
use crate::mst::{connect_components, exact_mst, kruskal_forest, SpanningTree};
use crate::points::PointSet;
use crate::spanner::{build_spanner, SpannerConfig, SpannerGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    /// Spanner tree with estimated cut weights.
    Approx,
    /// Exact MST with estimated cut weights.
    Acc,
    /// Exact MST with exact cut weights; optimal.
    Exact,
    Single,
    Complete,
    Average,
    Ward,
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Self::Approx,
        Self::Acc,
        Self::Exact,
        Self::Single,
        Self::Complete,
        Self::Average,
        Self::Ward,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Approx => "approx",
            Self::Acc => "acc",
            Self::Exact => "exact",
            Self::Single => "single",
            Self::Complete => "complete",
            Self::Average => "average",
            Self::Ward => "ward",
        }
    }

    /// Row label used in comparison tables.
    pub fn display_name(self) -> &'static str {
        match self {
            Self::Approx => "ApproxULT",
            Self::Acc => "ApproxAccULT",
            Self::Exact => "Farach et al.",
            Self::Single => "Single",
            Self::Complete => "Complete",
            Self::Average => "Average",
            Self::Ward => "Ward",
        }
    }

    pub fn is_randomized(self) -> bool {
        self == Self::Approx
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown algorithm '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageTiming {
    pub stage: &'static str,
    pub ms: f64,
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub dendrogram: Dendrogram,
    pub algorithm: Algorithm,
    pub gamma: Option<f64>,
    pub seed: Option<u64>,
    pub timings: Vec<StageTiming>,
    pub spanner_edges: Option<usize>,
    /// The spanning tree the cartesian tree was built on, when there is one.
    pub tree: Option<SpanningTree>,
}

impl FitResult {
    pub fn total_ms(&self) -> f64 {
        self.timings.iter().map(|t| t.ms).sum()
    }
}

struct Stopwatch {
    timings: Vec<StageTiming>,
}

impl Stopwatch {
    fn new() -> Self {
        Self { timings: Vec::new() }
    }

    fn time<T>(&mut self, stage: &'static str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.timings.push(StageTiming {
            stage,
            ms: start.elapsed().as_secs_f64() * 1e3,
        });
        out
    }
}

/// Runs `algorithm` on a set of distinct points.
pub fn fit(points: &PointSet, algorithm: Algorithm, config: &SpannerConfig) -> Result<FitResult> {
    points.ensure_distinct()?;
    match algorithm {
        Algorithm::Approx => approx_ult(points, config),
        Algorithm::Acc => approx_acc_ult(points),
        Algorithm::Exact => farach_exact(points),
        Algorithm::Single => {
            let mut clock = Stopwatch::new();
            let tree = clock.time("mst", || exact_mst(points));
            let dendrogram = clock.time("cartesian", || {
                build_dendrogram(&tree, &EdgeHeights::edge_weights(&tree))
            })?;
            Ok(FitResult {
                dendrogram,
                algorithm,
                gamma: None,
                seed: None,
                timings: clock.timings,
                spanner_edges: None,
                tree: Some(tree),
            })
        }
        Algorithm::Complete | Algorithm::Average | Algorithm::Ward => {
            let method = match algorithm {
                Algorithm::Complete => LinkageMethod::Complete,
                Algorithm::Average => LinkageMethod::Average,
                _ => LinkageMethod::Ward,
            };
            let mut clock = Stopwatch::new();
            let dendrogram = clock.time("linkage", || agglomerate(points, method))?;
            Ok(FitResult {
                dendrogram,
                algorithm,
                gamma: None,
                seed: None,
                timings: clock.timings,
                spanner_edges: None,
                tree: None,
            })
        }
    }
}

/// Spanner, Kruskal on the spanner, estimated cut weights, cartesian tree.
pub fn approx_ult(points: &PointSet, config: &SpannerConfig) -> Result<FitResult> {
    let mut clock = Stopwatch::new();
    let graph = clock.time("spanner", || build_spanner(points, config))?;
    let mut result = approx_ult_on_graph(points, &graph, clock)?;
    result.gamma = Some(config.gamma);
    result.seed = Some(config.seed);
    Ok(result)
}

/// The approximate pipeline on a caller-supplied graph.
pub fn approx_ult_with_graph(points: &PointSet, graph: &SpannerGraph) -> Result<FitResult> {
    approx_ult_on_graph(points, graph, Stopwatch::new())
}

fn approx_ult_on_graph(points: &PointSet, graph: &SpannerGraph, mut clock: Stopwatch) -> Result<FitResult> {
    let tree = clock.time("mst", || -> Result<SpanningTree> {
        let forest = kruskal_forest(points.len(), &graph.edges)?;
        Ok(connect_components(points, forest))
    })?;
    let heights = clock.time("cutweight", || approximate_cut_weights(points, &tree));
    let dendrogram = clock.time("cartesian", || build_dendrogram(&tree, &heights))?;
    Ok(FitResult {
        dendrogram,
        algorithm: Algorithm::Approx,
        gamma: None,
        seed: None,
        timings: clock.timings,
        spanner_edges: Some(graph.len()),
        tree: Some(tree),
    })
}

/// Exact MST with estimated cut weights.
pub fn approx_acc_ult(points: &PointSet) -> Result<FitResult> {
    mst_pipeline(points, Algorithm::Acc, approximate_cut_weights)
}

/// Exact MST with exact cut weights; the optimal ultrametric.
pub fn farach_exact(points: &PointSet) -> Result<FitResult> {
    mst_pipeline(points, Algorithm::Exact, exact_cut_weights)
}

fn mst_pipeline(
    points: &PointSet,
    algorithm: Algorithm,
    cut_weights: fn(&PointSet, &SpanningTree) -> EdgeHeights,
) -> Result<FitResult> {
    let mut clock = Stopwatch::new();
    let tree = clock.time("mst", || exact_mst(points));
    let heights = clock.time("cutweight", || cut_weights(points, &tree));
    let dendrogram = clock.time("cartesian", || build_dendrogram(&tree, &heights))?;
    Ok(FitResult {
        dendrogram,
        algorithm,
        gamma: None,
        seed: None,
        timings: clock.timings,
        spanner_edges: None,
        tree: Some(tree),
    })
}

/// Exhaustive search for the optimal distortion on tiny inputs.
pub mod oracle {
    use std::collections::HashMap;

    use super::*;

    pub const MAX_POINTS: usize = 7;

    /// Per-topology summary of a subtree: minimal feasible root height and the
    /// worst `height / distance` ratio among pairs separated inside it.
    #[derive(Debug, Clone, Copy)]
    struct Summary {
        height: f64,
        alpha: f64,
    }

    /// Minimum over every rooted binary topology on the points of the largest
    /// `Delta / w`, where each topology gets its pointwise-smallest dominating
    /// heights.
    pub fn brute_force_opt_alpha(points: &PointSet) -> Result<f64> {
        let n = points.len();
        if n > MAX_POINTS {
            return Err(Error::TooManyPoints { n, max: MAX_POINTS });
        }
        if n < 2 {
            return Ok(1.0);
        }
        let mut memo = HashMap::new();
        let all = topologies(points, (1u32 << n) - 1, &mut memo);
        Ok(all.iter().map(|s| s.alpha).fold(f64::INFINITY, f64::min))
    }

    /// Number of topologies the oracle enumerates: `(2n - 3)!!`.
    pub fn topology_count(points: &PointSet) -> usize {
        let mut memo = HashMap::new();
        topologies(points, (1u32 << points.len()) - 1, &mut memo).len()
    }

    fn topologies(points: &PointSet, mask: u32, memo: &mut HashMap<u32, Vec<Summary>>) -> Vec<Summary> {
        if mask.count_ones() == 1 {
            return vec![Summary {
                height: 0.0,
                alpha: 1.0,
            }];
        }
        if let Some(found) = memo.get(&mask) {
            return found.clone();
        }
        let low = mask & mask.wrapping_neg();
        let rest = mask ^ low;
        let mut out = Vec::new();
        // left side always holds the lowest member, so each split is seen once
        let mut sub = rest;
        loop {
            let left = low | sub;
            let right = mask ^ left;
            if right != 0 {
                let (far, near) = cross_extremes(points, left, right);
                let ls = topologies(points, left, memo);
                let rs = topologies(points, right, memo);
                for l in &ls {
                    for r in &rs {
                        let height = far.max(l.height).max(r.height);
                        let alpha = l.alpha.max(r.alpha).max(height / near);
                        out.push(Summary { height, alpha });
                    }
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
        memo.insert(mask, out.clone());
        out
    }

    /// Largest and smallest distance between the two sides.
    fn cross_extremes(points: &PointSet, a: u32, b: u32) -> (f64, f64) {
        let members = |m: u32| (0..32).filter(move |i| m & (1 << i) != 0).map(|i| i as usize);
        let mut far = 0.0f64;
        let mut near = f64::INFINITY;
        for x in members(a) {
            for y in members(b) {
                let d = points.dist(x, y);
                far = far.max(d);
                near = near.min(d);
            }
        }
        (far, near)
    }
}

pub use oracle::brute_force_opt_alpha;
