//! Distortion measurement and timing harness.

use rayon::prelude::*;
use serde::Serialize;

use crate::dendro::{check_same_size, normalize, Dendrogram};
use crate::error::{Error, Result};
use crate::pipeline::{fit, Algorithm};
use crate::points::PointSet;
use crate::spanner::SpannerConfig;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistortionReport {
    pub max: f64,
    pub min: f64,
    pub mean: f64,
    /// Pair attaining `max`, smallest index pair on ties. `None` when n < 2.
    pub argmax: Option<(usize, usize)>,
    pub n: usize,
    pub pairs: u64,
    pub algorithm: Option<Algorithm>,
    /// Factor applied to the ultrametric before the scan (1 when not normalizing).
    pub scale: f64,
}

impl DistortionReport {
    pub fn with_algorithm(mut self, algorithm: Algorithm) -> Self {
        self.algorithm = Some(algorithm);
        self
    }
}

#[derive(Debug, Clone, Copy)]
struct Block {
    max: f64,
    argmax: (usize, usize),
    min: f64,
    sum: f64,
    pairs: u64,
}

impl Block {
    fn better_max(&self, other: &Self) -> bool {
        other.max > self.max || (other.max == self.max && other.argmax < self.argmax)
    }
}

/// Exact `Delta(u, v) / |u - v|` over all pairs. Each merge contributes the
/// block of pairs it separates, all at that merge's height.
pub fn distortion(points: &PointSet, dendro: &Dendrogram, normalize_first: bool) -> Result<DistortionReport> {
    check_same_size(dendro, points)?;
    let n = points.len();
    let (scaled, scale) = if normalize_first {
        normalize(dendro, points)?
    } else {
        (dendro.clone(), 1.0)
    };
    if n < 2 {
        return Ok(DistortionReport {
            max: 1.0,
            min: 1.0,
            mean: 1.0,
            argmax: None,
            n,
            pairs: 0,
            algorithm: None,
            scale,
        });
    }
    let order = scaled.leaf_order();
    let ranges = scaled.merge_ranges();
    let blocks: Vec<Block> = scaled
        .merges()
        .par_iter()
        .zip(ranges.par_iter())
        .map(|(m, &(start, split, end))| {
            let mut b = Block {
                max: f64::NEG_INFINITY,
                argmax: (usize::MAX, usize::MAX),
                min: f64::INFINITY,
                sum: 0.0,
                pairs: 0,
            };
            for &x in &order[start..split] {
                for &y in &order[split..end] {
                    let w = points.dist(x, y);
                    if w == 0.0 {
                        return Err(Error::ZeroDistance(x.min(y), x.max(y)));
                    }
                    let ratio = m.height / w;
                    let pair = (x.min(y), x.max(y));
                    if ratio > b.max || (ratio == b.max && pair < b.argmax) {
                        b.max = ratio;
                        b.argmax = pair;
                    }
                    b.min = b.min.min(ratio);
                    b.sum += ratio;
                    b.pairs += 1;
                }
            }
            Ok(b)
        })
        .collect::<Result<_>>()?;

    // sequential fold in merge order keeps the mean independent of threading
    let mut total = blocks[0];
    for b in &blocks[1..] {
        if total.better_max(b) {
            total.max = b.max;
            total.argmax = b.argmax;
        }
        total.min = total.min.min(b.min);
        total.sum += b.sum;
        total.pairs += b.pairs;
    }
    Ok(DistortionReport {
        max: total.max,
        min: total.min,
        mean: total.sum / total.pairs as f64,
        argmax: Some(total.argmax),
        n,
        pairs: total.pairs,
        algorithm: None,
        scale,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub algorithm: Algorithm,
    pub n: usize,
    pub repeats: usize,
    pub mean_ms: f64,
    pub stage_ms: Vec<(String, f64)>,
}

/// Mean wall time per algorithm over `repeats` runs; repeat `i` of the
/// randomized pipeline uses seed `config.seed + i`.
pub fn benchmark(
    points: &PointSet,
    algorithms: &[Algorithm],
    repeats: usize,
    config: &SpannerConfig,
) -> Result<Vec<BenchRow>> {
    if repeats == 0 {
        return Err(Error::InvalidConfig("repeats must be at least 1".into()));
    }
    let mut rows = Vec::with_capacity(algorithms.len());
    for &algorithm in algorithms {
        let mut total = 0.0;
        let mut stages: Vec<(String, f64)> = Vec::new();
        for i in 0..repeats {
            let cfg = SpannerConfig {
                seed: config.seed.wrapping_add(i as u64),
                ..config.clone()
            };
            let result = fit(points, algorithm, &cfg)?;
            total += result.total_ms();
            for t in &result.timings {
                match stages.iter_mut().find(|(s, _)| s == t.stage) {
                    Some((_, ms)) => *ms += t.ms,
                    None => stages.push((t.stage.to_string(), t.ms)),
                }
            }
        }
        let k = repeats as f64;
        rows.push(BenchRow {
            algorithm,
            n: points.len(),
            repeats,
            mean_ms: total / k,
            stage_ms: stages.into_iter().map(|(s, ms)| (s, ms / k)).collect(),
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub algorithm: Algorithm,
    pub label: &'static str,
    pub max_distortion: f64,
    pub scale: f64,
    pub ms: f64,
}

/// Runs each algorithm once and reports its normalized max distortion.
pub fn compare(points: &PointSet, algorithms: &[Algorithm], config: &SpannerConfig) -> Result<Vec<CompareRow>> {
    algorithms
        .iter()
        .map(|&algorithm| {
            let result = fit(points, algorithm, config)?;
            let report = distortion(points, &result.dendrogram, true)?;
            Ok(CompareRow {
                algorithm,
                label: algorithm.display_name(),
                max_distortion: report.max,
                scale: report.scale,
                ms: result.total_ms(),
            })
        })
        .collect()
}

/// Plain-text table with one row per algorithm.
pub fn format_compare_table(rows: &[CompareRow]) -> String {
    let mut out = format!(
        "{:<16} {:>14} {:>12} {:>12}\n",
        "algorithm", "max_distortion", "scale", "time_ms"
    );
    for r in rows {
        out.push_str(&format!(
            "{:<16} {:>14.4} {:>12.6} {:>12.3}\n",
            r.label, r.max_distortion, r.scale, r.ms
        ));
    }
    out
}
