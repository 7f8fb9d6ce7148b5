//! Multi-scale hashing spanner.
//!
//! Every scale `r` hashes the points with `k` concatenated, randomly offset,
//! quantized Gaussian projections of cell width `gamma * r` (a coordinate `x`
//! lands in cell `round(x / (gamma * r) + offset)`). Points sharing a
//! bucket are joined to the bucket's lowest-index member. The coarsest scale is
//! a single bucket, which keeps the graph connected for any seed.
//!
//! Randomness comes from ChaCha8 seeded with `SpannerConfig::seed`; repetition
//! `t` reads stream `t`, drawing its `k * d` direction coordinates followed by
//! `k` offsets per scale. Output does not depend on scheduling.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap};
use std::hash::{BuildHasherDefault, Hasher};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::points::{dot, PointSet, WeightedEdge};
use crate::unionfind::UnionFind;

pub const DEFAULT_MAX_SCALES: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct SpannerConfig {
    /// Target stretch. Drives cell width and the default projection count.
    pub gamma: f64,
    pub seed: u64,
    /// Independent hash repetitions per scale; `None` picks `ceil(log2(n)^2)`.
    pub reps: Option<usize>,
    /// Concatenated projections per repetition; `None` picks `ceil(log2(n) / gamma)`.
    pub projections: Option<usize>,
    pub max_scales: usize,
}

impl Default for SpannerConfig {
    fn default() -> Self {
        Self {
            gamma: 2.0,
            seed: 0,
            reps: None,
            projections: None,
            max_scales: DEFAULT_MAX_SCALES,
        }
    }
}

impl SpannerConfig {
    pub fn with_gamma(gamma: f64, seed: u64) -> Self {
        Self {
            gamma,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma.is_finite() && self.gamma >= 1.0) {
            return Err(Error::InvalidConfig(format!("gamma must be >= 1, got {}", self.gamma)));
        }
        if self.reps == Some(0) {
            return Err(Error::InvalidConfig("reps must be positive".into()));
        }
        if self.projections == Some(0) {
            return Err(Error::InvalidConfig("projections must be positive".into()));
        }
        if self.max_scales == 0 {
            return Err(Error::InvalidConfig("max_scales must be positive".into()));
        }
        Ok(())
    }

    pub fn resolved_reps(&self, n: usize) -> usize {
        self.reps.unwrap_or_else(|| {
            let lg = log2(n);
            ((lg * lg).ceil() as usize).max(1)
        })
    }

    pub fn resolved_projections(&self, n: usize) -> usize {
        self.projections
            .unwrap_or_else(|| ((log2(n) / self.gamma).ceil() as usize).max(1))
    }
}

fn log2(n: usize) -> f64 {
    (n.max(1) as f64).log2()
}

/// Sparse graph over a point set; edges sorted by `(u, v)` with `u < v`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpannerGraph {
    pub n: usize,
    pub edges: Vec<WeightedEdge>,
}

impl SpannerGraph {
    pub fn complete(points: &PointSet) -> Self {
        let n = points.len();
        let mut edges = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for u in 0..n {
            for v in u + 1..n {
                edges.push(WeightedEdge::between(points, u, v));
            }
        }
        Self { n, edges }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

/// Radii `r_0 > r_1 > ...` halving from the bounding-box diagonal.
pub fn estimate_scales(points: &PointSet, config: &SpannerConfig) -> Vec<f64> {
    if points.len() < 2 {
        return Vec::new();
    }
    let d = points.dim();
    let mut lo = points.point(0).to_vec();
    let mut hi = lo.clone();
    for i in 1..points.len() {
        for (j, &c) in points.point(i).iter().enumerate() {
            lo[j] = lo[j].min(c);
            hi[j] = hi[j].max(c);
        }
    }
    let diag = (0..d).map(|j| (hi[j] - lo[j]).powi(2)).sum::<f64>().sqrt();
    if diag == 0.0 {
        return Vec::new();
    }
    let floor = diag / 2f64.powi(config.max_scales as i32);
    (0..config.max_scales)
        .map(|i| diag / 2f64.powi(i as i32))
        .take_while(|&r| r >= floor)
        .collect()
}

pub fn build_spanner(points: &PointSet, config: &SpannerConfig) -> Result<SpannerGraph> {
    config.validate()?;
    let n = points.len();
    let scales = estimate_scales(points, config);
    if n < 2 || scales.is_empty() {
        return Ok(SpannerGraph { n, edges: Vec::new() });
    }
    let reps = config.resolved_reps(n);
    let k = config.resolved_projections(n);

    let mut pairs: Vec<u64> = (1..n).map(|v| pack(0, v)).collect();
    let per_rep: Vec<Vec<u64>> = (0..reps)
        .into_par_iter()
        .map(|rep| hash_repetition(points, config, &scales, k, rep))
        .collect();
    for chunk in per_rep {
        pairs.extend(chunk);
    }
    let pairs = sort_dedup_pairs(pairs, n);

    let edges = pairs
        .into_iter()
        .map(|p| {
            let (u, v) = unpack(p);
            WeightedEdge::between(points, u, v)
        })
        .collect();
    Ok(SpannerGraph { n, edges })
}

/// Star edges produced by one repetition over all scales finer than the root.
fn hash_repetition(points: &PointSet, config: &SpannerConfig, scales: &[f64], k: usize, rep: usize) -> Vec<u64> {
    let n = points.len();
    let d = points.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(rep as u64);
    let directions: Vec<f64> = (0..k * d).map(|_| rng.sample(StandardNormal)).collect();
    let offsets: Vec<f64> = (0..k * config.max_scales).map(|_| rng.random::<f64>()).collect();

    let mut projected = vec![0.0; n * k];
    for (i, row) in projected.chunks_exact_mut(k).enumerate() {
        let p = points.point(i);
        for (slot, a) in row.iter_mut().zip(directions.chunks_exact(d)) {
            *slot = dot(a, p);
        }
    }

    let max_abs = projected.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut out = Vec::new();
    let mut buckets: Buckets = HashMap::with_capacity_and_hasher(n, Default::default());
    for (s, &radius) in scales.iter().enumerate().skip(1) {
        let inv_width = 1.0 / (config.gamma * radius);
        let scale = Scale {
            salt: mix(s as u64),
            inv_width,
            offsets: &offsets[s * k..(s + 1) * k],
        };
        buckets.clear();
        let before = out.len();
        // offsets lie in [0, 1)
        if max_abs * inv_width + 2.0 < EXACT_LIMIT {
            scale.assign(&projected, k, &mut buckets, &mut out, |y| (y + ROUNDER).to_bits());
        } else {
            scale.assign(&projected, k, &mut buckets, &mut out, |y| {
                (y.round_ties_even() + 0.0).to_bits()
            });
        }
        // all singletons: finer cells are not going to collide either
        if out.len() == before {
            break;
        }
    }
    out
}

type Buckets = HashMap<u64, u32, BuildHasherDefault<PremixedHasher>>;

/// Below this magnitude `y + ROUNDER` is exactly `ROUNDER + round(y)`, so its
/// bits identify the rounded cell without a rounding instruction (which
/// baseline x86-64 lacks).
const EXACT_LIMIT: f64 = 2_251_799_813_685_248.0;
const ROUNDER: f64 = 6_755_399_441_055_744.0;

struct Scale<'a> {
    salt: u64,
    inv_width: f64,
    offsets: &'a [f64],
}

impl Scale<'_> {
    #[inline(always)]
    fn assign(
        &self,
        projected: &[f64],
        k: usize,
        buckets: &mut Buckets,
        out: &mut Vec<u64>,
        cell: impl Fn(f64) -> u64,
    ) {
        for (i, row) in projected.chunks_exact(k).enumerate() {
            let mut key = self.salt;
            for (&x, &o) in row.iter().zip(self.offsets) {
                // bijective in the cell for a fixed prefix
                key = (key ^ cell(x * self.inv_width + o)).wrapping_mul(0x9e37_79b9_7f4a_7c15);
                key ^= key >> 29;
            }
            let key = mix(key);
            let center = *buckets.entry(key).or_insert(i as u32) as usize;
            if center != i {
                out.push(pack(center, i));
            }
        }
    }
}

/// Sorts packed `(u, v)` pairs with `u, v < n` and drops repeats. Dense
/// enough candidate sets go through an `n x n` bitset scanned in order;
/// otherwise two stable counting passes (by `v`, then by `u`).
fn sort_dedup_pairs(pairs: Vec<u64>, n: usize) -> Vec<u64> {
    let bitset_bytes = (n as u128 * n as u128) / 8;
    if bitset_bytes <= 8 * pairs.len() as u128 {
        return bitset_dedup(&pairs, n);
    }
    let mut scratch = vec![0u64; pairs.len()];
    let mut pairs = pairs;
    let mut counts = vec![0usize; n + 1];
    for digit in [|p: u64| (p & 0xffff_ffff) as usize, |p: u64| (p >> 32) as usize] {
        counts.iter_mut().for_each(|c| *c = 0);
        for &p in &pairs {
            counts[digit(p) + 1] += 1;
        }
        for i in 1..=n {
            counts[i] += counts[i - 1];
        }
        for &p in &pairs {
            let slot = &mut counts[digit(p)];
            scratch[*slot] = p;
            *slot += 1;
        }
        std::mem::swap(&mut pairs, &mut scratch);
    }
    pairs.dedup();
    pairs
}

fn bitset_dedup(pairs: &[u64], n: usize) -> Vec<u64> {
    let mut bits = vec![0u64; (n * n).div_ceil(64)];
    for &p in pairs {
        let (u, v) = unpack(p);
        let at = u * n + v;
        bits[at / 64] |= 1 << (at % 64);
    }
    let mut out = Vec::new();
    for (w, &word) in bits.iter().enumerate() {
        let mut word = word;
        while word != 0 {
            let at = w * 64 + word.trailing_zeros() as usize;
            out.push(pack(at / n, at % n));
            word &= word - 1;
        }
    }
    out
}

#[inline]
fn pack(u: usize, v: usize) -> u64 {
    ((u as u64) << 32) | v as u64
}

#[inline]
fn unpack(p: u64) -> (usize, usize) {
    ((p >> 32) as usize, (p & 0xffff_ffff) as usize)
}

#[inline]
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Bucket keys are already mixed; hashing them again is wasted work.
#[derive(Default)]
struct PremixedHasher(u64);

impl Hasher for PremixedHasher {
    fn finish(&self) -> u64 {
        self.0
    }
    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 = (self.0 << 8) | b as u64;
        }
    }
    fn write_u64(&mut self, i: u64) {
        self.0 = i;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stretch {
    /// Largest observed `graph distance / Euclidean distance`; `+inf` when disconnected.
    pub max: f64,
    pub connected: bool,
    pub pairs: usize,
}

/// Measures spanner stretch over `sample` random pairs, or all pairs when
/// `sample` covers them.
pub fn verify_stretch(points: &PointSet, graph: &SpannerGraph, sample: usize, seed: u64) -> Stretch {
    let n = points.len();
    let mut uf = UnionFind::new(n);
    for e in &graph.edges {
        uf.union_unchecked(e.u, e.v);
    }
    if uf.components() > 1 {
        return Stretch {
            max: f64::INFINITY,
            connected: false,
            pairs: 0,
        };
    }
    let total = n * n.saturating_sub(1) / 2;
    let mut by_source: Vec<Vec<usize>> = vec![Vec::new(); n];
    if sample >= total {
        for (u, targets) in by_source.iter_mut().enumerate() {
            targets.extend(u + 1..n);
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..sample {
            let u = rng.random_range(0..n);
            let mut v = rng.random_range(0..n - 1);
            if v >= u {
                v += 1;
            }
            by_source[u].push(v);
        }
    }
    let pairs = by_source.iter().map(Vec::len).sum();
    let adjacency = Adjacency::new(n, &graph.edges);
    let max = by_source
        .par_iter()
        .enumerate()
        .filter(|(_, targets)| !targets.is_empty())
        .map(|(u, targets)| {
            let dist = adjacency.shortest_paths(u);
            targets
                .iter()
                .map(|&v| dist[v] / points.dist(u, v))
                .fold(1.0f64, f64::max)
        })
        .reduce(|| 1.0, f64::max);
    Stretch {
        max,
        connected: true,
        pairs,
    }
}

struct Adjacency {
    start: Vec<usize>,
    targets: Vec<(usize, f64)>,
}

impl Adjacency {
    fn new(n: usize, edges: &[WeightedEdge]) -> Self {
        let mut degree = vec![0usize; n + 1];
        for e in edges {
            degree[e.u + 1] += 1;
            degree[e.v + 1] += 1;
        }
        for i in 0..n {
            degree[i + 1] += degree[i];
        }
        let start = degree.clone();
        let mut fill = degree;
        let mut targets = vec![(0, 0.0); 2 * edges.len()];
        for e in edges {
            targets[fill[e.u]] = (e.v, e.w);
            fill[e.u] += 1;
            targets[fill[e.v]] = (e.u, e.w);
            fill[e.v] += 1;
        }
        Self { start, targets }
    }

    fn shortest_paths(&self, source: usize) -> Vec<f64> {
        let n = self.start.len() - 1;
        let mut dist = vec![f64::INFINITY; n];
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        heap.push(Reverse(Candidate(0.0, source)));
        while let Some(Reverse(Candidate(d, u))) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for &(v, w) in &self.targets[self.start[u]..self.start[u + 1]] {
                let nd = d + w;
                if nd < dist[v] {
                    dist[v] = nd;
                    heap.push(Reverse(Candidate(nd, v)));
                }
            }
        }
        dist
    }
}

#[derive(PartialEq)]
struct Candidate(f64, usize);

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}
