//! Point sets, weighted edges and duplicate collapsing.

use std::cmp::Ordering;
use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// `n` points in `d`-dimensional Euclidean space, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    n: usize,
    d: usize,
    coords: Vec<f64>,
}

impl PointSet {
    pub fn new(n: usize, d: usize, coords: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty);
        }
        if d == 0 {
            return Err(Error::ZeroDimension);
        }
        if coords.len() != n * d {
            return Err(Error::ShapeMismatch {
                n,
                d,
                expected: n * d,
                got: coords.len(),
            });
        }
        if let Some(pos) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite {
                point: pos / d,
                column: pos % d,
            });
        }
        Ok(Self { n, d, coords })
    }

    /// Builds a point set from equally sized rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let d = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut coords = Vec::with_capacity(n * d);
        for row in rows {
            let row = row.as_ref();
            if row.len() != d {
                return Err(Error::ShapeMismatch {
                    n,
                    d,
                    expected: n * d,
                    got: coords.len() + row.len(),
                });
            }
            coords.extend_from_slice(row);
        }
        Self::new(n, d, coords)
    }

    /// `n` points drawn uniformly from the unit cube `[0,1]^d`.
    pub fn uniform_cube(n: usize, d: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coords = (0..n * d).map(|_| rng.random::<f64>()).collect();
        Self::new(n, d, coords)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    /// Euclidean distance between points `i` and `j`.
    pub fn distance(&self, i: usize, j: usize) -> Result<f64> {
        for idx in [i, j] {
            if idx >= self.n {
                return Err(Error::IndexOutOfRange {
                    index: idx,
                    len: self.n,
                });
            }
        }
        Ok(self.dist(i, j))
    }

    /// Unchecked variant of [`PointSet::distance`]; panics on a bad index.
    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        euclidean(self.point(i), self.point(j))
    }

    /// Copy of the points listed in `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let mut coords = Vec::with_capacity(indices.len() * self.d);
        for &i in indices {
            if i >= self.n {
                return Err(Error::IndexOutOfRange { index: i, len: self.n });
            }
            coords.extend_from_slice(self.point(i));
        }
        Self::new(indices.len(), self.d, coords)
    }

    /// Errors with the first pair of identical points, if any.
    pub fn ensure_distinct(&self) -> Result<()> {
        let mut seen: HashMap<Vec<u64>, usize> = HashMap::with_capacity(self.n);
        for i in 0..self.n {
            if let Some(&first) = seen.get(&point_key(self.point(i))) {
                return Err(Error::DuplicatePoints { first, second: i });
            }
            seen.insert(point_key(self.point(i)), i);
        }
        Ok(())
    }

    /// Collapses exact duplicates, keeping first occurrences in order.
    pub fn dedupe(&self) -> (PointSet, Multiplicity) {
        let mut seen: HashMap<Vec<u64>, usize> = HashMap::with_capacity(self.n);
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut coords = Vec::new();
        for i in 0..self.n {
            let key = point_key(self.point(i));
            match seen.get(&key) {
                Some(&slot) => groups[slot].push(i),
                None => {
                    seen.insert(key, groups.len());
                    groups.push(vec![i]);
                    coords.extend_from_slice(self.point(i));
                }
            }
        }
        let points = PointSet {
            n: groups.len(),
            d: self.d,
            coords,
        };
        let multiplicity = Multiplicity {
            original_len: self.n,
            groups,
        };
        (points, multiplicity)
    }
}

#[inline]
pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    lanes(a, b, |x, y| {
        let t = x - y;
        t * t
    })
    .sqrt()
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    lanes(a, b, |x, y| x * y)
}

/// Sum of `f` over paired coordinates in four independent lanes, which lets
/// the compiler vectorize. Deterministic for a given length.
#[inline(always)]
fn lanes(a: &[f64], b: &[f64], f: impl Fn(f64, f64) -> f64) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let (mut s0, mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0, 0.0);
    let mut xa = a.chunks_exact(4);
    let mut xb = b.chunks_exact(4);
    for (x, y) in (&mut xa).zip(&mut xb) {
        s0 += f(x[0], y[0]);
        s1 += f(x[1], y[1]);
        s2 += f(x[2], y[2]);
        s3 += f(x[3], y[3]);
    }
    let mut tail = 0.0;
    for (&x, &y) in xa.remainder().iter().zip(xb.remainder()) {
        tail += f(x, y);
    }
    (s0 + s1) + (s2 + s3) + tail
}

fn point_key(p: &[f64]) -> Vec<u64> {
    // -0.0 and 0.0 describe the same location
    p.iter().map(|&c| if c == 0.0 { 0 } else { c.to_bits() }).collect()
}

/// For every deduplicated point, the original indices it stands for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Multiplicity {
    original_len: usize,
    groups: Vec<Vec<usize>>,
}

impl Multiplicity {
    pub fn identity(n: usize) -> Self {
        Self {
            original_len: n,
            groups: (0..n).map(|i| vec![i]).collect(),
        }
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn original_len(&self) -> usize {
        self.original_len
    }

    pub fn has_duplicates(&self) -> bool {
        self.groups.len() != self.original_len
    }
}

/// An undirected edge normalized so that `u < v`, carrying the true distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedEdge {
    pub u: usize,
    pub v: usize,
    pub w: f64,
}

impl WeightedEdge {
    pub fn new(a: usize, b: usize, w: f64) -> Self {
        debug_assert!(a != b, "self-loop");
        debug_assert!(w >= 0.0);
        let (u, v) = if a < b { (a, b) } else { (b, a) };
        Self { u, v, w }
    }

    /// Edge between two points of `points`, weighted by their distance.
    pub fn between(points: &PointSet, a: usize, b: usize) -> Self {
        Self::new(a, b, points.dist(a, b))
    }

    /// Total order used for every tie-break: (weight, min index, max index).
    pub fn order(&self, other: &Self) -> Ordering {
        self.w
            .total_cmp(&other.w)
            .then(self.u.cmp(&other.u))
            .then(self.v.cmp(&other.v))
    }
}

/// Sorts edges ascending by [`WeightedEdge::order`].
pub fn sort_edges(edges: &mut [WeightedEdge]) {
    if edges.len() < RADIX_THRESHOLD {
        edges.sort_unstable_by(|a, b| a.order(b));
    } else {
        radix_sort_edges(edges);
    }
}

const RADIX_THRESHOLD: usize = 1 << 12;

/// Unsigned key whose order matches `f64::total_cmp`.
#[inline]
fn total_order_key(w: f64) -> u64 {
    let bits = w.to_bits();
    if bits >> 63 == 1 {
        !bits
    } else {
        bits | (1 << 63)
    }
}

/// Stable LSD radix sort on the weight key in 16-bit digits over input
/// already ordered by `(u, v)`, which supplies the tie-break.
fn radix_sort_edges(edges: &mut [WeightedEdge]) {
    assert!(edges.len() <= u32::MAX as usize);
    if !edges.windows(2).all(|p| (p[0].u, p[0].v) <= (p[1].u, p[1].v)) {
        edges.sort_unstable_by_key(|e| (e.u, e.v));
    }
    let mut keyed: Vec<(u64, u32)> = edges
        .iter()
        .enumerate()
        .map(|(i, e)| (total_order_key(e.w), i as u32))
        .collect();
    let mut scratch = keyed.clone();
    let mut counts = vec![0usize; 1 << 16];
    for shift in [0, 16, 32, 48] {
        let digit = |k: u64| ((k >> shift) & 0xffff) as usize;
        counts.iter_mut().for_each(|c| *c = 0);
        for &(k, _) in &keyed {
            counts[digit(k)] += 1;
        }
        if counts[digit(keyed[0].0)] == keyed.len() {
            continue;
        }
        let mut sum = 0;
        for c in counts.iter_mut() {
            let here = *c;
            *c = sum;
            sum += here;
        }
        for &item in &keyed {
            let slot = &mut counts[digit(item.0)];
            scratch[*slot] = item;
            *slot += 1;
        }
        std::mem::swap(&mut keyed, &mut scratch);
    }
    let sorted: Vec<WeightedEdge> = keyed.iter().map(|&(_, i)| edges[i as usize]).collect();
    edges.copy_from_slice(&sorted);
}
