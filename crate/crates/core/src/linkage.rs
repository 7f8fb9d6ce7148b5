//! Agglomerative linkage baselines.
//!
//! Complete, average and Ward linkage run the nearest-neighbor chain over a
//! condensed dissimilarity matrix updated with Lance-Williams recurrences.
//! Ward works on squared Euclidean distances and reports
//! `sqrt(updated squared dissimilarity)` as merge height, the same convention
//! as SciPy and scikit-learn.

use std::fmt;
use std::str::FromStr;

use crate::cutweight::EdgeHeights;
use crate::dendro::{build_dendrogram, Dendrogram};
use crate::error::{Error, Result};
use crate::mst::exact_mst;
use crate::points::PointSet;
use crate::unionfind::UnionFind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinkageMethod {
    Single,
    Complete,
    Average,
    Ward,
}

impl LinkageMethod {
    pub const ALL: [LinkageMethod; 4] = [Self::Single, Self::Complete, Self::Average, Self::Ward];

    pub fn name(self) -> &'static str {
        match self {
            Self::Single => "single",
            Self::Complete => "complete",
            Self::Average => "average",
            Self::Ward => "ward",
        }
    }

    /// Dissimilarity between cluster `k` and the union of `i` and `j`.
    #[inline]
    fn update(self, dki: f64, dkj: f64, dij: f64, ni: f64, nj: f64, nk: f64) -> f64 {
        match self {
            Self::Single => dki.min(dkj),
            Self::Complete => dki.max(dkj),
            Self::Average => (ni * dki + nj * dkj) / (ni + nj),
            Self::Ward => ((ni + nk) * dki + (nj + nk) * dkj - nk * dij) / (ni + nj + nk),
        }
    }
}

impl fmt::Display for LinkageMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LinkageMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown linkage method '{s}'")))
    }
}

/// Single linkage from the exact MST: the subdominant ultrametric.
pub fn single_linkage(points: &PointSet) -> Result<Dendrogram> {
    let tree = exact_mst(points);
    build_dendrogram(&tree, &EdgeHeights::edge_weights(&tree))
}

struct Condensed {
    n: usize,
    values: Vec<f64>,
}

impl Condensed {
    fn new(points: &PointSet, squared: bool) -> Self {
        let n = points.len();
        let mut values = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                let d = points.dist(i, j);
                values.push(if squared { d * d } else { d });
            }
        }
        Self { n, values }
    }

    #[inline]
    fn index(&self, i: usize, j: usize) -> usize {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.n * a - a * (a + 1) / 2 + (b - a - 1)
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.index(i, j)]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: f64) {
        let idx = self.index(i, j);
        self.values[idx] = v;
    }
}

/// Agglomerative clustering with the nearest-neighbor chain.
pub fn agglomerate(points: &PointSet, method: LinkageMethod) -> Result<Dendrogram> {
    let n = points.len();
    if n == 1 {
        return Dendrogram::from_merges(1, &[]);
    }
    let ward = method == LinkageMethod::Ward;
    let mut dis = Condensed::new(points, ward);
    let mut size = vec![1usize; n];
    let mut active: Vec<usize> = (0..n).collect();
    let mut chain: Vec<usize> = Vec::with_capacity(n);
    // (slot a, slot b, dissimilarity), in the order the chain finds them
    let mut steps: Vec<(usize, usize, f64)> = Vec::with_capacity(n - 1);

    while steps.len() + 1 < n {
        if chain.is_empty() {
            chain.push(active[0]);
        }
        let (a, b) = loop {
            let top = *chain.last().expect("chain is non-empty");
            let prev = chain.len().checked_sub(2).map(|i| chain[i]);
            let mut best = prev;
            let mut best_d = prev.map_or(f64::INFINITY, |p| dis.get(top, p));
            for &x in &active {
                if x == top {
                    continue;
                }
                let d = dis.get(top, x);
                if d < best_d {
                    best_d = d;
                    best = Some(x);
                }
            }
            let next = best.expect("another active cluster exists");
            if Some(next) == prev {
                chain.pop();
                chain.pop();
                break (top, next);
            }
            chain.push(next);
        };

        let (keep, gone) = if a < b { (b, a) } else { (a, b) };
        let dij = dis.get(a, b);
        let (ni, nj) = (size[gone] as f64, size[keep] as f64);
        for &k in &active {
            if k == keep || k == gone {
                continue;
            }
            let updated = method.update(dis.get(k, gone), dis.get(k, keep), dij, ni, nj, size[k] as f64);
            dis.set(k, keep, updated);
        }
        size[keep] += size[gone];
        let pos = active.binary_search(&gone).expect("merged slot is active");
        active.remove(pos);
        steps.push((gone, keep, dij));
    }

    if ward {
        for s in &mut steps {
            s.2 = s.2.max(0.0).sqrt();
        }
    }
    steps_to_dendrogram(n, &steps)
}

/// Orders chain merges by height and relabels slots as dendrogram node ids.
fn steps_to_dendrogram(n: usize, steps: &[(usize, usize, f64)]) -> Result<Dendrogram> {
    // Rounding in the recurrences can leave a merge a hair below the merge
    // that formed one of its inputs; lift it so children sort first.
    let mut last_step: Vec<Option<usize>> = vec![None; n];
    let mut effective = Vec::with_capacity(steps.len());
    for (i, &(a, b, h)) in steps.iter().enumerate() {
        let mut e = h;
        for slot in [a, b] {
            if let Some(j) = last_step[slot] {
                e = e.max(effective[j]);
            }
        }
        effective.push(e);
        last_step[a] = Some(i);
        last_step[b] = Some(i);
    }
    let mut order: Vec<usize> = (0..steps.len()).collect();
    order.sort_by(|&x, &y| effective[x].total_cmp(&effective[y]).then(x.cmp(&y)));

    let mut uf = UnionFind::new(n);
    let mut node_of: Vec<usize> = (0..n).collect();
    let mut triples = Vec::with_capacity(steps.len());
    for i in order {
        let (a, b, _) = steps[i];
        let ra = uf.find_unchecked(a);
        let rb = uf.find_unchecked(b);
        let (l, r) = (node_of[ra], node_of[rb]);
        let (l, r) = if l < r { (l, r) } else { (r, l) };
        triples.push((l, r, effective[i]));
        let root = uf.union_unchecked(ra, rb);
        node_of[root] = n + triples.len() - 1;
    }
    Dendrogram::from_merges(n, &triples)
}
