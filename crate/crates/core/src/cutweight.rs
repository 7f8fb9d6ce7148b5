//! Cut weights of spanning-tree edges.
//!
//! Tree edges are replayed in ascending order; the edge that first joins
//! clusters `C` and `D` is charged for the pairs of `C x D`. The exact variant
//! scans all those pairs. The estimate keeps a representative `r_C` and a
//! radius `m_C` per cluster and charges
//! `5 * max(d(r_C, r_D), m_C - d(r_C, r_D), m_D - d(r_C, r_D))`,
//! which lies in `[CW(e), 5 * CW(e)]`.

use crate::mst::SpanningTree;
use crate::points::PointSet;
use crate::unionfind::UnionFind;

/// One height per tree edge, aligned with [`SpanningTree::edges`].
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeHeights(pub Vec<f64>);

impl EdgeHeights {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Heights equal to the tree's own edge weights (single linkage).
    pub fn edge_weights(tree: &SpanningTree) -> Self {
        Self(tree.edges().iter().map(|e| e.w).collect())
    }
}

pub const ESTIMATE_FACTOR: f64 = 5.0;

/// Exact cut weights: the farthest cross pair of the two clusters each edge joins.
pub fn exact_cut_weights(points: &PointSet, tree: &SpanningTree) -> EdgeHeights {
    let n = points.len();
    let mut uf = UnionFind::new(n);
    let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut out = Vec::with_capacity(tree.edges().len());
    for e in tree.edges() {
        let a = uf.find_unchecked(e.u);
        let b = uf.find_unchecked(e.v);
        let (small, large) = if members[a].len() <= members[b].len() {
            (a, b)
        } else {
            (b, a)
        };
        let mut cw = 0.0f64;
        for &x in &members[small] {
            for &y in &members[large] {
                cw = cw.max(points.dist(x, y));
            }
        }
        out.push(cw);
        let keep = uf.union_unchecked(a, b);
        let absorbed = if keep == a { b } else { a };
        let moved = std::mem::take(&mut members[absorbed]);
        members[keep].extend(moved);
    }
    EdgeHeights(out)
}

/// Union-find over points where every cluster carries a representative and
/// the largest distance from it to any member.
#[derive(Debug, Clone)]
pub struct ClusterState {
    uf: UnionFind,
    representative: Vec<usize>,
    radius: Vec<f64>,
    members: Vec<Vec<usize>>,
}

impl ClusterState {
    pub fn new(n: usize) -> Self {
        Self {
            uf: UnionFind::new(n),
            representative: (0..n).collect(),
            radius: vec![0.0; n],
            members: (0..n).map(|i| vec![i]).collect(),
        }
    }

    pub fn root(&mut self, x: usize) -> usize {
        self.uf.find_unchecked(x)
    }

    pub fn representative(&mut self, x: usize) -> usize {
        let r = self.root(x);
        self.representative[r]
    }

    pub fn radius(&mut self, x: usize) -> f64 {
        let r = self.root(x);
        self.radius[r]
    }

    pub fn members(&mut self, x: usize) -> &[usize] {
        let r = self.root(x);
        &self.members[r]
    }

    /// Estimates the cut weight of the edge joining the clusters of `x` and
    /// `y`, then merges them. The larger cluster (ties: smaller root index)
    /// keeps its representative; only the smaller cluster is rescanned.
    pub fn merge(&mut self, points: &PointSet, x: usize, y: usize) -> f64 {
        let a = self.root(x);
        let b = self.root(y);
        debug_assert_ne!(a, b, "edge inside one cluster");
        let size = |r: usize| self.members[r].len();
        let (c, d) = if size(a) > size(b) || (size(a) == size(b) && a < b) {
            (a, b)
        } else {
            (b, a)
        };
        let rc = self.representative[c];
        let rd = self.representative[d];
        let between = points.dist(rc, rd);
        let estimate = ESTIMATE_FACTOR * between.max(self.radius[c] - between).max(self.radius[d] - between);

        let mut radius = self.radius[c];
        for &m in &self.members[d] {
            radius = radius.max(points.dist(m, rc));
        }
        let moved = std::mem::take(&mut self.members[d]);
        let mut kept = std::mem::take(&mut self.members[c]);
        kept.extend(moved);
        let root = self.uf.union_unchecked(c, d);
        self.members[root] = kept;
        self.representative[root] = rc;
        self.radius[root] = radius;
        estimate
    }

    /// Checks that every cluster's radius is attained by a member and
    /// bounds all of them.
    pub fn radius_invariant_holds(&mut self, points: &PointSet) -> bool {
        let n = self.members.len();
        (0..n).all(|i| {
            if self.root(i) != i {
                return true;
            }
            let rep = self.representative[i];
            let far = self.members[i].iter().map(|&m| points.dist(m, rep)).fold(0.0, f64::max);
            self.members[i].contains(&rep) && far == self.radius[i]
        })
    }
}

/// Five-approximate cut weights in `O(n log n)` distance evaluations.
pub fn approximate_cut_weights(points: &PointSet, tree: &SpanningTree) -> EdgeHeights {
    let mut state = ClusterState::new(points.len());
    EdgeHeights(tree.edges().iter().map(|e| state.merge(points, e.u, e.v)).collect())
}
