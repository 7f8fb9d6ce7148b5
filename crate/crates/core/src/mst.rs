//! Spanning trees: Kruskal over a sparse graph, dense Prim over all pairs,
//! forest repair, and the approximate-Kruskal-tree certificate.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::points::{sort_edges, PointSet, WeightedEdge};
use crate::unionfind::UnionFind;

/// A spanning tree over `n` points. Edges are kept in ascending edge order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpanningTree {
    n: usize,
    edges: Vec<WeightedEdge>,
}

impl SpanningTree {
    /// Validates that `edges` span `n` vertices without cycles.
    pub fn new(n: usize, edges: Vec<WeightedEdge>) -> Result<Self> {
        let forest = Forest::new(n, edges)?;
        if forest.components > 1 {
            return Err(Error::Disconnected {
                components: forest.components,
            });
        }
        Ok(Self { n, edges: forest.edges })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn edges(&self) -> &[WeightedEdge] {
        &self.edges
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.w).sum()
    }

    /// For every vertex, its `(neighbor, weight)` pairs.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.n];
        for e in &self.edges {
            adj[e.u].push((e.v, e.w));
            adj[e.v].push((e.u, e.w));
        }
        adj
    }
}

/// An acyclic edge set that may leave several components.
#[derive(Debug, Clone, PartialEq)]
pub struct Forest {
    n: usize,
    edges: Vec<WeightedEdge>,
    components: usize,
}

impl Forest {
    pub fn new(n: usize, mut edges: Vec<WeightedEdge>) -> Result<Self> {
        let mut uf = UnionFind::new(n);
        for e in &edges {
            if uf.same_set(e.u, e.v)? {
                return Err(Error::InvalidConfig(format!("edge ({}, {}) closes a cycle", e.u, e.v)));
            }
            uf.union_unchecked(e.u, e.v);
        }
        sort_edges(&mut edges);
        Ok(Self {
            n,
            edges,
            components: uf.components(),
        })
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn edges(&self) -> &[WeightedEdge] {
        &self.edges
    }
}

impl From<SpanningTree> for Forest {
    fn from(tree: SpanningTree) -> Self {
        Self {
            components: usize::from(tree.n > 0),
            n: tree.n,
            edges: tree.edges,
        }
    }
}

/// Minimum spanning forest of an edge list, ties broken by edge order.
///
/// Filter-Kruskal: large edge sets are split at the median, the light half is
/// solved first, and heavy edges already inside one component are discarded
/// before the heavy half is processed. The strict edge order makes the
/// forest unique, so the result equals plain Kruskal's.
pub fn kruskal_forest(n: usize, edges: &[WeightedEdge]) -> Result<Forest> {
    if let Some(e) = edges.iter().find(|e| e.v >= n || e.u >= n) {
        return Err(Error::IndexOutOfRange {
            index: e.u.max(e.v),
            len: n,
        });
    }
    let mut work = edges.to_vec();
    let mut uf = UnionFind::new(n);
    let mut chosen = Vec::with_capacity(n.saturating_sub(1));
    filter_kruskal(&mut work, &mut uf, &mut chosen, n);
    Ok(Forest {
        n,
        edges: chosen,
        components: uf.components(),
    })
}

const FILTER_CUTOFF: usize = 1 << 15;

fn filter_kruskal(edges: &mut [WeightedEdge], uf: &mut UnionFind, chosen: &mut Vec<WeightedEdge>, n: usize) {
    if chosen.len() + 1 >= n {
        return;
    }
    if edges.len() <= FILTER_CUTOFF {
        sort_edges(edges);
        for e in edges.iter() {
            if uf.find_unchecked(e.u) != uf.find_unchecked(e.v) {
                uf.union_unchecked(e.u, e.v);
                chosen.push(*e);
                if chosen.len() + 1 == n {
                    return;
                }
            }
        }
        return;
    }
    let mid = edges.len() / 2;
    edges.select_nth_unstable_by(mid, |a, b| a.order(b));
    let (light, heavy) = edges.split_at_mut(mid);
    filter_kruskal(light, uf, chosen, n);
    if chosen.len() + 1 >= n {
        return;
    }
    let mut kept = 0;
    for i in 0..heavy.len() {
        let e = heavy[i];
        if uf.find_unchecked(e.u) != uf.find_unchecked(e.v) {
            heavy[kept] = e;
            kept += 1;
        }
    }
    filter_kruskal(&mut heavy[..kept], uf, chosen, n);
}

/// Minimum spanning tree of a connected edge list.
pub fn kruskal(n: usize, edges: &[WeightedEdge]) -> Result<SpanningTree> {
    let forest = kruskal_forest(n, edges)?;
    if forest.components > 1 {
        return Err(Error::Disconnected {
            components: forest.components,
        });
    }
    Ok(SpanningTree { n, edges: forest.edges })
}

/// Joins the components of `forest` with exact nearest cross pairs until one
/// component remains.
pub fn connect_components(points: &PointSet, forest: Forest) -> SpanningTree {
    let n = points.len();
    let Forest { mut edges, .. } = forest;
    let mut uf = UnionFind::new(n);
    for e in &edges {
        uf.union_unchecked(e.u, e.v);
    }
    while uf.components() > 1 {
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); n];
        for i in 0..n {
            let r = uf.find_unchecked(i);
            members[r].push(i);
        }
        // smallest component; ties go to the one holding the lowest index
        let smallest = members
            .iter()
            .filter(|m| !m.is_empty())
            .min_by(|a, b| a.len().cmp(&b.len()).then(a[0].cmp(&b[0])))
            .expect("at least two components")
            .clone();
        let root = uf.find_unchecked(smallest[0]);
        let mut best: Option<WeightedEdge> = None;
        for &x in &smallest {
            for y in 0..n {
                if uf.find_unchecked(y) == root {
                    continue;
                }
                let cand = WeightedEdge::between(points, x, y);
                if best.is_none_or(|b| cand.order(&b) == Ordering::Less) {
                    best = Some(cand);
                }
            }
        }
        let e = best.expect("another component exists");
        uf.union_unchecked(e.u, e.v);
        edges.push(e);
    }
    sort_edges(&mut edges);
    SpanningTree { n, edges }
}

/// Exact Euclidean MST by dense Prim, identical to Kruskal on the complete graph.
///
/// Candidate edges are compared with the full (weight, min, max) order, under
/// which the MST is unique, so Prim and Kruskal agree edge for edge.
pub fn exact_mst(points: &PointSet) -> SpanningTree {
    let n = points.len();
    if n < 2 {
        return SpanningTree { n, edges: Vec::new() };
    }
    let mut in_tree = vec![false; n];
    let mut best: Vec<Option<WeightedEdge>> = vec![None; n];
    let mut edges = Vec::with_capacity(n - 1);
    let mut current = 0;
    in_tree[0] = true;
    for _ in 1..n {
        let in_tree_ref = &in_tree;
        let (v, edge) = best
            .par_iter_mut()
            .enumerate()
            .with_min_len(1024)
            .filter(|(v, _)| !in_tree_ref[*v])
            .map(|(v, slot)| {
                let cand = WeightedEdge::new(current, v, points.dist(current, v));
                let kept = match *slot {
                    Some(old) if old.order(&cand) != Ordering::Greater => old,
                    _ => cand,
                };
                *slot = Some(kept);
                (v, kept)
            })
            .min_by(|a, b| a.1.order(&b.1).then(a.0.cmp(&b.0)))
            .expect("vertices remain");
        in_tree[v] = true;
        edges.push(edge);
        current = v;
    }
    sort_edges(&mut edges);
    SpanningTree { n, edges }
}

/// Smallest `gamma >= 1` for which `tree` is a gamma-approximate Kruskal tree
/// of the complete Euclidean graph. Quadratic; meant for certification.
pub fn kt_factor(points: &PointSet, tree: &SpanningTree) -> f64 {
    let n = points.len();
    if n < 3 {
        return 1.0;
    }
    let adj = tree.adjacency();
    (0..n)
        .into_par_iter()
        .map(|source| {
            let path_max = path_maxima(&adj, source);
            (source + 1..n)
                .map(|v| path_max[v] / points.dist(source, v))
                .fold(1.0f64, f64::max)
        })
        .reduce(|| 1.0, f64::max)
}

/// Largest edge weight on the tree path from `source` to every vertex.
pub fn path_maxima(adj: &[Vec<(usize, f64)>], source: usize) -> Vec<f64> {
    let mut out = vec![f64::NAN; adj.len()];
    out[source] = 0.0;
    let mut stack = vec![source];
    while let Some(u) = stack.pop() {
        for &(v, w) in &adj[u] {
            if out[v].is_nan() {
                out[v] = out[u].max(w);
                stack.push(v);
            }
        }
    }
    out
}
