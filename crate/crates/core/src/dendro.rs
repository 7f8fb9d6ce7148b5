//! Binary merge trees whose node heights induce an ultrametric on the leaves.
//!
//! Leaves are `0..n`; the internal node created by merge `i` has id `n + i`.
//! The distance between two leaves is the height of their lowest common
//! ancestor, answered in constant time from an Euler tour and a sparse table.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::cutweight::EdgeHeights;
use crate::error::{Error, Result};
use crate::mst::SpanningTree;
use crate::points::{Multiplicity, PointSet};
use crate::unionfind::UnionFind;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone)]
pub struct Dendrogram {
    n: usize,
    merges: Vec<Merge>,
    lca: LcaIndex,
}

impl PartialEq for Dendrogram {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.merges == other.merges
    }
}

impl Dendrogram {
    /// Builds a dendrogram from `(left, right, height)` triples.
    ///
    /// Children must already exist and be unused, and heights must not
    /// decrease from child to parent.
    pub fn from_merges(n: usize, triples: &[(usize, usize, f64)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty);
        }
        if triples.len() + 1 != n {
            return Err(Error::InvalidDendrogram(format!(
                "{} leaves need {} merges, got {}",
                n,
                n - 1,
                triples.len()
            )));
        }
        let mut used = vec![false; 2 * n - 1];
        let mut merges: Vec<Merge> = Vec::with_capacity(n - 1);
        let node_height = |merges: &[Merge], id: usize| if id < n { 0.0 } else { merges[id - n].height };
        let node_size = |merges: &[Merge], id: usize| if id < n { 1 } else { merges[id - n].size };
        for (i, &(left, right, height)) in triples.iter().enumerate() {
            let id = n + i;
            if !(height.is_finite() && height >= 0.0) {
                return Err(Error::InvalidDendrogram(format!(
                    "merge {i}: height {height} is not a finite non-negative value"
                )));
            }
            for child in [left, right] {
                if child >= id {
                    return Err(Error::InvalidDendrogram(format!(
                        "merge {i}: child {child} does not exist before node {id}"
                    )));
                }
                if used[child] {
                    return Err(Error::InvalidDendrogram(format!(
                        "merge {i}: node {child} already has a parent"
                    )));
                }
                used[child] = true;
                let child_height = node_height(&merges, child);
                if height < child_height {
                    return Err(Error::InvalidDendrogram(format!(
                        "merge {i}: height {height} is below child {child} height {child_height} (heights must be monotone)"
                    )));
                }
            }
            if left == right {
                return Err(Error::InvalidDendrogram(format!(
                    "merge {i}: node {left} merged with itself"
                )));
            }
            let size = node_size(&merges, left) + node_size(&merges, right);
            merges.push(Merge {
                left,
                right,
                height,
                size,
            });
        }
        let lca = LcaIndex::new(n, &merges);
        Ok(Self { n, merges, lca })
    }

    pub fn num_leaves(&self) -> usize {
        self.n
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    pub fn root(&self) -> usize {
        2 * self.n - 2
    }

    pub fn height(&self, node: usize) -> f64 {
        if node < self.n {
            0.0
        } else {
            self.merges[node - self.n].height
        }
    }

    /// Lowest common ancestor of two nodes.
    pub fn lca(&self, a: usize, b: usize) -> Result<usize> {
        for x in [a, b] {
            if x >= 2 * self.n - 1 {
                return Err(Error::IndexOutOfRange {
                    index: x,
                    len: 2 * self.n - 1,
                });
            }
        }
        Ok(self.lca.query(a, b))
    }

    /// Ultrametric distance between leaves `u` and `v`.
    pub fn ultra_distance(&self, u: usize, v: usize) -> Result<f64> {
        for x in [u, v] {
            if x >= self.n {
                return Err(Error::IndexOutOfRange { index: x, len: self.n });
            }
        }
        if u == v {
            return Ok(0.0);
        }
        Ok(self.height(self.lca.query(u, v)))
    }

    /// Copy with every height multiplied by `scale`.
    pub fn scaled(&self, scale: f64) -> Self {
        let merges = self
            .merges
            .iter()
            .map(|m| Merge {
                height: m.height * scale,
                ..*m
            })
            .collect();
        Self {
            n: self.n,
            merges,
            lca: self.lca.clone(),
        }
    }

    /// Leaves in depth-first order, left subtree first.
    pub fn leaf_order(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.n);
        let mut stack = vec![self.root()];
        while let Some(node) = stack.pop() {
            if node < self.n {
                order.push(node);
            } else {
                let m = &self.merges[node - self.n];
                stack.push(m.right);
                stack.push(m.left);
            }
        }
        order
    }

    /// For every merge, the leaf-order ranges `(start, split, end)` of its
    /// left (`start..split`) and right (`split..end`) subtrees.
    pub fn merge_ranges(&self) -> Vec<(usize, usize, usize)> {
        let order = self.leaf_order();
        let mut pos = vec![0usize; self.n];
        for (p, &leaf) in order.iter().enumerate() {
            pos[leaf] = p;
        }
        let mut first = vec![0usize; 2 * self.n - 1];
        first[..self.n].copy_from_slice(&pos);
        let mut out = Vec::with_capacity(self.merges.len());
        for (i, m) in self.merges.iter().enumerate() {
            let start = first[m.left];
            let split = start + self.size(m.left);
            first[self.n + i] = start;
            out.push((start, split, start + m.size));
        }
        out
    }

    fn size(&self, node: usize) -> usize {
        if node < self.n {
            1
        } else {
            self.merges[node - self.n].size
        }
    }

    /// Re-expands a dendrogram fitted on deduplicated points to the original
    /// indices; copies of one point are joined at height zero first.
    pub fn expand(&self, multiplicity: &Multiplicity) -> Result<Self> {
        let groups = multiplicity.groups();
        if groups.len() != self.n {
            return Err(Error::InvalidDendrogram(format!(
                "dendrogram has {} leaves, multiplicity map has {} groups",
                self.n,
                groups.len()
            )));
        }
        if !multiplicity.has_duplicates() {
            let mut remap: Vec<usize> = groups.iter().map(|g| g[0]).collect();
            remap.extend(self.n..2 * self.n - 1);
            let triples: Vec<_> = self
                .merges
                .iter()
                .map(|m| (remap[m.left], remap[m.right], m.height))
                .collect();
            return Self::from_merges(self.n, &triples);
        }
        let total = multiplicity.original_len();
        let mut triples = Vec::with_capacity(total - 1);
        let mut top = Vec::with_capacity(self.n);
        for g in groups {
            let mut node = g[0];
            for &other in &g[1..] {
                triples.push((node, other, 0.0));
                node = total + triples.len() - 1;
            }
            top.push(node);
        }
        let offset = total + triples.len();
        for m in &self.merges {
            let map = |id: usize| if id < self.n { top[id] } else { offset + (id - self.n) };
            triples.push((map(m.left), map(m.right), m.height));
        }
        Self::from_merges(total, &triples)
    }

    pub fn to_merge_list(&self) -> String {
        let mut out = String::new();
        for m in &self.merges {
            writeln!(out, "{} {} {:?} {}", m.left, m.right, m.height, m.size).expect("write to string");
        }
        out
    }

    /// Parses rows of `left right height size`; blank lines and `#` comments
    /// are skipped. The leaf count is the row count plus one.
    pub fn parse_merge_list(text: &str) -> Result<Self> {
        let mut triples = Vec::new();
        let mut sizes = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split_whitespace().collect();
            let bad = |what: &str| Error::InvalidDendrogram(format!("line {}: {}", lineno + 1, what));
            if cols.len() != 4 {
                return Err(bad(&format!("expected 4 columns, found {}", cols.len())));
            }
            let left = cols[0].parse::<usize>().map_err(|_| bad("left id is not an index"))?;
            let right = cols[1].parse::<usize>().map_err(|_| bad("right id is not an index"))?;
            let height = cols[2].parse::<f64>().map_err(|_| bad("height is not a number"))?;
            let size = cols[3].parse::<usize>().map_err(|_| bad("size is not a count"))?;
            triples.push((left, right, height));
            sizes.push((lineno + 1, size));
        }
        if triples.is_empty() {
            return Err(Error::InvalidDendrogram("no merge rows".into()));
        }
        let dendro = Self::from_merges(triples.len() + 1, &triples)?;
        for (m, (lineno, size)) in dendro.merges.iter().zip(sizes) {
            if m.size != size {
                return Err(Error::InvalidDendrogram(format!(
                    "line {lineno}: size column says {size}, subtree holds {}",
                    m.size
                )));
            }
        }
        Ok(dendro)
    }

    /// `{"n": .., "merges": [{"left", "right", "height", "size"}, ..]}`.
    pub fn to_json(&self) -> String {
        let doc = JsonDoc {
            n: self.n,
            merges: self.merges.clone(),
        };
        serde_json::to_string(&doc).expect("dendrogram serializes")
    }

    /// Inverse of [`Dendrogram::to_json`]; unknown fields are ignored and the
    /// sizes are re-checked against the rebuilt tree.
    pub fn parse_json(text: &str) -> Result<Self> {
        let doc: JsonDoc = serde_json::from_str(text).map_err(|e| Error::InvalidDendrogram(format!("json: {e}")))?;
        let triples: Vec<_> = doc.merges.iter().map(|m| (m.left, m.right, m.height)).collect();
        let dendro = Self::from_merges(doc.n, &triples)?;
        for (i, (built, given)) in dendro.merges.iter().zip(&doc.merges).enumerate() {
            if built.size != given.size {
                return Err(Error::InvalidDendrogram(format!(
                    "merge {i}: size says {}, subtree holds {}",
                    given.size, built.size
                )));
            }
        }
        Ok(dendro)
    }

    /// Newick text; a child's branch length is its parent's height minus its own.
    pub fn to_newick(&self, labels: &[String]) -> Result<String> {
        if labels.len() != self.n {
            return Err(Error::InvalidConfig(format!(
                "{} labels for {} leaves",
                labels.len(),
                self.n
            )));
        }
        enum Step {
            Enter(usize, Option<f64>),
            Comma,
            Close(Option<f64>),
        }
        let mut out = String::new();
        let mut stack = vec![Step::Enter(self.root(), None)];
        while let Some(step) = stack.pop() {
            match step {
                Step::Enter(node, branch) if node < self.n => {
                    out.push_str(&newick_label(&labels[node]));
                    push_branch(&mut out, branch);
                }
                Step::Enter(node, branch) => {
                    let m = &self.merges[node - self.n];
                    out.push('(');
                    stack.push(Step::Close(branch));
                    stack.push(Step::Enter(m.right, Some(m.height - self.height(m.right))));
                    stack.push(Step::Comma);
                    stack.push(Step::Enter(m.left, Some(m.height - self.height(m.left))));
                }
                Step::Comma => out.push(','),
                Step::Close(branch) => {
                    out.push(')');
                    push_branch(&mut out, branch);
                }
            }
        }
        out.push(';');
        Ok(out)
    }
}

#[derive(Serialize, Deserialize)]
struct JsonDoc {
    n: usize,
    merges: Vec<Merge>,
}

fn push_branch(out: &mut String, branch: Option<f64>) {
    if let Some(b) = branch {
        write!(out, ":{b}").expect("write to string");
    }
}

fn newick_label(label: &str) -> String {
    if label.chars().any(|c| "()[]':;, \t\n".contains(c)) {
        format!("'{}'", label.replace('\'', "''"))
    } else {
        label.to_string()
    }
}

/// Cartesian tree of `tree` under `heights`: edges are merged bottom-up in
/// ascending `(height, u, v)` order, each joining the current clusters of its
/// endpoints under a new node.
pub fn build_dendrogram(tree: &SpanningTree, heights: &EdgeHeights) -> Result<Dendrogram> {
    let edges = tree.edges();
    if heights.len() != edges.len() {
        return Err(Error::MisalignedHeights {
            expected: edges.len(),
            got: heights.len(),
        });
    }
    let h = heights.as_slice();
    if let Some(bad) = h.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
        return Err(Error::InvalidDendrogram(format!(
            "edge height {bad} is not a finite non-negative value"
        )));
    }
    let n = tree.len();
    let mut order: Vec<usize> = (0..edges.len()).collect();
    order.sort_by(|&a, &b| {
        h[a].total_cmp(&h[b])
            .then(edges[a].u.cmp(&edges[b].u))
            .then(edges[a].v.cmp(&edges[b].v))
    });
    let mut uf = UnionFind::new(n);
    let mut node_of: Vec<usize> = (0..n).collect();
    let mut triples = Vec::with_capacity(edges.len());
    for idx in order {
        let e = edges[idx];
        let a = uf.find_unchecked(e.u);
        let b = uf.find_unchecked(e.v);
        triples.push((node_of[a], node_of[b], h[idx]));
        let root = uf.union_unchecked(a, b);
        node_of[root] = n + triples.len() - 1;
    }
    Dendrogram::from_merges(n, &triples)
}

/// Smallest uniform scale after which the ultrametric dominates the point
/// metric on every pair, together with the rescaled dendrogram.
pub fn normalize(dendro: &Dendrogram, points: &PointSet) -> Result<(Dendrogram, f64)> {
    check_same_size(dendro, points)?;
    let order = dendro.leaf_order();
    let mut scale = 0.0f64;
    for (m, (start, split, end)) in dendro.merges().iter().zip(dendro.merge_ranges()) {
        for &x in &order[start..split] {
            for &y in &order[split..end] {
                if m.height == 0.0 {
                    return Err(Error::InvalidDendrogram(format!(
                        "leaves {x} and {y} are at ultrametric distance zero; cannot normalize"
                    )));
                }
                scale = scale.max(points.dist(x, y) / m.height);
            }
        }
    }
    if dendro.num_leaves() < 2 {
        scale = 1.0;
    }
    Ok((dendro.scaled(scale), scale))
}

pub(crate) fn check_same_size(dendro: &Dendrogram, points: &PointSet) -> Result<()> {
    if dendro.num_leaves() != points.len() {
        return Err(Error::InvalidDendrogram(format!(
            "dendrogram has {} leaves, point set has {} points",
            dendro.num_leaves(),
            points.len()
        )));
    }
    Ok(())
}

/// Euler tour of the tree plus a sparse table over tour depths.
#[derive(Debug, Clone)]
struct LcaIndex {
    first: Vec<u32>,
    tour: Vec<u32>,
    depth: Vec<u32>,
    table: Vec<Vec<u32>>,
}

impl LcaIndex {
    fn new(n: usize, merges: &[Merge]) -> Self {
        let nodes = 2 * n - 1;
        let root = nodes - 1;
        let mut first = vec![0u32; nodes];
        let mut tour = Vec::with_capacity(2 * nodes);
        let mut depth = Vec::with_capacity(2 * nodes);
        // (node, depth, next child to visit)
        let mut stack = vec![(root, 0u32, 0u8)];
        while let Some(top) = stack.last_mut() {
            let (node, d, next) = *top;
            if next == 0 {
                first[node] = tour.len() as u32;
            }
            tour.push(node as u32);
            depth.push(d);
            if node < n || next == 2 {
                stack.pop();
                continue;
            }
            top.2 += 1;
            let m = &merges[node - n];
            let child = if next == 0 { m.left } else { m.right };
            stack.push((child, d + 1, 0));
        }
        let mut table = vec![(0..tour.len() as u32).collect::<Vec<u32>>()];
        let mut width = 1;
        while 2 * width <= tour.len() {
            let prev = table.last().expect("level 0 exists");
            let level: Vec<u32> = (0..=tour.len() - 2 * width)
                .map(|i| {
                    let (a, b) = (prev[i], prev[i + width]);
                    if depth[b as usize] < depth[a as usize] {
                        b
                    } else {
                        a
                    }
                })
                .collect();
            table.push(level);
            width *= 2;
        }
        Self {
            first,
            tour,
            depth,
            table,
        }
    }

    fn query(&self, a: usize, b: usize) -> usize {
        let (mut lo, mut hi) = (self.first[a] as usize, self.first[b] as usize);
        if lo > hi {
            std::mem::swap(&mut lo, &mut hi);
        }
        let len = hi - lo + 1;
        let k = usize::BITS as usize - 1 - len.leading_zeros() as usize;
        let x = self.table[k][lo];
        let y = self.table[k][hi + 1 - (1 << k)];
        let best = if self.depth[y as usize] < self.depth[x as usize] {
            y
        } else {
            x
        };
        self.tour[best as usize] as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cutweight::{approximate_cut_weights, exact_cut_weights};
    use crate::mst::{exact_mst, path_maxima};

    fn collinear() -> (PointSet, SpanningTree) {
        let p = PointSet::from_rows(&[[0.0], [1.0], [3.0]]).unwrap();
        let t = exact_mst(&p);
        (p, t)
    }

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| i.to_string()).collect()
    }

    #[test]
    fn collinear_exact_heights() {
        let (p, t) = collinear();
        let d = build_dendrogram(&t, &exact_cut_weights(&p, &t)).unwrap();
        assert_eq!(d.ultra_distance(0, 1).unwrap(), 1.0);
        assert_eq!(d.ultra_distance(0, 2).unwrap(), 3.0);
        assert_eq!(d.ultra_distance(1, 2).unwrap(), 3.0);
        assert_eq!(d.ultra_distance(2, 2).unwrap(), 0.0);
        assert_eq!(d.to_merge_list(), "0 1 1.0 2\n3 2 3.0 3\n");
    }

    #[test]
    fn collinear_estimated_heights() {
        let (p, t) = collinear();
        let d = build_dendrogram(&t, &approximate_cut_weights(&p, &t)).unwrap();
        assert_eq!(d.ultra_distance(0, 1).unwrap(), 5.0);
        assert_eq!(d.ultra_distance(0, 2).unwrap(), 15.0);
        assert_eq!(d.ultra_distance(1, 2).unwrap(), 15.0);
    }

    #[test]
    fn two_leaves() {
        let p = PointSet::from_rows(&[[0.0], [1.0]]).unwrap();
        let t = exact_mst(&p);
        let d = build_dendrogram(&t, &EdgeHeights(vec![1.0])).unwrap();
        assert_eq!(d.merges().len(), 1);
        assert_eq!(d.to_merge_list(), "0 1 1.0 2\n");
        let names = vec!["a".to_string(), "b".to_string()];
        assert_eq!(d.to_newick(&names).unwrap(), "(a:1,b:1);");
    }

    #[test]
    fn single_leaf() {
        let d = Dendrogram::from_merges(1, &[]).unwrap();
        assert_eq!(d.ultra_distance(0, 0).unwrap(), 0.0);
        assert_eq!(d.to_merge_list(), "");
        assert_eq!(d.to_newick(&labels(1)).unwrap(), "0;");
    }

    #[test]
    fn star_ultrametric() {
        let triples = [(0, 1, 2.0), (4, 2, 2.0), (5, 3, 2.0)];
        let d = Dendrogram::from_merges(4, &triples).unwrap();
        for u in 0..4 {
            for v in 0..4 {
                let expected = if u == v { 0.0 } else { 2.0 };
                assert_eq!(d.ultra_distance(u, v).unwrap(), expected);
            }
        }
    }

    #[test]
    fn invalid_leaf_rejected() {
        let (p, t) = collinear();
        let d = build_dendrogram(&t, &exact_cut_weights(&p, &t)).unwrap();
        assert!(matches!(d.ultra_distance(0, 3), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn misaligned_heights_rejected() {
        let (_, t) = collinear();
        assert_eq!(
            build_dendrogram(&t, &EdgeHeights(vec![1.0])),
            Err(Error::MisalignedHeights { expected: 2, got: 1 })
        );
    }

    #[test]
    fn from_merges_validation() {
        assert!(Dendrogram::from_merges(3, &[(0, 1, 2.0), (3, 2, 1.0)]).is_err());
        assert!(Dendrogram::from_merges(3, &[(0, 1, 1.0), (0, 2, 2.0)]).is_err());
        assert!(Dendrogram::from_merges(3, &[(0, 4, 1.0), (3, 2, 2.0)]).is_err());
        assert!(Dendrogram::from_merges(3, &[(0, 1, 1.0)]).is_err());
        assert!(Dendrogram::from_merges(2, &[(0, 1, f64::NAN)]).is_err());
        assert!(Dendrogram::from_merges(2, &[(1, 1, 1.0)]).is_err());
    }

    #[test]
    fn normalize_single_linkage_collinear() {
        let (p, t) = collinear();
        let d = build_dendrogram(&t, &EdgeHeights::edge_weights(&t)).unwrap();
        let (nd, s) = normalize(&d, &p).unwrap();
        assert_eq!(s, 1.5);
        let heights: Vec<f64> = nd.merges().iter().map(|m| m.height).collect();
        assert_eq!(heights, vec![1.5, 3.0]);
    }

    #[test]
    fn normalize_tight_exact_fit_is_identity() {
        let (p, t) = collinear();
        let d = build_dendrogram(&t, &exact_cut_weights(&p, &t)).unwrap();
        assert_eq!(normalize(&d, &p).unwrap().1, 1.0);
    }

    #[test]
    fn normalize_two_points() {
        let p = PointSet::from_rows(&[[0.0], [1.0]]).unwrap();
        let d = Dendrogram::from_merges(2, &[(0, 1, 0.5)]).unwrap();
        let (nd, s) = normalize(&d, &p).unwrap();
        assert_eq!(s, 2.0);
        assert_eq!(nd.merges()[0].height, 1.0);
    }

    #[test]
    fn normalize_rejects_zero_height() {
        let p = PointSet::from_rows(&[[0.0], [1.0]]).unwrap();
        let d = Dendrogram::from_merges(2, &[(0, 1, 0.0)]).unwrap();
        assert!(normalize(&d, &p).is_err());
    }

    #[test]
    fn normalize_keeps_topology() {
        let p = PointSet::uniform_cube(60, 3, 4).unwrap();
        let t = exact_mst(&p);
        let d = build_dendrogram(&t, &EdgeHeights::edge_weights(&t)).unwrap();
        let (nd, s) = normalize(&d, &p).unwrap();
        for (a, b) in d.merges().iter().zip(nd.merges()) {
            assert_eq!((a.left, a.right, a.size), (b.left, b.right, b.size));
            assert_eq!(b.height, a.height * s);
        }
        for u in 0..60 {
            for v in 0..60 {
                assert_eq!(d.lca(u, v).unwrap(), nd.lca(u, v).unwrap());
            }
        }
    }

    #[test]
    fn edge_weights_reproduce_tree_path_maximum() {
        for seed in 0..5 {
            let p = PointSet::uniform_cube(100, 4, seed).unwrap();
            let t = exact_mst(&p);
            let d = build_dendrogram(&t, &EdgeHeights::edge_weights(&t)).unwrap();
            let adj = t.adjacency();
            for u in 0..100 {
                let pm = path_maxima(&adj, u);
                for (v, &m) in pm.iter().enumerate() {
                    assert_eq!(d.ultra_distance(u, v).unwrap(), m);
                }
            }
        }
    }

    /// Brute-force LCA by walking parent pointers.
    fn naive_lca(d: &Dendrogram, a: usize, b: usize) -> usize {
        let n = d.num_leaves();
        let mut parent = vec![usize::MAX; 2 * n - 1];
        for (i, m) in d.merges().iter().enumerate() {
            parent[m.left] = n + i;
            parent[m.right] = n + i;
        }
        let mut ancestors = std::collections::HashSet::new();
        let mut x = a;
        loop {
            ancestors.insert(x);
            if parent[x] == usize::MAX {
                break;
            }
            x = parent[x];
        }
        let mut y = b;
        while !ancestors.contains(&y) {
            y = parent[y];
        }
        y
    }

    #[test]
    fn lca_matches_parent_walk() {
        let p = PointSet::uniform_cube(70, 2, 12).unwrap();
        let t = exact_mst(&p);
        let d = build_dendrogram(&t, &approximate_cut_weights(&p, &t)).unwrap();
        for a in 0..139 {
            for b in (0..139).step_by(3) {
                assert_eq!(d.lca(a, b).unwrap(), naive_lca(&d, a, b));
            }
        }
    }

    #[test]
    fn strong_triangle_inequality() {
        let p = PointSet::uniform_cube(60, 5, 21).unwrap();
        let t = exact_mst(&p);
        let d = build_dendrogram(&t, &approximate_cut_weights(&p, &t)).unwrap();
        for m in d.merges() {
            assert!(m.height >= d.height(m.left) && m.height >= d.height(m.right));
        }
        for x in 0..60 {
            for y in 0..60 {
                for z in 0..60 {
                    let dxy = d.ultra_distance(x, y).unwrap();
                    let bound = d.ultra_distance(x, z).unwrap().max(d.ultra_distance(z, y).unwrap());
                    assert!(dxy <= bound * (1.0 + 1e-12));
                }
            }
        }
    }

    #[test]
    fn merge_list_round_trip() {
        let p = PointSet::uniform_cube(50, 3, 6).unwrap();
        let t = exact_mst(&p);
        let d = build_dendrogram(&t, &approximate_cut_weights(&p, &t)).unwrap();
        let back = Dendrogram::parse_merge_list(&d.to_merge_list()).unwrap();
        assert_eq!(back, d);
        for u in 0..50 {
            for v in 0..50 {
                assert_eq!(back.ultra_distance(u, v).unwrap(), d.ultra_distance(u, v).unwrap());
            }
        }
    }

    #[test]
    fn json_round_trip_ignores_unknown_fields() {
        let d = Dendrogram::from_merges(3, &[(0, 1, 1.0), (3, 2, 3.0)]).unwrap();
        let text = d.to_json();
        assert_eq!(
            text,
            r#"{"n":3,"merges":[{"left":0,"right":1,"height":1.0,"size":2},{"left":3,"right":2,"height":3.0,"size":3}]}"#
        );
        assert_eq!(Dendrogram::parse_json(&text).unwrap(), d);
        let extra = r#"{"n":2,"note":"x","merges":[{"left":0,"right":1,"height":0.5,"size":2,"tag":1}]}"#;
        assert_eq!(Dendrogram::parse_json(extra).unwrap().height(2), 0.5);
        assert!(Dendrogram::parse_json(r#"{"n":2,"merges":[{"left":0,"right":1,"height":0.5,"size":3}]}"#).is_err());
        assert!(Dendrogram::parse_json("{").is_err());
    }

    #[test]
    fn merge_list_parse_errors() {
        assert!(Dendrogram::parse_merge_list("").is_err());
        assert!(Dendrogram::parse_merge_list("0 1 1.0 2\n3 2 3.0").is_err());
        assert!(Dendrogram::parse_merge_list("0 1 1.0 2\n3 2 x 3\n").is_err());
        assert!(Dendrogram::parse_merge_list("0 1 1.0 3\n").is_err());
        let err = Dendrogram::parse_merge_list("0 1 3.0 2\n3 2 1.0 3\n").unwrap_err();
        assert!(err.to_string().contains("monotone"));
        assert!(Dendrogram::parse_merge_list("# comment\n\n0 1 1.0 2\r\n").is_ok());
    }

    #[test]
    fn expand_duplicates_at_height_zero() {
        // original rows: a, a, b  -> deduped a, b
        let rows = PointSet::from_rows(&[[0.0], [0.0], [2.0]]).unwrap();
        let (pts, mult) = rows.dedupe();
        let t = exact_mst(&pts);
        let d = build_dendrogram(&t, &EdgeHeights::edge_weights(&t)).unwrap();
        let full = d.expand(&mult).unwrap();
        assert_eq!(full.num_leaves(), 3);
        assert_eq!(full.ultra_distance(0, 1).unwrap(), 0.0);
        assert_eq!(full.ultra_distance(0, 2).unwrap(), 2.0);
        assert_eq!(full.ultra_distance(1, 2).unwrap(), 2.0);
        assert_eq!(full.to_merge_list(), "0 1 0.0 2\n3 2 2.0 3\n");
    }

    #[test]
    fn expand_without_duplicates_is_identity() {
        let (p, t) = collinear();
        let d = build_dendrogram(&t, &exact_cut_weights(&p, &t)).unwrap();
        assert_eq!(d.expand(&Multiplicity::identity(3)).unwrap(), d);
    }

    #[test]
    fn newick_branch_lengths() {
        let (p, t) = collinear();
        let d = build_dendrogram(&t, &exact_cut_weights(&p, &t)).unwrap();
        assert_eq!(d.to_newick(&labels(3)).unwrap(), "((0:1,1:1):2,2:3);");
        let quoted = vec!["a b".to_string(), "c".to_string(), "d".to_string()];
        assert_eq!(d.to_newick(&quoted).unwrap(), "(('a b':1,c:1):2,d:3);");
        assert!(d.to_newick(&labels(2)).is_err());
    }

    #[test]
    fn deep_caterpillar_does_not_overflow() {
        let n = 50_000;
        let mut triples = vec![(0, 1, 1.0)];
        for i in 2..n {
            triples.push((n + i - 2, i, i as f64));
        }
        let d = Dendrogram::from_merges(n, &triples).unwrap();
        assert_eq!(d.ultra_distance(0, n - 1).unwrap(), (n - 1) as f64);
        assert!(d.to_newick(&labels(n)).unwrap().ends_with(';'));
        assert_eq!(d.leaf_order().len(), n);
    }
}
