//! Disjoint-set forest with union by size and path compression.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
    components: usize,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
            components: n,
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    /// Number of disjoint sets currently in the forest.
    pub fn components(&self) -> usize {
        self.components
    }

    pub fn find(&mut self, x: usize) -> Result<usize> {
        self.check(x)?;
        Ok(self.find_unchecked(x))
    }

    pub(crate) fn find_unchecked(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    /// Merges the sets of `x` and `y`, returning the surviving root.
    ///
    /// The larger set's root survives; on equal sizes the smaller root index does.
    pub fn union(&mut self, x: usize, y: usize) -> Result<usize> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.union_unchecked(x, y))
    }

    pub(crate) fn union_unchecked(&mut self, x: usize, y: usize) -> usize {
        let a = self.find_unchecked(x);
        let b = self.find_unchecked(y);
        if a == b {
            return a;
        }
        let (keep, absorb) = if self.size[a] > self.size[b] || (self.size[a] == self.size[b] && a < b) {
            (a, b)
        } else {
            (b, a)
        };
        self.parent[absorb] = keep;
        self.size[keep] += self.size[absorb];
        self.components -= 1;
        keep
    }

    /// Size of the set containing `x`.
    pub fn set_size(&mut self, x: usize) -> Result<usize> {
        let root = self.find(x)?;
        Ok(self.size[root])
    }

    pub fn same_set(&mut self, x: usize, y: usize) -> Result<bool> {
        Ok(self.find(x)? == self.find(y)?)
    }

    fn check(&self, x: usize) -> Result<()> {
        if x < self.parent.len() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index: x,
                len: self.parent.len(),
            })
        }
    }
}
