//! Random hypergraph process: union-find components with excess bookkeeping.
//!
//! Each component root carries its vertex count `r`, hyperedge count `h`
//! and edge weight `Σ (|e| − 1)`. The excess of a component is
//! `Σ (|e| − 1) − r`; connectivity forces it to be at least `−1`, with
//! equality exactly for hypertrees (isolated vertices included).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HyperError {
    #[error("vertex {vertex} out of range for n = {n}")]
    OutOfRange { vertex: u32, n: usize },
    #[error("hyperedge repeats vertex {0}")]
    DuplicateVertex(u32),
    #[error("hyperedges need at least two vertices")]
    TooSmall,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentKind {
    /// Excess −1.
    Hypertree,
    /// Excess 0.
    Unicyclic,
    /// Excess > 0.
    Complex,
}

impl ComponentKind {
    pub fn from_excess(excess: i64) -> Self {
        match excess {
            i64::MIN..=-1 => ComponentKind::Hypertree,
            0 => ComponentKind::Unicyclic,
            _ => ComponentKind::Complex,
        }
    }
}

/// Construction options.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct HyperOptions {
    /// Keep full vertex lists of every hyperedge (small-n audits only).
    pub full_edge_log: bool,
    /// Vertices whose degree `Σ (|e| − 1)` is tracked. Empty means vertex 0.
    pub watch: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HyperSnapshot {
    pub components: usize,
    pub largest: u32,
    /// `h ↦` number of hypertree components with `h` hyperedges.
    pub census: BTreeMap<u32, u64>,
    /// `j ↦ U_j`, hyperedges of size `j` inside hypertree components.
    pub good_edges: BTreeMap<u32, u64>,
}

#[derive(Debug, Clone)]
pub struct HyperComponents {
    parent: Vec<u32>,
    rank: Vec<u8>,
    vertex_count: Vec<u32>,
    edge_count: Vec<u32>,
    weight_sum: Vec<u64>,
    components: usize,
    largest: u32,
    /// `(size, representative vertex)` per hyperedge.
    edge_log: Vec<(u32, u32)>,
    full_log: Option<Vec<Vec<u32>>>,
    /// Sorted by vertex.
    watch: Vec<(u32, u64)>,
}

impl HyperComponents {
    pub fn new(n: usize) -> Self {
        Self::with_options(n, HyperOptions::default())
    }

    pub fn with_options(n: usize, opts: HyperOptions) -> Self {
        let mut watch: Vec<(u32, u64)> = if opts.watch.is_empty() {
            vec![(0, 0)]
        } else {
            opts.watch.iter().map(|&v| (v, 0)).collect()
        };
        watch.sort_unstable();
        watch.dedup();
        watch.retain(|&(v, _)| (v as usize) < n);
        Self {
            parent: (0..n as u32).collect(),
            rank: vec![0; n],
            vertex_count: vec![1; n],
            edge_count: vec![0; n],
            weight_sum: vec![0; n],
            components: n,
            largest: u32::from(n > 0),
            edge_log: Vec::new(),
            full_log: opts.full_edge_log.then(Vec::new),
            watch,
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    /// `N̄`, the number of components.
    pub fn components(&self) -> usize {
        self.components
    }

    /// Size of the largest component.
    pub fn largest(&self) -> u32 {
        self.largest
    }

    pub fn edge_count(&self) -> usize {
        self.edge_log.len()
    }

    /// Root lookup with path halving.
    pub fn find(&mut self, v: u32) -> u32 {
        let mut x = v as usize;
        while self.parent[x] as usize != x {
            let gp = self.parent[self.parent[x] as usize];
            self.parent[x] = gp;
            x = gp as usize;
        }
        x as u32
    }

    /// Root lookup without mutation, for read-only queries.
    pub fn root(&self, v: u32) -> u32 {
        let mut x = v;
        while self.parent[x as usize] != x {
            x = self.parent[x as usize];
        }
        x
    }

    fn union_roots(&mut self, a: u32, b: u32) -> u32 {
        let (a, b) = (a as usize, b as usize);
        let (keep, drop) = match self.rank[a].cmp(&self.rank[b]) {
            std::cmp::Ordering::Less => (b, a),
            std::cmp::Ordering::Greater => (a, b),
            std::cmp::Ordering::Equal => {
                self.rank[a] += 1;
                (a, b)
            }
        };
        self.parent[drop] = keep as u32;
        self.vertex_count[keep] += self.vertex_count[drop];
        self.edge_count[keep] += self.edge_count[drop];
        self.weight_sum[keep] += self.weight_sum[drop];
        self.components -= 1;
        self.largest = self.largest.max(self.vertex_count[keep]);
        keep as u32
    }

    /// Add the hyperedge on `vertices`; returns how many components were merged away.
    pub fn add_hyperedge(&mut self, vertices: &[u32]) -> Result<usize, HyperError> {
        if vertices.len() < 2 {
            return Err(HyperError::TooSmall);
        }
        let n = self.len();
        for (a, &v) in vertices.iter().enumerate() {
            if v as usize >= n {
                return Err(HyperError::OutOfRange { vertex: v, n });
            }
            if vertices[..a].contains(&v) {
                return Err(HyperError::DuplicateVertex(v));
            }
        }
        let before = self.components;
        let mut root = self.find(vertices[0]);
        for &v in &vertices[1..] {
            let r = self.find(v);
            if r != root {
                root = self.union_roots(root, r);
            }
        }
        let weight = vertices.len() as u64 - 1;
        self.edge_count[root as usize] += 1;
        self.weight_sum[root as usize] += weight;
        self.edge_log.push((vertices.len() as u32, vertices[0]));
        if let Some(log) = self.full_log.as_mut() {
            log.push(vertices.to_vec());
        }
        for &v in vertices {
            if let Ok(pos) = self.watch.binary_search_by_key(&v, |&(w, _)| w) {
                self.watch[pos].1 += weight;
            }
        }
        Ok(before - self.components)
    }

    /// Excess of the component containing `v`.
    pub fn excess(&self, v: u32) -> i64 {
        let r = self.root(v) as usize;
        self.weight_sum[r] as i64 - i64::from(self.vertex_count[r])
    }

    pub fn classify(&self, v: u32) -> Result<ComponentKind, HyperError> {
        if v as usize >= self.len() {
            return Err(HyperError::OutOfRange {
                vertex: v,
                n: self.len(),
            });
        }
        Ok(ComponentKind::from_excess(self.excess(v)))
    }

    /// `(vertices, hyperedges, excess)` of the component containing `v`.
    pub fn component_stats(&self, v: u32) -> (u32, u32, i64) {
        let r = self.root(v) as usize;
        (
            self.vertex_count[r],
            self.edge_count[r],
            self.weight_sum[r] as i64 - i64::from(self.vertex_count[r]),
        )
    }

    /// Degree `Σ (|e| − 1)` of a watched vertex; `None` if `v` is not watched.
    pub fn degree(&self, v: u32) -> Option<u64> {
        self.watch
            .binary_search_by_key(&v, |&(w, _)| w)
            .ok()
            .map(|pos| self.watch[pos].1)
    }

    pub fn watched(&self) -> impl Iterator<Item = (u32, u64)> + '_ {
        self.watch.iter().copied()
    }

    /// Full vertex lists, when the full edge log is enabled.
    pub fn edges(&self) -> Option<&[Vec<u32>]> {
        self.full_log.as_deref()
    }

    fn roots(&self) -> impl Iterator<Item = usize> + '_ {
        self.parent
            .iter()
            .enumerate()
            .filter(|(v, &p)| p as usize == *v)
            .map(|(v, _)| v)
    }

    /// `h ↦` number of hypertree components with `h` hyperedges.
    pub fn hypertree_census(&self) -> BTreeMap<u32, u64> {
        let mut census = BTreeMap::new();
        for r in self.roots() {
            if self.weight_sum[r] as i64 - i64::from(self.vertex_count[r]) == -1 {
                *census.entry(self.edge_count[r]).or_insert(0) += 1;
            }
        }
        census
    }

    /// `j ↦ U_j`: hyperedges of size `j` whose component is a hypertree.
    pub fn good_edge_counts(&self) -> BTreeMap<u32, u64> {
        let mut counts = BTreeMap::new();
        for &(size, rep) in &self.edge_log {
            if self.excess(rep) == -1 {
                *counts.entry(size).or_insert(0) += 1;
            }
        }
        counts
    }

    pub fn snapshot(&self) -> HyperSnapshot {
        HyperSnapshot {
            components: self.components,
            largest: self.largest,
            census: self.hypertree_census(),
            good_edges: self.good_edge_counts(),
        }
    }

    /// Check the cached aggregates against a from-scratch recount of the roots.
    pub fn audit(&self) -> Result<(), String> {
        let n = self.len();
        let mut count = vec![0u32; n];
        for v in 0..n as u32 {
            count[self.root(v) as usize] += 1;
        }
        let mut roots = 0;
        let mut largest = 0;
        for r in self.roots() {
            roots += 1;
            if count[r] != self.vertex_count[r] {
                return Err(format!("root {r}: vertex count {} vs {}", self.vertex_count[r], count[r]));
            }
            largest = largest.max(count[r]);
            let excess = self.weight_sum[r] as i64 - i64::from(self.vertex_count[r]);
            if excess < -1 {
                return Err(format!("root {r}: excess {excess} below -1"));
            }
        }
        if roots != self.components {
            return Err(format!("{roots} roots but N̄ = {}", self.components));
        }
        if largest != self.largest {
            return Err(format!("largest {} but recount {largest}", self.largest));
        }
        let weights: u64 = self.edge_log.iter().map(|&(s, _)| u64::from(s) - 1).sum();
        let cached: u64 = self.roots().map(|r| self.weight_sum[r]).sum();
        if weights != cached {
            return Err("edge weights do not add up".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_hyperedge_is_hypertree() {
        let mut h = HyperComponents::new(3);
        assert_eq!(h.add_hyperedge(&[0, 1, 2]).unwrap(), 2);
        assert_eq!(h.components(), 1);
        assert_eq!(h.excess(0), -1);
        assert_eq!(h.classify(1).unwrap(), ComponentKind::Hypertree);
    }

    #[test]
    fn second_overlapping_edge_is_unicyclic() {
        let mut h = HyperComponents::new(4);
        h.add_hyperedge(&[0, 1, 2]).unwrap();
        h.add_hyperedge(&[1, 2, 3]).unwrap();
        assert_eq!(h.component_stats(3), (4, 2, 0));
        assert_eq!(h.classify(0).unwrap(), ComponentKind::Unicyclic);
    }

    #[test]
    fn triangle_of_edges() {
        let mut h = HyperComponents::new(3);
        for e in [[0, 1], [1, 2], [0, 2]] {
            h.add_hyperedge(&e).unwrap();
        }
        assert_eq!(h.excess(2), 0);
        assert_eq!(h.good_edge_counts().get(&2), None);
        h.add_hyperedge(&[0, 1]).unwrap();
        assert_eq!(h.classify(0).unwrap(), ComponentKind::Complex);
    }

    #[test]
    fn two_triples_sharing_two_vertices() {
        let mut h = HyperComponents::new(6);
        h.add_hyperedge(&[0, 1, 2]).unwrap();
        h.add_hyperedge(&[0, 1, 3]).unwrap();
        assert_eq!(h.classify(3).unwrap(), ComponentKind::Unicyclic);
        assert_eq!(h.classify(5).unwrap(), ComponentKind::Hypertree);
    }

    #[test]
    fn census_and_good_edges() {
        let h = HyperComponents::new(7);
        assert_eq!(h.hypertree_census(), BTreeMap::from([(0, 7)]));
        let mut h = HyperComponents::new(5);
        h.add_hyperedge(&[0, 1, 2]).unwrap();
        assert_eq!(h.hypertree_census(), BTreeMap::from([(0, 2), (1, 1)]));
        assert_eq!(h.good_edge_counts(), BTreeMap::from([(3, 1)]));
    }

    #[test]
    fn degrees_of_watched_vertices() {
        let mut h = HyperComponents::with_options(
            5,
            HyperOptions {
                full_edge_log: true,
                watch: vec![0, 4],
            },
        );
        assert_eq!(h.degree(0), Some(0));
        h.add_hyperedge(&[0, 1, 2]).unwrap();
        h.add_hyperedge(&[0, 3]).unwrap();
        assert_eq!(h.degree(0), Some(3));
        assert_eq!(h.degree(4), Some(0));
        assert_eq!(h.degree(1), None);
        assert_eq!(h.edges().unwrap().len(), 2);
    }

    #[test]
    fn snapshot_extremes() {
        let mut h = HyperComponents::new(6);
        let s = h.snapshot();
        assert_eq!((s.components, s.largest), (6, 1));
        h.add_hyperedge(&[0, 1, 2, 3, 4, 5]).unwrap();
        let s = h.snapshot();
        assert_eq!((s.components, s.largest), (1, 6));
        h.audit().unwrap();
    }

    #[test]
    fn rejects_bad_edges() {
        let mut h = HyperComponents::new(3);
        assert_eq!(h.add_hyperedge(&[1]), Err(HyperError::TooSmall));
        assert_eq!(h.add_hyperedge(&[1, 1]), Err(HyperError::DuplicateVertex(1)));
        assert!(matches!(
            h.add_hyperedge(&[0, 3]),
            Err(HyperError::OutOfRange { .. })
        ));
        assert!(h.classify(9).is_err());
    }
}
