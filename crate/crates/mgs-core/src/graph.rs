// SPDX-License-Identifier: Apache-2.0

//! Immutable directed graphs with sorted successor lists.
//!
//! Vertices are dense 1-based `u32` ids; 0 is never a valid vertex, which
//! keeps every id, gap and distance in the positive domain the integer codes
//! cover. Duplicate edges are removed at ingestion and graphs never change
//! after construction.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand_core::RngCore;

pub type Vertex = u32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphError {
    VertexOutOfRange { v: u64, n: u32 },
    Parse { line: usize, what: &'static str },
    EmptyEdgeList,
    EmptySubset,
    SubsetNotAscending,
    NotBijective,
    LengthMismatch { expected: usize, got: usize },
    ClustersNotDense,
}

impl fmt::Display for GraphError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphError::VertexOutOfRange { v, n } => {
                write!(f, "vertex {v} outside 1..={n}")
            }
            GraphError::Parse { line, what } => write!(f, "edge list line {line}: {what}"),
            GraphError::EmptyEdgeList => write!(f, "edge list contains no edges"),
            GraphError::EmptySubset => write!(f, "induced subgraph needs a nonempty vertex set"),
            GraphError::SubsetNotAscending => {
                write!(f, "induced subgraph members must be strictly ascending")
            }
            GraphError::NotBijective => write!(f, "permutation is not a bijection on 1..=n"),
            GraphError::LengthMismatch { expected, got } => {
                write!(f, "expected {expected} entries, got {got}")
            }
            GraphError::ClustersNotDense => write!(f, "cluster ids must be dense 0..k-1"),
        }
    }
}

impl core::error::Error for GraphError {}

/// CSR adjacency; `offsets` has n+1 entries and `targets` holds the sorted,
/// deduplicated successor lists back to back.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedGraph {
    offsets: Vec<usize>,
    targets: Vec<Vertex>,
}

impl DirectedGraph {
    pub fn from_edges(
        n: u32,
        edges: impl IntoIterator<Item = (Vertex, Vertex)>,
    ) -> Result<Self, GraphError> {
        let mut lists: Vec<Vec<Vertex>> = vec![Vec::new(); n as usize];
        for (u, v) in edges {
            if u == 0 || u > n {
                return Err(GraphError::VertexOutOfRange { v: u64::from(u), n });
            }
            if v == 0 || v > n {
                return Err(GraphError::VertexOutOfRange { v: u64::from(v), n });
            }
            lists[(u - 1) as usize].push(v);
        }
        Ok(Self::from_lists_unchecked(lists))
    }

    /// `lists[i]` holds the successors of vertex i+1 in any order.
    pub fn from_lists(n: u32, lists: Vec<Vec<Vertex>>) -> Result<Self, GraphError> {
        if lists.len() != n as usize {
            return Err(GraphError::LengthMismatch { expected: n as usize, got: lists.len() });
        }
        for list in &lists {
            for &v in list {
                if v == 0 || v > n {
                    return Err(GraphError::VertexOutOfRange { v: u64::from(v), n });
                }
            }
        }
        Ok(Self::from_lists_unchecked(lists))
    }

    fn from_lists_unchecked(mut lists: Vec<Vec<Vertex>>) -> Self {
        let mut offsets = Vec::with_capacity(lists.len() + 1);
        let mut targets = Vec::new();
        offsets.push(0);
        for list in &mut lists {
            list.sort_unstable();
            list.dedup();
            targets.extend_from_slice(list);
            offsets.push(targets.len());
        }
        Self { offsets, targets }
    }

    /// Parses whitespace-separated `src dst` pairs, one edge per line.
    /// Lines starting with `#` are comments. Arbitrary ids are remapped to
    /// dense 1-based vertices in first-seen order; the returned table maps
    /// each vertex (index id-1) back to its original label.
    pub fn parse_edge_list(text: &str) -> Result<(Self, Vec<u64>), GraphError> {
        let mut labels: Vec<u64> = Vec::new();
        let mut index: BTreeMap<u64, Vertex> = BTreeMap::new();
        let mut edges: Vec<(Vertex, Vertex)> = Vec::new();
        let mut intern = |label: u64, labels: &mut Vec<u64>| -> Vertex {
            *index.entry(label).or_insert_with(|| {
                labels.push(label);
                labels.len() as Vertex
            })
        };
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_ascii_whitespace();
            let (a, b) = match (it.next(), it.next(), it.next()) {
                (Some(a), Some(b), None) => (a, b),
                _ => return Err(GraphError::Parse { line: lineno + 1, what: "expected two ids" }),
            };
            let a: u64 = a
                .parse()
                .map_err(|_| GraphError::Parse { line: lineno + 1, what: "bad source id" })?;
            let b: u64 = b
                .parse()
                .map_err(|_| GraphError::Parse { line: lineno + 1, what: "bad target id" })?;
            let a = intern(a, &mut labels);
            let b = intern(b, &mut labels);
            edges.push((a, b));
        }
        if edges.is_empty() {
            return Err(GraphError::EmptyEdgeList);
        }
        let n = labels.len() as u32;
        Ok((Self::from_edges(n, edges)?, labels))
    }

    pub fn vertex_count(&self) -> u32 {
        (self.offsets.len() - 1) as u32
    }

    pub fn edge_count(&self) -> u64 {
        self.targets.len() as u64
    }

    pub fn successors(&self, v: Vertex) -> &[Vertex] {
        let i = (v - 1) as usize;
        &self.targets[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn out_degree(&self, v: Vertex) -> u32 {
        let i = (v - 1) as usize;
        (self.offsets[i + 1] - self.offsets[i]) as u32
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        1..=self.vertex_count()
    }

    /// Adds the reverse of every edge; used before community detection.
    pub fn symmetrize(&self) -> Self {
        let n = self.vertex_count();
        let mut lists: Vec<Vec<Vertex>> = vec![Vec::new(); n as usize];
        for v in self.vertices() {
            for &s in self.successors(v) {
                lists[(v - 1) as usize].push(s);
                lists[(s - 1) as usize].push(v);
            }
        }
        Self::from_lists_unchecked(lists)
    }

    /// Restriction to `members` (strictly ascending global ids). Local ids
    /// are dense 1..=|members| in the same order; the mapping back is the
    /// members slice itself.
    pub fn induced_subgraph(&self, members: &[Vertex]) -> Result<Self, GraphError> {
        if members.is_empty() {
            return Err(GraphError::EmptySubset);
        }
        if !members.windows(2).all(|w| w[0] < w[1]) {
            return Err(GraphError::SubsetNotAscending);
        }
        let n = self.vertex_count();
        if let Some(&last) = members.last() {
            if last > n || members[0] == 0 {
                return Err(GraphError::VertexOutOfRange { v: u64::from(last), n });
            }
        }
        let mut local: BTreeMap<Vertex, Vertex> = BTreeMap::new();
        for (i, &g) in members.iter().enumerate() {
            local.insert(g, i as Vertex + 1);
        }
        let mut lists: Vec<Vec<Vertex>> = vec![Vec::new(); members.len()];
        for (i, &g) in members.iter().enumerate() {
            for s in self.successors(g) {
                if let Some(&ls) = local.get(s) {
                    lists[i].push(ls);
                }
            }
        }
        Ok(Self::from_lists_unchecked(lists))
    }

    /// Members of the largest strongly connected component, ascending; ties
    /// between equal-sized components go to the one with the smallest id.
    pub fn largest_scc(&self) -> Vec<Vertex> {
        let n = self.vertex_count() as usize;
        if n == 0 {
            return Vec::new();
        }
        // Iterative Tarjan. index/low are 1-based discovery numbers, 0 = new.
        let mut index = vec![0u32; n];
        let mut low = vec![0u32; n];
        let mut on_stack = vec![false; n];
        let mut stack: Vec<u32> = Vec::new();
        let mut next_index = 1u32;
        let mut best: Vec<Vertex> = Vec::new();
        // Call frames: (vertex, position in its successor list).
        let mut frames: Vec<(u32, usize)> = Vec::new();
        for root in 0..n as u32 {
            if index[root as usize] != 0 {
                continue;
            }
            frames.push((root, 0));
            index[root as usize] = next_index;
            low[root as usize] = next_index;
            next_index += 1;
            stack.push(root);
            on_stack[root as usize] = true;
            while let Some(&mut (v, ref mut pos)) = frames.last_mut() {
                let succs = self.successors(v + 1);
                if *pos < succs.len() {
                    let w = succs[*pos] - 1;
                    *pos += 1;
                    if index[w as usize] == 0 {
                        index[w as usize] = next_index;
                        low[w as usize] = next_index;
                        next_index += 1;
                        stack.push(w);
                        on_stack[w as usize] = true;
                        frames.push((w, 0));
                    } else if on_stack[w as usize] {
                        low[v as usize] = low[v as usize].min(index[w as usize]);
                    }
                } else {
                    frames.pop();
                    if let Some(&mut (parent, _)) = frames.last_mut() {
                        low[parent as usize] = low[parent as usize].min(low[v as usize]);
                    }
                    if low[v as usize] == index[v as usize] {
                        let mut comp: Vec<Vertex> = Vec::new();
                        loop {
                            let w = stack.pop().unwrap();
                            on_stack[w as usize] = false;
                            comp.push(w + 1);
                            if w == v {
                                break;
                            }
                        }
                        comp.sort_unstable();
                        let better = comp.len() > best.len()
                            || (comp.len() == best.len()
                                && !best.is_empty()
                                && comp[0] < best[0]);
                        if best.is_empty() || better {
                            best = comp;
                        }
                    }
                }
            }
        }
        best
    }

    /// Relabels every vertex through `p`; successor lists are re-sorted under
    /// the new ids, so edge content is preserved exactly.
    pub fn apply_permutation(&self, p: &Permutation) -> Result<Self, GraphError> {
        let n = self.vertex_count();
        if p.len() != n {
            return Err(GraphError::LengthMismatch {
                expected: n as usize,
                got: p.len() as usize,
            });
        }
        let mut lists: Vec<Vec<Vertex>> = vec![Vec::new(); n as usize];
        for v in self.vertices() {
            let nv = p.forward(v);
            let list = &mut lists[(nv - 1) as usize];
            list.extend(self.successors(v).iter().map(|&s| p.forward(s)));
        }
        Ok(Self::from_lists_unchecked(lists))
    }

    pub fn degree_sum_check(&self) -> u64 {
        self.offsets[self.offsets.len() - 1] as u64
    }
}

use alloc::collections::BTreeMap;

/// Bijection on 1..=n stored as `forward[old-1] = new`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    forward: Vec<Vertex>,
}

impl Permutation {
    pub fn identity(n: u32) -> Self {
        Self { forward: (1..=n).collect() }
    }

    pub fn from_forward(forward: Vec<Vertex>) -> Result<Self, GraphError> {
        let n = forward.len() as u32;
        let mut seen = vec![false; forward.len()];
        for &v in &forward {
            if v == 0 || v > n || seen[(v - 1) as usize] {
                return Err(GraphError::NotBijective);
            }
            seen[(v - 1) as usize] = true;
        }
        Ok(Self { forward })
    }

    /// Seeded Fisher-Yates shuffle; identical output for identical seeds.
    pub fn random(n: u32, seed: u64) -> Self {
        use rand_core::SeedableRng;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
        let mut forward: Vec<Vertex> = (1..=n).collect();
        for i in (1..forward.len()).rev() {
            let j = rand_index(&mut rng, i + 1);
            forward.swap(i, j);
        }
        Self { forward }
    }

    pub fn len(&self) -> u32 {
        self.forward.len() as u32
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    pub fn forward(&self, v: Vertex) -> Vertex {
        self.forward[(v - 1) as usize]
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.forward.len()];
        for (i, &v) in self.forward.iter().enumerate() {
            inv[(v - 1) as usize] = i as Vertex + 1;
        }
        Self { forward: inv }
    }

    pub fn as_slice(&self) -> &[Vertex] {
        &self.forward
    }

    pub fn into_vec(self) -> Vec<Vertex> {
        self.forward
    }
}

/// Unbiased index in 0..bound via rejection sampling.
pub(crate) fn rand_index(rng: &mut impl RngCore, bound: usize) -> usize {
    debug_assert!(bound >= 1);
    let bound = bound as u64;
    let zone = u64::MAX - u64::MAX % bound;
    loop {
        let r = rng.next_u64();
        if r < zone {
            return (r % bound) as usize;
        }
    }
}

/// Assignment of every vertex to one of k clusters, ids dense 0..k-1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    cluster_of: Vec<u32>,
    k: u32,
}

impl Partition {
    /// Accepts arbitrary labels and compacts them to 0..k-1 in order of
    /// first appearance.
    pub fn from_labels(labels: &[u32]) -> Self {
        let mut remap: BTreeMap<u32, u32> = BTreeMap::new();
        let mut cluster_of = Vec::with_capacity(labels.len());
        let mut next = 0u32;
        for &l in labels {
            let id = *remap.entry(l).or_insert_with(|| {
                let id = next;
                next += 1;
                id
            });
            cluster_of.push(id);
        }
        Self { cluster_of, k: next }
    }

    pub fn from_dense(cluster_of: Vec<u32>, k: u32) -> Result<Self, GraphError> {
        let mut seen = vec![false; k as usize];
        for &c in &cluster_of {
            if c >= k {
                return Err(GraphError::ClustersNotDense);
            }
            seen[c as usize] = true;
        }
        if !seen.iter().all(|&s| s) {
            return Err(GraphError::ClustersNotDense);
        }
        Ok(Self { cluster_of, k })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn len(&self) -> u32 {
        self.cluster_of.len() as u32
    }

    pub fn is_empty(&self) -> bool {
        self.cluster_of.is_empty()
    }

    pub fn cluster_of(&self, v: Vertex) -> u32 {
        self.cluster_of[(v - 1) as usize]
    }

    pub fn sizes(&self) -> Vec<u32> {
        let mut sizes = vec![0u32; self.k as usize];
        for &c in &self.cluster_of {
            sizes[c as usize] += 1;
        }
        sizes
    }

    /// Members per cluster, each ascending.
    pub fn members(&self) -> Vec<Vec<Vertex>> {
        let mut m: Vec<Vec<Vertex>> = vec![Vec::new(); self.k as usize];
        for (i, &c) in self.cluster_of.iter().enumerate() {
            m[c as usize].push(i as Vertex + 1);
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_list_parses_dedups_and_remaps() {
        let text = "1 2\n1 3\n2 3\n# comment\n1 2\n";
        let (g, labels) = DirectedGraph::parse_edge_list(text).unwrap();
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.successors(1), &[2, 3]);
        assert_eq!(labels, &[1, 2, 3]);
    }

    #[test]
    fn edge_list_remap_is_first_seen_order() {
        let (g, labels) = DirectedGraph::parse_edge_list("10 7\n7 10\n").unwrap();
        assert_eq!(labels, &[10, 7]);
        assert_eq!(g.successors(1), &[2]);
        assert_eq!(g.successors(2), &[1]);
    }

    #[test]
    fn empty_edge_list_is_an_error() {
        assert_eq!(
            DirectedGraph::parse_edge_list("# nothing\n").unwrap_err(),
            GraphError::EmptyEdgeList
        );
    }

    #[test]
    fn malformed_line_reports_number() {
        let err = DirectedGraph::parse_edge_list("1 2\n3\n").unwrap_err();
        assert_eq!(err, GraphError::Parse { line: 2, what: "expected two ids" });
    }

    #[test]
    fn symmetrize_directed_cycle() {
        let g = DirectedGraph::from_edges(3, [(1, 2), (2, 3), (3, 1)]).unwrap();
        let s = g.symmetrize();
        assert_eq!(s.edge_count(), 6);
        assert_eq!(s.successors(1), &[2, 3]);
    }

    #[test]
    fn largest_scc_prefers_bigger_then_smaller_ids() {
        // 3-cycle plus isolated vertex.
        let g = DirectedGraph::from_edges(4, [(1, 2), (2, 3), (3, 1)]).unwrap();
        assert_eq!(g.largest_scc(), &[1, 2, 3]);
        // 3-cycle and 5-cycle: the 5-cycle wins.
        let g = DirectedGraph::from_edges(
            8,
            [(1, 2), (2, 3), (3, 1), (4, 5), (5, 6), (6, 7), (7, 8), (8, 4)],
        )
        .unwrap();
        assert_eq!(g.largest_scc(), &[4, 5, 6, 7, 8]);
        // DAG: all components are singletons; smallest id wins the tie.
        let g = DirectedGraph::from_edges(3, [(1, 2), (2, 3)]).unwrap();
        assert_eq!(g.largest_scc(), &[1]);
    }

    #[test]
    fn permutation_preserves_degree_multiset() {
        let g = DirectedGraph::from_edges(5, [(1, 2), (1, 3), (2, 3), (4, 1), (5, 5)]).unwrap();
        let p = Permutation::random(5, 9);
        let h = g.apply_permutation(&p).unwrap();
        let mut a: Vec<u32> = g.vertices().map(|v| g.out_degree(v)).collect();
        let mut b: Vec<u32> = h.vertices().map(|v| h.out_degree(v)).collect();
        a.sort_unstable();
        b.sort_unstable();
        assert_eq!(a, b);
        assert_eq!(g.edge_count(), h.edge_count());
        // Content is preserved: mapping back gives the original graph.
        let back = h.apply_permutation(&p.inverse()).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn non_bijective_permutation_rejected() {
        assert!(Permutation::from_forward(alloc::vec![1, 1, 3]).is_err());
        assert!(Permutation::from_forward(alloc::vec![1, 2, 4]).is_err());
    }

    #[test]
    fn induced_subgraph_keeps_internal_edges() {
        let g = DirectedGraph::from_edges(5, [(1, 2), (2, 4), (4, 1), (3, 4), (4, 5)]).unwrap();
        let sub = g.induced_subgraph(&[1, 2, 4]).unwrap();
        assert_eq!(sub.vertex_count(), 3);
        assert_eq!(sub.successors(1), &[2]);
        assert_eq!(sub.successors(2), &[3]);
        assert_eq!(sub.successors(3), &[1]);
        assert!(g.induced_subgraph(&[]).is_err());
        assert!(g.induced_subgraph(&[2, 1]).is_err());
    }

    #[test]
    fn partition_compacts_labels() {
        let p = Partition::from_labels(&[7, 7, 3, 7, 3]);
        assert_eq!(p.k(), 2);
        assert_eq!(p.cluster_of(1), 0);
        assert_eq!(p.cluster_of(3), 1);
        assert_eq!(p.sizes(), &[3, 2]);
        assert!(Partition::from_dense(alloc::vec![0, 2], 3).is_err());
    }

    #[test]
    fn seeded_permutations_reproduce() {
        assert_eq!(Permutation::random(50, 4).as_slice(), Permutation::random(50, 4).as_slice());
        assert_ne!(Permutation::random(50, 4).as_slice(), Permutation::random(50, 5).as_slice());
    }
}
