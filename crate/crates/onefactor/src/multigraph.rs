//! Loopless multigraph with stable edge ids.
//!
//! Parallel edges are stored as distinct edges with their own ids, because
//! the coloring machinery must assign them different colors. Subgraph views
//! (`induced`, `cross`) keep the original ids, so a coloring built on a view
//! can be transferred to the host graph without translation.
//!
//! ```
//! use onefactor::multigraph::Multigraph;
//!
//! let mut g = Multigraph::empty(4);
//! g.add_edges(0, 1, 3).unwrap(); // three parallel edges
//! g.add_edge(2, 3).unwrap();
//! assert_eq!(g.pair_multiplicity(0, 1), 3);
//! assert_eq!(g.multiplicity(), 3);
//! assert_eq!(g.degree(0), 3);
//! assert!(g.add_edge(1, 1).is_err()); // loops rejected
//! ```

use std::collections::BTreeMap;

use thiserror::Error;

/// Identifier of a single edge. Stable across subgraph views.
pub type EdgeId = usize;

/// Identifier of a vertex. Vertices are dense integers `0..num_vertices`.
pub type VertexId = usize;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("loop edge {0}-{0} rejected")]
    LoopEdge(VertexId),
    #[error("vertex {0} out of range (graph has {1} vertices)")]
    VertexOutOfRange(VertexId, usize),
    #[error("vertex sets must be disjoint and cover the graph")]
    BadBipartition,
}

/// An ordered set of vertex ids, all within the range of some host graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexSet {
    members: Vec<VertexId>,
}

impl VertexSet {
    /// Builds a set from arbitrary ids; sorts and deduplicates.
    pub fn new(mut members: Vec<VertexId>) -> Self {
        members.sort_unstable();
        members.dedup();
        VertexSet { members }
    }

    pub fn members(&self) -> &[VertexId] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.members.binary_search(&v).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.members.iter().copied()
    }
}

impl FromIterator<VertexId> for VertexSet {
    fn from_iter<T: IntoIterator<Item = VertexId>>(iter: T) -> Self {
        VertexSet::new(iter.into_iter().collect())
    }
}

/// Loopless multigraph over vertices `0..num_vertices`.
#[derive(Debug, Clone)]
pub struct Multigraph {
    num_vertices: usize,
    next_edge_id: EdgeId,
    endpoints: BTreeMap<EdgeId, (VertexId, VertexId)>,
    adj: Vec<Vec<(VertexId, EdgeId)>>,
}

impl Multigraph {
    /// An edgeless graph on `num_vertices` vertices.
    pub fn empty(num_vertices: usize) -> Self {
        Multigraph {
            num_vertices,
            next_edge_id: 0,
            endpoints: BTreeMap::new(),
            adj: vec![Vec::new(); num_vertices],
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_edges(&self) -> usize {
        self.endpoints.len()
    }

    fn check_vertex(&self, v: VertexId) -> Result<(), GraphError> {
        if v >= self.num_vertices {
            return Err(GraphError::VertexOutOfRange(v, self.num_vertices));
        }
        Ok(())
    }

    /// Adds `count` parallel edges between `u` and `v`, returning the new ids.
    pub fn add_edges(
        &mut self,
        u: VertexId,
        v: VertexId,
        count: usize,
    ) -> Result<Vec<EdgeId>, GraphError> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if u == v {
            return Err(GraphError::LoopEdge(u));
        }
        let mut ids = Vec::with_capacity(count);
        for _ in 0..count {
            let id = self.next_edge_id;
            self.next_edge_id += 1;
            self.endpoints.insert(id, (u, v));
            self.adj[u].push((v, id));
            self.adj[v].push((u, id));
            ids.push(id);
        }
        Ok(ids)
    }

    pub fn add_edge(&mut self, u: VertexId, v: VertexId) -> Result<EdgeId, GraphError> {
        Ok(self.add_edges(u, v, 1)?[0])
    }

    /// Endpoints of an edge, or `None` for an unknown id.
    pub fn endpoints(&self, e: EdgeId) -> Option<(VertexId, VertexId)> {
        self.endpoints.get(&e).copied()
    }

    /// Given one endpoint of `e`, returns the other.
    pub fn other_endpoint(&self, e: EdgeId, v: VertexId) -> Option<VertexId> {
        let (a, b) = self.endpoints(e)?;
        if v == a {
            Some(b)
        } else if v == b {
            Some(a)
        } else {
            None
        }
    }

    /// Edges in ascending id order.
    pub fn edges(&self) -> impl Iterator<Item = (EdgeId, VertexId, VertexId)> + '_ {
        self.endpoints.iter().map(|(&e, &(u, v))| (e, u, v))
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.endpoints.keys().copied()
    }

    pub fn contains_edge(&self, e: EdgeId) -> bool {
        self.endpoints.contains_key(&e)
    }

    /// Incident `(neighbor, edge)` pairs of `v` in insertion order.
    pub fn incident(&self, v: VertexId) -> &[(VertexId, EdgeId)] {
        &self.adj[v]
    }

    /// Number of edges incident with `v` (parallel edges each count).
    pub fn degree(&self, v: VertexId) -> usize {
        self.adj[v].len()
    }

    /// Number of edges joining `v` to vertices of `s`.
    pub fn degree_into(&self, v: VertexId, s: &VertexSet) -> usize {
        self.adj[v].iter().filter(|(w, _)| s.contains(*w)).count()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.num_vertices).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    pub fn min_degree(&self) -> usize {
        (0..self.num_vertices).map(|v| self.degree(v)).min().unwrap_or(0)
    }

    /// Number of parallel edges between `u` and `v`.
    pub fn pair_multiplicity(&self, u: VertexId, v: VertexId) -> usize {
        if self.degree(u) <= self.degree(v) {
            self.adj[u].iter().filter(|(w, _)| *w == v).count()
        } else {
            self.adj[v].iter().filter(|(w, _)| *w == u).count()
        }
    }

    /// Maximum size of a set of parallel edges; 0 for an edgeless graph.
    pub fn multiplicity(&self) -> usize {
        let mut counts: BTreeMap<(VertexId, VertexId), usize> = BTreeMap::new();
        for (_, u, v) in self.edges() {
            let key = (u.min(v), u.max(v));
            *counts.entry(key).or_insert(0) += 1;
        }
        counts.values().copied().max().unwrap_or(0)
    }

    /// Aggregated pair multiplicities, keyed by `(min, max)` endpoint.
    pub fn pair_multiplicities(&self) -> BTreeMap<(VertexId, VertexId), usize> {
        let mut counts = BTreeMap::new();
        for (_, u, v) in self.edges() {
            *counts.entry((u.min(v), u.max(v))).or_insert(0) += 1;
        }
        counts
    }

    /// `Some(d)` if every vertex has degree `d`, else `None`.
    pub fn is_regular(&self) -> Option<usize> {
        let mut degrees = (0..self.num_vertices).map(|v| self.degree(v));
        let first = degrees.next()?;
        if degrees.all(|d| d == first) {
            Some(first)
        } else {
            None
        }
    }

    /// Subgraph keeping exactly the edges with both ends in `s`.
    /// Vertex range and edge ids are preserved.
    pub fn induced(&self, s: &VertexSet) -> Multigraph {
        let mut sub = Multigraph::empty(self.num_vertices);
        sub.next_edge_id = self.next_edge_id;
        for (e, u, v) in self.edges() {
            if s.contains(u) && s.contains(v) {
                sub.endpoints.insert(e, (u, v));
                sub.adj[u].push((v, e));
                sub.adj[v].push((u, e));
            }
        }
        sub
    }

    /// Subgraph keeping exactly the edges with one end in `a` and one in `b`.
    /// `a` and `b` must be disjoint and cover the vertex range.
    pub fn cross(&self, a: &VertexSet, b: &VertexSet) -> Result<Multigraph, GraphError> {
        if a.len() + b.len() != self.num_vertices || a.iter().any(|v| b.contains(v)) {
            return Err(GraphError::BadBipartition);
        }
        for v in a.iter().chain(b.iter()) {
            self.check_vertex(v)?;
        }
        let mut sub = Multigraph::empty(self.num_vertices);
        sub.next_edge_id = self.next_edge_id;
        for (e, u, v) in self.edges() {
            if a.contains(u) != a.contains(v) {
                sub.endpoints.insert(e, (u, v));
                sub.adj[u].push((v, e));
                sub.adj[v].push((u, e));
            }
        }
        Ok(sub)
    }

    /// Subgraph keeping exactly the listed edges, ids preserved.
    /// Unknown ids are ignored.
    pub fn subgraph_of_edges<I: IntoIterator<Item = EdgeId>>(&self, ids: I) -> Multigraph {
        let mut sub = Multigraph::empty(self.num_vertices);
        sub.next_edge_id = self.next_edge_id;
        for e in ids {
            if let Some((u, v)) = self.endpoints(e) {
                sub.endpoints.insert(e, (u, v));
                sub.adj[u].push((v, e));
                sub.adj[v].push((u, e));
            }
        }
        sub
    }

    /// Removes an edge by id. Returns its endpoints if it existed.
    pub fn remove_edge(&mut self, e: EdgeId) -> Option<(VertexId, VertexId)> {
        let (u, v) = self.endpoints.remove(&e)?;
        self.adj[u].retain(|&(_, id)| id != e);
        self.adj[v].retain(|&(_, id)| id != e);
        Some((u, v))
    }

    /// The complete graph on `n` vertices.
    pub fn complete(n: usize) -> Multigraph {
        let mut g = Multigraph::empty(n);
        for u in 0..n {
            for v in (u + 1)..n {
                g.add_edge(u, v).expect("no loops in complete graph");
            }
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_parallel_edges() {
        let mut g = Multigraph::empty(2);
        g.add_edges(0, 1, 3).unwrap();
        assert_eq!(g.pair_multiplicity(0, 1), 3);
        assert_eq!(g.multiplicity(), 3);
        assert_eq!(g.num_edges(), 3);
    }

    #[test]
    fn loops_rejected() {
        let mut g = Multigraph::empty(2);
        assert_eq!(g.add_edges(0, 0, 1), Err(GraphError::LoopEdge(0)));
    }

    #[test]
    fn out_of_range_rejected() {
        let mut g = Multigraph::empty(2);
        assert!(matches!(
            g.add_edge(0, 5),
            Err(GraphError::VertexOutOfRange(5, 2))
        ));
    }

    #[test]
    fn complete_graph_degrees() {
        let g = Multigraph::complete(4);
        for v in 0..4 {
            assert_eq!(g.degree(v), 3);
        }
        assert_eq!(g.is_regular(), Some(3));
        assert_eq!(g.multiplicity(), 1);
    }

    #[test]
    fn path_not_regular() {
        let mut g = Multigraph::empty(3);
        g.add_edge(0, 1).unwrap();
        g.add_edge(1, 2).unwrap();
        assert_eq!(g.is_regular(), None);
    }

    #[test]
    fn edgeless_multiplicity_zero() {
        assert_eq!(Multigraph::empty(4).multiplicity(), 0);
    }

    #[test]
    fn induced_keeps_ids() {
        let g = Multigraph::complete(4);
        let s = VertexSet::new(vec![0, 1]);
        let sub = g.induced(&s);
        assert_eq!(sub.num_edges(), 1);
        let (e, u, v) = sub.edges().next().unwrap();
        assert_eq!((u, v), (0, 1));
        assert_eq!(g.endpoints(e), Some((0, 1)));
    }

    #[test]
    fn three_way_edge_split() {
        let g = Multigraph::complete(6);
        let a = VertexSet::new(vec![0, 1, 2]);
        let b = VertexSet::new(vec![3, 4, 5]);
        let ga = g.induced(&a);
        let gb = g.induced(&b);
        let c = g.cross(&a, &b).unwrap();
        assert_eq!(ga.num_edges() + gb.num_edges() + c.num_edges(), g.num_edges());
        let mut ids: Vec<EdgeId> = ga.edge_ids().chain(gb.edge_ids()).chain(c.edge_ids()).collect();
        ids.sort_unstable();
        let all: Vec<EdgeId> = g.edge_ids().collect();
        assert_eq!(ids, all);
    }

    #[test]
    fn cross_rejects_bad_parts() {
        let g = Multigraph::complete(4);
        let a = VertexSet::new(vec![0, 1]);
        let overlapping = VertexSet::new(vec![1, 2, 3]);
        assert!(g.cross(&a, &overlapping).is_err());
        let short = VertexSet::new(vec![2]);
        assert!(g.cross(&a, &short).is_err());
    }

    #[test]
    fn degree_split_identity() {
        let mut g = Multigraph::empty(6);
        g.add_edges(0, 3, 2).unwrap();
        g.add_edge(0, 1).unwrap();
        g.add_edge(2, 5).unwrap();
        let a = VertexSet::new(vec![0, 1, 2]);
        let b = VertexSet::new(vec![3, 4, 5]);
        for v in 0..6 {
            assert_eq!(g.degree(v), g.degree_into(v, &a) + g.degree_into(v, &b));
        }
    }
}
