//! Partial proper edge-coloring state.
//!
//! A [`PartialColoring`] maps edges of a host graph to optional colors drawn
//! from a dense palette `0..palette_size`, and keeps a per-vertex incidence
//! index (vertex, color) -> edge. Properness is enforced on every mutation:
//! no two adjacent edges ever carry the same color.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::multigraph::{EdgeId, Multigraph, VertexId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ColoringError {
    #[error("edge {0} is not in the host graph")]
    UnknownEdge(EdgeId),
    #[error("color {0} outside palette of size {1}")]
    ColorOutOfPalette(usize, usize),
    #[error("color {color} already appears at vertex {vertex} on edge {conflicting_edge}")]
    Conflict {
        color: usize,
        vertex: VertexId,
        conflicting_edge: EdgeId,
    },
    #[error("edge {0} is not colored")]
    NotColored(EdgeId),
    #[error("invalid alternating path: {0}")]
    InvalidPath(String),
    #[error("coloring state inconsistent: {0}")]
    Inconsistent(String),
}

/// Partial proper edge-coloring of a host multigraph.
#[derive(Debug, Clone)]
pub struct PartialColoring<'g> {
    host: &'g Multigraph,
    palette_size: usize,
    assignment: BTreeMap<EdgeId, usize>,
    /// incidence[v][c] = the edge at v colored c, if any.
    incidence: Vec<Vec<Option<EdgeId>>>,
    class_sizes: Vec<usize>,
}

impl<'g> PartialColoring<'g> {
    /// A fresh all-uncolored coloring over `host` with the given palette.
    pub fn new(host: &'g Multigraph, palette_size: usize) -> Self {
        PartialColoring {
            host,
            palette_size,
            assignment: BTreeMap::new(),
            incidence: vec![vec![None; palette_size]; host.num_vertices()],
            class_sizes: vec![0; palette_size],
        }
    }

    pub fn host(&self) -> &'g Multigraph {
        self.host
    }

    pub fn palette_size(&self) -> usize {
        self.palette_size
    }

    /// Grows the palette to `new_size`. Shrinking is not supported.
    pub fn extend_palette(&mut self, new_size: usize) {
        if new_size <= self.palette_size {
            return;
        }
        for row in &mut self.incidence {
            row.resize(new_size, None);
        }
        self.class_sizes.resize(new_size, 0);
        self.palette_size = new_size;
    }

    pub fn color_of(&self, e: EdgeId) -> Option<usize> {
        self.assignment.get(&e).copied()
    }

    /// The edge at `v` colored `color`, if any.
    pub fn edge_at(&self, v: VertexId, color: usize) -> Option<EdgeId> {
        self.incidence[v][color]
    }

    /// True when no edge at `v` carries `color`.
    pub fn misses(&self, v: VertexId, color: usize) -> bool {
        self.incidence[v][color].is_none()
    }

    /// All palette colors with no incident edge at `v`.
    pub fn missing_colors(&self, v: VertexId) -> Vec<usize> {
        (0..self.palette_size).filter(|&c| self.misses(v, c)).collect()
    }

    pub fn colored_count(&self) -> usize {
        self.assignment.len()
    }

    /// True when every edge of the host is colored.
    pub fn is_total(&self) -> bool {
        self.assignment.len() == self.host.num_edges()
    }

    /// Colors edge `e` with `color`. Both endpoints must currently miss it.
    pub fn assign(&mut self, e: EdgeId, color: usize) -> Result<(), ColoringError> {
        let (u, v) = self.host.endpoints(e).ok_or(ColoringError::UnknownEdge(e))?;
        if color >= self.palette_size {
            return Err(ColoringError::ColorOutOfPalette(color, self.palette_size));
        }
        if let Some(prev) = self.assignment.get(&e) {
            return Err(ColoringError::Inconsistent(format!(
                "edge {e} already colored {prev}"
            )));
        }
        for w in [u, v] {
            if let Some(other) = self.incidence[w][color] {
                return Err(ColoringError::Conflict {
                    color,
                    vertex: w,
                    conflicting_edge: other,
                });
            }
        }
        self.assignment.insert(e, color);
        self.incidence[u][color] = Some(e);
        self.incidence[v][color] = Some(e);
        self.class_sizes[color] += 1;
        Ok(())
    }

    /// Removes the color of edge `e`, returning it.
    pub fn unassign(&mut self, e: EdgeId) -> Result<usize, ColoringError> {
        let (u, v) = self.host.endpoints(e).ok_or(ColoringError::UnknownEdge(e))?;
        let color = self.assignment.remove(&e).ok_or(ColoringError::NotColored(e))?;
        self.incidence[u][color] = None;
        self.incidence[v][color] = None;
        self.class_sizes[color] -= 1;
        Ok(color)
    }

    /// Edges currently colored `color`, in ascending id order.
    pub fn class_edges(&self, color: usize) -> Vec<EdgeId> {
        self.assignment
            .iter()
            .filter(|&(_, &c)| c == color)
            .map(|(&e, _)| e)
            .collect()
    }

    /// Size of every color class, indexed by color.
    pub fn class_sizes(&self) -> &[usize] {
        &self.class_sizes
    }

    /// Colored edges in ascending edge-id order.
    pub fn assignments(&self) -> impl Iterator<Item = (EdgeId, usize)> + '_ {
        self.assignment.iter().map(|(&e, &c)| (e, c))
    }

    /// Full consistency audit: assignment/incidence agree, properness holds,
    /// class sizes add up. Intended for tests and debug assertions.
    pub fn audit(&self) -> Result<(), ColoringError> {
        let mut sizes = vec![0usize; self.palette_size];
        for (&e, &c) in &self.assignment {
            if c >= self.palette_size {
                return Err(ColoringError::ColorOutOfPalette(c, self.palette_size));
            }
            let (u, v) = self.host.endpoints(e).ok_or(ColoringError::UnknownEdge(e))?;
            for w in [u, v] {
                if self.incidence[w][c] != Some(e) {
                    return Err(ColoringError::Inconsistent(format!(
                        "incidence[{w}][{c}] does not point back to edge {e}"
                    )));
                }
            }
            sizes[c] += 1;
        }
        for (v, row) in self.incidence.iter().enumerate() {
            for (c, slot) in row.iter().enumerate() {
                if let Some(e) = slot {
                    if self.assignment.get(e) != Some(&c) {
                        return Err(ColoringError::Inconsistent(format!(
                            "incidence[{v}][{c}] = {e} but edge not assigned that color"
                        )));
                    }
                }
            }
        }
        if sizes != self.class_sizes {
            return Err(ColoringError::Inconsistent(
                "class size cache out of date".into(),
            ));
        }
        Ok(())
    }

    /// Exchanges an alternating path: its two colored edges become uncolored
    /// and its three uncolored edges take the path color. Afterwards both
    /// path endpoints are covered by the color. Validated before any mutation.
    pub fn exchange(&mut self, path: &AlternatingPath) -> Result<(), ColoringError> {
        path.validate(self)?;
        let c = path.color;
        self.unassign(path.edges[1])?;
        self.unassign(path.edges[3])?;
        self.assign(path.edges[0], c)?;
        self.assign(path.edges[2], c)?;
        self.assign(path.edges[4], c)?;
        Ok(())
    }
}

/// A five-edge path whose first, third and fifth edges are uncolored and
/// whose second and fourth edges carry `color`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlternatingPath {
    pub vertices: [VertexId; 6],
    pub edges: [EdgeId; 5],
    pub color: usize,
}

impl AlternatingPath {
    /// Builds a path and validates it against the current coloring state.
    pub fn new(
        coloring: &PartialColoring,
        vertices: [VertexId; 6],
        edges: [EdgeId; 5],
        color: usize,
    ) -> Result<Self, ColoringError> {
        let path = AlternatingPath { vertices, edges, color };
        path.validate(coloring)?;
        Ok(path)
    }

    fn validate(&self, coloring: &PartialColoring) -> Result<(), ColoringError> {
        let host = coloring.host();
        let err = |msg: String| Err(ColoringError::InvalidPath(msg));
        for i in 0..6 {
            for j in (i + 1)..6 {
                if self.vertices[i] == self.vertices[j] {
                    return err(format!("vertex {} repeated", self.vertices[i]));
                }
            }
        }
        for (i, &e) in self.edges.iter().enumerate() {
            let (u, v) = host
                .endpoints(e)
                .ok_or(ColoringError::UnknownEdge(e))?;
            let (a, b) = (self.vertices[i], self.vertices[i + 1]);
            if (u, v) != (a, b) && (u, v) != (b, a) {
                return err(format!("edge {e} does not join vertices {a} and {b}"));
            }
            let got = coloring.color_of(e);
            let want_colored = i == 1 || i == 3;
            match (want_colored, got) {
                (true, Some(c)) if c == self.color => {}
                (true, other) => {
                    return err(format!(
                        "edge {e} must be colored {} but is {:?}",
                        self.color, other
                    ))
                }
                (false, None) => {}
                (false, Some(c)) => {
                    return err(format!("edge {e} must be uncolored but is colored {c}"))
                }
            }
        }
        for endpoint in [self.vertices[0], self.vertices[5]] {
            if !coloring.misses(endpoint, self.color) {
                return err(format!(
                    "path endpoint {endpoint} already covered by color {}",
                    self.color
                ));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multigraph::Multigraph;

    fn triangle() -> Multigraph {
        let mut g = Multigraph::empty(3);
        g.add_edge(0, 1).unwrap();
        g.add_edge(1, 2).unwrap();
        g.add_edge(0, 2).unwrap();
        g
    }

    #[test]
    fn assign_unassign_roundtrip() {
        let g = triangle();
        let mut c = PartialColoring::new(&g, 3);
        c.assign(0, 1).unwrap();
        assert_eq!(c.color_of(0), Some(1));
        assert_eq!(c.unassign(0), Ok(1));
        assert_eq!(c.color_of(0), None);
        assert_eq!(c.colored_count(), 0);
        c.audit().unwrap();
    }

    #[test]
    fn properness_conflict_reports_witness() {
        let g = triangle();
        let mut c = PartialColoring::new(&g, 3);
        c.assign(0, 0).unwrap();
        // edge 1 shares vertex 1 with edge 0
        assert_eq!(
            c.assign(1, 0),
            Err(ColoringError::Conflict {
                color: 0,
                vertex: 1,
                conflicting_edge: 0
            })
        );
    }

    #[test]
    fn triangle_needs_three_colors() {
        let g = triangle();
        let mut c = PartialColoring::new(&g, 3);
        c.assign(0, 0).unwrap();
        c.assign(1, 1).unwrap();
        c.assign(2, 2).unwrap();
        assert!(c.is_total());
        c.audit().unwrap();

        // with only 2 colors some edge cannot be colored
        let mut c2 = PartialColoring::new(&g, 2);
        c2.assign(0, 0).unwrap();
        c2.assign(1, 1).unwrap();
        assert!(c2.assign(2, 0).is_err());
        assert!(c2.assign(2, 1).is_err());
    }

    #[test]
    fn fresh_coloring_misses_everything() {
        let g = triangle();
        let c = PartialColoring::new(&g, 5);
        assert_eq!(c.missing_colors(0), vec![0, 1, 2, 3, 4]);
        assert!(c.class_sizes().iter().all(|&s| s == 0));
    }

    #[test]
    fn palette_overflow_rejected() {
        let g = triangle();
        let mut c = PartialColoring::new(&g, 2);
        assert_eq!(c.assign(0, 2), Err(ColoringError::ColorOutOfPalette(2, 2)));
    }

    /// Figure-2 shaped configuration: a-b1-b2-a2-a1-b with the middle
    /// colored edges inside the halves and the odd edges uncolored.
    fn path_fixture() -> (Multigraph, [EdgeId; 5]) {
        // vertices: a=0, a1=1, a2=2 on one side; b=3, b1=4, b2=5 on the other
        let mut g = Multigraph::empty(6);
        let e0 = g.add_edge(0, 4).unwrap(); // a-b1 uncolored
        let e1 = g.add_edge(4, 5).unwrap(); // b1-b2 colored
        let e2 = g.add_edge(5, 2).unwrap(); // b2-a2 uncolored
        let e3 = g.add_edge(2, 1).unwrap(); // a2-a1 colored
        let e4 = g.add_edge(1, 3).unwrap(); // a1-b uncolored
        (g, [e0, e1, e2, e3, e4])
    }

    #[test]
    fn exchange_covers_both_endpoints() {
        let (g, edges) = path_fixture();
        let mut c = PartialColoring::new(&g, 1);
        c.assign(edges[1], 0).unwrap();
        c.assign(edges[3], 0).unwrap();
        let before = c.class_sizes()[0];
        let p = AlternatingPath::new(&c, [0, 4, 5, 2, 1, 3], edges, 0).unwrap();
        c.exchange(&p).unwrap();
        assert!(!c.misses(0, 0));
        assert!(!c.misses(3, 0));
        assert_eq!(c.color_of(edges[1]), None);
        assert_eq!(c.color_of(edges[3]), None);
        // class loses 2 edges and gains 3
        assert_eq!(c.class_sizes()[0], before + 1);
        c.audit().unwrap();
    }

    #[test]
    fn exchange_touches_exactly_the_five_path_edges() {
        let (mut g, edges) = path_fixture();
        let spectator = g.add_edge(0, 3).unwrap();
        let mut c = PartialColoring::new(&g, 2);
        c.assign(edges[1], 0).unwrap();
        c.assign(edges[3], 0).unwrap();
        c.assign(spectator, 1).unwrap();
        let original: Vec<_> = c.assignments().collect();
        let p = AlternatingPath::new(&c, [0, 4, 5, 2, 1, 3], edges, 0).unwrap();
        c.exchange(&p).unwrap();
        assert_eq!(c.color_of(spectator), Some(1));
        // reverting the role flip restores the original state exactly
        for e in [edges[0], edges[2], edges[4]] {
            c.unassign(e).unwrap();
        }
        c.assign(edges[1], 0).unwrap();
        c.assign(edges[3], 0).unwrap();
        assert_eq!(original, c.assignments().collect::<Vec<_>>());
        c.audit().unwrap();
    }

    #[test]
    fn invalid_path_rejected_without_mutation() {
        let (g, edges) = path_fixture();
        let mut c = PartialColoring::new(&g, 1);
        c.assign(edges[1], 0).unwrap();
        // edge 3 left uncolored: invariant broken
        let p = AlternatingPath {
            vertices: [0, 4, 5, 2, 1, 3],
            edges,
            color: 0,
        };
        let snapshot: Vec<_> = c.assignments().collect();
        assert!(c.exchange(&p).is_err());
        assert_eq!(snapshot, c.assignments().collect::<Vec<_>>());
    }
}
