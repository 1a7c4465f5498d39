//! Constructive edge-coloring and matching subroutines.
//!
//! Four classical results are implemented as total algorithms:
//!
//! * [`vizing_color`] — proper coloring of any multigraph with at most
//!   `max_degree + multiplicity` colors (fan rotation plus two-color
//!   chain flips, with parallel edges treated as distinct fan entries).
//! * [`konig_color`] — proper coloring of a bipartite multigraph with
//!   exactly `max_degree` colors (per-edge alternating-path recoloring).
//! * [`equalize`] — rebalances a total proper coloring onto `k` colors so
//!   that class sizes differ by at most one, by flipping two-color Kempe
//!   path components between the largest and smallest classes.
//! * [`hall_matching`] — either a matching covering the whole left side or
//!   a verified deficiency set witnessing that none exists.

use std::collections::{BTreeSet, HashSet};

use thiserror::Error;

use crate::coloring::PartialColoring;
use crate::multigraph::{EdgeId, Multigraph, VertexId, VertexSet};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PaletteError {
    #[error("graph multiplicity {found} exceeds the declared bound {bound}")]
    MultiplicityExceeded { found: usize, bound: usize },
    #[error("edge {edge} joins two vertices of the same part")]
    NotBipartite { edge: EdgeId },
    #[error("coloring must be total over the host graph")]
    NotTotal,
    #[error("palette of size {palette} exceeds the target of {target} colors")]
    PaletteTooLarge { palette: usize, target: usize },
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

/// Tracks, for every vertex, the set of palette colors it misses.
/// Kept alongside a `PartialColoring` by the algorithms below.
struct MissingSets {
    sets: Vec<BTreeSet<usize>>,
}

impl MissingSets {
    fn new(coloring: &PartialColoring) -> Self {
        let palette = coloring.palette_size();
        let n = coloring.host().num_vertices();
        let mut sets = vec![BTreeSet::new(); n];
        for (v, set) in sets.iter_mut().enumerate() {
            for c in 0..palette {
                if coloring.misses(v, c) {
                    set.insert(c);
                }
            }
        }
        MissingSets { sets }
    }

    fn assign(&mut self, coloring: &mut PartialColoring, e: EdgeId, color: usize) {
        let (u, v) = coloring.host().endpoints(e).expect("edge in host");
        coloring.assign(e, color).expect("assignment stays proper");
        self.sets[u].remove(&color);
        self.sets[v].remove(&color);
    }

    fn unassign(&mut self, coloring: &mut PartialColoring, e: EdgeId) -> usize {
        let (u, v) = coloring.host().endpoints(e).expect("edge in host");
        let color = coloring.unassign(e).expect("edge was colored");
        self.sets[u].insert(color);
        self.sets[v].insert(color);
        color
    }

    fn first_missing(&self, v: VertexId) -> Option<usize> {
        self.sets[v].iter().next().copied()
    }

    fn contains(&self, v: VertexId, color: usize) -> bool {
        self.sets[v].contains(&color)
    }
}

/// Walks the two-color path starting at `start`, whose first edge carries
/// `first_color` and which alternates with `other_color`. Returns the edges
/// in order and the final vertex. `start` must miss `other_color`.
fn walk_two_color_path(
    coloring: &PartialColoring,
    start: VertexId,
    first_color: usize,
    other_color: usize,
) -> (Vec<EdgeId>, VertexId) {
    let mut edges = Vec::new();
    let mut at = start;
    let mut want = first_color;
    loop {
        match coloring.edge_at(at, want) {
            Some(e) => {
                edges.push(e);
                at = coloring.host().other_endpoint(e, at).expect("endpoint");
                want = if want == first_color { other_color } else { first_color };
            }
            None => return (edges, at),
        }
    }
}

/// Swaps the two colors along a previously collected chain of edges.
fn flip_chain(
    coloring: &mut PartialColoring,
    missing: &mut MissingSets,
    chain: &[EdgeId],
    a: usize,
    b: usize,
) {
    let mut recolored = Vec::with_capacity(chain.len());
    for &e in chain {
        let old = missing.unassign(coloring, e);
        let new = if old == a { b } else { a };
        recolored.push((e, new));
    }
    for (e, new) in recolored {
        missing.assign(coloring, e, new);
    }
}

/// Proper edge-coloring of `g` with palette `max_degree(g) + r` colors.
/// Requires `multiplicity(g) <= r`.
///
/// ```
/// use onefactor::multigraph::Multigraph;
/// use onefactor::palette::vizing_color;
///
/// let mut g = Multigraph::empty(3);
/// for (u, v) in [(0, 1), (1, 2), (0, 2)] {
///     g.add_edges(u, v, 2).unwrap();
/// }
/// let coloring = vizing_color(&g, 2).unwrap();
/// assert!(coloring.is_total());
/// assert!(coloring.audit().is_ok());
/// assert_eq!(coloring.palette_size(), 6); // max degree 4 plus r = 2
/// ```
pub fn vizing_color(g: &Multigraph, r: usize) -> Result<PartialColoring<'_>, PaletteError> {
    let mult = g.multiplicity();
    if mult > r {
        return Err(PaletteError::MultiplicityExceeded { found: mult, bound: r });
    }
    let palette = g.max_degree() + r;
    let mut coloring = PartialColoring::new(g, palette);
    let mut missing = MissingSets::new(&coloring);
    let edge_ids: Vec<EdgeId> = g.edge_ids().collect();
    for e in edge_ids {
        color_one_edge(g, &mut coloring, &mut missing, e)?;
    }
    debug_assert!(coloring.audit().is_ok());
    Ok(coloring)
}

/// Colors the single uncolored edge `e0` by the fan-rotation argument.
fn color_one_edge(
    g: &Multigraph,
    coloring: &mut PartialColoring,
    missing: &mut MissingSets,
    e0: EdgeId,
) -> Result<(), PaletteError> {
    let (x, y0) = g.endpoints(e0).expect("edge in host");
    let alpha = missing
        .first_missing(x)
        .ok_or_else(|| PaletteError::Internal(format!("vertex {x} misses no color")))?;

    // Fan at x: fan_edges[i] joins x with fan_tips[i]. fan_edges[0] is the
    // uncolored edge; fan_edges[i] (i >= 1) is colored betas[i-1], a color
    // missing at fan_tips[i-1].
    let mut fan_edges = vec![e0];
    let mut fan_tips = vec![y0];
    let mut betas: Vec<usize> = Vec::new();

    // Shifts colors down the fan prefix `0..=t` and colors the tip edge.
    fn shift_and_color(
        coloring: &mut PartialColoring,
        missing: &mut MissingSets,
        fan_edges: &[EdgeId],
        betas: &[usize],
        t: usize,
        final_color: usize,
    ) {
        for j in 0..t {
            missing.unassign(coloring, fan_edges[j + 1]);
            missing.assign(coloring, fan_edges[j], betas[j]);
        }
        missing.assign(coloring, fan_edges[t], final_color);
    }

    loop {
        let i = fan_tips.len() - 1;
        let tip = fan_tips[i];
        // Avoid reusing a color already picked at an earlier fan occurrence
        // of the same vertex (parallel edges to x).
        let reserved: BTreeSet<usize> = betas
            .iter()
            .enumerate()
            .filter(|&(j, _)| fan_tips[j] == tip)
            .map(|(_, &b)| b)
            .collect();
        let beta = missing.sets[tip]
            .iter()
            .copied()
            .find(|b| !reserved.contains(b))
            .ok_or_else(|| {
                PaletteError::Internal(format!("no usable missing color at fan tip {tip}"))
            })?;

        if missing.contains(x, beta) {
            // beta free at both x and the tip: rotate and finish.
            shift_and_color(coloring, missing, &fan_edges, &betas, i, beta);
            return Ok(());
        }

        if let Some(h) = betas.iter().position(|&b| b == beta) {
            // Two fan tips want the same color: resolve with an
            // alpha/beta chain flip. fan_tips[h] != tip by construction.
            let (chain_from_x, chain_end) = walk_two_color_path(coloring, x, beta, alpha);
            debug_assert!(!chain_from_x.is_empty());
            let (t, pivot) = if chain_end != fan_tips[h] {
                (h, fan_tips[h])
            } else {
                (i, tip)
            };
            // Flip the alpha/beta component through `pivot`; it cannot
            // contain x, so x keeps missing alpha.
            let (pivot_chain, _) = walk_two_color_path(coloring, pivot, alpha, beta);
            if !pivot_chain.is_empty() {
                flip_chain(coloring, missing, &pivot_chain, alpha, beta);
            }
            debug_assert!(missing.contains(x, alpha));
            debug_assert!(missing.contains(fan_tips[t], alpha));
            shift_and_color(coloring, missing, &fan_edges, &betas, t, alpha);
            return Ok(());
        }

        // beta present at x on an edge not yet in the fan: extend.
        let next_edge = coloring
            .edge_at(x, beta)
            .ok_or_else(|| PaletteError::Internal("beta should appear at x".into()))?;
        let next_tip = g.other_endpoint(next_edge, x).expect("endpoint");
        fan_edges.push(next_edge);
        fan_tips.push(next_tip);
        betas.push(beta);
    }
}

/// Splits the vertices into the two parts and checks every edge crosses.
fn check_bipartite(
    g: &Multigraph,
    left: &VertexSet,
    right: &VertexSet,
) -> Result<(), PaletteError> {
    for (e, u, v) in g.edges() {
        let cross = (left.contains(u) && right.contains(v))
            || (left.contains(v) && right.contains(u));
        if !cross {
            return Err(PaletteError::NotBipartite { edge: e });
        }
    }
    Ok(())
}

/// Proper edge-coloring of a bipartite multigraph with exactly
/// `max_degree(g)` colors.
///
/// ```
/// use onefactor::multigraph::{Multigraph, VertexSet};
/// use onefactor::palette::konig_color;
///
/// let mut g = Multigraph::empty(6);
/// for u in 0..3 {
///     for v in 3..6 {
///         g.add_edge(u, v).unwrap();
///     }
/// }
/// let left: VertexSet = (0..3).collect();
/// let right: VertexSet = (3..6).collect();
/// let coloring = konig_color(&g, (&left, &right)).unwrap();
/// assert_eq!(coloring.palette_size(), 3); // exactly the maximum degree
/// assert!(coloring.is_total());
/// ```
pub fn konig_color<'g>(
    g: &'g Multigraph,
    bipartition: (&VertexSet, &VertexSet),
) -> Result<PartialColoring<'g>, PaletteError> {
    let (left, right) = bipartition;
    check_bipartite(g, left, right)?;
    let palette = g.max_degree();
    let mut coloring = PartialColoring::new(g, palette);
    let mut missing = MissingSets::new(&coloring);
    let edge_ids: Vec<EdgeId> = g.edge_ids().collect();
    for e in edge_ids {
        let (u, v) = g.endpoints(e).expect("edge in host");
        let common = missing.sets[u].intersection(&missing.sets[v]).next().copied();
        if let Some(c) = common {
            missing.assign(&mut coloring, e, c);
            continue;
        }
        let alpha = missing
            .first_missing(u)
            .ok_or_else(|| PaletteError::Internal(format!("vertex {u} misses no color")))?;
        let beta = missing
            .first_missing(v)
            .ok_or_else(|| PaletteError::Internal(format!("vertex {v} misses no color")))?;
        // beta appears at u; the beta/alpha path from u cannot reach v in a
        // bipartite graph, so flipping it frees beta at u.
        let (chain, _) = walk_two_color_path(&coloring, u, beta, alpha);
        flip_chain(&mut coloring, &mut missing, &chain, alpha, beta);
        if !missing.contains(u, beta) || !missing.contains(v, beta) {
            return Err(PaletteError::Internal(
                "alternating path flip failed to free a shared color".into(),
            ));
        }
        missing.assign(&mut coloring, e, beta);
    }
    debug_assert!(coloring.audit().is_ok());
    Ok(coloring)
}

/// A maximal two-color path component together with its color counts.
struct PathComponent {
    edges: Vec<EdgeId>,
    surplus: i64, // (#edges of color `a`) - (#edges of color `b`)
}

/// Collects all *path* components of the subgraph colored `a` or `b`,
/// in ascending order of their smallest endpoint vertex. Cycle components
/// carry equal counts of both colors and are irrelevant for balancing.
fn two_color_path_components(coloring: &PartialColoring, a: usize, b: usize) -> Vec<PathComponent> {
    let n = coloring.host().num_vertices();
    let mut seen: HashSet<EdgeId> = HashSet::new();
    let mut components = Vec::new();
    for v in 0..n {
        let has_a = coloring.edge_at(v, a).is_some();
        let has_b = coloring.edge_at(v, b).is_some();
        // path endpoints carry exactly one of the two colors
        let first = match (has_a, has_b) {
            (true, false) => a,
            (false, true) => b,
            _ => continue,
        };
        let start_edge = coloring.edge_at(v, first).expect("edge present");
        if seen.contains(&start_edge) {
            continue;
        }
        let other = if first == a { b } else { a };
        let (edges, _) = walk_two_color_path(coloring, v, first, other);
        let mut surplus = 0i64;
        for &e in &edges {
            seen.insert(e);
            if coloring.color_of(e) == Some(a) {
                surplus += 1;
            } else {
                surplus -= 1;
            }
        }
        components.push(PathComponent { edges, surplus });
    }
    components
}

/// Rebalances a total proper coloring onto a palette of `k` colors so that
/// every class has either `floor(|E|/k)` or `ceil(|E|/k)` edges.
///
/// ```
/// use onefactor::multigraph::Multigraph;
/// use onefactor::palette::{equalize, vizing_color};
///
/// let g = Multigraph::complete(8); // 28 edges
/// let coloring = vizing_color(&g, 1).unwrap();
/// let k = coloring.palette_size();
/// let balanced = equalize(coloring, k).unwrap();
/// assert!(balanced
///     .class_sizes()
///     .iter()
///     .all(|&s| s == 28 / k || s == 28usize.div_ceil(k)));
/// ```
pub fn equalize(mut coloring: PartialColoring<'_>, k: usize) -> Result<PartialColoring<'_>, PaletteError> {
    if !coloring.is_total() {
        return Err(PaletteError::NotTotal);
    }
    if coloring.palette_size() > k {
        return Err(PaletteError::PaletteTooLarge {
            palette: coloring.palette_size(),
            target: k,
        });
    }
    if k == 0 {
        // only an edgeless graph can be colored with zero colors
        return Ok(coloring);
    }
    coloring.extend_palette(k);
    let mut missing = MissingSets::new(&coloring);
    // Each round fully balances the currently largest class against the
    // currently smallest by flipping surplus path components. The sum of
    // squared class sizes strictly decreases, so this terminates.
    loop {
        let sizes = coloring.class_sizes();
        let (mut large, mut small) = (0, 0);
        for c in 0..k {
            if sizes[c] > sizes[large] {
                large = c;
            }
            if sizes[c] < sizes[small] {
                small = c;
            }
        }
        let diff = sizes[large] as i64 - sizes[small] as i64;
        if diff <= 1 {
            break;
        }
        let components = two_color_path_components(&coloring, large, small);
        let mut to_flip = (diff / 2) as usize;
        for comp in &components {
            if to_flip == 0 {
                break;
            }
            if comp.surplus == 1 {
                flip_chain(&mut coloring, &mut missing, &comp.edges, large, small);
                to_flip -= 1;
            }
        }
        if to_flip > 0 {
            return Err(PaletteError::Internal(
                "not enough surplus components to equalize".into(),
            ));
        }
    }
    debug_assert!(coloring.audit().is_ok());
    Ok(coloring)
}

/// Outcome of a Hall matching search: either a matching covering the whole
/// left part, or a left-side set with strictly fewer neighbors than members.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MatchingWitness {
    /// Pairwise non-adjacent edges covering every vertex of the left part.
    Matching(Vec<EdgeId>),
    /// A verified Hall violator: `|N(S)| < |S|`.
    Deficiency(VertexSet),
}

/// Searches for a matching covering every vertex of the left part of a
/// bipartite multigraph. Works on the simplified graph (parallel classes
/// collapsed) and lifts each matched pair to its lowest concrete edge id.
/// A returned deficiency set is re-verified against the graph.
///
/// ```
/// use onefactor::multigraph::{Multigraph, VertexSet};
/// use onefactor::palette::{hall_matching, MatchingWitness};
///
/// // two leaves sharing one center cannot both be matched
/// let mut g = Multigraph::empty(3);
/// g.add_edge(0, 2).unwrap();
/// g.add_edge(1, 2).unwrap();
/// let left: VertexSet = [0, 1].into_iter().collect();
/// let right: VertexSet = [2].into_iter().collect();
/// match hall_matching(&g, (&left, &right)).unwrap() {
///     MatchingWitness::Deficiency(s) => assert_eq!(s.members(), &[0, 1]),
///     MatchingWitness::Matching(_) => unreachable!(),
/// }
/// ```
pub fn hall_matching(
    g: &Multigraph,
    bipartition: (&VertexSet, &VertexSet),
) -> Result<MatchingWitness, PaletteError> {
    let (left, right) = bipartition;
    check_bipartite(g, left, right)?;

    let xs: Vec<VertexId> = left.iter().collect();
    let n = g.num_vertices();
    let mut x_index = vec![usize::MAX; n];
    for (i, &x) in xs.iter().enumerate() {
        x_index[x] = i;
    }

    // simplified adjacency: for each left vertex, the sorted distinct
    // neighbors with the lowest parallel edge id
    let mut adj: Vec<Vec<(VertexId, EdgeId)>> = vec![Vec::new(); xs.len()];
    for (i, &x) in xs.iter().enumerate() {
        let mut best: std::collections::BTreeMap<VertexId, EdgeId> = Default::default();
        for &(w, e) in g.incident(x) {
            let slot = best.entry(w).or_insert(e);
            if e < *slot {
                *slot = e;
            }
        }
        adj[i] = best.into_iter().collect();
    }

    let mut match_of_right: Vec<Option<usize>> = vec![None; n]; // right vertex -> left index
    let mut match_of_left: Vec<Option<VertexId>> = vec![None; xs.len()];

    fn try_augment(
        i: usize,
        adj: &[Vec<(VertexId, EdgeId)>],
        match_of_right: &mut [Option<usize>],
        match_of_left: &mut [Option<VertexId>],
        visited: &mut [bool],
    ) -> bool {
        for &(w, _) in &adj[i] {
            if visited[w] {
                continue;
            }
            visited[w] = true;
            let free = match match_of_right[w] {
                None => true,
                Some(j) => try_augment(j, adj, match_of_right, match_of_left, visited),
            };
            if free {
                match_of_right[w] = Some(i);
                match_of_left[i] = Some(w);
                return true;
            }
        }
        false
    }

    let mut unmatched = Vec::new();
    for i in 0..xs.len() {
        let mut visited = vec![false; n];
        if !try_augment(i, &adj, &mut match_of_right, &mut match_of_left, &mut visited) {
            unmatched.push(i);
        }
    }

    if unmatched.is_empty() {
        let mut edges = Vec::with_capacity(xs.len());
        for (i, matched) in match_of_left.iter().enumerate() {
            let w = matched.expect("all left vertices matched");
            let &(_, e) = adj[i]
                .iter()
                .find(|&&(v, _)| v == w)
                .expect("matched neighbor is adjacent");
            edges.push(e);
        }
        edges.sort_unstable();
        return Ok(MatchingWitness::Matching(edges));
    }

    // Alternating reachability from the unmatched left vertices yields a
    // deficiency set.
    let mut in_s = vec![false; xs.len()];
    let mut reached_right = vec![false; n];
    let mut queue: Vec<usize> = unmatched.clone();
    for &i in &unmatched {
        in_s[i] = true;
    }
    while let Some(i) = queue.pop() {
        for &(w, _) in &adj[i] {
            if reached_right[w] {
                continue;
            }
            reached_right[w] = true;
            if let Some(j) = match_of_right[w] {
                if !in_s[j] {
                    in_s[j] = true;
                    queue.push(j);
                }
            }
        }
    }
    let s: VertexSet = xs
        .iter()
        .enumerate()
        .filter(|&(i, _)| in_s[i])
        .map(|(_, &x)| x)
        .collect();

    // certifying contract: re-verify the violation against the host graph
    let mut neighbors: BTreeSet<VertexId> = BTreeSet::new();
    for x in s.iter() {
        for &(w, _) in g.incident(x) {
            neighbors.insert(w);
        }
    }
    if neighbors.len() >= s.len() {
        return Err(PaletteError::Internal(
            "deficiency candidate fails |N(S)| < |S|".into(),
        ));
    }
    let _ = right;
    Ok(MatchingWitness::Deficiency(s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Exact chromatic index by iterative-deepening backtracking.
    fn brute_force_chromatic_index(g: &Multigraph) -> usize {
        fn colorable(g: &Multigraph, k: usize) -> bool {
            let edges: Vec<(EdgeId, VertexId, VertexId)> = g.edges().collect();
            fn rec(
                edges: &[(EdgeId, VertexId, VertexId)],
                i: usize,
                k: usize,
                at: &mut Vec<Vec<bool>>,
            ) -> bool {
                let Some(&(_, u, v)) = edges.get(i) else {
                    return true;
                };
                for c in 0..k {
                    if !at[u][c] && !at[v][c] {
                        at[u][c] = true;
                        at[v][c] = true;
                        if rec(edges, i + 1, k, at) {
                            return true;
                        }
                        at[u][c] = false;
                        at[v][c] = false;
                    }
                }
                false
            }
            let mut at = vec![vec![false; k]; g.num_vertices()];
            rec(&edges, 0, k, &mut at)
        }
        (g.max_degree()..).find(|&k| colorable(g, k)).expect("some palette works")
    }

    /// Whether any matching covers all of `xs`, by exhaustive search.
    fn brute_force_covers_left(g: &Multigraph, xs: &[VertexId]) -> bool {
        fn rec(g: &Multigraph, xs: &[VertexId], i: usize, taken: &mut Vec<VertexId>) -> bool {
            let Some(&x) = xs.get(i) else {
                return true;
            };
            for &(w, _) in g.incident(x) {
                if !taken.contains(&w) {
                    taken.push(w);
                    if rec(g, xs, i + 1, taken) {
                        return true;
                    }
                    taken.pop();
                }
            }
            false
        }
        rec(g, xs, 0, &mut Vec::new())
    }

    fn doubled_triangle() -> Multigraph {
        let mut g = Multigraph::empty(3);
        for (u, v) in [(0, 1), (1, 2), (0, 2)] {
            g.add_edges(u, v, 2).unwrap();
        }
        g
    }

    #[test]
    fn vizing_doubled_triangle_needs_six_colors() {
        let g = doubled_triangle();
        assert_eq!(brute_force_chromatic_index(&g), 6);
        let coloring = vizing_color(&g, 2).unwrap();
        assert!(coloring.is_total());
        assert!(coloring.audit().is_ok());
        assert_eq!(coloring.palette_size(), 6);
    }

    #[test]
    fn vizing_rejects_understated_multiplicity() {
        let g = doubled_triangle();
        assert!(matches!(
            vizing_color(&g, 1),
            Err(PaletteError::MultiplicityExceeded { found: 2, bound: 1 })
        ));
    }

    #[test]
    fn vizing_extremal_graph() {
        let g = crate::instances::extremal_graph(5, 2).unwrap();
        let coloring = vizing_color(&g, 2).unwrap();
        assert!(coloring.is_total());
        assert!(coloring.audit().is_ok());
        assert!(coloring.palette_size() <= g.max_degree() + 2);
    }

    #[test]
    fn vizing_random_multigraphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let n = rng.gen_range(2..10usize);
            let r = rng.gen_range(1..4usize);
            let mut g = Multigraph::empty(n);
            for _ in 0..rng.gen_range(0..20usize) {
                let u = rng.gen_range(0..n);
                let v = rng.gen_range(0..n);
                if u != v && g.pair_multiplicity(u, v) < r {
                    g.add_edge(u, v).unwrap();
                }
            }
            let coloring = vizing_color(&g, r).unwrap();
            assert!(coloring.is_total());
            assert!(coloring.audit().is_ok());
            assert!(coloring.palette_size() <= g.max_degree() + r);
        }
    }

    fn complete_bipartite(n: usize) -> (Multigraph, VertexSet, VertexSet) {
        let mut g = Multigraph::empty(2 * n);
        for u in 0..n {
            for v in n..2 * n {
                g.add_edge(u, v).unwrap();
            }
        }
        let left: VertexSet = (0..n).collect();
        let right: VertexSet = (n..2 * n).collect();
        (g, left, right)
    }

    #[test]
    fn konig_k33_matches_latin_square() {
        // oracle: color edge (u, v) with (u + v) mod 3, a Latin square
        let (g, left, right) = complete_bipartite(3);
        let coloring = konig_color(&g, (&left, &right)).unwrap();
        assert_eq!(coloring.palette_size(), 3);
        assert!(coloring.is_total());
        assert!(coloring.audit().is_ok());
        for c in 0..3 {
            assert_eq!(coloring.class_edges(c).len(), 3);
        }
    }

    #[test]
    fn konig_rejects_non_bipartite() {
        let g = Multigraph::complete(4);
        let left: VertexSet = [0, 1].into_iter().collect();
        let right: VertexSet = [2, 3].into_iter().collect();
        assert!(matches!(
            konig_color(&g, (&left, &right)),
            Err(PaletteError::NotBipartite { .. })
        ));
    }

    #[test]
    fn konig_random_bipartite_regular_uses_exactly_d_colors() {
        for seed in 0..50u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(2..8usize);
            let r = rng.gen_range(1..3usize);
            let d = rng.gen_range(1..=r * n);
            let g = crate::instances::random_bipartite_regular(n, d, r, seed).unwrap();
            let left: VertexSet = (0..n).collect();
            let right: VertexSet = (n..2 * n).collect();
            let coloring = konig_color(&g, (&left, &right)).unwrap();
            assert_eq!(coloring.palette_size(), d);
            assert!(coloring.is_total());
            assert!(coloring.audit().is_ok());
        }
    }

    #[test]
    fn equalize_balances_k8_coloring() {
        let g = Multigraph::complete(8);
        let coloring = vizing_color(&g, 1).unwrap();
        let k = coloring.palette_size();
        let equalized = equalize(coloring, k).unwrap();
        let sizes = equalized.class_sizes();
        let (lo, hi) = (28 / k, 28usize.div_ceil(k));
        assert!(sizes.iter().all(|&s| s == lo || s == hi), "{sizes:?}");
        assert!(equalized.audit().is_ok());
        assert_eq!(equalized.colored_count(), 28);
    }

    #[test]
    fn equalize_onto_larger_palette() {
        let (g, left, right) = complete_bipartite(4);
        let coloring = konig_color(&g, (&left, &right)).unwrap();
        let equalized = equalize(coloring, 7).unwrap();
        let sizes = equalized.class_sizes();
        // 16 edges over 7 classes: sizes 2 or 3
        assert!(sizes.iter().all(|&s| s == 2 || s == 3), "{sizes:?}");
        assert!(equalized.audit().is_ok());
    }

    #[test]
    fn hall_star_deficiency() {
        // two leaves sharing one center: N({0, 1}) = {2}
        let mut g = Multigraph::empty(3);
        g.add_edge(0, 2).unwrap();
        g.add_edge(1, 2).unwrap();
        let left: VertexSet = [0, 1].into_iter().collect();
        let right: VertexSet = [2].into_iter().collect();
        match hall_matching(&g, (&left, &right)).unwrap() {
            MatchingWitness::Deficiency(s) => {
                assert_eq!(s.members(), &[0, 1]);
            }
            MatchingWitness::Matching(_) => panic!("star cannot be matched"),
        }
    }

    #[test]
    fn hall_agrees_with_brute_force() {
        for seed in 0..300u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(1..=8usize);
            let mut g = Multigraph::empty(2 * n);
            for u in 0..n {
                for v in n..2 * n {
                    if rng.gen_bool(0.3) {
                        g.add_edge(u, v).unwrap();
                    }
                }
            }
            let left: VertexSet = (0..n).collect();
            let right: VertexSet = (n..2 * n).collect();
            let xs: Vec<VertexId> = (0..n).collect();
            let expected = brute_force_covers_left(&g, &xs);
            match hall_matching(&g, (&left, &right)).unwrap() {
                MatchingWitness::Matching(edges) => {
                    assert!(expected, "seed {seed}: matching claimed but none exists");
                    assert_eq!(edges.len(), n);
                    let mut covered = vec![false; 2 * n];
                    for e in edges {
                        let (u, v) = g.endpoints(e).unwrap();
                        assert!(!covered[u] && !covered[v]);
                        covered[u] = true;
                        covered[v] = true;
                    }
                    assert!((0..n).all(|v| covered[v]));
                }
                MatchingWitness::Deficiency(s) => {
                    assert!(!expected, "seed {seed}: deficiency claimed but matching exists");
                    let mut neighbors = BTreeSet::new();
                    for x in s.iter() {
                        for &(w, _) in g.incident(x) {
                            neighbors.insert(w);
                        }
                    }
                    assert!(neighbors.len() < s.len());
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn vizing_is_proper_and_within_palette(
            n in 2..9usize,
            pairs in proptest::collection::vec((0..9usize, 0..9usize), 0..24),
        ) {
            let mut g = Multigraph::empty(n);
            for (u, v) in pairs {
                let (u, v) = (u % n, v % n);
                if u != v && g.pair_multiplicity(u, v) < 3 {
                    g.add_edge(u, v).unwrap();
                }
            }
            let coloring = vizing_color(&g, 3).unwrap();
            prop_assert!(coloring.is_total());
            prop_assert!(coloring.audit().is_ok());
            prop_assert!(coloring.palette_size() <= g.max_degree() + 3);
        }

        #[test]
        fn equalize_preserves_properness_and_balances(
            n in 2..9usize,
            pairs in proptest::collection::vec((0..9usize, 0..9usize), 0..24),
            extra in 0..4usize,
        ) {
            let mut g = Multigraph::empty(n);
            for (u, v) in pairs {
                let (u, v) = (u % n, v % n);
                if u != v && g.pair_multiplicity(u, v) < 2 {
                    g.add_edge(u, v).unwrap();
                }
            }
            let coloring = vizing_color(&g, 2).unwrap();
            let k = coloring.palette_size() + extra;
            if k == 0 {
                return Ok(());
            }
            let before: Vec<(EdgeId, usize)> = coloring.assignments().collect();
            let equalized = equalize(coloring, k).unwrap();
            prop_assert!(equalized.audit().is_ok());
            prop_assert_eq!(equalized.colored_count(), before.len());
            let m = before.len();
            let sizes = equalized.class_sizes();
            prop_assert!(sizes.iter().all(|&s| s == m / k || s == m.div_ceil(k)));
        }
    }
}
