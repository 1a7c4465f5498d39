//! Generators for test corpora.
//!
//! * [`extremal_graph`] — the dense family showing that degree `rn - 1`
//!   does not guarantee a 1-factorization: two complete halves of odd order
//!   with all edges multiplied by `r`, joined by a matching of multiplicity
//!   `r - 1`.
//! * [`round_robin`] — circle-method 1-factorization of the complete graph.
//! * [`regular_from_factors`] — unions of round-robin factors, giving
//!   regular multigraphs that are 1-factorizable by construction.
//! * [`random_bipartite_regular`] — unions of permutations, for exercising
//!   the bipartite coloring and matching routines.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::factorizer::Factorization;
use crate::multigraph::{Multigraph, VertexId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InstanceError {
    #[error("half order n must be odd and at least 3, got {0}")]
    BadHalfOrder(usize),
    #[error("multiplicity must be at least 1, got {0}")]
    BadMultiplicity(usize),
    #[error("order must be even and at least 2, got {0}")]
    OddOrder(usize),
    #[error("degree {d} infeasible: at most {max} with these parameters")]
    InfeasibleDegree { d: usize, max: usize },
}

/// The extremal construction: complete graphs on `n` (odd) vertices
/// `0..n` and `n..2n`, every internal edge with multiplicity `r`, plus the
/// matching `i -- n+i` with multiplicity `r - 1`. Regular of degree
/// `rn - 1` with multiplicity `r`, yet not 1-factorizable.
///
/// For `r = 1` this degenerates to two disjoint complete graphs, which have
/// no 1-factor at all.
///
/// ```
/// use onefactor::instances::extremal_graph;
///
/// let g = extremal_graph(3, 2).unwrap();
/// assert_eq!(g.num_vertices(), 6);
/// assert_eq!(g.is_regular(), Some(5)); // rn - 1
/// assert_eq!(g.multiplicity(), 2);
/// ```
pub fn extremal_graph(n: usize, r: usize) -> Result<Multigraph, InstanceError> {
    if n < 3 || n % 2 == 0 {
        return Err(InstanceError::BadHalfOrder(n));
    }
    if r < 1 {
        return Err(InstanceError::BadMultiplicity(r));
    }
    let mut g = Multigraph::empty(2 * n);
    for side in [0, n] {
        for u in 0..n {
            for v in (u + 1)..n {
                g.add_edges(side + u, side + v, r).expect("valid edge");
            }
        }
    }
    if r > 1 {
        for i in 0..n {
            g.add_edges(i, n + i, r - 1).expect("valid edge");
        }
    }
    Ok(g)
}

/// Circle-method 1-factorization of the complete graph on `n2` vertices
/// (`n2` even). Returns the graph together with its `n2 - 1` factors.
pub fn round_robin(n2: usize) -> Result<(Multigraph, Factorization), InstanceError> {
    if n2 < 2 || n2 % 2 != 0 {
        return Err(InstanceError::OddOrder(n2));
    }
    let g = Multigraph::complete(n2);
    // pair -> edge id lookup; K_n2 is simple so the pair determines the edge
    let mut edge_of = vec![vec![usize::MAX; n2]; n2];
    for (e, u, v) in g.edges() {
        edge_of[u][v] = e;
        edge_of[v][u] = e;
    }
    let rounds = round_robin_pairings(n2);
    let factors = rounds
        .iter()
        .map(|pairs| pairs.iter().map(|&(u, v)| edge_of[u][v]).collect())
        .collect();
    Ok((g, Factorization::new(factors)))
}

/// The vertex pairings of each circle-method round: vertex `n2 - 1` is
/// fixed, the rest rotate.
pub fn round_robin_pairings(n2: usize) -> Vec<Vec<(VertexId, VertexId)>> {
    let m = n2 - 1;
    (0..m)
        .map(|round| {
            let mut pairs = vec![(m, round)];
            for j in 1..n2 / 2 {
                let u = (round + j) % m;
                let v = (round + m - j) % m;
                pairs.push((u.min(v), u.max(v)));
            }
            pairs
        })
        .collect()
}

/// Union of `d` factors drawn from the round-robin factorization of
/// `K_{n2}`, each base factor used at most `r` times. The result is
/// `d`-regular with multiplicity at most `r` and 1-factorizable by
/// construction.
pub fn regular_from_factors(
    n2: usize,
    d: usize,
    r: usize,
    seed: u64,
) -> Result<Multigraph, InstanceError> {
    if n2 < 2 || n2 % 2 != 0 {
        return Err(InstanceError::OddOrder(n2));
    }
    if r < 1 {
        return Err(InstanceError::BadMultiplicity(r));
    }
    let max = r * (n2 - 1);
    if d > max {
        return Err(InstanceError::InfeasibleDegree { d, max });
    }
    let rounds = round_robin_pairings(n2);
    let mut pool: Vec<usize> = Vec::with_capacity(max);
    for _ in 0..r {
        pool.extend(0..n2 - 1);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pool.shuffle(&mut rng);
    let mut g = Multigraph::empty(n2);
    for &f in pool.iter().take(d) {
        for &(u, v) in &rounds[f] {
            g.add_edge(u, v).expect("valid edge");
        }
    }
    Ok(g)
}

/// Applies up to `attempts` random double-edge swaps, each preserving all
/// degrees, looplessness, and the multiplicity cap. Decouples a generated
/// instance from its generating factor multiset.
pub fn double_edge_shuffle(g: &Multigraph, max_mult: usize, attempts: usize, seed: u64) -> Multigraph {
    let mut edges: Vec<(VertexId, VertexId)> = g.edges().map(|(_, u, v)| (u, v)).collect();
    if edges.len() < 2 {
        return g.clone();
    }
    let mut mult = g.pair_multiplicities();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let key = |u: VertexId, v: VertexId| (u.min(v), u.max(v));
    for _ in 0..attempts {
        let i = rng.gen_range(0..edges.len());
        let j = rng.gen_range(0..edges.len());
        if i == j {
            continue;
        }
        let (a, b) = edges[i];
        let (mut c, mut d) = edges[j];
        if rng.gen::<bool>() {
            std::mem::swap(&mut c, &mut d);
        }
        // proposed rewiring: (a,b),(c,d) -> (a,d),(c,b)
        if a == d || c == b {
            continue;
        }
        let (k1, k2) = (key(a, b), key(c, d));
        let (k3, k4) = (key(a, d), key(c, b));
        if k1 == k3 || k1 == k4 {
            continue; // no-op rewiring
        }
        let new3 = mult.get(&k3).copied().unwrap_or(0) + 1;
        let new4 = mult.get(&k4).copied().unwrap_or(0) + if k3 == k4 { 2 } else { 1 };
        if new3 > max_mult || new4 > max_mult {
            continue;
        }
        *mult.get_mut(&k1).unwrap() -= 1;
        *mult.get_mut(&k2).unwrap() -= 1;
        *mult.entry(k3).or_insert(0) += 1;
        *mult.entry(k4).or_insert(0) += 1;
        edges[i] = (a, d);
        edges[j] = (c, b);
    }
    let mut out = Multigraph::empty(g.num_vertices());
    for (u, v) in edges {
        out.add_edge(u, v).expect("swaps never create loops");
    }
    out
}

/// Bipartite `d`-regular multigraph with parts `0..n` and `n..2n` and
/// multiplicity at most `r`, built as a union of `d` permutations. Random
/// permutations are rejection-sampled against the cap; if rejection stalls,
/// the round is completed with a matching of the residual capacity graph
/// (which always exists while `d <= rn`).
pub fn random_bipartite_regular(
    n: usize,
    d: usize,
    r: usize,
    seed: u64,
) -> Result<Multigraph, InstanceError> {
    if r < 1 {
        return Err(InstanceError::BadMultiplicity(r));
    }
    if d > r * n {
        return Err(InstanceError::InfeasibleDegree { d, max: r * n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut used = vec![vec![0usize; n]; n]; // used[x][y] copies of edge x -- n+y
    let mut g = Multigraph::empty(2 * n);
    let mut perm: Vec<usize> = (0..n).collect();
    for _ in 0..d {
        let mut placed = false;
        for _ in 0..50 {
            perm.shuffle(&mut rng);
            if (0..n).all(|x| used[x][perm[x]] < r) {
                placed = true;
                break;
            }
        }
        if !placed {
            // deterministic completion: perfect matching of the residual
            // capacity graph, with a randomized scan order for variety
            match capacity_matching(&used, r, &mut rng) {
                Some(m) => perm.copy_from_slice(&m),
                None => return Err(InstanceError::InfeasibleDegree { d, max: r * n }),
            }
        }
        for x in 0..n {
            used[x][perm[x]] += 1;
            g.add_edge(x, n + perm[x]).expect("valid edge");
        }
    }
    Ok(g)
}

/// Perfect matching on pairs with remaining capacity, by augmenting paths.
fn capacity_matching(used: &[Vec<usize>], r: usize, rng: &mut ChaCha8Rng) -> Option<Vec<usize>> {
    let n = used.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut match_of_y: Vec<Option<usize>> = vec![None; n];
    let mut match_of_x: Vec<Option<usize>> = vec![None; n];

    fn augment(
        x: usize,
        used: &[Vec<usize>],
        r: usize,
        match_of_y: &mut [Option<usize>],
        match_of_x: &mut [Option<usize>],
        visited: &mut [bool],
    ) -> bool {
        let n = used.len();
        for y in 0..n {
            if used[x][y] >= r || visited[y] {
                continue;
            }
            visited[y] = true;
            let ok = match match_of_y[y] {
                None => true,
                Some(x2) => augment(x2, used, r, match_of_y, match_of_x, visited),
            };
            if ok {
                match_of_y[y] = Some(x);
                match_of_x[x] = Some(y);
                return true;
            }
        }
        false
    }

    for &x in &order {
        let mut visited = vec![false; n];
        if !augment(x, used, r, &mut match_of_y, &mut match_of_x, &mut visited) {
            return None;
        }
    }
    match_of_x.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extremal_formulas() {
        let g = extremal_graph(3, 2).unwrap();
        assert_eq!(g.num_vertices(), 6);
        assert_eq!(g.is_regular(), Some(5));
        assert_eq!(g.multiplicity(), 2);
        // cross edges: n(r-1) = 3
        let cross = g.edges().filter(|&(_, u, v)| (u < 3) != (v < 3)).count();
        assert_eq!(cross, 3);

        let g = extremal_graph(5, 3).unwrap();
        assert_eq!(g.is_regular(), Some(14));
        assert_eq!(g.multiplicity(), 3);
    }

    #[test]
    fn extremal_r1_is_disjoint_cliques() {
        let g = extremal_graph(3, 1).unwrap();
        assert_eq!(g.is_regular(), Some(2));
        let cross = g.edges().filter(|&(_, u, v)| (u < 3) != (v < 3)).count();
        assert_eq!(cross, 0);
    }

    #[test]
    fn extremal_even_n_rejected() {
        assert!(matches!(
            extremal_graph(4, 2),
            Err(InstanceError::BadHalfOrder(4))
        ));
    }

    #[test]
    fn round_robin_k4() {
        let (g, f) = round_robin(4).unwrap();
        assert_eq!(f.factors().len(), 3);
        for factor in f.factors() {
            assert_eq!(factor.len(), 2);
        }
        // factors partition the edge set
        let mut all: Vec<usize> = f.factors().iter().flatten().copied().collect();
        all.sort_unstable();
        assert_eq!(all, g.edge_ids().collect::<Vec<_>>());
    }

    #[test]
    fn round_robin_factors_are_disjoint_matchings() {
        let (g, f) = round_robin(8).unwrap();
        assert_eq!(f.factors().len(), 7);
        for factor in f.factors() {
            let mut covered = vec![false; 8];
            for &e in factor {
                let (u, v) = g.endpoints(e).unwrap();
                assert!(!covered[u] && !covered[v]);
                covered[u] = true;
                covered[v] = true;
            }
            assert!(covered.iter().all(|&c| c));
        }
    }

    #[test]
    fn factor_union_is_regular_with_bounded_multiplicity() {
        let g = regular_from_factors(8, 7, 1, 0).unwrap();
        assert_eq!(g.is_regular(), Some(7));
        assert_eq!(g.multiplicity(), 1); // K_8

        for seed in 0..5 {
            let g = regular_from_factors(10, 12, 2, seed).unwrap();
            assert_eq!(g.is_regular(), Some(12));
            assert!(g.multiplicity() <= 2);
        }
    }

    #[test]
    fn factor_union_infeasible_rejected() {
        assert!(matches!(
            regular_from_factors(8, 10, 1, 0),
            Err(InstanceError::InfeasibleDegree { .. })
        ));
    }

    #[test]
    fn shuffle_preserves_degrees_and_multiplicity() {
        let g = regular_from_factors(10, 12, 2, 1).unwrap();
        let shuffled = double_edge_shuffle(&g, 2, 200, 99);
        assert_eq!(shuffled.is_regular(), g.is_regular());
        assert!(shuffled.multiplicity() <= 2);
        assert_eq!(shuffled.num_edges(), g.num_edges());
    }

    #[test]
    fn bipartite_regular_generator() {
        for (n, d, r) in [(5, 5, 1), (6, 9, 2), (4, 12, 3)] {
            let g = random_bipartite_regular(n, d, r, 7).unwrap();
            assert_eq!(g.is_regular(), Some(d));
            assert!(g.multiplicity() <= r);
            for (_, u, v) in g.edges() {
                assert!((u < n) != (v < n));
            }
        }
        assert!(random_bipartite_regular(4, 5, 1, 0).is_err());
    }
}
