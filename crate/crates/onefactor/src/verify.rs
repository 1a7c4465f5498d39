//! Certification of factorizations and brute-force oracles for small
//! instances.
//!
//! The verifier is the other half of the certifying contract: the pipeline
//! refuses to return a factorization that this module rejects, and the CLI
//! exposes the same check for files produced elsewhere.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::factorizer::Factorization;
use crate::multigraph::{EdgeId, Multigraph, VertexId};

/// A single defect found by the verifier, with its witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// factor count differs from the degree of a regular host
    WrongCount { expected: usize, found: usize },
    /// two edges of one factor meet at a vertex
    NotMatching { factor: usize, vertex: VertexId },
    /// a factor leaves vertices uncovered
    NotPerfect { factor: usize, uncovered: Vec<VertexId> },
    /// one edge id claimed by two factors
    Overlap { edge: EdgeId, factors: (usize, usize) },
    /// a factor names an edge the host graph does not have
    UnknownEdge { factor: usize, edge: EdgeId },
    /// a host edge claimed by no factor
    MissingEdge { edge: EdgeId },
    /// pair-level demand across factors exceeds the host multiplicity
    PairOverUsed {
        pair: (VertexId, VertexId),
        used: usize,
        multiplicity: usize,
    },
    /// pair-level demand across factors falls short of the host multiplicity
    PairUnderUsed {
        pair: (VertexId, VertexId),
        used: usize,
        multiplicity: usize,
    },
    /// a factor names a pair with no host edge, or a loop, or an id out of range
    BadPair { factor: usize, pair: (VertexId, VertexId) },
}

impl Violation {
    /// Coarse kind tag: one of not-matching, not-perfect, overlap,
    /// not-partition, wrong-count.
    pub fn kind(&self) -> &'static str {
        match self {
            Violation::WrongCount { .. } => "wrong-count",
            Violation::NotMatching { .. } => "not-matching",
            Violation::NotPerfect { .. } => "not-perfect",
            Violation::Overlap { .. } | Violation::PairOverUsed { .. } => "overlap",
            Violation::UnknownEdge { .. }
            | Violation::MissingEdge { .. }
            | Violation::PairUnderUsed { .. }
            | Violation::BadPair { .. } => "not-partition",
        }
    }
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: ", self.kind())?;
        match self {
            Violation::WrongCount { expected, found } => {
                write!(f, "{found} factors, expected {expected}")
            }
            Violation::NotMatching { factor, vertex } => {
                write!(f, "factor {factor} has two edges at vertex {vertex}")
            }
            Violation::NotPerfect { factor, uncovered } => {
                write!(f, "factor {factor} leaves vertices {uncovered:?} uncovered")
            }
            Violation::Overlap { edge, factors } => {
                write!(f, "edge {edge} claimed by factors {} and {}", factors.0, factors.1)
            }
            Violation::UnknownEdge { factor, edge } => {
                write!(f, "factor {factor} names unknown edge {edge}")
            }
            Violation::MissingEdge { edge } => write!(f, "edge {edge} claimed by no factor"),
            Violation::PairOverUsed { pair, used, multiplicity } => write!(
                f,
                "pair ({},{}) used {used} times, multiplicity {multiplicity}",
                pair.0, pair.1
            ),
            Violation::PairUnderUsed { pair, used, multiplicity } => write!(
                f,
                "pair ({},{}) used {used} times, multiplicity {multiplicity}",
                pair.0, pair.1
            ),
            Violation::BadPair { factor, pair } => {
                write!(f, "factor {factor} names pair ({},{}) with no edge", pair.0, pair.1)
            }
        }
    }
}

/// Outcome of a verification: `ok` iff `violations` is empty.
#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

impl VerificationReport {
    fn from_violations(violations: Vec<Violation>) -> Self {
        VerificationReport { ok: violations.is_empty(), violations }
    }
}

/// Checks a factorization against its host graph: every factor a perfect
/// matching, factors pairwise disjoint, union exactly the edge set, count
/// equal to the degree when the host is regular. All defects are reported,
/// not just the first.
pub fn verify_factorization(g: &Multigraph, f: &Factorization) -> VerificationReport {
    let mut violations = Vec::new();
    let n = g.num_vertices();
    if let Some(d) = g.is_regular() {
        if f.num_factors() != d {
            violations.push(Violation::WrongCount { expected: d, found: f.num_factors() });
        }
    }
    let mut owner: BTreeMap<EdgeId, usize> = BTreeMap::new();
    for (i, factor) in f.factors().iter().enumerate() {
        let mut at: Vec<Option<EdgeId>> = vec![None; n];
        for &e in factor {
            let Some((u, v)) = g.endpoints(e) else {
                violations.push(Violation::UnknownEdge { factor: i, edge: e });
                continue;
            };
            match owner.get(&e) {
                Some(&j) => violations.push(Violation::Overlap { edge: e, factors: (j, i) }),
                None => {
                    owner.insert(e, i);
                }
            }
            for w in [u, v] {
                if at[w].is_some() {
                    violations.push(Violation::NotMatching { factor: i, vertex: w });
                } else {
                    at[w] = Some(e);
                }
            }
        }
        let uncovered: Vec<VertexId> = (0..n).filter(|&v| at[v].is_none()).collect();
        if !uncovered.is_empty() {
            violations.push(Violation::NotPerfect { factor: i, uncovered });
        }
    }
    for e in g.edge_ids() {
        if !owner.contains_key(&e) {
            violations.push(Violation::MissingEdge { edge: e });
        }
    }
    VerificationReport::from_violations(violations)
}

/// Checks a factorization given as vertex pairs (no edge ids), the form
/// the factorization file format carries. Each factor must be a perfect
/// matching on the vertex set, and the aggregate demand on every vertex
/// pair must equal the host's multiplicity for that pair; together these
/// make the pair lists liftable to a partition of the concrete edges.
pub fn verify_pairing(g: &Multigraph, factors: &[Vec<(VertexId, VertexId)>]) -> VerificationReport {
    let mut violations = Vec::new();
    let n = g.num_vertices();
    if let Some(d) = g.is_regular() {
        if factors.len() != d {
            violations.push(Violation::WrongCount { expected: d, found: factors.len() });
        }
    }
    let mut demand: BTreeMap<(VertexId, VertexId), usize> = BTreeMap::new();
    for (i, factor) in factors.iter().enumerate() {
        let mut covered = vec![false; n];
        for &(u, v) in factor {
            if u >= n || v >= n || u == v {
                violations.push(Violation::BadPair { factor: i, pair: (u, v) });
                continue;
            }
            let key = (u.min(v), u.max(v));
            if g.pair_multiplicity(key.0, key.1) == 0 {
                violations.push(Violation::BadPair { factor: i, pair: key });
            } else {
                *demand.entry(key).or_insert(0) += 1;
            }
            for w in [u, v] {
                if covered[w] {
                    violations.push(Violation::NotMatching { factor: i, vertex: w });
                } else {
                    covered[w] = true;
                }
            }
        }
        let uncovered: Vec<VertexId> = (0..n).filter(|&v| !covered[v]).collect();
        if !uncovered.is_empty() {
            violations.push(Violation::NotPerfect { factor: i, uncovered });
        }
    }
    for (pair, mult) in g.pair_multiplicities() {
        let used = demand.get(&pair).copied().unwrap_or(0);
        if used > mult {
            violations.push(Violation::PairOverUsed { pair, used, multiplicity: mult });
        } else if used < mult {
            violations.push(Violation::PairUnderUsed { pair, used, multiplicity: mult });
        }
    }
    VerificationReport::from_violations(violations)
}

/// Largest instance the exhaustive oracles accept.
pub const ORACLE_CUTOFF: usize = 12;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("graph order {order} exceeds the oracle cutoff of {cutoff}")]
    CutoffExceeded { order: usize, cutoff: usize },
}

/// Pair-level edge budget plus the concrete ids behind each pair.
struct PairPool {
    avail: BTreeMap<(VertexId, VertexId), usize>,
    ids: BTreeMap<(VertexId, VertexId), Vec<EdgeId>>,
}

impl PairPool {
    fn new(g: &Multigraph) -> Self {
        let avail = g.pair_multiplicities();
        let mut ids: BTreeMap<(VertexId, VertexId), Vec<EdgeId>> = BTreeMap::new();
        for (e, u, v) in g.edges() {
            ids.entry((u.min(v), u.max(v))).or_default().push(e);
        }
        PairPool { avail, ids }
    }
}

/// All perfect matchings of the currently available pairs, each as a list
/// of pairs sorted by first vertex, produced in lexicographic order.
fn perfect_matchings(
    avail: &BTreeMap<(VertexId, VertexId), usize>,
    n: usize,
) -> Vec<Vec<(VertexId, VertexId)>> {
    let mut neighbors: Vec<Vec<VertexId>> = vec![Vec::new(); n];
    for (&(u, v), &m) in avail {
        if m > 0 {
            neighbors[u].push(v);
            neighbors[v].push(u);
        }
    }
    for list in &mut neighbors {
        list.sort_unstable();
    }
    let mut out = Vec::new();
    let mut used = vec![false; n];
    let mut current = Vec::with_capacity(n / 2);
    fn rec(
        neighbors: &[Vec<VertexId>],
        used: &mut [bool],
        current: &mut Vec<(VertexId, VertexId)>,
        out: &mut Vec<Vec<(VertexId, VertexId)>>,
    ) {
        let Some(u) = used.iter().position(|&x| !x) else {
            out.push(current.clone());
            return;
        };
        used[u] = true;
        for &v in &neighbors[u] {
            if v > u && !used[v] {
                used[v] = true;
                current.push((u, v));
                rec(neighbors, used, current, out);
                current.pop();
                used[v] = false;
            }
        }
        used[u] = false;
    }
    rec(&neighbors, &mut used, &mut current, &mut out);
    out
}

fn check_cutoff(g: &Multigraph) -> Result<(), OracleError> {
    if g.num_vertices() > ORACLE_CUTOFF {
        return Err(OracleError::CutoffExceeded {
            order: g.num_vertices(),
            cutoff: ORACLE_CUTOFF,
        });
    }
    Ok(())
}

/// Exhaustive factorization by backtracking over perfect matchings.
/// Returns a factorization iff one exists. Instances above
/// [`ORACLE_CUTOFF`] vertices are rejected.
///
/// ```
/// use onefactor::instances::extremal_graph;
/// use onefactor::multigraph::Multigraph;
/// use onefactor::verify::brute_force_factorize;
///
/// let f = brute_force_factorize(&Multigraph::complete(4)).unwrap();
/// assert_eq!(f.unwrap().num_factors(), 3);
///
/// // degree rn - 1 = 5 but no 1-factorization exists
/// let g = extremal_graph(3, 2).unwrap();
/// assert!(brute_force_factorize(&g).unwrap().is_none());
/// ```
pub fn brute_force_factorize(g: &Multigraph) -> Result<Option<Factorization>, OracleError> {
    check_cutoff(g)?;
    let n = g.num_vertices();
    if n % 2 != 0 {
        return Ok(None);
    }
    let Some(d) = g.is_regular() else {
        return Ok(None);
    };
    if d == 0 {
        return Ok(Some(Factorization::new(Vec::new())));
    }

    // Peel perfect matchings until nothing is left. Successive matchings
    // are required to be lexicographically non-decreasing, which kills
    // the permutation symmetry among identical peels.
    fn peel(
        avail: &mut BTreeMap<(VertexId, VertexId), usize>,
        n: usize,
        floor: Option<&Vec<(VertexId, VertexId)>>,
        acc: &mut Vec<Vec<(VertexId, VertexId)>>,
    ) -> bool {
        if avail.values().all(|&m| m == 0) {
            return true;
        }
        let candidates = perfect_matchings(avail, n);
        for m in candidates {
            if let Some(prev) = floor {
                if m < *prev {
                    continue;
                }
            }
            for pair in &m {
                *avail.get_mut(pair).expect("pair available") -= 1;
            }
            acc.push(m.clone());
            if peel(avail, n, Some(&m), acc) {
                return true;
            }
            acc.pop();
            for pair in &m {
                *avail.get_mut(pair).expect("pair available") += 1;
            }
        }
        false
    }

    let mut pool = PairPool::new(g);
    let mut acc = Vec::new();
    if !peel(&mut pool.avail, n, None, &mut acc) {
        return Ok(None);
    }
    // lift pair factors to concrete edge ids, lowest id first per pair
    let mut factors = Vec::with_capacity(acc.len());
    for matching in &acc {
        let mut factor = Vec::with_capacity(matching.len());
        for pair in matching {
            let ids = pool.ids.get_mut(pair).expect("pair has ids");
            factor.push(ids.remove(0));
        }
        factor.sort_unstable();
        factors.push(factor);
    }
    Ok(Some(Factorization::new(factors)))
}

/// Maximum number of pairwise edge-disjoint perfect matchings, by
/// backtracking. Same cutoff as [`brute_force_factorize`].
pub fn max_disjoint_factors(g: &Multigraph) -> Result<usize, OracleError> {
    check_cutoff(g)?;
    let n = g.num_vertices();
    if n % 2 != 0 || n == 0 {
        return Ok(0);
    }
    let upper = g.min_degree();
    if upper == 0 {
        return Ok(0);
    }

    fn search(
        avail: &mut BTreeMap<(VertexId, VertexId), usize>,
        n: usize,
        floor: Option<&Vec<(VertexId, VertexId)>>,
        depth: usize,
        best: &mut usize,
        upper: usize,
    ) {
        if depth > *best {
            *best = depth;
        }
        if *best == upper {
            return;
        }
        let candidates = perfect_matchings(avail, n);
        for m in candidates {
            if let Some(prev) = floor {
                if m < *prev {
                    continue;
                }
            }
            for pair in &m {
                *avail.get_mut(pair).expect("pair available") -= 1;
            }
            search(avail, n, Some(&m), depth + 1, best, upper);
            for pair in &m {
                *avail.get_mut(pair).expect("pair available") += 1;
            }
            if *best == upper {
                return;
            }
        }
    }

    let mut avail = g.pair_multiplicities();
    let mut best = 0;
    search(&mut avail, n, None, 0, &mut best, upper);
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k4_factorization_verifies() {
        let g = Multigraph::complete(4);
        // edges: 0=01 1=02 2=03 3=12 4=13 5=23
        let f = Factorization::new(vec![vec![0, 5], vec![1, 4], vec![2, 3]]);
        let report = verify_factorization(&g, &f);
        assert!(report.ok, "{:?}", report.violations);
    }

    #[test]
    fn dropped_edge_reported_as_not_perfect_and_missing() {
        let g = Multigraph::complete(4);
        let f = Factorization::new(vec![vec![0], vec![1, 4], vec![2, 3]]);
        let report = verify_factorization(&g, &f);
        assert!(!report.ok);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::NotPerfect { factor: 0, .. })));
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::MissingEdge { edge: 5 })));
    }

    #[test]
    fn duplicated_edge_reported_as_overlap() {
        let g = Multigraph::complete(4);
        let f = Factorization::new(vec![vec![0, 5], vec![0, 5], vec![2, 3]]);
        let report = verify_factorization(&g, &f);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::Overlap { edge: 0, factors: (0, 1) })));
    }

    #[test]
    fn adjacent_edges_in_factor_reported_as_not_matching() {
        let g = Multigraph::complete(4);
        let f = Factorization::new(vec![vec![0, 1], vec![2, 3], vec![4, 5]]);
        let report = verify_factorization(&g, &f);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::NotMatching { factor: 0, vertex: 0 })));
    }

    #[test]
    fn wrong_count_on_regular_host() {
        let g = Multigraph::complete(4);
        let f = Factorization::new(vec![vec![0, 5], vec![1, 4]]);
        let report = verify_factorization(&g, &f);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::WrongCount { expected: 3, found: 2 })));
    }

    #[test]
    fn brute_force_k4() {
        let g = Multigraph::complete(4);
        let f = brute_force_factorize(&g).unwrap().expect("K_4 factorizes");
        assert_eq!(f.num_factors(), 3);
        assert!(verify_factorization(&g, &f).ok);
    }

    #[test]
    fn brute_force_two_triangles() {
        // odd components: no perfect matching at all
        let mut g = Multigraph::empty(6);
        for (u, v) in [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)] {
            g.add_edge(u, v).unwrap();
        }
        assert!(brute_force_factorize(&g).unwrap().is_none());
        assert_eq!(max_disjoint_factors(&g).unwrap(), 0);
    }

    #[test]
    fn cutoff_enforced() {
        let g = Multigraph::complete(14);
        assert!(matches!(
            brute_force_factorize(&g),
            Err(OracleError::CutoffExceeded { order: 14, cutoff: 12 })
        ));
    }

    #[test]
    fn max_disjoint_factors_k4() {
        let g = Multigraph::complete(4);
        assert_eq!(max_disjoint_factors(&g).unwrap(), 3);
    }

    #[test]
    fn pairing_verifier_k4() {
        let g = Multigraph::complete(4);
        let factors = vec![
            vec![(0, 1), (2, 3)],
            vec![(0, 2), (1, 3)],
            vec![(0, 3), (1, 2)],
        ];
        assert!(verify_pairing(&g, &factors).ok);
        let broken = vec![
            vec![(0, 1), (2, 3)],
            vec![(0, 1), (2, 3)],
            vec![(0, 3), (1, 2)],
        ];
        let report = verify_pairing(&g, &broken);
        assert!(!report.ok);
        assert!(report.violations.iter().any(|v| v.kind() == "overlap"));
    }
}
