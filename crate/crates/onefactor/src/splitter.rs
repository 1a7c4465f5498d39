//! Randomized balanced bipartition with verified degree deviations.
//!
//! The split pairs consecutive vertex ids and flips one fair coin per pair.
//! The balanced variant retries with derived sub-seeds until every vertex
//! sees nearly the same number of edges into both sides; the probabilistic
//! argument for why this succeeds is not computed, the result is simply
//! verified (Las Vegas style).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::multigraph::{Multigraph, VertexSet};

#[derive(Debug, Error)]
pub enum SplitError {
    #[error("graph order {0} is odd; a balanced split needs an even order")]
    OddOrder(usize),
    #[error("deviation bound must be positive, got {0}")]
    NonPositiveBound(f64),
    #[error(
        "no split within bound {bound} after {retries} retries (best max deviation {best_deviation})"
    )]
    RetriesExhausted {
        bound: f64,
        retries: usize,
        best_deviation: usize,
        /// the minimum-max-deviation split seen
        best: Partition,
    },
}

/// An equal-size bipartition (A, B) with its per-vertex degree ledger.
#[derive(Debug, Clone)]
pub struct Partition {
    a: VertexSet,
    b: VertexSet,
    /// per-vertex |d_A(v) - d_B(v)|
    deviations: Vec<usize>,
    /// the deviation cap this partition was tested against
    bound: f64,
}

impl Partition {
    pub fn a(&self) -> &VertexSet {
        &self.a
    }

    pub fn b(&self) -> &VertexSet {
        &self.b
    }

    pub fn deviations(&self) -> &[usize] {
        &self.deviations
    }

    pub fn max_deviation(&self) -> usize {
        self.deviations.iter().copied().max().unwrap_or(0)
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    /// Recomputes the deviation ledger from the host graph.
    pub fn verify_deviations(&self, g: &Multigraph) -> bool {
        (0..g.num_vertices()).all(|v| {
            let da = g.degree_into(v, &self.a);
            let db = g.degree_into(v, &self.b);
            da.abs_diff(db) == self.deviations[v]
        })
    }
}

/// The default deviation cap, `n^(2/3)` for a graph of order `2n`.
pub fn default_split_bound(half_order: usize) -> f64 {
    (half_order as f64).powf(2.0 / 3.0)
}

/// Sharper alternative cap, `sqrt(n log n)`.
pub fn sqrt_n_log_n_bound(half_order: usize) -> f64 {
    let n = half_order as f64;
    (n * n.ln()).sqrt()
}

fn split_with_rng(g: &Multigraph, rng: &mut ChaCha8Rng, bound: f64) -> Partition {
    let order = g.num_vertices();
    let n = order / 2;
    let mut side_a = vec![false; order];
    for i in 0..n {
        // pair (2i, 2i+1); one coin decides which goes to A
        if rng.gen::<bool>() {
            side_a[2 * i] = true;
        } else {
            side_a[2 * i + 1] = true;
        }
    }
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    for (v, &in_a) in side_a.iter().enumerate() {
        if in_a {
            a.push(v);
        } else {
            b.push(v);
        }
    }
    let deviations = (0..order)
        .map(|v| {
            let da = g.incident(v).iter().filter(|(w, _)| side_a[*w]).count();
            let db = g.degree(v) - da;
            da.abs_diff(db)
        })
        .collect();
    Partition {
        a: VertexSet::new(a),
        b: VertexSet::new(b),
        deviations,
        bound,
    }
}

/// One random split of the vertex pairs `(2i, 2i+1)`, fully determined by
/// the seed. No deviation bound is enforced.
pub fn random_split(g: &Multigraph, seed: u64) -> Result<Partition, SplitError> {
    if g.num_vertices() % 2 != 0 {
        return Err(SplitError::OddOrder(g.num_vertices()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(split_with_rng(g, &mut rng, f64::INFINITY))
}

/// Retries seed-derived splits until the maximum per-vertex deviation is
/// strictly below `bound`. The returned partition's deviations are always
/// recomputed, never trusted. On exhaustion the best split seen is reported.
///
/// ```
/// use onefactor::multigraph::Multigraph;
/// use onefactor::splitter::balanced_split;
///
/// let g = Multigraph::complete(20);
/// let p = balanced_split(&g, 8.0, 50, 1).unwrap();
/// assert_eq!(p.a().len(), 10);
/// assert!((p.max_deviation() as f64) < 8.0);
/// assert!(p.verify_deviations(&g));
/// ```
pub fn balanced_split(
    g: &Multigraph,
    bound: f64,
    max_retries: usize,
    seed: u64,
) -> Result<Partition, SplitError> {
    if g.num_vertices() % 2 != 0 {
        return Err(SplitError::OddOrder(g.num_vertices()));
    }
    if bound <= 0.0 {
        return Err(SplitError::NonPositiveBound(bound));
    }
    let mut seeder = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<Partition> = None;
    for _ in 0..max_retries {
        let sub_seed: u64 = seeder.gen();
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed);
        let candidate = split_with_rng(g, &mut rng, bound);
        if (candidate.max_deviation() as f64) < bound {
            debug_assert!(candidate.verify_deviations(g));
            return Ok(candidate);
        }
        let better = match &best {
            None => true,
            Some(p) => candidate.max_deviation() < p.max_deviation(),
        };
        if better {
            best = Some(candidate);
        }
    }
    let best = best.expect("max_retries > 0 yields at least one candidate");
    let best_deviation = best.max_deviation();
    Err(SplitError::RetriesExhausted {
        bound,
        retries: max_retries,
        best_deviation,
        best,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn odd_order_rejected() {
        let g = Multigraph::empty(5);
        assert!(matches!(random_split(&g, 0), Err(SplitError::OddOrder(5))));
    }

    #[test]
    fn edgeless_split_has_zero_deviation() {
        let g = Multigraph::empty(8);
        let p = random_split(&g, 42).unwrap();
        assert_eq!(p.max_deviation(), 0);
        assert_eq!(p.a().len(), 4);
        assert_eq!(p.b().len(), 4);
    }

    #[test]
    fn same_seed_same_partition() {
        let g = Multigraph::complete(10);
        let p1 = random_split(&g, 7).unwrap();
        let p2 = random_split(&g, 7).unwrap();
        assert_eq!(p1.a(), p2.a());
        assert_eq!(p1.b(), p2.b());
    }

    #[test]
    fn k4_every_split_has_unit_deviation() {
        // in K_4 each vertex has degree 3 split 1/2 or 2/1 for any 2+2 split
        let g = Multigraph::complete(4);
        for seed in 0..16 {
            let p = random_split(&g, seed).unwrap();
            assert!(p.deviations().iter().all(|&d| d == 1));
        }
    }

    #[test]
    fn degree_sum_identity() {
        let g = Multigraph::complete(12);
        let p = random_split(&g, 3).unwrap();
        for v in 0..12 {
            assert_eq!(
                g.degree(v),
                g.degree_into(v, p.a()) + g.degree_into(v, p.b())
            );
        }
        assert!(p.verify_deviations(&g));
    }

    #[test]
    fn balanced_split_respects_bound_or_reports_best() {
        let g = Multigraph::complete(20);
        match balanced_split(&g, 4.0, 50, 11) {
            Ok(p) => assert!((p.max_deviation() as f64) < 4.0),
            Err(SplitError::RetriesExhausted { best, .. }) => {
                assert!(best.verify_deviations(&g));
            }
            Err(other) => panic!("unexpected error {other}"),
        }
    }
}
