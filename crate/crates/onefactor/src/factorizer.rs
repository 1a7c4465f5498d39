//! The 1-factorization pipeline for dense regular multigraphs of even order.
//!
//! Outline, for a regular graph of order `2n`, degree `d`, multiplicity at
//! most `r`:
//!
//! 1. split the vertices into equal halves A, B with small per-vertex
//!    degree deviation;
//! 2. color both induced halves with a shared equalized palette of
//!    `k = max(deg) + r` colors, aligning class sizes across the halves;
//! 3. grow every one of the `k` classes into a perfect matching by
//!    exchanging five-edge alternating paths through the cross edges
//!    (coloring a direct cross edge when the missed pair shares one);
//! 4. color the edges uncolored by the exchanges (`R_A`, `R_B`) with `j`
//!    fresh equalized colors and complete each of those classes with a
//!    Hall matching on the remaining cross edges;
//! 5. the still-uncolored edges form a regular bipartite graph; finish it
//!    with exactly `d - k - j` colors.
//!
//! Success is certified: a returned factorization has passed
//! [`crate::verify::verify_factorization`]. Failure is explicit and
//! stage-tagged, with a witness.

use thiserror::Error;

use crate::coloring::{AlternatingPath, PartialColoring};
use crate::multigraph::{EdgeId, Multigraph, VertexId, VertexSet};
use crate::palette::{self, MatchingWitness, PaletteError};
use crate::splitter::{self, Partition, SplitError};
use crate::verify;

/// All pipeline threshold knobs.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    /// declared multiplicity bound
    pub r: usize,
    /// good-degree cap gamma; default ceil(n^(5/6))
    pub good_degree_cap: usize,
    /// residual palette size j; default gamma + r + 1, clamped to d - k at run time
    pub residual_palette: usize,
    /// split deviation cap; default n^(2/3)
    pub split_bound: f64,
    pub split_retries: usize,
    /// whole-pipeline attempts; later attempts use derived seeds
    pub attempts: usize,
    pub seed: u64,
    /// refuse inputs below the analytic degree/size thresholds
    pub strict_preconditions: bool,
}

impl PipelineConfig {
    /// Defaults for a graph of order `2 * half_order` with multiplicity
    /// bound `r`.
    pub fn defaults(half_order: usize, r: usize) -> Self {
        let n = half_order as f64;
        let gamma = n.powf(5.0 / 6.0).ceil() as usize;
        let gamma = gamma.max(1);
        PipelineConfig {
            r: r.max(1),
            good_degree_cap: gamma,
            residual_palette: gamma + r.max(1) + 1,
            split_bound: splitter::default_split_bound(half_order).max(1.0),
            split_retries: 50,
            attempts: 3,
            seed: 0,
            strict_preconditions: false,
        }
    }

    /// Defaults derived from a concrete graph. The split bound is widened
    /// to a Hoeffding-style cap when the asymptotic `n^(2/3)` is below the
    /// deviation a random split actually concentrates at (about
    /// `sqrt(r d)`), which happens for every desk-scale dense instance.
    pub fn for_graph(g: &Multigraph) -> Self {
        let n = g.num_vertices() / 2;
        let r = g.multiplicity().max(1);
        let mut config = Self::defaults(n, r);
        let d = g.max_degree() as f64;
        let concentration = (2.0 * r as f64 * d * (8.0 * n.max(1) as f64).ln()).sqrt();
        config.split_bound = config.split_bound.max(concentration);
        config
    }
}

/// An ordered list of `d` perfect matchings partitioning the edge set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    factors: Vec<Vec<EdgeId>>,
}

impl Factorization {
    pub fn new(factors: Vec<Vec<EdgeId>>) -> Self {
        Factorization { factors }
    }

    pub fn factors(&self) -> &[Vec<EdgeId>] {
        &self.factors
    }

    pub fn num_factors(&self) -> usize {
        self.factors.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Split,
    Step1,
    Step2,
    Step3,
    Step4,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Stage::Split => "split",
            Stage::Step1 => "step1",
            Stage::Step2 => "step2",
            Stage::Step3 => "step3",
            Stage::Step4 => "step4",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone)]
pub enum FailureDetail {
    /// no split met the deviation bound within the retry budget
    SplitExhausted {
        bound: f64,
        retries: usize,
        best_deviation: usize,
    },
    /// no alternating path for a missed pair; candidate set sizes recorded
    NoAlternatingPath {
        a: VertexId,
        b: VertexId,
        color: usize,
        n_a: usize,
        n_b: usize,
        m_a: usize,
        m_b: usize,
    },
    /// a residual cross subgraph admits no perfect matching
    HallDeficiency { color: usize, set: VertexSet },
    /// the residual coloring needs more colors than remain below d
    ResidualPaletteTooSmall { required: usize, available: usize },
    /// an internal pipeline invariant tripped
    InvariantViolation { what: String },
}

impl std::fmt::Display for FailureDetail {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FailureDetail::SplitExhausted { bound, retries, best_deviation } => write!(
                f,
                "no split with max deviation < {bound} in {retries} retries (best {best_deviation})"
            ),
            FailureDetail::NoAlternatingPath { a, b, color, n_a, n_b, m_a, m_b } => write!(
                f,
                "no alternating path for pair ({a},{b}) on color {color} (|N_A|={n_a}, |N_B|={n_b}, |M_A|={m_a}, |M_B|={m_b})"
            ),
            FailureDetail::HallDeficiency { color, set } => write!(
                f,
                "residual class {color}: Hall deficiency set of {} vertices",
                set.len()
            ),
            FailureDetail::ResidualPaletteTooSmall { required, available } => write!(
                f,
                "residual coloring needs {required} colors but only {available} remain"
            ),
            FailureDetail::InvariantViolation { what } => write!(f, "invariant violation: {what}"),
        }
    }
}

/// Stage-tagged failure with the partial coloring at the point of failure.
#[derive(Debug, Clone)]
pub struct FailureReport {
    pub stage: Stage,
    pub detail: FailureDetail,
    /// colored edges at failure time, (edge, color)
    pub partial: Vec<(EdgeId, usize)>,
}

#[derive(Debug, Error)]
pub enum FactorizeError {
    #[error("input graph is not regular")]
    NotRegular,
    #[error("input graph has odd order {0}")]
    OddOrder(usize),
    #[error("graph multiplicity {found} exceeds configured bound {bound}")]
    MultiplicityExceeded { found: usize, bound: usize },
    #[error("asymptotic precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("pipeline failed at stage {}: {}", .0.stage, .0.detail)]
    Failure(FailureReport),
}

/// Per-run counters, reported by the CLI as key=value lines.
#[derive(Debug, Clone, Default)]
pub struct PipelineStats {
    pub order: usize,
    pub degree: usize,
    pub k: usize,
    pub j: usize,
    pub split_max_deviation: usize,
    pub exchanges: usize,
    pub direct_colorings: usize,
    pub triple_exchanges: usize,
    pub residual_edges: usize,
}

/// Tracks the uncolored edges inside one half during steps 2 and 3.
#[derive(Debug, Clone)]
pub struct Residual {
    edges: Vec<EdgeId>,
    deg: Vec<usize>,
}

impl Residual {
    fn new(order: usize) -> Self {
        Residual { edges: Vec::new(), deg: vec![0; order] }
    }

    fn insert(&mut self, g: &Multigraph, e: EdgeId) {
        let (u, v) = g.endpoints(e).expect("edge in host");
        self.edges.push(e);
        self.deg[u] += 1;
        self.deg[v] += 1;
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.deg[v]
    }

    pub fn max_degree(&self) -> usize {
        self.deg.iter().copied().max().unwrap_or(0)
    }

    pub fn edge_ids(&self) -> &[EdgeId] {
        &self.edges
    }
}

/// Runs the whole pipeline: split, base colorings, exchanges, residual
/// matchings, bipartite finish, and final certification. Stage failures
/// are retried up to `config.attempts` times with derived seeds (a fresh
/// seed means a fresh split and a fresh trajectory); input validation
/// errors are final.
///
/// ```
/// use onefactor::factorizer::{factorize, PipelineConfig};
/// use onefactor::instances::regular_from_factors;
/// use onefactor::verify::verify_factorization;
///
/// // union of 30 round-robin factors of K_20, each used at most twice:
/// // 30-regular, multiplicity <= 2, 1-factorizable by construction
/// let g = regular_from_factors(20, 30, 2, 3).unwrap();
/// let config = PipelineConfig::for_graph(&g);
/// let (f, stats) = factorize(&g, &config).unwrap();
/// assert_eq!(f.num_factors(), 30);
/// assert_eq!(stats.k + stats.j + (30 - stats.k - stats.j), 30);
/// assert!(verify_factorization(&g, &f).ok);
/// ```
pub fn factorize(
    g: &Multigraph,
    config: &PipelineConfig,
) -> Result<(Factorization, PipelineStats), FactorizeError> {
    use rand::{Rng, SeedableRng};
    let mut seeder = rand_chacha::ChaCha8Rng::seed_from_u64(config.seed ^ 0x5eed);
    let mut last = None;
    for attempt in 0..config.attempts.max(1) {
        let mut cfg = config.clone();
        if attempt > 0 {
            cfg.seed = seeder.gen();
        }
        match factorize_once(g, &cfg) {
            Ok(out) => return Ok(out),
            Err(e @ FactorizeError::Failure(_)) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt ran"))
}

fn factorize_once(
    g: &Multigraph,
    config: &PipelineConfig,
) -> Result<(Factorization, PipelineStats), FactorizeError> {
    let mut pipeline = Pipeline::validate(g, config)?;
    pipeline.split()?;
    pipeline.step1_base_colorings()?;
    pipeline.step2_complete_factors()?;
    pipeline.step3_residual()?;
    let factorization = pipeline.step4_finish()?;

    // certifying return path: never hand out an unchecked factorization
    let report = verify::verify_factorization(g, &factorization);
    if !report.ok {
        return Err(pipeline.invariant_failure(
            Stage::Step4,
            format!("certification failed: {:?}", report.violations),
        ));
    }
    Ok((factorization, pipeline.stats))
}

/// Pipeline state shared by the four steps. Exposed so that the steps can
/// be driven (and inspected) individually in tests.
pub struct Pipeline<'g> {
    g: &'g Multigraph,
    config: PipelineConfig,
    half_order: usize,
    degree: usize,
    partition: Option<Partition>,
    side_a: Vec<bool>,
    coloring: Option<PartialColoring<'g>>,
    res_a: Residual,
    res_b: Residual,
    k: usize,
    j: usize,
    /// colors in 0..k missing each vertex right after step 1
    missed_after_step1: Vec<usize>,
    /// colored cross edges incident with each vertex
    cross_colored: Vec<usize>,
    pub stats: PipelineStats,
}

impl<'g> Pipeline<'g> {
    /// Validates the input and the strict preconditions, if enforced.
    pub fn validate(g: &'g Multigraph, config: &PipelineConfig) -> Result<Self, FactorizeError> {
        let order = g.num_vertices();
        if order % 2 != 0 || order == 0 {
            return Err(FactorizeError::OddOrder(order));
        }
        let degree = g.is_regular().ok_or(FactorizeError::NotRegular)?;
        let mult = g.multiplicity();
        if mult > config.r {
            return Err(FactorizeError::MultiplicityExceeded { found: mult, bound: config.r });
        }
        let n = order / 2;
        if config.strict_preconditions {
            let n_f = n as f64;
            let r_f = config.r as f64;
            let n56 = n_f.powf(5.0 / 6.0);
            if n56 <= 3.0 * r_f {
                return Err(FactorizeError::PreconditionViolated(format!(
                    "n^(5/6) = {n56:.3} must exceed 3r = {:.3}",
                    3.0 * r_f
                )));
            }
            let threshold = r_f * n_f + 29.0 * r_f * n56;
            if (degree as f64) <= threshold {
                return Err(FactorizeError::PreconditionViolated(format!(
                    "degree {degree} must exceed rn + 29rn^(5/6) = {threshold:.3}"
                )));
            }
        }
        Ok(Pipeline {
            g,
            config: config.clone(),
            half_order: n,
            degree,
            partition: None,
            side_a: vec![false; order],
            coloring: None,
            res_a: Residual::new(order),
            res_b: Residual::new(order),
            k: 0,
            j: 0,
            missed_after_step1: vec![0; order],
            cross_colored: vec![0; order],
            stats: PipelineStats {
                order,
                degree,
                ..Default::default()
            },
        })
    }

    fn failure(&self, stage: Stage, detail: FailureDetail) -> FactorizeError {
        let partial = self
            .coloring
            .as_ref()
            .map(|c| c.assignments().collect())
            .unwrap_or_default();
        FactorizeError::Failure(FailureReport { stage, detail, partial })
    }

    fn invariant_failure(&self, stage: Stage, what: String) -> FactorizeError {
        self.failure(stage, FailureDetail::InvariantViolation { what })
    }

    pub fn partition(&self) -> Option<&Partition> {
        self.partition.as_ref()
    }

    pub fn coloring(&self) -> Option<&PartialColoring<'g>> {
        self.coloring.as_ref()
    }

    pub fn residuals(&self) -> (&Residual, &Residual) {
        (&self.res_a, &self.res_b)
    }

    pub fn palette_split(&self) -> (usize, usize) {
        (self.k, self.j)
    }

    /// Balanced split with verified deviations.
    pub fn split(&mut self) -> Result<(), FactorizeError> {
        let partition = match splitter::balanced_split(
            self.g,
            self.config.split_bound,
            self.config.split_retries,
            self.config.seed,
        ) {
            Ok(p) => p,
            Err(SplitError::RetriesExhausted { bound, retries, best_deviation, .. }) => {
                return Err(self.failure(
                    Stage::Split,
                    FailureDetail::SplitExhausted { bound, retries, best_deviation },
                ))
            }
            Err(SplitError::OddOrder(o)) => return Err(FactorizeError::OddOrder(o)),
            Err(SplitError::NonPositiveBound(b)) => {
                return Err(self.invariant_failure(Stage::Split, format!("bad bound {b}")))
            }
        };
        if self.config.strict_preconditions {
            let n_f = self.half_order as f64;
            let r_f = self.config.r as f64;
            let floor = r_f * n_f / 2.0 + 14.0 * r_f * self.config.good_degree_cap as f64;
            for v in 0..self.g.num_vertices() {
                let da = self.g.degree_into(v, partition.a());
                let db = self.g.degree(v) - da;
                if (da as f64) <= floor || (db as f64) <= floor {
                    return Err(FactorizeError::PreconditionViolated(format!(
                        "vertex {v}: d_A = {da}, d_B = {db}, both must exceed rn/2 + 14r*gamma = {floor:.3}"
                    )));
                }
            }
        }
        for v in partition.a().iter() {
            self.side_a[v] = true;
        }
        self.stats.split_max_deviation = partition.max_deviation();
        self.partition = Some(partition);
        Ok(())
    }

    /// Step 1: equalized colorings of both halves on a shared palette of
    /// `k = max(deg(G_A), deg(G_B)) + r` colors with aligned class sizes.
    pub fn step1_base_colorings(&mut self) -> Result<(), FactorizeError> {
        let partition = self.partition.clone().expect("split before step1");
        let ga = self.g.induced(partition.a());
        let gb = self.g.induced(partition.b());
        if ga.num_edges() != gb.num_edges() {
            return Err(self.invariant_failure(
                Stage::Step1,
                format!(
                    "half edge counts differ: {} vs {} (input not regular?)",
                    ga.num_edges(),
                    gb.num_edges()
                ),
            ));
        }
        let r = self.config.r;
        let k = ga.max_degree().max(gb.max_degree()) + r;
        self.k = k;
        self.stats.k = k;

        let color_half = |half: &Multigraph| -> Result<Vec<(EdgeId, usize)>, PaletteError> {
            let colored = palette::vizing_color(half, r)?;
            let equalized = palette::equalize(colored, k)?;
            Ok(equalized.assignments().collect())
        };
        let ca = color_half(&ga)
            .map_err(|e| self.invariant_failure(Stage::Step1, format!("half A coloring: {e}")))?;
        let cb = color_half(&gb)
            .map_err(|e| self.invariant_failure(Stage::Step1, format!("half B coloring: {e}")))?;

        // Align class sizes across the halves: rank both size profiles and
        // rename the B colors so that equal ranks share a color index.
        let sizes = |assignments: &[(EdgeId, usize)]| {
            let mut s = vec![0usize; k];
            for &(_, c) in assignments {
                s[c] += 1;
            }
            s
        };
        let sa = sizes(&ca);
        let sb = sizes(&cb);
        let ranked = |s: &[usize]| {
            let mut idx: Vec<usize> = (0..k).collect();
            idx.sort_by_key(|&c| (s[c], c));
            idx
        };
        let rank_a = ranked(&sa);
        let rank_b = ranked(&sb);
        let mut rename_b = vec![0usize; k];
        for (pos, &cb_color) in rank_b.iter().enumerate() {
            rename_b[cb_color] = rank_a[pos];
        }

        let mut coloring = PartialColoring::new(self.g, k);
        for &(e, c) in &ca {
            coloring
                .assign(e, c)
                .map_err(|err| self.invariant_failure(Stage::Step1, format!("merge A: {err}")))?;
        }
        for &(e, c) in &cb {
            coloring
                .assign(e, rename_b[c])
                .map_err(|err| self.invariant_failure(Stage::Step1, format!("merge B: {err}")))?;
        }

        // per-color class sizes must now agree between the halves
        let merged_sa = {
            let mut s = vec![0usize; k];
            for (e, c) in coloring.assignments() {
                let (u, _) = self.g.endpoints(e).expect("edge");
                if self.side_a[u] {
                    s[c] += 1;
                }
            }
            s
        };
        let merged_sb = {
            let mut s = vec![0usize; k];
            for (e, c) in coloring.assignments() {
                let (u, _) = self.g.endpoints(e).expect("edge");
                if !self.side_a[u] {
                    s[c] += 1;
                }
            }
            s
        };
        if merged_sa != merged_sb {
            return Err(self.invariant_failure(
                Stage::Step1,
                "per-color class sizes differ between the halves".into(),
            ));
        }

        // quantitative checks: per-vertex missed colors < bound + r, and
        // per color fewer than 2*bound + 3 missed vertices per side
        let bound = self.config.split_bound;
        for v in 0..self.g.num_vertices() {
            let missed = (0..k).filter(|&c| coloring.misses(v, c)).count();
            self.missed_after_step1[v] = missed;
            if (missed as f64) >= bound + r as f64 {
                return Err(self.invariant_failure(
                    Stage::Step1,
                    format!("vertex {v} misses {missed} colors, expected < {bound} + {r}"),
                ));
            }
        }
        for c in 0..k {
            let miss_a = partition.a().iter().filter(|&v| coloring.misses(v, c)).count();
            let miss_b = partition.b().iter().filter(|&v| coloring.misses(v, c)).count();
            let cap = 2.0 * bound + 3.0;
            if (miss_a as f64) >= cap || (miss_b as f64) >= cap {
                return Err(self.invariant_failure(
                    Stage::Step1,
                    format!(
                        "color {c} misses {miss_a}/{miss_b} vertices per side, expected < {cap}"
                    ),
                ));
            }
            if miss_a != miss_b {
                return Err(self.invariant_failure(
                    Stage::Step1,
                    format!("color {c} misses {miss_a} vertices in A but {miss_b} in B"),
                ));
            }
        }
        self.coloring = Some(coloring);
        Ok(())
    }

    /// Lowest-id uncolored edge joining `u` and `v`.
    fn uncolored_edge_between(
        &self,
        coloring: &PartialColoring,
        u: VertexId,
        v: VertexId,
    ) -> Option<EdgeId> {
        self.g
            .incident(u)
            .iter()
            .filter(|&&(w, e)| w == v && coloring.color_of(e).is_none())
            .map(|&(_, e)| e)
            .min()
    }

    /// The good `color`-edge at `w` inside its own half, if any: the edge
    /// must join two vertices of the same side and both ends must have
    /// residual degree below the cap.
    fn good_colored_edge(
        &self,
        coloring: &PartialColoring,
        w: VertexId,
        color: usize,
    ) -> Option<(EdgeId, VertexId)> {
        let gamma = self.config.good_degree_cap;
        let e = coloring.edge_at(w, color)?;
        let other = self.g.other_endpoint(e, w)?;
        if self.side_a[w] != self.side_a[other] {
            return None;
        }
        let res = if self.side_a[w] { &self.res_a } else { &self.res_b };
        if res.degree(w) < gamma && res.degree(other) < gamma {
            Some((e, other))
        } else {
            None
        }
    }

    /// Searches for the five-edge alternating path a-b1-b2-a2-a1-b whose
    /// even edges are good edges colored `color` inside the halves and
    /// whose odd edges are uncolored cross edges. Candidates are scanned
    /// in ascending vertex order, exhausting all (b1, a2) combinations.
    pub fn find_alternating_path(
        &self,
        coloring: &PartialColoring,
        a: VertexId,
        b: VertexId,
        color: usize,
    ) -> Option<AlternatingPath> {
        let mut b1_candidates: Vec<(VertexId, EdgeId)> = self
            .g
            .incident(a)
            .iter()
            .filter(|&&(w, e)| {
                self.side_a[w] != self.side_a[a] && coloring.color_of(e).is_none() && w != b
            })
            .copied()
            .collect();
        b1_candidates.sort_unstable();
        b1_candidates.dedup_by_key(|&mut (w, _)| w); // keep lowest edge id per vertex

        for &(b1, e1) in &b1_candidates {
            let Some((eb, b2)) = self.good_colored_edge(coloring, b1, color) else {
                continue;
            };
            if b2 == b {
                continue;
            }
            let mut a2_candidates: Vec<(VertexId, EdgeId)> = self
                .g
                .incident(b2)
                .iter()
                .filter(|&&(w, e)| {
                    self.side_a[w] == self.side_a[a]
                        && w != a
                        && coloring.color_of(e).is_none()
                })
                .copied()
                .collect();
            a2_candidates.sort_unstable();
            a2_candidates.dedup_by_key(|&mut (w, _)| w);
            for &(a2, e2) in &a2_candidates {
                let Some((ea, a1)) = self.good_colored_edge(coloring, a2, color) else {
                    continue;
                };
                if a1 == a {
                    continue;
                }
                let Some(e3) = self.uncolored_edge_between(coloring, a1, b) else {
                    continue;
                };
                return AlternatingPath::new(
                    coloring,
                    [a, b1, b2, a2, a1, b],
                    [e1, eb, e2, ea, e3],
                    color,
                )
                .ok();
            }
        }
        None
    }

    /// Fallback when no five-edge path exists: a three-edge alternating
    /// path a-b1-a1-b whose middle edge is a colored *cross* edge. The
    /// exchange touches no intra-half edge, so both residuals, and with
    /// them condition (i), are untouched.
    fn find_cross_triple(
        &self,
        coloring: &PartialColoring,
        a: VertexId,
        b: VertexId,
        color: usize,
    ) -> Option<(EdgeId, EdgeId, EdgeId)> {
        let mut b1_candidates: Vec<(VertexId, EdgeId)> = self
            .g
            .incident(a)
            .iter()
            .filter(|&&(w, e)| {
                self.side_a[w] != self.side_a[a] && coloring.color_of(e).is_none() && w != b
            })
            .copied()
            .collect();
        b1_candidates.sort_unstable();
        b1_candidates.dedup_by_key(|&mut (w, _)| w);
        for &(b1, e1) in &b1_candidates {
            let Some(em) = coloring.edge_at(b1, color) else {
                continue;
            };
            let a1 = self.g.other_endpoint(em, b1)?;
            if self.side_a[a1] != self.side_a[a] || a1 == a {
                continue;
            }
            let Some(e3) = self.uncolored_edge_between(coloring, a1, b) else {
                continue;
            };
            return Some((e1, em, e3));
        }
        None
    }

    /// Candidate-set sizes for a failed pair, for the failure witness.
    fn path_witness(
        &self,
        coloring: &PartialColoring,
        a: VertexId,
        b: VertexId,
        color: usize,
    ) -> FailureDetail {
        let count_n = |from: VertexId| {
            let mut seen: Vec<VertexId> = self
                .g
                .incident(from)
                .iter()
                .filter(|&&(w, e)| {
                    self.side_a[w] != self.side_a[from]
                        && coloring.color_of(e).is_none()
                        && self.good_colored_edge(coloring, w, color).is_some()
                })
                .map(|&(w, _)| w)
                .collect();
            seen.sort_unstable();
            seen.dedup();
            seen
        };
        let n_b = count_n(a);
        let n_a = count_n(b);
        let partners = |set: &[VertexId]| {
            let mut p: Vec<VertexId> = set
                .iter()
                .filter_map(|&w| self.good_colored_edge(coloring, w, color).map(|(_, o)| o))
                .collect();
            p.sort_unstable();
            p.dedup();
            p.len()
        };
        FailureDetail::NoAlternatingPath {
            a,
            b,
            color,
            n_a: n_a.len(),
            n_b: n_b.len(),
            m_a: partners(&n_a),
            m_b: partners(&n_b),
        }
    }

    /// Step 2: turn each of the `k` classes into a perfect matching by
    /// pairing the missed vertices across the halves and exchanging one
    /// alternating path per pair (or coloring a shared uncolored cross
    /// edge directly when the pair has one).
    pub fn step2_complete_factors(&mut self) -> Result<(), FactorizeError> {
        let mut coloring = self.coloring.take().expect("step1 before step2");
        let partition = self.partition.clone().expect("split before step2");
        let n = self.half_order;
        let gamma = self.config.good_degree_cap;
        let bound = self.config.split_bound;
        let r = self.config.r;

        for color in 0..self.k {
            let missed_a: Vec<VertexId> = partition
                .a()
                .iter()
                .filter(|&v| coloring.misses(v, color))
                .collect();
            let missed_b: Vec<VertexId> = partition
                .b()
                .iter()
                .filter(|&v| coloring.misses(v, color))
                .collect();
            if missed_a.len() != missed_b.len() {
                self.coloring = Some(coloring);
                return Err(self.invariant_failure(
                    Stage::Step2,
                    format!("color {color}: unequal missed counts"),
                ));
            }
            for (&a, &b) in missed_a.iter().zip(missed_b.iter()) {
                if let Some(e) = self.uncolored_edge_between(&coloring, a, b) {
                    coloring.assign(e, color).map_err(|err| {
                        self.invariant_failure(Stage::Step2, format!("direct edge: {err}"))
                    })?;
                    self.cross_colored[a] += 1;
                    self.cross_colored[b] += 1;
                    self.stats.direct_colorings += 1;
                } else if let Some(path) = self.find_alternating_path(&coloring, a, b, color) {
                    coloring.exchange(&path).map_err(|err| {
                        self.invariant_failure(Stage::Step2, format!("exchange: {err}"))
                    })?;
                    self.res_b.insert(self.g, path.edges[1]);
                    self.res_a.insert(self.g, path.edges[3]);
                    for v in path.vertices {
                        self.cross_colored[v] += 1;
                    }
                    self.stats.exchanges += 1;
                } else if let Some((e1, em, e3)) = self.find_cross_triple(&coloring, a, b, color) {
                    coloring.unassign(em).map_err(|err| {
                        self.invariant_failure(Stage::Step2, format!("triple: {err}"))
                    })?;
                    for e in [e1, e3] {
                        coloring.assign(e, color).map_err(|err| {
                            self.invariant_failure(Stage::Step2, format!("triple: {err}"))
                        })?;
                    }
                    self.cross_colored[a] += 1;
                    self.cross_colored[b] += 1;
                    self.stats.triple_exchanges += 1;
                } else {
                    let witness = self.path_witness(&coloring, a, b, color);
                    self.coloring = Some(coloring);
                    return Err(self.failure(Stage::Step2, witness));
                }

                // loop invariants (conditions (i) and (ii))
                if self.res_a.len() != self.res_b.len() {
                    self.coloring = Some(coloring);
                    return Err(self.invariant_failure(
                        Stage::Step2,
                        "residual edge counts diverged".into(),
                    ));
                }
                debug_assert!(self.res_a.max_degree() < gamma + 1);
                debug_assert!(self.res_b.max_degree() < gamma + 1);
            }
            if coloring.class_sizes()[color] != n {
                self.coloring = Some(coloring);
                return Err(self.invariant_failure(
                    Stage::Step2,
                    format!("class {color} is not a perfect matching"),
                ));
            }
        }

        // condition (ii) hard check and the residual size bound
        if self.res_a.max_degree() >= gamma + 1 || self.res_b.max_degree() >= gamma + 1 {
            self.coloring = Some(coloring);
            return Err(self.invariant_failure(Stage::Step2, "residual degree cap exceeded".into()));
        }
        let size_cap = (n as f64) * (bound + r as f64);
        if (self.res_a.len() as f64) >= size_cap {
            self.coloring = Some(coloring);
            return Err(self.invariant_failure(
                Stage::Step2,
                format!("residual has {} edges, expected < {size_cap}", self.res_a.len()),
            ));
        }
        // condition (iii) mechanism: colored cross edges at v are bounded by
        // the colors v missed after step 1 plus its residual degree
        for v in 0..self.g.num_vertices() {
            let budget = self.missed_after_step1[v] + self.res_a.degree(v) + self.res_b.degree(v);
            if self.cross_colored[v] > budget {
                self.coloring = Some(coloring);
                return Err(self.invariant_failure(
                    Stage::Step2,
                    format!("vertex {v}: {} colored cross edges > budget {budget}", self.cross_colored[v]),
                ));
            }
        }
        self.stats.residual_edges = self.res_a.len();
        self.coloring = Some(coloring);
        Ok(())
    }

    /// Step 3: equalized colorings of the residual halves on `j` fresh
    /// colors, then one Hall matching per fresh color to complete it.
    /// `j` is the number of colors the residual actually needs, capped by
    /// both the configured residual palette and the `d - k` colors left;
    /// every fresh color consumes about `n` cross edges, so keeping `j`
    /// minimal preserves step 3's matching slack and step 4's supply.
    pub fn step3_residual(&mut self) -> Result<(), FactorizeError> {
        let mut coloring = self.coloring.take().expect("step2 before step3");
        let partition = self.partition.clone().expect("split");
        let d = self.degree;
        let k = self.k;
        let cap = self.config.residual_palette.min(d.saturating_sub(k));

        let ra = self.g.subgraph_of_edges(self.res_a.edge_ids().iter().copied());
        let rb = self.g.subgraph_of_edges(self.res_b.edge_ids().iter().copied());

        let r = self.config.r;
        let base_a = match residual_base(&ra, r) {
            Ok(c) => c,
            Err(e) => {
                self.coloring = Some(coloring);
                return Err(self.invariant_failure(Stage::Step3, format!("residual A: {e}")));
            }
        };
        let base_b = match residual_base(&rb, r) {
            Ok(c) => c,
            Err(e) => {
                self.coloring = Some(coloring);
                return Err(self.invariant_failure(Stage::Step3, format!("residual B: {e}")));
            }
        };
        let needed = |c: &Option<PartialColoring>| c.as_ref().map_or(0, |c| c.palette_size());
        let j = needed(&base_a).max(needed(&base_b));
        if j > cap {
            self.coloring = Some(coloring);
            return Err(self.failure(
                Stage::Step3,
                FailureDetail::ResidualPaletteTooSmall { required: j, available: cap },
            ));
        }
        let spread = |c: Option<PartialColoring>| -> Result<Vec<(EdgeId, usize)>, PaletteError> {
            match c {
                None => Ok(Vec::new()),
                Some(c) => Ok(palette::equalize(c, j)?.assignments().collect()),
            }
        };
        let ca = match spread(base_a) {
            Ok(c) => c,
            Err(e) => {
                self.coloring = Some(coloring);
                return Err(self.invariant_failure(Stage::Step3, format!("residual A: {e}")));
            }
        };
        let cb = match spread(base_b) {
            Ok(c) => c,
            Err(e) => {
                self.coloring = Some(coloring);
                return Err(self.invariant_failure(Stage::Step3, format!("residual B: {e}")));
            }
        };

        self.j = j;
        self.stats.j = j;
        if j == 0 {
            self.coloring = Some(coloring);
            return Ok(());
        }

        // align class sizes across the halves, as in step 1
        let sizes = |assignments: &[(EdgeId, usize)]| {
            let mut s = vec![0usize; j];
            for &(_, c) in assignments {
                s[c] += 1;
            }
            s
        };
        let sa = sizes(&ca);
        let sb = sizes(&cb);
        let ranked = |s: &[usize]| {
            let mut idx: Vec<usize> = (0..j).collect();
            idx.sort_by_key(|&c| (s[c], c));
            idx
        };
        let rank_a = ranked(&sa);
        let rank_b = ranked(&sb);
        let mut rename_b = vec![0usize; j];
        for (pos, &c) in rank_b.iter().enumerate() {
            rename_b[c] = rank_a[pos];
        }

        coloring.extend_palette(k + j);
        for &(e, c) in &ca {
            coloring.assign(e, k + c).map_err(|err| {
                self.invariant_failure(Stage::Step3, format!("residual merge A: {err}"))
            })?;
        }
        for &(e, c) in &cb {
            coloring.assign(e, k + rename_b[c]).map_err(|err| {
                self.invariant_failure(Stage::Step3, format!("residual merge B: {err}"))
            })?;
        }

        // complete each fresh color class with a matching on the cross
        // edges avoiding the vertices it already covers
        for i in 0..j {
            let color = k + i;
            let class = coloring.class_edges(color);
            let mut blocked = vec![false; self.g.num_vertices()];
            for &e in &class {
                let (u, v) = self.g.endpoints(e).expect("edge");
                blocked[u] = true;
                blocked[v] = true;
            }
            let covered_a = partition.a().iter().filter(|&v| blocked[v]).count();
            let covered_b = partition.b().iter().filter(|&v| blocked[v]).count();
            if covered_a != covered_b {
                self.coloring = Some(coloring);
                return Err(self.invariant_failure(
                    Stage::Step3,
                    format!("color {color}: covered sides differ ({covered_a} vs {covered_b})"),
                ));
            }

            let candidate_ids: Vec<EdgeId> = self
                .g
                .edges()
                .filter(|&(e, u, v)| {
                    self.side_a[u] != self.side_a[v]
                        && !blocked[u]
                        && !blocked[v]
                        && coloring.color_of(e).is_none()
                })
                .map(|(e, _, _)| e)
                .collect();
            let ci = self.g.subgraph_of_edges(candidate_ids);
            let x: VertexSet = partition.a().iter().filter(|&v| !blocked[v]).collect();
            let y: VertexSet = partition.b().iter().filter(|&v| !blocked[v]).collect();
            match palette::hall_matching(&ci, (&x, &y)) {
                Ok(MatchingWitness::Matching(edges)) => {
                    for e in edges {
                        coloring.assign(e, color).map_err(|err| {
                            self.invariant_failure(Stage::Step3, format!("matching: {err}"))
                        })?;
                    }
                }
                Ok(MatchingWitness::Deficiency(set)) => {
                    self.coloring = Some(coloring);
                    return Err(
                        self.failure(Stage::Step3, FailureDetail::HallDeficiency { color, set })
                    );
                }
                Err(e) => {
                    self.coloring = Some(coloring);
                    return Err(self.invariant_failure(Stage::Step3, format!("hall: {e}")));
                }
            }
            if coloring.class_sizes()[color] != self.half_order {
                self.coloring = Some(coloring);
                return Err(self.invariant_failure(
                    Stage::Step3,
                    format!("class {color} incomplete after matching"),
                ));
            }
        }
        self.coloring = Some(coloring);
        Ok(())
    }

    /// Step 4: the uncolored remainder is a regular bipartite graph;
    /// finish it with exactly `d - k - j` colors and assemble the factors.
    pub fn step4_finish(&mut self) -> Result<Factorization, FactorizeError> {
        let mut coloring = self.coloring.take().expect("step3 before step4");
        let partition = self.partition.clone().expect("split");
        let d = self.degree;
        let kj = self.k + self.j;
        let remaining: Vec<EdgeId> = self
            .g
            .edge_ids()
            .filter(|&e| coloring.color_of(e).is_none())
            .collect();
        for &e in &remaining {
            let (u, v) = self.g.endpoints(e).expect("edge");
            if self.side_a[u] == self.side_a[v] {
                self.coloring = Some(coloring);
                return Err(self.invariant_failure(
                    Stage::Step4,
                    format!("uncolored edge {e} does not cross the partition"),
                ));
            }
        }
        let residual = self.g.subgraph_of_edges(remaining.iter().copied());
        let dr = d.saturating_sub(kj);
        match residual.is_regular() {
            Some(deg) if deg == dr => {}
            other => {
                self.coloring = Some(coloring);
                return Err(self.invariant_failure(
                    Stage::Step4,
                    format!("residual not {dr}-regular (is_regular = {other:?})"),
                ));
            }
        }
        if dr > 0 {
            let finished = palette::konig_color(&residual, (partition.a(), partition.b()))
                .map_err(|e| self.invariant_failure(Stage::Step4, format!("bipartite finish: {e}")))?;
            coloring.extend_palette(d);
            for (e, c) in finished.assignments() {
                coloring.assign(e, kj + c).map_err(|err| {
                    self.invariant_failure(Stage::Step4, format!("final merge: {err}"))
                })?;
            }
        }
        if !coloring.is_total() {
            self.coloring = Some(coloring);
            return Err(self.invariant_failure(Stage::Step4, "edges left uncolored".into()));
        }
        let factors = (0..d).map(|c| coloring.class_edges(c)).collect();
        self.coloring = Some(coloring);
        Ok(Factorization::new(factors))
    }
}

/// Minimal proper coloring of one residual half: Vizing, then drop unused
/// colors. `None` for an edgeless residual.
fn residual_base(half: &Multigraph, r: usize) -> Result<Option<PartialColoring<'_>>, PaletteError> {
    if half.num_edges() == 0 {
        return Ok(None);
    }
    let colored = palette::vizing_color(half, r)?;
    Ok(Some(compact_used_colors(half, &colored)))
}

/// Re-hosts a coloring on a palette of exactly its used colors, renumbered
/// in ascending order.
fn compact_used_colors<'g>(host: &'g Multigraph, coloring: &PartialColoring) -> PartialColoring<'g> {
    let mut used: Vec<usize> = coloring.assignments().map(|(_, c)| c).collect();
    used.sort_unstable();
    used.dedup();
    let mut rename = std::collections::BTreeMap::new();
    for (new, &old) in used.iter().enumerate() {
        rename.insert(old, new);
    }
    let mut out = PartialColoring::new(host, used.len());
    for (e, c) in coloring.assignments() {
        out.assign(e, rename[&c]).expect("renaming preserves properness");
    }
    out
}
