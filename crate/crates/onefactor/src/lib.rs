//! Certifying 1-factorization of dense regular multigraphs.
//!
//! A 1-factorization of a `d`-regular multigraph partitions the edge set
//! into `d` perfect matchings. This crate implements a constructive
//! pipeline for finding one: split the vertices into balanced halves,
//! edge-color the halves on a shared equalized palette, grow every class
//! into a perfect matching by alternating-path exchanges, and finish the
//! leftover bipartite part with an exact coloring. Every success is
//! re-checked by an independent verifier before it is returned; every
//! failure names its stage and carries a witness.
//!
//! The classical building blocks are exposed on their own: a multigraph
//! Vizing coloring (`Δ + r` colors), König's bipartite coloring (exactly
//! `Δ` colors), class-size equalization, and a certifying Hall matching.
//!
//! ```
//! use onefactor::factorizer::{factorize, PipelineConfig};
//! use onefactor::multigraph::Multigraph;
//! use onefactor::verify::verify_factorization;
//!
//! let g = Multigraph::complete(8);
//! let config = PipelineConfig::for_graph(&g);
//! let (f, _stats) = factorize(&g, &config).expect("K_8 is 1-factorizable");
//! assert_eq!(f.num_factors(), 7);
//! assert!(verify_factorization(&g, &f).ok);
//! ```

pub mod coloring;
pub mod factorizer;
pub mod instances;
pub mod io;
pub mod multigraph;
pub mod palette;
pub mod splitter;
pub mod verify;

pub use coloring::{AlternatingPath, ColoringError, PartialColoring};
pub use factorizer::{
    factorize, FactorizeError, Factorization, FailureDetail, FailureReport, PipelineConfig,
    PipelineStats, Stage,
};
pub use multigraph::{EdgeId, GraphError, Multigraph, VertexId, VertexSet};
pub use palette::{equalize, hall_matching, konig_color, vizing_color, MatchingWitness, PaletteError};
pub use splitter::{balanced_split, random_split, Partition, SplitError};
pub use verify::{
    brute_force_factorize, max_disjoint_factors, verify_factorization, VerificationReport,
    Violation,
};
