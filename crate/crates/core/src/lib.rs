//! Laboratory for random walks that prefer unvisited edges.
//!
//! The central object is the *E-process*: a walk on an undirected multigraph
//! that traverses an unvisited ("blue") incident edge whenever one exists,
//! choosing among them by a pluggable [`processes::Rule`], and falls back to a
//! simple random walk step otherwise. The crate bundles everything needed to
//! study its cover time experimentally:
//!
//! * [`graph`] — undirected multigraphs with stable edge identities,
//!   contraction, girth, and a plain-text edge-list format.
//! * [`generators`] — seeded random regular graphs and deterministic gadget
//!   families (cycles, tori, bowtie, Petersen, ...).
//! * [`spectral`] — stationary distributions, eigenvalue gaps, exact and
//!   bounded hitting times, mixing times.
//! * [`processes`] — the walk engine: E-process (undirected and per-arc
//!   directed variants), simple random walk baseline, phase instrumentation
//!   and structural invariant checks.
//! * [`structure`] — combinatorial checkers: minimum even-subgraph order
//!   ("goodness"), rooted subgraph counting, edge-density and adjacency
//!   second-eigenvalue certificates for regular graphs.
//! * [`experiments`] — multi-trial cover-time sweeps with deterministic
//!   seeding, least-squares growth fits, CSV and SVG emission.

pub mod error;
pub mod experiments;
pub mod generators;
pub mod graph;
pub mod processes;
pub mod spectral;
pub mod structure;

pub use error::{Error, Result};
pub use graph::{Graph, VertexSet};

/// Dense linear algebra (eigensolves, absorbing-system solves) is restricted
/// to graphs of at most this many vertices; larger graphs get closed-form and
/// power-iteration quantities only.
pub const DENSE_LIMIT: usize = 2000;

/// One step of the splitmix64 output function.
fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive an independent sub-seed from a master seed and a stream index.
///
/// Retry loops, trials of a sweep, and per-attempt generator streams all
/// draw their RNG seeds through this function so that every run is replayable
/// from a single master seed.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index.wrapping_mul(0xA076_1D64_78BD_642F)))
}
