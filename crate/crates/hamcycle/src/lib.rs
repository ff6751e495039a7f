//! Hamilton cycles under edge-pair conflict constraints in random graphs.
//!
//! The crate provides two constructive pipelines for finding Hamilton cycles
//! that avoid forbidden pairs of incident edges (or, in the global variant,
//! repeated colors): a rotation-extension solver built on booster filtering
//! over a sparse compatible expander, and a matching-reduction solver that
//! nibbles out a perfect matching, reduces to a directed Hamilton cycle
//! problem, and lifts the result back. Brute-force oracles certify every
//! solver output, and a seeded experiment harness drives Monte Carlo sweeps.
//!
//! See the `examples/` directory for one runnable example per capability.

pub mod conflict;
pub mod directed;
pub mod error;
pub mod experiment;
pub mod expander;
pub mod gnp_check;
pub mod graph;
pub mod nibble;
pub mod normality;
pub mod posa;
pub mod reduction;
pub mod rng;
pub mod rotation;
pub mod verify;

pub use error::{Error, Result};
pub use graph::{Cycle, Digraph, EdgeId, Graph, Path, VertexId};
