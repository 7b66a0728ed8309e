//! Combinatorial locally-correctable / locally-decodable code instances over
//! F2 and small prime fields, rainbow-cycle search in properly edge-colored
//! multigraphs, and iterative sparse-representation compression driven by
//! those cycles.
//!
//! Modules:
//! - [`gf2`], [`fq`]: field arithmetic (bit-packed F2, prime F_q) with
//!   rank / kernel / solve.
//! - [`instance`]: instance model, validation, canonical JSON format.
//! - [`gen`]: deterministic seeded generators for instances and graph
//!   fixtures.
//! - [`rainbow`]: rainbow-cycle and rainbow-even-cover search, the
//!   direct-sum subset graph, and cycle lifting.
//! - [`compressor`]: shift coverage, the compression fixpoint loop, and
//!   covering-radius experiments.
//! - [`ldc`]: the randomized weight-contraction step and sparse/approximate
//!   span procedures for 2-query LDCs.
//! - [`rng`]: the seed-splitting scheme every seeded operation goes through.

pub mod compressor;
pub mod error;
pub mod fq;
pub mod gen;
pub mod gf2;
pub mod instance;
pub mod ldc;
pub mod rainbow;
pub mod rng;

pub use error::Error;
