//! Constructive machinery for building Hamilton cycles in random subgraphs
//! of the hypercube at explicit desk scale, plus a Monte Carlo hitting-time
//! harness for the Q^n edge process.
//!
//! The crate is organised by subsystem:
//!
//! * [`cube`] / [`layers`]: exact hypercube geometry, subgraph storage, the
//!   s-layer decomposition with molecules, atoms and slices;
//! * [`models`] / [`chains`]: random generation (binomial, reservoir,
//!   level-biased, bounded-branching percolation) and chain-counting oracles;
//! * [`nibble`]: the cube hypergraph, significance bookkeeping and the
//!   iterated nibble tiling;
//! * [`tree`]: near-spanning bounded-degree trees from percolation chains,
//!   tree extension and repatching;
//! * [`cover`]: exact prescribed-endpoint path systems and slice covers;
//! * [`absorb`]: absorbing cube pairs, robust parity matchings, rainbow
//!   matchings and the special absorbing structures;
//! * [`pipeline`]: end-to-end cycle assembly plus the exact Hamiltonicity
//!   and perfect-matching oracles in [`oracle`];
//! * [`process`]: the edge process, hitting times and threshold sweeps.

pub mod absorb;
pub mod chains;
pub mod cover;
pub mod cube;
pub mod layers;
pub mod matching;
pub mod models;
pub mod nibble;
pub mod oracle;
pub mod pipeline;
pub mod process;
pub mod rng;
pub mod tree;

use thiserror::Error as ThisError;

#[derive(Debug, ThisError)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("cap exceeded: {0}")]
    CapExceeded(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("no solution: {0}")]
    Unsat(String),
    #[error("budget exhausted: {0}")]
    Timeout(String),
    #[error("construction failed: {0}")]
    Failed(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
