//! Constraint-preserving QAOA with Hamming weight operators, plus a
//! multi-angle penalty QAOA baseline, on a dense statevector simulator.
//!
//! Basis index `z` encodes qubit `i` in bit `i`. Bitstrings print qubit 0
//! first, so `"10010"` is `z = 0b01001`.

pub mod error;
pub mod experiment;
pub mod hamiltonian;
pub mod hwo;
pub mod oracle;
pub mod problem;
pub mod simulator;
pub mod subset_sum;
pub mod vqa;
pub mod walsh;

pub use error::{Error, Result};
pub use hwo::{build_sparse_pool, HwEquation, HwOperator, OperatorPool};
pub use oracle::{brute_force, GateCount, OracleResult};
pub use problem::{ProblemInstance, ProblemKind};
pub use simulator::StateVector;
