//! Simulation and compilation of R-unitary (norm-preserving but nonlinear)
//! operations on qubits, realized through the single-ancilla rebit encoding.
//!
//! An R-linear operator on `n` qubits is a map `Γ = A + BK` where `A`, `B`
//! are complex matrices and `K` is complex conjugation in the computational
//! basis. The encoding map takes `n`-qubit complex states to `(n+1)`-rebit
//! real states; under it the R-unitary operators correspond exactly to the
//! orthogonal matrices on the larger space. This crate provides:
//!
//! - the operator algebra (`rlinear`): composition, adjoint, R-unitarity and
//!   partial-antiunitarity predicates, factorization through `K_L`,
//! - the encoding/decoding maps for states, operators and measurements
//!   (`codec`),
//! - a tagged gate alphabet with encoded-gate translation tables (`gate`),
//! - dense dual-path circuit simulation and sampling (`circuit`),
//! - an extended Gottesman-Knill tableau engine for R-Clifford circuits
//!   (`stab`),
//! - decomposition pipelines from orthogonal matrices down to two-level
//!   gates and unitary/`K_L` alternations (`compiler`),
//! - R-Pauli / R-Clifford hierarchy membership tests (`hierarchy`),
//! - rebit tomography (`tomo`),
//! - text and JSON interchange formats (`io`).

pub mod circuit;
pub mod codec;
pub mod compiler;
pub mod gate;
pub mod hierarchy;
pub mod io;
pub mod linalg;
pub mod rlinear;
pub mod stab;
pub mod tomo;

mod error;

pub use circuit::{Circuit, MeasurementRecord};
pub use codec::{QubitState, RealOperator, RebitState};
pub use error::Error;
pub use gate::Gate;
pub use rlinear::{Language, RLinearOp, Subspace};
pub use stab::{PauliString, StabilizerTableau};

/// Default tolerance for all membership predicates and residual checks.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
