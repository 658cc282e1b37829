//! Randomized compilation (qDRIFT) and cost analysis for Hamiltonian simulation.
//!
//! The crate is organised around one common input, a [`Hamiltonian`] made of
//! positively weighted Pauli strings, and five consumers of it:
//!
//! * [`qdrift`] compiles seeded random gate sequences,
//! * [`trotter`] evaluates deterministic and randomized Trotter/Suzuki bounds
//!   and solves them for gate counts,
//! * [`channel`] builds dense superoperators for small systems and certifies
//!   the qDRIFT channel bound numerically,
//! * [`phase_est`] budgets phase estimation runs,
//! * [`suite`] bundles the checks run by `qdrift verify`.

pub mod channel;
pub mod error;
pub mod format;
pub mod hamiltonian;
pub mod phase_est;
pub mod qdrift;
pub mod sampling;
pub mod suite;
pub mod trotter;

pub use error::{Error, Result};
pub use hamiltonian::{Hamiltonian, PauliAxis, PauliString, Term, WeightProfile};
pub use qdrift::{Circuit, CountMode, GateOp};
pub use trotter::{CostQuery, CostReport, GateCount, Method, Variant};
