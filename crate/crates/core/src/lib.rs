//! Simulator and library for two-party secure quantum computation built on
//! verifiable blind computation over dotted triple-graphs.
//!
//! The crate is organised bottom-up:
//!
//! - [`graph`]: base graphs, DT(G), trap-colourings, flows, pasts.
//! - [`pattern`]: exact eighth-turn angles, measurement patterns, gate compiler.
//! - [`qsim`]: a dense statevector engine with lazy qubit allocation.
//! - [`protocol`]: client/server state machines for the interactive protocol.
//! - [`otm`]: one-time memories and the non-interactive protocol.
//! - [`adversary`]: malicious-server strategies and statistics.
//!
//! The statevector engine is generic over its real scalar; the aliases below
//! fix it to `f64`, which is what the protocol tolerances assume.

pub mod adversary;
pub mod graph;
pub mod otm;
pub mod pattern;
pub mod protocol;
pub mod qsim;
pub mod scalar;

pub use graph::{BaseGraph, DtgGraph, TrapColouring, VertexId};
pub use pattern::{Angle, MeasurementPattern};
pub use scalar::Scalar;

/// Statevector in double precision.
pub type QuantumState = qsim::QuantumState<f64>;
/// Statevector in single precision, for quick experiments.
pub type QuantumState32 = qsim::QuantumState<f32>;
/// Density matrix in double precision.
pub type DensityMatrix = qsim::DensityMatrix<f64>;
