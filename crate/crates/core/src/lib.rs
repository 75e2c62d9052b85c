// SPDX-License-Identifier: Apache-2.0

//! Two two-level qubits coupled to one damped cavity mode.
//!
//! The crate integrates the cavity-loss master equation for the full
//! qubits-plus-field density operator, with either the complete dipole
//! coupling or its rotating-wave truncation, and tracks two-qubit
//! entanglement (concurrence) along the way.
//!
//! Units: ħ = 1, frequencies in units of the cavity frequency ω, lengths in
//! units of the cavity wavelength λ, times in units of 1/ω.

// Range checks are written as !(x > lo) so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod entanglement;
pub mod evolution;
pub mod experiment;
pub mod model;
pub mod operators;
pub mod output;
mod propagator;

pub use num_complex::Complex64 as C64;

pub use entanglement::{
    bell_transform, concurrence_bell, concurrence_block, concurrence_wootters,
    partial_trace_cavity, BellState, QubitState,
};
pub use evolution::{evolve, lindblad_rhs, FullState, Observables, Positivity, Trajectory};
pub use experiment::{
    convergence_audit, detect_dead_intervals, run_sweep, ConvergenceReport, DeadInterval,
    SweepResult, SweepSpec,
};
pub use model::{
    build_hamiltonian, coupling_constants, initial_state, BellKind, CouplingPair, Mode,
    SystemConfig,
};
pub use operators::{Operator, SpaceLayout};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("operator layouts differ: {left:?} vs {right:?}")]
    LayoutMismatch { left: Vec<usize>, right: Vec<usize> },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("numerical domain error: {0}")]
    NumericalDomain(String),

    #[error("integration failed at t = {time}: {reason}")]
    Integration { time: f64, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
