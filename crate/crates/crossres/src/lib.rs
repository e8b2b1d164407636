//! Exact simulation and verification of qubit-conditional bosonic
//! operations generated by cross-resonant driving.
//!
//! A qubit coupled to one or more truncated bosonic modes through monomial
//! interactions `σ₊ Â + σ₋ Â†` and driven at an interaction's resonance
//! frequency realizes conditional operations on the modes: displacement,
//! squeezing, joint displacement, beamsplitting, two-mode squeezing, and
//! generic multiphoton conversions, branching on the dressed qubit state.
//! This crate builds the Hamiltonians, derives the resonance bookkeeping,
//! propagates the exact truncated dynamics, and scores the exact evolution
//! against the analytic conditional targets.
//!
//! Modules:
//! - [`fock`]: dense operators on the composite space, matrix exponentials
//! - [`interaction`]: monomials, frame integers, resonance reports
//! - [`hamiltonian`]: lab/drive-frame/effective Hamiltonian builders
//! - [`propagation`]: static, time-ordered, and frame-aware evolution
//! - [`targets`]: analytic conditional unitaries and amplitude maps
//! - [`analysis`]: fidelities, leakage, margins, sweeps, scaling studies
//!
//! The `parallel` feature (default) runs sweep points and scaling-study
//! points on a rayon pool; disabling it yields a fully sequential build
//! with identical results.

extern crate blas_src;

pub mod analysis;
pub mod error;
mod exec;
pub mod fock;
pub mod hamiltonian;
pub mod interaction;
pub mod propagation;
pub mod targets;

pub use error::{Error, Result};
pub use fock::{HilbertSpec, Operator};
pub use hamiltonian::{DressedQubit, SystemSpec};
pub use interaction::{FrameIntegers, InteractionTerm, ResonanceReport};
pub use propagation::PropagationConfig;
pub use targets::ConditionalKind;

pub use num_complex::Complex64;
