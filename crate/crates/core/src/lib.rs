//! Simulation of quantum circuits assisted by postselected closed timelike
//! curves (P-CTCs).
//!
//! A P-CTC circuit is a unitary over chronology-respecting registers plus a
//! register named `CTC`. Tracing the unitary over `CTC` gives the induced
//! operator `C`, and the circuit acts on states through the renormalized,
//! nonlinear map `rho -> C rho C† / Tr(C rho C†)`. Branches that `C`
//! annihilates are paradoxical and never occur.

pub mod algorithms;
pub mod dctc;
pub mod distinguish;
pub mod engine;
pub mod ensembles;
pub mod error;
pub mod gadget;
pub mod io;
pub mod linalg;
pub mod random;
pub mod selftest;

pub use error::{PctcError, Result};
pub use linalg::{
    Capacity, DensityMatrix, Operator, OutcomeDistribution, RegisterLayout, StateVector, C64,
};
