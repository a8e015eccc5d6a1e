//! Dense complex linear algebra over named qubit registers.

pub mod complete;
pub mod decomp;
pub mod layout;
pub mod operator;
pub mod state;

pub use complete::complete_unitary;
pub use decomp::{singular_values, spectral_norm};
pub use layout::{qubits_for, Register, RegisterLayout};
pub use operator::{gates, Capacity, Operator, C64, DEFAULT_MAX_QUBITS, ONE, ZERO};
pub use state::{inner, norm, normalize, round_sig, DensityMatrix, OutcomeDistribution, StateVector};
