//! Cascaded variational quantum eigensolver with a Jastrow-Gutzwiller dressing.
//!
//! A Slater determinant is prepared by a compiled Givens-rotation circuit,
//! measured once per readout basis, and the dressed energy
//! `E(θ) = <Ψ|G(θ) H G(θ)|Ψ> / <Ψ|G(θ)²|Ψ>` is evaluated classically from the
//! stored records for any `θ`.

pub mod cvqe;
pub mod error;
pub mod exact;
pub mod experiment;
pub mod fock;
pub mod hubbard;
pub mod onebody;
pub mod pauli;
pub mod sim;

pub use cvqe::{
    collect_records, collect_spin_factorized, evaluate, minimize_scalar, minimize_theta, scan_theta, EnergyEstimate,
    JastrowParams, MeasurementRecordSet, Shots,
};
pub use error::{Error, Result};
pub use fock::{HamiltonianTerm, OccupationConfig};
pub use hubbard::{HubbardParams, Lattice, ModelDescriptor};
pub use onebody::{GateSequence, GivensSequence, OneBodyMatrix};
pub use pauli::{DressedTerm, PauliString};
pub use sim::{MeasurementBasis, StateVector};
