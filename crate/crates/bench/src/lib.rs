//! Fixtures shared by the benchmarks in `benches/`.

use cvqe_core::experiment::{Mode, Model};
use cvqe_core::hubbard::{HubbardParams, Lattice};
use cvqe_core::MeasurementRecordSet;

/// Half-filled model at the default chemical potential with `k = 1`.
pub fn model(lattice: Lattice, d: f64) -> Model {
    let p = HubbardParams::with_default_mu(&lattice, d, 1.0).expect("named lattices have a default μ");
    Model::new(lattice, p, None).expect("valid model")
}

pub fn records(model: &Model, mode: Mode, shots: u64) -> MeasurementRecordSet {
    model.records(mode, shots, 1).expect("records")
}
