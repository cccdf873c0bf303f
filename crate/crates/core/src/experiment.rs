//! End-to-end Hubbard workflow: records, Gutzwiller optimization, sweeps over `d`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::cvqe::{
    collect_records, collect_spin_factorized, evaluate, minimize_theta, EnergyEstimate, JastrowParams,
    MeasurementRecordSet, Shots,
};
use crate::error::{Error, Result};
use crate::exact::DenseHamiltonian;
use crate::fock::HamiltonianTerm;
use crate::hubbard::{
    build_hamiltonian, fermi_sea_with, gutzwiller, FermiSea, HubbardParams, Lattice, ModelDescriptor,
};
use crate::onebody::GateSequence;
use crate::pauli::{dress_hamiltonian, DressedTerm};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Sampled readout of the full register.
    Full,
    /// Sampled spin-up register, exact spin-down distribution.
    SpinFactorized,
    /// Exact probabilities of the full register.
    InfiniteShot,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Full => "full",
            Mode::SpinFactorized => "spin-factorized",
            Mode::InfiniteShot => "infinite-shot",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Mode::Full),
            "spin-factorized" => Ok(Mode::SpinFactorized),
            "infinite-shot" => Ok(Mode::InfiniteShot),
            _ => Err(Error::Parse(format!("unknown mode {s:?}"))),
        }
    }
}

/// A Hubbard instance with its Fermi-sea reference and dressed Hamiltonian.
#[derive(Debug, Clone)]
pub struct Model {
    pub lattice: Lattice,
    pub params: HubbardParams,
    pub sea: FermiSea,
    pub hamiltonian: Vec<HamiltonianTerm>,
    pub dressed: Vec<DressedTerm>,
}

impl Model {
    /// Half filling by default; `occupied` overrides the occupied one-body orbitals.
    pub fn new(lattice: Lattice, params: HubbardParams, occupied: Option<&[usize]>) -> Result<Self> {
        let default: Vec<usize> = (0..lattice.sites() / 2).collect();
        let sea = fermi_sea_with(&lattice, &params, occupied.unwrap_or(&default))?;
        let hamiltonian = build_hamiltonian(&lattice, &params);
        let dressed = dress_hamiltonian(&hamiltonian, lattice.spin_orbitals())?;
        Ok(Self { lattice, params, sea, hamiltonian, dressed })
    }

    pub fn from_descriptor(m: &ModelDescriptor) -> Result<Self> {
        Self::new(m.lattice()?, m.params(), Some(&m.occupied_orbitals))
    }

    pub fn descriptor(&self) -> ModelDescriptor {
        ModelDescriptor::new(&self.lattice, &self.params, &self.sea.occupied)
    }

    pub fn gutzwiller(&self, theta: f64) -> JastrowParams {
        gutzwiller(self.lattice.sites(), theta)
    }

    /// Circuit that is actually executed in `mode`.
    pub fn circuit(&self, mode: Mode) -> Result<GateSequence> {
        match mode {
            Mode::SpinFactorized => self.sea.spin_circuit(),
            Mode::Full | Mode::InfiniteShot => self.sea.circuit(),
        }
    }

    pub fn records(&self, mode: Mode, shots: u64, seed: u64) -> Result<MeasurementRecordSet> {
        let records = match mode {
            Mode::Full => collect_records(&self.sea.circuit()?, &self.dressed, sampled(shots)?, seed)?,
            Mode::InfiniteShot => collect_records(&self.sea.circuit()?, &self.dressed, Shots::Exact, seed)?,
            Mode::SpinFactorized => {
                let c = self.sea.spin_circuit()?;
                collect_spin_factorized(&c, &c, &self.dressed, sampled(shots)?, seed)?
            }
        };
        records.with_model(self.descriptor())
    }

    pub fn dense(&self) -> Result<DenseHamiltonian> {
        DenseHamiltonian::new(&self.hamiltonian, self.lattice.spin_orbitals())
    }
}

fn sampled(shots: u64) -> Result<Shots> {
    if shots == 0 {
        return Err(Error::Invalid("shots must be at least 1".into()));
    }
    Ok(Shots::Sampled(shots))
}

#[derive(Debug, Clone)]
pub struct GutzwillerOptimum {
    /// `+∞` when full projection beats every finite value in the bracket.
    pub theta: f64,
    pub estimate: EnergyEstimate,
    pub at_upper_edge: bool,
}

/// Minimizes the replayed energy along `G = e^{-θD}` over `bracket`, also
/// comparing against `θ = ∞` when the minimum sits on the upper edge.
pub fn optimize_gutzwiller(
    records: &MeasurementRecordSet,
    model: &Model,
    bracket: (f64, f64),
    tol: f64,
) -> Result<GutzwillerOptimum> {
    let best = minimize_theta(records, &model.dressed, |t| model.gutzwiller(t), bracket, tol)?;
    if best.at_upper_edge {
        if let Ok(inf) = evaluate(records, &model.dressed, &model.gutzwiller(f64::INFINITY)) {
            if inf.energy < best.estimate.energy {
                return Ok(GutzwillerOptimum { theta: f64::INFINITY, estimate: inf, at_upper_edge: true });
            }
        }
    }
    Ok(GutzwillerOptimum { theta: best.theta, estimate: best.estimate, at_upper_edge: best.at_upper_edge })
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub lattice: Lattice,
    pub k: f64,
    pub d_values: Vec<f64>,
    pub mode: Mode,
    pub shots: u64,
    pub seed: u64,
    pub bracket: (f64, f64),
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub d: f64,
    pub e_opt: f64,
    pub theta_opt: f64,
    pub e_exact: f64,
}

/// One fresh record set and optimization per `d`, rows in input order.
///
/// Point `i` samples with seed `seed + i·2³²`.
pub fn sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    cfg.d_values
        .par_iter()
        .enumerate()
        .map(|(i, &d)| {
            let params = HubbardParams::with_default_mu(&cfg.lattice, d, cfg.k)?;
            let model = Model::new(cfg.lattice.clone(), params, None)?;
            let records = model.records(cfg.mode, cfg.shots, cfg.seed.wrapping_add((i as u64) << 32))?;
            let opt = optimize_gutzwiller(&records, &model, cfg.bracket, cfg.tol)?;
            let e_exact = model.dense()?.ground_state()?.energy;
            Ok(SweepRow { d, e_opt: opt.estimate.energy, theta_opt: opt.theta, e_exact })
        })
        .collect()
}

/// Exact ground energies at the default chemical potential, in input order.
pub fn exact_curve(lattice: &Lattice, k: f64, d_values: &[f64]) -> Result<Vec<(f64, f64)>> {
    d_values
        .par_iter()
        .map(|&d| {
            let params = HubbardParams::with_default_mu(lattice, d, k)?;
            let terms = build_hamiltonian(lattice, &params);
            Ok((d, DenseHamiltonian::new(&terms, lattice.spin_orbitals())?.ground_state()?.energy))
        })
        .collect()
}
