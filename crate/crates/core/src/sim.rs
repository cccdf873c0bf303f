//! Dense statevector simulation, measurement-basis rotation and shot sampling.
//!
//! Qubit `q` is bit `2^q` of the amplitude index, matching [`crate::fock`].
//! Sampling uses `ChaCha8Rng` seeded with `seed_from_u64` and draws the
//! multinomial outcome counts by sequential conditional binomials.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::fock::OccupationConfig;
use crate::onebody::{Gate, GateSequence};

pub type Rng = ChaCha8Rng;

static SAMPLE_CALLS: AtomicU64 = AtomicU64::new(0);

/// Number of [`sample`] invocations in this process.
pub fn sample_calls() -> u64 {
    SAMPLE_CALLS.load(Ordering::SeqCst)
}

const NORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn from_amplitudes(qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != 1 << qubits {
            return Err(Error::DimensionMismatch { expected: 1 << qubits, got: amplitudes.len() });
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Invalid(format!("state norm {norm} differs from 1")));
        }
        Ok(Self { qubits, amplitudes })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    fn check(&self, q: usize) -> Result<()> {
        if q >= self.qubits {
            return Err(Error::IndexOutOfRange { index: q, size: self.qubits });
        }
        Ok(())
    }

    /// Applies a 2x2 matrix `[[m00, m01], [m10, m11]]` to qubit `q`.
    fn apply_single(&mut self, q: usize, m: [[Complex64; 2]; 2]) {
        let bit = 1usize << q;
        for i in 0..self.amplitudes.len() {
            if i & bit == 0 {
                let (a0, a1) = (self.amplitudes[i], self.amplitudes[i | bit]);
                self.amplitudes[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amplitudes[i | bit] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        match *gate {
            Gate::X(q) => {
                self.check(q)?;
                self.apply_single(q, [[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]]);
            }
            Gate::Rz(q, phi) => {
                self.check(q)?;
                let z = c(0.0, 0.0);
                self.apply_single(
                    q,
                    [[Complex64::from_polar(1.0, -phi / 2.0), z], [z, Complex64::from_polar(1.0, phi / 2.0)]],
                );
            }
            Gate::Ry(q, phi) => {
                self.check(q)?;
                let (co, si) = ((phi / 2.0).cos(), (phi / 2.0).sin());
                self.apply_single(q, [[c(co, 0.0), c(-si, 0.0)], [c(si, 0.0), c(co, 0.0)]]);
            }
            Gate::Cx(ctrl, target) => {
                self.check(ctrl)?;
                self.check(target)?;
                if ctrl == target {
                    return Err(Error::Invalid("CX with control == target".into()));
                }
                let (cb, tb) = (1usize << ctrl, 1usize << target);
                for i in 0..self.amplitudes.len() {
                    if i & cb != 0 && i & tb == 0 {
                        self.amplitudes.swap(i, i | tb);
                    }
                }
            }
        }
        Ok(())
    }
}

/// Computational basis state `|n>`, built by `X` gates on the occupied qubits.
pub fn prepare(n: &OccupationConfig) -> StateVector {
    let mut state = vacuum(n.len());
    apply_in_place(&mut state, &GateSequence::preparation(n)).expect("preparation gates are in range");
    state
}

pub fn vacuum(qubits: usize) -> StateVector {
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << qubits];
    amplitudes[0] = Complex64::new(1.0, 0.0);
    StateVector { qubits, amplitudes }
}

pub fn apply_in_place(state: &mut StateVector, gates: &GateSequence) -> Result<()> {
    if gates.qubits != state.qubits {
        return Err(Error::DimensionMismatch { expected: state.qubits, got: gates.qubits });
    }
    for g in &gates.gates {
        state.apply_gate(g)?;
    }
    Ok(())
}

/// Applies `gates` left to right.
pub fn apply(state: &StateVector, gates: &GateSequence) -> Result<StateVector> {
    let mut out = state.clone();
    apply_in_place(&mut out, gates)?;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Per-qubit measurement axis; qubit 0 first in the string form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MeasurementBasis(pub Vec<Axis>);

impl MeasurementBasis {
    pub fn all_z(qubits: usize) -> Self {
        Self(vec![Axis::Z; qubits])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_all_z(&self) -> bool {
        self.0.iter().all(|&a| a == Axis::Z)
    }

    /// Splits a basis over `2n` qubits into its two `n`-qubit halves.
    pub fn split_half(&self) -> (Self, Self) {
        let n = self.0.len() / 2;
        (Self(self.0[..n].to_vec()), Self(self.0[n..].to_vec()))
    }
}

impl fmt::Display for MeasurementBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in &self.0 {
            f.write_str(match a {
                Axis::X => "X",
                Axis::Y => "Y",
                Axis::Z => "Z",
            })?;
        }
        Ok(())
    }
}

impl FromStr for MeasurementBasis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                'X' => Ok(Axis::X),
                'Y' => Ok(Axis::Y),
                'Z' => Ok(Axis::Z),
                other => Err(Error::Parse(format!("bad basis letter {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }
}

fn rotation_matrix(axis: Axis, inverse: bool) -> Option<[[Complex64; 2]; 2]> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let c = |re: f64, im: f64| Complex64::new(re, im);
    match (axis, inverse) {
        (Axis::Z, _) => None,
        // H is its own inverse.
        (Axis::X, _) => Some([[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]]),
        // H·S† and its inverse S·H.
        (Axis::Y, false) => Some([[c(h, 0.0), c(0.0, -h)], [c(h, 0.0), c(0.0, h)]]),
        (Axis::Y, true) => Some([[c(h, 0.0), c(h, 0.0)], [c(0.0, h), c(0.0, -h)]]),
    }
}

fn rotate(state: &StateVector, basis: &MeasurementBasis, inverse: bool) -> Result<StateVector> {
    if basis.len() != state.qubits {
        return Err(Error::DimensionMismatch { expected: state.qubits, got: basis.len() });
    }
    let mut out = state.clone();
    for (q, &axis) in basis.0.iter().enumerate() {
        if let Some(m) = rotation_matrix(axis, inverse) {
            out.apply_single(q, m);
        }
    }
    Ok(out)
}

/// Rotates so that a Z-basis readout measures `basis`; bit 0 is eigenvalue +1.
pub fn rotate_to_basis(state: &StateVector, basis: &MeasurementBasis) -> Result<StateVector> {
    rotate(state, basis, false)
}

pub fn rotate_from_basis(state: &StateVector, basis: &MeasurementBasis) -> Result<StateVector> {
    rotate(state, basis, true)
}

/// Exact outcome probabilities in `basis`, keyed by basis index; zero entries omitted.
pub fn exact_distribution(state: &StateVector, basis: &MeasurementBasis) -> Result<BTreeMap<u64, f64>> {
    let rotated = rotate_to_basis(state, basis)?;
    Ok(rotated.probabilities().into_iter().enumerate().filter(|&(_, p)| p > 0.0).map(|(i, p)| (i as u64, p)).collect())
}

/// Draws `shots` Z-basis outcomes; counts keyed by basis index.
pub fn sample(state: &StateVector, shots: u64, seed: u64) -> Result<BTreeMap<u64, u64>> {
    if shots == 0 {
        return Err(Error::Invalid("shots must be at least 1".into()));
    }
    SAMPLE_CALLS.fetch_add(1, Ordering::SeqCst);
    let mut rng = Rng::seed_from_u64(seed);
    let probs = state.probabilities();
    let total: f64 = probs.iter().sum();
    let mut remaining_shots = shots;
    let mut remaining_mass = total;
    let mut counts = BTreeMap::new();
    for (i, &p) in probs.iter().enumerate() {
        if remaining_shots == 0 {
            break;
        }
        if p <= 0.0 {
            continue;
        }
        let frac = (p / remaining_mass).clamp(0.0, 1.0);
        let k = if frac >= 1.0 {
            remaining_shots
        } else {
            Binomial::new(remaining_shots, frac).map_err(|e| Error::Invalid(e.to_string()))?.sample(&mut rng)
        };
        if k > 0 {
            counts.insert(i as u64, k);
        }
        remaining_shots -= k;
        remaining_mass -= p;
    }
    if remaining_shots > 0 {
        // Round-off left mass unassigned; give it to the most probable outcome.
        let best = probs.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| i as u64).unwrap_or(0);
        *counts.entry(best).or_insert(0) += remaining_shots;
    }
    Ok(counts)
}
