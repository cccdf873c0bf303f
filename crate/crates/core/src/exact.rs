//! Dense-matrix reference: exact diagonalization and dressed expectation values.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::cvqe::{minimize_scalar, JastrowParams, ScalarMinimum};
use crate::error::{Error, Result};
use crate::fock::{check_dense_size, dense_operator, HamiltonianTerm};
use crate::pauli::{dense_matrix, jordan_wigner_all};
use crate::sim::StateVector;

/// Agreement required between the two dense builders.
pub const BUILDER_TOL: f64 = 1e-12;
pub const RESIDUAL_TOL: f64 = 1e-10;
const DEGENERACY_TOL: f64 = 1e-9;

/// Dense Hamiltonian, validated against an independent Pauli-string assembly.
#[derive(Debug, Clone)]
pub struct DenseHamiltonian {
    qubits: usize,
    matrix: DMatrix<Complex64>,
}

#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    pub state: StateVector,
    /// Number of eigenvalues within `1e-9` of the lowest.
    pub degeneracy: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DressedExpectation {
    pub numerator: f64,
    pub denominator: f64,
    pub energy: f64,
}

impl DenseHamiltonian {
    pub fn new(terms: &[HamiltonianTerm], qubits: usize) -> Result<Self> {
        check_dense_size(qubits)?;
        let matrix = dense_operator(terms, qubits)?;
        let via_pauli = dense_matrix(&jordan_wigner_all(terms, qubits)?, qubits)?;
        let diff = max_abs_diff(&matrix, &via_pauli);
        if diff > BUILDER_TOL {
            return Err(Error::Invalid(format!("dense builders disagree by {diff:.3e}")));
        }
        let herm = max_abs_diff(&matrix, &matrix.adjoint());
        if herm > BUILDER_TOL {
            return Err(Error::NotHermitian(herm));
        }
        Ok(Self { qubits, matrix })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// Lowest eigenpair. Within a degenerate ground space the eigenvector is
    /// phase-fixed (first non-negligible component real positive) and the
    /// lexicographically smallest one is returned.
    pub fn ground_state(&self) -> Result<GroundState> {
        let eig = SymmetricEigen::new(self.matrix.clone());
        let lowest = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        let mut candidates: Vec<DVector<Complex64>> = (0..eig.eigenvalues.len())
            .filter(|&c| eig.eigenvalues[c] - lowest <= DEGENERACY_TOL)
            .map(|c| phase_fixed(eig.eigenvectors.column(c).into_owned()))
            .collect();
        let degeneracy = candidates.len();
        candidates.sort_by(lexicographic);
        let v = candidates.swap_remove(0);
        let residual =
            (&self.matrix * &v - &v * Complex64::new(lowest, 0.0)).iter().map(|x| x.norm()).fold(0.0, f64::max);
        if residual > RESIDUAL_TOL {
            return Err(Error::Invalid(format!("eigen residual {residual:.3e} exceeds {RESIDUAL_TOL:e}")));
        }
        let state = StateVector::from_amplitudes(self.qubits, v.iter().copied().collect())?;
        Ok(GroundState { energy: lowest, state, degeneracy })
    }

    /// `<ψ|G H G|ψ>` and `<ψ|G²|ψ>` with `G` built explicitly as a diagonal.
    pub fn dressed_expectation(&self, psi: &StateVector, theta: &JastrowParams) -> Result<DressedExpectation> {
        if psi.qubits() != self.qubits {
            return Err(Error::DimensionMismatch { expected: self.qubits, got: psi.qubits() });
        }
        if theta.size() != self.qubits {
            return Err(Error::DimensionMismatch { expected: self.qubits, got: theta.size() });
        }
        let g = jastrow_diagonal(theta);
        let phi = DVector::from_iterator(psi.amplitudes().len(), psi.amplitudes().iter().zip(&g).map(|(a, w)| a * *w));
        let numerator = phi.dotc(&(&self.matrix * &phi)).re;
        let denominator = phi.norm_squared();
        Ok(DressedExpectation { numerator, denominator, energy: numerator / denominator })
    }

    /// Minimizes the dressed energy of `psi` along a one-parameter family.
    pub fn minimize(
        &self,
        psi: &StateVector,
        family: impl Fn(f64) -> JastrowParams,
        bracket: (f64, f64),
        tol: f64,
    ) -> Result<ScalarMinimum> {
        minimize_scalar(|x| Ok(self.dressed_expectation(psi, &family(x))?.energy), bracket, tol)
    }
}

pub fn ground_state(terms: &[HamiltonianTerm], qubits: usize) -> Result<GroundState> {
    DenseHamiltonian::new(terms, qubits)?.ground_state()
}

pub fn dressed_expectation(
    psi: &StateVector,
    terms: &[HamiltonianTerm],
    theta: &JastrowParams,
) -> Result<DressedExpectation> {
    DenseHamiltonian::new(terms, psi.qubits())?.dressed_expectation(psi, theta)
}

/// Diagonal of `G(θ) = exp(-Σ_{q≤q'} θ_qq' n_q n_q')` in the occupation basis.
pub fn jastrow_diagonal(theta: &JastrowParams) -> Vec<f64> {
    let qubits = theta.size();
    (0..1u64 << qubits)
        .map(|bits| {
            let exponent: f64 = theta
                .pairs()
                .iter()
                .filter(|&&(q, p, _)| bits >> q & 1 == 1 && bits >> p & 1 == 1)
                .map(|&(_, _, t)| t)
                .sum();
            (-exponent).exp()
        })
        .collect()
}

fn max_abs_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn phase_fixed(mut v: DVector<Complex64>) -> DVector<Complex64> {
    if let Some(first) = v.iter().copied().find(|a| a.norm() > DEGENERACY_TOL) {
        let phase = first.conj() / first.norm();
        v *= phase;
    }
    let norm = v.norm();
    v / Complex64::new(norm, 0.0)
}

fn lexicographic(a: &DVector<Complex64>, b: &DVector<Complex64>) -> Ordering {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)))
        .find(|o| *o != Ordering::Equal)
        .unwrap_or(Ordering::Equal)
}
