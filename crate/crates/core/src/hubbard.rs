//! Four-site Hubbard models at the Γ point.
//!
//! `H = μ Σ n_iσ + k Σ_<ij>,σ (c†_iσ c_jσ + h.c.) + d Σ_i n_i↑ n_i↓`, with
//! spin-orbital `q = i + N σ` (all spin-up sites first).

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::cvqe::JastrowParams;
use crate::error::{Error, Result};
use crate::fock::{HamiltonianTerm, OccupationConfig};
use crate::onebody::{compile_thouless, decompose, GateSequence, OneBodyMatrix};
use crate::pauli::{DressedTerm, PauliString};

const DEGENERACY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LatticeKind {
    Square4,
    Triangular4,
    Custom,
}

impl fmt::Display for LatticeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LatticeKind::Square4 => "square4",
            LatticeKind::Triangular4 => "triangular4",
            LatticeKind::Custom => "custom",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    kind: LatticeKind,
    sites: usize,
    bonds: Vec<(usize, usize)>,
}

impl Lattice {
    /// 2×2 periodic square cluster. Both periodic images of a bond collapse onto one.
    ///
    /// ```text
    /// 0 - 1
    /// |   |
    /// 2 - 3
    /// ```
    pub fn square4() -> Self {
        Self { kind: LatticeKind::Square4, sites: 4, bonds: vec![(0, 1), (0, 2), (1, 3), (2, 3)] }
    }

    /// Periodic four-site triangular cluster: every site pair is a neighbour.
    pub fn triangular4() -> Self {
        Self { kind: LatticeKind::Triangular4, sites: 4, bonds: vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] }
    }

    /// Arbitrary graph; bonds are normalized to `i < j` and deduplicated.
    pub fn custom(sites: usize, bonds: &[(usize, usize)]) -> Result<Self> {
        let mut out: Vec<(usize, usize)> = Vec::with_capacity(bonds.len());
        for &(i, j) in bonds {
            for s in [i, j] {
                if s >= sites {
                    return Err(Error::IndexOutOfRange { index: s, size: sites });
                }
            }
            if i == j {
                return Err(Error::Invalid(format!("bond ({i}, {j}) is a loop")));
            }
            out.push((i.min(j), i.max(j)));
        }
        out.sort_unstable();
        out.dedup();
        Ok(Self { kind: LatticeKind::Custom, sites, bonds: out })
    }

    pub fn kind(&self) -> LatticeKind {
        self.kind
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn bonds(&self) -> &[(usize, usize)] {
        &self.bonds
    }

    pub fn spin_orbitals(&self) -> usize {
        2 * self.sites
    }

    pub fn adjacency(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.sites, self.sites);
        for &(i, j) in &self.bonds {
            a[(i, j)] = 1.0;
            a[(j, i)] = 1.0;
        }
        a
    }
}

impl FromStr for Lattice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "square4" => Ok(Self::square4()),
            "triangular4" => Ok(Self::triangular4()),
            _ => Err(Error::Parse(format!("unknown lattice {s:?} (expected square4 or triangular4)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HubbardParams {
    pub mu: f64,
    pub k: f64,
    pub d: f64,
}

impl HubbardParams {
    pub fn with_default_mu(lat: &Lattice, d: f64, k: f64) -> Result<Self> {
        Ok(Self { mu: default_mu(lat, d, k)?, k, d })
    }
}

/// Chemical potential placing each lattice at half filling:
/// `-d/2` on the square cluster and `k - 2d/3` on the triangular one.
pub fn default_mu(lat: &Lattice, d: f64, k: f64) -> Result<f64> {
    match lat.kind {
        LatticeKind::Square4 => Ok(-d / 2.0),
        LatticeKind::Triangular4 => Ok(k - 2.0 * d / 3.0),
        LatticeKind::Custom => Err(Error::NoDefaultMu(lat.kind.to_string())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spin {
    Up = 0,
    Down = 1,
}

pub fn spin_orbital(site: usize, spin: Spin, sites: usize) -> usize {
    site + sites * spin as usize
}

pub fn chemical_terms(lat: &Lattice, p: &HubbardParams) -> Vec<HamiltonianTerm> {
    (0..lat.spin_orbitals()).map(|q| HamiltonianTerm::number(p.mu, q)).collect()
}

pub fn kinetic_terms(lat: &Lattice, p: &HubbardParams) -> Vec<HamiltonianTerm> {
    let n = lat.sites;
    let mut out = Vec::with_capacity(4 * lat.bonds.len());
    for spin in [Spin::Up, Spin::Down] {
        for &(i, j) in &lat.bonds {
            let (a, b) = (spin_orbital(i, spin, n), spin_orbital(j, spin, n));
            out.push(HamiltonianTerm::hopping(p.k, a, b));
            out.push(HamiltonianTerm::hopping(p.k, b, a));
        }
    }
    out
}

pub fn interaction_terms(lat: &Lattice, p: &HubbardParams) -> Vec<HamiltonianTerm> {
    let n = lat.sites;
    (0..n)
        .map(|i| {
            HamiltonianTerm::new(
                p.d,
                vec![spin_orbital(i, Spin::Up, n), spin_orbital(i, Spin::Down, n)],
                vec![],
                vec![],
            )
        })
        .collect()
}

pub fn build_hamiltonian(lat: &Lattice, p: &HubbardParams) -> Vec<HamiltonianTerm> {
    let mut terms = chemical_terms(lat, p);
    terms.extend(kinetic_terms(lat, p));
    terms.extend(interaction_terms(lat, p));
    terms
}

/// Single-spin hopping plus chemical potential, `k A + μ I`.
pub fn one_body_matrix(lat: &Lattice, p: &HubbardParams) -> DMatrix<f64> {
    lat.adjacency() * p.k + DMatrix::identity(lat.sites, lat.sites) * p.mu
}

/// Eigenpairs of a real symmetric matrix, ascending; degenerate levels are
/// ordered lexicographically by their sign-fixed eigenvectors.
pub fn sorted_eigenpairs(h: &DMatrix<f64>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let eig = SymmetricEigen::new(h.clone());
    let mut pairs: Vec<(f64, Vec<f64>)> = (0..h.nrows())
        .map(|c| {
            let mut v: Vec<f64> = eig.eigenvectors.column(c).iter().copied().collect();
            if let Some(first) = v.iter().copied().find(|x| x.abs() > DEGENERACY_TOL) {
                if first < 0.0 {
                    v.iter_mut().for_each(|x| *x = -*x);
                }
            }
            (eig.eigenvalues[c], v)
        })
        .collect();
    pairs.sort_by(|a, b| {
        if (a.0 - b.0).abs() > DEGENERACY_TOL {
            a.0.total_cmp(&b.0)
        } else {
            a.1.iter().zip(&b.1).map(|(x, y)| x.total_cmp(y)).find(|o| *o != Ordering::Equal).unwrap_or(Ordering::Equal)
        }
    });
    pairs.into_iter().unzip()
}

/// Slater-determinant reference: the same single-spin orbitals for both spins.
#[derive(Debug, Clone, PartialEq)]
pub struct FermiSea {
    /// One-body eigenvalues, ascending.
    pub energies: Vec<f64>,
    /// Occupied eigen-orbitals (indices into `energies`), per spin.
    pub occupied: Vec<usize>,
    /// Rows are the eigen-orbitals of one spin block.
    pub spin_block: OneBodyMatrix,
    /// `spin_block ⊕ spin_block` on all spin-orbitals.
    pub full: OneBodyMatrix,
    pub spin_config: OccupationConfig,
    pub config: OccupationConfig,
}

impl FermiSea {
    /// Sum of occupied one-body energies over both spins.
    pub fn energy(&self) -> f64 {
        2.0 * self.occupied.iter().map(|&r| self.energies[r]).sum::<f64>()
    }

    /// Preparation of the full `2N`-qubit state.
    pub fn circuit(&self) -> Result<GateSequence> {
        thouless_preparation(&self.full, &self.config)
    }

    /// Preparation of one spin sector on `N` qubits.
    pub fn spin_circuit(&self) -> Result<GateSequence> {
        thouless_preparation(&self.spin_block, &self.spin_config)
    }
}

/// `X` gates for `config` followed by the compiled Thouless circuit of `f`.
pub fn thouless_preparation(f: &OneBodyMatrix, config: &OccupationConfig) -> Result<GateSequence> {
    let compiled = compile_thouless(&decompose(f)?);
    Ok(GateSequence::preparation(config).then(&compiled.gates))
}

/// Fermi sea with the lowest `particles_per_spin` orbitals occupied in each spin.
pub fn fermi_sea(lat: &Lattice, p: &HubbardParams, particles_per_spin: usize) -> Result<FermiSea> {
    if particles_per_spin > lat.sites {
        return Err(Error::Invalid(format!("{particles_per_spin} particles per spin on {} sites", lat.sites)));
    }
    fermi_sea_with(lat, p, &(0..particles_per_spin).collect::<Vec<_>>())
}

/// Fermi sea with an explicit choice of occupied eigen-orbitals (ascending order index).
pub fn fermi_sea_with(lat: &Lattice, p: &HubbardParams, occupied: &[usize]) -> Result<FermiSea> {
    let n = lat.sites;
    let (energies, vectors) = sorted_eigenpairs(&one_body_matrix(lat, p));
    let f = DMatrix::from_fn(n, n, |r, c| vectors[r][c]);
    let spin_block = OneBodyMatrix::from_real(&f)?;
    let full = OneBodyMatrix::direct_sum(&spin_block, &spin_block);
    let spin_config = OccupationConfig::from_occupied(occupied, n)?;
    let both: Vec<usize> = occupied.iter().flat_map(|&r| [r, r + n]).collect();
    let config = OccupationConfig::from_occupied(&both, 2 * n)?;
    let mut occupied = occupied.to_vec();
    occupied.sort_unstable();
    Ok(FermiSea { energies, occupied, spin_block, full, spin_config, config })
}

/// `G(θ) = e^{-θ D}`: `θ` on every `(i↑, i↓)` pair, zero elsewhere. `θ` may be `+∞`.
pub fn gutzwiller(sites: usize, theta: f64) -> JastrowParams {
    let mut m = DMatrix::zeros(2 * sites, 2 * sites);
    if theta != 0.0 {
        for i in 0..sites {
            m[(i, i + sites)] = theta;
            m[(i + sites, i)] = theta;
        }
    }
    JastrowParams::new(m).expect("Gutzwiller parameters are symmetric")
}

/// Dressed hopping strings `k/2 (X_a Z..Z X_b + Y_a Z..Z Y_b)` for every bond and spin.
///
/// Built directly from the lattice; equal to dressing [`kinetic_terms`] term by term.
pub fn dressed_kinetic(lat: &Lattice, p: &HubbardParams) -> Vec<DressedTerm> {
    let n = lat.sites;
    let qubits = 2 * n;
    let all = (1u64 << qubits) - 1;
    let mut out = Vec::with_capacity(4 * lat.bonds.len());
    for spin in [Spin::Up, Spin::Down] {
        for &(i, j) in &lat.bonds {
            let (a, b) = (spin_orbital(i, spin, n), spin_orbital(j, spin, n));
            let tail: u64 = ((a + 1)..b).map(|q| 1u64 << q).sum();
            let mut zeta = vec![0u64; qubits];
            zeta[a] = 1 << a;
            zeta[b] = 1 << b;
            let mut z_part = PauliString::identity(qubits, 1.0);
            z_part.z = tail;
            for letters in [(true, false), (true, true)] {
                // (x, z) bits on both ends: X = (1, 0), Y = (1, 1).
                let mut xy = PauliString::identity(qubits, 1.0);
                xy.x = 1 << a | 1 << b;
                if letters.1 {
                    xy.z = 1 << a | 1 << b;
                }
                out.push(DressedTerm {
                    coefficient: (p.k / 2.0).into(),
                    x_y_part: xy,
                    z_part: z_part.clone(),
                    epsilon: all & !(1 << a | 1 << b),
                    zeta: zeta.clone(),
                });
            }
        }
    }
    out
}

/// Model metadata stored with measurement records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDescriptor {
    pub lattice: String,
    #[serde(rename = "N")]
    pub sites: usize,
    pub mu: f64,
    pub k: f64,
    pub d: f64,
    pub ordering: String,
    /// Occupied one-body orbitals per spin, by ascending-energy index.
    pub occupied_orbitals: Vec<usize>,
}

impl ModelDescriptor {
    pub fn new(lat: &Lattice, p: &HubbardParams, occupied: &[usize]) -> Self {
        Self {
            lattice: lat.kind.to_string(),
            sites: lat.sites,
            mu: p.mu,
            k: p.k,
            d: p.d,
            ordering: "up-block-first".into(),
            occupied_orbitals: occupied.to_vec(),
        }
    }

    pub fn lattice(&self) -> Result<Lattice> {
        let lat: Lattice = self.lattice.parse()?;
        if lat.sites != self.sites {
            return Err(Error::DimensionMismatch { expected: lat.sites, got: self.sites });
        }
        Ok(lat)
    }

    pub fn params(&self) -> HubbardParams {
        HubbardParams { mu: self.mu, k: self.k, d: self.d }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::dense_operator;
    use crate::pauli::{dress_hamiltonian, dress_term, measurement_basis};
    use crate::sim;
    use num_complex::Complex64;

    fn params(d: f64) -> HubbardParams {
        HubbardParams { mu: -d / 2.0, k: 1.0, d }
    }

    #[test]
    fn bond_counts() {
        assert_eq!(Lattice::square4().bonds().len(), 4);
        assert_eq!(Lattice::triangular4().bonds().len(), 6);
        let c = Lattice::custom(3, &[(0, 1), (1, 0), (2, 1)]).unwrap();
        assert_eq!(c.bonds(), &[(0, 1), (1, 2)]);
        assert!(Lattice::custom(3, &[(0, 3)]).is_err());
        assert!(Lattice::custom(3, &[(1, 1)]).is_err());
    }

    #[test]
    fn default_mu_values() {
        let (sq, tri) = (Lattice::square4(), Lattice::triangular4());
        assert_eq!(default_mu(&sq, 2.0, 1.0).unwrap(), -1.0);
        assert_eq!(default_mu(&sq, 0.0, 1.0).unwrap(), 0.0);
        assert_eq!(default_mu(&tri, 0.0, 1.0).unwrap(), 1.0);
        assert!(matches!(default_mu(&Lattice::custom(2, &[(0, 1)]).unwrap(), 0.0, 1.0), Err(Error::NoDefaultMu(_))));
    }

    #[test]
    fn hamiltonian_structure() {
        let lat = Lattice::square4();
        let h = build_hamiltonian(&lat, &params(2.0));
        let hopping = h.iter().filter(|t| !t.create_set.is_empty()).count();
        // 4 bonds × 2 spins, each with its conjugate.
        assert_eq!(hopping, 16);
        assert_eq!(h.len(), 8 + 16 + 4);
    }

    #[test]
    fn chemical_only_ground_energy() {
        let lat = Lattice::square4();
        let p = HubbardParams { mu: -0.7, k: 0.0, d: 0.0 };
        let m = dense_operator(&build_hamiltonian(&lat, &p), 8).unwrap();
        for idx in 0..256usize {
            let want = -0.7 * idx.count_ones() as f64;
            assert!((m[(idx, idx)].re - want).abs() < 1e-14);
        }
    }

    #[test]
    fn square_spectrum_and_degeneracy() {
        let (e, _) = sorted_eigenpairs(&Lattice::square4().adjacency());
        let want = [-2.0, 0.0, 0.0, 2.0];
        for (a, b) in e.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_hopping_sea_is_site_basis() {
        let lat = Lattice::square4();
        let sea = fermi_sea(&lat, &HubbardParams { mu: 0.0, k: 0.0, d: 0.0 }, 2).unwrap();
        let f = sea.spin_block.entries();
        for r in 0..4 {
            let nonzero: Vec<_> = (0..4).filter(|&c| f[(r, c)].norm() > 1e-12).collect();
            assert_eq!(nonzero.len(), 1);
            assert!((f[(r, nonzero[0])].re.abs() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sea_circuit_has_sea_kinetic_energy() {
        for lat in [Lattice::square4(), Lattice::triangular4()] {
            let p = HubbardParams { mu: 0.3, k: 1.0, d: 0.0 };
            let sea = fermi_sea(&lat, &p, 2).unwrap();
            let psi = sim::apply(&sim::vacuum(8), &sea.circuit().unwrap()).unwrap();
            let mut one_body = kinetic_terms(&lat, &p);
            one_body.extend(chemical_terms(&lat, &p));
            let m = dense_operator(&one_body, 8).unwrap();
            let v = nalgebra::DVector::from_column_slice(psi.amplitudes());
            let e = (v.adjoint() * &m * &v)[(0, 0)].re;
            assert!((e - sea.energy()).abs() < 1e-10, "{e} vs {}", sea.energy());
            // Half filling with certainty.
            for (bits, p) in psi.probabilities().iter().enumerate() {
                if *p > 1e-14 {
                    assert_eq!(bits.count_ones(), 4);
                }
            }
        }
    }

    #[test]
    fn gutzwiller_structure() {
        assert!(gutzwiller(4, 0.0).pairs().is_empty());
        let g = gutzwiller(4, 0.7);
        assert_eq!(g.pairs(), &[(0, 4, 0.7), (1, 5, 0.7), (2, 6, 0.7), (3, 7, 0.7)]);
        assert_eq!(g.matrix()[(5, 1)], 0.7);
    }

    #[test]
    fn gutzwiller_realizes_double_occupancy_exponential() {
        let lat = Lattice::square4();
        let theta = 0.7;
        let g = gutzwiller(4, theta);
        let dress = crate::pauli::DressedTerm::identity(8, 1.0).dense(&g).unwrap();
        let d = dense_operator(&interaction_terms(&lat, &HubbardParams { mu: 0.0, k: 0.0, d: 1.0 }), 8).unwrap();
        for i in 0..256 {
            // The identity term carries G², i.e. e^{-2θD}.
            let want = (-2.0 * theta * d[(i, i)].re).exp();
            assert!((dress[(i, i)] - Complex64::new(want, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn direct_kinetic_dressing_matches_generic() {
        for lat in [Lattice::square4(), Lattice::triangular4()] {
            let p = HubbardParams { mu: 0.0, k: 0.8, d: 0.0 };
            let direct = crate::pauli::merge_dressed(dressed_kinetic(&lat, &p));
            let generic = dress_hamiltonian(&kinetic_terms(&lat, &p), 8).unwrap();
            assert_eq!(direct, generic);
        }
    }

    #[test]
    fn commuting_terms_need_only_all_z() {
        let lat = Lattice::triangular4();
        let p = params(1.5);
        let mut terms = chemical_terms(&lat, &p);
        terms.extend(interaction_terms(&lat, &p));
        let dressed = dress_hamiltonian(&terms, 8).unwrap();
        assert!(dressed.iter().all(|t| measurement_basis(t).is_all_z()));
        for t in &terms {
            for dt in dress_term(t, 8).unwrap() {
                assert_eq!(dt.x_y_part.x, 0);
            }
        }
    }

    #[test]
    fn descriptor_round_trip() {
        let lat = Lattice::triangular4();
        let p = HubbardParams::with_default_mu(&lat, 1.5, 1.0).unwrap();
        let m = ModelDescriptor::new(&lat, &p, &[0, 1]);
        let text = serde_json::to_string(&m).unwrap();
        assert!(text.contains("\"N\":4"));
        let back: ModelDescriptor = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.lattice().unwrap(), lat);
        assert_eq!(back.params(), p);
    }
}
