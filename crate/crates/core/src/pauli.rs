//! Jordan-Wigner encoding and Jastrow dressing of fermionic terms.
//!
//! `c†_q = (X_q - iY_q)/2 · Z_0 ⋯ Z_{q-1}` and `n_q = (1 - Z_q)/2`.
//!
//! For a term `h N C†_{Q+} C_{Q-}` with ladder set `Q_l = Q+ ∪ Q-` and
//! complement `Q̄_l`, a diagonal Jastrow factor `G` satisfies
//! `G T G = T · W`, where `W` depends only on the occupations in `Q̄_l`:
//!
//! ```text
//! W = exp(-Σ_{q≤q'} [ε_q + ε_q' + ζ_qq'] θ_qq' n_q^ε_q n_q'^ε_q')
//! ```
//!
//! with `ε_q = 1` on `Q̄_l` and `ζ_qq' = 1` for pairs inside `Q+` or inside
//! `Q-` (diagonal pairs included). After the encoding each Pauli string
//! carries only `X`/`Y` letters on `Q_l` and `I`/`Z` letters on `Q̄_l`, so one
//! rotated readout yields the string eigenvalue and every `n_q` in `W`.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::cvqe::JastrowParams;
use crate::error::{Error, Result};
use crate::fock::{check_dense_size, HamiltonianTerm};
use crate::sim::{Axis, MeasurementBasis};

/// Coefficients below this magnitude are dropped after merging.
pub const MERGE_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    /// `self · other = phase · letter`.
    fn mul(self, other: Pauli) -> (Complex64, Pauli) {
        use Pauli::*;
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match (self, other) {
            (I, p) | (p, I) => (one, p),
            (a, b) if a == b => (one, I),
            (X, Y) => (i, Z),
            (Y, Z) => (i, X),
            (Z, X) => (i, Y),
            (Y, X) => (-i, Z),
            (Z, Y) => (-i, X),
            (X, Z) => (-i, Y),
            _ => unreachable!(),
        }
    }

    fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Coefficient times a tensor product of single-qubit Paulis, stored as
/// `x`/`z` bit masks (qubit `q` at bit `2^q`).
#[derive(Debug, Clone, PartialEq)]
pub struct PauliString {
    pub coefficient: Complex64,
    pub(crate) qubits: usize,
    pub(crate) x: u64,
    pub(crate) z: u64,
}

impl PauliString {
    pub fn identity(qubits: usize, coefficient: impl Into<Complex64>) -> Self {
        Self { coefficient: coefficient.into(), qubits, x: 0, z: 0 }
    }

    pub fn from_letters(coefficient: impl Into<Complex64>, letters: &str) -> Result<Self> {
        let mut s = Self::identity(letters.len(), coefficient);
        for (q, ch) in letters.chars().enumerate() {
            let p = match ch {
                'I' => Pauli::I,
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                other => return Err(Error::Parse(format!("bad Pauli letter {other:?}"))),
            };
            s.set(q, p);
        }
        Ok(s)
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn letter(&self, q: usize) -> Pauli {
        Pauli::from_bits(self.x >> q & 1 == 1, self.z >> q & 1 == 1)
    }

    fn set(&mut self, q: usize, p: Pauli) {
        let (x, z) = p.bits();
        self.x = (self.x & !(1 << q)) | (x as u64) << q;
        self.z = (self.z & !(1 << q)) | (z as u64) << q;
    }

    pub fn letters(&self) -> String {
        (0..self.qubits).map(|q| self.letter(q).letter()).collect()
    }

    pub fn mul(&self, other: &PauliString) -> PauliString {
        let mut out = Self::identity(self.qubits, self.coefficient * other.coefficient);
        for q in 0..self.qubits {
            let (phase, p) = self.letter(q).mul(other.letter(q));
            out.coefficient *= phase;
            out.set(q, p);
        }
        out
    }

    /// Action on a basis state: `P|m> = phase · |m ^ x>` (coefficient excluded).
    pub fn act(&self, bits: u64) -> (u64, Complex64) {
        let ny = (self.x & self.z).count_ones();
        let mut phase = match ny % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        if (bits & self.z).count_ones() % 2 == 1 {
            phase = -phase;
        }
        (bits ^ self.x, phase)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = self.coefficient;
        if c.im == 0.0 {
            write!(f, "{} {}", c.re, self.letters())
        } else {
            write!(f, "({}{:+}i) {}", c.re, c.im, self.letters())
        }
    }
}

/// Merges strings with equal letters and drops cancelled ones.
pub fn simplify(strings: impl IntoIterator<Item = PauliString>) -> Vec<PauliString> {
    let mut acc: BTreeMap<(u64, u64), PauliString> = BTreeMap::new();
    for s in strings {
        acc.entry((s.x, s.z)).and_modify(|e| e.coefficient += s.coefficient).or_insert(s);
    }
    acc.into_values().filter(|s| s.coefficient.norm() >= MERGE_TOL).collect()
}

fn product(a: &[PauliString], b: &[PauliString]) -> Vec<PauliString> {
    simplify(a.iter().flat_map(|p| b.iter().map(move |q| p.mul(q))))
}

/// `(X_q ∓ iY_q)/2 · Z_0 ⋯ Z_{q-1}` for creation (`-`) or annihilation (`+`).
fn ladder(qubits: usize, q: usize, creation: bool) -> Vec<PauliString> {
    let mut x = PauliString::identity(qubits, 0.5);
    let mut y = PauliString::identity(qubits, Complex64::new(0.0, if creation { -0.5 } else { 0.5 }));
    for p in 0..q {
        x.set(p, Pauli::Z);
        y.set(p, Pauli::Z);
    }
    x.set(q, Pauli::X);
    y.set(q, Pauli::Y);
    vec![x, y]
}

pub fn jordan_wigner(term: &HamiltonianTerm, qubits: usize) -> Result<Vec<PauliString>> {
    term.validate(qubits)?;
    let mut acc = vec![PauliString::identity(qubits, term.coefficient)];
    for &q in &term.number_set {
        let mut z = PauliString::identity(qubits, -0.5);
        z.set(q, Pauli::Z);
        acc = product(&acc, &[PauliString::identity(qubits, 0.5), z]);
    }
    for &q in &term.create_set {
        acc = product(&acc, &ladder(qubits, q, true));
    }
    for &q in &term.annihilate_set {
        acc = product(&acc, &ladder(qubits, q, false));
    }
    Ok(acc)
}

pub fn jordan_wigner_all(terms: &[HamiltonianTerm], qubits: usize) -> Result<Vec<PauliString>> {
    let mut all = Vec::new();
    for t in terms {
        all.extend(jordan_wigner(t, qubits)?);
    }
    Ok(simplify(all))
}

/// Dense matrix of a Pauli sum, assembled directly from string actions.
pub fn dense_matrix(strings: &[PauliString], qubits: usize) -> Result<DMatrix<Complex64>> {
    check_dense_size(qubits)?;
    let dim = 1usize << qubits;
    let mut m = DMatrix::zeros(dim, dim);
    for s in strings {
        if s.qubits != qubits {
            return Err(Error::DimensionMismatch { expected: qubits, got: s.qubits });
        }
        for col in 0..dim as u64 {
            let (row, phase) = s.act(col);
            m[(row as usize, col as usize)] += s.coefficient * phase;
        }
    }
    Ok(m)
}

/// One Pauli string of a Jastrow-dressed term together with its weight structure.
#[derive(Debug, Clone, PartialEq)]
pub struct DressedTerm {
    pub coefficient: Complex64,
    /// `X`/`Y` letters on the ladder orbitals, unit coefficient.
    pub x_y_part: PauliString,
    /// `I`/`Z` letters on the spectator orbitals, unit coefficient.
    pub z_part: PauliString,
    /// Bit `q` set iff `ε_q = 1`.
    pub epsilon: u64,
    /// Row `q` holds the `ζ_qq'` bits; symmetric.
    pub zeta: Vec<u64>,
}

impl DressedTerm {
    /// The identity term `h · G²`, used for the normalization.
    pub fn identity(qubits: usize, coefficient: impl Into<Complex64>) -> Self {
        Self {
            coefficient: coefficient.into(),
            x_y_part: PauliString::identity(qubits, 1.0),
            z_part: PauliString::identity(qubits, 1.0),
            epsilon: full_mask(qubits),
            zeta: vec![0; qubits],
        }
    }

    pub fn qubits(&self) -> usize {
        self.x_y_part.qubits
    }

    pub fn zeta(&self, q: usize, p: usize) -> bool {
        self.zeta[q] >> p & 1 == 1
    }

    pub fn epsilon(&self, q: usize) -> bool {
        self.epsilon >> q & 1 == 1
    }

    /// Bare Pauli string `h̃ · A · B`.
    pub fn pauli_string(&self) -> PauliString {
        let mut s = self.x_y_part.mul(&self.z_part);
        s.coefficient = self.coefficient;
        s
    }

    /// Eigenvalue `a·b` of the bare string on a readout taken in [`measurement_basis`].
    pub fn sign(&self, bits: u64) -> f64 {
        let support = self.x_y_part.x | self.z_part.z;
        if (bits & support).count_ones().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }

    /// Jastrow weight `W` for measured occupations `bits` of the spectator orbitals.
    ///
    /// Only pairs with a non-vanishing occupation product contribute, so an
    /// infinite `θ` zeroes exactly the configurations it penalizes.
    pub fn weight(&self, bits: u64, theta: &JastrowParams) -> f64 {
        let mut exponent = 0.0;
        for &(q, p, t) in theta.pairs() {
            let eq = self.epsilon >> q & 1;
            let ep = self.epsilon >> p & 1;
            let zeta = self.zeta[q] >> p & 1;
            let coef = eq + ep + zeta;
            if coef == 0 {
                continue;
            }
            let occ_q = eq == 0 || bits >> q & 1 == 1;
            let occ_p = ep == 0 || bits >> p & 1 == 1;
            if occ_q && occ_p {
                exponent += coef as f64 * t;
            }
        }
        (-exponent).exp()
    }

    /// Dense matrix of `h̃ · A · B · W(θ)`.
    pub fn dense(&self, theta: &JastrowParams) -> Result<DMatrix<Complex64>> {
        let qubits = self.qubits();
        check_dense_size(qubits)?;
        let s = self.pauli_string();
        let dim = 1usize << qubits;
        let mut m = DMatrix::zeros(dim, dim);
        for col in 0..dim as u64 {
            let (row, phase) = s.act(col);
            m[(row as usize, col as usize)] += s.coefficient * phase * self.weight(col, theta);
        }
        Ok(m)
    }

    fn key(&self) -> (u64, u64, u64, u64, Vec<u64>) {
        (self.x_y_part.x, self.x_y_part.z, self.z_part.z, self.epsilon, self.zeta.clone())
    }
}

fn full_mask(qubits: usize) -> u64 {
    if qubits >= 64 {
        u64::MAX
    } else {
        (1u64 << qubits) - 1
    }
}

fn pair_mask_rows(sets: &[&[usize]], qubits: usize) -> Vec<u64> {
    let mut rows = vec![0u64; qubits];
    for set in sets {
        for &q in set.iter() {
            for &p in set.iter() {
                rows[q] |= 1 << p;
            }
        }
    }
    rows
}

/// Dresses one fermionic term: its Jordan-Wigner strings with `ε`/`ζ` attached.
pub fn dress_term(term: &HamiltonianTerm, qubits: usize) -> Result<Vec<DressedTerm>> {
    let ladder = term.ladder_mask();
    let epsilon = full_mask(qubits) & !ladder;
    let zeta = pair_mask_rows(&[&term.create_set, &term.annihilate_set], qubits);
    let strings = jordan_wigner(term, qubits)?;
    let mut out = Vec::with_capacity(strings.len());
    for s in strings {
        // Split the string into its ladder (X/Y) and spectator (I/Z) factors.
        let mut xy = PauliString::identity(qubits, 1.0);
        let mut zs = PauliString::identity(qubits, 1.0);
        for q in 0..qubits {
            let p = s.letter(q);
            let on_ladder = ladder >> q & 1 == 1;
            match (on_ladder, p) {
                (true, Pauli::X | Pauli::Y) => xy.set(q, p),
                (false, Pauli::I | Pauli::Z) => zs.set(q, p),
                _ => {
                    return Err(Error::Invalid(format!(
                        "encoded string {} has letter {:?} on orbital {q} (ladder: {on_ladder})",
                        s.letters(),
                        p
                    )))
                }
            }
        }
        out.push(DressedTerm { coefficient: s.coefficient, x_y_part: xy, z_part: zs, epsilon, zeta: zeta.clone() });
    }
    Ok(out)
}

/// Dresses a whole operator and merges strings with identical dressing.
pub fn dress_hamiltonian(terms: &[HamiltonianTerm], qubits: usize) -> Result<Vec<DressedTerm>> {
    let mut dressed = Vec::new();
    for t in terms {
        dressed.extend(dress_term(t, qubits)?);
    }
    Ok(merge_dressed(dressed))
}

pub fn merge_dressed(terms: impl IntoIterator<Item = DressedTerm>) -> Vec<DressedTerm> {
    let mut acc: BTreeMap<(u64, u64, u64, u64, Vec<u64>), DressedTerm> = BTreeMap::new();
    for t in terms {
        acc.entry(t.key()).and_modify(|e| e.coefficient += t.coefficient).or_insert(t);
    }
    acc.into_values().filter(|t| t.coefficient.norm() >= MERGE_TOL).collect()
}

/// Readout basis for a dressed term: its `X`/`Y` letters, `Z` elsewhere.
pub fn measurement_basis(term: &DressedTerm) -> MeasurementBasis {
    let xy = &term.x_y_part;
    MeasurementBasis(
        (0..xy.qubits)
            .map(|q| match xy.letter(q) {
                Pauli::X => Axis::X,
                Pauli::Y => Axis::Y,
                _ => Axis::Z,
            })
            .collect(),
    )
}
