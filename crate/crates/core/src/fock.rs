//! Fock-space bookkeeping on occupation bitstrings.
//!
//! Orbital `q` is stored at bit weight `2^q`, so a configuration doubles as
//! its index in the dense Fock basis. Creation operators are ordered with
//! orbital 0 leftmost, which makes the fermionic sign of `c†_q` the parity of
//! the occupied orbitals strictly below `q` (the same tail that the
//! Jordan-Wigner `Z` string counts).

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest orbital count accepted by dense constructions.
pub const MAX_DENSE_ORBITALS: usize = 12;

/// Occupation numbers of `len` spin-orbitals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OccupationConfig {
    bits: u64,
    len: usize,
}

impl OccupationConfig {
    pub fn vacuum(len: usize) -> Self {
        assert!(len <= 64, "at most 64 orbitals are supported");
        Self { bits: 0, len }
    }

    pub fn from_bits(bits: u64, len: usize) -> Result<Self> {
        if len > 64 || (len < 64 && bits >> len != 0) {
            return Err(Error::Invalid(format!("bit pattern {bits:#b} does not fit in {len} orbitals")));
        }
        Ok(Self { bits, len })
    }

    pub fn from_occupied(occupied: &[usize], len: usize) -> Result<Self> {
        let mut cfg = Self::vacuum(len);
        for &q in occupied {
            cfg.check(q)?;
            cfg.bits |= 1 << q;
        }
        Ok(cfg)
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    /// Index of this configuration in the dense Fock basis.
    pub fn index(&self) -> usize {
        self.bits as usize
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_occupied(&self, q: usize) -> bool {
        q < self.len && self.bits >> q & 1 == 1
    }

    pub fn particle_count(&self) -> u32 {
        self.bits.count_ones()
    }

    pub fn occupied(&self) -> Vec<usize> {
        (0..self.len).filter(|&q| self.is_occupied(q)).collect()
    }

    fn check(&self, q: usize) -> Result<()> {
        if q >= self.len {
            return Err(Error::IndexOutOfRange { index: q, size: self.len });
        }
        Ok(())
    }

    /// Sign of moving an operator on `q` past the occupied orbitals below it.
    fn parity_below(&self, q: usize) -> f64 {
        let mask = (1u64 << q) - 1;
        if (self.bits & mask).count_ones().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }

    /// `c†_q` applied to this configuration; `None` when the result vanishes.
    pub fn create(&self, q: usize) -> Result<Option<(Self, f64)>> {
        self.check(q)?;
        if self.is_occupied(q) {
            return Ok(None);
        }
        let sign = self.parity_below(q);
        Ok(Some((Self { bits: self.bits | 1 << q, len: self.len }, sign)))
    }

    /// `c_q` applied to this configuration; `None` when the result vanishes.
    pub fn annihilate(&self, q: usize) -> Result<Option<(Self, f64)>> {
        self.check(q)?;
        if !self.is_occupied(q) {
            return Ok(None);
        }
        let sign = self.parity_below(q);
        Ok(Some((Self { bits: self.bits & !(1 << q), len: self.len }, sign)))
    }
}

impl fmt::Display for OccupationConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.len {
            f.write_str(if self.is_occupied(q) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for OccupationConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.len() > 64 {
            return Err(Error::Parse(format!("bitstring longer than 64: {s}")));
        }
        let mut bits = 0u64;
        for (q, ch) in s.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => bits |= 1 << q,
                other => return Err(Error::Parse(format!("bad occupation digit {other:?} in {s:?}"))),
            }
        }
        Ok(Self { bits, len: s.len() })
    }
}

/// Formats a basis index as an orbital-0-first bitstring.
pub fn bitstring(bits: u64, len: usize) -> String {
    OccupationConfig { bits, len }.to_string()
}

/// Parses an orbital-0-first bitstring back into a basis index.
pub fn parse_bitstring(s: &str, len: usize) -> Result<u64> {
    let cfg: OccupationConfig = s.parse()?;
    if cfg.len != len {
        return Err(Error::DimensionMismatch { expected: len, got: cfg.len });
    }
    Ok(cfg.bits)
}

/// One term `h N_{number} C†_{create} C_{annihilate}` of a second-quantized operator.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianTerm {
    pub coefficient: Complex64,
    pub number_set: Vec<usize>,
    pub create_set: Vec<usize>,
    pub annihilate_set: Vec<usize>,
}

impl HamiltonianTerm {
    pub fn new(
        coefficient: impl Into<Complex64>,
        number_set: Vec<usize>,
        create_set: Vec<usize>,
        annihilate_set: Vec<usize>,
    ) -> Self {
        Self { coefficient: coefficient.into(), number_set, create_set, annihilate_set }
    }

    pub fn constant(coefficient: impl Into<Complex64>) -> Self {
        Self::new(coefficient, vec![], vec![], vec![])
    }

    pub fn number(coefficient: impl Into<Complex64>, q: usize) -> Self {
        Self::new(coefficient, vec![q], vec![], vec![])
    }

    /// `h c†_p c_q`.
    pub fn hopping(coefficient: impl Into<Complex64>, p: usize, q: usize) -> Self {
        Self::new(coefficient, vec![], vec![p], vec![q])
    }

    /// Hermitian conjugate: reversed operator strings, conjugated coefficient.
    pub fn adjoint(&self) -> Self {
        Self {
            coefficient: self.coefficient.conj(),
            number_set: self.number_set.clone(),
            create_set: self.annihilate_set.iter().rev().copied().collect(),
            annihilate_set: self.create_set.iter().rev().copied().collect(),
        }
    }

    /// Orbitals touched by creation or annihilation operators.
    pub fn ladder_mask(&self) -> u64 {
        self.create_set.iter().chain(&self.annihilate_set).fold(0, |m, &q| m | 1 << q)
    }

    pub fn validate(&self, size: usize) -> Result<()> {
        let mut seen = 0u64;
        for &q in self.number_set.iter().chain(&self.create_set).chain(&self.annihilate_set) {
            if q >= size || q >= 64 {
                return Err(Error::IndexOutOfRange { index: q, size });
            }
            if seen >> q & 1 == 1 {
                return Err(Error::OverlappingIndexSets(q));
            }
            seen |= 1 << q;
        }
        Ok(())
    }
}

/// Applies `term` to a basis configuration.
///
/// Annihilators act right to left, then creators right to left, then the
/// number factors are checked on the result.
pub fn apply_term(config: &OccupationConfig, term: &HamiltonianTerm) -> Result<Option<(OccupationConfig, Complex64)>> {
    term.validate(config.len())?;
    let mut cfg = *config;
    let mut sign = 1.0;
    for &q in term.annihilate_set.iter().rev() {
        match cfg.annihilate(q)? {
            Some((next, s)) => {
                cfg = next;
                sign *= s;
            }
            None => return Ok(None),
        }
    }
    for &q in term.create_set.iter().rev() {
        match cfg.create(q)? {
            Some((next, s)) => {
                cfg = next;
                sign *= s;
            }
            None => return Ok(None),
        }
    }
    if term.number_set.iter().any(|&q| !cfg.is_occupied(q)) {
        return Ok(None);
    }
    Ok(Some((cfg, term.coefficient * sign)))
}

pub(crate) fn check_dense_size(size: usize) -> Result<()> {
    if size > MAX_DENSE_ORBITALS {
        return Err(Error::DenseSizeGuard { got: size, max: MAX_DENSE_ORBITALS });
    }
    Ok(())
}

/// Dense matrix of the summed terms in the Fock basis ordered by bitstring value.
pub fn dense_operator(terms: &[HamiltonianTerm], size: usize) -> Result<DMatrix<Complex64>> {
    check_dense_size(size)?;
    let dim = 1usize << size;
    let mut m = DMatrix::zeros(dim, dim);
    for term in terms {
        term.validate(size)?;
        for col in 0..dim {
            let cfg = OccupationConfig { bits: col as u64, len: size };
            if let Some((out, amp)) = apply_term(&cfg, term)? {
                m[(out.index(), col)] += amp;
            }
        }
    }
    Ok(m)
}
