//! Cascaded-VQE estimation by classical replay of stored measurement records.
//!
//! Circuits run once per readout basis. The energy
//! `E(θ) = <G H G> / <G²>` is then evaluated for any Jastrow parameters by
//! reweighting each recorded outcome, so scanning `θ` never touches the
//! simulator again.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fock::{bitstring, parse_bitstring};
use crate::hubbard::ModelDescriptor;
use crate::onebody::GateSequence;
use crate::pauli::{measurement_basis, DressedTerm};
use crate::sim::{self, MeasurementBasis, StateVector};

const SYMMETRY_TOL: f64 = 1e-14;
/// `<G²>` below this cannot be told apart from the rounding residue (~ε² per
/// outcome) of exact probabilities for a state that `G` annihilates.
pub const NORM_FLOOR: f64 = 1e-28;

/// Symmetric Jastrow parameters `θ_qq'`.
///
/// `G(θ) = exp(-Σ_{q≤q'} θ_qq' n_q n_q')`: each unordered pair counts once and
/// a diagonal entry contributes `θ_qq n_q`. Entries may be `+∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct JastrowParams {
    theta: DMatrix<f64>,
    pairs: Vec<(usize, usize, f64)>,
}

impl JastrowParams {
    pub fn new(theta: DMatrix<f64>) -> Result<Self> {
        if !theta.is_square() {
            return Err(Error::DimensionMismatch { expected: theta.nrows(), got: theta.ncols() });
        }
        let n = theta.nrows();
        let mut dev: f64 = 0.0;
        for q in 0..n {
            for p in 0..q {
                let (a, b) = (theta[(q, p)], theta[(p, q)]);
                if a.is_nan() || b.is_nan() {
                    return Err(Error::Invalid("NaN Jastrow parameter".into()));
                }
                if a != b {
                    dev = dev.max((a - b).abs());
                }
            }
        }
        if dev > SYMMETRY_TOL || dev.is_nan() {
            return Err(Error::AsymmetricTheta(dev));
        }
        let mut pairs = Vec::new();
        for q in 0..n {
            for p in q..n {
                let t = theta[(q, p)];
                if t.is_nan() {
                    return Err(Error::Invalid("NaN Jastrow parameter".into()));
                }
                if t != 0.0 {
                    pairs.push((q, p, t));
                }
            }
        }
        Ok(Self { theta, pairs })
    }

    pub fn zeros(size: usize) -> Self {
        Self { theta: DMatrix::zeros(size, size), pairs: Vec::new() }
    }

    pub fn size(&self) -> usize {
        self.theta.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.theta
    }

    /// Non-zero entries of the upper triangle, diagonal included.
    pub fn pairs(&self) -> &[(usize, usize, f64)] {
        &self.pairs
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shots {
    /// Exact outcome probabilities (infinite-shot limit).
    Exact,
    Sampled(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Layout {
    /// One register holding every spin-orbital.
    Full,
    /// Independent spin-up and spin-down registers of half the size.
    SpinFactorized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sector {
    Full,
    Up,
    Down,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcomes {
    /// Observed counts keyed by basis index, sorted.
    Counts { shots: u64, counts: Vec<(u64, u64)> },
    /// Exact probabilities keyed by basis index, sorted.
    Exact(Vec<(u64, f64)>),
}

impl Outcomes {
    fn frequencies(&self) -> Vec<(u64, f64)> {
        match self {
            Outcomes::Counts { shots, counts } => counts.iter().map(|&(b, c)| (b, c as f64 / *shots as f64)).collect(),
            Outcomes::Exact(p) => p.clone(),
        }
    }

    pub fn shots(&self) -> Option<u64> {
        match self {
            Outcomes::Counts { shots, .. } => Some(*shots),
            Outcomes::Exact(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecordGroup {
    pub basis: MeasurementBasis,
    pub sector: Sector,
    pub seed: Option<u64>,
    pub outcomes: Outcomes,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecordHeader {
    /// Register width of the stored outcomes.
    pub qubits: usize,
    pub layout: Layout,
    pub exact: bool,
    pub seed: u64,
    pub shots: Option<u64>,
    pub circuit_hash: String,
    pub model: Option<ModelDescriptor>,
}

/// Immutable set of measurement records, sealed by a content hash.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecordSet {
    header: RecordHeader,
    groups: Vec<RecordGroup>,
    content_hash: String,
}

#[derive(Serialize, Deserialize)]
struct FileHeader {
    qubits: usize,
    layout: Layout,
    exact_probabilities: bool,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    shots: Option<u64>,
    circuit_hash: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    model: Option<ModelDescriptor>,
    content_hash: String,
}

#[derive(Serialize, Deserialize)]
struct FileGroup {
    basis: String,
    sector: Sector,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    shots: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    counts: Option<BTreeMap<String, u64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    probabilities: Option<BTreeMap<String, f64>>,
}

#[derive(Serialize, Deserialize)]
struct FileDoc {
    header: FileHeader,
    groups: Vec<FileGroup>,
}

impl MeasurementRecordSet {
    pub fn new(header: RecordHeader, groups: Vec<RecordGroup>) -> Result<Self> {
        for g in &groups {
            if g.basis.len() != header.qubits {
                return Err(Error::DimensionMismatch { expected: header.qubits, got: g.basis.len() });
            }
            if let Outcomes::Counts { shots, counts } = &g.outcomes {
                let total: u64 = counts.iter().map(|c| c.1).sum();
                if total != *shots {
                    return Err(Error::Invalid(format!("group {} counts sum to {total}, declared {shots}", g.basis)));
                }
            }
        }
        let mut set = Self { header, groups, content_hash: String::new() };
        set.content_hash = set.compute_hash()?;
        Ok(set)
    }

    pub fn header(&self) -> &RecordHeader {
        &self.header
    }

    pub fn groups(&self) -> &[RecordGroup] {
        &self.groups
    }

    pub fn content_hash(&self) -> &str {
        &self.content_hash
    }

    /// Copy with a model descriptor attached (and a fresh hash).
    pub fn with_model(self, model: ModelDescriptor) -> Result<Self> {
        let mut header = self.header;
        header.model = Some(model);
        Self::new(header, self.groups)
    }

    fn to_doc(&self, content_hash: &str) -> FileDoc {
        let n = self.header.qubits;
        let groups = self
            .groups
            .iter()
            .map(|g| {
                let (shots, counts, probabilities) = match &g.outcomes {
                    Outcomes::Counts { shots, counts } => {
                        (Some(*shots), Some(counts.iter().map(|&(b, c)| (bitstring(b, n), c)).collect()), None)
                    }
                    Outcomes::Exact(p) => (None, None, Some(p.iter().map(|&(b, x)| (bitstring(b, n), x)).collect())),
                };
                FileGroup { basis: g.basis.to_string(), sector: g.sector, seed: g.seed, shots, counts, probabilities }
            })
            .collect();
        let h = &self.header;
        FileDoc {
            header: FileHeader {
                qubits: h.qubits,
                layout: h.layout,
                exact_probabilities: h.exact,
                seed: h.seed,
                shots: h.shots,
                circuit_hash: h.circuit_hash.clone(),
                model: h.model.clone(),
                content_hash: content_hash.to_string(),
            },
            groups,
        }
    }

    fn compute_hash(&self) -> Result<String> {
        let bytes = serde_json::to_vec(&self.to_doc(""))?;
        Ok(hex::encode(Sha256::digest(&bytes)))
    }

    /// Recomputes the content hash and compares it with the sealed one.
    pub fn verify(&self) -> Result<()> {
        let actual = self.compute_hash()?;
        if actual != self.content_hash {
            return Err(Error::HashMismatch { expected: self.content_hash.clone(), actual });
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_doc(&self.content_hash))? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: FileDoc = serde_json::from_str(text)?;
        let n = doc.header.qubits;
        let mut groups = Vec::with_capacity(doc.groups.len());
        for g in doc.groups {
            let basis: MeasurementBasis = g.basis.parse()?;
            let outcomes = match (g.counts, g.probabilities) {
                (Some(counts), None) => {
                    let shots = g.shots.ok_or_else(|| Error::Parse(format!("group {basis} lacks shots")))?;
                    let mut v = counts
                        .into_iter()
                        .map(|(s, c)| Ok((parse_bitstring(&s, n)?, c)))
                        .collect::<Result<Vec<_>>>()?;
                    v.sort_unstable();
                    Outcomes::Counts { shots, counts: v }
                }
                (None, Some(probs)) => {
                    let mut v =
                        probs.into_iter().map(|(s, p)| Ok((parse_bitstring(&s, n)?, p))).collect::<Result<Vec<_>>>()?;
                    v.sort_unstable_by_key(|e| e.0);
                    Outcomes::Exact(v)
                }
                _ => return Err(Error::Parse(format!("group {basis} needs exactly one of counts/probabilities"))),
            };
            groups.push(RecordGroup { basis, sector: g.sector, seed: g.seed, outcomes });
        }
        let h = doc.header;
        let header = RecordHeader {
            qubits: n,
            layout: h.layout,
            exact: h.exact_probabilities,
            seed: h.seed,
            shots: h.shots,
            circuit_hash: h.circuit_hash,
            model: h.model,
        };
        let set = Self { header, groups, content_hash: h.content_hash };
        set.verify()?;
        Ok(set)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

pub fn circuit_hash(circuits: &[&GateSequence]) -> String {
    let mut h = Sha256::new();
    for c in circuits {
        h.update(c.to_string().as_bytes());
    }
    hex::encode(h.finalize())
}

/// Distinct readout bases needed by `terms` (plus all-Z), all-Z first.
pub fn basis_groups(terms: &[DressedTerm], qubits: usize) -> Vec<MeasurementBasis> {
    let all_z = MeasurementBasis::all_z(qubits);
    let rest: BTreeSet<MeasurementBasis> = terms.iter().map(measurement_basis).filter(|b| *b != all_z).collect();
    std::iter::once(all_z).chain(rest).collect()
}

fn measure(state: &StateVector, basis: &MeasurementBasis, shots: Shots, seed: u64) -> Result<Outcomes> {
    Ok(match shots {
        Shots::Exact => Outcomes::Exact(sim::exact_distribution(state, basis)?.into_iter().collect()),
        Shots::Sampled(n) => {
            let rotated = sim::rotate_to_basis(state, basis)?;
            Outcomes::Counts { shots: n, counts: sim::sample(&rotated, n, seed)?.into_iter().collect() }
        }
    })
}

fn check_terms(terms: &[DressedTerm], qubits: usize) -> Result<()> {
    for t in terms {
        if t.qubits() != qubits {
            return Err(Error::DimensionMismatch { expected: qubits, got: t.qubits() });
        }
    }
    Ok(())
}

/// Runs `state_prep` from the vacuum and records one outcome group per readout basis.
///
/// Group `i` is sampled with seed `seed + i`.
pub fn collect_records(
    state_prep: &GateSequence,
    terms: &[DressedTerm],
    shots: Shots,
    seed: u64,
) -> Result<MeasurementRecordSet> {
    let qubits = state_prep.qubits;
    check_terms(terms, qubits)?;
    let state = sim::apply(&sim::vacuum(qubits), state_prep)?;
    let bases = basis_groups(terms, qubits);
    let groups = bases
        .into_par_iter()
        .enumerate()
        .map(|(i, basis)| {
            let group_seed = seed.wrapping_add(i as u64);
            let outcomes = measure(&state, &basis, shots, group_seed)?;
            let seed = matches!(shots, Shots::Sampled(_)).then_some(group_seed);
            Ok(RecordGroup { basis, sector: Sector::Full, seed, outcomes })
        })
        .collect::<Result<Vec<_>>>()?;
    let header = RecordHeader {
        qubits,
        layout: Layout::Full,
        exact: shots == Shots::Exact,
        seed,
        shots: match shots {
            Shots::Exact => None,
            Shots::Sampled(n) => Some(n),
        },
        circuit_hash: circuit_hash(&[state_prep]),
        model: None,
    };
    MeasurementRecordSet::new(header, groups)
}

/// Records for a product of spin-up and spin-down determinants on separate
/// half-width registers.
///
/// The spin-up register is read out with `shots`; the spin-down outcomes are
/// always the exact single-sector distribution. `terms` act on the full
/// `2n`-orbital space with the spin-up block first.
pub fn collect_spin_factorized(
    up_prep: &GateSequence,
    down_prep: &GateSequence,
    terms: &[DressedTerm],
    shots: Shots,
    seed: u64,
) -> Result<MeasurementRecordSet> {
    let n = up_prep.qubits;
    if down_prep.qubits != n {
        return Err(Error::DimensionMismatch { expected: n, got: down_prep.qubits });
    }
    check_terms(terms, 2 * n)?;
    let up_state = sim::apply(&sim::vacuum(n), up_prep)?;
    let down_state = sim::apply(&sim::vacuum(n), down_prep)?;
    let mut up_bases = BTreeSet::new();
    let mut down_bases = BTreeSet::new();
    for b in basis_groups(terms, 2 * n) {
        let (u, d) = b.split_half();
        up_bases.insert(u);
        down_bases.insert(d);
    }
    let order = |set: BTreeSet<MeasurementBasis>| {
        let z = MeasurementBasis::all_z(n);
        std::iter::once(z.clone()).chain(set.into_iter().filter(move |b| *b != z)).collect::<Vec<_>>()
    };
    let mut groups = Vec::new();
    for (i, basis) in order(up_bases).into_iter().enumerate() {
        let group_seed = seed.wrapping_add(i as u64);
        let outcomes = measure(&up_state, &basis, shots, group_seed)?;
        let seed = matches!(shots, Shots::Sampled(_)).then_some(group_seed);
        groups.push(RecordGroup { basis, sector: Sector::Up, seed, outcomes });
    }
    for basis in order(down_bases) {
        let outcomes = measure(&down_state, &basis, Shots::Exact, 0)?;
        groups.push(RecordGroup { basis, sector: Sector::Down, seed: None, outcomes });
    }
    let header = RecordHeader {
        qubits: n,
        layout: Layout::SpinFactorized,
        exact: shots == Shots::Exact,
        seed,
        shots: match shots {
            Shots::Exact => None,
            Shots::Sampled(k) => Some(k),
        },
        circuit_hash: circuit_hash(&[up_prep, down_prep]),
        model: None,
    };
    MeasurementRecordSet::new(header, groups)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyEstimate {
    /// `<G H G>`.
    pub numerator: f64,
    /// `<G²>`.
    pub denominator: f64,
    pub energy: f64,
    /// First-order shot-noise error of `energy`; zero for exact records.
    pub stderr: f64,
    pub theta: JastrowParams,
}

/// Per-outcome statistic of one sampled group.
struct GroupAccumulator {
    outcomes: Vec<(u64, f64)>,
    shots: Option<u64>,
    numerator: Vec<f64>,
    denominator: Vec<f64>,
}

impl GroupAccumulator {
    fn new(group: &RecordGroup) -> Self {
        let outcomes = group.outcomes.frequencies();
        let len = outcomes.len();
        Self { outcomes, shots: group.outcomes.shots(), numerator: vec![0.0; len], denominator: vec![0.0; len] }
    }

    fn mean(&self, values: &[f64]) -> f64 {
        self.outcomes.iter().zip(values).map(|(&(_, p), v)| p * v).sum()
    }

    /// Covariance of the group means of `a` and `b`.
    fn covariance(&self, a: &[f64], b: &[f64]) -> f64 {
        let Some(n) = self.shots else { return 0.0 };
        if n < 2 {
            return 0.0;
        }
        let (ma, mb) = (self.mean(a), self.mean(b));
        let n = n as f64;
        let s: f64 = self.outcomes.iter().zip(a.iter().zip(b)).map(|(&(_, p), (x, y))| p * (x - ma) * (y - mb)).sum();
        // p·n are the counts; unbiased sample covariance divided by n.
        s * n / (n - 1.0) / n
    }
}

struct Lookup {
    full: HashMap<MeasurementBasis, usize>,
    up: HashMap<MeasurementBasis, usize>,
    down: HashMap<MeasurementBasis, usize>,
}

impl Lookup {
    fn new(records: &MeasurementRecordSet) -> Self {
        let mut l = Lookup { full: HashMap::new(), up: HashMap::new(), down: HashMap::new() };
        for (i, g) in records.groups.iter().enumerate() {
            let map = match g.sector {
                Sector::Full => &mut l.full,
                Sector::Up => &mut l.up,
                Sector::Down => &mut l.down,
            };
            map.entry(g.basis.clone()).or_insert(i);
        }
        l
    }

    fn get(map: &HashMap<MeasurementBasis, usize>, basis: &MeasurementBasis, label: &str) -> Result<usize> {
        map.get(basis).copied().ok_or_else(|| Error::MissingBasisGroup(format!("{label}{basis}")))
    }
}

/// `E(θ)` replayed from records. Verifies the record hash first.
pub fn evaluate(
    records: &MeasurementRecordSet,
    terms: &[DressedTerm],
    theta: &JastrowParams,
) -> Result<EnergyEstimate> {
    records.verify()?;
    evaluate_verified(records, &Lookup::new(records), terms, theta)
}

fn evaluate_verified(
    records: &MeasurementRecordSet,
    lookup: &Lookup,
    terms: &[DressedTerm],
    theta: &JastrowParams,
) -> Result<EnergyEstimate> {
    let width = records.header.qubits;
    let qubits = match records.header.layout {
        Layout::Full => width,
        Layout::SpinFactorized => 2 * width,
    };
    check_terms(terms, qubits)?;
    if theta.size() != qubits {
        return Err(Error::DimensionMismatch { expected: qubits, got: theta.size() });
    }
    let mut acc: Vec<GroupAccumulator> = records.groups.iter().map(GroupAccumulator::new).collect();
    let norm = DressedTerm::identity(qubits, 1.0);
    let contributions = terms.iter().map(|t| (t, false)).chain(std::iter::once((&norm, true)));

    let mut norm_group = None;
    for (term, is_norm) in contributions {
        let basis = measurement_basis(term);
        let value = |bits: u64| (term.coefficient * term.sign(bits) * term.weight(bits, theta)).re;
        let target = match records.header.layout {
            Layout::Full => {
                let g = Lookup::get(&lookup.full, &basis, "")?;
                let a = &mut acc[g];
                for k in 0..a.outcomes.len() {
                    let v = value(a.outcomes[k].0);
                    if is_norm {
                        a.denominator[k] += v;
                    } else {
                        a.numerator[k] += v;
                    }
                }
                g
            }
            Layout::SpinFactorized => {
                let (ub, db) = basis.split_half();
                let gu = Lookup::get(&lookup.up, &ub, "up:")?;
                let gd = Lookup::get(&lookup.down, &db, "down:")?;
                // Marginalize the spin-down register for every spin-up outcome.
                let down = acc[gd].outcomes.clone();
                let a = &mut acc[gu];
                for k in 0..a.outcomes.len() {
                    let up_bits = a.outcomes[k].0;
                    let v: f64 = down.iter().map(|&(db, p)| p * value(up_bits | db << width)).sum();
                    if is_norm {
                        a.denominator[k] += v;
                    } else {
                        a.numerator[k] += v;
                    }
                }
                gu
            }
        };
        if is_norm {
            norm_group = Some(target);
        }
    }
    let norm_group = norm_group.expect("normalization term is always present");

    let mut numerator = 0.0;
    let mut var_num = 0.0;
    for a in &acc {
        numerator += a.mean(&a.numerator);
        var_num += a.covariance(&a.numerator, &a.numerator);
    }
    let d = &acc[norm_group];
    let denominator = d.mean(&d.denominator);
    let var_den = d.covariance(&d.denominator, &d.denominator);
    let cov = d.covariance(&d.numerator, &d.denominator);
    if denominator.is_nan() || denominator <= NORM_FLOOR {
        return Err(Error::Invalid(format!("normalization <G²> = {denominator:e} vanishes")));
    }
    let energy = numerator / denominator;
    let var = (var_num - 2.0 * energy * cov + energy * energy * var_den) / (denominator * denominator);
    Ok(EnergyEstimate { numerator, denominator, energy, stderr: var.max(0.0).sqrt(), theta: theta.clone() })
}

#[derive(Debug, Clone)]
pub struct ThetaScan {
    pub estimates: Vec<EnergyEstimate>,
    pub argmin: usize,
}

impl ThetaScan {
    pub fn best(&self) -> &EnergyEstimate {
        &self.estimates[self.argmin]
    }
}

/// Evaluates every grid point, in grid order.
pub fn scan_theta(records: &MeasurementRecordSet, terms: &[DressedTerm], grid: &[JastrowParams]) -> Result<ThetaScan> {
    if grid.is_empty() {
        return Err(Error::Invalid("empty θ grid".into()));
    }
    records.verify()?;
    let lookup = Lookup::new(records);
    let estimates =
        grid.par_iter().map(|theta| evaluate_verified(records, &lookup, terms, theta)).collect::<Result<Vec<_>>>()?;
    let argmin = estimates
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.energy.total_cmp(&b.1.energy))
        .map(|(i, _)| i)
        .expect("non-empty");
    Ok(ThetaScan { estimates, argmin })
}

/// Outcome of a one-dimensional minimization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarMinimum {
    pub x: f64,
    pub value: f64,
    /// The minimum sits on the upper bracket edge; the true optimum may lie beyond.
    pub at_upper_edge: bool,
}

const COARSE_INTERVALS: usize = 64;
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Grid scan followed by golden-section refinement around the best grid point.
///
/// For a unimodal function the result is within `tol` of the minimizer;
/// otherwise it refines the best of the coarse grid points.
pub fn minimize_scalar(mut f: impl FnMut(f64) -> Result<f64>, bracket: (f64, f64), tol: f64) -> Result<ScalarMinimum> {
    let (a, b) = bracket;
    if !(a.is_finite() && b.is_finite() && a < b) || tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidBracket(a, b));
    }
    let step = (b - a) / COARSE_INTERVALS as f64;
    let mut best = (a, f(a)?);
    let mut best_i = 0;
    for i in 1..=COARSE_INTERVALS {
        let x = if i == COARSE_INTERVALS { b } else { a + step * i as f64 };
        let v = f(x)?;
        if v < best.1 {
            best = (x, v);
            best_i = i;
        }
    }
    let mut lo = if best_i == 0 { a } else { a + step * (best_i - 1) as f64 };
    let mut hi = if best_i == COARSE_INTERVALS { b } else { a + step * (best_i + 1) as f64 };
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2)?;
        }
    }
    for (x, v) in [(x1, f1), (x2, f2), (lo, f(lo)?), (hi, f(hi)?)] {
        if v < best.1 {
            best = (x, v);
        }
    }
    Ok(ScalarMinimum { x: best.0, value: best.1, at_upper_edge: (b - best.0) <= tol })
}

#[derive(Debug, Clone)]
pub struct ThetaOptimum {
    pub theta: f64,
    pub estimate: EnergyEstimate,
    pub at_upper_edge: bool,
}

/// Minimizes the replayed `E` along a one-parameter family of Jastrow factors.
pub fn minimize_theta(
    records: &MeasurementRecordSet,
    terms: &[DressedTerm],
    family: impl Fn(f64) -> JastrowParams,
    bracket: (f64, f64),
    tol: f64,
) -> Result<ThetaOptimum> {
    records.verify()?;
    let lookup = Lookup::new(records);
    let min = minimize_scalar(|x| Ok(evaluate_verified(records, &lookup, terms, &family(x))?.energy), bracket, tol)?;
    let estimate = evaluate_verified(records, &lookup, terms, &family(min.x))?;
    Ok(ThetaOptimum { theta: min.x, estimate, at_upper_edge: min.at_upper_edge })
}
