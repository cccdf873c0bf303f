//! One-body basis changes: Givens decomposition and Thouless-circuit compilation.
//!
//! A unitary `f` (rows are the new orbitals expanded in the old ones) is
//! reduced to a diagonal by adjacent-row rotations, sweeping the anti-diagonals
//! of the strictly lower triangle from the bottom-left corner upwards. The
//! recorded factors satisfy `f = F_1 F_2 ... F_K D`.
//!
//! Rotation conventions, checked by [`reconstruct`]:
//! * `Y(i, φ)` acts on rows `i, i+1` with `[[cos φ, sin φ], [-sin φ, cos φ]]`;
//! * `Z(j, φ)` multiplies row `j` by `e^{iφ}`.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::fock::OccupationConfig;

pub const UNITARY_TOL: f64 = 1e-10;
const SKIP_TOL: f64 = 1e-12;
const ZERO_ANGLE: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq)]
pub struct OneBodyMatrix {
    entries: DMatrix<Complex64>,
}

impl OneBodyMatrix {
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::DimensionMismatch { expected: entries.nrows(), got: entries.ncols() });
        }
        let dev = unitarity_deviation(&entries);
        if dev > UNITARY_TOL {
            return Err(Error::NotUnitary(dev));
        }
        Ok(Self { entries })
    }

    pub fn identity(size: usize) -> Self {
        Self { entries: DMatrix::identity(size, size) }
    }

    pub fn from_real(entries: &DMatrix<f64>) -> Result<Self> {
        Self::new(entries.map(|x| Complex64::new(x, 0.0)))
    }

    /// Block-diagonal embedding `diag(a, b)`.
    pub fn direct_sum(a: &Self, b: &Self) -> Self {
        let (n, m) = (a.size(), b.size());
        let mut entries = DMatrix::zeros(n + m, n + m);
        entries.view_mut((0, 0), (n, n)).copy_from(&a.entries);
        entries.view_mut((n, n), (m, m)).copy_from(&b.entries);
        Self { entries }
    }

    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }
}

fn unitarity_deviation(m: &DMatrix<Complex64>) -> f64 {
    let prod = m.adjoint() * m;
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let want = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((prod[(i, j)] - want).norm());
        }
    }
    dev
}

/// Haar-distributed unitary from the QR decomposition of a complex Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, size: usize) -> OneBodyMatrix {
    let g = DMatrix::from_fn(size, size, |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..size {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..size {
            q[(i, j)] *= phase;
        }
    }
    OneBodyMatrix { entries: q }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GivensStep {
    /// Rotation mixing rows `i` and `i + 1`.
    Y { i: usize, angle: f64 },
    /// Phase `e^{i angle}` on row `j`.
    Z { j: usize, angle: f64 },
}

impl GivensStep {
    fn apply_left(&self, m: &mut DMatrix<Complex64>) {
        match *self {
            GivensStep::Y { i, angle } => {
                let (c, s) = (angle.cos(), angle.sin());
                for col in 0..m.ncols() {
                    let (a, b) = (m[(i, col)], m[(i + 1, col)]);
                    m[(i, col)] = a * c + b * s;
                    m[(i + 1, col)] = -a * s + b * c;
                }
            }
            GivensStep::Z { j, angle } => {
                let p = Complex64::from_polar(1.0, angle);
                for col in 0..m.ncols() {
                    m[(j, col)] *= p;
                }
            }
        }
    }

    fn inverse(&self) -> Self {
        match *self {
            GivensStep::Y { i, angle } => GivensStep::Y { i, angle: -angle },
            GivensStep::Z { j, angle } => GivensStep::Z { j, angle: -angle },
        }
    }

    /// Dense matrix of the elementary rotation on `size` orbitals.
    pub fn matrix(&self, size: usize) -> DMatrix<Complex64> {
        let mut m = DMatrix::identity(size, size);
        self.apply_left(&mut m);
        m
    }
}

/// Factorization `f = steps[0] * steps[1] * ... * diag(e^{i residual})`.
#[derive(Debug, Clone, PartialEq)]
pub struct GivensSequence {
    pub size: usize,
    pub steps: Vec<GivensStep>,
    pub residual_phases: Vec<f64>,
}

impl GivensSequence {
    pub fn residual_diagonal(&self) -> Vec<Complex64> {
        self.residual_phases.iter().map(|&p| Complex64::from_polar(1.0, p)).collect()
    }
}

/// Matrix entry coordinates in the elimination order: anti-diagonals of the
/// strictly lower triangle, starting at the bottom-left corner.
fn elimination_order(size: usize) -> Vec<(usize, usize)> {
    let mut order = Vec::new();
    if size < 2 {
        return order;
    }
    // Entry (r, c) carries label (size - 1 - r) + 2c; equal labels commute.
    let max_label = 3 * (size - 2);
    for label in 0..=max_label {
        for c in 0..size - 1 {
            if 2 * c > label {
                break;
            }
            let from_bottom = label - 2 * c;
            if from_bottom >= size {
                continue;
            }
            let r = size - 1 - from_bottom;
            if r > c {
                order.push((r, c));
            }
        }
    }
    order
}

pub fn decompose(f: &OneBodyMatrix) -> Result<GivensSequence> {
    let dev = unitarity_deviation(&f.entries);
    if dev > UNITARY_TOL {
        return Err(Error::NotUnitary(dev));
    }
    let size = f.size();
    let mut work = f.entries.clone();
    let mut steps = Vec::new();
    for (row, col) in elimination_order(size) {
        let (i, j) = (row - 1, row);
        let a = work[(i, col)];
        let b = work[(j, col)];
        if b.norm() < SKIP_TOL {
            continue;
        }
        // Align the phase of b with a (mod π) so that a real rotation cancels it.
        let z_angle = if a.norm() < SKIP_TOL {
            -b.arg()
        } else {
            let mut t = -(b / a).arg();
            if t > FRAC_PI_2 {
                t -= std::f64::consts::PI;
            } else if t <= -FRAC_PI_2 {
                t += std::f64::consts::PI;
            }
            t
        };
        if z_angle.abs() > ZERO_ANGLE {
            let z = GivensStep::Z { j, angle: z_angle };
            z.apply_left(&mut work);
            steps.push(z.inverse());
        }
        let b = work[(j, col)];
        // b * conj(a) is real after alignment; -sin·a + cos·b = 0.
        let y_angle = if a.norm() < SKIP_TOL { FRAC_PI_2 } else { (b * a.conj()).re.atan2(a.norm_sqr()) };
        let y = GivensStep::Y { i, angle: y_angle };
        y.apply_left(&mut work);
        work[(j, col)] = Complex64::new(0.0, 0.0);
        steps.push(y.inverse());
    }
    let residual_phases = (0..size).map(|q| work[(q, q)].arg()).collect();
    Ok(GivensSequence { size, steps, residual_phases })
}

pub fn reconstruct(seq: &GivensSequence) -> OneBodyMatrix {
    // Build right to left: start from the residual diagonal, then left-multiply.
    let mut m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(seq.residual_diagonal()));
    for step in seq.steps.iter().rev() {
        step.apply_left(&mut m);
    }
    OneBodyMatrix { entries: m }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    X(usize),
    /// `exp(-i φ Z / 2)`.
    Rz(usize, f64),
    /// `exp(-i φ Y / 2)`.
    Ry(usize, f64),
    /// Controlled NOT (control, target).
    Cx(usize, usize),
}

impl Gate {
    pub fn qubits(&self) -> (usize, Option<usize>) {
        match *self {
            Gate::X(q) | Gate::Rz(q, _) | Gate::Ry(q, _) => (q, None),
            Gate::Cx(c, t) => (c, Some(t)),
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Gate::X(q) => write!(f, "X {q}"),
            Gate::Rz(q, phi) => write!(f, "RZ {q} {phi:.16e}"),
            Gate::Ry(q, phi) => write!(f, "RY {q} {phi:.16e}"),
            Gate::Cx(c, t) => write!(f, "CX {c} {t}"),
        }
    }
}

/// Gates in time order on `qubits` qubits.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GateSequence {
    pub qubits: usize,
    pub gates: Vec<Gate>,
}

impl GateSequence {
    pub fn new(qubits: usize) -> Self {
        Self { qubits, gates: Vec::new() }
    }

    /// `X` gates that fill the occupied orbitals of `config` from the vacuum.
    pub fn preparation(config: &OccupationConfig) -> Self {
        Self { qubits: config.len(), gates: config.occupied().into_iter().map(Gate::X).collect() }
    }

    pub fn then(mut self, other: &GateSequence) -> Self {
        self.gates.extend_from_slice(&other.gates);
        self
    }

    pub fn validate(&self) -> Result<()> {
        for g in &self.gates {
            let (a, b) = g.qubits();
            for q in std::iter::once(a).chain(b) {
                if q >= self.qubits {
                    return Err(Error::IndexOutOfRange { index: q, size: self.qubits });
                }
            }
            if let Gate::Cx(c, t) = g {
                if c == t {
                    return Err(Error::Invalid(format!("CX with control == target ({c})")));
                }
            }
        }
        Ok(())
    }

    pub fn two_qubit_count(&self) -> usize {
        self.gates.iter().filter(|g| matches!(g, Gate::Cx(..))).count()
    }

    /// Circuit depth with every gate occupying one layer on its qubits.
    pub fn depth(&self) -> usize {
        let mut layer = vec![0usize; self.qubits];
        for g in &self.gates {
            match g.qubits() {
                (q, None) => layer[q] += 1,
                (a, Some(b)) => {
                    let l = layer[a].max(layer[b]) + 1;
                    layer[a] = l;
                    layer[b] = l;
                }
            }
        }
        layer.into_iter().max().unwrap_or(0)
    }
}

impl fmt::Display for GateSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Q {}", self.qubits)?;
        for g in &self.gates {
            writeln!(f, "{g}")?;
        }
        Ok(())
    }
}

impl fmt::Display for GivensSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Q {}", self.size)?;
        for step in &self.steps {
            match step {
                GivensStep::Y { i, angle } => writeln!(f, "Y {i} {angle:.16e}")?,
                GivensStep::Z { j, angle } => writeln!(f, "Z {j} {angle:.16e}")?,
            }
        }
        for (q, phase) in self.residual_phases.iter().enumerate() {
            writeln!(f, "D {q} {phase:.16e}")?;
        }
        Ok(())
    }
}

fn parse_usize(tok: Option<&str>, line: &str) -> Result<usize> {
    tok.and_then(|t| t.parse().ok()).ok_or_else(|| Error::Parse(format!("bad index in {line:?}")))
}

fn parse_f64(tok: Option<&str>, line: &str) -> Result<f64> {
    tok.and_then(|t| t.parse().ok()).ok_or_else(|| Error::Parse(format!("bad angle in {line:?}")))
}

fn parse_header(lines: &mut std::str::Lines<'_>) -> Result<usize> {
    let line = lines.next().ok_or_else(|| Error::Parse("empty input".into()))?;
    let mut it = line.split_whitespace();
    if it.next() != Some("Q") {
        return Err(Error::Parse(format!("expected `Q <size>` header, got {line:?}")));
    }
    parse_usize(it.next(), line)
}

impl FromStr for GateSequence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s.lines();
        let qubits = parse_header(&mut lines)?;
        let mut gates = Vec::new();
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let mut it = line.split_whitespace();
            let gate = match it.next() {
                Some("X") => Gate::X(parse_usize(it.next(), line)?),
                Some("RZ") => Gate::Rz(parse_usize(it.next(), line)?, parse_f64(it.next(), line)?),
                Some("RY") => Gate::Ry(parse_usize(it.next(), line)?, parse_f64(it.next(), line)?),
                Some("CX") => Gate::Cx(parse_usize(it.next(), line)?, parse_usize(it.next(), line)?),
                _ => return Err(Error::Parse(format!("unknown gate line {line:?}"))),
            };
            gates.push(gate);
        }
        let seq = GateSequence { qubits, gates };
        seq.validate()?;
        Ok(seq)
    }
}

impl FromStr for GivensSequence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s.lines();
        let size = parse_header(&mut lines)?;
        let mut steps = Vec::new();
        let mut residual_phases = vec![0.0; size];
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let mut it = line.split_whitespace();
            let tag = it.next();
            let idx = parse_usize(it.next(), line)?;
            let angle = parse_f64(it.next(), line)?;
            let bound = if tag == Some("Y") { idx + 1 } else { idx };
            if bound >= size {
                return Err(Error::IndexOutOfRange { index: bound, size });
            }
            match tag {
                Some("Y") => steps.push(GivensStep::Y { i: idx, angle }),
                Some("Z") => steps.push(GivensStep::Z { j: idx, angle }),
                Some("D") => residual_phases[idx] = angle,
                _ => return Err(Error::Parse(format!("unknown step line {line:?}"))),
            }
        }
        Ok(GivensSequence { size, steps, residual_phases })
    }
}

/// A compiled Thouless circuit; the operator it implements equals
/// `e^{i global_phase}` times the gate product.
#[derive(Debug, Clone, PartialEq)]
pub struct ThoulessCircuit {
    pub gates: GateSequence,
    pub global_phase: f64,
}

/// `exp(-i φ/2 X_a Y_b)` as `RY_a(π/2) CX(a,b) RY_b(φ) CX(a,b) RY_a(-π/2)` (time order reversed).
fn push_xy(gates: &mut Vec<Gate>, a: usize, b: usize, phi: f64) {
    gates.extend([Gate::Ry(a, -FRAC_PI_2), Gate::Cx(a, b), Gate::Ry(b, phi), Gate::Cx(a, b), Gate::Ry(a, FRAC_PI_2)]);
}

/// Gates for `exp[-φ (c†_i c_{i+1} - c†_{i+1} c_i)]`, i.e. `R^{XY}(φ) R^{YX}(-φ)`.
pub fn hopping_rotation_gates(i: usize, phi: f64) -> Vec<Gate> {
    let mut gates = Vec::with_capacity(10);
    push_xy(&mut gates, i, i + 1, phi);
    // R^{YX}_{i,i+1}(-φ) = exp(+i φ/2 Y_i X_{i+1}) is the XY rotation with roles swapped.
    push_xy(&mut gates, i + 1, i, -phi);
    gates
}

/// Compiles the Thouless operator `U(f)` with `U c†_q U† = Σ_q' f_{qq'} c†_q'`.
///
/// `U(f)` acts on single-particle amplitudes through `fᵀ`, so the factors of
/// `f` are applied in listed order, each transposed, followed by the residual
/// phases.
pub fn compile_thouless(seq: &GivensSequence) -> ThoulessCircuit {
    let mut gates = Vec::new();
    let mut global_phase = 0.0;
    let mut rz = |gates: &mut Vec<Gate>, q: usize, angle: f64| {
        // RZ(φ) = e^{-iφ/2} e^{iφ n}.
        gates.push(Gate::Rz(q, angle));
        global_phase += angle / 2.0;
    };
    for step in &seq.steps {
        match *step {
            GivensStep::Z { j, angle } => rz(&mut gates, j, angle),
            GivensStep::Y { i, angle } => gates.extend(hopping_rotation_gates(i, angle)),
        }
    }
    for (q, &phase) in seq.residual_phases.iter().enumerate() {
        if phase.abs() > ZERO_ANGLE {
            rz(&mut gates, q, phase);
        }
    }
    ThoulessCircuit { gates: GateSequence { qubits: seq.size, gates }, global_phase }
}

/// Amplitudes of `U(f)|n>`: the determinant of the rows `occupied(n)` and
/// columns `occupied(m)` of `f` for every `m` with the same particle count.
pub fn slater_amplitudes(f: &OneBodyMatrix, n: &OccupationConfig) -> Result<Vec<(OccupationConfig, Complex64)>> {
    let size = f.size();
    if n.len() != size {
        return Err(Error::DimensionMismatch { expected: size, got: n.len() });
    }
    if size > 64 {
        return Err(Error::Invalid("at most 64 orbitals".into()));
    }
    let rows = n.occupied();
    let p = rows.len();
    let mut out = Vec::new();
    for bits in 0..1u64 << size {
        if bits.count_ones() as usize != p {
            continue;
        }
        let m = OccupationConfig::from_bits(bits, size)?;
        let cols = m.occupied();
        let sub = DMatrix::from_fn(p, p, |a, b| f.entries[(rows[a], cols[b])]);
        let amp = if p == 0 { Complex64::new(1.0, 0.0) } else { sub.determinant() };
        out.push((m, amp));
    }
    Ok(out)
}
