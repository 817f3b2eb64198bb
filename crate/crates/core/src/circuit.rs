//! CNOT-only syndrome-extraction circuits: instructions, ASAP layering, the
//! dual-basis transform, validation and the line-oriented text format.
//!
//! Text format:
//!
//! ```text
//! register data=7 ancilla=3 flag=1 basis=Z
//! RZ a0
//! CX d1 a0
//! ---
//! MZ a0 -> b0
//! map
//! 110
//! ```
//!
//! Data qubits are written 1-based (`d1`..`d7`); ancillas, flags and output
//! slots are 0-based. `---` separates explicit layers; without any separator
//! the body is scheduled ASAP. The optional `map` section lists the rows of
//! the raw-bit → syndrome transform (solved automatically when absent).

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::code::{solve_to_standard, CheckMatrix, CodeError, SyndromeMapSpec};
use crate::pauli::{Pauli, PauliOperator, QubitRegister, Role};
use crate::stabilizer::StabilizerGroup;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CircuitError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("instruction `{0}` touches a qubit outside the register")]
    OutOfRange(String),
    #[error("CNOT with identical control and target on qubit {0}")]
    SelfLoop(usize),
    #[error("layer {layer}: qubit {qubit} is used twice")]
    LayerConflict { layer: usize, qubit: usize },
    #[error("data qubit {0} may not be reset or measured")]
    DataTouched(usize),
    #[error("CNOT `{0}` has the wrong orientation for a {1} circuit")]
    Orientation(String, Basis),
    #[error("qubit {0} is used before it is reset")]
    UseBeforeReset(usize),
    #[error("qubit {0} is used after its measurement")]
    UseAfterMeasure(usize),
    #[error("qubit {0} is reset more than once")]
    ResetTwice(usize),
    #[error("qubit {0} is reset but never measured")]
    NotMeasured(usize),
    #[error("qubit {0} is reset and measured in different bases")]
    BasisMismatch(usize),
    #[error("output slot {0} is written {1} times")]
    SlotCount(Slot, usize),
    #[error("outcome of slot {0} is not deterministic on code states")]
    Nondeterministic(Slot),
    #[error("circuit has {0} syndrome bits, need 3")]
    BitCount(usize),
    #[error(transparent)]
    Map(#[from] CodeError),
}

/// Which stabilizer type a circuit measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Basis {
    Z,
    X,
}

impl Basis {
    pub fn dual(self) -> Basis {
        match self {
            Basis::Z => Basis::X,
            Basis::X => Basis::Z,
        }
    }

    /// The data-error type whose syndrome this basis reveals.
    pub fn detects(self) -> Pauli {
        match self {
            Basis::Z => Pauli::X,
            Basis::X => Pauli::Z,
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Basis::Z => "Z",
            Basis::X => "X",
        })
    }
}

impl FromStr for Basis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "Z" | "z" => Ok(Basis::Z),
            "X" | "x" => Ok(Basis::X),
            other => Err(format!("unknown basis `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    Bit(usize),
    Flag(usize),
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slot::Bit(i) => write!(f, "b{i}"),
            Slot::Flag(i) => write!(f, "flag{i}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Instruction {
    ResetZ(usize),
    ResetX(usize),
    Cnot { control: usize, target: usize },
    MeasureZ(usize, Slot),
    MeasureX(usize, Slot),
}

impl Instruction {
    pub fn cnot(control: usize, target: usize) -> Self {
        Instruction::Cnot { control, target }
    }

    pub fn qubits(&self) -> impl Iterator<Item = usize> {
        let (a, b) = match *self {
            Instruction::ResetZ(q)
            | Instruction::ResetX(q)
            | Instruction::MeasureZ(q, _)
            | Instruction::MeasureX(q, _) => (q, None),
            Instruction::Cnot { control, target } => (control, Some(target)),
        };
        std::iter::once(a).chain(b)
    }

    pub fn dual(&self) -> Self {
        match *self {
            Instruction::ResetZ(q) => Instruction::ResetX(q),
            Instruction::ResetX(q) => Instruction::ResetZ(q),
            Instruction::MeasureZ(q, s) => Instruction::MeasureX(q, s),
            Instruction::MeasureX(q, s) => Instruction::MeasureZ(q, s),
            Instruction::Cnot { control, target } => Instruction::Cnot {
                control: target,
                target: control,
            },
        }
    }

    pub fn is_cnot(&self) -> bool {
        matches!(self, Instruction::Cnot { .. })
    }

    fn describe(&self, reg: &QubitRegister) -> String {
        let n = |q| qubit_name(reg, q);
        match *self {
            Instruction::ResetZ(q) => format!("RZ {}", n(q)),
            Instruction::ResetX(q) => format!("RX {}", n(q)),
            Instruction::Cnot { control, target } => format!("CX {} {}", n(control), n(target)),
            Instruction::MeasureZ(q, s) => format!("MZ {} -> {s}", n(q)),
            Instruction::MeasureX(q, s) => format!("MX {} -> {s}", n(q)),
        }
    }
}

pub fn qubit_name(reg: &QubitRegister, q: usize) -> String {
    match reg.role(q) {
        Some(Role::Data) => format!("d{}", q + 1),
        Some(Role::Ancilla) => format!("a{}", reg.local_index(q)),
        Some(Role::Flag) => format!("f{}", reg.local_index(q)),
        None => format!("q{q}"),
    }
}

/// Conjugates a Pauli frame through a CNOT (self-inverse, so the same map
/// serves forward propagation and Heisenberg back-propagation).
#[inline]
pub fn conjugate_cnot(p: &mut PauliOperator, control: usize, target: usize) {
    let (mut x, mut z) = (p.x_bits(), p.z_bits());
    x ^= ((x >> control) & 1) << target;
    z ^= ((z >> target) & 1) << control;
    *p = PauliOperator::from_masks(p.num_qubits(), x, z);
}

/// Greedy ASAP layering that preserves the per-qubit instruction order.
pub fn schedule(instrs: &[Instruction]) -> Vec<Vec<Instruction>> {
    let mut ready: Vec<usize> = Vec::new();
    let mut layers: Vec<Vec<Instruction>> = Vec::new();
    for ins in instrs {
        let qs: Vec<usize> = ins.qubits().collect();
        let need = qs.iter().copied().max().unwrap_or(0) + 1;
        if ready.len() < need {
            ready.resize(need, 0);
        }
        let layer = qs.iter().map(|&q| ready[q]).max().unwrap_or(0);
        if layers.len() <= layer {
            layers.resize_with(layer + 1, Vec::new);
        }
        layers[layer].push(*ins);
        for q in qs {
            ready[q] = layer + 1;
        }
    }
    layers
}

/// A point between instructions: just before or just after layer `layer`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TimePoint {
    pub layer: usize,
    pub after: bool,
}

impl TimePoint {
    pub fn before(layer: usize) -> Self {
        Self { layer, after: false }
    }

    pub fn after(layer: usize) -> Self {
        Self { layer, after: true }
    }

    fn ordinal(self) -> usize {
        2 * self.layer + self.after as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    pub register: QubitRegister,
    pub basis: Basis,
    pub layers: Vec<Vec<Instruction>>,
    pub syndrome_map: SyndromeMapSpec,
}

impl Circuit {
    /// Validates an explicitly layered circuit. `to_standard` is solved from
    /// the measured parities when not given.
    pub fn new(
        register: QubitRegister,
        basis: Basis,
        layers: Vec<Vec<Instruction>>,
        to_standard: Option<CheckMatrix>,
    ) -> Result<Self, CircuitError> {
        validate_structure(&register, basis, &layers)?;
        let measured = measured_matrix(&register, &layers)?;
        let syndrome_map = match to_standard {
            Some(t) => SyndromeMapSpec::new(measured, t)?,
            None => solve_to_standard(&measured)?,
        };
        Ok(Self {
            register,
            basis,
            layers,
            syndrome_map,
        })
    }

    /// Schedules an instruction list ASAP and validates it.
    pub fn from_instructions(
        register: QubitRegister,
        basis: Basis,
        instrs: &[Instruction],
        to_standard: Option<CheckMatrix>,
    ) -> Result<Self, CircuitError> {
        let n = register.len();
        if let Some(bad) = instrs.iter().find(|i| i.qubits().any(|q| q >= n)) {
            return Err(CircuitError::OutOfRange(format!("{bad:?}")));
        }
        Self::new(register, basis, schedule(instrs), to_standard)
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn instructions(&self) -> impl Iterator<Item = &Instruction> {
        self.layers.iter().flatten()
    }

    pub fn cnot_count(&self) -> usize {
        self.instructions().filter(|i| i.is_cnot()).count()
    }

    pub fn n_bits(&self) -> usize {
        self.syndrome_map.measured.n_rows()
    }

    pub fn n_flags(&self) -> usize {
        self.instructions()
            .filter(|i| {
                matches!(
                    i,
                    Instruction::MeasureZ(_, Slot::Flag(_)) | Instruction::MeasureX(_, Slot::Flag(_))
                )
            })
            .count()
    }

    /// Same circuit in the conjugate basis: resets and measurements swap
    /// basis and every CNOT is reversed.
    pub fn dualize(&self) -> Circuit {
        Circuit {
            register: self.register,
            basis: self.basis.dual(),
            layers: self
                .layers
                .iter()
                .map(|l| l.iter().map(Instruction::dual).collect())
                .collect(),
            syndrome_map: self.syndrome_map.clone(),
        }
    }

    /// Heisenberg-propagates `obs`, defined at `from`, back to the earlier
    /// point `to` through the intervening CNOTs.
    pub fn backprop(&self, obs: PauliOperator, from: TimePoint, to: TimePoint) -> PauliOperator {
        let mut p = obs;
        let (lo, hi) = (to.ordinal(), from.ordinal());
        for (l, layer) in self.layers.iter().enumerate().rev() {
            // the layer's gates sit between before(l) and after(l)
            if 2 * l < lo || 2 * l + 1 > hi {
                continue;
            }
            for ins in layer {
                if let Instruction::Cnot { control, target } = *ins {
                    conjugate_cnot(&mut p, control, target);
                }
            }
        }
        p
    }

    /// Every measurement with its layer, in layer order.
    pub fn measurements(&self) -> Vec<(usize, usize, Basis, Slot)> {
        let mut out = Vec::new();
        for (l, layer) in self.layers.iter().enumerate() {
            for ins in layer {
                match *ins {
                    Instruction::MeasureZ(q, s) => out.push((l, q, Basis::Z, s)),
                    Instruction::MeasureX(q, s) => out.push((l, q, Basis::X, s)),
                    _ => {}
                }
            }
        }
        out
    }

    /// Qubits that are live but untouched in each layer: data qubits always,
    /// ancillas and flags between their reset and measurement.
    pub fn idle_qubits(&self, layer: usize) -> Vec<usize> {
        let mut live = self.register.data_mask();
        for (l, ls) in self.layers.iter().enumerate() {
            for ins in ls {
                match *ins {
                    Instruction::ResetZ(q) | Instruction::ResetX(q) if l < layer => live |= 1 << q,
                    Instruction::MeasureZ(q, _) | Instruction::MeasureX(q, _) if l < layer => live &= !(1 << q),
                    _ => {}
                }
            }
        }
        let busy = self.layers[layer]
            .iter()
            .flat_map(|i| i.qubits())
            .fold(0u64, |m, q| m | 1 << q);
        (0..self.register.len())
            .filter(|q| (live & !busy) >> q & 1 == 1)
            .collect()
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }

    pub fn parse(text: &str) -> Result<Self, CircuitError> {
        text.parse()
    }
}

fn validate_structure(reg: &QubitRegister, basis: Basis, layers: &[Vec<Instruction>]) -> Result<(), CircuitError> {
    #[derive(Clone, Copy, PartialEq)]
    enum St {
        Fresh,
        Live(Basis),
        Done,
    }
    let n = reg.len();
    let mut state = vec![St::Fresh; n];
    let mut bits: Vec<usize> = Vec::new();
    let mut flags: Vec<usize> = Vec::new();
    for (l, layer) in layers.iter().enumerate() {
        let mut used = 0u64;
        for ins in layer {
            for q in ins.qubits() {
                if q >= n {
                    return Err(CircuitError::OutOfRange(format!("{ins:?}")));
                }
                if used >> q & 1 == 1 {
                    return Err(CircuitError::LayerConflict { layer: l, qubit: q });
                }
                used |= 1 << q;
            }
            let is_data = |q: usize| reg.role(q) == Some(Role::Data);
            match *ins {
                Instruction::ResetZ(q) | Instruction::ResetX(q) => {
                    if is_data(q) {
                        return Err(CircuitError::DataTouched(q));
                    }
                    if state[q] != St::Fresh {
                        return Err(CircuitError::ResetTwice(q));
                    }
                    let b = if matches!(ins, Instruction::ResetZ(_)) {
                        Basis::Z
                    } else {
                        Basis::X
                    };
                    state[q] = St::Live(b);
                }
                Instruction::MeasureZ(q, s) | Instruction::MeasureX(q, s) => {
                    if is_data(q) {
                        return Err(CircuitError::DataTouched(q));
                    }
                    let b = if matches!(ins, Instruction::MeasureZ(..)) {
                        Basis::Z
                    } else {
                        Basis::X
                    };
                    match state[q] {
                        St::Fresh => return Err(CircuitError::UseBeforeReset(q)),
                        St::Done => return Err(CircuitError::UseAfterMeasure(q)),
                        St::Live(rb) if rb != b => return Err(CircuitError::BasisMismatch(q)),
                        St::Live(_) => {}
                    }
                    state[q] = St::Done;
                    let (v, i) = match s {
                        Slot::Bit(i) => (&mut bits, i),
                        Slot::Flag(i) => (&mut flags, i),
                    };
                    if v.len() <= i {
                        v.resize(i + 1, 0);
                    }
                    v[i] += 1;
                }
                Instruction::Cnot { control, target } => {
                    if control == target {
                        return Err(CircuitError::SelfLoop(control));
                    }
                    let bad = match basis {
                        Basis::Z => is_data(target),
                        Basis::X => is_data(control),
                    };
                    if bad {
                        return Err(CircuitError::Orientation(ins.describe(reg), basis));
                    }
                    for q in [control, target] {
                        match state[q] {
                            St::Fresh if !is_data(q) => return Err(CircuitError::UseBeforeReset(q)),
                            St::Done => return Err(CircuitError::UseAfterMeasure(q)),
                            _ => {}
                        }
                    }
                }
            }
        }
    }
    for (q, st) in state.iter().enumerate() {
        if matches!(st, St::Live(_)) {
            return Err(CircuitError::NotMeasured(q));
        }
    }
    for (i, &c) in bits.iter().enumerate() {
        if c != 1 {
            return Err(CircuitError::SlotCount(Slot::Bit(i), c));
        }
    }
    for (i, &c) in flags.iter().enumerate() {
        if c != 1 {
            return Err(CircuitError::SlotCount(Slot::Flag(i), c));
        }
    }
    if bits.len() != 3 {
        return Err(CircuitError::BitCount(bits.len()));
    }
    Ok(())
}

/// Back-propagates each measured observable to the start of the circuit,
/// checking it is fixed by the reset states and the code, and returns the
/// data parity measured by each syndrome bit.
fn measured_matrix(reg: &QubitRegister, layers: &[Vec<Instruction>]) -> Result<CheckMatrix, CircuitError> {
    let n = reg.len();
    let stab = StabilizerGroup::steane();
    let mut rows = [0u64; 3];
    for (m, layer) in layers.iter().enumerate() {
        for ins in layer {
            let (q, slot, basis) = match *ins {
                Instruction::MeasureZ(q, s) => (q, s, Basis::Z),
                Instruction::MeasureX(q, s) => (q, s, Basis::X),
                _ => continue,
            };
            let mut obs = match basis {
                Basis::Z => PauliOperator::from_masks(n, 0, 1 << q),
                Basis::X => PauliOperator::from_masks(n, 1 << q, 0),
            };
            for earlier in layers[..m].iter().rev() {
                for ins in earlier {
                    match *ins {
                        Instruction::Cnot { control, target } => conjugate_cnot(&mut obs, control, target),
                        Instruction::ResetZ(r) | Instruction::ResetX(r) => {
                            let wrong = match ins {
                                Instruction::ResetZ(_) => obs.x_bits() >> r & 1,
                                _ => obs.z_bits() >> r & 1,
                            };
                            if wrong == 1 {
                                return Err(CircuitError::Nondeterministic(slot));
                            }
                            let keep = !(1u64 << r);
                            obs = PauliOperator::from_masks(n, obs.x_bits() & keep, obs.z_bits() & keep);
                        }
                        _ => {}
                    }
                }
            }
            if obs.support() & !reg.data_mask() != 0 {
                return Err(CircuitError::Nondeterministic(slot));
            }
            let data = obs.truncate(reg.n_data);
            if !stab.contains(&data) {
                return Err(CircuitError::Nondeterministic(slot));
            }
            if let Slot::Bit(i) = slot {
                rows[i] = match basis {
                    Basis::Z => data.z_bits(),
                    Basis::X => data.x_bits(),
                };
                let other = match basis {
                    Basis::Z => data.x_bits(),
                    Basis::X => data.z_bits(),
                };
                if other != 0 {
                    return Err(CircuitError::Nondeterministic(slot));
                }
            }
        }
    }
    Ok(CheckMatrix::from_rows(reg.n_data, rows.to_vec()))
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = &self.register;
        writeln!(
            f,
            "register data={} ancilla={} flag={} basis={}",
            r.n_data, r.n_ancilla, r.n_flag, self.basis
        )?;
        for (l, layer) in self.layers.iter().enumerate() {
            if l > 0 {
                writeln!(f, "---")?;
            }
            for ins in layer {
                writeln!(f, "{}", ins.describe(r))?;
            }
        }
        writeln!(f, "map")?;
        writeln!(f, "{}", self.syndrome_map.to_standard)
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> CircuitError {
    CircuitError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_qubit(reg: &QubitRegister, tok: &str, line: usize) -> Result<usize, CircuitError> {
    let bad = || parse_err(line, format!("bad qubit `{tok}`"));
    let (kind, idx) = tok.split_at(1.min(tok.len()));
    let i: usize = idx.parse().map_err(|_| bad())?;
    let q = match kind {
        "d" if (1..=reg.n_data).contains(&i) => reg.data(i - 1),
        "a" if i < reg.n_ancilla => reg.ancilla(i),
        "f" if i < reg.n_flag => reg.flag(i),
        _ => return Err(bad()),
    };
    Ok(q)
}

fn parse_slot(tok: &str, line: usize) -> Result<Slot, CircuitError> {
    let bad = || parse_err(line, format!("bad output slot `{tok}`"));
    if let Some(i) = tok.strip_prefix("flag") {
        Ok(Slot::Flag(i.parse().map_err(|_| bad())?))
    } else if let Some(i) = tok.strip_prefix('b') {
        Ok(Slot::Bit(i.parse().map_err(|_| bad())?))
    } else {
        Err(bad())
    }
}

fn parse_header(text: &str, line: usize) -> Result<(QubitRegister, Basis), CircuitError> {
    let mut toks = text.split_whitespace();
    if toks.next() != Some("register") {
        return Err(parse_err(line, "expected `register ...` header"));
    }
    let (mut d, mut a, mut fl, mut basis) = (None, None, None, None);
    for t in toks {
        let (k, v) = t
            .split_once('=')
            .ok_or_else(|| parse_err(line, format!("bad header field `{t}`")))?;
        let num = || {
            v.parse::<usize>()
                .map_err(|_| parse_err(line, format!("bad count `{v}`")))
        };
        match k {
            "data" => d = Some(num()?),
            "ancilla" => a = Some(num()?),
            "flag" => fl = Some(num()?),
            "basis" => basis = Some(v.parse::<Basis>().map_err(|e| parse_err(line, e))?),
            _ => return Err(parse_err(line, format!("unknown header field `{k}`"))),
        }
    }
    let missing = |name: &str| parse_err(line, format!("header is missing `{name}`"));
    let d = d.ok_or_else(|| missing("data"))?;
    if d != 7 {
        return Err(parse_err(line, "only data=7 is supported"));
    }
    let reg = QubitRegister::new(d, a.ok_or_else(|| missing("ancilla"))?, fl.unwrap_or(0))
        .map_err(|e| parse_err(line, e.to_string()))?;
    Ok((reg, basis.ok_or_else(|| missing("basis"))?))
}

impl FromStr for Circuit {
    type Err = CircuitError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut header = None;
        let mut layers: Vec<Vec<Instruction>> = vec![Vec::new()];
        let mut explicit = false;
        let mut map_rows: Option<Vec<String>> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            if let Some(rows) = map_rows.as_mut() {
                rows.push(body.to_string());
                continue;
            }
            let Some((reg, _)) = header else {
                header = Some(parse_header(body, line)?);
                continue;
            };
            if body == "map" {
                map_rows = Some(Vec::new());
                continue;
            }
            if body == "---" {
                explicit = true;
                layers.push(Vec::new());
                continue;
            }
            let toks: Vec<&str> = body.split_whitespace().collect();
            let q = |t: &str| parse_qubit(&reg, t, line);
            let ins = match toks.as_slice() {
                ["RZ", a] => Instruction::ResetZ(q(a)?),
                ["RX", a] => Instruction::ResetX(q(a)?),
                ["CX", c, t] => Instruction::cnot(q(c)?, q(t)?),
                ["MZ", a, "->", s] => Instruction::MeasureZ(q(a)?, parse_slot(s, line)?),
                ["MX", a, "->", s] => Instruction::MeasureX(q(a)?, parse_slot(s, line)?),
                _ => return Err(parse_err(line, format!("cannot parse `{body}`"))),
            };
            layers.last_mut().expect("at least one layer").push(ins);
        }
        let (reg, basis) = header.ok_or_else(|| parse_err(1, "empty circuit file"))?;
        let to_standard = match map_rows {
            Some(rows) => Some(CheckMatrix::from_bitstrings(&rows)?),
            None => None,
        };
        if explicit {
            if layers.iter().any(|l| l.is_empty()) {
                return Err(parse_err(0, "empty layer between `---` separators"));
            }
            Circuit::new(reg, basis, layers, to_standard)
        } else {
            Circuit::from_instructions(reg, basis, &layers[0], to_standard)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOY: &str = "\
register data=7 ancilla=3 flag=0 basis=Z
RZ a0
RZ a1
RZ a2
CX d1 a0
CX d2 a0
CX d3 a0
CX d4 a0
CX d2 a1
CX d3 a1
CX d5 a1
CX d6 a1
CX d3 a2
CX d4 a2
CX d6 a2
CX d7 a2
MZ a0 -> b0
MZ a1 -> b1
MZ a2 -> b2
";

    fn reg() -> QubitRegister {
        QubitRegister::steane(3, 0)
    }

    #[test]
    fn schedule_disjoint_gates_share_a_layer() {
        let r = reg();
        let l = schedule(&[
            Instruction::cnot(r.data(0), r.ancilla(0)),
            Instruction::cnot(r.data(1), r.ancilla(1)),
        ]);
        assert_eq!(l.len(), 1);
        assert_eq!(l[0].len(), 2);
    }

    #[test]
    fn schedule_shared_control_needs_two_layers() {
        let r = reg();
        let l = schedule(&[
            Instruction::cnot(r.data(0), r.ancilla(0)),
            Instruction::cnot(r.data(0), r.ancilla(1)),
        ]);
        assert_eq!(l.len(), 2);
    }

    #[test]
    fn naive_circuit_measures_h() {
        let c: Circuit = TOY.parse().unwrap();
        assert_eq!(c.syndrome_map.measured, crate::code::steane_h());
        assert_eq!(c.syndrome_map.to_standard, CheckMatrix::identity(3));
        assert_eq!(c.cnot_count(), 12);
        assert_eq!(c.depth(), 10);
    }

    #[test]
    fn text_round_trip_and_dual_involution() {
        let c: Circuit = TOY.parse().unwrap();
        let again: Circuit = c.to_text().parse().unwrap();
        assert_eq!(again, c);
        let d = c.dualize();
        assert_eq!(d.basis, Basis::X);
        assert_eq!(d.cnot_count(), c.cnot_count());
        assert_eq!(d.syndrome_map, c.syndrome_map);
        assert_eq!(d.dualize(), c);
        assert_eq!(Circuit::parse(&d.to_text()).unwrap(), d);
    }

    #[test]
    fn three_line_fixture() {
        let text = "register data=7 ancilla=3 flag=0 basis=Z\nRZ a0\nCX d1 a0\n";
        // too few bits to be a syndrome circuit, but the instructions parse
        let err = text.parse::<Circuit>().unwrap_err();
        assert!(matches!(err, CircuitError::NotMeasured(_)), "{err}");
    }

    #[test]
    fn missing_reset_is_rejected() {
        let text = TOY.replace("RZ a1\n", "");
        assert_eq!(
            text.parse::<Circuit>().unwrap_err(),
            CircuitError::UseBeforeReset(reg().ancilla(1))
        );
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = TOY.replace("CX d3 a1", "CX d9 a1");
        match text.parse::<Circuit>().unwrap_err() {
            CircuitError::Parse { line, .. } => assert_eq!(line, 10),
            e => panic!("unexpected {e}"),
        }
        let text = TOY.replace("MZ a2 -> b2", "MZ a2 => b2");
        assert!(matches!(
            text.parse::<Circuit>(),
            Err(CircuitError::Parse { line: 19, .. })
        ));
    }

    #[test]
    fn wrong_orientation_and_duplicate_slot() {
        let text = TOY.replace("CX d1 a0", "CX a0 d1");
        assert!(matches!(text.parse::<Circuit>(), Err(CircuitError::Orientation(..))));
        let text = TOY.replace("MZ a2 -> b2", "MZ a2 -> b1");
        assert!(matches!(text.parse::<Circuit>(), Err(CircuitError::SlotCount(..))));
    }

    #[test]
    fn nondeterministic_measurement_is_rejected() {
        let text = TOY.replace("RZ a2", "RX a2").replace("MZ a2", "MX a2");
        assert!(text.parse::<Circuit>().is_err());
        // measuring only two stabilizers plus a non-stabilizer parity
        let text = TOY.replace("CX d7 a2\n", "");
        assert_eq!(
            text.parse::<Circuit>().unwrap_err(),
            CircuitError::Nondeterministic(Slot::Bit(2))
        );
    }

    #[test]
    fn explicit_layers_are_kept() {
        let text = "\
register data=7 ancilla=3 flag=0 basis=Z
RZ a0
RZ a1
RZ a2
---
CX d1 a0
---
CX d2 a0
CX d3 a1
---
CX d3 a0
CX d2 a1
---
CX d4 a0
CX d5 a1
CX d3 a2
---
CX d6 a1
CX d4 a2
---
CX d6 a2
---
CX d7 a2
---
MZ a0 -> b0
MZ a1 -> b1
MZ a2 -> b2
map
100
010
001
";
        let c: Circuit = text.parse().unwrap();
        assert_eq!(c.depth(), 9);
        assert_eq!(c.layers[2].len(), 2);
        assert_eq!(c.to_text(), text);
    }

    #[test]
    fn backprop_through_layers() {
        let c: Circuit = TOY.parse().unwrap();
        let r = c.register;
        let z = PauliOperator::from_masks(r.len(), 0, 1 << r.ancilla(0));
        let end = TimePoint::before(c.depth() - 1);
        let start = TimePoint::after(0);
        let p = c.backprop(z, end, start);
        assert_eq!(p.z_bits(), 0b1111 | 1 << r.ancilla(0));
        // nothing between a point and itself
        assert_eq!(c.backprop(z, end, end), z);
    }

    #[test]
    fn idle_qubits_track_liveness() {
        let c: Circuit = TOY.parse().unwrap();
        // layer 0 resets every ancilla; all data idle
        assert_eq!(c.idle_qubits(0), (0..7).collect::<Vec<_>>());
        let last = c.depth() - 1;
        assert_eq!(c.idle_qubits(last), (0..7).collect::<Vec<_>>());
    }
}
