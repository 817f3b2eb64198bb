//! Phaseless Pauli operators over a small qubit register.
//!
//! Operators are stored as a pair of bitmasks (`x`, `z`); bit `q` of `x` set
//! means the operator has an X (or Y) component on qubit `q`. Signs are never
//! tracked: every computation in this crate (syndromes, propagation through
//! CNOT circuits, logical classification) is insensitive to them.

use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use thiserror::Error;

/// Largest register supported by the bitmask representation.
pub const MAX_QUBITS: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PauliError {
    #[error("register mismatch: {0} qubits vs {1} qubits")]
    RegisterMismatch(usize, usize),
    #[error("qubit index {index} out of range for a {n}-qubit register")]
    OutOfRange { index: usize, n: usize },
    #[error("cannot parse Pauli term `{0}`")]
    Parse(String),
    #[error("register of {0} qubits exceeds the supported maximum of {MAX_QUBITS}")]
    TooLarge(usize),
}

/// What a qubit is used for in a syndrome-extraction register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Data,
    Ancilla,
    Flag,
}

/// Contiguous register: data qubits first, then syndrome ancillae, then flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QubitRegister {
    pub n_data: usize,
    pub n_ancilla: usize,
    pub n_flag: usize,
}

impl QubitRegister {
    pub fn new(n_data: usize, n_ancilla: usize, n_flag: usize) -> Result<Self, PauliError> {
        let total = n_data + n_ancilla + n_flag;
        if total > MAX_QUBITS {
            return Err(PauliError::TooLarge(total));
        }
        Ok(Self {
            n_data,
            n_ancilla,
            n_flag,
        })
    }

    /// Seven data qubits with `n_ancilla` syndrome ancillae and `n_flag` flags.
    pub fn steane(n_ancilla: usize, n_flag: usize) -> Self {
        Self::new(7, n_ancilla, n_flag).expect("Steane registers are small")
    }

    pub fn len(&self) -> usize {
        self.n_data + self.n_ancilla + self.n_flag
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn role(&self, q: usize) -> Option<Role> {
        if q < self.n_data {
            Some(Role::Data)
        } else if q < self.n_data + self.n_ancilla {
            Some(Role::Ancilla)
        } else if q < self.len() {
            Some(Role::Flag)
        } else {
            None
        }
    }

    pub fn data(&self, i: usize) -> usize {
        debug_assert!(i < self.n_data);
        i
    }

    pub fn ancilla(&self, i: usize) -> usize {
        debug_assert!(i < self.n_ancilla);
        self.n_data + i
    }

    pub fn flag(&self, i: usize) -> usize {
        debug_assert!(i < self.n_flag);
        self.n_data + self.n_ancilla + i
    }

    pub fn data_mask(&self) -> u64 {
        low_mask(self.n_data)
    }

    pub fn ancilla_mask(&self) -> u64 {
        low_mask(self.n_ancilla) << self.n_data
    }

    pub fn flag_mask(&self) -> u64 {
        low_mask(self.n_flag) << (self.n_data + self.n_ancilla)
    }

    pub fn full_mask(&self) -> u64 {
        low_mask(self.len())
    }

    /// Index within its role group (`a2` -> 2).
    pub fn local_index(&self, q: usize) -> usize {
        match self.role(q) {
            Some(Role::Data) | None => q,
            Some(Role::Ancilla) => q - self.n_data,
            Some(Role::Flag) => q - self.n_data - self.n_ancilla,
        }
    }
}

pub(crate) fn low_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Single-qubit Pauli letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const NON_IDENTITY: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
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

/// Phaseless Pauli string on `n` qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliOperator {
    n: u8,
    x: u64,
    z: u64,
}

impl PauliOperator {
    pub fn identity(n: usize) -> Self {
        assert!(n <= MAX_QUBITS, "register too large");
        Self { n: n as u8, x: 0, z: 0 }
    }

    /// Builds an operator from masks, discarding bits beyond the register.
    pub fn from_masks(n: usize, x: u64, z: u64) -> Self {
        assert!(n <= MAX_QUBITS, "register too large");
        let m = low_mask(n);
        Self {
            n: n as u8,
            x: x & m,
            z: z & m,
        }
    }

    pub fn single(n: usize, q: usize, p: Pauli) -> Result<Self, PauliError> {
        if q >= n {
            return Err(PauliError::OutOfRange { index: q, n });
        }
        let (x, z) = p.bits();
        Ok(Self::from_masks(n, (x as u64) << q, (z as u64) << q))
    }

    pub fn x_on(n: usize, qubits: &[usize]) -> Self {
        Self::from_masks(n, qubits.iter().fold(0, |m, &q| m | 1 << q), 0)
    }

    pub fn z_on(n: usize, qubits: &[usize]) -> Self {
        Self::from_masks(n, 0, qubits.iter().fold(0, |m, &q| m | 1 << q))
    }

    pub fn num_qubits(&self) -> usize {
        self.n as usize
    }

    pub fn x_bits(&self) -> u64 {
        self.x
    }

    pub fn z_bits(&self) -> u64 {
        self.z
    }

    pub fn support(&self) -> u64 {
        self.x | self.z
    }

    pub fn weight(&self) -> u32 {
        self.support().count_ones()
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn get(&self, q: usize) -> Pauli {
        Pauli::from_bits((self.x >> q) & 1 == 1, (self.z >> q) & 1 == 1)
    }

    /// X part only (Z bits cleared).
    pub fn x_part(&self) -> Self {
        Self { z: 0, ..*self }
    }

    /// Z part only (X bits cleared).
    pub fn z_part(&self) -> Self {
        Self { x: 0, ..*self }
    }

    /// Phaseless product: XOR of both masks.
    pub fn multiply(&self, other: &Self) -> Result<Self, PauliError> {
        self.check_same(other)?;
        Ok(*self * *other)
    }

    /// True iff the symplectic form vanishes.
    pub fn commutes(&self, other: &Self) -> Result<bool, PauliError> {
        self.check_same(other)?;
        Ok(symplectic(self.x, self.z, other.x, other.z) == 0)
    }

    /// Restricts to the first `n` qubits (e.g. the data block of a register).
    pub fn truncate(&self, n: usize) -> Self {
        Self::from_masks(n, self.x, self.z)
    }

    /// Embeds into a larger register, keeping qubit indices.
    pub fn extend(&self, n: usize) -> Self {
        assert!(n >= self.num_qubits());
        Self::from_masks(n, self.x, self.z)
    }

    /// Exchanges the X and Z components (Hadamard on every qubit, phaseless).
    pub fn dual(&self) -> Self {
        Self {
            n: self.n,
            x: self.z,
            z: self.x,
        }
    }

    /// Qubit indices in the support, ascending.
    pub fn support_indices(&self) -> Vec<usize> {
        (0..self.num_qubits())
            .filter(|q| (self.support() >> q) & 1 == 1)
            .collect()
    }

    pub fn parse(text: &str, n: usize) -> Result<Self, PauliError> {
        let text = text.trim();
        if text == "I" || text.is_empty() {
            return Ok(Self::identity(n));
        }
        let mut out = Self::identity(n);
        for term in text.split('.') {
            let term = term.trim();
            let mut chars = term.chars();
            let letter = chars.next().ok_or_else(|| PauliError::Parse(term.into()))?;
            let p = match letter {
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                _ => return Err(PauliError::Parse(term.into())),
            };
            let index: usize = chars.as_str().parse().map_err(|_| PauliError::Parse(term.into()))?;
            if index == 0 {
                return Err(PauliError::Parse(term.into()));
            }
            out = out * Self::single(n, index - 1, p)?;
        }
        Ok(out)
    }

    fn check_same(&self, other: &Self) -> Result<(), PauliError> {
        if self.n != other.n {
            return Err(PauliError::RegisterMismatch(self.num_qubits(), other.num_qubits()));
        }
        Ok(())
    }
}

pub(crate) fn symplectic(ax: u64, az: u64, bx: u64, bz: u64) -> u32 {
    ((ax & bz) ^ (az & bx)).count_ones() & 1
}

impl Mul for PauliOperator {
    type Output = PauliOperator;

    fn mul(self, rhs: PauliOperator) -> PauliOperator {
        debug_assert_eq!(self.n, rhs.n, "register mismatch");
        PauliOperator {
            n: self.n,
            x: self.x ^ rhs.x,
            z: self.z ^ rhs.z,
        }
    }
}

/// Text form: `Z2.Z5`, `X3.Y7`, or `I`; indices are 1-based.
impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return write!(f, "I");
        }
        let mut first = true;
        for q in self.support_indices() {
            if !first {
                write!(f, ".")?;
            }
            first = false;
            write!(f, "{}{}", self.get(q).letter(), q + 1)?;
        }
        Ok(())
    }
}

/// Parses onto the 7-qubit data register.
impl FromStr for PauliOperator {
    type Err = PauliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s, 7)
    }
}
