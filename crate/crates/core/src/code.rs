//! Steane parity-check tables and the small amount of GF(2) linear algebra
//! the rest of the crate needs.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodeError {
    #[error("matrix dimensions {0}x{1} and {2}x{3} do not match")]
    Dimension(usize, usize, usize, usize),
    #[error("measured checks have rank {rank}, expected {expected}")]
    RankDeficient { rank: usize, expected: usize },
    #[error("measured checks do not span the Steane check space")]
    RowSpaceMismatch,
    #[error("matrix is singular")]
    Singular,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Dense binary matrix, one `u64` bitmask per row (bit `j` is column `j`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CheckMatrix {
    cols: usize,
    rows: Vec<u64>,
}

impl CheckMatrix {
    pub fn from_rows(cols: usize, rows: Vec<u64>) -> Self {
        assert!(cols <= 64);
        let m = crate::pauli::low_mask(cols);
        Self {
            cols,
            rows: rows.into_iter().map(|r| r & m).collect(),
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_rows(cols, vec![0; rows])
    }

    pub fn identity(n: usize) -> Self {
        Self::from_rows(n, (0..n).map(|i| 1 << i).collect())
    }

    /// Parses `1110000`-style lines; leftmost character is column 0.
    pub fn from_bitstrings<S: AsRef<str>>(lines: &[S]) -> Result<Self, CodeError> {
        let mut cols = None;
        let mut rows = Vec::with_capacity(lines.len());
        for (i, line) in lines.iter().enumerate() {
            let line = line.as_ref().trim();
            let row = parse_bitstring(line).ok_or_else(|| CodeError::Parse {
                line: i + 1,
                message: format!("`{line}` is not a bitstring"),
            })?;
            match cols {
                None => cols = Some(line.len()),
                Some(c) if c != line.len() => {
                    return Err(CodeError::Parse {
                        line: i + 1,
                        message: format!("expected {c} columns, found {}", line.len()),
                    })
                }
                _ => {}
            }
            rows.push(row);
        }
        Ok(Self::from_rows(cols.unwrap_or(0), rows))
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> &[u64] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> u64 {
        self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        (self.rows[i] >> j) & 1 == 1
    }

    /// Column `j` as a bitmask over rows (bit `i` is row `i`).
    pub fn column(&self, j: usize) -> u64 {
        self.rows
            .iter()
            .enumerate()
            .fold(0, |acc, (i, r)| acc | (((r >> j) & 1) << i))
    }

    /// Matrix-vector product; `v` is a bitmask over columns, result over rows.
    pub fn mul_vec(&self, v: u64) -> u64 {
        self.rows
            .iter()
            .enumerate()
            .fold(0, |acc, (i, r)| acc | (((r & v).count_ones() as u64) & 1) << i)
    }

    pub fn mul(&self, rhs: &CheckMatrix) -> Result<CheckMatrix, CodeError> {
        if self.cols != rhs.n_rows() {
            return Err(CodeError::Dimension(self.n_rows(), self.cols, rhs.n_rows(), rhs.cols));
        }
        let rows = self
            .rows
            .iter()
            .map(|r| {
                (0..self.cols)
                    .filter(|k| (r >> k) & 1 == 1)
                    .fold(0, |acc, k| acc ^ rhs.rows[k])
            })
            .collect();
        Ok(CheckMatrix::from_rows(rhs.cols, rows))
    }

    pub fn rank(&self) -> usize {
        gf2_rank(self)
    }

    pub fn inverse(&self) -> Result<CheckMatrix, CodeError> {
        let n = self.n_rows();
        if n != self.cols {
            return Err(CodeError::Dimension(n, self.cols, n, n));
        }
        let mut a = self.rows.clone();
        let mut inv: Vec<u64> = (0..n).map(|i| 1 << i).collect();
        for col in 0..n {
            let pivot = (col..n).find(|&r| (a[r] >> col) & 1 == 1).ok_or(CodeError::Singular)?;
            a.swap(col, pivot);
            inv.swap(col, pivot);
            for r in 0..n {
                if r != col && (a[r] >> col) & 1 == 1 {
                    a[r] ^= a[col];
                    inv[r] ^= inv[col];
                }
            }
        }
        Ok(CheckMatrix::from_rows(n, inv))
    }

    /// All 2^rows elements of the row space, indexed by combination mask.
    pub fn row_space(&self) -> Vec<u64> {
        let mut span = vec![0u64];
        for &r in &self.rows {
            let more: Vec<u64> = span.iter().map(|s| s ^ r).collect();
            span.extend(more);
        }
        span
    }

    /// Writes `v` as a combination of rows, returning the combination mask.
    pub fn express(&self, v: u64) -> Option<u64> {
        // Reduce a copy of the rows to echelon form, tracking combinations.
        let mut basis: Vec<(u64, u64)> = Vec::new();
        for (i, &r) in self.rows.iter().enumerate() {
            let mut row = r;
            let mut comb = 1u64 << i;
            for &(b, c) in &basis {
                if row & lowest_bit(b) != 0 {
                    row ^= b;
                    comb ^= c;
                }
            }
            if row != 0 {
                for entry in basis.iter_mut() {
                    if entry.0 & lowest_bit(row) != 0 {
                        entry.0 ^= row;
                        entry.1 ^= comb;
                    }
                }
                basis.push((row, comb));
            }
        }
        let mut rest = v;
        let mut comb = 0;
        for &(b, c) in &basis {
            if rest & lowest_bit(b) != 0 {
                rest ^= b;
                comb ^= c;
            }
        }
        (rest == 0).then_some(comb)
    }
}

fn lowest_bit(v: u64) -> u64 {
    v & v.wrapping_neg()
}

/// Leftmost character is bit 0.
pub fn parse_bitstring(s: &str) -> Option<u64> {
    if s.is_empty() || s.len() > 64 {
        return None;
    }
    s.chars().enumerate().try_fold(0u64, |acc, (j, c)| match c {
        '0' => Some(acc),
        '1' => Some(acc | 1 << j),
        _ => None,
    })
}

impl fmt::Display for CheckMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, r) in self.rows.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            for j in 0..self.cols {
                write!(f, "{}", (r >> j) & 1)?;
            }
        }
        Ok(())
    }
}

impl FromStr for CheckMatrix {
    type Err = CodeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lines: Vec<&str> = s.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
        Self::from_bitstrings(&lines)
    }
}

/// Row rank over GF(2).
pub fn gf2_rank(m: &CheckMatrix) -> usize {
    let mut rows = m.rows.clone();
    let mut rank = 0;
    for col in 0..m.cols {
        let Some(p) = (rank..rows.len()).find(|&r| (rows[r] >> col) & 1 == 1) else {
            continue;
        };
        rows.swap(rank, p);
        for r in 0..rows.len() {
            if r != rank && (rows[r] >> col) & 1 == 1 {
                rows[r] ^= rows[rank];
            }
        }
        rank += 1;
    }
    rank
}

/// The Steane parity-check matrix, identical for X and Z checks.
pub fn steane_h() -> CheckMatrix {
    CheckMatrix::from_bitstrings(&["1111000", "0110110", "0011011"]).expect("valid literal")
}

/// Columns 2, 3 and 5 of the Steane matrix: the transform from the raw
/// ancilla bits of the shipped circuits to the standard syndrome.
pub fn steane_effective() -> CheckMatrix {
    CheckMatrix::from_bitstrings(&["110", "111", "010"]).expect("valid literal")
}

/// 3-bit syndrome; bit `i` is the parity of check row `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Syndrome(pub u8);

impl Syndrome {
    pub const ZERO: Syndrome = Syndrome(0);

    pub fn all() -> impl Iterator<Item = Syndrome> {
        (0..8u8).map(Syndrome)
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// Syndrome of an error pattern on the seven data qubits.
    pub fn of_error(mask: u64) -> Syndrome {
        Syndrome(steane_h().mul_vec(mask) as u8)
    }
}

/// Column-vector text: `101` means (1,0,1)ᵀ.
impl fmt::Display for Syndrome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..3 {
            write!(f, "{}", (self.0 >> i) & 1)?;
        }
        Ok(())
    }
}

impl FromStr for Syndrome {
    type Err = CodeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        match parse_bitstring(s) {
            Some(v) if s.len() == 3 => Ok(Syndrome(v as u8)),
            _ => Err(CodeError::Parse {
                line: 1,
                message: format!("`{s}` is not a 3-bit string"),
            }),
        }
    }
}

/// How a circuit's raw ancilla bits map to the standard syndrome.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SyndromeMapSpec {
    /// One row per syndrome output slot: the data parity that slot measures.
    pub measured: CheckMatrix,
    /// `to_standard · measured == H`.
    pub to_standard: CheckMatrix,
}

impl SyndromeMapSpec {
    /// Checks that `to_standard` is invertible and maps `measured` onto H.
    pub fn new(measured: CheckMatrix, to_standard: CheckMatrix) -> Result<Self, CodeError> {
        let h = steane_h();
        if to_standard.mul(&measured)? != h {
            return Err(CodeError::RowSpaceMismatch);
        }
        to_standard.inverse()?;
        Ok(Self { measured, to_standard })
    }

    pub fn raw_to_syndrome(&self, bits: u64) -> Syndrome {
        Syndrome(self.to_standard.mul_vec(bits) as u8)
    }
}

/// Finds the unique `T` with `T · measured = H`.
pub fn solve_to_standard(measured: &CheckMatrix) -> Result<SyndromeMapSpec, CodeError> {
    let h = steane_h();
    if measured.n_cols() != h.n_cols() || measured.n_rows() != h.n_rows() {
        return Err(CodeError::Dimension(
            measured.n_rows(),
            measured.n_cols(),
            h.n_rows(),
            h.n_cols(),
        ));
    }
    let rank = measured.rank();
    if rank != h.n_rows() {
        return Err(CodeError::RankDeficient {
            rank,
            expected: h.n_rows(),
        });
    }
    let rows = h
        .rows()
        .iter()
        .map(|&r| measured.express(r).ok_or(CodeError::RowSpaceMismatch))
        .collect::<Result<Vec<_>, _>>()?;
    let to_standard = CheckMatrix::from_rows(measured.n_rows(), rows);
    SyndromeMapSpec::new(measured.clone(), to_standard)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// All invertible 3x3 matrices, by brute force over the 512 candidates.
    fn invertible_3x3() -> Vec<CheckMatrix> {
        (0u64..512)
            .map(|bits| CheckMatrix::from_rows(3, vec![bits & 7, (bits >> 3) & 7, bits >> 6]))
            .filter(|m| m.rank() == 3)
            .collect()
    }

    #[test]
    fn ranks() {
        assert_eq!(gf2_rank(&steane_h()), 3);
        assert_eq!(gf2_rank(&steane_effective()), 3);
        assert_eq!(gf2_rank(&CheckMatrix::zeros(3, 7)), 0);
    }

    #[test]
    fn columns_of_h_are_distinct_and_nonzero() {
        let h = steane_h();
        let mut cols: Vec<u64> = (0..7).map(|j| h.column(j)).collect();
        assert!(cols.iter().all(|&c| c != 0));
        cols.sort();
        cols.dedup();
        assert_eq!(cols.len(), 7);
    }

    #[test]
    fn effective_matrix_is_columns_two_three_five() {
        let h = steane_h();
        let hp = steane_effective();
        for (k, j) in [1usize, 2, 4].into_iter().enumerate() {
            assert_eq!(hp.column(k), h.column(j));
        }
    }

    #[test]
    fn solve_identity() {
        let spec = solve_to_standard(&steane_h()).unwrap();
        assert_eq!(spec.to_standard, CheckMatrix::identity(3));
    }

    #[test]
    fn solve_recovers_effective_matrix() {
        let hp = steane_effective();
        let measured = hp.inverse().unwrap().mul(&steane_h()).unwrap();
        assert_eq!(measured.to_string(), "1100011\n0011011\n1001110");
        assert_eq!(solve_to_standard(&measured).unwrap().to_standard, hp);
    }

    #[test]
    fn solve_rejects_bad_inputs() {
        let rank2 = CheckMatrix::from_bitstrings(&["1111000", "0110110", "1001110"]).unwrap();
        assert_eq!(rank2.rank(), 2);
        assert!(matches!(
            solve_to_standard(&rank2),
            Err(CodeError::RankDeficient { rank: 2, .. })
        ));
        let outside = CheckMatrix::from_bitstrings(&["1000000", "0110110", "0011011"]).unwrap();
        assert_eq!(solve_to_standard(&outside), Err(CodeError::RowSpaceMismatch));
    }

    #[test]
    fn solve_inverts_every_change_of_basis() {
        let h = steane_h();
        let all = invertible_3x3();
        assert_eq!(all.len(), 168);
        for t in all {
            let measured = t.inverse().unwrap().mul(&h).unwrap();
            assert_eq!(solve_to_standard(&measured).unwrap().to_standard, t);
        }
    }

    #[test]
    fn bitstring_fixture_format() {
        let m: CheckMatrix = "1110000\n0000111\n".parse().unwrap();
        assert_eq!(m.n_rows(), 2);
        assert_eq!(m.row(0), 0b111);
        assert!("1102".parse::<CheckMatrix>().is_err());
        assert!(matches!(
            "11\n111".parse::<CheckMatrix>(),
            Err(CodeError::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn syndrome_text() {
        let s: Syndrome = "101".parse().unwrap();
        assert_eq!(s, Syndrome(0b101));
        assert_eq!(Syndrome(0b010).to_string(), "010");
        assert_eq!(Syndrome::of_error(1 << 3), Syndrome(0b101));
    }
}
