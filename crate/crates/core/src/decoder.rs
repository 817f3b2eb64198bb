//! Syndrome decoding: the single-qubit lookup table and the flag-triggered
//! remapped table, both derived from the circuits.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::circuit::{Basis, Circuit};
use crate::code::{Syndrome, SyndromeMapSpec};
use crate::faults::all_effects;
use crate::pauli::{Pauli, PauliOperator};
use crate::sim::run_noiseless;
use crate::stabilizer::{lookup_mask, qubit_for_syndrome, reduce_mod_stabilizers, N_DATA};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecoderError {
    #[error("flagged faults with syndrome {0} leave residuals in different cosets")]
    Ambiguous(Syndrome),
    #[error("a flagged fault leaves an undetectable logical error")]
    Undetectable,
    #[error("primary ({0}) and recovery ({1}) circuits must be written in the same basis")]
    BasisMismatch(Basis, Basis),
}

/// s = to_standard · b over GF(2).
pub fn raw_to_syndrome(spec: &SyndromeMapSpec, bits: u64) -> Syndrome {
    spec.raw_to_syndrome(bits)
}

fn op(t: Pauli, mask: u64) -> PauliOperator {
    match t {
        Pauli::X => PauliOperator::from_masks(N_DATA, mask, 0),
        _ => PauliOperator::from_masks(N_DATA, 0, mask),
    }
}

/// Corrections for one error type, indexed by syndrome value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecoderTables {
    pub error_type: Pauli,
    pub standard: [PauliOperator; 8],
    /// Used only after a raised flag.
    pub remap: [PauliOperator; 8],
}

impl DecoderTables {
    /// Lookup table from the columns of H; remap equal to it.
    pub fn standard_only(error_type: Pauli) -> Self {
        let standard =
            std::array::from_fn(|s| op(error_type, qubit_for_syndrome(Syndrome(s as u8)).map_or(0, |q| 1 << q)));
        Self {
            error_type,
            standard,
            remap: standard,
        }
    }

    pub fn decode_standard(&self, s: Syndrome) -> PauliOperator {
        self.standard[s.0 as usize & 7]
    }

    pub fn decode_remap(&self, s: Syndrome) -> PauliOperator {
        self.remap[s.0 as usize & 7]
    }

    /// Syndromes whose flagged correction differs from the standard one.
    pub fn remapped(&self) -> Vec<(Syndrome, PauliOperator)> {
        Syndrome::all()
            .filter(|s| self.remap[s.0 as usize] != self.standard[s.0 as usize])
            .map(|s| (s, self.remap[s.0 as usize]))
            .collect()
    }

    pub fn without_remap(&self) -> Self {
        Self {
            remap: self.standard,
            ..self.clone()
        }
    }
}

impl fmt::Display for DecoderTables {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "error={:?}", self.error_type)?;
        writeln!(f, "syndrome standard remap")?;
        for s in Syndrome::all() {
            writeln!(f, "{s} {} {}", self.decode_standard(s), self.decode_remap(s))?;
        }
        Ok(())
    }
}

/// Builds the remap table for flags raised by `primary`: each flagged fault
/// whose residual the lookup decoder would turn into a logical error has its
/// syndrome (as seen by the dual-basis recovery run) remapped to the
/// residual's minimum-weight representative.
pub fn build_remap(primary: &Circuit, recovery: &Circuit) -> Result<DecoderTables, DecoderError> {
    if primary.basis != recovery.basis {
        return Err(DecoderError::BasisMismatch(primary.basis, recovery.basis));
    }
    let rec = recovery.dualize();
    let t = rec.basis.detects();
    let mut tables = DecoderTables::standard_only(t);
    // syndrome -> (is the lookup correction wrong, representative)
    let mut seen: BTreeMap<Syndrome, (bool, PauliOperator)> = BTreeMap::new();
    for e in all_effects(primary).iter().filter(|e| e.flag_flip) {
        let r = match t {
            Pauli::X => e.residual_data.x_bits(),
            _ => e.residual_data.z_bits(),
        };
        let out = run_noiseless(&rec, &op(t, r));
        let s = rec.syndrome_map.raw_to_syndrome(out.bits);
        let wrong = (r ^ lookup_mask(r)).count_ones() % 2 == 1;
        if wrong && s.is_zero() {
            return Err(DecoderError::Undetectable);
        }
        let rep = reduce_mod_stabilizers(&op(t, r)).expect("data operator").min_weight_rep;
        match seen.get(&s) {
            Some(&(w, _)) if w != wrong => return Err(DecoderError::Ambiguous(s)),
            _ => {
                seen.insert(s, (wrong, rep));
            }
        }
    }
    for (s, (wrong, rep)) in seen {
        if wrong {
            tables.remap[s.0 as usize] = rep;
        }
    }
    Ok(tables)
}

/// Tables for both primary bases.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoder {
    /// Indexed by the basis of the primary run whose flag selects the remap.
    tables: [DecoderTables; 2],
}

fn idx(b: Basis) -> usize {
    match b {
        Basis::Z => 0,
        Basis::X => 1,
    }
}

impl Decoder {
    /// Derives the tables for `primary` and `recovery` (same basis) and for
    /// their duals.
    pub fn derive(primary: &Circuit, recovery: &Circuit) -> Result<Self, DecoderError> {
        let a = build_remap(primary, recovery)?;
        let b = build_remap(&primary.dualize(), &recovery.dualize())?;
        let mut tables = [a.clone(), a];
        tables[idx(primary.basis.dual())] = b;
        Ok(Self { tables })
    }

    pub fn from_tables(after_z_flag: DecoderTables, after_x_flag: DecoderTables) -> Self {
        Self {
            tables: [after_z_flag, after_x_flag],
        }
    }

    /// Tables consulted after a flag in a `basis` primary run: their remap
    /// is applied to the dual-basis recovery syndrome.
    pub fn for_flagged(&self, basis: Basis) -> &DecoderTables {
        &self.tables[idx(basis)]
    }

    /// Tables whose standard part decodes an unflagged `basis` run.
    pub fn for_unflagged(&self, basis: Basis) -> &DecoderTables {
        &self.tables[idx(basis.dual())]
    }

    pub fn without_remap(&self) -> Self {
        Self {
            tables: [self.tables[0].without_remap(), self.tables[1].without_remap()],
        }
    }
}

impl fmt::Display for Decoder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in [Basis::Z, Basis::X] {
            writeln!(f, "# flag raised in a {b} primary run")?;
            write!(f, "{}", self.for_flagged(b))?;
        }
        Ok(())
    }
}
