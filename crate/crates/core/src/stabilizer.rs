//! Steane stabilizer group, logical operators and coset classification of
//! data-qubit errors.

use std::sync::OnceLock;

use thiserror::Error;

use crate::code::{steane_h, Syndrome};
use crate::pauli::PauliOperator;

pub const N_DATA: usize = 7;
const DATA_MASK: u64 = 0x7f;
const ALL_ONES: u64 = 0x7f;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StabilizerError {
    #[error("operator `{0}` acts outside the data qubits")]
    NotOnData(String),
}

/// Which stabilizer coset (relative to the lookup correction) an error lies in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LogicalClass {
    /// The error is an element of the stabilizer group.
    Identity,
    /// Nonzero syndrome; stabilizer-equivalent to its lookup correction.
    Stabilizer,
    LogicalX,
    LogicalZ,
    LogicalY,
}

impl LogicalClass {
    pub fn is_logical(self) -> bool {
        matches!(
            self,
            LogicalClass::LogicalX | LogicalClass::LogicalZ | LogicalClass::LogicalY
        )
    }

    /// Carries a logical X̄ component (X̄ or Ȳ).
    pub fn has_logical_x(self) -> bool {
        matches!(self, LogicalClass::LogicalX | LogicalClass::LogicalY)
    }

    /// Carries a logical Z̄ component (Z̄ or Ȳ).
    pub fn has_logical_z(self) -> bool {
        matches!(self, LogicalClass::LogicalZ | LogicalClass::LogicalY)
    }
}

/// Result of [`reduce_mod_stabilizers`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Reduction {
    pub class: LogicalClass,
    /// Minimum-weight element of `e · S`; ties broken by the lexicographically
    /// smallest support.
    pub min_weight_rep: PauliOperator,
}

/// The six Steane generators and a fixed pair of logical representatives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilizerGroup {
    pub generators: Vec<PauliOperator>,
    pub logical_x: PauliOperator,
    pub logical_z: PauliOperator,
}

impl StabilizerGroup {
    pub fn steane() -> &'static StabilizerGroup {
        static GROUP: OnceLock<StabilizerGroup> = OnceLock::new();
        GROUP.get_or_init(|| {
            let h = steane_h();
            let x = h.rows().iter().map(|&r| PauliOperator::from_masks(N_DATA, r, 0));
            let z = h.rows().iter().map(|&r| PauliOperator::from_masks(N_DATA, 0, r));
            StabilizerGroup {
                generators: x.chain(z).collect(),
                logical_x: PauliOperator::from_masks(N_DATA, ALL_ONES, 0),
                logical_z: PauliOperator::from_masks(N_DATA, 0, ALL_ONES),
            }
        })
    }

    /// All 64 group elements, indexed by generator-combination mask.
    pub fn elements(&self) -> Vec<PauliOperator> {
        let mut out = vec![PauliOperator::identity(N_DATA)];
        for g in &self.generators {
            let more: Vec<_> = out.iter().map(|e| *e * *g).collect();
            out.extend(more);
        }
        out
    }

    pub fn contains(&self, p: &PauliOperator) -> bool {
        p.num_qubits() == N_DATA && in_check_space(p.x_bits()) && in_check_space(p.z_bits())
    }
}

fn check_space() -> &'static [u64; 8] {
    static SPACE: OnceLock<[u64; 8]> = OnceLock::new();
    SPACE.get_or_init(|| {
        let span = steane_h().row_space();
        span.try_into().expect("three rows span eight vectors")
    })
}

fn in_check_space(mask: u64) -> bool {
    check_space().contains(&(mask & DATA_MASK))
}

/// Data qubit whose H column equals `s`, if any.
pub fn qubit_for_syndrome(s: Syndrome) -> Option<usize> {
    static COLS: OnceLock<[Option<usize>; 8]> = OnceLock::new();
    COLS.get_or_init(|| {
        let h = steane_h();
        let mut table = [None; 8];
        for j in 0..N_DATA {
            table[h.column(j) as usize] = Some(j);
        }
        table
    })[s.0 as usize & 7]
}

/// Bitmask of the single-qubit lookup correction for one Pauli type.
pub fn lookup_mask(error_mask: u64) -> u64 {
    qubit_for_syndrome(Syndrome::of_error(error_mask)).map_or(0, |j| 1 << j)
}

/// Ideal per-type lookup correction for a data error (both X and Z parts).
pub fn ideal_correction(e: &PauliOperator) -> PauliOperator {
    PauliOperator::from_masks(N_DATA, lookup_mask(e.x_bits()), lookup_mask(e.z_bits()))
}

/// Minimum weight of `mask + v` over the check space: the reduced weight of
/// one Pauli type of an error.
pub fn reduced_type_weight(mask: u64) -> u32 {
    static TABLE: OnceLock<[u8; 128]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [0u8; 128];
        for (m, w) in t.iter_mut().enumerate() {
            *w = check_space()
                .iter()
                .map(|s| ((m as u64) ^ s).count_ones())
                .min()
                .unwrap_or(0) as u8;
        }
        t
    })[(mask & DATA_MASK) as usize] as u32
}

/// Reduced weights of the X part and the Z part of a data error.
pub fn reduced_weights(e: &PauliOperator) -> (u32, u32) {
    (reduced_type_weight(e.x_bits()), reduced_type_weight(e.z_bits()))
}

fn classify_masks(x: u64, z: u64) -> LogicalClass {
    if in_check_space(x) && in_check_space(z) {
        return LogicalClass::Identity;
    }
    let rx = x ^ lookup_mask(x);
    let rz = z ^ lookup_mask(z);
    // After the lookup correction each part is a Hamming codeword; the odd
    // ones carry the weight-7 logical.
    match (rx.count_ones() % 2 == 1, rz.count_ones() % 2 == 1) {
        (false, false) => LogicalClass::Stabilizer,
        (true, false) => LogicalClass::LogicalX,
        (false, true) => LogicalClass::LogicalZ,
        (true, true) => LogicalClass::LogicalY,
    }
}

/// Classifies the stabilizer coset of a data error and finds a minimum-weight
/// representative by brute force over all 64 stabilizer elements.
pub fn reduce_mod_stabilizers(e: &PauliOperator) -> Result<Reduction, StabilizerError> {
    if e.support() & !DATA_MASK != 0 {
        return Err(StabilizerError::NotOnData(e.to_string()));
    }
    let e = e.truncate(N_DATA);
    let class = classify_masks(e.x_bits(), e.z_bits());
    let mut best = e;
    for s in StabilizerGroup::steane().elements() {
        let cand = e * s;
        if rep_order(&cand) < rep_order(&best) {
            best = cand;
        }
    }
    Ok(Reduction {
        class,
        min_weight_rep: best,
    })
}

fn rep_order(p: &PauliOperator) -> (u32, Vec<usize>, u64, u64) {
    (p.weight(), p.support_indices(), p.z_bits(), p.x_bits())
}

/// Class of the residual after an ideal (noiseless) extraction in both bases.
pub fn classify_after_ideal_decoding(e: &PauliOperator) -> LogicalClass {
    let r = *e * ideal_correction(e);
    classify_masks(r.x_bits(), r.z_bits())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str) -> PauliOperator {
        s.parse().unwrap()
    }

    #[test]
    fn generators_commute_and_logicals_behave() {
        let g = StabilizerGroup::steane();
        assert_eq!(g.generators[0], p("X1.X2.X3.X4"));
        assert_eq!(g.generators[4], p("Z2.Z3.Z5.Z6"));
        for a in &g.generators {
            for b in &g.generators {
                assert!(a.commutes(b).unwrap());
            }
            assert!(a.commutes(&g.logical_x).unwrap());
            assert!(a.commutes(&g.logical_z).unwrap());
        }
        assert!(!g.logical_x.commutes(&g.logical_z).unwrap());
        assert_eq!(g.elements().len(), 64);
    }

    #[test]
    fn hook_example_is_stabilizer_equivalent_to_z6() {
        let r = reduce_mod_stabilizers(&p("Z2.Z3.Z5")).unwrap();
        assert!(!r.class.is_logical());
        assert_eq!(r.min_weight_rep, p("Z6"));
    }

    #[test]
    fn weight_two_hook_is_a_logical_after_lookup() {
        let r = reduce_mod_stabilizers(&p("Z2.Z5")).unwrap();
        assert_eq!(r.class, LogicalClass::LogicalZ);
        assert_eq!(r.min_weight_rep.weight(), 2);
        // Lookup would correct Z1, leaving Z1 Z2 Z5 ~ Z̄.
        assert_eq!(ideal_correction(&p("Z2.Z5")), p("Z1"));
    }

    #[test]
    fn identity_and_single_qubit_errors() {
        let r = reduce_mod_stabilizers(&p("I")).unwrap();
        assert_eq!(r.class, LogicalClass::Identity);
        assert!(r.min_weight_rep.is_identity());
        for q in 0..7 {
            for letter in ["X", "Y", "Z"] {
                let e = p(&format!("{letter}{}", q + 1));
                let r = reduce_mod_stabilizers(&e).unwrap();
                assert_eq!(r.class, LogicalClass::Stabilizer);
                assert_eq!(r.min_weight_rep, e);
            }
        }
    }

    #[test]
    fn tie_break_picks_smallest_support() {
        assert_eq!(reduce_mod_stabilizers(&p("Z3.Z6")).unwrap().min_weight_rep, p("Z2.Z5"));
        assert_eq!(reduce_mod_stabilizers(&p("Z6.Z7")).unwrap().min_weight_rep, p("Z1.Z2"));
    }

    #[test]
    fn rejects_support_outside_data() {
        let e = PauliOperator::z_on(11, &[8]);
        assert!(reduce_mod_stabilizers(&e).is_err());
    }

    #[test]
    fn logical_classes() {
        let g = StabilizerGroup::steane();
        assert_eq!(
            reduce_mod_stabilizers(&g.logical_x).unwrap().class,
            LogicalClass::LogicalX
        );
        assert_eq!(
            reduce_mod_stabilizers(&(g.logical_x * g.logical_z)).unwrap().class,
            LogicalClass::LogicalY
        );
        let r = reduce_mod_stabilizers(&p("Z1.Z2.Z5")).unwrap();
        assert_eq!(r.class, LogicalClass::LogicalZ);
        assert_eq!(r.min_weight_rep.weight(), 3);
    }

    #[test]
    fn lookup_table_matches_columns() {
        let q = |s: &str| qubit_for_syndrome(s.parse().unwrap());
        assert_eq!(q("101"), Some(3));
        assert_eq!(q("010"), Some(4));
        assert_eq!(q("001"), Some(6));
        assert_eq!(q("100"), Some(0));
        assert_eq!(qubit_for_syndrome(Syndrome::ZERO), None);
    }

    fn arb_data_pauli() -> impl Strategy<Value = PauliOperator> {
        (0u64..128, 0u64..128).prop_map(|(x, z)| PauliOperator::from_masks(7, x, z))
    }

    proptest! {
        #[test]
        fn stabilizer_products_are_not_logical(mask in 0usize..64) {
            let s = StabilizerGroup::steane().elements()[mask];
            let r = reduce_mod_stabilizers(&s).unwrap();
            prop_assert_eq!(r.class, LogicalClass::Identity);
            prop_assert!(r.min_weight_rep.is_identity());
        }

        #[test]
        fn reduction_is_coset_invariant(e in arb_data_pauli(), g in 0usize..6) {
            let s = StabilizerGroup::steane().generators[g];
            prop_assert_eq!(reduce_mod_stabilizers(&(e * s)).unwrap(), reduce_mod_stabilizers(&e).unwrap());
        }

        #[test]
        fn representative_is_in_coset_and_minimal(e in arb_data_pauli()) {
            let r = reduce_mod_stabilizers(&e).unwrap();
            prop_assert!(StabilizerGroup::steane().contains(&(r.min_weight_rep * e)));
            let (wx, wz) = reduced_weights(&e);
            prop_assert!(r.min_weight_rep.weight() >= wx.max(wz));
        }
    }
}
