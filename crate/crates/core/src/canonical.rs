//! The frozen circuit pair (regenerate with `steane-se derive --out crates/core/circuits`).

use crate::circuit::Circuit;
use crate::decoder::Decoder;

pub const PRIMARY_Z: &str = include_str!("../circuits/primary_z.circ");
pub const RECOVERY_Z: &str = include_str!("../circuits/recovery_z.circ");

/// 14-CNOT flagged primary circuit, Z basis.
pub fn primary() -> Circuit {
    PRIMARY_Z.parse().expect("shipped primary circuit is valid")
}

/// 11-CNOT recovery circuit, Z basis.
pub fn recovery() -> Circuit {
    RECOVERY_Z.parse().expect("shipped recovery circuit is valid")
}

pub fn decoder() -> Decoder {
    Decoder::derive(&primary(), &recovery()).expect("shipped circuits admit unambiguous tables")
}

/// Remapped corrections the shipped pair is selected to produce after a Z-basis flag.
pub const HOOK_REMAP: [(&str, &str); 2] = [("010", "Z1.Z2"), ("100", "Z2.Z5")];
