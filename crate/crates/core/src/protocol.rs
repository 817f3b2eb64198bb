//! The flag-and-fallback cycle: run the flagged primary circuit; if the flag
//! stays silent decode its bits with the lookup table, otherwise discard them,
//! run the unflagged recovery circuit in the dual basis and decode its bits
//! with the remapped table.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canonical;
use crate::circuit::{Basis, Circuit};
use crate::decoder::Decoder;
use crate::faults::{fault_locations, FaultLocation};
use crate::pauli::{Pauli, PauliOperator};
use crate::sim::{run_deterministic_fault, CompiledCircuit, NoiseParams, RunOutput};
use crate::stabilizer::{classify_after_ideal_decoding, LogicalClass, N_DATA};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("primary and recovery circuits must share a basis (got {0} and {1})")]
    BasisMismatch(Basis, Basis),
    #[error("the primary circuit has no flag qubit")]
    NoFlag,
    #[error("the recovery circuit must not have a flag qubit")]
    FlaggedRecovery,
    #[error("at least one cycle is required")]
    NoCycles,
    #[error("unknown basis order {0:?} (expected ZX or XZ)")]
    Order(String),
}

/// Which circuit of a cycle is running.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    Primary,
    Recovery,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Standard,
    Recovery,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CycleOutcome {
    pub basis: Basis,
    pub flag_raised: bool,
    pub branch: Branch,
    pub applied_correction: PauliOperator,
    /// Raw bits of the run that was decoded.
    pub bits: u64,
}

/// Order of the two extraction bases within a round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum BasisOrder {
    #[default]
    ZX,
    XZ,
}

impl BasisOrder {
    pub fn basis_of_cycle(self, i: usize) -> Basis {
        let first = match self {
            BasisOrder::ZX => Basis::Z,
            BasisOrder::XZ => Basis::X,
        };
        if i.is_multiple_of(2) {
            first
        } else {
            first.dual()
        }
    }
}

impl fmt::Display for BasisOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BasisOrder::ZX => "ZX",
            BasisOrder::XZ => "XZ",
        })
    }
}

impl FromStr for BasisOrder {
    type Err = ProtocolError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "ZX" => Ok(BasisOrder::ZX),
            "XZ" => Ok(BasisOrder::XZ),
            _ => Err(ProtocolError::Order(s.to_string())),
        }
    }
}

/// A circuit together with its compiled sampler.
#[derive(Debug, Clone)]
pub struct Gadget {
    pub circuit: Circuit,
    pub compiled: CompiledCircuit,
}

impl Gadget {
    fn new(circuit: Circuit) -> Self {
        let compiled = CompiledCircuit::new(&circuit);
        Self { circuit, compiled }
    }
}

/// Result of one memory experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShotRecord {
    pub n_cycles: usize,
    pub flags_raised: usize,
    pub final_frame: PauliOperator,
    pub class: LogicalClass,
}

impl ShotRecord {
    pub fn failed(&self) -> bool {
        self.class.is_logical()
    }

    /// Failure with a logical Z component (Z̄ or Ȳ).
    pub fn fail_z(&self) -> bool {
        self.class.has_logical_z()
    }

    pub fn fail_x(&self) -> bool {
        self.class.has_logical_x()
    }
}

/// A single-fault run that ends in a logical error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SingleFaultFailure {
    pub basis: Basis,
    pub description: String,
    pub class: LogicalClass,
}

#[derive(Debug, Clone)]
pub struct Protocol {
    /// Indexed by basis: Z then X.
    primary: [Gadget; 2],
    /// `recovery[b]` runs after a flag in a `b` primary run (so it is
    /// written in `b.dual()`).
    recovery: [Gadget; 2],
    decoder: Decoder,
}

fn idx(b: Basis) -> usize {
    match b {
        Basis::Z => 0,
        Basis::X => 1,
    }
}

impl Protocol {
    /// `primary` and `recovery` may be given in either basis; the other one
    /// is obtained by dualizing.
    pub fn new(primary: Circuit, recovery: Circuit, decoder: Decoder) -> Result<Self, ProtocolError> {
        if primary.basis != recovery.basis {
            return Err(ProtocolError::BasisMismatch(primary.basis, recovery.basis));
        }
        if primary.n_flags() == 0 {
            return Err(ProtocolError::NoFlag);
        }
        if recovery.n_flags() != 0 {
            return Err(ProtocolError::FlaggedRecovery);
        }
        let (pz, rz) = match primary.basis {
            Basis::Z => (primary, recovery),
            Basis::X => (primary.dualize(), recovery.dualize()),
        };
        let (px, rx) = (pz.dualize(), rz.dualize());
        Ok(Self {
            primary: [Gadget::new(pz), Gadget::new(px)],
            recovery: [Gadget::new(rx), Gadget::new(rz)],
            decoder,
        })
    }

    /// The shipped circuits and their derived tables.
    pub fn canonical() -> Self {
        Self::new(canonical::primary(), canonical::recovery(), canonical::decoder())
            .expect("shipped circuits form a protocol")
    }

    pub fn decoder(&self) -> &Decoder {
        &self.decoder
    }

    /// Same circuits, different tables.
    pub fn with_decoder(&self, decoder: Decoder) -> Self {
        Self {
            decoder,
            ..self.clone()
        }
    }

    pub fn primary(&self, basis: Basis) -> &Gadget {
        &self.primary[idx(basis)]
    }

    /// The recovery gadget run after a flag in a `basis` primary run.
    pub fn recovery_after(&self, basis: Basis) -> &Gadget {
        &self.recovery[idx(basis)]
    }

    /// One cycle with every circuit executed by `exec`.
    pub fn run_cycle_with<F>(&self, basis: Basis, frame: &PauliOperator, mut exec: F) -> (CycleOutcome, PauliOperator)
    where
        F: FnMut(Stage, &Gadget, &PauliOperator) -> RunOutput,
    {
        let p = self.primary(basis);
        let out = exec(Stage::Primary, p, frame);
        if !out.flagged() {
            let s = p.circuit.syndrome_map.raw_to_syndrome(out.bits);
            let corr = self.decoder.for_unflagged(basis).decode_standard(s);
            let outcome = CycleOutcome {
                basis,
                flag_raised: false,
                branch: Branch::Standard,
                applied_correction: corr,
                bits: out.bits,
            };
            return (outcome, out.frame * corr);
        }
        let r = self.recovery_after(basis);
        let rout = exec(Stage::Recovery, r, &out.frame);
        let s = r.circuit.syndrome_map.raw_to_syndrome(rout.bits);
        let corr = self.decoder.for_flagged(basis).decode_remap(s);
        let outcome = CycleOutcome {
            basis,
            flag_raised: true,
            branch: Branch::Recovery,
            applied_correction: corr,
            bits: rout.bits,
        };
        (outcome, rout.frame * corr)
    }

    pub fn run_cycle<R: Rng>(
        &self,
        basis: Basis,
        frame: &PauliOperator,
        noise: &NoiseParams,
        rng: &mut R,
    ) -> (CycleOutcome, PauliOperator) {
        self.run_cycle_with(basis, frame, |_, g, f| g.compiled.sample(f, noise, rng))
    }

    /// `n_cycles` alternating cycles from the codespace, then perfect
    /// extraction and lookup decoding in both bases. `exec` receives the
    /// cycle index as well.
    pub fn run_experiment_with<F>(&self, n_cycles: usize, order: BasisOrder, mut exec: F) -> ShotRecord
    where
        F: FnMut(usize, Stage, &Gadget, &PauliOperator) -> RunOutput,
    {
        let mut frame = PauliOperator::identity(N_DATA);
        let mut flags_raised = 0;
        for i in 0..n_cycles {
            let (o, f) = self.run_cycle_with(order.basis_of_cycle(i), &frame, |st, g, fr| exec(i, st, g, fr));
            flags_raised += o.flag_raised as usize;
            frame = f;
        }
        ShotRecord {
            n_cycles,
            flags_raised,
            final_frame: frame,
            class: classify_after_ideal_decoding(&frame),
        }
    }

    pub fn run_experiment<R: Rng>(
        &self,
        n_cycles: usize,
        order: BasisOrder,
        noise: &NoiseParams,
        rng: &mut R,
    ) -> Result<ShotRecord, ProtocolError> {
        if n_cycles == 0 {
            return Err(ProtocolError::NoCycles);
        }
        Ok(self.run_experiment_with(n_cycles, order, |_, _, g, f| g.compiled.sample(f, noise, rng)))
    }

    /// Every single fault of a first cycle in either basis — a data error
    /// entering it or one fault in its primary circuit — followed by a
    /// noiseless second cycle. Returns the runs that end in a logical error.
    pub fn single_fault_failures(&self) -> Vec<SingleFaultFailure> {
        let mut out = Vec::new();
        for order in [BasisOrder::ZX, BasisOrder::XZ] {
            let basis = order.basis_of_cycle(0);
            for q in 0..N_DATA {
                for p in [Pauli::X, Pauli::Y, Pauli::Z] {
                    let e = PauliOperator::single(N_DATA, q, p).expect("data qubit");
                    let rec = self.run_experiment_with(2, order, |i, _, g, f| {
                        let f = if i == 0 && g.circuit.n_flags() > 0 { *f * e } else { *f };
                        g.compiled.noiseless(&f)
                    });
                    if rec.failed() {
                        out.push(SingleFaultFailure {
                            basis,
                            description: format!("data error {e}"),
                            class: rec.class,
                        });
                    }
                }
            }
            let p = self.primary(basis);
            for loc in fault_locations(&p.circuit) {
                let rec = self.run_experiment_with(2, order, |i, st, g, f| match (i, st) {
                    (0, Stage::Primary) => run_deterministic_fault(&g.circuit, &loc, f),
                    _ => g.compiled.noiseless(f),
                });
                if rec.failed() {
                    out.push(SingleFaultFailure {
                        basis,
                        description: loc.describe(&p.circuit.register),
                        class: rec.class,
                    });
                }
            }
        }
        out
    }

    /// The fault locations of the primary circuit in `basis`.
    pub fn primary_faults(&self, basis: Basis) -> Vec<FaultLocation> {
        fault_locations(&self.primary(basis).circuit)
    }
}
