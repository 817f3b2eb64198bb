//! Exhaustive single-fault analysis. Effects are computed by Heisenberg
//! back-propagation of every measured and final observable to the fault's
//! time point, independently of the forward frame simulator.

use std::fmt;

use crate::circuit::{qubit_name, Basis, Circuit, Instruction, Slot, TimePoint};
use crate::decoder::Decoder;
use crate::pauli::{Pauli, PauliOperator, QubitRegister};
use crate::sim::run_noiseless;
use crate::stabilizer::{reduce_mod_stabilizers, reduced_weights, Reduction, N_DATA};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Site {
    /// Right after a CNOT, on its two qubits.
    Gate {
        control: usize,
        target: usize,
    },
    AfterReset(usize),
    BeforeMeasure(usize),
    /// On a live qubit left untouched by the layer.
    Idle(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FaultLocation {
    pub layer: usize,
    pub site: Site,
    /// The injected Pauli over the whole register.
    pub pauli: PauliOperator,
}

impl FaultLocation {
    pub fn new(layer: usize, site: Site, pauli: PauliOperator) -> Self {
        Self { layer, site, pauli }
    }

    pub fn time(&self) -> TimePoint {
        match self.site {
            Site::BeforeMeasure(_) => TimePoint::before(self.layer),
            _ => TimePoint::after(self.layer),
        }
    }

    pub fn describe(&self, reg: &QubitRegister) -> String {
        let n = |q| qubit_name(reg, q);
        let site = match self.site {
            Site::Gate { control, target } => format!("after CX {} {}", n(control), n(target)),
            Site::AfterReset(q) => format!("after reset of {}", n(q)),
            Site::BeforeMeasure(q) => format!("before measuring {}", n(q)),
            Site::Idle(q) => format!("idle {}", n(q)),
        };
        let mut paulis = Vec::new();
        for q in 0..reg.len() {
            match self.pauli.get(q) {
                Pauli::I => {}
                p => paulis.push(format!("{p:?}({})", n(q))),
            }
        }
        format!("layer {} {site}: {}", self.layer, paulis.join(" "))
    }
}

/// Every single-fault location: the 15 nontrivial Pauli pairs after each
/// CNOT and the 3 single-qubit Paulis after each reset, before each
/// measurement and on each idle qubit.
pub fn fault_locations(c: &Circuit) -> Vec<FaultLocation> {
    let n = c.register.len();
    let single = |q: usize| {
        Pauli::NON_IDENTITY
            .iter()
            .map(move |&p| PauliOperator::single(n, q, p).expect("qubit in register"))
    };
    let mut out = Vec::new();
    for (l, layer) in c.layers.iter().enumerate() {
        for ins in layer {
            match *ins {
                Instruction::Cnot { control, target } => {
                    for pc in [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z] {
                        for pt in [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z] {
                            if pc == Pauli::I && pt == Pauli::I {
                                continue;
                            }
                            let a = PauliOperator::single(n, control, pc).expect("in register");
                            let b = PauliOperator::single(n, target, pt).expect("in register");
                            out.push(FaultLocation::new(l, Site::Gate { control, target }, a * b));
                        }
                    }
                }
                Instruction::ResetZ(q) | Instruction::ResetX(q) => {
                    out.extend(single(q).map(|p| FaultLocation::new(l, Site::AfterReset(q), p)));
                }
                Instruction::MeasureZ(q, _) | Instruction::MeasureX(q, _) => {
                    out.extend(single(q).map(|p| FaultLocation::new(l, Site::BeforeMeasure(q), p)));
                }
            }
        }
        for q in c.idle_qubits(l) {
            out.extend(single(q).map(|p| FaultLocation::new(l, Site::Idle(q), p)));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaultEffect {
    pub location: FaultLocation,
    /// Error left on the data qubits at the end of the circuit.
    pub residual_data: PauliOperator,
    /// Flipped syndrome slots (bit `i` ↔ `b{i}`).
    pub bit_flips: u64,
    /// Flipped flag slots (bit `i` ↔ `flag{i}`).
    pub flag_flips: u64,
    pub flag_flip: bool,
    pub reduction: Reduction,
    /// Stabilizer-reduced weights of the X part and Z part.
    pub reduced_weights: (u32, u32),
}

impl FaultEffect {
    /// The lookup decoder would mishandle this residual on its own.
    pub fn is_dangerous(&self) -> bool {
        self.reduced_weights.0 >= 2 || self.reduced_weights.1 >= 2
    }
}

fn anticommutes(a: &PauliOperator, b: &PauliOperator) -> bool {
    !a.commutes(b).expect("same register")
}

pub fn propagate(c: &Circuit, f: &FaultLocation) -> FaultEffect {
    let n = c.register.len();
    let t = f.time();
    let end = TimePoint::before(c.depth());
    let (mut bit_flips, mut flag_flips) = (0u64, 0u64);
    for (l, q, basis, slot) in c.measurements() {
        let at = TimePoint::before(l);
        if at < t {
            continue;
        }
        let obs = match basis {
            Basis::Z => PauliOperator::from_masks(n, 0, 1 << q),
            Basis::X => PauliOperator::from_masks(n, 1 << q, 0),
        };
        if anticommutes(&c.backprop(obs, at, t), &f.pauli) {
            match slot {
                Slot::Bit(i) => bit_flips |= 1 << i,
                Slot::Flag(i) => flag_flips |= 1 << i,
            }
        }
    }
    let (mut rx, mut rz) = (0u64, 0u64);
    for j in 0..N_DATA {
        let zj = PauliOperator::from_masks(n, 0, 1 << j);
        if anticommutes(&c.backprop(zj, end, t), &f.pauli) {
            rx |= 1 << j;
        }
        let xj = PauliOperator::from_masks(n, 1 << j, 0);
        if anticommutes(&c.backprop(xj, end, t), &f.pauli) {
            rz |= 1 << j;
        }
    }
    let residual_data = PauliOperator::from_masks(N_DATA, rx, rz);
    FaultEffect {
        location: *f,
        residual_data,
        bit_flips,
        flag_flips,
        flag_flip: flag_flips != 0,
        reduction: reduce_mod_stabilizers(&residual_data).expect("data-only residual"),
        reduced_weights: reduced_weights(&residual_data),
    }
}

pub fn all_effects(c: &Circuit) -> Vec<FaultEffect> {
    fault_locations(c).iter().map(|f| propagate(c, f)).collect()
}

/// Single faults whose residual has stabilizer-reduced weight ≥ 2 in either
/// Pauli type.
pub fn dangerous_faults(c: &Circuit) -> Vec<FaultEffect> {
    all_effects(c).into_iter().filter(FaultEffect::is_dangerous).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Clause {
    /// A single incoming data error, noiseless extraction.
    DataError,
    /// A single internal fault that leaves the flag down.
    Unflagged,
    /// A single internal fault that raises the flag.
    Flagged,
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Clause::DataError => "(i)",
            Clause::Unflagged => "(ii)(a)",
            Clause::Flagged => "(ii)(b)",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub clause: Clause,
    pub basis: Basis,
    pub description: String,
    /// Data error left after the cycle's correction.
    pub residual: PauliOperator,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FtReport {
    pub counterexamples: Vec<Counterexample>,
    pub data_errors_checked: usize,
    pub unflagged_checked: usize,
    pub flagged_checked: usize,
}

impl FtReport {
    pub fn passes(&self, clause: Clause) -> bool {
        !self.counterexamples.iter().any(|c| c.clause == clause)
    }

    pub fn all_pass(&self) -> bool {
        self.counterexamples.is_empty()
    }

    pub fn summary(&self) -> String {
        let word = |c| if self.passes(c) { "PASS" } else { "FAIL" };
        format!(
            "(i) {} (ii)(a) {} (ii)(b) {}",
            word(Clause::DataError),
            word(Clause::Unflagged),
            word(Clause::Flagged)
        )
    }
}

impl fmt::Display for FtReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.summary())?;
        writeln!(
            f,
            "checked: {} data errors, {} unflagged faults, {} flagged faults",
            self.data_errors_checked, self.unflagged_checked, self.flagged_checked
        )?;
        for c in &self.counterexamples {
            writeln!(
                f,
                "{} basis={} {} -> residual {}",
                c.clause, c.basis, c.description, c.residual
            )?;
        }
        Ok(())
    }
}

fn correction_op(t: Pauli, p: &PauliOperator) -> PauliOperator {
    match t {
        Pauli::X => p.x_part(),
        _ => p.z_part(),
    }
}

/// Checks the three single-fault conditions for the primary/recovery pair in
/// the primary's basis and in the dual basis:
///
/// * every single data error is fully corrected by one noiseless cycle;
/// * every unflagged internal fault, after the standard correction, leaves
///   at most weight one of each Pauli type (up to stabilizers);
/// * every flagged internal fault, followed by a noiseless recovery run in
///   the dual basis and the remapped correction, does the same.
pub fn verify_ft_conditions(primary: &Circuit, recovery: &Circuit, decoder: &Decoder) -> FtReport {
    let mut report = FtReport::default();
    for (p, r) in [
        (primary.clone(), recovery.clone()),
        (primary.dualize(), recovery.dualize()),
    ] {
        check_basis(&p, &r, decoder, &mut report);
    }
    report
}

fn check_basis(primary: &Circuit, recovery: &Circuit, decoder: &Decoder, report: &mut FtReport) {
    let basis = primary.basis;
    let standard = decoder.for_unflagged(basis);
    let remap = decoder.for_flagged(basis);
    let rec_dual = recovery.dualize();
    let reg = primary.register;
    let weights_ok = |e: &PauliOperator| {
        let (wx, wz) = reduced_weights(e);
        wx <= 1 && wz <= 1
    };

    for q in 0..N_DATA {
        for p in Pauli::NON_IDENTITY {
            let e = PauliOperator::single(N_DATA, q, p).expect("data qubit");
            let out = run_noiseless(primary, &e);
            let s = primary.syndrome_map.raw_to_syndrome(out.bits);
            let residual = out.frame * standard.decode_standard(s);
            let detected = correction_op(basis.detects(), &residual);
            report.data_errors_checked += 1;
            let (wx, wz) = reduced_weights(&detected);
            if out.flagged() || wx + wz != 0 || !weights_ok(&residual) {
                report.counterexamples.push(Counterexample {
                    clause: Clause::DataError,
                    basis,
                    description: format!("data error {e}"),
                    residual,
                });
            }
        }
    }

    for f in fault_locations(primary) {
        let eff = propagate(primary, &f);
        let (clause, residual) = if eff.flag_flip {
            report.flagged_checked += 1;
            let out = run_noiseless(&rec_dual, &eff.residual_data);
            let s = rec_dual.syndrome_map.raw_to_syndrome(out.bits);
            (Clause::Flagged, out.frame * remap.decode_remap(s))
        } else {
            report.unflagged_checked += 1;
            let s = primary.syndrome_map.raw_to_syndrome(eff.bit_flips);
            (Clause::Unflagged, eff.residual_data * standard.decode_standard(s))
        };
        if !weights_ok(&residual) {
            report.counterexamples.push(Counterexample {
                clause,
                basis,
                description: f.describe(&reg),
                residual,
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical;
    use crate::circuit::Circuit;

    const NAIVE: &str = "\
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

    #[test]
    fn location_count_is_exact() {
        let c: Circuit = NAIVE.parse().unwrap();
        let idle: usize = (0..c.depth()).map(|l| c.idle_qubits(l).len()).sum();
        let expected = 15 * 12 + 3 * (3 + 3) + 3 * idle;
        assert_eq!(fault_locations(&c).len(), expected);
    }

    #[test]
    fn z_after_last_cnot_on_ancilla_only_flips_its_bit() {
        let c: Circuit = NAIVE.parse().unwrap();
        let r = c.register;
        // X fault on a0 right after its last CNOT: flips b0, no data effect
        let (l, _) = c
            .layers
            .iter()
            .enumerate()
            .rfind(|(_, ls)| {
                ls.iter()
                    .any(|i| matches!(i, Instruction::Cnot { target, .. } if *target == r.ancilla(0)))
            })
            .unwrap();
        let f = FaultLocation::new(
            l,
            Site::Gate {
                control: r.data(3),
                target: r.ancilla(0),
            },
            PauliOperator::from_masks(r.len(), 1 << r.ancilla(0), 0),
        );
        let e = propagate(&c, &f);
        assert!(e.residual_data.is_identity());
        assert_eq!(e.bit_flips, 0b001);
        // a Z there does nothing at all
        let f = FaultLocation::new(l, f.site, PauliOperator::from_masks(r.len(), 0, 1 << r.ancilla(0)));
        let e = propagate(&c, &f);
        assert!(e.residual_data.is_identity());
        assert_eq!(e.bit_flips, 0);
    }

    #[test]
    fn hook_faults_on_the_naive_circuit() {
        let c: Circuit = NAIVE.parse().unwrap();
        let d = dangerous_faults(&c);
        assert!(!d.is_empty());
        assert!(d.iter().all(|e| !e.flag_flip));
    }

    #[test]
    fn canonical_primary_flags_every_dangerous_fault() {
        let c = canonical::primary();
        let d = dangerous_faults(&c);
        assert!(!d.is_empty());
        assert!(d.iter().all(|e| e.flag_flip));
        let unflagged_ok = all_effects(&c)
            .iter()
            .filter(|e| !e.flag_flip)
            .all(|e| e.reduced_weights.0 <= 1 && e.reduced_weights.1 <= 1);
        assert!(unflagged_ok);
    }

    #[test]
    fn dangerous_z_parts_are_two_hook_pairs() {
        let c = canonical::primary();
        let mut reps: Vec<String> = dangerous_faults(&c)
            .iter()
            .map(|e| {
                let z = PauliOperator::from_masks(7, 0, e.residual_data.z_bits());
                reduce_mod_stabilizers(&z).unwrap().min_weight_rep.to_string()
            })
            .filter(|r| r.len() > 2)
            .collect();
        reps.sort();
        reps.dedup();
        assert_eq!(reps, vec!["Z1.Z2", "Z2.Z5"]);
    }

    #[test]
    fn recovery_circuit_is_not_fault_tolerant() {
        assert!(!dangerous_faults(&canonical::recovery()).is_empty());
    }
}
