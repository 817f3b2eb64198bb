use steane_se::canonical;
use steane_se::faults::{dangerous_faults, propagate};
use steane_se::pauli::PauliOperator;
use steane_se::protocol::{BasisOrder, Protocol, Stage};
use steane_se::sim::run_deterministic_fault;
use steane_se::stabilizer::LogicalClass;

/// Three cycles; the fault sits in the primary circuit of cycle `at`.
fn with_fault(p: &Protocol, order: BasisOrder, at: usize, loc: &steane_se::faults::FaultLocation) -> LogicalClass {
    p.run_experiment_with(3, order, |i, st, g, f| match (i == at, st) {
        (true, Stage::Primary) => run_deterministic_fault(&g.circuit, loc, f),
        _ => g.compiled.noiseless(f),
    })
    .class
}

#[test]
fn every_dangerous_fault_is_harmless_end_to_end() {
    let p = Protocol::canonical();
    for order in [BasisOrder::ZX, BasisOrder::XZ] {
        for at in 0..3 {
            let basis = order.basis_of_cycle(at);
            let d = dangerous_faults(&p.primary(basis).circuit);
            assert!(!d.is_empty());
            for e in d {
                assert!(!with_fault(&p, order, at, &e.location).is_logical());
            }
        }
    }
}

#[test]
fn every_single_fault_is_harmless_in_any_cycle() {
    let p = Protocol::canonical();
    for order in [BasisOrder::ZX, BasisOrder::XZ] {
        for at in 0..3 {
            for loc in p.primary_faults(order.basis_of_cycle(at)) {
                assert!(!with_fault(&p, order, at, &loc).is_logical(), "{loc:?}");
            }
        }
    }
}

#[test]
fn without_remap_the_hook_pair_becomes_a_logical_error() {
    let p = Protocol::canonical();
    let bad = p.with_decoder(p.decoder().without_remap());
    let c = &p.primary(steane_se::circuit::Basis::Z).circuit;
    let mut failures = 0;
    for e in dangerous_faults(c) {
        if e.residual_data.to_string() != "Z2.Z5" {
            continue;
        }
        // Z2 Z5 plus the lookup correction Z1 is a logical Z
        assert_eq!(with_fault(&bad, BasisOrder::ZX, 0, &e.location), LogicalClass::LogicalZ);
        assert!(!with_fault(&p, BasisOrder::ZX, 0, &e.location).is_logical());
        failures += 1;
    }
    assert!(failures > 0);
    assert!(!bad.single_fault_failures().is_empty());
}

#[test]
fn flagged_branch_ignores_primary_bits() {
    // identical recovery input, different primary bits: same correction
    let p = Protocol::canonical();
    let basis = steane_se::circuit::Basis::Z;
    let c = &p.primary(basis).circuit;
    let d = dangerous_faults(c);
    let e = &d[0];
    let id = PauliOperator::identity(7);
    let (o1, f1) = p.run_cycle_with(basis, &id, |st, g, f| match st {
        Stage::Primary => run_deterministic_fault(&g.circuit, &e.location, f),
        Stage::Recovery => g.compiled.noiseless(f),
    });
    let (o2, f2) = p.run_cycle_with(basis, &id, |st, g, f| match st {
        Stage::Primary => {
            let mut out = run_deterministic_fault(&g.circuit, &e.location, f);
            out.bits ^= 0b111;
            out
        }
        Stage::Recovery => g.compiled.noiseless(f),
    });
    assert!(o1.flag_raised && o2.flag_raised);
    assert_eq!(o1.applied_correction, o2.applied_correction);
    assert_eq!(f1, f2);
    assert_eq!(propagate(c, &e.location).flag_flips, 1);
    assert_eq!(canonical::decoder(), *p.decoder());
}
