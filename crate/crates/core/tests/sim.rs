use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use steane_se::canonical;
use steane_se::circuit::{Basis, Circuit, Instruction};
use steane_se::faults::{fault_locations, propagate, Site};
use steane_se::pauli::PauliOperator;
use steane_se::sim::{
    run_deterministic_fault, run_noiseless, run_noisy, run_noisy_traced, CompiledCircuit, NoiseParams,
};
use steane_se::stabilizer::N_DATA;

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

fn naive() -> Circuit {
    NAIVE.parse().unwrap()
}

/// Recorded from the first run and checked by hand: one Pauli pair per CNOT,
/// and the final frame/bits follow from pushing each pair through the
/// remaining gates.
const GOLDEN: &str = "\
layer 1 after CX d1 a0: Y(d1)
layer 2 after CX d2 a0: Y(d2)
layer 3 after CX d3 a0: Y(d3)
layer 3 after CX d2 a1: Y(d2)
layer 4 after CX d4 a0: X(d4) X(a0)
layer 4 after CX d3 a1: Y(d3) Z(a1)
layer 5 after CX d5 a1: X(d5)
layer 5 after CX d3 a2: Y(d3) Z(a2)
layer 6 after CX d6 a1: Z(d6)
layer 6 after CX d4 a2: Z(d4) Z(a2)
layer 7 after CX d6 a2: X(d6) Y(a2)
layer 8 after CX d7 a2: Z(d7) X(a2)
";

#[test]
fn golden_p2_one() {
    let c = naive();
    let noise = NoiseParams::new(1.0, 0.0, 0.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (out, trace) = run_noisy_traced(&c, &PauliOperator::identity(N_DATA), &noise, &mut rng);
    let text: String = trace.iter().map(|f| f.describe(&c.register) + "\n").collect();
    assert_eq!(text, GOLDEN);
    assert_eq!(out.bits, 0b101);
    assert_eq!((out.frame.x_bits(), out.frame.z_bits()), (61, 21));
    // the untraced sampler consumes the same draws
    let again = run_noisy(
        &c,
        &PauliOperator::identity(N_DATA),
        &noise,
        &mut ChaCha8Rng::seed_from_u64(7),
    );
    assert_eq!(again, out);
}

#[test]
fn traced_faults_replay_to_the_same_output() {
    let c = canonical::primary();
    let noise = NoiseParams::new(0.05, 0.05, 0.05).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..2000 {
        let (out, trace) = run_noisy_traced(&c, &PauliOperator::identity(N_DATA), &noise, &mut rng);
        let (mut bits, mut flags) = (0, 0);
        let mut frame = PauliOperator::identity(N_DATA);
        for f in &trace {
            let e = propagate(&c, f);
            bits ^= e.bit_flips;
            flags ^= e.flag_flips;
            frame = frame * e.residual_data;
        }
        assert_eq!((out.bits, out.flags, out.frame), (bits, flags, frame));
    }
}

#[test]
fn injection_rate_on_one_cnot() {
    // first CNOT of the naive circuit, p2 = 0.1
    let c = naive();
    let noise = NoiseParams::new(0.1, 0.0, 0.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let shots = 1_000_000u32;
    let mut hits = 0u32;
    let mut per_pauli = [0u32; 16];
    for _ in 0..shots {
        let (_, trace) = run_noisy_traced(&c, &PauliOperator::identity(N_DATA), &noise, &mut rng);
        if let Some(f) = trace
            .iter()
            .find(|f| f.layer == 1 && matches!(f.site, Site::Gate { control: 0, .. }))
        {
            hits += 1;
            let (cx, cz) = (f.pauli.x_bits() & 1, f.pauli.z_bits() & 1);
            let t = c.register.ancilla(0);
            let (tx, tz) = (f.pauli.x_bits() >> t & 1, f.pauli.z_bits() >> t & 1);
            per_pauli[(cx | cz << 1 | tx << 2 | tz << 3) as usize] += 1;
        }
    }
    let sigma = (shots as f64 * 0.1 * 0.9).sqrt();
    assert!((hits as f64 - shots as f64 * 0.1).abs() < 3.0 * sigma, "{hits}");
    assert_eq!(per_pauli[0], 0);
    let each = hits as f64 / 15.0;
    for &k in &per_pauli[1..] {
        assert!((k as f64 - each).abs() < 4.0 * each.sqrt(), "{per_pauli:?}");
    }
}

#[test]
fn noiseless_single_error_decodes_to_its_qubit() {
    // a Z-basis primary run sees X errors
    let c = canonical::primary();
    assert_eq!(c.basis, Basis::Z);
    for q in 0..N_DATA {
        let e = PauliOperator::x_on(N_DATA, &[q]);
        let out = run_noiseless(&c, &e);
        assert_eq!(out.flags, 0);
        let s = c.syndrome_map.raw_to_syndrome(out.bits);
        assert_eq!(steane_se::stabilizer::qubit_for_syndrome(s), Some(q));
        assert_eq!(out.frame, e);
    }
    let out = run_noiseless(&c, &PauliOperator::identity(N_DATA));
    assert_eq!((out.bits, out.flags), (0, 0));
    assert!(out.frame.is_identity());
}

#[test]
fn hook_pair_faults_raise_the_flag() {
    let c = canonical::primary();
    let mut seen = 0;
    for f in fault_locations(&c) {
        let e = propagate(&c, &f);
        if e.residual_data.to_string() == "Z2.Z5" && e.is_dangerous() {
            seen += 1;
            assert_eq!(
                run_deterministic_fault(&c, &f, &PauliOperator::identity(N_DATA)).flags,
                1
            );
        }
    }
    assert!(seen > 0);
}

#[test]
fn compiled_sampler_matches_layer_sampler_in_distribution() {
    let c = canonical::primary();
    let compiled = CompiledCircuit::new(&c);
    let noise = NoiseParams::new(0.02, 0.01, 0.005).unwrap();
    let shots = 200_000;
    let stats = |f: &mut dyn FnMut() -> steane_se::sim::RunOutput| {
        let (mut flagged, mut any_bit, mut data) = (0f64, 0f64, 0f64);
        for _ in 0..shots {
            let o = f();
            flagged += o.flagged() as u8 as f64;
            any_bit += (o.bits != 0) as u8 as f64;
            data += (!o.frame.is_identity()) as u8 as f64;
        }
        [flagged / shots as f64, any_bit / shots as f64, data / shots as f64]
    };
    let id = PauliOperator::identity(N_DATA);
    let mut r1 = ChaCha8Rng::seed_from_u64(3);
    let mut r2 = ChaCha8Rng::seed_from_u64(4);
    let a = stats(&mut || run_noisy(&c, &id, &noise, &mut r1));
    let b = stats(&mut || compiled.sample(&id, &noise, &mut r2));
    for (x, y) in a.iter().zip(&b) {
        let sigma = (x * (1.0 - x) * 2.0 / shots as f64).sqrt();
        assert!((x - y).abs() < 5.0 * sigma, "{a:?} vs {b:?}");
    }
}

#[test]
fn idle_noise_reaches_data_during_ancilla_only_layers() {
    let c = naive();
    let last = c.layers.len() - 1;
    assert!(c.layers[last].iter().all(|i| matches!(i, Instruction::MeasureZ(..))));
    let idle = c.idle_qubits(last);
    assert!((0..N_DATA).all(|q| idle.contains(&q)));
}
