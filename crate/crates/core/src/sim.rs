//! Pauli-frame execution of circuits: noiseless, single-fault, layer-by-layer
//! noisy, and a compiled sampler that draws faults by geometric skipping and
//! sums their precomputed effects.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{conjugate_cnot, Circuit, Instruction, Slot, TimePoint};
use crate::faults::{propagate, FaultLocation, Site};
use crate::pauli::PauliOperator;
use crate::stabilizer::N_DATA;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NoiseError {
    #[error("probability {name}={value} is outside [0, 1]")]
    OutOfRange { name: &'static str, value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    /// Two-qubit depolarizing probability after each CNOT.
    pub p2: f64,
    /// Measurement flip probability.
    pub p_spam: f64,
    /// Z error probability on each idle qubit per layer.
    pub p_mem: f64,
}

impl NoiseParams {
    pub fn new(p2: f64, p_spam: f64, p_mem: f64) -> Result<Self, NoiseError> {
        for (name, value) in [("p2", p2), ("p_spam", p_spam), ("p_mem", p_mem)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(NoiseError::OutOfRange { name, value });
            }
        }
        Ok(Self { p2, p_spam, p_mem })
    }

    /// `p2 = p_spam = p`, `p_mem = p / 10`.
    pub fn from_phys(p: f64) -> Result<Self, NoiseError> {
        Self::new(p, p, 0.1 * p)
    }

    pub fn noiseless() -> Self {
        Self {
            p2: 0.0,
            p_spam: 0.0,
            p_mem: 0.0,
        }
    }

    pub fn is_noiseless(&self) -> bool {
        self.p2 == 0.0 && self.p_spam == 0.0 && self.p_mem == 0.0
    }
}

/// Outcome of one circuit execution relative to the noiseless run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RunOutput {
    /// Syndrome bit flips, bit `i` for slot `b{i}`.
    pub bits: u64,
    /// Flag flips, bit `i` for slot `flag{i}`.
    pub flags: u64,
    /// Pauli frame left on the data qubits.
    pub frame: PauliOperator,
}

impl RunOutput {
    pub fn flagged(&self) -> bool {
        self.flags != 0
    }
}

/// Nontrivial two-qubit Pauli number `k` in 1..16 as (control, target) bits.
fn two_qubit_pauli(k: u32) -> ((bool, bool), (bool, bool)) {
    let bit = |i: u32| (k >> i) & 1 == 1;
    ((bit(0), bit(1)), (bit(2), bit(3)))
}

fn inject(frame: &mut PauliOperator, q: usize, x: bool, z: bool) {
    let fx = frame.x_bits() ^ ((x as u64) << q);
    let fz = frame.z_bits() ^ ((z as u64) << q);
    *frame = PauliOperator::from_masks(frame.num_qubits(), fx, fz);
}

struct Hooks<'a, R: Rng> {
    noise: Option<(NoiseParams, &'a mut R)>,
    fault: Option<&'a FaultLocation>,
    trace: Option<&'a mut Vec<FaultLocation>>,
}

impl<R: Rng> Hooks<'_, R> {
    fn record(&mut self, layer: usize, site: Site, n: usize, q: usize, x: bool, z: bool) {
        if let Some(t) = self.trace.as_mut() {
            let mut p = PauliOperator::identity(n);
            inject(&mut p, q, x, z);
            if let Some(last) = t.last_mut().filter(|f| f.layer == layer && f.site == site) {
                last.pauli = last.pauli * p;
            } else {
                t.push(FaultLocation::new(layer, site, p));
            }
        }
    }
}

fn execute<R: Rng>(c: &Circuit, frame_in: &PauliOperator, mut hooks: Hooks<'_, R>) -> RunOutput {
    let n = c.register.len();
    let mut frame = frame_in.truncate(N_DATA).extend(n);
    let (mut bits, mut flags) = (0u64, 0u64);
    let inject_at = |frame: &mut PauliOperator, f: Option<&FaultLocation>, t: TimePoint| {
        if let Some(f) = f {
            if f.time() == t {
                *frame = *frame * f.pauli;
            }
        }
    };
    for (l, layer) in c.layers.iter().enumerate() {
        inject_at(&mut frame, hooks.fault, TimePoint::before(l));
        for ins in layer {
            match *ins {
                Instruction::ResetZ(q) | Instruction::ResetX(q) => {
                    let keep = !(1u64 << q);
                    frame = PauliOperator::from_masks(n, frame.x_bits() & keep, frame.z_bits() & keep);
                }
                Instruction::Cnot { control, target } => {
                    conjugate_cnot(&mut frame, control, target);
                    let mut hit = None;
                    if let Some((noise, rng)) = hooks.noise.as_mut() {
                        if noise.p2 > 0.0 && rng.random_bool(noise.p2) {
                            hit = Some(two_qubit_pauli(rng.random_range(1..16)));
                        }
                    }
                    if let Some(((cx, cz), (tx, tz))) = hit {
                        inject(&mut frame, control, cx, cz);
                        inject(&mut frame, target, tx, tz);
                        let site = Site::Gate { control, target };
                        hooks.record(l, site, n, control, cx, cz);
                        hooks.record(l, site, n, target, tx, tz);
                    }
                }
                Instruction::MeasureZ(q, s) | Instruction::MeasureX(q, s) => {
                    let z_basis = matches!(ins, Instruction::MeasureZ(..));
                    let mut flip = if z_basis {
                        frame.x_bits() >> q & 1
                    } else {
                        frame.z_bits() >> q & 1
                    };
                    let mut hit = false;
                    if let Some((noise, rng)) = hooks.noise.as_mut() {
                        hit = noise.p_spam > 0.0 && rng.random_bool(noise.p_spam);
                    }
                    if hit {
                        flip ^= 1;
                        hooks.record(l, Site::BeforeMeasure(q), n, q, z_basis, !z_basis);
                    }
                    match s {
                        Slot::Bit(i) => bits |= flip << i,
                        Slot::Flag(i) => flags |= flip << i,
                    }
                }
            }
        }
        inject_at(&mut frame, hooks.fault, TimePoint::after(l));
        let mut idle_hits = Vec::new();
        if let Some((noise, rng)) = hooks.noise.as_mut() {
            if noise.p_mem > 0.0 {
                idle_hits.extend(c.idle_qubits(l).into_iter().filter(|_| rng.random_bool(noise.p_mem)));
            }
        }
        for q in idle_hits {
            inject(&mut frame, q, false, true);
            hooks.record(l, Site::Idle(q), n, q, false, true);
        }
    }
    RunOutput {
        bits,
        flags,
        frame: frame.truncate(N_DATA),
    }
}

/// Noiseless execution; a pure function of the incoming data frame.
pub fn run_noiseless(c: &Circuit, frame_in: &PauliOperator) -> RunOutput {
    execute::<rand_chacha::ChaCha8Rng>(
        c,
        frame_in,
        Hooks {
            noise: None,
            fault: None,
            trace: None,
        },
    )
}

/// Noiseless execution with exactly one injected fault.
pub fn run_deterministic_fault(c: &Circuit, f: &FaultLocation, frame_in: &PauliOperator) -> RunOutput {
    execute::<rand_chacha::ChaCha8Rng>(
        c,
        frame_in,
        Hooks {
            noise: None,
            fault: Some(f),
            trace: None,
        },
    )
}

/// Layer-by-layer noisy execution: depolarizing after each CNOT, flips on
/// measurements, Z on idle qubits after each layer.
pub fn run_noisy<R: Rng>(c: &Circuit, frame_in: &PauliOperator, noise: &NoiseParams, rng: &mut R) -> RunOutput {
    execute(
        c,
        frame_in,
        Hooks {
            noise: Some((*noise, rng)),
            fault: None,
            trace: None,
        },
    )
}

/// [`run_noisy`] that also returns the injected faults, in order. Its random
/// draws are identical, so the same seed gives the same run.
pub fn run_noisy_traced<R: Rng>(
    c: &Circuit,
    frame_in: &PauliOperator,
    noise: &NoiseParams,
    rng: &mut R,
) -> (RunOutput, Vec<FaultLocation>) {
    let mut trace = Vec::new();
    let out = execute(
        c,
        frame_in,
        Hooks {
            noise: Some((*noise, rng)),
            fault: None,
            trace: Some(&mut trace),
        },
    );
    (out, trace)
}

#[derive(Debug, Clone, Copy)]
struct Effect {
    bits: u64,
    flags: u64,
    x: u64,
    z: u64,
}

impl Effect {
    fn of(f: &FaultLocation, c: &Circuit) -> Self {
        let e = propagate(c, f);
        Effect {
            bits: e.bit_flips,
            flags: e.flag_flips,
            x: e.residual_data.x_bits(),
            z: e.residual_data.z_bits(),
        }
    }
}

/// A circuit with every noise site's effect precomputed. Sampling picks the
/// faulty sites of each channel with geometric skips, so a shot costs time
/// proportional to the number of faults rather than the circuit size.
#[derive(Debug, Clone)]
pub struct CompiledCircuit {
    /// Each CNOT: the 15 nontrivial Pauli pairs.
    gates: Vec<[Effect; 15]>,
    /// Each measurement flip.
    measures: Vec<Effect>,
    /// Each (layer, idle qubit) Z error.
    idles: Vec<Effect>,
    /// Response to X and Z on each data qubit entering the circuit.
    input_x: [Effect; N_DATA],
    input_z: [Effect; N_DATA],
}

impl CompiledCircuit {
    pub fn new(c: &Circuit) -> Self {
        let n = c.register.len();
        let mut gates = Vec::new();
        let mut measures = Vec::new();
        let mut idles = Vec::new();
        for (l, layer) in c.layers.iter().enumerate() {
            for ins in layer {
                match *ins {
                    Instruction::Cnot { control, target } => {
                        let table = std::array::from_fn(|k| {
                            let ((cx, cz), (tx, tz)) = two_qubit_pauli(k as u32 + 1);
                            let mut p = PauliOperator::identity(n);
                            inject(&mut p, control, cx, cz);
                            inject(&mut p, target, tx, tz);
                            Effect::of(&FaultLocation::new(l, Site::Gate { control, target }, p), c)
                        });
                        gates.push(table);
                    }
                    Instruction::MeasureZ(q, _) | Instruction::MeasureX(q, _) => {
                        let mut p = PauliOperator::identity(n);
                        let z_basis = matches!(ins, Instruction::MeasureZ(..));
                        inject(&mut p, q, z_basis, !z_basis);
                        measures.push(Effect::of(&FaultLocation::new(l, Site::BeforeMeasure(q), p), c));
                    }
                    _ => {}
                }
            }
            for q in c.idle_qubits(l) {
                let p = PauliOperator::from_masks(n, 0, 1 << q);
                idles.push(Effect::of(&FaultLocation::new(l, Site::Idle(q), p), c));
            }
        }
        let input = |x: bool, j: usize| {
            let p = if x {
                PauliOperator::from_masks(N_DATA, 1 << j, 0)
            } else {
                PauliOperator::from_masks(N_DATA, 0, 1 << j)
            };
            let o = run_noiseless(c, &p);
            Effect {
                bits: o.bits,
                flags: o.flags,
                x: o.frame.x_bits(),
                z: o.frame.z_bits(),
            }
        };
        CompiledCircuit {
            gates,
            measures,
            idles,
            input_x: std::array::from_fn(|j| input(true, j)),
            input_z: std::array::from_fn(|j| input(false, j)),
        }
    }

    pub fn noiseless(&self, frame_in: &PauliOperator) -> RunOutput {
        let mut acc = Effect {
            bits: 0,
            flags: 0,
            x: 0,
            z: 0,
        };
        let (fx, fz) = (frame_in.x_bits(), frame_in.z_bits());
        for j in 0..N_DATA {
            if fx >> j & 1 == 1 {
                acc.add(&self.input_x[j]);
            }
            if fz >> j & 1 == 1 {
                acc.add(&self.input_z[j]);
            }
        }
        acc.output()
    }

    /// One noisy execution, statistically equivalent to [`run_noisy`].
    pub fn sample<R: Rng>(&self, frame_in: &PauliOperator, noise: &NoiseParams, rng: &mut R) -> RunOutput {
        let mut out = self.noiseless(frame_in);
        let mut acc = Effect {
            bits: out.bits,
            flags: out.flags,
            x: out.frame.x_bits(),
            z: out.frame.z_bits(),
        };
        for_each_hit(self.gates.len(), noise.p2, rng, |i, rng| {
            acc.add(&self.gates[i][rng.random_range(0..15)]);
        });
        for_each_hit(self.measures.len(), noise.p_spam, rng, |i, _| {
            acc.add(&self.measures[i])
        });
        for_each_hit(self.idles.len(), noise.p_mem, rng, |i, _| acc.add(&self.idles[i]));
        out = acc.output();
        out
    }

    pub fn n_noise_sites(&self) -> (usize, usize, usize) {
        (self.gates.len(), self.measures.len(), self.idles.len())
    }
}

impl Effect {
    fn add(&mut self, o: &Effect) {
        self.bits ^= o.bits;
        self.flags ^= o.flags;
        self.x ^= o.x;
        self.z ^= o.z;
    }

    fn output(&self) -> RunOutput {
        RunOutput {
            bits: self.bits,
            flags: self.flags,
            frame: PauliOperator::from_masks(N_DATA, self.x, self.z),
        }
    }
}

/// Calls `hit` for each of `n` independent sites that fires with probability
/// `p`, jumping between hits with geometrically distributed gaps.
fn for_each_hit<R: Rng>(n: usize, p: f64, rng: &mut R, mut hit: impl FnMut(usize, &mut R)) {
    if p <= 0.0 || n == 0 {
        return;
    }
    if p >= 1.0 {
        for i in 0..n {
            hit(i, rng);
        }
        return;
    }
    let log_q = (-p).ln_1p();
    let mut i = 0usize;
    loop {
        let u: f64 = rng.random();
        // u in [0,1); 1-u in (0,1]
        let gap = ((1.0 - u).ln() / log_q).floor();
        if gap >= (n - i) as f64 {
            return;
        }
        i += gap as usize;
        hit(i, rng);
        i += 1;
        if i >= n {
            return;
        }
    }
}
