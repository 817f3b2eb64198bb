//! CNOT-count optimality search. The ancilla register is modelled as a 3×7
//! binary matrix (row i = data parity accumulated on ancilla i); a
//! data→ancilla CNOT flips one entry and an ancilla→ancilla CNOT adds one
//! row to another. BFS from the zero matrix gives exact CNOT minima; the
//! flag search then asks how many extra CNOTs onto one flag qubit are needed
//! to catch every ancilla Z fault that spreads to a weight-two data error.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::ops::ControlFlow;

use rand::Rng;
use thiserror::Error;

use crate::circuit::{Basis, Circuit, CircuitError, Instruction, Slot};
use crate::code::{steane_effective, steane_h, CheckMatrix, Syndrome};
use crate::decoder::Decoder;
use crate::faults::verify_ft_conditions;
use crate::pauli::QubitRegister;
use crate::stabilizer::{reduced_type_weight, StabilizerGroup};

pub const ROWS: usize = 3;
pub const COLS: usize = 7;
pub const N_STATES: usize = 1 << (ROWS * COLS);
const UNSEEN: u8 = u8::MAX;

/// Packed 3×7 matrix, entry (i, j) at bit 7i + j.
pub type MatrixState = u32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SearchError {
    #[error("empty move list")]
    Empty,
    #[error("moves do not reach a generating set of the checks")]
    WrongTarget,
    #[error("target must be 3×7")]
    Shape,
    #[error("target is unreachable")]
    Unreachable,
    #[error("no base circuit admits a fault-tolerant flag placement")]
    NoCandidate,
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

pub fn pack(m: &CheckMatrix) -> Result<MatrixState, SearchError> {
    if m.n_rows() != ROWS || m.n_cols() != COLS {
        return Err(SearchError::Shape);
    }
    Ok(m.rows()
        .iter()
        .enumerate()
        .fold(0, |acc, (i, &r)| acc | ((r as u32) << (COLS * i))))
}

pub fn unpack(s: MatrixState) -> CheckMatrix {
    CheckMatrix::from_rows(COLS, (0..ROWS).map(|i| ((s >> (COLS * i)) & 0x7f) as u64).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SearchMove {
    /// CNOT data `col` → ancilla `row`.
    EntryFlip { row: u8, col: u8 },
    /// CNOT ancilla `from` → ancilla `to`: row `to` += row `from`.
    RowAdd { from: u8, to: u8 },
}

const fn build_moves() -> [SearchMove; 27] {
    let mut out = [SearchMove::EntryFlip { row: 0, col: 0 }; 27];
    let mut k = 0;
    let mut i = 0;
    while i < ROWS {
        let mut j = 0;
        while j < COLS {
            out[k] = SearchMove::EntryFlip {
                row: i as u8,
                col: j as u8,
            };
            k += 1;
            j += 1;
        }
        i += 1;
    }
    let mut r = 0;
    while r < ROWS {
        let mut s = 0;
        while s < ROWS {
            if r != s {
                out[k] = SearchMove::RowAdd {
                    from: r as u8,
                    to: s as u8,
                };
                k += 1;
            }
            s += 1;
        }
        r += 1;
    }
    out
}

/// Entry flips row-major, then row additions in lexicographic order.
pub const MOVES: [SearchMove; 27] = build_moves();

impl SearchMove {
    #[inline]
    pub fn apply(self, s: MatrixState) -> MatrixState {
        match self {
            SearchMove::EntryFlip { row, col } => s ^ (1 << (COLS * row as usize + col as usize)),
            SearchMove::RowAdd { from, to } => {
                let r = (s >> (COLS * from as usize)) & 0x7f;
                s ^ (r << (COLS * to as usize))
            }
        }
    }

    pub fn touches(self, ancilla: u8) -> bool {
        match self {
            SearchMove::EntryFlip { row, .. } => row == ancilla,
            SearchMove::RowAdd { from, to } => from == ancilla || to == ancilla,
        }
    }

    pub fn to_instruction(self, reg: &QubitRegister) -> Instruction {
        match self {
            SearchMove::EntryFlip { row, col } => Instruction::cnot(reg.data(col as usize), reg.ancilla(row as usize)),
            SearchMove::RowAdd { from, to } => Instruction::cnot(reg.ancilla(from as usize), reg.ancilla(to as usize)),
        }
    }
}

impl fmt::Display for SearchMove {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SearchMove::EntryFlip { row, col } => write!(f, "E({row},{})", col + 1),
            SearchMove::RowAdd { from, to } => write!(f, "R({from}->{to})"),
        }
    }
}

/// Distances from the zero matrix to every state.
pub struct Bfs {
    dist: Vec<u8>,
}

impl Bfs {
    pub fn run() -> Self {
        let mut dist = vec![UNSEEN; N_STATES];
        let mut queue = VecDeque::with_capacity(N_STATES);
        dist[0] = 0;
        queue.push_back(0u32);
        while let Some(s) = queue.pop_front() {
            let d = dist[s as usize];
            for m in MOVES {
                let t = m.apply(s);
                if dist[t as usize] == UNSEEN {
                    dist[t as usize] = d + 1;
                    queue.push_back(t);
                }
            }
        }
        Self { dist }
    }

    pub fn distance(&self, s: MatrixState) -> Option<u32> {
        match self.dist[s as usize] {
            UNSEEN => None,
            d => Some(d as u32),
        }
    }

    /// Number of states at each distance.
    pub fn layer_sizes(&self) -> Vec<u64> {
        let mut out = Vec::new();
        for &d in &self.dist {
            if d == UNSEEN {
                continue;
            }
            if out.len() <= d as usize {
                out.resize(d as usize + 1, 0);
            }
            out[d as usize] += 1;
        }
        out
    }

    fn predecessors(&self, s: MatrixState) -> impl Iterator<Item = (SearchMove, MatrixState)> + '_ {
        let d = self.dist[s as usize];
        MOVES.into_iter().filter_map(move |m| {
            let p = m.apply(s);
            (d > 0 && self.dist[p as usize] == d - 1).then_some((m, p))
        })
    }

    /// The geodesic picked by always stepping back along the first move in
    /// [`MOVES`] order.
    pub fn geodesic(&self, target: MatrixState) -> Result<Vec<SearchMove>, SearchError> {
        self.distance(target).ok_or(SearchError::Unreachable)?;
        let mut s = target;
        let mut rev = Vec::new();
        while s != 0 {
            let (m, p) = self.predecessors(s).next().ok_or(SearchError::Unreachable)?;
            rev.push(m);
            s = p;
        }
        rev.reverse();
        Ok(rev)
    }

    /// A uniformly random step back at each state.
    pub fn random_geodesic<R: Rng>(&self, target: MatrixState, rng: &mut R) -> Vec<SearchMove> {
        let mut s = target;
        let mut rev = Vec::new();
        while s != 0 {
            let opts: Vec<_> = self.predecessors(s).collect();
            let (m, p) = opts[rng.random_range(0..opts.len())];
            rev.push(m);
            s = p;
        }
        rev.reverse();
        rev
    }

    /// Depth-first walk over every geodesic to `target` (deterministic order).
    /// With `single_coupling`, each data qubit may be coupled at most once.
    pub fn for_each_geodesic(
        &self,
        target: MatrixState,
        single_coupling: bool,
        mut visit: impl FnMut(&[SearchMove]) -> ControlFlow<()>,
    ) {
        fn go(
            bfs: &Bfs,
            s: MatrixState,
            used: u8,
            single: bool,
            rev: &mut Vec<SearchMove>,
            path: &mut Vec<SearchMove>,
            visit: &mut dyn FnMut(&[SearchMove]) -> ControlFlow<()>,
        ) -> ControlFlow<()> {
            if s == 0 {
                path.clear();
                path.extend(rev.iter().rev());
                return visit(path);
            }
            for (m, p) in bfs.predecessors(s) {
                let mut u = used;
                if let SearchMove::EntryFlip { col, .. } = m {
                    if single && used >> col & 1 == 1 {
                        continue;
                    }
                    u |= 1 << col;
                }
                rev.push(m);
                let flow = go(bfs, p, u, single, rev, path, visit);
                rev.pop();
                flow?;
            }
            ControlFlow::Continue(())
        }
        if self.distance(target).is_none() {
            return;
        }
        let mut rev = Vec::new();
        let mut path = Vec::new();
        let _ = go(self, target, 0, single_coupling, &mut rev, &mut path, &mut visit);
    }
}

/// Exact minimum CNOT count to build `target`, with the search tables.
pub fn bfs_min_cnots(target: &CheckMatrix) -> Result<(u32, Bfs), SearchError> {
    let s = pack(target)?;
    let bfs = Bfs::run();
    let d = bfs.distance(s).ok_or(SearchError::Unreachable)?;
    Ok((d, bfs))
}

/// Per-ancilla touch sequences; circuits with equal keys differ only by
/// reordering moves on disjoint ancillas.
pub fn canonical_key(moves: &[SearchMove]) -> [Vec<SearchMove>; ROWS] {
    std::array::from_fn(|a| moves.iter().copied().filter(|m| m.touches(a as u8)).collect())
}

/// Distinct (by [`canonical_key`]) geodesics to `target`, at most `limit`.
pub fn enumerate_geodesics(
    bfs: &Bfs,
    target: &CheckMatrix,
    limit: Option<usize>,
    single_coupling: bool,
) -> Result<Vec<Vec<SearchMove>>, SearchError> {
    let s = pack(target)?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    bfs.for_each_geodesic(s, single_coupling, |g| {
        if seen.insert(canonical_key(g)) {
            out.push(g.to_vec());
            if limit.is_some_and(|l| out.len() >= l) {
                return ControlFlow::Break(());
            }
        }
        ControlFlow::Continue(())
    });
    Ok(out)
}

/// Random distinct geodesics (by canonical key), seeded.
pub fn sample_geodesics<R: Rng>(
    bfs: &Bfs,
    target: &CheckMatrix,
    count: usize,
    rng: &mut R,
) -> Result<Vec<Vec<SearchMove>>, SearchError> {
    let s = pack(target)?;
    bfs.distance(s).ok_or(SearchError::Unreachable)?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut attempts = 0usize;
    while out.len() < count && attempts < count * 100 {
        attempts += 1;
        let g = bfs.random_geodesic(s, rng);
        if seen.insert(canonical_key(&g)) {
            out.push(g);
        }
    }
    Ok(out)
}

fn reset_and_measure(reg: &QubitRegister, gates: &[Instruction], flag_basis: Option<Basis>) -> Vec<Instruction> {
    let mut instrs: Vec<Instruction> = (0..reg.n_ancilla)
        .map(|a| Instruction::ResetZ(reg.ancilla(a)))
        .collect();
    match flag_basis {
        Some(Basis::X) => instrs.push(Instruction::ResetX(reg.flag(0))),
        Some(Basis::Z) => instrs.push(Instruction::ResetZ(reg.flag(0))),
        None => {}
    }
    instrs.extend_from_slice(gates);
    instrs.extend((0..reg.n_ancilla).map(|a| Instruction::MeasureZ(reg.ancilla(a), Slot::Bit(a))));
    match flag_basis {
        Some(Basis::X) => instrs.push(Instruction::MeasureX(reg.flag(0), Slot::Flag(0))),
        Some(Basis::Z) => instrs.push(Instruction::MeasureZ(reg.flag(0), Slot::Flag(0))),
        None => {}
    }
    instrs
}

/// Z-basis circuit realising a move sequence: resets, one CNOT per move,
/// measurements; the raw-bit transform is solved from the final matrix.
pub fn extract_circuit(moves: &[SearchMove]) -> Result<Circuit, SearchError> {
    if moves.is_empty() {
        return Err(SearchError::Empty);
    }
    let reg = QubitRegister::steane(ROWS, 0);
    let gates: Vec<Instruction> = moves.iter().map(|m| m.to_instruction(&reg)).collect();
    Circuit::from_instructions(reg, Basis::Z, &reset_and_measure(&reg, &gates, None), None).map_err(|e| match e {
        CircuitError::Map(_) | CircuitError::Nondeterministic(_) => SearchError::WrongTarget,
        e => SearchError::Circuit(e),
    })
}

/// Flag coupling orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FlagOrientation {
    /// Flag prepared in |+>, CNOT flag → ancilla, measured in X.
    FlagControls,
    /// Flag prepared in |0>, CNOT ancilla → flag, measured in Z.
    AncillaControls,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlagSearchResult {
    /// Smallest number of extra CNOTs found; `None` when above `max_extra`.
    pub m: Option<usize>,
    /// The flagged circuit realising `m`.
    pub witness: Option<Circuit>,
    /// Dangerous ancilla Z faults in the base circuit.
    pub dangerous: usize,
}

// Gate-level model: data 0..7, ancillas 7..10, flag 10.
const FLAG: u8 = 10;
const ANC0: u8 = 7;

fn gate_list(moves: &[SearchMove]) -> Vec<(u8, u8)> {
    moves
        .iter()
        .map(|m| match *m {
            SearchMove::EntryFlip { row, col } => (col, ANC0 + row),
            SearchMove::RowAdd { from, to } => (ANC0 + from, ANC0 + to),
        })
        .collect()
}

/// Z on `q` inserted before gate `start`, pushed to the end.
fn push_z(gates: &[(u8, u8)], start: usize, q: u8) -> u32 {
    let mut z = 1u32 << q;
    for &(c, t) in &gates[start..] {
        z ^= ((z >> t) & 1) << c;
    }
    z
}

fn dangerous_z(z: u32) -> bool {
    reduced_type_weight((z & 0x7f) as u64) >= 2
}

fn count_dangerous(gates: &[(u8, u8)]) -> usize {
    (0..=gates.len())
        .flat_map(|g| (0..ROWS as u8).map(move |a| (g, a)))
        .filter(|&(g, a)| dangerous_z(push_z(gates, g, ANC0 + a)))
        .count()
}

/// Syndromes of the weight-two data errors left by dangerous ancilla Z faults.
fn hook_syndromes(gates: &[(u8, u8)]) -> Vec<Syndrome> {
    let mut out: Vec<Syndrome> = (0..=gates.len())
        .flat_map(|g| (0..ROWS as u8).map(move |a| push_z(gates, g, ANC0 + a)))
        .filter(|&z| dangerous_z(z))
        .map(|z| Syndrome::of_error((z & 0x7f) as u64))
        .collect();
    out.sort();
    out.dedup();
    out
}

fn covered(gates: &[(u8, u8)]) -> bool {
    for g in 0..=gates.len() {
        for a in 0..ROWS as u8 {
            let z = push_z(gates, g, ANC0 + a);
            if dangerous_z(z) && (z >> FLAG) & 1 == 0 {
                return false;
            }
        }
    }
    true
}

/// Every measured observable, pulled back to the start, is fixed by the
/// reset states and the code (same rule as circuit validation).
fn deterministic(gates: &[(u8, u8)], flag_x: bool) -> bool {
    let pull = |mut x: u32, mut z: u32| {
        for &(c, t) in gates.iter().rev() {
            x ^= ((x >> c) & 1) << t;
            z ^= ((z >> t) & 1) << c;
        }
        (x, z)
    };
    let stab = |x: u32, z: u32| {
        StabilizerGroup::steane().contains(&crate::pauli::PauliOperator::from_masks(
            7,
            (x & 0x7f) as u64,
            (z & 0x7f) as u64,
        ))
    };
    let anc_mask = 0b111u32 << ANC0;
    let flag_bit = 1u32 << FLAG;
    // Z-reset qubits must carry no X, the X-reset flag no Z
    let ok = |x: u32, z: u32| {
        let z_reset = if flag_x { anc_mask } else { anc_mask | flag_bit };
        let x_reset = if flag_x { flag_bit } else { 0 };
        x & z_reset == 0 && z & x_reset == 0 && stab(x, z)
    };
    for a in 0..ROWS as u8 {
        let (x, z) = pull(0, 1 << (ANC0 + a));
        if !ok(x, z) {
            return false;
        }
    }
    let (x, z) = if flag_x { pull(flag_bit, 0) } else { pull(0, flag_bit) };
    ok(x, z)
}

fn insert_flags(base: &[(u8, u8)], gaps: &[usize], ancs: &[u8], o: FlagOrientation) -> Vec<(u8, u8)> {
    let mut out = Vec::with_capacity(base.len() + gaps.len());
    let mut k = 0;
    for i in 0..=base.len() {
        while k < gaps.len() && gaps[k] == i {
            let a = ANC0 + ancs[k];
            out.push(match o {
                FlagOrientation::FlagControls => (FLAG, a),
                FlagOrientation::AncillaControls => (a, FLAG),
            });
            k += 1;
        }
        if i < base.len() {
            out.push(base[i]);
        }
    }
    out
}

fn next_multiset(gaps: &mut [usize], max: usize) -> bool {
    // nondecreasing sequences over 0..=max
    let k = gaps.len();
    for i in (0..k).rev() {
        if gaps[i] < max {
            gaps[i] += 1;
            for j in i + 1..k {
                gaps[j] = gaps[i];
            }
            return true;
        }
    }
    false
}

fn next_tuple(ancs: &mut [u8]) -> bool {
    for i in (0..ancs.len()).rev() {
        if ancs[i] + 1 < ROWS as u8 {
            ancs[i] += 1;
            return true;
        }
        ancs[i] = 0;
    }
    false
}

/// Visits every valid placement of exactly `k` flag CNOTs that flags all
/// dangerous ancilla Z faults, in a fixed order.
fn for_each_witness(
    base: &[(u8, u8)],
    k: usize,
    mut visit: impl FnMut(&[(u8, u8)], FlagOrientation) -> ControlFlow<()>,
) -> ControlFlow<()> {
    let n = base.len();
    let mut gaps = vec![0usize; k];
    loop {
        let mut ancs = vec![0u8; k];
        loop {
            for o in [FlagOrientation::FlagControls, FlagOrientation::AncillaControls] {
                let c = insert_flags(base, &gaps, &ancs, o);
                if covered(&c) && deterministic(&c, o == FlagOrientation::FlagControls) {
                    visit(&c, o)?;
                }
            }
            if !next_tuple(&mut ancs) {
                break;
            }
        }
        if !next_multiset(&mut gaps, n) {
            return ControlFlow::Continue(());
        }
    }
}

fn flagged_circuit(gates: &[(u8, u8)], o: FlagOrientation, to_standard: &CheckMatrix) -> Result<Circuit, SearchError> {
    let reg = QubitRegister::steane(ROWS, 1);
    let map = |q: u8| match q {
        FLAG => reg.flag(0),
        q if q >= ANC0 => reg.ancilla((q - ANC0) as usize),
        q => reg.data(q as usize),
    };
    let ins: Vec<Instruction> = gates.iter().map(|&(c, t)| Instruction::cnot(map(c), map(t))).collect();
    let fb = match o {
        FlagOrientation::FlagControls => Basis::X,
        FlagOrientation::AncillaControls => Basis::Z,
    };
    Ok(Circuit::from_instructions(
        reg,
        Basis::Z,
        &reset_and_measure(&reg, &ins, Some(fb)),
        Some(to_standard.clone()),
    )?)
}

/// Smallest number of flag CNOTs (≤ `max_extra`) catching every dangerous
/// ancilla Z fault of the base geodesic.
pub fn min_flag_cnots(base: &[SearchMove], max_extra: usize) -> Result<FlagSearchResult, SearchError> {
    let gates = gate_list(base);
    let dangerous = count_dangerous(&gates);
    if dangerous == 0 {
        return Ok(FlagSearchResult {
            m: Some(0),
            witness: None,
            dangerous,
        });
    }
    let base_c = extract_circuit(base)?;
    for k in 1..=max_extra {
        let mut found = None;
        let _ = for_each_witness(&gates, k, |c, o| {
            found = Some((c.to_vec(), o));
            ControlFlow::Break(())
        });
        if let Some((c, o)) = found {
            return Ok(FlagSearchResult {
                m: Some(k),
                witness: Some(flagged_circuit(&c, o, &base_c.syndrome_map.to_standard)?),
                dangerous,
            });
        }
    }
    Ok(FlagSearchResult {
        m: None,
        witness: None,
        dangerous,
    })
}

/// The measured-parity matrix whose raw-bit transform is the effective
/// matrix H′ (`H′ · M = H`).
pub fn effective_target() -> CheckMatrix {
    steane_effective()
        .inverse()
        .expect("H′ is invertible")
        .mul(&steane_h())
        .expect("3×3 · 3×7")
}

#[derive(Debug, Clone)]
pub struct Derived {
    pub base_moves: Vec<SearchMove>,
    pub recovery: Circuit,
    pub primary: Circuit,
    pub decoder: Decoder,
    /// Base geodesics examined before this one was accepted.
    pub examined: usize,
}

/// Chooses the canonical circuit pair: the first single-coupling geodesic to
/// [`effective_target`] (depth-first order) with a 3-CNOT flag placement
/// that passes the full fault-tolerance check. When `prefer` is given, only
/// placements whose remapped syndromes equal it are accepted.
pub fn derive_canonical(bfs: &Bfs, prefer: Option<&[(&str, &str)]>) -> Result<Derived, SearchError> {
    let target = pack(&effective_target())?;
    let mut result = None;
    let mut seen = HashSet::new();
    let mut examined = 0usize;
    bfs.for_each_geodesic(target, true, |g| {
        if !seen.insert(canonical_key(g)) {
            return ControlFlow::Continue(());
        }
        examined += 1;
        let Ok(base) = extract_circuit(g) else {
            return ControlFlow::Continue(());
        };
        let gates = gate_list(g);
        if let Some(want) = prefer {
            let mut ws: Vec<Syndrome> = want.iter().filter_map(|(s, _)| s.parse().ok()).collect();
            ws.sort();
            if hook_syndromes(&gates) != ws {
                return ControlFlow::Continue(());
            }
        }
        for k in 1..=3 {
            let mut any = false;
            let _ = for_each_witness(&gates, k, |c, o| {
                any = true;
                let Ok(primary) = flagged_circuit(c, o, &base.syndrome_map.to_standard) else {
                    return ControlFlow::Continue(());
                };
                let Ok(decoder) = Decoder::derive(&primary, &base) else {
                    return ControlFlow::Continue(());
                };
                let matches = prefer.is_none_or(|want| {
                    let got = decoder.for_flagged(Basis::Z).remapped();
                    got.len() == want.len()
                        && got
                            .iter()
                            .all(|(s, p)| want.iter().any(|(ws, wp)| s.to_string() == *ws && p.to_string() == *wp))
                });
                if !matches || !verify_ft_conditions(&primary, &base, &decoder).all_pass() {
                    return ControlFlow::Continue(());
                }
                result = Some(Derived {
                    base_moves: g.to_vec(),
                    recovery: base.clone(),
                    primary,
                    decoder,
                    examined,
                });
                ControlFlow::Break(())
            });
            if any {
                break;
            }
        }
        if result.is_some() {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    result.ok_or(SearchError::NoCandidate)
}
