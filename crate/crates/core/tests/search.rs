use std::collections::HashSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use steane_se::canonical;
use steane_se::code::{steane_h, CheckMatrix};
use steane_se::faults::dangerous_faults;
use steane_se::search::{self, pack, Bfs, MOVES, N_STATES};

fn bfs() -> Bfs {
    Bfs::run()
}

#[test]
fn distances_of_small_targets() {
    let b = bfs();
    assert_eq!(b.distance(0), Some(0));
    for bit in 0..21 {
        assert_eq!(b.distance(1 << bit), Some(1));
    }
    let sizes = b.layer_sizes();
    assert_eq!(sizes.iter().sum::<u64>(), N_STATES as u64);
    assert_eq!(sizes.len(), 12);
}

#[test]
fn neighbouring_states_differ_by_at_most_one() {
    let b = bfs();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20_000 {
        let s = rand::Rng::random_range(&mut rng, 0..N_STATES as u32);
        let d = b.distance(s).unwrap();
        for m in MOVES {
            let e = b.distance(m.apply(s)).unwrap();
            assert!(d.abs_diff(e) <= 1);
        }
    }
}

#[test]
fn distance_is_invariant_under_row_permutations() {
    let b = bfs();
    let h = steane_h();
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    for p in perms {
        let m = CheckMatrix::from_rows(7, p.iter().map(|&i| h.row(i)).collect());
        assert_eq!(b.distance(pack(&m).unwrap()), Some(11));
    }
}

#[test]
fn enumerated_geodesics_measure_h() {
    let b = bfs();
    let h = steane_h();
    let gs = search::enumerate_geodesics(&b, &h, Some(300), false).unwrap();
    assert_eq!(gs.len(), 300);
    let keys: HashSet<_> = gs.iter().map(|g| search::canonical_key(g)).collect();
    assert_eq!(keys.len(), gs.len());
    for g in &gs {
        assert_eq!(g.len(), 11);
        let c = search::extract_circuit(g).unwrap();
        assert_eq!(c.cnot_count(), 11);
        assert_eq!(c.syndrome_map.measured, h);
        assert_eq!(c.syndrome_map.to_standard, CheckMatrix::identity(3));
    }
}

#[test]
fn witnesses_flag_every_dangerous_fault() {
    let b = bfs();
    let h = steane_h();
    let gs = search::sample_geodesics(&b, &h, 150, &mut ChaCha8Rng::seed_from_u64(8)).unwrap();
    let mut found = 0;
    for g in &gs {
        let r = search::min_flag_cnots(g, 3).unwrap();
        assert!(r.m.is_none_or(|m| m >= 3));
        if let Some(w) = r.witness {
            found += 1;
            assert_eq!(w.cnot_count(), 14);
            assert!(dangerous_faults(&w).iter().all(|e| e.flag_flip));
        }
    }
    assert!(found > 0);
}

#[test]
fn shipped_pair_is_reproduced_by_the_search() {
    let d = search::derive_canonical(&bfs(), Some(&canonical::HOOK_REMAP[..])).unwrap();
    assert_eq!(d.primary.to_text(), canonical::PRIMARY_Z);
    assert_eq!(d.recovery.to_text(), canonical::RECOVERY_Z);
    assert_eq!(d.decoder, canonical::decoder());
    assert_eq!(d.recovery.cnot_count(), 11);
    assert_eq!(d.primary.cnot_count(), 14);
    assert_eq!((d.primary.register.n_ancilla, d.primary.register.n_flag), (3, 1));
    assert_eq!(d.recovery.syndrome_map.measured, search::effective_target());
}
