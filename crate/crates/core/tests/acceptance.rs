//! Acceptance suite: one line per criterion, `[PASS]` or `[FAIL]`.
//!
//! Run with `cargo test --release --test acceptance -- --nocapture --test-threads 1`
//! to see the report.

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use steane_se::canonical;
use steane_se::circuit::{Basis, Circuit};
use steane_se::code::{gf2_rank, parse_bitstring, steane_effective, steane_h};
use steane_se::faults::{dangerous_faults, fault_locations, propagate, verify_ft_conditions};
use steane_se::montecarlo::{loglog_slope, MonteCarlo, ShotRule};
use steane_se::protocol::{BasisOrder, Protocol};
use steane_se::search;
use steane_se::sim::run_deterministic_fault;

fn report(name: &str, pass: bool, detail: String) {
    println!("[{}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{name}: {detail}");
}

#[test]
fn decode_worked_example() {
    let p = Protocol::canonical();
    let t = Instant::now();
    let g = p.primary(Basis::Z);
    let raw = parse_bitstring("011").unwrap();
    let s = g.circuit.syndrome_map.raw_to_syndrome(raw);
    let corr = p.decoder().for_unflagged(Basis::Z).decode_standard(s);
    let elapsed = t.elapsed();
    let pass = s.to_string() == "101" && corr.support_indices() == vec![3] && elapsed < Duration::from_millis(1);
    report(
        "decode example",
        pass,
        format!("b=011 -> s={s} -> {corr} in {elapsed:?}"),
    );
}

#[test]
fn remap_table() {
    let d = canonical::decoder();
    let mut got: Vec<(String, Vec<usize>)> = d
        .for_flagged(Basis::Z)
        .remapped()
        .iter()
        .map(|(s, p)| (s.to_string(), p.support_indices().iter().map(|q| q + 1).collect()))
        .collect();
    got.sort();
    let want = vec![("010".to_string(), vec![1, 2]), ("100".to_string(), vec![2, 5])];
    report("remap table", got == want, format!("{got:?}"));
}

#[test]
fn rank_recovery() {
    let (rh, re) = (gf2_rank(&steane_h()), gf2_rank(&steane_effective()));
    report("ranks", rh == 3 && re == 3, format!("rank(H)={rh} rank(H')={re}"));
}

#[test]
fn bfs_minimality() {
    let t = Instant::now();
    let h = steane_h();
    let (d, bfs) = search::bfs_min_cnots(&h).unwrap();
    let elapsed = t.elapsed();
    let within_ten: u64 = bfs.layer_sizes().iter().take(11).sum();
    let pass = d == 11 && elapsed < Duration::from_secs(60);
    report(
        "BFS minimality",
        pass,
        format!("distance(H)={d}; H absent among the {within_ten} states at distance <= 10; {elapsed:?}"),
    );
}

#[test]
fn flag_lower_bound() {
    let h = steane_h();
    let (_, bfs) = search::bfs_min_cnots(&h).unwrap();
    let bases = search::sample_geodesics(&bfs, &h, 1000, &mut ChaCha8Rng::seed_from_u64(2024)).unwrap();
    let below_three = bases
        .iter()
        .filter(|g| search::min_flag_cnots(g, 2).unwrap().m.is_some())
        .count();
    let derived = search::derive_canonical(&bfs, Some(&canonical::HOOK_REMAP[..])).unwrap();
    let r = search::min_flag_cnots(&derived.base_moves, 3).unwrap();
    let witness_ok = r.witness.as_ref().is_some_and(|w: &Circuit| {
        let d = dangerous_faults(w);
        w.cnot_count() == 14 && !d.is_empty() && d.iter().all(|e| e.flag_flip)
    });
    let pass = bases.len() >= 1000 && below_three == 0 && r.m == Some(3) && witness_ok;
    report(
        "flag lower bound",
        pass,
        format!(
            "{} distinct 11-CNOT bases, {below_three} with m<3; canonical base m={:?}, witness verified={witness_ok}",
            bases.len(),
            r.m
        ),
    );
}

#[test]
fn ft_conditions() {
    let (p, r) = (canonical::primary(), canonical::recovery());
    let rep = verify_ft_conditions(&p, &r, &canonical::decoder());
    let pass = rep.all_pass() && rep.counterexamples.is_empty() && rep.unflagged_checked + rep.flagged_checked >= 100;
    report(
        "FT conditions",
        pass,
        format!(
            "{}; {} data errors, {} unflagged, {} flagged faults, {} counterexamples",
            rep.summary(),
            rep.data_errors_checked,
            rep.unflagged_checked,
            rep.flagged_checked,
            rep.counterexamples.len()
        ),
    );
}

#[test]
fn negative_control() {
    let p = Protocol::canonical();
    let crippled = p.with_decoder(p.decoder().without_remap());
    let failures = crippled.single_fault_failures();
    let again = crippled.single_fault_failures();
    let example = failures.first().map(|f| format!("{} -> {:?}", f.description, f.class));
    report(
        "negative control",
        !failures.is_empty() && failures == again,
        format!(
            "{} single faults fail without the remap, e.g. {example:?}",
            failures.len()
        ),
    );
}

#[test]
fn quadratic_suppression() {
    let t = Instant::now();
    let mc = MonteCarlo::new(Protocol::canonical(), BasisOrder::ZX, 20_240_601);
    let rule = ShotRule::InverseRate {
        numerator: 20_000.0,
        min: 100_000,
        cap: u64::MAX,
    };
    let res = mc.sweep_physical_rate(&[3e-4, 1e-3, 3e-3], 2, rule).unwrap();
    let slope = loglog_slope(&res.points).unwrap_or(f64::NAN);
    let enough = res.points.iter().all(|p| p.shots >= 100_000);
    let detail: Vec<String> = res
        .points
        .iter()
        .map(|p| {
            format!(
                "p={} shots={} fails={} pL/p^2={:.0}",
                p.p_phys,
                p.shots,
                p.failures,
                p.p_l_over_p2()
            )
        })
        .collect();
    report(
        "quadratic suppression",
        enough && (slope - 2.0).abs() <= 0.15,
        format!("slope {slope:.3} ({}) in {:?}", detail.join("; "), t.elapsed()),
    );
}

#[test]
fn oracle_equivalence() {
    let (p, r) = (canonical::primary(), canonical::recovery());
    let mut total = 0;
    let mut agree = 0;
    for c in [p.clone(), r.clone(), p.dualize(), r.dualize()] {
        let id = steane_se::pauli::PauliOperator::identity(7);
        for f in fault_locations(&c) {
            let out = run_deterministic_fault(&c, &f, &id);
            let e = propagate(&c, &f);
            total += 1;
            agree += (out.bits == e.bit_flips && out.flags == e.flag_flips && out.frame == e.residual_data) as usize;
        }
    }
    report(
        "oracle equivalence",
        total > 0 && agree == total,
        format!("{agree}/{total} single-fault locations agree"),
    );
}

#[test]
fn reproducible_csv() {
    let csv = |threads: usize| {
        let mc = MonteCarlo::new(Protocol::canonical(), BasisOrder::ZX, 77);
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                mc.sweep_physical_rate(&[5e-3, 1e-2], 3, ShotRule::Fixed(50_000))
                    .unwrap()
            })
            .to_csv()
    };
    let one = csv(1);
    let same = [2, 4, 8].iter().all(|&t| csv(t) == one);
    report(
        "reproducibility",
        same && csv(1) == one,
        format!("CSV identical for 1, 2, 4 and 8 threads ({} bytes)", one.len()),
    );
}
