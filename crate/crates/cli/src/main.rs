use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use steane_se::canonical;
use steane_se::circuit::{Basis, Circuit};
use steane_se::code::{parse_bitstring, steane_h};
use steane_se::decoder::Decoder;
use steane_se::faults::verify_ft_conditions;
use steane_se::montecarlo::{log_grid, loglog_slope, MonteCarlo, ShotRule, SweepResult};
use steane_se::protocol::{BasisOrder, Protocol};
use steane_se::search::{self, Bfs};
use steane_se::sim::NoiseParams;

#[derive(Parser, Debug)]
#[command(
    name = "steane-se",
    version,
    about = "Flag-and-fallback syndrome extraction for the Steane code"
)]
struct Cli {
    /// Worker threads for sampling (default: available parallelism).
    #[arg(long, global = true, env = "STEANE_SE_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Search for the canonical circuit pair and write it with its decoder tables.
    Derive {
        #[arg(long, default_value = "circuits")]
        out: PathBuf,
        /// Accept the first fault-tolerant candidate whatever its hook syndromes.
        #[arg(long)]
        any: bool,
    },
    /// Exhaustive single-fault check of a circuit pair.
    VerifyFt {
        #[command(flatten)]
        circuits: CircuitArgs,
        /// List every counterexample.
        #[arg(long)]
        verbose: bool,
    },
    /// Memory experiment at one noise setting.
    Simulate {
        #[command(flatten)]
        circuits: CircuitArgs,
        #[command(flatten)]
        run: RunArgs,
        /// TOML file with basis_order, n_cycles, seed, shots and [noise].
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        p2: Option<f64>,
        #[arg(long)]
        p_spam: Option<f64>,
        #[arg(long)]
        p_mem: Option<f64>,
        #[arg(long)]
        cycles: Option<usize>,
        #[arg(long)]
        shots: Option<u64>,
    },
    /// Logical error rate against the physical error rate.
    SweepP {
        #[command(flatten)]
        circuits: CircuitArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated rates; default is a log grid from 1e-4 to 1e-2.
        #[arg(long, value_delimiter = ',')]
        p: Vec<f64>,
        #[arg(long, default_value_t = 7)]
        points: usize,
        #[arg(long, default_value_t = 2)]
        cycles: usize,
        /// Fixed shots per point (default: 20000/p within [1e5, max-shots]).
        #[arg(long)]
        shots: Option<u64>,
        #[arg(long, default_value_t = 1_000_000)]
        max_shots: u64,
    },
    /// Logical error rate against the number of cycles.
    SweepCycles {
        #[command(flatten)]
        circuits: CircuitArgs,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16,32")]
        cycles: Vec<usize>,
        #[arg(long, default_value_t = 1e-3)]
        p: f64,
        #[arg(long, default_value_t = 100_000)]
        shots: u64,
    },
    /// Offline decoding of one set of raw bits.
    Decode {
        #[command(flatten)]
        circuits: CircuitArgs,
        /// Basis of the primary run.
        #[arg(long)]
        basis: Basis,
        /// Raw bits b0 b1 b2, leftmost first.
        #[arg(long)]
        bits: String,
        /// The primary run's flag was raised; `bits` come from the recovery run.
        #[arg(long)]
        flagged: bool,
    },
    /// Minimum CNOT count to measure H, with one shortest circuit.
    SearchMinCnot {
        /// Search for the matrix the canonical pair measures instead of H.
        #[arg(long)]
        effective: bool,
    },
    /// Minimum flag CNOTs over shortest base circuits for H.
    SearchFlags {
        /// Number of distinct base circuits to examine.
        #[arg(long, default_value_t = 1000)]
        limit: usize,
        #[arg(long, default_value_t = 3)]
        max_extra: usize,
        /// Walk geodesics in order instead of sampling them at random.
        #[arg(long)]
        exhaustive: bool,
        #[arg(long)]
        seed: Option<u64>,
        /// Write each witness circuit here.
        #[arg(long)]
        emit_circuits: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct CircuitArgs {
    /// Flagged primary circuit (default: the shipped one).
    #[arg(long)]
    primary: Option<PathBuf>,
    /// Recovery circuit, same basis as the primary.
    #[arg(long)]
    recovery: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    order: Option<BasisOrder>,
    /// CSV destination (stdout if absent); the config goes next to it as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Everything that determines a sampling run.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunConfig {
    #[serde(default)]
    subcommand: String,
    #[serde(default)]
    primary: Option<PathBuf>,
    #[serde(default)]
    recovery: Option<PathBuf>,
    #[serde(default)]
    basis_order: Option<BasisOrder>,
    #[serde(default)]
    n_cycles: Option<usize>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    shots: Option<u64>,
    #[serde(default)]
    noise: Option<NoiseParams>,
    #[serde(default)]
    p_list: Vec<f64>,
    #[serde(default)]
    cycle_list: Vec<usize>,
    #[serde(default)]
    shot_rule: Option<ShotRule>,
    #[serde(default)]
    convention: String,
}

fn read_circuit(path: &Path) -> Result<Circuit> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.parse().with_context(|| format!("parsing {}", path.display()))
}

fn load_pair(c: &CircuitArgs) -> Result<(Circuit, Circuit)> {
    match (&c.primary, &c.recovery) {
        (None, None) => Ok((canonical::primary(), canonical::recovery())),
        (Some(p), Some(r)) => Ok((read_circuit(p)?, read_circuit(r)?)),
        _ => bail!("--primary and --recovery must be given together"),
    }
}

fn load_protocol(c: &CircuitArgs) -> Result<Protocol> {
    let (p, r) = load_pair(c)?;
    let d = Decoder::derive(&p, &r)?;
    Ok(Protocol::new(p, r, d)?)
}

fn pick_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let s = rand::random();
        eprintln!("seed: {s}");
        s
    })
}

fn emit(res: &SweepResult, cfg: &RunConfig, out: Option<&Path>) -> Result<()> {
    let meta = serde_json::to_string_pretty(cfg)?;
    match out {
        Some(path) => {
            fs::write(path, res.to_csv()).with_context(|| format!("writing {}", path.display()))?;
            let mut side = path.as_os_str().to_owned();
            side.push(".json");
            fs::write(PathBuf::from(side), meta + "\n")?;
        }
        None => print!("{}", res.to_csv()),
    }
    Ok(())
}

fn check_rate(name: &str, p: f64) -> Result<()> {
    if !(0.0..0.5).contains(&p) {
        bail!("{name}={p} must lie in [0, 0.5)");
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Command::Derive { out, any } => {
            let bfs = Bfs::run();
            let d = search::derive_canonical(&bfs, if any { None } else { Some(&canonical::HOOK_REMAP[..]) })?;
            fs::create_dir_all(&out)?;
            fs::write(out.join("primary_z.circ"), d.primary.to_text())?;
            fs::write(out.join("recovery_z.circ"), d.recovery.to_text())?;
            fs::write(out.join("decoder.txt"), d.decoder.to_string())?;
            let moves: Vec<String> = d.base_moves.iter().map(|m| m.to_string()).collect();
            println!("base geodesic ({} CNOTs): {}", moves.len(), moves.join(" "));
            println!("examined {} base circuits", d.examined);
            println!(
                "primary: {} CNOTs, depth {}; recovery: {} CNOTs, depth {}",
                d.primary.cnot_count(),
                d.primary.depth(),
                d.recovery.cnot_count(),
                d.recovery.depth()
            );
            print!("{}", d.decoder);
            println!("wrote {}", out.display());
        }
        Command::VerifyFt { circuits, verbose } => {
            let (p, r) = load_pair(&circuits)?;
            let d = Decoder::derive(&p, &r)?;
            let report = verify_ft_conditions(&p, &r, &d);
            println!("{}", report.summary());
            println!(
                "checked {} data errors, {} unflagged and {} flagged faults",
                report.data_errors_checked, report.unflagged_checked, report.flagged_checked
            );
            if verbose {
                print!("{report}");
            }
            if !report.all_pass() {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Simulate {
            circuits,
            run,
            config,
            p,
            p2,
            p_spam,
            p_mem,
            cycles,
            shots,
        } => {
            let mut cfg: RunConfig = match &config {
                Some(path) => {
                    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                    toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
                }
                None => RunConfig::default(),
            };
            cfg.subcommand = "simulate".into();
            let circuits = CircuitArgs {
                primary: circuits.primary.or(cfg.primary.take()),
                recovery: circuits.recovery.or(cfg.recovery.take()),
            };
            let mut noise = cfg.noise.unwrap_or(NoiseParams::from_phys(1e-3)?);
            if let Some(p) = p {
                check_rate("p", p)?;
                noise = NoiseParams::from_phys(p)?;
            }
            noise.p2 = p2.unwrap_or(noise.p2);
            noise.p_spam = p_spam.unwrap_or(noise.p_spam);
            noise.p_mem = p_mem.unwrap_or(noise.p_mem);
            let noise = NoiseParams::new(noise.p2, noise.p_spam, noise.p_mem)?;
            let n_cycles = cycles.or(cfg.n_cycles).unwrap_or(2);
            let shots = shots.or(cfg.shots).unwrap_or(100_000);
            if n_cycles == 0 || shots == 0 {
                bail!("cycles and shots must be positive");
            }
            let order = run.order.or(cfg.basis_order).unwrap_or_default();
            let seed = pick_seed(run.seed.or(cfg.seed));
            let mc = MonteCarlo::new(load_protocol(&circuits)?, order, seed);
            let point = mc.run_point(0, noise.p2, &noise, n_cycles, shots)?;
            let res = SweepResult {
                seed,
                convention: mc.convention(),
                points: vec![point],
            };
            let cfg = RunConfig {
                primary: circuits.primary,
                recovery: circuits.recovery,
                basis_order: Some(order),
                n_cycles: Some(n_cycles),
                seed: Some(seed),
                shots: Some(shots),
                noise: Some(noise),
                convention: mc.convention(),
                ..cfg
            };
            emit(&res, &cfg, run.out.as_deref())?;
        }
        Command::SweepP {
            circuits,
            run,
            p,
            points,
            cycles,
            shots,
            max_shots,
        } => {
            let p_list = if p.is_empty() { log_grid(1e-4, 1e-2, points) } else { p };
            for &p in &p_list {
                check_rate("p", p)?;
            }
            let rule = match shots {
                Some(n) => ShotRule::Fixed(n),
                None => ShotRule::InverseRate {
                    numerator: 20_000.0,
                    min: 100_000,
                    cap: max_shots,
                },
            };
            let order = run.order.unwrap_or_default();
            let seed = pick_seed(run.seed);
            let mc = MonteCarlo::new(load_protocol(&circuits)?, order, seed);
            let res = mc.sweep_physical_rate(&p_list, cycles, rule)?;
            if let Some(s) = loglog_slope(&res.points) {
                eprintln!("log-log slope: {s:.3}");
            }
            let cfg = RunConfig {
                subcommand: "sweep-p".into(),
                primary: circuits.primary,
                recovery: circuits.recovery,
                basis_order: Some(order),
                n_cycles: Some(cycles),
                seed: Some(seed),
                p_list,
                shot_rule: Some(rule),
                convention: mc.convention(),
                ..RunConfig::default()
            };
            emit(&res, &cfg, run.out.as_deref())?;
        }
        Command::SweepCycles {
            circuits,
            run,
            cycles,
            p,
            shots,
        } => {
            check_rate("p", p)?;
            let noise = NoiseParams::from_phys(p)?;
            let order = run.order.unwrap_or_default();
            let seed = pick_seed(run.seed);
            let mc = MonteCarlo::new(load_protocol(&circuits)?, order, seed);
            let res = mc.sweep_cycles(&cycles, p, &noise, shots)?;
            let cfg = RunConfig {
                subcommand: "sweep-cycles".into(),
                primary: circuits.primary,
                recovery: circuits.recovery,
                basis_order: Some(order),
                seed: Some(seed),
                shots: Some(shots),
                noise: Some(noise),
                cycle_list: cycles,
                convention: mc.convention(),
                ..RunConfig::default()
            };
            emit(&res, &cfg, run.out.as_deref())?;
        }
        Command::Decode {
            circuits,
            basis,
            bits,
            flagged,
        } => {
            let proto = load_protocol(&circuits)?;
            let gadget = if flagged {
                proto.recovery_after(basis)
            } else {
                proto.primary(basis)
            };
            let n = gadget.circuit.n_bits();
            let raw = match parse_bitstring(bits.trim()) {
                Some(v) if bits.trim().len() == n => v,
                _ => bail!("--bits must be {n} characters of 0/1"),
            };
            let s = gadget.circuit.syndrome_map.raw_to_syndrome(raw);
            let corr = if flagged {
                proto.decoder().for_flagged(basis).decode_remap(s)
            } else {
                proto.decoder().for_unflagged(basis).decode_standard(s)
            };
            println!("syndrome {s}");
            let qubits: Vec<String> = corr.support_indices().iter().map(|q| (q + 1).to_string()).collect();
            match qubits.len() {
                0 => println!("no correction"),
                1 => println!("correct qubit {}", qubits[0]),
                _ => println!("correct qubits {}", qubits.join(" ")),
            }
            println!("correction {corr}");
        }
        Command::SearchMinCnot { effective } => {
            let target = if effective {
                search::effective_target()
            } else {
                steane_h()
            };
            let (d, bfs) = search::bfs_min_cnots(&target)?;
            println!("target:\n{target}");
            println!("minimum CNOTs: {d}");
            println!("states per distance: {:?}", bfs.layer_sizes());
            let g = bfs.geodesic(search::pack(&target)?)?;
            let moves: Vec<String> = g.iter().map(|m| m.to_string()).collect();
            println!("geodesic: {}", moves.join(" "));
            print!("{}", search::extract_circuit(&g)?.to_text());
        }
        Command::SearchFlags {
            limit,
            max_extra,
            exhaustive,
            seed,
            emit_circuits,
        } => {
            let h = steane_h();
            let (_, bfs) = search::bfs_min_cnots(&h)?;
            let bases = if exhaustive {
                search::enumerate_geodesics(&bfs, &h, Some(limit), false)?
            } else {
                let seed = pick_seed(seed);
                search::sample_geodesics(&bfs, &h, limit, &mut ChaCha8Rng::seed_from_u64(seed))?
            };
            if let Some(dir) = &emit_circuits {
                fs::create_dir_all(dir)?;
            }
            println!("index dangerous m geodesic");
            let mut min: Option<Option<usize>> = None;
            for (i, g) in bases.iter().enumerate() {
                let r = search::min_flag_cnots(g, max_extra)?;
                let m = r.m.map_or(format!(">{max_extra}"), |m| m.to_string());
                let moves: Vec<String> = g.iter().map(|m| m.to_string()).collect();
                println!("{i} {} {m} {}", r.dangerous, moves.join(" "));
                if let (Some(dir), Some(w)) = (&emit_circuits, &r.witness) {
                    fs::write(dir.join(format!("flagged_{i:05}.circ")), w.to_text())?;
                }
                // None (above max_extra) ranks above every found value
                min = Some(match (min, r.m) {
                    (None, m) => m,
                    (Some(None), m) => m,
                    (Some(Some(a)), Some(b)) => Some(a.min(b)),
                    (Some(a), None) => a,
                });
            }
            match min {
                None => println!("no base circuits"),
                Some(None) => println!("minimum m over {} circuits: >{max_extra}", bases.len()),
                Some(Some(m)) => println!("minimum m over {} circuits: {m}", bases.len()),
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
