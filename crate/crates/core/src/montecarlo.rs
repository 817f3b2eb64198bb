//! Memory-experiment sweeps with Wilson intervals and CSV output.
//!
//! Shots are split into fixed chunks; chunk `c` of point `i` draws from its
//! own ChaCha stream `(i << 32) | c`, so counts do not depend on how rayon
//! schedules the chunks.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::protocol::{BasisOrder, Protocol};
use crate::sim::{NoiseError, NoiseParams};

pub const CSV_HEADER: &str = "p_phys,n_cycles,shots,failures,fail_z,fail_x,p_l,wilson_lo,wilson_hi,seed,convention";
pub const SCHEMA_VERSION: u32 = 1;
pub const CHUNK: u64 = 4096;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum McError {
    #[error("no shots")]
    NoShots,
    #[error("{failures} failures out of {shots} shots")]
    TooManyFailures { failures: u64, shots: u64 },
    #[error("confidence {0} is not in (0, 1)")]
    Confidence(f64),
    #[error("empty sweep grid")]
    EmptyGrid,
    #[error("physical error rate {0} is outside [0, 0.5)")]
    Rate(f64),
    #[error("cycle counts must be positive and ascending")]
    Cycles,
    #[error(transparent)]
    Noise(#[from] NoiseError),
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(failures: u64, shots: u64, confidence: f64) -> Result<(f64, f64), McError> {
    if shots == 0 {
        return Err(McError::NoShots);
    }
    if failures > shots {
        return Err(McError::TooManyFailures { failures, shots });
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(McError::Confidence(confidence));
    }
    let z = Normal::standard().inverse_cdf(0.5 + confidence / 2.0);
    let n = shots as f64;
    let p = failures as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if failures == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if failures == shots {
        1.0
    } else {
        (centre + half).min(1.0)
    };
    Ok((lo, hi))
}

/// How many shots to spend on a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ShotRule {
    Fixed(u64),
    /// `ceil(numerator / p_phys)`, clamped to `[min, cap]`.
    InverseRate {
        numerator: f64,
        min: u64,
        cap: u64,
    },
}

impl Default for ShotRule {
    fn default() -> Self {
        ShotRule::InverseRate {
            numerator: 20_000.0,
            min: 100_000,
            cap: 1_000_000,
        }
    }
}

impl ShotRule {
    pub fn shots(&self, p_phys: f64) -> u64 {
        match *self {
            ShotRule::Fixed(n) => n,
            ShotRule::InverseRate { numerator, min, cap } => {
                if p_phys <= 0.0 {
                    return min;
                }
                ((numerator / p_phys).ceil() as u64).clamp(min, cap.max(min))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub p_phys: f64,
    pub n_cycles: usize,
    pub shots: u64,
    pub failures: u64,
    /// Failures with a Z̄ component (Z̄ or Ȳ).
    pub fail_z: u64,
    /// Failures with an X̄ component (X̄ or Ȳ).
    pub fail_x: u64,
    pub p_l: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
}

impl SweepPoint {
    pub fn p_l_over_p2(&self) -> f64 {
        self.p_l / (self.p_phys * self.p_phys)
    }

    pub fn p_l_per_cycle(&self) -> f64 {
        self.p_l / self.n_cycles as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub seed: u64,
    pub convention: String,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(CSV_HEADER);
        out.push('\n');
        for p in &self.points {
            writeln!(
                out,
                "{},{},{},{},{},{},{:.9e},{:.9e},{:.9e},{},{}",
                p.p_phys,
                p.n_cycles,
                p.shots,
                p.failures,
                p.fail_z,
                p.fail_x,
                p.p_l,
                p.wilson_lo,
                p.wilson_hi,
                self.seed,
                self.convention
            )
            .expect("writing to a string");
        }
        out
    }
}

/// Least-squares slope of log p_L against log p_phys over points with at
/// least one failure.
pub fn loglog_slope(points: &[SweepPoint]) -> Option<f64> {
    let xy: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.failures > 0 && p.p_phys > 0.0)
        .map(|p| (p.p_phys.ln(), p.p_l.ln()))
        .collect();
    if xy.len() < 2 {
        return None;
    }
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Some(sxy / sxx)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Counts {
    shots: u64,
    failures: u64,
    fail_z: u64,
    fail_x: u64,
}

impl Counts {
    fn add(self, o: Counts) -> Counts {
        Counts {
            shots: self.shots + o.shots,
            failures: self.failures + o.failures,
            fail_z: self.fail_z + o.fail_z,
            fail_x: self.fail_x + o.fail_x,
        }
    }
}

/// A protocol plus everything that fixes the random stream.
#[derive(Debug, Clone)]
pub struct MonteCarlo {
    pub protocol: Protocol,
    pub order: BasisOrder,
    pub seed: u64,
}

impl MonteCarlo {
    pub fn new(protocol: Protocol, order: BasisOrder, seed: u64) -> Self {
        Self { protocol, order, seed }
    }

    /// Recorded in every CSV row.
    pub fn convention(&self) -> String {
        format!(
            "v{SCHEMA_VERSION};cycle=single-basis;order={};final=perfect",
            self.order
        )
    }

    /// Runs `shots` experiments of `n_cycles` cycles on stream family `point`.
    pub fn run_point(
        &self,
        point: u64,
        p_phys: f64,
        noise: &NoiseParams,
        n_cycles: usize,
        shots: u64,
    ) -> Result<SweepPoint, McError> {
        if n_cycles == 0 {
            return Err(McError::Cycles);
        }
        let chunks = shots.div_ceil(CHUNK);
        let counts = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                rng.set_stream((point << 32) | c);
                let n = CHUNK.min(shots - c * CHUNK);
                let mut k = Counts {
                    shots: n,
                    ..Counts::default()
                };
                for _ in 0..n {
                    let r = self
                        .protocol
                        .run_experiment(n_cycles, self.order, noise, &mut rng)
                        .expect("positive cycle count");
                    k.failures += r.failed() as u64;
                    k.fail_z += r.fail_z() as u64;
                    k.fail_x += r.fail_x() as u64;
                }
                k
            })
            .reduce(Counts::default, Counts::add);
        let (wilson_lo, wilson_hi) = wilson_interval(counts.failures, counts.shots, 0.95)?;
        Ok(SweepPoint {
            p_phys,
            n_cycles,
            shots: counts.shots,
            failures: counts.failures,
            fail_z: counts.fail_z,
            fail_x: counts.fail_x,
            p_l: counts.failures as f64 / counts.shots as f64,
            wilson_lo,
            wilson_hi,
        })
    }

    pub fn sweep_physical_rate(&self, p_list: &[f64], n_cycles: usize, rule: ShotRule) -> Result<SweepResult, McError> {
        if p_list.is_empty() {
            return Err(McError::EmptyGrid);
        }
        if let Some(&p) = p_list.iter().find(|&&p| !(0.0..0.5).contains(&p)) {
            return Err(McError::Rate(p));
        }
        let points = p_list
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let noise = NoiseParams::from_phys(p)?;
                self.run_point(i as u64, p, &noise, n_cycles, rule.shots(p))
            })
            .collect::<Result<_, _>>()?;
        Ok(self.result(points))
    }

    /// Fixed noise, varying cycle count. `p_phys` is only reported.
    pub fn sweep_cycles(
        &self,
        n_list: &[usize],
        p_phys: f64,
        noise: &NoiseParams,
        shots: u64,
    ) -> Result<SweepResult, McError> {
        if n_list.is_empty() {
            return Err(McError::EmptyGrid);
        }
        if n_list[0] == 0 || n_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(McError::Cycles);
        }
        let points = n_list
            .iter()
            .enumerate()
            .map(|(i, &n)| self.run_point(i as u64, p_phys, noise, n, shots))
            .collect::<Result<_, _>>()?;
        Ok(self.result(points))
    }

    fn result(&self, points: Vec<SweepPoint>) -> SweepResult {
        SweepResult {
            seed: self.seed,
            convention: self.convention(),
            points,
        }
    }
}

/// Log-spaced grid from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}
