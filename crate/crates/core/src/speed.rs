//! Speed classes of stages and empirical phase lengths.
//!
//! The class is read off the certificate: if no live transition can increase
//! it and some live transition decreases it, the stage is tagged
//! [`SpeedClass::QuadLog`]; if a live transition can increase it, the stage
//! is tagged [`SpeedClass::ExpNLogN`]. This is a syntactic pattern, not a
//! proof of the bound, and is reported as such next to the empirical
//! estimate.

use std::fmt;

use num::rational::Ratio;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::{Configuration, Protocol, TransitionId};
use crate::stage::{Certificate, Stage, StageError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpeedClass {
    /// `O(n^2 log n)` interactions.
    QuadLog,
    /// `2^O(n log n)` interactions.
    ExpNLogN,
    Unknown,
}

impl fmt::Display for SpeedClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpeedClass::QuadLog => "O(n^2 log n)",
            SpeedClass::ExpNLogN => "2^O(n log n)",
            SpeedClass::Unknown => "unknown",
        })
    }
}

pub fn classify(p: &Protocol, f: &Certificate, dead: &[TransitionId]) -> SpeedClass {
    let deltas: Vec<i64> = (0..p.transitions.len())
        .filter(|t| !dead.contains(t))
        .map(|t| f.delta(p.transitions[t].displacement()))
        .collect();
    if deltas.iter().any(|&d| d > 0) {
        SpeedClass::ExpNLogN
    } else if deltas.iter().any(|&d| d < 0) {
        SpeedClass::QuadLog
    } else {
        SpeedClass::Unknown
    }
}

/// [`classify`] with the stage's own certificate and dead set.
pub fn classify_stage(p: &Protocol, s: &Stage) -> Result<SpeedClass, StageError> {
    let f = s
        .certificate
        .as_ref()
        .ok_or_else(|| StageError::Terminal(s.id.clone()))?;
    Ok(classify(p, f, &s.dead))
}

pub const DEFAULT_INTERACTION_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SizeEstimate {
    pub n: u64,
    pub start: Configuration,
    pub trials: u64,
    /// Trials that hit the interaction cap; they count with the cap value.
    pub censored: u64,
    pub total_interactions: u128,
}

impl SizeEstimate {
    pub fn mean_exact(&self) -> Ratio<u128> {
        Ratio::new(self.total_interactions, self.trials as u128)
    }

    pub fn mean(&self) -> f64 {
        self.total_interactions as f64 / self.trials as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeedEstimate {
    pub stage: String,
    pub points: Vec<SizeEstimate>,
    /// Sizes with no start configuration outside the children.
    pub skipped: Vec<u64>,
    /// Least-squares slope of `ln(mean)` against `ln(n)`.
    pub slope: Option<f64>,
    /// Means are non-decreasing in `n`. A `false` is a flag, not an error.
    pub monotone: bool,
}

impl SpeedEstimate {
    pub fn write_csv<W: std::io::Write>(&self, out: &mut W, header: bool) -> std::io::Result<()> {
        if header {
            writeln!(out, "stage,n,mean,trials,censored")?;
        }
        for pt in &self.points {
            writeln!(
                out,
                "{},{},{:.3},{},{}",
                self.stage,
                pt.n,
                pt.mean(),
                pt.trials,
                pt.censored
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EstimateOptions {
    pub trials: u64,
    pub seed: u64,
    pub interaction_cap: u64,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        EstimateOptions {
            trials: 200,
            seed: 0,
            interaction_cap: DEFAULT_INTERACTION_CAP,
        }
    }
}

/// Start configuration for phase measurements at size `n`: among the
/// configurations of the stage outside all children, one with the largest
/// certificate value, ties broken by agent order.
pub fn phase_start(p: &Protocol, stage: &Stage, children: &[&Stage], n: u64) -> Option<Configuration> {
    let f = stage.certificate.as_ref()?;
    let mut best: Option<(u64, Configuration)> = None;
    for c in p.all_configurations(n) {
        if !stage.constraint.satisfies(&c) || children.iter().any(|ch| ch.constraint.satisfies(&c)) {
            continue;
        }
        let v = f.value(&c);
        if best.as_ref().is_none_or(|(bv, _)| v > *bv) {
            best = Some((v, c));
        }
    }
    best.map(|(_, c)| c)
}

fn trial_seed(seed: u64, n: u64, trial: u64) -> u64 {
    // splitmix64 over the three inputs
    let mut z = seed
        .wrapping_add(n.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(trial.wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Number of scheduler steps (Null steps included) from `start` until a child
/// is entered, or `None` when the cap is hit first.
pub fn phase_length(
    p: &Protocol,
    start: &Configuration,
    children: &[&Stage],
    cap: u64,
    rng: &mut ChaCha8Rng,
) -> Option<u64> {
    let mut c = start.clone();
    let mut steps = 0;
    while !children.iter().any(|ch| ch.constraint.satisfies(&c)) {
        if steps >= cap {
            return None;
        }
        let (_, next) = p.random_step(&c, rng).ok()?;
        c = next;
        steps += 1;
    }
    Some(steps)
}

/// Mean phase length of `stage` at each requested size. Trials run in
/// parallel, each with its own generator derived from the seed, so results do
/// not depend on the thread count.
pub fn estimate(
    p: &Protocol,
    stage: &Stage,
    children: &[&Stage],
    sizes: &[u64],
    opts: EstimateOptions,
) -> Result<SpeedEstimate, StageError> {
    if stage.certificate.is_none() {
        return Err(StageError::Terminal(stage.id.clone()));
    }
    let trials = opts.trials.max(1);
    let mut points = Vec::new();
    let mut skipped = Vec::new();
    for &n in sizes {
        let start = match phase_start(p, stage, children, n) {
            Some(s) if n >= 2 => s,
            _ => {
                skipped.push(n);
                continue;
            }
        };
        let results: Vec<Option<u64>> = (0..trials)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(opts.seed, n, i));
                phase_length(p, &start, children, opts.interaction_cap, &mut rng)
            })
            .collect();
        let censored = results.iter().filter(|r| r.is_none()).count() as u64;
        let total: u128 = results
            .iter()
            .map(|r| r.unwrap_or(opts.interaction_cap) as u128)
            .sum();
        points.push(SizeEstimate {
            n,
            start,
            trials,
            censored,
            total_interactions: total,
        });
    }
    let monotone = points.windows(2).all(|w| w[0].mean() <= w[1].mean());
    let slope = fit_slope(&points);
    Ok(SpeedEstimate {
        stage: stage.id.clone(),
        points,
        skipped,
        slope,
        monotone,
    })
}

fn fit_slope(points: &[SizeEstimate]) -> Option<f64> {
    let xy: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.mean() > 0.0)
        .map(|p| ((p.n as f64).ln(), p.mean().ln()))
        .collect();
    if xy.len() < 2 {
        return None;
    }
    let k = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / k;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = xy.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xy.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
