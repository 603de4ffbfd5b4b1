//! Single-photon trial sampler.
//!
//! Each trial draws one detector outcome from a [`DetectorDistribution`] by
//! inverse CDF over the fixed order LD, DD, ABS. The uniform variates come
//! from xoshiro256** seeded through SplitMix64, so a `(distribution, n,
//! seed)` triple always yields the same record sequence.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::interferometer::{DetectorDistribution, Outcome};

/// Two-sided z threshold for [`frequency_check`].
pub const Z_THRESHOLD: f64 = 4.0;
const DIST_SUM_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MonteCarloError {
    #[error("invalid detector distribution: {0}")]
    InvalidDistribution(String),
    #[error("sample size must be at least 1")]
    EmptySample,
}

pub type Result<T> = std::result::Result<T, MonteCarloError>;

/// SplitMix64, used only to expand a 64-bit seed into xoshiro state.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
}

/// xoshiro256** 1.0 (Blackman & Vigna).
#[derive(Debug, Clone)]
pub struct Xoshiro256StarStar {
    s: [u64; 4],
}

impl Xoshiro256StarStar {
    pub fn seed_from_u64(seed: u64) -> Self {
        let mut sm = SplitMix64::new(seed);
        let s = [sm.next_u64(), sm.next_u64(), sm.next_u64(), sm.next_u64()];
        Self { s }
    }

    pub fn next_u64(&mut self) -> u64 {
        let result = self.s[1].wrapping_mul(5).rotate_left(7).wrapping_mul(9);
        let t = self.s[1] << 17;
        self.s[2] ^= self.s[0];
        self.s[3] ^= self.s[1];
        self.s[1] ^= self.s[2];
        self.s[0] ^= self.s[3];
        self.s[2] ^= t;
        self.s[3] = self.s[3].rotate_left(45);
        result
    }

    /// Uniform in `[0, 1)` from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TrialRecord {
    pub outcome: Outcome,
    pub trial_index: u64,
}

/// Accepts probabilities up to `DIST_SUM_TOL` outside `[0, 1]` (rounding
/// from the state evolution) and clamps them.
fn validate(dist: &DetectorDistribution) -> Result<DetectorDistribution> {
    for outcome in Outcome::ALL {
        let p = dist.probability(outcome);
        if !p.is_finite() || !(-DIST_SUM_TOL..=1.0 + DIST_SUM_TOL).contains(&p) {
            return Err(MonteCarloError::InvalidDistribution(format!(
                "p_{} = {p} is not a probability",
                outcome.label().to_lowercase()
            )));
        }
    }
    let total = dist.total();
    if (total - 1.0).abs() > DIST_SUM_TOL {
        return Err(MonteCarloError::InvalidDistribution(format!(
            "probabilities sum to {total}"
        )));
    }
    Ok(clamped(dist))
}

fn clamped(dist: &DetectorDistribution) -> DetectorDistribution {
    DetectorDistribution {
        p_ld: dist.p_ld.clamp(0.0, 1.0),
        p_dd: dist.p_dd.clamp(0.0, 1.0),
        p_abs: dist.p_abs.clamp(0.0, 1.0),
    }
}

fn draw(dist: &DetectorDistribution, u: f64) -> Outcome {
    let mut acc = 0.0;
    for outcome in Outcome::ALL {
        acc += dist.probability(outcome);
        if u < acc {
            return outcome;
        }
    }
    // u landed in the rounding gap above the cumulative sum.
    *Outcome::ALL
        .iter()
        .rev()
        .find(|&&o| dist.probability(o) > 0.0)
        .expect("validated distribution has a positive entry")
}

/// `n` independent trials, deterministic in `seed`.
pub fn sample_outcomes(dist: &DetectorDistribution, n: u64, seed: u64) -> Result<Vec<TrialRecord>> {
    let dist = validate(dist)?;
    if n == 0 {
        return Err(MonteCarloError::EmptySample);
    }
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
    Ok((0..n)
        .map(|trial_index| TrialRecord {
            outcome: draw(&dist, rng.next_f64()),
            trial_index,
        })
        .collect())
}

/// Observed vs expected frequencies for a batch of trials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TallyReport {
    pub n: u64,
    pub counts: BTreeMap<Outcome, u64>,
    pub empirical: BTreeMap<Outcome, f64>,
    pub expected: BTreeMap<Outcome, f64>,
    pub z_scores: BTreeMap<Outcome, f64>,
    pub pass: bool,
}

impl TallyReport {
    pub fn max_abs_z(&self) -> f64 {
        self.z_scores.values().fold(0.0, |m, z| m.max(z.abs()))
    }
}

/// Per-outcome z score `(f − p)·√n / √(p(1 − p))`; outcomes with `p ∈ {0, 1}`
/// have zero variance and score 0. The report passes when every `|z| < 4`.
pub fn frequency_check(records: &[TrialRecord], dist: &DetectorDistribution) -> TallyReport {
    let dist = clamped(dist);
    let n = records.len() as u64;
    let mut counts: BTreeMap<Outcome, u64> = Outcome::ALL.iter().map(|&o| (o, 0)).collect();
    for r in records {
        *counts.entry(r.outcome).or_default() += 1;
    }
    let nf = n as f64;
    let mut empirical = BTreeMap::new();
    let mut expected = BTreeMap::new();
    let mut z_scores = BTreeMap::new();
    for outcome in Outcome::ALL {
        let p = dist.probability(outcome);
        let f = if n == 0 {
            0.0
        } else {
            counts[&outcome] as f64 / nf
        };
        let variance = p * (1.0 - p);
        let z = if n == 0 || variance <= 0.0 {
            0.0
        } else {
            (f - p) * nf.sqrt() / variance.sqrt()
        };
        empirical.insert(outcome, f);
        expected.insert(outcome, p);
        z_scores.insert(outcome, z);
    }
    let pass = z_scores.values().all(|z| z.abs() < Z_THRESHOLD);
    TallyReport {
        n,
        counts,
        empirical,
        expected,
        z_scores,
        pass,
    }
}
