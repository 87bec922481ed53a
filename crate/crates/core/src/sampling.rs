//! Interval distributions defined by 90% credible intervals, percentile
//! helpers, and deterministic seed-derived random streams.
//!
//! Every Monte Carlo task draws from streams keyed by (seed, task label,
//! chunk index), so results are bit-identical at any level of parallelism.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two-sided 5% normal quantile: Phi^-1(0.95).
pub const Z_90: f64 = 1.644_853_626_951_472_2;

/// Number of draws handled by one RNG stream chunk.
pub const CHUNK: usize = 4096;

/// Distribution shape for an interval-specified variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionShape {
    LogNormalFromCi,
    NormalFromCi,
}

/// A distribution pinned down by its 5th and 95th percentiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalDistribution {
    pub kind: DistributionShape,
    /// Value at the 5th percentile.
    pub low: f64,
    /// Value at the 95th percentile.
    pub high: f64,
}

impl IntervalDistribution {
    /// Log-normal with the given 90% CI; requires 0 < low < high.
    pub fn log_normal(low: f64, high: f64) -> Result<Self> {
        if !(low > 0.0 && low < high) {
            return Err(Error::InvalidDistribution(format!(
                "log-normal CI requires 0 < low < high, got [{low}, {high}]"
            )));
        }
        Ok(IntervalDistribution {
            kind: DistributionShape::LogNormalFromCi,
            low,
            high,
        })
    }

    /// Normal with the given 90% CI; requires low < high.
    pub fn normal(low: f64, high: f64) -> Result<Self> {
        if !(low < high) {
            return Err(Error::InvalidDistribution(format!(
                "normal CI requires low < high, got [{low}, {high}]"
            )));
        }
        Ok(IntervalDistribution {
            kind: DistributionShape::NormalFromCi,
            low,
            high,
        })
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            DistributionShape::LogNormalFromCi => Self::log_normal(self.low, self.high).map(|_| ()),
            DistributionShape::NormalFromCi => Self::normal(self.low, self.high).map(|_| ()),
        }
    }

    /// Analytic median: sqrt(low * high) for log-normal, midpoint for normal.
    pub fn median(&self) -> f64 {
        match self.kind {
            DistributionShape::LogNormalFromCi => (self.low * self.high).sqrt(),
            DistributionShape::NormalFromCi => 0.5 * (self.low + self.high),
        }
    }

    /// One draw. The log-normal maps ln(low)/ln(high) to the +-1.6449
    /// normal quantiles; the normal does the same on the raw scale.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        match self.kind {
            DistributionShape::LogNormalFromCi => {
                let mu = 0.5 * (self.low.ln() + self.high.ln());
                let sigma = (self.high.ln() - self.low.ln()) / (2.0 * Z_90);
                (mu + sigma * z).exp()
            }
            DistributionShape::NormalFromCi => {
                let mu = 0.5 * (self.low + self.high);
                let sigma = (self.high - self.low) / (2.0 * Z_90);
                mu + sigma * z
            }
        }
    }
}

/// FNV-1a over a label, for deriving independent substreams from one seed.
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x1000_0000_01b3);
    }
    hash
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// RNG stream for one (seed, task, chunk) triple. Streams for distinct
/// triples are independent; the same triple always yields the same stream.
pub fn stream_rng(seed: u64, task: &str, chunk: u64) -> ChaCha8Rng {
    let mut state = seed ^ fnv1a(task.as_bytes()) ^ chunk.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    let mut key = [0u8; 32];
    for word in key.chunks_exact_mut(8) {
        word.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Linear-interpolation percentile of a sorted slice (p in [0, 1]).
pub fn percentile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of empty slice");
    let idx = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = idx.floor() as usize;
    let hi = idx.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let w = idx - lo as f64;
        sorted[lo] * (1.0 - w) + sorted[hi] * w
    }
}

/// Median, 5th, and 95th percentile of an unsorted sample.
pub fn credible_interval_90(samples: &[f64]) -> (f64, f64, f64) {
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    (
        percentile(&sorted, 0.05),
        percentile(&sorted, 0.5),
        percentile(&sorted, 0.95),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_intervals_rejected() {
        assert!(IntervalDistribution::log_normal(2.0, 2.0).is_err());
        assert!(IntervalDistribution::log_normal(0.0, 2.0).is_err());
        assert!(IntervalDistribution::normal(1.0, 1.0).is_err());
    }

    #[test]
    fn analytic_medians() {
        let d = IntervalDistribution::log_normal(1.2, 4.0).unwrap();
        assert!((d.median() - 2.1908902300206643).abs() < 1e-12);
        let d = IntervalDistribution::log_normal(0.05, 0.80).unwrap();
        assert!((d.median() - 0.2).abs() < 1e-12);
        let d = IntervalDistribution::normal(0.10, 0.18).unwrap();
        assert!((d.median() - 0.14).abs() < 1e-12);
    }

    #[test]
    fn sampled_quantiles_match_the_interval() {
        let d = IntervalDistribution::log_normal(1.2, 4.0).unwrap();
        let mut rng = stream_rng(7, "quantile-check", 0);
        let samples: Vec<f64> = (0..100_000).map(|_| d.sample(&mut rng)).collect();
        let (p5, med, p95) = credible_interval_90(&samples);
        assert!((med - 2.19).abs() < 0.05, "median {med}");
        assert!((p5 - 1.2).abs() < 0.05, "p5 {p5}");
        assert!((p95 - 4.0).abs() < 0.12, "p95 {p95}");
    }

    #[test]
    fn streams_are_reproducible_and_task_separated() {
        let a: Vec<u64> = {
            let mut r = stream_rng(42, "task-a", 0);
            (0..4).map(|_| r.gen()).collect()
        };
        let b: Vec<u64> = {
            let mut r = stream_rng(42, "task-a", 0);
            (0..4).map(|_| r.gen()).collect()
        };
        assert_eq!(a, b);
        let c: Vec<u64> = {
            let mut r = stream_rng(42, "task-b", 0);
            (0..4).map(|_| r.gen()).collect()
        };
        assert_ne!(a, c);
        let d: Vec<u64> = {
            let mut r = stream_rng(42, "task-a", 1);
            (0..4).map(|_| r.gen()).collect()
        };
        assert_ne!(a, d);
    }

    #[test]
    fn percentile_interpolates() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(percentile(&v, 0.0), 1.0);
        assert_eq!(percentile(&v, 1.0), 4.0);
        assert_eq!(percentile(&v, 0.5), 2.5);
    }
}
