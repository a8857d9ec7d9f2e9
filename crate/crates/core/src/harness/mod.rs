//! Episode runner, benchmark grid, scenario timeline, interactive sessions.

mod bench;
mod episode;
mod interactive;
mod timeline;

pub use bench::{read_csv, run_benchmark, run_cell, write_csv, BenchmarkGrid, BenchmarkRow, CSV_HEADER};
pub use episode::{run_episode, EpisodeConfig, EpisodeResult, LogEntry};
pub use interactive::interactive_session;
pub use timeline::{restock_counts, timeline_run, write_jsonl, Actor, Durations, TimelineEvent, TimelineRun, TimelineSummary};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("cannot summarize an empty sample")]
    EmptyInput,
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Plan(#[from] crate::planner::PlanError),
}

/// Sample mean and standard error (n − 1 denominator); a single sample has
/// standard error 0.
pub fn summarize(values: &[f64]) -> Result<(f64, f64), HarnessError> {
    let n = values.len();
    if n == 0 {
        return Err(HarnessError::EmptyInput);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return Ok((mean, 0.0));
    }
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    Ok((mean, (var / n as f64).sqrt()))
}

/// Σ γ^t r_t.
pub fn discounted_sum(rewards: &[f64], discount: f64) -> f64 {
    rewards
        .iter()
        .rev()
        .fold(0.0, |acc, r| r + discount * acc)
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable seed derived from a sequence of words.
pub fn derive_seed(words: &[u64]) -> u64 {
    words
        .iter()
        .fold(0x243F_6A88_85A3_08D3, |h, &w| splitmix64(h ^ splitmix64(w)))
}

pub(crate) fn fnv1a(s: &str) -> u64 {
    s.bytes()
        .fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Seed of one benchmark episode; every grid cell is reproducible alone.
pub fn episode_seed(master_seed: u64, planner: &str, accuracy: f64, budget: usize, episode: usize) -> u64 {
    derive_seed(&[master_seed, fnv1a(planner), accuracy.to_bits(), budget as u64, episode as u64])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summarize_examples() {
        let (m, se) = summarize(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(m, 2.0);
        assert!((se - 1.0 / 3f64.sqrt()).abs() < 1e-12);
        assert_eq!(summarize(&[5.0]).unwrap(), (5.0, 0.0));
        assert!(matches!(summarize(&[]), Err(HarnessError::EmptyInput)));
    }

    #[test]
    fn discounted_sum_example() {
        let g = 0.99;
        let by_hand = -0.5 + g * -0.5 + g * g * 2.0;
        assert!((discounted_sum(&[-0.5, -0.5, 2.0], g) - by_hand).abs() < 1e-15);
        assert!((by_hand - 0.9652).abs() < 1e-6);
    }

    #[test]
    fn seeds_separate_cells() {
        let a = episode_seed(1, "baseline", 0.85, 64, 0);
        assert_eq!(a, episode_seed(1, "baseline", 0.85, 64, 0));
        assert_ne!(a, episode_seed(1, "relevance", 0.85, 64, 0));
        assert_ne!(a, episode_seed(1, "baseline", 0.75, 64, 0));
        assert_ne!(a, episode_seed(1, "baseline", 0.85, 128, 0));
        assert_ne!(a, episode_seed(1, "baseline", 0.85, 64, 1));
        assert_ne!(a, episode_seed(2, "baseline", 0.85, 64, 0));
    }
}
