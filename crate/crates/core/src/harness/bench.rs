use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{episode_seed, run_episode, summarize, EpisodeConfig, EpisodeResult, HarnessError};
use crate::domain::ScenarioSpec;
use crate::planner::Variant;

pub const CSV_HEADER: [&str; 7] = [
    "planner",
    "accuracy",
    "budget",
    "episodes",
    "mean_return",
    "std_err",
    "completion_rate",
];

/// One grid cell. Reals are kept at the CSV's six-decimal precision so
/// that a written row reads back identically.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub planner: String,
    pub accuracy: f64,
    pub budget: usize,
    pub episodes: usize,
    pub mean_return: f64,
    pub std_err: f64,
    pub completion_rate: f64,
}

fn quantize(x: f64) -> f64 {
    format!("{x:.6}").parse().expect("formatted float parses")
}

impl BenchmarkRow {
    pub fn from_results(planner: Variant, accuracy: f64, budget: usize, results: &[EpisodeResult]) -> Result<Self, HarnessError> {
        let returns: Vec<f64> = results.iter().map(|r| r.discounted_return).collect();
        let (mean, se) = summarize(&returns)?;
        let completed = results.iter().filter(|r| r.completed).count();
        Ok(BenchmarkRow {
            planner: planner.name().to_string(),
            accuracy: quantize(accuracy),
            budget,
            episodes: results.len(),
            mean_return: quantize(mean),
            std_err: quantize(se),
            completion_rate: quantize(completed as f64 / results.len() as f64),
        })
    }

    /// Normal-approximation 95% confidence interval of the mean.
    pub fn ci95(&self) -> (f64, f64) {
        let h = 1.96 * self.std_err;
        (self.mean_return - h, self.mean_return + h)
    }

    pub fn ci_disjoint(&self, other: &BenchmarkRow) -> bool {
        let (a0, a1) = self.ci95();
        let (b0, b1) = other.ci95();
        a1 < b0 || b1 < a0
    }

    fn record(&self) -> [String; 7] {
        [
            self.planner.clone(),
            format!("{:.6}", self.accuracy),
            self.budget.to_string(),
            self.episodes.to_string(),
            format!("{:.6}", self.mean_return),
            format!("{:.6}", self.std_err),
            format!("{:.6}", self.completion_rate),
        ]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkGrid {
    pub planners: Vec<Variant>,
    pub accuracies: Vec<f64>,
    pub budgets: Vec<usize>,
    pub episodes: usize,
    pub master_seed: u64,
}

impl BenchmarkGrid {
    /// Four accuracy levels and doubling budgets from 2, capped at 4096
    /// simulations unless `full` is set.
    pub fn reference(master_seed: u64, full: bool) -> Self {
        let max_exp = if full { 16 } else { 12 };
        BenchmarkGrid {
            planners: vec![Variant::Baseline, Variant::Relevance],
            accuracies: vec![0.5, 0.65, 0.75, 0.85],
            budgets: (1..=max_exp).map(|e| 1usize << e).collect(),
            episodes: 100,
            master_seed,
        }
    }

    fn cells(&self) -> Vec<(Variant, f64, usize)> {
        let mut out = Vec::new();
        for &p in &self.planners {
            for &a in &self.accuracies {
                for &b in &self.budgets {
                    out.push((p, a, b));
                }
            }
        }
        out
    }
}

fn cell_results(
    spec: &ScenarioSpec,
    base: &EpisodeConfig,
    planner: Variant,
    budget: usize,
    episodes: usize,
    master_seed: u64,
) -> Result<Vec<EpisodeResult>, HarnessError> {
    let mut cfg = *base;
    cfg.planner.variant = planner;
    cfg.planner.budget = budget;
    (0..episodes)
        .into_par_iter()
        .map(|i| {
            let seed = episode_seed(master_seed, planner.name(), spec.sensor_accuracy, budget, i);
            run_episode(spec, &cfg, seed).map_err(HarnessError::from)
        })
        .collect()
}

/// Runs one (planner, accuracy, budget) cell; `spec`'s own accuracy is
/// replaced by `accuracy`.
pub fn run_cell(
    spec: &ScenarioSpec,
    base: &EpisodeConfig,
    planner: Variant,
    accuracy: f64,
    budget: usize,
    episodes: usize,
    master_seed: u64,
) -> Result<BenchmarkRow, HarnessError> {
    let spec = spec
        .with_accuracy(accuracy)
        .map_err(|e| HarnessError::Format(e.to_string()))?;
    let results = cell_results(&spec, base, planner, budget, episodes, master_seed)?;
    BenchmarkRow::from_results(planner, accuracy, budget, &results)
}

/// One row per cell, in planner → accuracy → budget order.
pub fn run_benchmark(spec: &ScenarioSpec, grid: &BenchmarkGrid, base: &EpisodeConfig) -> Result<Vec<BenchmarkRow>, HarnessError> {
    grid.cells()
        .into_iter()
        .map(|(p, a, b)| run_cell(spec, base, p, a, b, grid.episodes, grid.master_seed))
        .collect()
}

pub fn write_csv<W: Write>(rows: &[BenchmarkRow], out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.write_record(row.record())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<BenchmarkRow>, HarnessError> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(HarnessError::Format(format!("unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    for record in r.records() {
        let rec = record?;
        let f = |i: usize| -> Result<f64, HarnessError> {
            rec[i]
                .parse()
                .map_err(|_| HarnessError::Format(format!("bad number `{}` in column {}", &rec[i], CSV_HEADER[i])))
        };
        let u = |i: usize| -> Result<usize, HarnessError> {
            rec[i]
                .parse()
                .map_err(|_| HarnessError::Format(format!("bad integer `{}` in column {}", &rec[i], CSV_HEADER[i])))
        };
        rows.push(BenchmarkRow {
            planner: rec[0].to_string(),
            accuracy: f(1)?,
            budget: u(2)?,
            episodes: u(3)?,
            mean_return: f(4)?,
            std_err: f(5)?,
            completion_rate: f(6)?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config;
    use crate::planner::PlannerConfig;

    fn tiny() -> EpisodeConfig {
        EpisodeConfig {
            planner: PlannerConfig::with_variant(Variant::Baseline, 8),
            particles: 200,
            ..Default::default()
        }
    }

    #[test]
    fn grid_cardinality_and_order() {
        let grid = BenchmarkGrid::reference(1, true);
        assert_eq!(grid.cells().len(), 128);
        assert_eq!(grid.episodes, 100);
        assert_eq!(grid.budgets.first(), Some(&2));
        assert_eq!(grid.budgets.last(), Some(&65536));
        assert_eq!(BenchmarkGrid::reference(1, false).budgets.last(), Some(&4096));
    }

    #[test]
    fn small_grid_rows_roundtrip() {
        let spec = config::bench_small();
        let grid = BenchmarkGrid {
            planners: vec![Variant::Baseline, Variant::Relevance],
            accuracies: vec![0.5, 0.85],
            budgets: vec![2, 8],
            episodes: 3,
            master_seed: 5,
        };
        let rows = run_benchmark(&spec, &grid, &tiny()).unwrap();
        assert_eq!(rows.len(), 8);
        assert_eq!((rows[0].planner.as_str(), rows[0].accuracy, rows[0].budget), ("baseline", 0.5, 2));
        assert_eq!((rows[7].planner.as_str(), rows[7].accuracy, rows[7].budget), ("relevance", 0.85, 8));
        for r in &rows {
            assert!(r.std_err >= 0.0 && (0.0..=1.0).contains(&r.completion_rate));
        }
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("planner,accuracy,budget,episodes,mean_return,std_err,completion_rate\n"));
        assert_eq!(read_csv(buf.as_slice()).unwrap(), rows);

        let again = run_cell(&spec, &tiny(), Variant::Relevance, 0.85, 8, 3, 5).unwrap();
        assert_eq!(again, rows[7]);
    }

    #[test]
    fn bad_header_is_rejected() {
        let err = read_csv("a,b\n1,2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, HarnessError::Format(_)));
    }
}
