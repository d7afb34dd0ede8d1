use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::config::{ScenarioConfig, Variant};
use super::scenario::{Scenario, SimulationLog};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub seed: u64,
    pub variant: Variant,
    pub cumulative_cost: f64,
    pub final_window_mean_norm: f64,
    pub state_violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub seeds: Vec<u64>,
    pub rows: Vec<CompareRow>,
    pub logs: Vec<SimulationLog>,
}

impl Comparison {
    pub fn cost(&self, seed: u64, variant: Variant) -> Option<f64> {
        self.rows.iter().find(|r| r.seed == seed && r.variant == variant).map(|r| r.cumulative_cost)
    }

    /// Fraction of seeds on which `a` has strictly lower cumulative cost than `b`.
    pub fn win_rate(&self, a: Variant, b: Variant) -> f64 {
        if self.seeds.is_empty() {
            return 0.0;
        }
        let wins = self
            .seeds
            .iter()
            .filter(|&&s| matches!((self.cost(s, a), self.cost(s, b)), (Some(x), Some(y)) if x < y))
            .count();
        wins as f64 / self.seeds.len() as f64
    }

    pub fn log(&self, seed: u64, variant: Variant) -> Option<&SimulationLog> {
        self.logs.iter().find(|l| l.seed == seed && l.variant == variant)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{:>6} {:>8} {:>14} {:>14} {:>6}\n", "seed", "variant", "cost", "tail_mean_|x|", "viol");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:>6} {:>8} {:>14.6e} {:>14.6e} {:>6}",
                r.seed, r.variant.name(), r.cumulative_cost, r.final_window_mean_norm, r.state_violations
            );
        }
        let present: Vec<Variant> = Variant::ALL.into_iter().filter(|v| self.rows.iter().any(|r| r.variant == *v)).collect();
        for a in &present {
            for b in &present {
                if a != b {
                    let _ = writeln!(s, "win rate {a} < {b}: {:.2}", self.win_rate(*a, *b));
                }
            }
        }
        s
    }
}

/// Runs every variant on every seed, in parallel across runs.
pub fn compare_controllers(cfg: &ScenarioConfig, seeds: &[u64], variants: &[Variant]) -> Result<Comparison> {
    if seeds.is_empty() || variants.is_empty() {
        return Err(Error::Config("compare needs at least one seed and one variant".into()));
    }
    let jobs: Vec<(u64, Variant)> = seeds.iter().flat_map(|&s| variants.iter().map(move |&v| (s, v))).collect();
    let logs = jobs
        .par_iter()
        .map(|&(seed, variant)| Scenario::prepare_with(cfg, variant, seed)?.run())
        .collect::<Result<Vec<_>>>()?;
    let rows = logs
        .iter()
        .map(|l| CompareRow {
            seed: l.seed,
            variant: l.variant,
            cumulative_cost: l.summary.cumulative_cost,
            final_window_mean_norm: l.summary.final_window_mean_norm,
            state_violations: l.summary.state_violations,
        })
        .collect();
    Ok(Comparison {
        seeds: seeds.to_vec(),
        rows,
        logs,
    })
}

/// Sample autocorrelation of the mean-removed series at `lag`.
pub fn autocorrelation(series: &[f64], lag: usize) -> f64 {
    let n = series.len();
    if lag >= n {
        return 0.0;
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let var: f64 = series.iter().map(|v| (v - mean).powi(2)).sum();
    if var == 0.0 {
        return 0.0;
    }
    let cov: f64 = (0..n - lag).map(|i| (series[i] - mean) * (series[i + lag] - mean)).sum();
    cov / var
}

/// Lag in `[min_lag, max_lag]` with the largest autocorrelation.
pub fn dominant_period(series: &[f64], min_lag: usize, max_lag: usize) -> Option<usize> {
    (min_lag..=max_lag.min(series.len().saturating_sub(1)))
        .map(|lag| (lag, autocorrelation(series, lag)))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(lag, _)| lag)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_wave_period_is_found() {
        let wave: Vec<f64> = (0..400).map(|t| if (t / 50) % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert_eq!(dominant_period(&wave, 60, 140), Some(100));
        assert!((autocorrelation(&wave, 0) - 1.0).abs() < 1e-12);
        assert_eq!(autocorrelation(&[2.0; 10], 3), 0.0);
    }
}
