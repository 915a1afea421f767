//! Search for the best hedging strength on pure states.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sweep::{draw_dataset, draw_state, StateSampling};
use crate::error::{Error, Result};
use crate::estimators::{hmle, SolverConfig};
use crate::likelihood::HedgingParameter;
use crate::metrics::quantum_relative_entropy;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    /// Shots per Pauli axis, one scan per entry.
    pub shots: Vec<u64>,
    pub betas: Vec<f64>,
    pub n_states: usize,
    pub n_datasets: usize,
    pub master_seed: u64,
}

impl ScanConfig {
    pub fn validate(&self) -> Result<()> {
        if self.shots.is_empty() || self.betas.is_empty() {
            return Err(Error::InvalidConfig(
                "need at least one N and one beta".into(),
            ));
        }
        if self.shots.contains(&0) || self.n_states == 0 || self.n_datasets == 0 {
            return Err(Error::InvalidConfig(
                "N, n_states and n_datasets must be at least 1".into(),
            ));
        }
        for &b in &self.betas {
            HedgingParameter::new(b)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub shots_per_basis: u64,
    pub beta: f64,
    /// Mean of `D(ρ ‖ ρ_H)` over all states and datasets.
    pub mean_kl: f64,
    pub n_trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanOptimum {
    pub shots_per_basis: u64,
    /// Grid value with the smallest mean KL.
    pub beta: f64,
    pub mean_kl: f64,
    /// `1/(2√N)`.
    pub reference: f64,
    /// Whether the grid covers `[1/(8√N), 4/√N]`; outside that span the
    /// argmin may sit at a grid end.
    pub grid_spans_range: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub config: ScanConfig,
    pub rows: Vec<ScanRow>,
    pub optima: Vec<ScanOptimum>,
    /// Solves that errored and were left out of the means.
    pub n_failures: usize,
}

pub fn grid_spans_range(betas: &[f64], shots: u64) -> bool {
    let root = (shots as f64).sqrt();
    let lo = betas.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = betas.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    lo <= 1.0 / (8.0 * root) && hi >= 4.0 / root
}

/// For each `N`, the mean KL error of HMLE over uniformly random pure
/// states for every β on the grid, and the grid argmin.
pub fn pure_state_beta_scan(cfg: &ScanConfig) -> Result<ScanReport> {
    cfg.validate()?;
    let solver = SolverConfig::default();
    let betas: Vec<HedgingParameter> = cfg
        .betas
        .iter()
        .map(|&b| HedgingParameter::new(b))
        .collect::<Result<_>>()?;
    let states: Vec<_> = (0..cfg.n_states as u64)
        .map(|s| draw_state(StateSampling::Pure, cfg.master_seed, s))
        .collect();

    let mut rows = Vec::new();
    let mut optima = Vec::new();
    let mut n_failures = 0;
    for &shots in &cfg.shots {
        let cells: Vec<(u64, u64)> = (0..cfg.n_states as u64)
            .flat_map(|s| (0..cfg.n_datasets as u64).map(move |d| (s, d)))
            .collect();
        let per_cell: Vec<Vec<Option<f64>>> = cells
            .par_iter()
            .map(|&(s, d)| {
                let truth = &states[s as usize];
                let Ok(rec) = draw_dataset(truth, shots, cfg.master_seed, s, d) else {
                    return vec![None; betas.len()];
                };
                betas
                    .iter()
                    .map(|&b| {
                        let (rho, _) = hmle(&rec, b, &solver).ok()?;
                        quantum_relative_entropy(truth, &rho).ok()
                    })
                    .collect()
            })
            .collect();

        let first = rows.len();
        for (k, &beta) in cfg.betas.iter().enumerate() {
            let (mut sum, mut n) = (0.0, 0usize);
            for cell in &per_cell {
                match cell[k] {
                    Some(v) => {
                        sum += v;
                        n += 1;
                    }
                    None => n_failures += 1,
                }
            }
            rows.push(ScanRow {
                shots_per_basis: shots,
                beta,
                mean_kl: if n > 0 { sum / n as f64 } else { f64::NAN },
                n_trials: n,
            });
        }
        let best = rows[first..]
            .iter()
            .filter(|r| !r.mean_kl.is_nan())
            .min_by(|a, b| a.mean_kl.total_cmp(&b.mean_kl))
            .ok_or(Error::NoData)?;
        optima.push(ScanOptimum {
            shots_per_basis: shots,
            beta: best.beta,
            mean_kl: best.mean_kl,
            reference: 0.5 / (shots as f64).sqrt(),
            grid_spans_range: grid_spans_range(&cfg.betas, shots),
        });
    }
    Ok(ScanReport {
        config: cfg.clone(),
        rows,
        optima,
        n_failures,
    })
}
