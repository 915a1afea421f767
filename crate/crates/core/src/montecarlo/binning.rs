//! Aggregation of per-state errors into bins of mixedness `1 − r²`.

use serde::{Deserialize, Serialize};

use super::sweep::{EstimatorKind, MetricKind, StateSummary, SweepReport};
use crate::error::{Error, Result};

/// Lowest bin edge; purer states fall into the first bin.
pub const MIN_MIXEDNESS: f64 = 1e-4;
/// `1 − r²` of the maximally mixed qubit.
pub const MAX_MIXEDNESS: f64 = 0.25;

/// Mixedness coordinate used to order states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixednessAxis {
    /// `1 − r²` with `r² = (1 + Tr ρ²)/2`, in `[0, 1/4]` for qubits.
    #[default]
    RadialCoordinate,
    /// `1 − |b|²` with `b` the Bloch vector, in `[0, 1]`.
    BlochRadius,
}

impl MixednessAxis {
    pub fn of(self, s: &StateSummary) -> f64 {
        match self {
            MixednessAxis::RadialCoordinate => s.mixedness(),
            MixednessAxis::BlochRadius => {
                let b = s.bloch.norm();
                1.0 - b * b
            }
        }
    }

    pub fn max(self) -> f64 {
        match self {
            MixednessAxis::RadialCoordinate => MAX_MIXEDNESS,
            MixednessAxis::BlochRadius => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinnedCurve {
    pub estimator: EstimatorKind,
    pub beta: f64,
    pub metric: MetricKind,
    /// Mean over the states of each bin of their per-state mean error;
    /// `None` for empty bins, `+∞` if any state's mean is infinite.
    pub means: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinnedCurves {
    /// `n_bins + 1` log-spaced edges from [`MIN_MIXEDNESS`] to [`MAX_MIXEDNESS`].
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    pub axis: MixednessAxis,
    /// `√(3/N)`.
    pub regime_boundary: f64,
    pub curves: Vec<BinnedCurve>,
}

pub fn log_edges(n_bins: usize) -> Vec<f64> {
    log_edges_to(n_bins, MAX_MIXEDNESS)
}

/// `n_bins + 1` log-spaced edges from [`MIN_MIXEDNESS`] to `max`.
pub fn log_edges_to(n_bins: usize, max: f64) -> Vec<f64> {
    let (lo, hi) = (MIN_MIXEDNESS.ln(), max.ln());
    (0..=n_bins)
        .map(|k| {
            if k == 0 {
                MIN_MIXEDNESS
            } else if k == n_bins {
                max
            } else {
                (lo + (hi - lo) * k as f64 / n_bins as f64).exp()
            }
        })
        .collect()
}

/// Index of the bin containing `mixedness`, clamping values outside the
/// edge range to the first or last bin.
pub fn bin_index(edges: &[f64], mixedness: f64) -> usize {
    let n = edges.len() - 1;
    edges[1..n].iter().take_while(|&&e| mixedness >= e).count()
}

/// Mean of the per-state means of `states`; `+∞` if any of them is.
pub fn mean_over_states<'a>(
    states: impl Iterator<Item = &'a StateSummary>,
    estimator: EstimatorKind,
    beta: f64,
    metric: MetricKind,
) -> Option<f64> {
    let (mut sum, mut n) = (0.0, 0usize);
    for s in states {
        if let Some(m) = s.mean(estimator, beta, metric) {
            sum += m.mean;
            n += 1;
        }
    }
    (n > 0).then(|| sum / n as f64)
}

/// Bins states by `1 − r²` between [`MIN_MIXEDNESS`] and [`MAX_MIXEDNESS`].
pub fn bin_by_radius(report: &SweepReport, n_bins: usize) -> Result<BinnedCurves> {
    bin_by_mixedness(report, n_bins, MixednessAxis::RadialCoordinate)
}

pub fn bin_by_mixedness(
    report: &SweepReport,
    n_bins: usize,
    axis: MixednessAxis,
) -> Result<BinnedCurves> {
    if report.states.is_empty() || n_bins == 0 {
        return Err(Error::EmptyInput);
    }
    let edges = log_edges_to(n_bins, axis.max());
    let assignment: Vec<usize> = report
        .states
        .iter()
        .map(|s| bin_index(&edges, axis.of(s)))
        .collect();
    let mut counts = vec![0; n_bins];
    for &b in &assignment {
        counts[b] += 1;
    }
    let cfg = &report.config;
    let mut curves = Vec::new();
    for (estimator, beta) in cfg.columns() {
        for &metric in &cfg.metrics {
            let means = (0..n_bins)
                .map(|b| {
                    let members = report
                        .states
                        .iter()
                        .zip(&assignment)
                        .filter(|(_, &a)| a == b)
                        .map(|(s, _)| s);
                    mean_over_states(members, estimator, beta, metric)
                })
                .collect();
            curves.push(BinnedCurve {
                estimator,
                beta,
                metric,
                means,
            });
        }
    }
    Ok(BinnedCurves {
        edges,
        counts,
        axis,
        regime_boundary: report.regime_boundary,
        curves,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::sweep::{run_sweep, ExperimentConfig, StateSampling};

    #[test]
    fn edges_are_log_spaced() {
        let e = log_edges(4);
        assert_eq!(e.len(), 5);
        assert_eq!(e[0], MIN_MIXEDNESS);
        assert_eq!(e[4], MAX_MIXEDNESS);
        let ratio = (MAX_MIXEDNESS / MIN_MIXEDNESS).powf(0.25);
        for w in e.windows(2) {
            assert!((w[1] / w[0] - ratio).abs() < 1e-12);
        }
    }

    #[test]
    fn bloch_axis_spans_unit_interval() {
        let e = log_edges_to(4, 1.0);
        assert_eq!((e[0], e[4]), (MIN_MIXEDNESS, 1.0));
        assert!((e[1] - 1e-3).abs() < 1e-15);
    }

    #[test]
    fn bin_index_clamps() {
        let e = log_edges(3);
        assert_eq!(bin_index(&e, 0.0), 0);
        assert_eq!(bin_index(&e, 1e-9), 0);
        assert_eq!(bin_index(&e, 0.25), 2);
        assert_eq!(bin_index(&e, 0.3), 2);
        assert_eq!(bin_index(&e, e[1]), 1);
    }

    #[test]
    fn bins_recompute_from_trials() {
        let cfg = ExperimentConfig {
            n_states: 6,
            n_datasets: 3,
            shots_per_basis: 20,
            betas: vec![0.1],
            estimators: vec![EstimatorKind::Mle, EstimatorKind::Hmle],
            metrics: vec![MetricKind::Hs],
            master_seed: 11,
            sampling: StateSampling::HilbertSchmidt,
            tol: 1e-10,
            max_iter: 20_000,
        };
        let report = run_sweep(&cfg).unwrap();
        let binned = bin_by_radius(&report, 5).unwrap();
        assert_eq!(binned.counts.iter().sum::<usize>(), 6);
        for curve in &binned.curves {
            for (b, mean) in curve.means.iter().enumerate() {
                let ids: Vec<u64> = report
                    .states
                    .iter()
                    .filter(|s| bin_index(&binned.edges, s.mixedness()) == b)
                    .map(|s| s.state_id)
                    .collect();
                if ids.is_empty() {
                    assert!(mean.is_none());
                    continue;
                }
                let mut total = 0.0;
                for id in &ids {
                    let errs: Vec<f64> = report
                        .trials
                        .iter()
                        .filter(|t| {
                            t.state_id == *id
                                && t.estimator == curve.estimator
                                && t.beta == curve.beta
                        })
                        .map(|t| t.errors[0])
                        .collect();
                    total += errs.iter().sum::<f64>() / errs.len() as f64;
                }
                let expected = total / ids.len() as f64;
                assert!((mean.unwrap() - expected).abs() <= 1e-15 * expected.abs().max(1.0));
            }
        }
    }

    #[test]
    fn identical_states_share_one_bin() {
        let cfg = ExperimentConfig {
            n_states: 1,
            n_datasets: 2,
            shots_per_basis: 10,
            betas: vec![0.5],
            estimators: vec![EstimatorKind::Hmle],
            metrics: vec![MetricKind::Kl],
            master_seed: 5,
            sampling: StateSampling::Pure,
            tol: 1e-10,
            max_iter: 20_000,
        };
        let mut report = run_sweep(&cfg).unwrap();
        let first = report.states[0].clone();
        for id in 1..4 {
            let mut s = first.clone();
            s.state_id = id;
            report.states.push(s);
        }
        let binned = bin_by_radius(&report, 8).unwrap();
        assert_eq!(binned.counts.iter().filter(|&&c| c > 0).count(), 1);
        assert_eq!(binned.counts[0], 4);
        assert!((binned.regime_boundary - 0.3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn empty_report_is_rejected() {
        let cfg = ExperimentConfig {
            n_states: 1,
            n_datasets: 1,
            shots_per_basis: 10,
            betas: vec![0.5],
            estimators: vec![EstimatorKind::Hmle],
            metrics: vec![MetricKind::Kl],
            master_seed: 5,
            sampling: StateSampling::HilbertSchmidt,
            tol: 1e-10,
            max_iter: 20_000,
        };
        let mut report = run_sweep(&cfg).unwrap();
        report.states.clear();
        assert!(matches!(bin_by_radius(&report, 4), Err(Error::EmptyInput)));
    }
}
