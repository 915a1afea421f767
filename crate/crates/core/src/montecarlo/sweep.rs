//! Seeded estimator sweeps over random qubit states.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sampling::{
    sample_hs_state, sample_pure_state, simulate_pauli_data, state_seed, trial_seed,
};
use crate::error::{Error, Result};
use crate::estimators::{hmle, linear_inversion, mle, verify_likelihood_ratio, SolverConfig};
use crate::likelihood::{HedgingParameter, MeasurementRecord};
use crate::linalg::frobenius_norm;
use crate::metrics::{
    hs_distance, infidelity, quantum_relative_entropy, radial_coordinate, trace_distance,
    trace_norm,
};
use crate::state::{to_bloch, BlochVector, DensityMatrix};

/// Linear-inversion estimates below this eigenvalue count as unphysical,
/// and MLE estimates above it as full rank.
pub const RANK_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorKind {
    Mle,
    Hmle,
    Linear,
}

impl EstimatorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EstimatorKind::Mle => "mle",
            EstimatorKind::Hmle => "hmle",
            EstimatorKind::Linear => "linear",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "mle" => Ok(EstimatorKind::Mle),
            "hmle" => Ok(EstimatorKind::Hmle),
            "linear" | "linear_inversion" => Ok(EstimatorKind::Linear),
            _ => Err(Error::InvalidConfig(format!("unknown estimator `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Kl,
    Infidelity,
    Trace,
    Hs,
}

impl MetricKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MetricKind::Kl => "kl",
            MetricKind::Infidelity => "infidelity",
            MetricKind::Trace => "trace",
            MetricKind::Hs => "hs",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "kl" => Ok(MetricKind::Kl),
            "infidelity" => Ok(MetricKind::Infidelity),
            "trace" => Ok(MetricKind::Trace),
            "hs" => Ok(MetricKind::Hs),
            _ => Err(Error::InvalidConfig(format!("unknown metric `{s}`"))),
        }
    }
}

/// Distribution the true states are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateSampling {
    /// Uniform in the Bloch ball.
    #[default]
    HilbertSchmidt,
    /// Uniform on the Bloch sphere.
    Pure,
}

fn default_tol() -> f64 {
    SolverConfig::default().tol
}

fn default_max_iter() -> usize {
    SolverConfig::default().max_iter
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n_states: usize,
    pub n_datasets: usize,
    /// Shots per Pauli axis.
    pub shots_per_basis: u64,
    pub betas: Vec<f64>,
    pub estimators: Vec<EstimatorKind>,
    pub metrics: Vec<MetricKind>,
    pub master_seed: u64,
    #[serde(default)]
    pub sampling: StateSampling,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_states == 0 || self.n_datasets == 0 || self.shots_per_basis == 0 {
            return Err(Error::InvalidConfig(
                "n_states, n_datasets and shots_per_basis must be at least 1".into(),
            ));
        }
        if self.estimators.is_empty() || self.metrics.is_empty() {
            return Err(Error::InvalidConfig(
                "need at least one estimator and one metric".into(),
            ));
        }
        if self.estimators.contains(&EstimatorKind::Hmle) && self.betas.is_empty() {
            return Err(Error::InvalidConfig("hmle needs at least one beta".into()));
        }
        for &b in &self.betas {
            HedgingParameter::new(b)?;
        }
        self.solver().validate()
    }

    pub fn solver(&self) -> SolverConfig {
        SolverConfig {
            tol: self.tol,
            max_iter: self.max_iter,
            ..SolverConfig::default()
        }
    }

    /// Estimator columns in output order: `(kind, β)`, with β = 0 for the
    /// unhedged estimators.
    pub fn columns(&self) -> Vec<(EstimatorKind, f64)> {
        let mut cols = Vec::new();
        for &e in &self.estimators {
            match e {
                EstimatorKind::Hmle => cols.extend(self.betas.iter().map(|&b| (e, b))),
                _ => cols.push((e, 0.0)),
            }
        }
        cols
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub state_id: u64,
    pub dataset_id: u64,
    pub estimator: EstimatorKind,
    /// 0 for `mle` and `linear`.
    pub beta: f64,
    /// One entry per configured metric, in config order; KL may be `+∞`.
    pub errors: Vec<f64>,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub state_id: u64,
    pub dataset_id: u64,
    pub beta: f64,
    pub ratio: f64,
    pub bound: f64,
    pub holds: bool,
    pub at_most_one: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialFailure {
    pub state_id: u64,
    pub dataset_id: u64,
    pub estimator: EstimatorKind,
    pub beta: f64,
    /// Replay seed for the dataset.
    pub seed: u64,
    pub message: String,
}

/// Per-dataset record of the rank-deficiency check: whenever linear
/// inversion is unphysical, the MLE must have a (numerically) zero
/// eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankCheck {
    pub state_id: u64,
    pub dataset_id: u64,
    pub linear_min_eigenvalue: f64,
    pub mle_min_eigenvalue: f64,
}

impl RankCheck {
    pub fn applies(&self) -> bool {
        self.linear_min_eigenvalue < -RANK_TOLERANCE
    }

    pub fn violated(&self) -> bool {
        self.applies() && self.mle_min_eigenvalue > RANK_TOLERANCE
    }
}

/// Mean of one estimator/β/metric column over a state's datasets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanError {
    pub estimator: EstimatorKind,
    pub beta: f64,
    pub metric: MetricKind,
    /// `+∞` as soon as one contributing trial is infinite.
    pub mean: f64,
    /// Mean over the finite trials only.
    pub finite_mean: f64,
    pub n_finite: usize,
    pub n_infinite: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSummary {
    pub state_id: u64,
    pub bloch: BlochVector,
    /// `(1 + Tr ρ²)/2`.
    pub r_sq: f64,
    pub means: Vec<MeanError>,
}

impl StateSummary {
    pub fn mixedness(&self) -> f64 {
        1.0 - self.r_sq
    }

    pub fn mean(
        &self,
        estimator: EstimatorKind,
        beta: f64,
        metric: MetricKind,
    ) -> Option<&MeanError> {
        self.means
            .iter()
            .find(|m| m.estimator == estimator && m.beta == beta && m.metric == metric)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub config: ExperimentConfig,
    /// `√(3/N)`, the mixedness separating the accuracy regimes.
    pub regime_boundary: f64,
    pub states: Vec<StateSummary>,
    pub trials: Vec<TrialResult>,
    pub bound_checks: Vec<BoundCheck>,
    pub rank_checks: Vec<RankCheck>,
    pub failures: Vec<TrialFailure>,
}

impl SweepReport {
    pub fn bound_violations(&self) -> impl Iterator<Item = &BoundCheck> {
        self.bound_checks
            .iter()
            .filter(|c| !c.holds || !c.at_most_one)
    }

    pub fn rank_violations(&self) -> impl Iterator<Item = &RankCheck> {
        self.rank_checks.iter().filter(|c| c.violated())
    }

    pub fn unconverged(&self) -> impl Iterator<Item = &TrialResult> {
        self.trials.iter().filter(|t| !t.converged)
    }
}

pub fn regime_boundary(shots_per_basis: u64) -> f64 {
    (3.0 / shots_per_basis as f64).sqrt()
}

/// An estimate that may fall outside the state space (linear inversion).
enum Estimate {
    State(DensityMatrix),
    Unphysical(crate::linalg::CMatrix),
}

fn metric_value(metric: MetricKind, truth: &DensityMatrix, est: &Estimate) -> Result<f64> {
    match est {
        Estimate::State(s) => match metric {
            MetricKind::Kl => quantum_relative_entropy(truth, s),
            MetricKind::Infidelity => infidelity(truth, s),
            MetricKind::Trace => trace_distance(truth, s),
            MetricKind::Hs => hs_distance(truth, s),
        },
        Estimate::Unphysical(m) => Ok(match metric {
            MetricKind::Kl | MetricKind::Infidelity => f64::INFINITY,
            MetricKind::Trace => trace_norm(&(truth.matrix() - m)),
            MetricKind::Hs => frobenius_norm(&(truth.matrix() - m)),
        }),
    }
}

fn errors_for(cfg: &ExperimentConfig, truth: &DensityMatrix, est: &Estimate) -> Result<Vec<f64>> {
    cfg.metrics
        .iter()
        .map(|&m| metric_value(m, truth, est))
        .collect()
}

#[derive(Default)]
struct DatasetOutcome {
    trials: Vec<TrialResult>,
    bound_checks: Vec<BoundCheck>,
    rank_check: Option<RankCheck>,
    failures: Vec<TrialFailure>,
}

pub(crate) fn draw_state(
    sampling: StateSampling,
    master_seed: u64,
    state_id: u64,
) -> DensityMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(state_seed(master_seed, state_id));
    match sampling {
        StateSampling::HilbertSchmidt => sample_hs_state(&mut rng),
        StateSampling::Pure => sample_pure_state(&mut rng),
    }
}

pub(crate) fn draw_dataset(
    truth: &DensityMatrix,
    shots: u64,
    master_seed: u64,
    state_id: u64,
    dataset_id: u64,
) -> Result<MeasurementRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(master_seed, state_id, dataset_id));
    simulate_pauli_data(truth, shots, &mut rng)
}

fn run_dataset(
    cfg: &ExperimentConfig,
    truth: &DensityMatrix,
    state_id: u64,
    dataset_id: u64,
) -> DatasetOutcome {
    let mut out = DatasetOutcome::default();
    let seed = trial_seed(cfg.master_seed, state_id, dataset_id);
    let fail = |out: &mut DatasetOutcome, estimator, beta, e: &Error| {
        out.failures.push(TrialFailure {
            state_id,
            dataset_id,
            estimator,
            beta,
            seed,
            message: e.to_string(),
        })
    };
    let rec = match draw_dataset(
        truth,
        cfg.shots_per_basis,
        cfg.master_seed,
        state_id,
        dataset_id,
    ) {
        Ok(r) => r,
        Err(e) => {
            fail(&mut out, EstimatorKind::Mle, 0.0, &e);
            return out;
        }
    };
    let solver = cfg.solver();
    let push =
        |out: &mut DatasetOutcome, estimator, beta, est: &Estimate, converged| match errors_for(
            cfg, truth, est,
        ) {
            Ok(errors) => out.trials.push(TrialResult {
                state_id,
                dataset_id,
                estimator,
                beta,
                errors,
                converged,
            }),
            Err(e) => fail(out, estimator, beta, &e),
        };

    // The MLE is always needed: it anchors the likelihood-ratio bound and
    // the rank-deficiency check.
    let mle_result = mle(&rec, &solver);
    if let Err(e) = &mle_result {
        fail(&mut out, EstimatorKind::Mle, 0.0, e);
    }

    match linear_inversion(&rec) {
        Ok(lin) => {
            let lin_min = lin.min_eigenvalue();
            if let Ok((rho, _)) = &mle_result {
                out.rank_check = Some(RankCheck {
                    state_id,
                    dataset_id,
                    linear_min_eigenvalue: lin_min,
                    mle_min_eigenvalue: rho.min_eigenvalue(),
                });
            }
            if cfg.estimators.contains(&EstimatorKind::Linear) {
                let est = match lin.to_density_matrix() {
                    Ok(rho) if lin_min >= 0.0 => Estimate::State(rho),
                    _ => Estimate::Unphysical(lin.matrix.clone()),
                };
                push(&mut out, EstimatorKind::Linear, 0.0, &est, true);
            }
        }
        Err(e) => {
            if cfg.estimators.contains(&EstimatorKind::Linear) {
                fail(&mut out, EstimatorKind::Linear, 0.0, &e);
            }
        }
    }

    if let Ok((rho, diag)) = &mle_result {
        if cfg.estimators.contains(&EstimatorKind::Mle) {
            push(
                &mut out,
                EstimatorKind::Mle,
                0.0,
                &Estimate::State(rho.clone()),
                diag.converged,
            );
        }
    }

    if cfg.estimators.contains(&EstimatorKind::Hmle) {
        for &b in &cfg.betas {
            let beta = HedgingParameter::new(b).expect("validated");
            match hmle(&rec, beta, &solver) {
                Ok((rho_h, diag)) => {
                    if let Ok((rho_mle, _)) = &mle_result {
                        match verify_likelihood_ratio(&rec, beta, rho_mle, &rho_h) {
                            Ok(c) => out.bound_checks.push(BoundCheck {
                                state_id,
                                dataset_id,
                                beta: b,
                                ratio: c.ratio,
                                bound: c.bound,
                                holds: c.holds,
                                at_most_one: c.at_most_one,
                            }),
                            Err(e) => fail(&mut out, EstimatorKind::Hmle, b, &e),
                        }
                    }
                    push(
                        &mut out,
                        EstimatorKind::Hmle,
                        b,
                        &Estimate::State(rho_h),
                        diag.converged,
                    );
                }
                Err(e) => fail(&mut out, EstimatorKind::Hmle, b, &e),
            }
        }
    }
    out
}

fn summarize(
    cfg: &ExperimentConfig,
    state_id: u64,
    truth: &DensityMatrix,
    trials: &[TrialResult],
) -> StateSummary {
    let mut means = Vec::new();
    for (estimator, beta) in cfg.columns() {
        let rows: Vec<&TrialResult> = trials
            .iter()
            .filter(|t| t.estimator == estimator && t.beta == beta)
            .collect();
        for (k, &metric) in cfg.metrics.iter().enumerate() {
            means.push(mean_error(
                estimator,
                beta,
                metric,
                rows.iter().map(|t| t.errors[k]),
            ));
        }
    }
    StateSummary {
        state_id,
        bloch: to_bloch(truth).expect("qubit state"),
        r_sq: radial_coordinate(truth).r_sq,
        means,
    }
}

pub(crate) fn mean_error(
    estimator: EstimatorKind,
    beta: f64,
    metric: MetricKind,
    values: impl Iterator<Item = f64>,
) -> MeanError {
    let (mut sum, mut n_finite, mut n_infinite) = (0.0, 0usize, 0usize);
    for v in values {
        if v.is_finite() {
            sum += v;
            n_finite += 1;
        } else {
            n_infinite += 1;
        }
    }
    let finite_mean = if n_finite > 0 {
        sum / n_finite as f64
    } else {
        f64::NAN
    };
    let mean = if n_infinite > 0 {
        f64::INFINITY
    } else {
        finite_mean
    };
    MeanError {
        estimator,
        beta,
        metric,
        mean,
        finite_mean,
        n_finite,
        n_infinite,
    }
}

/// Runs every configured estimator on `n_datasets` simulated Pauli
/// datasets for each of `n_states` random qubits. Each dataset is seeded
/// from `(master_seed, state_id, dataset_id)`, so the report does not
/// depend on scheduling. Solver errors are collected, never fatal.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepReport> {
    cfg.validate()?;
    let states: Vec<DensityMatrix> = (0..cfg.n_states as u64)
        .map(|s| draw_state(cfg.sampling, cfg.master_seed, s))
        .collect();
    let cells: Vec<(u64, u64)> = (0..cfg.n_states as u64)
        .flat_map(|s| (0..cfg.n_datasets as u64).map(move |d| (s, d)))
        .collect();
    let outcomes: Vec<DatasetOutcome> = cells
        .par_iter()
        .map(|&(s, d)| run_dataset(cfg, &states[s as usize], s, d))
        .collect();

    let mut report = SweepReport {
        config: cfg.clone(),
        regime_boundary: regime_boundary(cfg.shots_per_basis),
        states: Vec::with_capacity(cfg.n_states),
        trials: Vec::new(),
        bound_checks: Vec::new(),
        rank_checks: Vec::new(),
        failures: Vec::new(),
    };
    for o in outcomes {
        report.trials.extend(o.trials);
        report.bound_checks.extend(o.bound_checks);
        report.rank_checks.extend(o.rank_check);
        report.failures.extend(o.failures);
    }
    for (s, truth) in states.iter().enumerate() {
        let trials: Vec<TrialResult> = report
            .trials
            .iter()
            .filter(|t| t.state_id == s as u64)
            .cloned()
            .collect();
        report.states.push(summarize(cfg, s as u64, truth, &trials));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ExperimentConfig {
        ExperimentConfig {
            n_states: 2,
            n_datasets: 2,
            shots_per_basis: 10,
            betas: vec![0.5],
            estimators: vec![EstimatorKind::Hmle],
            metrics: vec![MetricKind::Kl],
            master_seed: 1,
            sampling: StateSampling::HilbertSchmidt,
            tol: 1e-10,
            max_iter: 20_000,
        }
    }

    #[test]
    fn bookkeeping_for_tiny_sweep() {
        let r = run_sweep(&small()).unwrap();
        assert_eq!(r.trials.len(), 4);
        assert!(r
            .trials
            .iter()
            .all(|t| t.estimator == EstimatorKind::Hmle && t.beta == 0.5));
        assert_eq!(r.bound_checks.len(), 4);
        assert_eq!(r.states.len(), 2);
        assert!(r.failures.is_empty());
        assert_eq!(r.bound_violations().count(), 0);
    }

    #[test]
    fn sweep_is_deterministic() {
        let a = run_sweep(&small()).unwrap();
        let b = run_sweep(&small()).unwrap();
        assert_eq!(a, b);
        let mut other = small();
        other.master_seed = 2;
        assert_ne!(run_sweep(&other).unwrap().trials, a.trials);
    }

    #[test]
    fn infinite_trials_make_the_mean_infinite() {
        let m = mean_error(
            EstimatorKind::Mle,
            0.0,
            MetricKind::Kl,
            [1.0, f64::INFINITY, 3.0].into_iter(),
        );
        assert_eq!(m.mean, f64::INFINITY);
        assert_eq!(m.finite_mean, 2.0);
        assert_eq!((m.n_finite, m.n_infinite), (2, 1));
    }

    #[test]
    fn config_validation() {
        let mut c = small();
        c.betas = vec![0.0];
        assert!(c.validate().is_err());
        let mut c = small();
        c.n_datasets = 0;
        assert!(c.validate().is_err());
        let mut c = small();
        c.betas.clear();
        assert!(c.validate().is_err());
        c.estimators = vec![EstimatorKind::Mle];
        assert!(c.validate().is_ok());
    }

    #[test]
    fn columns_expand_betas() {
        let mut c = small();
        c.estimators = vec![
            EstimatorKind::Mle,
            EstimatorKind::Hmle,
            EstimatorKind::Linear,
        ];
        c.betas = vec![0.01, 0.5];
        assert_eq!(
            c.columns(),
            vec![
                (EstimatorKind::Mle, 0.0),
                (EstimatorKind::Hmle, 0.01),
                (EstimatorKind::Hmle, 0.5),
                (EstimatorKind::Linear, 0.0)
            ]
        );
    }

    #[test]
    fn config_json_round_trip() {
        let c = small();
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<ExperimentConfig>(&text).unwrap(), c);
        let minimal = r#"{"n_states":1,"n_datasets":1,"shots_per_basis":5,"betas":[0.5],
            "estimators":["mle","hmle"],"metrics":["kl","hs"],"master_seed":3}"#;
        let parsed: ExperimentConfig = serde_json::from_str(minimal).unwrap();
        assert_eq!(parsed.sampling, StateSampling::HilbertSchmidt);
        assert_eq!(parsed.max_iter, SolverConfig::default().max_iter);
    }
}
