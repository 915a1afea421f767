//! Self-check suite: properties every correct build must satisfy on
//! randomly generated inputs. Each failure carries the seed that
//! reproduces it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::classical::CountVector;
use crate::error::Result;
use crate::estimators::{
    hmle, linear_inversion, mle, projective_hmle_closed_form, verify_likelihood_ratio, SolverConfig,
};
use crate::likelihood::{
    hedging_gradient, likelihood_gradient, log_det, log_likelihood, pool_measurements,
    HedgingParameter, MeasurementRecord,
};
use crate::linalg::{frobenius_norm, trace_product_re, traceless_hermitian_basis, CMatrix, C64};
use crate::metrics::{hs_distance, trace_distance};
use crate::montecarlo::{
    sample_hs_state, sample_unitary, simulate_pauli_data, trial_seed, RANK_TOLERANCE,
};
use crate::state::{DensityMatrix, Povm};

/// Allowed excess of `L(ρ_H)/L(ρ_MLE)` over one.
pub const RATIO_CEILING_SLACK: f64 = 1e-6;
pub const CLOSED_FORM_TOL: f64 = 1e-8;
pub const GRADIENT_STEP: f64 = 1e-6;
pub const GRADIENT_REL_TOL: f64 = 1e-5;
pub const NORM_EQUIVALENCE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub trials: usize,
    pub master_seed: u64,
    pub beta: HedgingParameter,
    pub shots_per_basis: u64,
}

impl VerifyConfig {
    pub fn new(trials: usize, master_seed: u64) -> Self {
        Self {
            trials,
            master_seed,
            beta: HedgingParameter::default(),
            shots_per_basis: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckFailure {
    pub seed: u64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: &'static str,
    pub trials: usize,
    pub failures: Vec<CheckFailure>,
}

impl CheckReport {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            trials: 0,
            failures: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn record(&mut self, seed: u64, outcome: Result<Option<String>>) {
        self.trials += 1;
        match outcome {
            Ok(None) => {}
            Ok(Some(detail)) => self.failures.push(CheckFailure { seed, detail }),
            Err(e) => self.failures.push(CheckFailure {
                seed,
                detail: format!("error: {e}"),
            }),
        }
    }
}

const BOUND_CHECK: u64 = 1;
const CLOSED_FORM_CHECK: u64 = 2;
const GRADIENT_CHECK: u64 = 3;
const NORM_CHECK: u64 = 4;

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Runs every check; the likelihood-ratio and rank-deficiency checks
/// share their random qubit trials.
pub fn run_verification(cfg: &VerifyConfig) -> Vec<CheckReport> {
    let (bound, rank) = bound_and_rank_checks(cfg);
    vec![
        bound,
        rank,
        closed_form_check(cfg),
        gradient_check(cfg),
        norm_equivalence_check(cfg),
    ]
}

/// Seed of trial `k` of check `check`; replays with [`trial_seed`].
pub fn check_seed(master_seed: u64, check: u64, k: usize) -> u64 {
    trial_seed(master_seed, check, k as u64)
}

fn bound_and_rank_checks(cfg: &VerifyConfig) -> (CheckReport, CheckReport) {
    let mut bound = CheckReport::new("likelihood ratio bound");
    let mut rank = CheckReport::new("rank deficiency of MLE");
    let solver = SolverConfig::default();
    for k in 0..cfg.trials {
        let seed = check_seed(cfg.master_seed, BOUND_CHECK, k);
        let mut rng = rng_for(seed);
        let truth = sample_hs_state(&mut rng);
        let rec = match simulate_pauli_data(&truth, cfg.shots_per_basis, &mut rng) {
            Ok(r) => r,
            Err(e) => {
                bound.record(seed, Err(e));
                continue;
            }
        };
        let rho_mle = match mle(&rec, &solver) {
            Ok((r, _)) => r,
            Err(e) => {
                bound.record(seed, Err(e));
                continue;
            }
        };
        let outcome = (|| {
            let (rho_h, _) = hmle(&rec, cfg.beta, &solver)?;
            let c = verify_likelihood_ratio(&rec, cfg.beta, &rho_mle, &rho_h)?;
            Ok((!c.holds || c.ratio > 1.0 + RATIO_CEILING_SLACK)
                .then(|| format!("ratio {:e} outside [{:e}, 1]", c.ratio, c.bound)))
        })();
        bound.record(seed, outcome);

        let outcome = linear_inversion(&rec).map(|lin| {
            let lin = lin.min_eigenvalue();
            let m = rho_mle.min_eigenvalue();
            (lin < -RANK_TOLERANCE && m > RANK_TOLERANCE).then(|| {
                format!("linear inversion min eigenvalue {lin:e} but MLE min eigenvalue {m:e}")
            })
        });
        rank.record(seed, outcome);
    }
    (bound, rank)
}

fn closed_form_check(cfg: &VerifyConfig) -> CheckReport {
    let mut report = CheckReport::new("closed-form single-basis HMLE");
    let solver = SolverConfig::default();
    for k in 0..cfg.trials.clamp(1, 100) {
        let seed = check_seed(cfg.master_seed, CLOSED_FORM_CHECK, k);
        let mut rng = rng_for(seed);
        let d = rng.random_range(2..=4);
        let beta =
            HedgingParameter::new([0.1, 0.5, 1.0][rng.random_range(0..3)]).expect("positive");
        let u = sample_unitary(d, &mut rng);
        let counts: Vec<u64> = (0..d).map(|_| rng.random_range(0..=30)).collect();
        let outcome = (|| {
            let rec = MeasurementRecord::from_povm(&Povm::from_basis(&u)?, &counts)?;
            let (rho, _) = hmle(&rec, beta, &solver)?;
            let exact = projective_hmle_closed_form(&CountVector::new(counts.clone())?, &u, beta)?;
            let dist = hs_distance(&rho, &exact)?;
            Ok((dist > CLOSED_FORM_TOL).then(|| {
                format!(
                    "d = {d}, counts {counts:?}, beta {}: distance {dist:e}",
                    beta.value()
                )
            }))
        })();
        report.record(seed, outcome);
    }
    report
}

/// Random full-rank state with spectrum bounded below by `floor`.
pub fn random_interior_state<R: Rng + ?Sized>(d: usize, floor: f64, rng: &mut R) -> DensityMatrix {
    let raw: Vec<f64> = (0..d).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = raw.iter().sum();
    let spread = 1.0 - d as f64 * floor;
    let probs: Vec<f64> = raw.iter().map(|p| floor + spread * p / total).collect();
    let u = sample_unitary(d, rng);
    let m =
        &u * CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            d,
            probs.iter().map(|&p| C64::new(p, 0.0)),
        )) * u.adjoint();
    DensityMatrix::new(crate::linalg::hermitize(&m)).expect("valid state")
}

/// Random unit-norm traceless Hermitian direction.
pub fn random_direction<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let basis = traceless_hermitian_basis(d);
    let mut m = CMatrix::zeros(d, d);
    for b in &basis {
        m += b.scale(rng.random_range(-1.0..1.0));
    }
    let n = frobenius_norm(&m);
    m.unscale(n)
}

/// Measurements in two random bases with random counts.
pub fn random_record<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<MeasurementRecord> {
    let runs = (0..2)
        .map(|_| {
            let povm = Povm::from_basis(&sample_unitary(d, rng))?;
            let counts = (0..d).map(|_| rng.random_range(1..=40)).collect();
            Ok((povm, counts))
        })
        .collect::<Result<Vec<_>>>()?;
    pool_measurements(&runs)
}

fn relative_gap(analytic: f64, numeric: f64) -> f64 {
    let scale = analytic.abs().max(numeric.abs());
    if scale == 0.0 {
        0.0
    } else {
        (analytic - numeric).abs() / scale
    }
}

fn gradient_check(cfg: &VerifyConfig) -> CheckReport {
    let mut report = CheckReport::new("analytic gradients");
    let h = GRADIENT_STEP;
    for k in 0..20 {
        let seed = check_seed(cfg.master_seed, GRADIENT_CHECK, k);
        let mut rng = rng_for(seed);
        let d = rng.random_range(2..=3);
        let rho = random_interior_state(d, 0.05, &mut rng);
        let outcome = (|| {
            let rec = random_record(d, &mut rng)?;
            let g_like = likelihood_gradient(&rho, &rec)?;
            let g_hedge = hedging_gradient(&rho, cfg.beta)?;
            for j in 0..20 {
                let delta = random_direction(d, &mut rng);
                let plus = DensityMatrix::new(rho.matrix() + delta.scale(h))?;
                let minus = DensityMatrix::new(rho.matrix() - delta.scale(h))?;
                let fd_like =
                    (log_likelihood(&plus, &rec)? - log_likelihood(&minus, &rec)?) / (2.0 * h);
                let fd_hedge = cfg.beta.value() * (log_det(&plus) - log_det(&minus)) / (2.0 * h);
                let gap_like = relative_gap(trace_product_re(&g_like, &delta), fd_like);
                let gap_hedge = relative_gap(trace_product_re(&g_hedge, &delta), fd_hedge);
                if gap_like > GRADIENT_REL_TOL || gap_hedge > GRADIENT_REL_TOL {
                    return Ok(Some(format!(
                        "direction {j}: relative gaps {gap_like:e} (likelihood), {gap_hedge:e} (hedging)"
                    )));
                }
            }
            Ok(None)
        })();
        report.record(seed, outcome);
    }
    report
}

fn norm_equivalence_check(cfg: &VerifyConfig) -> CheckReport {
    let mut report = CheckReport::new("qubit trace/HS norm equivalence");
    for k in 0..cfg.trials {
        let seed = check_seed(cfg.master_seed, NORM_CHECK, k);
        let mut rng = rng_for(seed);
        let a = sample_hs_state(&mut rng);
        let b = sample_hs_state(&mut rng);
        let outcome = (|| {
            let t = trace_distance(&a, &b)?;
            let hs = hs_distance(&a, &b)?;
            let gap = (t - std::f64::consts::SQRT_2 * hs).abs();
            Ok((gap > NORM_EQUIVALENCE_TOL).then(|| {
                format!(
                    "trace {t:e} vs sqrt2*hs {:e}",
                    std::f64::consts::SQRT_2 * hs
                )
            }))
        })();
        report.record(seed, outcome);
    }
    report
}
