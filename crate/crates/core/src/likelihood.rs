//! Measurement records, the quantum log-likelihood `Σ n_i ln Tr[ρ E_i]`,
//! its hedged version `+ β ln det ρ`, and their matrix gradients.

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitized, identity, max_abs_entry, trace_product_re, CMatrix};
use crate::metrics::SUPPORT_THRESHOLD;
use crate::state::{DensityMatrix, Effect, Povm, POVM_TOL};

/// Probabilities below this with a positive count make the likelihood zero.
pub const MIN_PROBABILITY: f64 = 1e-15;

/// One outcome of the pooled measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordItem {
    pub effect: Effect,
    pub count: u64,
    /// Fraction `N_j / N` of shots spent on this outcome's sub-measurement.
    pub weight: f64,
}

/// Counts for the pooled POVM `⋃_j w_j M_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    dim: usize,
    items: Vec<RecordItem>,
}

impl MeasurementRecord {
    /// Checks dimensions, weights in `(0, 1]`, and `Σ_i w_i E_i = I`.
    pub fn new(items: Vec<RecordItem>) -> Result<Self> {
        let dim = items.first().ok_or(Error::EmptyInput)?.effect.dim();
        let mut pooled = CMatrix::zeros(dim, dim);
        for item in &items {
            if item.effect.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: item.effect.dim(),
                });
            }
            if !(item.weight > 0.0 && item.weight <= 1.0) {
                return Err(Error::InvalidConfig(format!(
                    "record weight {} outside (0, 1]",
                    item.weight
                )));
            }
            pooled += item.effect.matrix().scale(item.weight);
        }
        let deviation = max_abs_entry(&(pooled - identity(dim)));
        if deviation > POVM_TOL {
            return Err(Error::NotAPovm { deviation });
        }
        Ok(Self { dim, items })
    }

    /// A single POVM with unit weight. Zero counts are allowed.
    pub fn from_povm(povm: &Povm, counts: &[u64]) -> Result<Self> {
        if counts.len() != povm.len() {
            return Err(Error::LengthMismatch {
                expected: povm.len(),
                found: counts.len(),
            });
        }
        let items = povm
            .effects()
            .iter()
            .zip(counts)
            .map(|(e, &count)| RecordItem {
                effect: e.clone(),
                count,
                weight: 1.0,
            })
            .collect();
        Self::new(items)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn items(&self) -> &[RecordItem] {
        &self.items
    }

    /// Total number of shots `N`.
    pub fn total(&self) -> u64 {
        self.items.iter().map(|i| i.count).sum()
    }

    /// Same counts with every effect replaced by `U E U†`.
    pub fn conjugate_by(&self, u: &CMatrix) -> Self {
        Self {
            dim: self.dim,
            items: self
                .items
                .iter()
                .map(|i| RecordItem {
                    effect: i.effect.conjugate_by(u),
                    count: i.count,
                    weight: i.weight,
                })
                .collect(),
        }
    }
}

/// Merges sub-measurements into one record with weights `w_j = N_j / N`.
pub fn pool_measurements(runs: &[(Povm, Vec<u64>)]) -> Result<MeasurementRecord> {
    let (first, _) = runs.first().ok_or(Error::EmptyInput)?;
    let dim = first.dim();
    let mut total = 0u64;
    for (povm, counts) in runs {
        if povm.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: povm.dim(),
            });
        }
        if counts.len() != povm.len() {
            return Err(Error::LengthMismatch {
                expected: povm.len(),
                found: counts.len(),
            });
        }
        total += counts.iter().sum::<u64>();
    }
    if total == 0 {
        return Err(Error::NoData);
    }
    let mut items = Vec::new();
    for (povm, counts) in runs {
        let run_total: u64 = counts.iter().sum();
        // A run with no shots carries no weight and no information.
        if run_total == 0 {
            continue;
        }
        let weight = run_total as f64 / total as f64;
        for (e, &count) in povm.effects().iter().zip(counts) {
            items.push(RecordItem {
                effect: e.clone(),
                count,
                weight,
            });
        }
    }
    MeasurementRecord::new(items)
}

/// Strictly positive hedging strength β.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HedgingParameter(f64);

impl HedgingParameter {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::InvalidBeta(beta));
        }
        Ok(Self(beta))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for HedgingParameter {
    fn default() -> Self {
        Self(0.5)
    }
}

fn check_dim(rho: &DensityMatrix, rec: &MeasurementRecord) -> Result<()> {
    if rho.dim() != rec.dim() {
        return Err(Error::DimensionMismatch {
            expected: rec.dim(),
            found: rho.dim(),
        });
    }
    Ok(())
}

/// `Σ n_i ln Tr[ρ E_i]`. Weights only shift this by a ρ-independent
/// constant and are left out.
pub fn log_likelihood(rho: &DensityMatrix, rec: &MeasurementRecord) -> Result<f64> {
    check_dim(rho, rec)?;
    Ok(log_likelihood_of(rho.matrix(), rec))
}

pub(crate) fn log_likelihood_of(m: &CMatrix, rec: &MeasurementRecord) -> f64 {
    let mut acc = 0.0;
    for item in &rec.items {
        if item.count == 0 {
            continue;
        }
        let p = trace_product_re(m, item.effect.matrix());
        if !(p > MIN_PROBABILITY) {
            return f64::NEG_INFINITY;
        }
        acc += item.count as f64 * p.ln();
    }
    acc
}

/// Log-likelihood with the sub-measurement weights kept in, i.e. the
/// likelihood of the pooled POVM `{w_i E_i}`.
pub fn pooled_log_likelihood(rho: &DensityMatrix, rec: &MeasurementRecord) -> Result<f64> {
    let base = log_likelihood(rho, rec)?;
    let shift: f64 = rec
        .items
        .iter()
        .map(|i| i.count as f64 * i.weight.ln())
        .sum();
    Ok(base + shift)
}

/// `ln det ρ`, or `-∞` when ρ is rank-deficient.
pub fn log_det(rho: &DensityMatrix) -> f64 {
    log_det_of(rho.eigen().values.as_slice())
}

/// `Σ ln λ_k` for eigenvalues sorted descending.
pub(crate) fn log_det_of(values: &[f64]) -> f64 {
    let max = values[0];
    let min = values[values.len() - 1];
    if !(min > SUPPORT_THRESHOLD * max) {
        return f64::NEG_INFINITY;
    }
    values.iter().map(|l| l.ln()).sum()
}

/// `Σ n_i ln Tr[ρ E_i] + β ln det ρ`.
pub fn hedged_log_likelihood(
    rho: &DensityMatrix,
    rec: &MeasurementRecord,
    beta: HedgingParameter,
) -> Result<f64> {
    check_dim(rho, rec)?;
    let ld = log_det(rho);
    if ld == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(log_likelihood_of(rho.matrix(), rec) + beta.value() * ld)
}

/// `R(ρ) = Σ n_i E_i / Tr[ρ E_i]`, the matrix gradient of the log-likelihood.
pub fn likelihood_gradient(rho: &DensityMatrix, rec: &MeasurementRecord) -> Result<CMatrix> {
    check_dim(rho, rec)?;
    likelihood_gradient_of(rho.matrix(), rec)
}

pub(crate) fn likelihood_gradient_of(m: &CMatrix, rec: &MeasurementRecord) -> Result<CMatrix> {
    let d = rec.dim();
    let mut r = CMatrix::zeros(d, d);
    for (index, item) in rec.items.iter().enumerate() {
        if item.count == 0 {
            continue;
        }
        let p = trace_product_re(m, item.effect.matrix());
        if !(p > MIN_PROBABILITY) {
            return Err(Error::ZeroProbabilityEvent { index });
        }
        r += item.effect.matrix().scale(item.count as f64 / p);
    }
    Ok(r)
}

/// `β ρ⁻¹`, the gradient of `β ln det ρ`.
pub fn hedging_gradient(rho: &DensityMatrix, beta: HedgingParameter) -> Result<CMatrix> {
    let eig = eig_hermitized(rho.matrix())?;
    let min = eig.min_value();
    if !(min > SUPPORT_THRESHOLD) {
        return Err(Error::Singular {
            min_eigenvalue: min,
        });
    }
    let b = beta.value();
    Ok(eig.map(|l| b / l))
}
