use crate::error::{Error, Result};
use crate::likelihood::{log_likelihood, HedgingParameter, MeasurementRecord};
use crate::state::DensityMatrix;

/// Relative slack on the `e^{-dβ}` bound.
const BOUND_SLACK: f64 = 1e-9;

/// Outcome of comparing `L(ρ_H)` against `L(ρ_MLE)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LikelihoodRatioCheck {
    /// `L(ρ_H) / L(ρ_MLE)`.
    pub ratio: f64,
    /// `ln L(ρ_H) − ln L(ρ_MLE)`.
    pub log_ratio: f64,
    /// `e^{-dβ}`.
    pub bound: f64,
    /// `ratio ≥ bound (1 − 1e-9)`.
    pub holds: bool,
    /// `ratio ≤ 1 + 1e-9`; false means the MLE was not the maximum.
    pub at_most_one: bool,
}

/// Checks that the hedged estimate is never much less likely than the MLE:
/// `L(ρ_H)/L(ρ_MLE) ≥ e^{-dβ}`.
pub fn verify_likelihood_ratio(
    rec: &MeasurementRecord,
    beta: HedgingParameter,
    rho_mle: &DensityMatrix,
    rho_h: &DensityMatrix,
) -> Result<LikelihoodRatioCheck> {
    let l_mle = log_likelihood(rho_mle, rec)?;
    let l_h = log_likelihood(rho_h, rec)?;
    if l_mle == f64::NEG_INFINITY && l_h == f64::NEG_INFINITY {
        return Err(Error::IndeterminateRatio);
    }
    let log_ratio = l_h - l_mle;
    let ratio = log_ratio.exp();
    let bound = (-(rec.dim() as f64) * beta.value()).exp();
    Ok(LikelihoodRatioCheck {
        ratio,
        log_ratio,
        bound,
        holds: ratio >= bound * (1.0 - BOUND_SLACK),
        at_most_one: ratio <= 1.0 + BOUND_SLACK,
    })
}
