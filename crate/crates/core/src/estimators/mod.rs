//! State estimators: linear inversion, MLE, hedged MLE, the closed-form
//! hedged estimate for single-basis data, and the likelihood-ratio check
//! between the hedged and unhedged estimates.

mod closed_form;
mod linear;
mod ratio;
mod solver;

pub use closed_form::projective_hmle_closed_form;
pub use linear::{linear_inversion, LinearInversionResult};
pub use ratio::{verify_likelihood_ratio, LikelihoodRatioCheck};
pub use solver::{hmle, mle, SolverConfig, SolverDiagnostics};
