//! Monotone ascent for the (hedged) log-likelihood over density matrices.
//!
//! Each iteration tries a damped Newton step in the traceless Hermitian
//! coordinates. When the full step is infeasible, it competes with a
//! diluted congruence step `ρ ↦ A ρ A / Tr[A ρ A]`, `A = I + ε (G − c I)`,
//! where `G` is the matrix gradient and `c = Tr[G ρ]` (`N` for the
//! likelihood, `N + dβ` with hedging). The congruence keeps iterates
//! positive semidefinite; ε doubles from the last accepted value and halves
//! until the objective increases. For the plain likelihood, small
//! eigenvalues are dropped when that does not cost likelihood, and
//! rank-deficient iterates may mix in the top eigenvector of `G − c I`.
//! Objective changes are accumulated from increments (`ln1p` of relative
//! probability changes), so steps keep registering near the optimum.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::likelihood::{
    log_det_of, log_likelihood_of, HedgingParameter, MeasurementRecord, MIN_PROBABILITY,
};
use crate::linalg::{
    eig_hermitized, frobenius_norm, hermitize, identity, trace_product_re, trace_re,
    traceless_hermitian_basis, CMatrix, HermitianEigen,
};
use crate::state::DensityMatrix;

/// Smallest step tried, in units of `1/c`.
const MIN_RELATIVE_STEP: f64 = 1e-18;
/// Iteration continues below the stationarity gate by this factor, or
/// until no step of any size increases the objective.
const POLISH: f64 = 1e-4;
/// Eigenvalues of an MLE iterate below these are candidates for removal,
/// tried in order.
const SNAP_THRESHOLDS: [f64; 2] = [1e-3, 1e-8];
/// Eigenvalues below this count as a zero of a rank-deficient iterate.
const ZERO_EIGENVALUE: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Convergence threshold on the change of the objective per iteration.
    pub tol: f64,
    /// Stationarity gate on the projected gradient, relative to `max(N, 1)`.
    pub grad_tol: f64,
    pub max_iter: usize,
    /// Keep the objective value of every iterate in the diagnostics.
    pub record_trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            grad_tol: 1e-6,
            max_iter: 20_000,
            record_trace: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if !(self.grad_tol > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "grad_tol must be positive, got {}",
                self.grad_tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverDiagnostics {
    pub iterations: usize,
    pub converged: bool,
    pub final_objective: f64,
    pub min_eigenvalue: f64,
    /// Norm of the projected gradient at the returned point.
    pub stationarity: f64,
    /// The likelihood is flat along some feasible direction at the returned
    /// point, so the maximizer is not unique.
    #[serde(default)]
    pub degenerate: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective_trace: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy)]
enum Objective {
    Likelihood,
    Hedged(f64),
}

struct Iterate {
    m: CMatrix,
    /// `Tr[ρ E_i]` for every record item.
    probs: Vec<f64>,
    /// Spectrum, kept for hedged iterates (needed for `ρ⁻¹`).
    eig: Option<HermitianEigen>,
    value: f64,
}

fn born_probs(m: &CMatrix, rec: &MeasurementRecord) -> Option<Vec<f64>> {
    let mut probs = Vec::with_capacity(rec.items().len());
    for item in rec.items() {
        let p = trace_product_re(m, item.effect.matrix());
        if item.count > 0 && !(p > MIN_PROBABILITY) {
            return None;
        }
        probs.push(p);
    }
    Some(probs)
}

impl Objective {
    /// `c = Tr[G ρ]`, constant over the state space.
    fn scale(self, rec: &MeasurementRecord) -> f64 {
        let n = rec.total() as f64;
        match self {
            Objective::Likelihood => n,
            Objective::Hedged(beta) => n + rec.dim() as f64 * beta,
        }
    }

    fn beta(self) -> f64 {
        match self {
            Objective::Likelihood => 0.0,
            Objective::Hedged(beta) => beta,
        }
    }

    /// Full evaluation from scratch; `None` where the objective is `-∞`.
    fn evaluate(self, m: CMatrix, rec: &MeasurementRecord) -> Option<Iterate> {
        let probs = born_probs(&m, rec)?;
        let ll: f64 = rec
            .items()
            .iter()
            .zip(&probs)
            .filter(|(i, _)| i.count > 0)
            .map(|(i, p)| i.count as f64 * p.ln())
            .sum();
        match self {
            Objective::Likelihood => Some(Iterate {
                m,
                probs,
                eig: None,
                value: ll,
            }),
            Objective::Hedged(beta) => {
                let eig = eig_hermitized(&m).ok()?;
                let ld = log_det_of(eig.values.as_slice());
                if ld == f64::NEG_INFINITY {
                    return None;
                }
                Some(Iterate {
                    m,
                    probs,
                    eig: Some(eig),
                    value: ll + beta * ld,
                })
            }
        }
    }

    fn gradient(self, it: &Iterate, rec: &MeasurementRecord) -> CMatrix {
        let d = rec.dim();
        let mut g = CMatrix::zeros(d, d);
        for (item, &p) in rec.items().iter().zip(&it.probs) {
            if item.count > 0 {
                g += item.effect.matrix().scale(item.count as f64 / p);
            }
        }
        if let Objective::Hedged(beta) = self {
            let eig = it
                .eig
                .as_ref()
                .expect("hedged iterates carry their spectrum");
            g += eig.map(|l| beta / l);
        }
        g
    }

    /// Hedged optimum is interior, so the whole projected gradient must
    /// vanish. The likelihood optimum may sit on the boundary, where the
    /// KKT residual is `‖(G − c) ρ‖` on the support plus any positive part
    /// of `G − c` (an ascent direction out of the face).
    fn stationarity(self, projected: &CMatrix, projected_max: f64, it: &Iterate) -> f64 {
        match self {
            Objective::Hedged(_) => frobenius_norm(projected),
            Objective::Likelihood => frobenius_norm(&(projected * &it.m)).max(projected_max),
        }
    }

    /// Moves to `A ρ A / Tr[A ρ A]` with `A = I + ε P` and returns the new
    /// iterate with the objective change computed from the increments
    /// (`ln1p` of relative probability changes and `2 ln|det A| − d ln t`),
    /// which stays accurate long after `f(new) − f(old)` would cancel.
    fn step(
        self,
        cur: &Iterate,
        projected: &CMatrix,
        projected_eig: &HermitianEigen,
        eps: f64,
        rec: &MeasurementRecord,
    ) -> Option<(Iterate, f64)> {
        let d = rec.dim();
        let p_rho = projected * &cur.m;
        let sym = &p_rho + p_rho.adjoint();
        let p_rho_p = hermitize(&(&p_rho * projected));
        // t − 1 = 2ε Tr[Pρ] + ε² Tr[PρP]
        let t_minus_1 = eps * trace_re(&sym) + eps * eps * trace_re(&p_rho_p);
        if !(t_minus_1 > -1.0) || !t_minus_1.is_finite() {
            return None;
        }
        let t = 1.0 + t_minus_1;
        let delta =
            hermitize(&(sym.scale(eps) + p_rho_p.scale(eps * eps) - cur.m.scale(t_minus_1)))
                .unscale(t);

        let mut change = 0.0;
        let mut probs = Vec::with_capacity(cur.probs.len());
        for (item, &p) in rec.items().iter().zip(&cur.probs) {
            let dp = trace_product_re(&delta, item.effect.matrix());
            let next = p + dp;
            if item.count > 0 {
                if !(next > MIN_PROBABILITY) {
                    return None;
                }
                change += item.count as f64 * (dp / p).ln_1p();
            }
            probs.push(next);
        }
        let m = &cur.m + delta;

        let eig = match self {
            Objective::Likelihood => None,
            Objective::Hedged(beta) => {
                let mut log_det_a = 0.0;
                for &mu in projected_eig.values.iter() {
                    let x = eps * mu;
                    if !(x > -1.0) {
                        // A indefinite or singular: a far overshoot.
                        return None;
                    }
                    log_det_a += x.ln_1p();
                }
                let eig = eig_hermitized(&m).ok()?;
                if log_det_of(eig.values.as_slice()) == f64::NEG_INFINITY {
                    return None;
                }
                change += beta * (2.0 * log_det_a - d as f64 * t_minus_1.ln_1p());
                Some(eig)
            }
        };
        let value = cur.value + change;
        Some((
            Iterate {
                m,
                probs,
                eig,
                value,
            },
            change,
        ))
    }
}

impl Objective {
    /// Damped Newton step in the traceless Hermitian coordinates. The
    /// Hessian is pseudo-inverted, so flat directions of the likelihood are
    /// left alone. Step lengths `1, 1/2, …` are tried until the objective
    /// increases and the iterate stays feasible.
    fn newton_step(
        self,
        cur: &Iterate,
        basis: &[CMatrix],
        g: &CMatrix,
        rec: &MeasurementRecord,
    ) -> Option<(Iterate, f64, f64)> {
        let k = basis.len();
        let grad = DVector::from_iterator(k, basis.iter().map(|b| trace_product_re(g, b)));
        let mut neg_hess = DMatrix::<f64>::zeros(k, k);
        let mut weights = Vec::new();
        for (item, &p) in rec.items().iter().zip(&cur.probs) {
            if item.count > 0 {
                let row = DVector::from_iterator(
                    k,
                    basis
                        .iter()
                        .map(|b| trace_product_re(item.effect.matrix(), b)),
                );
                neg_hess += (&row * row.transpose()).scale(item.count as f64 / (p * p));
                weights.push(row.unscale(p));
            } else {
                weights.push(DVector::zeros(k));
            }
        }
        let inv_sqrt = match (self, cur.eig.as_ref()) {
            (Objective::Hedged(beta), Some(eig)) => {
                let inv = eig.map(|l| 1.0 / l);
                let k_mats: Vec<CMatrix> = basis.iter().map(|b| &inv * b).collect();
                for a in 0..k {
                    for b in a..k {
                        let v = beta * trace_product_re(&k_mats[a], &k_mats[b]);
                        neg_hess[(a, b)] += v;
                        if a != b {
                            neg_hess[(b, a)] += v;
                        }
                    }
                }
                Some(eig.map(|l| 1.0 / l.sqrt()))
            }
            _ => None,
        };
        let sym = SymmetricEigen::new(neg_hess);
        let top = sym.eigenvalues.iter().cloned().fold(0.0, f64::max);
        if !(top > 0.0) {
            return None;
        }
        let mut x = DVector::<f64>::zeros(k);
        for (j, &lam) in sym.eigenvalues.iter().enumerate() {
            if lam > 1e-12 * top {
                let v = sym.eigenvectors.column(j);
                x += v.scale(v.dot(&grad) / lam);
            }
        }
        let mut delta = CMatrix::zeros(rec.dim(), rec.dim());
        for (b, &xa) in basis.iter().zip(x.iter()) {
            delta += b.scale(xa);
        }
        let dps: Vec<f64> = rec
            .items()
            .iter()
            .map(|i| trace_product_re(&delta, i.effect.matrix()))
            .collect();
        let mus = match &inv_sqrt {
            Some(w) => Some(eig_hermitized(&(w * &delta * w)).ok()?.values),
            None => None,
        };

        let mut s = 1.0;
        for _ in 0..40 {
            if let Some((next, change)) = self.try_affine(cur, &delta, &dps, mus.as_ref(), s, rec) {
                return Some((next, change, s));
            }
            s *= 0.5;
        }
        None
    }

    fn try_affine(
        self,
        cur: &Iterate,
        delta: &CMatrix,
        dps: &[f64],
        mus: Option<&DVector<f64>>,
        s: f64,
        rec: &MeasurementRecord,
    ) -> Option<(Iterate, f64)> {
        let mut change = 0.0;
        let mut probs = Vec::with_capacity(dps.len());
        for ((item, &p), &dp) in rec.items().iter().zip(&cur.probs).zip(dps) {
            let next = p + s * dp;
            if item.count > 0 {
                if !(next > MIN_PROBABILITY) {
                    return None;
                }
                change += item.count as f64 * (s * dp / p).ln_1p();
            }
            probs.push(next);
        }
        if let (Objective::Hedged(beta), Some(mus)) = (self, mus) {
            let mut ld = 0.0;
            for &mu in mus.iter() {
                if !(s * mu > -1.0) {
                    return None;
                }
                ld += (s * mu).ln_1p();
            }
            change += beta * ld;
        }
        if !(change > 0.0) {
            return None;
        }
        let m = hermitize(&(&cur.m + delta.scale(s)));
        let eig = eig_hermitized(&m).ok()?;
        let feasible = match self {
            Objective::Likelihood => eig.min_value() >= -ZERO_EIGENVALUE,
            Objective::Hedged(_) => log_det_of(eig.values.as_slice()) > f64::NEG_INFINITY,
        };
        if !feasible {
            return None;
        }
        let eig = matches!(self, Objective::Hedged(_)).then_some(eig);
        Some((
            Iterate {
                m,
                probs,
                eig,
                value: cur.value + change,
            },
            change,
        ))
    }
}

fn ascend(
    rec: &MeasurementRecord,
    objective: Objective,
    cfg: &SolverConfig,
) -> Result<(DensityMatrix, SolverDiagnostics)> {
    cfg.validate()?;
    let d = rec.dim();
    let n = rec.total() as f64;
    let c = objective.scale(rec);
    let gate = cfg.grad_tol * n.max(1.0);
    let eye = identity(d);
    let basis = traceless_hermitian_basis(d);

    let start = eye.unscale(d as f64);
    let mut cur = match objective.evaluate(start, rec) {
        Some(it) => it,
        None => {
            let index = rec
                .items()
                .iter()
                .position(|i| i.count > 0 && trace_re(i.effect.matrix()) <= 0.0)
                .unwrap_or(0);
            return Err(Error::ZeroProbabilityEvent { index });
        }
    };
    let mut trace = cfg.record_trace.then(|| vec![cur.value]);
    let mut step = 1.0 / c;
    let mut last_change = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    let mut stationarity;

    loop {
        let g = objective.gradient(&cur, rec);
        let projected = hermitize(&(&g - eye.scale(c)));
        let projected_eig = eig_hermitized(&projected)?;
        stationarity = objective.stationarity(&projected, projected_eig.max_value(), &cur);
        if last_change <= cfg.tol && stationarity <= POLISH * gate {
            converged = true;
            break;
        }
        if iterations >= cfg.max_iter {
            break;
        }

        // A full Newton step is taken as is. A damped one may be blocked by
        // the boundary, so it competes with the congruence step.
        let newton = objective.newton_step(&cur, &basis, &g, rec);
        let mut trial = 2.0 * step;
        let mut accepted = None;
        match newton {
            Some((next, change, 1.0)) => {
                accepted = Some((next, change));
                trial = step;
            }
            _ => {
                while trial * c >= MIN_RELATIVE_STEP {
                    if let Some((next, change)) =
                        objective.step(&cur, &projected, &projected_eig, trial, rec)
                    {
                        if change > 0.0 {
                            accepted = Some((next, change));
                            break;
                        }
                    }
                    trial *= 0.5;
                }
                if let Some((next, change, _)) = newton {
                    if accepted.as_ref().is_none_or(|(_, best)| change > *best) {
                        accepted = Some((next, change));
                        trial = trial.max(step);
                    }
                }
            }
        }
        // Congruence steps never regrow a zero eigenvalue, so on a face the
        // outward move competes with them.
        if matches!(objective, Objective::Likelihood) && (accepted.is_none() || on_face(&cur)) {
            if let Some(next) = leave_face(&cur, &projected_eig, rec) {
                let change = next.value - cur.value;
                if accepted.as_ref().is_none_or(|(_, best)| change > *best) {
                    accepted = Some((next, change));
                    trial = step;
                }
            }
        }
        let Some((next, change)) = accepted else {
            // No ascent at any step size: stationary to rounding error, or stuck.
            converged = stationarity <= gate;
            break;
        };
        last_change = change;
        cur = next;
        step = trial;
        iterations += 1;
        if matches!(objective, Objective::Likelihood) {
            if let Some(snapped) = snap_to_face(&cur, rec) {
                last_change += snapped.value - cur.value;
                cur = snapped;
            }
        }
        if let Some(t) = trace.as_mut() {
            t.push(cur.value);
        }
    }

    // Re-evaluate from scratch so accumulated increments do not drift.
    let beta = objective.beta();
    let final_objective = log_likelihood_of(&cur.m, rec)
        + if beta > 0.0 {
            beta * log_det_of(eig_hermitized(&cur.m)?.values.as_slice())
        } else {
            0.0
        };
    let min_eigenvalue = eig_hermitized(&cur.m)?.min_value();
    let degenerate = matches!(objective, Objective::Likelihood) && is_degenerate(rec, &cur.m);
    let diagnostics = SolverDiagnostics {
        iterations,
        converged,
        final_objective,
        min_eigenvalue,
        stationarity,
        degenerate,
        objective_trace: trace,
    };
    Ok((DensityMatrix::normalized(cur.m), diagnostics))
}

fn on_face(it: &Iterate) -> bool {
    eig_hermitized(&it.m).is_ok_and(|e| e.min_value() < SNAP_THRESHOLDS[1])
}

fn evaluate_normalized(
    objective: Objective,
    m: CMatrix,
    rec: &MeasurementRecord,
) -> Option<Iterate> {
    let t = trace_re(&m);
    if !(t > 0.0 && t.is_finite()) {
        return None;
    }
    objective.evaluate(m.unscale(t), rec)
}

/// Drops the spectral components of an MLE iterate below
/// [`SNAP_THRESHOLDS`] if that does not lower the likelihood. Congruence
/// steps only shrink such components geometrically; removing them puts
/// the iterate exactly on the boundary face where a rank-deficient
/// maximizer lives.
fn snap_to_face(cur: &Iterate, rec: &MeasurementRecord) -> Option<Iterate> {
    let eig = eig_hermitized(&cur.m).ok()?;
    let min = eig.min_value();
    if !(min > ZERO_EIGENVALUE) {
        return None;
    }
    let current = Objective::Likelihood.evaluate(cur.m.clone(), rec)?.value;
    SNAP_THRESHOLDS
        .iter()
        .filter(|&&thr| min < thr)
        .find_map(|&thr| {
            let kept = eig.map(|l| if l < thr { 0.0 } else { l });
            let next = evaluate_normalized(Objective::Likelihood, kept, rec)?;
            (next.value >= current).then_some(next)
        })
}

/// From a rank-deficient iterate, congruence steps cannot regrow a zero
/// eigenvalue. If the projected gradient still points out of the face,
/// mix in its top eigenvector: `ρ ↦ (1 − t) ρ + t v v†`.
fn leave_face(
    cur: &Iterate,
    projected_eig: &HermitianEigen,
    rec: &MeasurementRecord,
) -> Option<Iterate> {
    if !(projected_eig.max_value() > 0.0) {
        return None;
    }
    let outward = projected_eig.projector(0);
    let mut t = 0.5;
    while t > 1e-16 {
        let mixed = cur.m.scale(1.0 - t) + outward.scale(t);
        if let Some(next) = evaluate_normalized(Objective::Likelihood, mixed, rec) {
            if next.value > cur.value {
                return Some(next);
            }
        }
        t *= 0.5;
    }
    None
}

/// Traceless Hermitian directions along which every observed probability
/// is constant.
fn flat_directions(rec: &MeasurementRecord) -> Vec<CMatrix> {
    let d = rec.dim();
    let basis = traceless_hermitian_basis(d);
    let observed: Vec<_> = rec.items().iter().filter(|i| i.count > 0).collect();
    let rows = observed.len().max(basis.len());
    let mut a = DMatrix::<f64>::zeros(rows, basis.len());
    for (i, item) in observed.iter().enumerate() {
        for (k, b) in basis.iter().enumerate() {
            a[(i, k)] = trace_product_re(item.effect.matrix(), b);
        }
    }
    let svd = SVD::new(a, false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let cutoff = 1e-10 * svd.singular_values.max().max(f64::MIN_POSITIVE);
    (0..basis.len())
        .filter(|&j| svd.singular_values[j] <= cutoff)
        .map(|j| {
            basis
                .iter()
                .enumerate()
                .fold(CMatrix::zeros(d, d), |acc, (k, b)| {
                    acc + b.scale(v_t[(j, k)])
                })
        })
        .collect()
}

fn is_degenerate(rec: &MeasurementRecord, m: &CMatrix) -> bool {
    const PROBE: f64 = 1e-6;
    flat_directions(rec).iter().any(|dir| {
        [PROBE, -PROBE].iter().any(|&t| {
            eig_hermitized(&hermitize(&(m + dir.scale(t))))
                .map(|e| e.min_value() >= 0.0)
                .unwrap_or(false)
        })
    })
}

/// Maximum likelihood estimate over density matrices.
///
/// Non-convergence is not an error: the last iterate is returned with
/// `converged == false`.
pub fn mle(
    rec: &MeasurementRecord,
    cfg: &SolverConfig,
) -> Result<(DensityMatrix, SolverDiagnostics)> {
    if rec.total() == 0 {
        return Err(Error::NoData);
    }
    ascend(rec, Objective::Likelihood, cfg)
}

/// Hedged maximum likelihood estimate: maximizer of `L(ρ) det(ρ)^β`.
/// Works without data, where the answer is `I/d`.
pub fn hmle(
    rec: &MeasurementRecord,
    beta: HedgingParameter,
    cfg: &SolverConfig,
) -> Result<(DensityMatrix, SolverDiagnostics)> {
    ascend(rec, Objective::Hedged(beta.value()), cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::likelihood::pool_measurements;
    use crate::state::{to_bloch, Povm};

    fn pauli_record(plus: [u64; 3], n: u64) -> MeasurementRecord {
        let runs: Vec<_> = (0..3)
            .map(|a| (Povm::pauli_axis(a), vec![plus[a], n - plus[a]]))
            .collect();
        pool_measurements(&runs).unwrap()
    }

    fn z_record(counts: &[u64]) -> MeasurementRecord {
        MeasurementRecord::from_povm(&Povm::pauli_axis(2), counts).unwrap()
    }

    #[test]
    fn mle_single_basis_is_classical() {
        let (rho, diag) = mle(&z_record(&[3, 7]), &SolverConfig::default()).unwrap();
        assert!(diag.converged, "{diag:?}");
        assert!((rho.matrix()[(0, 0)].re - 0.3).abs() < 1e-8);
        assert!((rho.matrix()[(1, 1)].re - 0.7).abs() < 1e-8);
        assert!(diag.degenerate);
    }

    #[test]
    fn hmle_single_basis_is_add_beta() {
        let beta = HedgingParameter::new(0.5).unwrap();
        let (rho, diag) = hmle(&z_record(&[10, 0]), beta, &SolverConfig::default()).unwrap();
        assert!(diag.converged, "{diag:?}");
        assert!((rho.matrix()[(0, 0)].re - 10.5 / 11.0).abs() < 1e-10);
        assert!((rho.matrix()[(1, 1)].re - 0.5 / 11.0).abs() < 1e-10);
        assert!(diag.min_eigenvalue > 0.0);
    }

    #[test]
    fn hmle_without_data_is_maximally_mixed() {
        let (rho, diag) = hmle(
            &z_record(&[0, 0]),
            HedgingParameter::default(),
            &SolverConfig::default(),
        )
        .unwrap();
        assert!(diag.converged);
        assert!(frobenius_norm(&(rho.matrix() - identity(2).scale(0.5))) < 1e-14);
    }

    #[test]
    fn mle_all_plus_is_pure() {
        let (rho, diag) = mle(&pauli_record([10, 10, 10], 10), &SolverConfig::default()).unwrap();
        assert!(diag.converged, "{diag:?}");
        let b = to_bloch(&rho).unwrap();
        let s = 1.0 / 3f64.sqrt();
        assert!(
            (b.x - s).abs() < 1e-6 && (b.y - s).abs() < 1e-6 && (b.z - s).abs() < 1e-6,
            "{b:?}"
        );
        assert!(diag.min_eigenvalue <= 1e-6);
    }

    #[test]
    fn mle_rejects_empty_record() {
        assert!(matches!(
            mle(&z_record(&[0, 0]), &SolverConfig::default()),
            Err(Error::NoData)
        ));
    }

    #[test]
    fn iteration_cap_is_reported() {
        let cfg = SolverConfig {
            max_iter: 1,
            ..SolverConfig::default()
        };
        let (_, diag) = mle(&pauli_record([10, 10, 10], 10), &cfg).unwrap();
        assert!(!diag.converged);
        assert_eq!(diag.iterations, 1);
    }

    #[test]
    fn objective_trace_is_monotone() {
        let cfg = SolverConfig {
            record_trace: true,
            ..SolverConfig::default()
        };
        let rec = pauli_record([7, 2, 9], 10);
        let (_, d1) = mle(&rec, &cfg).unwrap();
        let (_, d2) = hmle(&rec, HedgingParameter::new(0.1).unwrap(), &cfg).unwrap();
        for d in [d1, d2] {
            let t = d.objective_trace.unwrap();
            assert_eq!(t.len(), d.iterations + 1);
            assert!(t.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        }
    }

    #[test]
    fn config_validation() {
        let bad = SolverConfig {
            tol: 0.0,
            ..SolverConfig::default()
        };
        assert!(mle(&z_record(&[1, 1]), &bad).is_err());
        let bad = SolverConfig {
            max_iter: 0,
            ..SolverConfig::default()
        };
        assert!(mle(&z_record(&[1, 1]), &bad).is_err());
    }
}
