use nalgebra::{DMatrix, DVector, SVD};

use crate::error::{Error, Result};
use crate::likelihood::MeasurementRecord;
use crate::linalg::{
    eig_hermitized, hermitize, identity, trace_product_re, trace_re, traceless_hermitian_basis,
    CMatrix,
};
use crate::state::DensityMatrix;

/// Relative singular-value cutoff for the rank of the design matrix.
const RANK_THRESHOLD: f64 = 1e-10;

/// Unit-trace Hermitian least-squares fit of the observed frequencies.
/// Not necessarily positive.
#[derive(Debug, Clone)]
pub struct LinearInversionResult {
    pub matrix: CMatrix,
    /// `‖A x − f‖₂` over all outcomes.
    pub residual: f64,
}

impl LinearInversionResult {
    pub fn eigenvalues(&self) -> Vec<f64> {
        eig_hermitized(&self.matrix)
            .expect("Hermitian eigendecomposition")
            .values
            .iter()
            .copied()
            .collect()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        *self.eigenvalues().last().expect("non-empty spectrum")
    }

    /// The fit as a state, when it is one.
    pub fn to_density_matrix(&self) -> Result<DensityMatrix> {
        DensityMatrix::new(self.matrix.clone())
    }
}

/// Solves `Tr[ρ E_i] = n_i / N_j` in the least-squares sense over unit-trace
/// Hermitian ρ, where `N_j = w_i N` is the number of shots of outcome `i`'s
/// sub-measurement.
pub fn linear_inversion(rec: &MeasurementRecord) -> Result<LinearInversionResult> {
    let total = rec.total();
    if total == 0 {
        return Err(Error::NoData);
    }
    let d = rec.dim();
    let basis = traceless_hermitian_basis(d);
    let unknowns = basis.len();
    let m = rec.items().len();
    // Pad with zero rows so the SVD exposes the full right null space.
    let rows = m.max(unknowns);
    let mut a = DMatrix::<f64>::zeros(rows, unknowns);
    let mut y = DVector::<f64>::zeros(rows);
    for (i, item) in rec.items().iter().enumerate() {
        let e = item.effect.matrix();
        for (k, b) in basis.iter().enumerate() {
            a[(i, k)] = trace_product_re(e, b);
        }
        let freq = item.count as f64 / (item.weight * total as f64);
        y[i] = freq - trace_re(e) / d as f64;
    }

    let svd = SVD::new(a.clone(), true, true);
    let v_t = svd.v_t.as_ref().expect("requested V^T");
    let u = svd.u.as_ref().expect("requested U");
    let smax = svd.singular_values.max();
    let cutoff = RANK_THRESHOLD * smax.max(f64::MIN_POSITIVE);
    let rank = svd.singular_values.iter().filter(|&&s| s > cutoff).count();
    if rank < unknowns {
        let null_directions = (0..unknowns)
            .filter(|&j| svd.singular_values[j] <= cutoff)
            .map(|j| {
                basis
                    .iter()
                    .enumerate()
                    .fold(CMatrix::zeros(d, d), |acc, (k, b)| {
                        acc + b.scale(v_t[(j, k)])
                    })
            })
            .collect();
        return Err(Error::Underdetermined {
            rank,
            needed: unknowns,
            null_directions,
        });
    }

    // x = V Σ⁻¹ Uᵀ y
    let mut coeffs = DVector::<f64>::zeros(unknowns);
    for j in 0..unknowns {
        let s = svd.singular_values[j];
        let uy = u.column(j).dot(&y);
        coeffs += v_t.row(j).transpose() * (uy / s);
    }
    let residual = (&a * &coeffs - &y).norm();
    let mut rho = identity(d).unscale(d as f64);
    for (k, b) in basis.iter().enumerate() {
        rho += b.scale(coeffs[k]);
    }
    Ok(LinearInversionResult {
        matrix: hermitize(&rho),
        residual,
    })
}
