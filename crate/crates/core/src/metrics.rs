//! Error measures between quantum states. All logarithms are natural.

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitized, frobenius_norm, hermitize, trace_product_re, CMatrix};
use crate::state::DensityMatrix;

/// Relative eigenvalue threshold below which a direction is outside the support.
pub const SUPPORT_THRESHOLD: f64 = 1e-12;

fn same_dim(a: &DensityMatrix, b: &DensityMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(())
}

/// `D(ρ‖σ) = Tr[ρ (ln ρ − ln σ)]`, or `+∞` if `supp ρ ⊄ supp σ`.
pub fn quantum_relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_dim(rho, sigma)?;
    let er = rho.eigen();
    let es = sigma.eigen();
    let rho_cut = SUPPORT_THRESHOLD * er.max_value();
    let sigma_cut = SUPPORT_THRESHOLD * es.max_value();

    let neg_entropy: f64 = er
        .values
        .iter()
        .filter(|&&l| l > rho_cut)
        .map(|&l| l * l.ln())
        .sum();

    // ⟨φ_j|ρ|φ_j⟩ for each eigenvector φ_j of σ.
    let mut cross = 0.0;
    let mut leaked = 0.0;
    for j in 0..es.dim() {
        let phi = es.vectors.column(j);
        let weight = (phi.adjoint() * rho.matrix() * phi)[(0, 0)].re;
        let mu = es.values[j];
        if mu > sigma_cut {
            cross += weight * mu.ln();
        } else {
            leaked += weight;
        }
    }
    if leaked > SUPPORT_THRESHOLD {
        return Ok(f64::INFINITY);
    }
    Ok((neg_entropy - cross).max(0.0))
}

/// `1 − (Tr √(√ρ σ √ρ))²`.
pub fn infidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_dim(rho, sigma)?;
    let f = fidelity(rho.matrix(), sigma.matrix());
    Ok((1.0 - f).clamp(0.0, 1.0))
}

fn fidelity(rho: &CMatrix, sigma: &CMatrix) -> f64 {
    if rho.nrows() == 2 {
        // Qubit closed form: Tr[ρσ] + 2 √(det ρ det σ).
        let det = |m: &CMatrix| (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).re.max(0.0);
        return trace_product_re(rho, sigma) + 2.0 * (det(rho) * det(sigma)).sqrt();
    }
    let sqrt_rho = eig_hermitized(rho)
        .expect("Hermitian eigendecomposition")
        .map(|l| l.max(0.0).sqrt());
    let inner = hermitize(&(&sqrt_rho * sigma * &sqrt_rho));
    let root_sum: f64 = eig_hermitized(&inner)
        .expect("Hermitian eigendecomposition")
        .values
        .iter()
        .map(|&l| l.max(0.0).sqrt())
        .sum();
    root_sum * root_sum
}

/// `Tr|ρ − σ|` (no factor of one half).
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_dim(rho, sigma)?;
    Ok(trace_norm(&(rho.matrix() - sigma.matrix())))
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
pub fn trace_norm(m: &CMatrix) -> f64 {
    eig_hermitized(&hermitize(m))
        .expect("Hermitian eigendecomposition")
        .values
        .iter()
        .map(|l| l.abs())
        .sum()
}

/// `√Tr[(ρ − σ)²]`.
pub fn hs_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_dim(rho, sigma)?;
    Ok(frobenius_norm(&(rho.matrix() - sigma.matrix())))
}

/// Radial coordinate used to bin states by mixedness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialCoordinate {
    /// `Tr ρ²`.
    pub purity: f64,
    /// `r² = (1 + Tr ρ²)/2`.
    pub r_sq: f64,
    pub r: f64,
    /// Conventional Bloch radius `√(2 Tr ρ² − 1)`, qubits only.
    pub bloch_radius: Option<f64>,
}

impl RadialCoordinate {
    /// `1 − r²`, the binning axis.
    pub fn mixedness(&self) -> f64 {
        1.0 - self.r_sq
    }
}

/// Note that `r² = (1 + Tr ρ²)/2` is not the Bloch radius: it is 0.75 at
/// the maximally mixed qubit where the Bloch radius is 0.
pub fn radial_coordinate(rho: &DensityMatrix) -> RadialCoordinate {
    let purity = rho.purity();
    let r_sq = 0.5 * (1.0 + purity);
    let bloch_radius = (rho.dim() == 2).then(|| (2.0 * purity - 1.0).max(0.0).sqrt());
    RadialCoordinate {
        purity,
        r_sq,
        r: r_sq.sqrt(),
        bloch_radius,
    }
}
