use crate::classical::CountVector;
use crate::error::{Error, Result};
use crate::likelihood::HedgingParameter;
use crate::linalg::{identity, max_abs_entry, CMatrix};
use crate::state::DensityMatrix;

/// Hedged estimate for data from one orthonormal basis (the columns of
/// `basis`): `Σ_k (n_k + β)/(N + dβ) |k⟩⟨k|`, the add-β rule in that basis.
pub fn projective_hmle_closed_form(
    counts: &CountVector,
    basis: &CMatrix,
    beta: HedgingParameter,
) -> Result<DensityMatrix> {
    let d = basis.nrows();
    if !basis.is_square() {
        return Err(Error::NotSquare {
            rows: basis.nrows(),
            cols: basis.ncols(),
        });
    }
    if counts.len() != d {
        return Err(Error::LengthMismatch {
            expected: d,
            found: counts.len(),
        });
    }
    let deviation = max_abs_entry(&(basis.adjoint() * basis - identity(d)));
    if deviation > 1e-10 {
        return Err(Error::InvalidConfig(format!(
            "basis is not unitary (deviation {deviation:e})"
        )));
    }
    let b = beta.value();
    let denom = counts.total() as f64 + d as f64 * b;
    let mut scaled = basis.clone();
    for (k, &n) in counts.counts().iter().enumerate() {
        let p = (n as f64 + b) / denom;
        scaled.column_mut(k).scale_mut(p);
    }
    let m = scaled * basis.adjoint();
    Ok(DensityMatrix::normalized(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frobenius_norm, C64};

    #[test]
    fn computational_basis() {
        let c = CountVector::new(vec![10, 0]).unwrap();
        let rho =
            projective_hmle_closed_form(&c, &identity(2), HedgingParameter::new(0.5).unwrap())
                .unwrap();
        assert!((rho.matrix()[(0, 0)].re - 10.5 / 11.0).abs() < 1e-15);
        assert!((rho.matrix()[(1, 1)].re - 0.5 / 11.0).abs() < 1e-15);
    }

    #[test]
    fn no_counts_is_maximally_mixed() {
        let c = CountVector::new(vec![0, 0, 0]).unwrap();
        let rho =
            projective_hmle_closed_form(&c, &identity(3), HedgingParameter::default()).unwrap();
        assert!(frobenius_norm(&(rho.matrix() - identity(3).unscale(3.0))) < 1e-15);
    }

    #[test]
    fn hadamard_basis() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let h = CMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(s, 0.0),
                C64::new(s, 0.0),
                C64::new(s, 0.0),
                C64::new(-s, 0.0),
            ],
        );
        let c = CountVector::new(vec![3, 7]).unwrap();
        let rho = projective_hmle_closed_form(&c, &h, HedgingParameter::new(1.0).unwrap()).unwrap();
        // (4/12)|+⟩⟨+| + (8/12)|−⟩⟨−| = I/2 + (4/12 − 8/12) σ_x / 2
        let want = identity(2).scale(0.5) + crate::linalg::pauli(0).scale(-4.0 / 24.0);
        assert!(frobenius_norm(&(rho.matrix() - want)) < 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        let c = CountVector::new(vec![1, 1]).unwrap();
        assert!(HedgingParameter::new(0.0).is_err());
        assert!(projective_hmle_closed_form(
            &c,
            &identity(2).scale(2.0),
            HedgingParameter::default()
        )
        .is_err());
        assert!(
            projective_hmle_closed_form(&c, &identity(3), HedgingParameter::default()).is_err()
        );
    }
}
