//! Density matrices, measurement effects, POVMs and the Born rule.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::{
    eig_hermitian, hermitian_deviation, hermitize, identity, max_abs_entry, pauli, trace_re,
    CMatrix, HermitianEigen, C64,
};

/// Tolerance on Hermiticity and unit trace of a density matrix.
pub const STATE_TOL: f64 = 1e-12;
/// Most negative eigenvalue accepted for states and effects.
pub const POSITIVITY_TOL: f64 = 1e-10;
/// Entrywise tolerance on `Σ E_i = I`.
pub const POVM_TOL: f64 = 1e-10;

/// A unit-trace, positive-semidefinite Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: CMatrix,
}

impl DensityMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        let dev = hermitian_deviation(&m);
        if dev > STATE_TOL {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let trace = trace_re(&m);
        if (trace - 1.0).abs() > STATE_TOL {
            return Err(Error::NotUnitTrace { trace });
        }
        let m = hermitize(&m);
        let min = eig_hermitian(&m)?.min_value();
        if min < -POSITIVITY_TOL {
            return Err(Error::NotPositive {
                min_eigenvalue: min,
            });
        }
        Ok(Self { m })
    }

    /// Wraps a matrix the caller has already made Hermitian, PSD and unit trace.
    pub(crate) fn from_trusted(m: CMatrix) -> Self {
        Self { m }
    }

    /// Normalizes a Hermitian PSD matrix to unit trace.
    pub(crate) fn normalized(m: CMatrix) -> Self {
        let t = trace_re(&m);
        Self {
            m: hermitize(&m).unscale(t),
        }
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self {
            m: identity(d).unscale(d as f64),
        }
    }

    /// Pure state `|ψ⟩⟨ψ|`; `psi` is normalized first.
    pub fn pure(psi: &DVector<C64>) -> Result<Self> {
        let n = psi.norm();
        if n == 0.0 {
            return Err(Error::EmptyInput);
        }
        let v = psi.unscale(n);
        Ok(Self {
            m: hermitize(&(&v * v.adjoint())),
        })
    }

    /// Diagonal state in the computational basis.
    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        let d = DVector::from_iterator(probs.len(), probs.iter().map(|&p| C64::new(p, 0.0)));
        Self::new(CMatrix::from_diagonal(&d))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn eigen(&self) -> HermitianEigen {
        // Construction guarantees Hermiticity.
        crate::linalg::eig_hermitized(&self.m).expect("Hermitian eigendecomposition")
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.eigen().values.iter().copied().collect()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigen().min_value()
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        self.m.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `U ρ U†`.
    pub fn conjugate_by(&self, u: &CMatrix) -> Self {
        Self {
            m: hermitize(&(u * &self.m * u.adjoint())),
        }
    }

    pub fn to_bloch(&self) -> Result<BlochVector> {
        to_bloch(self)
    }
}

/// A POVM element: Hermitian with spectrum in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Effect {
    m: CMatrix,
}

impl Effect {
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        let eig = eig_hermitian(&m)?;
        if eig.min_value() < -POSITIVITY_TOL {
            return Err(Error::NotPositive {
                min_eigenvalue: eig.min_value(),
            });
        }
        if eig.max_value() > 1.0 + POSITIVITY_TOL {
            return Err(Error::EffectTooLarge {
                max_eigenvalue: eig.max_value(),
            });
        }
        Ok(Self { m: hermitize(&m) })
    }

    /// `|ψ⟩⟨ψ|` for a (normalized on entry) vector.
    pub fn projector(psi: &DVector<C64>) -> Result<Self> {
        let n = psi.norm();
        if n == 0.0 {
            return Err(Error::EmptyInput);
        }
        let v = psi.unscale(n);
        Ok(Self {
            m: hermitize(&(&v * v.adjoint())),
        })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn conjugate_by(&self, u: &CMatrix) -> Self {
        Self {
            m: hermitize(&(u * &self.m * u.adjoint())),
        }
    }
}

/// An ordered list of effects summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    effects: Vec<Effect>,
}

impl Povm {
    pub fn new(effects: Vec<Effect>) -> Result<Self> {
        let first = effects.first().ok_or(Error::EmptyInput)?;
        let d = first.dim();
        let mut sum = CMatrix::zeros(d, d);
        for e in &effects {
            if e.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: e.dim(),
                });
            }
            sum += e.matrix();
        }
        let deviation = max_abs_entry(&(sum - identity(d)));
        if deviation > POVM_TOL {
            return Err(Error::NotAPovm { deviation });
        }
        Ok(Self { effects })
    }

    /// Projective measurement onto the columns of a unitary.
    pub fn from_basis(unitary: &CMatrix) -> Result<Self> {
        let effects = unitary
            .column_iter()
            .map(|c| Effect::projector(&c.into_owned()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(effects)
    }

    pub fn computational(d: usize) -> Self {
        Self::from_basis(&identity(d)).expect("identity is unitary")
    }

    /// Two-outcome measurement of σ_x, σ_y or σ_z (axis 0, 1, 2); the first
    /// effect is the +1 outcome.
    pub fn pauli_axis(axis: usize) -> Self {
        let s = pauli(axis);
        let plus = (identity(2) + &s).scale(0.5);
        let minus = (identity(2) - &s).scale(0.5);
        Self {
            effects: vec![Effect { m: plus }, Effect { m: minus }],
        }
    }

    pub fn dim(&self) -> usize {
        self.effects[0].dim()
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn effects(&self) -> &[Effect] {
        &self.effects
    }

    pub fn into_effects(self) -> Vec<Effect> {
        self.effects
    }
}

/// Qubit Bloch vector. Only `|b| ≤ 1` converts to a state.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize, serde::Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn components(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn to_state(&self) -> Result<DensityMatrix> {
        from_bloch(*self)
    }
}

/// `ρ = (I + b·σ)/2`.
pub fn from_bloch(b: BlochVector) -> Result<DensityMatrix> {
    let norm = b.norm();
    if norm > 1.0 + 1e-12 {
        return Err(Error::OutsideBlochBall { norm });
    }
    Ok(DensityMatrix::from_trusted(bloch_matrix(b)))
}

/// `(I + b·σ)/2` for any real vector, without the ball check.
pub(crate) fn bloch_matrix(b: BlochVector) -> CMatrix {
    let half = 0.5;
    CMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(half * (1.0 + b.z), 0.0),
            C64::new(half * b.x, -half * b.y),
            C64::new(half * b.x, half * b.y),
            C64::new(half * (1.0 - b.z), 0.0),
        ],
    )
}

pub fn to_bloch(rho: &DensityMatrix) -> Result<BlochVector> {
    bloch_of_matrix(rho.matrix())
}

/// Bloch coordinates `b_a = Tr[σ_a m]` of any 2x2 matrix.
pub(crate) fn bloch_of_matrix(m: &CMatrix) -> Result<BlochVector> {
    if m.nrows() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: m.nrows(),
        });
    }
    Ok(BlochVector {
        x: 2.0 * m[(1, 0)].re,
        y: 2.0 * m[(1, 0)].im,
        z: (m[(0, 0)] - m[(1, 1)]).re,
    })
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// `Tr[ρ E]`, snapped onto `[0, 1]` when within 1e-12 of either end.
pub fn born_probability(rho: &DensityMatrix, e: &Effect) -> Result<f64> {
    check_dim(rho.dim(), e.dim())?;
    let p = crate::linalg::trace_product_re(rho.matrix(), e.matrix());
    Ok(if p < 0.0 && p > -1e-12 {
        0.0
    } else if p > 1.0 && p < 1.0 + 1e-12 {
        1.0
    } else {
        p
    })
}

pub fn probabilities(rho: &DensityMatrix, m: &Povm) -> Result<Vec<f64>> {
    m.effects()
        .iter()
        .map(|e| born_probability(rho, e))
        .collect()
}
