//! Dense complex matrix helpers built on `nalgebra`.
//!
//! Everything downstream works with spectral data of Hermitian matrices, so
//! the central piece here is [`eig_hermitian`], which returns eigenvalues in
//! descending order together with a unitary matrix of eigenvectors.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Relative tolerance used when checking that an input to [`eig_hermitian`]
/// is Hermitian.
const HERMITIAN_REL_TOL: f64 = 1e-10;

/// Eigendecomposition `m = V diag(values) V†` of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Eigenvalues, sorted descending.
    pub values: DVector<f64>,
    /// Columns are the orthonormal eigenvectors matching `values`.
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn max_value(&self) -> f64 {
        self.values[0]
    }

    pub fn min_value(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// `V f(Λ) V†`.
    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> CMatrix {
        let d = self.dim();
        let mut scaled = self.vectors.clone();
        for k in 0..d {
            let s = f(self.values[k]);
            scaled.column_mut(k).scale_mut(s);
        }
        hermitize(&(scaled * self.vectors.adjoint()))
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.map(|x| x)
    }

    /// Projector onto the eigenvector in column `k`.
    pub fn projector(&self, k: usize) -> CMatrix {
        let v = self.vectors.column(k);
        v * v.adjoint()
    }
}

/// Hermitian eigendecomposition with eigenvalues sorted descending.
pub fn eig_hermitian(m: &CMatrix) -> Result<HermitianEigen> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    let dev = hermitian_deviation(m);
    let scale = max_abs_entry(m).max(1.0);
    if dev > HERMITIAN_REL_TOL * scale {
        return Err(Error::NotHermitian { deviation: dev });
    }
    eig_hermitized(&hermitize(m))
}

/// Eigendecomposition of a matrix already known to be Hermitian.
pub(crate) fn eig_hermitized(m: &CMatrix) -> Result<HermitianEigen> {
    let d = m.nrows();
    if d == 2 {
        return Ok(eig_2x2(m));
    }
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, 0).ok_or(Error::EigenFailed)?;
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = DVector::from_iterator(d, order.iter().map(|&k| eig.eigenvalues[k]));
    let mut vectors = CMatrix::zeros(d, d);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(HermitianEigen { values, vectors })
}

/// Closed-form decomposition for 2x2 Hermitian matrices. The eigenvector
/// is taken from whichever column of `m - λ₂ I` has the larger norm.
fn eig_2x2(m: &CMatrix) -> HermitianEigen {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b = m[(0, 1)];
    let half_sum = 0.5 * (a + d);
    let half_diff = 0.5 * (a - d);
    let radius = half_diff.hypot(b.norm());
    let l1 = half_sum + radius;
    let l2 = half_sum - radius;
    let mut vectors = CMatrix::identity(2, 2);
    if radius > 0.0 {
        // Columns of (m - l2 I) span the top eigenvector.
        let c0 = (C64::new(a - l2, 0.0), m[(1, 0)]);
        let c1 = (b, C64::new(d - l2, 0.0));
        let n0 = c0.0.norm_sqr() + c0.1.norm_sqr();
        let n1 = c1.0.norm_sqr() + c1.1.norm_sqr();
        let (u0, u1, n) = if n0 >= n1 {
            (c0.0, c0.1, n0.sqrt())
        } else {
            (c1.0, c1.1, n1.sqrt())
        };
        let (u0, u1) = (u0 / n, u1 / n);
        // Orthogonal complement: (-conj(u1), conj(u0)).
        vectors[(0, 0)] = u0;
        vectors[(1, 0)] = u1;
        vectors[(0, 1)] = -u1.conj();
        vectors[(1, 1)] = u0.conj();
    }
    HermitianEigen {
        values: DVector::from_vec(vec![l1, l2]),
        vectors,
    }
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

pub fn max_abs_entry(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let mut dev = 0.0_f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// `(m + m†) / 2`.
pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn frobenius_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn trace_re(m: &CMatrix) -> f64 {
    m.diagonal().iter().map(|z| z.re).sum()
}

/// `Re Tr[a b]`, computed without forming the product.
pub fn trace_product_re(a: &CMatrix, b: &CMatrix) -> f64 {
    let d = a.nrows();
    let mut acc = 0.0;
    for i in 0..d {
        for j in 0..d {
            let x = a[(i, j)] * b[(j, i)];
            acc += x.re;
        }
    }
    acc
}

/// Pauli matrices in the order x, y, z.
pub fn pauli(axis: usize) -> CMatrix {
    let z = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    match axis {
        0 => CMatrix::from_row_slice(2, 2, &[z, one, one, z]),
        1 => CMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        2 => CMatrix::from_row_slice(2, 2, &[one, z, z, -one]),
        _ => panic!("pauli axis must be 0, 1 or 2"),
    }
}

/// Orthonormal basis (under `Tr[A B]`) of traceless Hermitian d×d matrices:
/// generalized Gell-Mann matrices scaled by `1/√2`.
pub fn traceless_hermitian_basis(d: usize) -> Vec<CMatrix> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut basis = Vec::with_capacity(d * d - 1);
    for j in 0..d {
        for k in (j + 1)..d {
            let mut sym = CMatrix::zeros(d, d);
            sym[(j, k)] = C64::new(s, 0.0);
            sym[(k, j)] = C64::new(s, 0.0);
            basis.push(sym);
            let mut anti = CMatrix::zeros(d, d);
            anti[(j, k)] = C64::new(0.0, -s);
            anti[(k, j)] = C64::new(0.0, s);
            basis.push(anti);
        }
    }
    for l in 1..d {
        let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
        let mut diag = CMatrix::zeros(d, d);
        for m in 0..l {
            diag[(m, m)] = C64::new(norm, 0.0);
        }
        diag[(l, l)] = C64::new(-(l as f64) * norm, 0.0);
        basis.push(diag);
    }
    basis
}
