//! Dense complex linear algebra helpers shared by every module.
//!
//! All operators live on small finite-dimensional Hilbert spaces (dims of a
//! few to a few hundred), so everything is dense `DMatrix<Complex64>`.
//! Matrix norms throughout the crate are Frobenius norms.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const I: C64 = C64::new(0.0, 1.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const ZERO: C64 = C64::new(0.0, 0.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn zeros(dim: usize) -> CMatrix {
    CMatrix::zeros(dim, dim)
}

/// Hermitian adjoint A†.
pub fn dagger(a: &CMatrix) -> CMatrix {
    a.adjoint()
}

/// Commutator [A, B] = AB - BA.
pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Anticommutator {A, B} = AB + BA.
pub fn anticommutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b + b * a
}

pub fn trace(a: &CMatrix) -> C64 {
    a.trace()
}

/// Frobenius norm.
pub fn norm(a: &CMatrix) -> f64 {
    a.norm()
}

pub fn hermiticity_residual(a: &CMatrix) -> f64 {
    norm(&(a - a.adjoint()))
}

pub fn unitarity_residual(a: &CMatrix) -> f64 {
    let d = a.nrows();
    norm(&(a.adjoint() * a - identity(d)))
}

pub fn projection_residual(p: &CMatrix) -> f64 {
    (norm(&(p * p - p)).powi(2) + hermiticity_residual(p).powi(2)).sqrt()
}

pub fn is_hermitian(a: &CMatrix, tol: f64) -> bool {
    hermiticity_residual(a) <= tol
}

pub fn is_unitary(a: &CMatrix, tol: f64) -> bool {
    unitarity_residual(a) <= tol
}

pub fn is_projection(p: &CMatrix, tol: f64) -> bool {
    projection_residual(p) <= tol
}

/// Kronecker product A ⊗ B.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// ⟨X⟩ = tr(ρX).
pub fn expect(rho: &CMatrix, x: &CMatrix) -> C64 {
    (rho * x).trace()
}

pub fn basis_state(dim: usize, k: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    v[k] = ONE;
    v
}

/// |u⟩⟨v|.
pub fn outer(u: &CVector, v: &CVector) -> CMatrix {
    u * v.adjoint()
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

/// Lowering operator |0⟩⟨1| (basis convention: |0⟩ ground, |1⟩ excited).
pub fn sigma_minus() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO])
}

/// Raising operator |1⟩⟨0|.
pub fn sigma_plus() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ZERO, ONE, ZERO])
}

/// Number operator σ₊σ₋ = |1⟩⟨1|.
pub fn number_op() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ZERO, ZERO, ONE])
}

/// Eigendecomposition of a Hermitian matrix: ascending eigenvalues and the
/// unitary whose columns are the corresponding eigenvectors.
///
/// The input is symmetrized as (A + A†)/2 before factoring; callers enforce
/// hermiticity tolerances themselves.
pub fn hermitian_eigen(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let sym = (a + a.adjoint()).scale(0.5);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
    let dim = a.nrows();
    let mut vectors = CMatrix::zeros(dim, dim);
    let mut values = Vec::with_capacity(dim);
    for (col, &idx) in order.iter().enumerate() {
        values.push(eig.eigenvalues[idx]);
        vectors.set_column(col, &eig.eigenvectors.column(idx));
    }
    (values, vectors)
}

/// f(A) for Hermitian A, via eigendecomposition: f(A) = U f(Λ) U†.
pub fn hermitian_function(a: &CMatrix, f: impl Fn(f64) -> C64) -> CMatrix {
    let (values, u) = hermitian_eigen(a);
    let d = CMatrix::from_diagonal(&CVector::from_iterator(
        values.len(),
        values.iter().map(|&v| f(v)),
    ));
    &u * d * u.adjoint()
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(a: &CMatrix) -> f64 {
    let (values, _) = hermitian_eigen(a);
    values[0]
}

/// Unitary exp(G) of an anti-Hermitian generator G, computed by
/// diagonalizing the Hermitian matrix iG.
pub fn antihermitian_exp(g: &CMatrix) -> CMatrix {
    let h = g.map(|z| z * I); // iG is Hermitian when G is anti-Hermitian
    hermitian_function(&h, |lambda| (-I * lambda).exp())
}

/// JSON-friendly matrix encoding: nested row-major arrays of the real and
/// imaginary parts. Round trips are bit exact at full double precision
/// (all entries must be finite).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MatrixJson {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

#[derive(Debug, thiserror::Error)]
pub enum MatrixCodecError {
    #[error("matrix entry at ({0}, {1}) is not finite")]
    NonFinite(usize, usize),
    #[error("ragged or mismatched re/im arrays")]
    BadShape,
}

impl MatrixJson {
    pub fn encode(m: &CMatrix) -> Result<Self, MatrixCodecError> {
        let (rows, cols) = m.shape();
        let mut re = vec![vec![0.0; cols]; rows];
        let mut im = vec![vec![0.0; cols]; rows];
        for r in 0..rows {
            for cidx in 0..cols {
                let z = m[(r, cidx)];
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(MatrixCodecError::NonFinite(r, cidx));
                }
                re[r][cidx] = z.re;
                im[r][cidx] = z.im;
            }
        }
        Ok(MatrixJson { re, im })
    }

    pub fn decode(&self) -> Result<CMatrix, MatrixCodecError> {
        let rows = self.re.len();
        if rows == 0 || self.im.len() != rows {
            return Err(MatrixCodecError::BadShape);
        }
        let cols = self.re[0].len();
        if cols == 0 {
            return Err(MatrixCodecError::BadShape);
        }
        let mut m = CMatrix::zeros(rows, cols);
        for r in 0..rows {
            if self.re[r].len() != cols || self.im[r].len() != cols {
                return Err(MatrixCodecError::BadShape);
            }
            for cidx in 0..cols {
                m[(r, cidx)] = C64::new(self.re[r][cidx], self.im[r][cidx]);
            }
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_algebra() {
        let x = pauli_x();
        let z = pauli_z();
        let y = pauli_y();
        // XZ = -iY
        assert!(norm(&(&x * &z - y.map(|v| v * (-I)))) < 1e-15);
        assert!(is_hermitian(&x, 1e-15) && is_unitary(&x, 1e-15));
        assert!(is_projection(&number_op(), 1e-15));
    }

    #[test]
    fn hermitian_eigen_sorted_and_reconstructs() {
        let a = CMatrix::from_row_slice(
            3,
            3,
            &[
                cr(2.0),
                c(0.0, 1.0),
                ZERO,
                c(0.0, -1.0),
                cr(1.0),
                ZERO,
                ZERO,
                ZERO,
                cr(-3.0),
            ],
        );
        let (vals, u) = hermitian_eigen(&a);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        let d = CMatrix::from_diagonal(&CVector::from_iterator(3, vals.iter().map(|&v| cr(v))));
        assert!(norm(&(&u * d * u.adjoint() - a)) < 1e-12);
    }

    #[test]
    fn antihermitian_exp_is_unitary() {
        let h = pauli_y().scale(0.37);
        let g = h.map(|z| z * (-I)); // -iH
        let u = antihermitian_exp(&g);
        assert!(unitarity_residual(&u) < 1e-12);
        // exp(-i θ Y) rotates |0⟩; check against the closed form.
        let theta = 0.37f64;
        let v = &u * basis_state(2, 0);
        assert!((v[0].re - theta.cos()).abs() < 1e-12);
        assert!((v[1].re - theta.sin()).abs() < 1e-12);
    }

    #[test]
    fn matrix_json_roundtrip_bit_exact() {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[c(0.1, -0.2), cr(1.0 / 3.0), c(f64::MIN_POSITIVE, 1e300), ZERO],
        );
        let enc = MatrixJson::encode(&m).unwrap();
        let text = serde_json::to_string(&enc).unwrap();
        let back: MatrixJson = serde_json::from_str(&text).unwrap();
        let m2 = back.decode().unwrap();
        for r in 0..2 {
            for cix in 0..2 {
                assert_eq!(m[(r, cix)].re.to_bits(), m2[(r, cix)].re.to_bits());
                assert_eq!(m[(r, cix)].im.to_bits(), m2[(r, cix)].im.to_bits());
            }
        }
        assert!(MatrixJson::encode(&CMatrix::from_element(1, 1, c(f64::NAN, 0.0))).is_err());
    }
}
