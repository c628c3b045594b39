//! Spectral decompositions and the commutative algebras they generate.

use super::QpError;
use crate::linalg::{self, CMatrix, CVector};

pub const HERMITIAN_TOL: f64 = 1e-10;

/// A = Σ_a a P_a with strictly increasing eigenvalues and a complete
/// orthogonal projection family.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    projections: Vec<CMatrix>,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.projections[0].nrows()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn projections(&self) -> &[CMatrix] {
        &self.projections
    }

    /// Σ_a f(a) P_a.
    pub fn apply(&self, f: impl Fn(f64) -> linalg::C64) -> CMatrix {
        let dim = self.dim();
        self.eigenvalues
            .iter()
            .zip(&self.projections)
            .fold(linalg::zeros(dim), |acc, (&a, p)| acc + p.map(|z| z * f(a)))
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.apply(linalg::cr)
    }

    pub fn into_algebra(self) -> AlgebraSpec {
        AlgebraSpec {
            projections: self.projections,
        }
    }
}

/// Default eigenvalue clustering tolerance: 1e-10 · ||A||.
pub fn default_cluster_tol(a: &CMatrix) -> f64 {
    1e-10 * linalg::norm(a)
}

/// Spectral decomposition of a Hermitian operator. Eigenvalues closer than
/// `cluster_tol` are merged into a single eigenspace (the floating-point
/// surrogate for exact degeneracy).
pub fn spectral_decompose(
    a: &CMatrix,
    cluster_tol: f64,
) -> Result<SpectralDecomposition, QpError> {
    let residual = linalg::hermiticity_residual(a);
    if residual > HERMITIAN_TOL {
        return Err(QpError::NotHermitian {
            residual,
            tol: HERMITIAN_TOL,
        });
    }
    assert!(cluster_tol >= 0.0, "cluster_tol must be nonnegative");
    let (values, u) = linalg::hermitian_eigen(a);
    let dim = a.nrows();

    let mut eigenvalues = Vec::new();
    let mut projections = Vec::new();
    let mut start = 0;
    while start < dim {
        let mut end = start + 1;
        while end < dim && values[end] - values[end - 1] <= cluster_tol {
            end += 1;
        }
        let mut p = linalg::zeros(dim);
        let mut sum = 0.0;
        for k in start..end {
            let v: CVector = u.column(k).into();
            p += linalg::outer(&v, &v);
            sum += values[k];
        }
        eigenvalues.push(sum / (end - start) as f64);
        projections.push(p);
        start = end;
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        projections,
    })
}

/// A commutative subalgebra presented by a complete orthogonal projection
/// family {P_a}; the algebra is span{P_a}.
#[derive(Debug, Clone)]
pub struct AlgebraSpec {
    projections: Vec<CMatrix>,
}

pub const ALGEBRA_TOL: f64 = 1e-10;

impl AlgebraSpec {
    /// Validates completeness (Σ P_a = 1), pairwise orthogonality and that
    /// each member is an orthogonal projection, all within `ALGEBRA_TOL`.
    pub fn new(projections: Vec<CMatrix>) -> Result<Self, QpError> {
        if projections.is_empty() {
            return Err(QpError::InvalidAlgebra("empty family".into()));
        }
        let dim = projections[0].nrows();
        let mut sum = linalg::zeros(dim);
        for (i, p) in projections.iter().enumerate() {
            if p.nrows() != dim || p.ncols() != dim {
                return Err(QpError::InvalidAlgebra(format!(
                    "projection {i} has wrong shape"
                )));
            }
            let r = linalg::projection_residual(p);
            if r > ALGEBRA_TOL {
                return Err(QpError::InvalidAlgebra(format!(
                    "member {i} is not a projection (residual {r:.3e})"
                )));
            }
            sum += p;
        }
        let completeness = linalg::norm(&(sum - linalg::identity(dim)));
        if completeness > ALGEBRA_TOL {
            return Err(QpError::InvalidAlgebra(format!(
                "family is not complete (residual {completeness:.3e})"
            )));
        }
        for i in 0..projections.len() {
            for j in 0..i {
                let r = linalg::norm(&(&projections[i] * &projections[j]));
                if r > ALGEBRA_TOL {
                    return Err(QpError::InvalidAlgebra(format!(
                        "members {j} and {i} are not orthogonal (residual {r:.3e})"
                    )));
                }
            }
        }
        Ok(AlgebraSpec { projections })
    }

    /// The trivial algebra {1}.
    pub fn trivial(dim: usize) -> Self {
        AlgebraSpec {
            projections: vec![linalg::identity(dim)],
        }
    }

    pub fn dim(&self) -> usize {
        self.projections[0].nrows()
    }

    pub fn projections(&self) -> &[CMatrix] {
        &self.projections
    }

    pub fn len(&self) -> usize {
        self.projections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projections.is_empty()
    }

    /// Σ_a c_a P_a — a generic member of the algebra.
    pub fn member(&self, coefficients: &[linalg::C64]) -> CMatrix {
        assert_eq!(coefficients.len(), self.len());
        let dim = self.dim();
        self.projections
            .iter()
            .zip(coefficients)
            .fold(linalg::zeros(dim), |acc, (p, &c)| acc + p.map(|z| z * c))
    }

    /// Max over a of ||[X, P_a]||.
    pub fn commutation_residual(&self, x: &CMatrix) -> f64 {
        self.projections
            .iter()
            .map(|p| linalg::norm(&linalg::commutator(x, p)))
            .fold(0.0, f64::max)
    }

    /// Hilbert–Schmidt distance from X to span{P_a}. The projections are
    /// HS-orthogonal, so the closest member is Σ_a (tr(P_a X)/tr(P_a)) P_a.
    pub fn span_distance(&self, x: &CMatrix) -> f64 {
        let mut closest = linalg::zeros(self.dim());
        for p in &self.projections {
            let w = (p * x).trace() / p.trace();
            closest += p.map(|z| z * w);
        }
        linalg::norm(&(x - closest))
    }
}
