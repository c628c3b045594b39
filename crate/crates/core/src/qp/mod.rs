//! Finite-dimensional quantum probability: states, measurement postulates,
//! conditional expectation onto commutative measurement algebras, covariance
//! identities, and the modular-operator existence criterion.

mod conditional;
mod modular;
mod spectral;

pub use conditional::{
    ce_blockwise, conditional_covariance, conditional_expectation,
    conditional_expectation_unchecked, CeResult, DEFAULT_EPS_PROB,
};
pub use modular::{modular_group, modular_map, takesaki_check, DEFAULT_EPS_FAITHFUL};
pub use spectral::{default_cluster_tol, spectral_decompose, AlgebraSpec, SpectralDecomposition};

use crate::linalg::{self, CMatrix, CVector, C64};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum QpError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("operator is not hermitian (residual {residual:.3e} > tol {tol:.3e})")]
    NotHermitian { residual: f64, tol: f64 },
    #[error("zero-probability outcome: ||P psi||^2 = {p:.3e} <= {eps:.3e}")]
    ZeroProbabilityOutcome { p: f64, eps: f64 },
    #[error("observable does not commute with the conditioning algebra (residual {residual:.3e})")]
    IncompatibleObservable { residual: f64 },
    #[error("every block of the conditioning algebra has probability <= {eps:.3e}")]
    DegenerateBlock { eps: f64 },
    #[error("state is not faithful (smallest eigenvalue {min_eig:.3e})")]
    NonFaithfulState { min_eig: f64 },
    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),
    #[error("invalid projection family: {0}")]
    InvalidAlgebra(String),
    #[error("state vector has zero norm")]
    ZeroVector,
}

/// Normalized pure state.
#[derive(Debug, Clone)]
pub struct StateVector {
    amplitudes: CVector,
}

impl StateVector {
    /// Normalizes the input; errors on the zero vector.
    pub fn new(amplitudes: CVector) -> Result<Self, QpError> {
        let n = amplitudes.norm();
        if n <= 0.0 || !n.is_finite() {
            return Err(QpError::ZeroVector);
        }
        Ok(StateVector {
            amplitudes: amplitudes.unscale(n),
        })
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        StateVector {
            amplitudes: linalg::basis_state(dim, k),
        }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn expectation(&self, x: &CMatrix) -> C64 {
        (self.amplitudes.adjoint() * x * &self.amplitudes)[(0, 0)]
    }
}

/// Density matrix: hermitian, unit trace, positive semi-definite
/// (all within the construction tolerance).
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    entries: CMatrix,
}

pub const DENSITY_TOL: f64 = 1e-12;

impl DensityMatrix {
    pub fn new(entries: CMatrix) -> Result<Self, QpError> {
        Self::with_tolerance(entries, DENSITY_TOL)
    }

    pub fn with_tolerance(entries: CMatrix, tol: f64) -> Result<Self, QpError> {
        if entries.nrows() != entries.ncols() {
            return Err(QpError::InvalidDensity("not square".into()));
        }
        let herm = linalg::hermiticity_residual(&entries);
        if herm > tol {
            return Err(QpError::InvalidDensity(format!(
                "hermiticity residual {herm:.3e}"
            )));
        }
        let tr = entries.trace();
        if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return Err(QpError::InvalidDensity(format!("trace {tr}")));
        }
        let min_eig = linalg::min_eigenvalue(&entries);
        if min_eig < -tol {
            return Err(QpError::InvalidDensity(format!(
                "smallest eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(DensityMatrix { entries })
    }

    pub fn from_pure(psi: &StateVector) -> Self {
        DensityMatrix {
            entries: linalg::outer(psi.amplitudes(), psi.amplitudes()),
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix {
            entries: linalg::identity(dim).unscale(dim as f64),
        }
    }

    pub fn from_diagonal(probs: &[f64]) -> Result<Self, QpError> {
        let v = CVector::from_iterator(probs.len(), probs.iter().map(|&p| linalg::cr(p)));
        Self::new(CMatrix::from_diagonal(&v))
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }
}

/// A state on the full matrix algebra: expectations are ⟨X⟩ = tr(ρX).
#[derive(Debug, Clone)]
pub struct QPState {
    rho: DensityMatrix,
}

impl QPState {
    pub fn new(rho: DensityMatrix) -> Self {
        QPState { rho }
    }

    pub fn from_pure(psi: &StateVector) -> Self {
        QPState {
            rho: DensityMatrix::from_pure(psi),
        }
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    pub fn rho(&self) -> &CMatrix {
        self.rho.matrix()
    }

    pub fn expect(&self, x: &CMatrix) -> C64 {
        linalg::expect(self.rho.matrix(), x)
    }
}

fn check_same_dim(a: &CMatrix, b: &CMatrix) -> Result<(), QpError> {
    if a.nrows() != b.nrows() {
        return Err(QpError::DimensionMismatch(a.nrows(), b.nrows()));
    }
    Ok(())
}

/// Born probabilities p_a = ||P_a psi||² for each eigenvalue of the
/// decomposition.
pub fn born_probabilities(
    spec: &SpectralDecomposition,
    psi: &StateVector,
) -> Result<Vec<(f64, f64)>, QpError> {
    if spec.dim() != psi.dim() {
        return Err(QpError::DimensionMismatch(spec.dim(), psi.dim()));
    }
    Ok(spec
        .eigenvalues()
        .iter()
        .zip(spec.projections())
        .map(|(&a, p)| (a, (p * psi.amplitudes()).norm_squared()))
        .collect())
}

pub const DEFAULT_EPS_OUTCOME: f64 = 1e-14;

/// Projection postulate: |psi_a⟩ = P|psi⟩ / ||P|psi⟩||.
pub fn project_postulate(psi: &StateVector, p: &CMatrix) -> Result<StateVector, QpError> {
    project_postulate_with_eps(psi, p, DEFAULT_EPS_OUTCOME)
}

pub fn project_postulate_with_eps(
    psi: &StateVector,
    p: &CMatrix,
    eps_prob: f64,
) -> Result<StateVector, QpError> {
    if p.nrows() != psi.dim() {
        return Err(QpError::DimensionMismatch(p.nrows(), psi.dim()));
    }
    let projected = p * psi.amplitudes();
    let prob = projected.norm_squared();
    if prob <= eps_prob {
        return Err(QpError::ZeroProbabilityOutcome { p: prob, eps: eps_prob });
    }
    StateVector::new(projected)
}

/// Observables are compatible iff they commute: ||[A, B]|| <= tol.
pub fn compatible(a: &CMatrix, b: &CMatrix, tol: f64) -> Result<bool, QpError> {
    check_same_dim(a, b)?;
    Ok(linalg::norm(&linalg::commutator(a, b)) <= tol)
}

/// For orthogonal projections, PQP = QP forces PQ = QP. Returns the
/// implication "||PQP - QP|| <= tol implies ||PQ - QP|| <= tol" evaluated on
/// the given pair (vacuously true when the premise fails).
pub fn check_projection_commute_lemma(p: &CMatrix, q: &CMatrix, tol: f64) -> bool {
    let premise = linalg::norm(&(p * q * p - q * p)) <= tol;
    if !premise {
        return true;
    }
    linalg::norm(&linalg::commutator(p, q)) <= tol
}

/// Cov(X, Y) = ⟨X†Y⟩ − ⟨X⟩*⟨Y⟩.
pub fn covariance(x: &CMatrix, y: &CMatrix, state: &QPState) -> Result<C64, QpError> {
    check_same_dim(x, y)?;
    if x.nrows() != state.dim() {
        return Err(QpError::DimensionMismatch(x.nrows(), state.dim()));
    }
    let xy = state.expect(&(x.adjoint() * y));
    Ok(xy - state.expect(x).conj() * state.expect(y))
}

pub fn variance(x: &CMatrix, state: &QPState) -> Result<C64, QpError> {
    covariance(x, x, state)
}
