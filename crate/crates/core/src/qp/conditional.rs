//! Conditional expectation onto a commutative measurement algebra and the
//! conditional covariance built from it.
//!
//! For an algebra span{P_a} and state ρ, the map is
//!
//!   E[A] = Σ_a  tr(ρ P_a A) / tr(ρ P_a)  ·  P_a,
//!
//! defined on the commutant of {P_a}. On that domain it satisfies linearity,
//! the *-property, conservativity, compatibility, projectivity, peelability
//! and complete positivity for any state; on the full matrix algebra those
//! properties additionally require the algebra to be invariant under the
//! modular group of the state (see `takesaki_check`).

use super::{AlgebraSpec, QPState, QpError};
use crate::linalg::{self, CMatrix};

pub const DEFAULT_EPS_PROB: f64 = 1e-14;

/// Commutation tolerance for the non-demolition precondition.
pub const COMMUTANT_TOL: f64 = 1e-9;

/// Conditional expectation together with the blocks that were dropped
/// because their probability was below the degeneracy threshold.
#[derive(Debug, Clone)]
pub struct CeResult {
    pub operator: CMatrix,
    /// Indices a with tr(ρ P_a) <= eps, excluded from the sum (the classical
    /// conditional expectation is only almost-surely defined).
    pub dropped_blocks: Vec<usize>,
}

/// E[A] for A in the commutant of the conditioning algebra.
pub fn conditional_expectation(
    a: &CMatrix,
    alg: &AlgebraSpec,
    state: &QPState,
) -> Result<CeResult, QpError> {
    if a.nrows() != alg.dim() {
        return Err(QpError::DimensionMismatch(a.nrows(), alg.dim()));
    }
    let residual = alg.commutation_residual(a);
    if residual > COMMUTANT_TOL {
        return Err(QpError::IncompatibleObservable { residual });
    }
    conditional_expectation_unchecked(a, alg, state)
}

/// The block formula without the non-demolition precondition. Outside the
/// commutant the CE axioms are not guaranteed (and generically fail when the
/// state does not commute with the algebra); exposed for the Takesaki
/// negative-case diagnostics.
pub fn conditional_expectation_unchecked(
    a: &CMatrix,
    alg: &AlgebraSpec,
    state: &QPState,
) -> Result<CeResult, QpError> {
    if a.nrows() != state.dim() || alg.dim() != state.dim() {
        return Err(QpError::DimensionMismatch(a.nrows(), state.dim()));
    }
    let mut operator = linalg::zeros(alg.dim());
    let mut dropped = Vec::new();
    let mut retained = 0;
    for (idx, p) in alg.projections().iter().enumerate() {
        let weight = linalg::expect(state.rho(), p).re;
        if weight <= DEFAULT_EPS_PROB {
            dropped.push(idx);
            continue;
        }
        retained += 1;
        let coeff = linalg::expect(state.rho(), &(p * a)) / linalg::cr(weight);
        operator += p.map(|z| z * coeff);
    }
    if retained == 0 {
        return Err(QpError::DegenerateBlock {
            eps: DEFAULT_EPS_PROB,
        });
    }
    Ok(CeResult {
        operator,
        dropped_blocks: dropped,
    })
}

/// Cov_B(X, Y) = E[(X - E[X])† (Y - E[Y])], an operator in the algebra.
/// Equals E[X†Y] − E[X]†E[Y] and is invariant under shifts by algebra
/// members.
pub fn conditional_covariance(
    x: &CMatrix,
    y: &CMatrix,
    alg: &AlgebraSpec,
    state: &QPState,
) -> Result<CMatrix, QpError> {
    let ex = conditional_expectation(x, alg, state)?.operator;
    let ey = conditional_expectation(y, alg, state)?.operator;
    let dx = x - ex;
    let dy = y - ey;
    Ok(conditional_expectation(&(dx.adjoint() * dy), alg, state)?.operator)
}

/// Apply E entrywise to an n×n block matrix (blocks in the commutant),
/// returning the nd×nd result. Complete positivity says PSD inputs map to
/// PSD outputs.
pub fn ce_blockwise(
    blocks: &[Vec<CMatrix>],
    alg: &AlgebraSpec,
    state: &QPState,
) -> Result<CMatrix, QpError> {
    let n = blocks.len();
    let d = alg.dim();
    let mut out = CMatrix::zeros(n * d, n * d);
    for (i, row) in blocks.iter().enumerate() {
        assert_eq!(row.len(), n, "block matrix must be square");
        for (j, block) in row.iter().enumerate() {
            let e = conditional_expectation(block, alg, state)?.operator;
            out.view_mut((i * d, j * d), (d, d)).copy_from(&e);
        }
    }
    Ok(out)
}

#[allow(dead_code)]
fn require_same(a: usize, b: usize) -> Result<(), QpError> {
    if a != b {
        return Err(QpError::DimensionMismatch(a, b));
    }
    Ok(())
}
