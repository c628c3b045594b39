//! Deterministic Lindblad master-equation propagator, dρ/dt = L*ρ.
//!
//! Fixed-step classical fourth-order (RK4) integration; at the dimensions in
//! play accuracy and reproducibility matter more than speed, so there is no
//! adaptivity. Trace, hermiticity and positivity are monitored along the
//! trajectory and violations fail the run loudly rather than being silently
//! repaired.

use crate::linalg::{self, CMatrix};
use crate::slh::{adjoint_generator, SlhModel};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MasterEqError {
    #[error("step too large: trace drift {drift:.3e} at t = {t} exceeds 1e-6")]
    StepTooLarge { t: f64, drift: f64 },
    #[error("positivity violated: smallest eigenvalue {min_eig:.3e} at t = {t}")]
    PositivityViolated { t: f64, min_eig: f64 },
    #[error("invalid arguments: {0}")]
    BadArguments(String),
    #[error(transparent)]
    Slh(#[from] crate::slh::SlhError),
    #[error("observable is not hermitian (residual {0:.3e})")]
    NonHermitianObservable(f64),
}

pub const TRACE_DRIFT_LIMIT: f64 = 1e-6;
pub const POSITIVITY_FLOOR: f64 = -1e-8;

#[derive(Debug, Clone)]
pub struct MasterEqSolution {
    pub times: Vec<f64>,
    pub states: Vec<CMatrix>,
}

/// Integrate dρ/dt = L*ρ from ρ₀ over [0, t_final] with fixed step dt.
/// The grid is t_k = k·dt with n = round(t_final/dt) steps; t_final must sit
/// on the grid to within 1e-9·dt.
pub fn propagate(
    model: &SlhModel,
    rho0: &CMatrix,
    t_final: f64,
    dt: f64,
) -> Result<MasterEqSolution, MasterEqError> {
    if dt <= 0.0 || t_final < 0.0 {
        return Err(MasterEqError::BadArguments(format!(
            "dt = {dt}, t_final = {t_final}"
        )));
    }
    let steps_f = t_final / dt;
    let steps = steps_f.round() as usize;
    if (steps_f - steps as f64).abs() > 1e-9 {
        return Err(MasterEqError::BadArguments(format!(
            "t_final = {t_final} is not a multiple of dt = {dt}"
        )));
    }
    let mut rho = rho0.clone();
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    times.push(0.0);
    states.push(rho.clone());
    for k in 0..steps {
        let t = k as f64 * dt;
        let k1 = adjoint_generator(model, &rho)?;
        let k2 = adjoint_generator(model, &(&rho + k1.scale(dt / 2.0)))?;
        let k3 = adjoint_generator(model, &(&rho + k2.scale(dt / 2.0)))?;
        let k4 = adjoint_generator(model, &(&rho + k3.scale(dt)))?;
        rho += (k1 + k2.scale(2.0) + k3.scale(2.0) + k4).scale(dt / 6.0);
        let t_next = (k + 1) as f64 * dt;
        let drift = (rho.trace().re - 1.0).abs() + rho.trace().im.abs();
        if drift > TRACE_DRIFT_LIMIT {
            return Err(MasterEqError::StepTooLarge { t: t_next, drift });
        }
        let min_eig = linalg::min_eigenvalue(&rho);
        if min_eig < POSITIVITY_FLOOR {
            return Err(MasterEqError::PositivityViolated {
                t: t_next,
                min_eig,
            });
        }
        let _ = t;
        times.push(t_next);
        states.push(rho.clone());
    }
    Ok(MasterEqSolution { times, states })
}

/// tr(ρ_t X) along the solution for a hermitian observable. The imaginary
/// residue is checked (≤ 1e-10) and discarded.
pub fn expectation_curve(
    sol: &MasterEqSolution,
    x: &CMatrix,
) -> Result<Vec<(f64, f64)>, MasterEqError> {
    let herm = linalg::hermiticity_residual(x);
    if herm > 1e-10 {
        return Err(MasterEqError::NonHermitianObservable(herm));
    }
    let mut out = Vec::with_capacity(sol.times.len());
    for (t, rho) in sol.times.iter().zip(&sol.states) {
        let v = linalg::expect(rho, x);
        if v.im.abs() > 1e-10 {
            return Err(MasterEqError::NonHermitianObservable(v.im.abs()));
        }
        out.push((*t, v.re));
    }
    Ok(out)
}
