//! The quantum filter for homodyne measurement of a single emission-
//! absorption channel (S = 1).
//!
//! The unnormalized conditional state |χ_t⟩ obeys the linear Zakai SDE
//!
//!   d|χ⟩ = −(½L†L + iH)|χ⟩ dt + L|χ⟩ dy,
//!
//! driven by the measurement record. Conditional expectations are the ratios
//! E_t(X) = ⟨χ|X|χ⟩ / ⟨χ|χ⟩. Records are simulated in two pictures:
//!
//! - `FilterConsistent`: the innovations dI are drawn as Wiener increments
//!   and the record is dY = E_t(L+L†)dt + dI — the statistics of the
//!   physical output field;
//! - `ReferenceMeasure`: the record itself is drawn as Wiener increments and
//!   the running norm ⟨χ|χ⟩ is the likelihood density of the output measure
//!   with respect to Wiener measure (a martingale of mean one).
//!
//! χ is rescaled to unit norm every step with the squared-norm log
//! accumulated, so likelihood statistics survive long runs in log space.

pub mod nondemolition;

pub use nondemolition::{nondemolition_check, NondemolitionReport};

use crate::linalg::{self, CMatrix, CVector, I, ONE};
use crate::qp::StateVector;
use crate::rng::SplitRng;
use crate::slh::SlhModel;
use crate::stats::{innovations_whiteness, InnovationsReport};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BelavkinError {
    #[error("scattering is not supported by the homodyne filter: ||S - 1|| = {0:.3e}")]
    ScatteringNotSupported(f64),
    #[error("conditional state norm collapsed: ||chi||^2 = {0:.3e}")]
    CollapsedNorm(f64),
    #[error("conditional state norm overflow: ||chi||^2 = {0:.3e} (step size too large?)")]
    NormOverflow(f64),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("invalid arguments: {0}")]
    BadArguments(String),
    #[error("invalid time grid: {0}")]
    InvalidTimeGrid(String),
    #[error("truncation too coarse: error bound {bound:.3e} exceeds tolerance {tol:.3e}")]
    TruncationTooCoarse { bound: f64, tol: f64 },
}

pub const SCATTERING_TOL: f64 = 1e-12;
pub const EPS_NORM: f64 = 1e-300;
pub const NORM_OVERFLOW: f64 = 1e100;

/// Unnormalized conditional state |χ⟩.
#[derive(Debug, Clone)]
pub struct UnnormalizedState {
    chi: CVector,
}

impl UnnormalizedState {
    pub fn new(chi: CVector) -> Result<Self, BelavkinError> {
        let nsq = chi.norm_squared();
        if !(nsq > 0.0) || !nsq.is_finite() {
            return Err(BelavkinError::CollapsedNorm(nsq));
        }
        Ok(UnnormalizedState { chi })
    }

    pub fn from_state_vector(psi: &StateVector) -> Self {
        UnnormalizedState {
            chi: psi.amplitudes().clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.chi.len()
    }

    pub fn chi(&self) -> &CVector {
        &self.chi
    }

    pub fn norm_squared(&self) -> f64 {
        self.chi.norm_squared()
    }

    /// Rescale to unit norm, returning ln ||χ||² (squared-norm convention)
    /// for the caller's log-likelihood accumulator.
    pub fn renormalize(&mut self) -> Result<f64, BelavkinError> {
        let nsq = self.chi.norm_squared();
        if nsq < EPS_NORM || !nsq.is_finite() {
            return Err(BelavkinError::CollapsedNorm(nsq));
        }
        self.chi.unscale_mut(nsq.sqrt());
        Ok(nsq.ln())
    }
}

/// Precomputed Euler-Maruyama stepper for the Zakai equation.
#[derive(Debug, Clone)]
pub struct ZakaiPropagator {
    /// K = −(½L†L + iH).
    drift: CMatrix,
    l: CMatrix,
    /// L + L†, the homodyne observable coupling.
    l_plus_ldag: CMatrix,
}

impl ZakaiPropagator {
    pub fn new(model: &SlhModel) -> Result<Self, BelavkinError> {
        let scattering = model.scattering_residual();
        if scattering > SCATTERING_TOL {
            return Err(BelavkinError::ScatteringNotSupported(scattering));
        }
        let l = model.l().clone();
        let ldag = l.adjoint();
        let drift = (&ldag * &l).scale(0.5).map(|z| -z) - model.h().map(|z| z * I);
        let l_plus_ldag = &l + ldag;
        Ok(ZakaiPropagator {
            drift,
            l,
            l_plus_ldag,
        })
    }

    pub fn dim(&self) -> usize {
        self.drift.nrows()
    }

    pub fn l_plus_ldag(&self) -> &CMatrix {
        &self.l_plus_ldag
    }

    /// χ ← χ + K χ dt + L χ dy.
    pub fn step(&self, chi: &mut CVector, dy: f64, dt: f64) {
        let mut out = chi.clone();
        out.gemv(linalg::cr(dt), &self.drift, chi, ONE);
        out.gemv(linalg::cr(dy), &self.l, chi, ONE);
        *chi = out;
    }
}

/// One Euler-Maruyama step of the Zakai equation.
pub fn zakai_step(
    chi: &UnnormalizedState,
    dy: f64,
    model: &SlhModel,
    dt: f64,
) -> Result<UnnormalizedState, BelavkinError> {
    if dt <= 0.0 {
        return Err(BelavkinError::BadArguments(format!("dt = {dt}")));
    }
    if chi.dim() != model.dim() {
        return Err(BelavkinError::DimensionMismatch(chi.dim(), model.dim()));
    }
    let prop = ZakaiPropagator::new(model)?;
    let mut v = chi.chi().clone();
    prop.step(&mut v, dy, dt);
    Ok(UnnormalizedState { chi: v })
}

/// E_t(X) = ⟨χ|X|χ⟩ / ⟨χ|χ⟩ (real part; X is assumed hermitian).
pub fn filter_expectation(chi: &UnnormalizedState, x: &CMatrix) -> Result<f64, BelavkinError> {
    if x.nrows() != chi.dim() {
        return Err(BelavkinError::DimensionMismatch(x.nrows(), chi.dim()));
    }
    let nsq = chi.norm_squared();
    if nsq < EPS_NORM {
        return Err(BelavkinError::CollapsedNorm(nsq));
    }
    Ok(expectation_ratio(chi.chi(), x, nsq))
}

fn expectation_ratio(chi: &CVector, x: &CMatrix, nsq: f64) -> f64 {
    let num = (chi.adjoint() * x * chi)[(0, 0)];
    num.re / nsq
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryMode {
    FilterConsistent,
    ReferenceMeasure,
}

/// Time-gridded record of one measurement trajectory.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    /// Measurement increments dY over each step.
    pub dy: Vec<f64>,
    /// Innovations dI = dY − E_t(L+L†)dt (the raw Wiener draws in
    /// `FilterConsistent` mode, exactly by construction).
    pub innovations: Vec<f64>,
    /// Accumulated ln⟨χ_t|χ_t⟩ of the unrescaled evolution; in
    /// `ReferenceMeasure` mode this is the log likelihood of the record.
    pub log_norms: Vec<f64>,
    /// Filter expectations per observable, one value per grid point.
    pub expectations: Vec<(String, Vec<f64>)>,
    pub seed: u64,
    pub stream: u64,
    pub mode: TrajectoryMode,
}

impl TrajectoryRecord {
    pub fn steps(&self) -> usize {
        self.dy.len()
    }

    pub fn expectation_series(&self, name: &str) -> Option<&[f64]> {
        self.expectations
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    /// ⟨χ_T|χ_T⟩ of the unrescaled evolution at the final time.
    pub fn final_norm(&self) -> f64 {
        self.log_norms.last().copied().unwrap_or(0.0).exp()
    }
}

fn step_count(t_final: f64, dt: f64) -> Result<usize, BelavkinError> {
    if dt <= 0.0 || t_final <= 0.0 {
        return Err(BelavkinError::BadArguments(format!(
            "dt = {dt}, t_final = {t_final}"
        )));
    }
    let steps_f = t_final / dt;
    let steps = steps_f.round() as usize;
    if (steps_f - steps as f64).abs() > 1e-9 || steps == 0 {
        return Err(BelavkinError::BadArguments(format!(
            "t_final = {t_final} is not a multiple of dt = {dt}"
        )));
    }
    Ok(steps)
}

/// Simulate one trajectory of the filter. The noise stream is
/// `SplitRng::new(seed).stream(stream)`, so identical (seed, stream, config)
/// reproduce the record bit for bit.
#[allow(clippy::too_many_arguments)]
pub fn simulate_trajectory(
    model: &SlhModel,
    psi0: &StateVector,
    observables: &[(String, CMatrix)],
    t_final: f64,
    dt: f64,
    seed: u64,
    stream: u64,
    mode: TrajectoryMode,
) -> Result<TrajectoryRecord, BelavkinError> {
    let prop = ZakaiPropagator::new(model)?;
    if psi0.dim() != prop.dim() {
        return Err(BelavkinError::DimensionMismatch(psi0.dim(), prop.dim()));
    }
    for (_, x) in observables {
        if x.nrows() != prop.dim() {
            return Err(BelavkinError::DimensionMismatch(x.nrows(), prop.dim()));
        }
    }
    let steps = step_count(t_final, dt)?;
    let mut rng = SplitRng::new(seed).stream(stream);

    let mut chi = psi0.amplitudes().clone();
    let mut log_acc = 0.0;
    let mut times = Vec::with_capacity(steps + 1);
    let mut dy_rec = Vec::with_capacity(steps);
    let mut di_rec = Vec::with_capacity(steps);
    let mut log_norms = Vec::with_capacity(steps + 1);
    let mut series: Vec<Vec<f64>> = vec![Vec::with_capacity(steps + 1); observables.len()];

    let record_expectations =
        |chi: &CVector, series: &mut Vec<Vec<f64>>| {
            let nsq = chi.norm_squared();
            for ((_, x), out) in observables.iter().zip(series.iter_mut()) {
                out.push(expectation_ratio(chi, x, nsq));
            }
        };

    times.push(0.0);
    log_norms.push(0.0);
    record_expectations(&chi, &mut series);

    for k in 0..steps {
        let h = expectation_ratio(&chi, prop.l_plus_ldag(), chi.norm_squared());
        let (dy, di) = match mode {
            TrajectoryMode::FilterConsistent => {
                let di = rng.wiener_increment(dt);
                (h * dt + di, di)
            }
            TrajectoryMode::ReferenceMeasure => {
                let dy = rng.wiener_increment(dt);
                (dy, dy - h * dt)
            }
        };
        prop.step(&mut chi, dy, dt);
        let nsq = chi.norm_squared();
        if nsq > NORM_OVERFLOW {
            return Err(BelavkinError::NormOverflow(nsq));
        }
        if nsq < EPS_NORM || !nsq.is_finite() {
            return Err(BelavkinError::CollapsedNorm(nsq));
        }
        log_acc += nsq.ln();
        chi.unscale_mut(nsq.sqrt());

        times.push((k + 1) as f64 * dt);
        dy_rec.push(dy);
        di_rec.push(di);
        log_norms.push(log_acc);
        record_expectations(&chi, &mut series);
    }

    Ok(TrajectoryRecord {
        times,
        dy: dy_rec,
        innovations: di_rec,
        log_norms,
        expectations: observables
            .iter()
            .map(|(n, _)| n.clone())
            .zip(series)
            .collect(),
        seed,
        stream,
        mode,
    })
}

/// Simulate `n_trajectories` independent trajectories (streams 0..n) in
/// parallel; the returned order is by stream index, so results are
/// scheduling-independent.
#[allow(clippy::too_many_arguments)]
pub fn simulate_ensemble(
    model: &SlhModel,
    psi0: &StateVector,
    observables: &[(String, CMatrix)],
    t_final: f64,
    dt: f64,
    seed: u64,
    n_trajectories: usize,
    mode: TrajectoryMode,
) -> Result<Vec<TrajectoryRecord>, BelavkinError> {
    (0..n_trajectories as u64)
        .into_par_iter()
        .map(|stream| {
            simulate_trajectory(model, psi0, observables, t_final, dt, seed, stream, mode)
        })
        .collect()
}

/// Per-time mean and standard error of each observable over an ensemble.
#[derive(Debug, Clone)]
pub struct EnsembleSummary {
    pub times: Vec<f64>,
    /// (name, means, standard errors), each of grid length.
    pub observables: Vec<(String, Vec<f64>, Vec<f64>)>,
}

pub fn ensemble_summary(records: &[TrajectoryRecord]) -> EnsembleSummary {
    assert!(!records.is_empty());
    let times = records[0].times.clone();
    let n = records.len() as f64;
    let mut observables = Vec::new();
    for (idx, (name, _)) in records[0].expectations.iter().enumerate() {
        let mut means = vec![0.0; times.len()];
        let mut ses = vec![0.0; times.len()];
        for rec in records {
            for (t, v) in rec.expectations[idx].1.iter().enumerate() {
                means[t] += v;
            }
        }
        for m in means.iter_mut() {
            *m /= n;
        }
        if records.len() > 1 {
            for rec in records {
                for (t, v) in rec.expectations[idx].1.iter().enumerate() {
                    ses[t] += (v - means[t]).powi(2);
                }
            }
            for s in ses.iter_mut() {
                *s = (*s / (n - 1.0) / n).sqrt();
            }
        }
        observables.push((name.clone(), means, ses));
    }
    EnsembleSummary { times, observables }
}

/// Whiteness diagnostics of a single record's innovations.
pub fn innovations_diagnostics(rec: &TrajectoryRecord, max_lag: usize) -> InnovationsReport {
    let dt = rec.times[1] - rec.times[0];
    innovations_whiteness(&[rec.innovations.as_slice()], dt, max_lag)
}

/// Pooled whiteness diagnostics over an ensemble.
pub fn innovations_diagnostics_pooled(
    records: &[TrajectoryRecord],
    max_lag: usize,
) -> InnovationsReport {
    let dt = records[0].times[1] - records[0].times[0];
    let seqs: Vec<&[f64]> = records.iter().map(|r| r.innovations.as_slice()).collect();
    innovations_whiteness(&seqs, dt, max_lag)
}

/// Normalized filter in conditional-density form: carries the conditional
/// density ρ̂ and advances every expectation E_t(X) = tr(ρ̂X) by one Euler
/// step of
///
///   dE_t(X) = E_t(LX)dt + {E_t(XL + L†X) − E_t(X)E_t(L+L†)} dI,
///   dI = dY − E_t(L+L†)dt,
///
/// equivalently dρ̂ = L*ρ̂ dt + (Lρ̂ + ρ̂L† − E_t(L+L†)ρ̂) dI. X = 1 is a
/// fixed point identically: the drift is traceless and the gain vanishes.
#[derive(Debug, Clone)]
pub struct ExpectationFilter {
    model: SlhModel,
    l_plus_ldag: CMatrix,
    rho: CMatrix,
}

impl ExpectationFilter {
    pub fn new(model: &SlhModel, psi0: &StateVector) -> Result<Self, BelavkinError> {
        let scattering = model.scattering_residual();
        if scattering > SCATTERING_TOL {
            return Err(BelavkinError::ScatteringNotSupported(scattering));
        }
        if psi0.dim() != model.dim() {
            return Err(BelavkinError::DimensionMismatch(psi0.dim(), model.dim()));
        }
        let l_plus_ldag = model.l() + model.l().adjoint();
        Ok(ExpectationFilter {
            model: model.clone(),
            l_plus_ldag,
            rho: linalg::outer(psi0.amplitudes(), psi0.amplitudes()),
        })
    }

    pub fn rho(&self) -> &CMatrix {
        &self.rho
    }

    pub fn expectation(&self, x: &CMatrix) -> f64 {
        linalg::expect(&self.rho, x).re
    }

    /// Current E_t(X) for a named observable list.
    pub fn expectations(&self, observables: &[(String, CMatrix)]) -> Vec<(String, f64)> {
        observables
            .iter()
            .map(|(name, x)| (name.clone(), self.expectation(x)))
            .collect()
    }

    /// Advance by one Euler step against the record increment dy; returns the
    /// innovation increment.
    pub fn step(&mut self, dy: f64, dt: f64) -> Result<f64, BelavkinError> {
        let h = linalg::expect(&self.rho, &self.l_plus_ldag).re;
        let di = dy - h * dt;
        let drift = crate::slh::adjoint_generator(&self.model, &self.rho)
            .map_err(|e| BelavkinError::BadArguments(e.to_string()))?;
        let l = self.model.l();
        let gain = l * &self.rho + &self.rho * l.adjoint() - self.rho.scale(h);
        self.rho += drift.scale(dt) + gain.scale(di);
        Ok(di)
    }
}
