//! Classical probability and nonlinear filtering on one-dimensional grids:
//! Bayes updates, Markov transition kernels, signal/observation SDE
//! simulation, Kallianpur-Streibel weighting, and the grid DMZ and
//! Kushner-Stratonovich filters.

mod filter;

pub use filter::{dmz_step, KushnerFilter};

use crate::rng::SplitRng;
use crate::stats::{innovations_whiteness, InnovationsReport};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ClassicalError {
    #[error("variance must be positive, got {0}")]
    NonpositiveVariance(f64),
    #[error("evidence integral {0:.3e} is not positive")]
    ZeroEvidence(f64),
    #[error("CFL violation: dt = {dt:.3e} exceeds {limit:.3e} = 0.5 dx^2 / max sigma^2")]
    CflViolation { dt: f64, limit: f64 },
    #[error("invalid grid: {0}")]
    BadGrid(String),
    #[error("invalid arguments: {0}")]
    BadArguments(String),
    #[error("density is not normalizable (integral {0:.3e})")]
    NotNormalizable(f64),
}

/// Uniform grid on [x_min, x_max] with n points including both endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self, ClassicalError> {
        if !(x_max > x_min) || n < 3 {
            return Err(ClassicalError::BadGrid(format!(
                "[{x_min}, {x_max}] with {n} points"
            )));
        }
        Ok(GridSpec { x_min, x_max, n })
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|i| self.point(i))
    }

    /// Trapezoidal quadrature of samples on this grid.
    pub fn trapezoid(&self, values: &[f64]) -> f64 {
        assert_eq!(values.len(), self.n);
        let interior: f64 = values.iter().sum::<f64>();
        self.dx() * (interior - 0.5 * (values[0] + values[values.len() - 1]))
    }
}

/// Nonnegative density samples on a uniform grid, trapezoid-normalized.
#[derive(Debug, Clone)]
pub struct GridDensity {
    spec: GridSpec,
    values: Vec<f64>,
}

impl GridDensity {
    pub fn new(spec: GridSpec, values: Vec<f64>) -> Result<Self, ClassicalError> {
        if values.len() != spec.n {
            return Err(ClassicalError::BadGrid(format!(
                "{} values on a {}-point grid",
                values.len(),
                spec.n
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(ClassicalError::BadGrid("non-finite density value".into()));
        }
        Ok(GridDensity { spec, values })
    }

    pub fn from_fn(spec: GridSpec, f: impl Fn(f64) -> f64) -> Result<Self, ClassicalError> {
        let values = spec.points().map(f).collect();
        Self::new(spec, values)
    }

    /// Normal density; normalized on the grid afterwards.
    pub fn gaussian(spec: GridSpec, mean: f64, variance: f64) -> Result<Self, ClassicalError> {
        if variance <= 0.0 {
            return Err(ClassicalError::NonpositiveVariance(variance));
        }
        let mut d = Self::from_fn(spec, |x| (-(x - mean).powi(2) / (2.0 * variance)).exp())?;
        d.normalize()?;
        Ok(d)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn mass(&self) -> f64 {
        self.spec.trapezoid(&self.values)
    }

    pub fn normalize(&mut self) -> Result<(), ClassicalError> {
        let mass = self.mass();
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(ClassicalError::NotNormalizable(mass));
        }
        for v in &mut self.values {
            *v /= mass;
        }
        Ok(())
    }

    /// ∫ f(x) ρ(x) dx by trapezoid.
    pub fn expectation(&self, f: impl Fn(f64) -> f64) -> f64 {
        let weighted: Vec<f64> = self
            .spec
            .points()
            .zip(&self.values)
            .map(|(x, &v)| f(x) * v)
            .collect();
        self.spec.trapezoid(&weighted)
    }

    pub fn mean(&self) -> f64 {
        self.expectation(|x| x) / self.mass()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.expectation(|x| (x - m).powi(2)) / self.mass()
    }
}

/// Closed-form Gaussian conditioning for the signal-plus-noise model
/// Y = X + σZ: posterior mean and variance
/// μ₁ = (σ₁²/σ₀²)μ₀ + (σ₁²/σ²)y with 1/σ₁² = 1/σ₀² + 1/σ².
pub fn gaussian_posterior(
    mu0: f64,
    s0sq: f64,
    ssq: f64,
    y: f64,
) -> Result<(f64, f64), ClassicalError> {
    if s0sq <= 0.0 {
        return Err(ClassicalError::NonpositiveVariance(s0sq));
    }
    if ssq <= 0.0 {
        return Err(ClassicalError::NonpositiveVariance(ssq));
    }
    let s1sq = 1.0 / (1.0 / s0sq + 1.0 / ssq);
    let mu1 = s1sq / s0sq * mu0 + s1sq / ssq * y;
    Ok((mu1, s1sq))
}

pub const EPS_EVIDENCE: f64 = 1e-300;

/// Bayes rule on the grid: posterior ∝ λ(y|x)·prior(x).
pub fn bayes_posterior_grid(
    prior: &GridDensity,
    likelihood: impl Fn(f64, f64) -> f64,
    y: f64,
) -> Result<GridDensity, ClassicalError> {
    let values: Vec<f64> = prior
        .spec
        .points()
        .zip(&prior.values)
        .map(|(x, &p)| likelihood(y, x) * p)
        .collect();
    let mut posterior = GridDensity::new(prior.spec, values)?;
    let evidence = posterior.mass();
    if evidence <= EPS_EVIDENCE {
        return Err(ClassicalError::ZeroEvidence(evidence));
    }
    posterior.normalize()?;
    Ok(posterior)
}

/// Max over probed (x, x0) of |∫T(x,t2|x1,t1)T(x1,t1|x0,t0)dx1 − T(x,t2|x0,t0)|.
///
/// The inner integral runs over the full grid; the outer max is probed on
/// the central `probe_fraction` of the grid with the given stride, keeping
/// boundary-truncation artifacts out of the reported residual.
pub fn chapman_kolmogorov_check(
    kernel: impl Fn(f64, f64, f64, f64) -> f64,
    times: (f64, f64, f64),
    grid: &GridSpec,
    probe_stride: usize,
    probe_fraction: f64,
) -> Result<f64, ClassicalError> {
    let (t0, t1, t2) = times;
    if !(t0 < t1 && t1 < t2) {
        return Err(ClassicalError::BadArguments(format!(
            "need t0 < t1 < t2, got {t0}, {t1}, {t2}"
        )));
    }
    if probe_stride == 0 || !(0.0 < probe_fraction && probe_fraction <= 1.0) {
        return Err(ClassicalError::BadArguments(
            "probe_stride must be positive and probe_fraction in (0, 1]".into(),
        ));
    }
    let center = 0.5 * (grid.x_min + grid.x_max);
    let half_span = 0.5 * (grid.x_max - grid.x_min) * probe_fraction;
    let probes: Vec<f64> = (0..grid.n)
        .step_by(probe_stride)
        .map(|i| grid.point(i))
        .filter(|x| (x - center).abs() <= half_span)
        .collect();
    if probes.is_empty() {
        return Err(ClassicalError::BadArguments("no probe points".into()));
    }
    // first-leg kernels, one row per probe x0
    let mut max_residual: f64 = 0.0;
    for &x0 in &probes {
        let first: Vec<f64> = grid.points().map(|x1| kernel(x1, t1, x0, t0)).collect();
        for &x in &probes {
            let integrand: Vec<f64> = grid
                .points()
                .zip(&first)
                .map(|(x1, &f)| kernel(x, t2, x1, t1) * f)
                .collect();
            let composed = grid.trapezoid(&integrand);
            let direct = kernel(x, t2, x0, t0);
            max_residual = max_residual.max((composed - direct).abs());
        }
    }
    Ok(max_residual)
}

/// The Wiener transition kernel (heat kernel) T(x,t|x0,t0).
pub fn wiener_kernel(x: f64, t: f64, x0: f64, t0: f64) -> f64 {
    let dt = t - t0;
    (-(x - x0).powi(2) / (2.0 * dt)).exp() / (2.0 * std::f64::consts::PI * dt).sqrt()
}

/// Scalar diffusion dX = v(X)dt + σ(X)dW observed through
/// dY = h(X)dt + dZ, with W and Z independent Wiener processes.
pub struct DiffusionSpec {
    pub v: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub sigma: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub h: Box<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl DiffusionSpec {
    /// Linear model: v = −a·x, constant σ, h = c·x (Kalman-Bucy territory).
    pub fn linear(a: f64, sigma: f64, c: f64) -> Self {
        DiffusionSpec {
            v: Box::new(move |x| -a * x),
            sigma: Box::new(move |_| sigma),
            h: Box::new(move |x| c * x),
        }
    }
}

/// Simulated signal path and observation increments.
#[derive(Debug, Clone)]
pub struct ClassicalTrajectory {
    pub times: Vec<f64>,
    pub x_path: Vec<f64>,
    pub y_increments: Vec<f64>,
    pub seed: u64,
    pub stream: u64,
}

/// Euler-Maruyama simulation of the signal/observation pair. The dynamical
/// and observational noises come from independent child streams of
/// `SplitRng::new(seed).stream(stream)`.
pub fn simulate_pair(
    spec: &DiffusionSpec,
    x0: f64,
    t_final: f64,
    dt: f64,
    seed: u64,
    stream: u64,
) -> Result<ClassicalTrajectory, ClassicalError> {
    if dt <= 0.0 || t_final <= 0.0 {
        return Err(ClassicalError::BadArguments(format!(
            "dt = {dt}, t_final = {t_final}"
        )));
    }
    let steps_f = t_final / dt;
    let steps = steps_f.round() as usize;
    if (steps_f - steps as f64).abs() > 1e-9 || steps == 0 {
        return Err(ClassicalError::BadArguments(format!(
            "t_final = {t_final} is not a multiple of dt = {dt}"
        )));
    }
    let base = SplitRng::new(seed).stream(stream);
    let mut w_rng = base.stream(0);
    let mut z_rng = base.stream(1);
    let mut x = x0;
    let mut times = Vec::with_capacity(steps + 1);
    let mut x_path = Vec::with_capacity(steps + 1);
    let mut y_increments = Vec::with_capacity(steps);
    times.push(0.0);
    x_path.push(x);
    for k in 0..steps {
        let dy = (spec.h)(x) * dt + z_rng.wiener_increment(dt);
        x += (spec.v)(x) * dt + (spec.sigma)(x) * w_rng.wiener_increment(dt);
        if !x.is_finite() {
            return Err(ClassicalError::BadArguments(format!(
                "path diverged at step {k}"
            )));
        }
        times.push((k + 1) as f64 * dt);
        x_path.push(x);
        y_increments.push(dy);
    }
    Ok(ClassicalTrajectory {
        times,
        x_path,
        y_increments,
        seed,
        stream,
    })
}

/// One step of the Kallianpur-Streibel log weight:
/// log w ← log w + h(x)·dy − ½h(x)²·dt.
pub fn ks_weight_step(logw: f64, x: f64, dy: f64, h: impl Fn(f64) -> f64, dt: f64) -> f64 {
    let hx = h(x);
    logw + hx * dy - 0.5 * hx * hx * dt
}

/// Whiteness diagnostics of classical innovation increments (same statistics
/// as the quantum counterpart).
pub fn innovations_diagnostics_classical(
    innovation_sequences: &[&[f64]],
    dt: f64,
    max_lag: usize,
) -> InnovationsReport {
    innovations_whiteness(innovation_sequences, dt, max_lag)
}
