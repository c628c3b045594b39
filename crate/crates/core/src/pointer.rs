//! Von Neumann pointer measurement on position grids.
//!
//! The system (wavefunction ψ over x) couples to an apparatus (pointer
//! wavefunction φ over y) through the impulsive interaction that shifts the
//! pointer by μx; the coupled state has amplitude Ψ(x, y) = ψ(x)·φ(y − μx).
//! Reading the pointer at y yields the posterior wavefunction
//! ψ_post(x|y) = ψ(x)φ(y − μx)/√ρ_Y(y) — Bayes rule at amplitude level —
//! and the pointer statistics decompose as signal plus noise:
//! mean μ·E[X] + E_φ[Y], variance μ²·Var(X) + Var_φ(Y).

use crate::classical::{ClassicalError, GridDensity, GridSpec};
use crate::linalg::C64;
use crate::rng::SplitRng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PointerError {
    #[error(transparent)]
    Grid(#[from] ClassicalError),
    #[error("pointer support clipped: {0:.3e} of the shifted mass falls outside the y grid")]
    SupportClipped(f64),
    #[error("pointer density vanishes at y = {0}")]
    ZeroDensityPointer(f64),
    #[error("requested y = {0} lies outside the pointer grid")]
    PointerOutOfRange(f64),
    #[error("invalid arguments: {0}")]
    BadArguments(String),
}

/// Complex amplitudes on a uniform grid with ∫|ψ|²dx = 1 after `normalize`.
#[derive(Debug, Clone)]
pub struct GridWavefunction {
    spec: GridSpec,
    amplitudes: Vec<C64>,
}

impl GridWavefunction {
    pub fn from_fn(spec: GridSpec, f: impl Fn(f64) -> C64) -> Result<Self, PointerError> {
        let amplitudes: Vec<C64> = spec.points().map(f).collect();
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(PointerError::BadArguments("non-finite amplitude".into()));
        }
        let mut psi = GridWavefunction { spec, amplitudes };
        psi.normalize()?;
        Ok(psi)
    }

    /// Normalized Gaussian packet centered at `mean` with position variance
    /// `variance`.
    pub fn gaussian(spec: GridSpec, mean: f64, variance: f64) -> Result<Self, PointerError> {
        if variance <= 0.0 {
            return Err(PointerError::BadArguments(format!(
                "variance = {variance}"
            )));
        }
        Self::from_fn(spec, |x| {
            C64::new((-(x - mean).powi(2) / (4.0 * variance)).exp(), 0.0)
        })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn probability_density(&self) -> GridDensity {
        let values = self.amplitudes.iter().map(|a| a.norm_sqr()).collect();
        GridDensity::new(self.spec, values).expect("same grid")
    }

    pub fn normalize(&mut self) -> Result<(), ClassicalError> {
        let values: Vec<f64> = self.amplitudes.iter().map(|a| a.norm_sqr()).collect();
        let mass = self.spec.trapezoid(&values);
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(ClassicalError::NotNormalizable(mass));
        }
        let scale = mass.sqrt();
        for a in &mut self.amplitudes {
            *a /= scale;
        }
        Ok(())
    }

    /// Amplitude at an arbitrary point by linear interpolation (zero outside
    /// the grid).
    pub fn sample(&self, x: f64) -> C64 {
        let dx = self.spec.dx();
        let pos = (x - self.spec.x_min) / dx;
        if pos < 0.0 || pos > (self.spec.n - 1) as f64 {
            return C64::new(0.0, 0.0);
        }
        let i = (pos.floor() as usize).min(self.spec.n - 2);
        let f = pos - i as f64;
        self.amplitudes[i] * C64::new(1.0 - f, 0.0) + self.amplitudes[i + 1] * C64::new(f, 0.0)
    }

    pub fn mean(&self) -> f64 {
        self.probability_density().mean()
    }

    pub fn variance(&self) -> f64 {
        self.probability_density().variance()
    }
}

/// Joint amplitude Ψ(x, y) on the product grid, stored row-major in x.
#[derive(Debug, Clone)]
pub struct JointAmplitude {
    pub x_spec: GridSpec,
    pub y_spec: GridSpec,
    pub mu: f64,
    amplitudes: Vec<C64>,
}

impl JointAmplitude {
    pub fn amplitude(&self, ix: usize, iy: usize) -> C64 {
        self.amplitudes[ix * self.y_spec.n + iy]
    }

    /// ∫∫|Ψ|² dx dy.
    pub fn total_mass(&self) -> f64 {
        let y_rows: Vec<f64> = (0..self.x_spec.n)
            .map(|ix| {
                let row: Vec<f64> = (0..self.y_spec.n)
                    .map(|iy| self.amplitude(ix, iy).norm_sqr())
                    .collect();
                self.y_spec.trapezoid(&row)
            })
            .collect();
        self.x_spec.trapezoid(&y_rows)
    }
}

pub const SUPPORT_CLIP_TOL: f64 = 1e-8;

/// Couple system and pointer: Ψ(x, y) = ψ(x)·φ(y − μx) on the y grid
/// `y_spec`. Errors if more than `SUPPORT_CLIP_TOL` of the shifted pointer
/// mass falls outside the grid for the given ψ weights.
pub fn joint_amplitude(
    psi_prior: &GridWavefunction,
    phi: &GridWavefunction,
    mu: f64,
    y_spec: GridSpec,
) -> Result<JointAmplitude, PointerError> {
    if !mu.is_finite() {
        return Err(PointerError::BadArguments(format!("mu = {mu}")));
    }
    // clipped mass: for each x, the φ-mass outside [y_min − μx, y_max − μx]
    let phi_density = phi.probability_density();
    let phi_spec = *phi.spec();
    let mut cumulative = vec![0.0; phi_spec.n];
    for i in 1..phi_spec.n {
        cumulative[i] = cumulative[i - 1]
            + 0.5 * (phi_density.values()[i - 1] + phi_density.values()[i]) * phi_spec.dx();
    }
    let total = cumulative[phi_spec.n - 1];
    let mass_below = |y: f64| -> f64 {
        if y <= phi_spec.x_min {
            0.0
        } else if y >= phi_spec.x_max {
            total
        } else {
            let pos = (y - phi_spec.x_min) / phi_spec.dx();
            let i = (pos.floor() as usize).min(phi_spec.n - 2);
            let f = pos - i as f64;
            cumulative[i] + f * (cumulative[i + 1] - cumulative[i])
        }
    };
    let psi_density = psi_prior.probability_density();
    let clipped_rows: Vec<f64> = psi_prior
        .spec()
        .points()
        .zip(psi_density.values())
        .map(|(x, &w)| {
            let lo = y_spec.x_min - mu * x;
            let hi = y_spec.x_max - mu * x;
            let inside = mass_below(hi) - mass_below(lo);
            w * (total - inside).max(0.0)
        })
        .collect();
    let clipped = psi_prior.spec().trapezoid(&clipped_rows);
    if clipped > SUPPORT_CLIP_TOL {
        return Err(PointerError::SupportClipped(clipped));
    }

    let x_spec = *psi_prior.spec();
    let mut amplitudes = Vec::with_capacity(x_spec.n * y_spec.n);
    for (ix, x) in x_spec.points().enumerate() {
        let a = psi_prior.amplitudes()[ix];
        for y in y_spec.points() {
            amplitudes.push(a * phi.sample(y - mu * x));
        }
    }
    Ok(JointAmplitude {
        x_spec,
        y_spec,
        mu,
        amplitudes,
    })
}

/// Pointer marginal ρ_Y(y) = ∫|Ψ(x, y)|²dx, normalized on the y grid.
pub fn pointer_pdf(joint: &JointAmplitude) -> Result<GridDensity, PointerError> {
    let values: Vec<f64> = (0..joint.y_spec.n)
        .map(|iy| {
            let column: Vec<f64> = (0..joint.x_spec.n)
                .map(|ix| joint.amplitude(ix, iy).norm_sqr())
                .collect();
            joint.x_spec.trapezoid(&column)
        })
        .collect();
    let mut density = GridDensity::new(joint.y_spec, values)?;
    density.normalize()?;
    Ok(density)
}

pub const EPS_POINTER_DENSITY: f64 = 1e-300;

/// Posterior wavefunction after reading the pointer at y (snapped to the
/// nearest y-grid node): ψ_post(x|y) ∝ ψ(x)φ(y − μx).
pub fn posterior_wavefunction(
    joint: &JointAmplitude,
    y: f64,
) -> Result<GridWavefunction, PointerError> {
    let y_spec = joint.y_spec;
    if y < y_spec.x_min - 0.5 * y_spec.dx() || y > y_spec.x_max + 0.5 * y_spec.dx() {
        return Err(PointerError::PointerOutOfRange(y));
    }
    let iy = (((y - y_spec.x_min) / y_spec.dx()).round() as usize).min(y_spec.n - 1);
    let amplitudes: Vec<C64> = (0..joint.x_spec.n)
        .map(|ix| joint.amplitude(ix, iy))
        .collect();
    let norms: Vec<f64> = amplitudes.iter().map(|a| a.norm_sqr()).collect();
    let row_mass = joint.x_spec.trapezoid(&norms);
    if row_mass <= EPS_POINTER_DENSITY {
        return Err(PointerError::ZeroDensityPointer(y));
    }
    let mut psi = GridWavefunction {
        spec: joint.x_spec,
        amplitudes,
    };
    psi.normalize().map_err(PointerError::Grid)?;
    Ok(psi)
}

/// Monte-Carlo check of the signal-plus-noise decomposition of the measured
/// pointer: Y ~ μX + noise, so mean(Y) = μE[X] + E_φ[Y] and
/// Var(Y) = μ²Var(X) + Var_φ(Y).
#[derive(Debug, Clone)]
pub struct SignalNoiseReport {
    pub sample_mean: f64,
    pub sample_variance: f64,
    pub expected_mean: f64,
    pub expected_variance: f64,
    pub se_mean: f64,
    pub se_variance: f64,
    pub samples: usize,
}

impl SignalNoiseReport {
    pub fn mean_within(&self, n_se: f64) -> bool {
        (self.sample_mean - self.expected_mean).abs() <= n_se * self.se_mean
    }

    pub fn variance_within(&self, n_se: f64) -> bool {
        (self.sample_variance - self.expected_variance).abs() <= n_se * self.se_variance
    }
}

/// Sample the pointer by inverse transform on the trapezoid cumulative of
/// ρ_Y (linear interpolation between nodes) and compare moments.
pub fn signal_noise_decomposition_check(
    psi_prior: &GridWavefunction,
    phi: &GridWavefunction,
    mu: f64,
    y_spec: GridSpec,
    n_samples: usize,
    seed: u64,
) -> Result<SignalNoiseReport, PointerError> {
    if n_samples < 2 {
        return Err(PointerError::BadArguments("need at least 2 samples".into()));
    }
    let joint = joint_amplitude(psi_prior, phi, mu, y_spec)?;
    let pdf = pointer_pdf(&joint)?;
    let spec = *pdf.spec();
    let mut cumulative = vec![0.0; spec.n];
    for i in 1..spec.n {
        cumulative[i] =
            cumulative[i - 1] + 0.5 * (pdf.values()[i - 1] + pdf.values()[i]) * spec.dx();
    }
    let total = cumulative[spec.n - 1];

    let mut rng = SplitRng::new(seed);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut sum_4 = 0.0;
    let mut samples = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let u = rng.next_f64() * total;
        let idx = match cumulative
            .binary_search_by(|c| c.partial_cmp(&u).unwrap())
        {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1).min(spec.n - 2),
        };
        let idx = idx.min(spec.n - 2);
        let span = cumulative[idx + 1] - cumulative[idx];
        let f = if span > 0.0 { (u - cumulative[idx]) / span } else { 0.0 };
        let y = spec.point(idx) + f * spec.dx();
        samples.push(y);
        sum += y;
    }
    let mean = sum / n_samples as f64;
    for &y in &samples {
        sum_sq += (y - mean).powi(2);
        sum_4 += (y - mean).powi(4);
    }
    let variance = sum_sq / (n_samples - 1) as f64;
    let m4 = sum_4 / n_samples as f64;
    let se_mean = (variance / n_samples as f64).sqrt();
    // standard error of the sample variance via the fourth central moment
    let se_variance = ((m4 - variance * variance).max(0.0) / n_samples as f64).sqrt();

    let expected_mean = mu * psi_prior.mean() + phi.mean();
    let expected_variance = mu * mu * psi_prior.variance() + phi.variance();
    Ok(SignalNoiseReport {
        sample_mean: mean,
        sample_variance: variance,
        expected_mean,
        expected_variance,
        se_mean,
        se_variance,
        samples: n_samples,
    })
}
