//! Kalman-Bucy oracle for the linear filtering model
//! dX = −aX dt + σ dW, dY = cX dt + dZ: the conditional distribution is
//! Gaussian with variance following the Riccati ODE
//! dP/dt = σ² − 2aP − c²P² (deterministic, RK4) and mean following
//! dm = −am dt + Pc(dy − cm dt) along the observed record.
//!
//! This is the independent closed-form route the grid filter is checked
//! against; it shares nothing with the finite-difference implementation.

#[derive(Debug, Clone)]
pub struct KalmanBucy {
    pub a: f64,
    pub sigma: f64,
    pub c: f64,
    pub mean: f64,
    pub variance: f64,
}

impl KalmanBucy {
    pub fn new(a: f64, sigma: f64, c: f64, mean0: f64, variance0: f64) -> Self {
        KalmanBucy {
            a,
            sigma,
            c,
            mean: mean0,
            variance: variance0,
        }
    }

    fn riccati_rhs(&self, p: f64) -> f64 {
        self.sigma * self.sigma - 2.0 * self.a * p - self.c * self.c * p * p
    }

    /// Advance one step against the observation increment dy.
    pub fn step(&mut self, dy: f64, dt: f64) {
        // mean update with the pre-update gain (Ito convention)
        let innovation = dy - self.c * self.mean * dt;
        self.mean += -self.a * self.mean * dt + self.variance * self.c * innovation;
        // deterministic Riccati flow, fourth order
        let p = self.variance;
        let k1 = self.riccati_rhs(p);
        let k2 = self.riccati_rhs(p + 0.5 * dt * k1);
        let k3 = self.riccati_rhs(p + 0.5 * dt * k2);
        let k4 = self.riccati_rhs(p + dt * k3);
        self.variance = p + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }

    /// Stationary variance (a, c > 0): the positive Riccati root.
    pub fn stationary_variance(a: f64, sigma: f64, c: f64) -> f64 {
        (-a + (a * a + c * c * sigma * sigma).sqrt()) / (c * c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn riccati_converges_to_stationary_root() {
        let mut kb = KalmanBucy::new(1.0, 1.0, 1.0, 0.0, 1.0);
        for _ in 0..40_000 {
            kb.step(0.0, 1e-3);
        }
        let stationary = KalmanBucy::stationary_variance(1.0, 1.0, 1.0);
        assert!((kb.variance - stationary).abs() < 1e-9);
        assert!((stationary - (2f64.sqrt() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn noiseless_mean_decays() {
        // c = 0: no information, mean follows the prior flow e^{-at}
        let mut kb = KalmanBucy::new(2.0, 1.0, 0.0, 1.0, 1.0);
        let dt = 1e-4;
        for _ in 0..10_000 {
            kb.step(0.37, dt); // record irrelevant at c = 0
        }
        assert!((kb.mean - (-2.0f64).exp()).abs() < 1e-3);
    }
}
