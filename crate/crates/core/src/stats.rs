//! Whiteness diagnostics for innovation sequences and small summary helpers.
//!
//! Used by both the quantum and classical filtering pipelines so the two
//! report identical statistics.

/// Whiteness report for a family of increment sequences, each expected to be
/// i.i.d. N(0, dt) when the filter is exact.
#[derive(Debug, Clone)]
pub struct InnovationsReport {
    /// Mean of the normalized increments I_k/√dt, pooled over all sequences.
    pub mean_normalized: f64,
    /// Sample variance of the terminal sums I(T), divided by T.
    /// (For a single sequence, Var is taken over the running increments
    /// instead: Σ I_k² / T.)
    pub variance_ratio: f64,
    /// Autocorrelation of the normalized increments at lags 1..=max_lag,
    /// computed within each sequence and pooled (no cross-sequence pairs).
    pub lag_autocorr: Vec<f64>,
    pub sequences: usize,
    pub steps_per_sequence: usize,
}

/// Pooled diagnostics over an ensemble of increment sequences.
/// All sequences must share the same length and step size.
pub fn innovations_whiteness(sequences: &[&[f64]], dt: f64, max_lag: usize) -> InnovationsReport {
    assert!(!sequences.is_empty(), "need at least one sequence");
    let steps = sequences[0].len();
    assert!(sequences.iter().all(|s| s.len() == steps));
    assert!(steps > max_lag, "sequences shorter than max_lag");
    let sqrt_dt = dt.sqrt();
    let total = (sequences.len() * steps) as f64;

    let mut sum = 0.0;
    for seq in sequences {
        for &x in *seq {
            sum += x / sqrt_dt;
        }
    }
    let mean = sum / total;

    // Terminal-sum variance against the Wiener prediction T = steps * dt.
    let t_final = steps as f64 * dt;
    let variance_ratio = if sequences.len() > 1 {
        let finals: Vec<f64> = sequences.iter().map(|s| s.iter().sum()).collect();
        let fmean = finals.iter().sum::<f64>() / finals.len() as f64;
        let var = finals.iter().map(|f| (f - fmean).powi(2)).sum::<f64>()
            / (finals.len() - 1) as f64;
        var / t_final
    } else {
        sequences[0].iter().map(|x| x * x).sum::<f64>() / t_final
    };

    let mut denom = 0.0;
    let mut numers = vec![0.0; max_lag];
    for seq in sequences {
        for &x in *seq {
            let d = x / sqrt_dt - mean;
            denom += d * d;
        }
        for lag in 1..=max_lag {
            for k in 0..steps - lag {
                let a = seq[k] / sqrt_dt - mean;
                let b = seq[k + lag] / sqrt_dt - mean;
                numers[lag - 1] += a * b;
            }
        }
    }
    let lag_autocorr = numers
        .iter()
        .map(|&n| if denom > 0.0 { n / denom } else { 0.0 })
        .collect();

    InnovationsReport {
        mean_normalized: mean,
        variance_ratio,
        lag_autocorr,
        sequences: sequences.len(),
        steps_per_sequence: steps,
    }
}

/// Mean and standard error of the mean.
pub fn mean_and_se(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitRng;

    #[test]
    fn white_noise_passes() {
        let dt = 1e-3;
        let steps = 500;
        let root = SplitRng::new(11);
        let seqs: Vec<Vec<f64>> = (0..200)
            .map(|i| {
                let mut rng = root.stream(i);
                (0..steps).map(|_| rng.wiener_increment(dt)).collect()
            })
            .collect();
        let refs: Vec<&[f64]> = seqs.iter().map(|s| s.as_slice()).collect();
        let rep = innovations_whiteness(&refs, dt, 10);
        let n_total = (200 * steps) as f64;
        assert!(rep.mean_normalized.abs() <= 3.0 / n_total.sqrt() * 2.0);
        assert!(rep.variance_ratio > 0.8 && rep.variance_ratio < 1.2);
        assert!(rep.lag_autocorr.iter().all(|a| a.abs() < 0.02));
    }

    #[test]
    fn zero_increments_give_zero_diagnostics() {
        let z = vec![0.0; 64];
        let rep = innovations_whiteness(&[&z], 0.1, 4);
        assert_eq!(rep.mean_normalized, 0.0);
        assert_eq!(rep.variance_ratio, 0.0);
        assert!(rep.lag_autocorr.iter().all(|a| *a == 0.0));
    }
}
