//! Experiment execution: dispatch a parsed config, write CSV/JSON artifacts
//! into the output directory, and finish with the checksum manifest.
//! Identical (config, seed) pairs produce byte-identical CSVs; the manifest
//! is written last and differs only in its wall-clock field.

use crate::config::{ExperimentConfig, Params};
use crate::csvio::{fmt_f64, CsvWriter};
use crate::manifest::RunManifest;
use crate::suites::{self, SuiteRow};
use crate::CliError;
use qflab::belavkin::{ensemble_summary, innovations_diagnostics_pooled};
use qflab::pointer::{
    joint_amplitude, pointer_pdf, signal_noise_decomposition_check, GridWavefunction,
};
use std::path::{Path, PathBuf};

pub struct RunOutcome {
    pub output_dir: PathBuf,
    pub files: Vec<String>,
    /// Suite rows when the experiment is verdict-like; empty otherwise.
    pub rows: Vec<SuiteRow>,
}

/// Execute a parsed config. `config_bytes` are the raw file contents, hashed
/// into the manifest.
pub fn run_parsed(
    config: &ExperimentConfig,
    config_bytes: &[u8],
    out_dir: &Path,
) -> Result<RunOutcome, CliError> {
    std::fs::create_dir_all(out_dir)?;
    let start = std::time::Instant::now();
    let mut manifest = RunManifest::new(&config.experiment, config_bytes, seed_of(config));
    let mut files = Vec::new();
    fn emit(
        out_dir: &Path,
        name: &str,
        writer: &CsvWriter,
        manifest: &mut RunManifest,
        files: &mut Vec<String>,
    ) -> Result<(), CliError> {
        writer.write_to(&out_dir.join(name))?;
        manifest.record_file(name, writer.bytes());
        files.push(name.to_string());
        Ok(())
    }

    let rows_out: Vec<SuiteRow>;
    match &config.params {
        Params::QubitDecayFilter(p) => {
            let model = p.build_model()?;
            let ensemble = suites::decay_ensemble(
                &model,
                p.gamma,
                p.dt,
                p.t_final,
                p.n_trajectories,
                p.seed,
                p.mode.to_mode(),
            )?;
            // per-trajectory dumps
            for (k, rec) in ensemble
                .records
                .iter()
                .take(p.trajectory_dumps)
                .enumerate()
            {
                let mut w = CsvWriter::new(&["t", "dY", "dI", "log_likelihood", "n"]);
                let series = rec.expectation_series("n").unwrap();
                for i in 0..rec.times.len() {
                    let (dy, di) = if i == 0 {
                        (String::new(), String::new())
                    } else {
                        (fmt_f64(rec.dy[i - 1]), fmt_f64(rec.innovations[i - 1]))
                    };
                    w.row(&[
                        fmt_f64(rec.times[i]),
                        dy,
                        di,
                        fmt_f64(rec.log_norms[i]),
                        fmt_f64(series[i]),
                    ]);
                }
                emit(out_dir, &format!("trajectory_{k}.csv"), &w, &mut manifest, &mut files)?;
            }
            // ensemble summary
            let summary = ensemble_summary(&ensemble.records);
            let mut w = CsvWriter::new(&["t", "mean_n", "se_n", "exp_decay"]);
            let (_, means, ses) = &summary.observables[0];
            for (i, &t) in summary.times.iter().enumerate() {
                w.row_f64(&[t, means[i], ses[i], (-p.gamma * t).exp()]);
            }
            emit(out_dir, "ensemble_summary.csv", &w, &mut manifest, &mut files)?;
            // unconditional master-equation reference: t then the density
            // entries row-major, real and imaginary parts interleaved
            let rho0 = qflab::linalg::number_op();
            let sol = qflab::master_eq::propagate(&model, &rho0, p.t_final, p.dt)?;
            let dim = model.dim();
            let mut header = vec!["t".to_string()];
            for r in 0..dim {
                for c in 0..dim {
                    header.push(format!("rho_re_{r}_{c}"));
                    header.push(format!("rho_im_{r}_{c}"));
                }
            }
            let header_refs: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
            let mut w = CsvWriter::new(&header_refs);
            for (t, rho) in sol.times.iter().zip(&sol.states) {
                let mut row = vec![*t];
                for r in 0..dim {
                    for c in 0..dim {
                        row.push(rho[(r, c)].re);
                        row.push(rho[(r, c)].im);
                    }
                }
                w.row_f64(&row);
            }
            emit(out_dir, "master_equation.csv", &w, &mut manifest, &mut files)?;
            // the wall-clock row is volatile; it lives in the manifest, and
            // checks.csv stays a pure function of (config, seed)
            rows_out = suites::filter_consistency_rows(&ensemble)
                .into_iter()
                .filter(|r| r.property != "runtime seconds")
                .collect();
        }
        Params::ZakaiMartingale(p) => {
            let model = qflab::slh::SlhModel::amplitude_damping(p.gamma);
            let ensemble = suites::decay_ensemble(
                &model,
                p.gamma,
                p.dt,
                p.t_final,
                p.n_trajectories,
                p.seed,
                qflab::belavkin::TrajectoryMode::ReferenceMeasure,
            )?;
            rows_out = suites::zakai_martingale_rows(&ensemble, &p.check_times, p.t_final);
            let mut w = CsvWriter::new(&["t", "mean_likelihood", "se"]);
            let steps = ensemble.records[0].steps() as f64;
            for &t in &p.check_times {
                let idx = ((t / p.t_final) * steps).round() as usize;
                let norms: Vec<f64> = ensemble
                    .records
                    .iter()
                    .map(|r| r.log_norms[idx].exp())
                    .collect();
                let (mean, se) = qflab::stats::mean_and_se(&norms);
                w.row_f64(&[t, mean, se]);
            }
            emit(out_dir, "zakai_martingale.csv", &w, &mut manifest, &mut files)?;
        }
        Params::InnovationsWhiteness(p) => {
            let model = qflab::slh::SlhModel::amplitude_damping(p.gamma);
            let ensemble = suites::decay_ensemble(
                &model,
                p.gamma,
                p.dt,
                p.t_final,
                p.n_trajectories,
                p.seed,
                qflab::belavkin::TrajectoryMode::FilterConsistent,
            )?;
            rows_out = suites::innovations_rows(&ensemble, p.max_lag);
            let report = innovations_diagnostics_pooled(&ensemble.records, p.max_lag);
            let mut w = CsvWriter::new(&["lag", "autocorrelation"]);
            for (lag, ac) in report.lag_autocorr.iter().enumerate() {
                w.row(&[format!("{}", lag + 1), fmt_f64(*ac)]);
            }
            emit(out_dir, "autocorrelation.csv", &w, &mut manifest, &mut files)?;
            let stats = serde_json::json!({
                "mean_normalized": report.mean_normalized,
                "variance_ratio": report.variance_ratio,
                "sequences": report.sequences,
                "steps_per_sequence": report.steps_per_sequence,
            });
            write_json(out_dir, "whiteness.json", &stats, &mut manifest, &mut files)?;
        }
        Params::CeAxioms(p) => {
            rows_out = suites::ce_axioms_rows(p.seed, p.instances)?;
        }
        Params::CovarianceLemma(p) => {
            rows_out = suites::covariance_rows(p.seed, p.instances)?;
        }
        Params::TakesakiPosNeg(p) => {
            rows_out = suites::takesaki_rows(&p.t_samples)?;
        }
        Params::GaussianConditioning(p) => {
            let result = suites::gaussian_conditioning_suite(
                p.grid.build()?,
                p.mu0,
                p.prior_variance,
                p.noise_variance,
                p.y,
            )?;
            let mut w = CsvWriter::new(&["x", "posterior"]);
            let spec = *result.grid_posterior.spec();
            for (i, x) in spec.points().enumerate() {
                w.row_f64(&[x, result.grid_posterior.values()[i]]);
            }
            emit(out_dir, "grid_posterior.csv", &w, &mut manifest, &mut files)?;
            let mut w = CsvWriter::new(&["x", "re", "im", "density"]);
            let spec = *result.vn_posterior.spec();
            for (i, x) in spec.points().enumerate() {
                let amp = result.vn_posterior.amplitudes()[i];
                w.row_f64(&[x, amp.re, amp.im, amp.norm_sqr()]);
            }
            emit(out_dir, "pointer_posterior.csv", &w, &mut manifest, &mut files)?;
            rows_out = result.rows;
        }
        Params::DmzVsKushner(p) => {
            rows_out = suites::dmz_kushner_rows(p.grid.build()?, p.dt)?;
        }
        Params::KalmanCrosscheck(p) => {
            let result = suites::kalman_crosscheck_rows(
                p.seed,
                p.n_paths,
                p.drift,
                p.diffusion,
                p.observation,
                p.t_final,
                p.dt,
                p.grid.build()?,
            )?;
            let mut w = CsvWriter::new(&[
                "t",
                "grid_mean",
                "kalman_mean",
                "grid_variance",
                "riccati_variance",
            ]);
            for &(t, gm, km, gv, rv) in &result.curve {
                w.row_f64(&[t, gm, km, gv, rv]);
            }
            emit(out_dir, "kalman_tracking.csv", &w, &mut manifest, &mut files)?;
            // first path in the same schema as the quantum trajectory dumps
            let traj = &result.trajectory;
            let mut w = CsvWriter::new(&["t", "x", "dY", "dI", "mean", "variance"]);
            for (i, &t) in traj.times.iter().enumerate() {
                let (dy, di) = if i == 0 {
                    (String::new(), String::new())
                } else {
                    (
                        fmt_f64(traj.y_increments[i - 1]),
                        fmt_f64(result.innovations[i - 1]),
                    )
                };
                let (gm, _, gv) = (
                    result.curve[i].1,
                    result.curve[i].2,
                    result.curve[i].3,
                );
                w.row(&[
                    fmt_f64(t),
                    fmt_f64(traj.x_path[i]),
                    dy,
                    di,
                    fmt_f64(gm),
                    fmt_f64(gv),
                ]);
            }
            emit(out_dir, "classical_trajectory.csv", &w, &mut manifest, &mut files)?;
            rows_out = result.rows;
        }
        Params::VnPointerGaussian(p) => {
            let x_grid = p.x_grid.build()?;
            let y_grid = p.y_grid.build()?;
            let psi = GridWavefunction::gaussian(x_grid, 0.0, 1.0)?;
            let phi = GridWavefunction::gaussian(x_grid, 0.0, 1.0)?;
            let joint = joint_amplitude(&psi, &phi, p.mu, y_grid)?;
            let pdf = pointer_pdf(&joint)?;
            let mut w = CsvWriter::new(&["y", "density"]);
            for (i, y) in y_grid.points().enumerate() {
                w.row_f64(&[y, pdf.values()[i]]);
            }
            emit(out_dir, "pointer_pdf.csv", &w, &mut manifest, &mut files)?;
            let report = signal_noise_decomposition_check(
                &psi, &phi, p.mu, y_grid, p.n_samples, p.seed,
            )?;
            rows_out = vec![
                SuiteRow::le(
                    "sampling",
                    "|mean - (mu E[X] + mean_phi)| / SE",
                    (report.sample_mean - report.expected_mean).abs()
                        / report.se_mean.max(f64::MIN_POSITIVE),
                    3.0,
                ),
                SuiteRow::le(
                    "sampling",
                    "|variance - (mu^2 Var X + Var_phi)| / SE",
                    (report.sample_variance - report.expected_variance).abs()
                        / report.se_variance.max(f64::MIN_POSITIVE),
                    3.0,
                ),
            ];
            let stats = serde_json::json!({
                "sample_mean": report.sample_mean,
                "sample_variance": report.sample_variance,
                "expected_mean": report.expected_mean,
                "expected_variance": report.expected_variance,
                "samples": report.samples,
            });
            write_json(out_dir, "signal_noise.json", &stats, &mut manifest, &mut files)?;
        }
        Params::NondemolitionTruncated(p) => {
            let (rows, residuals) = suites::nondemolition_rows(
                p.gamma,
                p.t_total,
                &p.slot_levels,
                p.s_fraction,
                p.t_fraction,
            )?;
            let mut w = CsvWriter::new(&["slots", "residual", "error_bound"]);
            for (slots, residual, bound) in residuals {
                w.row(&[format!("{slots}"), fmt_f64(residual), fmt_f64(bound)]);
            }
            emit(out_dir, "nondemolition.csv", &w, &mut manifest, &mut files)?;
            rows_out = rows;
        }
        Params::ItoGoldens(_) => {
            rows_out = suites::ito_goldens_rows();
            std::fs::write(out_dir.join("ito_table.txt"), qflab::ito::table_text())?;
            manifest.record_file("ito_table.txt", qflab::ito::table_text().as_bytes());
            files.push("ito_table.txt".to_string());
        }
    }

    if !rows_out.is_empty() {
        let mut w = CsvWriter::new(&["instance", "property", "value", "bound", "direction", "pass"]);
        for row in &rows_out {
            w.row(&[
                row.instance.clone(),
                row.property.clone(),
                fmt_f64(row.value),
                fmt_f64(row.bound),
                match row.direction {
                    suites::Direction::Le => "le".into(),
                    suites::Direction::Ge => "ge".into(),
                },
                format!("{}", row.pass),
            ]);
        }
        emit(out_dir, "checks.csv", &w, &mut manifest, &mut files)?;
    }

    manifest.wall_clock_seconds = start.elapsed().as_secs_f64();
    manifest.write(out_dir)?;
    files.push("manifest.json".to_string());
    Ok(RunOutcome {
        output_dir: out_dir.to_path_buf(),
        files,
        rows: rows_out,
    })
}

fn write_json(
    out_dir: &Path,
    name: &str,
    value: &serde_json::Value,
    manifest: &mut RunManifest,
    files: &mut Vec<String>,
) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    std::fs::write(out_dir.join(name), &text)?;
    manifest.record_file(name, text.as_bytes());
    files.push(name.to_string());
    Ok(())
}

fn seed_of(config: &ExperimentConfig) -> Option<u64> {
    match &config.params {
        Params::QubitDecayFilter(p) => Some(p.seed),
        Params::ZakaiMartingale(p) => Some(p.seed),
        Params::InnovationsWhiteness(p) => Some(p.seed),
        Params::CeAxioms(p) => Some(p.seed),
        Params::CovarianceLemma(p) => Some(p.seed),
        Params::KalmanCrosscheck(p) => Some(p.seed),
        Params::VnPointerGaussian(p) => Some(p.seed),
        Params::TakesakiPosNeg(_)
        | Params::GaussianConditioning(_)
        | Params::DmzVsKushner(_)
        | Params::NondemolitionTruncated(_)
        | Params::ItoGoldens(_) => None,
    }
}

/// Resolve the output directory: CLI flag, then the `QFLAB_OUTPUT_DIR`
/// environment override, then the config field, then `qflab-out/<name>`.
pub fn resolve_output_dir(
    cli: Option<&str>,
    config: &ExperimentConfig,
) -> PathBuf {
    if let Some(dir) = cli {
        return PathBuf::from(dir);
    }
    if let Ok(dir) = std::env::var("QFLAB_OUTPUT_DIR") {
        if !dir.is_empty() {
            return PathBuf::from(dir);
        }
    }
    if let Some(dir) = &config.output_dir {
        return PathBuf::from(dir);
    }
    PathBuf::from("qflab-out").join(&config.experiment)
}
