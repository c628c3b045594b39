//! The acceptance suite: twelve criteria over the whole stack, each run at
//! its pinned reference parameters and tolerance, with one pass/fail line
//! printed per criterion and a machine-readable verdict file.

use crate::config::parse_config;
use crate::runner::run_parsed;
use crate::suites::{self, all_pass, SuiteRow};
use crate::CliError;
use qflab::belavkin::TrajectoryMode;
use qflab::classical::GridSpec;
use qflab::slh::SlhModel;
use serde::Serialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Serialize)]
pub struct CriterionResult {
    pub name: String,
    pub passed: bool,
    pub summary: String,
    pub rows: Vec<SuiteRow>,
}

#[derive(Debug, Serialize)]
pub struct AcceptanceReport {
    pub criteria: Vec<CriterionResult>,
    pub all_passed: bool,
}

impl AcceptanceReport {
    pub fn lines(&self) -> String {
        let mut out = String::new();
        for c in &self.criteria {
            out.push_str(&format!(
                "{}  {}  {}\n",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.summary
            ));
        }
        out
    }
}

pub const CRITERIA: &[&str] = &[
    "01-filter-master-consistency",
    "02-innovations-whiteness",
    "03-zakai-martingale",
    "04-ito-table-goldens",
    "05-ce-axioms",
    "06-covariance-identities",
    "07-takesaki-pos-neg",
    "08-gaussian-conditioning",
    "09-dmz-kushner-kalman",
    "10-chapman-kolmogorov",
    "11-nondemolition-truncation",
    "12-determinism",
];

/// Reference configuration of criterion 1 (also reused by criteria 2 and 12).
pub const DECAY_CONFIG_JSON: &str = r#"{
  "experiment": "qubit-decay-filter",
  "params": {
    "seed": 20202,
    "gamma": 1.0,
    "dt": 0.001,
    "t_final": 3.0,
    "n_trajectories": 2000,
    "mode": "filter-consistent",
    "trajectory_dumps": 2
  }
}"#;

fn worst_row(rows: &[SuiteRow]) -> String {
    let worst = rows
        .iter()
        .filter(|r| !r.pass)
        .chain(rows.iter())
        .next()
        .expect("rows nonempty");
    let rel = match worst.direction {
        suites::Direction::Le => "<=",
        suites::Direction::Ge => ">=",
    };
    format!(
        "{}: {} = {:.6e} {} {:.6e}",
        worst.instance, worst.property, worst.value, rel, worst.bound
    )
}

fn result(name: &str, rows: Vec<SuiteRow>) -> CriterionResult {
    CriterionResult {
        name: name.to_string(),
        passed: all_pass(&rows),
        summary: worst_row(&rows),
        rows,
    }
}

/// Run the selected criteria (all when `only` is `None`), print one line per
/// criterion, and write `verdicts.json` under `out_dir`.
pub fn run_acceptance(
    out_dir: &Path,
    only: Option<&str>,
) -> Result<AcceptanceReport, CliError> {
    if let Some(name) = only {
        if !CRITERIA.contains(&name) {
            return Err(CliError::Config(format!(
                "unknown criterion `{name}`; known: {}",
                CRITERIA.join(", ")
            )));
        }
    }
    std::fs::create_dir_all(out_dir)?;
    let selected = |name: &str| only.map_or(true, |o| o == name);
    let mut criteria = Vec::new();

    // criteria 1 and 2 share the filter-consistent ensemble
    if selected(CRITERIA[0]) || selected(CRITERIA[1]) {
        let ensemble = suites::decay_ensemble(
            &SlhModel::amplitude_damping(1.0),
            1.0,
            1e-3,
            3.0,
            2000,
            20202,
            TrajectoryMode::FilterConsistent,
        )?;
        if selected(CRITERIA[0]) {
            criteria.push(result(
                CRITERIA[0],
                suites::filter_consistency_rows(&ensemble),
            ));
        }
        if selected(CRITERIA[1]) {
            criteria.push(result(CRITERIA[1], suites::innovations_rows(&ensemble, 10)));
        }
    }

    if selected(CRITERIA[2]) {
        let ensemble = suites::decay_ensemble(
            &SlhModel::amplitude_damping(1.0),
            1.0,
            1e-3,
            3.0,
            2000,
            30303,
            TrajectoryMode::ReferenceMeasure,
        )?;
        criteria.push(result(
            CRITERIA[2],
            suites::zakai_martingale_rows(&ensemble, &[1.0, 2.0, 3.0], 3.0),
        ));
    }

    if selected(CRITERIA[3]) {
        criteria.push(result(CRITERIA[3], suites::ito_goldens_rows()));
    }

    if selected(CRITERIA[4]) {
        criteria.push(result(CRITERIA[4], suites::ce_axioms_rows(0, 100)?));
    }

    if selected(CRITERIA[5]) {
        criteria.push(result(CRITERIA[5], suites::covariance_rows(0, 100)?));
    }

    if selected(CRITERIA[6]) {
        criteria.push(result(
            CRITERIA[6],
            suites::takesaki_rows(&[0.1, 0.5, 1.0, 2.0])?,
        ));
    }

    if selected(CRITERIA[7]) {
        let grid = GridSpec::new(-10.0, 10.0, 20_001)?;
        criteria.push(result(
            CRITERIA[7],
            suites::gaussian_conditioning_suite(grid, 0.0, 1.0, 1.0, 2.0)?.rows,
        ));
    }

    if selected(CRITERIA[8]) {
        let mut rows = suites::dmz_kushner_rows(GridSpec::new(-6.0, 6.0, 601)?, 1.6e-4)?;
        let kalman = suites::kalman_crosscheck_rows(
            41414,
            100,
            1.0,
            1.0,
            1.0,
            1.0,
            2e-4,
            GridSpec::new(-6.0, 6.0, 601)?,
        )?;
        rows.extend(kalman.rows);
        criteria.push(result(CRITERIA[8], rows));
    }

    if selected(CRITERIA[9]) {
        criteria.push(result(
            CRITERIA[9],
            suites::chapman_kolmogorov_rows(GridSpec::new(-8.0, 8.0, 4001)?)?,
        ));
    }

    if selected(CRITERIA[10]) {
        let (rows, _) = suites::nondemolition_rows(1.0, 0.02, &[1, 2, 3], 0.35, 0.7)?;
        criteria.push(result(CRITERIA[10], rows));
    }

    if selected(CRITERIA[11]) {
        criteria.push(result(CRITERIA[11], determinism_rows(out_dir)?));
    }

    let report = AcceptanceReport {
        all_passed: criteria.iter().all(|c| c.passed),
        criteria,
    };
    print!("{}", report.lines());
    let verdicts =
        serde_json::to_string_pretty(&report).map_err(|e| CliError::Io(e.to_string()))?;
    std::fs::write(out_dir.join("verdicts.json"), verdicts)?;
    Ok(report)
}

/// Criterion 12: two runs of the criterion-1 config with the same seed
/// produce byte-identical CSVs.
fn determinism_rows(out_dir: &Path) -> Result<Vec<SuiteRow>, CliError> {
    let config = parse_config(DECAY_CONFIG_JSON)?;
    let dir_a = out_dir.join("determinism-a");
    let dir_b = out_dir.join("determinism-b");
    let outcome_a = run_parsed(&config, DECAY_CONFIG_JSON.as_bytes(), &dir_a)?;
    let config_b = parse_config(DECAY_CONFIG_JSON)?;
    let outcome_b = run_parsed(&config_b, DECAY_CONFIG_JSON.as_bytes(), &dir_b)?;

    let csvs: Vec<&String> = outcome_a
        .files
        .iter()
        .filter(|f| f.ends_with(".csv"))
        .collect();
    let mut mismatches = 0usize;
    for name in &csvs {
        let a = std::fs::read(dir_a.join(name))?;
        let b = std::fs::read(dir_b.join(name))?;
        if a != b {
            mismatches += 1;
        }
    }
    let _ = outcome_b;
    Ok(vec![
        SuiteRow::ge("csv files compared", "count", csvs.len() as f64, 3.0),
        SuiteRow::le("byte comparison", "mismatched files", mismatches as f64, 0.0),
    ])
}

/// Default acceptance output directory.
pub fn default_output_dir() -> PathBuf {
    PathBuf::from("qflab-out").join("acceptance")
}
