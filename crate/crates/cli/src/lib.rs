//! Config-driven front end: parses the JSON experiment schema, dispatches the
//! experiment drivers, and persists reports as CSV plus a JSON run manifest.
//!
//! Reals are serialized as scientific notation with 17 significant digits, so
//! every CSV value round-trips to the same f64 and identical runs produce
//! byte-identical files.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use periodlab::curves::SubmanifoldSpec;
use periodlab::experiments::{self, ExperimentConfig, ExperimentError};
use periodlab::periods::{fit_kuznecov_leading, kuznecov_cumulative, period_vector, PeriodError};
use periodlab::spectral::{enumerate_cluster, Manifold, SpectralWindow};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Config(String),
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    Experiment(ExperimentError),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Io { path, source } => write!(f, "io error at {}: {source}", path.display()),
            CliError::Experiment(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        CliError::Experiment(e)
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// The versioned JSON config schema. Unknown keys are rejected.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub schema_version: u32,
    pub manifold: Manifold,
    #[serde(default = "default_window")]
    pub window: SpectralWindow,
    pub h_list: Vec<f64>,
    pub submanifold: SubmanifoldSpec,
    #[serde(default = "default_p_list")]
    pub p_list: Vec<u32>,
    #[serde(default = "default_q_list")]
    pub q_list: Vec<f64>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default)]
    pub negative_control: bool,
}

fn default_window() -> SpectralWindow {
    SpectralWindow::standard()
}
fn default_p_list() -> Vec<u32> {
    vec![1, 2, 3]
}
fn default_q_list() -> Vec<f64> {
    vec![2.0, 4.0, 6.0]
}
fn default_samples() -> usize {
    100_000
}
fn default_seed() -> u64 {
    7
}
fn default_workers() -> usize {
    1
}

pub const SUPPORTED_SCHEMA_VERSION: u32 = 1;

impl ConfigFile {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let config: ConfigFile =
            serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        if config.schema_version != SUPPORTED_SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "unsupported schema_version {} (supported: {SUPPORTED_SCHEMA_VERSION})",
                config.schema_version
            )));
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::from_json(&text)
    }

    pub fn to_experiment(&self) -> ExperimentConfig {
        ExperimentConfig {
            manifold: self.manifold,
            window: self.window,
            h_list: self.h_list.clone(),
            submanifold: self.submanifold.clone(),
            p_list: self.p_list.clone(),
            q_list: self.q_list.clone(),
            samples: self.samples,
            seed: self.seed,
            workers: self.workers,
            negative_control: self.negative_control,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Modes,
    Period,
    Moments,
    Tail,
    Concentration,
    Sweep,
    Lq,
    DetExamples,
    All,
}

impl Subcommand {
    pub fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "modes" => Subcommand::Modes,
            "period" => Subcommand::Period,
            "moments" => Subcommand::Moments,
            "tail" => Subcommand::Tail,
            "concentration" => Subcommand::Concentration,
            "sweep" => Subcommand::Sweep,
            "lq" => Subcommand::Lq,
            "det-examples" => Subcommand::DetExamples,
            "all" => Subcommand::All,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Subcommand::Modes => "modes",
            Subcommand::Period => "period",
            Subcommand::Moments => "moments",
            Subcommand::Tail => "tail",
            Subcommand::Concentration => "concentration",
            Subcommand::Sweep => "sweep",
            Subcommand::Lq => "lq",
            Subcommand::DetExamples => "det-examples",
            Subcommand::All => "all",
        }
    }
}

/// Scientific notation with 17 significant digits: round-trip exact for f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_bool(b: bool) -> String {
    b.to_string()
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut text = String::new();
    text.push_str(&header.join(","));
    text.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        text.push_str(&row.join(","));
        text.push('\n');
    }
    std::fs::write(path, text).map_err(io_err(path))
}

/// Run manifest, serialized with stable (declaration-order) keys.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool_version: &'static str,
    pub subcommand: String,
    pub seed: u64,
    pub started_unix_ms: u128,
    pub finished_unix_ms: Option<u128>,
    pub config: ConfigFile,
    pub report_files: Vec<String>,
}

fn now_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

fn write_manifest(out_dir: &Path, manifest: &RunManifest) -> Result<(), CliError> {
    let path = out_dir.join("manifest.json");
    let text = serde_json::to_string_pretty(manifest)
        .map_err(|e| CliError::Config(format!("manifest serialization: {e}")))?;
    std::fs::write(&path, text).map_err(io_err(&path))
}

/// Overall outcome of a run: statistical failures map to exit code 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunOutcome {
    Passed,
    StatisticalFailure,
}

struct ReportSink<'a> {
    out_dir: &'a Path,
    files: Vec<String>,
}

impl ReportSink<'_> {
    fn write(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        write_csv(&self.out_dir.join(name), header, rows)?;
        self.files.push(name.to_string());
        Ok(())
    }
}

/// Execute one subcommand: manifest first, then one CSV per report.
pub fn execute(
    cmd: Subcommand,
    config: &ConfigFile,
    out_dir: &Path,
) -> Result<RunOutcome, CliError> {
    std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let started = now_ms();
    let planned = planned_files(cmd, config);
    let mut manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION"),
        subcommand: cmd.name().to_string(),
        seed: config.seed,
        started_unix_ms: started,
        finished_unix_ms: None,
        config: config.clone(),
        report_files: planned,
    };
    write_manifest(out_dir, &manifest)?;

    let mut sink = ReportSink {
        out_dir,
        files: Vec::new(),
    };
    let outcome = dispatch(cmd, config, &mut sink)?;

    manifest.report_files = sink.files;
    manifest.finished_unix_ms = Some(now_ms());
    write_manifest(out_dir, &manifest)?;
    Ok(outcome)
}

fn planned_files(cmd: Subcommand, config: &ConfigFile) -> Vec<String> {
    match cmd {
        Subcommand::Modes => vec!["modes.csv".into()],
        Subcommand::Period => {
            let mut v: Vec<String> = (0..config.h_list.len())
                .map(|i| format!("period_h{i}.csv"))
                .collect();
            v.push("period_summary.csv".into());
            v.push("kuznecov.csv".into());
            v.push("kuznecov_fit.csv".into());
            v
        }
        Subcommand::Moments => vec!["moments.csv".into()],
        Subcommand::Tail => vec!["tail.csv".into(), "tail_summary.csv".into()],
        Subcommand::Concentration => vec![
            "concentration.csv".into(),
            "concentration_gaps.csv".into(),
            "concentration_rates.csv".into(),
        ],
        Subcommand::Sweep => vec!["sweep.csv".into(), "sweep_fit.csv".into()],
        Subcommand::Lq => vec!["lq.csv".into()],
        Subcommand::DetExamples => vec![
            "det_meridian.csv".into(),
            "det_equator.csv".into(),
            "det_segment.csv".into(),
            "det_kuznecov.csv".into(),
            "det_summary.csv".into(),
        ],
        Subcommand::All => {
            let mut v = Vec::new();
            for sub in ALL_SUBCOMMANDS {
                v.extend(planned_files(sub, config));
            }
            v
        }
    }
}

const ALL_SUBCOMMANDS: [Subcommand; 8] = [
    Subcommand::Modes,
    Subcommand::Period,
    Subcommand::Moments,
    Subcommand::Tail,
    Subcommand::Concentration,
    Subcommand::Sweep,
    Subcommand::Lq,
    Subcommand::DetExamples,
];

fn dispatch(
    cmd: Subcommand,
    config: &ConfigFile,
    sink: &mut ReportSink,
) -> Result<RunOutcome, CliError> {
    let exp = config.to_experiment();
    match cmd {
        Subcommand::Modes => {
            let rows = experiments::run_modes(&exp)?;
            let data: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        fmt_f64(r.h),
                        r.n_h.to_string(),
                        fmt_f64(r.weyl),
                        fmt_f64(r.ratio),
                    ]
                })
                .collect();
            sink.write("modes.csv", &["h", "n_h", "weyl", "ratio"], &data)?;
            Ok(RunOutcome::Passed)
        }
        Subcommand::Period => {
            let sub = periodlab::curves::build_submanifold(&config.submanifold, config.manifold)
                .map_err(ExperimentError::from)?;
            let mut summary = Vec::new();
            for (i, &h) in config.h_list.iter().enumerate() {
                let cluster = enumerate_cluster(config.manifold, &config.window, h)
                    .map_err(ExperimentError::from)?;
                let pv = period_vector(&cluster, &sub).map_err(ExperimentError::from)?;
                let rows: Vec<Vec<String>> = cluster
                    .modes
                    .iter()
                    .zip(&pv.components)
                    .map(|(m, c)| vec![m.label.to_string(), fmt_f64(c.re), fmt_f64(c.im)])
                    .collect();
                sink.write(
                    &format!("period_h{i}.csv"),
                    &["mode_label", "re", "im"],
                    &rows,
                )?;
                summary.push(vec![
                    fmt_f64(h),
                    cluster.dimension().to_string(),
                    fmt_f64(pv.squared_norm),
                ]);
            }
            sink.write(
                "period_summary.csv",
                &["h", "n_h", "squared_norm"],
                &summary,
            )?;
            let h_min = *config
                .h_list
                .last()
                .ok_or_else(|| CliError::Config("empty h list".into()))?;
            let cum =
                kuznecov_cumulative(config.manifold, &sub, h_min).map_err(ExperimentError::from)?;
            let rows: Vec<Vec<String>> = cum
                .iter()
                .map(|&(h, e)| vec![fmt_f64(h), fmt_f64(e), fmt_f64(h * e)])
                .collect();
            sink.write(
                "kuznecov.csv",
                &["h", "cumulative", "h_times_cumulative"],
                &rows,
            )?;
            let expected = (config.manifold.dimension() - sub.dimension()) as f64;
            match fit_kuznecov_leading(&cum, expected) {
                Ok(fit) => {
                    sink.write(
                        "kuznecov_fit.csv",
                        &["leading_coefficient", "exponent", "fitted_exponent"],
                        &[vec![
                            fmt_f64(fit.leading_coefficient),
                            fmt_f64(fit.exponent),
                            fmt_f64(fit.fitted_exponent),
                        ]],
                    )?;
                    Ok(RunOutcome::Passed)
                }
                Err(PeriodError::PoorFit { .. }) | Err(PeriodError::InsufficientData) => {
                    sink.write(
                        "kuznecov_fit.csv",
                        &["leading_coefficient", "exponent", "fitted_exponent"],
                        &[],
                    )?;
                    Ok(RunOutcome::StatisticalFailure)
                }
                Err(e) => Err(ExperimentError::from(e).into()),
            }
        }
        Subcommand::Moments => {
            let reports = experiments::run_moments(&exp)?;
            let rows: Vec<Vec<String>> = reports
                .iter()
                .map(|r| {
                    vec![
                        fmt_f64(r.h),
                        r.p.to_string(),
                        fmt_f64(r.exact),
                        fmt_f64(r.mc_mean),
                        fmt_f64(r.mc_stderr),
                        fmt_f64(r.z_score),
                    ]
                })
                .collect();
            sink.write(
                "moments.csv",
                &["h", "p", "exact", "mc_mean", "mc_stderr", "z"],
                &rows,
            )?;
            Ok(if reports.iter().all(|r| r.passed) {
                RunOutcome::Passed
            } else {
                RunOutcome::StatisticalFailure
            })
        }
        Subcommand::Tail => {
            let report = experiments::run_tail(&exp)?;
            let rows: Vec<Vec<String>> = report
                .lambda_grid
                .iter()
                .zip(&report.empirical_survival)
                .zip(&report.exact_survival)
                .map(|((l, emp), ex)| vec![fmt_f64(*l), fmt_f64(*emp), fmt_f64(*ex)])
                .collect();
            sink.write(
                "tail.csv",
                &["lambda", "empirical_survival", "exact_survival"],
                &rows,
            )?;
            sink.write(
                "tail_summary.csv",
                &["h", "samples", "ks_distance", "ks_threshold", "passed"],
                &[vec![
                    fmt_f64(report.h),
                    report.sample_count.to_string(),
                    fmt_f64(report.ks_distance),
                    fmt_f64(report.ks_threshold),
                    fmt_bool(report.passed),
                ]],
            )?;
            Ok(if report.passed {
                RunOutcome::Passed
            } else {
                RunOutcome::StatisticalFailure
            })
        }
        Subcommand::Concentration => {
            let report = experiments::run_concentration(&exp)?;
            let rows: Vec<Vec<String>> = report
                .rows
                .iter()
                .map(|r| {
                    vec![
                        fmt_f64(r.h),
                        fmt_f64(r.statistic_q),
                        fmt_f64(r.r),
                        fmt_f64(r.empirical),
                        fmt_f64(r.bound_derived),
                        fmt_f64(r.bound_alt),
                        fmt_bool(r.within_bound),
                    ]
                })
                .collect();
            sink.write(
                "concentration.csv",
                &[
                    "h",
                    "q",
                    "r",
                    "empirical",
                    "bound_derived",
                    "bound_alt",
                    "within_bound",
                ],
                &rows,
            )?;
            let gaps: Vec<Vec<String>> = report
                .gaps
                .iter()
                .map(|g| {
                    vec![
                        fmt_f64(g.h),
                        fmt_f64(g.a1_exact),
                        fmt_f64(g.mc_median),
                        fmt_f64(g.exact_median),
                        fmt_f64(g.gap_bound),
                        fmt_bool(g.gap_ok),
                    ]
                })
                .collect();
            sink.write(
                "concentration_gaps.csv",
                &[
                    "h",
                    "a1_exact",
                    "mc_median",
                    "exact_median",
                    "gap_bound",
                    "gap_ok",
                ],
                &gaps,
            )?;
            let rates: Vec<Vec<String>> = report
                .rate_fits
                .iter()
                .map(|f| {
                    vec![
                        fmt_f64(f.q),
                        fmt_f64(f.fitted_exponent),
                        fmt_f64(f.expected_exponent),
                        fmt_bool(f.asserted),
                        fmt_bool(f.passed),
                    ]
                })
                .collect();
            sink.write(
                "concentration_rates.csv",
                &[
                    "q",
                    "fitted_exponent",
                    "expected_exponent",
                    "asserted",
                    "passed",
                ],
                &rates,
            )?;
            Ok(if report.passed {
                RunOutcome::Passed
            } else {
                RunOutcome::StatisticalFailure
            })
        }
        Subcommand::Sweep => {
            let report = match experiments::run_scaling_sweep(&exp) {
                Ok(r) => r,
                Err(ExperimentError::Period(PeriodError::PoorFit { fitted, expected })) => {
                    sink.write(
                        "sweep.csv",
                        &["h", "n_h", "ns", "a1_exact", "median_exact", "mc_median"],
                        &[],
                    )?;
                    sink.write(
                        "sweep_fit.csv",
                        &["slope", "slope_stderr", "expected_slope", "passed"],
                        &[vec![
                            fmt_f64(fitted),
                            fmt_f64(f64::NAN),
                            fmt_f64(expected),
                            fmt_bool(false),
                        ]],
                    )?;
                    return Ok(RunOutcome::StatisticalFailure);
                }
                Err(e) => return Err(e.into()),
            };
            let rows: Vec<Vec<String>> = report
                .rows
                .iter()
                .map(|r| {
                    vec![
                        fmt_f64(r.h),
                        r.n_h.to_string(),
                        fmt_f64(r.ns),
                        fmt_f64(r.a1_exact),
                        fmt_f64(r.median_exact),
                        r.mc_median.map(fmt_f64).unwrap_or_default(),
                    ]
                })
                .collect();
            sink.write(
                "sweep.csv",
                &["h", "n_h", "ns", "a1_exact", "median_exact", "mc_median"],
                &rows,
            )?;
            sink.write(
                "sweep_fit.csv",
                &["slope", "slope_stderr", "expected_slope", "passed"],
                &[vec![
                    fmt_f64(report.slope),
                    fmt_f64(report.slope_stderr),
                    fmt_f64(report.expected_slope),
                    fmt_bool(report.passed),
                ]],
            )?;
            Ok(RunOutcome::Passed)
        }
        Subcommand::Lq => {
            let report = experiments::run_lq_medians(&exp)?;
            let rows: Vec<Vec<String>> = report
                .rows
                .iter()
                .map(|r| {
                    vec![
                        fmt_f64(r.h),
                        fmt_f64(r.q),
                        r.n_h.to_string(),
                        fmt_f64(r.bqh),
                        fmt_f64(r.bqh_limit),
                        fmt_f64(r.mc_mean_qth_power),
                        fmt_f64(r.mc_stderr),
                        fmt_f64(r.z_score),
                        fmt_f64(r.mc_median),
                        fmt_f64(r.median_ci_lo),
                        fmt_f64(r.median_ci_hi),
                        fmt_f64(r.upper_bracket),
                        fmt_f64(r.lower_bracket),
                        fmt_bool(r.passed),
                    ]
                })
                .collect();
            sink.write(
                "lq.csv",
                &[
                    "h",
                    "q",
                    "n_h",
                    "bqh",
                    "bqh_limit",
                    "mc_mean_q",
                    "mc_stderr",
                    "z",
                    "mc_median",
                    "median_ci_lo",
                    "median_ci_hi",
                    "upper_bracket",
                    "lower_bracket",
                    "passed",
                ],
                &rows,
            )?;
            Ok(if report.passed {
                RunOutcome::Passed
            } else {
                RunOutcome::StatisticalFailure
            })
        }
        Subcommand::DetExamples => {
            let report = experiments::run_deterministic_examples()?;
            let rows: Vec<Vec<String>> = report
                .meridian_rows
                .iter()
                .map(|r| vec![r.degree.to_string(), fmt_f64(r.h), fmt_f64(r.period)])
                .collect();
            sink.write("det_meridian.csv", &["degree", "h", "period"], &rows)?;
            let rows: Vec<Vec<String>> = report
                .equator_rows
                .iter()
                .map(|r| {
                    vec![
                        r.degree.to_string(),
                        fmt_f64(r.period),
                        fmt_f64(r.deviation_from_two),
                    ]
                })
                .collect();
            sink.write(
                "det_equator.csv",
                &["degree", "period", "deviation_from_two"],
                &rows,
            )?;
            let rows: Vec<Vec<String>> = report
                .segment_rows
                .iter()
                .map(|r| vec![r.n.to_string(), fmt_f64(r.value), fmt_f64(r.bound)])
                .collect();
            sink.write("det_segment.csv", &["n", "value", "bound"], &rows)?;
            let rows: Vec<Vec<String>> = report
                .kuznecov_tail
                .iter()
                .map(|&(h, e)| vec![fmt_f64(h), fmt_f64(e), fmt_f64(h * e)])
                .collect();
            sink.write(
                "det_kuznecov.csv",
                &["h", "cumulative", "h_times_cumulative"],
                &rows,
            )?;
            sink.write(
                "det_summary.csv",
                &[
                    "meridian_slope",
                    "meridian_ok",
                    "equator_even_ok",
                    "odd_parity_max",
                    "odd_parity_ok",
                    "segment_ok",
                    "kuznecov_limit_dev",
                    "kuznecov_ok",
                ],
                &[vec![
                    fmt_f64(report.meridian_slope),
                    fmt_bool(report.meridian_ok),
                    fmt_bool(report.equator_even_ok),
                    fmt_f64(report.odd_parity_max),
                    fmt_bool(report.odd_parity_ok),
                    fmt_bool(report.segment_ok),
                    fmt_f64(report.kuznecov_limit_dev),
                    fmt_bool(report.kuznecov_ok),
                ]],
            )?;
            Ok(if report.passed {
                RunOutcome::Passed
            } else {
                RunOutcome::StatisticalFailure
            })
        }
        Subcommand::All => {
            let mut outcome = RunOutcome::Passed;
            for sub in ALL_SUBCOMMANDS {
                if dispatch(sub, config, sink)? == RunOutcome::StatisticalFailure {
                    outcome = RunOutcome::StatisticalFailure;
                }
            }
            Ok(outcome)
        }
    }
}

pub const USAGE: &str = "\
periodlab - period statistics of random Laplace eigenfunction clusters

USAGE:
  periodlab <SUBCOMMAND> --config PATH [OPTIONS]

SUBCOMMANDS:
  modes          cluster sizes vs the Weyl prediction
  period         period vectors, N(S)_h, Kuznecov cumulative sums
  moments        Monte Carlo moments of F1 vs exact values
  tail           empirical survival function vs the exact law (KS test)
  concentration  exceedance vs derived concentration bounds
  sweep          log-log scaling of the exact first moment
  lq             restricted L^q means and medians vs exact B_qh
  det-examples   deterministic saturating examples
  all            everything above with one config

OPTIONS:
  --config PATH      JSON config file (required)
  --h LIST           override h_list (comma-separated, strictly decreasing)
  --D VALUE          override window width constant
  --p LIST           override p_list (comma-separated integers)
  --q LIST           override q_list (comma-separated reals >= 2)
  --samples N        override Monte Carlo sample count
  --seed N           override RNG seed
  --workers N        override worker count
  --out DIR          output directory (default: $PERIODLAB_OUT or ./out)
  --negative-control corrupt the exact side; statistical tests must fail

CONFIG SCHEMA (JSON, schema_version = 1):
  {
    \"schema_version\": 1,
    \"manifold\": \"flat_torus2\" | \"flat_torus3\" | \"round_sphere2\",
    \"window\": { \"lower\": 1.0, \"width_constant\": 6.0 },
    \"h_list\": [0.1, 0.05],
    \"submanifold\": { \"kind\": \"torus_line\", \"base\": [0,0], \"winding\": [1,0] }
                   | { \"kind\": \"torus_line\", \"base\": [...], \"direction\": [...], \"length\": L }
                   | { \"kind\": \"torus_coordinate_subtorus\", \"fixed\": [[2, 0.0]] }
                   | { \"kind\": \"sphere_great_arc\", \"frame\": [[...],[...]], \"length\": L }
                   | { \"kind\": \"sphere_latitude_circle\", \"colatitude\": 1.5707963 },
    \"p_list\": [1,2,3], \"q_list\": [2,4,6],
    \"samples\": 100000, \"seed\": 7, \"workers\": 1,
    \"negative_control\": false
  }

EXIT CODES: 0 success, 1 usage/config error, 2 statistical assertion failed
";

#[cfg(test)]
mod tests {
    use super::*;
    use std::fmt::Write as _;

    const MINIMAL: &str = r#"{
        "schema_version": 1,
        "manifold": "flat_torus2",
        "h_list": [0.25],
        "submanifold": { "kind": "torus_line", "base": [0,0], "winding": [1,0] },
        "samples": 500
    }"#;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let c = ConfigFile::from_json(MINIMAL).unwrap();
        assert_eq!(c.manifold, Manifold::FlatTorus2);
        assert_eq!(c.window.width_constant, 6.0);
        assert_eq!(c.p_list, vec![1, 2, 3]);
        assert_eq!(c.seed, 7);
        assert!(!c.negative_control);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = MINIMAL.replace("\"samples\": 500", "\"samples\": 500, \"smaples\": 2");
        match ConfigFile::from_json(&bad) {
            Err(CliError::Config(msg)) => assert!(msg.contains("smaples"), "{msg}"),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn wrong_schema_version_is_rejected() {
        let bad = MINIMAL.replace("\"schema_version\": 1", "\"schema_version\": 2");
        assert!(matches!(
            ConfigFile::from_json(&bad),
            Err(CliError::Config(_))
        ));
    }

    #[test]
    fn float_format_round_trips() {
        for x in [
            0.1,
            -3.0,
            1.0 / 3.0,
            2.0 * std::f64::consts::PI,
            f64::MIN_POSITIVE,
            1.7976931348623157e308,
        ] {
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{s}");
            assert_eq!(fmt_f64(back), s);
        }
    }

    #[test]
    fn empty_report_gives_header_only_csv() {
        let dir = std::env::temp_dir().join("periodlab_csv_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("empty.csv");
        write_csv(&path, &["a", "b"], &[]).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "a,b\n");
        write_csv(&path, &["a", "b"], &[vec!["1".into(), fmt_f64(0.5)]]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 2);
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn reserialized_csv_is_byte_identical() {
        // Parse float cells back and re-format: the bytes must not change.
        let rows = vec![
            vec![fmt_f64(0.1), fmt_f64(1.0 / 7.0)],
            vec![fmt_f64(-2.5e-300), fmt_f64(6.02e23)],
        ];
        let dir = std::env::temp_dir().join("periodlab_csv_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("roundtrip.csv");
        write_csv(&path, &["x", "y"], &rows).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut rebuilt = String::from("x,y\n");
        for line in text.lines().skip(1) {
            let cells: Vec<String> = line
                .split(',')
                .map(|c| fmt_f64(c.parse::<f64>().unwrap()))
                .collect();
            let _ = writeln!(rebuilt, "{}", cells.join(","));
        }
        assert_eq!(rebuilt, text);
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn subcommands_parse() {
        for name in [
            "modes",
            "period",
            "moments",
            "tail",
            "concentration",
            "sweep",
            "lq",
            "det-examples",
            "all",
        ] {
            assert!(Subcommand::parse(name).is_some(), "{name}");
        }
        assert!(Subcommand::parse("bogus").is_none());
    }
}
