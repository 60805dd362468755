//! Monte Carlo experiment drivers: moment comparisons, tail laws,
//! concentration exceedance, scaling sweeps, restricted-norm medians, and the
//! deterministic saturating examples.
//!
//! Every driver is a pure function of (config, seed): samples are addressed
//! by counter-based substreams and reductions run in sample-index order, so
//! the worker count never changes a single output bit. Negative controls
//! corrupt the exact side of each comparison and must flip the pass flags.

use num_complex::Complex64;
use thiserror::Error;

use crate::curves::{build_submanifold, quadrature, CurveError, Submanifold, SubmanifoldSpec};
use crate::ensemble::{period_rv, sample_coefficients, CurveFieldEvaluator, EnsembleError};
use crate::exactstats::{
    bqh_exact_uniform_profile, bqh_limit_uniform_profile, concentration_bound_period,
    g_rate_exponent, mean_median_gap_bound, median_exact, moment_exact, survival_exact, ExactLaw,
    StatsError,
};
use crate::legendre;
use crate::periods::{fast_law, kuznecov_cumulative, period_vector, PeriodError, PeriodVector};
use crate::spectral::{enumerate_cluster, Cluster, Manifold, SpectralError, SpectralWindow};
use crate::stats::{
    ks_distance, ks_threshold, linear_fit, mean_and_stderr, median_with_ci99, neumaier_sum,
    wilson_interval,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Period(#[from] PeriodError),
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

/// One experiment definition: geometry, window, scales, orders, and the
/// sampling contract.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub manifold: Manifold,
    pub window: SpectralWindow,
    /// Strictly decreasing semiclassical scales.
    pub h_list: Vec<f64>,
    pub submanifold: SubmanifoldSpec,
    pub p_list: Vec<u32>,
    pub q_list: Vec<f64>,
    /// Monte Carlo draws per (h, statistic).
    pub samples: usize,
    pub seed: u64,
    pub workers: usize,
    /// Corrupt the exact side of every comparison; all pass flags must flip.
    pub negative_control: bool,
}

impl ExperimentConfig {
    /// The T² baseline: standard window, coordinate geodesic.
    pub fn torus2_standard() -> Self {
        ExperimentConfig {
            manifold: Manifold::FlatTorus2,
            window: SpectralWindow::standard(),
            h_list: vec![0.1],
            submanifold: SubmanifoldSpec::coordinate_geodesic(2, 0),
            p_list: vec![1, 2, 3],
            q_list: vec![2.0, 4.0, 6.0],
            samples: 100_000,
            seed: 7,
            workers: 1,
            negative_control: false,
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.samples < 100 {
            return Err(ExperimentError::InvalidConfig(format!(
                "sample count {} < 100",
                self.samples
            )));
        }
        if self.h_list.is_empty() {
            return Err(ExperimentError::InvalidConfig("empty h list".into()));
        }
        if !self.h_list.windows(2).all(|w| w[0] > w[1]) {
            return Err(ExperimentError::InvalidConfig(
                "h list must be strictly decreasing".into(),
            ));
        }
        if self.h_list.iter().any(|&h| !(h > 0.0 && h <= 1.0)) {
            return Err(ExperimentError::InvalidConfig(
                "h values must lie in (0, 1]".into(),
            ));
        }
        if self.workers == 0 {
            return Err(ExperimentError::InvalidConfig("workers must be ≥ 1".into()));
        }
        if self.q_list.iter().any(|&q| q < 2.0) {
            return Err(ExperimentError::InvalidConfig(
                "q values must be ≥ 2".into(),
            ));
        }
        Ok(())
    }
}

/// Evaluate `f` at sample indices 0..m, fanned out over contiguous chunks.
/// Results land in index order, so the reduction is worker-count invariant.
fn par_map_samples<T, F>(m: usize, workers: usize, f: F) -> Vec<T>
where
    T: Send + Clone + Default,
    F: Fn(u64) -> T + Sync,
{
    let workers = workers.max(1).min(m.max(1));
    if workers == 1 {
        return (0..m as u64).map(f).collect();
    }
    let mut out = vec![T::default(); m];
    let chunk = m.div_ceil(workers);
    std::thread::scope(|scope| {
        for (w, slice) in out.chunks_mut(chunk).enumerate() {
            let f = &f;
            scope.spawn(move || {
                let start = w * chunk;
                for (i, slot) in slice.iter_mut().enumerate() {
                    *slot = f((start + i) as u64);
                }
            });
        }
    });
    out
}

struct Setup {
    cluster: Cluster,
    sub: Submanifold,
    pv: PeriodVector,
    law: ExactLaw,
}

fn setup_for(config: &ExperimentConfig, h: f64) -> Result<Setup, ExperimentError> {
    let cluster = enumerate_cluster(config.manifold, &config.window, h)?;
    let sub = build_submanifold(&config.submanifold, config.manifold)?;
    let pv = period_vector(&cluster, &sub)?;
    let law = ExactLaw::new(cluster.dimension(), pv.squared_norm)?;
    Ok(Setup {
        cluster,
        sub,
        pv,
        law,
    })
}

/// Corruption applied by negative controls: N(S)_h doubled.
fn corrupt(law: &ExactLaw) -> ExactLaw {
    ExactLaw::new(law.dimension(), 2.0 * law.ns()).expect("valid corrupted law")
}

// ---------------------------------------------------------------------------
// Moments
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    pub h: f64,
    pub p: u32,
    pub exact: f64,
    pub mc_mean: f64,
    pub mc_stderr: f64,
    pub sample_count: usize,
    pub z_score: f64,
    pub passed: bool,
}

/// MC mean of F₁^p against the exact moment, per (h, p), at 3σ.
pub fn run_moments(config: &ExperimentConfig) -> Result<Vec<MomentReport>, ExperimentError> {
    config.validate()?;
    let mut reports = Vec::new();
    for &h in &config.h_list {
        let setup = setup_for(config, h)?;
        let n = setup.cluster.dimension();
        let f1: Vec<f64> = par_map_samples(config.samples, config.workers, |i| {
            period_rv(&sample_coefficients(n, config.seed, i), &setup.pv)
        });
        for &p in &config.p_list {
            if p == 0 {
                reports.push(MomentReport {
                    h,
                    p,
                    exact: 1.0,
                    mc_mean: 1.0,
                    mc_stderr: 0.0,
                    sample_count: config.samples,
                    z_score: 0.0,
                    passed: true,
                });
                continue;
            }
            let law = if config.negative_control {
                corrupt(&setup.law)
            } else {
                setup.law
            };
            let exact = moment_exact(p, &law);
            let powered: Vec<f64> = f1.iter().map(|v| v.powi(p as i32)).collect();
            let (mc_mean, mc_stderr) = mean_and_stderr(&powered);
            let z_score = if mc_stderr > 0.0 {
                (mc_mean - exact) / mc_stderr
            } else {
                0.0
            };
            reports.push(MomentReport {
                h,
                p,
                exact,
                mc_mean,
                mc_stderr,
                sample_count: config.samples,
                z_score,
                passed: z_score.abs() <= 3.0,
            });
        }
    }
    Ok(reports)
}

// ---------------------------------------------------------------------------
// Tail law
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct TailReport {
    pub h: f64,
    pub sample_count: usize,
    pub lambda_grid: Vec<f64>,
    pub empirical_survival: Vec<f64>,
    pub exact_survival: Vec<f64>,
    pub ks_distance: f64,
    pub ks_threshold: f64,
    pub passed: bool,
}

/// Empirical survival of F₁ against (1 − λ²/NS)^{N−1} at the first h.
pub fn run_tail(config: &ExperimentConfig) -> Result<TailReport, ExperimentError> {
    config.validate()?;
    let h = config.h_list[0];
    let setup = setup_for(config, h)?;
    let n = setup.cluster.dimension();
    let m = config.samples;
    let f1: Vec<f64> = par_map_samples(m, config.workers, |i| {
        period_rv(&sample_coefficients(n, config.seed, i), &setup.pv)
    });
    let law = if config.negative_control {
        corrupt(&setup.law)
    } else {
        setup.law
    };
    let cap = law.ns().sqrt();
    let lambda_grid: Vec<f64> = (0..50).map(|i| cap * i as f64 / 49.0).collect();
    let empirical_survival: Vec<f64> = lambda_grid
        .iter()
        .map(|&lam| f1.iter().filter(|&&v| v > lam).count() as f64 / m as f64)
        .collect();
    let exact_survival: Vec<f64> = lambda_grid
        .iter()
        .map(|&lam| survival_exact(lam, &law))
        .collect();
    let d = ks_distance(&f1, |x| 1.0 - survival_exact(x.max(0.0), &law));
    let threshold = ks_threshold(m);
    Ok(TailReport {
        h,
        sample_count: m,
        lambda_grid,
        empirical_survival,
        exact_survival,
        ks_distance: d,
        ks_threshold: threshold,
        passed: d <= threshold,
    })
}

// ---------------------------------------------------------------------------
// Concentration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationRow {
    pub h: f64,
    /// 1 for the period variable F₁; otherwise the L^q exponent.
    pub statistic_q: f64,
    pub r: f64,
    pub empirical: f64,
    pub bound_derived: f64,
    pub bound_alt: f64,
    /// Wilson 99% lower bound of the true exceedance stays below the bound.
    pub within_bound: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapRow {
    pub h: f64,
    pub a1_exact: f64,
    pub mc_median: f64,
    pub exact_median: f64,
    pub gap_bound: f64,
    pub gap_ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LqRateFit {
    pub q: f64,
    pub fitted_exponent: f64,
    pub expected_exponent: f64,
    /// Only q = 2 carries the contractual ±0.2 assertion.
    pub asserted: bool,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationReport {
    pub sample_count: usize,
    pub rows: Vec<ConcentrationRow>,
    pub gaps: Vec<GapRow>,
    pub rate_fits: Vec<LqRateFit>,
    pub passed: bool,
}

fn exceedance_rows(
    h: f64,
    statistic_q: f64,
    values: &[f64],
    r_grid: &[f64],
    derived: &crate::exactstats::DeviationBound,
    alt: &crate::exactstats::DeviationBound,
) -> Vec<ConcentrationRow> {
    let m = values.len();
    let (median, _, _) = median_with_ci99(values);
    r_grid
        .iter()
        .map(|&r| {
            let count = values.iter().filter(|&&v| (v - median).abs() > r).count();
            let empirical = count as f64 / m as f64;
            let bound_derived = derived.evaluate(r).min(1.0);
            let (wilson_lo, _) = wilson_interval(count, m, 2.576);
            ConcentrationRow {
                h,
                statistic_q,
                r,
                empirical,
                bound_derived,
                bound_alt: alt.evaluate(r).min(1.0),
                within_bound: count == 0 || wilson_lo <= bound_derived,
            }
        })
        .collect()
}

/// Exceedance of |X − sample median| versus the derived bound for X = F₁ and
/// X = ‖u‖_{L^q(γ)}, plus the mean–median gap inequality and the L^q rate
/// fit across the h list.
pub fn run_concentration(
    config: &ExperimentConfig,
) -> Result<ConcentrationReport, ExperimentError> {
    config.validate()?;
    let m = config.samples;
    let mut rows = Vec::new();
    let mut gaps = Vec::new();
    let mut lq_rates: Vec<(f64, Vec<(f64, f64)>)> =
        config.q_list.iter().map(|&q| (q, Vec::new())).collect();

    for &h in &config.h_list {
        let setup = setup_for(config, h)?;
        let n = setup.cluster.dimension();
        let law = if config.negative_control {
            // Shrink NS: the bound tightens fourfold and must now fail.
            ExactLaw::new(setup.law.dimension(), setup.law.ns() / 4.0)?
        } else {
            setup.law
        };

        // F₁ exceedance.
        let f1: Vec<f64> = par_map_samples(m, config.workers, |i| {
            period_rv(&sample_coefficients(n, config.seed, i), &setup.pv)
        });
        let bounds = concentration_bound_period(1, &law);
        let cap = law.ns().sqrt();
        let r_grid: Vec<f64> = (1..=20).map(|i| 1.05 * cap * i as f64 / 20.0).collect();
        rows.extend(exceedance_rows(
            h,
            1.0,
            &f1,
            &r_grid,
            &bounds.derived,
            &bounds.complex_dim_variant,
        ));

        // Mean–median gap (p = 1): |A_1 − MC median| ≤ (π/2)√(2NS/(N−2)).
        let (mc_median, _, _) = median_with_ci99(&f1);
        let a1 = moment_exact(1, &law);
        let gap_bound = mean_median_gap_bound(1, &law)?;
        gaps.push(GapRow {
            h,
            a1_exact: a1,
            mc_median,
            exact_median: median_exact(&law),
            gap_bound,
            gap_ok: (a1 - mc_median).abs() <= gap_bound,
        });

        // L^q exceedance with the exact/interpolated Lipschitz bound.
        let rule = quadrature(&setup.sub, setup.cluster.max_frequency());
        let evaluator = CurveFieldEvaluator::new(&setup.cluster, &setup.sub, &rule)?;
        let qs = config.q_list.clone();
        let norms: Vec<Vec<f64>> = par_map_samples(m, config.workers, |i| {
            let z = sample_coefficients(n, config.seed.wrapping_add(1), i);
            evaluator.lq_norms(&z.components, &qs)
        });
        for (qi, &q) in qs.iter().enumerate() {
            let values: Vec<f64> = norms.iter().map(|row| row[qi]).collect();
            let lip = {
                let raw = evaluator.lq_lipschitz_bound(q);
                if config.negative_control {
                    raw / 2.0
                } else {
                    raw
                }
            };
            let rate = (2.0 * n as f64 - 2.0) / (2.0 * lip * lip);
            let derived = crate::exactstats::DeviationBound {
                prefactor: 2.0,
                rate,
            };
            let width = 1.0 / rate.sqrt();
            let r_grid: Vec<f64> = (1..=20).map(|i| 6.0 * width * i as f64 / 20.0).collect();
            rows.extend(exceedance_rows(h, q, &values, &r_grid, &derived, &derived));
            lq_rates[qi].1.push((h, rate));
        }
    }

    // Rate fit: log rate vs log h against G(h).
    let mut rate_fits = Vec::new();
    for (q, pts) in lq_rates {
        if pts.len() >= 3 {
            let hs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
            let rs: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
            let (slope, _, _) = linear_fit(&hs, &rs);
            let expected = g_rate_exponent(q)?;
            let asserted = (q - 2.0).abs() < 1e-12;
            rate_fits.push(LqRateFit {
                q,
                fitted_exponent: slope,
                expected_exponent: expected,
                asserted,
                passed: (slope - expected).abs() <= 0.2,
            });
        }
    }

    let passed = rows.iter().all(|r| r.within_bound)
        && gaps.iter().all(|g| g.gap_ok)
        && rate_fits.iter().filter(|f| f.asserted).all(|f| f.passed);
    Ok(ConcentrationReport {
        sample_count: m,
        rows,
        gaps,
        rate_fits,
        passed,
    })
}

// ---------------------------------------------------------------------------
// Scaling sweep
// ---------------------------------------------------------------------------

/// MC medians are computed only below this cluster dimension; above it the
/// exact formulas stand alone (the T³ sweep reaches N_h ~ 8·10⁶).
const MC_DIMENSION_LIMIT: usize = 200_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRow {
    pub h: f64,
    pub n_h: u64,
    pub ns: f64,
    pub a1_exact: f64,
    pub median_exact: f64,
    pub mc_median: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    pub rows: Vec<ScalingRow>,
    pub slope: f64,
    pub slope_stderr: f64,
    pub expected_slope: f64,
    pub passed: bool,
}

/// Exact A_{1,h} across the h list with the log-log slope against d/2.
pub fn run_scaling_sweep(config: &ExperimentConfig) -> Result<ScalingReport, ExperimentError> {
    config.validate()?;
    if config.h_list.len() < 4 {
        return Err(ExperimentError::InvalidConfig(
            "scaling sweep needs at least 4 scales".into(),
        ));
    }
    let sub = build_submanifold(&config.submanifold, config.manifold)?;
    let mut rows = Vec::new();
    for &h in &config.h_list {
        let (n_h, ns) = match fast_law(config.manifold, &config.window, h, &sub)? {
            Some(pair) => pair,
            None => {
                let setup = setup_for(config, h)?;
                (setup.cluster.dimension() as u64, setup.pv.squared_norm)
            }
        };
        let law = ExactLaw::new(n_h as usize, ns)?;
        let mc_median = if n_h as usize <= MC_DIMENSION_LIMIT && config.samples >= 100 {
            let setup = setup_for(config, h)?;
            let n = setup.cluster.dimension();
            let f1: Vec<f64> = par_map_samples(config.samples, config.workers, |i| {
                period_rv(&sample_coefficients(n, config.seed, i), &setup.pv)
            });
            let (median, _, _) = median_with_ci99(&f1);
            Some(median)
        } else {
            None
        };
        rows.push(ScalingRow {
            h,
            n_h,
            ns,
            a1_exact: moment_exact(1, &law),
            median_exact: median_exact(&law),
            mc_median,
        });
    }
    let hs: Vec<f64> = rows.iter().map(|r| r.h.ln()).collect();
    let values: Vec<f64> = rows.iter().map(|r| r.a1_exact.ln()).collect();
    let (slope, _, slope_stderr) = linear_fit(&hs, &values);
    let expected_slope = if config.negative_control {
        sub.dimension() as f64 / 2.0 + 1.0
    } else {
        sub.dimension() as f64 / 2.0
    };
    let excluded_by = ((slope - expected_slope).abs() - 2.0 * slope_stderr).max(0.0);
    if excluded_by > 0.15 {
        return Err(ExperimentError::Period(PeriodError::PoorFit {
            fitted: slope,
            expected: expected_slope,
        }));
    }
    Ok(ScalingReport {
        rows,
        slope,
        slope_stderr,
        expected_slope,
        passed: true,
    })
}

// ---------------------------------------------------------------------------
// Restricted L^q medians
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct LqRow {
    pub h: f64,
    pub q: f64,
    pub n_h: u64,
    /// Exact B_{q,h}.
    pub bqh: f64,
    /// Sharp h → 0 limit of B_{q,h}.
    pub bqh_limit: f64,
    pub mc_mean_qth_power: f64,
    pub mc_stderr: f64,
    pub z_score: f64,
    pub mc_median: f64,
    pub median_ci_lo: f64,
    pub median_ci_hi: f64,
    /// Chebyshev bracket: median ≤ 2^{1/q} B_{q,h} (+ CI allowance).
    pub upper_bracket: f64,
    pub lower_bracket: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LqReport {
    pub sample_count: usize,
    pub rows: Vec<LqRow>,
    pub passed: bool,
}

/// Medians and q-th-power means of ‖u‖_{L^q(γ)} against the exact B_{q,h}
/// and the Chebyshev bracket, across the h and q lists.
pub fn run_lq_medians(config: &ExperimentConfig) -> Result<LqReport, ExperimentError> {
    config.validate()?;
    let m = config.samples;
    let mut rows = Vec::new();
    for &h in &config.h_list {
        let cluster = enumerate_cluster(config.manifold, &config.window, h)?;
        let sub = build_submanifold(&config.submanifold, config.manifold)?;
        let rule = quadrature(&sub, cluster.max_frequency());
        let evaluator = CurveFieldEvaluator::new(&cluster, &sub, &rule)?;
        let n = cluster.dimension();
        let qs = config.q_list.clone();
        let norms: Vec<Vec<f64>> = par_map_samples(m, config.workers, |i| {
            let z = sample_coefficients(n, config.seed, i);
            evaluator.lq_norms(&z.components, &qs)
        });
        for (qi, &q) in qs.iter().enumerate() {
            let corruption = if config.negative_control { 2.0 } else { 1.0 };
            let bqh = corruption
                * bqh_exact_uniform_profile(q, n, sub.volume(), config.manifold.volume())?;
            let limit =
                corruption * bqh_limit_uniform_profile(q, sub.volume(), config.manifold.volume())?;
            let values: Vec<f64> = norms.iter().map(|row| row[qi]).collect();
            let powered: Vec<f64> = values.iter().map(|v| v.powf(q)).collect();
            let (mc_mean, mc_stderr) = mean_and_stderr(&powered);
            let exact_qth = bqh.powf(q);
            let z_score = if mc_stderr > 0.0 {
                (mc_mean - exact_qth) / mc_stderr
            } else {
                0.0
            };
            let (mc_median, ci_lo, ci_hi) = median_with_ci99(&values);
            let ci_half = 0.5 * (ci_hi - ci_lo);
            let upper_bracket = 2f64.powf(1.0 / q) * bqh + ci_half;
            let lower_bracket = 0.5 * limit;
            let passed =
                z_score.abs() <= 3.0 && mc_median <= upper_bracket && mc_median >= lower_bracket;
            rows.push(LqRow {
                h,
                q,
                n_h: n as u64,
                bqh,
                bqh_limit: limit,
                mc_mean_qth_power: mc_mean,
                mc_stderr,
                z_score,
                mc_median,
                median_ci_lo: ci_lo,
                median_ci_hi: ci_hi,
                upper_bracket,
                lower_bracket,
                passed,
            });
        }
    }
    let passed = rows.iter().all(|r| r.passed);
    Ok(LqReport {
        sample_count: m,
        rows,
        passed,
    })
}

// ---------------------------------------------------------------------------
// Deterministic saturating examples
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct MeridianRow {
    pub degree: u32,
    pub h: f64,
    pub period: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquatorRow {
    pub degree: u32,
    pub period: f64,
    pub deviation_from_two: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentRow {
    pub n: u32,
    pub value: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeterministicReport {
    pub meridian_rows: Vec<MeridianRow>,
    pub meridian_slope: f64,
    pub meridian_ok: bool,
    pub equator_rows: Vec<EquatorRow>,
    pub equator_even_ok: bool,
    pub odd_parity_max: f64,
    pub odd_parity_ok: bool,
    pub segment_rows: Vec<SegmentRow>,
    pub segment_ok: bool,
    pub kuznecov_tail: Vec<(f64, f64)>,
    pub kuznecov_limit_dev: f64,
    pub kuznecov_ok: bool,
    pub passed: bool,
}

/// Zonal-harmonic period of degree ℓ over a curve, by quadrature.
fn zonal_period(degree: u32, sub: &Submanifold) -> f64 {
    let max_freq = ((degree as f64) * (degree as f64 + 1.0)).sqrt();
    let rule = quadrature(sub, max_freq);
    let mut terms = Vec::with_capacity(rule.len());
    for (node, &w) in rule.nodes.iter().zip(&rule.weights) {
        let p = sub.point_at(*node);
        let theta = match p {
            crate::spectral::Point::Sphere { colatitude, .. } => colatitude,
            _ => unreachable!("zonal periods are sphere-only"),
        };
        terms.push(w * legendre::normalized_single(degree as usize, 0, theta.cos()));
    }
    neumaier_sum(&terms).abs()
}

/// The fixed deterministic suite: zonal meridian decay, equator saturation,
/// torus segment decay, and the Kuznecov cumulative limit.
pub fn run_deterministic_examples() -> Result<DeterministicReport, ExperimentError> {
    // (i) |∫ Z_ℓ| over a meridian arc through the pole: slope 1/2 in
    // h = (ℓ(ℓ+1))^{-1/2}.
    let arc = build_submanifold(&SubmanifoldSpec::meridian_arc(0.5), Manifold::RoundSphere2)?;
    let mut meridian_rows = Vec::new();
    for degree in (40..=400).step_by(24) {
        let h = 1.0 / ((degree as f64) * (degree as f64 + 1.0)).sqrt();
        meridian_rows.push(MeridianRow {
            degree,
            h,
            period: zonal_period(degree, &arc),
        });
    }
    let xs: Vec<f64> = meridian_rows.iter().map(|r| r.h.ln()).collect();
    let ys: Vec<f64> = meridian_rows.iter().map(|r| r.period.ln()).collect();
    let (meridian_slope, _, _) = linear_fit(&xs, &ys);
    let meridian_ok = (meridian_slope - 0.5).abs() <= 0.15;

    // (ii) Equator: even-ℓ periods approach 2; odd-ℓ vanish by parity.
    let equator = build_submanifold(&SubmanifoldSpec::equator(), Manifold::RoundSphere2)?;
    let mut equator_rows = Vec::new();
    for degree in [100u32, 150, 200, 300, 400] {
        let period = zonal_period(degree, &equator);
        equator_rows.push(EquatorRow {
            degree,
            period,
            deviation_from_two: (period - 2.0).abs(),
        });
    }
    let equator_even_ok = equator_rows.iter().all(|r| r.deviation_from_two < 0.1);
    let odd_parity_max = [101u32, 201, 301]
        .iter()
        .map(|&l| zonal_period(l, &equator))
        .fold(0.0f64, f64::max);
    let odd_parity_ok = odd_parity_max < 1e-10;

    // (iii) Torus segment of a vertical geodesic: |∫₀^L e^{int} dt| ≤ 2/n.
    // Computed through the period machinery on a single-mode cluster and
    // checked against the closed form (e^{inL} − 1)/(in).
    let segment = build_submanifold(
        &SubmanifoldSpec::TorusLine {
            base: vec![0.0, 0.0],
            winding: None,
            direction: Some(vec![0.0, 1.0]),
            length: Some(1.0),
        },
        Manifold::FlatTorus2,
    )?;
    let mut segment_rows = Vec::new();
    let mut segment_ok = true;
    for n in [4u32, 10, 25, 60] {
        let cluster = Cluster {
            manifold: Manifold::FlatTorus2,
            window: SpectralWindow::standard(),
            h: 1.0,
            modes: vec![crate::spectral::EigenMode::new(
                crate::spectral::ModeLabel::Torus2([0, n as i64]),
            )],
        };
        let pv = period_vector(&cluster, &segment)?;
        let value = pv.components[0].norm() * Manifold::FlatTorus2.volume().sqrt();
        let closed_form = (Complex64::from_polar(1.0, n as f64) - 1.0).norm() / n as f64;
        if (value - closed_form).abs() > 1e-12 {
            segment_ok = false;
        }
        let bound = 2.0 / n as f64;
        if value > bound {
            segment_ok = false;
        }
        segment_rows.push(SegmentRow { n, value, bound });
    }

    // (iv) h·E(h, γ) → 2 on T² for the coordinate geodesic.
    let geodesic = build_submanifold(
        &SubmanifoldSpec::coordinate_geodesic(2, 0),
        Manifold::FlatTorus2,
    )?;
    let kuznecov_tail = kuznecov_cumulative(Manifold::FlatTorus2, &geodesic, 1.0 / 500.0)?;
    let (h_last, e_last) = *kuznecov_tail.last().expect("nonempty grid");
    let kuznecov_limit_dev = (h_last * e_last - 2.0).abs() / 2.0;
    let kuznecov_ok = kuznecov_limit_dev <= 0.02;

    let passed = meridian_ok && equator_even_ok && odd_parity_ok && segment_ok && kuznecov_ok;
    Ok(DeterministicReport {
        meridian_rows,
        meridian_slope,
        meridian_ok,
        equator_rows,
        equator_even_ok,
        odd_parity_max,
        odd_parity_ok,
        segment_rows,
        segment_ok,
        kuznecov_tail,
        kuznecov_limit_dev,
        kuznecov_ok,
        passed,
    })
}

// ---------------------------------------------------------------------------
// Counting report (modes subcommand)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct ModesRow {
    pub h: f64,
    pub n_h: u64,
    pub weyl: f64,
    pub ratio: f64,
}

/// N_h against the Weyl prediction for each h.
pub fn run_modes(config: &ExperimentConfig) -> Result<Vec<ModesRow>, ExperimentError> {
    config.validate()?;
    let mut rows = Vec::new();
    for &h in &config.h_list {
        let n_h = crate::spectral::count_cluster(config.manifold, &config.window, h)?;
        let weyl = crate::spectral::weyl_prediction(config.manifold, &config.window, h);
        rows.push(ModesRow {
            h,
            n_h,
            weyl,
            ratio: n_h as f64 / weyl,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick_config() -> ExperimentConfig {
        ExperimentConfig {
            samples: 2000,
            h_list: vec![0.25],
            ..ExperimentConfig::torus2_standard()
        }
    }

    #[test]
    fn config_validation() {
        let mut c = quick_config();
        c.samples = 50;
        assert!(c.validate().is_err());
        let mut c = quick_config();
        c.h_list = vec![0.1, 0.2];
        assert!(c.validate().is_err());
        let mut c = quick_config();
        c.workers = 0;
        assert!(c.validate().is_err());
        assert!(quick_config().validate().is_ok());
    }

    #[test]
    fn par_map_is_worker_invariant() {
        let f = |i: u64| (i as f64 * 0.37).sin();
        let one = par_map_samples(1000, 1, f);
        let many = par_map_samples(1000, 7, f);
        for (a, b) in one.iter().zip(&many) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn moments_pass_and_p0_is_degenerate() {
        let mut config = quick_config();
        config.p_list = vec![0, 1, 2];
        let reports = run_moments(&config).unwrap();
        assert_eq!(reports.len(), 3);
        assert!(reports.iter().all(|r| r.passed), "{reports:?}");
        let p0 = &reports[0];
        assert_eq!((p0.exact, p0.mc_mean, p0.z_score), (1.0, 1.0, 0.0));
    }

    #[test]
    fn moments_negative_control_fails() {
        let mut config = quick_config();
        config.samples = 20_000;
        config.p_list = vec![2];
        config.negative_control = true;
        let reports = run_moments(&config).unwrap();
        assert!(reports.iter().all(|r| !r.passed), "{reports:?}");
    }

    #[test]
    fn moments_are_worker_count_invariant() {
        let mut a = quick_config();
        a.workers = 1;
        let mut b = quick_config();
        b.workers = 8;
        let ra = run_moments(&a).unwrap();
        let rb = run_moments(&b).unwrap();
        assert_eq!(ra, rb);
    }

    #[test]
    fn tail_smoke_and_negative_control() {
        let mut config = quick_config();
        config.samples = 5000;
        let report = run_tail(&config).unwrap();
        assert!(
            report.passed,
            "KS {} > {}",
            report.ks_distance, report.ks_threshold
        );
        assert_eq!(report.lambda_grid.len(), 50);
        // Threshold formula at the smoke scale.
        let mut smoke = quick_config();
        smoke.samples = 100;
        let r = run_tail(&smoke).unwrap();
        assert!((r.ks_threshold - 0.163).abs() < 1e-12);
        // Corrupted NS must be detected.
        config.negative_control = true;
        let bad = run_tail(&config).unwrap();
        assert!(
            !bad.passed,
            "negative control passed: KS {}",
            bad.ks_distance
        );
    }

    #[test]
    fn concentration_smoke() {
        let mut config = quick_config();
        config.samples = 4000;
        config.h_list = vec![0.1, 0.05, 0.025];
        config.q_list = vec![2.0];
        let report = run_concentration(&config).unwrap();
        assert!(report.passed, "{:?}", report.rate_fits);
        // Large r has zero exceedance.
        let max_r_row = report.rows.iter().rfind(|r| r.statistic_q == 1.0).unwrap();
        assert_eq!(max_r_row.empirical, 0.0);
        let fit = report.rate_fits.iter().find(|f| f.asserted).unwrap();
        assert!((fit.fitted_exponent - fit.expected_exponent).abs() <= 0.2);
    }

    #[test]
    fn concentration_negative_control_fails() {
        let mut config = quick_config();
        config.samples = 4000;
        config.q_list = vec![2.0];
        config.negative_control = true;
        let report = run_concentration(&config).unwrap();
        assert!(!report.passed);
    }

    #[test]
    fn scaling_sweep_torus2() {
        let mut config = quick_config();
        config.samples = 2000;
        config.h_list = vec![1.0 / 20.0, 1.0 / 40.0, 1.0 / 80.0, 1.0 / 160.0, 1.0 / 320.0];
        let report = run_scaling_sweep(&config).unwrap();
        assert!((report.slope - 0.5).abs() <= 0.1, "slope {}", report.slope);
        assert!(report.rows.iter().all(|r| r.mc_median.is_some()));
        // MC medians should track the exact median.
        for row in &report.rows {
            let mc = row.mc_median.unwrap();
            assert!(
                (mc - row.median_exact).abs() / row.median_exact < 0.15,
                "h={}: mc {} vs exact {}",
                row.h,
                mc,
                row.median_exact
            );
        }
    }

    #[test]
    fn scaling_sweep_negative_control_reports_poor_fit() {
        let mut config = quick_config();
        config.samples = 100;
        config.h_list = vec![1.0 / 20.0, 1.0 / 40.0, 1.0 / 80.0, 1.0 / 160.0];
        config.negative_control = true;
        match run_scaling_sweep(&config) {
            Err(ExperimentError::Period(PeriodError::PoorFit { .. })) => {}
            other => panic!("expected PoorFit, got {other:?}"),
        }
    }

    #[test]
    fn lq_medians_smoke() {
        let mut config = quick_config();
        config.samples = 1500;
        config.h_list = vec![0.1];
        let report = run_lq_medians(&config).unwrap();
        assert_eq!(report.rows.len(), 3);
        assert!(report.passed, "{:#?}", report.rows);
        // q = 2 exact value: B² = L/Vol.
        let b2 = report.rows.iter().find(|r| r.q == 2.0).unwrap().bqh;
        let want = (2.0 * std::f64::consts::PI / Manifold::FlatTorus2.volume()).sqrt();
        assert!((b2 - want).abs() < 1e-12);
    }

    #[test]
    fn lq_negative_control_fails() {
        let mut config = quick_config();
        config.samples = 1500;
        config.h_list = vec![0.1];
        config.q_list = vec![2.0];
        config.negative_control = true;
        let report = run_lq_medians(&config).unwrap();
        assert!(!report.passed);
    }

    #[test]
    fn deterministic_examples_pass() {
        let report = run_deterministic_examples().unwrap();
        assert!(
            report.meridian_ok,
            "meridian slope {}",
            report.meridian_slope
        );
        assert!(report.equator_even_ok, "{:?}", report.equator_rows);
        assert!(report.odd_parity_ok, "odd max {}", report.odd_parity_max);
        assert!(report.segment_ok, "{:?}", report.segment_rows);
        assert!(report.kuznecov_ok, "dev {}", report.kuznecov_limit_dev);
        // Specific frozen values: n = 10 segment and ℓ = 200 equator.
        let seg10 = report.segment_rows.iter().find(|r| r.n == 10).unwrap();
        assert!(seg10.value <= 0.2, "segment value {}", seg10.value);
        let eq200 = report
            .equator_rows
            .iter()
            .find(|r| r.degree == 200)
            .unwrap();
        assert!(eq200.deviation_from_two < 0.1);
    }

    #[test]
    fn modes_report_tracks_weyl() {
        let mut config = quick_config();
        config.h_list = vec![0.1, 0.05];
        let rows = run_modes(&config).unwrap();
        for row in rows {
            assert!((row.ratio - 1.0).abs() < 0.25, "{row:?}");
        }
    }

    #[test]
    fn median_matches_its_order_statistic_ci() {
        // MC sample median of F₁ lands inside the exact-law 99% CI band.
        let config = ExperimentConfig {
            samples: 100_000,
            h_list: vec![0.1],
            workers: 4,
            ..ExperimentConfig::torus2_standard()
        };
        let setup = setup_for(&config, 0.1).unwrap();
        let n = setup.cluster.dimension();
        let f1: Vec<f64> = par_map_samples(config.samples, config.workers, |i| {
            period_rv(&sample_coefficients(n, config.seed, i), &setup.pv)
        });
        let (_, ci_lo, ci_hi) = median_with_ci99(&f1);
        let exact = median_exact(&setup.law);
        assert!(
            ci_lo <= exact && exact <= ci_hi,
            "exact median {exact} outside CI [{ci_lo}, {ci_hi}]"
        );
    }
}
