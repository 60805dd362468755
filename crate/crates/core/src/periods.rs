//! Period vectors b_{S,h} of a cluster along a submanifold, their squared
//! norm N(S)_h, and cumulative Kuznecov sums E(h, S).
//!
//! Torus lines and coordinate subtori have closed-form components (full
//! periods of complex exponentials); latitude circles reduce to the zonal
//! Legendre factor after the exact longitude integral. Great-circle arcs are
//! integrated by quadrature with a 2x-refinement convergence gate.

use num_complex::Complex64;
use thiserror::Error;

use crate::curves::{quadrature_with_refinement, Submanifold};
use crate::legendre;
use crate::spectral::{
    count_cluster, evaluate_modes_at_point, Cluster, Manifold, ModeLabel, SpectralError,
    SpectralWindow,
};
use crate::stats::{log_log_fit, neumaier_sum, sorted_compensated_sum};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PeriodError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("submanifold does not live on the cluster's manifold")]
    Mismatch,
    #[error(
        "quadrature did not converge: component {index} moved {delta:.3e} under 2x refinement"
    )]
    QuadratureNotConverged { index: usize, delta: f64 },
    #[error("power-law fit needs at least 5 points spanning a factor of 4 in h")]
    InsufficientData,
    #[error("fitted exponent {fitted:.3} deviates from expected {expected:.3} by more than 0.2")]
    PoorFit { fitted: f64, expected: f64 },
}

/// The complex vector of mode periods, indexed in cluster order.
#[derive(Debug, Clone)]
pub struct PeriodVector {
    pub components: Vec<Complex64>,
    /// N(S)_h = |b_{S,h}|², accumulated in a permutation-invariant order.
    pub squared_norm: f64,
}

impl PeriodVector {
    pub fn new(components: Vec<Complex64>) -> Self {
        let mut squares: Vec<f64> = components.iter().map(|c| c.norm_sqr()).collect();
        let squared_norm = sorted_compensated_sum(&mut squares);
        PeriodVector {
            components,
            squared_norm,
        }
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }
}

#[inline]
fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// ∫₀^L e^{iωt} dt = L e^{iωL/2} sinc(ωL/2)
fn segment_integral(omega: f64, length: f64) -> Complex64 {
    let half = 0.5 * omega * length;
    Complex64::new(half.cos(), half.sin()) * (length * sinc(half))
}

fn mode_k(label: ModeLabel) -> Result<[i64; 3], PeriodError> {
    match label {
        ModeLabel::Torus2([a, b]) => Ok([a, b, 0]),
        ModeLabel::Torus3(k) => Ok(k),
        _ => Err(PeriodError::Mismatch),
    }
}

/// b_{S,h}: closed forms where available, quadrature otherwise.
pub fn period_vector(cluster: &Cluster, sub: &Submanifold) -> Result<PeriodVector, PeriodError> {
    let vol = cluster.manifold.volume();
    let inv_sqrt_vol = 1.0 / vol.sqrt();
    let components: Vec<Complex64> = match sub {
        Submanifold::TorusLine {
            base,
            unit_direction,
            winding,
            length,
            closed,
            ..
        } => {
            check_torus(cluster.manifold)?;
            cluster
                .modes
                .iter()
                .map(|mode| {
                    let k = mode_k(mode.label)?;
                    let base_phase =
                        k[0] as f64 * base[0] + k[1] as f64 * base[1] + k[2] as f64 * base[2];
                    if *closed {
                        let w = winding.expect("closed torus line carries its winding");
                        let dot = k[0] * w[0] + k[1] * w[1] + k[2] * w[2];
                        if dot == 0 {
                            Ok(Complex64::from_polar(inv_sqrt_vol * length, base_phase))
                        } else {
                            Ok(Complex64::default())
                        }
                    } else {
                        let omega = k[0] as f64 * unit_direction[0]
                            + k[1] as f64 * unit_direction[1]
                            + k[2] as f64 * unit_direction[2];
                        Ok(Complex64::from_polar(inv_sqrt_vol, base_phase)
                            * segment_integral(omega, *length))
                    }
                })
                .collect::<Result<Vec<_>, PeriodError>>()?
        }
        Submanifold::TorusCoordinateSubtorus { fixed, free } => {
            if cluster.manifold != Manifold::FlatTorus3 {
                return Err(PeriodError::Mismatch);
            }
            let area = 4.0 * std::f64::consts::PI * std::f64::consts::PI;
            cluster
                .modes
                .iter()
                .map(|mode| {
                    let k = mode_k(mode.label)?;
                    if k[free[0]] == 0 && k[free[1]] == 0 {
                        let phase = k[fixed[0].0] as f64 * fixed[0].1;
                        Ok(Complex64::from_polar(inv_sqrt_vol * area, phase))
                    } else {
                        Ok(Complex64::default())
                    }
                })
                .collect::<Result<Vec<_>, PeriodError>>()?
        }
        Submanifold::SphereLatitudeCircle { colatitude } => {
            if cluster.manifold != Manifold::RoundSphere2 {
                return Err(PeriodError::Mismatch);
            }
            // The longitude integral kills every order except m = 0 exactly.
            let x = colatitude.cos();
            let ring = 2.0 * std::f64::consts::PI * colatitude.sin();
            let lmax = sphere_lmax(cluster)?;
            let zonal = legendre::normalized_table(lmax, 0, x);
            cluster
                .modes
                .iter()
                .map(|mode| match mode.label {
                    ModeLabel::Sphere { degree, order } => {
                        if order == 0 {
                            Ok(Complex64::new(ring * zonal[degree as usize], 0.0))
                        } else {
                            Ok(Complex64::default())
                        }
                    }
                    _ => Err(PeriodError::Mismatch),
                })
                .collect::<Result<Vec<_>, PeriodError>>()?
        }
        Submanifold::SphereGreatArc { .. } => {
            if cluster.manifold != Manifold::RoundSphere2 {
                return Err(PeriodError::Mismatch);
            }
            return period_vector_quadrature_checked(cluster, sub);
        }
    };
    Ok(PeriodVector::new(components))
}

fn check_torus(manifold: Manifold) -> Result<(), PeriodError> {
    match manifold {
        Manifold::FlatTorus2 | Manifold::FlatTorus3 => Ok(()),
        _ => Err(PeriodError::Mismatch),
    }
}

fn sphere_lmax(cluster: &Cluster) -> Result<usize, PeriodError> {
    cluster
        .modes
        .iter()
        .map(|m| match m.label {
            ModeLabel::Sphere { degree, .. } => Ok(degree as usize),
            _ => Err(PeriodError::Mismatch),
        })
        .try_fold(0usize, |acc, d| d.map(|d| acc.max(d)))
}

/// Pure-quadrature period components at the given refinement level, together
/// with the per-mode scale Vol(S) · sup|φ_j| used to judge convergence.
fn quadrature_components(
    cluster: &Cluster,
    sub: &Submanifold,
    refine: usize,
) -> Result<(Vec<Complex64>, Vec<f64>), PeriodError> {
    let rule = quadrature_with_refinement(sub, cluster.max_frequency(), refine);
    let n = cluster.dimension();
    let mut comps = vec![Complex64::default(); n];
    let mut sup = vec![0.0f64; n];
    for (node, &w) in rule.nodes.iter().zip(&rule.weights) {
        let b = evaluate_modes_at_point(cluster, &sub.point_at(*node))?;
        for j in 0..n {
            comps[j] += b[j] * w;
            sup[j] = sup[j].max(b[j].norm());
        }
    }
    let volume = sub.volume();
    for s in &mut sup {
        *s *= volume;
    }
    Ok((comps, sup))
}

/// Quadrature route without closed forms, for any submanifold. Used as the
/// second leg of the closed-form/quadrature agreement checks.
pub fn period_vector_quadrature(
    cluster: &Cluster,
    sub: &Submanifold,
) -> Result<PeriodVector, PeriodError> {
    let (comps, _) = quadrature_components(cluster, sub, 1)?;
    Ok(PeriodVector::new(comps))
}

/// Quadrature with the 2x-refinement convergence gate: a component that moves
/// by more than 1e-8 relative (with an absolute floor at 1e-12 of its
/// attainable magnitude) fails the run.
fn period_vector_quadrature_checked(
    cluster: &Cluster,
    sub: &Submanifold,
) -> Result<PeriodVector, PeriodError> {
    let (coarse, _) = quadrature_components(cluster, sub, 1)?;
    let (fine, sup) = quadrature_components(cluster, sub, 2)?;
    for (index, ((c, f), s)) in coarse.iter().zip(&fine).zip(&sup).enumerate() {
        let delta = (c - f).norm();
        let tol = (1e-8 * f.norm()).max(1e-12 * s);
        if delta > tol {
            return Err(PeriodError::QuadratureNotConverged { index, delta });
        }
    }
    Ok(PeriodVector::new(fine))
}

/// (N_h, N(S)_h) without materializing the cluster, for the submanifolds
/// whose period vectors are delta-supported: closed torus geodesics in T²,
/// axis geodesics and coordinate subtori in T³. Returns None otherwise.
///
/// Uses the same window arithmetic as `enumerate_cluster`, so the values are
/// bit-identical to the full route (checked in the tests).
pub fn fast_law(
    manifold: Manifold,
    window: &SpectralWindow,
    h: f64,
    sub: &Submanifold,
) -> Result<Option<(u64, f64)>, PeriodError> {
    let (lo, hi) = window.frequency_bounds(h);
    let (lo2, hi2) = (lo * lo, hi * hi);
    let in_window = |eig: i64| -> bool {
        let s = eig as f64;
        s > lo2 && s <= hi2
    };
    let ns = match (manifold, sub) {
        (
            Manifold::FlatTorus2,
            Submanifold::TorusLine {
                winding: Some(w),
                closed: true,
                ..
            },
        ) => {
            // Perpendicular modes m·(-q, p): |k|² = m² (p² + q²),
            // each contributing |component|² = L²/Vol = p² + q².
            let norm2 = w[0] * w[0] + w[1] * w[1];
            let mut count = 0u64;
            let mut m = 0i64;
            while (m * m * norm2) as f64 <= hi2 {
                if in_window(m * m * norm2) {
                    count += if m == 0 { 1 } else { 2 };
                }
                m += 1;
            }
            Some(norm2 as f64 * count as f64)
        }
        (
            Manifold::FlatTorus3,
            Submanifold::TorusLine {
                winding: Some(w),
                closed: true,
                ..
            },
        ) if w.iter().filter(|&&c| c != 0).count() == 1 => {
            // Axis geodesic: perpendicular lattice is the coordinate Z²;
            // each perpendicular mode contributes L²/Vol = 1/(2π).
            let mut count = 0u64;
            let amax = hi.ceil() as i64 + 1;
            for a in -amax..=amax {
                for b in crate::spectral::row_range(a * a, lo2, hi2) {
                    if in_window(a * a + b * b) {
                        count += if b > 0 { 2 } else { 1 };
                    }
                }
            }
            Some(count as f64 / (2.0 * std::f64::consts::PI))
        }
        (Manifold::FlatTorus3, Submanifold::TorusCoordinateSubtorus { .. }) => {
            // Axis modes (0, 0, ±m) contribute (2π) each.
            let mut count = 0u64;
            let mut m = 1i64;
            while (m * m) as f64 <= hi2 {
                if in_window(m * m) {
                    count += 2;
                }
                m += 1;
            }
            Some(2.0 * std::f64::consts::PI * count as f64)
        }
        _ => None,
    };
    match ns {
        Some(ns) => {
            let n_h = count_cluster(manifold, window, h)?;
            Ok(Some((n_h, ns)))
        }
        None => Ok(None),
    }
}

/// Leading-order model for the Kuznecov cumulative sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KuznecovPrediction {
    /// Fitted constant c in E(h, S) ≈ c · h^{-(n-d)}.
    pub leading_coefficient: f64,
    /// The model exponent n − d.
    pub exponent: f64,
    /// Exponent recovered from the free log-log fit.
    pub fitted_exponent: f64,
}

/// E(h, S) = Σ_{frequency ≤ 1/h} |∫_S φ_j dσ|² on a log-spaced grid of h
/// from 1 down to `h_min`.
///
/// Torus lines/subtori and latitude circles use exact per-mode closed forms;
/// great arcs fall back to quadrature over every mode below the cutoff, which
/// is only intended for moderate 1/h.
pub fn kuznecov_cumulative(
    manifold: Manifold,
    sub: &Submanifold,
    h_min: f64,
) -> Result<Vec<(f64, f64)>, PeriodError> {
    if h_min.is_nan() || h_min <= 0.0 || h_min > 1.0 {
        return Err(PeriodError::Spectral(SpectralError::InvalidScale(h_min)));
    }
    let r_max = 1.0 / h_min;
    let mut squares = mode_period_squares(manifold, sub, r_max)?;
    squares.sort_unstable_by_key(|&(eig, _)| eig);

    // Geometric grid with ~10 points per decade, endpoint pinned to h_min.
    let ratio = std::f64::consts::LN_10 / 10.0;
    let steps = ((1.0 / h_min).ln() / ratio).ceil() as usize;
    let mut grid: Vec<f64> = (0..=steps).map(|i| (-(i as f64) * ratio).exp()).collect();
    *grid.last_mut().expect("grid is nonempty") = h_min;

    let mut out = Vec::with_capacity(grid.len());
    for &h in &grid {
        let r2 = (1.0 / h) * (1.0 / h);
        let terms: Vec<f64> = squares
            .iter()
            .take_while(|&&(eig, _)| eig as f64 <= r2)
            .map(|&(_, sq)| sq)
            .collect();
        out.push((h, neumaier_sum(&terms)));
    }
    Ok(out)
}

/// Per-mode (eigenvalue, |period|²) for every mode with frequency ≤ r_max.
fn mode_period_squares(
    manifold: Manifold,
    sub: &Submanifold,
    r_max: f64,
) -> Result<Vec<(i64, f64)>, PeriodError> {
    let r2 = r_max * r_max;
    let vol = manifold.volume();
    match (manifold, sub) {
        (
            Manifold::FlatTorus2,
            Submanifold::TorusLine {
                winding: Some(w),
                closed: true,
                ..
            },
        ) => {
            let norm2 = w[0] * w[0] + w[1] * w[1];
            let mut out = Vec::new();
            let mut m = 0i64;
            while (m * m * norm2) as f64 <= r2 {
                let weight = if m == 0 { 1.0 } else { 2.0 };
                out.push((m * m * norm2, weight * norm2 as f64));
                m += 1;
            }
            Ok(out)
        }
        (Manifold::FlatTorus3, Submanifold::TorusCoordinateSubtorus { .. }) => {
            let mut out = vec![(0, 2.0 * std::f64::consts::PI)];
            let mut m = 1i64;
            while (m * m) as f64 <= r2 {
                out.push((m * m, 2.0 * 2.0 * std::f64::consts::PI));
                m += 1;
            }
            Ok(out)
        }
        (
            Manifold::FlatTorus2,
            Submanifold::TorusLine {
                closed: false,
                unit_direction,
                length,
                ..
            },
        ) => {
            let kmax = r_max.ceil() as i64 + 1;
            let mut out = Vec::new();
            for k1 in -kmax..=kmax {
                for k2 in -kmax..=kmax {
                    let eig = k1 * k1 + k2 * k2;
                    if eig as f64 > r2 {
                        continue;
                    }
                    let omega = k1 as f64 * unit_direction[0] + k2 as f64 * unit_direction[1];
                    let integral = segment_integral(omega, *length);
                    out.push((eig, integral.norm_sqr() / vol));
                }
            }
            Ok(out)
        }
        (Manifold::RoundSphere2, Submanifold::SphereLatitudeCircle { colatitude }) => {
            let ring = 2.0 * std::f64::consts::PI * colatitude.sin();
            let lmax = r_max.ceil() as usize + 1;
            let zonal = legendre::normalized_table(lmax, 0, colatitude.cos());
            let mut out = Vec::new();
            for l in 0..=lmax as i64 {
                if (l * (l + 1)) as f64 <= r2 {
                    let v = ring * zonal[l as usize];
                    out.push((l * (l + 1), v * v));
                }
            }
            Ok(out)
        }
        (Manifold::RoundSphere2, Submanifold::SphereGreatArc { .. }) => {
            // Quadrature over the full ball of modes; meant for moderate r_max.
            // The window (0, r] misses the constant mode, whose period is
            // Vol(S)/√Vol(M) in closed form.
            let window = SpectralWindow::new(0.0, r_max)?;
            let cluster = crate::spectral::enumerate_cluster(manifold, &window, 1.0)?;
            let pv = period_vector_quadrature_checked(&cluster, sub)?;
            let mut out = vec![(0i64, sub.volume() * sub.volume() / vol)];
            out.extend(
                cluster
                    .modes
                    .iter()
                    .zip(&pv.components)
                    .map(|(m, c)| (m.label.eigenvalue(), c.norm_sqr())),
            );
            Ok(out)
        }
        _ => {
            // Remaining torus cases via full enumeration of the ball.
            let window = SpectralWindow::new(0.0, r_max)?;
            let cluster = crate::spectral::enumerate_cluster(manifold, &window, 1.0)?;
            let pv = period_vector(&cluster, sub)?;
            let mut out = vec![(0i64, sub.volume() * sub.volume() / vol)];
            out.extend(
                cluster
                    .modes
                    .iter()
                    .zip(&pv.components)
                    .map(|(m, c)| (m.label.eigenvalue(), c.norm_sqr())),
            );
            Ok(out)
        }
    }
}

/// Least-squares fit E(h, S) ≈ c · h^{-expected_exponent}.
pub fn fit_kuznecov_leading(
    points: &[(f64, f64)],
    expected_exponent: f64,
) -> Result<KuznecovPrediction, PeriodError> {
    if points.len() < 5 {
        return Err(PeriodError::InsufficientData);
    }
    let hs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let es: Vec<f64> = points.iter().map(|p| p.1).collect();
    let span =
        hs.iter().cloned().fold(f64::MIN, f64::max) / hs.iter().cloned().fold(f64::MAX, f64::min);
    if span.is_nan() || span < 4.0 {
        return Err(PeriodError::InsufficientData);
    }
    if es.iter().any(|&e| e.is_nan() || e <= 0.0) {
        return Err(PeriodError::InsufficientData);
    }
    let (slope, c, _) = log_log_fit(&hs, &es);
    let fitted = -slope;
    if (fitted - expected_exponent).abs() > 0.2 {
        return Err(PeriodError::PoorFit {
            fitted,
            expected: expected_exponent,
        });
    }
    Ok(KuznecovPrediction {
        leading_coefficient: c,
        exponent: expected_exponent,
        fitted_exponent: fitted,
    })
}
