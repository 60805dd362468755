//! Explicit Laplace eigenbases on the model manifolds, spectral clusters for
//! a frequency window, and Weyl counting quantities.
//!
//! Frequencies are the square roots of exact integer eigenvalues: |k|² on the
//! flat torus and ℓ(ℓ+1) on the round sphere, so all window-membership tests
//! reduce to exact integer comparisons against squared window bounds.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

use crate::legendre;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("no eigenfrequency lies in the window ({lo}, {hi}] (h = {h})")]
    EmptyCluster { lo: f64, hi: f64, h: f64 },
    #[error("window needs a ≥ 0 and D > 0, got a = {a}, d = {d}")]
    InvalidWindow { a: f64, d: f64 },
    #[error("semiclassical parameter must satisfy 0 < h ≤ 1, got {0}")]
    InvalidScale(f64),
    #[error("point does not live on {0:?}")]
    InvalidPoint(Manifold),
}

/// The model manifolds carrying explicit eigenbases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Manifold {
    FlatTorus2,
    FlatTorus3,
    RoundSphere2,
}

impl Manifold {
    pub fn dimension(self) -> usize {
        match self {
            Manifold::FlatTorus2 | Manifold::RoundSphere2 => 2,
            Manifold::FlatTorus3 => 3,
        }
    }

    /// Riemannian volume: (2π)ⁿ for tori, 4π for the sphere.
    pub fn volume(self) -> f64 {
        match self {
            Manifold::FlatTorus2 => 4.0 * PI * PI,
            Manifold::FlatTorus3 => 8.0 * PI * PI * PI,
            Manifold::RoundSphere2 => 4.0 * PI,
        }
    }

    /// Volume of the unit ball in dimension n (c_n of the Weyl leading term).
    pub fn unit_ball_volume(self) -> f64 {
        match self.dimension() {
            2 => PI,
            3 => 4.0 * PI / 3.0,
            _ => unreachable!(),
        }
    }
}

/// A point on one of the model manifolds. Torus coordinates are angles
/// (implicitly mod 2π); sphere points are (colatitude, longitude).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Point {
    Torus2(f64, f64),
    Torus3(f64, f64, f64),
    Sphere { colatitude: f64, longitude: f64 },
}

/// Manifold-specific eigenfunction label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ModeLabel {
    Torus2([i64; 2]),
    Torus3([i64; 3]),
    Sphere { degree: i64, order: i64 },
}

impl ModeLabel {
    /// The exact integer Laplace eigenvalue |k|² or ℓ(ℓ+1).
    pub fn eigenvalue(&self) -> i64 {
        match *self {
            ModeLabel::Torus2([a, b]) => a * a + b * b,
            ModeLabel::Torus3([a, b, c]) => a * a + b * b + c * c,
            ModeLabel::Sphere { degree, .. } => degree * (degree + 1),
        }
    }
}

impl std::fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            ModeLabel::Torus2([a, b]) => write!(f, "k=({a};{b})"),
            ModeLabel::Torus3([a, b, c]) => write!(f, "k=({a};{b};{c})"),
            ModeLabel::Sphere { degree, order } => write!(f, "lm=({degree};{order})"),
        }
    }
}

/// One Laplace eigenfunction label with its frequency h_k⁻¹ = √eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenMode {
    pub label: ModeLabel,
    pub frequency: f64,
}

impl EigenMode {
    pub fn new(label: ModeLabel) -> Self {
        EigenMode {
            frequency: (label.eigenvalue() as f64).sqrt(),
            label,
        }
    }
}

/// Spectral window (a, a + D·h] in rescaled frequency h·h_k⁻¹.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralWindow {
    /// Lower scale a (default 1).
    pub lower: f64,
    /// Width constant D; the window length is D·h.
    pub width_constant: f64,
}

impl SpectralWindow {
    pub fn new(lower: f64, width_constant: f64) -> Result<Self, SpectralError> {
        if lower.is_nan() || lower < 0.0 || width_constant.is_nan() || width_constant <= 0.0 {
            return Err(SpectralError::InvalidWindow {
                a: lower,
                d: width_constant,
            });
        }
        Ok(SpectralWindow {
            lower,
            width_constant,
        })
    }

    /// Default torus window: a = 1, D = 6.
    pub fn standard() -> Self {
        SpectralWindow {
            lower: 1.0,
            width_constant: 6.0,
        }
    }

    /// Canonical frequency bounds (lo, hi] at scale h. Every membership test
    /// in the crate goes through this one computation.
    pub fn frequency_bounds(&self, h: f64) -> (f64, f64) {
        let lo = self.lower / h;
        (lo, lo + self.width_constant)
    }
}

/// The modes of a spectral window, in canonical (frequency, label) order.
#[derive(Debug, Clone)]
pub struct Cluster {
    pub manifold: Manifold,
    pub window: SpectralWindow,
    pub h: f64,
    pub modes: Vec<EigenMode>,
}

impl Cluster {
    /// N_h, the complex dimension of the cluster.
    pub fn dimension(&self) -> usize {
        self.modes.len()
    }

    /// Upper frequency bound (a + D·h)/h; drives quadrature resolution.
    pub fn max_frequency(&self) -> f64 {
        self.window.frequency_bounds(self.h).1
    }
}

fn check_scale(h: f64) -> Result<(), SpectralError> {
    if h.is_nan() || h <= 0.0 || h > 1.0 {
        return Err(SpectralError::InvalidScale(h));
    }
    Ok(())
}

#[inline]
fn in_window(eigenvalue: i64, lo2: f64, hi2: f64) -> bool {
    let s = eigenvalue as f64;
    s > lo2 && s <= hi2
}

/// All modes with h·frequency ∈ (a, a + D·h], sorted by (frequency, label).
pub fn enumerate_cluster(
    manifold: Manifold,
    window: &SpectralWindow,
    h: f64,
) -> Result<Cluster, SpectralError> {
    check_scale(h)?;
    let (lo, hi) = window.frequency_bounds(h);
    let (lo2, hi2) = (lo * lo, hi * hi);
    let mut modes: Vec<EigenMode> = Vec::new();

    match manifold {
        Manifold::FlatTorus2 => {
            let kmax = hi.ceil() as i64 + 1;
            for k1 in -kmax..=kmax {
                for k2 in row_range(k1 * k1, lo2, hi2) {
                    let label = ModeLabel::Torus2([k1, k2]);
                    if in_window(label.eigenvalue(), lo2, hi2) {
                        modes.push(EigenMode::new(label));
                        if k2 > 0 {
                            modes.push(EigenMode::new(ModeLabel::Torus2([k1, -k2])));
                        }
                    }
                }
            }
        }
        Manifold::FlatTorus3 => {
            let kmax = hi.ceil() as i64 + 1;
            for k1 in -kmax..=kmax {
                for k2 in -kmax..=kmax {
                    let c = k1 * k1 + k2 * k2;
                    if (c as f64) > hi2 {
                        continue;
                    }
                    for k3 in row_range(c, lo2, hi2) {
                        let label = ModeLabel::Torus3([k1, k2, k3]);
                        if in_window(label.eigenvalue(), lo2, hi2) {
                            modes.push(EigenMode::new(label));
                            if k3 > 0 {
                                modes.push(EigenMode::new(ModeLabel::Torus3([k1, k2, -k3])));
                            }
                        }
                    }
                }
            }
        }
        Manifold::RoundSphere2 => {
            let lmax = hi.ceil() as i64 + 1;
            for degree in 0..=lmax {
                if in_window(degree * (degree + 1), lo2, hi2) {
                    for order in -degree..=degree {
                        modes.push(EigenMode::new(ModeLabel::Sphere { degree, order }));
                    }
                }
            }
        }
    }

    if modes.is_empty() {
        return Err(SpectralError::EmptyCluster { lo, hi, h });
    }
    modes.sort_unstable_by_key(|m| (m.label.eigenvalue(), m.label));
    Ok(Cluster {
        manifold,
        window: *window,
        h,
        modes,
    })
}

/// Candidate range for the last coordinate given the partial square sum `c`,
/// padded by two so the exact membership test decides the boundary.
#[allow(clippy::reversed_empty_ranges)]
pub(crate) fn row_range(c: i64, lo2: f64, hi2: f64) -> std::ops::RangeInclusive<i64> {
    let cf = c as f64;
    if cf > hi2 {
        return 1..=0; // empty
    }
    let upper = (hi2 - cf).sqrt().floor() as i64 + 2;
    let lower = if lo2 > cf {
        ((lo2 - cf).sqrt().floor() as i64 - 2).max(0)
    } else {
        0
    };
    lower..=upper
}

/// N_h without materializing the mode list (same membership arithmetic as
/// `enumerate_cluster`).
pub fn count_cluster(
    manifold: Manifold,
    window: &SpectralWindow,
    h: f64,
) -> Result<u64, SpectralError> {
    check_scale(h)?;
    let (lo, hi) = window.frequency_bounds(h);
    let (lo2, hi2) = (lo * lo, hi * hi);
    let mut count = 0u64;
    match manifold {
        Manifold::FlatTorus2 => {
            let kmax = hi.ceil() as i64 + 1;
            for k1 in -kmax..=kmax {
                for k2 in row_range(k1 * k1, lo2, hi2) {
                    if in_window(k1 * k1 + k2 * k2, lo2, hi2) {
                        count += if k2 > 0 { 2 } else { 1 };
                    }
                }
            }
        }
        Manifold::FlatTorus3 => {
            let kmax = hi.ceil() as i64 + 1;
            for k1 in -kmax..=kmax {
                for k2 in -kmax..=kmax {
                    let c = k1 * k1 + k2 * k2;
                    if (c as f64) > hi2 {
                        continue;
                    }
                    for k3 in row_range(c, lo2, hi2) {
                        if in_window(c + k3 * k3, lo2, hi2) {
                            count += if k3 > 0 { 2 } else { 1 };
                        }
                    }
                }
            }
        }
        Manifold::RoundSphere2 => {
            let lmax = hi.ceil() as i64 + 1;
            for degree in 0..=lmax {
                if in_window(degree * (degree + 1), lo2, hi2) {
                    count += 2 * degree as u64 + 1;
                }
            }
        }
    }
    if count == 0 {
        return Err(SpectralError::EmptyCluster { lo, hi, h });
    }
    Ok(count)
}

/// Semiclassical Weyl prediction c_n · Vol(M)/(2π)ⁿ · ((b_h/h)ⁿ − (a_h/h)ⁿ).
pub fn weyl_prediction(manifold: Manifold, window: &SpectralWindow, h: f64) -> f64 {
    let (lo, hi) = window.frequency_bounds(h);
    let n = manifold.dimension() as i32;
    manifold.unit_ball_volume() * manifold.volume() / (2.0 * PI).powi(n) * (hi.powi(n) - lo.powi(n))
}

fn torus_mode_value(vol: f64, phase: f64) -> Complex64 {
    Complex64::from_polar(1.0 / vol.sqrt(), phase)
}

/// φ_j(x) for a single mode.
pub fn evaluate_mode_at_point(
    manifold: Manifold,
    mode: &EigenMode,
    point: &Point,
) -> Result<Complex64, SpectralError> {
    match (mode.label, point) {
        (ModeLabel::Torus2([a, b]), Point::Torus2(x, y)) => Ok(torus_mode_value(
            manifold.volume(),
            a as f64 * x + b as f64 * y,
        )),
        (ModeLabel::Torus3([a, b, c]), Point::Torus3(x, y, z)) => Ok(torus_mode_value(
            manifold.volume(),
            a as f64 * x + b as f64 * y + c as f64 * z,
        )),
        (
            ModeLabel::Sphere { degree, order },
            &Point::Sphere {
                colatitude,
                longitude,
            },
        ) => {
            if !(0.0..=PI).contains(&colatitude) {
                return Err(SpectralError::InvalidPoint(manifold));
            }
            let m_abs = order.unsigned_abs() as usize;
            let lambda = legendre::normalized_single(degree as usize, m_abs, colatitude.cos());
            // Y_{ℓ,-m} = (-1)^m conj(Y_{ℓm})
            let sign = if order < 0 && m_abs % 2 == 1 {
                -1.0
            } else {
                1.0
            };
            Ok(Complex64::from_polar(1.0, order as f64 * longitude) * lambda * sign)
        }
        _ => Err(SpectralError::InvalidPoint(manifold)),
    }
}

/// The vector b_{x,h} = (φ_j(x))_j in cluster order.
pub fn evaluate_modes_at_point(
    cluster: &Cluster,
    point: &Point,
) -> Result<Vec<Complex64>, SpectralError> {
    match (cluster.manifold, point) {
        (Manifold::FlatTorus2, Point::Torus2(..)) | (Manifold::FlatTorus3, Point::Torus3(..)) => {
            cluster
                .modes
                .iter()
                .map(|m| evaluate_mode_at_point(cluster.manifold, m, point))
                .collect()
        }
        (
            Manifold::RoundSphere2,
            &Point::Sphere {
                colatitude,
                longitude,
            },
        ) => {
            if !(0.0..=PI).contains(&colatitude) {
                return Err(SpectralError::InvalidPoint(cluster.manifold));
            }
            let lmax = cluster
                .modes
                .iter()
                .map(|m| match m.label {
                    ModeLabel::Sphere { degree, .. } => degree as usize,
                    _ => 0,
                })
                .max()
                .unwrap_or(0);
            // One upward recurrence per order, shared across all degrees.
            let x = colatitude.cos();
            let tables: Vec<Vec<f64>> = (0..=lmax)
                .map(|m| legendre::normalized_table(lmax, m, x))
                .collect();
            cluster
                .modes
                .iter()
                .map(|mode| match mode.label {
                    ModeLabel::Sphere { degree, order } => {
                        let m_abs = order.unsigned_abs() as usize;
                        let lambda = tables[m_abs][degree as usize - m_abs];
                        let sign = if order < 0 && m_abs % 2 == 1 {
                            -1.0
                        } else {
                            1.0
                        };
                        Ok(Complex64::from_polar(1.0, order as f64 * longitude) * lambda * sign)
                    }
                    _ => Err(SpectralError::InvalidPoint(cluster.manifold)),
                })
                .collect()
        }
        _ => Err(SpectralError::InvalidPoint(cluster.manifold)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::neumaier_sum;

    /// Brute-force oracle: scan the full coordinate box and apply the window
    /// condition to every lattice vector / degree.
    fn brute_force_count(manifold: Manifold, window: &SpectralWindow, h: f64) -> u64 {
        let (lo, hi) = window.frequency_bounds(h);
        let (lo2, hi2) = (lo * lo, hi * hi);
        let kmax = hi.ceil() as i64 + 3;
        let mut n = 0;
        match manifold {
            Manifold::FlatTorus2 => {
                for a in -kmax..=kmax {
                    for b in -kmax..=kmax {
                        let s = (a * a + b * b) as f64;
                        if s > lo2 && s <= hi2 {
                            n += 1;
                        }
                    }
                }
            }
            Manifold::FlatTorus3 => {
                for a in -kmax..=kmax {
                    for b in -kmax..=kmax {
                        for c in -kmax..=kmax {
                            let s = (a * a + b * b + c * c) as f64;
                            if s > lo2 && s <= hi2 {
                                n += 1;
                            }
                        }
                    }
                }
            }
            Manifold::RoundSphere2 => {
                for l in 0..=kmax {
                    let s = (l * (l + 1)) as f64;
                    if s > lo2 && s <= hi2 {
                        n += 2 * l as u64 + 1;
                    }
                }
            }
        }
        n
    }

    #[test]
    fn torus2_standard_window() {
        // (T², a=1, D=6, h=0.1): lattice points with 10 < |k| ≤ 16.
        let w = SpectralWindow::standard();
        let cluster = enumerate_cluster(Manifold::FlatTorus2, &w, 0.1).unwrap();
        let brute = brute_force_count(Manifold::FlatTorus2, &w, 0.1);
        assert_eq!(cluster.dimension() as u64, brute);
        // Annulus area π(16² − 10²) = 156π ≈ 490.1; lattice remainder margin.
        let area = 156.0 * PI;
        assert!((cluster.dimension() as f64 - area).abs() < 60.0);
        assert_eq!(
            count_cluster(Manifold::FlatTorus2, &w, 0.1).unwrap(),
            cluster.dimension() as u64
        );
    }

    #[test]
    fn sphere_window_degrees_10_to_14() {
        // (S², a=1, D=5, h=0.1): √(ℓ(ℓ+1)) ∈ (10, 15] admits ℓ ∈ {10,…,14}.
        let w = SpectralWindow::new(1.0, 5.0).unwrap();
        let cluster = enumerate_cluster(Manifold::RoundSphere2, &w, 0.1).unwrap();
        assert_eq!(cluster.dimension(), 125);
        let degrees: std::collections::BTreeSet<i64> = cluster
            .modes
            .iter()
            .map(|m| match m.label {
                ModeLabel::Sphere { degree, .. } => degree,
                _ => panic!(),
            })
            .collect();
        assert_eq!(degrees, (10..=14).collect());
    }

    #[test]
    fn sphere_narrow_window_is_empty() {
        // Window (10, 10.3]: the nearest √(ℓ(ℓ+1)) are 9.49 and 10.49.
        let w = SpectralWindow::new(1.0, 0.3).unwrap();
        match enumerate_cluster(Manifold::RoundSphere2, &w, 0.1) {
            Err(SpectralError::EmptyCluster { lo, hi, .. }) => {
                assert!((lo - 10.0).abs() < 1e-12 && (hi - 10.3).abs() < 1e-12);
            }
            _ => panic!("expected EmptyCluster for window (10, 10.3]"),
        }
    }

    #[test]
    fn membership_is_exactly_half_open() {
        let w = SpectralWindow::standard();
        let h = 0.125;
        let cluster = enumerate_cluster(Manifold::FlatTorus2, &w, h).unwrap();
        let (lo, hi) = w.frequency_bounds(h);
        for mode in &cluster.modes {
            let hf = h * mode.frequency;
            assert!(
                hf > w.lower - 1e-12 && mode.frequency > lo && mode.frequency <= hi,
                "mode {:?} outside window",
                mode.label
            );
        }
        // Exhaustive complement check below the scan bound.
        let in_cluster: std::collections::HashSet<ModeLabel> =
            cluster.modes.iter().map(|m| m.label).collect();
        let kmax = hi.ceil() as i64 + 2;
        for a in -kmax..=kmax {
            for b in -kmax..=kmax {
                let label = ModeLabel::Torus2([a, b]);
                let s = label.eigenvalue() as f64;
                let member = s > lo * lo && s <= hi * hi;
                assert_eq!(member, in_cluster.contains(&label), "label {label}");
            }
        }
    }

    #[test]
    fn enumeration_is_deterministic_and_sorted() {
        let w = SpectralWindow::standard();
        let a = enumerate_cluster(Manifold::FlatTorus2, &w, 0.07).unwrap();
        let b = enumerate_cluster(Manifold::FlatTorus2, &w, 0.07).unwrap();
        assert_eq!(a.modes.len(), b.modes.len());
        for (x, y) in a.modes.iter().zip(&b.modes) {
            assert_eq!(x.label, y.label);
        }
        for pair in a.modes.windows(2) {
            let ka = (pair[0].label.eigenvalue(), pair[0].label);
            let kb = (pair[1].label.eigenvalue(), pair[1].label);
            assert!(ka < kb, "ordering violated: {ka:?} !< {kb:?}");
        }
    }

    #[test]
    fn torus3_counts_match_brute_force() {
        let w = SpectralWindow::standard();
        for h in [0.5, 0.21, 0.11] {
            let fast = count_cluster(Manifold::FlatTorus3, &w, h).unwrap();
            assert_eq!(fast, brute_force_count(Manifold::FlatTorus3, &w, h));
            let full = enumerate_cluster(Manifold::FlatTorus3, &w, h).unwrap();
            assert_eq!(full.dimension() as u64, fast);
        }
    }

    #[test]
    fn weyl_prediction_torus2() {
        // π (16² − 10²) = 156π.
        let w = SpectralWindow::standard();
        let p = weyl_prediction(Manifold::FlatTorus2, &w, 0.1);
        assert!((p - 156.0 * PI).abs() < 1e-9);
        // D → 0 limit.
        let tiny = SpectralWindow::new(1.0, 1e-9).unwrap();
        assert!(weyl_prediction(Manifold::FlatTorus2, &tiny, 0.1) < 1e-6);
    }

    #[test]
    fn weyl_ratio_converges_on_torus() {
        let w = SpectralWindow::standard();
        let mut last = f64::INFINITY;
        for h in [0.05, 0.01, 0.004] {
            let n = count_cluster(Manifold::FlatTorus2, &w, h).unwrap() as f64;
            let ratio = n / weyl_prediction(Manifold::FlatTorus2, &w, h);
            let dev = (ratio - 1.0).abs();
            assert!(dev < last + 0.02, "no convergence: dev {dev} last {last}");
            last = dev;
        }
        assert!(last < 0.02);
    }

    #[test]
    fn weyl_bracket_on_torus2() {
        // 0.8·2πD ≤ N_h·h ≤ 1.2·2πD for h⁻¹ ∈ [50, 500], D = 6.
        let w = SpectralWindow::standard();
        let band = 2.0 * PI * w.width_constant;
        for hinv in (50..=500).step_by(3) {
            let h = 1.0 / hinv as f64;
            let n = count_cluster(Manifold::FlatTorus2, &w, h).unwrap() as f64;
            assert!(
                n * h >= 0.8 * band && n * h <= 1.2 * band,
                "h⁻¹ = {hinv}: N_h·h = {}",
                n * h
            );
        }
    }

    #[test]
    fn torus_mode_values_have_constant_modulus() {
        let w = SpectralWindow::standard();
        let cluster = enumerate_cluster(Manifold::FlatTorus2, &w, 0.2).unwrap();
        let b = evaluate_modes_at_point(&cluster, &Point::Torus2(0.37, -1.1)).unwrap();
        let sq: Vec<f64> = b.iter().map(|z| z.norm_sqr()).collect();
        let total = neumaier_sum(&sq);
        let want = cluster.dimension() as f64 / Manifold::FlatTorus2.volume();
        assert!((total - want).abs() < 1e-12 * want);
    }

    #[test]
    fn sphere_pole_kills_nonzero_orders() {
        let w = SpectralWindow::new(1.0, 5.0).unwrap();
        let cluster = enumerate_cluster(Manifold::RoundSphere2, &w, 0.1).unwrap();
        let b = evaluate_modes_at_point(
            &cluster,
            &Point::Sphere {
                colatitude: 0.0,
                longitude: 0.0,
            },
        )
        .unwrap();
        for (mode, v) in cluster.modes.iter().zip(&b) {
            if let ModeLabel::Sphere { order, .. } = mode.label {
                if order != 0 {
                    assert_eq!(v.norm(), 0.0, "order {order} nonzero at pole");
                }
            }
        }
    }

    #[test]
    fn sphere_addition_theorem_per_degree() {
        let w = SpectralWindow::new(1.0, 5.0).unwrap();
        let cluster = enumerate_cluster(Manifold::RoundSphere2, &w, 0.1).unwrap();
        let point = Point::Sphere {
            colatitude: 1.1,
            longitude: 2.7,
        };
        let b = evaluate_modes_at_point(&cluster, &point).unwrap();
        let mut per_degree: std::collections::BTreeMap<i64, f64> = Default::default();
        for (mode, v) in cluster.modes.iter().zip(&b) {
            if let ModeLabel::Sphere { degree, .. } = mode.label {
                *per_degree.entry(degree).or_insert(0.0) += v.norm_sqr();
            }
        }
        for (degree, total) in per_degree {
            let want = (2 * degree + 1) as f64 / (4.0 * PI);
            assert!(
                ((total - want) / want).abs() < 1e-10,
                "degree {degree}: {total} vs {want}"
            );
        }
    }

    #[test]
    fn sphere_mode_values_match_single_evaluation() {
        let w = SpectralWindow::new(1.0, 5.0).unwrap();
        let cluster = enumerate_cluster(Manifold::RoundSphere2, &w, 0.1).unwrap();
        let point = Point::Sphere {
            colatitude: 0.9,
            longitude: -0.4,
        };
        let b = evaluate_modes_at_point(&cluster, &point).unwrap();
        for (mode, v) in cluster.modes.iter().zip(&b).step_by(7) {
            let single = evaluate_mode_at_point(Manifold::RoundSphere2, mode, &point).unwrap();
            assert!((v - single).norm() < 1e-13);
        }
    }

    #[test]
    fn torus_l2_gram_is_identity() {
        // Trapezoidal integration over a uniform grid of ≥ (4 max frequency)²
        // points reproduces orthonormality.
        let w = SpectralWindow::standard();
        let cluster = enumerate_cluster(Manifold::FlatTorus2, &w, 0.5).unwrap();
        let side = (4.0 * cluster.max_frequency()).ceil() as usize;
        let n = cluster.dimension();
        let step = 2.0 * PI / side as f64;
        let cell = step * step;
        let mut gram = vec![Complex64::default(); n * n];
        for ix in 0..side {
            for iy in 0..side {
                let b = evaluate_modes_at_point(
                    &cluster,
                    &Point::Torus2(ix as f64 * step, iy as f64 * step),
                )
                .unwrap();
                for j in 0..n {
                    for k in 0..=j {
                        gram[j * n + k] += b[j] * b[k].conj() * cell;
                    }
                }
            }
        }
        for j in 0..n {
            for k in 0..=j {
                let want = if j == k { 1.0 } else { 0.0 };
                assert!(
                    (gram[j * n + k] - want).norm() < 1e-8,
                    "gram[{j},{k}] = {}",
                    gram[j * n + k]
                );
            }
        }
    }
}
