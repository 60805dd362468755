//! Curves and coordinate subtori with their induced measure, and quadrature
//! rules resolving the oscillation of a spectral cluster.
//!
//! Supported submanifolds: torus lines (closed rational-winding geodesics or
//! open segments), coordinate 2-subtori of T³, great-circle arcs and latitude
//! circles on S². Closed curves get uniform (trapezoidal) nodes, which are
//! spectrally accurate for periodic integrands; open arcs get Gauss–Legendre.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

use crate::spectral::{Manifold, Point};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurveError {
    #[error("invalid direction: {0}")]
    InvalidDirection(String),
    #[error("invalid length {0}")]
    InvalidLength(f64),
    #[error("submanifold does not fit on {0:?}")]
    ManifoldMismatch(Manifold),
}

/// Raw submanifold description (the CLI config schema).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SubmanifoldSpec {
    /// A straight line on the torus: either a closed geodesic with integer
    /// winding vector, or an open segment with unit direction and length.
    TorusLine {
        base: Vec<f64>,
        #[serde(default)]
        winding: Option<Vec<i64>>,
        #[serde(default)]
        direction: Option<Vec<f64>>,
        #[serde(default)]
        length: Option<f64>,
    },
    /// Coordinate 2-subtorus of T³: one coordinate frozen.
    TorusCoordinateSubtorus {
        fixed: Vec<(usize, f64)>,
    },
    /// Arc of a great circle t ↦ cos(t)·e₁ + sin(t)·e₂, t ∈ [0, L], L ≤ 2π.
    SphereGreatArc {
        frame: [[f64; 3]; 2],
        length: f64,
    },
    SphereLatitudeCircle {
        colatitude: f64,
    },
}

impl SubmanifoldSpec {
    /// Coordinate geodesic of T²/T³ along axis `axis` through the origin.
    pub fn coordinate_geodesic(dim: usize, axis: usize) -> Self {
        let mut winding = vec![0i64; dim];
        winding[axis] = 1;
        SubmanifoldSpec::TorusLine {
            base: vec![0.0; dim],
            winding: Some(winding),
            direction: None,
            length: None,
        }
    }

    pub fn equator() -> Self {
        SubmanifoldSpec::SphereLatitudeCircle {
            colatitude: PI / 2.0,
        }
    }

    /// Meridian arc of length `length` starting at the north pole.
    pub fn meridian_arc(length: f64) -> Self {
        SubmanifoldSpec::SphereGreatArc {
            frame: [[0.0, 0.0, 1.0], [1.0, 0.0, 0.0]],
            length,
        }
    }
}

/// A validated submanifold with closed-form volume.
#[derive(Debug, Clone)]
pub enum Submanifold {
    TorusLine {
        manifold: Manifold,
        base: [f64; 3],
        unit_direction: [f64; 3],
        /// Integer winding vector for closed geodesics.
        winding: Option<[i64; 3]>,
        length: f64,
        closed: bool,
    },
    TorusCoordinateSubtorus {
        /// Frozen coordinates, sorted by index.
        fixed: Vec<(usize, f64)>,
        free: Vec<usize>,
    },
    SphereGreatArc {
        frame: [[f64; 3]; 2],
        length: f64,
        closed: bool,
    },
    SphereLatitudeCircle {
        colatitude: f64,
    },
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Validate a spec against its manifold and fill in closed-form geometry.
pub fn build_submanifold(
    spec: &SubmanifoldSpec,
    manifold: Manifold,
) -> Result<Submanifold, CurveError> {
    match spec {
        SubmanifoldSpec::TorusLine {
            base,
            winding,
            direction,
            length,
        } => {
            let dim = manifold.dimension();
            if !matches!(manifold, Manifold::FlatTorus2 | Manifold::FlatTorus3) || base.len() != dim
            {
                return Err(CurveError::ManifoldMismatch(manifold));
            }
            let mut base3 = [0.0; 3];
            base3[..dim].copy_from_slice(base);
            match (winding, direction) {
                (Some(w), None) => {
                    if w.len() != dim {
                        return Err(CurveError::ManifoldMismatch(manifold));
                    }
                    let g = w.iter().copied().fold(0, gcd);
                    if g != 1 {
                        return Err(CurveError::InvalidDirection(format!(
                            "winding {w:?} must be nonzero with coprime entries"
                        )));
                    }
                    let norm2: i64 = w.iter().map(|&p| p * p).sum();
                    let norm = (norm2 as f64).sqrt();
                    let closed_len = 2.0 * PI * norm;
                    if let Some(l) = length {
                        if (l - closed_len).abs() > 1e-9 * closed_len {
                            return Err(CurveError::InvalidLength(*l));
                        }
                    }
                    let mut w3 = [0i64; 3];
                    w3[..dim].copy_from_slice(w);
                    let mut unit = [0.0; 3];
                    for i in 0..dim {
                        unit[i] = w3[i] as f64 / norm;
                    }
                    Ok(Submanifold::TorusLine {
                        manifold,
                        base: base3,
                        unit_direction: unit,
                        winding: Some(w3),
                        length: closed_len,
                        closed: true,
                    })
                }
                (None, Some(dir)) => {
                    if dir.len() != dim {
                        return Err(CurveError::ManifoldMismatch(manifold));
                    }
                    let norm: f64 = dir.iter().map(|d| d * d).sum::<f64>().sqrt();
                    if (norm - 1.0).abs() > 1e-9 {
                        return Err(CurveError::InvalidDirection(format!(
                            "direction {dir:?} is not unit"
                        )));
                    }
                    let l = length.ok_or(CurveError::InvalidLength(0.0))?;
                    if l.is_nan() || l <= 0.0 {
                        return Err(CurveError::InvalidLength(l));
                    }
                    let mut unit = [0.0; 3];
                    unit[..dim].copy_from_slice(dir);
                    Ok(Submanifold::TorusLine {
                        manifold,
                        base: base3,
                        unit_direction: unit,
                        winding: None,
                        length: l,
                        closed: false,
                    })
                }
                _ => Err(CurveError::InvalidDirection(
                    "exactly one of winding or direction must be given".into(),
                )),
            }
        }
        SubmanifoldSpec::TorusCoordinateSubtorus { fixed } => {
            if manifold != Manifold::FlatTorus3 {
                return Err(CurveError::ManifoldMismatch(manifold));
            }
            if fixed.len() != 1 || fixed[0].0 >= 3 {
                return Err(CurveError::InvalidDirection(format!(
                    "coordinate subtorus of T³ freezes exactly one of the 3 axes, got {fixed:?}"
                )));
            }
            let free = (0..3).filter(|i| *i != fixed[0].0).collect();
            Ok(Submanifold::TorusCoordinateSubtorus {
                fixed: fixed.clone(),
                free,
            })
        }
        SubmanifoldSpec::SphereGreatArc { frame, length } => {
            if manifold != Manifold::RoundSphere2 {
                return Err(CurveError::ManifoldMismatch(manifold));
            }
            let dot =
                frame[0][0] * frame[1][0] + frame[0][1] * frame[1][1] + frame[0][2] * frame[1][2];
            let n0: f64 = frame[0].iter().map(|v| v * v).sum::<f64>().sqrt();
            let n1: f64 = frame[1].iter().map(|v| v * v).sum::<f64>().sqrt();
            if (n0 - 1.0).abs() > 1e-9 || (n1 - 1.0).abs() > 1e-9 || dot.abs() > 1e-9 {
                return Err(CurveError::InvalidDirection(
                    "great-arc frame must be orthonormal".into(),
                ));
            }
            if length.is_nan() || *length <= 0.0 || *length > 2.0 * PI + 1e-12 {
                return Err(CurveError::InvalidLength(*length));
            }
            Ok(Submanifold::SphereGreatArc {
                frame: *frame,
                length: *length,
                closed: (length - 2.0 * PI).abs() < 1e-12,
            })
        }
        SubmanifoldSpec::SphereLatitudeCircle { colatitude } => {
            if manifold != Manifold::RoundSphere2 {
                return Err(CurveError::ManifoldMismatch(manifold));
            }
            if colatitude.is_nan() || *colatitude <= 0.0 || *colatitude >= PI {
                return Err(CurveError::InvalidLength(*colatitude));
            }
            Ok(Submanifold::SphereLatitudeCircle {
                colatitude: *colatitude,
            })
        }
    }
}

impl Submanifold {
    pub fn dimension(&self) -> usize {
        match self {
            Submanifold::TorusCoordinateSubtorus { .. } => 2,
            _ => 1,
        }
    }

    /// Length (d = 1) or area (d = 2) under the induced measure.
    pub fn volume(&self) -> f64 {
        match self {
            Submanifold::TorusLine { length, .. } => *length,
            Submanifold::TorusCoordinateSubtorus { .. } => 4.0 * PI * PI,
            Submanifold::SphereGreatArc { length, .. } => *length,
            Submanifold::SphereLatitudeCircle { colatitude } => 2.0 * PI * colatitude.sin(),
        }
    }

    pub fn is_closed(&self) -> bool {
        match self {
            Submanifold::TorusLine { closed, .. } => *closed,
            Submanifold::TorusCoordinateSubtorus { .. } => true,
            Submanifold::SphereGreatArc { closed, .. } => *closed,
            Submanifold::SphereLatitudeCircle { .. } => true,
        }
    }

    /// Map quadrature parameters (arclength, or free torus angles for a
    /// subtorus) to a manifold point.
    pub fn point_at(&self, params: [f64; 2]) -> Point {
        match self {
            Submanifold::TorusLine {
                manifold,
                base,
                unit_direction,
                ..
            } => {
                let t = params[0];
                let x = [
                    base[0] + t * unit_direction[0],
                    base[1] + t * unit_direction[1],
                    base[2] + t * unit_direction[2],
                ];
                match manifold {
                    Manifold::FlatTorus2 => Point::Torus2(x[0], x[1]),
                    _ => Point::Torus3(x[0], x[1], x[2]),
                }
            }
            Submanifold::TorusCoordinateSubtorus { fixed, free } => {
                let mut x = [0.0; 3];
                x[fixed[0].0] = fixed[0].1;
                x[free[0]] = params[0];
                x[free[1]] = params[1];
                Point::Torus3(x[0], x[1], x[2])
            }
            Submanifold::SphereGreatArc { frame, .. } => {
                let (c, s) = (params[0].cos(), params[0].sin());
                let p = [
                    c * frame[0][0] + s * frame[1][0],
                    c * frame[0][1] + s * frame[1][1],
                    c * frame[0][2] + s * frame[1][2],
                ];
                Point::Sphere {
                    colatitude: p[2].clamp(-1.0, 1.0).acos(),
                    longitude: p[1].atan2(p[0]),
                }
            }
            Submanifold::SphereLatitudeCircle { colatitude } => Point::Sphere {
                colatitude: *colatitude,
                longitude: params[0] / colatitude.sin(),
            },
        }
    }
}

/// Discretization of a submanifold: parameter nodes with induced-measure
/// weights.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub nodes: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub dim: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn points(&self, sub: &Submanifold) -> Vec<Point> {
        self.nodes.iter().map(|&p| sub.point_at(p)).collect()
    }
}

/// Nyquist rule: at least 32 points per wavelength of the fastest mode, with
/// a floor of 64 nodes.
fn node_count(length: f64, max_frequency: f64) -> usize {
    let wavelengths = length * max_frequency / (2.0 * PI);
    (((4.0 * wavelengths).ceil() as usize) * 8).max(64)
}

/// Quadrature resolving all modes of frequency ≤ `max_frequency` on `sub`.
pub fn quadrature(sub: &Submanifold, max_frequency: f64) -> QuadratureRule {
    quadrature_with_refinement(sub, max_frequency, 1)
}

/// Same rule with the node count multiplied by `refine` (convergence checks).
pub fn quadrature_with_refinement(
    sub: &Submanifold,
    max_frequency: f64,
    refine: usize,
) -> QuadratureRule {
    match sub {
        Submanifold::TorusCoordinateSubtorus { .. } => {
            let m = node_count(2.0 * PI, max_frequency) * refine;
            let step = 2.0 * PI / m as f64;
            let w = step * step;
            let mut nodes = Vec::with_capacity(m * m);
            for i in 0..m {
                for j in 0..m {
                    nodes.push([i as f64 * step, j as f64 * step]);
                }
            }
            QuadratureRule {
                weights: vec![w; nodes.len()],
                nodes,
                dim: 2,
            }
        }
        _ => {
            let length = sub.volume();
            let m = node_count(length, max_frequency) * refine;
            if sub.is_closed() {
                let step = length / m as f64;
                QuadratureRule {
                    nodes: (0..m).map(|i| [i as f64 * step, 0.0]).collect(),
                    weights: vec![step; m],
                    dim: 1,
                }
            } else {
                let (xs, ws) = gauss_legendre(m);
                QuadratureRule {
                    nodes: xs.iter().map(|x| [0.5 * length * (x + 1.0), 0.0]).collect(),
                    weights: ws.iter().map(|w| 0.5 * length * w).collect(),
                    dim: 1,
                }
            }
        }
    }
}

/// Gauss–Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess for the i-th root from above.
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() <= 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn coordinate_circle_has_length_two_pi() {
        let spec = SubmanifoldSpec::coordinate_geodesic(2, 0);
        let sub = build_submanifold(&spec, Manifold::FlatTorus2).unwrap();
        assert!((sub.volume() - 2.0 * PI).abs() < 1e-15);
        assert!(sub.is_closed());
    }

    #[test]
    fn diagonal_geodesic_has_length_two_pi_sqrt2() {
        let spec = SubmanifoldSpec::TorusLine {
            base: vec![0.0, 0.0],
            winding: Some(vec![1, 1]),
            direction: None,
            length: None,
        };
        let sub = build_submanifold(&spec, Manifold::FlatTorus2).unwrap();
        assert!((sub.volume() - 2.0 * PI * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn equator_is_a_great_circle() {
        let sub = build_submanifold(&SubmanifoldSpec::equator(), Manifold::RoundSphere2).unwrap();
        assert!((sub.volume() - 2.0 * PI).abs() < 1e-15);
        assert!(sub.is_closed());
    }

    #[test]
    fn rejects_bad_directions() {
        let noncoprime = SubmanifoldSpec::TorusLine {
            base: vec![0.0, 0.0],
            winding: Some(vec![2, 4]),
            direction: None,
            length: None,
        };
        assert!(matches!(
            build_submanifold(&noncoprime, Manifold::FlatTorus2),
            Err(CurveError::InvalidDirection(_))
        ));
        let zero = SubmanifoldSpec::TorusLine {
            base: vec![0.0, 0.0],
            winding: Some(vec![0, 0]),
            direction: None,
            length: None,
        };
        assert!(build_submanifold(&zero, Manifold::FlatTorus2).is_err());
        let bad_len = SubmanifoldSpec::TorusLine {
            base: vec![0.0, 0.0],
            winding: None,
            direction: Some(vec![0.0, 1.0]),
            length: Some(-2.0),
        };
        assert!(matches!(
            build_submanifold(&bad_len, Manifold::FlatTorus2),
            Err(CurveError::InvalidLength(_))
        ));
    }

    #[test]
    fn equator_rule_matches_node_count_formula() {
        let sub = build_submanifold(&SubmanifoldSpec::equator(), Manifold::RoundSphere2).unwrap();
        let rule = quadrature(&sub, 16.0);
        assert_eq!(rule.len(), 512);
        for &w in &rule.weights {
            assert!((w - 2.0 * PI / 512.0).abs() < 1e-15);
        }
    }

    #[test]
    fn weights_sum_to_volume() {
        let specs = [
            (
                SubmanifoldSpec::coordinate_geodesic(2, 1),
                Manifold::FlatTorus2,
            ),
            (SubmanifoldSpec::equator(), Manifold::RoundSphere2),
            (SubmanifoldSpec::meridian_arc(0.8), Manifold::RoundSphere2),
            (
                SubmanifoldSpec::TorusCoordinateSubtorus {
                    fixed: vec![(2, 0.0)],
                },
                Manifold::FlatTorus3,
            ),
        ];
        for (spec, manifold) in specs {
            let sub = build_submanifold(&spec, manifold).unwrap();
            let rule = quadrature(&sub, 9.0);
            let total: f64 = crate::stats::neumaier_sum(&rule.weights);
            assert!(
                ((total - sub.volume()) / sub.volume()).abs() < 1e-12,
                "{spec:?}: {total} vs {}",
                sub.volume()
            );
        }
    }

    #[test]
    fn trapezoid_kills_resolved_harmonics() {
        // ∫ exp(i·12·t) dt over the circle vanishes exactly for any rule
        // resolving frequency 12.
        let spec = SubmanifoldSpec::coordinate_geodesic(2, 0);
        let sub = build_submanifold(&spec, Manifold::FlatTorus2).unwrap();
        let rule = quadrature(&sub, 12.0);
        let mut total = Complex64::default();
        for (node, w) in rule.nodes.iter().zip(&rule.weights) {
            total += Complex64::from_polar(1.0, 12.0 * node[0]) * w;
        }
        assert!(total.norm() < 1e-12, "residual {}", total.norm());
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        // n nodes are exact through degree 2n-1.
        let (xs, ws) = gauss_legendre(8);
        for degree in 0..=15u32 {
            let got: f64 = xs
                .iter()
                .zip(&ws)
                .map(|(x, w)| w * x.powi(degree as i32))
                .sum();
            let want = if degree % 2 == 0 {
                2.0 / (degree as f64 + 1.0)
            } else {
                0.0
            };
            assert!((got - want).abs() < 1e-13, "degree {degree}: {got}");
        }
    }

    #[test]
    fn gauss_legendre_oscillatory_arc() {
        // ∫₀^{0.8} cos(9 t) dt = sin(7.2)/9 on a meridian-arc-sized interval.
        let spec = SubmanifoldSpec::meridian_arc(0.8);
        let sub = build_submanifold(&spec, Manifold::RoundSphere2).unwrap();
        let rule = quadrature(&sub, 9.0);
        let got: f64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(t, w)| w * (9.0 * t[0]).cos())
            .sum();
        assert!((got - (7.2f64).sin() / 9.0).abs() < 1e-13);
    }

    #[test]
    fn refinement_changes_resolved_integrals_negligibly() {
        let spec = SubmanifoldSpec::equator();
        let sub = build_submanifold(&spec, Manifold::RoundSphere2).unwrap();
        let coarse = quadrature(&sub, 14.0);
        let fine = quadrature_with_refinement(&sub, 14.0, 2);
        let integrate = |rule: &QuadratureRule| -> f64 {
            rule.nodes
                .iter()
                .zip(&rule.weights)
                .map(|(t, w)| w * (3.0 * t[0]).sin().powi(2))
                .sum()
        };
        let a = integrate(&coarse);
        let b = integrate(&fine);
        assert!(((a - b) / b).abs() < 1e-12);
    }

    #[test]
    fn latitude_circle_points_stay_on_latitude() {
        let spec = SubmanifoldSpec::SphereLatitudeCircle { colatitude: 0.7 };
        let sub = build_submanifold(&spec, Manifold::RoundSphere2).unwrap();
        let rule = quadrature(&sub, 5.0);
        for p in rule.points(&sub) {
            match p {
                Point::Sphere { colatitude, .. } => assert!((colatitude - 0.7).abs() < 1e-15),
                _ => panic!("wrong point type"),
            }
        }
    }

    #[test]
    fn great_arc_through_pole_tracks_colatitude() {
        let spec = SubmanifoldSpec::meridian_arc(1.0);
        let sub = build_submanifold(&spec, Manifold::RoundSphere2).unwrap();
        for (i, p) in quadrature(&sub, 3.0).points(&sub).iter().enumerate() {
            let t = match &sub {
                Submanifold::SphereGreatArc { .. } => quadrature(&sub, 3.0).nodes[i][0],
                _ => unreachable!(),
            };
            match p {
                Point::Sphere { colatitude, .. } => {
                    assert!((colatitude - t).abs() < 1e-12, "t={t} θ={colatitude}")
                }
                _ => panic!("wrong point type"),
            }
        }
    }
}
