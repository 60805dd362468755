//! The random ensemble: uniform sampling of the L² unit sphere of a cluster,
//! the period random variable F₁(u) = |∫_S u dσ|, pointwise field values, and
//! restricted L^q norms.
//!
//! A coefficient vector is 2 N_h standard normals from the counter-based
//! substream (seed, sample index), normalized to the unit sphere; the pairing
//! with a period vector is bilinear, so F₁(z) is literally |∫_S u_z dσ| for
//! u_z = Σ z_k φ_k.

use num_complex::Complex64;
use thiserror::Error;

use crate::curves::{QuadratureRule, Submanifold};
use crate::periods::PeriodVector;
use crate::rng::CounterRng;
use crate::spectral::{evaluate_modes_at_point, Cluster, ModeLabel, Point, SpectralError};
use crate::stats::neumaier_sum;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnsembleError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("restriction evaluator would need {entries} cached entries; curve not groupable")]
    EvaluatorTooLarge { entries: usize },
    #[error("coefficient length {z} does not match {other}")]
    LengthMismatch { z: usize, other: usize },
}

/// A point on the unit sphere of ℂ^{N_h}, reproducible from (seed, index).
#[derive(Debug, Clone)]
pub struct CoefficientVector {
    pub components: Vec<Complex64>,
    pub seed: u64,
    pub sample_index: u64,
}

/// Draw z uniformly on the unit sphere of ℂ^{n}: 2n Gaussians, normalized.
/// An all-zero draw (probability 0) retries on the same substream.
pub fn sample_coefficients(n: usize, seed: u64, sample_index: u64) -> CoefficientVector {
    assert!(n >= 1, "cluster dimension must be positive");
    let mut rng = CounterRng::substream(seed, sample_index);
    loop {
        let mut components = Vec::with_capacity(n);
        for _ in 0..n {
            let (re, im) = rng.next_gaussian_pair();
            components.push(Complex64::new(re, im));
        }
        let norms: Vec<f64> = components.iter().map(|z| z.norm_sqr()).collect();
        let norm = neumaier_sum(&norms).sqrt();
        if norm > 0.0 {
            for z in &mut components {
                *z /= norm;
            }
            return CoefficientVector {
                components,
                seed,
                sample_index,
            };
        }
    }
}

/// F₁(u) = |Σ_k z_k b_k|, the modulus of the period of u = Σ z_k φ_k.
pub fn period_rv(z: &CoefficientVector, b: &PeriodVector) -> f64 {
    assert_eq!(z.components.len(), b.components.len());
    let mut acc = Complex64::default();
    for (zk, bk) in z.components.iter().zip(&b.components) {
        acc += zk * bk;
    }
    acc.norm()
}

/// A random element u ∈ S_h tied to its cluster.
#[derive(Debug, Clone)]
pub struct RandomFieldSample<'a> {
    pub coefficients: CoefficientVector,
    pub cluster: &'a Cluster,
}

impl<'a> RandomFieldSample<'a> {
    pub fn new(
        coefficients: CoefficientVector,
        cluster: &'a Cluster,
    ) -> Result<Self, EnsembleError> {
        if coefficients.components.len() != cluster.dimension() {
            return Err(EnsembleError::LengthMismatch {
                z: coefficients.components.len(),
                other: cluster.dimension(),
            });
        }
        Ok(RandomFieldSample {
            coefficients,
            cluster,
        })
    }
}

/// u(x) = Σ_k z_k φ_k(x).
pub fn field_eval(sample: &RandomFieldSample, point: &Point) -> Result<Complex64, EnsembleError> {
    let b = evaluate_modes_at_point(sample.cluster, point)?;
    let mut acc = Complex64::default();
    for (zk, bk) in sample.coefficients.components.iter().zip(&b) {
        acc += zk * bk;
    }
    Ok(acc)
}

/// ‖u‖_{L^q(S)} = (Σ w_j |u(x_j)|^q)^{1/q} by direct per-node evaluation.
pub fn lq_norm_rv(
    sample: &RandomFieldSample,
    sub: &Submanifold,
    rule: &QuadratureRule,
    q: f64,
) -> Result<f64, EnsembleError> {
    assert!(q >= 2.0, "restricted norms are defined for q ≥ 2 here");
    let mut terms = Vec::with_capacity(rule.len());
    for (node, &w) in rule.nodes.iter().zip(&rule.weights) {
        let u = field_eval(sample, &sub.point_at(*node))?;
        terms.push(w * u.norm().powf(q));
    }
    Ok(neumaier_sum(&terms).powf(1.0 / q))
}

/// Maximum cached-matrix size (complex entries) before construction refuses.
const CACHE_LIMIT: usize = 1 << 22;

enum EvalKind {
    /// Closed torus geodesic: modes grouped by the integer along-curve
    /// frequency ν = k·w, evaluated by a phase recurrence per node.
    TorusLine {
        /// ν index (shifted by nu_min) per mode.
        group: Vec<usize>,
        /// e^{i k·base} per mode, including the 1/√Vol normalization folded
        /// into the group coefficients at evaluation time.
        base_phase: Vec<Complex64>,
        nu_min: i64,
        nu_count: usize,
        /// t_j / |w| per node.
        node_angle: Vec<f64>,
        inv_sqrt_vol: f64,
        /// Multiplicity of each ν group (for the exact restriction norm).
        multiplicity: Vec<usize>,
        length: f64,
        volume_m: f64,
    },
    /// Explicit node×mode matrix.
    Cached {
        values: Vec<Complex64>,
        n_modes: usize,
        weights: Vec<f64>,
        sup_row_norm: f64,
    },
}

/// Evaluates u_z at every quadrature node of a fixed (cluster, submanifold,
/// rule) triple, amortizing the geometry across samples.
pub struct CurveFieldEvaluator {
    kind: EvalKind,
    weights: Vec<f64>,
}

impl CurveFieldEvaluator {
    pub fn new(
        cluster: &Cluster,
        sub: &Submanifold,
        rule: &QuadratureRule,
    ) -> Result<Self, EnsembleError> {
        if let Submanifold::TorusLine {
            winding: Some(w),
            base,
            closed: true,
            length,
            ..
        } = sub
        {
            let norm = ((w[0] * w[0] + w[1] * w[1] + w[2] * w[2]) as f64).sqrt();
            let mut nus = Vec::with_capacity(cluster.dimension());
            let mut base_phase = Vec::with_capacity(cluster.dimension());
            for mode in &cluster.modes {
                let k = match mode.label {
                    ModeLabel::Torus2([a, b]) => [a, b, 0],
                    ModeLabel::Torus3(k) => k,
                    _ => {
                        return Err(EnsembleError::Spectral(SpectralError::InvalidPoint(
                            cluster.manifold,
                        )))
                    }
                };
                nus.push(k[0] * w[0] + k[1] * w[1] + k[2] * w[2]);
                let phase = k[0] as f64 * base[0] + k[1] as f64 * base[1] + k[2] as f64 * base[2];
                base_phase.push(Complex64::from_polar(1.0, phase));
            }
            let nu_min = *nus.iter().min().expect("nonempty cluster");
            let nu_max = *nus.iter().max().expect("nonempty cluster");
            let nu_count = (nu_max - nu_min) as usize + 1;
            let group: Vec<usize> = nus.iter().map(|&v| (v - nu_min) as usize).collect();
            let mut multiplicity = vec![0usize; nu_count];
            for &g in &group {
                multiplicity[g] += 1;
            }
            return Ok(CurveFieldEvaluator {
                kind: EvalKind::TorusLine {
                    group,
                    base_phase,
                    nu_min,
                    nu_count,
                    node_angle: rule.nodes.iter().map(|t| t[0] / norm).collect(),
                    inv_sqrt_vol: 1.0 / cluster.manifold.volume().sqrt(),
                    multiplicity,
                    length: *length,
                    volume_m: cluster.manifold.volume(),
                },
                weights: rule.weights.clone(),
            });
        }

        let entries = rule.len() * cluster.dimension();
        if entries > CACHE_LIMIT {
            return Err(EnsembleError::EvaluatorTooLarge { entries });
        }
        let n_modes = cluster.dimension();
        let mut values = Vec::with_capacity(entries);
        let mut sup_row_norm = 0.0f64;
        for node in &rule.nodes {
            let b = evaluate_modes_at_point(cluster, &sub.point_at(*node))?;
            let row: f64 = b.iter().map(|v| v.norm_sqr()).sum();
            sup_row_norm = sup_row_norm.max(row.sqrt());
            values.extend(b);
        }
        Ok(CurveFieldEvaluator {
            kind: EvalKind::Cached {
                values,
                n_modes,
                weights: rule.weights.clone(),
                sup_row_norm,
            },
            weights: rule.weights.clone(),
        })
    }

    pub fn node_count(&self) -> usize {
        self.weights.len()
    }

    /// u_z at every node.
    pub fn eval_at_nodes(&self, z: &[Complex64]) -> Vec<Complex64> {
        match &self.kind {
            EvalKind::TorusLine {
                group,
                base_phase,
                nu_min,
                nu_count,
                node_angle,
                inv_sqrt_vol,
                ..
            } => {
                let mut coeff = vec![Complex64::default(); *nu_count];
                for ((zk, ph), &g) in z.iter().zip(base_phase).zip(group) {
                    coeff[g] += zk * ph;
                }
                node_angle
                    .iter()
                    .map(|&a| {
                        let step = Complex64::from_polar(1.0, a);
                        let mut phase = Complex64::from_polar(1.0, *nu_min as f64 * a);
                        let mut acc = Complex64::default();
                        for c in &coeff {
                            acc += c * phase;
                            phase *= step;
                        }
                        acc * *inv_sqrt_vol
                    })
                    .collect()
            }
            EvalKind::Cached {
                values, n_modes, ..
            } => values
                .chunks_exact(*n_modes)
                .map(|row| {
                    let mut acc = Complex64::default();
                    for (zk, bk) in z.iter().zip(row) {
                        acc += zk * bk;
                    }
                    acc
                })
                .collect(),
        }
    }

    /// ‖u_z‖_{L^q} for each q, sharing one field evaluation.
    pub fn lq_norms(&self, z: &[Complex64], qs: &[f64]) -> Vec<f64> {
        let field = self.eval_at_nodes(z);
        qs.iter()
            .map(|&q| {
                let terms: Vec<f64> = field
                    .iter()
                    .zip(&self.weights)
                    .map(|(u, &w)| w * u.norm().powf(q))
                    .collect();
                neumaier_sum(&terms).powf(1.0 / q)
            })
            .collect()
    }

    /// Exact (torus) or power-iterated operator norm of the restriction
    /// z ↦ u_z|_S in L²(S): the Lipschitz constant of ‖u‖_{L²(S)}.
    pub fn restriction_l2_norm(&self) -> f64 {
        match &self.kind {
            EvalKind::TorusLine {
                multiplicity,
                length,
                volume_m,
                ..
            } => {
                let n_max = *multiplicity.iter().max().expect("nonempty") as f64;
                (length / volume_m * n_max).sqrt()
            }
            EvalKind::Cached {
                values,
                n_modes,
                weights,
                ..
            } => {
                // Power iteration on M = B* W B.
                let n = *n_modes;
                let mut v: Vec<Complex64> = (0..n)
                    .map(|i| Complex64::new(1.0 + (i as f64) * 1e-3, 0.5))
                    .collect();
                let mut lambda = 0.0;
                for _ in 0..200 {
                    // y = W^(1/2)-free: apply B then weights then B*.
                    let mut field = vec![Complex64::default(); weights.len()];
                    for (j, row) in values.chunks_exact(n).enumerate() {
                        let mut acc = Complex64::default();
                        for (zk, bk) in v.iter().zip(row) {
                            acc += zk * bk;
                        }
                        field[j] = acc * weights[j];
                    }
                    let mut next = vec![Complex64::default(); n];
                    for (j, row) in values.chunks_exact(n).enumerate() {
                        for (nk, bk) in next.iter_mut().zip(row) {
                            *nk += bk.conj() * field[j];
                        }
                    }
                    let norm: f64 = next.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
                    lambda = norm;
                    for x in &mut next {
                        *x /= norm;
                    }
                    v = next;
                }
                lambda.sqrt()
            }
        }
    }

    /// sup over nodes of |b_{x,h}|: bounds ‖u_z‖_{L^∞(S)} by Cauchy–Schwarz.
    pub fn restriction_sup_norm(&self) -> f64 {
        match &self.kind {
            EvalKind::TorusLine {
                inv_sqrt_vol,
                group,
                ..
            } => inv_sqrt_vol * (group.len() as f64).sqrt(),
            EvalKind::Cached { sup_row_norm, .. } => *sup_row_norm,
        }
    }

    /// Valid Lipschitz constant for z ↦ ‖u_z‖_{L^q(S)}: the exact operator
    /// norm at q = 2, interpolated through L^∞ for q > 2.
    pub fn lq_lipschitz_bound(&self, q: f64) -> f64 {
        let r2 = self.restriction_l2_norm();
        if q <= 2.0 {
            r2
        } else {
            self.restriction_sup_norm().powf(1.0 - 2.0 / q) * r2.powf(2.0 / q)
        }
    }
}
