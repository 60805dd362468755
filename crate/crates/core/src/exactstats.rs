//! Closed-form laws for the period random variable F₁ = |⟨z, b_{S,h}⟩| of a
//! cluster of complex dimension N_h with N(S)_h = |b|².
//!
//! The coefficient vector is uniform on the unit sphere of ℂ^{N_h}, i.e. on a
//! real sphere of dimension 2 N_h − 1. Grouping the 2 N_h real coordinates as
//! 2 + (2 N_h − 2) gives the survival function
//!     P(F₁ > λ) = (1 − λ²/N(S)_h)^{N_h − 1},
//! and everything else here (moments A_{p,h}, medians, concentration rates,
//! restricted-norm moments B_{q,h}) is derived from it. Moments carry the
//! factor 1/2 from ∫₀¹ η^{p-1} (1-η²)^{N-1} dη = (1/2) B(p/2, N).

use thiserror::Error;

use crate::special::SpecialError;

pub use crate::special::{beta, log_beta, log_gamma};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("law needs N_h ≥ 2, got {0}")]
    TooSmallCluster(usize),
    #[error("invalid law parameter: {0}")]
    DomainError(String),
    #[error("mean–median gap bound is unbounded at N_h = 2")]
    Unbounded,
    #[error(transparent)]
    Special(#[from] SpecialError),
}

/// The pair (N_h, N(S)_h) that parameterizes every exact law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactLaw {
    dimension: usize,
    ns: f64,
}

impl ExactLaw {
    pub fn new(dimension: usize, ns: f64) -> Result<Self, StatsError> {
        if dimension < 2 {
            return Err(StatsError::TooSmallCluster(dimension));
        }
        if !ns.is_finite() || ns < 0.0 {
            return Err(StatsError::DomainError(format!("N(S)_h = {ns}")));
        }
        Ok(ExactLaw { dimension, ns })
    }

    /// N_h (complex dimension).
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// N(S)_h = |b_{S,h}|².
    pub fn ns(&self) -> f64 {
        self.ns
    }
}

/// P(F₁ > λ) = (1 − λ²/NS)^{N_h − 1}, clamped to 0 at λ ≥ √NS.
pub fn survival_exact(lambda: f64, law: &ExactLaw) -> f64 {
    debug_assert!(lambda >= 0.0);
    if law.ns == 0.0 {
        return if lambda == 0.0 { 1.0 } else { 0.0 };
    }
    let t = lambda * lambda / law.ns;
    if t >= 1.0 {
        0.0
    } else {
        (1.0 - t).powi(law.dimension as i32 - 1)
    }
}

/// A_{p,h} = E[F₁^p] = (p/2) · NS^{p/2} · B(p/2, N_h).
pub fn moment_exact(p: u32, law: &ExactLaw) -> f64 {
    assert!(p >= 1, "moment order must be a positive integer");
    let pf = p as f64;
    let b = log_beta(pf / 2.0, law.dimension as f64)
        .expect("positive beta arguments")
        .exp();
    0.5 * pf * law.ns.powf(pf / 2.0) * b
}

/// The unique λ with survival 1/2: M₁ = √(NS (1 − 2^{-1/(N_h-1)})).
pub fn median_exact(law: &ExactLaw) -> f64 {
    if law.ns == 0.0 {
        return 0.0;
    }
    let e = -1.0 / (law.dimension as f64 - 1.0);
    (law.ns * (1.0 - 2f64.powf(e))).sqrt()
}

/// Lipschitz constant of F_p on the coefficient sphere: p · NS^{p/2}.
pub fn lipschitz_const_period(p: u32, ns: f64) -> f64 {
    p as f64 * ns.powf(p as f64 / 2.0)
}

/// A Gaussian tail bound P(|X − median| > r) ≤ prefactor · exp(−rate · r²).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviationBound {
    pub prefactor: f64,
    pub rate: f64,
}

impl DeviationBound {
    pub fn evaluate(&self, r: f64) -> f64 {
        self.prefactor * (-self.rate * r * r).exp()
    }
}

/// The two concentration normalizations, side by side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcentrationBounds {
    /// 2 exp(−(2N_h − 2) r² / (2 L²)) with L = p NS^{p/2}: the real sphere
    /// has dimension 2N_h, so N − 2 = 2N_h − 2. This form is contractual.
    pub derived: DeviationBound,
    /// 2 exp(−(N_h − 2) r² / (p NS^p)): the variant counting the complex
    /// dimension N_h − 2 with denominator p NS^p. Reported for side-by-side
    /// comparison, never asserted.
    pub complex_dim_variant: DeviationBound,
}

pub fn concentration_bound_period(p: u32, law: &ExactLaw) -> ConcentrationBounds {
    let n = law.dimension as f64;
    let lip = lipschitz_const_period(p, law.ns);
    ConcentrationBounds {
        derived: DeviationBound {
            prefactor: 2.0,
            rate: (2.0 * n - 2.0) / (2.0 * lip * lip),
        },
        complex_dim_variant: DeviationBound {
            prefactor: 2.0,
            rate: (n - 2.0) / (p as f64 * law.ns.powi(p as i32)),
        },
    }
}

/// Derived bound evaluated at r (the contractual form).
pub fn concentration_bound_at(r: f64, p: u32, law: &ExactLaw) -> f64 {
    concentration_bound_period(p, law).derived.evaluate(r)
}

/// |A_{p,h} − M_{p,h}| ≤ (π/2) (2 NS^p / (N_h − 2))^{1/2}.
/// Uses the complex-dimension count N_h − 2; N_h = 2 is rejected.
pub fn mean_median_gap_bound(p: u32, law: &ExactLaw) -> Result<f64, StatsError> {
    if law.dimension == 2 {
        return Err(StatsError::Unbounded);
    }
    let n = law.dimension as f64;
    Ok(std::f64::consts::FRAC_PI_2 * (2.0 * law.ns.powi(p as i32) / (n - 2.0)).sqrt())
}

/// Concentration of the renormalized variable F̃_p = F_p / (p NS^{p/2}):
/// the Lipschitz constant scales away and the rate becomes N_h − 1.
pub fn renormalized_bound(law: &ExactLaw) -> DeviationBound {
    DeviationBound {
        prefactor: 2.0,
        rate: law.dimension as f64 - 1.0,
    }
}

/// B_{q,h} = [ q · (∫_S |b_{s,h}|^q dσ) · (1/2) B(q/2, N_h) ]^{1/q};
/// `profile_integral` is ∫_S |b_{s,h}|^q dσ.
pub fn bqh_exact(q: f64, n_h: usize, profile_integral: f64) -> Result<f64, StatsError> {
    if q.is_nan() || q < 2.0 {
        return Err(StatsError::DomainError(format!("q = {q} < 2")));
    }
    if profile_integral.is_nan() || profile_integral < 0.0 {
        return Err(StatsError::DomainError(format!(
            "profile integral = {profile_integral}"
        )));
    }
    let b = log_beta(q / 2.0, n_h as f64)?.exp();
    Ok((q * profile_integral * 0.5 * b).powf(1.0 / q))
}

/// Uniform pointwise profile |b_{s,h}|² = N_h / Vol(M): exact on tori, and on
/// sphere clusters holding all orders of each degree (addition theorem), so
/// the profile integral is L (N_h / Vol)^{q/2}.
pub fn bqh_exact_uniform_profile(
    q: f64,
    n_h: usize,
    length: f64,
    volume: f64,
) -> Result<f64, StatsError> {
    let integral = length * (n_h as f64 / volume).powf(q / 2.0);
    bqh_exact(q, n_h, integral)
}

/// B_{q,h} from a pointwise norm profile s ↦ |b_{s,h}| sampled on a
/// quadrature rule: the profile integral is Σ w_i · profile(t_i)^q.
pub fn bqh_exact_with_profile<F: Fn([f64; 2]) -> f64>(
    q: f64,
    n_h: usize,
    rule: &crate::curves::QuadratureRule,
    profile: F,
) -> Result<f64, StatsError> {
    let terms: Vec<f64> = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&node, &w)| w * profile(node).powf(q))
        .collect();
    bqh_exact(q, n_h, crate::stats::neumaier_sum(&terms))
}

/// The h → 0 limit of B_{q,h}^q on a torus: Γ(q/2 + 1) · L / Vol^{q/2}.
pub fn bqh_limit_uniform_profile(q: f64, length: f64, volume: f64) -> Result<f64, StatsError> {
    let lg = crate::special::log_gamma(q / 2.0 + 1.0)?;
    Ok((lg.exp() * length / volume.powf(q / 2.0)).powf(1.0 / q))
}

/// Restriction exponent δ(q) of the L^q Lipschitz bound:
/// 1/2 − 1/q for q ≥ 4, 1/4 for 2 ≤ q ≤ 4.
pub fn delta_exponent(q: f64) -> Result<f64, StatsError> {
    if q.is_nan() || q < 2.0 {
        return Err(StatsError::DomainError(format!("q = {q} < 2")));
    }
    Ok(if q >= 4.0 { 0.5 - 1.0 / q } else { 0.25 })
}

/// Exponent e with G(h) = h^e in the restricted-norm concentration rate:
/// −2/q for q ≥ 4, −1/2 for 2 ≤ q ≤ 4.
pub fn g_rate_exponent(q: f64) -> Result<f64, StatsError> {
    if q.is_nan() || q < 2.0 {
        return Err(StatsError::DomainError(format!("q = {q} < 2")));
    }
    Ok(if q >= 4.0 { -2.0 / q } else { -0.5 })
}
