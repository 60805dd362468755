//! Fully normalized associated Legendre functions.
//!
//! `normalized_table(lmax, m, x)` returns Λ_ℓ^m(x) for ℓ = m..=lmax, where
//! Y_{ℓm}(θ, φ) = Λ_ℓ^m(cos θ) e^{imφ} are the orthonormal complex spherical
//! harmonics with the Condon–Shortley sign carried by Λ.
//!
//! The upward recurrence in ℓ on the fully normalized functions is stable for
//! degrees well beyond anything used here; the sectoral seed is built by
//! repeated multiplication, which simply underflows to zero near the poles at
//! large m instead of overflowing.

use std::f64::consts::PI;

/// Λ_ℓ^m(x) for ℓ = m, m+1, ..., lmax at fixed order m ≥ 0.
pub fn normalized_table(lmax: usize, m: usize, x: f64) -> Vec<f64> {
    assert!(m <= lmax, "order {m} exceeds degree {lmax}");
    assert!((-1.0..=1.0).contains(&x), "argument {x} outside [-1, 1]");
    let s = (1.0 - x * x).max(0.0).sqrt();

    // Sectoral seed Λ_m^m with Condon–Shortley sign.
    let mut pmm = 1.0 / (4.0 * PI).sqrt();
    for k in 1..=m {
        pmm *= -(((2 * k + 1) as f64) / ((2 * k) as f64)).sqrt() * s;
    }

    let mut out = Vec::with_capacity(lmax - m + 1);
    out.push(pmm);
    if lmax == m {
        return out;
    }

    let mut prev = pmm;
    let mut curr = x * ((2 * m + 3) as f64).sqrt() * pmm;
    out.push(curr);

    for l in (m + 2)..=lmax {
        let lf = l as f64;
        let mf = m as f64;
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let b =
            (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
        let next = a * (x * curr - b * prev);
        out.push(next);
        prev = curr;
        curr = next;
    }
    out
}

/// Single Λ_ℓ^m(x).
pub fn normalized_single(l: usize, m: usize, x: f64) -> f64 {
    let t = normalized_table(l, m, x);
    t[l - m]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_degree_closed_forms() {
        let x = 0.37;
        let s = (1.0f64 - x * x).sqrt();
        // Y_00 = 1/sqrt(4π)
        assert!((normalized_single(0, 0, x) - 1.0 / (4.0 * PI).sqrt()).abs() < 1e-15);
        // Y_10 = sqrt(3/4π) x
        assert!((normalized_single(1, 0, x) - (3.0 / (4.0 * PI)).sqrt() * x).abs() < 1e-15);
        // Y_11 = -sqrt(3/8π) sinθ
        assert!((normalized_single(1, 1, x) + (3.0 / (8.0 * PI)).sqrt() * s).abs() < 1e-15);
        // Y_20 = sqrt(5/4π) (3x² - 1)/2
        let want = (5.0 / (4.0 * PI)).sqrt() * (3.0 * x * x - 1.0) / 2.0;
        assert!((normalized_single(2, 0, x) - want).abs() < 1e-15);
    }

    #[test]
    fn addition_theorem() {
        // Σ_m |Y_ℓm|² = (2ℓ+1)/4π, with |Y_{ℓ,-m}| = |Y_{ℓm}|.
        for &l in &[3usize, 17, 120] {
            for &x in &[-0.9, -0.2, 0.0, 0.55, 0.99] {
                let mut total = 0.0;
                for m in 0..=l {
                    let v = normalized_single(l, m, x);
                    total += if m == 0 { v * v } else { 2.0 * v * v };
                }
                let want = (2 * l + 1) as f64 / (4.0 * PI);
                assert!(
                    ((total - want) / want).abs() < 1e-12,
                    "l={l} x={x}: {total} vs {want}"
                );
            }
        }
    }

    #[test]
    fn pole_values() {
        // At the pole only m = 0 survives, with Λ_ℓ0(1) = sqrt((2ℓ+1)/4π).
        for l in [0usize, 5, 40] {
            let v = normalized_single(l, 0, 1.0);
            let want = ((2 * l + 1) as f64 / (4.0 * PI)).sqrt();
            assert!((v - want).abs() < 1e-12 * want);
        }
        for m in 1..=6usize {
            assert_eq!(normalized_single(8, m, 1.0), 0.0);
        }
    }

    #[test]
    fn zonal_parity_at_equator() {
        for l in (1..200).step_by(2) {
            assert!(normalized_single(l, 0, 0.0).abs() < 1e-14);
        }
    }
}
