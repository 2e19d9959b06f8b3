//! Classical theta functions with rational characteristics.
//!
//! θ[α;β](z, τs) = Σ_{n∈ℤ} e(½(n+α)²τs + (n+α)(z+β)) with e(w) = exp(2πiw)
//! and Im τs > 0. These series are the independent oracle for the structure
//! constants of the module multiplication: 1⋆1 tables must reproduce theta
//! constants with the characteristics determined by the module geometry.

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

/// Errors from classical theta evaluation.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ThetaError {
    #[error("theta series needs Im(tau_s) > 0")]
    NotInUpperHalfPlane,
    #[error("characteristic denominator must be nonzero")]
    ZeroDenominator,
}

/// A rational characteristic [α; β], stored in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThetaCharacteristic {
    pub alpha: Rational64,
    pub beta: Rational64,
}

impl ThetaCharacteristic {
    /// Builds [α; β] from numerator/denominator pairs.
    pub fn new(
        alpha_num: i64,
        alpha_den: i64,
        beta_num: i64,
        beta_den: i64,
    ) -> Result<Self, ThetaError> {
        if alpha_den == 0 || beta_den == 0 {
            return Err(ThetaError::ZeroDenominator);
        }
        Ok(Self {
            alpha: Rational64::new(alpha_num, alpha_den),
            beta: Rational64::new(beta_num, beta_den),
        })
    }

    pub fn zero() -> Self {
        Self { alpha: Rational64::new(0, 1), beta: Rational64::new(0, 1) }
    }
}

/// e(w) = exp(2πi w).
pub fn e2pi(w: Complex64) -> Complex64 {
    (Complex64::new(0.0, 2.0 * std::f64::consts::PI) * w).exp()
}

/// Truncation radius for the theta series: the term envelope is
/// exp(−π Im(τs) t² + 2π|Im z| t) in t = |n+α|, so t past
/// (|Im z| + √(Im z² + Im(τs)·ln(1/tol)/π)) / Im(τs) keeps every dropped term
/// below tol.
fn series_radius(im_tau: f64, im_z: f64, tol: f64) -> f64 {
    let log_term = (1.0 / tol).ln() / std::f64::consts::PI;
    (im_z.abs() + (im_z * im_z + im_tau * log_term).sqrt()) / im_tau
}

/// Evaluates θ[α;β](z, τs) by direct summation, truncated where the term
/// envelope drops below `tol`.
pub fn classical_theta(
    ch: &ThetaCharacteristic,
    z: Complex64,
    tau_s: Complex64,
    tol: f64,
) -> Result<Complex64, ThetaError> {
    if tau_s.im <= 0.0 {
        return Err(ThetaError::NotInUpperHalfPlane);
    }
    let alpha = ch.alpha.to_f64().expect("rational characteristic fits f64");
    let beta = ch.beta.to_f64().expect("rational characteristic fits f64");
    let radius = series_radius(tau_s.im, z.im, tol);
    let lo = (-alpha - radius).floor() as i64 - 1;
    let hi = (-alpha + radius).ceil() as i64 + 1;
    let mut sum = Complex64::new(0.0, 0.0);
    for n in lo..=hi {
        let t = n as f64 + alpha;
        let w = tau_s * (0.5 * t * t) + (z + beta) * t;
        sum += e2pi(w);
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const TOL: f64 = 1e-12;

    /// Brute-force oracle: fixed wide window, no envelope logic.
    fn direct_sum(ch: &ThetaCharacteristic, z: Complex64, tau_s: Complex64, n_max: i64) -> Complex64 {
        let alpha = ch.alpha.to_f64().unwrap();
        let beta = ch.beta.to_f64().unwrap();
        let mut sum = Complex64::new(0.0, 0.0);
        for n in -n_max..=n_max {
            let t = n as f64 + alpha;
            sum += e2pi(tau_s * (0.5 * t * t) + (z + beta) * t);
        }
        sum
    }

    #[test]
    fn zero_characteristic_series_is_even_in_z() {
        let ch = ThetaCharacteristic::zero();
        let tau = Complex64::new(0.3, 1.1);
        for z in [Complex64::new(0.7, -0.2), Complex64::new(-1.3, 0.45)] {
            let plus = classical_theta(&ch, z, tau, TOL).unwrap();
            let minus = classical_theta(&ch, -z, tau, TOL).unwrap();
            assert_abs_diff_eq!(plus.re, minus.re, epsilon = 1e-11);
            assert_abs_diff_eq!(plus.im, minus.im, epsilon = 1e-11);
        }
    }

    #[test]
    fn theta_constant_at_tau_i_matches_direct_summation() {
        let ch = ThetaCharacteristic::zero();
        let v = classical_theta(&ch, Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0), TOL).unwrap();
        let oracle = direct_sum(&ch, Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0), 50);
        assert_abs_diff_eq!(v.re, oracle.re, epsilon = 1e-13);
        assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-13);
        assert_abs_diff_eq!(v.re, 1.0864348112, epsilon = 1e-9);
    }

    #[test]
    fn quasi_periodicity_in_z_picks_up_e_alpha() {
        let ch = ThetaCharacteristic::new(2, 5, 1, 3).unwrap();
        let tau = Complex64::new(-0.2, 0.9);
        let z = Complex64::new(0.31, 0.17);
        let shifted = classical_theta(&ch, z + 1.0, tau, TOL).unwrap();
        let phase = e2pi(Complex64::new(ch.alpha.to_f64().unwrap(), 0.0));
        let expected = phase * classical_theta(&ch, z, tau, TOL).unwrap();
        assert_abs_diff_eq!(shifted.re, expected.re, epsilon = 1e-11);
        assert_abs_diff_eq!(shifted.im, expected.im, epsilon = 1e-11);
    }

    #[test]
    fn truncated_series_is_stable_under_doubling_the_radius() {
        let cases = [
            (ThetaCharacteristic::zero(), Complex64::new(0.4, 0.6), Complex64::new(0.0, 0.5)),
            (ThetaCharacteristic::new(1, 2, -3, 7).unwrap(), Complex64::new(-0.8, -0.4), Complex64::new(0.25, 1.5)),
            (ThetaCharacteristic::new(-5, 24, 0, 1).unwrap(), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.96)),
        ];
        for (ch, z, tau) in cases {
            let v = classical_theta(&ch, z, tau, TOL).unwrap();
            let alpha = ch.alpha.to_f64().unwrap();
            let wide = 2 * (series_radius(tau.im, z.im, TOL) + alpha.abs()).ceil() as i64 + 2;
            let oracle = direct_sum(&ch, z, tau, wide);
            assert!((v - oracle).norm() < TOL, "radius doubling moved the value by {}", (v - oracle).norm());
        }
    }

    #[test]
    fn rejects_lower_half_plane() {
        let ch = ThetaCharacteristic::zero();
        let err = classical_theta(&ch, Complex64::new(0.0, 0.0), Complex64::new(0.0, -1.0), TOL);
        assert!(matches!(err, Err(ThetaError::NotInUpperHalfPlane)));
    }

    #[test]
    fn characteristics_reduce_to_lowest_terms_with_positive_denominator() {
        let ch = ThetaCharacteristic::new(2, -4, 3, 9).unwrap();
        assert_eq!(ch.alpha, Rational64::new(-1, 2));
        assert_eq!(*ch.alpha.denom(), 2);
        assert_eq!(ch.beta, Rational64::new(1, 3));
        assert!(matches!(ThetaCharacteristic::new(1, 0, 0, 1), Err(ThetaError::ZeroDenominator)));
    }
}
