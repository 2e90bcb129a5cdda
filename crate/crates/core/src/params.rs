//! Dimension- and mode-dependent constants, and the admissibility tests that
//! gate the experiments.

use serde::Serialize;

use crate::error::{Error, Result};

/// Constants attached to a dimension `n` (hypersurface `Σ^{2n-1} ⊂ ℝ^{2n}`)
/// and an eigenmode `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Params {
    pub n: u32,
    pub k: u32,
    /// Decay exponent of the minimal surface towards the cone, `α = α₊ < 0`.
    pub alpha: f64,
    pub alpha_plus: f64,
    pub alpha_minus: f64,
    pub lambda_k: f64,
    pub sigma_k: f64,
    /// Order of the Bessel operator on the cone.
    pub mu: f64,
    /// Singular time of the experiment.
    #[serde(rename = "T")]
    pub t_sing: f64,
}

fn discriminant(n: f64) -> f64 {
    (2.0 * n - 3.0).powi(2) - 8.0 * (n - 1.0)
}

/// `α` from the quadratic formula of the indicial equation at infinity.
pub fn alpha(n: u32) -> f64 {
    let n = n as f64;
    0.5 * (-(2.0 * n - 3.0) + discriminant(n).sqrt())
}

/// Second closed form for `α`, written with `(2n-1)² - 16(n-1)`.
pub fn alpha_alt(n: u32) -> f64 {
    let n = n as f64;
    -(2.0 * n - 3.0) / 2.0 + 0.5 * ((2.0 * n - 1.0).powi(2) - 16.0 * (n - 1.0)).sqrt()
}

pub fn alpha_minus(n: u32) -> f64 {
    let n = n as f64;
    0.5 * (-(2.0 * n - 3.0) - discriminant(n).sqrt())
}

pub fn bessel_order(n: u32) -> f64 {
    let n = n as f64;
    (0.25 + (n - 1.0) * (n - 4.0)).sqrt()
}

/// Derives every constant for `(n, k)`. Requires `n ≥ 4` and `k ≥ 2`.
pub fn derive_constants(n: u32, k: u32) -> Result<Params> {
    if n < 4 {
        return Err(Error::domain(format!("dimension n = {n} violates n >= 4")));
    }
    if k < 2 {
        return Err(Error::domain(format!("eigenmode k = {k} violates k >= 2")));
    }
    let alpha = alpha(n);
    let lambda_k = (alpha - 1.0) / 2.0 + k as f64;
    let sigma_k = lambda_k / (1.0 + alpha.abs());
    Ok(Params {
        n,
        k,
        alpha,
        alpha_plus: alpha,
        alpha_minus: alpha_minus(n),
        lambda_k,
        sigma_k,
        mu: bessel_order(n),
        t_sing: 1.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentCheck {
    pub a: f64,
    pub value: f64,
    pub admissible: bool,
    /// Whether `a` lies in the open window `(|α|, |α|+1)`.
    pub in_window: bool,
}

impl Params {
    pub fn with_singular_time(mut self, t_sing: f64) -> Self {
        self.t_sing = t_sing;
        self
    }

    /// `λ_k (1 - a/(1+|α|)) - 1/2`, non-negative when the bounded-curvature
    /// argument in the parabolic region applies with weight exponent `a`.
    pub fn exponent_condition(&self, a: f64) -> ExponentCheck {
        let abs_alpha = self.alpha.abs();
        let value = self.lambda_k * (1.0 - a / (1.0 + abs_alpha)) - 0.5;
        ExponentCheck {
            a,
            value,
            admissible: value >= 0.0,
            in_window: a > abs_alpha && a < abs_alpha + 1.0,
        }
    }

    /// The sub-interval of `(|α|, |α|+1)` on which the exponent condition
    /// holds, if any. The condition is affine and decreasing in `a`.
    pub fn admissible_window(&self) -> Option<(f64, f64)> {
        let abs_alpha = self.alpha.abs();
        let a_star = (1.0 + abs_alpha) * (1.0 - 0.5 / self.lambda_k);
        if a_star > abs_alpha {
            Some((abs_alpha, a_star.min(abs_alpha + 1.0)))
        } else {
            None
        }
    }

    /// Blow-up scale `Λ(t) = (T-t)^{-σ_k - 1/2}`.
    pub fn blowup_scale(&self, t: f64) -> Result<f64> {
        let gap = self.time_to_singularity(t)?;
        Ok(gap.powf(-self.sigma_k - 0.5))
    }

    pub(crate) fn time_to_singularity(&self, t: f64) -> Result<f64> {
        let gap = self.t_sing - t;
        if gap > 0.0 {
            Ok(gap)
        } else {
            Err(Error::domain(format!("t = {t} is not before the singular time T = {}", self.t_sing)))
        }
    }

    /// `(2λ+1)(2λ) + (n-1)(2λ+1) + (n-1)`, the ratio `C₁/C₀` of the outer
    /// supersolution.
    pub fn barrier_bracket(&self) -> f64 {
        let l = self.lambda_k;
        let nm1 = self.n as f64 - 1.0;
        (2.0 * l + 1.0) * (2.0 * l) + nm1 * (2.0 * l + 1.0) + nm1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n4_k2() {
        let p = derive_constants(4, 2).unwrap();
        assert_eq!(p.alpha, -2.0);
        assert!((p.lambda_k - 0.5).abs() < 1e-15);
        assert!((p.sigma_k - 1.0 / 6.0).abs() < 1e-15);
        assert!((p.mu - 0.5).abs() < 1e-15);
        assert_eq!(p.alpha_minus, -3.0);
    }

    #[test]
    fn n4_k4() {
        let p = derive_constants(4, 4).unwrap();
        assert!((p.lambda_k - 2.5).abs() < 1e-15);
        assert!((p.sigma_k - 5.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn n5_k2() {
        let p = derive_constants(5, 2).unwrap();
        assert!((p.mu - 17f64.sqrt() / 2.0).abs() < 1e-14);
        assert!((p.mu - 2.06155).abs() < 1e-5);
        assert!(p.alpha.abs() < 1.5);
    }

    #[test]
    fn rejects_small_parameters() {
        match derive_constants(3, 2) {
            Err(Error::Domain(m)) => assert!(m.contains("n >= 4")),
            other => panic!("{other:?}"),
        }
        match derive_constants(4, 1) {
            Err(Error::Domain(m)) => assert!(m.contains("k >= 2")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn exponent_condition_examples() {
        let p = derive_constants(4, 2).unwrap();
        let c = p.exponent_condition(2.1);
        assert!(c.value < 0.0 && !c.admissible);

        let p = derive_constants(4, 4).unwrap();
        let c = p.exponent_condition(2.1);
        assert!((c.value - 0.25).abs() < 1e-14);
        assert!(c.admissible && c.in_window);

        let p = derive_constants(5, 3).unwrap();
        let c = p.exponent_condition(p.alpha.abs() + 1e-3);
        assert!(c.admissible);
    }

    #[test]
    fn blowup_scale_examples() {
        let p = derive_constants(4, 2).unwrap();
        assert_eq!(p.blowup_scale(0.0).unwrap(), 1.0);
        let p = derive_constants(4, 4).unwrap();
        let expected = 100f64.powf(4.0 / 3.0);
        assert!((p.blowup_scale(0.99).unwrap() - expected).abs() / expected < 1e-12);
        assert!((expected - 464.159).abs() < 1e-3);
        assert!(p.blowup_scale(0.5).unwrap() < p.blowup_scale(0.6).unwrap());
        assert!(p.blowup_scale(1.0).is_err());
    }

    #[test]
    fn closed_forms_agree_up_to_64() {
        let mut prev = f64::INFINITY;
        for n in 4..=64 {
            assert!((alpha(n) - alpha_alt(n)).abs() < 1e-12);
            assert!((bessel_order(n) + 0.5 - (n as f64 - 1.0 + alpha(n))).abs() < 1e-12);
            assert!(alpha(n).abs() < prev);
            prev = alpha(n).abs();
            for k in 2..=8 {
                let p = derive_constants(n, k).unwrap();
                assert!(p.lambda_k > 0.0 && p.sigma_k > 0.0);
                assert!(2.0 * p.lambda_k - 1.0 >= -1e-15);
            }
        }
        assert!(alpha(64).abs() < 1.02);
    }
}
