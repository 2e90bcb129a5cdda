//! Least-squares line and power-law fits.

use serde::Serialize;

use crate::error::{Error, Result};

/// Result of fitting `y = intercept + slope·x`; `resid` is the RMS residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub resid: f64,
    pub points: usize,
}

pub fn line(x: &[f64], y: &[f64]) -> Result<LineFit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return Err(Error::Input(format!("line fit needs >= 2 paired points, got {n}")));
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::Input("line fit needs distinct abscissae".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    if !(slope.is_finite() && intercept.is_finite()) {
        return Err(Error::Input("non-finite data in line fit".into()));
    }
    Ok(LineFit { slope, intercept, resid: (ss / n as f64).sqrt(), points: n })
}

/// Fits `v ≈ c·r^e` by a line through `(log r, log v)`; needs `r, v > 0`.
/// Returns `(e, c, resid)`.
pub fn power_law(r: &[f64], v: &[f64]) -> Result<(f64, f64, f64)> {
    if r.iter().chain(v).any(|&a| !(a > 0.0)) {
        return Err(Error::Input("power-law fit needs positive data".into()));
    }
    let lx: Vec<f64> = r.iter().map(|a| a.ln()).collect();
    let ly: Vec<f64> = v.iter().map(|a| a.ln()).collect();
    let f = line(&lx, &ly)?;
    Ok((f.slope, f.intercept.exp(), f.resid))
}

/// Least-squares exponent estimate over a window; `resid` is always
/// reported next to the exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    pub exponent: f64,
    pub intercept: f64,
    pub window: (f64, f64),
    pub resid: f64,
    pub points: usize,
}

/// Log-log fit of `v` against `x` using only samples with `x` in `window`.
pub fn rate_in_window(x: &[f64], v: &[f64], window: (f64, f64)) -> Result<RateFit> {
    let (xs, vs): (Vec<f64>, Vec<f64>) =
        x.iter().zip(v).filter(|(a, _)| **a >= window.0 && **a <= window.1).map(|(a, b)| (a.ln(), b.abs().ln())).unzip();
    if vs.iter().any(|a| !a.is_finite()) {
        return Err(Error::Input("rate fit needs nonzero data".into()));
    }
    let f = line(&xs, &vs)?;
    Ok(RateFit { exponent: f.slope, intercept: f.intercept, window, resid: f.resid, points: f.points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_power_law() {
        let r: Vec<f64> = (1..30).map(|i| i as f64 * 0.7).collect();
        let v: Vec<f64> = r.iter().map(|x| 3.5 * x.powf(-4.0 / 3.0)).collect();
        let (e, c, res) = power_law(&r, &v).unwrap();
        assert!((e + 4.0 / 3.0).abs() < 1e-13);
        assert!((c - 3.5).abs() < 1e-12);
        assert!(res < 1e-13);
    }

    #[test]
    fn rejects_degenerate_input() {
        assert!(line(&[1.0], &[2.0]).is_err());
        assert!(line(&[1.0, 1.0], &[2.0, 3.0]).is_err());
        assert!(power_law(&[1.0, 2.0], &[0.0, 1.0]).is_err());
    }

    proptest! {
        #[test]
        fn recovers_any_line(a in -5.0f64..5.0, b in -5.0f64..5.0) {
            let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
            let y: Vec<f64> = x.iter().map(|t| a + b * t).collect();
            let f = line(&x, &y).unwrap();
            prop_assert!((f.slope - b).abs() < 1e-10);
            prop_assert!((f.intercept - a).abs() < 1e-10);
        }
    }
}
