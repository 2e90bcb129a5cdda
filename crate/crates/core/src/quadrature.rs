//! One-dimensional quadrature: adaptive Simpson, adaptive Gauss–Kronrod
//! (7/15) and Gauss–Legendre rules.

use crate::error::{Error, Result};

/// Integral estimate with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quad {
    pub value: f64,
    pub error: f64,
}

/// Smallest absolute tolerance honoured by the adaptive rules.
pub const ABS_FLOOR: f64 = 1e-14;

/// Adaptive Simpson with interval halving. Each half inherits half the
/// tolerance; the accepted panel includes the Richardson correction.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> Quad {
    if a == b {
        return Quad { value: 0.0, error: 0.0 };
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    // A crude magnitude for the relative part, refined as panels come in.
    let scale = whole.abs().max(abs_tol.max(ABS_FLOOR));
    let tol = (rel_tol * scale).max(abs_tol).max(ABS_FLOOR);
    let mut err = 0.0;
    let value = simpson_rec(&f, a, b, fa, fm, fb, whole, tol, 50, &mut err);
    Quad { value, error: err }
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    err: &mut f64,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol || m <= a || m >= b {
        *err += delta.abs() / 15.0;
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, err)
        + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, err)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Quad {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    Quad { value: kron * h, error: ((kron - gauss) * h).abs() }
}

/// Globally adaptive Gauss–Kronrod quadrature; the panel with the largest
/// error estimate is bisected until the total error meets the tolerance.
pub fn gauss_kronrod<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> Result<Quad> {
    gauss_kronrod_breaks(f, &[a, b], rel_tol, abs_tol)
}

/// As [`gauss_kronrod`] with initial panels given by `breaks`.
pub fn gauss_kronrod_breaks<F: Fn(f64) -> f64>(f: F, breaks: &[f64], rel_tol: f64, abs_tol: f64) -> Result<Quad> {
    let mut panels: Vec<(f64, f64, Quad)> = breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| (w[0], w[1], gk15(&f, w[0], w[1])))
        .collect();
    const MAX_PANELS: usize = 20_000;
    loop {
        let value: f64 = panels.iter().map(|p| p.2.value).sum();
        let error: f64 = panels.iter().map(|p| p.2.error).sum();
        if !value.is_finite() {
            return Err(Error::domain("non-finite integrand"));
        }
        let tol = (rel_tol * value.abs()).max(abs_tol).max(ABS_FLOOR);
        if error <= tol || panels.is_empty() {
            return Ok(Quad { value, error });
        }
        if panels.len() >= MAX_PANELS {
            return Err(Error::NonConvergence { what: "Gauss-Kronrod quadrature", iterations: panels.len() });
        }
        let (k, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2.error.total_cmp(&y.1 .2.error))
            .expect("non-empty");
        let (a, b, _) = panels.swap_remove(k);
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            // Cannot split further in floating point; accept what we have.
            let value: f64 = panels.iter().map(|p| p.2.value).sum::<f64>() + gk15(&f, a, b).value;
            return Ok(Quad { value, error });
        }
        panels.push((a, m, gk15(&f, a, m)));
        panels.push((m, b, gk15(&f, m, b)));
    }
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_exp() {
        let q = adaptive_simpson(f64::exp, 0.0, 2.0, 1e-12, 0.0);
        assert!((q.value - (2f64.exp() - 1.0)).abs() < 1e-11);
    }

    #[test]
    fn kronrod_peaked_integrand() {
        let f = |x: f64| (-(x - 3.0).powi(2) * 100.0).exp();
        let q = gauss_kronrod(f, 0.0, 10.0, 1e-12, 0.0).unwrap();
        let exact = (std::f64::consts::PI / 100.0).sqrt();
        assert!((q.value - exact).abs() < 1e-12);
    }

    #[test]
    fn kronrod_is_exact_for_low_degree() {
        let q = gauss_kronrod(|x| x.powi(9) - x, -1.0, 2.0, 1e-14, 0.0).unwrap();
        assert!((q.value - (1024.0 - 1.0) / 10.0 + 1.5).abs() < 1e-12);
    }

    #[test]
    fn legendre_rule_integrates_polynomials() {
        let (x, w) = gauss_legendre(5);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(8)).sum();
        assert!((s - 2.0 / 9.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }
}
