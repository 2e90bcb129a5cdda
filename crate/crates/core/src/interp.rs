//! Piecewise interpolants on strictly increasing nodes.

use crate::error::{Error, Result};
use crate::grid::{is_strictly_increasing, locate};

/// Piecewise quintic Hermite interpolant of values with first and second
/// derivatives. Returns `(y, y', y'')`; it is `C²` and exact for quintics.
#[derive(Debug, Clone)]
pub struct QuinticHermite {
    x: Vec<f64>,
    y: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
}

impl QuinticHermite {
    pub fn new(x: Vec<f64>, y: Vec<f64>, d1: Vec<f64>, d2: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n < 2 || y.len() != n || d1.len() != n || d2.len() != n {
            return Err(Error::Input("quintic Hermite needs matching arrays of length >= 2".into()));
        }
        if !is_strictly_increasing(&x) {
            return Err(Error::Input("interpolation nodes must be strictly increasing".into()));
        }
        Ok(QuinticHermite { x, y, d1, d2 })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.x
    }

    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        let i = locate(&self.x, t);
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let c0 = self.y[i];
        let c1 = h * self.d1[i];
        let c2 = 0.5 * h * h * self.d2[i];
        let a = self.y[i + 1] - c0 - c1 - c2;
        let b = h * self.d1[i + 1] - c1 - 2.0 * c2;
        let c = h * h * self.d2[i + 1] - 2.0 * c2;
        let c3 = 10.0 * a - 4.0 * b + 0.5 * c;
        let c4 = -15.0 * a + 7.0 * b - c;
        let c5 = 6.0 * a - 3.0 * b + 0.5 * c;
        let p = c0 + s * (c1 + s * (c2 + s * (c3 + s * (c4 + s * c5))));
        let dp = c1 + s * (2.0 * c2 + s * (3.0 * c3 + s * (4.0 * c4 + s * 5.0 * c5)));
        let ddp = 2.0 * c2 + s * (6.0 * c3 + s * (12.0 * c4 + s * 20.0 * c5));
        (p, dp / h, ddp / (h * h))
    }
}

/// Natural cubic spline.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn natural(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n < 2 || y.len() != n {
            return Err(Error::Input("spline needs matching arrays of length >= 2".into()));
        }
        if !is_strictly_increasing(&x) {
            return Err(Error::Input("interpolation nodes must be strictly increasing".into()));
        }
        let mut m = vec![0.0; n];
        if n > 2 {
            // Thomas algorithm on the interior second-derivative system.
            let k = n - 2;
            let mut diag = vec![0.0; k];
            let mut rhs = vec![0.0; k];
            let mut upper = vec![0.0; k];
            for j in 0..k {
                let i = j + 1;
                let h0 = x[i] - x[i - 1];
                let h1 = x[i + 1] - x[i];
                diag[j] = 2.0 * (h0 + h1);
                upper[j] = h1;
                rhs[j] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
            }
            for j in 1..k {
                let lower = x[j + 1] - x[j];
                let w = lower / diag[j - 1];
                diag[j] -= w * upper[j - 1];
                rhs[j] -= w * rhs[j - 1];
            }
            m[k] = rhs[k - 1] / diag[k - 1];
            for j in (0..k - 1).rev() {
                m[j + 1] = (rhs[j] - upper[j] * m[j + 2]) / diag[j];
            }
        }
        Ok(CubicSpline { x, y, m })
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.eval_with_slope(t).0
    }

    pub fn eval_with_slope(&self, t: f64) -> (f64, f64) {
        let i = locate(&self.x, t);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let y = a * self.y[i] + b * self.y[i + 1] + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let dy = (self.y[i + 1] - self.y[i]) / h + ((1.0 - 3.0 * a * a) * m0 + (3.0 * b * b - 1.0) * m1) * h / 6.0;
        (y, dy)
    }
}
