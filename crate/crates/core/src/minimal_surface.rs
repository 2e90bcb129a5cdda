//! The smooth minimal hypersurface `Σ̄` asymptotic to the Simons cone.
//!
//! The profile solves `Q'' = (n-1)(1+Q'²)(1/Q - Q'/r)` with `Q(0) = b`,
//! `Q'(0) = 0`. It is seeded by its even power series near the axis and then
//! integrated in the excess variables `w = Q - r`, `p = Q' - 1`, which keeps
//! full relative accuracy in the tail where `Q - r ~ C_b r^α` is tiny.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fit;
use crate::geometry::ProfileJet;
use crate::grid;
use crate::interp::QuinticHermite;
use crate::ode::Dopri;

/// Number of even series terms beyond the constant.
const SERIES_TERMS: usize = 8;

#[derive(Debug, Clone, Copy)]
pub struct MinimalOptions {
    pub r_max: f64,
    pub tol: f64,
    /// Geometric grid density from `b·1e-3` to `r_max`.
    pub per_decade: usize,
}

impl MinimalOptions {
    pub fn new(r_max: f64, tol: f64) -> Self {
        MinimalOptions { r_max, tol, per_decade: 40 }
    }

    pub fn per_decade(mut self, per_decade: usize) -> Self {
        self.per_decade = per_decade;
        self
    }
}

/// Profile jet with the third derivative and the excess variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimalJet {
    pub r: f64,
    pub q: f64,
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
    /// `Q - r`.
    pub w: f64,
    /// `Q' - 1`.
    pub p: f64,
}

impl MinimalJet {
    pub fn profile_jet(&self) -> ProfileJet {
        ProfileJet::new(self.r, self.q, self.q1, self.q2)
    }

    /// `u₀ = (Q - rQ')/√(1+Q'²)` with its first two derivatives.
    pub fn u0(&self) -> (f64, f64, f64) {
        let s2 = 1.0 + self.q1 * self.q1;
        let s = s2.sqrt();
        let num = self.w - self.r * self.p;
        let num1 = -self.r * self.q2;
        let num2 = -self.q2 - self.r * self.q3;
        let u = num / s;
        let g = self.q1 * self.q2 / s2;
        let u1 = num1 / s - u * g;
        let g1 = (self.q2 * self.q2 + self.q1 * self.q3) / s2 - 2.0 * g * g;
        let u2 = num2 / s - num1 * g / s - u1 * g - u * g1;
        (u, u1, u2)
    }
}

/// Sampled `Q̄_b` on `[0, r_max]` with its fitted cone tail.
#[derive(Debug, Clone)]
pub struct MinimalProfile {
    pub n: u32,
    pub b: f64,
    pub tol: f64,
    pub r_max: f64,
    pub grid: Vec<f64>,
    pub q: Vec<f64>,
    pub q1: Vec<f64>,
    pub q2: Vec<f64>,
    /// `Q - r` at the nodes, accurate to relative precision.
    pub w: Vec<f64>,
    /// `Q' - 1` at the nodes.
    pub p: Vec<f64>,
    pub c_b: f64,
    pub alpha_fit: f64,
    pub fit_resid: f64,
    series: Vec<f64>,
    r_seed: f64,
    interp: QuinticHermite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailFit {
    #[serde(rename = "C_b")]
    pub c_b: f64,
    pub alpha_fit: f64,
    pub resid: f64,
}

/// Right side of the profile equation in excess variables.
pub fn excess_rhs(n: u32, r: f64, w: f64, p: f64) -> f64 {
    let q = r + w;
    let q1 = 1.0 + p;
    let e = -(w + r * p + w * p) / (r * q);
    (n as f64 - 1.0) * (1.0 + q1 * q1) * e
}

fn third_derivative(n: u32, r: f64, w: f64, p: f64, q2: f64) -> f64 {
    let q = r + w;
    let q1 = 1.0 + p;
    let e = -(w + r * p + w * p) / (r * q);
    let de = q1 * w * (2.0 * r + w) / (r * r * q * q) - q2 / r;
    (n as f64 - 1.0) * (2.0 * q1 * q2 * e + (1.0 + q1 * q1) * de)
}

fn poly_mul(a: &[f64], b: &[f64], deg: usize) -> Vec<f64> {
    let mut out = vec![0.0; deg + 1];
    for (i, x) in a.iter().enumerate().take(deg + 1) {
        if *x == 0.0 {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(deg + 1 - i) {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_deriv(a: &[f64]) -> Vec<f64> {
    a.iter().enumerate().skip(1).map(|(i, c)| i as f64 * c).collect()
}

/// Even series coefficients `a_k` of `Q̄_b = Σ a_k r^{2k}`, found order by
/// order from `rQQ'' - (n-1)(1+Q'²)(r - QQ') = 0`.
pub fn axis_series(n: u32, b: f64, terms: usize) -> Vec<f64> {
    let m = n as f64 - 1.0;
    let mut a = vec![b];
    for k in 1..=terms {
        a.push(0.0);
        let deg = 2 * k - 1;
        let mut q = vec![0.0; 2 * k + 1];
        for (i, c) in a.iter().enumerate() {
            q[2 * i] = *c;
        }
        let q1 = poly_deriv(&q);
        let q2 = poly_deriv(&q1);
        let r_q = {
            let mut v = vec![0.0; q.len() + 1];
            v[1..].copy_from_slice(&q);
            v
        };
        let lhs = poly_mul(&r_q, &q2, deg);
        let mut slope = poly_mul(&q1, &q1, deg);
        slope[0] += 1.0;
        let mut bracket = poly_mul(&q, &q1, deg).iter().map(|v| -v).collect::<Vec<_>>();
        bracket[1] += 1.0;
        let rhs = poly_mul(&slope, &bracket, deg);
        let residual = lhs[deg] - m * rhs[deg];
        let kk = k as f64;
        a[k] = -residual / (b * 2.0 * kk * (2.0 * kk + n as f64 - 2.0));
    }
    a
}

fn series_jet(a: &[f64], r: f64) -> [f64; 4] {
    let mut out = [0.0; 4];
    for (k, c) in a.iter().enumerate() {
        let e = 2 * k as i32;
        let ef = e as f64;
        out[0] += c * r.powi(e);
        if e >= 1 {
            out[1] += c * ef * r.powi(e - 1);
        }
        if e >= 2 {
            out[2] += c * ef * (ef - 1.0) * r.powi(e - 2);
        }
        if e >= 3 {
            out[3] += c * ef * (ef - 1.0) * (ef - 2.0) * r.powi(e - 3);
        }
    }
    out
}

/// Integrates `Q̄_b` on `[0, r_max]` with per-step relative tolerance `tol`.
pub fn integrate_profile(n: u32, b: f64, r_max: f64, tol: f64) -> Result<MinimalProfile> {
    MinimalProfile::build(n, b, MinimalOptions::new(r_max, tol))
}

impl MinimalProfile {
    pub fn build(n: u32, b: f64, opts: MinimalOptions) -> Result<Self> {
        let MinimalOptions { r_max, tol, per_decade } = opts;
        if n < 4 {
            return Err(Error::domain(format!("dimension n = {n} violates n >= 4")));
        }
        if !(b > 0.0) {
            return Err(Error::domain(format!("axis value b = {b} must be positive")));
        }
        if !(r_max >= 50.0 * b) {
            return Err(Error::domain(format!("r_max = {r_max} must be at least 50 b")));
        }
        if !(1e-12..=1e-6).contains(&tol) {
            return Err(Error::domain(format!("tolerance {tol} outside [1e-12, 1e-6]")));
        }
        let series = axis_series(n, b, SERIES_TERMS);
        let r_seed = b / 100.0;
        let seed = series_jet(&series, r_seed);
        let (w0, p0) = (seed[0] - r_seed, seed[1] - 1.0);
        let f_seed = excess_rhs(n, r_seed, w0, p0);
        let residual = (seed[2] - f_seed).abs() / f_seed.abs();
        if residual > 10.0 * tol {
            return Err(Error::SeedTooCoarse { r: r_seed, residual, limit: 10.0 * tol });
        }

        let grid = grid::with_axis(b * 1e-3, r_max, per_decade)?;
        let split = grid.partition_point(|&r| r <= r_seed);
        let stops: Vec<f64> = grid[split..].to_vec();
        let ode = Dopri::new(tol, 1e-300);
        let states = ode.integrate(
            |r, y: &[f64; 2]| [y[1], excess_rhs(n, r, y[0], y[1])],
            r_seed,
            [w0, p0],
            &stops,
            |r, y| {
                let slope = 1.0 + y[1];
                if slope > 10.0 {
                    return Err(Error::BlowupDetected { r, slope });
                }
                if !(y[0] > 0.0) {
                    return Err(Error::ProfileInvariant(format!("Q - r = {:e} <= 0 at r = {r}", y[0])));
                }
                Ok(())
            },
        )?;

        let len = grid.len();
        let (mut q, mut q1, mut q2, mut w, mut p) =
            (vec![0.0; len], vec![0.0; len], vec![0.0; len], vec![0.0; len], vec![0.0; len]);
        for i in 0..split {
            let s = series_jet(&series, grid[i]);
            q[i] = s[0];
            q1[i] = s[1];
            q2[i] = s[2];
            w[i] = s[0] - grid[i];
            p[i] = s[1] - 1.0;
        }
        for (k, y) in states.iter().enumerate() {
            let i = split + k;
            let r = grid[i];
            w[i] = y[0];
            p[i] = y[1];
            q[i] = r + y[0];
            q1[i] = 1.0 + y[1];
            q2[i] = excess_rhs(n, r, y[0], y[1]);
        }

        let mut knots = vec![r_seed];
        let mut kw = vec![w0];
        let mut kp = vec![p0];
        let mut kq2 = vec![f_seed];
        for i in split..len {
            knots.push(grid[i]);
            kw.push(w[i]);
            kp.push(p[i]);
            kq2.push(q2[i]);
        }
        let interp = QuinticHermite::new(knots, kw, kp, kq2)?;

        let mut mp = MinimalProfile {
            n,
            b,
            tol,
            r_max,
            grid,
            q,
            q1,
            q2,
            w,
            p,
            c_b: f64::NAN,
            alpha_fit: f64::NAN,
            fit_resid: f64::NAN,
            series,
            r_seed,
            interp,
        };
        mp.check_invariants()?;
        let tail = mp.fit_tail(mp.default_window())?;
        mp.c_b = tail.c_b;
        mp.alpha_fit = tail.alpha_fit;
        mp.fit_resid = tail.resid;
        Ok(mp)
    }

    fn check_invariants(&self) -> Result<()> {
        if self.q[0] != self.b || self.q1[0] != 0.0 {
            return Err(Error::ProfileInvariant("axis values must be Q(0) = b, Q'(0) = 0".into()));
        }
        for i in 0..self.grid.len() {
            let r = self.grid[i];
            if !(self.q2[i] > 0.0) {
                return Err(Error::ProfileInvariant(format!("Q'' = {:e} <= 0 at r = {r}", self.q2[i])));
            }
            if !(self.w[i] > 0.0) {
                return Err(Error::ProfileInvariant(format!("Q - r = {:e} <= 0 at r = {r}", self.w[i])));
            }
            if r > 0.0 && !(self.q1[i] > 0.0 && self.p[i] < 0.0) {
                return Err(Error::ProfileInvariant(format!("Q' = {} outside (0, 1) at r = {r}", self.q1[i])));
            }
        }
        Ok(())
    }

    /// Default tail window: the last decade, but never below `10 b`.
    pub fn default_window(&self) -> (f64, f64) {
        ((self.r_max / 10.0).max(10.0 * self.b), self.r_max)
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn jet(&self, i: usize) -> ProfileJet {
        ProfileJet::new(self.grid[i], self.q[i], self.q1[i], self.q2[i])
    }

    /// Jet at an arbitrary radius. Inside the seed interval the series is
    /// used, on `(r_seed, r_max]` the quintic interpolant of the excess
    /// together with the equation, and beyond `r_max` the fitted tail.
    pub fn eval(&self, r: f64) -> MinimalJet {
        if r <= self.r_seed {
            let s = series_jet(&self.series, r);
            return MinimalJet { r, q: s[0], q1: s[1], q2: s[2], q3: s[3], w: s[0] - r, p: s[1] - 1.0 };
        }
        let (w, p) = if r <= self.r_max {
            let (w, p, _) = self.interp.eval(r);
            (w, p)
        } else {
            let w = self.c_b * r.powf(self.alpha_fit);
            (w, self.alpha_fit * w / r)
        };
        let q2 = excess_rhs(self.n, r, w, p);
        let q3 = third_derivative(self.n, r, w, p, q2);
        MinimalJet { r, q: r + w, q1: 1.0 + p, q2, q3, w, p }
    }

    /// Jet at node `i` using the stored samples.
    pub fn node_jet(&self, i: usize) -> MinimalJet {
        let r = self.grid[i];
        if r <= self.r_seed {
            return self.eval(r);
        }
        let q3 = third_derivative(self.n, r, self.w[i], self.p[i], self.q2[i]);
        MinimalJet { r, q: self.q[i], q1: self.q1[i], q2: self.q2[i], q3, w: self.w[i], p: self.p[i] }
    }

    /// Largest relative defect `|w''_interp - F(r, w, w')| / |F|` of the
    /// continuous interpolant, sampled at interval midpoints.
    pub fn defect(&self) -> f64 {
        let knots = self.interp.nodes();
        knots
            .windows(2)
            .map(|k| {
                let r = 0.5 * (k[0] + k[1]);
                let (w, p, w2) = self.interp.eval(r);
                let f = excess_rhs(self.n, r, w, p);
                (w2 - f).abs() / f.abs()
            })
            .fold(0.0, f64::max)
    }

    /// Log-log least-squares fit of `Q̄ - r` over `window`.
    pub fn fit_tail(&self, window: (f64, f64)) -> Result<TailFit> {
        let (lo, hi) = window;
        if lo < 10.0 * self.b * (1.0 - 1e-12) || hi > self.r_max * (1.0 + 1e-12) || !(hi > lo) {
            return Err(Error::domain(format!(
                "tail window ({lo}, {hi}) must satisfy 10 b <= r_lo < r_hi <= r_max"
            )));
        }
        let idx: Vec<usize> = (0..self.len()).filter(|&i| self.grid[i] >= lo && self.grid[i] <= hi).collect();
        if idx.len() < 20 {
            return Err(Error::domain(format!("tail window holds {} nodes; need 20", idx.len())));
        }
        for &i in &idx {
            if !(self.w[i] > 0.0) {
                return Err(Error::NonPositiveTail { r: self.grid[i], excess: self.w[i] });
            }
        }
        let r: Vec<f64> = idx.iter().map(|&i| self.grid[i]).collect();
        let v: Vec<f64> = idx.iter().map(|&i| self.w[i]).collect();
        let (alpha_fit, c_b, resid) = fit::power_law(&r, &v)?;
        Ok(TailFit { c_b, alpha_fit, resid })
    }
}

/// `sup |Q̄_b(r) - b Q̄_1(r/b)|` over the nodes of `mpb` inside the range of
/// `mp1` after rescaling; `mp1` is evaluated through its interpolant.
pub fn verify_scaling(mp1: &MinimalProfile, mpb: &MinimalProfile) -> f64 {
    let b = mpb.b / mp1.b;
    mpb.grid
        .iter()
        .zip(&mpb.w)
        .filter(|(r, _)| **r / b <= mp1.r_max)
        .map(|(&r, &w)| {
            // Compare excesses: Q̄_b(r) - r against b (Q̄_1(r/b) - r/b).
            let other = b * mp1.eval(r / b).w;
            (w - other).abs()
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Serialize)]
pub struct U0Profile {
    pub r: Vec<f64>,
    pub u0: Vec<f64>,
    pub tail_exponent: f64,
    pub tail_coefficient: f64,
}

/// Samples of `u₀` with a log-log fit of its tail over the default window.
pub fn u0_profile(mp: &MinimalProfile) -> Result<U0Profile> {
    let mut u0 = Vec::with_capacity(mp.len());
    for i in 0..mp.len() {
        let u = mp.node_jet(i).u0().0;
        if !(u > 0.0) {
            return Err(Error::PositivityViolated { r: mp.grid[i], value: u });
        }
        u0.push(u);
    }
    let (lo, hi) = mp.default_window();
    let idx: Vec<usize> = (0..mp.len()).filter(|&i| mp.grid[i] >= lo && mp.grid[i] <= hi).collect();
    let rs: Vec<f64> = idx.iter().map(|&i| mp.grid[i]).collect();
    let us: Vec<f64> = idx.iter().map(|&i| u0[i]).collect();
    let (tail_exponent, tail_coefficient, _) = fit::power_law(&rs, &us)?;
    Ok(U0Profile { r: mp.grid.clone(), u0, tail_exponent, tail_coefficient })
}
