//! Bessel parabolic equation `∂_t v = v'' + (1/4 - μ²) r^{-2} v` on the half
//! line and its heat kernel
//! `W_t^μ(r,ρ) = (√(rρ)/2t) I_μ(rρ/2t) e^{-(r²+ρ²)/4t}`.
//!
//! The Jacobi flow on the cone `∂_t u = ½u'' + (n-1)u'/r + (n-1)u/r²` maps to
//! it through `v(r,t) = r^{n-1} u(r,2t)`, with `μ = √(1/4 + (n-1)(n-4))`.

use serde::Serialize;

use crate::bessel::bessel_i;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::fit::{self, RateFit};
use crate::grid;
use crate::interp::CubicSpline;
use crate::params::Params;
use crate::quadrature::gauss_kronrod_breaks;

/// Gaussian truncation half-width in units of `√t`.
pub const TRUNCATION: f64 = 40.0;
/// Relative tolerance for kernel integrals.
pub const KERNEL_TOL: f64 = 1e-11;
/// Fitted tail exponents may exceed `μ + 1/2` by this much before the input
/// is refused, so that the stationary monomial itself is accepted.
pub const TAIL_SLACK: f64 = 1e-8;

/// Field on `(0, ∞)` sampled on an increasing grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HalfLineField {
    pub grid: Vec<f64>,
    pub v: Vec<f64>,
    pub t: f64,
    /// Fitted power-law exponent of `|v|` over the last decade of the grid;
    /// `-∞` for a field vanishing there.
    pub tail_exponent: f64,
}

impl HalfLineField {
    pub fn new(grid: Vec<f64>, v: Vec<f64>, t: f64) -> Result<Self> {
        if grid.len() != v.len() || grid.len() < 4 {
            return Err(Error::Input(format!("grid/value length mismatch or too short ({} vs {})", grid.len(), v.len())));
        }
        if !(grid[0] > 0.0) || !grid::is_strictly_increasing(&grid) {
            return Err(Error::Input("half-line grid must be positive and increasing".into()));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Input("half-line field has non-finite values".into()));
        }
        let tail_exponent = tail_tag(&grid, &v);
        Ok(HalfLineField { grid, v, t, tail_exponent })
    }

    pub fn sup_abs(&self) -> f64 {
        self.v.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// Power-law exponent of the tail (last decade, at least 4 points).
pub fn tail_tag(grid: &[f64], v: &[f64]) -> f64 {
    let top = grid[grid.len() - 1];
    let mut idx: Vec<usize> = (0..grid.len()).filter(|&i| grid[i] >= top / 10.0).collect();
    if idx.len() < 4 {
        idx = (grid.len().saturating_sub(4)..grid.len()).collect();
    }
    if idx.iter().all(|&i| v[i] == 0.0) {
        return f64::NEG_INFINITY;
    }
    let pts: Vec<(f64, f64)> = idx.iter().filter(|&&i| v[i] != 0.0).map(|&i| (grid[i], v[i].abs())).collect();
    if pts.len() < 2 {
        return f64::NEG_INFINITY;
    }
    let (r, a): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    fit::power_law(&r, &a).map(|f| f.0).unwrap_or(f64::NAN)
}

/// `W_t^μ(r,ρ)` in the scaled form `(√(rρ)/2t)·[e^{-z}I_μ(z)]·e^{-(r-ρ)²/4t}`.
pub fn heat_kernel(mu: f64, t: f64, r: f64, rho: f64) -> f64 {
    if !(t > 0.0) || !(r > 0.0) || !(rho > 0.0) {
        return if r == 0.0 || rho == 0.0 { 0.0 } else { f64::NAN };
    }
    let z = r * rho / (2.0 * t);
    (r * rho).sqrt() / (2.0 * t) * bessel_i(mu, z, true) * (-(r - rho) * (r - rho) / (4.0 * t)).exp()
}

/// `∫₀^∞ W_t^μ(r,ρ) f(ρ) dρ`, truncated to
/// `[max(0, r - 40√t), max(r + 40√t, 10√t)]`.
pub fn kernel_integral<F: Fn(f64) -> f64>(mu: f64, t: f64, r: f64, f: F) -> Result<f64> {
    let st = t.sqrt();
    let lo = (r - TRUNCATION * st).max(0.0);
    let hi = (r + TRUNCATION * st).max(10.0 * st);
    let mut breaks = vec![lo];
    for k in [-8.0, -3.0, 0.0, 3.0, 8.0] {
        let b = r + k * st;
        if b > lo && b < hi {
            breaks.push(b);
        }
    }
    breaks.push(hi);
    let q = gauss_kronrod_breaks(|rho| heat_kernel(mu, t, r, rho) * f(rho), &breaks, KERNEL_TOL, 0.0)?;
    Ok(q.value)
}

/// Continuous extension of sampled data: a spline of `v/ρ^{μ+1/2}` in
/// `log ρ` inside the grid, the fitted power law beyond it, and the first
/// ratio held constant below it.
struct Extension {
    spline: CubicSpline,
    p: f64,
    lo: f64,
    hi: f64,
    first: f64,
    tail: Option<(f64, f64, f64)>,
}

impl Extension {
    fn new(mu: f64, f: &HalfLineField) -> Result<Self> {
        let p = mu + 0.5;
        let x: Vec<f64> = f.grid.iter().map(|r| r.ln()).collect();
        let w: Vec<f64> = f.grid.iter().zip(&f.v).map(|(r, v)| v / r.powf(p)).collect();
        let first = w[0];
        let spline = CubicSpline::natural(x, w)?;
        let last = f.v.len() - 1;
        let hi = f.grid[last];
        let tail = if f.tail_exponent.is_finite() && f.v[last] != 0.0 {
            let e = f.tail_exponent;
            Some((f.v[last].signum(), f.v[last].abs() / hi.powf(e), e))
        } else {
            None
        };
        Ok(Extension { spline, p, lo: f.grid[0], hi, first, tail })
    }

    fn eval(&self, rho: f64) -> f64 {
        if rho <= self.lo {
            self.first * rho.powf(self.p)
        } else if rho <= self.hi {
            self.spline.eval(rho.ln()) * rho.powf(self.p)
        } else {
            match self.tail {
                Some((s, c, e)) => s * c * rho.powf(e),
                None => 0.0,
            }
        }
    }
}

fn check_tail(mu: f64, e: f64) -> Result<()> {
    let limit = mu + 0.5;
    if e.is_nan() || e > limit + TAIL_SLACK {
        return Err(Error::TailTooFat { exponent: e, limit });
    }
    Ok(())
}

/// `v(·, t₀ + t) = ∫ W_t^μ(·,ρ) v₀(ρ) dρ` on the input grid.
pub fn propagate(mu: f64, t: f64, v0: &HalfLineField) -> Result<HalfLineField> {
    propagate_with(mu, t, v0, Exec::default())
}

pub fn propagate_with(mu: f64, t: f64, v0: &HalfLineField, exec: Exec) -> Result<HalfLineField> {
    if !(t > 0.0) {
        return Err(Error::domain(format!("propagation time t = {t} must be positive")));
    }
    check_tail(mu, v0.tail_exponent)?;
    if v0.v.iter().all(|x| *x == 0.0) {
        return HalfLineField::new(v0.grid.clone(), vec![0.0; v0.grid.len()], v0.t + t);
    }
    let ext = Extension::new(mu, v0)?;
    let out = propagate_fn(mu, t, |rho| ext.eval(rho), &v0.grid, exec)?;
    HalfLineField::new(v0.grid.clone(), out, v0.t + t)
}

/// Propagation of an analytically given initial datum onto `grid`.
pub fn propagate_fn<F>(mu: f64, t: f64, f: F, grid: &[f64], exec: Exec) -> Result<Vec<f64>>
where
    F: Fn(f64) -> f64 + Sync + Send,
{
    exec.map(grid, |&r| kernel_integral(mu, t, r, &f)).into_iter().collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    pub mu: f64,
    pub delta: f64,
    pub times: Vec<f64>,
    /// `sup_r v(r,t)/r^{μ+1/2}` at each time.
    pub sup_ratio: Vec<f64>,
    pub fit: RateFit,
}

/// Output radii of the decay experiment.
pub fn decay_grid() -> Vec<f64> {
    grid::geometric(1e-2, 1e2, 10).expect("static grid")
}

/// Propagates `v₀ = ρ^{μ+1/2-δ}` to each time and fits
/// `log sup_r[v/r^{μ+1/2}]` against `log t`; the expected slope is `-δ/2`.
pub fn decay_experiment(p: &Params, delta: f64, t_grid: &[f64]) -> Result<DecayReport> {
    decay_experiment_with(p, delta, t_grid, Exec::default())
}

pub fn decay_experiment_with(p: &Params, delta: f64, t_grid: &[f64], exec: Exec) -> Result<DecayReport> {
    let mu = p.mu;
    if !(delta > 0.0 && delta < 2.0 * mu + 2.0) {
        return Err(Error::domain(format!("delta = {delta} outside (0, 2mu+2)")));
    }
    if t_grid.len() < 2 || t_grid.iter().any(|t| !(*t > 0.0)) {
        return Err(Error::domain("need at least two positive times"));
    }
    let e = mu + 0.5 - delta;
    check_tail(mu, e)?;
    let r = decay_grid();
    let mut sup_ratio = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let v = propagate_fn(mu, t, |rho| rho.powf(e), &r, exec)?;
        let s = r.iter().zip(&v).map(|(r, v)| v / r.powf(mu + 0.5)).fold(f64::NEG_INFINITY, f64::max);
        sup_ratio.push(s);
    }
    let lo = t_grid.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = t_grid.iter().cloned().fold(0.0, f64::max);
    let fit = fit::rate_in_window(t_grid, &sup_ratio, (lo, hi))?;
    Ok(DecayReport { mu, delta, times: t_grid.to_vec(), sup_ratio, fit })
}

/// `v = r^{n-1} u` with `t_v = t_u / 2`.
pub fn cone_transform(n: u32, r: &[f64], u: &[f64], t_u: f64) -> Result<HalfLineField> {
    let v = r.iter().zip(u).map(|(r, u)| r.powi(n as i32 - 1) * u).collect();
    HalfLineField::new(r.to_vec(), v, 0.5 * t_u)
}

/// Inverse of [`cone_transform`]: `(r, u, t_u)`.
pub fn inverse_cone_transform(n: u32, f: &HalfLineField) -> (Vec<f64>, Vec<f64>, f64) {
    let u = f.grid.iter().zip(&f.v).map(|(r, v)| v / r.powi(n as i32 - 1)).collect();
    (f.grid.clone(), u, 2.0 * f.t)
}

#[derive(Debug, Clone, Serialize)]
pub struct LinkageReport {
    pub a: f64,
    pub times: Vec<f64>,
    /// `sup_{r ≥ 1} (1+r)^a |u(r,t)|` per time.
    pub weighted_sup: Vec<f64>,
    pub decreasing: bool,
}

/// Cone-side surrogate of the Liouville conclusion: data `u = r^{α-δ}` is
/// moved to the Bessel side, propagated, moved back, and the weighted sup
/// with `a = |α| + δ/2` is tracked over `times` (cone-flow times).
pub fn cone_linkage(p: &Params, delta: f64, times: &[f64]) -> Result<LinkageReport> {
    let n = p.n;
    let a = p.alpha.abs() + 0.5 * delta;
    let r = grid::geometric(1e-2, 1e2, 20)?;
    let u0: Vec<f64> = r.iter().map(|x| x.powf(p.alpha - delta)).collect();
    let v0 = cone_transform(n, &r, &u0, 0.0)?;
    check_tail(p.mu, v0.tail_exponent)?;
    let e = p.alpha - delta + n as f64 - 1.0;
    let mut weighted_sup = Vec::new();
    for &t in times {
        let vals = propagate_fn(p.mu, 0.5 * t, |rho| rho.powf(e), &r, Exec::default())?;
        let field = HalfLineField::new(r.clone(), vals, v0.t + 0.5 * t)?;
        let (rr, u, _) = inverse_cone_transform(n, &field);
        let s = rr.iter().zip(&u).filter(|(x, _)| **x >= 1.0).map(|(x, u)| (1.0 + x).powf(a) * u.abs()).fold(0.0, f64::max);
        weighted_sup.push(s);
    }
    let decreasing = weighted_sup.windows(2).all(|w| w[1] < w[0]);
    Ok(LinkageReport { a, times: times.to_vec(), weighted_sup, decreasing })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::derive_constants;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn kernel_symmetry_and_positivity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let (t, r, rho) = (rng.gen_range(0.01..10.0), rng.gen_range(0.01..20.0), rng.gen_range(0.01..20.0));
            let a = heat_kernel(0.5, t, r, rho);
            let b = heat_kernel(0.5, t, rho, r);
            // Positive wherever the Gaussian factor is representable.
            assert!(a >= 0.0);
            if (r - rho) * (r - rho) / (4.0 * t) < 600.0 {
                assert!(a > 0.0);
            }
            assert!((a - b).abs() <= 1e-13 * a.abs().max(1e-300));
        }
    }

    #[test]
    fn stationary_monomial() {
        for t in [0.1, 1.0, 10.0] {
            let v = kernel_integral(0.5, t, 2.0, |rho| rho).unwrap();
            assert!((v - 2.0).abs() < 1e-6 * 2.0, "t = {t}: {v}");
        }
        let mu = 17f64.sqrt() / 2.0;
        let v = kernel_integral(mu, 1.0, 3.0, |rho| rho.powf(mu + 0.5)).unwrap();
        assert!((v / 3f64.powf(mu + 0.5) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn semigroup() {
        let (r, rho, s, t) = (1.0, 2.0, 0.3, 0.7);
        let lhs = gauss_kronrod_breaks(
            |sg| heat_kernel(0.5, s, r, sg) * heat_kernel(0.5, t, sg, rho),
            &[0.0, 1.0, 2.0, 4.0, 40.0],
            1e-12,
            0.0,
        )
        .unwrap()
        .value;
        let rhs = heat_kernel(0.5, s + t, r, rho);
        assert!((lhs - rhs).abs() <= 1e-5 * rhs);
    }

    #[test]
    fn propagate_examples() {
        let g = grid::geometric(1e-3, 1e3, 20).unwrap();
        let mono = HalfLineField::new(g.clone(), g.clone(), 0.0).unwrap();
        let out = propagate(0.5, 1.0, &mono).unwrap();
        for (r, v) in g.iter().zip(&out.v) {
            assert!((v - r).abs() <= 1e-6 * r.max(1.0), "r = {r}: {v}");
        }
        assert!(out.tail_exponent <= mono.tail_exponent + 1e-6);
        let zero = HalfLineField::new(g.clone(), vec![0.0; g.len()], 0.0).unwrap();
        assert!(propagate(0.5, 1.0, &zero).unwrap().v.iter().all(|v| *v == 0.0));
        let fat = HalfLineField::new(g.clone(), g.iter().map(|r| r * r).collect(), 0.0).unwrap();
        assert!(matches!(propagate(0.5, 1.0, &fat), Err(Error::TailTooFat { .. })));
    }

    #[test]
    fn gaussian_damped_data_decays() {
        let (mu, delta) = (0.5, 0.5);
        let g = grid::geometric(1e-2, 1e2, 20).unwrap();
        let v0 = HalfLineField::new(g.clone(), g.iter().map(|r| r.powf(mu + 0.5 - delta) * (-r * r).exp()).collect(), 0.0)
            .unwrap();
        let mut last = f64::INFINITY;
        for t in [0.5, 1.0, 2.0, 4.0] {
            let out = propagate(mu, t, &v0).unwrap();
            let s = g.iter().zip(&out.v).map(|(r, v)| v / r.powf(mu + 0.5)).fold(f64::NEG_INFINITY, f64::max);
            assert!(s < last);
            last = s;
        }
    }

    #[test]
    fn decay_slopes() {
        let times: Vec<f64> = (0..9).map(|i| 10f64.powf(i as f64 / 4.0)).collect();
        let r = decay_experiment(&derive_constants(4, 2).unwrap(), 1.0, &times).unwrap();
        assert!((r.fit.exponent + 0.5).abs() <= 0.075, "{:?}", r.fit);
        let r = decay_experiment(&derive_constants(4, 2).unwrap(), 0.1, &times).unwrap();
        assert!((r.fit.exponent + 0.05).abs() <= 0.02, "{:?}", r.fit);
    }

    #[test]
    fn cone_transform_examples() {
        let p = derive_constants(4, 2).unwrap();
        let r = grid::geometric(0.1, 10.0, 10).unwrap();
        let u: Vec<f64> = r.iter().map(|x| x.powf(p.alpha)).collect();
        let v = cone_transform(4, &r, &u, 2.0).unwrap();
        assert_eq!(v.t, 1.0);
        for (x, y) in r.iter().zip(&v.v) {
            assert!((y - x.powf(p.mu + 0.5)).abs() < 1e-12 * y);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let w: Vec<f64> = r.iter().map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (r2, w2, t2) = inverse_cone_transform(4, &cone_transform(4, &r, &w, 0.4).unwrap());
        assert_eq!(r2, r);
        assert_eq!(t2, 0.4);
        for (a, b) in w.iter().zip(&w2) {
            assert!((a - b).abs() <= 1e-14 * a.abs().max(1.0));
        }
    }

    #[test]
    fn linkage_decreases() {
        let p = derive_constants(4, 2).unwrap();
        let rep = cone_linkage(&p, 1.0, &[1.0, 2.0, 4.0, 8.0]).unwrap();
        assert!(rep.decreasing, "{:?}", rep.weighted_sup);
    }
}
