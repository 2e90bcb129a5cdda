//! Radial Jacobi operator on `Σ̄`.
//!
//! `Lu = u'' + (n-1)(1+Q'²)u'/r + Vu = (1/𝒥)(𝒥u')' + Vu` with
//! `𝒥 = r^{n-1}Q^{n-1}/√(1+Q'²)` and
//! `V = (Q''/(1+Q'²))² + (n-1)Q'²/r² + (n-1)/Q²`. It factors as `L = -A*A`
//! with `Au = -u' + Wu`, `A*u = (1/𝒥)(𝒥u)' + Wu` and `W = u₀'/u₀`, which
//! gives the explicit inverse used for the generalized kernel.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::fit;
use crate::geometry;
use crate::interp::{CubicSpline, QuinticHermite};
use crate::linalg::{count_above, SymTridiagonal};
use crate::minimal_surface::{MinimalJet, MinimalProfile};
use crate::ode::Dopri;
use crate::params;
use crate::quadrature::{adaptive_simpson, gauss_kronrod_breaks, gauss_legendre};
use crate::stencil::fd_jets;

/// Relative tolerance of the per-interval quadratures in [`invert_l`].
pub const INVERT_TOL: f64 = 1e-12;
/// Half-width of the band around the integrability threshold `-1` in which
/// the branch of `A⁻¹` is refused.
pub const BRANCH_BAND: f64 = 0.1;

/// Operator coefficients at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coeffs {
    pub r: f64,
    /// `1 + Q'²`.
    pub s2: f64,
    pub j: f64,
    /// `𝒥'/𝒥`; infinite at the axis.
    pub dlogj: f64,
    pub v: f64,
    pub u0: (f64, f64, f64),
    pub w: f64,
    pub jet: MinimalJet,
}

fn coeffs_from(n: u32, jet: MinimalJet) -> Coeffs {
    let m = n as f64 - 1.0;
    let r = jet.r;
    let s2 = 1.0 + jet.q1 * jet.q1;
    let curv = jet.q2 / s2;
    let u0 = jet.u0();
    if r == 0.0 {
        return Coeffs {
            r,
            s2,
            j: 0.0,
            dlogj: f64::INFINITY,
            v: curv * curv + m * jet.q2 * jet.q2 + m / (jet.q * jet.q),
            u0,
            w: 0.0,
            jet,
        };
    }
    let j = (r * jet.q).powi(n as i32 - 1) / s2.sqrt();
    let dlogj = m / r + m * jet.q1 / jet.q - jet.q1 * jet.q2 / s2;
    let v = curv * curv + m * jet.q1 * jet.q1 / (r * r) + m / (jet.q * jet.q);
    Coeffs { r, s2, j, dlogj, v, u0, w: u0.1 / u0.0, jet }
}

/// `L` applied to a jet at given coefficients; the axis uses the limit
/// `(n-1)(1+Q'²)u'/r → (n-1)u''(0)`.
fn l_of(n: u32, c: &Coeffs, u: (f64, f64, f64)) -> f64 {
    let radial = if c.r == 0.0 { (n as f64 - 1.0) * u.2 } else { c.dlogj * u.1 };
    u.2 + radial + c.v * u.0
}

#[derive(Debug, Clone)]
pub struct JacobiData {
    pub mp: MinimalProfile,
    pub r: Vec<f64>,
    pub j: Vec<f64>,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
    pub u0: Vec<f64>,
    pub u0_1: Vec<f64>,
    pub u0_2: Vec<f64>,
    pub dlogj: Vec<f64>,
    /// Fitted `(c, C)` with `c ≤ 𝒥/((1+r)^{n-1} r^{n-1}) ≤ C` on `r > 0`.
    pub j_bounds: (f64, f64),
    pub exec: Exec,
}

/// Radial field sampled on a grid, optionally with derivatives.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialField {
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub u1: Option<Vec<f64>>,
    pub u2: Option<Vec<f64>>,
}

impl RadialField {
    pub fn values(r: Vec<f64>, u: Vec<f64>) -> Self {
        RadialField { r, u, u1: None, u2: None }
    }

    pub fn with_jets(r: Vec<f64>, u: Vec<f64>, u1: Vec<f64>, u2: Vec<f64>) -> Self {
        RadialField { r, u, u1: Some(u1), u2: Some(u2) }
    }

    pub fn zeros(r: &[f64]) -> Self {
        let z = vec![0.0; r.len()];
        RadialField::with_jets(r.to_vec(), z.clone(), z.clone(), z)
    }

    fn interpolant(&self) -> Result<Box<dyn Fn(f64) -> f64 + Send + Sync>> {
        match (&self.u1, &self.u2) {
            (Some(d1), Some(d2)) => {
                let h = QuinticHermite::new(self.r.clone(), self.u.clone(), d1.clone(), d2.clone())?;
                Ok(Box::new(move |x| h.eval(x).0))
            }
            _ => {
                let s = CubicSpline::natural(self.r.clone(), self.u.clone())?;
                Ok(Box::new(move |x| s.eval(x)))
            }
        }
    }
}

/// Which formula was used for `A⁻¹`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    /// `A⁻¹g = u₀ ∫_r^∞ g/u₀`.
    Integrable,
    /// `A⁻¹g = -u₀ ∫₀^r g/u₀`.
    NonIntegrable,
}

#[derive(Debug, Clone, Serialize)]
pub struct Inversion {
    pub field: RadialField,
    pub branch: Branch,
    /// Fitted tail exponent of `(A*)⁻¹f / u₀`.
    pub tail_exponent: f64,
}

/// Builds the operator data on the profile's own grid.
pub fn assemble(mp: &MinimalProfile) -> Result<JacobiData> {
    let n = mp.n;
    let len = mp.len();
    let mut jd = JacobiData {
        mp: mp.clone(),
        r: mp.grid.clone(),
        j: Vec::with_capacity(len),
        v: Vec::with_capacity(len),
        w: Vec::with_capacity(len),
        u0: Vec::with_capacity(len),
        u0_1: Vec::with_capacity(len),
        u0_2: Vec::with_capacity(len),
        dlogj: Vec::with_capacity(len),
        j_bounds: (f64::INFINITY, 0.0),
        exec: Exec::default(),
    };
    for i in 0..len {
        let c = coeffs_from(n, mp.node_jet(i));
        if !(c.u0.0 > 0.0) {
            return Err(Error::PositivityViolated { r: c.r, value: c.u0.0 });
        }
        if c.r > 0.0 {
            if !(c.j > 0.0) {
                return Err(Error::ProfileInvariant(format!("J = {} not positive at r = {}", c.j, c.r)));
            }
            let ratio = c.j / ((1.0 + c.r) * c.r).powi(n as i32 - 1);
            jd.j_bounds = (jd.j_bounds.0.min(ratio), jd.j_bounds.1.max(ratio));
        }
        if !(c.v > 0.0) {
            return Err(Error::ProfileInvariant(format!("V = {} not positive at r = {}", c.v, c.r)));
        }
        jd.j.push(c.j);
        jd.v.push(c.v);
        jd.w.push(c.w);
        jd.u0.push(c.u0.0);
        jd.u0_1.push(c.u0.1);
        jd.u0_2.push(c.u0.2);
        jd.dlogj.push(c.dlogj);
    }
    Ok(jd)
}

impl JacobiData {
    pub fn n(&self) -> u32 {
        self.mp.n
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn coeffs(&self, r: f64) -> Coeffs {
        coeffs_from(self.mp.n, self.mp.eval(r))
    }

    pub fn node_coeffs(&self, i: usize) -> Coeffs {
        coeffs_from(self.mp.n, self.mp.node_jet(i))
    }

    /// `V` recomputed through the curvature module: `V = (1+Q'²)|A|²`.
    pub fn potential_via_curvature(&self, i: usize) -> Result<f64> {
        let c = geometry::curvature(self.mp.n, self.mp.jet(i))?;
        Ok(c.g_rr * c.a2)
    }

    /// `u₀` as a field with analytic jets.
    pub fn u0_field(&self) -> RadialField {
        RadialField::with_jets(self.r.clone(), self.u0.clone(), self.u0_1.clone(), self.u0_2.clone())
    }

    fn check_grid(&self, f: &RadialField) -> Result<()> {
        if f.r.len() != self.r.len() || f.u.len() != self.r.len() {
            return Err(Error::GridMismatch { expected: self.r.len(), found: f.u.len().min(f.r.len()) });
        }
        let tol = 1e-12;
        if f.r.iter().zip(&self.r).any(|(a, b)| (a - b).abs() > tol * b.abs().max(1.0)) {
            return Err(Error::GridMismatch { expected: self.r.len(), found: f.r.len() });
        }
        Ok(())
    }
}

/// `L u` at every node. With jets supplied they are used pointwise;
/// otherwise derivatives come from five-point finite differences (with the
/// even reflection at the axis).
pub fn apply_l(jd: &JacobiData, u: &RadialField) -> Result<Vec<f64>> {
    jd.check_grid(u)?;
    let (d1, d2): (Vec<f64>, Vec<f64>) = match (&u.u1, &u.u2) {
        (Some(a), Some(b)) => (a.clone(), b.clone()),
        _ => fd_jets(&u.r, &u.u, 5, true).into_iter().unzip(),
    };
    let n = jd.n();
    Ok((0..jd.r.len())
        .map(|i| {
            let c = Coeffs {
                r: jd.r[i],
                s2: 0.0,
                j: jd.j[i],
                dlogj: jd.dlogj[i],
                v: jd.v[i],
                u0: (jd.u0[i], jd.u0_1[i], jd.u0_2[i]),
                w: jd.w[i],
                jet: jd.mp.node_jet(i),
            };
            l_of(n, &c, (u.u[i], d1[i], d2[i]))
        })
        .collect())
}

/// Finite-difference `L u` ignoring any jets carried by `u`.
pub fn apply_l_fd(jd: &JacobiData, u: &RadialField) -> Result<Vec<f64>> {
    apply_l(jd, &RadialField::values(u.r.clone(), u.u.clone()))
}

/// Window of node indices forming the middle half of the grid by index.
pub fn middle_half(len: usize) -> std::ops::Range<usize> {
    len / 4..(3 * len) / 4
}

/// Local power-law exponent of `|f|` over the first positive nodes.
fn axis_exponent(r: &[f64], f: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        r.iter().zip(f).filter(|(r, f)| **r > 0.0 && f.abs() > 0.0).take(6).map(|(r, f)| (*r, f.abs())).collect();
    if pts.len() < 3 {
        return None;
    }
    let (rs, fs): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    fit::power_law(&rs, &fs).ok().map(|v| v.0)
}

/// `L⁻¹f = -A⁻¹(A*)⁻¹f`. The nodal integrals are per-interval adaptive
/// Simpson sums; `(A*)⁻¹f` between nodes comes from a quintic Hermite
/// interpolant built from its nodal values and the first-order equation it
/// satisfies.
pub fn invert_l(jd: &JacobiData, f: &RadialField) -> Result<Inversion> {
    jd.check_grid(f)?;
    let n = jd.n();
    let len = jd.r.len();
    let r = &jd.r;
    if f.u.iter().any(|v| !v.is_finite()) {
        return Err(Error::NotIntegrableAtAxis { exponent: f64::NEG_INFINITY });
    }
    if let Some(e) = axis_exponent(r, &f.u) {
        if e + n as f64 - 1.0 <= -1.0 {
            return Err(Error::NotIntegrableAtAxis { exponent: e });
        }
    }
    if f.u.iter().all(|v| *v == 0.0) {
        return Ok(Inversion { field: RadialField::zeros(r), branch: Branch::Integrable, tail_exponent: f64::NAN });
    }
    let fi = f.interpolant()?;
    // Only f' enters g''; without jets it comes from the spline.
    let f1: Vec<f64> = match &f.u1 {
        Some(d) => d.clone(),
        None => {
            let s = CubicSpline::natural(r.clone(), f.u.clone())?;
            r.iter().map(|&x| s.eval_with_slope(x).1).collect()
        }
    };

    // (A*)^{-1} f = G / (u₀ 𝒥),  G(r) = ∫₀^r f 𝒥 u₀.
    let first: Vec<f64> = jd.exec.map_range(len - 1, |i| {
        let h = |x: f64| {
            let c = jd.coeffs(x);
            fi(x) * c.j * c.u0.0
        };
        adaptive_simpson(h, r[i], r[i + 1], INVERT_TOL, 0.0).value
    });
    let mut big_g = vec![0.0; len];
    for i in 1..len {
        big_g[i] = big_g[i - 1] + first[i - 1];
    }
    let mut g = vec![0.0; len];
    let mut g1 = vec![0.0; len];
    let mut g2 = vec![0.0; len];
    for i in 0..len {
        let c = jd.node_coeffs(i);
        if r[i] == 0.0 {
            g1[i] = f.u[i] / n as f64;
            continue;
        }
        g[i] = big_g[i] / (c.u0.0 * c.j);
        // g' = f - (W + 𝒥'/𝒥) g, differentiated once more for g''.
        let k = c.w + c.dlogj;
        g1[i] = f.u[i] - k * g[i];
        let jet = c.jet;
        let m = n as f64 - 1.0;
        let dw = c.u0.2 / c.u0.0 - c.w * c.w;
        let ddlogj = -m / (r[i] * r[i]) + m * (jet.q2 / jet.q - jet.q1 * jet.q1 / (jet.q * jet.q))
            - (jet.q2 * jet.q2 + jet.q1 * jet.q3) / c.s2
            + 2.0 * (jet.q1 * jet.q2 / c.s2).powi(2);
        g2[i] = f1[i] - k * g1[i] - (dw + ddlogj) * g[i];
    }
    let gi = QuinticHermite::new(r.clone(), g.clone(), g1.clone(), g2)?;

    // Tail exponent of g/u₀ over the last decade decides the branch.
    let r_top = r[len - 1];
    let tail: Vec<usize> = (0..len).filter(|&i| r[i] >= r_top / 10.0 && g[i] != 0.0).collect();
    let tail_r: Vec<f64> = tail.iter().map(|&i| r[i]).collect();
    let tail_v: Vec<f64> = tail.iter().map(|&i| (g[i] / jd.u0[i]).abs()).collect();
    let (tail_exponent, tail_c, _) = fit::power_law(&tail_r, &tail_v)?;
    if (tail_exponent + 1.0).abs() < BRANCH_BAND {
        return Err(Error::BranchAmbiguous { exponent: tail_exponent });
    }
    let branch = if tail_exponent < -1.0 { Branch::Integrable } else { Branch::NonIntegrable };

    let second: Vec<f64> = jd.exec.map_range(len - 1, |i| {
        let h = |x: f64| gi.eval(x).0 / jd.coeffs(x).u0.0;
        adaptive_simpson(h, r[i], r[i + 1], INVERT_TOL, 0.0).value
    });
    // phi with phi' = g/u₀, so that u = u₀ phi solves L u = f.
    let mut phi = vec![0.0; len];
    match branch {
        Branch::NonIntegrable => {
            for i in 1..len {
                phi[i] = phi[i - 1] + second[i - 1];
            }
        }
        Branch::Integrable => {
            let sign = (g[len - 1] / jd.u0[len - 1]).signum();
            let beyond = sign * tail_c * r_top.powf(tail_exponent + 1.0) / -(tail_exponent + 1.0);
            phi[len - 1] = -beyond;
            for i in (0..len - 1).rev() {
                phi[i] = phi[i + 1] - second[i];
            }
        }
    }
    let mut u = vec![0.0; len];
    let mut u1 = vec![0.0; len];
    let mut u2 = vec![0.0; len];
    for i in 0..len {
        let (a, a1, a2) = (jd.u0[i], jd.u0_1[i], jd.u0_2[i]);
        u[i] = a * phi[i];
        u1[i] = a1 * phi[i] + g[i];
        u2[i] = a2 * phi[i] + a1 * g[i] / a + g1[i];
    }
    Ok(Inversion { field: RadialField::with_jets(r.clone(), u, u1, u2), branch, tail_exponent })
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelMode {
    pub j: usize,
    pub field: RadialField,
    pub inner_exponent: f64,
    pub outer_exponent: f64,
}

/// Exponent tolerance used for the generalized-kernel fits: 5% of the
/// target, but at least 0.05 absolute because targets can be zero.
pub fn exponent_tolerance(target: f64) -> f64 {
    0.05 * target.abs().max(1.0)
}

fn fit_window(r: &[f64], u: &[f64], lo: f64, hi: f64) -> Result<f64> {
    let idx: Vec<usize> = (0..r.len()).filter(|&i| r[i] >= lo && r[i] <= hi && u[i] > 0.0).collect();
    let rs: Vec<f64> = idx.iter().map(|&i| r[i]).collect();
    let us: Vec<f64> = idx.iter().map(|&i| u[i]).collect();
    Ok(fit::power_law(&rs, &us)?.0)
}

/// `u₀, u₁, …, u_{j_max}` with `u_j = L⁻¹((1+Q'²)u_{j-1})`, each with fitted
/// inner (first decade) and outer (last decade) exponents.
pub fn generalized_kernel(jd: &JacobiData, j_max: usize) -> Result<Vec<KernelMode>> {
    if j_max > 4 {
        return Err(Error::domain(format!("j_max = {j_max} exceeds 4")));
    }
    let b = jd.mp.b;
    let need = 10f64.powf(2.0 + j_max as f64 / 2.0) * b;
    if jd.mp.r_max < need * (1.0 - 1e-12) {
        return Err(Error::domain(format!("r_max = {} must be at least {need} for j_max = {j_max}", jd.mp.r_max)));
    }
    let r = &jd.r;
    let r_top = jd.mp.r_max;
    let r_bottom = r[1];
    let mut modes = Vec::with_capacity(j_max + 1);
    let mut current = jd.u0_field();
    for j in 0..=j_max {
        if j > 0 {
            let (u, u1, u2) = (&current.u, current.u1.as_ref().unwrap(), current.u2.as_ref().unwrap());
            let mut f = vec![0.0; r.len()];
            let mut f1 = vec![0.0; r.len()];
            let mut f2 = vec![0.0; r.len()];
            for i in 0..r.len() {
                let jet = jd.mp.node_jet(i);
                let s2 = 1.0 + jet.q1 * jet.q1;
                f[i] = s2 * u[i];
                f1[i] = 2.0 * jet.q1 * jet.q2 * u[i] + s2 * u1[i];
                f2[i] = 2.0 * (jet.q2 * jet.q2 + jet.q1 * jet.q3) * u[i] + 4.0 * jet.q1 * jet.q2 * u1[i] + s2 * u2[i];
            }
            current = invert_l(jd, &RadialField::with_jets(r.clone(), f, f1, f2))?.field;
            if let Some(i) = (1..r.len()).find(|&i| !(current.u[i] > 0.0)) {
                return Err(Error::PositivityViolated { r: r[i], value: current.u[i] });
            }
        }
        let inner_exponent = fit_window(r, &current.u, r_bottom, 10.0 * r_bottom)?;
        let outer_exponent = fit_window(r, &current.u, r_top / 10.0, r_top)?;
        modes.push(KernelMode { j, field: current.clone(), inner_exponent, outer_exponent });
    }
    Ok(modes)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IndicialRoots {
    pub at_zero: (f64, f64),
    pub at_infinity: (f64, f64),
}

pub fn indicial_roots(n: u32) -> Result<IndicialRoots> {
    if n < 4 {
        return Err(Error::domain(format!("dimension n = {n} violates n >= 4")));
    }
    Ok(IndicialRoots {
        at_zero: (0.0, -(n as f64 - 2.0)),
        at_infinity: (params::alpha(n), params::alpha_minus(n)),
    })
}

/// Second kernel element `v₀`, integrated inwards from `r_max` with the
/// seed `r^{α₋}`.
#[derive(Debug, Clone, Serialize)]
pub struct SecondSolution {
    pub field: RadialField,
    pub inner_exponent: f64,
    /// `𝒥(u₀v₀' - v₀u₀')` at ten log-spaced radii.
    pub wronskian: Vec<(f64, f64)>,
    /// `max |W_i / W_0 - 1|` over those radii.
    pub wronskian_spread: f64,
}

pub fn second_solution(jd: &JacobiData) -> Result<SecondSolution> {
    let n = jd.n();
    let am = params::alpha_minus(n);
    let r = &jd.r;
    let len = r.len();
    let r_top = r[len - 1];
    let stops: Vec<f64> = r[1..len - 1].iter().rev().copied().collect();
    let ode = Dopri::new(1e-11, 1e-300);
    let states = ode.integrate(
        |x, y: &[f64; 2]| {
            let c = jd.coeffs(x);
            [y[1], -c.dlogj * y[1] - c.v * y[0]]
        },
        r_top,
        [r_top.powf(am), am * r_top.powf(am - 1.0)],
        &stops,
        |_, _| Ok(()),
    )?;
    let mut v = vec![f64::NAN; len];
    let mut v1 = vec![f64::NAN; len];
    v[len - 1] = r_top.powf(am);
    v1[len - 1] = am * r_top.powf(am - 1.0);
    for (k, y) in states.iter().enumerate() {
        let i = len - 2 - k;
        v[i] = y[0];
        v1[i] = y[1];
    }
    let mut v2 = vec![f64::NAN; len];
    for i in 1..len {
        v2[i] = -jd.dlogj[i] * v1[i] - jd.v[i] * v[i];
    }
    let inner_exponent = {
        let rs: Vec<f64> = (1..len).filter(|&i| r[i] <= 10.0 * r[1]).map(|i| r[i]).collect();
        let vs: Vec<f64> = (1..len).filter(|&i| r[i] <= 10.0 * r[1]).map(|i| v[i].abs()).collect();
        fit::power_law(&rs, &vs)?.0
    };
    let mut wronskian = Vec::new();
    for k in 0..10 {
        let target = r[1] * (r_top / r[1]).powf(k as f64 / 9.0);
        let i = ((1..len).min_by(|&a, &b| (r[a] - target).abs().total_cmp(&(r[b] - target).abs()))).unwrap();
        let wr = jd.j[i] * (jd.u0[i] * v1[i] - v[i] * jd.u0_1[i]);
        wronskian.push((r[i], wr));
    }
    let w0 = wronskian[0].1;
    let wronskian_spread = wronskian.iter().map(|(_, w)| (w / w0 - 1.0).abs()).fold(0.0, f64::max);
    Ok(SecondSolution {
        field: RadialField::with_jets(r.clone(), v, v1, v2),
        inner_exponent,
        wronskian,
        wronskian_spread,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Spectrum {
    pub lambda_max: f64,
    pub nodes: usize,
    pub r_trunc: f64,
    pub iterations: usize,
    /// Eigenvector on the finite-element nodes (Dirichlet node excluded).
    pub r: Vec<f64>,
    pub vector: Vec<f64>,
}

/// Largest eigenvalue of `Δ_Σ̄ + |Ā|²` on radial functions over
/// `[0, r_trunc]`, Dirichlet at `r_trunc` and natural at the axis.
///
/// The weak form pairs with `𝒥(1+Q'²) dr`, the volume measure of `Σ̄`, in
/// which the operator `(1+Q'²)⁻¹L` is symmetric: the stiffness is
/// `∫𝒥u'v'`, the potential `∫V𝒥uv` and the mass `∫𝒥(1+Q'²)uv`. Linear
/// elements on `nodes` points (geometric from `b·10⁻³`, plus the axis); the
/// top eigenvalue is bracketed by Sturm counts and polished by shifted
/// inverse iteration.
pub fn top_eigenvalue(jd: &JacobiData, r_trunc: f64, nodes: usize) -> Result<Spectrum> {
    if !(r_trunc <= jd.mp.r_max / 2.0 * (1.0 + 1e-12)) {
        return Err(Error::domain(format!("r_trunc = {r_trunc} exceeds r_max / 2 = {}", jd.mp.r_max / 2.0)));
    }
    if nodes < 10 {
        return Err(Error::domain("need at least 10 nodes"));
    }
    let b = jd.mp.b;
    let lo = (b * 1e-3).min(r_trunc / 10.0);
    let mut x = vec![0.0];
    let ratio = (r_trunc / lo).ln() / (nodes - 2) as f64;
    x.extend((0..nodes - 1).map(|i| lo * (ratio * i as f64).exp()));
    x[nodes - 1] = r_trunc;
    let (gx, gw) = gauss_legendre(6);
    // Element integrals in parallel: [stiffness, V𝒥 aa, ab, bb, mass aa, ab, bb].
    let elems: Vec<[f64; 7]> = jd.exec.map_range(nodes - 1, |e| {
        let (a, bnd) = (x[e], x[e + 1]);
        let h = bnd - a;
        let mut m = [0.0; 7];
        for (t, wt) in gx.iter().zip(&gw) {
            let s = a + 0.5 * h * (t + 1.0);
            let c = jd.coeffs(s);
            let wq = 0.5 * h * wt;
            let (pa, pb) = ((bnd - s) / h, (s - a) / h);
            let (pw, mw) = (c.v * c.j, c.j * c.s2);
            m[0] += wq * c.j / (h * h);
            m[1] += wq * pw * pa * pa;
            m[2] += wq * pw * pa * pb;
            m[3] += wq * pw * pb * pb;
            m[4] += wq * mw * pa * pa;
            m[5] += wq * mw * pa * pb;
            m[6] += wq * mw * pb * pb;
        }
        m
    });
    let dim = nodes - 1; // last node is Dirichlet
    let mut a_mat = SymTridiagonal::zeros(dim);
    let mut b_mat = SymTridiagonal::zeros(dim);
    for e in 0..nodes - 1 {
        let m = elems[e];
        let (ia, ib) = (e, e + 1);
        if ia < dim {
            a_mat.diag[ia] += -m[0] + m[1];
            b_mat.diag[ia] += m[4];
        }
        if ib < dim {
            a_mat.diag[ib] += -m[0] + m[3];
            b_mat.diag[ib] += m[6];
            a_mat.off[ia] += m[0] + m[2];
            b_mat.off[ia] += m[5];
        }
    }

    let mut hi = 1.0;
    while count_above(&a_mat, &b_mat, hi) > 0 {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::NonConvergence { what: "eigenvalue upper bracket", iterations: 40 });
        }
    }
    let mut lo = -1.0;
    while count_above(&a_mat, &b_mat, lo) == 0 {
        lo *= 2.0;
        if lo < -1e12 {
            return Err(Error::NonConvergence { what: "eigenvalue lower bracket", iterations: 40 });
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if count_above(&a_mat, &b_mat, mid) > 0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * lo.abs().max(1e-6) {
            break;
        }
    }
    // Shifted inverse iteration just above the bracket.
    let shift = hi + 1e-8 * hi.abs().max(1e-6);
    let lu = a_mat.shifted(shift, &b_mat).factor()?;
    let mut v: Vec<f64> = (0..dim).map(|i| 1.0 - x[i] / r_trunc).collect();
    let mut lambda = f64::NAN;
    let cap = 100;
    for it in 1..=cap {
        let rhs = b_mat.mul_vec(&v);
        let mut y = lu.solve(&rhs);
        let by = b_mat.mul_vec(&y);
        let norm = y.iter().zip(&by).map(|(a, b)| a * b).sum::<f64>().sqrt();
        y.iter_mut().for_each(|c| *c /= norm);
        let ay = a_mat.mul_vec(&y);
        let next = y.iter().zip(&ay).map(|(a, b)| a * b).sum::<f64>();
        v = y;
        // The bisection already fixed lambda; stop once the quotient settles
        // above roundoff of the near-singular solve.
        if (next - lambda).abs() <= 1e-11 * next.abs().max(1e-6) {
            lambda = next;
            return Ok(Spectrum {
                lambda_max: lambda,
                nodes,
                r_trunc,
                iterations: it,
                r: x[..dim].to_vec(),
                vector: v,
            });
        }
        lambda = next;
    }
    Err(Error::NonConvergence { what: "shifted inverse iteration", iterations: cap })
}

/// Rayleigh quotient `(-∫𝒥u'² + ∫V𝒥u²) / ∫𝒥(1+Q'²)u²` over `[0, r_end]` for
/// `u` given with its derivative.
pub fn rayleigh_quotient<F>(jd: &JacobiData, u: F, r_end: f64) -> Result<f64>
where
    F: Fn(f64) -> (f64, f64),
{
    let breaks: Vec<f64> = {
        let lo = jd.mp.b * 1e-3;
        let mut v = vec![0.0];
        let k = 60;
        v.extend((0..=k).map(|i| lo * (r_end / lo).powf(i as f64 / k as f64)));
        v
    };
    let num = gauss_kronrod_breaks(
        |s| {
            let c = jd.coeffs(s);
            let (a, a1) = u(s);
            -c.j * a1 * a1 + c.v * c.j * a * a
        },
        &breaks,
        1e-11,
        0.0,
    )?;
    let den = gauss_kronrod_breaks(
        |s| {
            let c = jd.coeffs(s);
            c.j * c.s2 * u(s).0.powi(2)
        },
        &breaks,
        1e-11,
        0.0,
    )?;
    Ok(num.value / den.value)
}

/// `C²` cutoff equal to 1 on `[0, a]`, 0 beyond `b`, with its derivative.
pub fn smooth_cutoff(r: f64, a: f64, b: f64) -> (f64, f64) {
    if r <= a {
        return (1.0, 0.0);
    }
    if r >= b {
        return (0.0, 0.0);
    }
    let t = (r - a) / (b - a);
    let s = t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
    let ds = 30.0 * t * t * (1.0 - t) * (1.0 - t) / (b - a);
    (1.0 - s, -ds)
}

/// `Au = -u' + Wu`.
pub fn apply_a(c: &Coeffs, u: (f64, f64)) -> f64 {
    -u.1 + c.w * u.0
}

/// `A*v = v' + (𝒥'/𝒥 + W) v`.
pub fn apply_a_star(c: &Coeffs, v: (f64, f64)) -> f64 {
    v.1 + (c.dlogj + c.w) * v.0
}

/// `L u + A*(A u)` at `r > 0` from a jet of `u` up to `u''`; vanishes when the
/// factorization holds.
pub fn factorization_defect(jd: &JacobiData, r: f64, u: (f64, f64, f64)) -> f64 {
    let c = jd.coeffs(r);
    let lu = l_of(jd.n(), &c, u);
    let dw = c.u0.2 / c.u0.0 - c.w * c.w;
    let au = apply_a(&c, (u.0, u.1));
    let au1 = -u.2 + dw * u.0 + c.w * u.1;
    lu + apply_a_star(&c, (au, au1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minimal_surface::MinimalOptions;

    fn data(per_decade: usize, r_max: f64) -> JacobiData {
        let mp = MinimalProfile::build(4, 1.0, MinimalOptions::new(r_max, 1e-11).per_decade(per_decade)).unwrap();
        assemble(&mp).unwrap()
    }

    #[test]
    fn assemble_invariants() {
        let jd = data(40, 1e4);
        let n = 4.0;
        let last = jd.r.len() - 1;
        assert!((jd.v[last] * jd.r[last].powi(2) / (2.0 * (n - 1.0)) - 1.0).abs() < 0.05);
        assert!((jd.w[last] * jd.r[last] / params::alpha(4) - 1.0).abs() < 0.05);
        assert!(jd.j_bounds.0 > 0.0 && jd.j_bounds.1.is_finite());
        for i in 0..jd.r.len() {
            let direct = jd.potential_via_curvature(i).unwrap();
            assert!((direct - jd.v[i]).abs() <= 1e-10 * jd.v[i]);
        }
        // J ~ b^{n-1} r^{n-1} near the axis.
        let c = jd.coeffs(1.0 / 50.0);
        assert!((c.j / (1.0f64 / 50.0).powi(3) - 1.0).abs() < 0.01);
        // Axis potential n Q''(0)² + (n-1)/b² against extrapolation from the right.
        let q2 = jd.mp.q2[0];
        assert!((jd.v[0] - (4.0 * q2 * q2 + 3.0)).abs() < 1e-14);
        let (c1, c2) = (jd.coeffs(1e-3), jd.coeffs(2e-3));
        let extrap = 2.0 * c1.v - c2.v;
        assert!((extrap - jd.v[0]).abs() < 1e-5);
    }

    #[test]
    fn l_u0_vanishes() {
        let jd = data(40, 1e3);
        let lu = apply_l(&jd, &jd.u0_field()).unwrap();
        for (r, v) in jd.r.iter().zip(&lu) {
            if *r <= 500.0 {
                assert!(v.abs() < 1e-6, "L u0 = {v} at {r}");
            }
        }
        assert!(matches!(apply_l(&jd, &RadialField::values(vec![0.0; 3], vec![0.0; 3])), Err(Error::GridMismatch { .. })));
    }

    #[test]
    fn zero_inverts_to_zero() {
        let jd = data(40, 1e3);
        let inv = invert_l(&jd, &RadialField::zeros(&jd.r)).unwrap();
        assert!(inv.field.u.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn bump_round_trip() {
        let jd = data(400, 1e3);
        let bump = |r: f64| -> (f64, f64, f64) {
            let (a, b) = (0.5, 3.0);
            if r <= a || r >= b {
                return (0.0, 0.0, 0.0);
            }
            let x = (2.0 * r - a - b) / (b - a);
            let s = 2.0 / (b - a);
            let g = 1.0 - x * x;
            (g.powi(4), 4.0 * g.powi(3) * (-2.0 * x) * s, (12.0 * g * g * 4.0 * x * x - 8.0 * g.powi(3)) * s * s)
        };
        let (f, f1, f2): (Vec<f64>, Vec<f64>, Vec<f64>) = {
            let v: Vec<(f64, f64, f64)> = jd.r.iter().map(|&r| bump(r)).collect();
            (v.iter().map(|t| t.0).collect(), v.iter().map(|t| t.1).collect(), v.iter().map(|t| t.2).collect())
        };
        let inv = invert_l(&jd, &RadialField::with_jets(jd.r.clone(), f.clone(), f1, f2)).unwrap();
        assert_eq!(inv.branch, Branch::Integrable);
        let back = apply_l_fd(&jd, &inv.field).unwrap();
        let scale = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in middle_half(jd.r.len()) {
            assert!((back[i] - f[i]).abs() <= 1e-5 * scale, "at r = {}: {} vs {}", jd.r[i], back[i], f[i]);
        }
    }

    #[test]
    fn indicial_examples() {
        let r = indicial_roots(4).unwrap();
        assert_eq!(r.at_infinity, (-2.0, -3.0));
        assert_eq!(r.at_zero, (0.0, -2.0));
        let r = indicial_roots(5).unwrap();
        assert!((r.at_infinity.1 - 0.5 * (-7.0 - 17f64.sqrt())).abs() < 1e-14);
        assert!((r.at_infinity.1 + 5.5616).abs() < 1e-4);
    }

    #[test]
    fn second_solution_and_wronskian() {
        let jd = data(100, 1e3);
        let s = second_solution(&jd).unwrap();
        assert!((s.inner_exponent + 2.0).abs() < 0.1, "{}", s.inner_exponent);
        assert!(s.wronskian_spread < 0.01, "{:?}", s.wronskian);
        let lv = apply_l(&jd, &s.field).unwrap();
        for i in middle_half(jd.r.len()) {
            let scale = s.field.u2.as_ref().unwrap()[i].abs() + jd.v[i] * s.field.u[i].abs();
            assert!(lv[i].abs() <= 1e-8 * scale);
        }
    }

    #[test]
    fn factorization_on_bumps() {
        let jd = data(40, 1e3);
        for k in 0..20 {
            let c = 0.2 + 0.3 * k as f64;
            let r = c + 0.05;
            let e = (-(r - c).powi(2)).exp();
            let u = (e, -2.0 * (r - c) * e, (4.0 * (r - c).powi(2) - 2.0) * e);
            assert!(factorization_defect(&jd, r, u).abs() < 1e-8 * (1.0 + u.2.abs()));
        }
    }

    #[test]
    fn u1_is_positive_with_expected_exponents() {
        let mp = MinimalProfile::build(4, 1.0, MinimalOptions::new(1e3, 1e-11).per_decade(100)).unwrap();
        let jd = assemble(&mp).unwrap();
        let modes = generalized_kernel(&jd, 1).unwrap();
        assert!((modes[0].inner_exponent).abs() < 0.05);
        assert!((modes[0].outer_exponent + 2.0).abs() < 0.1);
        assert!((modes[1].inner_exponent - 2.0).abs() < 0.1);
        assert!(modes[1].outer_exponent.abs() < 0.05);
        assert!(generalized_kernel(&jd, 3).is_err());
    }

    #[test]
    fn small_spectrum_is_nonpositive() {
        let jd = data(40, 100.0);
        let s = top_eigenvalue(&jd, 50.0, 400).unwrap();
        assert!(s.lambda_max <= 1e-3);
        let s25 = top_eigenvalue(&jd, 25.0, 400).unwrap();
        assert!(s25.lambda_max <= s.lambda_max + 1e-6);
    }
}
