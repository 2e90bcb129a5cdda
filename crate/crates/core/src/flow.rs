//! Mean curvature flow of the profile,
//! `∂_t Q = Q''/(1+Q'²) + (n-1)Q'/r - (n-1)/Q`.
//!
//! Method of lines: finite differences of order 2 or 4 on the (possibly
//! graded) grid, with the axis row `n Q''(0) - (n-1)/Q` from the even
//! reflection. Boundary conditions enter as algebraic rows, so the system is
//! a DAE `M Q' = F(Q, t)` with diagonal 0/1 mass. Time stepping is the
//! one-step TR-BDF2 scheme (trapezoid to `t + γh`, then BDF2) with a
//! banded Newton solve per stage, the analytic Jacobian, and an embedded
//! third-order error estimate filtered through `(M - dhJ)⁻¹`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{self, RateFit};
use crate::geometry::{self, ProfileJet};
use crate::grid;
use crate::linalg::{Banded, BandedLu};
use crate::stencil::{fd_jets, stencils, NodeStencil};

const GAMMA: f64 = 2.0 - std::f64::consts::SQRT_2;
const D: f64 = GAMMA / 2.0;
const W: f64 = std::f64::consts::SQRT_2 / 4.0;
/// Newton stops when the stage residual is below this times `‖Q‖∞`.
pub const NEWTON_TOL: f64 = 1e-10;
const NEWTON_MAX: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// Smooth axis `r = 0` (inner end only).
    Axis,
    /// `Q = value`.
    Dirichlet(f64),
    /// `Q' = value`.
    Neumann(f64),
    /// Exact shrinking-sphere data `Q = √(radius_sq - 2(2n-1)t - r²)`.
    SphereExact { radius_sq: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryConditions {
    pub inner: Boundary,
    pub outer: Boundary,
    /// Spatial order, 2 or 4.
    pub order: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileState {
    pub grid: Vec<f64>,
    pub q: Vec<f64>,
    pub t: f64,
    pub bc: BoundaryConditions,
}

impl ProfileState {
    pub fn new(grid: Vec<f64>, q: Vec<f64>, t: f64, bc: BoundaryConditions) -> Result<Self> {
        if grid.len() != q.len() {
            return Err(Error::GridMismatch { expected: grid.len(), found: q.len() });
        }
        if bc.order != 2 && bc.order != 4 {
            return Err(Error::Input(format!("spatial order {} not in {{2, 4}}", bc.order)));
        }
        if grid.len() < bc.order + 3 || !grid::is_strictly_increasing(&grid) || grid[0] < 0.0 {
            return Err(Error::Input("grid must be non-negative, increasing and long enough".into()));
        }
        if let Some(i) = q.iter().position(|v| !(*v > 0.0)) {
            return Err(Error::PositivityViolated { r: grid[i], value: q[i] });
        }
        match (grid[0] == 0.0, bc.inner) {
            (true, Boundary::Axis) | (false, Boundary::Dirichlet(_) | Boundary::Neumann(_) | Boundary::SphereExact { .. }) => {}
            _ => return Err(Error::Input("the axis condition is used exactly when the grid starts at r = 0".into())),
        }
        if bc.outer == Boundary::Axis {
            return Err(Error::Input("the outer end cannot be an axis".into()));
        }
        Ok(ProfileState { grid, q, t, bc })
    }

    /// Both ends pinned at their current values (axis if the grid starts at 0).
    pub fn pinned(grid: Vec<f64>, q: Vec<f64>, t: f64, order: usize) -> Result<Self> {
        let inner = if grid.first() == Some(&0.0) { Boundary::Axis } else { Boundary::Dirichlet(q[0]) };
        let outer = Boundary::Dirichlet(*q.last().unwrap_or(&0.0));
        ProfileState::new(grid, q, t, BoundaryConditions { inner, outer, order })
    }

    /// `Q ≡ √(2(n-1)(T-t))` with a zero-slope outer end.
    pub fn cylinder(n: u32, t_sing: f64, grid: Vec<f64>, t: f64, order: usize) -> Result<Self> {
        let c = (2.0 * (n as f64 - 1.0) * (t_sing - t)).sqrt();
        let inner = if grid.first() == Some(&0.0) { Boundary::Axis } else { Boundary::Neumann(0.0) };
        let q = vec![c; grid.len()];
        ProfileState::new(grid, q, t, BoundaryConditions { inner, outer: Boundary::Neumann(0.0), order })
    }

    /// `Q = √(2(2n-1)(T-t) - r²)` on an axis grid, with exact outer data.
    pub fn sphere(n: u32, t_sing: f64, grid: Vec<f64>, t: f64, order: usize) -> Result<Self> {
        let k = 2.0 * (2.0 * n as f64 - 1.0);
        let q = grid.iter().map(|r| (k * (t_sing - t) - r * r).sqrt()).collect();
        let bc = BoundaryConditions { inner: Boundary::Axis, outer: Boundary::SphereExact { radius_sq: k * t_sing }, order };
        ProfileState::new(grid, q, t, bc)
    }

    /// The Simons cone `Q = r` on `[r_min, r_max]`, pinned at both ends.
    pub fn cone(grid: Vec<f64>, order: usize) -> Result<Self> {
        let q = grid.clone();
        ProfileState::pinned(grid, q, 0.0, order)
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    /// Finite-difference jets at every node, using the state's stencil width.
    pub fn jets(&self) -> Vec<ProfileJet> {
        let width = self.bc.order + 1;
        fd_jets(&self.grid, &self.q, width, self.grid[0] == 0.0)
            .into_iter()
            .zip(self.grid.iter().zip(&self.q))
            .map(|((q1, q2), (r, q))| ProfileJet::new(*r, *q, q1, q2))
            .collect()
    }

    pub fn q_min(&self) -> f64 {
        self.q.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

fn boundary_target(b: Boundary, n: u32, t: f64, r: f64) -> f64 {
    match b {
        Boundary::Dirichlet(v) | Boundary::Neumann(v) => v,
        Boundary::SphereExact { radius_sq } => (radius_sq - 2.0 * (2.0 * n as f64 - 1.0) * t - r * r).max(0.0).sqrt(),
        Boundary::Axis => 0.0,
    }
}

/// Reusable discretization of one grid.
#[derive(Debug, Clone)]
pub struct Discretization {
    n: u32,
    r: Vec<f64>,
    st: Vec<NodeStencil>,
    bc: BoundaryConditions,
    band: usize,
}

impl Discretization {
    pub fn new(n: u32, state: &ProfileState) -> Result<Self> {
        if n < 4 {
            return Err(Error::domain(format!("dimension n = {n} violates n >= 4")));
        }
        let width = state.bc.order + 1;
        Ok(Discretization {
            n,
            r: state.grid.clone(),
            st: stencils(&state.grid, width, state.grid[0] == 0.0),
            bc: state.bc,
            band: width - 1,
        })
    }

    fn len(&self) -> usize {
        self.r.len()
    }

    /// Whether row `i` is a differential (not a boundary) row.
    fn differential(&self, i: usize) -> bool {
        (i > 0 || self.bc.inner == Boundary::Axis) && i + 1 < self.len()
    }

    /// `F_i(Q)` on a differential row.
    fn rhs(&self, i: usize, q: &[f64]) -> f64 {
        let m = self.n as f64 - 1.0;
        let (q1, q2) = self.st[i].apply(q);
        if self.r[i] == 0.0 {
            return self.n as f64 * q2 - m / q[i];
        }
        q2 / (1.0 + q1 * q1) + m * q1 / self.r[i] - m / q[i]
    }

    /// Adds `scale·∂F_i/∂Q` to row `i` of `jac`.
    fn rhs_jacobian(&self, i: usize, q: &[f64], scale: f64, jac: &mut Banded) {
        let m = self.n as f64 - 1.0;
        let st = &self.st[i];
        if self.r[i] == 0.0 {
            for (k, &j) in st.cols.iter().enumerate() {
                jac.add(i, j, scale * self.n as f64 * st.d2[k]);
            }
        } else {
            let (q1, q2) = st.apply(q);
            let s = 1.0 + q1 * q1;
            for (k, &j) in st.cols.iter().enumerate() {
                let d = st.d2[k] / s - 2.0 * q2 * q1 * st.d1[k] / (s * s) + m * st.d1[k] / self.r[i];
                jac.add(i, j, scale * d);
            }
        }
        jac.add(i, i, scale * m / (q[i] * q[i]));
    }

    fn boundary_of(&self, i: usize) -> Boundary {
        if i == 0 {
            self.bc.inner
        } else {
            self.bc.outer
        }
    }

    /// Algebraic residual of boundary row `i` at time `t`.
    fn boundary_residual(&self, i: usize, q: &[f64], t: f64) -> f64 {
        let b = self.boundary_of(i);
        let target = boundary_target(b, self.n, t, self.r[i]);
        match b {
            Boundary::Neumann(_) => self.st[i].apply(q).0 - target,
            _ => q[i] - target,
        }
    }

    fn boundary_jacobian(&self, i: usize, jac: &mut Banded) {
        match self.boundary_of(i) {
            Boundary::Neumann(_) => {
                let st = &self.st[i];
                for (k, &j) in st.cols.iter().enumerate() {
                    jac.add(i, j, st.d1[k]);
                }
            }
            _ => jac.add(i, i, 1.0),
        }
    }

    /// `F(Q)` on differential rows, zero on boundary rows.
    pub fn rhs_all(&self, q: &[f64]) -> Vec<f64> {
        (0..self.len()).map(|i| if self.differential(i) { self.rhs(i, q) } else { 0.0 }).collect()
    }

    /// Solves `Z - base - hd·F(Z) = 0` (differential rows) together with the
    /// boundary rows at time `t`. Returns `Z`, `F(Z)` and the final LU.
    fn solve_stage(&self, base: &[f64], hd: f64, t: f64, guess: Vec<f64>) -> Result<(Vec<f64>, Vec<f64>, BandedLu)> {
        let len = self.len();
        let mut z = guess;
        for _ in 0..NEWTON_MAX {
            if z.iter().any(|v| !(*v > 0.0)) {
                return Err(Error::QNonPositive { t });
            }
            let mut res = vec![0.0; len];
            let mut jac = Banded::zeros(len, self.band, self.band);
            for i in 0..len {
                if self.differential(i) {
                    res[i] = z[i] - base[i] - hd * self.rhs(i, &z);
                    jac.add(i, i, 1.0);
                    self.rhs_jacobian(i, &z, -hd, &mut jac);
                } else {
                    res[i] = self.boundary_residual(i, &z, t);
                    self.boundary_jacobian(i, &mut jac);
                }
            }
            let scale = z.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let rnorm = res.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let lu = jac.factor()?;
            if rnorm <= NEWTON_TOL * scale {
                let f = self.rhs_all(&z);
                return Ok((z, f, lu));
            }
            let dz = lu.solve(&res);
            for (a, b) in z.iter_mut().zip(&dz) {
                *a -= b;
            }
            if !z.iter().all(|v| v.is_finite()) {
                break;
            }
        }
        Err(Error::NewtonDiverged { t, dt: hd / D })
    }

    /// One TR-BDF2 step of size `h`; returns the new values and the scaled
    /// local error estimate (`≤ 1` means acceptable at `tol`).
    pub fn tr_bdf2(&self, q: &[f64], t: f64, h: f64, tol: f64) -> Result<(Vec<f64>, f64)> {
        let len = self.len();
        let f1 = self.rhs_all(q);
        let base2: Vec<f64> = (0..len).map(|i| q[i] + h * D * f1[i]).collect();
        let (z2, f2, _) = self.solve_stage(&base2, h * D, t + GAMMA * h, q.to_vec())?;
        let base3: Vec<f64> = (0..len).map(|i| q[i] + h * W * (f1[i] + f2[i])).collect();
        let guess: Vec<f64> = (0..len).map(|i| z2[i] + (1.0 - GAMMA) / GAMMA * (z2[i] - q[i])).collect();
        let guess = if guess.iter().all(|v| *v > 0.0) { guess } else { z2.clone() };
        let (z3, f3, lu) = self.solve_stage(&base3, h * D, t + h, guess)?;
        let raw: Vec<f64> = (0..len)
            .map(|i| {
                if self.differential(i) {
                    h * ((4.0 * W - 1.0) / 3.0 * f1[i] - f2[i] / 3.0 + 2.0 * D / 3.0 * f3[i])
                } else {
                    0.0
                }
            })
            .collect();
        let est = lu.solve(&raw);
        let err = est.iter().zip(&z3).map(|(e, z)| e.abs() / (tol + tol * z.abs())).fold(0.0, f64::max);
        Ok((z3, err))
    }
}

/// One implicit step of size `dt` without error control.
pub fn step(state: &ProfileState, dt: f64, n: u32) -> Result<ProfileState> {
    if !(dt > 0.0) {
        return Err(Error::domain(format!("time step dt = {dt} must be positive")));
    }
    let disc = Discretization::new(n, state)?;
    let (q, _) = disc.tr_bdf2(&state.q, state.t, dt, 1.0)?;
    Ok(ProfileState { grid: state.grid.clone(), q, t: state.t + dt, bc: state.bc })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StopRule {
    pub amax_cap: f64,
    pub qmin_floor: f64,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule { amax_cap: f64::INFINITY, qmin_floor: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolveOptions {
    /// Local error target per step (relative and absolute).
    pub tol: f64,
    pub dt_initial: f64,
    pub dt_max: f64,
    /// Fixed step size; disables error control when set.
    pub fixed_dt: Option<f64>,
    /// Times at which snapshots are stored (the solver lands on them).
    pub outputs: Vec<f64>,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions { tol: 1e-8, dt_initial: 1e-6, dt_max: f64::INFINITY, fixed_dt: None, outputs: Vec::new() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Horizon,
    AmaxCap,
    QminFloor,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowDiagnostics {
    pub times: Vec<f64>,
    pub hmax: Vec<f64>,
    pub amax: Vec<f64>,
    pub qmin: Vec<f64>,
    /// `Q` at the inner grid point (the axis when present).
    pub q_inner: Vec<f64>,
    /// Zero of the extrapolated `Q(r₀,t)²`, when it is decreasing.
    pub t_est: Option<f64>,
    pub stop: StopReason,
    pub steps: usize,
    pub rejected: usize,
}

impl FlowDiagnostics {
    fn record(&mut self, state: &ProfileState, n: u32) -> Result<()> {
        let (h, a) = curvature_extremes(state, n)?;
        self.times.push(state.t);
        self.hmax.push(h);
        self.amax.push(a);
        self.qmin.push(state.q_min());
        self.q_inner.push(state.q[0]);
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub snapshots: Vec<ProfileState>,
}

impl Trajectory {
    pub fn last(&self) -> &ProfileState {
        self.snapshots.last().expect("trajectory holds the initial state")
    }
}

/// `(sup |H|, sup |A|)` over the nodes from finite-difference jets.
pub fn curvature_extremes(state: &ProfileState, n: u32) -> Result<(f64, f64)> {
    let mut h = 0.0f64;
    let mut a = 0.0f64;
    for jet in state.jets() {
        let c = geometry::curvature(n, jet)?;
        h = h.max(c.h.abs());
        a = a.max(c.norm_a());
    }
    Ok((h, a))
}

/// Extrapolates the last three samples of `y = Q(r₀,t)²` to zero with a
/// quadratic (a straight line if two samples), returning the first zero
/// after the last sample. Exact when `y` is linear in `t`.
pub fn estimate_singular_time(times: &[f64], q: &[f64]) -> Option<f64> {
    let k = times.len();
    if k < 2 {
        return None;
    }
    let y: Vec<f64> = q.iter().map(|v| v * v).collect();
    let (t1, t2) = (times[k - 2], times[k - 1]);
    let (y1, y2) = (y[k - 2], y[k - 1]);
    if !(y2 < y1) || t2 <= t1 {
        return None;
    }
    let linear = t2 - y2 * (t2 - t1) / (y2 - y1);
    if k < 3 || times[k - 3] >= t1 {
        return Some(linear);
    }
    let (t0, y0) = (times[k - 3], y[k - 3]);
    // Newton form y = y2 + s1 (t - t2) + s2 (t - t2)(t - t1).
    let d1 = (y2 - y1) / (t2 - t1);
    let d0 = (y1 - y0) / (t1 - t0);
    let s2 = (d1 - d0) / (t2 - t0);
    let s1 = d1 + s2 * (t2 - t1);
    // Solve s2 x² + s1 x + y2 = 0 for x = t - t2 > 0 (smallest such root).
    if s2.abs() <= 1e-14 * s1.abs() {
        return Some(linear);
    }
    let disc = s1 * s1 - 4.0 * s2 * y2;
    if disc < 0.0 {
        return Some(linear);
    }
    let sq = disc.sqrt();
    let roots = [(-s1 - sq) / (2.0 * s2), (-s1 + sq) / (2.0 * s2)];
    roots.iter().filter(|x| **x > 0.0).cloned().fold(None, |m: Option<f64>, x| Some(m.map_or(x, |m| m.min(x)))).map(|x| t2 + x).or(Some(linear))
}

pub fn evolve(initial: &ProfileState, n: u32, horizon: f64, stop: StopRule) -> Result<(Trajectory, FlowDiagnostics)> {
    evolve_with(initial, n, horizon, stop, &EvolveOptions::default())
}

/// Adaptive evolution from `initial.t` to `initial.t + horizon`.
pub fn evolve_with(
    initial: &ProfileState,
    n: u32,
    horizon: f64,
    stop: StopRule,
    opts: &EvolveOptions,
) -> Result<(Trajectory, FlowDiagnostics)> {
    if !(horizon > 0.0) {
        return Err(Error::domain(format!("horizon = {horizon} must be positive")));
    }
    let disc = Discretization::new(n, initial)?;
    let t_end = initial.t + horizon;
    let mut outputs: Vec<f64> = opts.outputs.iter().cloned().filter(|t| *t > initial.t && *t < t_end).collect();
    outputs.sort_by(f64::total_cmp);
    outputs.dedup();
    outputs.push(t_end);
    let mut next_out = 0;

    let mut diag = FlowDiagnostics {
        times: Vec::new(),
        hmax: Vec::new(),
        amax: Vec::new(),
        qmin: Vec::new(),
        q_inner: Vec::new(),
        t_est: None,
        stop: StopReason::Horizon,
        steps: 0,
        rejected: 0,
    };
    diag.record(initial, n)?;
    let mut traj = Trajectory { snapshots: vec![initial.clone()] };
    let mut state = initial.clone();
    let mut h = opts.fixed_dt.unwrap_or(opts.dt_initial).min(opts.dt_max);
    let h_floor = 1e-14 * t_end.abs().max(1.0);

    while next_out < outputs.len() {
        let target = outputs[next_out];
        let mut h_try = h.min(target - state.t);
        let landing = h_try >= target - state.t - 1e-12 * target.abs().max(1.0);
        if landing {
            h_try = target - state.t;
        }
        let attempt = disc.tr_bdf2(&state.q, state.t, h_try, opts.tol);
        let (q_new, err) = match attempt {
            Ok(v) => v,
            Err(e @ (Error::NewtonDiverged { .. } | Error::QNonPositive { .. })) => {
                if opts.fixed_dt.is_some() || h_try <= h_floor {
                    return Err(e);
                }
                diag.rejected += 1;
                h = 0.25 * h_try;
                continue;
            }
            Err(e) => return Err(e),
        };
        if opts.fixed_dt.is_none() && err > 1.0 {
            diag.rejected += 1;
            if h_try <= h_floor {
                return Err(Error::NewtonDiverged { t: state.t, dt: h_try });
            }
            h = h_try * (0.9 * err.powf(-1.0 / 3.0)).clamp(0.2, 1.0);
            continue;
        }
        state = ProfileState { grid: state.grid.clone(), q: q_new, t: if landing { target } else { state.t + h_try }, bc: state.bc };
        diag.steps += 1;
        diag.record(&state, n)?;
        if opts.fixed_dt.is_none() {
            let grow = if err > 0.0 { (0.9 * err.powf(-1.0 / 3.0)).clamp(0.2, 2.0) } else { 2.0 };
            // Do not let a short landing step shrink the next one.
            let base = if landing { h.max(h_try) } else { h_try };
            h = (base * grow).min(opts.dt_max);
        }
        if landing {
            traj.snapshots.push(state.clone());
            next_out += 1;
        }
        let k = diag.times.len() - 1;
        if diag.amax[k] > stop.amax_cap {
            diag.stop = StopReason::AmaxCap;
            break;
        }
        if diag.qmin[k] < stop.qmin_floor {
            diag.stop = StopReason::QminFloor;
            break;
        }
    }
    if traj.last().t != state.t {
        traj.snapshots.push(state);
    }
    diag.t_est = estimate_singular_time(&diag.times, &diag.q_inner);
    Ok((traj, diag))
}

/// Least-squares slope of `log M` against `log(T - t)` over the samples with
/// `T - t` inside `window`; needs at least one decade of data in the window.
pub fn fit_rate(times: &[f64], m: &[f64], t_sing: f64, window: (f64, f64)) -> Result<RateFit> {
    if times.len() != m.len() {
        return Err(Error::GridMismatch { expected: times.len(), found: m.len() });
    }
    if times.iter().any(|t| *t >= t_sing) {
        return Err(Error::domain("all sample times must precede T"));
    }
    let tau: Vec<f64> = times.iter().map(|t| t_sing - t).collect();
    let inside: Vec<f64> = tau.iter().cloned().filter(|x| *x >= window.0 && *x <= window.1).collect();
    let (lo, hi) = inside.iter().fold((f64::INFINITY, 0.0f64), |(a, b), x| (a.min(*x), b.max(*x)));
    let decades = if inside.len() >= 2 { (hi / lo).log10() } else { 0.0 };
    if !(decades >= 1.0 - 1e-9) {
        return Err(Error::WindowTooNarrow { decades });
    }
    fit::rate_in_window(&tau, m, window)
}

/// Joint search over `T` in `bracket` minimizing the log-log residual of
/// [`fit_rate`], with the window given as fractions of `T - t_first`.
pub fn fit_rate_joint(times: &[f64], m: &[f64], bracket: (f64, f64), window_frac: (f64, f64)) -> Result<(f64, RateFit)> {
    let first = times.iter().cloned().fold(f64::INFINITY, f64::min);
    let eval = |t_sing: f64| -> Result<RateFit> {
        let span = t_sing - first;
        fit_rate(times, m, t_sing, (window_frac.0 * span, window_frac.1 * span))
    };
    let resid = |t_sing: f64| eval(t_sing).map(|f| f.resid).unwrap_or(f64::INFINITY);
    // Coarse log-spaced scan of T - t_last, then golden section between the
    // neighbours of the best scan point.
    let last = times.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let (o_lo, o_hi) = (bracket.0 - last, bracket.1 - last);
    if !(o_lo > 0.0 && o_hi > o_lo) {
        return Err(Error::domain("bracket must lie beyond the last sample time"));
    }
    let k = 120;
    let cand: Vec<f64> = (0..=k).map(|i| last + o_lo * (o_hi / o_lo).powf(i as f64 / k as f64)).collect();
    let scores: Vec<f64> = cand.iter().map(|t| resid(*t)).collect();
    let best = (0..=k).min_by(|&i, &j| scores[i].total_cmp(&scores[j])).expect("non-empty scan");
    if !scores[best].is_finite() {
        return Err(Error::WindowTooNarrow { decades: 0.0 });
    }
    let (mut a, mut b) = (cand[best.saturating_sub(1)], cand[(best + 1).min(k)]);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if resid(c) < resid(d) {
            b = d;
        } else {
            a = c;
        }
        if b - a < 1e-13 * b.abs().max(1.0) {
            break;
        }
    }
    let t_sing = 0.5 * (a + b);
    Ok((t_sing, eval(t_sing)?))
}
