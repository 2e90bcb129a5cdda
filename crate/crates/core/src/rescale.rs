//! Self-similar changes of variables for profile snapshots.
//!
//! Inner: `L(p,s) = Λ Q(p/Λ, t)` with `Λ = (T-t)^{-σ_k-1/2}` and
//! `s = (T-t)^{-2σ_k}/(2σ_k)`. Parabolic: `q(ρ,s) = (T-t)^{-1/2} Q(ρ(T-t)^{1/2}, t)`
//! with `s = -log(T-t)`. Both act on a single snapshot by interpolation.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::ProfileState;
use crate::interp::QuinticHermite;
use crate::params::Params;
use crate::stencil::fd_jets;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rescaled {
    /// Rescaled radii (`p` or `ρ`).
    pub x: Vec<f64>,
    pub values: Vec<f64>,
    /// Rescaled time.
    pub s: f64,
    /// Original time.
    pub t: f64,
    /// Spatial zoom factor applied: `x = factor · r`, `value = factor · Q`.
    pub factor: f64,
}

pub fn inner_time(p: &Params, t: f64) -> Result<f64> {
    let tau = p.time_to_singularity(t)?;
    Ok(tau.powf(-2.0 * p.sigma_k) / (2.0 * p.sigma_k))
}

pub fn parabolic_time(p: &Params, t: f64) -> Result<f64> {
    Ok(-p.time_to_singularity(t)?.ln())
}

fn interpolant(state: &ProfileState) -> Result<QuinticHermite> {
    let width = if state.len() >= 5 { 5 } else { 3 };
    let jets = fd_jets(&state.grid, &state.q, width, state.grid[0] == 0.0);
    let d1 = jets.iter().map(|j| j.0).collect();
    let d2 = jets.iter().map(|j| j.1).collect();
    QuinticHermite::new(state.grid.clone(), state.q.clone(), d1, d2)
}

/// Samples `factor · Q(x / factor)` at `x_grid`.
fn zoom(state: &ProfileState, factor: f64, x_grid: &[f64]) -> Result<Vec<f64>> {
    let (lo, hi) = (state.grid[0], state.grid[state.len() - 1]);
    let slack = 1e-12 * hi.abs().max(1.0);
    let h = interpolant(state)?;
    x_grid
        .iter()
        .map(|&x| {
            let r = x / factor;
            if r < lo - slack || r > hi + slack {
                return Err(Error::domain(format!("rescaled point {x} maps to r = {r} outside [{lo}, {hi}]")));
            }
            Ok(factor * h.eval(r.clamp(lo, hi)).0)
        })
        .collect()
}

pub fn to_inner(state: &ProfileState, p: &Params, p_grid: &[f64]) -> Result<Rescaled> {
    let factor = p.blowup_scale(state.t)?;
    Ok(Rescaled { x: p_grid.to_vec(), values: zoom(state, factor, p_grid)?, s: inner_time(p, state.t)?, t: state.t, factor })
}

pub fn to_parabolic(state: &ProfileState, p: &Params, rho_grid: &[f64]) -> Result<Rescaled> {
    let factor = p.time_to_singularity(state.t)?.powf(-0.5);
    Ok(Rescaled { x: rho_grid.to_vec(), values: zoom(state, factor, rho_grid)?, s: parabolic_time(p, state.t)?, t: state.t, factor })
}

/// Inverse of either rescaling: `Q(r) = L(factor·r)/factor` on `r_grid`.
pub fn undo(res: &Rescaled, r_grid: &[f64], template: &ProfileState) -> Result<ProfileState> {
    let inner = ProfileState { grid: res.x.clone(), q: res.values.clone(), t: res.t, bc: template.bc };
    let q = zoom(&inner, 1.0 / res.factor, r_grid)?;
    Ok(ProfileState { grid: r_grid.to_vec(), q, t: res.t, bc: template.bc })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid;
    use crate::params::derive_constants;

    #[test]
    fn inner_time_arithmetic() {
        let p = derive_constants(4, 4).unwrap();
        let s = inner_time(&p, 0.99).unwrap();
        assert!((s - 0.6 * 100f64.powf(5.0 / 3.0)).abs() < 1e-9);
        assert!((s - 1292.66).abs() < 0.01);
        assert!(inner_time(&p, 1.0).is_err());
    }

    #[test]
    fn cone_is_fixed() {
        let p = derive_constants(4, 4).unwrap();
        let g = grid::geometric(0.01, 100.0, 40).unwrap();
        let mut s = ProfileState::cone(g, 2).unwrap();
        s.t = 0.5;
        let pg = grid::geometric(1.0, 50.0, 10).unwrap();
        let res = to_inner(&s, &p, &pg).unwrap();
        for (x, v) in res.x.iter().zip(&res.values) {
            assert!((x - v).abs() < 1e-12 * x);
        }
        let par = to_parabolic(&s, &p, &pg[..5]).unwrap();
        for (x, v) in par.x.iter().zip(&par.values) {
            assert!((x - v).abs() < 1e-12 * x);
        }
    }

    #[test]
    fn cylinder_and_sphere_parabolic() {
        let p = derive_constants(4, 2).unwrap();
        let g = grid::uniform(0.0, 1.0, 400).unwrap();
        let rho = grid::uniform(0.0, 1.0, 11).unwrap();
        for t in [0.0, 0.5, 0.9] {
            let c = ProfileState::cylinder(4, 1.0, g.clone(), t, 2).unwrap();
            let q = to_parabolic(&c, &p, &rho).unwrap();
            assert!(q.values.iter().all(|v| (v - 6f64.sqrt()).abs() < 1e-12));
            let s = ProfileState::sphere(4, 1.0, g.clone(), t, 2).unwrap();
            let q = to_parabolic(&s, &p, &rho).unwrap();
            for (x, v) in q.x.iter().zip(&q.values) {
                assert!((v / (14.0 - x * x).sqrt() - 1.0).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn round_trip() {
        let p = derive_constants(4, 4).unwrap();
        let g = grid::uniform(0.0, 2.0, 801).unwrap();
        let q: Vec<f64> = g.iter().map(|r| (1.0 + r * r).sqrt() + 0.1 * (3.0 * r).sin().powi(2)).collect();
        let s = ProfileState::pinned(g.clone(), q, 0.3, 4).unwrap();
        let f = p.blowup_scale(0.3).unwrap();
        let pg: Vec<f64> = g.iter().map(|r| r * f).collect();
        let res = to_inner(&s, &p, &pg).unwrap();
        let back = undo(&res, &g, &s).unwrap();
        for (a, b) in back.q.iter().zip(&s.q) {
            assert!((a - b).abs() < 1e-10);
        }
        let inner_pts: Vec<f64> = g.iter().map(|r| 0.5 * r * f).collect();
        let res = to_inner(&s, &p, &inner_pts).unwrap();
        let back = undo(&res, &g[..400], &s).unwrap();
        for (a, b) in back.q.iter().zip(&s.q) {
            assert!((a - b).abs() < 1e-8);
        }
    }
}
