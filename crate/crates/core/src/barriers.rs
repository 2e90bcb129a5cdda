//! Outer barriers for the perturbation `v = Q - r` of the cone.
//!
//! `v⁺(r,t) = C₀ r^{2λ+1} - C₁(T-t) r^{2λ-1}` with
//! `C₁ = [(2λ+1)(2λ) + (n-1)(2λ+1) + (n-1)] C₀` is a supersolution of the
//! linearized equation whatever the coefficient `1/(1+Q_r²) ∈ (0,1]`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::{ProfileState, Trajectory};
use crate::geometry;
use crate::interp::CubicSpline;
use crate::params::Params;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Supersolution {
    pub params: Params,
    pub c0: f64,
    pub c1: f64,
}

pub fn supersolution(p: &Params, c0: f64) -> Result<Supersolution> {
    if !(c0 > 0.0) || !c0.is_finite() {
        return Err(Error::domain(format!("C0 = {c0} must be positive")));
    }
    Ok(Supersolution { params: *p, c0, c1: p.barrier_bracket() * c0 })
}

impl Supersolution {
    fn lambda(&self) -> f64 {
        self.params.lambda_k
    }

    pub fn eval(&self, r: f64, t: f64) -> f64 {
        let l = self.lambda();
        let tau = self.params.t_sing - t;
        self.c0 * r.powf(2.0 * l + 1.0) - self.c1 * tau * r.powf(2.0 * l - 1.0)
    }

    /// `r* = √(C₁(T-t)/C₀)`, the edge of the validity region `r > r*`.
    pub fn positivity_radius(&self, t: f64) -> f64 {
        (self.c1 / self.c0 * (self.params.t_sing - t)).sqrt()
    }

    pub fn in_validity(&self, r: f64, t: f64) -> bool {
        t < self.params.t_sing && r > self.positivity_radius(t)
    }

    /// The terms of `∂_t v⁺ - (a v⁺_rr + (n-1)v⁺_r/r + (n-1)v⁺/r²)`, each
    /// evaluated directly from the derivatives of `v⁺`.
    fn residual_terms(&self, a: f64, r: f64, t: f64) -> [f64; 4] {
        let l = self.lambda();
        let m = self.params.n as f64 - 1.0;
        let tau = self.params.t_sing - t;
        let (p1, p0, pm1) = (r.powf(2.0 * l + 1.0), r.powf(2.0 * l - 1.0), r.powf(2.0 * l - 3.0));
        let v = self.c0 * p1 - self.c1 * tau * p0;
        let v_t = self.c1 * p0;
        let v_r = self.c0 * (2.0 * l + 1.0) * r.powf(2.0 * l) - self.c1 * tau * (2.0 * l - 1.0) * r.powf(2.0 * l - 2.0);
        let v_rr = self.c0 * (2.0 * l + 1.0) * (2.0 * l) * p0 - self.c1 * tau * (2.0 * l - 1.0) * (2.0 * l - 2.0) * pm1;
        [v_t, -a * v_rr, -m * v_r / r, -m * v / (r * r)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualReport {
    /// Minimum of the raw residual over samples and swept coefficients.
    pub min_raw: f64,
    /// Minimum of the residual divided by the sum of its term magnitudes.
    pub min_normalized: f64,
    pub at: (f64, f64),
    pub samples: usize,
}

/// Sweeps `a ∈ {1/(1+M²), 1}` at each `(r, t)` sample. Each residual is a
/// sum of terms of size up to `C₁ r^{2λ-1}` that cancel to leave a
/// non-negative remainder, so the normalized minimum is the quantity to
/// hold against roundoff.
pub fn supersolution_residual(s: &Supersolution, qr_bound: f64, samples: &[(f64, f64)]) -> Result<ResidualReport> {
    if !(qr_bound >= 1.0) {
        return Err(Error::domain(format!("Qr bound M = {qr_bound} must be at least 1")));
    }
    let coeffs = [1.0 / (1.0 + qr_bound * qr_bound), 1.0];
    let mut rep = ResidualReport { min_raw: f64::INFINITY, min_normalized: f64::INFINITY, at: (f64::NAN, f64::NAN), samples: 0 };
    for &(r, t) in samples {
        if !s.in_validity(r, t) {
            return Err(Error::SampleOutsideValidity { r, t });
        }
        for a in coeffs {
            let terms = s.residual_terms(a, r, t);
            let raw: f64 = terms.iter().sum();
            let mag: f64 = terms.iter().map(|x| x.abs()).sum();
            let norm = raw / mag;
            if norm < rep.min_normalized {
                rep.min_normalized = norm;
                rep.at = (r, t);
            }
            rep.min_raw = rep.min_raw.min(raw);
        }
        rep.samples += 1;
    }
    Ok(rep)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdReport {
    /// Whether `C₀ - C̄ ≥ C₁/Γ²`.
    pub hypothesis: bool,
    /// `min (v⁺ - C̄ r^{2λ+1}) / (C₀ r^{2λ+1})` over samples with `r ≥ Γ√(T-t)`.
    pub min_margin: f64,
    pub samples: usize,
}

/// Samples `v⁺ ≥ C̄ r^{2λ+1}` on `r ≥ Γ√(T-t)`; samples below the threshold
/// radius are skipped.
pub fn gamma_threshold_check(s: &Supersolution, gamma: f64, c_bar: f64, samples: &[(f64, f64)]) -> Result<ThresholdReport> {
    if !(gamma > 0.0) || !(c_bar >= 0.0) {
        return Err(Error::domain("need Gamma > 0 and C_bar >= 0"));
    }
    let l = s.lambda();
    let mut min_margin = f64::INFINITY;
    let mut count = 0;
    for &(r, t) in samples {
        let tau = s.params.t_sing - t;
        if !(tau > 0.0) {
            return Err(Error::SampleOutsideValidity { r, t });
        }
        if r < gamma * tau.sqrt() {
            continue;
        }
        let top = r.powf(2.0 * l + 1.0);
        min_margin = min_margin.min((s.eval(r, t) - c_bar * top) / (s.c0 * top));
        count += 1;
    }
    // Equality is the intended sharp case, so allow a few ulps of the operands.
    let lhs = s.c0 - c_bar;
    let rhs = s.c1 / (gamma * gamma);
    let slack = 4.0 * f64::EPSILON * (s.c0 + c_bar + rhs);
    Ok(ThresholdReport { hypothesis: lhs >= rhs - slack, min_margin, samples: count })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvexityReport {
    pub holds: bool,
    pub min_bracket: f64,
    pub samples: usize,
}

/// `1/(1+x) - 1 + x = x²/(1+x) ≥ 0` for `x = v/r ≥ 0`, evaluated in the
/// displayed (unsimplified) form on `(r, v)` samples.
pub fn convexity_reduction_check(samples: &[(f64, f64)]) -> Result<ConvexityReport> {
    let mut min_bracket = f64::INFINITY;
    for &(r, v) in samples {
        if !(v >= 0.0) || !(r > 0.0) {
            return Err(Error::Input(format!("need r > 0 and v >= 0, got (r, v) = ({r}, {v})")));
        }
        let x = v / r;
        min_bracket = min_bracket.min(1.0 / (1.0 + x) - 1.0 + x);
    }
    Ok(ConvexityReport { holds: min_bracket >= 0.0, min_bracket, samples: samples.len() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GradientReport {
    pub interior_max: f64,
    pub boundary_max: f64,
    /// `min (Q - r)` over the region, checked before anything else.
    pub min_gap: f64,
}

fn slopes(s: &ProfileState) -> Vec<f64> {
    s.jets().iter().map(|j| j.q1).collect()
}

/// Maximum principle for `Q_r` on `Ω = {Γ√(T-t) < r < Υ√T}`: the interior
/// maximum over the snapshots after the first, against the parabolic
/// boundary (first snapshot inside `Ω` and both lateral edges, the latter
/// by spline interpolation of `Q_r`).
pub fn gradient_bound_check(traj: &Trajectory, t_sing: f64, gamma: f64, upsilon: f64) -> Result<GradientReport> {
    let snaps = &traj.snapshots;
    if snaps.is_empty() {
        return Err(Error::Input("empty trajectory".into()));
    }
    let r_hi = upsilon * t_sing.sqrt();
    let mut min_gap = f64::INFINITY;
    for s in snaps {
        if s.t >= t_sing {
            return Err(Error::domain("snapshot at or after T"));
        }
        let r_lo = gamma * (t_sing - s.t).sqrt();
        if r_lo < s.grid[0] || r_hi > s.grid[s.len() - 1] || r_lo >= r_hi {
            return Err(Error::domain(format!("trajectory grid does not cover ({r_lo}, {r_hi}) at t = {}", s.t)));
        }
        for (r, q) in s.grid.iter().zip(&s.q) {
            if *r >= r_lo && *r <= r_hi {
                min_gap = min_gap.min(q - r);
            }
        }
    }
    if min_gap < 0.0 {
        return Err(Error::ConePrerequisiteFailed { min_gap });
    }
    let mut interior: f64 = 0.0;
    let mut boundary: f64 = 0.0;
    for (k, s) in snaps.iter().enumerate() {
        let r_lo = gamma * (t_sing - s.t).sqrt();
        let qr = slopes(s);
        let spline = CubicSpline::natural(s.grid.clone(), qr.clone())?;
        boundary = boundary.max(spline.eval(r_lo).abs()).max(spline.eval(r_hi).abs());
        for (r, d) in s.grid.iter().zip(&qr) {
            if *r > r_lo && *r < r_hi {
                if k == 0 {
                    boundary = boundary.max(d.abs());
                } else {
                    interior = interior.max(d.abs());
                }
            }
        }
    }
    Ok(GradientReport { interior_max: interior, boundary_max: boundary, min_gap })
}

/// `|v_rr| + (n-1)|v_r|/r + (n-1)/r·|1/(1+v/r) - 1|`, an upper bound for `|H|`
/// when `Q = r + v`.
pub fn h_chain(n: u32, r: f64, v: f64, v_r: f64, v_rr: f64) -> f64 {
    let m = n as f64 - 1.0;
    v_rr.abs() + m * v_r.abs() / r + m / r * (1.0 / (1.0 + v / r) - 1.0).abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HBoundReport {
    pub sup_h: f64,
    pub sup_chain: f64,
    /// `sup |H| / chain` over the sampled points; at most 1.
    pub max_h_over_chain: f64,
    /// Largest `chain / (ε-free scale C₀ (Γ√T)^{2λ-1})`.
    pub chain_constant: f64,
    pub points: usize,
    pub snapshots: usize,
}

/// Rounding allowance (in units of `|Q| + r`) when checking the hypotheses on `v`.
pub const HYPOTHESIS_ROUNDOFF: f64 = 64.0 * f64::EPSILON;

/// Empirical `sup |H|` over `15T/16 < t < T`, `2√2 Γ√(T-t) < r < Γ√T`, after
/// checking `0 ≤ v ≤ C₀ r^{2λ+1}` there.
pub fn h_bound_report(traj: &Trajectory, p: &Params, gamma: f64, c0: f64) -> Result<HBoundReport> {
    let t_sing = p.t_sing;
    let n = p.n;
    let l = p.lambda_k;
    let r_hi = gamma * t_sing.sqrt();
    let scale = c0 * r_hi.powf(2.0 * l - 1.0);
    let mut rep = HBoundReport { sup_h: 0.0, sup_chain: 0.0, max_h_over_chain: 0.0, chain_constant: 0.0, points: 0, snapshots: 0 };
    for s in &traj.snapshots {
        if !(s.t > 15.0 / 16.0 * t_sing && s.t < t_sing) {
            continue;
        }
        let r_lo = 2.0 * 2f64.sqrt() * gamma * (t_sing - s.t).sqrt();
        let jets = s.jets();
        let mut used = false;
        for jet in jets.iter().filter(|j| j.r > r_lo && j.r < r_hi) {
            let v = jet.q - jet.r;
            // `q - r` is only known to the rounding of `q` and `r`.
            let slack = HYPOTHESIS_ROUNDOFF * (jet.q.abs() + jet.r);
            if v < -slack {
                return Err(Error::HypothesisFailed(format!("v >= 0 fails: v = {v} at r = {}, t = {}", jet.r, s.t)));
            }
            let cap = c0 * jet.r.powf(2.0 * l + 1.0);
            if v > cap + slack {
                return Err(Error::HypothesisFailed(format!("v <= C0 r^(2lambda+1) fails: v = {v} > {cap} at r = {}, t = {}", jet.r, s.t)));
            }
            let h = geometry::curvature(n, *jet)?.h.abs();
            let chain = h_chain(n, jet.r, v, jet.q1 - 1.0, jet.q2);
            rep.sup_h = rep.sup_h.max(h);
            rep.sup_chain = rep.sup_chain.max(chain);
            if chain > 0.0 {
                rep.max_h_over_chain = rep.max_h_over_chain.max(h / chain);
            }
            rep.chain_constant = rep.chain_constant.max(chain / scale);
            rep.points += 1;
            used = true;
        }
        if used {
            rep.snapshots += 1;
        }
    }
    if rep.snapshots == 0 {
        return Err(Error::HypothesisFailed("no snapshot inside 15T/16 < t < T covers the region".into()));
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{self, EvolveOptions, StopRule};
    use crate::grid;
    use crate::params::derive_constants;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn samples(s: &Supersolution, count: usize, seed: u64) -> Vec<(f64, f64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                let t = rng.gen_range(0.0..s.params.t_sing);
                let r = s.positivity_radius(t) * (1.0 + 10f64.powf(rng.gen_range(-6.0..2.0)));
                (r, t)
            })
            .collect()
    }

    #[test]
    fn bracket_examples() {
        let s = supersolution(&derive_constants(4, 2).unwrap(), 1.0).unwrap();
        assert_eq!(s.c1, 11.0);
        let s = supersolution(&derive_constants(4, 4).unwrap(), 2.0).unwrap();
        assert_eq!(s.c1, 102.0);
        let s = supersolution(&derive_constants(4, 2).unwrap().with_singular_time(1.0), 1.0).unwrap();
        assert!((s.positivity_radius(0.99) - 0.11f64.sqrt()).abs() < 1e-14);
        assert!((s.positivity_radius(0.99) - 0.3317).abs() < 1e-4);
        assert!(supersolution(&derive_constants(4, 2).unwrap(), 0.0).is_err());
    }

    #[test]
    fn residual_nonnegative() {
        for (n, k) in [(4, 2), (4, 4), (5, 3), (7, 4)] {
            let s = supersolution(&derive_constants(n, k).unwrap(), 1.0).unwrap();
            let rep = supersolution_residual(&s, 2.0, &samples(&s, 10_000, 1)).unwrap();
            assert!(rep.min_normalized >= -1e-12, "({n},{k}) {rep:?}");
        }
        let s = supersolution(&derive_constants(4, 2).unwrap(), 1.0).unwrap();
        assert!(matches!(supersolution_residual(&s, 2.0, &[(0.01, 0.5)]), Err(Error::SampleOutsideValidity { .. })));
    }

    #[test]
    fn residual_scales_with_c0() {
        let p = derive_constants(4, 4).unwrap();
        let (a, b) = (supersolution(&p, 1.0).unwrap(), supersolution(&p, 3.0).unwrap());
        let pts = [(2.0, 0.2), (5.0, 0.7)];
        for &(r, t) in &pts {
            let ra: f64 = a.residual_terms(1.0, r, t).iter().sum();
            let rb: f64 = b.residual_terms(1.0, r, t).iter().sum();
            assert!((rb - 3.0 * ra).abs() <= 1e-12 * rb.abs().max(1.0));
        }
    }

    #[test]
    fn threshold_holds() {
        let s = supersolution(&derive_constants(4, 4).unwrap(), 1.0).unwrap();
        let gamma = 10.0;
        let c_bar = s.c0 - s.c1 / (gamma * gamma);
        let rep = gamma_threshold_check(&s, gamma, c_bar, &samples(&s, 10_000, 2)).unwrap();
        assert!(rep.hypothesis && rep.samples > 0);
        assert!(rep.min_margin >= -1e-12);
    }

    #[test]
    fn convexity_examples() {
        assert_eq!(convexity_reduction_check(&[(1.0, 0.0)]).unwrap().min_bracket, 0.0);
        assert_eq!(convexity_reduction_check(&[(2.0, 2.0)]).unwrap().min_bracket, 0.5);
        assert!(convexity_reduction_check(&[(1.0, -1.0)]).is_err());
    }

    #[test]
    fn gradient_bound_on_cone_and_cylinder() {
        let g = grid::geometric(0.01, 10.0, 40).unwrap();
        let cone = ProfileState::cone(g.clone(), 2).unwrap();
        let opts = EvolveOptions { outputs: vec![0.25, 0.5, 0.95], ..Default::default() };
        let (traj, _) = flow::evolve_with(&cone, 4, 0.97, StopRule::default(), &opts).unwrap();
        let rep = gradient_bound_check(&traj, 1.0, 1.0, 5.0).unwrap();
        assert!((rep.interior_max - 1.0).abs() < 1e-9 && (rep.boundary_max - 1.0).abs() < 1e-9);
        let h = h_bound_report(&traj, &derive_constants(4, 2).unwrap(), 1.0, 1.0).unwrap();
        assert!(h.sup_h < 1e-9 && h.snapshots == 2);

        let cyl = ProfileState::cylinder(4, 1.0, grid::uniform(0.0, 10.0, 200).unwrap(), 0.0, 2).unwrap();
        let t = Trajectory { snapshots: vec![cyl] };
        assert!(matches!(gradient_bound_check(&t, 1.0, 1.0, 5.0), Err(Error::ConePrerequisiteFailed { .. })));
    }

    #[test]
    fn monomial_chain_constant() {
        let p = derive_constants(4, 4).unwrap();
        let eps = 1e-3;
        let g = grid::geometric(0.01, 2.0, 200).unwrap();
        let q: Vec<f64> = g.iter().map(|r| r + eps * r.powf(2.0 * p.lambda_k + 1.0)).collect();
        let snap = ProfileState::pinned(g, q, 0.97, 4).unwrap();
        let rep = h_bound_report(&Trajectory { snapshots: vec![snap] }, &p, 1.0, eps).unwrap();
        assert!(rep.chain_constant <= p.barrier_bracket() * (1.0 + 1e-6));
        assert!(rep.max_h_over_chain <= 1.0 + 1e-12);
    }
}
