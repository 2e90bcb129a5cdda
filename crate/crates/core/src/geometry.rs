//! Curvature of `O(n)×O(n)`-invariant hypersurfaces from their profile jets.
//!
//! Sign convention: the unit normal is `(-Q' x/|x|, θ)/√(1+Q'²)`, so a round
//! sphere of radius `R` has `H = -(2n-1)/R`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Profile value and derivatives at one radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileJet {
    pub r: f64,
    pub q: f64,
    pub q1: f64,
    pub q2: f64,
}

impl ProfileJet {
    pub fn new(r: f64, q: f64, q1: f64, q2: f64) -> Self {
        ProfileJet { r, q, q1, q2 }
    }

    /// Simons cone `Q = r`.
    pub fn cone(r: f64) -> Self {
        ProfileJet::new(r, r, 1.0, 0.0)
    }

    /// Cylinder `Q = c`.
    pub fn cylinder(r: f64, c: f64) -> Self {
        ProfileJet::new(r, c, 0.0, 0.0)
    }

    /// Round sphere `Q = √(R² - r²)`.
    pub fn sphere(r: f64, radius: f64) -> Self {
        let q = (radius * radius - r * r).sqrt();
        ProfileJet::new(r, q, -r / q, -radius * radius / (q * q * q))
    }

    fn slope_factor(&self) -> f64 {
        (1.0 + self.q1 * self.q1).sqrt()
    }
}

/// Metric coefficient `g_rr` and the principal curvatures (eigenvalues of
/// the shape operator) in the radial, `x`-sphere and `y`-sphere directions.
/// The two sphere directions each have multiplicity `n-1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvatureData {
    pub n: u32,
    pub g_rr: f64,
    pub a_rr: f64,
    pub a_omega: f64,
    pub a_theta: f64,
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(rename = "A2")]
    pub a2: f64,
}

impl CurvatureData {
    /// Trace of the shape operator recomputed from the stored entries.
    pub fn trace(&self) -> f64 {
        let m = self.n as f64 - 1.0;
        self.a_rr + m * self.a_omega + m * self.a_theta
    }

    pub fn norm_a(&self) -> f64 {
        self.a2.sqrt()
    }

    /// Covariant radial entry `A_rr = g_rr · a_rr`.
    pub fn covariant_rr(&self) -> f64 {
        self.g_rr * self.a_rr
    }
}

fn check_jet(jet: &ProfileJet) -> Result<()> {
    if !(jet.q > 0.0) {
        return Err(Error::domain(format!("profile value Q = {} must be positive", jet.q)));
    }
    if !(jet.r >= 0.0) {
        return Err(Error::domain(format!("radius r = {} must be non-negative", jet.r)));
    }
    if jet.r == 0.0 && jet.q1 != 0.0 {
        return Err(Error::AxisSlope { q1: jet.q1 });
    }
    Ok(())
}

/// Principal curvatures, `H` and `|A|²` of the hypersurface at `jet`. At the
/// axis the `x`-sphere curvature `Q'/r` is replaced by its limit `Q''(0)`.
pub fn curvature(n: u32, jet: ProfileJet) -> Result<CurvatureData> {
    check_jet(&jet)?;
    let g_rr = 1.0 + jet.q1 * jet.q1;
    let s = g_rr.sqrt();
    let a_rr = jet.q2 / (g_rr * s);
    let a_omega = if jet.r == 0.0 { jet.q2 / s } else { jet.q1 / (jet.r * s) };
    let a_theta = -1.0 / (jet.q * s);
    let m = n as f64 - 1.0;
    let h = a_rr + m * (a_omega + a_theta);
    let a2 = a_rr * a_rr + m * (a_omega * a_omega + a_theta * a_theta);
    Ok(CurvatureData { n, g_rr, a_rr, a_omega, a_theta, h, a2 })
}

/// Components of the unit normal along `x/|x|` and along `θ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnitNormal {
    pub radial: f64,
    pub spherical: f64,
}

pub fn unit_normal(jet: ProfileJet) -> UnitNormal {
    let s = jet.slope_factor();
    UnitNormal { radial: -jet.q1 / s, spherical: 1.0 / s }
}

/// Normal component of the position vector, `(Q - rQ')/√(1+Q'²)`.
pub fn normal_position(jet: ProfileJet) -> f64 {
    (jet.q - jet.r * jet.q1) / jet.slope_factor()
}

/// Laplace–Beltrami operator on a radial function `u` with jet `(u, u', u'')`.
pub fn laplace_beltrami_radial(n: u32, jet: ProfileJet, u: (f64, f64, f64)) -> f64 {
    let (_, u1, u2) = u;
    let m = n as f64 - 1.0;
    let g = 1.0 + jet.q1 * jet.q1;
    let radial = if jet.r == 0.0 { m * u2 } else { m * u1 / jet.r };
    (u2 + radial - jet.q1 * jet.q2 * u1 / g + m * jet.q1 * u1 / jet.q) / g
}

/// The two-term form valid on minimal hypersurfaces.
pub fn laplace_beltrami_minimal(n: u32, jet: ProfileJet, u: (f64, f64, f64)) -> f64 {
    let (_, u1, u2) = u;
    let m = n as f64 - 1.0;
    let radial = if jet.r == 0.0 { m * u2 } else { m * u1 / jet.r };
    u2 / (1.0 + jet.q1 * jet.q1) + radial
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistanceEquivalence {
    /// `√(1 + max|Q'|²)`.
    #[serde(rename = "C")]
    pub c: f64,
    /// `max_i (arclength_i / (C r_i) - 1)`; non-positive when the bound holds.
    pub max_ratio_violation: f64,
}

/// Tolerance on [`DistanceEquivalence::max_ratio_violation`] that absorbs
/// floating-point rounding in the arclength sums.
pub const DISTANCE_ROUNDOFF: f64 = 64.0 * f64::EPSILON;

impl DistanceEquivalence {
    pub fn verified(&self) -> bool {
        self.max_ratio_violation <= DISTANCE_ROUNDOFF
    }
}

/// Compares the length of the radial path from the axis slice with `C·r`.
/// The path length is that of the polygon through the samples, and `C` uses
/// the larger of the chord slopes and the three-point derivative estimates.
pub fn distance_equivalence(r: &[f64], q: &[f64]) -> Result<DistanceEquivalence> {
    if r.len() < 3 || q.len() != r.len() {
        return Err(Error::Input("need at least 3 matching samples".into()));
    }
    if !crate::grid::is_strictly_increasing(r) {
        return Err(Error::Input("radii must be strictly increasing".into()));
    }
    let jets = crate::stencil::fd_jets(r, q, 3, true);
    let mut max_slope = jets.iter().map(|j| j.0.abs()).fold(0.0, f64::max);
    for w in 0..r.len() - 1 {
        max_slope = max_slope.max(((q[w + 1] - q[w]) / (r[w + 1] - r[w])).abs());
    }
    let c = (1.0 + max_slope * max_slope).sqrt();
    let mut arc = 0.0;
    let mut worst = f64::NEG_INFINITY;
    for i in 1..r.len() {
        arc += (r[i] - r[i - 1]).hypot(q[i] - q[i - 1]);
        // Measure from the first sample, which sits on the axis slice when r[0] = 0.
        let len = r[i] - r[0];
        if len > 0.0 {
            worst = worst.max(arc / (c * len) - 1.0);
        }
    }
    Ok(DistanceEquivalence { c, max_ratio_violation: worst })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightedNormReport {
    pub a: f64,
    pub value: f64,
}

/// `max_i (1 + r_i)^a |u_i|`.
pub fn weighted_sup_norm(r: &[f64], u: &[f64], a: f64) -> Result<WeightedNormReport> {
    if r.is_empty() || r.len() != u.len() {
        return Err(Error::Input("weighted norm needs matching non-empty samples".into()));
    }
    let value = r.iter().zip(u).map(|(r, u)| (1.0 + r).powf(a) * u.abs()).fold(0.0, f64::max);
    Ok(WeightedNormReport { a, value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cone_is_minimal() {
        let c = curvature(4, ProfileJet::cone(2.0)).unwrap();
        assert!(c.h.abs() < 1e-15);
        assert!((c.a2 - 0.75).abs() < 1e-15);
    }

    #[test]
    fn cylinder_curvature() {
        let c = curvature(4, ProfileJet::cylinder(0.7, 1.0)).unwrap();
        assert_eq!(c.h, -3.0);
        assert_eq!(c.a2, 3.0);
    }

    #[test]
    fn sphere_at_point_six() {
        let jet = ProfileJet::new(0.6, 0.8, -0.75, -1.0 / 0.512);
        let c = curvature(4, jet).unwrap();
        assert!((c.h + 7.0).abs() < 1e-12);
        assert!((c.a2 - 7.0).abs() < 1e-12);
    }

    #[test]
    fn sphere_is_r_independent_and_umbilic() {
        for n in [4u32, 5, 7] {
            for radius in [0.5, 1.0, 3.0] {
                let m = 2.0 * n as f64 - 1.0;
                for i in 0..50 {
                    let r = radius * i as f64 / 50.0;
                    let c = curvature(n, ProfileJet::sphere(r, radius)).unwrap();
                    assert!((c.h + m / radius).abs() < 1e-10 * m / radius);
                    assert!((c.a2 - m / (radius * radius)).abs() < 1e-10 * m / (radius * radius));
                    assert!((c.a2 - c.h * c.h / m).abs() < 1e-9 * c.a2);
                }
            }
        }
    }

    #[test]
    fn errors() {
        assert!(matches!(curvature(4, ProfileJet::new(1.0, 0.0, 0.0, 0.0)), Err(Error::Domain(_))));
        assert!(matches!(curvature(4, ProfileJet::new(0.0, 1.0, 0.1, 0.0)), Err(Error::AxisSlope { .. })));
    }

    #[test]
    fn normals() {
        let nu = unit_normal(ProfileJet::cone(1.0));
        assert!((nu.radial + 0.5f64.sqrt()).abs() < 1e-15);
        assert!((nu.spherical - 0.5f64.sqrt()).abs() < 1e-15);
        let nu = unit_normal(ProfileJet::cylinder(1.0, 1.0));
        assert_eq!((nu.radial, nu.spherical), (0.0, 1.0));
        assert_eq!(normal_position(ProfileJet::new(0.0, 1.3, 0.0, 0.2)), 1.3);
        assert_eq!(normal_position(ProfileJet::cone(3.0)), 0.0);
    }

    #[test]
    fn laplace_beltrami_examples() {
        let jet = ProfileJet::cone(1.7);
        assert_eq!(laplace_beltrami_radial(4, jet, (5.0, 0.0, 0.0)), 0.0);
        let u = (1.7 * 1.7, 2.0 * 1.7, 2.0);
        let full = laplace_beltrami_radial(4, jet, u);
        let short = laplace_beltrami_minimal(4, jet, u);
        assert!((full - 7.0).abs() < 1e-14);
        assert!((short - 7.0).abs() < 1e-14);
    }

    #[test]
    fn distance_equivalence_exact_cases() {
        let r: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
        let d = distance_equivalence(&r, &vec![2.0; 50]).unwrap();
        assert_eq!(d.c, 1.0);
        assert!(d.max_ratio_violation.abs() < 1e-14 && d.verified());
        let d = distance_equivalence(&r, &r).unwrap();
        assert!((d.c - 2f64.sqrt()).abs() < 1e-15);
        assert!(d.max_ratio_violation.abs() < 1e-14 && d.verified());
    }

    #[test]
    fn weighted_norm_examples() {
        let r: Vec<f64> = (0..100).map(|i| i as f64 * 0.37).collect();
        assert_eq!(weighted_sup_norm(&r, &vec![1.0; 100], 0.0).unwrap().value, 1.0);
        let u: Vec<f64> = r.iter().map(|x| (1.0 + x).powi(-2)).collect();
        assert!((weighted_sup_norm(&r, &u, 2.0).unwrap().value - 1.0).abs() < 1e-14);
        assert!(weighted_sup_norm(&[], &[], 1.0).is_err());
    }

    #[test]
    fn fd_jets_converge_at_second_order() {
        // Sphere of radius 2 sampled on [0.2, 1.2]; three-point jets.
        let err = |nodes: usize| {
            let r = crate::grid::uniform(0.2, 1.2, nodes).unwrap();
            let q: Vec<f64> = r.iter().map(|x| (4.0 - x * x).sqrt()).collect();
            let jets = crate::stencil::fd_jets(&r, &q, 3, false);
            r.iter()
                .zip(&q)
                .zip(&jets)
                .skip(1)
                .take(nodes - 2)
                .map(|((&x, &qv), j)| {
                    let exact = curvature(4, ProfileJet::sphere(x, 2.0)).unwrap().h;
                    (curvature(4, ProfileJet::new(x, qv, j.0, j.1)).unwrap().h - exact).abs()
                })
                .fold(0.0, f64::max)
        };
        let order = (err(41) / err(81)).log2();
        assert!(order >= 1.9, "order {order}");
    }

    proptest! {
        #[test]
        fn trace_and_cauchy_schwarz(r in 0.01f64..10.0, q in 0.01f64..10.0, q1 in -5.0f64..5.0, q2 in -10.0f64..10.0, n in 4u32..10) {
            let c = curvature(n, ProfileJet::new(r, q, q1, q2)).unwrap();
            prop_assert!((c.trace() - c.h).abs() <= 1e-12 * (1.0 + c.h.abs()));
            prop_assert!(c.a2 * (2 * n - 1) as f64 >= c.h * c.h * (1.0 - 1e-12));
            let nu = unit_normal(ProfileJet::new(r, q, q1, q2));
            prop_assert!((nu.radial.hypot(nu.spherical) - 1.0).abs() < 1e-14);
        }
    }
}
