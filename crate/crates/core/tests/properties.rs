//! Randomized properties of the closed-form pieces.

use mcf_core::barriers::{convexity_reduction_check, supersolution, supersolution_residual};
use mcf_core::bessel::bessel_i;
use mcf_core::geometry::{curvature, ProfileJet};
use mcf_core::params::derive_constants;
use proptest::prelude::*;

proptest! {
    #[test]
    fn cylinder_and_sphere_curvature(n in 4u32..12, c in 0.05f64..20.0, frac in 0.0f64..0.95) {
        let m = n as f64 - 1.0;
        let cyl = curvature(n, ProfileJet::cylinder(frac * c, c)).unwrap();
        prop_assert!((cyl.h + m / c).abs() <= 1e-10 * (m / c).max(1.0));
        let k = 2.0 * n as f64 - 1.0;
        let sph = curvature(n, ProfileJet::sphere(frac * c, c)).unwrap();
        prop_assert!((sph.h + k / c).abs() <= 1e-10 * (k / c).max(1.0));
        prop_assert!((sph.a2 - k / (c * c)).abs() <= 1e-10 * (k / (c * c)).max(1.0));
    }

    #[test]
    fn half_order_bessel(z in 1e-3f64..700.0) {
        let exact = (2.0 / (std::f64::consts::PI * z)).sqrt() * z.sinh();
        prop_assert!((bessel_i(0.5, z, false) / exact - 1.0).abs() <= 1e-10);
        let scaled = bessel_i(0.5, z, true);
        let exact_scaled = (2.0 / (std::f64::consts::PI * z)).sqrt() * 0.5 * (1.0 - (-2.0 * z).exp());
        prop_assert!((scaled / exact_scaled - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn supersolution_residual_nonnegative(n in 4u32..9, k in 2u32..7, c0 in 0.01f64..100.0, t in 0.0f64..0.999, stretch in 1e-6f64..100.0) {
        let s = supersolution(&derive_constants(n, k).unwrap(), c0).unwrap();
        let r = s.positivity_radius(t) * (1.0 + stretch);
        let rep = supersolution_residual(&s, 3.0, &[(r, t)]).unwrap();
        prop_assert!(rep.min_normalized >= -1e-12, "{:?}", rep);
    }

    #[test]
    fn convexity_bracket(r in 1e-6f64..1e3, x in 0.0f64..1e6) {
        prop_assert!(convexity_reduction_check(&[(r, r * x)]).unwrap().holds);
    }

    #[test]
    fn lambda_sigma_positive(n in 4u32..200, k in 2u32..20) {
        let p = derive_constants(n, k).unwrap();
        prop_assert!(p.alpha < 0.0 && p.alpha > -2.0 - 1e-15);
        prop_assert!(p.lambda_k > 0.0 && p.sigma_k > 0.0);
        prop_assert!((p.barrier_bracket() * 1.0 - supersolution(&p, 1.0).unwrap().c1).abs() == 0.0);
    }
}
