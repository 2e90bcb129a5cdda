//! Spectral examples for the Jacobi operator of the n = 4 minimal surface.

use mcf_core::jacobi::{self, smooth_cutoff};
use mcf_core::minimal_surface::{MinimalOptions, MinimalProfile};
use mcf_core::quadrature::gauss_kronrod;

fn data() -> jacobi::JacobiData {
    let mp = MinimalProfile::build(4, 1.0, MinimalOptions::new(1e3, 1e-11).per_decade(100)).unwrap();
    jacobi::assemble(&mp).unwrap()
}

/// `χ u₀` with `χ` falling from 1 at `a` to 0 at `b`.
fn cut_u0(jd: &jacobi::JacobiData, a: f64, b: f64) -> impl Fn(f64) -> (f64, f64) + '_ {
    move |r| {
        let c = jd.coeffs(r);
        let (chi, chi1) = smooth_cutoff(r, a, b);
        (c.u0.0 * chi, c.u0.1 * chi + c.u0.0 * chi1)
    }
}

// Since L u₀ = 0 the quotient of χu₀ is -∫𝒥u₀²χ'² / ∫𝒥(1+Q'²)u₀²χ²,
// negative and of order R⁻². Min-max also caps it by the top Dirichlet
// eigenvalue on the support.
#[test]
fn rayleigh_quotient_of_cut_off_u0() {
    let jd = data();
    let mut prev = f64::NEG_INFINITY;
    for r_trunc in [50.0, 100.0, 200.0, 400.0] {
        let (a, b) = (r_trunc / 4.0, r_trunc / 2.0);
        let q = jacobi::rayleigh_quotient(&jd, cut_u0(&jd, a, b), b).unwrap();
        let num = gauss_kronrod(
            |r| {
                let c = jd.coeffs(r);
                let chi1 = smooth_cutoff(r, a, b).1;
                c.j * (c.u0.0 * chi1).powi(2)
            },
            0.0,
            b,
            1e-11,
            0.0,
        )
        .unwrap()
        .value;
        let den = gauss_kronrod(
            |r| {
                let c = jd.coeffs(r);
                c.j * c.s2 * (c.u0.0 * smooth_cutoff(r, a, b).0).powi(2)
            },
            0.0,
            b,
            1e-11,
            0.0,
        )
        .unwrap()
        .value;
        assert!((q + num / den).abs() <= 1e-8 * q.abs(), "R = {r_trunc}: {q} vs {}", -num / den);
        assert!(q < 0.0 && q > prev, "R = {r_trunc}: {q}");
        prev = q;
        if r_trunc == 50.0 {
            let top = jacobi::top_eigenvalue(&jd, b, 4000).unwrap().lambda_max;
            assert!(q <= top + 1e-6, "{q} above top eigenvalue {top}");
        }
        if r_trunc >= 200.0 {
            assert!(q.abs() <= 1e-3, "R = {r_trunc}: {q}");
        }
    }
}

#[test]
fn top_eigenvalue_is_nonpositive_and_monotone_in_truncation() {
    let jd = data();
    let l50 = jacobi::top_eigenvalue(&jd, 50.0, 4000).unwrap();
    let l25 = jacobi::top_eigenvalue(&jd, 25.0, 4000).unwrap();
    assert!(l50.lambda_max <= 1e-3, "{}", l50.lambda_max);
    assert!(l25.lambda_max <= l50.lambda_max + 1e-6);
}

#[test]
fn indicial_roots_n4_n5() {
    let r = jacobi::indicial_roots(4).unwrap();
    assert_eq!(r.at_zero, (0.0, -2.0));
    assert_eq!(r.at_infinity, (-2.0, -3.0));
    let r = jacobi::indicial_roots(5).unwrap();
    assert!((r.at_infinity.1 - 0.5 * (-7.0 - 17f64.sqrt())).abs() < 1e-14);
    assert!((r.at_infinity.1 + 5.5616).abs() < 1e-4);
}
