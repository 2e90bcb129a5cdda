//! Dormand–Prince 5(4) integrator with steps that land exactly on requested
//! output points.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct Dopri {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Dopri {
    pub fn new(rtol: f64, atol: f64) -> Self {
        Dopri { rtol, atol, max_steps: 1_000_000 }
    }
}

const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] = [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0];
const B: [f64; 6] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

fn axpy<const N: usize>(y: &[f64; N], h: f64, coeffs: &[f64], ks: &[[f64; N]]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in coeffs.iter().zip(ks) {
        if *c != 0.0 {
            for i in 0..N {
                out[i] += h * c * k[i];
            }
        }
    }
    out
}

impl Dopri {
    /// Integrates `y' = f(t, y)` from `(t0, y0)` through the monotone list of
    /// output points `stops`, returning the state at each. `monitor` sees
    /// every accepted step and may abort the integration.
    pub fn integrate<const N: usize, F, M>(
        &self,
        mut f: F,
        t0: f64,
        y0: [f64; N],
        stops: &[f64],
        mut monitor: M,
    ) -> Result<Vec<[f64; N]>>
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
        M: FnMut(f64, &[f64; N]) -> Result<()>,
    {
        let mut out = Vec::with_capacity(stops.len());
        let Some(&t_end) = stops.last() else { return Ok(out) };
        let dir = if t_end >= t0 { 1.0 } else { -1.0 };
        let mut t = t0;
        let mut y = y0;
        let mut k1 = f(t, &y);
        let span = (t_end - t0).abs().max(f64::MIN_POSITIVE);
        let mut h = initial_step(span, &y, &k1, self.rtol, self.atol);
        let mut steps = 0usize;
        for &stop in stops {
            if (stop - t) * dir < 0.0 {
                return Err(Error::Input("output points must be monotone".into()));
            }
            while (stop - t) * dir > 0.0 {
                steps += 1;
                if steps > self.max_steps {
                    return Err(Error::NonConvergence { what: "Dormand-Prince integration", iterations: steps });
                }
                let remaining = (stop - t).abs();
                let mut hs = h.min(remaining);
                // Avoid leaving a sliver before the stop.
                if hs < remaining && remaining < 1.05 * hs {
                    hs = 0.5 * remaining;
                }
                let land = hs >= remaining;
                let hd = dir * hs;
                let k2 = f(t + C[0] * hd, &axpy(&y, hd, &A2, &[k1]));
                let k3 = f(t + C[1] * hd, &axpy(&y, hd, &A3, &[k1, k2]));
                let k4 = f(t + C[2] * hd, &axpy(&y, hd, &A4, &[k1, k2, k3]));
                let k5 = f(t + C[3] * hd, &axpy(&y, hd, &A5, &[k1, k2, k3, k4]));
                let k6 = f(t + C[4] * hd, &axpy(&y, hd, &A6, &[k1, k2, k3, k4, k5]));
                let y_new = axpy(&y, hd, &B, &[k1, k2, k3, k4, k5, k6]);
                let t_new = if land { stop } else { t + hd };
                let k7 = f(t_new, &y_new);
                let ks = [k1, k2, k3, k4, k5, k6, k7];
                let mut err = 0.0f64;
                for i in 0..N {
                    let e: f64 = E.iter().zip(&ks).map(|(c, k)| c * k[i]).sum::<f64>() * hd;
                    let sc = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
                    err = err.max(e.abs() / sc);
                }
                if !err.is_finite() {
                    h = 0.1 * hs;
                    continue;
                }
                if err <= 1.0 {
                    t = t_new;
                    y = y_new;
                    k1 = k7;
                    monitor(t, &y)?;
                }
                let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                let h_next = hs * factor;
                // A forced landing step says nothing about the natural size.
                h = if land && err <= 1.0 { h.max(h_next) } else { h_next };
                if h < 1e-14 * span {
                    return Err(Error::NonConvergence { what: "Dormand-Prince step size", iterations: steps });
                }
            }
            out.push(y);
        }
        Ok(out)
    }
}

fn initial_step<const N: usize>(span: f64, y: &[f64; N], dy: &[f64; N], rtol: f64, atol: f64) -> f64 {
    let mut d0 = 0.0f64;
    let mut d1 = 0.0f64;
    for i in 0..N {
        let sc = atol + rtol * y[i].abs();
        d0 = d0.max(y[i].abs() / sc);
        d1 = d1.max(dy[i].abs() / sc);
    }
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 * span } else { 0.01 * d0 / d1 };
    h.min(span).max(1e-12 * span)
}
