//! Finite-difference weights on arbitrary nodes (Fornberg's recursion).

/// Weights `w[d][j]` such that `f^{(d)}(z) ≈ Σ_j w[d][j] f(x[j])` for
/// `d = 0..=m`.
pub fn fornberg(z: f64, x: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}


/// First and second derivatives of sampled data on a strictly increasing
/// grid using `width`-point stencils (3 or 5), centred where possible. When
/// `r[0] == 0` and `even_at_axis` is set, points left of the axis are taken
/// from the even reflection `q(-r) = q(r)`.
pub fn fd_jets(r: &[f64], q: &[f64], width: usize, even_at_axis: bool) -> Vec<(f64, f64)> {
    let n = r.len();
    assert!(width == 3 || width == 5, "stencil width must be 3 or 5");
    assert!(n >= width && q.len() == n);
    let half = width / 2;
    let mirror = even_at_axis && r[0] == 0.0;
    let mut xs = vec![0.0; width];
    let mut ys = vec![0.0; width];
    (0..n)
        .map(|i| {
            let start: isize = if mirror {
                (i as isize - half as isize).min((n - width) as isize)
            } else {
                (i as isize - half as isize).clamp(0, (n - width) as isize)
            };
            for m in 0..width {
                let j = start + m as isize;
                if j < 0 {
                    let k = (-j) as usize;
                    xs[m] = -r[k];
                    ys[m] = q[k];
                } else {
                    xs[m] = r[j as usize];
                    ys[m] = q[j as usize];
                }
            }
            let w = fornberg(r[i], &xs, 2);
            let d1: f64 = w[1].iter().zip(&ys).map(|(a, b)| a * b).sum();
            let d2: f64 = w[2].iter().zip(&ys).map(|(a, b)| a * b).sum();
            if mirror && i == 0 {
                (0.0, d2)
            } else {
                (d1, d2)
            }
        })
        .collect()
}

/// Derivative weights of one node: columns with their first- and
/// second-derivative weights. Mirrored ghost points are folded onto the
/// columns they reflect.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeStencil {
    pub cols: Vec<usize>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
}

impl NodeStencil {
    pub fn apply(&self, q: &[f64]) -> (f64, f64) {
        let mut a = 0.0;
        let mut b = 0.0;
        for (k, &j) in self.cols.iter().enumerate() {
            a += self.d1[k] * q[j];
            b += self.d2[k] * q[j];
        }
        (a, b)
    }
}

/// The stencils used by [`fd_jets`], as reusable weights. At a mirrored
/// axis the first-derivative weights are zeroed.
pub fn stencils(r: &[f64], width: usize, even_at_axis: bool) -> Vec<NodeStencil> {
    let n = r.len();
    assert!(width == 3 || width == 5, "stencil width must be 3 or 5");
    assert!(n >= width);
    let half = width / 2;
    let mirror = even_at_axis && r[0] == 0.0;
    let mut xs = vec![0.0; width];
    let mut js = vec![0usize; width];
    (0..n)
        .map(|i| {
            let start: isize = if mirror {
                (i as isize - half as isize).min((n - width) as isize)
            } else {
                (i as isize - half as isize).clamp(0, (n - width) as isize)
            };
            for m in 0..width {
                let j = start + m as isize;
                if j < 0 {
                    xs[m] = -r[(-j) as usize];
                    js[m] = (-j) as usize;
                } else {
                    xs[m] = r[j as usize];
                    js[m] = j as usize;
                }
            }
            let w = fornberg(r[i], &xs, 2);
            let mut st = NodeStencil { cols: Vec::with_capacity(width), d1: Vec::new(), d2: Vec::new() };
            for m in 0..width {
                match st.cols.iter().position(|&c| c == js[m]) {
                    Some(k) => {
                        st.d1[k] += w[1][m];
                        st.d2[k] += w[2][m];
                    }
                    None => {
                        st.cols.push(js[m]);
                        st.d1.push(w[1][m]);
                        st.d2.push(w[2][m]);
                    }
                }
            }
            if mirror && i == 0 {
                st.d1.iter_mut().for_each(|v| *v = 0.0);
            }
            st
        })
        .collect()
}

#[cfg(test)]
mod jet_tests {
    use super::*;

    #[test]
    fn five_point_jets_are_fourth_order() {
        let err = |n: usize| {
            let r: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
            let q: Vec<f64> = r.iter().map(|x| (x * x).cos()).collect();
            let jets = fd_jets(&r, &q, 5, true);
            // One-sided windows at the far end are third order; skip them.
            r.iter()
                .zip(&jets)
                .take(n - 2)
                .map(|(x, j)| (j.1 - (-2.0 * (x * x).sin() - 4.0 * x * x * (x * x).cos())).abs())
                .fold(0.0, f64::max)
        };
        let ratio = err(41) / err(81);
        assert!(ratio > 12.0, "ratio {ratio}");
    }

    #[test]
    fn stencils_match_jets() {
        let r: Vec<f64> = (0..30).map(|i| (i as f64 * 0.1).powf(1.3)).collect();
        let q: Vec<f64> = r.iter().map(|x| (1.0 + x * x).sqrt()).collect();
        for width in [3, 5] {
            let jets = fd_jets(&r, &q, width, true);
            for (st, j) in stencils(&r, width, true).iter().zip(&jets) {
                let (a, b) = st.apply(&q);
                assert!((a - j.0).abs() < 1e-9 && (b - j.1).abs() < 1e-9);
            }
        }
    }
}
