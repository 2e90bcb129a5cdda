//! Banded LU with partial pivoting and Sturm counts for symmetric
//! tridiagonal pencils.

use crate::error::{Error, Result};

/// Square banded matrix with `kl` sub- and `ku` super-diagonals. Row storage
/// leaves room for the `kl` extra super-diagonals created by pivoting.
#[derive(Debug, Clone)]
pub struct Banded {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl Banded {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Banded { n, kl, ku, width, data: vec![0.0; n * width] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let off = j as isize - i as isize + self.kl as isize;
        (off >= 0 && (off as usize) < self.width).then(|| i * self.width + off as usize)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |s| self.data[s])
    }

    /// Adds `v` to entry `(i, j)`, which must lie inside the band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(j + self.kl >= i && j <= i + self.ku, "entry ({i}, {j}) outside the band");
        let s = self.slot(i, j).expect("inside band");
        self.data[s] += v;
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(j + self.kl >= i && j <= i + self.ku, "entry ({i}, {j}) outside the band");
        let s = self.slot(i, j).expect("inside band");
        self.data[s] = v;
    }

    pub fn clear_row(&mut self, i: usize) {
        let w = self.width;
        self.data[i * w..(i + 1) * w].fill(0.0);
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// LU factorisation with row pivoting; consumes the matrix.
    pub fn factor(mut self) -> Result<BandedLu> {
        let n = self.n;
        let mut piv = vec![0usize; n];
        let mut lower = vec![0.0; n * self.kl.max(1)];
        let upper_reach = self.ku + self.kl;
        for k in 0..n {
            let last = (k + self.kl).min(n - 1);
            let mut p = k;
            let mut best = self.get(k, k).abs();
            for i in k + 1..=last {
                let v = self.get(i, k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::domain(format!("singular banded matrix at pivot {k}")));
            }
            piv[k] = p;
            let jmax = (k + upper_reach).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    let a = self.get(k, j);
                    let b = self.get(p, j);
                    self.put(k, j, b);
                    self.put(p, j, a);
                }
            }
            let d = self.get(k, k);
            for i in k + 1..=last {
                let m = self.get(i, k) / d;
                lower[k * self.kl.max(1) + (i - k - 1)] = m;
                if m != 0.0 {
                    self.put(i, k, 0.0);
                    for j in k + 1..=jmax {
                        let u = self.get(k, j);
                        if u != 0.0 {
                            let v = self.get(i, j) - m * u;
                            self.put(i, j, v);
                        }
                    }
                }
            }
        }
        Ok(BandedLu { a: self, piv, lower })
    }

    fn put(&mut self, i: usize, j: usize, v: f64) {
        match self.slot(i, j) {
            Some(s) => self.data[s] = v,
            None => debug_assert!(v == 0.0, "fill outside storage"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BandedLu {
    a: Banded,
    piv: Vec<usize>,
    lower: Vec<f64>,
}

impl BandedLu {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.a.n;
        let kl = self.a.kl;
        let mut x = b.to_vec();
        for k in 0..n {
            x.swap(k, self.piv[k]);
            let last = (k + kl).min(n - 1);
            for i in k + 1..=last {
                x[i] -= self.lower[k * kl.max(1) + (i - k - 1)] * x[k];
            }
        }
        let reach = self.a.ku + kl;
        for k in (0..n).rev() {
            let jmax = (k + reach).min(n - 1);
            let mut s = x[k];
            for j in k + 1..=jmax {
                s -= self.a.get(k, j) * x[j];
            }
            x[k] = s / self.a.get(k, k);
        }
        x
    }
}

/// Symmetric tridiagonal matrix given by its diagonal and off-diagonal.
#[derive(Debug, Clone)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn zeros(n: usize) -> Self {
        SymTridiagonal { diag: vec![0.0; n], off: vec![0.0; n.saturating_sub(1)] }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.off[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    /// `self - sigma * other` as a banded matrix.
    pub fn shifted(&self, sigma: f64, other: &SymTridiagonal) -> Banded {
        let n = self.diag.len();
        let mut m = Banded::zeros(n, 1, 1);
        for i in 0..n {
            m.set(i, i, self.diag[i] - sigma * other.diag[i]);
            if i + 1 < n {
                let v = self.off[i] - sigma * other.off[i];
                m.set(i, i + 1, v);
                m.set(i + 1, i, v);
            }
        }
        m
    }
}

/// Number of eigenvalues of the pencil `(a, b)` (with `b` positive definite)
/// strictly greater than `sigma`, from the inertia of `a - sigma b`.
pub fn count_above(a: &SymTridiagonal, b: &SymTridiagonal, sigma: f64) -> usize {
    let n = a.diag.len();
    let mut count = 0;
    let mut d_prev = 1.0;
    for i in 0..n {
        let mut d = a.diag[i] - sigma * b.diag[i];
        if i > 0 {
            let e = a.off[i - 1] - sigma * b.off[i - 1];
            d -= e * e / d_prev;
        }
        if d == 0.0 {
            d = -f64::EPSILON * (a.diag[i].abs() + sigma.abs() * b.diag[i].abs()).max(f64::MIN_POSITIVE);
        }
        if d > 0.0 {
            count += 1;
        }
        d_prev = d;
    }
    count
}
