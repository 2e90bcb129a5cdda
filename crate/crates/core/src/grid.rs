//! Radial grids.

use crate::error::{Error, Result};

/// Geometric grid from `lo` to `hi` (both included) with about
/// `per_decade` nodes per factor of ten.
pub fn geometric(lo: f64, hi: f64, per_decade: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo) || per_decade == 0 {
        return Err(Error::domain(format!("bad geometric grid [{lo}, {hi}] x {per_decade}")));
    }
    let decades = (hi / lo).log10();
    let intervals = ((decades * per_decade as f64).ceil() as usize).max(1);
    let ratio = (hi / lo).ln() / intervals as f64;
    let mut g: Vec<f64> = (0..=intervals).map(|i| lo * (ratio * i as f64).exp()).collect();
    g[intervals] = hi;
    Ok(g)
}

/// The axis node `0` followed by a geometric grid on `[lo, hi]`.
pub fn with_axis(lo: f64, hi: f64, per_decade: usize) -> Result<Vec<f64>> {
    let mut g = vec![0.0];
    g.extend(geometric(lo, hi, per_decade)?);
    Ok(g)
}

/// `nodes` equally spaced points on `[a, b]`.
pub fn uniform(a: f64, b: f64, nodes: usize) -> Result<Vec<f64>> {
    if nodes < 2 || !(b > a) {
        return Err(Error::domain(format!("bad uniform grid [{a}, {b}] x {nodes}")));
    }
    let h = (b - a) / (nodes - 1) as f64;
    let mut g: Vec<f64> = (0..nodes).map(|i| a + h * i as f64).collect();
    g[nodes - 1] = b;
    Ok(g)
}

pub fn is_strictly_increasing(x: &[f64]) -> bool {
    x.windows(2).all(|w| w[1] > w[0])
}

/// Index `i` of the interval `[x[i], x[i+1]]` containing `t`, clamped to the
/// first/last interval outside the grid.
pub fn locate(x: &[f64], t: f64) -> usize {
    debug_assert!(x.len() >= 2);
    let last = x.len() - 2;
    match x.binary_search_by(|v| v.partial_cmp(&t).unwrap_or(std::cmp::Ordering::Less)) {
        Ok(i) => i.min(last),
        Err(0) => 0,
        Err(i) => (i - 1).min(last),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_endpoints_and_ratio() {
        let g = geometric(1e-3, 1e4, 40).unwrap();
        assert_eq!(g.len(), 281);
        assert_eq!(g[0], 1e-3);
        assert_eq!(*g.last().unwrap(), 1e4);
        assert!(is_strictly_increasing(&g));
        let q = g[1] / g[0];
        assert!((q - 10f64.powf(1.0 / 40.0)).abs() < 1e-12);
    }

    #[test]
    fn locate_clamps() {
        let g = uniform(0.0, 1.0, 11).unwrap();
        assert_eq!(locate(&g, -1.0), 0);
        assert_eq!(locate(&g, 0.0), 0);
        assert_eq!(locate(&g, 0.35), 3);
        assert_eq!(locate(&g, 1.0), 9);
        assert_eq!(locate(&g, 7.0), 9);
    }

    #[test]
    fn rejects_bad_bounds() {
        assert!(geometric(0.0, 1.0, 10).is_err());
        assert!(uniform(1.0, 1.0, 10).is_err());
    }
}
