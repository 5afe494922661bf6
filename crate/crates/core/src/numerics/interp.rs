//! Interpolation kernels: monotone inversion of tabulated functions, limited
//! cubic Hermite cells, and local cubic Lagrange interpolation of sampled
//! curves.

use num_complex::Complex64;

use crate::cvec::CVec;
use crate::error::{Error, Result};

/// Index of the first node whose value is `>= s` (leftmost on ties).
pub(crate) fn leftmost_at_least(values: &[f64], s: f64) -> usize {
    values.partition_point(|v| *v < s)
}

/// Inverse of a non-decreasing tabulated function by binary search for the
/// bracketing node pair followed by linear interpolation.
///
/// On a run of equal values the parameter of the first node of the run is
/// returned.
pub fn monotone_interp_invert(grid: &[f64], values: &[f64], s: f64) -> Result<f64> {
    if grid.len() != values.len() || grid.is_empty() {
        return Err(Error::InvalidConfig("grid and values must be non-empty and of equal length".into()));
    }
    let (lo, hi) = (values[0], values[values.len() - 1]);
    if !(s >= lo && s <= hi) {
        return Err(Error::OutOfRange { value: s, lo, hi });
    }
    let j = leftmost_at_least(values, s);
    if j == 0 || values[j] == s {
        return Ok(grid[j]);
    }
    let (v0, v1) = (values[j - 1], values[j]);
    let w = (s - v0) / (v1 - v0);
    Ok(grid[j - 1] + w * (grid[j] - grid[j - 1]))
}

/// Linear interpolation of a tabulated function at `t` (clamped to the grid).
pub fn interp_linear(grid: &[f64], values: &[f64], t: f64) -> f64 {
    let n = grid.len();
    if t <= grid[0] {
        return values[0];
    }
    if t >= grid[n - 1] {
        return values[n - 1];
    }
    let j = grid.partition_point(|g| *g <= t).min(n - 1);
    let w = (t - grid[j - 1]) / (grid[j] - grid[j - 1]);
    values[j - 1] + w * (values[j] - values[j - 1])
}

/// One cell of a monotone piecewise cubic Hermite interpolant.
///
/// End slopes are limited with the Fritsch–Carlson condition so the cell is
/// monotone whenever `v1 >= v0`; a flat cell is exactly constant.
#[derive(Debug, Clone, Copy)]
pub(crate) struct HermiteCell {
    t0: f64,
    t1: f64,
    v0: f64,
    v1: f64,
    d0: f64,
    d1: f64,
}

impl HermiteCell {
    pub(crate) fn new(t0: f64, t1: f64, v0: f64, v1: f64, d0: f64, d1: f64) -> Self {
        let h = t1 - t0;
        let secant = (v1 - v0) / h;
        let (mut d0, mut d1) = (d0.max(0.0), d1.max(0.0));
        if !(secant > 0.0) {
            d0 = 0.0;
            d1 = 0.0;
        } else {
            let (a, b) = (d0 / secant, d1 / secant);
            let r = a * a + b * b;
            if r > 9.0 {
                let tau = 3.0 / r.sqrt();
                d0 = tau * a * secant;
                d1 = tau * b * secant;
            }
        }
        Self { t0, t1, v0, v1, d0, d1 }
    }

    pub(crate) fn eval(&self, t: f64) -> f64 {
        let h = self.t1 - self.t0;
        let x = ((t - self.t0) / h).clamp(0.0, 1.0);
        let x2 = x * x;
        let x3 = x2 * x;
        let h00 = 2.0 * x3 - 3.0 * x2 + 1.0;
        let h10 = x3 - 2.0 * x2 + x;
        let h01 = -2.0 * x3 + 3.0 * x2;
        let h11 = x3 - x2;
        h00 * self.v0 + h10 * h * self.d0 + h01 * self.v1 + h11 * h * self.d1
    }

    /// Solves `eval(t) = s` for `s` in `[v0, v1]` by safeguarded regula
    /// falsi (Illinois variant) on the bracket `[t0, t1]`.
    ///
    /// Iterates until the residual vanishes or the bracket stops shrinking;
    /// returns the root and its residual.
    pub(crate) fn solve(&self, s: f64) -> (f64, f64) {
        let (mut a, mut b) = (self.t0, self.t1);
        let (mut fa, mut fb) = (self.v0 - s, self.v1 - s);
        if fa >= 0.0 {
            return (a, fa);
        }
        if fb <= 0.0 {
            return (b, fb);
        }
        let mut side = 0i8;
        let mut best = (a, fa);
        for _ in 0..200 {
            let mut t = (a * fb - b * fa) / (fb - fa);
            if !(t > a && t < b) {
                t = 0.5 * (a + b);
            }
            let ft = self.eval(t) - s;
            if ft.abs() < best.1.abs() {
                best = (t, ft);
            }
            if ft == 0.0 {
                return (t, 0.0);
            }
            if ft < 0.0 {
                a = t;
                fa = ft;
                if side == -1 {
                    fb *= 0.5;
                }
                side = -1;
            } else {
                b = t;
                fb = ft;
                if side == 1 {
                    fa *= 0.5;
                }
                side = 1;
            }
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
        }
        best
    }
}

/// Local cubic Lagrange interpolation of sampled points at `t`.
///
/// Uses the four nodes around the containing interval (shifted inward at the
/// ends); falls back to quadratic or linear interpolation for 3 or 2 nodes.
pub(crate) fn cubic_interp(params: &[f64], points: &[CVec], t: f64) -> CVec {
    let n = params.len();
    debug_assert!(n >= 2);
    let i = params.partition_point(|p| *p <= t).clamp(1, n - 1) - 1;
    let width = n.min(4);
    let start = (i as isize - 1).clamp(0, (n - width) as isize) as usize;
    let nodes = start..start + width;
    let dim = points[0].len();
    let mut out = vec![Complex64::new(0.0, 0.0); dim];
    for j in nodes.clone() {
        let mut w = 1.0;
        for k in nodes.clone() {
            if k != j {
                w *= (t - params[k]) / (params[j] - params[k]);
            }
        }
        for (o, p) in out.iter_mut().zip(&points[j]) {
            *o += p * w;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invert_examples() {
        let grid = [0.0, 1.0, 2.0];
        let values = [0.0, 0.5, 1.0];
        assert_eq!(monotone_interp_invert(&grid, &values, 0.25).unwrap(), 0.5);
        assert_eq!(monotone_interp_invert(&grid, &values, 0.5).unwrap(), 1.0);
        let tied = [0.0, 0.5, 0.5, 1.0];
        let g4 = [0.0, 1.0, 2.0, 3.0];
        assert_eq!(monotone_interp_invert(&g4, &tied, 0.5).unwrap(), 1.0);
        assert!(matches!(
            monotone_interp_invert(&grid, &values, 1.5),
            Err(Error::OutOfRange { .. })
        ));
    }

    #[test]
    fn hermite_cell_reproduces_cubics_and_solves() {
        // G(t) = t³ + t on [0, 1]: G' = 3t² + 1.
        let g = |t: f64| t * t * t + t;
        let cell = HermiteCell::new(0.0, 1.0, 0.0, 2.0, 1.0, 4.0);
        for k in 0..=10 {
            let t = k as f64 / 10.0;
            assert!((cell.eval(t) - g(t)).abs() < 1e-15);
        }
        let (t, res) = cell.solve(1.0);
        assert!(res.abs() <= 1e-15);
        assert!((g(t) - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn hermite_cell_is_monotone_after_limiting() {
        let cell = HermiteCell::new(0.0, 1.0, 0.0, 1.0, 10.0, 0.0);
        let mut prev = cell.eval(0.0);
        for k in 1..=1000 {
            let v = cell.eval(k as f64 / 1000.0);
            assert!(v >= prev);
            prev = v;
        }
        let flat = HermiteCell::new(0.0, 1.0, 0.3, 0.3, 1.0, 1.0);
        assert_eq!(flat.eval(0.4), 0.3);
    }

    #[test]
    fn cubic_interp_is_exact_on_cubics() {
        let params: Vec<f64> = (0..7).map(|i| i as f64 * 0.5).collect();
        let f = |t: f64| Complex64::new(t * t * t - t, 2.0 * t * t);
        let points: Vec<CVec> = params.iter().map(|t| vec![f(*t)]).collect();
        for t in [0.0, 0.1, 1.37, 2.9, 3.0] {
            assert!((cubic_interp(&params, &points, t)[0] - f(t)).norm() < 1e-12);
        }
    }
}
