//! Shared numerical kernels.

pub mod interp;
pub mod optimize;
pub mod quad;

pub use interp::{interp_linear, monotone_interp_invert};
pub use optimize::{golden_section_minimize, lattice_shortest_path, refine_path, OptConfig, RefinedPath};
pub use quad::{adaptive_simpson, QuadConfig};

use crate::cvec::{self, CVec};

/// `n >= 2` equispaced points of `[0, horizon]` whose last point is exactly `horizon`.
pub fn uniform_grid(horizon: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| if i + 1 == n { horizon } else { horizon * i as f64 / (n - 1) as f64 }).collect()
}

/// Symmetric Hausdorff distance between two finite point sets (Euclidean).
///
/// Returns `0` if both are empty and `+∞` if exactly one is.
pub fn hausdorff(a: &[CVec], b: &[CVec]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    if a.is_empty() || b.is_empty() {
        return f64::INFINITY;
    }
    directed_hausdorff(a, b).max(directed_hausdorff(b, a))
}

fn directed_hausdorff(a: &[CVec], b: &[CVec]) -> f64 {
    a.iter()
        .map(|p| b.iter().map(|q| cvec::dist(p, q)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

/// Largest distance between consecutive points of a sampled polyline.
pub fn max_spacing(points: &[CVec]) -> f64 {
    points.windows(2).map(|w| cvec::dist(&w[0], &w[1])).fold(0.0, f64::max)
}
