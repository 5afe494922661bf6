//! Minimization of the `k_X`-length functional over polylines.
//!
//! A shortest path on an axis-aligned lattice provides the initial guess (and
//! picks the homotopy class around holes). Interior control points are then
//! moved by coordinate descent, one real coordinate at a time, with a
//! golden-section line search. Refinement proceeds through levels with
//! `1, 3, 7, 15, …` interior points; going up a level inserts midpoints, which
//! leaves the polyline itself unchanged.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cvec::{self, CVec};
use crate::error::{Error, Result};
use crate::metric::{Domain, DEFAULT_MARGIN};
use crate::numerics::quad::{adaptive_simpson, QuadConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptConfig {
    /// Lattice cells spanning the longest side of the bounding box.
    pub lattice_resolution: usize,
    /// Upper bound on the number of interior control points.
    pub control_points: usize,
    pub target_gap: f64,
    /// Maximum number of coordinate-descent sweeps per level.
    pub max_iters: usize,
}

impl Default for OptConfig {
    fn default() -> Self {
        Self { lattice_resolution: 32, control_points: 32, target_gap: 1e-3, max_iters: 200 }
    }
}

impl OptConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lattice_resolution == 0 || self.control_points == 0 || self.max_iters == 0 {
            return Err(Error::InvalidConfig("optimizer counts must be positive".into()));
        }
        if !(self.target_gap > 0.0) {
            return Err(Error::InvalidConfig("target_gap must be positive".into()));
        }
        Ok(())
    }
}

/// Result of [`refine_path`].
#[derive(Debug, Clone, Serialize)]
pub struct RefinedPath {
    #[serde(with = "cvec::pair_lists")]
    pub polyline: Vec<CVec>,
    /// Length of `polyline`, integrated at [`FINAL_QUAD_TOL`].
    pub length: f64,
    /// Length at the start (index 0) and after each refinement level.
    pub level_lengths: Vec<f64>,
}

/// Tolerance per polyline edge during the descent.
const DESCENT_QUAD_TOL: f64 = 1e-11;
/// Tolerance per polyline edge for the reported length.
pub const FINAL_QUAD_TOL: f64 = 1e-14;

/// `k_X`-length of the straight segment from `a` to `b`; `+∞` if the segment
/// leaves the domain at a quadrature node.
pub fn segment_length(domain: &Domain, a: &[Complex64], b: &[Complex64], tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let chord = cvec::sub(b, a);
    let mut outside = false;
    let cfg = QuadConfig { tol, max_depth: 40 };
    let integral = adaptive_simpson(
        |s| {
            let z = cvec::lerp(a, b, s);
            if outside || !domain.contains_unchecked(&z, DEFAULT_MARGIN) {
                outside = true;
                return 0.0;
            }
            domain.metric_unchecked(&z, &chord)
        },
        0.0,
        1.0,
        &cfg,
    );
    match integral {
        Ok(v) if !outside => v,
        _ => f64::INFINITY,
    }
}

/// Total `k_X`-length of a polyline.
pub fn polyline_length(domain: &Domain, polyline: &[CVec], tol: f64) -> f64 {
    polyline.windows(2).map(|w| segment_length(domain, &w[0], &w[1], tol)).sum()
}

/// Golden-section search for a minimum of `f` on `[a, b]`.
///
/// Returns `(x_min, f_min)` among the evaluated points.
pub fn golden_section_minimize<F>(mut f: F, mut a: f64, mut b: f64, x_tol: f64, max_evals: usize) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut evals = 2;
    while evals < max_evals && (b - a) > x_tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
        evals += 1;
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

struct Lattice {
    lo: Vec<f64>,
    spacing: f64,
    counts: Vec<u64>,
}

impl Lattice {
    fn new(bounds: &[(f64, f64)], resolution: usize) -> Self {
        let longest = bounds.iter().map(|(lo, hi)| hi - lo).fold(0.0, f64::max);
        let spacing = longest / resolution as f64;
        let counts = bounds
            .iter()
            .map(|(lo, hi)| ((hi - lo) / spacing).round() as u64 + 1)
            .collect();
        Lattice { lo: bounds.iter().map(|b| b.0).collect(), spacing, counts }
    }

    fn coords(&self, mut id: u64) -> Vec<i64> {
        self.counts
            .iter()
            .map(|&c| {
                let k = id % c;
                id /= c;
                k as i64
            })
            .collect()
    }

    fn id(&self, coords: &[i64]) -> Option<u64> {
        let mut id = 0u64;
        for (axis, &k) in coords.iter().enumerate().rev() {
            if k < 0 || k as u64 >= self.counts[axis] {
                return None;
            }
            id = id * self.counts[axis] + k as u64;
        }
        Some(id)
    }

    fn point(&self, coords: &[i64]) -> CVec {
        let x: Vec<f64> = coords
            .iter()
            .zip(&self.lo)
            .map(|(k, lo)| lo + *k as f64 * self.spacing)
            .collect();
        cvec::from_real(&x)
    }

    /// Nearest lattice node inside the domain, searching outward a few rings.
    fn snap(&self, domain: &Domain, z: &[Complex64]) -> Option<Vec<i64>> {
        let x = cvec::to_real(z);
        let base: Vec<i64> = x
            .iter()
            .zip(&self.lo)
            .map(|(xi, lo)| ((xi - lo) / self.spacing).round() as i64)
            .collect();
        let dims = base.len();
        for ring in 0..=3i64 {
            let mut best: Option<(f64, Vec<i64>)> = None;
            let side = (2 * ring + 1) as u64;
            for code in 0..side.pow(dims as u32) {
                let mut c = code;
                let cand: Vec<i64> = base
                    .iter()
                    .map(|b| {
                        let off = (c % side) as i64 - ring;
                        c /= side;
                        b + off
                    })
                    .collect();
                if self.id(&cand).is_none() {
                    continue;
                }
                let p = self.point(&cand);
                if !domain.contains_unchecked(&p, DEFAULT_MARGIN) {
                    continue;
                }
                let d = cvec::dist(&p, z);
                if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                    best = Some((d, cand));
                }
            }
            if let Some((_, c)) = best {
                return Some(c);
            }
        }
        None
    }
}

/// Neighbour offsets: the 8 king moves in the (Re, Im) plane of each complex
/// coordinate separately.
fn neighbour_offsets(complex_dim: usize) -> Vec<Vec<i64>> {
    let mut out = Vec::with_capacity(8 * complex_dim);
    for j in 0..complex_dim {
        for dr in -1..=1i64 {
            for di in -1..=1i64 {
                if dr == 0 && di == 0 {
                    continue;
                }
                let mut off = vec![0i64; 2 * complex_dim];
                off[2 * j] = dr;
                off[2 * j + 1] = di;
                out.push(off);
            }
        }
    }
    out
}

#[derive(PartialEq)]
struct Frontier {
    cost: f64,
    id: u64,
}

impl Eq for Frontier {}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        other.cost.total_cmp(&self.cost).then_with(|| other.id.cmp(&self.id))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shortest path between `z` and `w` on the lattice restricted to the domain.
///
/// Edge weights are `k_X(midpoint; edge vector)`. The returned polyline starts
/// at `z`, ends at `w`, and passes through the lattice nodes in between.
pub fn lattice_shortest_path(domain: &Domain, z: &[Complex64], w: &[Complex64], cfg: &OptConfig) -> Result<Vec<CVec>> {
    if !domain.contains(z, DEFAULT_MARGIN)? || !domain.contains(w, DEFAULT_MARGIN)? {
        return Err(Error::PointOutsideDomain);
    }
    if z == w {
        return Ok(vec![z.to_vec()]);
    }
    let lattice = Lattice::new(&domain.bounding_box(z, w), cfg.lattice_resolution.max(1));
    let start = lattice.snap(domain, z).ok_or(Error::NoFeasiblePath)?;
    let goal = lattice.snap(domain, w).ok_or(Error::NoFeasiblePath)?;
    if start == goal {
        return Ok(vec![z.to_vec(), w.to_vec()]);
    }
    let start_id = lattice.id(&start).expect("snapped node lies on the lattice");
    let goal_id = lattice.id(&goal).expect("snapped node lies on the lattice");
    let offsets = neighbour_offsets(domain.dim());

    let mut dist: HashMap<u64, f64> = HashMap::new();
    let mut prev: HashMap<u64, u64> = HashMap::new();
    let mut heap = BinaryHeap::new();
    dist.insert(start_id, 0.0);
    heap.push(Frontier { cost: 0.0, id: start_id });
    let mut reached = false;
    while let Some(Frontier { cost, id }) = heap.pop() {
        if id == goal_id {
            reached = true;
            break;
        }
        if cost > dist[&id] {
            continue;
        }
        let here = lattice.coords(id);
        let p = lattice.point(&here);
        for off in &offsets {
            let next: Vec<i64> = here.iter().zip(off).map(|(a, b)| a + b).collect();
            let Some(next_id) = lattice.id(&next) else { continue };
            let q = lattice.point(&next);
            if !domain.contains_unchecked(&q, DEFAULT_MARGIN) {
                continue;
            }
            let mid = cvec::lerp(&p, &q, 0.5);
            if !domain.contains_unchecked(&mid, DEFAULT_MARGIN) {
                continue;
            }
            let step = cvec::sub(&q, &p);
            let c = cost + domain.metric_unchecked(&mid, &step);
            if dist.get(&next_id).is_none_or(|d| c < *d) {
                dist.insert(next_id, c);
                prev.insert(next_id, id);
                heap.push(Frontier { cost: c, id: next_id });
            }
        }
    }
    if !reached {
        return Err(Error::NoFeasiblePath);
    }

    let mut ids = vec![goal_id];
    while let Some(&p) = prev.get(ids.last().unwrap()) {
        ids.push(p);
    }
    ids.reverse();
    let mut polyline = vec![z.to_vec()];
    polyline.extend(ids.iter().map(|id| lattice.point(&lattice.coords(*id))));
    polyline.push(w.to_vec());
    polyline.dedup();
    Ok(polyline)
}

/// Points along `polyline` at equal Euclidean arc-length spacing, `interior`
/// of them strictly between the endpoints.
fn resample_euclidean(polyline: &[CVec], interior: usize) -> Vec<CVec> {
    let cumulative: Vec<f64> = std::iter::once(0.0)
        .chain(polyline.windows(2).scan(0.0, |acc, w| {
            *acc += cvec::dist(&w[0], &w[1]);
            Some(*acc)
        }))
        .collect();
    let total = *cumulative.last().unwrap();
    let mut out = vec![polyline[0].clone()];
    for k in 1..=interior {
        let target = total * k as f64 / (interior + 1) as f64;
        let j = cumulative.partition_point(|c| *c < target).clamp(1, polyline.len() - 1);
        let span = cumulative[j] - cumulative[j - 1];
        let w = if span > 0.0 { (target - cumulative[j - 1]) / span } else { 0.0 };
        out.push(cvec::lerp(&polyline[j - 1], &polyline[j], w));
    }
    out.push(polyline[polyline.len() - 1].clone());
    out
}

fn insert_midpoints(polyline: &[CVec]) -> Vec<CVec> {
    let mut out = Vec::with_capacity(2 * polyline.len() - 1);
    for w in polyline.windows(2) {
        out.push(w[0].clone());
        out.push(cvec::lerp(&w[0], &w[1], 0.5));
    }
    out.push(polyline[polyline.len() - 1].clone());
    out
}

/// Coordinate descent on the interior points of `polyline`.
///
/// Every accepted move strictly lowers the descent-tolerance length, so the
/// length sequence is non-increasing. Stops when a sweep improves the length
/// by less than `target_gap / 10` or after `max_iters` sweeps.
fn descend(domain: &Domain, polyline: &mut [CVec], cfg: &OptConfig) -> f64 {
    let n = polyline.len();
    let real_dim = 2 * polyline[0].len();
    let mut edges: Vec<f64> = polyline
        .windows(2)
        .map(|w| segment_length(domain, &w[0], &w[1], DESCENT_QUAD_TOL))
        .collect();
    let mut steps: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let local = if i == 0 || i == n - 1 {
                0.0
            } else {
                0.5 * (cvec::dist(&polyline[i - 1], &polyline[i]) + cvec::dist(&polyline[i], &polyline[i + 1]))
            };
            vec![0.25 * local; real_dim]
        })
        .collect();

    for _ in 0..cfg.max_iters {
        let mut improvement = 0.0;
        for i in 1..n - 1 {
            for axis in 0..real_dim {
                let current = edges[i - 1] + edges[i];
                let delta = steps[i][axis];
                if !(delta > 1e-14) {
                    continue;
                }
                let mut x = cvec::to_real(&polyline[i]);
                let origin = x[axis];
                let (left, right) = (&polyline[i - 1], &polyline[i + 1]);
                let local = |shift: f64, x: &mut Vec<f64>| {
                    x[axis] = origin + shift;
                    let p = cvec::from_real(x);
                    segment_length(domain, left, &p, DESCENT_QUAD_TOL) + segment_length(domain, &p, right, DESCENT_QUAD_TOL)
                };
                let (best, value) = golden_section_minimize(|s| local(s, &mut x), -delta, delta, 1e-3 * delta, 48);
                if value < current {
                    x[axis] = origin + best;
                    let p = cvec::from_real(&x);
                    edges[i - 1] = segment_length(domain, left, &p, DESCENT_QUAD_TOL);
                    edges[i] = segment_length(domain, &p, right, DESCENT_QUAD_TOL);
                    improvement += current - (edges[i - 1] + edges[i]);
                    polyline[i] = p;
                }
                steps[i][axis] = if best.abs() > 0.8 * delta {
                    2.0 * delta
                } else {
                    (3.0 * best.abs()).max(0.5 * delta)
                };
            }
        }
        if improvement < cfg.target_gap / 10.0 {
            break;
        }
    }
    edges.iter().sum()
}

/// Refines a feasible polyline (e.g. from [`lattice_shortest_path`]) into a
/// near-minimizer of the `k_X`-length with at most `cfg.control_points`
/// interior points.
pub fn refine_path(domain: &Domain, polyline: &[CVec], cfg: &OptConfig) -> Result<RefinedPath> {
    cfg.validate()?;
    match polyline.len() {
        0 => return Err(Error::InvalidConfig("empty polyline".into())),
        1 => {
            return Ok(RefinedPath { polyline: polyline.to_vec(), length: 0.0, level_lengths: vec![0.0] });
        }
        _ => {}
    }
    for p in polyline {
        if !domain.contains(p, DEFAULT_MARGIN)? {
            return Err(Error::PointOutsideDomain);
        }
    }

    // Coarsest feasible resampling with 2^j − 1 interior points.
    let mut interior = 1usize;
    let mut current = loop {
        let candidate = resample_euclidean(polyline, interior);
        if polyline_length(domain, &candidate, DESCENT_QUAD_TOL).is_finite() {
            break candidate;
        }
        if 2 * interior + 1 > cfg.control_points.max(polyline.len()) {
            // Fall back to the lattice polyline itself.
            let whole = polyline.to_vec();
            if !polyline_length(domain, &whole, DESCENT_QUAD_TOL).is_finite() {
                return Err(Error::NoFeasiblePath);
            }
            break whole;
        }
        interior = 2 * interior + 1;
    };

    let mut level_lengths = vec![polyline_length(domain, &current, DESCENT_QUAD_TOL)];
    loop {
        let length = descend(domain, &mut current, cfg);
        level_lengths.push(length);
        let next_interior = 2 * (current.len() - 2) + 1;
        if next_interior > cfg.control_points {
            break;
        }
        current = insert_midpoints(&current);
    }
    let length = polyline_length(domain, &current, FINAL_QUAD_TOL);
    Ok(RefinedPath { polyline: current, length, level_lengths })
}
