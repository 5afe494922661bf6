//! Removal of the positive-length intervals of the zero-speed set.
//!
//! The kept pieces `[0, a₁], [b₁, a₂], …, [b_k, T]` are glued after shifting
//! the `j`-th one left by `Σ_{i<j} (b_i − a_i)`, giving a path on
//! `[0, τ]` with the same image.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::interp::interp_linear;
use crate::paths::{IntervalSet, Path, Segment, SegmentKind, EPS_JOIN};

/// Maximal Euclidean variation tolerated on an interval being collapsed.
pub const EPS_CONST: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollapsePlan {
    pub source: IntervalSet,
    /// `Σ_{k≤j} (b_k − a_k)` for each interval `j`.
    pub cumulative_offsets: Vec<f64>,
    pub tau: f64,
    /// Horizon `T` of the original path.
    pub horizon: f64,
}

impl CollapsePlan {
    pub fn identity(horizon: f64) -> Self {
        CollapsePlan { source: IntervalSet::default(), cumulative_offsets: vec![], tau: horizon, horizon }
    }

    /// Kept pieces of `[0, T]` with the shift applied to each.
    fn pieces(&self) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::with_capacity(self.source.intervals.len() + 1);
        let mut start = 0.0;
        let mut shift = 0.0;
        for (j, &(a, b)) in self.source.intervals.iter().enumerate() {
            out.push((start, a, shift));
            start = b;
            shift = self.cumulative_offsets[j];
        }
        out.push((start, self.horizon, shift));
        out
    }
}

/// Builds `γ^aux` on `[0, τ]` by deleting the closed intervals in `zeros`.
///
/// Each interval must carry a constant piece of the path (Euclidean variation
/// at most [`EPS_CONST`]).
pub fn collapse(path: &Path, zeros: &IntervalSet) -> Result<(Path, CollapsePlan)> {
    let horizon = path.horizon();
    if zeros.intervals.is_empty() {
        return Ok((path.clone(), CollapsePlan::identity(horizon)));
    }
    if !zeros.is_ordered(horizon) {
        return Err(Error::InvalidConfig("zero intervals must be ordered, disjoint and inside [0, T]".into()));
    }
    for (index, &(a, b)) in zeros.intervals.iter().enumerate() {
        let variation = path.variation_on(a, b)?;
        if variation > EPS_CONST {
            return Err(Error::NotConstantOnInterval { index, variation });
        }
    }
    let cumulative_offsets: Vec<f64> = zeros
        .intervals
        .iter()
        .scan(0.0, |acc, (a, b)| {
            *acc += b - a;
            Some(*acc)
        })
        .collect();
    let tau = horizon - cumulative_offsets.last().copied().unwrap_or(0.0);
    if !(tau > 1e-12 * horizon) {
        return Err(Error::DegenerateResult { tau });
    }
    let plan = CollapsePlan { source: zeros.clone(), cumulative_offsets, tau, horizon };

    let min_piece = 1e-13 * horizon;
    let mut segments: Vec<Segment> = Vec::new();
    let mut cursor = 0.0;
    for (lo, hi, shift) in plan.pieces() {
        for seg in path.segments() {
            let (s, e) = (seg.start.max(lo), seg.end.min(hi));
            if e - s <= min_piece {
                continue;
            }
            let kind = match &seg.kind {
                SegmentKind::Constant(p) => SegmentKind::Constant(p.clone()),
                SegmentKind::Affine { .. } => SegmentKind::Affine { from: seg.eval(s), to: seg.eval(e) },
                SegmentKind::Sampled { params, points } => SegmentKind::Sampled {
                    params: params.iter().map(|p| p - shift).collect(),
                    points: points.clone(),
                },
            };
            let end = e - shift;
            segments.push(Segment { start: cursor, end, kind });
            cursor = end;
        }
    }
    if let Some(last) = segments.last_mut() {
        last.end = tau;
    }
    let aux = Path::with_join_tolerance(path.domain().clone(), tau, segments, EPS_CONST.max(EPS_JOIN))?;
    Ok((aux, plan))
}

/// The continuous, monotone, piecewise-affine map `A: [0, T] → [0, τ]` with
/// `γ = γ^aux ∘ A`: slope 1 off the collapsed intervals and constant on each
/// of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseAffineMap {
    knots: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewiseAffineMap {
    pub fn eval(&self, t: f64) -> f64 {
        interp_linear(&self.knots, &self.values, t)
    }

    pub fn knots(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.knots.iter().copied().zip(self.values.iter().copied())
    }
}

pub fn reparam_map(plan: &CollapsePlan) -> PiecewiseAffineMap {
    let mut knots = vec![0.0];
    let mut values = vec![0.0];
    let mut push = |t: f64, v: f64| {
        if t > *knots.last().unwrap() {
            knots.push(t);
            values.push(v);
        }
    };
    let mut shift = 0.0;
    for (j, &(a, b)) in plan.source.intervals.iter().enumerate() {
        push(a, a - shift);
        push(b, a - shift);
        shift = plan.cumulative_offsets[j];
    }
    push(plan.horizon, plan.tau);
    PiecewiseAffineMap { knots, values }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cvec;
    use crate::fixtures;

    #[test]
    fn single_plateau_collapse() {
        let path = fixtures::plateau_path();
        let zeros = IntervalSet { intervals: vec![(1.0, 2.0)], points: vec![] };
        let (aux, plan) = collapse(&path, &zeros).unwrap();
        assert_eq!(plan.tau, 2.0);
        assert_eq!(aux.horizon(), 2.0);
        for k in 0..=20 {
            let t = k as f64 / 10.0;
            let expected = if t <= 1.0 { path.eval(t).unwrap() } else { path.eval(t + 1.0).unwrap() };
            assert!(cvec::dist(&aux.eval(t).unwrap(), &expected) < 1e-14);
        }
    }

    #[test]
    fn empty_zero_set_is_identity() {
        let path = fixtures::radial_path();
        let (aux, plan) = collapse(&path, &IntervalSet::default()).unwrap();
        assert_eq!(aux, path);
        assert_eq!(plan.tau, path.horizon());
        let a = reparam_map(&plan);
        assert_eq!(a.eval(0.3), 0.3);
    }

    #[test]
    fn two_plateaus_use_cumulative_offsets() {
        let path = fixtures::two_plateau_path();
        let zeros = IntervalSet { intervals: vec![(0.5, 1.0), (2.0, 2.5)], points: vec![] };
        let (aux, plan) = collapse(&path, &zeros).unwrap();
        assert_eq!(plan.tau, 2.0);
        assert_eq!(plan.cumulative_offsets, vec![0.5, 1.0]);
        // Third branch: t ∈ [a₂ − 0.5, τ] ↦ γ(t + 1).
        for t in [1.5, 1.75, 2.0] {
            assert!(cvec::dist(&aux.eval(t).unwrap(), &path.eval(t + 1.0).unwrap()) < 1e-14);
        }
    }

    #[test]
    fn rejects_non_constant_interval_and_degenerate_result() {
        let path = fixtures::plateau_path();
        let wrong = IntervalSet { intervals: vec![(0.5, 1.5)], points: vec![] };
        assert!(matches!(collapse(&path, &wrong), Err(Error::NotConstantOnInterval { index: 0, .. })));
        let constant = fixtures::constant_path();
        let all = IntervalSet { intervals: vec![(0.0, constant.horizon())], points: vec![] };
        assert!(matches!(collapse(&constant, &all), Err(Error::DegenerateResult { .. })));
    }

    #[test]
    fn reparam_map_examples() {
        let plan = CollapsePlan {
            source: IntervalSet { intervals: vec![(1.0, 2.0)], points: vec![] },
            cumulative_offsets: vec![1.0],
            tau: 2.0,
            horizon: 3.0,
        };
        let a = reparam_map(&plan);
        assert_eq!(a.eval(0.5), 0.5);
        assert_eq!(a.eval(1.5), 1.0);
        assert_eq!(a.eval(2.5), 1.5);
        assert_eq!(a.eval(0.0), 0.0);
        assert_eq!(a.eval(3.0), 2.0);
    }
}
