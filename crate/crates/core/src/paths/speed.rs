use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::paths::Path;

/// Default threshold below which a sampled speed counts as zero.
pub const DEFAULT_EPS_SPEED: f64 = 1e-12;

/// Speeds `k_X(γ(tᵢ); γ'(tᵢ))` on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedSamples {
    pub grid: Vec<f64>,
    pub speeds: Vec<f64>,
    /// `false` at breakpoints (where the stored speed is one-sided).
    pub defined: Vec<bool>,
    pub segment: Vec<usize>,
}

impl SpeedSamples {
    pub fn max_step(&self) -> f64 {
        self.grid.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    /// Indices of nodes where the derivative exists.
    pub fn interior(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.grid.len()).filter(|&i| self.defined[i])
    }
}

/// Samples the speed at every breakpoint and at `n_per_segment` equispaced
/// interior nodes of each segment.
pub fn speed_profile(path: &Path, n_per_segment: usize) -> Result<SpeedSamples> {
    let n = n_per_segment.max(2);
    let segs = path.segments();
    let mut out = SpeedSamples { grid: vec![], speeds: vec![], defined: vec![], segment: vec![] };
    for (j, seg) in segs.iter().enumerate() {
        out.grid.push(seg.start);
        out.speeds.push(path.segment_speed(j, seg.start)?);
        out.defined.push(false);
        out.segment.push(j);
        for k in 1..=n {
            let t = seg.start + seg.len() * k as f64 / (n + 1) as f64;
            out.grid.push(t);
            out.speeds.push(path.segment_speed(j, t)?);
            out.defined.push(true);
            out.segment.push(j);
        }
    }
    let last = segs.len() - 1;
    out.grid.push(path.horizon());
    out.speeds.push(path.segment_speed(last, path.horizon())?);
    out.defined.push(false);
    out.segment.push(last);
    Ok(out)
}

/// `2 ×` the largest grid step, the default minimum length of a reported
/// zero interval.
pub fn default_min_length(samples: &SpeedSamples) -> f64 {
    2.0 * samples.max_step()
}

/// Closed intervals `[a_j, b_j]` of the zero-speed set together with
/// isolated zero parameters.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IntervalSet {
    pub intervals: Vec<(f64, f64)>,
    pub points: Vec<f64>,
}

impl IntervalSet {
    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// `0 ≤ a₁ < b₁ ≤ a₂ < b₂ ≤ … ≤ T`.
    pub fn is_ordered(&self, horizon: f64) -> bool {
        let mut prev = 0.0;
        for &(a, b) in &self.intervals {
            if !(a >= prev && b > a) {
                return false;
            }
            prev = b;
        }
        prev <= horizon
    }

    pub fn total_length(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }
}

#[derive(Clone, Copy, PartialEq)]
enum NodeState {
    Zero,
    Moving,
    /// Unflagged junction between non-constant segments: neither starts,
    /// ends nor breaks a run.
    Neutral,
}

/// Detects the zero-speed set from sampled speeds.
///
/// Constant segments contribute their exact interval. Otherwise a maximal run
/// of nodes with speed `<= eps_speed` becomes an interval when it spans at
/// least `min_length`; shorter runs are reported as isolated points. Touching
/// runs are merged.
pub fn zero_speed_set(samples: &SpeedSamples, path: &Path, eps_speed: f64, min_length: f64) -> IntervalSet {
    let segs = path.segments();
    let constant: Vec<bool> = segs.iter().map(|s| s.is_constant()).collect();
    let n = samples.grid.len();
    let state: Vec<NodeState> = (0..n)
        .map(|i| {
            let j = samples.segment[i];
            let t = samples.grid[i];
            let on_constant = constant[j]
                || (j > 0 && t == segs[j].start && constant[j - 1])
                || (j + 1 < segs.len() && t == segs[j].end && constant[j + 1]);
            if on_constant {
                NodeState::Zero
            } else if !samples.defined[i] {
                NodeState::Neutral
            } else if samples.speeds[i] <= eps_speed {
                NodeState::Zero
            } else {
                NodeState::Moving
            }
        })
        .collect();

    let mut out = IntervalSet::default();
    let mut i = 0;
    while i < n {
        if state[i] != NodeState::Zero {
            i += 1;
            continue;
        }
        let first = i;
        let mut last = i;
        let mut has_constant = constant[samples.segment[i]];
        let mut k = i + 1;
        while k < n && state[k] != NodeState::Moving {
            if state[k] == NodeState::Zero {
                last = k;
                has_constant |= constant[samples.segment[k]] && samples.defined[k];
            }
            k += 1;
        }
        let (a, b) = (samples.grid[first], samples.grid[last]);
        if b > a && (has_constant || b - a >= min_length) {
            out.intervals.push((a, b));
        } else {
            out.points.extend((first..=last).filter(|&m| state[m] == NodeState::Zero).map(|m| samples.grid[m]));
        }
        i = last + 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn constant_path_has_zero_speed() {
        let path = fixtures::constant_path();
        let s = speed_profile(&path, 8).unwrap();
        assert!(s.speeds.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn radial_speed_matches_closed_form() {
        let path = fixtures::radial_path();
        let s = speed_profile(&path, 9).unwrap();
        for (t, v) in s.grid.iter().zip(&s.speeds) {
            assert!((v - 1.0 / (1.0 - t * t)).abs() < 1e-14);
        }
        assert!((s.speeds.last().unwrap() - 4.0 / 3.0).abs() < 1e-14);
        assert!(!s.defined[0] && !s.defined[s.grid.len() - 1]);
    }

    #[test]
    fn affine_then_constant_speeds() {
        let path = Path::from_json(
            r#"{"domain":{"kind":"disc"},"T":2.0,"segments":[
            {"interval":[0,1],"kind":"affine","from":[[0.0,0.0]],"to":[[0.5,0.0]]},
            {"interval":[1,2],"kind":"constant","at":[[0.5,0.0]]}]}"#,
        )
        .unwrap();
        let s = speed_profile(&path, 4).unwrap();
        for i in s.interior() {
            if s.grid[i] < 1.0 {
                assert!(s.speeds[i] > 0.0);
            } else {
                assert_eq!(s.speeds[i], 0.0);
            }
        }
    }

    #[test]
    fn plateau_examples() {
        let path = fixtures::plateau_path();
        let s = speed_profile(&path, 32).unwrap();
        let z = zero_speed_set(&s, &path, DEFAULT_EPS_SPEED, default_min_length(&s));
        assert_eq!(z.intervals, vec![(1.0, 2.0)]);

        let two = fixtures::two_plateau_path();
        let s = speed_profile(&two, 32).unwrap();
        let z = zero_speed_set(&s, &two, DEFAULT_EPS_SPEED, default_min_length(&s));
        assert_eq!(z.intervals, vec![(0.5, 1.0), (2.0, 2.5)]);
        assert!(z.is_ordered(two.horizon()));

        let radial = fixtures::radial_path();
        let s = speed_profile(&radial, 32).unwrap();
        let z = zero_speed_set(&s, &radial, DEFAULT_EPS_SPEED, default_min_length(&s));
        assert!(z.intervals.is_empty() && z.points.is_empty());
    }

    #[test]
    fn adjacent_constant_segments_merge() {
        let path = Path::from_json(
            r#"{"domain":{"kind":"disc"},"T":3.0,"segments":[
            {"interval":[0,1],"kind":"affine","from":[[0.0,0.0]],"to":[[0.5,0.0]]},
            {"interval":[1,1.5],"kind":"constant","at":[[0.5,0.0]]},
            {"interval":[1.5,2],"kind":"constant","at":[[0.5,0.0]]},
            {"interval":[2,3],"kind":"affine","from":[[0.5,0.0]],"to":[[0.5,0.3]]}]}"#,
        )
        .unwrap();
        let s = speed_profile(&path, 8).unwrap();
        let z = zero_speed_set(&s, &path, DEFAULT_EPS_SPEED, default_min_length(&s));
        assert_eq!(z.intervals, vec![(1.0, 2.0)]);
    }

    #[test]
    fn sampled_plateau_is_detected_from_sampled_speeds() {
        let path = fixtures::sampled_plateau_path();
        let s = speed_profile(&path, 64).unwrap();
        let z = zero_speed_set(&s, &path, DEFAULT_EPS_SPEED, default_min_length(&s));
        assert_eq!(z.intervals.len(), 1);
        let (a, b) = z.intervals[0];
        assert!((0.95..=1.1).contains(&a) && (1.9..=2.05).contains(&b), "{a} {b}");
    }

    #[test]
    fn isolated_zero_is_reported_as_a_point() {
        let path = fixtures::isolated_zero_path();
        let s = speed_profile(&path, 19).unwrap();
        let z = zero_speed_set(&s, &path, 1e-6, default_min_length(&s));
        assert!(z.intervals.is_empty());
        assert!(z.points.iter().any(|t| (t - 0.5).abs() < 0.05), "{:?}", z.points);
    }
}
