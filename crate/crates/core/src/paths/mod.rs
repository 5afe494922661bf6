//! Absolutely continuous paths glued from constant, affine and sampled
//! segments; their speed profiles, zero-speed sets and interval collapse.

mod collapse;
mod path;
mod speed;

pub use collapse::{collapse, reparam_map, CollapsePlan, PiecewiseAffineMap, EPS_CONST};
pub use path::{Path, PathSpec, Segment, SegmentKind, SegmentSpec, EPS_JOIN, FD_STEP_RELATIVE};
pub use speed::{default_min_length, speed_profile, zero_speed_set, IntervalSet, SpeedSamples, DEFAULT_EPS_SPEED};
