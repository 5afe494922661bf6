use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cvec::{self, CVec};
use crate::error::{Error, Result};
use crate::metric::{Domain, DEFAULT_MARGIN};
use crate::numerics::interp::cubic_interp;

/// Junction continuity tolerance (Euclidean).
pub const EPS_JOIN: f64 = 1e-10;
/// Finite-difference step for sampled segments, relative to the horizon.
pub const FD_STEP_RELATIVE: f64 = 1e-4;

/// How a segment maps its parameter interval into the domain.
#[derive(Debug, Clone, PartialEq)]
pub enum SegmentKind {
    Constant(CVec),
    /// Linear in the parameter from `from` (at the segment start) to `to`.
    Affine { from: CVec, to: CVec },
    /// Local cubic interpolation through `points` at `params`.
    ///
    /// `params` are absolute path parameters; the segment interval must lie
    /// inside `[params[0], params[last]]`.
    Sampled { params: Vec<f64>, points: Vec<CVec> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub kind: SegmentKind,
}

impl Segment {
    pub fn len(&self) -> f64 {
        self.end - self.start
    }

    pub fn is_constant(&self) -> bool {
        match &self.kind {
            SegmentKind::Constant(_) => true,
            SegmentKind::Affine { from, to } => from == to,
            SegmentKind::Sampled { .. } => false,
        }
    }

    /// Point at `t`, which must lie in `[start, end]`.
    pub fn eval(&self, t: f64) -> CVec {
        match &self.kind {
            SegmentKind::Constant(p) => p.clone(),
            SegmentKind::Affine { from, to } => cvec::lerp(from, to, (t - self.start) / self.len()),
            SegmentKind::Sampled { params, points } => cubic_interp(params, points, t),
        }
    }

    /// Derivative at `t ∈ [start, end]`, one-sided at the ends.
    ///
    /// Exact on constant and affine segments. On sampled segments, fourth-order
    /// finite differences with step `min(h, len/8)`: the central five-point
    /// stencil where it fits, the one-sided five-point stencil near the ends.
    pub fn derivative(&self, t: f64, h: f64) -> CVec {
        match &self.kind {
            SegmentKind::Constant(p) => vec![Complex64::new(0.0, 0.0); p.len()],
            SegmentKind::Affine { from, to } => cvec::scale(&cvec::sub(to, from), 1.0 / self.len()),
            SegmentKind::Sampled { .. } => {
                let h = self.fd_step(h);
                let t = t.clamp(self.start, self.end);
                let (weights, offsets): (&[f64], [f64; 5]) = if t - 2.0 * h >= self.start && t + 2.0 * h <= self.end {
                    (&[1.0, -8.0, 0.0, 8.0, -1.0], [-2.0, -1.0, 0.0, 1.0, 2.0])
                } else if t - 2.0 * h < self.start {
                    (&[-25.0, 48.0, -36.0, 16.0, -3.0], [0.0, 1.0, 2.0, 3.0, 4.0])
                } else {
                    (&[25.0, -48.0, 36.0, -16.0, 3.0], [0.0, -1.0, -2.0, -3.0, -4.0])
                };
                let mut out = vec![Complex64::new(0.0, 0.0); self.eval(t).len()];
                for (w, o) in weights.iter().zip(offsets) {
                    if *w == 0.0 {
                        continue;
                    }
                    let f = self.eval((t + o * h).clamp(self.start, self.end));
                    for (acc, x) in out.iter_mut().zip(&f) {
                        *acc += x * *w;
                    }
                }
                cvec::scale(&out, 1.0 / (12.0 * h))
            }
        }
    }

    fn fd_step(&self, h: f64) -> f64 {
        h.min(0.125 * self.len())
    }

    fn describe(&self) -> &'static str {
        match self.kind {
            SegmentKind::Constant(_) => "constant",
            SegmentKind::Affine { .. } => "affine",
            SegmentKind::Sampled { .. } => "sampled",
        }
    }
}

/// A path `γ: [0, T] → X` glued from segments.
///
/// Immutable once built; construction checks the partition of `[0, T]`,
/// junction continuity, dimensions and membership of the sampled image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PathSpec", into = "PathSpec")]
pub struct Path {
    domain: Domain,
    horizon: f64,
    segments: Vec<Segment>,
}

impl Path {
    pub fn new(domain: Domain, horizon: f64, segments: Vec<Segment>) -> Result<Self> {
        Self::with_join_tolerance(domain, horizon, segments, EPS_JOIN)
    }

    pub(crate) fn with_join_tolerance(domain: Domain, horizon: f64, segments: Vec<Segment>, join_tol: f64) -> Result<Self> {
        domain.validate()?;
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidPath(format!("horizon {horizon} must be positive")));
        }
        if segments.is_empty() {
            return Err(Error::InvalidPath("path needs at least one segment".into()));
        }
        let slack = 1e-12 * horizon.max(1.0);
        if segments[0].start.abs() > slack {
            return Err(Error::InvalidPath("first segment must start at 0".into()));
        }
        if (segments[segments.len() - 1].end - horizon).abs() > slack {
            return Err(Error::InvalidPath("last segment must end at the horizon".into()));
        }
        for (j, pair) in segments.windows(2).enumerate() {
            if (pair[0].end - pair[1].start).abs() > slack {
                return Err(Error::InvalidPath(format!("segments {j} and {} do not share an endpoint", j + 1)));
            }
        }
        let dim = domain.dim();
        for (j, seg) in segments.iter().enumerate() {
            if !(seg.end > seg.start) {
                return Err(Error::InvalidPath(format!("segment {j} has an empty interval")));
            }
            check_kind(seg, dim).map_err(|m| Error::InvalidPath(format!("segment {j} ({}): {m}", seg.describe())))?;
        }
        for (j, pair) in segments.windows(2).enumerate() {
            let gap = cvec::dist(&pair[0].eval(pair[0].end), &pair[1].eval(pair[1].start));
            if gap > join_tol {
                return Err(Error::InvalidPath(format!("junction {j}/{} is discontinuous (gap {gap:e})", j + 1)));
            }
        }
        for seg in &segments {
            let n = 16;
            for k in 0..=n {
                let t = seg.start + seg.len() * k as f64 / n as f64;
                if !domain.contains_unchecked(&seg.eval(t), DEFAULT_MARGIN) {
                    return Err(Error::PointOutsideDomain);
                }
            }
            if let SegmentKind::Sampled { params, points } = &seg.kind {
                for (t, p) in params.iter().zip(points) {
                    if *t >= seg.start && *t <= seg.end && !domain.contains_unchecked(p, DEFAULT_MARGIN) {
                        return Err(Error::PointOutsideDomain);
                    }
                }
            }
        }
        Ok(Path { domain, horizon, segments })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Segment boundaries `0 = t₀ < t₁ < … = T`.
    pub fn breakpoints(&self) -> Vec<f64> {
        std::iter::once(0.0).chain(self.segments.iter().map(|s| s.end)).collect()
    }

    /// Finite-difference step used for sampled segments.
    pub fn fd_step(&self) -> f64 {
        FD_STEP_RELATIVE * self.horizon
    }

    fn check_range(&self, t: f64) -> Result<()> {
        if t >= 0.0 && t <= self.horizon {
            Ok(())
        } else {
            Err(Error::OutOfRange { value: t, lo: 0.0, hi: self.horizon })
        }
    }

    /// Index of the segment containing `t` (the left one at a junction).
    pub fn segment_index(&self, t: f64) -> usize {
        self.segments.partition_point(|s| s.end < t).min(self.segments.len() - 1)
    }

    pub fn eval(&self, t: f64) -> Result<CVec> {
        self.check_range(t)?;
        let seg = &self.segments[self.segment_index(t)];
        Ok(seg.eval(t.clamp(seg.start, seg.end)))
    }

    /// `γ'(t)`, or `None` at interior junctions where it is left undefined.
    pub fn derivative(&self, t: f64) -> Result<Option<CVec>> {
        self.check_range(t)?;
        let j = self.segment_index(t);
        if j + 1 < self.segments.len() && t == self.segments[j].end {
            return Ok(None);
        }
        Ok(Some(self.segments[j].derivative(t, self.fd_step())))
    }

    /// Interior points of segment `j` where the finite-difference formula
    /// switches between one-sided and central; the speed can jump there.
    pub fn fd_switch_points(&self, j: usize) -> Vec<f64> {
        let seg = &self.segments[j];
        match seg.kind {
            SegmentKind::Sampled { .. } => {
                let h = seg.fd_step(self.fd_step());
                vec![seg.start + 2.0 * h, seg.end - 2.0 * h]
            }
            _ => vec![],
        }
    }

    /// `k_X(γ(t); γ'(t))` evaluated inside segment `j` (one-sided at its ends).
    pub fn segment_speed(&self, j: usize, t: f64) -> Result<f64> {
        let seg = &self.segments[j];
        if seg.is_constant() {
            return Ok(0.0);
        }
        let z = seg.eval(t);
        let v = seg.derivative(t, self.fd_step());
        self.domain.infinitesimal_metric(&z, &v)
    }

    /// The maximizing factor of the metric along segment `j` at `t`, see
    /// [`Domain::active_branch`].
    pub(crate) fn segment_branch(&self, j: usize, t: f64, tie_tol: f64) -> Option<Vec<usize>> {
        let seg = &self.segments[j];
        let v = seg.derivative(t, self.fd_step());
        self.domain.active_branch(&seg.eval(t), &v, tie_tol)
    }

    /// Dense parameter sampling of the image: `n` uniform parameters plus all
    /// breakpoints.
    pub fn image_samples(&self, n: usize) -> Vec<CVec> {
        let n = n.max(2);
        let mut ts: Vec<f64> = (0..n).map(|k| self.horizon * k as f64 / (n - 1) as f64).collect();
        ts.extend(self.breakpoints());
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        ts.iter()
            .map(|&t| {
                let seg = &self.segments[self.segment_index(t)];
                seg.eval(t.clamp(seg.start, seg.end))
            })
            .collect()
    }

    /// Euclidean variation `max |γ(t) − γ(a)|` over `[a, b]`, sampled.
    pub fn variation_on(&self, a: f64, b: f64) -> Result<f64> {
        let base = self.eval(a)?;
        let n = 64;
        let mut ts: Vec<f64> = (0..=n).map(|k| a + (b - a) * k as f64 / n as f64).collect();
        ts.extend(self.breakpoints().into_iter().filter(|t| *t > a && *t < b));
        let mut worst: f64 = 0.0;
        for t in ts {
            worst = worst.max(cvec::dist(&self.eval(t)?, &base));
        }
        Ok(worst)
    }
}

fn check_kind(seg: &Segment, dim: usize) -> std::result::Result<(), String> {
    let check_point = |p: &CVec| {
        if p.len() == dim {
            Ok(())
        } else {
            Err(format!("point has {} coordinates, domain has dimension {dim}", p.len()))
        }
    };
    match &seg.kind {
        SegmentKind::Constant(p) => check_point(p),
        SegmentKind::Affine { from, to } => check_point(from).and(check_point(to)),
        SegmentKind::Sampled { params, points } => {
            if params.len() < 2 || params.len() != points.len() {
                return Err("needs at least two samples with matching params and points".into());
            }
            if params.windows(2).any(|w| !(w[1] > w[0])) {
                return Err("params must be strictly increasing".into());
            }
            let slack = 1e-12 * seg.end.abs().max(1.0);
            if seg.start < params[0] - slack || seg.end > params[params.len() - 1] + slack {
                return Err("interval must lie within the sampled parameter range".into());
            }
            points.iter().try_for_each(check_point)
        }
    }
}

/// JSON shape of a path.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathSpec {
    pub domain: Domain,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub segments: Vec<SegmentSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SegmentSpec {
    Constant {
        interval: [f64; 2],
        #[serde(with = "cvec::pairs")]
        at: CVec,
    },
    Affine {
        interval: [f64; 2],
        #[serde(with = "cvec::pairs")]
        from: CVec,
        #[serde(with = "cvec::pairs")]
        to: CVec,
    },
    Sampled {
        interval: [f64; 2],
        params: Vec<f64>,
        #[serde(with = "cvec::pair_lists")]
        points: Vec<CVec>,
    },
}

impl TryFrom<PathSpec> for Path {
    type Error = Error;

    fn try_from(spec: PathSpec) -> Result<Self> {
        let segments = spec
            .segments
            .into_iter()
            .map(|s| match s {
                SegmentSpec::Constant { interval: [a, b], at } => Segment { start: a, end: b, kind: SegmentKind::Constant(at) },
                SegmentSpec::Affine { interval: [a, b], from, to } => {
                    Segment { start: a, end: b, kind: SegmentKind::Affine { from, to } }
                }
                SegmentSpec::Sampled { interval: [a, b], params, points } => {
                    Segment { start: a, end: b, kind: SegmentKind::Sampled { params, points } }
                }
            })
            .collect();
        Path::new(spec.domain, spec.horizon, segments)
    }
}

impl From<Path> for PathSpec {
    fn from(path: Path) -> Self {
        PathSpec {
            domain: path.domain,
            horizon: path.horizon,
            segments: path
                .segments
                .into_iter()
                .map(|s| {
                    let interval = [s.start, s.end];
                    match s.kind {
                        SegmentKind::Constant(at) => SegmentSpec::Constant { interval, at },
                        SegmentKind::Affine { from, to } => SegmentSpec::Affine { interval, from, to },
                        SegmentKind::Sampled { params, points } => SegmentSpec::Sampled { interval, params, points },
                    }
                })
                .collect(),
        }
    }
}

impl Path {
    pub fn from_json(json: &str) -> Result<Self> {
        Ok(serde_json::from_str(json)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("paths always serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> CVec {
        vec![Complex64::new(re, 0.0)]
    }

    #[test]
    fn affine_and_constant_derivatives() {
        let path = Path::new(
            Domain::UnitDisc,
            2.0,
            vec![
                Segment { start: 0.0, end: 1.0, kind: SegmentKind::Affine { from: c(0.0), to: c(0.5) } },
                Segment { start: 1.0, end: 2.0, kind: SegmentKind::Constant(c(0.5)) },
            ],
        )
        .unwrap();
        assert_eq!(path.derivative(0.5).unwrap().unwrap(), c(0.5));
        assert_eq!(path.derivative(1.5).unwrap().unwrap(), c(0.0));
        assert_eq!(path.derivative(1.0).unwrap(), None);
        assert!(matches!(path.derivative(2.5), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn sampled_sine_derivative() {
        let params: Vec<f64> = (0..=100).map(|k| k as f64 / 100.0).collect();
        let points: Vec<CVec> = params.iter().map(|t| c(0.5 * t.sin())).collect();
        let path = Path::new(
            Domain::UnitDisc,
            1.0,
            vec![Segment { start: 0.0, end: 1.0, kind: SegmentKind::Sampled { params, points } }],
        )
        .unwrap();
        let d = path.derivative(0.5).unwrap().unwrap();
        assert!((d[0].re - 0.5 * 0.5f64.cos()).abs() <= 1e-6);
        assert!(d[0].im.abs() <= 1e-12);
        // One-sided near the ends.
        let d0 = path.derivative(0.0).unwrap().unwrap();
        assert!((d0[0].re - 0.5).abs() <= 1e-6);
    }

    #[test]
    fn rejects_discontinuous_or_escaping_paths() {
        let gap = Path::new(
            Domain::UnitDisc,
            2.0,
            vec![
                Segment { start: 0.0, end: 1.0, kind: SegmentKind::Affine { from: c(0.0), to: c(0.5) } },
                Segment { start: 1.0, end: 2.0, kind: SegmentKind::Constant(c(0.6)) },
            ],
        );
        assert!(matches!(gap, Err(Error::InvalidPath(_))));
        let escaping = Path::new(
            Domain::UnitDisc,
            1.0,
            vec![Segment { start: 0.0, end: 1.0, kind: SegmentKind::Affine { from: c(0.0), to: c(1.5) } }],
        );
        assert_eq!(escaping, Err(Error::PointOutsideDomain));
        let hole = Path::new(
            Domain::Annulus(0.25),
            1.0,
            vec![Segment { start: 0.0, end: 1.0, kind: SegmentKind::Affine { from: c(0.5), to: c(-0.5) } }],
        );
        assert_eq!(hole, Err(Error::PointOutsideDomain));
    }

    #[test]
    fn json_spec_round_trip() {
        let json = r#"{"domain":{"kind":"disc"},"T":3.0,"segments":[
            {"interval":[0,1],"kind":"affine","from":[[0.0,0.0]],"to":[[0.5,0.0]]},
            {"interval":[1,2],"kind":"constant","at":[[0.5,0.0]]},
            {"interval":[2,3],"kind":"sampled","params":[2.0,2.5,3.0],"points":[[[0.5,0.0]],[[0.55,0.1]],[[0.6,0.0]]]}]}"#;
        let path = Path::from_json(json).unwrap();
        assert_eq!(path.segments().len(), 3);
        assert_eq!(path.breakpoints(), vec![0.0, 1.0, 2.0, 3.0]);
        let again = Path::from_json(&path.to_json()).unwrap();
        assert_eq!(again, path);
        assert!(Path::from_json(r#"{"domain":{"kind":"disc"},"T":1.0,"segments":[]}"#).is_err());
    }
}
