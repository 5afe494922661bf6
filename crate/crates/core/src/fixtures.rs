//! Constructed paths with known behavior, shared by the unit tests, the
//! acceptance suite and the command-line demo.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::cvec::{self, CVec};
use crate::metric::Domain;
use crate::paths::{Path, Segment, SegmentKind};

/// Radial disc path `0 → 0.25` on `[0,1]`, held on `[1,2]`, `0.25 → 0.5` on `[2,3]`.
pub const PLATEAU_SPEC: &str = r#"{
  "domain": {"kind": "disc"},
  "T": 3.0,
  "segments": [
    {"interval": [0, 1], "kind": "affine", "from": [[0.0, 0.0]], "to": [[0.25, 0.0]]},
    {"interval": [1, 2], "kind": "constant", "at": [[0.25, 0.0]]},
    {"interval": [2, 3], "kind": "affine", "from": [[0.25, 0.0]], "to": [[0.5, 0.0]]}
  ]
}"#;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn affine(start: f64, end: f64, from: CVec, to: CVec) -> Segment {
    Segment { start, end, kind: SegmentKind::Affine { from, to } }
}

fn constant(start: f64, end: f64, at: CVec) -> Segment {
    Segment { start, end, kind: SegmentKind::Constant(at) }
}

/// Sampled segment through `f` at `n + 1` equispaced parameters of `[start, end]`.
pub fn sampled(start: f64, end: f64, n: usize, f: impl Fn(f64) -> CVec) -> Segment {
    let params: Vec<f64> = (0..=n).map(|k| start + (end - start) * k as f64 / n as f64).collect();
    let points = params.iter().map(|t| f(*t)).collect();
    Segment { start, end, kind: SegmentKind::Sampled { params, points } }
}

fn build(domain: Domain, horizon: f64, segments: Vec<Segment>) -> Path {
    Path::new(domain, horizon, segments).expect("fixture paths are valid")
}

pub fn constant_path() -> Path {
    build(Domain::UnitDisc, 1.0, vec![constant(0.0, 1.0, vec![c(0.3, 0.0)])])
}

/// `γ(t) = t` on `[0, 0.5]` in the disc.
pub fn radial_path() -> Path {
    build(Domain::UnitDisc, 0.5, vec![affine(0.0, 0.5, vec![c(0.0, 0.0)], vec![c(0.5, 0.0)])])
}

pub fn plateau_path() -> Path {
    Path::from_json(PLATEAU_SPEC).expect("built-in plateau spec is valid")
}

/// [`plateau_path`] with the constant piece removed.
pub fn plateau_free_path() -> Path {
    build(
        Domain::UnitDisc,
        2.0,
        vec![
            affine(0.0, 1.0, vec![c(0.0, 0.0)], vec![c(0.25, 0.0)]),
            affine(1.0, 2.0, vec![c(0.25, 0.0)], vec![c(0.5, 0.0)]),
        ],
    )
}

/// Plateaus on `[0.5, 1]` and `[2, 2.5]` of a polyline in the disc.
pub fn two_plateau_path() -> Path {
    let (p0, p1, p2, p3) = (c(0.0, 0.0), c(0.2, 0.0), c(0.2, 0.3), c(-0.1, 0.4));
    build(
        Domain::UnitDisc,
        3.0,
        vec![
            affine(0.0, 0.5, vec![p0], vec![p1]),
            constant(0.5, 1.0, vec![p1]),
            affine(1.0, 2.0, vec![p1], vec![p2]),
            constant(2.0, 2.5, vec![p2]),
            affine(2.5, 3.0, vec![p2], vec![p3]),
        ],
    )
}

/// A single sampled segment on `[0, 3]` that stands still on `[1, 2]`.
pub fn sampled_plateau_path() -> Path {
    let f = |t: f64| {
        let s = t.min(1.0) + (t - 2.0).max(0.0);
        vec![Complex64::from_polar(0.25 * s, 0.3 * s)]
    };
    build(Domain::UnitDisc, 3.0, vec![sampled(0.0, 3.0, 300, f)])
}

/// Speed vanishes only at `t = 0.5`.
pub fn isolated_zero_path() -> Path {
    let f = |t: f64| vec![c(0.2, 0.0) + c(0.3, 0.15) * (t - 0.5).powi(3)];
    build(Domain::UnitDisc, 1.0, vec![sampled(0.0, 1.0, 20, f)])
}

/// The unit-speed geodesic `u ↦ tanh u` on `[0, length]`.
pub fn tanh_path(length: f64, n: usize) -> Path {
    build(Domain::UnitDisc, length, vec![sampled(0.0, length, n, |u| vec![c(u.tanh(), 0.0)])])
}

/// Two loops of a slowly widening spiral between the nearby points 0.3 and 0.32.
pub fn spiral_path() -> Path {
    let f = |t: f64| vec![Complex64::from_polar(0.3 + 0.02 * t, 2.0 * TAU * t)];
    build(Domain::UnitDisc, 1.0, vec![sampled(0.0, 1.0, 400, f)])
}

/// Geodesic `tanh` run at speed ½ on `[0, 0.6]` and at speed 1 on `[0.6, 1.1]`:
/// a `(2, 0)`-almost-geodesic.
pub fn slowed_geodesic() -> Path {
    build(
        Domain::UnitDisc,
        1.1,
        vec![
            sampled(0.0, 0.6, 240, |t| vec![c((0.5 * t).tanh(), 0.0)]),
            sampled(0.6, 1.1, 200, |t| vec![c((t - 0.3).tanh(), 0.0)]),
        ],
    )
}

/// Unit-speed geodesic with a pause of length 0.1: a `(1, 0.1)`-almost-geodesic.
pub fn paused_geodesic() -> Path {
    build(
        Domain::UnitDisc,
        0.9,
        vec![
            sampled(0.0, 0.3, 120, |t| vec![c(t.tanh(), 0.0)]),
            constant(0.3, 0.4, vec![c(0.3f64.tanh(), 0.0)]),
            sampled(0.4, 0.9, 200, |t| vec![c((t - 0.1).tanh(), 0.0)]),
        ],
    )
}

/// Disc polyline `0 → 0.4 → 0.4 + 0.4i` with a right-angle corner.
pub fn disc_corner_path() -> Path {
    build(
        Domain::UnitDisc,
        2.0,
        vec![
            affine(0.0, 1.0, vec![c(0.0, 0.0)], vec![c(0.4, 0.0)]),
            affine(1.0, 2.0, vec![c(0.4, 0.0)], vec![c(0.4, 0.4)]),
        ],
    )
}

/// Segment of a complex line through the origin of the ball in ℂ².
pub fn ball_radial_path() -> Path {
    build(Domain::UnitBall(2), 1.0, vec![affine(0.0, 1.0, vec![c(0.0, 0.0); 2], vec![c(0.4, 0.1), c(0.0, 0.3)])])
}

/// Ball polyline through the origin with a smooth sampled second leg.
pub fn ball_bend_path() -> Path {
    let (p, q) = (vec![c(-0.3, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(0.0, 0.0)]);
    build(
        Domain::UnitBall(2),
        2.0,
        vec![
            affine(0.0, 1.0, p, q.clone()),
            sampled(1.0, 2.0, 200, |t| {
                let s = t - 1.0;
                vec![c(0.1 * s * s, 0.0), c(0.0, 0.4 * s)]
            }),
        ],
    )
}

/// Domains exercised by the fixture suites.
pub fn fixture_domains() -> Vec<Domain> {
    vec![
        Domain::UnitDisc,
        Domain::UnitBall(2),
        Domain::UnitBall(3),
        Domain::Polydisc(vec![1.0, 1.0]),
        Domain::Polydisc(vec![1.0, 2.0]),
        Domain::UpperHalfPlane,
        Domain::PuncturedDisc,
        Domain::Annulus(0.25),
        Domain::Product(vec![Domain::UnitDisc, Domain::UpperHalfPlane]),
    ]
}

/// A point well inside `domain`.
pub fn interior_point(domain: &Domain) -> CVec {
    match domain {
        Domain::UpperHalfPlane => vec![c(0.2, 1.0)],
        Domain::PuncturedDisc | Domain::Annulus(_) => vec![c(0.5, 0.1)],
        Domain::Product(fs) => fs.iter().flat_map(interior_point).collect(),
        _ => vec![c(0.1, -0.2); domain.dim()],
    }
}

/// Uniform point of the polydisc of radius `rho` (per coordinate).
pub fn random_polydisc_point(rng: &mut ChaCha8Rng, dim: usize, rho: f64) -> CVec {
    (0..dim).map(|_| Complex64::from_polar(rho * rng.gen::<f64>().sqrt(), TAU * rng.gen::<f64>())).collect()
}

/// Random path with 2 to 4 segments in `domain` (disc, polydisc or ball).
///
/// Vertices are drawn from a region compactly inside the domain. Each
/// segment is affine or sampled along `p + (q − p)s + b·sin(πs)` so that
/// sampled segments end exactly at their vertices; the bump `b` is small
/// enough for the segment to be regular.
pub fn random_path(rng: &mut ChaCha8Rng, domain: &Domain) -> Path {
    let dim = domain.dim();
    let rho = match domain {
        Domain::UnitBall(n) => 0.6 / (*n as f64).sqrt(),
        _ => 0.6,
    };
    let n_seg = rng.gen_range(2..=4);
    let vertices: Vec<CVec> = (0..=n_seg).map(|_| random_polydisc_point(rng, dim, rho)).collect();
    let mut segments = Vec::with_capacity(n_seg);
    let mut start = 0.0;
    for j in 0..n_seg {
        let end = start + rng.gen_range(0.5..1.5);
        let (p, q) = (vertices[j].clone(), vertices[j + 1].clone());
        if rng.gen_bool(0.5) {
            segments.push(affine(start, end, p, q));
        } else {
            // π|b| ≤ |q − p|/2 keeps the derivative away from zero.
            let raw = random_polydisc_point(rng, dim, 0.1);
            let cap = 0.5 * cvec::dist(&p, &q) / (std::f64::consts::PI * cvec::norm(&raw).max(1e-300));
            let bump = cvec::scale(&raw, cap.min(1.0));
            let len = end - start;
            segments.push(sampled(start, end, 160, move |t| {
                let s = (t - start) / len;
                let base = cvec::lerp(&p, &q, s);
                cvec::add(&base, &cvec::scale(&bump, (std::f64::consts::PI * s).sin()))
            }));
        }
        start = end;
    }
    build(domain.clone(), start, segments)
}
