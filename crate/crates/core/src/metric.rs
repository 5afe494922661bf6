//! Kobayashi metric and distance on a fixed family of model domains.
//!
//! Every supported domain has either an explicit automorphism-invariant
//! formula (disc, ball, polydisc, upper half-plane, products) or is covered
//! holomorphically by the upper half-plane with an explicit covering map
//! (punctured disc: `ζ ↦ e^{iζ}`; annulus `{r < |z| < 1}`:
//! `ζ ↦ exp(i·b·log ζ)` with `b = ln(1/r)/π`). For the covered domains the
//! infinitesimal metric is the push-forward of the half-plane density and the
//! distance is the minimum of the half-plane distance over deck translates,
//! which reduces to wrapping the angular difference into `[-π, π]`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cvec::{self, CVec};
use crate::error::{Error, Result};
use crate::numerics::optimize::{self, OptConfig, RefinedPath};

/// Interior margin used when a point must lie strictly inside a domain.
pub const DEFAULT_MARGIN: f64 = 1e-9;

/// Seed used by [`royden_lower_bound`].
pub const DEFAULT_ROYDEN_SEED: u64 = 0x6b6f_6270;

/// A model domain in ℂⁿ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DomainSpec", into = "DomainSpec")]
pub enum Domain {
    UnitDisc,
    /// Unit ball in ℂⁿ.
    UnitBall(usize),
    /// Product of discs with the given radii.
    Polydisc(Vec<f64>),
    UpperHalfPlane,
    PuncturedDisc,
    /// `{r < |z| < 1}`.
    Annulus(f64),
    Product(Vec<Domain>),
}

/// JSON shape of a domain.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum DomainSpec {
    Disc,
    Ball { n: usize },
    Polydisc { radii: Vec<f64> },
    Halfplane,
    PuncturedDisc,
    Annulus { r: f64 },
    Product { factors: Vec<Domain> },
}

impl TryFrom<DomainSpec> for Domain {
    type Error = Error;

    fn try_from(spec: DomainSpec) -> Result<Self> {
        let domain = match spec {
            DomainSpec::Disc => Domain::UnitDisc,
            DomainSpec::Ball { n } => Domain::UnitBall(n),
            DomainSpec::Polydisc { radii } => Domain::Polydisc(radii),
            DomainSpec::Halfplane => Domain::UpperHalfPlane,
            DomainSpec::PuncturedDisc => Domain::PuncturedDisc,
            DomainSpec::Annulus { r } => Domain::Annulus(r),
            DomainSpec::Product { factors } => Domain::Product(factors),
        };
        domain.validate()?;
        Ok(domain)
    }
}

impl From<Domain> for DomainSpec {
    fn from(domain: Domain) -> Self {
        match domain {
            Domain::UnitDisc => DomainSpec::Disc,
            Domain::UnitBall(n) => DomainSpec::Ball { n },
            Domain::Polydisc(radii) => DomainSpec::Polydisc { radii },
            Domain::UpperHalfPlane => DomainSpec::Halfplane,
            Domain::PuncturedDisc => DomainSpec::PuncturedDisc,
            Domain::Annulus(r) => DomainSpec::Annulus { r },
            Domain::Product(factors) => DomainSpec::Product { factors },
        }
    }
}

impl Domain {
    /// Checks the structural invariants of the domain description.
    pub fn validate(&self) -> Result<()> {
        match self {
            Domain::UnitBall(0) => Err(Error::InvalidDomain("ball dimension must be positive".into())),
            Domain::Polydisc(radii) if radii.is_empty() => {
                Err(Error::InvalidDomain("polydisc needs at least one radius".into()))
            }
            Domain::Polydisc(radii) if radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) => {
                Err(Error::InvalidDomain("polydisc radii must be positive".into()))
            }
            Domain::Annulus(r) if !(*r > 0.0 && *r < 1.0) => {
                Err(Error::InvalidDomain(format!("annulus inner radius {r} not in (0, 1)")))
            }
            Domain::Product(factors) if factors.is_empty() => {
                Err(Error::InvalidDomain("product needs at least one factor".into()))
            }
            Domain::Product(factors) => factors.iter().try_for_each(Domain::validate),
            _ => Ok(()),
        }
    }

    /// Complex dimension.
    pub fn dim(&self) -> usize {
        match self {
            Domain::UnitBall(n) => *n,
            Domain::Polydisc(radii) => radii.len(),
            Domain::Product(factors) => factors.iter().map(Domain::dim).sum(),
            _ => 1,
        }
    }

    fn check_dim(&self, z: &[Complex64]) -> Result<()> {
        if z.len() == self.dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: self.dim(), found: z.len() })
        }
    }

    /// Euclidean distance from `z` to the boundary; non-positive outside.
    ///
    /// For every supported kind this is also the slack of the defining
    /// inequalities.
    pub fn boundary_distance(&self, z: &[Complex64]) -> f64 {
        match self {
            Domain::UnitDisc | Domain::UnitBall(_) => 1.0 - cvec::norm(z),
            Domain::Polydisc(radii) => radii
                .iter()
                .zip(z)
                .map(|(r, c)| r - c.norm())
                .fold(f64::INFINITY, f64::min),
            Domain::UpperHalfPlane => z[0].im,
            Domain::PuncturedDisc => {
                let r = z[0].norm();
                r.min(1.0 - r)
            }
            Domain::Annulus(inner) => {
                let r = z[0].norm();
                (r - inner).min(1.0 - r)
            }
            Domain::Product(factors) => split(factors, z)
                .map(|(f, zf)| f.boundary_distance(zf))
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Whether `z` satisfies the defining inequalities with slack at least
    /// `margin` (and strictly positive slack, so boundary points never count).
    pub fn contains(&self, z: &[Complex64], margin: f64) -> Result<bool> {
        self.check_dim(z)?;
        Ok(self.contains_unchecked(z, margin))
    }

    pub(crate) fn contains_unchecked(&self, z: &[Complex64], margin: f64) -> bool {
        let slack = self.boundary_distance(z);
        slack > 0.0 && slack >= margin
    }

    /// The infinitesimal Kobayashi metric `k_X(z; v)`.
    pub fn infinitesimal_metric(&self, z: &[Complex64], v: &[Complex64]) -> Result<f64> {
        self.check_dim(z)?;
        self.check_dim(v)?;
        if !self.contains_unchecked(z, DEFAULT_MARGIN) {
            return Err(Error::PointOutsideDomain);
        }
        Ok(self.metric_unchecked(z, v))
    }

    /// Metric evaluation without dimension or membership checks.
    pub(crate) fn metric_unchecked(&self, z: &[Complex64], v: &[Complex64]) -> f64 {
        match self {
            Domain::UnitDisc => v[0].norm() / (1.0 - z[0].norm_sqr()),
            Domain::UnitBall(_) => {
                let a = 1.0 - cvec::norm_sqr(z);
                let zv = cvec::inner(v, z).norm_sqr();
                (cvec::norm_sqr(v) / a + zv / (a * a)).sqrt()
            }
            Domain::Polydisc(radii) => radii
                .iter()
                .zip(z.iter().zip(v))
                .map(|(r, (zj, vj))| r * vj.norm() / (r * r - zj.norm_sqr()))
                .fold(0.0, f64::max),
            Domain::UpperHalfPlane => v[0].norm() / (2.0 * z[0].im),
            Domain::PuncturedDisc => {
                let r = z[0].norm();
                v[0].norm() / (2.0 * r * (-r.ln()))
            }
            Domain::Annulus(inner) => {
                let r = z[0].norm();
                let log_ratio = -inner.ln();
                let theta = PI * r.ln() / inner.ln();
                PI * v[0].norm() / (2.0 * log_ratio * r * theta.sin())
            }
            Domain::Product(factors) => {
                let mut offset = 0;
                let mut best: f64 = 0.0;
                for f in factors {
                    let d = f.dim();
                    let k = f.metric_unchecked(&z[offset..offset + d], &v[offset..offset + d]);
                    best = best.max(k);
                    offset += d;
                }
                best
            }
        }
    }

    /// Which factor attains the max in a polydisc or product metric, nested
    /// through products. Empty for smooth metrics, `None` when the two largest
    /// factors agree within relative `tie_tol`.
    pub(crate) fn active_branch(&self, z: &[Complex64], v: &[Complex64], tie_tol: f64) -> Option<Vec<usize>> {
        let pick = |values: &[f64]| -> Option<usize> {
            let mut order: Vec<usize> = (0..values.len()).collect();
            order.sort_by(|a, b| values[*b].total_cmp(&values[*a]));
            match order.as_slice() {
                [best, next, ..] if tie_tol > 0.0 && values[*best] - values[*next] <= tie_tol * values[*best] => None,
                [best, ..] => Some(*best),
                [] => None,
            }
        };
        match self {
            Domain::Polydisc(radii) => {
                let values: Vec<f64> = radii
                    .iter()
                    .zip(z.iter().zip(v))
                    .map(|(r, (zj, vj))| r * vj.norm() / (r * r - zj.norm_sqr()))
                    .collect();
                pick(&values).map(|j| vec![j])
            }
            Domain::Product(factors) => {
                let mut offset = 0;
                let mut values = Vec::with_capacity(factors.len());
                let mut ranges = Vec::with_capacity(factors.len());
                for f in factors {
                    let d = f.dim();
                    values.push(f.metric_unchecked(&z[offset..offset + d], &v[offset..offset + d]));
                    ranges.push(offset..offset + d);
                    offset += d;
                }
                let i = pick(&values)?;
                let r = ranges[i].clone();
                let mut branch = vec![i];
                branch.extend(factors[i].active_branch(&z[r.clone()], &v[r], tie_tol)?);
                Some(branch)
            }
            _ => Some(Vec::new()),
        }
    }

    /// The Kobayashi distance `K_X(z, w)` in closed form.
    pub fn distance(&self, z: &[Complex64], w: &[Complex64]) -> Result<f64> {
        self.check_dim(z)?;
        self.check_dim(w)?;
        if !self.contains_unchecked(z, DEFAULT_MARGIN) || !self.contains_unchecked(w, DEFAULT_MARGIN) {
            return Err(Error::PointOutsideDomain);
        }
        Ok(self.distance_unchecked(z, w))
    }

    pub(crate) fn distance_unchecked(&self, z: &[Complex64], w: &[Complex64]) -> f64 {
        match self {
            Domain::UnitDisc => {
                let (z, w) = (z[0], w[0]);
                tanh_ratio_to_distance((z - w).norm() / (1.0 - w.conj() * z).norm())
            }
            Domain::UnitBall(_) => {
                // |1 − ⟨z,w⟩|² − (1 − |z|²)(1 − |w|²) = |z − w|² − (|z|²|w|² − |⟨z,w⟩|²),
                // the bracket expanded by Lagrange's identity to avoid cancellation.
                let mut lagrange = 0.0;
                for j in 0..z.len() {
                    for k in (j + 1)..z.len() {
                        lagrange += (z[j] * w[k] - z[k] * w[j]).norm_sqr();
                    }
                }
                let num = (cvec::dist(z, w).powi(2) - lagrange).max(0.0);
                let den = (Complex64::new(1.0, 0.0) - cvec::inner(z, w)).norm();
                tanh_ratio_to_distance(num.sqrt() / den)
            }
            Domain::Polydisc(radii) => radii
                .iter()
                .zip(z.iter().zip(w))
                .map(|(r, (a, b))| {
                    tanh_ratio_to_distance(r * (a - b).norm() / (r * r - b.conj() * a).norm())
                })
                .fold(0.0, f64::max),
            Domain::UpperHalfPlane => {
                let (z, w) = (z[0], w[0]);
                tanh_ratio_to_distance((z - w).norm() / (z - w.conj()).norm())
            }
            Domain::PuncturedDisc => {
                // Lifts ζ = arg z − i·ln|z| in the half-plane.
                let dx = wrapped_angle(z[0].arg() - w[0].arg());
                let (y1, y2) = (-z[0].norm().ln(), -w[0].norm().ln());
                let num = dx * dx + (y1 - y2).powi(2);
                let den = dx * dx + (y1 + y2).powi(2);
                tanh_ratio_to_distance((num / den).sqrt())
            }
            Domain::Annulus(inner) => {
                let b = -inner.ln() / PI;
                let du = wrapped_angle(z[0].arg() - w[0].arg()) / b;
                let t1 = PI * z[0].norm().ln() / inner.ln();
                let t2 = PI * w[0].norm().ln() / inner.ln();
                let sh = (0.5 * du).sinh().powi(2);
                let num = sh + (0.5 * (t1 - t2)).sin().powi(2);
                let den = sh + (0.5 * (t1 + t2)).sin().powi(2);
                tanh_ratio_to_distance((num / den).sqrt())
            }
            Domain::Product(factors) => {
                let mut offset = 0;
                let mut best: f64 = 0.0;
                for f in factors {
                    let d = f.dim();
                    best = best.max(f.distance_unchecked(&z[offset..offset + d], &w[offset..offset + d]));
                    offset += d;
                }
                best
            }
        }
    }

    /// Axis-aligned box in real coordinates that the lattice initializer
    /// covers when joining `z` and `w`.
    pub(crate) fn bounding_box(&self, z: &[Complex64], w: &[Complex64]) -> Vec<(f64, f64)> {
        match self {
            Domain::UnitDisc | Domain::UnitBall(_) | Domain::PuncturedDisc | Domain::Annulus(_) => {
                vec![(-1.0, 1.0); 2 * self.dim()]
            }
            Domain::Polydisc(radii) => radii.iter().flat_map(|r| [(-r, *r), (-r, *r)]).collect(),
            Domain::UpperHalfPlane => {
                let (z, w) = (z[0], w[0]);
                let reach = 2.0 * (z - w).norm().max(z.im).max(w.im);
                vec![
                    (z.re.min(w.re) - reach, z.re.max(w.re) + reach),
                    (0.0, z.im.max(w.im) + reach),
                ]
            }
            Domain::Product(factors) => {
                let mut offset = 0;
                let mut out = Vec::new();
                for f in factors {
                    let d = f.dim();
                    out.extend(f.bounding_box(&z[offset..offset + d], &w[offset..offset + d]));
                    offset += d;
                }
                out
            }
        }
    }
}

fn split<'a>(
    factors: &'a [Domain],
    z: &'a [Complex64],
) -> impl Iterator<Item = (&'a Domain, &'a [Complex64])> + 'a {
    factors.iter().scan(0usize, move |offset, f| {
        let d = f.dim();
        let part = &z[*offset..*offset + d];
        *offset += d;
        Some((f, part))
    })
}

fn tanh_ratio_to_distance(ratio: f64) -> f64 {
    ratio.clamp(0.0, 1.0 - f64::EPSILON).atanh()
}

/// `|θ|` after wrapping into `[-π, π]`.
fn wrapped_angle(theta: f64) -> f64 {
    ((theta + PI).rem_euclid(TAU) - PI).abs()
}

/// Upper bound on `K_X(z, w)` by minimizing the `k_X`-length over polylines.
///
/// Lattice shortest path initialization followed by coordinate descent with
/// golden-section line searches; see [`optimize`].
pub fn distance_via_path_optimization(
    domain: &Domain,
    z: &[Complex64],
    w: &[Complex64],
    cfg: &OptConfig,
) -> Result<f64> {
    Ok(optimize_joining_path(domain, z, w, cfg)?.length)
}

/// Same as [`distance_via_path_optimization`] but returns the optimized
/// polyline together with the length after each refinement level.
pub fn optimize_joining_path(
    domain: &Domain,
    z: &[Complex64],
    w: &[Complex64],
    cfg: &OptConfig,
) -> Result<RefinedPath> {
    cfg.validate()?;
    if !domain.contains(z, DEFAULT_MARGIN)? || !domain.contains(w, DEFAULT_MARGIN)? {
        return Err(Error::PointOutsideDomain);
    }
    let lattice = optimize::lattice_shortest_path(domain, z, w, cfg)?;
    optimize::refine_path(domain, &lattice, cfg)
}

/// Sampled estimate of the Royden constant `c_x`: the minimum of `k_X(y; v)`
/// over points `y` of the closed Euclidean ball `B(x, radius)` and Euclidean
/// unit vectors `v`.
///
/// The centre is always the first sampled point; the remaining points and all
/// directions come from a ChaCha generator seeded with
/// [`DEFAULT_ROYDEN_SEED`].
pub fn royden_lower_bound(
    domain: &Domain,
    x: &[Complex64],
    radius: f64,
    n_points: usize,
    n_dirs: usize,
) -> Result<f64> {
    royden_lower_bound_seeded(domain, x, radius, n_points, n_dirs, DEFAULT_ROYDEN_SEED)
}

pub fn royden_lower_bound_seeded(
    domain: &Domain,
    x: &[Complex64],
    radius: f64,
    n_points: usize,
    n_dirs: usize,
    seed: u64,
) -> Result<f64> {
    domain.check_dim(x)?;
    if n_points == 0 || n_dirs == 0 {
        return Err(Error::InvalidSampleCounts { points: n_points, dirs: n_dirs });
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidConfig(format!("royden radius {radius} must be positive")));
    }
    if !(domain.boundary_distance(x) > radius) {
        return Err(Error::BallNotContained { radius });
    }

    let real_dim = 2 * x.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dirs: Vec<CVec> = (0..n_dirs).map(|_| unit_vector(&mut rng, real_dim)).collect();

    let mut best = f64::INFINITY;
    for i in 0..n_points {
        let y = if i == 0 {
            x.to_vec()
        } else {
            let u = unit_vector(&mut rng, real_dim);
            let rho = radius * rng.gen::<f64>().powf(1.0 / real_dim as f64);
            cvec::add(x, &cvec::scale(&u, rho))
        };
        for v in &dirs {
            best = best.min(domain.infinitesimal_metric(&y, v)?);
        }
    }
    Ok(best)
}

fn unit_vector(rng: &mut ChaCha8Rng, real_dim: usize) -> CVec {
    loop {
        let x: Vec<f64> = (0..real_dim).map(|_| standard_normal(rng)).collect();
        let n = x.iter().map(|a| a * a).sum::<f64>().sqrt();
        if n > 1e-12 {
            return cvec::from_real(&x.iter().map(|a| a / n).collect::<Vec<_>>());
        }
    }
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box–Muller; u1 in (0, 1].
    let u1 = 1.0 - rng.gen::<f64>();
    let u2 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
}

/// Disc automorphism `φ(z) = e^{iθ} (z − a) / (1 − ā z)` with `|a| < 1`.
#[derive(Debug, Clone, Copy)]
pub struct DiscAutomorphism {
    pub rotation: f64,
    pub a: Complex64,
}

impl DiscAutomorphism {
    pub fn apply(&self, z: Complex64) -> Complex64 {
        Complex64::from_polar(1.0, self.rotation) * (z - self.a) / (1.0 - self.a.conj() * z)
    }

    pub fn derivative(&self, z: Complex64) -> Complex64 {
        let den = 1.0 - self.a.conj() * z;
        Complex64::from_polar(1.0, self.rotation) * (1.0 - self.a.norm_sqr()) / (den * den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn active_branch_examples() {
        let bidisc = Domain::Polydisc(vec![1.0, 1.0]);
        let z = [c(0.0, 0.0), c(0.0, 0.0)];
        assert_eq!(bidisc.active_branch(&z, &[c(1.0, 0.0), c(0.5, 0.0)], 1e-9), Some(vec![0]));
        assert_eq!(bidisc.active_branch(&z, &[c(0.5, 0.0), c(0.0, 1.0)], 1e-9), Some(vec![1]));
        assert_eq!(bidisc.active_branch(&z, &[c(1.0, 0.0), c(0.0, 1.0)], 1e-9), None);
        let product = Domain::Product(vec![Domain::UnitDisc, bidisc]);
        let z3 = [c(0.0, 0.0); 3];
        assert_eq!(product.active_branch(&z3, &[c(0.1, 0.0), c(0.0, 0.0), c(2.0, 0.0)], 1e-9), Some(vec![1, 1]));
        assert_eq!(Domain::UnitDisc.active_branch(&[c(0.2, 0.0)], &[c(1.0, 0.0)], 1e-9), Some(vec![]));
    }

    #[test]
    fn contains_examples() {
        let disc = Domain::UnitDisc;
        assert!(disc.contains(&[c(0.0, 0.0)], 0.0).unwrap());
        assert!(!disc.contains(&[c(1.0, 0.0)], 0.0).unwrap());
        assert!(Domain::Annulus(0.5).contains(&[c(0.7, 0.0)], 0.1).unwrap());
        assert!(!Domain::Annulus(0.5).contains(&[c(0.55, 0.0)], 0.1).unwrap());
        assert!(!Domain::PuncturedDisc.contains(&[c(0.0, 0.0)], 0.0).unwrap());
        assert_eq!(
            disc.contains(&[c(0.0, 0.0), c(0.0, 0.0)], 0.0),
            Err(Error::DimensionMismatch { expected: 1, found: 2 })
        );
    }

    #[test]
    fn metric_examples() {
        let disc = Domain::UnitDisc;
        assert_eq!(disc.infinitesimal_metric(&[c(0.0, 0.0)], &[c(1.0, 0.0)]).unwrap(), 1.0);
        assert_relative_eq!(
            disc.infinitesimal_metric(&[c(0.5, 0.0)], &[c(1.0, 0.0)]).unwrap(),
            4.0 / 3.0,
            epsilon = 1e-15
        );
        let bidisc = Domain::Polydisc(vec![1.0, 1.0]);
        assert_relative_eq!(
            bidisc
                .infinitesimal_metric(&[c(0.0, 0.0), c(0.5, 0.0)], &[c(1.0, 0.0), c(1.0, 0.0)])
                .unwrap(),
            4.0 / 3.0,
            epsilon = 1e-15
        );
        for d in fixture_domains() {
            let z = interior_point(&d);
            let v = vec![c(0.0, 0.0); d.dim()];
            assert_eq!(d.infinitesimal_metric(&z, &v).unwrap(), 0.0);
        }
        assert_eq!(
            disc.infinitesimal_metric(&[c(1.2, 0.0)], &[c(1.0, 0.0)]),
            Err(Error::PointOutsideDomain)
        );
    }

    #[test]
    fn ball_in_dimension_one_is_the_disc() {
        let ball = Domain::UnitBall(1);
        let z = [c(0.3, -0.4)];
        let v = [c(0.7, 0.2)];
        assert_relative_eq!(
            ball.infinitesimal_metric(&z, &v).unwrap(),
            Domain::UnitDisc.infinitesimal_metric(&z, &v).unwrap(),
            max_relative = 1e-14
        );
        let w = [c(-0.1, 0.5)];
        assert_relative_eq!(
            ball.distance(&z, &w).unwrap(),
            Domain::UnitDisc.distance(&z, &w).unwrap(),
            max_relative = 1e-13
        );
    }

    #[test]
    fn distance_examples() {
        let disc = Domain::UnitDisc;
        assert_eq!(disc.distance(&[c(0.0, 0.0)], &[c(0.0, 0.0)]).unwrap(), 0.0);
        assert_relative_eq!(
            disc.distance(&[c(0.0, 0.0)], &[c(0.5, 0.0)]).unwrap(),
            0.5f64.atanh(),
            epsilon = 1e-15
        );
        let bidisc = Domain::Polydisc(vec![1.0, 1.0]);
        assert_relative_eq!(
            bidisc.distance(&[c(0.0, 0.0), c(0.0, 0.0)], &[c(0.5, 0.0), c(0.3, 0.0)]).unwrap(),
            0.5f64.atanh(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn half_plane_matches_disc_through_cayley() {
        // φ(z) = (z − i)/(z + i) maps H onto the disc.
        let cayley = |z: Complex64| (z - Complex64::i()) / (z + Complex64::i());
        let h = Domain::UpperHalfPlane;
        let (z, w) = (c(0.3, 0.7), c(-1.2, 2.5));
        assert_relative_eq!(
            h.distance(&[z], &[w]).unwrap(),
            Domain::UnitDisc.distance(&[cayley(z)], &[cayley(w)]).unwrap(),
            max_relative = 1e-12
        );
        let v = c(0.4, -0.9);
        let dphi = 2.0 * Complex64::i() / ((z + Complex64::i()) * (z + Complex64::i()));
        assert_relative_eq!(
            h.infinitesimal_metric(&[z], &[v]).unwrap(),
            Domain::UnitDisc.infinitesimal_metric(&[cayley(z)], &[dphi * v]).unwrap(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn covered_domains_are_rotation_invariant() {
        let rot = Complex64::from_polar(1.0, 1.234);
        for d in [Domain::PuncturedDisc, Domain::Annulus(0.3)] {
            let (z, w) = (c(0.5, 0.2), c(-0.4, 0.6));
            assert_relative_eq!(
                d.distance(&[z], &[w]).unwrap(),
                d.distance(&[rot * z], &[rot * w]).unwrap(),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn annulus_metric_matches_distance_infinitesimally() {
        let d = Domain::Annulus(0.25);
        let z = c(0.4, 0.3);
        for v in [c(1.0, 0.0), c(0.0, 1.0), c(0.6, -0.8)] {
            let h = 1e-6;
            let w = z + v * h;
            let ratio = d.distance(&[z], &[w]).unwrap() / h;
            assert_relative_eq!(ratio, d.infinitesimal_metric(&[z], &[v]).unwrap(), max_relative = 1e-5);
        }
        let p = Domain::PuncturedDisc;
        let v = c(0.3, 0.4);
        let w = z + v * 1e-6;
        assert_relative_eq!(
            p.distance(&[z], &[w]).unwrap() / 1e-6,
            p.infinitesimal_metric(&[z], &[v]).unwrap(),
            max_relative = 1e-5
        );
    }

    #[test]
    fn royden_examples() {
        let disc = Domain::UnitDisc;
        let c0 = royden_lower_bound(&disc, &[c(0.0, 0.0)], 0.25, 64, 16).unwrap();
        assert!((c0 - 1.0).abs() <= 1e-10);
        assert!(royden_lower_bound(&disc, &[c(0.0, 0.0)], 0.9, 64, 16).unwrap() >= 1.0 - 1e-12);
        let ball = Domain::UnitBall(2);
        assert!(royden_lower_bound(&ball, &[c(0.0, 0.0); 2], 0.5, 64, 32).unwrap() >= 1.0 - 1e-12);
        assert_eq!(
            royden_lower_bound(&disc, &[c(0.5, 0.0)], 0.5, 8, 8),
            Err(Error::BallNotContained { radius: 0.5 })
        );
        assert_eq!(
            royden_lower_bound(&disc, &[c(0.0, 0.0)], 0.1, 0, 8),
            Err(Error::InvalidSampleCounts { points: 0, dirs: 8 })
        );
    }

    #[test]
    fn domain_json_round_trip() {
        let json = r#"{"kind":"product","factors":[{"kind":"disc"},{"kind":"annulus","r":0.25},{"kind":"ball","n":2}]}"#;
        let d: Domain = serde_json::from_str(json).unwrap();
        assert_eq!(d.dim(), 4);
        assert_eq!(serde_json::to_string(&d).unwrap(), json);
        assert!(serde_json::from_str::<Domain>(r#"{"kind":"annulus","r":1.5}"#).is_err());
        assert!(serde_json::from_str::<Domain>(r#"{"kind":"polydisc","radii":[1,-1]}"#).is_err());
    }

    pub(crate) fn fixture_domains() -> Vec<Domain> {
        vec![
            Domain::UnitDisc,
            Domain::UnitBall(2),
            Domain::Polydisc(vec![1.0, 2.0]),
            Domain::UpperHalfPlane,
            Domain::PuncturedDisc,
            Domain::Annulus(0.25),
            Domain::Product(vec![Domain::UnitDisc, Domain::UpperHalfPlane]),
        ]
    }

    pub(crate) fn interior_point(d: &Domain) -> CVec {
        match d {
            Domain::UpperHalfPlane => vec![c(0.2, 1.0)],
            Domain::PuncturedDisc | Domain::Annulus(_) => vec![c(0.5, 0.1)],
            Domain::Product(fs) => fs.iter().flat_map(interior_point).collect(),
            _ => vec![c(0.1, -0.2); d.dim()],
        }
    }
}
