//! The acceptance suite: eight end-to-end criteria with fixed inputs and
//! tolerances, shared by the `acceptance` test target and `kobpath demo`.

use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cvec;
use crate::error::{Error, Result};
use crate::fixtures;
use crate::metric::{distance_via_path_optimization, royden_lower_bound, DiscAutomorphism, Domain};
use crate::numerics::{hausdorff, max_spacing, uniform_grid, OptConfig, QuadConfig};
use crate::paths::{collapse, default_min_length, reparam_map, speed_profile, zero_speed_set, Path};
use crate::properties::{
    chord_arc_to_almost_geodesic, default_tol, verify_corollary_b, CorollaryConfig, GeodesicParams,
};
use crate::reparam::{
    arc_length, direct_reparametrize_by_g, unit_speed_reparametrize, verify_key_equation, ReparamConfig,
};

pub const SUITE_SEED: u64 = 20_240_601;

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    /// Overrides the quadrature tolerance of every pipeline run.
    pub quad_tol: Option<f64>,
    /// JSON of the plateau path used by criterion 3.
    pub plateau_spec: String,
    /// Seed of the randomized criteria.
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { quad_tol: None, plateau_spec: fixtures::PLATEAU_SPEC.to_string(), seed: SUITE_SEED }
    }
}

impl SuiteConfig {
    fn reparam(&self) -> ReparamConfig {
        let mut cfg = ReparamConfig::default();
        if let Some(tol) = self.quad_tol {
            cfg.quad = QuadConfig::with_tol(tol);
        }
        cfg
    }

    /// Fails with the parse error when a built-in spec is malformed.
    pub fn validate(&self) -> Result<()> {
        Path::from_json(&self.plateau_spec)?;
        if let Some(tol) = self.quad_tol {
            QuadConfig::with_tol(tol).validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    #[serde(skip)]
    pub seconds: f64,
}

impl Outcome {
    pub fn line(&self) -> String {
        format!(
            "[{}] {}. {} ({:.2} s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.detail
        )
    }
}

type Check = fn(&SuiteConfig) -> Result<(bool, String)>;

const CRITERIA: [(&str, Check); 8] = [
    ("geodesic recovery", geodesic_recovery),
    ("unit-speed suite", unit_speed_suite),
    ("invertibility iff no flat intervals", invertibility),
    ("interval collapse", interval_collapse),
    ("chord-arc to almost-geodesic", corollary_a),
    ("almost-geodesic to chord-arc", corollary_b),
    ("metric layer", metric_layer),
    ("royden diagnostic", royden),
];

/// Runs one criterion (1-based). Numerical errors count as failures.
pub fn run_criterion(id: usize, cfg: &SuiteConfig) -> Outcome {
    let (name, check) = CRITERIA[id - 1];
    let start = Instant::now();
    let (passed, detail) = match check(cfg) {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    Outcome { id, name, passed, detail, seconds: start.elapsed().as_secs_f64() }
}

/// Validates the configuration, then runs all criteria in order.
pub fn run_suite(cfg: &SuiteConfig) -> Result<Vec<Outcome>> {
    cfg.validate()?;
    Ok((1..=CRITERIA.len()).map(|id| run_criterion(id, cfg)).collect())
}

fn within_budget(start: Instant, seconds: f64) -> bool {
    start.elapsed().as_secs_f64() < seconds
}

// Details stay free of timings so that reports are reproducible.
fn budget_note(fast: bool, seconds: f64) -> String {
    if fast {
        String::new()
    } else {
        format!(", over the {seconds} s budget")
    }
}

fn geodesic_recovery(cfg: &SuiteConfig) -> Result<(bool, String)> {
    let start = Instant::now();
    let result = unit_speed_reparametrize(&fixtures::radial_path(), &cfg.reparam())?;
    let sigma = &result.sigma;
    let ell = result.length();
    let mut tanh_err: f64 = 0.0;
    for u in uniform_grid(ell, 512) {
        tanh_err = tanh_err.max(cvec::dist(&sigma.eval(u)?, &[Complex64::new(u.tanh(), 0.0)]));
    }
    let len_err = (ell - 0.5f64.atanh()).abs();
    let grid = uniform_grid(ell, 32);
    let mut dist_err: f64 = 0.0;
    for (i, s) in grid.iter().enumerate() {
        for t in &grid[i + 1..] {
            let k = sigma.domain().distance(&sigma.eval(*s)?, &sigma.eval(*t)?)?;
            dist_err = dist_err.max((k - (t - s)).abs());
        }
    }
    let fast = within_budget(start, 1.0);
    let ok = tanh_err <= 1e-6 && len_err <= 1e-8 && dist_err <= 1e-8 && fast;
    Ok((ok, format!("max|σ−tanh| = {tanh_err:.2e}, |ℓ−atanh ½| = {len_err:.2e}, max|K−|s−t|| = {dist_err:.2e}{}", budget_note(fast, 1.0))))
}

fn unit_speed_suite(cfg: &SuiteConfig) -> Result<(bool, String)> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let domains = [Domain::UnitDisc, Domain::Polydisc(vec![1.0, 1.0]), Domain::UnitBall(2)];
    let rcfg = cfg.reparam();
    let (mut worst_fraction, mut worst_key): (f64, f64) = (1.0, 0.0);
    for k in 0..10 {
        let path = fixtures::random_path(&mut rng, &domains[k % 3]);
        let result = unit_speed_reparametrize(&path, &rcfg)?;
        worst_fraction = worst_fraction.min(result.diagnostics.fraction_unit_speed);
        worst_key = worst_key.max(verify_key_equation(&result, 16, &rcfg.quad)?);
    }
    let fast = within_budget(start, 10.0);
    let ok = worst_fraction >= 0.99 && worst_key <= 1e-4 && fast;
    Ok((ok, format!("min fraction |speed−1| ≤ 1e-4 = {worst_fraction:.4}, max key deviation = {worst_key:.2e}{}", budget_note(fast, 10.0))))
}

fn invertibility(cfg: &SuiteConfig) -> Result<(bool, String)> {
    let path = Path::from_json(&cfg.plateau_spec)?;
    let rcfg = cfg.reparam();
    let witness = match direct_reparametrize_by_g(&path, &rcfg) {
        Err(Error::NotInvertible { a, b }) => Some((a, b)),
        Err(e) => return Err(e),
        Ok(_) => None,
    };
    let overlaps = witness.is_some_and(|(a, b)| a < 2.0 && b > 1.0);
    let result = unit_speed_reparametrize(&path, &rcfg)?;
    let original = arc_length(&path, &rcfg.quad)?.total;
    let len_err = (result.length() - original).abs();
    let d = &result.diagnostics;
    let ok = overlaps && result.collapsed && len_err <= 1e-8 && d.image_hausdorff <= 2.0 * d.image_spacing;
    Ok((
        ok,
        format!(
            "witness = {witness:?}, collapsed = {}, |Δℓ| = {len_err:.2e}, hausdorff = {:.2e} (spacing {:.2e})",
            result.collapsed, d.image_hausdorff, d.image_spacing
        ),
    ))
}

fn interval_collapse(_cfg: &SuiteConfig) -> Result<(bool, String)> {
    let path = fixtures::two_plateau_path();
    let samples = speed_profile(&path, 64)?;
    let zeros = zero_speed_set(&samples, &path, crate::paths::DEFAULT_EPS_SPEED, default_min_length(&samples));
    let (aux, plan) = collapse(&path, &zeros)?;
    let map = reparam_map(&plan);
    let mut err: f64 = 0.0;
    for t in uniform_grid(path.horizon(), 512) {
        err = err.max(cvec::dist(&path.eval(t)?, &aux.eval(map.eval(t))?));
    }
    let aux_samples = speed_profile(&aux, 64)?;
    let aux_zeros = zero_speed_set(&aux_samples, &aux, crate::paths::DEFAULT_EPS_SPEED, default_min_length(&aux_samples));
    let ok = (plan.tau - 2.0).abs() <= 1e-12 && err <= 1e-8 && aux_zeros.intervals.is_empty();
    Ok((ok, format!("τ = {}, max|γ − γ^aux∘A| = {err:.2e}, zero intervals of γ^aux = {}", plan.tau, aux_zeros.intervals.len())))
}

/// The five chord-arc curves of criterion 5 with their parameters.
pub fn chord_arc_curves() -> Vec<(&'static str, Path, GeodesicParams)> {
    let p = |lambda, kappa| GeodesicParams { lambda, kappa };
    vec![
        ("radial geodesic", fixtures::radial_path(), p(1.0, 0.0)),
        ("radial with plateau", fixtures::plateau_path(), p(1.0, 0.0)),
        ("disc corner", fixtures::disc_corner_path(), p(1.0, 0.32)),
        ("ball complex line", fixtures::ball_radial_path(), p(1.0, 0.0)),
        ("ball bend", fixtures::ball_bend_path(), p(1.5, 0.05)),
    ]
}

fn corollary_a(cfg: &SuiteConfig) -> Result<(bool, String)> {
    let ccfg = CorollaryConfig { reparam: cfg.reparam(), ..Default::default() };
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, path, params) in chord_arc_curves() {
        let (result, ca, ag) = chord_arc_to_almost_geodesic(&path, params, &ccfg)?;
        let bound = default_tol(result.length());
        let pass = ca.passed() && ag.passed() && ca.worst_slack <= bound && ag.worst_slack <= bound;
        ok &= pass;
        detail.push(format!("{name}: {:.1e}/{:.1e}", ca.worst_slack, ag.worst_slack));
    }
    Ok((ok, format!("worst slack chord-arc/almost-geodesic: {}", detail.join(", "))))
}

fn corollary_b(_cfg: &SuiteConfig) -> Result<(bool, String)> {
    let n = crate::properties::DEFAULT_N_GRID;
    let slowed = fixtures::slowed_geodesic();
    let paused = fixtures::paused_geodesic();
    let a = verify_corollary_b(&slowed, GeodesicParams { lambda: 2.0, kappa: 0.0 }, n, default_tol(slowed.horizon()))?;
    let b = verify_corollary_b(&paused, GeodesicParams { lambda: 1.0, kappa: 0.1 }, n, default_tol(paused.horizon()))?;
    let ok = a.passed() && b.passed() && a.params.lambda == 4.0 && a.params.kappa == 0.0;
    Ok((
        ok,
        format!(
            "(2,0) → ({},{}) slack {:.1e}; (1,0.1) → ({},{}) slack {:.1e}",
            a.params.lambda, a.params.kappa, a.worst_slack, b.params.lambda, b.params.kappa, b.worst_slack
        ),
    ))
}

fn random_disc_point(rng: &mut ChaCha8Rng, rho: f64) -> Complex64 {
    Complex64::from_polar(rho * rng.gen::<f64>().sqrt(), std::f64::consts::TAU * rng.gen::<f64>())
}

/// Largest relative error of `K` and `k` under 1000 random disc automorphisms.
pub fn mobius_invariance_error(seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let disc = Domain::UnitDisc;
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let phi = DiscAutomorphism { rotation: rng.gen_range(-3.0..3.0), a: random_disc_point(&mut rng, 0.9) };
        let (z, w) = (random_disc_point(&mut rng, 0.9), random_disc_point(&mut rng, 0.9));
        let v = random_disc_point(&mut rng, 1.0);
        let k0 = disc.distance(&[z], &[w])?;
        let k1 = disc.distance(&[phi.apply(z)], &[phi.apply(w)])?;
        let m0 = disc.infinitesimal_metric(&[z], &[v])?;
        let m1 = disc.infinitesimal_metric(&[phi.apply(z)], &[phi.derivative(z) * v])?;
        worst = worst.max((k1 - k0).abs() / k0.max(f64::MIN_POSITIVE));
        worst = worst.max((m1 - m0).abs() / m0.max(f64::MIN_POSITIVE));
    }
    Ok(worst)
}

fn metric_layer(cfg: &SuiteConfig) -> Result<(bool, String)> {
    let start = Instant::now();
    let invariance = mobius_invariance_error(cfg.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
    let opt = OptConfig::default();
    let mut worst_gap: f64 = 0.0;
    for k in 0..10 {
        let (domain, dim) = if k < 5 { (Domain::UnitDisc, 1) } else { (Domain::Polydisc(vec![1.0, 1.0]), 2) };
        let z = fixtures::random_polydisc_point(&mut rng, dim, 0.7);
        let w = fixtures::random_polydisc_point(&mut rng, dim, 0.7);
        let exact = domain.distance(&z, &w)?;
        let approx = distance_via_path_optimization(&domain, &z, &w, &opt)?;
        // An upper bound: negative gaps beyond rounding are failures too.
        let gap = if approx < exact - 1e-9 { f64::INFINITY } else { approx - exact };
        worst_gap = worst_gap.max(gap);
    }
    let fast = within_budget(start, 30.0);
    let ok = invariance <= 1e-10 && worst_gap <= 1e-3 && fast;
    Ok((ok, format!("max relative invariance error = {invariance:.2e}, max optimizer gap = {worst_gap:.2e}{}", budget_note(fast, 30.0))))
}

fn royden(_cfg: &SuiteConfig) -> Result<(bool, String)> {
    let c0 = royden_lower_bound(&Domain::UnitDisc, &[Complex64::new(0.0, 0.0)], 0.25, 64, 16)?;
    let mut min_other = f64::INFINITY;
    for domain in fixtures::fixture_domains() {
        let x = fixtures::interior_point(&domain);
        let radius = 0.5 * domain.boundary_distance(&x);
        min_other = min_other.min(royden_lower_bound(&domain, &x, radius, 64, 16)?);
    }
    let ok = (c0 - 1.0).abs() <= 1e-10 && min_other > 0.0;
    Ok((ok, format!("disc centre = {c0}, minimum over fixture domains = {min_other:.4}")))
}

/// Image-preservation check used by tests: Hausdorff distance of sampled
/// images against twice the larger sample spacing.
pub fn image_preserved(a: &Path, b: &Path, n: usize) -> bool {
    let (ia, ib) = (a.image_samples(n), b.image_samples(n));
    hausdorff(&ia, &ib) <= 2.0 * max_spacing(&ia).max(max_spacing(&ib))
}
