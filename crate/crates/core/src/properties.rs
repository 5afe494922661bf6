//! Grid checks of the `(λ, κ)`-almost-geodesic and `(λ, κ)`-chord-arc
//! conditions, and both directions of the corollary relating them.
//!
//! A curve `σ: I → X` is a `(λ, κ)`-almost-geodesic when
//! `|s − t|/λ − κ ≤ K_X(σ(s), σ(t)) ≤ λ|s − t| + κ` for all `s, t` and
//! `k_X(σ(t); σ'(t)) ≤ λ` for almost every `t`. It is a `(λ, κ)`-chord-arc
//! curve when `l_X(σ|[s,t]) ≤ λ K_X(σ(s), σ(t)) + κ` for all `s < t`.
//!
//! Every check records a slack `lhs − rhs` per tested inequality; a report
//! passes when the largest slack is at most the tolerance.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cvec::CVec;
use crate::error::{Error, Result};
use crate::numerics::quad::QuadConfig;
use crate::numerics::uniform_grid;
use crate::paths::{speed_profile, Path};
use crate::reparam::{arc_length, unit_speed_reparametrize, ArcLengthTable, ReparamConfig, ReparamResult};

pub const DEFAULT_N_GRID: usize = 64;
/// Speed-profile nodes per segment for the almost-everywhere speed bound.
pub const SPEED_NODES_PER_SEGMENT: usize = 64;

/// `10⁻⁶ · (1 + ℓ)`.
pub fn default_tol(length: f64) -> f64 {
    1e-6 * (1.0 + length)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodesicParams {
    pub lambda: f64,
    pub kappa: f64,
}

impl GeodesicParams {
    pub fn new(lambda: f64, kappa: f64) -> Result<Self> {
        let p = GeodesicParams { lambda, kappa };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 1.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidConfig(format!("lambda = {} must be at least 1", self.lambda)));
        }
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return Err(Error::InvalidConfig(format!("kappa = {} must be non-negative", self.kappa)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    ChordArc,
    UpperDistance,
    LowerDistance,
    SpeedBound,
}

/// One tested inequality `lhs ≤ rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlackRow {
    pub s: f64,
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub condition: Condition,
}

impl SlackRow {
    fn new(s: f64, t: f64, lhs: f64, rhs: f64, condition: Condition) -> Self {
        SlackRow { s, t, lhs, rhs, slack: lhs - rhs, condition }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub verdict: Verdict,
    /// Largest `lhs − rhs` over all tested inequalities.
    pub worst_slack: f64,
    pub witness: (f64, f64),
    pub worst_condition: Condition,
    pub grid_size: usize,
    pub tolerance: f64,
    pub params: GeodesicParams,
    #[serde(skip)]
    pub rows: Vec<SlackRow>,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    fn fold(rows: Vec<SlackRow>, grid_size: usize, tolerance: f64, params: GeodesicParams) -> Self {
        let mut worst = rows[0];
        for r in &rows[1..] {
            // NaN slacks count as violations.
            if r.slack > worst.slack || (r.slack.is_nan() && !worst.slack.is_nan()) {
                worst = *r;
            }
        }
        let verdict = if worst.slack <= tolerance { Verdict::Pass } else { Verdict::Fail };
        PropertyReport {
            verdict,
            worst_slack: worst.slack,
            witness: (worst.s, worst.t),
            worst_condition: worst.condition,
            grid_size,
            tolerance,
            params,
            rows,
        }
    }

    /// `s,t,lhs,rhs,slack` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,t,lhs,rhs,slack\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{},{}", r.s, r.t, r.lhs, r.rhs, r.slack);
        }
        out
    }
}

fn check_grid(n_grid: usize) -> Result<()> {
    if n_grid < 2 {
        return Err(Error::InvalidConfig(format!("n_grid = {n_grid} must be at least 2")));
    }
    Ok(())
}

fn pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect()
}

fn sample(path: &Path, grid: &[f64]) -> Result<Vec<CVec>> {
    grid.iter().map(|t| path.eval(*t)).collect()
}

/// `l_X(γ|[s,t]) = G(t) − G(s)` from a table built on `path`.
pub fn arc_length_between(path: &Path, table: &ArcLengthTable, s: f64, t: f64) -> Result<f64> {
    let horizon = path.horizon();
    for v in [s, t] {
        if !(0.0..=horizon).contains(&v) {
            return Err(Error::OutOfRange { value: v, lo: 0.0, hi: horizon });
        }
    }
    if s > t {
        return Err(Error::OutOfRange { value: s, lo: 0.0, hi: t });
    }
    Ok((table.value_at(t) - table.value_at(s)).max(0.0))
}

/// Two-sided distance bounds on all pairs of an `n_grid`-point uniform grid,
/// plus the speed bound at interior speed-profile nodes.
pub fn verify_almost_geodesic(path: &Path, params: GeodesicParams, n_grid: usize, tol: f64) -> Result<PropertyReport> {
    params.validate()?;
    check_grid(n_grid)?;
    let domain = path.domain();
    let grid = uniform_grid(path.horizon(), n_grid);
    let pts = sample(path, &grid)?;
    let GeodesicParams { lambda, kappa } = params;
    let distance_rows: Vec<[SlackRow; 2]> = pairs(n_grid)
        .into_par_iter()
        .map(|(i, j)| {
            let (s, t) = (grid[i], grid[j]);
            let k = domain.distance(&pts[i], &pts[j])?;
            let gap = t - s;
            Ok([
                SlackRow::new(s, t, k, lambda * gap + kappa, Condition::UpperDistance),
                SlackRow::new(s, t, gap / lambda - kappa, k, Condition::LowerDistance),
            ])
        })
        .collect::<Result<_>>()?;
    let mut rows: Vec<SlackRow> = distance_rows.into_iter().flatten().collect();
    let speeds = speed_profile(path, SPEED_NODES_PER_SEGMENT)?;
    rows.extend(
        speeds.interior().map(|i| SlackRow::new(speeds.grid[i], speeds.grid[i], speeds.speeds[i], lambda, Condition::SpeedBound)),
    );
    Ok(PropertyReport::fold(rows, n_grid, tol, params))
}

/// `l_X(γ|[s,t]) ≤ λ K_X(γ(s), γ(t)) + κ` on all pairs `s < t` of an
/// `n_grid`-point uniform grid; builds the arc-length table itself.
pub fn verify_chord_arc(path: &Path, params: GeodesicParams, n_grid: usize, tol: f64) -> Result<PropertyReport> {
    let table = arc_length(path, &QuadConfig::default())?;
    verify_chord_arc_with_table(path, &table, params, n_grid, tol)
}

pub fn verify_chord_arc_with_table(
    path: &Path,
    table: &ArcLengthTable,
    params: GeodesicParams,
    n_grid: usize,
    tol: f64,
) -> Result<PropertyReport> {
    params.validate()?;
    check_grid(n_grid)?;
    let domain = path.domain();
    let grid = uniform_grid(path.horizon(), n_grid);
    let pts = sample(path, &grid)?;
    let arc: Vec<f64> = grid.iter().map(|t| table.value_at(*t)).collect();
    let GeodesicParams { lambda, kappa } = params;
    let rows: Vec<SlackRow> = pairs(n_grid)
        .into_par_iter()
        .map(|(i, j)| {
            let k = domain.distance(&pts[i], &pts[j])?;
            let l = (arc[j] - arc[i]).max(0.0);
            Ok(SlackRow::new(grid[i], grid[j], l, lambda * k + kappa, Condition::ChordArc))
        })
        .collect::<Result<_>>()?;
    Ok(PropertyReport::fold(rows, n_grid, tol, params))
}

/// Smallest `κ` for which the grid chord-arc check passes at fixed `λ`
/// with zero tolerance.
pub fn minimal_chord_arc_kappa(path: &Path, lambda: f64, n_grid: usize) -> Result<f64> {
    let report = verify_chord_arc(path, GeodesicParams::new(lambda, 0.0)?, n_grid, 0.0)?;
    Ok(report.worst_slack.max(0.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorollaryConfig {
    pub reparam: ReparamConfig,
    pub n_grid: usize,
    /// `None` = [`default_tol`] of the path length.
    pub tol: Option<f64>,
}

impl Default for CorollaryConfig {
    fn default() -> Self {
        CorollaryConfig { reparam: ReparamConfig::default(), n_grid: DEFAULT_N_GRID, tol: None }
    }
}

/// Chord-arc ⇒ almost-geodesic: checks the hypothesis on `path`, runs the
/// unit-speed pipeline, and returns the chord-arc and almost-geodesic
/// reports of `σ` for the same `(λ, κ)`.
pub fn chord_arc_to_almost_geodesic(
    path: &Path,
    params: GeodesicParams,
    cfg: &CorollaryConfig,
) -> Result<(ReparamResult, PropertyReport, PropertyReport)> {
    params.validate()?;
    let table = arc_length(path, &cfg.reparam.quad)?;
    let tol = cfg.tol.unwrap_or_else(|| default_tol(table.total));
    let hypothesis = verify_chord_arc_with_table(path, &table, params, cfg.n_grid, tol)?;
    if !hypothesis.passed() {
        return Err(Error::HypothesisViolated(format!(
            "not a ({}, {})-chord-arc curve: slack {:e} at ({}, {})",
            params.lambda, params.kappa, hypothesis.worst_slack, hypothesis.witness.0, hypothesis.witness.1
        )));
    }
    let result = unit_speed_reparametrize(path, &cfg.reparam)?;
    let sigma_table = arc_length(&result.sigma, &cfg.reparam.quad)?;
    let chord_arc = verify_chord_arc_with_table(&result.sigma, &sigma_table, params, cfg.n_grid, tol)?;
    let almost_geodesic = verify_almost_geodesic(&result.sigma, params, cfg.n_grid, tol)?;
    Ok((result, chord_arc, almost_geodesic))
}

/// `(λ, κ) ↦ (λ², λ²κ)`.
pub fn almost_geodesic_to_chord_arc_params(params: GeodesicParams) -> GeodesicParams {
    let l2 = params.lambda * params.lambda;
    GeodesicParams { lambda: l2, kappa: l2 * params.kappa }
}

/// Almost-geodesic ⇒ chord-arc with `(λ², λ²κ)`.
pub fn verify_corollary_b(path: &Path, params: GeodesicParams, n_grid: usize, tol: f64) -> Result<PropertyReport> {
    let hypothesis = verify_almost_geodesic(path, params, n_grid, tol)?;
    if !hypothesis.passed() {
        return Err(Error::HypothesisViolated(format!(
            "not a ({}, {})-almost-geodesic: slack {:e} at ({}, {})",
            params.lambda, params.kappa, hypothesis.worst_slack, hypothesis.witness.0, hypothesis.witness.1
        )));
    }
    verify_chord_arc(path, almost_geodesic_to_chord_arc_params(params), n_grid, tol)
}
