//! Arc-length reparametrisation to unit Kobayashi speed.
//!
//! The full pipeline samples the speed, removes positive-length zero-speed
//! intervals when present, tabulates the arc-length function `G` of the
//! resulting path `Γ`, and materializes `σ = Γ ∘ G⁻¹` on a fresh uniform grid
//! in `u ∈ [0, ℓ]`. `G⁻¹` itself is never differentiated: `σ` is stored as
//! sampled segments (split where `Γ` has breakpoints) and differentiated as
//! any other sampled path.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::cvec;
use crate::error::{Error, Result};
use crate::numerics::interp::{leftmost_at_least, HermiteCell};
use crate::numerics::quad::{adaptive_simpson, QuadConfig};
use crate::numerics::{hausdorff, max_spacing, uniform_grid};
use crate::paths::{
    collapse, default_min_length, speed_profile, zero_speed_set, CollapsePlan, IntervalSet, Path, Segment, SegmentKind,
    DEFAULT_EPS_SPEED, EPS_CONST,
};

/// Table cells per segment.
pub const DEFAULT_TABLE_NODES: usize = 256;
/// Increment at or below which a table cell counts as flat.
pub const DEFAULT_EPS_G: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReparamConfig {
    pub quad: QuadConfig,
    pub eps_speed: f64,
    /// Minimum length of a reported zero interval; `None` = two grid steps.
    pub min_length: Option<f64>,
    /// Speed-profile nodes per segment used for zero detection.
    pub n_per_segment: usize,
    pub table_nodes: usize,
    /// Inversion tolerance; `None` = `1e-10 · (1 + ℓ)`.
    pub eps_inv: Option<f64>,
    /// Total length at or below which a path is treated as constant.
    pub eps_length: f64,
    /// Approximate number of samples of `σ`.
    pub n_out: usize,
    /// Tolerance on `|speed − 1|` counted in the diagnostics.
    pub speed_tol: f64,
    /// Samples per image for the Hausdorff diagnostic.
    pub n_image: usize,
}

impl Default for ReparamConfig {
    fn default() -> Self {
        Self {
            quad: QuadConfig::default(),
            eps_speed: DEFAULT_EPS_SPEED,
            min_length: None,
            n_per_segment: 64,
            table_nodes: DEFAULT_TABLE_NODES,
            eps_inv: None,
            eps_length: 1e-12,
            n_out: 1024,
            speed_tol: 1e-4,
            n_image: 512,
        }
    }
}

impl ReparamConfig {
    pub fn validate(&self) -> Result<()> {
        self.quad.validate()?;
        if self.n_per_segment < 2 || self.table_nodes < 1 || self.n_out < 2 || self.n_image < 2 {
            return Err(Error::InvalidConfig("sample counts too small".into()));
        }
        if !(self.eps_speed >= 0.0) || !(self.eps_length >= 0.0) || !(self.speed_tol > 0.0) {
            return Err(Error::InvalidConfig("tolerances must be non-negative".into()));
        }
        if matches!(self.eps_inv, Some(e) if !(e > 0.0)) {
            return Err(Error::InvalidConfig("eps_inv must be positive".into()));
        }
        Ok(())
    }

    pub fn eps_inv_for(&self, length: f64) -> f64 {
        self.eps_inv.unwrap_or(1e-10 * (1.0 + length))
    }
}

/// Tabulated arc-length function `G(t) = ∫₀ᵗ k_X(Γ; Γ') ds`.
///
/// Between nodes `G` is evaluated by a monotone cubic Hermite cell built from
/// the node values and the integrand at both ends of the cell. Cells whose
/// Hermite model disagrees with quadrature at their midpoint are halved.
/// Cells are also split where the maximizing factor of a polydisc or product
/// metric changes, since the speed has a kink there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcLengthTable {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub total: f64,
    pub quad_tol: f64,
    /// Integrand at the start and end of each cell, one-sided at breakpoints.
    pub rates: Vec<[f64; 2]>,
    /// Grid indices of the segment breakpoints.
    pub breaks: Vec<usize>,
    /// Parameters where the maximizing factor of the metric changes.
    pub kinks: Vec<f64>,
}

impl ArcLengthTable {
    pub fn horizon(&self) -> f64 {
        *self.grid.last().unwrap()
    }

    fn cell(&self, i: usize) -> HermiteCell {
        HermiteCell::new(
            self.grid[i],
            self.grid[i + 1],
            self.values[i],
            self.values[i + 1],
            self.rates[i][0],
            self.rates[i][1],
        )
    }

    /// `G(t)` for `t ∈ [0, τ]` (clamped).
    pub fn value_at(&self, t: f64) -> f64 {
        let n = self.grid.len();
        if n == 1 || t <= self.grid[0] {
            return self.values[0];
        }
        if t >= self.grid[n - 1] {
            return self.values[n - 1];
        }
        let i = self.grid.partition_point(|g| *g <= t).clamp(1, n - 1) - 1;
        self.cell(i).eval(t)
    }
}

/// Integrates the speed of `path` on a table grid of `DEFAULT_TABLE_NODES`
/// cells per segment.
pub fn arc_length(path: &Path, quad: &QuadConfig) -> Result<ArcLengthTable> {
    arc_length_with_nodes(path, quad, DEFAULT_TABLE_NODES)
}

const MAX_CELL_DEPTH: u32 = 48;
/// Relative gap below which two factors of a max-type metric count as tied.
const BRANCH_TIE_TOL: f64 = 1e-9;

struct TableBuilder<'a> {
    path: &'a Path,
    segment: usize,
    /// Quadrature tolerance per unit parameter length.
    tol_density: f64,
    quad: QuadConfig,
    model_tol: f64,
    min_width: f64,
    grid: Vec<f64>,
    values: Vec<f64>,
    rates: Vec<[f64; 2]>,
    kinks: Vec<f64>,
}

impl TableBuilder<'_> {
    fn integrate(&self, a: f64, b: f64) -> Result<f64> {
        let quad = QuadConfig { tol: self.tol_density * (b - a), ..self.quad };
        integrate_speed(self.path, self.segment, a, b, &quad)
    }

    fn speed(&self, t: f64) -> Result<f64> {
        self.path.segment_speed(self.segment, t)
    }

    /// Appends the nodes of `[a, b]` (excluding `a`), first splitting at the
    /// parameters where the maximizing factor of the metric changes. Switches
    /// within `1e-6·(b − a)` of either end are left to the midpoint test.
    fn span(&mut self, a: f64, b: f64, r_a: f64, r_b: f64) -> Result<()> {
        let (j, path) = (self.segment, self.path);
        let (ba, bb) = (path.segment_branch(j, a, BRANCH_TIE_TOL), path.segment_branch(j, b, BRANCH_TIE_TOL));
        if let (Some(ba), Some(bb)) = (ba, bb) {
            if ba != bb {
                let (mut lo, mut hi) = (a, b);
                loop {
                    let m = 0.5 * (lo + hi);
                    if m <= lo || m >= hi {
                        break;
                    }
                    if path.segment_branch(j, m, 0.0).as_ref() == Some(&ba) {
                        lo = m;
                    } else {
                        hi = m;
                    }
                }
                let gap = (1e-6 * (b - a)).max(self.min_width);
                if hi - a > gap && b - hi > gap {
                    let r_k = self.speed(hi)?;
                    let v_a = *self.values.last().unwrap();
                    self.cell(a, hi, v_a, r_a, r_k, 0)?;
                    self.kinks.push(hi);
                    return self.span(hi, b, r_k, r_b);
                }
            }
        }
        let v_a = *self.values.last().unwrap();
        self.cell(a, b, v_a, r_a, r_b, 0)
    }

    /// Halves `[a, b]` until the Hermite model matches quadrature at midpoints.
    fn cell(&mut self, a: f64, b: f64, v_a: f64, r_a: f64, r_b: f64, depth: u32) -> Result<()> {
        let m = 0.5 * (a + b);
        let (left, right) = (self.integrate(a, m)?, self.integrate(m, b)?);
        let r_m = self.speed(m)?;
        let (v_m, v_b) = (v_a + left, v_a + left + right);
        let predicted = HermiteCell::new(a, b, v_a, v_b, r_a, r_b).eval(m);
        if (predicted - v_m).abs() > self.model_tol && b - a > self.min_width && depth < MAX_CELL_DEPTH {
            self.cell(a, m, v_a, r_a, r_m, depth + 1)?;
            return self.cell(m, b, v_m, r_m, r_b, depth + 1);
        }
        self.grid.extend([m, b]);
        self.values.extend([v_m, v_b]);
        self.rates.extend([[r_a, r_m], [r_m, r_b]]);
        Ok(())
    }
}

pub fn arc_length_with_nodes(path: &Path, quad: &QuadConfig, cells_per_segment: usize) -> Result<ArcLengthTable> {
    quad.validate()?;
    let m = cells_per_segment.max(1);
    let mut table = TableBuilder {
        path,
        segment: 0,
        tol_density: 0.0,
        quad: *quad,
        model_tol: 1e-4 * quad.tol,
        min_width: 0.0,
        grid: vec![0.0],
        values: vec![0.0],
        rates: Vec::new(),
        kinks: Vec::new(),
    };
    let mut breaks = vec![0];
    for (j, seg) in path.segments().iter().enumerate() {
        let len = seg.len();
        table.segment = j;
        table.tol_density = quad.tol / len;
        table.min_width = (1e-12 * len).max(64.0 * f64::EPSILON * seg.start.abs().max(seg.end.abs()));
        let nodes: Vec<f64> = (0..=m).map(|k| if k == m { seg.end } else { seg.start + len * k as f64 / m as f64 }).collect();
        for w in nodes.windows(2) {
            let (a, b) = (w[0], w[1]);
            if seg.is_constant() {
                let v_a = *table.values.last().unwrap();
                table.grid.push(b);
                table.values.push(v_a);
                table.rates.push([0.0, 0.0]);
            } else {
                let (r_a, r_b) = (path.segment_speed(j, a)?, path.segment_speed(j, b)?);
                table.span(a, b, r_a, r_b)?;
            }
        }
        breaks.push(table.grid.len() - 1);
    }
    let total = *table.values.last().unwrap();
    let TableBuilder { grid, values, rates, kinks, .. } = table;
    Ok(ArcLengthTable { grid, values, total, quad_tol: quad.tol, rates, breaks, kinks })
}

fn integrate_speed(path: &Path, segment: usize, a: f64, b: f64, quad: &QuadConfig) -> Result<f64> {
    let mut cuts = vec![a];
    cuts.extend(path.fd_switch_points(segment).into_iter().filter(|p| *p > a && *p < b));
    cuts.push(b);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        total += integrate_smooth(path, segment, w[0], w[1], quad)?;
    }
    Ok(total)
}

fn integrate_smooth(path: &Path, segment: usize, a: f64, b: f64, quad: &QuadConfig) -> Result<f64> {
    let mut failure = None;
    let value = adaptive_simpson(
        |t| match path.segment_speed(segment, t) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        a,
        b,
        quad,
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(value),
    }
}

/// Whether `G` is strictly increasing on the table.
///
/// Returns `(false, Some([a, b]))` with the longest maximal run of cells whose
/// increments are all `<= eps_g`, if that run spans at least `min_length`.
pub fn check_strictly_increasing(table: &ArcLengthTable, eps_g: f64, min_length: f64) -> (bool, Option<(f64, f64)>) {
    let mut best: Option<(f64, f64)> = None;
    let mut run_start: Option<usize> = None;
    let cells = table.grid.len() - 1;
    for i in 0..=cells {
        let flat = i < cells && table.values[i + 1] - table.values[i] <= eps_g;
        match (flat, run_start) {
            (true, None) => run_start = Some(i),
            (false, Some(s)) => {
                let (a, b) = (table.grid[s], table.grid[i]);
                if best.is_none_or(|(x, y)| b - a > y - x) {
                    best = Some((a, b));
                }
                run_start = None;
            }
            _ => {}
        }
    }
    match best {
        Some((a, b)) if b - a >= min_length => (false, Some((a, b))),
        _ => (true, None),
    }
}

/// `G⁻¹(s)`: the leftmost `t` with `G(t) = s`, located by binary search on the
/// table and solved inside the bracketing cell.
pub fn invert(table: &ArcLengthTable, s: f64, eps_inv: f64) -> Result<f64> {
    let total = table.total;
    let slack = 4.0 * f64::EPSILON * (1.0 + total);
    if !(s >= -slack && s <= total + slack) {
        return Err(Error::OutOfRange { value: s, lo: 0.0, hi: total });
    }
    let s = s.clamp(0.0, total);
    let j = leftmost_at_least(&table.values, s);
    if j == 0 || table.values[j] == s {
        return Ok(table.grid[j.min(table.grid.len() - 1)]);
    }
    let (t, residual) = table.cell(j - 1).solve(s);
    if residual.abs() > eps_inv {
        return Err(Error::InversionFailed { residual: residual.abs(), tolerance: eps_inv });
    }
    Ok(t)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// `max |k_X(σ; σ') − 1|` over interior nodes of `σ`.
    pub max_speed_deviation: f64,
    /// Fraction of interior nodes with `|speed − 1| <= speed_tol`.
    pub fraction_unit_speed: f64,
    pub speed_tol: f64,
    pub interior_nodes: usize,
    /// Hausdorff distance between sampled images of the input and of `σ`.
    pub image_hausdorff: f64,
    /// Largest gap between consecutive image samples of either path.
    pub image_spacing: f64,
    /// `|ℓ(σ) − ℓ|` with `ℓ(σ)` re-integrated on `σ`.
    pub length_discrepancy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReparamResult {
    pub sigma: Path,
    pub table: ArcLengthTable,
    pub collapsed: bool,
    pub plan: Option<CollapsePlan>,
    pub zeros: IntervalSet,
    pub diagnostics: Diagnostics,
}

impl ReparamResult {
    pub fn length(&self) -> f64 {
        self.table.total
    }
}

fn detect_zeros(path: &Path, cfg: &ReparamConfig) -> Result<IntervalSet> {
    let samples = speed_profile(path, cfg.n_per_segment)?;
    let min_length = cfg.min_length.unwrap_or_else(|| default_min_length(&samples));
    let zeros = zero_speed_set(&samples, path, cfg.eps_speed, min_length);
    if zeros.total_length() >= path.horizon() * (1.0 - 1e-12) {
        return Err(Error::ConstantPath { length: 0.0 });
    }
    Ok(zeros)
}

/// Unit-speed reparametrisation `σ_γ` of a non-constant path.
///
/// Collapses positive-length zero-speed intervals first when there are any.
pub fn unit_speed_reparametrize(path: &Path, cfg: &ReparamConfig) -> Result<ReparamResult> {
    cfg.validate()?;
    let zeros = detect_zeros(path, cfg)?;
    let (gamma, plan) = if zeros.is_empty() {
        (path.clone(), None)
    } else {
        let (aux, plan) = collapse(path, &zeros)?;
        (aux, Some(plan))
    };
    let table = arc_length_with_nodes(&gamma, &cfg.quad, cfg.table_nodes)?;
    finish(path, &gamma, table, zeros, plan, cfg)
}

/// Reparametrisation by the arc-length function `g` of `γ` itself, without
/// collapsing; fails with [`Error::NotInvertible`] when `g` has a flat.
pub fn direct_reparametrize_by_g(path: &Path, cfg: &ReparamConfig) -> Result<ReparamResult> {
    cfg.validate()?;
    let zeros = detect_zeros(path, cfg)?;
    if let Some(&(a, b)) = zeros.intervals.first() {
        return Err(Error::NotInvertible { a, b });
    }
    let table = arc_length_with_nodes(path, &cfg.quad, cfg.table_nodes)?;
    if let (false, Some((a, b))) = check_strictly_increasing(&table, DEFAULT_EPS_G, 0.0) {
        return Err(Error::NotInvertible { a, b });
    }
    finish(path, path, table, zeros, None, cfg)
}

fn finish(
    original: &Path,
    gamma: &Path,
    table: ArcLengthTable,
    zeros: IntervalSet,
    plan: Option<CollapsePlan>,
    cfg: &ReparamConfig,
) -> Result<ReparamResult> {
    let length = table.total;
    if !(length > cfg.eps_length) {
        return Err(Error::ConstantPath { length });
    }
    let sigma = resample_unit_speed(gamma, &table, cfg)?;
    let diagnostics = diagnose(original, &sigma, length, cfg)?;
    Ok(ReparamResult { sigma, table, collapsed: plan.is_some(), plan, zeros, diagnostics })
}

/// `σ = Γ ∘ G⁻¹` as sampled segments, one per smooth piece of `Γ`: segments
/// of `Γ` are split further at the kinks recorded in the table.
fn resample_unit_speed(gamma: &Path, table: &ArcLengthTable, cfg: &ReparamConfig) -> Result<Path> {
    let length = table.total;
    let eps_inv = cfg.eps_inv_for(length);
    let mut segments = Vec::new();
    let mut cursor = 0.0;
    for (j, seg) in gamma.segments().iter().enumerate() {
        let mut cuts = vec![(seg.start, table.values[table.breaks[j]])];
        for &k in table.kinks.iter().filter(|k| **k > seg.start && **k < seg.end) {
            cuts.push((k, table.value_at(k)));
        }
        cuts.push((seg.end, table.values[table.breaks[j + 1]]));
        for w in cuts.windows(2) {
            let ((t0, u0), (t1, u1)) = (w[0], w[1]);
            let du = u1 - u0;
            if du <= 1e-9 * length / cfg.n_out as f64 {
                continue;
            }
            let m = ((cfg.n_out as f64 * du / length).ceil() as usize).max(8);
            let mut params = Vec::with_capacity(m + 1);
            let mut points = Vec::with_capacity(m + 1);
            for k in 0..=m {
                let u = u0 + du * k as f64 / m as f64;
                let t = match k {
                    0 => t0,
                    _ if k == m => t1,
                    _ => invert(table, u, eps_inv)?.clamp(t0, t1),
                };
                params.push(u);
                points.push(seg.eval(t));
            }
            params[0] = cursor;
            segments.push(Segment { start: cursor, end: u1, kind: SegmentKind::Sampled { params, points } });
            cursor = u1;
        }
    }
    if let Some(last) = segments.last_mut() {
        last.end = length;
        if let SegmentKind::Sampled { params, .. } = &mut last.kind {
            *params.last_mut().unwrap() = length;
        }
    }
    Path::with_join_tolerance(gamma.domain().clone(), length, segments, EPS_CONST)
}

fn diagnose(original: &Path, sigma: &Path, length: f64, cfg: &ReparamConfig) -> Result<Diagnostics> {
    let per_segment = (2 * cfg.n_out / sigma.segments().len()).max(16);
    let samples = speed_profile(sigma, per_segment)?;
    let deviations: Vec<f64> = samples.interior().map(|i| (samples.speeds[i] - 1.0).abs()).collect();
    let within = deviations.iter().filter(|d| **d <= cfg.speed_tol).count();
    let img_a = original.image_samples(cfg.n_image);
    let img_b = sigma.image_samples(cfg.n_image);
    let sigma_length = arc_length_with_nodes(sigma, &cfg.quad, cfg.table_nodes)?.total;
    Ok(Diagnostics {
        max_speed_deviation: deviations.iter().copied().fold(0.0, f64::max),
        fraction_unit_speed: within as f64 / deviations.len().max(1) as f64,
        speed_tol: cfg.speed_tol,
        interior_nodes: deviations.len(),
        image_hausdorff: hausdorff(&img_a, &img_b),
        image_spacing: max_spacing(&img_a).max(max_spacing(&img_b)),
        length_discrepancy: (sigma_length - length).abs(),
    })
}

/// `max_k |∫₀^{t_k} k_X(σ; σ') du − t_k|` over `n_checks` equispaced
/// `t_k ∈ [0, ℓ]`, each integral by adaptive quadrature on `σ`.
pub fn verify_key_equation(result: &ReparamResult, n_checks: usize, quad: &QuadConfig) -> Result<f64> {
    let sigma = &result.sigma;
    let ell = sigma.horizon();
    let checks: Vec<f64> = match n_checks {
        0 => vec![],
        1 => vec![ell],
        n => uniform_grid(ell, n),
    };
    let mut worst: f64 = 0.0;
    for t in checks {
        let mut integral = 0.0;
        for (j, seg) in sigma.segments().iter().enumerate() {
            if seg.start >= t {
                break;
            }
            integral += integrate_speed(sigma, j, seg.start, seg.end.min(t), quad)?;
        }
        worst = worst.max((integral - t).abs());
    }
    Ok(worst)
}

/// CSV of `σ` at its sample parameters: `u, re_0, im_0, …, speed`.
pub fn sigma_csv(sigma: &Path) -> Result<String> {
    let dim = sigma.domain().dim();
    let mut out = String::from("u");
    for k in 0..dim {
        let _ = write!(out, ",re_{k},im_{k}");
    }
    out.push_str(",speed\n");
    let mut last_u = f64::NEG_INFINITY;
    for (j, seg) in sigma.segments().iter().enumerate() {
        let SegmentKind::Sampled { params, .. } = &seg.kind else { continue };
        for &u in params.iter().filter(|u| **u >= seg.start && **u <= seg.end) {
            if u <= last_u {
                continue;
            }
            last_u = u;
            let z = seg.eval(u);
            let speed = sigma.segment_speed(j, u)?;
            let _ = write!(out, "{u}");
            for c in &z {
                let _ = write!(out, ",{},{}", c.re, c.im);
            }
            let _ = writeln!(out, ",{speed}");
        }
    }
    Ok(out)
}

/// Euclidean Lipschitz ratio `max |σ(s) − σ(t)| / |s − t|` over the given
/// parameter pairs.
pub fn lipschitz_ratio(sigma: &Path, pairs: &[(f64, f64)]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &(s, t) in pairs {
        if s == t {
            continue;
        }
        let d = cvec::dist(&sigma.eval(s)?, &sigma.eval(t)?);
        worst = worst.max(d / (s - t).abs());
    }
    Ok(worst)
}
