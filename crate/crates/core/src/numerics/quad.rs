//! Adaptive Simpson quadrature.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadConfig {
    /// Absolute tolerance for one call (one segment).
    pub tol: f64,
    pub max_depth: u32,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self { tol: 1e-8, max_depth: 30 }
    }
}

impl QuadConfig {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidConfig(format!("quadrature tolerance {} must be positive", self.tol)));
        }
        if self.max_depth < 4 {
            return Err(Error::InvalidConfig(format!("max_depth {} must be at least 4", self.max_depth)));
        }
        Ok(())
    }
}

/// `∫_a^b f` by adaptive Simpson with Richardson correction.
///
/// The node set depends only on `f`, `a`, `b` and `cfg`. Returns `0` when
/// `a == b`.
pub fn adaptive_simpson<F>(mut f: F, a: f64, b: f64, cfg: &QuadConfig) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    cfg.validate()?;
    if a == b {
        return Ok(0.0);
    }
    if !(a < b) {
        return Err(Error::InvalidConfig(format!("integration bounds [{a}, {b}] are reversed")));
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let panel = Panel { a, m, b, fa, fm, fb, whole };
    refine(&mut f, panel, cfg.tol, 0, cfg.max_depth)
}

#[derive(Clone, Copy)]
struct Panel {
    a: f64,
    m: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
}

fn refine<F>(f: &mut F, p: Panel, tol: f64, depth: u32, max_depth: u32) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let lm = 0.5 * (p.a + p.m);
    let rm = 0.5 * (p.m + p.b);
    let (flm, frm) = (f(lm), f(rm));
    let left = (p.m - p.a) / 6.0 * (p.fa + 4.0 * flm + p.fm);
    let right = (p.b - p.m) / 6.0 * (p.fm + 4.0 * frm + p.fb);
    let sum = left + right;
    let delta = sum - p.whole;
    if !delta.is_finite() {
        return Err(Error::QuadratureNonConvergence { a: p.a, b: p.b });
    }
    // Rounding floor: differences below a few ulps of the panel value carry no signal.
    let floor = 64.0 * f64::EPSILON * sum.abs();
    if delta.abs() <= 15.0 * tol.max(floor) || lm <= p.a || rm >= p.b {
        return Ok(sum + delta / 15.0);
    }
    if depth >= max_depth {
        return Err(Error::QuadratureNonConvergence { a: p.a, b: p.b });
    }
    let lhs = Panel { a: p.a, m: lm, b: p.m, fa: p.fa, fm: flm, fb: p.fm, whole: left };
    let rhs = Panel { a: p.m, m: rm, b: p.b, fa: p.fm, fm: frm, fb: p.fb, whole: right };
    Ok(refine(f, lhs, 0.5 * tol, depth + 1, max_depth)? + refine(f, rhs, 0.5 * tol, depth + 1, max_depth)?)
}
