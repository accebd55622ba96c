//! Scaled expected length `SEL_delta(γ, ρ)`: the expected length of the
//! interval centered on the smoothed estimator divided by the expected
//! length of the full-model interval with coverage `c_min`,
//!
//! ```text
//! SEL(γ, ρ) = t_m(α)/t_m(1-c_min) · E(W)^{-1} ·
//!             ∫₀^∞ ∫ w r_delta((y+γ)/w) φ(y) dy f_W(w) dw
//! ```

use rayon::prelude::*;

use crate::coverage::min_coverage_with;
use crate::distributions::{expected_w, t_quantile, TwoSidedTailLevel};
use crate::engine::Evaluator;
use crate::kernels::ScenarioConfig;
use crate::quadrature::QuadratureSpec;
use crate::{Error, Result};

/// Default search range for the minimum-coverage computation a curve needs.
pub const DEFAULT_GAMMA_MAX: f64 = 15.0;

/// One evaluated scaled-expected-length point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelPoint {
    pub gamma: f64,
    pub rho: f64,
    pub sel: f64,
    /// The minimum coverage that fixed the comparison interval's level.
    pub c_min_used: f64,
}

/// Scaled expected length at one point, with `c_min` supplied by the caller
/// (it depends on `ρ` only, so curves compute it once).
pub fn sel_delta(
    gamma: f64,
    rho: f64,
    c_min: f64,
    cfg: &ScenarioConfig,
    quad: &QuadratureSpec,
) -> Result<SelPoint> {
    sel_delta_with(&Evaluator::new(cfg, quad)?, gamma, rho, c_min)
}

/// Scaled expected length through a prebuilt evaluator.
pub fn sel_delta_with(eval: &Evaluator, gamma: f64, rho: f64, c_min: f64) -> Result<SelPoint> {
    if !(c_min > 0.5 && c_min < 1.0) {
        return Err(Error::Domain(format!(
            "c_min must lie in (0.5, 1), got {c_min}"
        )));
    }
    let cfg = eval.cfg();
    let t_low = t_quantile(cfg.m(), TwoSidedTailLevel::new(1.0 - c_min)?);
    let prefactor = eval.t_alpha() / t_low / expected_w(cfg.m());
    let integral = eval.sel_integral(gamma, rho)?;
    Ok(SelPoint {
        gamma,
        rho,
        sel: prefactor * integral,
        c_min_used: c_min,
    })
}

/// Whole curve over a `γ` grid: computes `c_min` for this `ρ` once, then
/// maps [`sel_delta_with`] over the grid in parallel.
pub fn sel_curve(
    rho: f64,
    gamma_grid: &[f64],
    cfg: &ScenarioConfig,
    quad: &QuadratureSpec,
) -> Result<Vec<SelPoint>> {
    sel_curve_with(&Evaluator::new(cfg, quad)?, rho, gamma_grid)
}

/// Curve through a prebuilt evaluator.
pub fn sel_curve_with(eval: &Evaluator, rho: f64, gamma_grid: &[f64]) -> Result<Vec<SelPoint>> {
    if gamma_grid.is_empty() {
        return Err(Error::Domain("gamma grid must be non-empty".into()));
    }
    let c_min = min_coverage_with(eval, rho, DEFAULT_GAMMA_MAX)?.c_min;
    gamma_grid
        .par_iter()
        .map(|&g| sel_delta_with(eval, g, rho, c_min))
        .collect()
}
