//! The kernel integrals `k_m`, `q_m`, `h_m` against the scaled-chi density
//! `f_W`, and the delta-method scale factor `r_delta` they combine into.
//!
//! With `d_m = t_m(α̃)` and `φ`, `Φ` the standard normal pdf/cdf:
//!
//! ```text
//! k_m(γ) = ∫₀^∞ ( φ(d w + γ) - φ(d w - γ) + γ (Φ(d w - γ) - Φ(-d w - γ)) ) f_W(w) dw
//! q_m(γ) = ∫₀^∞ ( -d w φ(d w + γ) - d w φ(d w - γ) + Φ(d w - γ) - Φ(-d w - γ) ) f_W(w) dw
//! h_m(γ) = ∫₀^∞ ( (d w)² φ(d w + γ) - (d w)² φ(d w - γ) ) f_W(w) dw
//!
//! r_delta(γ) = ( ρ²/(2n) (k_m + h_m - γ q_m)² + 1 - 2ρ² q_m + ρ² q_m² )^{1/2}
//! ```
//!
//! `k_m` and `h_m` are odd in `γ`, `q_m` is even. The three integrands share
//! the same `w` nodes, so one pass evaluates all of them. Every direct
//! evaluation is checked against a doubled-node rule and reports
//! non-convergence if the refinement moves any kernel by more than
//! `abs_tol`.

use crate::distributions::{
    f_w_unchecked, normal_cdf, normal_pdf, t_quantile, DegreesOfFreedom, TwoSidedTailLevel,
};
use crate::quadrature::QuadratureSpec;
use crate::{Error, Result};

/// Beyond this kernel argument the exact values are treated as zero. The
/// largest surviving kernel there (m = 1) is below 2e-8, and it enters the
/// double integrals multiplied by weights that shrink it well under the
/// default tolerance.
pub(crate) const KERNEL_ARG_CLAMP: f64 = 40.0;

/// All fixed scenario constants: sample size `n`, parameter count `p`,
/// residual degrees of freedom `m = n - p`, the known correlation `ρ` of
/// `(θ̂, τ̂)`, the scaled variances `v_θ` and `v_τ`, the nominal level `α`,
/// the preliminary-test size `α̃`, and the cached threshold `d_m = t_m(α̃)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioConfig {
    n: u32,
    p: u32,
    m: DegreesOfFreedom,
    rho: f64,
    v_theta: f64,
    v_tau: f64,
    alpha: TwoSidedTailLevel,
    alpha_tilde: TwoSidedTailLevel,
    d_m: f64,
}

impl ScenarioConfig {
    /// Builds a scenario, deriving `m = n - p` and caching `d_m`.
    ///
    /// `|ρ|` is capped at 0.999: beyond that the conditional variance
    /// `1 - ρ²` in the coverage integrand degenerates.
    pub fn new(
        n: u32,
        p: u32,
        rho: f64,
        v_theta: f64,
        v_tau: f64,
        alpha: TwoSidedTailLevel,
        alpha_tilde: TwoSidedTailLevel,
    ) -> Result<Self> {
        if p < 2 {
            return Err(Error::Domain(
                "need p >= 2 regression parameters (theta and tau)".into(),
            ));
        }
        if p >= n {
            return Err(Error::Domain(format!(
                "need p < n for positive residual degrees of freedom, got n = {n}, p = {p}"
            )));
        }
        if !(rho.is_finite() && rho.abs() <= 0.999) {
            return Err(Error::Domain(format!(
                "|rho| must be at most 0.999, got {rho}"
            )));
        }
        if !(v_theta > 0.0) || !(v_tau > 0.0) {
            return Err(Error::Domain(
                "v_theta and v_tau must be positive".into(),
            ));
        }
        let m = DegreesOfFreedom::new(n - p)?;
        let d_m = t_quantile(m, alpha_tilde);
        Ok(Self {
            n,
            p,
            m,
            rho,
            v_theta,
            v_tau,
            alpha,
            alpha_tilde,
            d_m,
        })
    }

    /// Scenario with `m` given directly (so `p = n - m`), the common way the
    /// sweep configs are written.
    pub fn with_m(
        n: u32,
        m: u32,
        rho: f64,
        v_theta: f64,
        v_tau: f64,
        alpha: TwoSidedTailLevel,
        alpha_tilde: TwoSidedTailLevel,
    ) -> Result<Self> {
        if m >= n {
            return Err(Error::Domain(format!(
                "need m < n, got n = {n}, m = {m}"
            )));
        }
        Self::new(n, n - m, rho, v_theta, v_tau, alpha, alpha_tilde)
    }

    /// Same scenario with a different `ρ` (kernels do not depend on `ρ`, so
    /// sweeps over `ρ` reuse everything else).
    pub fn with_rho(&self, rho: f64) -> Result<Self> {
        if !(rho.is_finite() && rho.abs() <= 0.999) {
            return Err(Error::Domain(format!(
                "|rho| must be at most 0.999, got {rho}"
            )));
        }
        Ok(Self { rho, ..*self })
    }

    pub fn n(&self) -> u32 {
        self.n
    }
    pub fn p(&self) -> u32 {
        self.p
    }
    pub fn m(&self) -> DegreesOfFreedom {
        self.m
    }
    pub fn rho(&self) -> f64 {
        self.rho
    }
    pub fn v_theta(&self) -> f64 {
        self.v_theta
    }
    pub fn v_tau(&self) -> f64 {
        self.v_tau
    }
    /// `v_θτ = ρ (v_θ v_τ)^{1/2}`.
    pub fn v_theta_tau(&self) -> f64 {
        self.rho * (self.v_theta * self.v_tau).sqrt()
    }
    pub fn alpha(&self) -> TwoSidedTailLevel {
        self.alpha
    }
    pub fn alpha_tilde(&self) -> TwoSidedTailLevel {
        self.alpha_tilde
    }
    /// Preliminary-test threshold `d_m = t_m(α̃)`.
    pub fn d_m(&self) -> f64 {
        self.d_m
    }
    /// Interval quantile `t_m(α)`.
    pub fn t_alpha(&self) -> f64 {
        t_quantile(self.m, self.alpha)
    }
}

/// The kernel triple and scale factor evaluated at one `γ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValues {
    pub gamma: f64,
    pub k: f64,
    pub q: f64,
    pub h: f64,
    pub r_delta: f64,
}

/// `r_delta` assembled from kernel values. The non-squared part is computed
/// as `(1 - ρ²) + ρ² (1 - q)²`, which is algebraically identical to
/// `1 - 2ρ² q + ρ² q²` and manifestly positive for `|ρ| < 1`.
#[inline]
pub(crate) fn compose_r(k: f64, q: f64, h: f64, gamma: f64, rho: f64, n: f64) -> f64 {
    let rho2 = rho * rho;
    let bias = k + h - gamma * q;
    let base = (1.0 - rho2) + rho2 * (1.0 - q) * (1.0 - q);
    (rho2 / (2.0 * n) * bias * bias + base).sqrt()
}

/// One pass of all three kernel integrands over a `w` rule whose weights
/// already include `f_W(w)`.
#[inline]
fn kqh_pass(gamma: f64, d_m: f64, dw: &[f64], fw_wt: &[f64]) -> (f64, f64, f64) {
    debug_assert_eq!(dw.len(), fw_wt.len());
    let _ = d_m;
    let (mut k, mut q, mut h) = (0.0, 0.0, 0.0);
    for (&dwi, &wt) in dw.iter().zip(fw_wt) {
        let e_plus = normal_pdf(dwi + gamma);
        let e_minus = normal_pdf(dwi - gamma);
        let c = normal_cdf(dwi - gamma) - normal_cdf(-dwi - gamma);
        let diff = e_plus - e_minus;
        k += (diff + gamma * c) * wt;
        q += (c - dwi * (e_plus + e_minus)) * wt;
        h += dwi * dwi * diff * wt;
    }
    (k, q, h)
}

/// Precomputed `w`-rule data: `d_m w` at the nodes and `f_W(w)`-weighted
/// quadrature weights.
pub(crate) struct WRule {
    pub dw: Vec<f64>,
    pub fw_wt: Vec<f64>,
}

impl WRule {
    pub(crate) fn build(cfg: &ScenarioConfig, quad: &QuadratureSpec, nodes: usize) -> Self {
        let spec = QuadratureSpec {
            nodes_w: nodes,
            ..*quad
        };
        let (wn, ww) = spec.w_rule(cfg.m());
        let dw = wn.iter().map(|&w| cfg.d_m() * w).collect();
        let fw_wt = wn
            .iter()
            .zip(&ww)
            .map(|(&w, &wt)| f_w_unchecked(w, cfg.m()) * wt)
            .collect();
        Self { dw, fw_wt }
    }
}

fn kqh_checked(
    gamma: f64,
    cfg: &ScenarioConfig,
    quad: &QuadratureSpec,
) -> Result<(f64, f64, f64)> {
    if !gamma.is_finite() {
        return Err(Error::Domain(format!("gamma must be finite, got {gamma}")));
    }
    quad.validate(cfg.m())?;
    let coarse = WRule::build(cfg, quad, quad.nodes_w);
    let fine = WRule::build(cfg, quad, quad.nodes_w * 2);
    let (k0, q0, h0) = kqh_pass(gamma, cfg.d_m(), &coarse.dw, &coarse.fw_wt);
    let (k1, q1, h1) = kqh_pass(gamma, cfg.d_m(), &fine.dw, &fine.fw_wt);
    for (what, a, b) in [("k_m", k0, k1), ("q_m", q0, q1), ("h_m", h0, h1)] {
        let shift = (a - b).abs();
        if shift > quad.abs_tol {
            return Err(Error::Quadrature {
                what,
                value: b,
                shift,
                tol: quad.abs_tol,
            });
        }
    }
    Ok((k1, q1, h1))
}

/// Kernel `k_m(γ)`; odd in `γ`, and the bias of the post-model-selection
/// estimator is `-ρ σ v_θ^{1/2} k_m(γ)`.
pub fn k_m(gamma: f64, cfg: &ScenarioConfig, quad: &QuadratureSpec) -> Result<f64> {
    kqh_checked(gamma, cfg, quad).map(|(k, _, _)| k)
}

/// Kernel `q_m(γ)`; even in `γ`.
pub fn q_m(gamma: f64, cfg: &ScenarioConfig, quad: &QuadratureSpec) -> Result<f64> {
    kqh_checked(gamma, cfg, quad).map(|(_, q, _)| q)
}

/// Kernel `h_m(γ)`; odd in `γ`.
pub fn h_m(gamma: f64, cfg: &ScenarioConfig, quad: &QuadratureSpec) -> Result<f64> {
    kqh_checked(gamma, cfg, quad).map(|(_, _, h)| h)
}

/// All three kernels plus `r_delta` at one `γ`, sharing a single pass over
/// the `w` nodes. Uses `cfg`'s `ρ` and `n`.
pub fn r_delta(gamma: f64, cfg: &ScenarioConfig, quad: &QuadratureSpec) -> Result<KernelValues> {
    let (k, q, h) = kqh_checked(gamma, cfg, quad)?;
    Ok(KernelValues {
        gamma,
        k,
        q,
        h,
        r_delta: compose_r(k, q, h, gamma, cfg.rho(), f64::from(cfg.n())),
    })
}

/// The delta-method standard deviation `sd_delta(γ, σ) = σ v_θ^{1/2} r_delta(γ)`.
pub fn sd_delta(
    gamma: f64,
    sigma: f64,
    cfg: &ScenarioConfig,
    quad: &QuadratureSpec,
) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
    }
    Ok(sigma * cfg.v_theta().sqrt() * r_delta(gamma, cfg, quad)?.r_delta)
}

// ---------------------------------------------------------------------------
// Interpolation table for the double integrals.
// ---------------------------------------------------------------------------

/// Uniform grid step of the kernel table.
const TABLE_STEP: f64 = 1.0 / 128.0;
/// Margin points on each side for the 6-point interpolation stencil.
const STENCIL_MARGIN: usize = 3;

/// Tabulated `(k_m, q_m, h_m)` on a uniform grid over `[0, 40]`, evaluated
/// through 6-point Lagrange interpolation with the parities applied for
/// negative arguments and the exact asymptotic zeros beyond the clamp.
///
/// The coverage and scaled-length double integrals evaluate the kernels at
/// `(y + γ)/w` for every node pair; the table makes those sweeps cheap while
/// the direct operations above stay available as the exact path. The table
/// is independent of `ρ` and `n`, so one table serves every `(γ, ρ)` sweep
/// at fixed `(m, α̃)`. Interpolation error is far below the build tolerance
/// (the grid resolves the kernels' unit-scale oscillations with step 2^-7).
#[derive(Clone)]
pub struct KernelTable {
    k: Vec<f64>,
    q: Vec<f64>,
    h: Vec<f64>,
    n_cells: usize,
}

impl KernelTable {
    /// Builds the table on `quad`'s `w` rule and verifies it against the
    /// doubled rule; the largest refinement shift must stay within
    /// `abs_tol`.
    pub fn build(cfg: &ScenarioConfig, quad: &QuadratureSpec) -> Result<Self> {
        quad.validate(cfg.m())?;
        let coarse = WRule::build(cfg, quad, quad.nodes_w);
        let fine = WRule::build(cfg, quad, quad.nodes_w * 2);
        let table = Self::from_rule(cfg, &fine);
        let check = Self::from_rule(cfg, &coarse);
        let mut worst = 0.0_f64;
        for i in 0..table.k.len() {
            worst = worst
                .max((table.k[i] - check.k[i]).abs())
                .max((table.q[i] - check.q[i]).abs())
                .max((table.h[i] - check.h[i]).abs());
        }
        if worst > quad.abs_tol {
            return Err(Error::Quadrature {
                what: "kernel table",
                value: f64::NAN,
                shift: worst,
                tol: quad.abs_tol,
            });
        }
        Ok(table)
    }

    fn from_rule(cfg: &ScenarioConfig, rule: &WRule) -> Self {
        let n_cells = (KERNEL_ARG_CLAMP / TABLE_STEP).round() as usize;
        let len = n_cells + 1 + 2 * STENCIL_MARGIN;
        let mut k = vec![0.0; len];
        let mut q = vec![0.0; len];
        let mut h = vec![0.0; len];
        // Grid index i covers g = (i - MARGIN) * step; the left margin is
        // filled by parity below.
        for i in STENCIL_MARGIN..len {
            let g = (i - STENCIL_MARGIN) as f64 * TABLE_STEP;
            let (ki, qi, hi) = kqh_pass(g, cfg.d_m(), &rule.dw, &rule.fw_wt);
            k[i] = ki;
            q[i] = qi;
            h[i] = hi;
        }
        for j in 1..=STENCIL_MARGIN {
            k[STENCIL_MARGIN - j] = -k[STENCIL_MARGIN + j];
            q[STENCIL_MARGIN - j] = q[STENCIL_MARGIN + j];
            h[STENCIL_MARGIN - j] = -h[STENCIL_MARGIN + j];
        }
        Self { k, q, h, n_cells }
    }

    /// Interpolated `(k, q, h)` at `g`, exact zeros beyond the clamp.
    #[inline]
    pub fn eval(&self, g: f64) -> (f64, f64, f64) {
        let a = g.abs();
        if a >= KERNEL_ARG_CLAMP {
            return (0.0, 0.0, 0.0);
        }
        let u = a / TABLE_STEP;
        let cell = (u as usize).min(self.n_cells - 1);
        let t = u - cell as f64;
        let base = cell + STENCIL_MARGIN;

        // 6-point Lagrange weights on the uniform stencil at offsets
        // -2..=3 around the cell, via prefix/suffix products (no divisions).
        const INV_DENOM: [f64; 6] = [
            -1.0 / 120.0,
            1.0 / 24.0,
            -1.0 / 12.0,
            1.0 / 12.0,
            -1.0 / 24.0,
            1.0 / 120.0,
        ];
        let f = [t + 2.0, t + 1.0, t, t - 1.0, t - 2.0, t - 3.0];
        let mut pre = [1.0; 6];
        for j in 1..6 {
            pre[j] = pre[j - 1] * f[j - 1];
        }
        let mut suf = [1.0; 6];
        for j in (0..5).rev() {
            suf[j] = suf[j + 1] * f[j + 1];
        }

        let (mut k, mut q, mut h) = (0.0, 0.0, 0.0);
        for j in 0..6 {
            let w = pre[j] * suf[j] * INV_DENOM[j];
            let idx = base + j - 2;
            k += w * self.k[idx];
            q += w * self.q[idx];
            h += w * self.h[idx];
        }
        if g < 0.0 {
            (-k, q, -h)
        } else {
            (k, q, h)
        }
    }
}
