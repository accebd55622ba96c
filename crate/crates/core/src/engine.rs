//! Shared evaluator for the semi-infinite `(w, y)` double integrals behind
//! the coverage probability and the scaled expected length.
//!
//! Both integrals weight an inner function of `(y + γ)/w` by
//! `φ(y) dy f_W(w) dw`, so they share one node set and one kernel table.
//! Building an [`Evaluator`] costs a kernel-table construction (a few
//! hundred milliseconds); each coverage or length evaluation afterwards is
//! a cheap double sum, which is what makes the minimum-coverage search and
//! the `(γ, ρ)` sweeps practical. The table does not depend on `ρ` or `n`,
//! so a single evaluator serves a whole sweep at fixed `(m, α̃)`.

use crate::distributions::{f_w_unchecked, normal_cdf, normal_pdf};
use crate::kernels::{compose_r, KernelTable, ScenarioConfig};
use crate::quadrature::QuadratureSpec;
use crate::{Error, Result};

pub struct Evaluator {
    cfg: ScenarioConfig,
    quad: QuadratureSpec,
    table: KernelTable,
    w_nodes: Vec<f64>,
    w_fw_wt: Vec<f64>,
    y_nodes: Vec<f64>,
    y_phi_wt: Vec<f64>,
    t_alpha: f64,
}

impl Evaluator {
    /// Builds the kernel table (verified against a doubled rule) and the
    /// weighted node sets of the outer double integral.
    pub fn new(cfg: &ScenarioConfig, quad: &QuadratureSpec) -> Result<Self> {
        quad.validate(cfg.m())?;
        let table = KernelTable::build(cfg, quad)?;
        let (w_nodes, w_weights) = quad.w_rule(cfg.m());
        let w_fw_wt = w_nodes
            .iter()
            .zip(&w_weights)
            .map(|(&w, &wt)| f_w_unchecked(w, cfg.m()) * wt)
            .collect();
        let (y_nodes, y_weights) = quad.y_rule();
        let y_phi_wt = y_nodes
            .iter()
            .zip(&y_weights)
            .map(|(&y, &wt)| normal_pdf(y) * wt)
            .collect();
        Ok(Self {
            cfg: *cfg,
            quad: *quad,
            table,
            w_nodes,
            w_fw_wt,
            y_nodes,
            y_phi_wt,
            t_alpha: cfg.t_alpha(),
        })
    }

    /// Same evaluator with the scenario's `ρ` replaced. The kernel table
    /// and node sets do not depend on `ρ`, so this is a cheap copy; it is
    /// what lets a sweep share one table across correlations while the
    /// simulation helpers read `ρ` from the evaluator's scenario.
    pub fn with_rho(&self, rho: f64) -> Result<Self> {
        Ok(Self {
            cfg: self.cfg.with_rho(rho)?,
            table: self.table.clone(),
            w_nodes: self.w_nodes.clone(),
            w_fw_wt: self.w_fw_wt.clone(),
            y_nodes: self.y_nodes.clone(),
            y_phi_wt: self.y_phi_wt.clone(),
            ..*self
        })
    }

    pub fn cfg(&self) -> &ScenarioConfig {
        &self.cfg
    }

    pub fn quad(&self) -> &QuadratureSpec {
        &self.quad
    }

    /// `t_m(α)`, cached.
    pub fn t_alpha(&self) -> f64 {
        self.t_alpha
    }

    /// Interpolated kernel triple at one argument; the fast path the Monte
    /// Carlo harness uses to form the realized intervals.
    pub fn kernels_at(&self, g: f64) -> (f64, f64, f64) {
        self.table.eval(g)
    }

    /// Interpolated `r_delta` at one argument for a given `ρ`.
    pub fn r_delta_at(&self, g: f64, rho: f64) -> f64 {
        let (k, q, h) = self.table.eval(g);
        compose_r(k, q, h, g, rho, f64::from(self.cfg.n()))
    }

    fn check_point(&self, gamma: f64, rho: f64) -> Result<()> {
        if !gamma.is_finite() {
            return Err(Error::Domain(format!("gamma must be finite, got {gamma}")));
        }
        if !(rho.is_finite() && rho.abs() <= 0.999) {
            return Err(Error::Domain(format!(
                "|rho| must be at most 0.999, got {rho}"
            )));
        }
        Ok(())
    }

    /// Coverage probability of the interval centered on the smoothed
    /// estimator:
    ///
    /// ```text
    /// ∫₀^∞ ∫ Ψ(ℓ(y+γ, w, ρ), u(y+γ, w, ρ); ρ y, 1-ρ²) φ(y) dy f_W(w) dw
    /// ```
    pub fn cp(&self, gamma: f64, rho: f64) -> Result<f64> {
        self.check_point(gamma, rho)?;
        let n = f64::from(self.cfg.n());
        let s_inv = 1.0 / (1.0 - rho * rho).sqrt();
        let mut acc = 0.0;
        for (&w, &fw_wt) in self.w_nodes.iter().zip(&self.w_fw_wt) {
            let inv_w = 1.0 / w;
            let tw = self.t_alpha * w;
            let rw = rho * w;
            let mut inner = 0.0;
            for (&y, &phi_wt) in self.y_nodes.iter().zip(&self.y_phi_wt) {
                let g = (y + gamma) * inv_w;
                let (k, q, h) = self.table.eval(g);
                let r = compose_r(k, q, h, g, rho, n);
                let center = rw * k - rho * y;
                let half = tw * r;
                let psi = normal_cdf((center + half) * s_inv)
                    - normal_cdf((center - half) * s_inv);
                inner += psi * phi_wt;
            }
            acc += inner * fw_wt;
        }
        Ok(acc.clamp(0.0, 1.0))
    }

    /// The double integral of the scaled-expected-length formula:
    /// `∫₀^∞ ∫ w r_delta((y+γ)/w) φ(y) dy f_W(w) dw`.
    pub fn sel_integral(&self, gamma: f64, rho: f64) -> Result<f64> {
        self.check_point(gamma, rho)?;
        let n = f64::from(self.cfg.n());
        let mut acc = 0.0;
        for (&w, &fw_wt) in self.w_nodes.iter().zip(&self.w_fw_wt) {
            let inv_w = 1.0 / w;
            let mut inner = 0.0;
            for (&y, &phi_wt) in self.y_nodes.iter().zip(&self.y_phi_wt) {
                let g = (y + gamma) * inv_w;
                let (k, q, h) = self.table.eval(g);
                inner += compose_r(k, q, h, g, rho, n) * phi_wt;
            }
            acc += inner * w * fw_wt;
        }
        Ok(acc)
    }
}
