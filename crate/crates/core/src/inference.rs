//! Data-facing estimators: least-squares fit, the preliminary-test
//! post-model-selection estimator, the ideal smoothed estimate, and the
//! realized confidence intervals.

use nalgebra::{DMatrix, DVector};

use crate::distributions::{t_quantile, DegreesOfFreedom, TwoSidedTailLevel};
use crate::kernels::{self, ScenarioConfig};
use crate::quadrature::QuadratureSpec;
use crate::{Error, Result};

/// A full-rank `n × p` design with `p < n`. The first column belongs to the
/// parameter of interest `θ`, the second to `τ` (the coefficient the
/// simpler model sets to zero).
#[derive(Debug, Clone)]
pub struct DesignMatrix {
    x: DMatrix<f64>,
}

impl DesignMatrix {
    pub fn new(x: DMatrix<f64>) -> Result<Self> {
        let (n, p) = x.shape();
        if p < 2 {
            return Err(Error::Domain(
                "design needs at least the theta and tau columns".into(),
            ));
        }
        if p >= n {
            return Err(Error::Domain(format!(
                "design must be tall: got n = {n}, p = {p}"
            )));
        }
        Ok(Self { x })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }
}

/// A fitted full model, together with the design constants derived from
/// `(X^T X)^{-1}` (they are known, not estimated).
#[derive(Debug, Clone)]
pub struct FittedModel {
    pub beta_hat: DVector<f64>,
    pub theta_hat: f64,
    pub tau_hat: f64,
    /// `σ̂ = (RSS / m)^{1/2}`, positive (an exact fit is rejected).
    pub sigma_hat: f64,
    /// `γ̂ = τ̂ / (σ̂ v_τ^{1/2})`.
    pub gamma_hat: f64,
    pub v_theta: f64,
    pub v_tau: f64,
    pub v_theta_tau: f64,
    pub rho: f64,
    pub m: DegreesOfFreedom,
}

impl FittedModel {
    /// Scenario constants implied by this fit's design.
    pub fn scenario(
        &self,
        n: u32,
        p: u32,
        alpha: TwoSidedTailLevel,
        alpha_tilde: TwoSidedTailLevel,
    ) -> Result<ScenarioConfig> {
        ScenarioConfig::new(n, p, self.rho, self.v_theta, self.v_tau, alpha, alpha_tilde)
    }
}

/// A closed interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

/// Least-squares fit through a QR decomposition (the normal-equations
/// inverse defines the estimator; the decomposition computes it stably,
/// and `(X^T X)^{-1} = R^{-1} R^{-T}` reuses the same factor).
pub fn fit(design: &DesignMatrix, y: &DVector<f64>) -> Result<FittedModel> {
    let x = design.matrix();
    let (n, p) = x.shape();
    if y.len() != n {
        return Err(Error::Domain(format!(
            "response length {} does not match n = {n}",
            y.len()
        )));
    }

    // Column-pivoted QR exposes rank deficiency on the R diagonal.
    let piv = x.clone().col_piv_qr();
    let r_piv = piv.r();
    let scale = r_piv[(0, 0)].abs();
    for i in 0..p {
        if r_piv[(i, i)].abs() <= scale * 1e-12 {
            return Err(Error::RankDeficient { column: i });
        }
    }

    let qr = x.clone().qr();
    let q = qr.q();
    let r = qr.r();
    let qty = q.transpose() * y;
    let beta_hat = r
        .solve_upper_triangular(&qty)
        .ok_or(Error::RankDeficient { column: 0 })?;

    let resid = y - x * &beta_hat;
    let rss = resid.norm_squared();
    let m = DegreesOfFreedom::new((n - p) as u32)?;
    if rss <= y.norm_squared() * 1e-24 {
        return Err(Error::ExactFit);
    }
    let sigma_hat = (rss / m.as_f64()).sqrt();

    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(p, p))
        .ok_or(Error::RankDeficient { column: 0 })?;
    let gram_inv = &r_inv * r_inv.transpose();
    let v_theta = gram_inv[(0, 0)];
    let v_tau = gram_inv[(1, 1)];
    let v_theta_tau = gram_inv[(0, 1)];
    let rho = v_theta_tau / (v_theta * v_tau).sqrt();

    let theta_hat = beta_hat[0];
    let tau_hat = beta_hat[1];
    let gamma_hat = tau_hat / (sigma_hat * v_tau.sqrt());

    Ok(FittedModel {
        beta_hat,
        theta_hat,
        tau_hat,
        sigma_hat,
        gamma_hat,
        v_theta,
        v_tau,
        v_theta_tau,
        rho,
        m,
    })
}

/// The post-model-selection estimator: the simpler-model estimate
/// `θ̂ - (v_θτ/v_τ) τ̂` when the preliminary test accepts
/// (`|γ̂| <= d_m`, boundary included), otherwise `θ̂`.
pub fn theta_pms(fit: &FittedModel, cfg: &ScenarioConfig) -> f64 {
    if fit.gamma_hat.abs() <= cfg.d_m() {
        fit.theta_hat - cfg.v_theta_tau() / cfg.v_tau() * fit.tau_hat
    } else {
        fit.theta_hat
    }
}

/// The ideal (infinite-replication) bootstrap smoothed estimate
/// `θ̃ = θ̂ - ρ σ̂ v_θ^{1/2} k_m(γ̂)`.
pub fn theta_tilde(fit: &FittedModel, cfg: &ScenarioConfig, quad: &QuadratureSpec) -> Result<f64> {
    let k = kernels::k_m(fit.gamma_hat, cfg, quad)?;
    Ok(fit.theta_hat - cfg.rho() * fit.sigma_hat * cfg.v_theta().sqrt() * k)
}

/// The realized interval centered on the smoothed estimate:
/// `θ̃ ± t_m(α) σ̂ v_θ^{1/2} r_delta(γ̂)`.
pub fn j_delta(fit: &FittedModel, cfg: &ScenarioConfig, quad: &QuadratureSpec) -> Result<Interval> {
    let kv = kernels::r_delta(fit.gamma_hat, cfg, quad)?;
    let sv = fit.sigma_hat * cfg.v_theta().sqrt();
    let center = fit.theta_hat - cfg.rho() * sv * kv.k;
    let half = cfg.t_alpha() * sv * kv.r_delta;
    Ok(Interval {
        lower: center - half,
        upper: center + half,
    })
}

/// The usual full-model interval with coverage `c`:
/// `θ̂ ± t_m(1-c) σ̂ v_θ^{1/2}`.
pub fn usual_interval(fit: &FittedModel, c: f64, cfg: &ScenarioConfig) -> Result<Interval> {
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::Domain(format!("coverage must lie in (0, 1), got {c}")));
    }
    let half = t_quantile(cfg.m(), TwoSidedTailLevel::new(1.0 - c)?)
        * fit.sigma_hat
        * cfg.v_theta().sqrt();
    Ok(Interval {
        lower: fit.theta_hat - half,
        upper: fit.theta_hat + half,
    })
}
