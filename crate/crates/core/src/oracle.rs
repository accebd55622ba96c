//! Independent verification machinery: the exponential-family matrix form
//! of the delta-method standard deviation (an exact cross-check of the
//! kernel composition), a full-pipeline Monte Carlo simulation of coverage
//! and length, and finite-replication parametric bootstrap smoothing.
//!
//! The sufficient statistic of the model is `ŝ = (y^T y, β̂)` with natural
//! parameter `η = (-1/(2σ²), X^T X β / σ²)`. The general delta-method
//! formula `sd = (cov_*^T V^{-1} cov_*)^{1/2}` specializes to closed block
//! forms for `V(η) = cov(ŝ)`, its inverse, and
//! `cov_*(η) = cov(ŝ, θ̂_pms)`; evaluating them must reproduce
//! `σ v_θ^{1/2} r_delta(γ)` exactly, which is what ties the kernel integrals
//! to the smoothed estimator they describe.
//!
//! All simulations draw replication chunks on separate ChaCha streams, so
//! results are bit-for-bit reproducible for a fixed seed regardless of the
//! number of worker threads.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use rayon::prelude::*;

use crate::distributions::{t_quantile, DegreesOfFreedom, TwoSidedTailLevel};
use crate::engine::Evaluator;
use crate::inference::{DesignMatrix, FittedModel};
use crate::kernels::{self, ScenarioConfig};
use crate::quadrature::QuadratureSpec;
use crate::{Error, Result};

/// Replications per RNG stream; fixed so that scheduling cannot change
/// which stream serves which replication.
const CHUNK: u64 = 4096;

/// True parameter values on the simulation side: `β = (θ, τ, λ)`, the error
/// scale `σ`, and the derived standardized departure `γ = τ/(σ v_τ^{1/2})`.
#[derive(Debug, Clone)]
pub struct TrueParameters {
    beta: DVector<f64>,
    sigma: f64,
    gamma: f64,
}

impl TrueParameters {
    pub fn new(beta: DVector<f64>, sigma: f64, v_tau: f64) -> Result<Self> {
        if beta.len() < 2 {
            return Err(Error::Domain("beta needs at least (theta, tau)".into()));
        }
        if !(sigma > 0.0) || !(v_tau > 0.0) {
            return Err(Error::Domain("sigma and v_tau must be positive".into()));
        }
        let gamma = beta[1] / (sigma * v_tau.sqrt());
        Ok(Self { beta, sigma, gamma })
    }

    /// Parameters hitting a requested `γ` exactly: `τ = γ σ v_τ^{1/2}`,
    /// nuisance components zero.
    pub fn for_gamma(gamma: f64, sigma: f64, theta: f64, p: usize, v_tau: f64) -> Result<Self> {
        if p < 2 {
            return Err(Error::Domain("need p >= 2".into()));
        }
        let mut beta = DVector::zeros(p);
        beta[0] = theta;
        beta[1] = gamma * sigma * v_tau.sqrt();
        Self::new(beta, sigma, v_tau)
    }

    pub fn beta(&self) -> &DVector<f64> {
        &self.beta
    }
    pub fn theta(&self) -> f64 {
        self.beta[0]
    }
    pub fn tau(&self) -> f64 {
        self.beta[1]
    }
    pub fn sigma(&self) -> f64 {
        self.sigma
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

/// The sufficient statistic `ŝ = (y^T y, β̂)`.
#[derive(Debug, Clone)]
pub struct SufficientStatistic {
    pub yty: f64,
    pub beta_hat: DVector<f64>,
}

impl SufficientStatistic {
    /// Residual sum of squares implied by the statistic; nonnegative for
    /// any genuine data set.
    pub fn residual_ss(&self, design: &DesignMatrix) -> f64 {
        let x = design.matrix();
        let xb = x * &self.beta_hat;
        self.yty - xb.norm_squared()
    }
}

/// The natural parameter `η` and cumulant `ψ(η)` of the exponential-family
/// form of the model density.
#[derive(Debug, Clone)]
pub struct NaturalParameter {
    pub eta: DVector<f64>,
    pub psi: f64,
}

impl NaturalParameter {
    pub fn from_params(params: &TrueParameters, design: &DesignMatrix) -> Self {
        let x = design.matrix();
        let sig2 = params.sigma * params.sigma;
        let sb = x.transpose() * (x * &params.beta);
        let mut eta = DVector::zeros(x.ncols() + 1);
        eta[0] = -1.0 / (2.0 * sig2);
        for i in 0..x.ncols() {
            eta[i + 1] = sb[i] / sig2;
        }
        let psi = params.beta.dot(&sb) / (2.0 * sig2) + x.nrows() as f64 / 2.0 * sig2.ln();
        Self { eta, psi }
    }
}

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationReport {
    pub point_estimate: f64,
    pub standard_error: f64,
    pub replications: u64,
    pub seed: u64,
}

/// `V(η) = cov(ŝ)`, assembled from the closed block form
/// `σ² [[4 β^T S β + 2nσ², 2β^T], [2β, S^{-1}]]` with `S = X^T X`.
pub fn v_eta(params: &TrueParameters, design: &DesignMatrix) -> Result<DMatrix<f64>> {
    let x = design.matrix();
    let (n, p) = x.shape();
    let s = x.transpose() * x;
    let s_inv = s
        .clone()
        .cholesky()
        .ok_or(Error::RankDeficient { column: 0 })?
        .inverse();
    let sb = &s * &params.beta;
    let sig2 = params.sigma * params.sigma;
    let mut v = DMatrix::zeros(p + 1, p + 1);
    v[(0, 0)] = 4.0 * params.beta.dot(&sb) + 2.0 * n as f64 * sig2;
    for i in 0..p {
        v[(0, i + 1)] = 2.0 * params.beta[i];
        v[(i + 1, 0)] = 2.0 * params.beta[i];
        for j in 0..p {
            v[(i + 1, j + 1)] = s_inv[(i, j)];
        }
    }
    Ok(v * sig2)
}

/// The closed-form inverse of [`v_eta`]:
/// `σ^{-2} [[1/(2nσ²), -β^T S/(nσ²)], [-S β/(nσ²), (I + 2 S β β^T/(nσ²)) S]]`.
pub fn v_eta_inverse(params: &TrueParameters, design: &DesignMatrix) -> DMatrix<f64> {
    let x = design.matrix();
    let (n, p) = x.shape();
    let s = x.transpose() * x;
    let sb = &s * &params.beta;
    let sig2 = params.sigma * params.sigma;
    let n_sig2 = n as f64 * sig2;
    let mut v = DMatrix::zeros(p + 1, p + 1);
    v[(0, 0)] = 1.0 / (2.0 * n_sig2);
    for i in 0..p {
        v[(0, i + 1)] = -sb[i] / n_sig2;
        v[(i + 1, 0)] = -sb[i] / n_sig2;
        for j in 0..p {
            v[(i + 1, j + 1)] = s[(i, j)] + 2.0 / n_sig2 * sb[i] * sb[j];
        }
    }
    v / sig2
}

/// `cov_*(η) = cov(ŝ, θ̂_pms)` in its kernel closed form:
/// `σ² (2θ - ρσ v_θ^{1/2}(γ q + k + h), v_θ(1 - ρ² q), ρ (v_θ v_τ)^{1/2}(1 - q), 0, …)`.
pub fn cov_star(
    params: &TrueParameters,
    design: &DesignMatrix,
    cfg: &ScenarioConfig,
    quad: &QuadratureSpec,
) -> Result<DVector<f64>> {
    let kv = kernels::r_delta(params.gamma, cfg, quad)?;
    let p = design.p();
    let sig2 = params.sigma * params.sigma;
    let rho = cfg.rho();
    let sqrt_v_theta = cfg.v_theta().sqrt();
    let mut c = DVector::zeros(p + 1);
    c[0] = 2.0 * params.theta()
        - rho * params.sigma * sqrt_v_theta * (params.gamma * kv.q + kv.k + kv.h);
    c[1] = cfg.v_theta() * (1.0 - rho * rho * kv.q);
    c[2] = rho * (cfg.v_theta() * cfg.v_tau()).sqrt() * (1.0 - kv.q);
    Ok(c * sig2)
}

/// The general delta-method standard deviation
/// `(cov_*^T V^{-1} cov_*)^{1/2}`, which must reproduce
/// `σ v_θ^{1/2} r_delta(γ)`.
pub fn sd_delta_matrix_form(
    params: &TrueParameters,
    design: &DesignMatrix,
    cfg: &ScenarioConfig,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let c = cov_star(params, design, cfg, quad)?;
    let v_inv = v_eta_inverse(params, design);
    let qf = c.dot(&(&v_inv * &c));
    if qf <= 0.0 {
        return Err(Error::Domain(format!(
            "quadratic form is not positive: {qf:e} (gamma = {}, sigma = {})",
            params.gamma, params.sigma
        )));
    }
    Ok(qf.sqrt())
}

/// Builds an `n × p` design realizing requested `(v_θ, v_τ, ρ)` exactly:
/// the target `(X^T X)^{-1}` has the 2x2 block `[[v_θ, ρ(v_θ v_τ)^{1/2}],
/// [·, v_τ]]` and identity elsewhere; its Cholesky factor is inverted and
/// embedded as the first `p` rows of `X` (remaining rows zero).
pub fn design_for(n: u32, p: u32, v_theta: f64, v_tau: f64, rho: f64) -> Result<DesignMatrix> {
    if p < 2 || p >= n {
        return Err(Error::Domain(format!(
            "design_for needs 2 <= p < n, got n = {n}, p = {p}"
        )));
    }
    if !(v_theta > 0.0 && v_tau > 0.0 && rho.abs() < 1.0) {
        return Err(Error::Domain(
            "need positive variances and |rho| < 1".into(),
        ));
    }
    let p = p as usize;
    let mut target = DMatrix::identity(p, p);
    target[(0, 0)] = v_theta;
    target[(1, 1)] = v_tau;
    target[(0, 1)] = rho * (v_theta * v_tau).sqrt();
    target[(1, 0)] = target[(0, 1)];
    let chol = target
        .cholesky()
        .ok_or_else(|| Error::Domain("target inverse Gram matrix is not positive definite".into()))?;
    let l_inv = chol
        .l()
        .solve_lower_triangular(&DMatrix::identity(p, p))
        .ok_or_else(|| Error::Domain("could not invert Cholesky factor".into()))?;
    let mut x = DMatrix::zeros(n as usize, p);
    x.view_mut((0, 0), (p, p)).copy_from(&l_inv);
    DesignMatrix::new(x)
}

/// Checks that the design's implied `(v_θ, v_τ, ρ)` agree with the scenario
/// constants the formulas will use.
fn check_design(cfg: &ScenarioConfig, design: &DesignMatrix) -> Result<()> {
    let x = design.matrix();
    if x.nrows() != cfg.n() as usize || x.ncols() != cfg.p() as usize {
        return Err(Error::Domain(format!(
            "design is {}x{}, scenario says {}x{}",
            x.nrows(),
            x.ncols(),
            cfg.n(),
            cfg.p()
        )));
    }
    let gram_inv = (x.transpose() * x)
        .cholesky()
        .ok_or(Error::RankDeficient { column: 0 })?
        .inverse();
    let ok = |a: f64, b: f64| (a - b).abs() <= 1e-8 * a.abs().max(b.abs()).max(1.0);
    let rho_x = gram_inv[(0, 1)] / (gram_inv[(0, 0)] * gram_inv[(1, 1)]).sqrt();
    if !ok(gram_inv[(0, 0)], cfg.v_theta()) || !ok(gram_inv[(1, 1)], cfg.v_tau()) || !ok(rho_x, cfg.rho()) {
        return Err(Error::Domain(format!(
            "design constants (v_theta {}, v_tau {}, rho {}) do not match the scenario ({}, {}, {})",
            gram_inv[(0, 0)],
            gram_inv[(1, 1)],
            rho_x,
            cfg.v_theta(),
            cfg.v_tau(),
            cfg.rho()
        )));
    }
    Ok(())
}

/// Draws one `W = σ̂/σ` variate, i.e. `(χ²_m / m)^{1/2}`.
pub fn sample_w<R: Rng + ?Sized>(rng: &mut R, m: DegreesOfFreedom) -> f64 {
    let chi2 = ChiSquared::new(m.as_f64()).expect("m >= 1");
    (chi2.sample(rng) / m.as_f64()).sqrt()
}

/// Cached factorization of a fixed design, reused across replications.
struct SimDesign {
    q: DMatrix<f64>,
    r: DMatrix<f64>,
    mu: DVector<f64>,
    n: usize,
    p: usize,
}

impl SimDesign {
    fn new(design: &DesignMatrix, params: &TrueParameters) -> Result<Self> {
        let x = design.matrix();
        if params.beta.len() != x.ncols() {
            return Err(Error::Domain(format!(
                "beta has {} components, design has p = {}",
                params.beta.len(),
                x.ncols()
            )));
        }
        let qr = x.clone().qr();
        let mu = x * &params.beta;
        Ok(Self {
            q: qr.q(),
            r: qr.r(),
            mu,
            n: x.nrows(),
            p: x.ncols(),
        })
    }
}

/// Per-replication fit summary produced by the shared simulation loop.
struct RepFit {
    theta_hat: f64,
    tau_hat: f64,
    sigma_hat: f64,
    gamma_hat: f64,
}

/// Runs `reps` replications, reducing each chunk with `fold` into a partial
/// of type `A`, then combining partials in chunk order. Deterministic for a
/// fixed seed independent of thread count.
fn run_sim<A, F>(
    sim: &SimDesign,
    params: &TrueParameters,
    v_tau: f64,
    reps: u64,
    seed: u64,
    init: A,
    fold: F,
) -> Vec<A>
where
    A: Clone + Send + Sync,
    F: Fn(&mut A, &RepFit) + Sync,
{
    let m = (sim.n - sim.p) as f64;
    let sqrt_v_tau = v_tau.sqrt();
    let n_chunks = reps.div_ceil(CHUNK);
    (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk + 1);
            let lo = chunk * CHUNK;
            let hi = ((chunk + 1) * CHUNK).min(reps);
            let mut acc = init.clone();
            let mut y = DVector::zeros(sim.n);
            let mut qty = DVector::zeros(sim.p);
            let mut beta = DVector::zeros(sim.p);
            let mut fitted = DVector::zeros(sim.n);
            for _ in lo..hi {
                for i in 0..sim.n {
                    y[i] = sim.mu[i] + params.sigma * rng.sample::<f64, _>(StandardNormal);
                }
                qty.gemv_tr(1.0, &sim.q, &y, 0.0);
                beta.copy_from(&qty);
                sim.r.solve_upper_triangular_mut(&mut beta);
                fitted.gemv(1.0, &sim.q, &qty, 0.0);
                let mut rss = 0.0;
                for i in 0..sim.n {
                    let d = y[i] - fitted[i];
                    rss += d * d;
                }
                let sigma_hat = (rss / m).sqrt();
                let rep = RepFit {
                    theta_hat: beta[0],
                    tau_hat: beta[1],
                    sigma_hat,
                    gamma_hat: beta[1] / (sigma_hat * sqrt_v_tau),
                };
                fold(&mut acc, &rep);
            }
            acc
        })
        .collect()
}

/// Empirical coverage of the realized smoothed-estimator interval over
/// seeded replications of the full pipeline: draw `y = Xβ + ε`, fit, form
/// the interval, count hits on `θ`. Binomial standard error.
pub fn simulate_coverage(
    params: &TrueParameters,
    design: &DesignMatrix,
    cfg: &ScenarioConfig,
    quad: &QuadratureSpec,
    reps: u64,
    seed: u64,
) -> Result<SimulationReport> {
    simulate_coverage_with(&Evaluator::new(cfg, quad)?, params, design, reps, seed)
}

/// As [`simulate_coverage`], with a prebuilt evaluator.
pub fn simulate_coverage_with(
    eval: &Evaluator,
    params: &TrueParameters,
    design: &DesignMatrix,
    reps: u64,
    seed: u64,
) -> Result<SimulationReport> {
    let cfg = eval.cfg();
    check_sim_args(cfg, design, reps)?;
    let sim = SimDesign::new(design, params)?;
    let theta = params.theta();
    let rho = cfg.rho();
    let sqrt_v_theta = cfg.v_theta().sqrt();
    let t_alpha = eval.t_alpha();
    let partials = run_sim(
        &sim,
        params,
        cfg.v_tau(),
        reps,
        seed,
        0u64,
        |hits: &mut u64, rep: &RepFit| {
            let (k, _, _) = eval.kernels_at(rep.gamma_hat);
            let r = eval.r_delta_at(rep.gamma_hat, rho);
            let sv = rep.sigma_hat * sqrt_v_theta;
            let center = rep.theta_hat - rho * sv * k;
            let half = t_alpha * sv * r;
            if (theta - center).abs() <= half {
                *hits += 1;
            }
        },
    );
    let hits: u64 = partials.iter().sum();
    let p_hat = hits as f64 / reps as f64;
    Ok(SimulationReport {
        point_estimate: p_hat,
        standard_error: (p_hat * (1.0 - p_hat) / reps as f64).sqrt(),
        replications: reps,
        seed,
    })
}

#[derive(Clone, Default)]
struct RatioMoments {
    su: f64,
    sv: f64,
    suu: f64,
    svv: f64,
    suv: f64,
}

/// Empirical ratio `E(length of the smoothed-center interval) / E(length of
/// the usual interval with coverage c_min)`, with a delta-method standard
/// error.
pub fn simulate_sel(
    params: &TrueParameters,
    design: &DesignMatrix,
    cfg: &ScenarioConfig,
    quad: &QuadratureSpec,
    c_min: f64,
    reps: u64,
    seed: u64,
) -> Result<SimulationReport> {
    simulate_sel_with(&Evaluator::new(cfg, quad)?, params, design, c_min, reps, seed)
}

/// As [`simulate_sel`], with a prebuilt evaluator.
pub fn simulate_sel_with(
    eval: &Evaluator,
    params: &TrueParameters,
    design: &DesignMatrix,
    c_min: f64,
    reps: u64,
    seed: u64,
) -> Result<SimulationReport> {
    let cfg = eval.cfg();
    check_sim_args(cfg, design, reps)?;
    if !(c_min > 0.5 && c_min < 1.0) {
        return Err(Error::Domain(format!(
            "c_min must lie in (0.5, 1), got {c_min}"
        )));
    }
    let sim = SimDesign::new(design, params)?;
    let rho = cfg.rho();
    // Lengths share the factor 2 σ̂ v_θ^{1/2}; the ratio needs only
    // u = σ̂ r_delta(γ̂) against v = σ̂ and the quantile ratio.
    let factor = eval.t_alpha() / t_quantile(cfg.m(), TwoSidedTailLevel::new(1.0 - c_min)?);
    let partials = run_sim(
        &sim,
        params,
        cfg.v_tau(),
        reps,
        seed,
        RatioMoments::default(),
        |acc: &mut RatioMoments, rep: &RepFit| {
            let u = rep.sigma_hat * eval.r_delta_at(rep.gamma_hat, rho);
            let v = rep.sigma_hat;
            acc.su += u;
            acc.sv += v;
            acc.suu += u * u;
            acc.svv += v * v;
            acc.suv += u * v;
        },
    );
    let mut tot = RatioMoments::default();
    for part in partials {
        tot.su += part.su;
        tot.sv += part.sv;
        tot.suu += part.suu;
        tot.svv += part.svv;
        tot.suv += part.suv;
    }
    let nf = reps as f64;
    let mean_u = tot.su / nf;
    let mean_v = tot.sv / nf;
    let var_u = tot.suu / nf - mean_u * mean_u;
    let var_v = tot.svv / nf - mean_v * mean_v;
    let cov_uv = tot.suv / nf - mean_u * mean_v;
    let ratio = mean_u / mean_v;
    let var_ratio = (var_u - 2.0 * ratio * cov_uv + ratio * ratio * var_v).max(0.0)
        / (mean_v * mean_v)
        / nf;
    Ok(SimulationReport {
        point_estimate: factor * ratio,
        standard_error: factor * var_ratio.sqrt(),
        replications: reps,
        seed,
    })
}

/// Monte Carlo mean of the post-model-selection estimator, the oracle for
/// the identity `E(θ̂_pms) = θ - ρ σ v_θ^{1/2} k_m(γ)`.
pub fn simulate_pms_mean(
    params: &TrueParameters,
    design: &DesignMatrix,
    cfg: &ScenarioConfig,
    reps: u64,
    seed: u64,
) -> Result<SimulationReport> {
    check_sim_args(cfg, design, reps)?;
    let sim = SimDesign::new(design, params)?;
    let shrink = cfg.v_theta_tau() / cfg.v_tau();
    let d_m = cfg.d_m();
    let partials = run_sim(
        &sim,
        params,
        cfg.v_tau(),
        reps,
        seed,
        (0.0f64, 0.0f64),
        |acc: &mut (f64, f64), rep: &RepFit| {
            let pms = if rep.gamma_hat.abs() <= d_m {
                rep.theta_hat - shrink * rep.tau_hat
            } else {
                rep.theta_hat
            };
            acc.0 += pms;
            acc.1 += pms * pms;
        },
    );
    let (sum, sum2) = partials
        .iter()
        .fold((0.0, 0.0), |(a, b), &(s, s2)| (a + s, b + s2));
    let nf = reps as f64;
    let mean = sum / nf;
    let var = (sum2 / nf - mean * mean).max(0.0);
    Ok(SimulationReport {
        point_estimate: mean,
        standard_error: (var / nf).sqrt(),
        replications: reps,
        seed,
    })
}

/// Finite-replication parametric bootstrap smoothing of the
/// post-model-selection estimate: draws `β̂* ~ N(β̂, σ̂²(X^T X)^{-1})` and
/// independently `m^{1/2} σ̂*/σ̂ ~ χ_m`, averages `g(β̂*, σ̂*)`, and reports
/// the Monte Carlo standard error. Converges to the ideal smoothed estimate
/// as `B` grows.
pub fn bootstrap_smooth(
    fit: &FittedModel,
    design: &DesignMatrix,
    cfg: &ScenarioConfig,
    b: u64,
    seed: u64,
) -> Result<SimulationReport> {
    check_sim_args(cfg, design, b)?;
    // Only (theta*, tau*, sigma*) enter g, so sampling the 2x2 marginal of
    // the bootstrap normal suffices.
    let gram_inv = (design.matrix().transpose() * design.matrix())
        .cholesky()
        .ok_or(Error::RankDeficient { column: 0 })?
        .inverse();
    let g11 = gram_inv[(0, 0)];
    let g12 = gram_inv[(0, 1)];
    let g22 = gram_inv[(1, 1)];
    let l11 = g11.sqrt();
    let l21 = g12 / l11;
    let l22 = (g22 - l21 * l21).sqrt();

    let m = cfg.m();
    let chi2 = ChiSquared::new(m.as_f64()).expect("m >= 1");
    let shrink = cfg.v_theta_tau() / cfg.v_tau();
    let d_m = cfg.d_m();
    let sqrt_v_tau = cfg.v_tau().sqrt();
    let (theta_hat, tau_hat, sigma_hat) = (fit.theta_hat, fit.tau_hat, fit.sigma_hat);

    let n_chunks = b.div_ceil(CHUNK);
    let partials: Vec<(f64, f64)> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk + 1);
            let lo = chunk * CHUNK;
            let hi = ((chunk + 1) * CHUNK).min(b);
            let (mut sum, mut sum2) = (0.0f64, 0.0f64);
            for _ in lo..hi {
                let z1: f64 = rng.sample(StandardNormal);
                let z2: f64 = rng.sample(StandardNormal);
                let theta_star = theta_hat + sigma_hat * l11 * z1;
                let tau_star = tau_hat + sigma_hat * (l21 * z1 + l22 * z2);
                let sigma_star = sigma_hat * (chi2.sample(&mut rng) / m.as_f64()).sqrt();
                let gamma_star = tau_star / (sigma_star * sqrt_v_tau);
                let g = if gamma_star.abs() <= d_m {
                    theta_star - shrink * tau_star
                } else {
                    theta_star
                };
                sum += g;
                sum2 += g * g;
            }
            (sum, sum2)
        })
        .collect();
    let (sum, sum2) = partials
        .iter()
        .fold((0.0, 0.0), |(a, c), &(s, s2)| (a + s, c + s2));
    let nf = b as f64;
    let mean = sum / nf;
    let var = (sum2 / nf - mean * mean).max(0.0);
    Ok(SimulationReport {
        point_estimate: mean,
        standard_error: (var / nf).sqrt(),
        replications: b,
        seed,
    })
}

fn check_sim_args(cfg: &ScenarioConfig, design: &DesignMatrix, reps: u64) -> Result<()> {
    if reps < 1_000 {
        return Err(Error::Domain(format!(
            "need at least 1000 replications, got {reps}"
        )));
    }
    check_design(cfg, design)
}
