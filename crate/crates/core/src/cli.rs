//! Configuration-driven front end: sweep `(γ, ρ)` grids for coverage and
//! scaled-expected-length curves, run the Monte Carlo verification panel,
//! fit user data, and emit full-precision CSV.
//!
//! Configs are flat `key = value` text files (`#` starts a comment):
//!
//! ```text
//! mode = both          # coverage | sel | both | verify | fit
//! n = 25
//! m = 1                # residual degrees of freedom (or give p instead)
//! rho = 0.2, 0.5, 0.7, 0.9
//! alpha = 0.05
//! alpha_tilde = 0.1
//! gamma_min = -10
//! gamma_max = 10
//! gamma_step = 0.1
//! seed = 1
//! reps = 100000        # verify mode replications / bootstrap size
//! out = out
//! ```
//!
//! Optional keys: `v_theta`, `v_tau` (default 1), `nodes_w`, `nodes_y`,
//! `w_max`, `y_max`, `abs_tol` (quadrature overrides),
//! `gamma_search_max` (minimum-coverage search range, default 15),
//! `data` (input CSV for `mode = fit`: p design columns then the response).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::coverage::min_coverage_with;
use crate::distributions::TwoSidedTailLevel;
use crate::engine::Evaluator;
use crate::inference::{self, DesignMatrix};
use crate::kernels::{self, ScenarioConfig};
use crate::oracle::{self, TrueParameters};
use crate::quadrature::QuadratureSpec;
use crate::sel::sel_delta_with;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Coverage,
    Sel,
    Both,
    Verify,
    Fit,
}

impl Mode {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "coverage" => Ok(Self::Coverage),
            "sel" => Ok(Self::Sel),
            "both" => Ok(Self::Both),
            "verify" => Ok(Self::Verify),
            "fit" => Ok(Self::Fit),
            other => Err(Error::Config(format!(
                "unknown mode '{other}' (expected coverage|sel|both|verify|fit)"
            ))),
        }
    }

}

/// A parsed run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub mode: Mode,
    pub n: u32,
    pub m: u32,
    pub rho_list: Vec<f64>,
    pub v_theta: f64,
    pub v_tau: f64,
    pub alpha: f64,
    pub alpha_tilde: f64,
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub gamma_step: f64,
    pub gamma_search_max: f64,
    pub seed: u64,
    pub reps: u64,
    pub out_dir: PathBuf,
    pub data: Option<PathBuf>,
    pub nodes_w: Option<usize>,
    pub nodes_y: Option<usize>,
    pub w_max: Option<f64>,
    pub y_max: Option<f64>,
    pub abs_tol: Option<f64>,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_str(&text)
    }

    pub fn from_str(text: &str) -> Result<Self> {
        let mut pairs: Vec<(String, String)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected 'key = value'", lineno + 1))
            })?;
            pairs.push((key.trim().to_string(), value.trim().to_string()));
        }

        let get = |key: &str| -> Option<&str> {
            pairs
                .iter()
                .rev()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.as_str())
        };
        let parse_f64 = |key: &str| -> Result<Option<f64>> {
            get(key)
                .map(|v| {
                    v.parse::<f64>()
                        .map_err(|_| Error::Config(format!("{key}: not a number: '{v}'")))
                })
                .transpose()
        };
        let parse_u64 = |key: &str| -> Result<Option<u64>> {
            get(key)
                .map(|v| {
                    v.parse::<u64>()
                        .map_err(|_| Error::Config(format!("{key}: not an integer: '{v}'")))
                })
                .transpose()
        };

        const KNOWN: &[&str] = &[
            "mode",
            "n",
            "m",
            "p",
            "rho",
            "v_theta",
            "v_tau",
            "alpha",
            "alpha_tilde",
            "gamma_min",
            "gamma_max",
            "gamma_step",
            "gamma_search_max",
            "seed",
            "reps",
            "out",
            "data",
            "nodes_w",
            "nodes_y",
            "w_max",
            "y_max",
            "abs_tol",
        ];
        for (k, _) in &pairs {
            if !KNOWN.contains(&k.as_str()) {
                return Err(Error::Config(format!("unknown key '{k}'")));
            }
        }

        let mode = Mode::parse(
            get("mode").ok_or_else(|| Error::Config("missing 'mode'".into()))?,
        )?;
        let n = parse_u64("n")?.ok_or_else(|| Error::Config("missing 'n'".into()))? as u32;
        let m = match (parse_u64("m")?, parse_u64("p")?) {
            (Some(m), None) => m as u32,
            (None, Some(p)) => {
                let p = p as u32;
                if p >= n {
                    return Err(Error::Config(format!("need p < n, got p = {p}, n = {n}")));
                }
                n - p
            }
            (Some(_), Some(_)) => {
                return Err(Error::Config("give either 'm' or 'p', not both".into()))
            }
            (None, None) => return Err(Error::Config("missing 'm' (or 'p')".into())),
        };
        let mut rho_list = Vec::new();
        if let Some(spec) = get("rho") {
            for tok in spec.split(',') {
                let tok = tok.trim();
                if tok.is_empty() {
                    continue;
                }
                let rho: f64 = tok
                    .parse()
                    .map_err(|_| Error::Config(format!("rho: not a number: '{tok}'")))?;
                if !(rho.abs() < 1.0) {
                    return Err(Error::Config(format!("rho values must lie in (-1, 1), got {rho}")));
                }
                rho_list.push(rho);
            }
        }
        if rho_list.is_empty() && mode != Mode::Fit {
            return Err(Error::Config("missing 'rho' list".into()));
        }
        rho_list.sort_by(f64::total_cmp);

        let gamma_min = parse_f64("gamma_min")?.unwrap_or(-10.0);
        let gamma_max = parse_f64("gamma_max")?.unwrap_or(10.0);
        let gamma_step = parse_f64("gamma_step")?.unwrap_or(0.1);
        if !(gamma_step > 0.0) || gamma_max < gamma_min {
            return Err(Error::Config("bad gamma grid".into()));
        }

        Ok(Self {
            mode,
            n,
            m,
            rho_list,
            v_theta: parse_f64("v_theta")?.unwrap_or(1.0),
            v_tau: parse_f64("v_tau")?.unwrap_or(1.0),
            alpha: parse_f64("alpha")?.unwrap_or(0.05),
            alpha_tilde: parse_f64("alpha_tilde")?.unwrap_or(0.1),
            gamma_min,
            gamma_max,
            gamma_step,
            gamma_search_max: parse_f64("gamma_search_max")?.unwrap_or(15.0),
            seed: parse_u64("seed")?.unwrap_or(0),
            reps: parse_u64("reps")?.unwrap_or(100_000),
            out_dir: PathBuf::from(get("out").unwrap_or("out")),
            data: get("data").map(PathBuf::from),
            nodes_w: parse_u64("nodes_w")?.map(|v| v as usize),
            nodes_y: parse_u64("nodes_y")?.map(|v| v as usize),
            w_max: parse_f64("w_max")?,
            y_max: parse_f64("y_max")?,
            abs_tol: parse_f64("abs_tol")?,
        })
    }

    /// Base scenario (`ρ = 0`; sweeps substitute each requested `ρ`).
    pub fn scenario(&self) -> Result<ScenarioConfig> {
        ScenarioConfig::with_m(
            self.n,
            self.m,
            0.0,
            self.v_theta,
            self.v_tau,
            TwoSidedTailLevel::new(self.alpha)?,
            TwoSidedTailLevel::new(self.alpha_tilde)?,
        )
    }

    pub fn quadrature(&self, cfg: &ScenarioConfig) -> Result<QuadratureSpec> {
        let mut quad = QuadratureSpec::default_for(cfg.m());
        if let Some(v) = self.nodes_w {
            quad.nodes_w = v;
        }
        if let Some(v) = self.nodes_y {
            quad.nodes_y = v;
        }
        if let Some(v) = self.w_max {
            quad.w_max = v;
        }
        if let Some(v) = self.y_max {
            quad.y_max = v;
        }
        if let Some(v) = self.abs_tol {
            quad.abs_tol = v;
        }
        quad.validate(cfg.m())
            .map_err(|e| Error::Config(format!("quadrature settings rejected: {e}")))?;
        Ok(quad)
    }

    pub fn gamma_grid(&self) -> Vec<f64> {
        let count = ((self.gamma_max - self.gamma_min) / self.gamma_step).round() as usize + 1;
        (0..count)
            .map(|i| self.gamma_min + i as f64 * self.gamma_step)
            .collect()
    }
}

/// 17 significant digits, plenty to round-trip an f64.
fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn metadata_line(config: &RunConfig, quad: &QuadratureSpec, mode: &str) -> String {
    let mut line = String::from("# sdelta");
    let _ = write!(
        line,
        " mode={mode} n={} m={} alpha={} alpha_tilde={} v_theta={} v_tau={}",
        config.n,
        config.m,
        fmt(config.alpha),
        fmt(config.alpha_tilde),
        fmt(config.v_theta),
        fmt(config.v_tau),
    );
    let _ = write!(
        line,
        " gamma_min={} gamma_max={} gamma_step={} gamma_search_max={}",
        fmt(config.gamma_min),
        fmt(config.gamma_max),
        fmt(config.gamma_step),
        fmt(config.gamma_search_max),
    );
    let _ = write!(
        line,
        " nodes_w={} nodes_y={} w_max={} y_max={} abs_tol={}",
        quad.nodes_w,
        quad.nodes_y,
        fmt(quad.w_max),
        fmt(quad.y_max),
        fmt(quad.abs_tol),
    );
    let _ = write!(line, " seed={} reps={} rho=", config.seed, config.reps);
    for (i, rho) in config.rho_list.iter().enumerate() {
        if i > 0 {
            line.push(',');
        }
        line.push_str(&fmt(*rho));
    }
    line
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, body)?;
    Ok(())
}

/// Executes the configured run and returns the files written.
pub fn run(config: &RunConfig) -> Result<Vec<PathBuf>> {
    match config.mode {
        Mode::Coverage => Ok(vec![run_coverage(config)?]),
        Mode::Sel => Ok(vec![run_sel(config)?]),
        Mode::Both => Ok(vec![run_coverage(config)?, run_sel(config)?]),
        Mode::Verify => Ok(vec![run_verify(config)?]),
        Mode::Fit => Ok(vec![run_fit(config)?]),
    }
}

fn run_coverage(config: &RunConfig) -> Result<PathBuf> {
    let cfg = config.scenario()?;
    let quad = config.quadrature(&cfg)?;
    let eval = Evaluator::new(&cfg, &quad)?;
    let grid = config.gamma_grid();

    let mut body = String::new();
    body.push_str(&metadata_line(config, &quad, "coverage"));
    body.push_str("\ngamma,rho,value\n");
    for &rho in &config.rho_list {
        let row = grid
            .par_iter()
            .map(|&g| eval.cp(g, rho))
            .collect::<Result<Vec<_>>>()?;
        for (g, cp) in grid.iter().zip(row) {
            let _ = writeln!(body, "{},{},{}", fmt(*g), fmt(rho), fmt(cp));
        }
    }
    let path = config.out_dir.join("coverage.csv");
    write_file(&path, &body)?;
    Ok(path)
}

fn run_sel(config: &RunConfig) -> Result<PathBuf> {
    let cfg = config.scenario()?;
    let quad = config.quadrature(&cfg)?;
    let eval = Evaluator::new(&cfg, &quad)?;
    let grid = config.gamma_grid();

    let mut body = String::new();
    body.push_str(&metadata_line(config, &quad, "sel"));
    body.push_str("\ngamma,rho,value,c_min\n");
    for &rho in &config.rho_list {
        let found = min_coverage_with(&eval, rho, config.gamma_search_max)?;
        if found.argmin_at_boundary {
            eprintln!(
                "warning: coverage argmin for rho = {rho} sits at the search boundary \
                 gamma = {}; consider raising gamma_search_max",
                found.gamma_argmin
            );
        }
        let points = grid
            .par_iter()
            .map(|&g| sel_delta_with(&eval, g, rho, found.c_min))
            .collect::<Result<Vec<_>>>()?;
        for p in points {
            let _ = writeln!(
                body,
                "{},{},{},{}",
                fmt(p.gamma),
                fmt(p.rho),
                fmt(p.sel),
                fmt(p.c_min_used)
            );
        }
    }
    let path = config.out_dir.join("sel.csv");
    write_file(&path, &body)?;
    Ok(path)
}

struct VerifyRow {
    check: &'static str,
    gamma: f64,
    rho: f64,
    value: f64,
    reference: f64,
    tolerance: f64,
}

impl VerifyRow {
    fn pass(&self) -> bool {
        (self.value - self.reference).abs() <= self.tolerance
    }
}

fn run_verify(config: &RunConfig) -> Result<PathBuf> {
    let base = config.scenario()?;
    let quad = config.quadrature(&base)?;
    let eval = Evaluator::new(&base, &quad)?;
    let p = base.p();
    let mut rows: Vec<VerifyRow> = Vec::new();

    for (i, &rho) in config.rho_list.iter().enumerate() {
        let cfg = base.with_rho(rho)?;
        let eval_rho = eval.with_rho(rho)?;
        let design = oracle::design_for(cfg.n(), p, cfg.v_theta(), cfg.v_tau(), rho)?;

        // Exact identity: matrix-form sd against the kernel composition.
        let gamma_id = 0.75 + 0.5 * i as f64;
        let params = TrueParameters::for_gamma(gamma_id, 1.0, 0.4, p as usize, cfg.v_tau())?;
        let sd_matrix = oracle::sd_delta_matrix_form(&params, &design, &cfg, &quad)?;
        let sd_kernel = kernels::sd_delta(gamma_id, 1.0, &cfg, &quad)?;
        rows.push(VerifyRow {
            check: "theorem1_identity",
            gamma: gamma_id,
            rho,
            value: sd_matrix,
            reference: sd_kernel,
            tolerance: 1e-8 * sd_kernel,
        });

        // Monte Carlo coverage against the exact double integral.
        for &gamma in &[0.0, 1.5, 3.0] {
            let params = TrueParameters::for_gamma(gamma, 1.0, 0.3, p as usize, cfg.v_tau())?;
            let mc =
                oracle::simulate_coverage_with(&eval_rho, &params, &design, config.reps, config.seed)?;
            let exact = eval_rho.cp(gamma, rho)?;
            rows.push(VerifyRow {
                check: "coverage_mc",
                gamma,
                rho,
                value: mc.point_estimate,
                reference: exact,
                tolerance: 3.0 * mc.standard_error,
            });
        }

        // Monte Carlo length ratio against the exact formula.
        let c_min = min_coverage_with(&eval_rho, rho, config.gamma_search_max)?.c_min;
        for &gamma in &[0.0, 3.0] {
            let params = TrueParameters::for_gamma(gamma, 1.0, 0.3, p as usize, cfg.v_tau())?;
            let mc = oracle::simulate_sel_with(
                &eval_rho, &params, &design, c_min, config.reps, config.seed,
            )?;
            let exact = sel_delta_with(&eval_rho, gamma, rho, c_min)?.sel;
            rows.push(VerifyRow {
                check: "sel_mc",
                gamma,
                rho,
                value: mc.point_estimate,
                reference: exact,
                tolerance: 3.0 * mc.standard_error,
            });
        }

        // Mean of the post-model-selection estimator against the kernel bias.
        let gamma = 1.5;
        let theta = 0.7;
        let params = TrueParameters::for_gamma(gamma, 1.0, theta, p as usize, cfg.v_tau())?;
        let mc = oracle::simulate_pms_mean(&params, &design, &cfg, config.reps, config.seed)?;
        let k = kernels::k_m(gamma, &cfg, &quad)?;
        let expect = theta - rho * cfg.v_theta().sqrt() * k;
        rows.push(VerifyRow {
            check: "pms_mean_mc",
            gamma,
            rho,
            value: mc.point_estimate,
            reference: expect,
            tolerance: 3.0 * mc.standard_error,
        });

        // Finite-B bootstrap smoothing against the ideal smoothed estimate
        // for one seeded dataset.
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x5eed);
        let mu = design.matrix() * params.beta();
        let y = DVector::from_fn(cfg.n() as usize, |r, _| {
            mu[r] + rng.sample::<f64, _>(StandardNormal)
        });
        let fit = inference::fit(&design, &y)?;
        let smooth = oracle::bootstrap_smooth(&fit, &design, &cfg, config.reps, config.seed)?;
        let ideal = inference::theta_tilde(&fit, &cfg, &quad)?;
        rows.push(VerifyRow {
            check: "bootstrap_smooth",
            gamma,
            rho,
            value: smooth.point_estimate,
            reference: ideal,
            tolerance: 3.0 * smooth.standard_error,
        });
    }

    let mut body = String::new();
    body.push_str(&metadata_line(config, &quad, "verify"));
    body.push_str("\ncheck,gamma,rho,value,reference,tolerance,status\n");
    for row in &rows {
        let status = if row.pass() { "PASS" } else { "FAIL" };
        println!(
            "{:<18} gamma={:<5} rho={:<5} {} (exact {}, tol {:.2e}) {status}",
            row.check, row.gamma, row.rho, row.value, row.reference, row.tolerance
        );
        let _ = writeln!(
            body,
            "{},{},{},{},{},{},{status}",
            row.check,
            fmt(row.gamma),
            fmt(row.rho),
            fmt(row.value),
            fmt(row.reference),
            fmt(row.tolerance)
        );
    }
    let path = config.out_dir.join("verify.csv");
    write_file(&path, &body)?;
    Ok(path)
}

fn run_fit(config: &RunConfig) -> Result<PathBuf> {
    let data_path = config
        .data
        .as_ref()
        .ok_or_else(|| Error::Config("mode = fit needs a 'data' CSV path".into()))?;
    let text = std::fs::read_to_string(data_path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut row = Vec::new();
        for tok in line.split(',') {
            match tok.trim().parse::<f64>() {
                Ok(v) => row.push(v),
                Err(_) if lineno == 0 => {
                    row.clear();
                    break; // header line
                }
                Err(_) => {
                    return Err(Error::Config(format!(
                        "{}: line {}: not a number: '{}'",
                        data_path.display(),
                        lineno + 1,
                        tok.trim()
                    )))
                }
            }
        }
        if !row.is_empty() {
            rows.push(row);
        }
    }
    if rows.is_empty() {
        return Err(Error::Config("data file holds no numeric rows".into()));
    }
    let width = rows[0].len();
    if width < 3 || rows.iter().any(|r| r.len() != width) {
        return Err(Error::Config(
            "data rows must all have p >= 2 design columns plus the response".into(),
        ));
    }
    let n = rows.len();
    let p = width - 1;
    let x = DMatrix::from_fn(n, p, |i, j| rows[i][j]);
    let y = DVector::from_fn(n, |i, _| rows[i][p]);
    let design = DesignMatrix::new(x)?;
    let fit = inference::fit(&design, &y)?;
    let cfg = fit.scenario(
        n as u32,
        p as u32,
        TwoSidedTailLevel::new(config.alpha)?,
        TwoSidedTailLevel::new(config.alpha_tilde)?,
    )?;
    let quad = QuadratureSpec::default_for(cfg.m());
    let pms = inference::theta_pms(&fit, &cfg);
    let tilde = inference::theta_tilde(&fit, &cfg, &quad)?;
    let j = inference::j_delta(&fit, &cfg, &quad)?;
    let usual = inference::usual_interval(&fit, 1.0 - config.alpha, &cfg)?;

    let mut body = String::new();
    body.push_str(&format!(
        "# sdelta mode=fit n={n} p={p} alpha={} alpha_tilde={}\n",
        fmt(config.alpha),
        fmt(config.alpha_tilde)
    ));
    body.push_str("quantity,value\n");
    for (name, value) in [
        ("theta_hat", fit.theta_hat),
        ("tau_hat", fit.tau_hat),
        ("sigma_hat", fit.sigma_hat),
        ("gamma_hat", fit.gamma_hat),
        ("v_theta", fit.v_theta),
        ("v_tau", fit.v_tau),
        ("rho", fit.rho),
        ("theta_pms", pms),
        ("theta_tilde", tilde),
        ("j_delta_lower", j.lower),
        ("j_delta_upper", j.upper),
        ("usual_lower", usual.lower),
        ("usual_upper", usual.upper),
    ] {
        println!("{name:<14} {value}");
        let _ = writeln!(body, "{name},{}", fmt(value));
    }
    let path = config.out_dir.join("fit.csv");
    write_file(&path, &body)?;
    Ok(path)
}
