//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured numbers (run with `--nocapture` to see them).

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sdelta::coverage::min_coverage_with;
use sdelta::distributions::{
    normal_cdf, normal_pdf, normal_quantile, t_quantile, TwoSidedTailLevel,
};
use sdelta::engine::Evaluator;
use sdelta::kernels::{self, ScenarioConfig};
use sdelta::oracle::{self, TrueParameters};
use sdelta::quadrature::QuadratureSpec;
use sdelta::sel::sel_delta_with;

fn level(a: f64) -> TwoSidedTailLevel {
    TwoSidedTailLevel::new(a).unwrap()
}

fn scenario(n: u32, m: u32, rho: f64) -> ScenarioConfig {
    ScenarioConfig::with_m(n, m, rho, 1.0, 1.0, level(0.05), level(0.1)).unwrap()
}

fn evaluator(n: u32, m: u32) -> Evaluator {
    let cfg = scenario(n, m, 0.0);
    let quad = QuadratureSpec::default_for(cfg.m());
    Evaluator::new(&cfg, &quad).unwrap()
}

/// Criterion 1: with rho = 0 the interval is the usual full-model CI, so
/// the coverage double integral must return exactly the nominal 0.95.
#[test]
fn criterion_01_zero_rho_exactness() {
    let mut worst = 0.0_f64;
    for m in [1u32, 2, 3, 10] {
        let eval = evaluator(25, m);
        for i in 0..20 {
            let gamma = -9.5 + i as f64;
            let cp = eval.cp(gamma, 0.0).unwrap();
            worst = worst.max((cp - 0.95).abs());
        }
    }
    println!("criterion 1: PASS max |CP(gamma, 0) - 0.95| = {worst:.2e} (tol 1e-6)");
    assert!(worst < 1e-6);
}

/// Criterion 2: the exponential-family matrix form of the delta-method sd
/// reproduces sigma v_theta^{1/2} r_delta(gamma) on randomized scenarios.
#[test]
fn criterion_02_matrix_form_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let ms = [1u32, 2, 3, 10];
    let mut worst = 0.0_f64;
    for trial in 0..20 {
        let m = ms[trial % 4];
        let n = if rng.next_u32() % 2 == 0 { 25 } else { 100 };
        let p = n - m;
        let unit = |rng: &mut ChaCha8Rng| rng.sample::<f64, _>(rand::distributions::Standard);
        let v_theta = 0.3 + 2.7 * unit(&mut rng);
        let v_tau = 0.3 + 2.7 * unit(&mut rng);
        let rho = 1.8 * unit(&mut rng) - 0.9;
        let sigma = 0.5 + 1.5 * unit(&mut rng);
        let gamma = 10.0 * unit(&mut rng) - 5.0;
        let theta = 4.0 * unit(&mut rng) - 2.0;

        let cfg =
            ScenarioConfig::with_m(n, m, rho, v_theta, v_tau, level(0.05), level(0.1)).unwrap();
        let quad = QuadratureSpec::default_for(cfg.m());
        let design = oracle::design_for(n, p, v_theta, v_tau, rho).unwrap();
        let params = TrueParameters::for_gamma(gamma, sigma, theta, p as usize, v_tau).unwrap();
        let sd_matrix = oracle::sd_delta_matrix_form(&params, &design, &cfg, &quad).unwrap();
        let sd_kernel = kernels::sd_delta(gamma, sigma, &cfg, &quad).unwrap();
        worst = worst.max((sd_matrix - sd_kernel).abs() / sd_kernel);
    }
    println!("criterion 2: PASS worst relative difference = {worst:.2e} (tol 1e-8)");
    assert!(worst < 1e-8);
}

/// Criterion 3: empirical coverage of the realized interval over 1e5 seeded
/// replications agrees with the exact double integral, 6-point panel.
#[test]
fn criterion_03_monte_carlo_coverage_agreement() {
    let eval = evaluator(25, 1);
    let design_cache: Vec<(f64, _)> = [0.5, 0.9]
        .iter()
        .map(|&rho| (rho, oracle::design_for(25, 24, 1.0, 1.0, rho).unwrap()))
        .collect();
    let mut worst_z = 0.0_f64;
    for (rho, design) in &design_cache {
        let eval_rho = eval.with_rho(*rho).unwrap();
        for &gamma in &[0.0, 1.5, 3.0] {
            let params = TrueParameters::for_gamma(gamma, 1.0, 0.3, 24, 1.0).unwrap();
            let mc =
                oracle::simulate_coverage_with(&eval_rho, &params, design, 100_000, 1001).unwrap();
            let exact = eval_rho.cp(gamma, *rho).unwrap();
            let z = (mc.point_estimate - exact).abs() / mc.standard_error;
            println!(
                "criterion 3: gamma={gamma} rho={rho}: mc {:.5} vs exact {exact:.5} (z = {z:.2})",
                mc.point_estimate
            );
            worst_z = worst_z.max(z);
            assert!(
                z < 3.0,
                "coverage at (gamma={gamma}, rho={rho}) off by {z:.2} SE"
            );
        }
    }
    println!("criterion 3: PASS worst |z| = {worst_z:.2} (limit 3)");
}

/// Criterion 4: the exact scaled-expected-length formula matches the
/// empirical length ratio at 1e5 replications.
#[test]
fn criterion_04_monte_carlo_sel_agreement() {
    let eval = evaluator(25, 1);
    let rho = 0.9;
    let eval_rho = eval.with_rho(rho).unwrap();
    let design = oracle::design_for(25, 24, 1.0, 1.0, rho).unwrap();
    let c_min = min_coverage_with(&eval_rho, rho, 15.0).unwrap().c_min;
    for &gamma in &[0.0, 3.0] {
        let params = TrueParameters::for_gamma(gamma, 1.0, 0.3, 24, 1.0).unwrap();
        let mc = oracle::simulate_sel_with(&eval_rho, &params, &design, c_min, 100_000, 77)
            .unwrap();
        let exact = sel_delta_with(&eval_rho, gamma, rho, c_min).unwrap().sel;
        let z = (mc.point_estimate - exact).abs() / mc.standard_error;
        println!(
            "criterion 4: gamma={gamma}: mc {:.5} vs exact {exact:.5} (z = {z:.2})",
            mc.point_estimate
        );
        assert!(z < 3.0, "SEL at gamma={gamma} off by {z:.2} SE");
    }
    println!("criterion 4: PASS");
}

/// Criterion 5: the bias identity E(theta_pms) = theta - rho sigma
/// v_theta^{1/2} k_m(gamma), against 1e6-replication means.
#[test]
fn criterion_05_pms_mean_identity() {
    let quad = QuadratureSpec::default_for(sdelta::distributions::DegreesOfFreedom::new(1).unwrap());
    for (i, &(gamma, rho)) in [(0.0, 0.9), (1.5, 0.7), (3.0, 0.5), (1.0, 0.9)]
        .iter()
        .enumerate()
    {
        let cfg = scenario(25, 1, rho);
        let design = oracle::design_for(25, 24, 1.0, 1.0, rho).unwrap();
        let theta = 0.7;
        let sigma = 1.3;
        let params = TrueParameters::for_gamma(gamma, sigma, theta, 24, 1.0).unwrap();
        let mc =
            oracle::simulate_pms_mean(&params, &design, &cfg, 1_000_000, 500 + i as u64).unwrap();
        let k = kernels::k_m(gamma, &cfg, &quad).unwrap();
        let predicted = theta - rho * sigma * cfg.v_theta().sqrt() * k;
        let z = (mc.point_estimate - predicted).abs() / mc.standard_error;
        println!(
            "criterion 5: gamma={gamma} rho={rho}: mc {:.6} vs {predicted:.6} (z = {z:.2})",
            mc.point_estimate
        );
        assert!(z < 3.0, "pms mean at (gamma={gamma}, rho={rho}) off by {z:.2} SE");
    }
    println!("criterion 5: PASS");
}

/// Criterion 6: minimum coverage is strictly decreasing in |rho| and equals
/// the nominal level at rho = 0 (the coverage-figure shape).
#[test]
fn criterion_06_min_coverage_decreasing() {
    let eval = evaluator(25, 1);
    let at_zero = min_coverage_with(&eval, 0.0, 15.0).unwrap().c_min;
    println!("criterion 6: c_min(0) = {at_zero:.8}");
    assert!((at_zero - 0.95).abs() < 1e-6);
    let mut prev = f64::INFINITY;
    for &rho in &[0.2, 0.5, 0.7, 0.9] {
        let res = min_coverage_with(&eval, rho, 15.0).unwrap();
        println!(
            "criterion 6: c_min({rho}) = {:.8} at gamma = {:.4}",
            res.c_min, res.gamma_argmin
        );
        assert!(
            res.c_min < prev,
            "c_min not strictly decreasing at rho = {rho}"
        );
        assert!(!res.argmin_at_boundary);
        prev = res.c_min;
    }
    println!("criterion 6: PASS");
}

/// Criterion 7: scaled-expected-length figure shape for n=25, m=1.
///
/// The first clause (SEL well below 1 at gamma = 0 for |rho| >= 0.5) holds.
/// The other two clauses fail for m = 1 and are asserted as specified
/// anyway: the kernels decay like exp(-g^2/(2(1+d_1^2))) with d_1 = 6.31,
/// so at gamma = 25 the length integrand still carries r_delta
/// contributions of order 1e-2 (q_1 reaches -0.24 near argument 10), the
/// curve's maximum on the default grid is about 1.27 at the +-10 endpoints
/// (global maximum about 1.29 near gamma = 13), and SEL(25) sits several
/// 1e-2 above the t-quantile ratio. These are properties of the exact
/// formulas, confirmed by an independent quadrature and by the Monte Carlo
/// length ratio (criterion 4 passes at gamma = 3; the same harness
/// reproduces the gamma = 25 value).
#[test]
fn criterion_07_sel_figure_shape() {
    let eval = evaluator(25, 1);
    let grid: Vec<f64> = (0..=200).map(|i| -10.0 + 0.1 * i as f64).collect();
    let mut all_ok = true;
    for &rho in &[0.5, 0.7, 0.9] {
        let eval_rho = eval.with_rho(rho).unwrap();
        let c_min = min_coverage_with(&eval_rho, rho, 15.0).unwrap().c_min;
        let at0 = sel_delta_with(&eval_rho, 0.0, rho, c_min).unwrap().sel;
        let max = grid
            .iter()
            .map(|&g| sel_delta_with(&eval_rho, g, rho, c_min).unwrap().sel)
            .fold(f64::MIN, f64::max);
        let at25 = sel_delta_with(&eval_rho, 25.0, rho, c_min).unwrap().sel;
        let limit = eval.t_alpha()
            / t_quantile(eval.cfg().m(), TwoSidedTailLevel::new(1.0 - c_min).unwrap());
        let clause1 = at0 < 1.0;
        let clause2 = max <= 1.15;
        let clause3 = (at25 - limit).abs() < 1e-3;
        println!(
            "criterion 7: rho={rho}: SEL(0)={at0:.4} [{}], max={max:.4} [{}], \
             |SEL(25)-{limit:.4}|={:.2e} [{}]",
            if clause1 { "pass" } else { "FAIL" },
            if clause2 { "pass" } else { "FAIL" },
            (at25 - limit).abs(),
            if clause3 { "pass" } else { "FAIL" },
        );
        all_ok &= clause1 && clause2 && clause3;
    }
    assert!(
        all_ok,
        "criterion 7 fails as stated for m = 1: the max-SEL bound 1.15 and the \
         1e-3 far-gamma tolerance are unattainable (slow kernel decay, d_1 = 6.31); \
         see the printed clause values"
    );
    println!("criterion 7: PASS");
}

/// Criterion 8: for m = 1e4 the kernels match the known-error-variance
/// kernels (w fixed at 1, threshold at the normal quantile) within 1e-3.
#[test]
fn criterion_08_known_variance_limit() {
    let cfg = ScenarioConfig::with_m(10_025, 10_000, 0.0, 1.0, 1.0, level(0.05), level(0.1))
        .unwrap();
    let quad = QuadratureSpec {
        nodes_w: 400,
        ..QuadratureSpec::default_for(cfg.m())
    };
    let z = normal_quantile(1.0 - 0.1 / 2.0).unwrap();
    let mut worst = 0.0_f64;
    for i in 0..10 {
        let g = i as f64;
        let kv = kernels::r_delta(g, &cfg, &quad).unwrap();
        let k_inf =
            normal_pdf(z + g) - normal_pdf(z - g) + g * (normal_cdf(z - g) - normal_cdf(-z - g));
        let q_inf = -z * normal_pdf(z + g) - z * normal_pdf(z - g) + normal_cdf(z - g)
            - normal_cdf(-z - g);
        let h_inf = z * z * (normal_pdf(z + g) - normal_pdf(z - g));
        worst = worst
            .max((kv.k - k_inf).abs())
            .max((kv.q - q_inf).abs())
            .max((kv.h - h_inf).abs());
    }
    println!("criterion 8: PASS max kernel difference at m = 1e4: {worst:.2e} (tol 1e-3)");
    assert!(worst < 1e-3);
}

/// Criterion 9: coverage and scaled length are even in gamma and in rho.
#[test]
fn criterion_09_symmetry_suite() {
    let eval = evaluator(25, 1);
    let gammas: Vec<f64> = (0..10).map(|i| 0.5 + i as f64).collect();
    let mut worst = 0.0_f64;
    for &rho in &[0.2, 0.5, 0.7, 0.9] {
        let c_pos = min_coverage_with(&eval, rho, 15.0).unwrap().c_min;
        let c_neg = min_coverage_with(&eval, -rho, 15.0).unwrap().c_min;
        for &g in &gammas {
            let cp = eval.cp(g, rho).unwrap();
            worst = worst.max((eval.cp(-g, rho).unwrap() - cp).abs());
            worst = worst.max((eval.cp(g, -rho).unwrap() - cp).abs());
            let s = sel_delta_with(&eval, g, rho, c_pos).unwrap().sel;
            worst = worst.max((sel_delta_with(&eval, -g, rho, c_pos).unwrap().sel - s).abs());
            worst = worst.max((sel_delta_with(&eval, g, -rho, c_neg).unwrap().sel - s).abs());
        }
    }
    println!("criterion 9: PASS worst asymmetry = {worst:.2e} (tol 1e-7)");
    assert!(worst < 1e-7);
}

/// Criterion 10: doubling both node budgets moves coverage and length by
/// less than 1e-7 at the spot points.
#[test]
fn criterion_10_quadrature_self_consistency() {
    let cfg = scenario(25, 1, 0.0);
    let quad = QuadratureSpec::default_for(cfg.m());
    let eval = Evaluator::new(&cfg, &quad).unwrap();
    let eval2 = Evaluator::new(&cfg, &quad.doubled()).unwrap();
    let points = [(0.0, 0.5), (1.5, 0.9), (3.0, 0.2), (0.7, 0.7), (5.0, 0.9)];
    let mut worst = 0.0_f64;
    for &(g, rho) in &points {
        let d_cp = (eval.cp(g, rho).unwrap() - eval2.cp(g, rho).unwrap()).abs();
        let s1 = sel_delta_with(&eval, g, rho, 0.94).unwrap().sel;
        let s2 = sel_delta_with(&eval2, g, rho, 0.94).unwrap().sel;
        worst = worst.max(d_cp).max((s1 - s2).abs());
    }
    println!("criterion 10: PASS worst refinement shift = {worst:.2e} (tol 1e-7)");
    assert!(worst < 1e-7);
}

/// Criterion 11: verify-mode runs with a fixed seed and thread count write
/// byte-identical CSV bodies.
#[test]
fn criterion_11_verify_mode_determinism() {
    let dir = std::env::temp_dir().join(format!("sdelta-acc-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let config_path = dir.join("verify.conf");
    std::fs::write(
        &config_path,
        "mode = verify\nn = 25\nm = 1\nrho = 0.5\nseed = 9\nreps = 5000\n\
         gamma_min = -2\ngamma_max = 2\ngamma_step = 1\n",
    )
    .unwrap();
    let run = |out: &str| {
        let out_dir = dir.join(out);
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_sdelta"))
            .args([
                "--config",
                config_path.to_str().unwrap(),
                "--out",
                out_dir.to_str().unwrap(),
                "--threads",
                "2",
            ])
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(out_dir.join("verify.csv")).unwrap()
    };
    let a = run("a");
    let b = run("b");
    assert_eq!(a, b, "verify.csv differs between identical runs");
    println!("criterion 11: PASS identical verify.csv bodies ({} bytes)", a.len());
    let _ = std::fs::remove_dir_all(&dir);
}
