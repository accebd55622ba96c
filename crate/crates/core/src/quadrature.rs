//! Composite Gauss-Legendre quadrature and the truncation/node-count
//! parameters shared by the semi-infinite `(w, y)` double integrals.

use crate::distributions::{gamma_p, gamma_q, normal_cdf, DegreesOfFreedom};
use crate::{Error, Result};

/// Nodes per Gauss-Legendre panel. Panels are uniform subdivisions of the
/// integration interval; the total node budget divides into panels of this
/// size (last panel absorbs the remainder of the division).
const PANEL_NODES: usize = 25;

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// Legendre polynomial. Standard and accurate to machine precision for the
/// small orders used here.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        // Chebyshev initial guess for the i-th root.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Recurrence for P_n(x) and P'_n(x).
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Composite Gauss-Legendre rule on [a, b] with roughly `total_nodes` nodes,
/// split into uniform panels of [`PANEL_NODES`] nodes. Handles `b < a` by
/// sign-flipping the weights, so it can serve as an oriented integral.
pub fn composite_gauss_legendre(a: f64, b: f64, total_nodes: usize) -> (Vec<f64>, Vec<f64>) {
    if a == b {
        return (Vec::new(), Vec::new());
    }
    let (lo, hi, sign) = if b >= a { (a, b, 1.0) } else { (b, a, -1.0) };
    let panels = (total_nodes.max(1)).div_ceil(PANEL_NODES).max(1);
    let per_panel = total_nodes.max(1).div_ceil(panels).max(2);
    let (gx, gw) = gauss_legendre(per_panel);
    let width = (hi - lo) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * per_panel);
    let mut weights = Vec::with_capacity(panels * per_panel);
    for p in 0..panels {
        let left = lo + p as f64 * width;
        let mid = left + 0.5 * width;
        for (&x, &w) in gx.iter().zip(&gw) {
            nodes.push(mid + 0.5 * width * x);
            weights.push(sign * 0.5 * width * w);
        }
    }
    (nodes, weights)
}

/// Smallest `w` with `P(W > w) <= tail` for `W = (Q/m)^{1/2}`, `Q ~ χ²_m`.
pub fn w_upper_bound(m: DegreesOfFreedom, tail: f64) -> f64 {
    let a = 0.5 * m.as_f64();
    let surv = |w: f64| gamma_q(a, 0.5 * m.as_f64() * w * w);
    let mut lo = 1.0;
    let mut hi = 1.0;
    while surv(hi) > tail {
        hi *= 2.0;
    }
    while surv(lo) <= tail && lo > 1e-8 {
        lo *= 0.5;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if surv(mid) > tail {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Largest `w` with `P(W < w) <= tail`; zero when the density already has
/// essentially all mass near the origin (small `m`).
pub fn w_lower_bound(m: DegreesOfFreedom, tail: f64) -> f64 {
    let a = 0.5 * m.as_f64();
    let cdf = |w: f64| gamma_p(a, 0.5 * m.as_f64() * w * w);
    if cdf(1e-4) > tail {
        return 0.0;
    }
    let mut lo = 1e-4;
    let mut hi = 1.0;
    while cdf(hi) <= tail {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) <= tail {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Truncation bounds, node counts and tolerance for the `(w, y)` double
/// integrals.
///
/// Defaults: `w_max` solves for an `f_W` tail mass of 1e-12 (about 7.13 for
/// `m = 1`), `y_max = 8`, 200 nodes per axis, absolute tolerance 1e-9.
/// Doubling the node counts is the convergence check: every direct kernel
/// evaluation and table build compares the rule against its doubled version
/// and reports non-convergence if they disagree beyond `abs_tol`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Upper truncation of the `w` integral.
    pub w_max: f64,
    /// Half-width of the `y` integral, taken over `[-y_max, y_max]`.
    pub y_max: f64,
    /// Total node budget for the `w` axis.
    pub nodes_w: usize,
    /// Total node budget for the `y` axis.
    pub nodes_y: usize,
    /// Absolute tolerance for quadrature self-consistency.
    pub abs_tol: f64,
}

impl QuadratureSpec {
    /// Defaults for a given residual degrees of freedom.
    pub fn default_for(m: DegreesOfFreedom) -> Self {
        Self {
            w_max: w_upper_bound(m, 1e-12),
            y_max: 8.0,
            nodes_w: 200,
            nodes_y: 200,
            abs_tol: 1e-9,
        }
    }

    /// Same spec with both node budgets doubled.
    pub fn doubled(&self) -> Self {
        Self {
            nodes_w: self.nodes_w * 2,
            nodes_y: self.nodes_y * 2,
            ..*self
        }
    }

    /// Checks the truncation invariants: `f_W` mass beyond `w_max` and the
    /// normal mass beyond `y_max` must both be below `abs_tol / 10`.
    pub fn validate(&self, m: DegreesOfFreedom) -> Result<()> {
        if !(self.w_max > 0.0) || !(self.y_max > 0.0) {
            return Err(Error::Domain("truncation bounds must be positive".into()));
        }
        if self.nodes_w == 0 || self.nodes_y == 0 {
            return Err(Error::Domain("node counts must be positive".into()));
        }
        if !(self.abs_tol > 0.0) {
            return Err(Error::Domain("abs_tol must be positive".into()));
        }
        let w_tail = gamma_q(0.5 * m.as_f64(), 0.5 * m.as_f64() * self.w_max * self.w_max);
        if w_tail >= self.abs_tol / 10.0 {
            return Err(Error::Domain(format!(
                "f_W tail mass beyond w_max = {} is {w_tail:e}, not below abs_tol/10",
                self.w_max
            )));
        }
        let y_tail = normal_cdf(-self.y_max);
        if y_tail >= self.abs_tol / 10.0 {
            return Err(Error::Domain(format!(
                "normal tail mass beyond y_max = {} is {y_tail:e}, not below abs_tol/10",
                self.y_max
            )));
        }
        Ok(())
    }

    /// Rule for the `w` axis: `[w_lo, w_max]` where the lower cutoff trims
    /// the negligible near-zero region for large `m` (it is 0 for small `m`,
    /// which keeps the `m = 1` half-normal shape fully covered).
    pub(crate) fn w_rule(&self, m: DegreesOfFreedom) -> (Vec<f64>, Vec<f64>) {
        let w_lo = w_lower_bound(m, 1e-14).min(self.w_max * 0.5);
        composite_gauss_legendre(w_lo, self.w_max, self.nodes_w)
    }

    /// Rule for the `y` axis on `[-y_max, y_max]`.
    pub(crate) fn y_rule(&self) -> (Vec<f64>, Vec<f64>) {
        composite_gauss_legendre(-self.y_max, self.y_max, self.nodes_y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gauss_legendre_small_orders() {
        let (x, w) = gauss_legendre(2);
        assert_abs_diff_eq!(x[1], 1.0 / 3.0_f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(w[0], 1.0, epsilon = 1e-15);
        let (x, w) = gauss_legendre(5);
        assert_abs_diff_eq!(x[2], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(w.iter().sum::<f64>(), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn polynomial_exactness() {
        // n-point Gauss integrates degree 2n-1 exactly.
        let (x, w) = gauss_legendre(8);
        for deg in 0..=15u32 {
            let int: f64 = x
                .iter()
                .zip(&w)
                .map(|(&xi, &wi)| xi.powi(deg as i32) * wi)
                .sum();
            let exact = if deg % 2 == 0 {
                2.0 / (deg as f64 + 1.0)
            } else {
                0.0
            };
            assert_abs_diff_eq!(int, exact, epsilon = 1e-13);
        }
    }

    #[test]
    fn composite_rule_integrates_smooth_functions() {
        let (nodes, weights) = composite_gauss_legendre(0.0, std::f64::consts::PI, 100);
        let int: f64 = nodes.iter().zip(&weights).map(|(&x, &w)| x.sin() * w).sum();
        assert_abs_diff_eq!(int, 2.0, epsilon = 1e-13);
        // Oriented integral flips sign.
        let (nodes, weights) = composite_gauss_legendre(std::f64::consts::PI, 0.0, 100);
        let int: f64 = nodes.iter().zip(&weights).map(|(&x, &w)| x.sin() * w).sum();
        assert_abs_diff_eq!(int, -2.0, epsilon = 1e-13);
    }

    #[test]
    fn w_bounds_bracket_the_mass() {
        for m in [1u32, 2, 3, 10, 100, 10_000] {
            let m = DegreesOfFreedom::new(m).unwrap();
            let hi = w_upper_bound(m, 1e-12);
            let a = 0.5 * m.as_f64();
            assert!(gamma_q(a, a * hi * hi) <= 1e-12);
            assert!(gamma_q(a, a * (hi * 0.99) * (hi * 0.99)) > 1e-12);
            let lo = w_lower_bound(m, 1e-14);
            assert!(gamma_p(a, a * lo * lo) <= 1e-14);
            assert!(lo < hi);
        }
        // m = 1 tail is the half-normal: w_max near 7.13 for 1e-12.
        let w1 = w_upper_bound(DegreesOfFreedom::new(1).unwrap(), 1e-12);
        assert!((w1 - 7.13).abs() < 0.01, "w_max(1) = {w1}");
    }

    #[test]
    fn spec_validation() {
        let m = DegreesOfFreedom::new(1).unwrap();
        let spec = QuadratureSpec::default_for(m);
        spec.validate(m).unwrap();
        let bad = QuadratureSpec { w_max: 2.0, ..spec };
        assert!(bad.validate(m).is_err());
        let bad = QuadratureSpec { y_max: 3.0, ..spec };
        assert!(bad.validate(m).is_err());
    }
}
