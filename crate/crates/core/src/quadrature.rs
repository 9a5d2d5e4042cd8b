//! Quadrature rules used for θ-integration and normalization checks.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{domain, Result};

/// Nodes and weights of a 1D rule.
#[derive(Clone, Debug)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Maps a rule on `[-1, 1]` onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> Rule {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        Rule {
            nodes: self.nodes.iter().map(|x| mid + half * x).collect(),
            weights: self.weights.iter().map(|w| half * w).collect(),
        }
    }
}

/// Gauss–Legendre rule on `[-1, 1]`, nodes in ascending order.
///
/// Newton iteration on `P_n` from the Tricomi initial guesses.
pub fn gauss_legendre(n: usize) -> Result<Rule> {
    if n == 0 {
        return domain("Gauss-Legendre rule needs at least one node");
    }
    let nf = n as f64;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok(Rule { nodes, weights })
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let nf = n as f64;
    (p1, nf * (x * p1 - p0) / (x * x - 1.0))
}

/// Generalized Gauss–Laguerre rule for `∫₀^∞ u^α e^{−u} f(u) du`
/// (Golub–Welsch on the Jacobi matrix).
pub fn gauss_laguerre(n: usize, alpha: f64) -> Result<Rule> {
    if n == 0 || !(alpha > -1.0) {
        return domain(format!(
            "invalid Gauss-Laguerre rule n = {n}, alpha = {alpha}"
        ));
    }
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        jac[(k, k)] = 2.0 * kf + alpha + 1.0;
        if k + 1 < n {
            let off = ((kf + 1.0) * (kf + 1.0 + alpha)).sqrt();
            jac[(k, k + 1)] = off;
            jac[(k + 1, k)] = off;
        }
    }
    let eig = SymmetricEigen::new(jac);
    let mut nodes: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    nodes.sort_by(f64::total_cmp);
    // polish the eigenvalues by Newton on L_n^α and use the closed-form
    // weights, which keep full relative accuracy for the largest nodes
    let nf = n as f64;
    let ln_ratio = ln_gamma(nf + alpha + 1.0) - ln_gamma(nf + 1.0);
    let mut weights = Vec::with_capacity(n);
    for x in nodes.iter_mut() {
        for _ in 0..10 {
            let (ln, lm1) = laguerre_pair(n, alpha, *x);
            let d = (nf * ln - (nf + alpha) * lm1) / *x;
            let dx = ln / d;
            *x -= dx;
            if dx.abs() <= 1e-15 * x.abs() {
                break;
            }
        }
        let (ln1, _) = laguerre_pair(n + 1, alpha, *x);
        weights.push(ln_ratio.exp() * *x / ((nf + 1.0) * (nf + 1.0) * ln1 * ln1));
    }
    Ok(Rule { nodes, weights })
}

/// `(L_n^α(x), L_{n−1}^α(x))` by the three-term recurrence.
fn laguerre_pair(n: usize, alpha: f64, x: f64) -> (f64, f64) {
    let mut prev = 0.0;
    let mut cur = 1.0;
    for k in 0..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + alpha - x) * cur - (kf + alpha) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

/// `ln Γ(x)` for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = COEF[0];
    let t = x + 7.5;
    for (i, c) in COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Trapezoid weights for a sorted, non-periodic grid.
pub fn trapezoid_weights(grid: &[f64]) -> Vec<f64> {
    let n = grid.len();
    let mut w = vec![0.0; n];
    for k in 0..n.saturating_sub(1) {
        let h = grid[k + 1] - grid[k];
        w[k] += 0.5 * h;
        w[k + 1] += 0.5 * h;
    }
    w
}

/// Weights for a sorted grid sampling one period `[φ₀, φ₀ + 2π)`.
pub fn periodic_weights(grid: &[f64]) -> Vec<f64> {
    let n = grid.len();
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut w = vec![0.0; n];
    for k in 0..n {
        let next = if k + 1 < n {
            grid[k + 1]
        } else {
            grid[0] + two_pi
        };
        let h = next - grid[k];
        w[k] += 0.5 * h;
        w[(k + 1) % n] += 0.5 * h;
    }
    w
}
