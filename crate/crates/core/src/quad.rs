//! Gauss–Legendre quadrature and polynomial collocation in the through-thickness
//! variable.
//!
//! Nodes and weights are computed by Newton iteration on the Legendre recurrence;
//! differentiation uses the barycentric form of the Lagrange interpolant, which is
//! stable for the small node counts used here (N_t <= 16).

/// Gauss–Legendre nodes and weights on [-1, 1].
///
/// Accurate to machine precision for n up to a few hundred; this crate uses
/// single digits to low tens.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Chebyshev-based initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
        let (_, d) = legendre_with_derivative(n, 0.0);
        weights[n / 2] = 2.0 / (d * d);
    }
    (nodes, weights)
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
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Legendre rule mapped to [a, b].
pub fn gauss_on(a: f64, b: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    (
        x.iter().map(|&xi| mid + half * xi).collect(),
        w.iter().map(|&wi| half * wi).collect(),
    )
}

/// Composite rule: [a, b] split into `panels` equal panels with an n-point
/// Gauss rule on each.
pub fn composite_gauss(a: f64, b: f64, panels: usize, n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(panels >= 1);
    let mut nodes = Vec::with_capacity(panels * n);
    let mut weights = Vec::with_capacity(panels * n);
    let width = (b - a) / panels as f64;
    for p in 0..panels {
        let (x, w) = gauss_on(a + p as f64 * width, a + (p + 1) as f64 * width, n);
        nodes.extend(x);
        weights.extend(w);
    }
    (nodes, weights)
}

/// Dense differentiation matrix for the Lagrange interpolant on arbitrary
/// distinct nodes, in row-major order.
///
/// D[i][j] = l_j'(x_i) with barycentric weights; diagonal entries are set by
/// the row-sum rule so that constants differentiate to exactly zero.
pub fn lagrange_diff_matrix(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let mut bary = vec![1.0; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                bary[i] *= nodes[i] - nodes[j];
            }
        }
        bary[i] = 1.0 / bary[i];
    }
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let v = (bary[j] / bary[i]) / (nodes[i] - nodes[j]);
                d[i * n + j] = v;
                diag -= v;
            }
        }
        d[i * n + i] = diag;
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_integrates_polynomials_exactly() {
        // n-point Gauss is exact through degree 2n-1.
        for n in 1..=12 {
            let (x, w) = gauss_legendre(n);
            for deg in 0..(2 * n) {
                let got: f64 = x
                    .iter()
                    .zip(&w)
                    .map(|(&xi, &wi)| wi * xi.powi(deg as i32))
                    .sum();
                let exact = if deg % 2 == 0 {
                    2.0 / (deg as f64 + 1.0)
                } else {
                    0.0
                };
                assert!(
                    (got - exact).abs() < 1e-13,
                    "n={n} deg={deg}: {got} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn gauss_weights_sum_to_interval_length() {
        let (_, w) = gauss_on(-0.01, 0.01, 8);
        let s: f64 = w.iter().sum();
        assert!((s - 0.02).abs() < 1e-16);
    }

    #[test]
    fn composite_matches_single_panel_on_smooth_integrand() {
        let f = |x: f64| (3.0 * x).sin().exp();
        let (x1, w1) = gauss_on(0.0, 1.0, 40);
        let (x2, w2) = composite_gauss(0.0, 1.0, 5, 12);
        let i1: f64 = x1.iter().zip(&w1).map(|(&x, &w)| w * f(x)).sum();
        let i2: f64 = x2.iter().zip(&w2).map(|(&x, &w)| w * f(x)).sum();
        assert!((i1 - i2).abs() < 1e-13);
    }

    #[test]
    fn diff_matrix_is_exact_on_polynomials() {
        let (x, _) = gauss_legendre(8);
        let d = lagrange_diff_matrix(&x);
        // p(x) = x^5 - 2x^2, p'(x) = 5x^4 - 4x
        let p: Vec<f64> = x.iter().map(|&t| t.powi(5) - 2.0 * t * t).collect();
        for i in 0..x.len() {
            let got: f64 = (0..x.len()).map(|j| d[i * x.len() + j] * p[j]).sum();
            let exact = 5.0 * x[i].powi(4) - 4.0 * x[i];
            assert!((got - exact).abs() < 1e-11);
        }
    }
}
