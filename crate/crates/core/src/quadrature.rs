//! Small quadrature helpers shared by the stationary solvers and diagnostics.

/// Five-point Gauss-Legendre nodes on [-1, 1].
const GL5_NODES: [f64; 5] =
    [-0.906_179_845_938_664, -0.538_469_310_105_683_1, 0.0, 0.538_469_310_105_683_1, 0.906_179_845_938_664];
const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Integrates `f` over `[a, b]` with the five-point Gauss-Legendre rule
/// (exact for polynomials of degree nine).
pub fn gauss5(a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    GL5_NODES.iter().zip(GL5_WEIGHTS.iter()).map(|(&z, &w)| w * f(mid + half * z)).sum::<f64>() * half
}

/// Gauss points mapped to `[a, b]`, paired with their weights.
pub fn gauss5_points(a: f64, b: f64) -> [(f64, f64); 5] {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut out = [(0.0, 0.0); 5];
    for k in 0..5 {
        out[k] = (mid + half * GL5_NODES[k], half * GL5_WEIGHTS[k]);
    }
    out
}

/// Trapezoid rule for samples `values` on a uniform grid with spacing `h`.
pub fn trapezoid_uniform(values: &[f64], h: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        len => {
            let inner: f64 = values[1..len - 1].iter().sum();
            h * (inner + 0.5 * (values[0] + values[len - 1]))
        }
    }
}

/// Trapezoid rule on an arbitrary increasing grid.
pub fn trapezoid(grid: &[f64], values: &[f64]) -> f64 {
    debug_assert_eq!(grid.len(), values.len());
    grid.windows(2).zip(values.windows(2)).map(|(g, v)| 0.5 * (g[1] - g[0]) * (v[0] + v[1])).sum()
}

/// Cubic Lagrange interpolation of `(xs, ys)` at `x`, using the four nodes
/// closest to the bracketing interval `[xs[k], xs[k+1]]`.
pub fn lagrange4(xs: &[f64], ys: &[f64], k: usize, x: f64) -> f64 {
    let len = xs.len();
    debug_assert!(len >= 4 && k + 1 < len);
    let start = k.saturating_sub(1).min(len - 4);
    let mut acc = 0.0;
    for i in start..start + 4 {
        let mut l = 1.0;
        for j in start..start + 4 {
            if i != j {
                l *= (x - xs[j]) / (xs[i] - xs[j]);
            }
        }
        acc += l * ys[i];
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss5_exact_for_degree_nine() {
        let v = gauss5(-0.3, 1.7, |x| x.powi(9) - 2.0 * x.powi(4) + 1.0);
        let exact = |x: f64| x.powi(10) / 10.0 - 2.0 * x.powi(5) / 5.0 + x;
        assert!((v - (exact(1.7) - exact(-0.3))).abs() < 1e-12);
        let s: f64 = gauss5_points(0.0, 2.0).iter().map(|p| p.1).sum();
        assert!((s - 2.0).abs() < 1e-15);
    }

    #[test]
    fn trapezoid_linear_exact() {
        let xs: Vec<f64> = (0..=10).map(|i| (i as f64 / 10.0).powi(2)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x + 1.0).collect();
        assert!((trapezoid(&xs, &ys) - 2.5).abs() < 1e-14);
        assert!((trapezoid_uniform(&[1.0, 1.0, 1.0], 0.5) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn lagrange4_reproduces_cubics() {
        let xs: Vec<f64> = (0..8).map(|i| (i as f64).powf(1.3)).collect();
        let f = |x: f64| 2.0 * x.powi(3) - x + 0.5;
        let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        for k in 0..7 {
            let x = 0.5 * (xs[k] + xs[k + 1]);
            assert!((lagrange4(&xs, &ys, k, x) - f(x)).abs() < 1e-9 * f(x).abs().max(1.0));
        }
    }
}
