//! Shared numerical primitives: deterministic summation, discrete norms,
//! least-squares slope fits, and finite-difference probes.

/// Fixed-order pairwise summation. Splitting is by index halving, so the
/// result is a pure function of the slice contents; norms and integrals
/// built on it are identical regardless of evaluation order elsewhere.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        2 => values[0] + values[1],
        3 => (values[0] + values[1]) + values[2],
        n => {
            let mid = n / 2;
            pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
        }
    }
}

/// Sum of `f(i)` for `i in 0..n` without materialising the slice.
pub fn pairwise_sum_by<F: Fn(usize) -> f64>(n: usize, f: F) -> f64 {
    fn go<F: Fn(usize) -> f64>(lo: usize, hi: usize, f: &F) -> f64 {
        match hi - lo {
            0 => 0.0,
            1 => f(lo),
            2 => f(lo) + f(lo + 1),
            _ => {
                let mid = lo + (hi - lo) / 2;
                go(lo, mid, f) + go(mid, hi, f)
            }
        }
    }
    go(0, n, &f)
}

/// Discrete L^q norm of `values` with uniform cell weight `w`:
/// `(sum |v|^q w)^(1/q)`. `q` need not be an integer.
pub fn lq_norm(values: &[f64], q: f64, w: f64) -> f64 {
    assert!(q >= 1.0, "lq_norm requires q >= 1");
    let s = pairwise_sum_by(values.len(), |i| values[i].abs().powf(q));
    (s * w).powf(1.0 / q)
}

/// Max norm.
pub fn max_norm(values: &[f64]) -> f64 {
    values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Least-squares slope of `ln y` against `ln x`. Entries with `y <= 0` are
/// skipped (they carry no scaling information). Returns `None` when fewer
/// than two usable points remain.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    assert_eq!(xs.len(), ys.len());
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let sx = pairwise_sum_by(pts.len(), |i| pts[i].0);
    let sy = pairwise_sum_by(pts.len(), |i| pts[i].1);
    let sxx = pairwise_sum_by(pts.len(), |i| pts[i].0 * pts[i].0);
    let sxy = pairwise_sum_by(pts.len(), |i| pts[i].0 * pts[i].1);
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return None;
    }
    Some((n * sxy - sx * sy) / denom)
}

/// Trapezoid rule over sampled values at uniform spacing `h`.
pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let interior = pairwise_sum(&values[1..values.len() - 1]);
    h * (0.5 * values[0] + interior + 0.5 * values[values.len() - 1])
}

/// Central difference derivative of a closure.
pub fn central_diff<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Nodes and weights for `n`-point Gauss-Legendre quadrature on [-1, 1],
/// computed by Newton iteration on the Legendre polynomial. Used for the
/// singular-integrand diagnostics where midpoint sums converge too slowly.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Chebyshev initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_deriv(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_deriv(n, x);
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn legendre_with_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}
