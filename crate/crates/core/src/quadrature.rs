//! Gauss-Legendre rules and Richardson-extrapolated trapezoid rules.

use crate::error::{invalid, Result};

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "a Gauss rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Chebyshev-like initial guess, then Newton on P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss rule mapped to `[lo, hi]`, weights normalised to sum to 1.
pub fn gauss_on(lo: f64, hi: f64, n: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(n);
    let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
    x.iter().zip(&w).map(|(&x, &w)| (mid + half * x, 0.5 * w)).collect()
}

/// Mean of `f` over `[lo, hi]` with an `n`-point rule.
pub fn average<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, n: usize) -> f64 {
    gauss_on(lo, hi, n).into_iter().map(|(x, w)| w * f(x)).sum()
}

/// Richardson combinations of composite trapezoid sums `S_1, S_2, S_4, ..`
/// (`S_n` uses `n` subintervals) reaching order `q`, coarsest sum first.
const RICHARDSON: [&[f64]; 4] = [
    &[-1.0 / 3.0, 4.0 / 3.0],
    &[1.0 / 45.0, -20.0 / 45.0, 64.0 / 45.0],
    &[-1.0 / 2835.0, 84.0 / 2835.0, -1344.0 / 2835.0, 4096.0 / 2835.0],
    &[
        0.000001383269357,
        -0.000470311581423,
        0.031604938271605,
        -0.481599059376837,
        1.450463049417298,
    ],
];

/// Coefficients of the order-`q` combination, `q` in `{4, 6, 8, 10}`.
pub fn richardson_coefficients(q: usize) -> Result<&'static [f64]> {
    match q {
        4 | 6 | 8 | 10 => Ok(RICHARDSON[q / 2 - 2]),
        _ => invalid(format!("Richardson order must be 4, 6, 8 or 10, got {q}")),
    }
}

/// Number of subintervals of the finest trapezoid sum for order `q`; the
/// combination samples `finest + 1` equispaced nodes including both ends.
pub fn richardson_finest(q: usize) -> Result<usize> {
    Ok(1 << (richardson_coefficients(q)?.len() - 1))
}

/// Order-`q` value from samples of a trapezoid integrand.
///
/// `segment(a, b)` returns the trapezoid contribution of the subinterval
/// between node indices `a < b` of the finest node set; the result is the
/// Richardson combination of the nested sums `sum segment(k, k + step)`.
pub fn richardson_combine(q: usize, mut segment: impl FnMut(usize, usize) -> f64) -> Result<f64> {
    let coeffs = richardson_coefficients(q)?;
    let finest = richardson_finest(q)?;
    let mut total = 0.0;
    for (level, c) in coeffs.iter().enumerate() {
        let step = finest >> level;
        let s: f64 = (0..finest / step).map(|k| segment(k * step, (k + 1) * step)).sum();
        total += c * s;
    }
    Ok(total)
}

/// Mean of `f` over `[lo, hi]` by the order-`q` Richardson trapezoid rule.
pub fn richardson_average<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, q: usize) -> Result<f64> {
    let finest = richardson_finest(q)?;
    let vals: Vec<f64> = (0..=finest).map(|k| f(lo + (hi - lo) * k as f64 / finest as f64)).collect();
    richardson_combine(q, |a, b| 0.5 * (vals[a] + vals[b]) * (b - a) as f64 / finest as f64)
}
