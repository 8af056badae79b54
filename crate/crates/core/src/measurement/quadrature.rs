//! Adaptive Gauss–Legendre integration of vector-valued integrands, and the
//! Hermite functions used by the homodyne POVM.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

const ORDER: usize = 20;
const MAX_DEPTH: usize = 40;

fn rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(ORDER))
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
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
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

// P_n(x) and P_n'(x)
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Integrate `f: x ↦ R^len` over `[a, b]` to absolute accuracy `tol` in
/// every component, by recursive bisection of a fixed-order rule.
pub fn integrate_vec<F>(f: &F, len: usize, a: f64, b: f64, tol: f64) -> Result<Vec<f64>>
where
    F: Fn(f64, &mut [f64]),
{
    let mut out = vec![0.0; len];
    if a == b {
        return Ok(out);
    }
    let mut scratch = vec![0.0; len];
    let whole = panel(f, a, b, &mut scratch);
    recurse(f, a, b, whole, tol, 0, &mut scratch, &mut out).map_err(|_| Error::QuadratureFailure {
        lower: a,
        upper: b,
        tolerance: tol,
    })?;
    Ok(out)
}

/// Scalar convenience wrapper around [`integrate_vec`].
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    integrate_vec(&|x, out: &mut [f64]| out[0] = f(x), 1, a, b, tol).map(|v| v[0])
}

#[allow(clippy::too_many_arguments)]
fn recurse<F>(
    f: &F,
    a: f64,
    b: f64,
    whole: Vec<f64>,
    tol: f64,
    depth: usize,
    scratch: &mut [f64],
    out: &mut [f64],
) -> std::result::Result<(), ()>
where
    F: Fn(f64, &mut [f64]),
{
    let m = 0.5 * (a + b);
    let left = panel(f, a, m, scratch);
    let right = panel(f, m, b, scratch);
    let err = whole
        .iter()
        .zip(left.iter().zip(&right))
        .map(|(w, (l, r))| (w - l - r).abs())
        .fold(0.0, f64::max);
    if err <= tol {
        for (o, (l, r)) in out.iter_mut().zip(left.iter().zip(&right)) {
            *o += l + r;
        }
        return Ok(());
    }
    if depth >= MAX_DEPTH {
        return Err(());
    }
    recurse(f, a, m, left, 0.5 * tol, depth + 1, scratch, out)?;
    recurse(f, m, b, right, 0.5 * tol, depth + 1, scratch, out)
}

fn panel<F>(f: &F, a: f64, b: f64, scratch: &mut [f64]) -> Vec<f64>
where
    F: Fn(f64, &mut [f64]),
{
    let (nodes, weights) = rule();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = vec![0.0; scratch.len()];
    for (x, w) in nodes.iter().zip(weights) {
        f(mid + half * x, scratch);
        for (s, v) in acc.iter_mut().zip(scratch.iter()) {
            *s += w * half * v;
        }
    }
    acc
}

/// Normalized Hermite functions ψ_0(x)..ψ_nmax(x) for the quadrature
/// `X = (a + a†)/√2`, via the stable three-term recurrence.
pub fn hermite_functions(x: f64, nmax: usize, out: &mut [f64]) {
    out[0] = PI.powf(-0.25) * (-0.5 * x * x).exp();
    if nmax >= 1 {
        out[1] = 2f64.sqrt() * x * out[0];
    }
    for n in 1..nmax {
        let nf = n as f64;
        out[n + 1] = (2.0 / (nf + 1.0)).sqrt() * x * out[n] - (nf / (nf + 1.0)).sqrt() * out[n - 1];
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(ORDER);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        for k in 0..2 * ORDER {
            let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k as i32)).sum();
            assert!((q - exact).abs() < 1e-13, "degree {k}");
        }
    }

    #[test]
    fn hermite_functions_are_orthonormal() {
        let n = 6;
        let v = integrate_vec(
            &|x, out: &mut [f64]| {
                let mut psi = [0.0; 7];
                hermite_functions(x, n, &mut psi);
                for i in 0..=n {
                    for j in 0..=n {
                        out[i * (n + 1) + j] = psi[i] * psi[j];
                    }
                }
            },
            (n + 1) * (n + 1),
            -12.0,
            12.0,
            1e-13,
        )
        .unwrap();
        for i in 0..=n {
            for j in 0..=n {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((v[i * (n + 1) + j] - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn hermite_low_orders_closed_form() {
        let x: f64 = 0.7;
        let mut psi = [0.0; 3];
        hermite_functions(x, 2, &mut psi);
        let g = PI.powf(-0.25) * (-x * x / 2.0).exp();
        assert!((psi[0] - g).abs() < 1e-15);
        assert!((psi[1] - 2f64.sqrt() * x * g).abs() < 1e-15);
        assert!((psi[2] - (2.0 * x * x - 1.0) / 2f64.sqrt() * g).abs() < 1e-15);
    }
}
