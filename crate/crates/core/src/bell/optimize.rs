use serde::{Deserialize, Serialize};

use super::operator::{build_bell_operator, chsh_value, StateSource};
use super::scenario::BellScenario;
use crate::error::{Error, Result};
use crate::fock::StateVector;

/// Search domain for the bin half-width.
pub const DELTA_RANGE: (f64, f64) = (0.0, 6.0);
pub const DELTA_GRID_POINTS: usize = 241;
pub const DELTA_TOLERANCE: f64 = 1e-6;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Grid scan followed by golden-section refinement around the best grid
/// point. Returns `(argmax, max)`; a flat objective gives the first grid
/// maximizer.
pub fn maximize_scalar<F>(f: F, lower: f64, upper: f64, grid_points: usize, tol: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    if lower.is_nan() || upper.is_nan() || lower > upper || grid_points < 2 {
        return Err(Error::InvalidParameter {
            name: "grid",
            reason: format!("need lower ≤ upper and ≥ 2 points, got [{lower}, {upper}] with {grid_points}"),
        });
    }
    let step = (upper - lower) / (grid_points - 1) as f64;
    let xs: Vec<f64> = (0..grid_points).map(|i| lower + step * i as f64).collect();
    maximize_on_grid(f, &xs, tol)
}

/// As [`maximize_scalar`] on an arbitrary increasing grid.
pub fn maximize_on_grid<F>(f: F, xs: &[f64], tol: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut best = (xs[0], f(xs[0])?);
    let mut ibest = 0;
    for (i, &x) in xs.iter().enumerate().skip(1) {
        let v = f(x)?;
        if v > best.1 {
            best = (x, v);
            ibest = i;
        }
    }
    let a = xs[ibest.saturating_sub(1)];
    let b = xs[(ibest + 1).min(xs.len() - 1)];
    let refined = golden_section(&f, a, b, tol)?;
    Ok(if refined.1 > best.1 { refined } else { best })
}

/// Golden-section search for a maximum on `[a, b]`.
pub fn golden_section<F>(f: &F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc >= fd { (c, fc) } else { (d, fd) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaOptimum {
    pub delta: f64,
    pub chsh: f64,
}

/// Optimize the shared bin half-width for `scenario` (its own δ is ignored).
pub fn optimize_delta(scenario: &BellScenario, source: &StateSource) -> Result<DeltaOptimum> {
    let mut base = *scenario;
    base.bob_delta = None;
    base.cutoff = base.cutoff.max(source.required_cutoff());
    let objective = |delta: f64| {
        let b = build_bell_operator(&base.with_delta(delta))?;
        Ok(chsh_value(&b, source)?.0)
    };
    let (delta, chsh) = maximize_scalar(
        objective,
        DELTA_RANGE.0,
        DELTA_RANGE.1,
        DELTA_GRID_POINTS,
        DELTA_TOLERANCE,
    )?;
    Ok(DeltaOptimum { delta, chsh })
}

/// Outcome of a δ-and-state optimization.
#[derive(Debug, Clone, PartialEq)]
pub struct BellResult {
    pub chsh_value: f64,
    /// Optimal (or given) pure state; `None` for mixed inputs.
    pub optimal_state: Option<StateVector>,
    pub optimal_delta: f64,
    pub violated: bool,
}

/// Optimize δ (and the state, for [`StateSource::OptimalSubspace`]).
pub fn evaluate(scenario: &BellScenario, source: &StateSource) -> Result<BellResult> {
    let opt = optimize_delta(scenario, source)?;
    let mut s = *scenario;
    s.bob_delta = None;
    s.cutoff = s.cutoff.max(source.required_cutoff());
    let b = build_bell_operator(&s.with_delta(opt.delta))?;
    let (chsh, state) = chsh_value(&b, source)?;
    Ok(BellResult {
        chsh_value: chsh,
        optimal_state: state,
        optimal_delta: opt.delta,
        violated: super::operator::is_violation(chsh),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_peak() {
        let (x, v) = golden_section(&|x: f64| Ok(-(x - 0.3) * (x - 0.3) + 1.0), 0.0, 1.0, 1e-9).unwrap();
        assert!((x - 0.3).abs() < 1e-8);
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn flat_objective_returns_grid_point() {
        let (x, v) = maximize_scalar(|_| Ok(2.0), 0.0, 6.0, 201, 1e-6).unwrap();
        assert_eq!(v, 2.0);
        assert_eq!(x, 0.0);
    }

    #[test]
    fn rejects_degenerate_grid() {
        assert!(maximize_scalar(|_| Ok(0.0), 1.0, 0.0, 10, 1e-6).is_err());
        assert!(maximize_scalar(|_| Ok(0.0), 0.0, 1.0, 1, 1e-6).is_err());
    }
}
