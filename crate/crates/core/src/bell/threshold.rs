use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::operator::{is_violation, StateSource};
use super::optimize::{evaluate, BellResult};
use super::scenario::{BellScenario, Symmetry};
use crate::error::{check_unit_interval, Result};
use crate::measurement::HomodyneConvention;

/// Bracket width at which bisection stops.
pub const BISECTION_TOLERANCE: f64 = 1e-4;

/// Bisection on `[0, 1]` for the smallest parameter at which `violates`
/// holds, assuming it is monotone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bisection {
    /// Midpoint of the final bracket; `None` when even 1 does not violate.
    pub threshold: Option<f64>,
    pub lower: f64,
    pub upper: f64,
    pub iterations: usize,
}

impl Bisection {
    pub fn bracket_width(&self) -> f64 {
        self.upper - self.lower
    }
}

pub fn bisect_threshold<F>(violates: F, tol: f64) -> Result<Bisection>
where
    F: Fn(f64) -> Result<bool>,
{
    if !violates(1.0)? {
        return Ok(Bisection {
            threshold: None,
            lower: 1.0,
            upper: 1.0,
            iterations: 0,
        });
    }
    if violates(0.0)? {
        return Ok(Bisection {
            threshold: Some(0.0),
            lower: 0.0,
            upper: 0.0,
            iterations: 0,
        });
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut iterations = 0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if violates(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
        iterations += 1;
    }
    Ok(Bisection {
        threshold: Some(0.5 * (lo + hi)),
        lower: lo,
        upper: hi,
        iterations,
    })
}

/// Which efficiency is solved for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdTarget {
    Transmission,
    Detection,
}

/// Settings shared by every point of a threshold solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub cutoff: usize,
    pub homodyne_efficiency: f64,
    pub convention: HomodyneConvention,
    pub tolerance: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            cutoff: super::scenario::DEFAULT_CUTOFF,
            homodyne_efficiency: 1.0,
            convention: HomodyneConvention::default(),
            tolerance: BISECTION_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdSolve {
    pub bisection: Bisection,
    /// Optimized result at the violating end of the final bracket.
    pub at_threshold: Option<BellResult>,
}

impl ThresholdSolve {
    pub fn threshold(&self) -> Option<f64> {
        self.bisection.threshold
    }
}

/// Scenario with the target efficiency set to `value` and the other one to
/// `fixed`.
pub fn scenario_for(
    target: ThresholdTarget,
    value: f64,
    fixed: f64,
    symmetry: Symmetry,
    options: &SolverOptions,
) -> Result<BellScenario> {
    let (transmission, detection) = match target {
        ThresholdTarget::Transmission => (value, fixed),
        ThresholdTarget::Detection => (fixed, value),
    };
    Ok(BellScenario::new(symmetry, transmission, detection)?
        .with_cutoff(options.cutoff)
        .with_convention(options.convention)
        .with_homodyne_efficiency(options.homodyne_efficiency))
}

/// Smallest value of `target` (with the other efficiency at `fixed`) for
/// which the δ-optimized CHSH value of `source` exceeds 2.
pub fn critical_efficiency(
    target: ThresholdTarget,
    fixed: f64,
    symmetry: Symmetry,
    source: &StateSource,
    options: &SolverOptions,
) -> Result<ThresholdSolve> {
    check_unit_interval("fixed efficiency", fixed)?;
    let run = |v: f64| evaluate(&scenario_for(target, v, fixed, symmetry, options)?, source);
    let bisection = bisect_threshold(|v| Ok(run(v)?.violated), options.tolerance)?;
    let at_threshold = match bisection.threshold {
        Some(_) => Some(run(bisection.upper)?),
        None => None,
    };
    Ok(ThresholdSolve {
        bisection,
        at_threshold,
    })
}

/// One point of a violation-region boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryPoint {
    pub detection_efficiency: f64,
    pub solve: ThresholdSolve,
}

impl BoundaryPoint {
    pub fn critical_transmission(&self) -> Option<f64> {
        self.solve.threshold()
    }
}

/// Critical transmission for every detection efficiency of `grid`, solved in
/// parallel and returned in grid order.
pub fn region_boundary(
    grid: &[f64],
    symmetry: Symmetry,
    source: &StateSource,
    options: &SolverOptions,
) -> Result<Vec<BoundaryPoint>> {
    for &d in grid {
        check_unit_interval("detection efficiency", d)?;
    }
    grid.par_iter()
        .map(|&d| {
            Ok(BoundaryPoint {
                detection_efficiency: d,
                solve: critical_efficiency(ThresholdTarget::Transmission, d, symmetry, source, options)?,
            })
        })
        .collect()
}

/// Bisection for a generic CHSH objective `chsh(value)`.
pub fn threshold_of<F>(chsh: F, tol: f64) -> Result<Bisection>
where
    F: Fn(f64) -> Result<f64>,
{
    bisect_threshold(|v| Ok(is_violation(chsh(v)?)), tol)
}
