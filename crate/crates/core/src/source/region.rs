use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{amplified_source, SourceConfig};
use crate::bell::{
    build_bell_operator, golden_section, maximize_scalar, scenario_for, threshold_of, Bisection, SolverOptions,
    Symmetry, ThresholdTarget, DELTA_GRID_POINTS, DELTA_RANGE, DELTA_TOLERANCE,
};
use crate::error::{check_unit_interval, Error, Result};
use crate::fock::DensityOperator;

/// Grids for the (λ, t) search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceSearch {
    pub squeezing: Vec<f64>,
    pub transmission: Vec<f64>,
    /// Golden-section refinement of log t around the best grid point.
    pub refine: bool,
}

impl Default for SourceSearch {
    /// 40 squeezing values on (0, 0.4] and 60 log-spaced transmissions on
    /// [1e-4, 1).
    fn default() -> Self {
        Self {
            squeezing: (1..=40).map(|i| 0.01 * i as f64).collect(),
            transmission: log_spaced(1e-4, 0.999, 60),
            refine: true,
        }
    }
}

/// `n` points from `lo` to `hi` evenly spaced in log scale.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Best source output for one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceOptimum {
    pub chsh: f64,
    pub delta: f64,
    pub squeezing: f64,
    pub transmission: f64,
    pub success_probability: f64,
}

pub(crate) struct Candidate {
    pub(crate) squeezing: f64,
    pub(crate) transmission: f64,
    pub(crate) success_probability: f64,
    pub(crate) state: DensityOperator,
}

/// Heralded source states over the (λ, t) grid; points where the herald never
/// fires are dropped.
pub(crate) fn candidates(base: &SourceConfig, search: &SourceSearch) -> Result<Vec<Candidate>> {
    if search.squeezing.is_empty() || search.transmission.is_empty() {
        return Err(Error::InvalidParameter {
            name: "source search",
            reason: "empty squeezing or transmission grid".into(),
        });
    }
    let pairs: Vec<(f64, f64)> = search
        .squeezing
        .iter()
        .flat_map(|&l| search.transmission.iter().map(move |&t| (l, t)))
        .collect();
    let out: Vec<Option<Candidate>> = pairs
        .par_iter()
        .map(|&(squeezing, transmission)| {
            let outcome = amplified_source(&SourceConfig {
                squeezing,
                transmission,
                ..*base
            })?;
            Ok(outcome.state.map(|state| Candidate {
                squeezing,
                transmission,
                success_probability: outcome.success_probability,
                state,
            }))
        })
        .collect::<Result<_>>()?;
    Ok(out.into_iter().flatten().collect())
}

fn best_over<'a>(
    family: &'a [Candidate],
    transmission: f64,
    detection: f64,
    symmetry: Symmetry,
    options: &SolverOptions,
) -> Result<(f64, f64, &'a Candidate)> {
    let cutoff = family[0].state.basis().cutoffs()[0].max(options.cutoff);
    let opts = SolverOptions { cutoff, ..*options };
    let base = scenario_for(ThresholdTarget::Transmission, transmission, detection, symmetry, &opts)?;
    let value = |delta: f64| -> Result<(f64, usize)> {
        let b = build_bell_operator(&base.with_delta(delta))?;
        let mut best = (f64::NEG_INFINITY, 0);
        for (i, c) in family.iter().enumerate() {
            let bell = b.project(c.state.basis())?;
            let v = c.state.expectation(&bell)?;
            if v > best.0 {
                best = (v, i);
            }
        }
        Ok(best)
    };
    let (delta, chsh) = maximize_scalar(
        |d| Ok(value(d)?.0),
        DELTA_RANGE.0,
        DELTA_RANGE.1,
        DELTA_GRID_POINTS,
        DELTA_TOLERANCE,
    )?;
    let (_, i) = value(delta)?;
    Ok((chsh, delta, &family[i]))
}

fn delta_optimized(
    state: &DensityOperator,
    transmission: f64,
    detection: f64,
    symmetry: Symmetry,
    options: &SolverOptions,
) -> Result<(f64, f64)> {
    let cutoff = state.basis().cutoffs()[0].max(options.cutoff);
    let opts = SolverOptions { cutoff, ..*options };
    let base = scenario_for(ThresholdTarget::Transmission, transmission, detection, symmetry, &opts)?;
    let (delta, chsh) = maximize_scalar(
        |d| {
            let b = build_bell_operator(&base.with_delta(d))?.project(state.basis())?;
            state.expectation(&b)
        },
        DELTA_RANGE.0,
        DELTA_RANGE.1,
        DELTA_GRID_POINTS,
        DELTA_TOLERANCE,
    )?;
    Ok((chsh, delta))
}

fn optimize_in_family(
    family: &[Candidate],
    base: &SourceConfig,
    search: &SourceSearch,
    transmission: f64,
    detection: f64,
    symmetry: Symmetry,
    options: &SolverOptions,
) -> Result<SourceOptimum> {
    let (chsh, delta, c) = best_over(family, transmission, detection, symmetry, options)?;
    let mut best = SourceOptimum {
        chsh,
        delta,
        squeezing: c.squeezing,
        transmission: c.transmission,
        success_probability: c.success_probability,
    };
    if !search.refine || search.transmission.len() < 2 {
        return Ok(best);
    }
    // golden section in ln t between the grid neighbours of the best t
    let grid = &search.transmission;
    let k = grid.iter().position(|&t| t == best.transmission).unwrap_or(0);
    let lo = grid[k.saturating_sub(1)].ln();
    let hi = grid[(k + 1).min(grid.len() - 1)].ln();
    let squeezing = best.squeezing;
    let eval = |log_t: f64| -> Result<f64> {
        let out = amplified_source(&SourceConfig {
            squeezing,
            transmission: log_t.exp(),
            ..*base
        })?;
        match out.state {
            Some(rho) => Ok(delta_optimized(&rho, transmission, detection, symmetry, options)?.0),
            None => Ok(f64::NEG_INFINITY),
        }
    };
    let (log_t, value) = golden_section(&eval, lo, hi, 1e-4)?;
    if value > best.chsh {
        let t = log_t.exp();
        let out = amplified_source(&SourceConfig {
            squeezing,
            transmission: t,
            ..*base
        })?;
        let rho = out.require_state()?;
        let (chsh, delta) = delta_optimized(rho, transmission, detection, symmetry, options)?;
        best = SourceOptimum {
            chsh,
            delta,
            squeezing,
            transmission: t,
            success_probability: out.success_probability,
        };
    }
    Ok(best)
}

/// Maximize the CHSH value over source parameters and δ at fixed channel
/// transmission and detection efficiency.
pub fn optimize_source(
    base: &SourceConfig,
    search: &SourceSearch,
    transmission: f64,
    detection: f64,
    symmetry: Symmetry,
    options: &SolverOptions,
) -> Result<SourceOptimum> {
    let family = candidates(base, search)?;
    optimize_in_family(&family, base, search, transmission, detection, symmetry, options)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceBoundaryPoint {
    pub detection_efficiency: f64,
    pub bisection: Bisection,
    /// Source optimum at the violating end of the final bracket.
    pub optimum: Option<SourceOptimum>,
}

impl SourceBoundaryPoint {
    pub fn critical_transmission(&self) -> Option<f64> {
        self.bisection.threshold
    }
}

/// Critical transmission per detection efficiency with source parameters
/// optimized at every bisection step. The coupling efficiency is taken from
/// `base`.
pub fn source_region_boundary(
    grid: &[f64],
    symmetry: Symmetry,
    base: &SourceConfig,
    search: &SourceSearch,
    options: &SolverOptions,
) -> Result<Vec<SourceBoundaryPoint>> {
    for &d in grid {
        check_unit_interval("detection efficiency", d)?;
    }
    if grid.is_empty() {
        return Ok(Vec::new());
    }
    let family = candidates(base, search)?;
    grid.par_iter()
        .map(|&d| {
            let bisection = threshold_of(
                |eta| Ok(optimize_in_family(&family, base, search, eta, d, symmetry, options)?.chsh),
                options.tolerance,
            )?;
            let optimum = match bisection.threshold {
                Some(_) => Some(optimize_in_family(
                    &family,
                    base,
                    search,
                    bisection.upper,
                    d,
                    symmetry,
                    options,
                )?),
                None => None,
            };
            Ok(SourceBoundaryPoint {
                detection_efficiency: d,
                bisection,
                optimum,
            })
        })
        .collect()
}
