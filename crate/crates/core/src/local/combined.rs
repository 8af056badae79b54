use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{filtered_state, measurement_scenario, psi2, FilterConfig};
use crate::bell::{
    build_bell_operator, maximize_scalar, threshold_of, Bisection, SolverOptions, DELTA_GRID_POINTS, DELTA_RANGE,
    DELTA_TOLERANCE,
};
use crate::error::{Error, Result};
use crate::fock::DensityOperator;
use crate::source::region::{candidates, Candidate};
use crate::source::{SourceConfig, SourceOptimum, SourceSearch};

/// Local-filter thresholds with ψ₂ as input and with the amplified source
/// (optimized over its (λ, t) grid at every transmission) as input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinedReport {
    pub filter: FilterConfig,
    pub psi2: Bisection,
    pub source: Bisection,
    /// Same as `source` with Alice and Bob exchanged.
    pub source_exchanged: Bisection,
    /// Best source point at the violating end of the `source` bracket.
    pub source_optimum: Option<SourceOptimum>,
}

impl CombinedReport {
    /// `η_t*(ψ₂) − η_t*(source)`; positive means the source helps.
    pub fn improvement(&self) -> Option<f64> {
        Some(self.psi2.threshold? - self.source.threshold?)
    }
}

fn swap_parties(rho: &DensityOperator) -> Result<DensityOperator> {
    let basis = rho.basis();
    let c = basis.cutoffs();
    if c.len() != 2 || c[0] != c[1] {
        return Err(Error::BasisMismatch("party exchange needs equal cutoffs".into()));
    }
    let swapped: Vec<usize> = basis
        .iter()
        .map(|o| basis.index_of(&[o[1], o[0]]).expect("symmetric basis"))
        .collect();
    let m = rho.matrix();
    let mut out = m.clone();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out[(swapped[i], swapped[j])] = m[(i, j)];
        }
    }
    DensityOperator::new(basis.clone(), out)
}

/// Best δ-optimized CHSH over the filtered family at one transmission.
fn best_filtered(
    family: &[Candidate],
    states: &[DensityOperator],
    filter: &FilterConfig,
    transmission: f64,
    options: &SolverOptions,
) -> Result<SourceOptimum> {
    let filtered: Vec<DensityOperator> = states
        .par_iter()
        .map(|rho| filtered_state(rho, filter, transmission))
        .collect::<Result<_>>()?;
    let basis = filtered[0].basis().clone();
    let cutoff = basis.cutoffs().iter().copied().max().unwrap_or(0);
    let scenario = measurement_scenario(filter, cutoff, options)?;
    let value = |delta: f64| -> Result<(f64, usize)> {
        let b = build_bell_operator(&scenario.with_delta(delta))?.project(&basis)?;
        let mut best = (f64::NEG_INFINITY, 0);
        for (i, rho) in filtered.iter().enumerate() {
            let v = rho.expectation(&b)?;
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
    let c = &family[value(delta)?.1];
    Ok(SourceOptimum {
        chsh,
        delta,
        squeezing: c.squeezing,
        transmission: c.transmission,
        success_probability: c.success_probability,
    })
}

pub fn combined_source_and_local(
    base: &SourceConfig,
    search: &SourceSearch,
    filter: &FilterConfig,
    options: &SolverOptions,
) -> Result<CombinedReport> {
    filter.validate()?;
    let input = DensityOperator::from_pure(&psi2());
    let psi2 = super::filtered_critical_transmission(&input, filter, options)?.bisection;

    // coupling loss is already part of the source states
    let at_source = FilterConfig {
        coupling: 1.0,
        ..*filter
    };
    let base = SourceConfig {
        coupling: filter.coupling,
        ..*base
    };
    let family = candidates(&base, search)?;
    if family.is_empty() {
        return Err(Error::ZeroProbability(
            "the source herald never fires on the search grid".into(),
        ));
    }
    let states: Vec<DensityOperator> = family.iter().map(|c| c.state.clone()).collect();
    let exchanged: Vec<DensityOperator> = states.iter().map(swap_parties).collect::<Result<_>>()?;
    let solve = |states: &[DensityOperator]| {
        threshold_of(
            |eta| Ok(best_filtered(&family, states, &at_source, eta, options)?.chsh),
            options.tolerance,
        )
    };
    let source = solve(&states)?;
    let source_exchanged = solve(&exchanged)?;
    let source_optimum = match source.threshold {
        Some(_) => Some(best_filtered(&family, &states, &at_source, source.upper, options)?),
        None => None,
    };
    Ok(CombinedReport {
        filter: *filter,
        psi2,
        source,
        source_exchanged,
        source_optimum,
    })
}
