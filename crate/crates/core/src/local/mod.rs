//! Local noiseless filters `Ĝ(g) = (g−1)n̂ + 1` applied by each party to its
//! incoming light after lossy transmission. Successful filtering is treated
//! as part of state preparation: failed events are discarded, and the
//! filtered state is renormalized by its computed trace.

mod combined;

pub use combined::{combined_source_and_local, CombinedReport};

use std::f64::consts::FRAC_1_SQRT_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bell::{
    evaluate, threshold_of, BellResult, BellScenario, Bisection, SolverOptions, StateSource, Symmetry, ThresholdSolve,
};
use crate::error::{check_unit_interval, Error, Result};
use crate::fock::{DensityOperator, HermitianOperator, LossChannel, ModeBasis, StateVector, C64};

/// `(|20> + |02>)/√2`.
pub fn psi2() -> StateVector {
    let basis = ModeBasis::uniform(2, 2).expect("two modes");
    StateVector::from_terms(&basis, &[(FRAC_1_SQRT_2, &[2, 0]), (FRAC_1_SQRT_2, &[0, 2])])
        .expect("occupations inside the basis")
}

fn check_gain(gain: f64) -> Result<()> {
    if gain.is_finite() && gain >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "gain",
            reason: format!("must be finite and non-negative, got {gain}"),
        })
    }
}

/// Diagonal of `Ĝ(g)^m` on one mode.
pub fn filter_diagonal(gain: f64, applications: u32, cutoff: usize) -> Vec<f64> {
    (0..=cutoff)
        .map(|n| ((gain - 1.0) * n as f64 + 1.0).powi(applications as i32))
        .collect()
}

/// `Ĝ(g)` on a single mode.
pub fn filter_operator(gain: f64, cutoff: usize) -> Result<HermitianOperator> {
    check_gain(gain)?;
    HermitianOperator::from_diagonal(&ModeBasis::single(cutoff), &filter_diagonal(gain, 1, cutoff))
}

/// `|ψ₂>` after loss `η` on both modes, built from its three components:
/// `η²|ψ₂><ψ₂| + η(1−η)(|01><01| + |10><10|) + (1−η)²|00><00|`.
pub fn lossy_psi2(transmission: f64) -> Result<DensityOperator> {
    check_unit_interval("transmission", transmission)?;
    let eta = transmission;
    let psi = psi2();
    let basis = psi.basis().clone();
    let mut rho = DensityOperator::from_pure(&psi).scale(eta * eta);
    for (weight, occupation) in [
        (eta * (1.0 - eta), [0, 1]),
        (eta * (1.0 - eta), [1, 0]),
        ((1.0 - eta) * (1.0 - eta), [0, 0]),
    ] {
        let component = DensityOperator::from_pure(&StateVector::fock(&basis, &occupation)?);
        rho = rho.add(&component.scale(weight))?;
    }
    Ok(rho)
}

/// `(Ĝ^m ⊗ Ĝ^m) ρ (Ĝ^m ⊗ Ĝ^m)† / Tr[...]`.
pub fn apply_filters(rho: &DensityOperator, gain: f64, applications: u32) -> Result<DensityOperator> {
    check_gain(gain)?;
    if applications == 0 {
        return Err(Error::InvalidParameter {
            name: "applications",
            reason: "at least one filter application is needed".into(),
        });
    }
    let basis = rho.basis();
    let cutoff = basis.cutoffs().iter().copied().max().unwrap_or(0);
    let single = filter_diagonal(gain, applications, cutoff);
    let weights: Vec<f64> = basis
        .iter()
        .map(|occ| occ.iter().map(|&n| single[n]).product())
        .collect();
    let mut m = rho.matrix().clone();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            m[(i, j)] *= C64::new(weights[i] * weights[j], 0.0);
        }
    }
    let filtered = DensityOperator::new(basis.clone(), m)?;
    if filtered.trace() <= 0.0 {
        return Err(Error::ZeroProbability("the filters never succeed on this state".into()));
    }
    filtered.normalize()
}

/// Local filtering scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterConfig {
    pub gain: f64,
    /// Filter applications per party.
    pub applications: u32,
    pub detection_efficiency: f64,
    /// Coupling efficiency at the source, folded into both parties' loss.
    pub coupling: f64,
    pub symmetry: Symmetry,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            gain: 2.0,
            applications: 1,
            detection_efficiency: 1.0,
            coupling: 1.0,
            symmetry: Symmetry::Symmetric,
        }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<()> {
        check_gain(self.gain)?;
        if self.applications == 0 {
            return Err(Error::InvalidParameter {
                name: "applications",
                reason: "at least one filter application is needed".into(),
            });
        }
        check_unit_interval("detection efficiency", self.detection_efficiency)?;
        check_unit_interval("coupling efficiency", self.coupling)
    }

    /// Loss seen by (Alice, Bob) at channel transmission `transmission`.
    pub fn losses(&self, transmission: f64) -> [f64; 2] {
        let alice = match self.symmetry {
            Symmetry::Symmetric => transmission,
            Symmetry::Asymmetric => 1.0,
        };
        [self.coupling * alice, self.coupling * transmission]
    }
}

/// Input after per-party loss and local filtering.
pub fn filtered_state(input: &DensityOperator, config: &FilterConfig, transmission: f64) -> Result<DensityOperator> {
    config.validate()?;
    check_unit_interval("transmission", transmission)?;
    if input.basis().mode_count() != 2 {
        return Err(Error::BasisMismatch("filter input must be a two-mode state".into()));
    }
    let [ta, tb] = config.losses(transmission);
    let rho = LossChannel::new(ta)?.apply(input, 0)?;
    let rho = LossChannel::new(tb)?.apply(&rho, 1)?;
    apply_filters(&rho, config.gain, config.applications)
}

/// Measurement scenario after the filters: transmission is already in the
/// state, so only detector and homodyne efficiencies enter the POVMs.
pub(crate) fn measurement_scenario(
    config: &FilterConfig,
    cutoff: usize,
    options: &SolverOptions,
) -> Result<BellScenario> {
    Ok(
        BellScenario::new(Symmetry::Symmetric, 1.0, config.detection_efficiency)?
            .with_cutoff(cutoff.max(options.cutoff))
            .with_convention(options.convention)
            .with_homodyne_efficiency(options.homodyne_efficiency),
    )
}

/// δ-optimized CHSH value of the filtered input at one transmission.
pub fn filtered_chsh(
    input: &DensityOperator,
    config: &FilterConfig,
    transmission: f64,
    options: &SolverOptions,
) -> Result<BellResult> {
    let rho = filtered_state(input, config, transmission)?;
    let cutoff = rho.basis().cutoffs().iter().copied().max().unwrap_or(0);
    evaluate(
        &measurement_scenario(config, cutoff, options)?,
        &StateSource::Mixed(rho),
    )
}

/// Smallest channel transmission at which the filtered input violates.
pub fn filtered_critical_transmission(
    input: &DensityOperator,
    config: &FilterConfig,
    options: &SolverOptions,
) -> Result<ThresholdSolve> {
    config.validate()?;
    let bisection = threshold_of(
        |eta| Ok(filtered_chsh(input, config, eta, options)?.chsh_value),
        options.tolerance,
    )?;
    let at_threshold = match bisection.threshold {
        Some(_) => Some(filtered_chsh(input, config, bisection.upper, options)?),
        None => None,
    };
    Ok(ThresholdSolve {
        bisection,
        at_threshold,
    })
}

/// Least-squares line `y = intercept + slope·x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidParameter {
            name: "fit data",
            reason: format!("need two or more paired points, got {} and {}", x.len(), y.len()),
        });
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter {
            name: "fit data",
            reason: "all abscissae are equal".into(),
        });
    }
    let slope = sxy / sxx;
    let residual: f64 = x.iter().zip(y).map(|(a, b)| (b - my - slope * (a - mx)).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - residual / syy };
    Ok(LinearFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiFilterPoint {
    pub applications: u32,
    pub bisection: Bisection,
    pub delta: Option<f64>,
    pub chsh: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiFilterCurve {
    pub points: Vec<MultiFilterPoint>,
    /// Fit of `ln η_t*` against m over the points that have a threshold.
    pub log_fit: Option<LinearFit>,
}

/// Critical transmission of filtered ψ₂ for `m = 1..=max_applications`.
/// The gain, detection and coupling efficiency come from `config`; its
/// `applications` is ignored.
pub fn multi_filter_curve(
    config: &FilterConfig,
    max_applications: u32,
    options: &SolverOptions,
) -> Result<MultiFilterCurve> {
    let input = DensityOperator::from_pure(&psi2());
    let points: Vec<MultiFilterPoint> = (1..=max_applications)
        .into_par_iter()
        .map(|m| {
            let c = FilterConfig {
                applications: m,
                ..*config
            };
            let solve = filtered_critical_transmission(&input, &c, options)?;
            Ok(MultiFilterPoint {
                applications: m,
                bisection: solve.bisection,
                delta: solve.at_threshold.as_ref().map(|r| r.optimal_delta),
                chsh: solve.at_threshold.as_ref().map(|r| r.chsh_value),
            })
        })
        .collect::<Result<_>>()?;
    let (x, y): (Vec<f64>, Vec<f64>) = points
        .iter()
        .filter_map(|p| match p.bisection.threshold {
            Some(t) if t > 0.0 => Some((p.applications as f64, t.ln())),
            _ => None,
        })
        .unzip();
    let log_fit = if x.len() >= 2 { Some(linear_fit(&x, &y)?) } else { None };
    Ok(MultiFilterCurve { points, log_fit })
}
