use super::scenario::{BellScenario, Party};
use crate::error::{Error, Result};
use crate::fock::{DensityOperator, HermitianOperator, ModeBasis, StateVector};
use crate::measurement::{lossy_binned_homodyne, photodetection_povm, HomodyneConvention};

/// Largest CHSH value any quantum state can reach.
pub const TSIRELSON_BOUND: f64 = 2.0 * std::f64::consts::SQRT_2;

/// A CHSH value counts as a violation only above `2 + VIOLATION_MARGIN`, so
/// that round-off on the local bound is never mistaken for a violation.
pub const VIOLATION_MARGIN: f64 = 1e-9;

pub fn is_violation(chsh: f64) -> bool {
    chsh > 2.0 + VIOLATION_MARGIN
}

/// Dichotomic observables of one party: binned homodyne `x` (+1 inside the
/// bin) and photodetection `n` (+1 on a click).
#[derive(Debug, Clone)]
pub struct PartyObservables {
    pub x: HermitianOperator,
    pub n: HermitianOperator,
}

impl PartyObservables {
    pub fn new(party: &Party, half_width: f64, cutoff: usize, convention: HomodyneConvention) -> Result<Self> {
        let x = lossy_binned_homodyne(party.effective_homodyne(), half_width, cutoff, convention)?.observable()?;
        let n = photodetection_povm(party.effective_detection(), cutoff)?.observable()?;
        Ok(Self { x, n })
    }
}

/// `B = X⊗(X+N) + N⊗(X−N)`, Alice first.
pub fn bell_operator_from(alice: &PartyObservables, bob: &PartyObservables) -> Result<HermitianOperator> {
    let sum = bob.x.add(&bob.n)?;
    let diff = bob.x.sub(&bob.n)?;
    alice.x.tensor(&sum)?.add(&alice.n.tensor(&diff)?)
}

/// Bell operator of `scenario` on the uncapped two-mode basis.
pub fn build_bell_operator(scenario: &BellScenario) -> Result<HermitianOperator> {
    scenario.validate()?;
    let a = PartyObservables::new(&scenario.alice, scenario.delta, scenario.cutoff, scenario.convention)?;
    let b = PartyObservables::new(
        &scenario.bob,
        scenario.bob_half_width(),
        scenario.cutoff,
        scenario.convention,
    )?;
    bell_operator_from(&a, &b)
}

/// Two-mode states with at most two photons in total.
pub fn two_photon_subspace(cutoff: usize) -> ModeBasis {
    ModeBasis::new(&[cutoff, cutoff], Some(2)).expect("two modes")
}

/// What the parties measure.
#[derive(Debug, Clone, PartialEq)]
pub enum StateSource {
    /// Best state with at most two photons in total (top eigenvector).
    OptimalSubspace,
    /// A given pure two-mode state.
    Pure(StateVector),
    /// A given mixed two-mode state.
    Mixed(DensityOperator),
}

impl StateSource {
    /// Per-mode cutoff the measurement operators need to cover the state.
    pub fn required_cutoff(&self) -> usize {
        let cutoffs = match self {
            Self::OptimalSubspace => return 2,
            Self::Pure(s) => s.basis().cutoffs().to_vec(),
            Self::Mixed(r) => r.basis().cutoffs().to_vec(),
        };
        cutoffs.into_iter().max().unwrap_or(0)
    }

    fn check(&self) -> Result<()> {
        let modes = match self {
            Self::OptimalSubspace => return Ok(()),
            Self::Pure(s) => s.basis().mode_count(),
            Self::Mixed(r) => r.basis().mode_count(),
        };
        if modes == 2 {
            Ok(())
        } else {
            Err(Error::BasisMismatch(format!(
                "expected a two-mode state, got {modes} modes"
            )))
        }
    }
}

/// CHSH value of `source` under `bell` (an operator on an uncapped two-mode
/// basis whose cutoffs cover the state), and the state that achieves it when
/// it is pure.
pub fn chsh_value(bell: &HermitianOperator, source: &StateSource) -> Result<(f64, Option<StateVector>)> {
    source.check()?;
    match source {
        StateSource::OptimalSubspace => {
            let cutoff = bell.basis().cutoffs()[0];
            let projected = bell.project(&two_photon_subspace(cutoff))?;
            let (value, vector) = projected.eig()?.max();
            let state = StateVector::new(projected.basis().clone(), vector)?;
            Ok((value, Some(canonical_phase(&state))))
        }
        StateSource::Pure(s) => {
            let b = restrict(bell, s.basis())?;
            Ok((s.expectation(&b)?, Some(s.clone())))
        }
        StateSource::Mixed(rho) => {
            let b = restrict(bell, rho.basis())?;
            Ok((rho.expectation(&b)?, None))
        }
    }
}

fn restrict(bell: &HermitianOperator, basis: &ModeBasis) -> Result<HermitianOperator> {
    if bell.basis() == basis {
        Ok(bell.clone())
    } else {
        bell.project(basis)
    }
}

/// Remove the global phase so the largest-magnitude amplitude is real, and
/// make the vacuum amplitude non-negative when it is real.
pub fn canonical_phase(state: &StateVector) -> StateVector {
    let amps = state.amplitudes();
    let Some((imax, _)) = amps.iter().enumerate().max_by(|a, b| a.1.norm().total_cmp(&b.1.norm())) else {
        return state.clone();
    };
    let pivot = amps[imax];
    if pivot.norm() == 0.0 {
        return state.clone();
    }
    let mut s = state.scale(pivot.conj() / pivot.norm());
    let vac = s.amplitudes()[0];
    if vac.re < 0.0 {
        s = s.scale(crate::fock::C64::new(-1.0, 0.0));
    }
    s
}
