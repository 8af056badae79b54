//! Entangled source built from a two-mode squeezed state with one arm
//! amplified by a heralded quantum scissor, then recombined with the other
//! arm on a balanced splitter.
//!
//! At weak squeezing λ, unit coupling and an ideal ancilla the heralded
//! output is `√t|00> − (λ√(1−t)/√2)(|20> + |02>) + O(λ²)`. The relative minus
//! sign comes from a quarter-wave phase plate `e^{iπn/2}` on Alice's output,
//! matching the phase of the optimal states under the default homodyne
//! convention.

mod circuit;
pub(crate) mod region;
mod squeezed;

pub use circuit::{
    ancilla_mixture, bucket_pattern_probabilities, run_scissor, AncillaMixture, AncillaModel, HeraldDetector,
    HeraldPattern, ScissorSettings,
};
pub use region::{
    log_spaced, optimize_source, source_region_boundary, SourceBoundaryPoint, SourceOptimum, SourceSearch,
};
pub use squeezed::{two_mode_squeezed, TwoModeSqueezed};

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{check_unit_interval, Error, Result};
use crate::fock::{BeamSplitter, DensityOperator, LossChannel, ModeBasis, PhaseShifter, StateVector};

/// Where the output phase plate sits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhasePlate {
    None,
    #[default]
    Alice,
    Bob,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceConfig {
    /// Squeezing λ of the entangling pair.
    pub squeezing: f64,
    /// Transmission t of the amplifier splitter; gain is `√((1−t)/t)`.
    pub transmission: f64,
    /// Coupling efficiency η_c on every pair output.
    pub coupling: f64,
    pub ancilla: AncillaModel,
    pub detector: HeraldDetector,
    pub pattern: HeraldPattern,
    pub feed_forward: bool,
    pub phase_plate: PhasePlate,
    /// Photon cutoff of the squeezed pair.
    pub cutoff: usize,
}

impl Default for SourceConfig {
    fn default() -> Self {
        Self {
            squeezing: 0.1,
            transmission: 0.5,
            coupling: 1.0,
            ancilla: AncillaModel::IdealSinglePhoton,
            detector: HeraldDetector::default(),
            pattern: HeraldPattern::Either,
            feed_forward: true,
            phase_plate: PhasePlate::Alice,
            cutoff: 6,
        }
    }
}

impl SourceConfig {
    pub fn gain(&self) -> f64 {
        amplifier_gain(self.transmission)
    }

    pub fn validate(&self) -> Result<()> {
        check_unit_interval("coupling efficiency", self.coupling)?;
        self.scissor().validate()
    }

    fn scissor(&self) -> ScissorSettings {
        ScissorSettings {
            transmission: self.transmission,
            detector: self.detector,
            pattern: self.pattern,
            feed_forward: self.feed_forward,
        }
    }
}

/// `g = √((1−t)/t)`.
pub fn amplifier_gain(transmission: f64) -> f64 {
    ((1.0 - transmission) / transmission).sqrt()
}

/// Post-selected state of a heralded circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct HeraldedOutcome {
    /// Normalized conditional state; `None` when the herald never fires.
    pub state: Option<DensityOperator>,
    pub success_probability: f64,
    pub pattern: HeraldPattern,
}

impl HeraldedOutcome {
    fn from_unnormalized(rho: DensityOperator, pattern: HeraldPattern) -> Result<Self> {
        let p = rho.trace();
        let state = if p > 0.0 { Some(rho.normalize()?) } else { None };
        Ok(Self {
            state,
            success_probability: p.max(0.0),
            pattern,
        })
    }

    pub fn require_state(&self) -> Result<&DensityOperator> {
        self.state
            .as_ref()
            .ok_or_else(|| Error::ZeroProbability("the herald never fires".into()))
    }
}

/// Amplify a single-mode input with the scissor; the output is mode `o`.
pub fn qscissor_amplify(
    input: &StateVector,
    transmission: f64,
    detector: HeraldDetector,
    ancilla: &AncillaModel,
    pattern: HeraldPattern,
) -> Result<HeraldedOutcome> {
    if input.basis().mode_count() != 1 || input.basis().total_cap().is_some() {
        return Err(Error::BasisMismatch("expected a single-mode input".into()));
    }
    // pair the input with a trivial partner mode
    let partner = StateVector::fock(&ModeBasis::single(0), &[0])?;
    let joint = input.tensor(&partner)?;
    let settings = ScissorSettings {
        transmission,
        detector,
        pattern,
        feed_forward: true,
    };
    let rho = run_scissor(&[joint], &ancilla_mixture(ancilla, 1.0)?, &settings)?;
    HeraldedOutcome::from_unnormalized(rho.partial_trace(&[0])?, pattern)
}

/// The full source: squeezed pair, coupling loss, scissor on arm `a`,
/// balanced recombination of the output with arm `b`, phase plate.
/// Output modes are (Alice, Bob).
pub fn amplified_source(config: &SourceConfig) -> Result<HeraldedOutcome> {
    config.validate()?;
    let pair = two_mode_squeezed(config.squeezing, config.cutoff)?;
    let loss = LossChannel::new(config.coupling)?;
    let mut branches = Vec::new();
    for branch in loss.branches(&pair.state, 0)? {
        branches.extend(loss.branches(&branch, 1)?);
    }
    let ancilla = ancilla_mixture(&config.ancilla, config.coupling)?;
    let rho = run_scissor(&branches, &ancilla, &config.scissor())?;

    // recombine (o, b) on a basis large enough for both outputs
    let total = rho.basis().cutoffs().iter().sum::<usize>();
    let out_basis = ModeBasis::new(&[total, total], None)?;
    let rho = rho.embed(&out_basis)?;
    let mut u = BeamSplitter::balanced().operator(&out_basis, 0, 1)?;
    if let Some(mode) = match config.phase_plate {
        PhasePlate::None => None,
        PhasePlate::Alice => Some(0),
        PhasePlate::Bob => Some(1),
    } {
        u = PhaseShifter::new(FRAC_PI_2).operator(&out_basis, mode)?.compose(&u)?;
    }
    let rho = rho.conjugate_by(&u)?;
    HeraldedOutcome::from_unnormalized(rho, config.pattern)
}

/// Source parameters reproducing a target state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceSolution {
    pub squeezing: f64,
    pub transmission: f64,
    pub phase_plate: PhasePlate,
    /// `<target|ρ|target>` of the full circuit output.
    pub fidelity: f64,
    pub success_probability: f64,
}

/// Tolerance on the balance of the `|20>` and `|02>` amplitudes and on
/// weight outside `{|00>, |20>, |02>}`.
pub const BALANCE_TOLERANCE: f64 = 1e-6;

/// Invert the weak-squeezing map `√t : λ√(1−t)/√2 = c00 : |c20|` at the
/// squeezing of `base` (used as a small λ), and report the fidelity of the
/// full circuit with the target. The phase plate giving the best fidelity is
/// chosen.
pub fn solve_source_params(target: &StateVector, base: &SourceConfig) -> Result<SourceSolution> {
    let target = canonical_target(target)?;
    let c00 = target.amplitude(&[0, 0]).norm();
    let c20 = target.amplitude(&[2, 0]).norm();
    if c20 <= BALANCE_TOLERANCE {
        return Ok(SourceSolution {
            squeezing: 0.0,
            transmission: 1.0,
            phase_plate: base.phase_plate,
            fidelity: target.amplitude(&[0, 0]).norm_sqr(),
            success_probability: ancilla_mixture(&base.ancilla, base.coupling)?.herald_probability(),
        });
    }
    if c00 <= BALANCE_TOLERANCE {
        return Err(Error::Unreachable(
            "a state without vacuum component needs zero amplifier transmission".into(),
        ));
    }
    let lambda = base.squeezing;
    if lambda <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "squeezing",
            reason: "solving needs a positive squeezing".into(),
        });
    }
    let ratio = c20 / c00;
    let transmission = lambda * lambda / (lambda * lambda + 2.0 * ratio * ratio);
    let mut best: Option<SourceSolution> = None;
    for plate in [PhasePlate::Alice, PhasePlate::Bob, PhasePlate::None] {
        let config = SourceConfig {
            squeezing: lambda,
            transmission,
            phase_plate: plate,
            ..*base
        };
        let out = amplified_source(&config)?;
        let rho = out.require_state()?;
        let embedded = target.embed(&ModeBasis::new(rho.basis().cutoffs(), None)?)?;
        let fidelity = rho.fidelity_with(&embedded)?;
        if best.as_ref().is_none_or(|b| fidelity > b.fidelity) {
            best = Some(SourceSolution {
                squeezing: lambda,
                transmission,
                phase_plate: plate,
                fidelity,
                success_probability: out.success_probability,
            });
        }
    }
    Ok(best.expect("three candidates evaluated"))
}

/// Target projected onto the two-photon subspace after checking that it is a
/// balanced combination of `|00>`, `|20>`, `|02>`.
fn canonical_target(target: &StateVector) -> Result<StateVector> {
    if target.basis().mode_count() != 2 {
        return Err(Error::BasisMismatch("target must be a two-mode state".into()));
    }
    let target = target.normalize()?;
    let support = [[0, 0], [2, 0], [0, 2]];
    let inside: f64 = support.iter().map(|o| target.amplitude(o).norm_sqr()).sum();
    if 1.0 - inside > BALANCE_TOLERANCE {
        return Err(Error::Unreachable(format!(
            "target has weight {:.3e} outside |00>, |20>, |02>",
            1.0 - inside
        )));
    }
    let (a, b) = (target.amplitude(&[2, 0]), target.amplitude(&[0, 2]));
    if (a - b).norm() > BALANCE_TOLERANCE {
        return Err(Error::Unreachable(format!(
            "the source only produces equal |20> and |02> amplitudes, got {a} and {b}"
        )));
    }
    let basis = ModeBasis::uniform(2, 2)?;
    let mut s = StateVector::zeros(&basis);
    for o in support {
        let k = basis.index_of(&o).expect("inside the two-photon basis");
        s.amplitudes_mut()[k] = target.amplitude(&o);
    }
    s.normalize()
}
