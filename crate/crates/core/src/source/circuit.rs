//! Linear-optics quantum scissor.
//!
//! Modes: `a` carries the input, `b` an optional partner mode that is passed
//! through untouched, `c` the ancilla and `o` the output. The ancilla photon
//! meets the output vacuum on a splitter of transmission `t` (the transmitted
//! part stays in `c`), then `a` and `c` interfere on a balanced splitter and
//! are detected by D1 (`a`) and D2 (`c`). A single detection at D1 heralds
//! `√t|0> − α√(1−t)|1>` in `o` for an input `|0> + α|1>`; a detection at D2
//! flips the sign of the one-photon term, which the feed-forward undoes.

use serde::{Deserialize, Serialize};

use crate::error::{check_unit_interval, Error, Result};
use crate::fock::{BeamSplitter, DensityOperator, LossChannel, ModeBasis, StateVector, C64};

/// Herald detector model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum HeraldDetector {
    /// Click/no-click detector; a "fire" is any click.
    Bucket { efficiency: f64 },
    /// Photon-number-resolving detector; a "fire" is exactly one count.
    PhotonCounting { efficiency: f64 },
}

impl Default for HeraldDetector {
    fn default() -> Self {
        Self::Bucket { efficiency: 1.0 }
    }
}

impl HeraldDetector {
    pub fn efficiency(&self) -> f64 {
        match *self {
            Self::Bucket { efficiency } | Self::PhotonCounting { efficiency } => efficiency,
        }
    }

    /// Probability of no count for `n` incident photons.
    pub fn silent(&self, n: usize) -> f64 {
        (1.0 - self.efficiency()).powi(n as i32)
    }

    /// Probability of a heralding count for `n` incident photons.
    pub fn fires(&self, n: usize) -> f64 {
        let eta = self.efficiency();
        match self {
            Self::Bucket { .. } => 1.0 - self.silent(n),
            Self::PhotonCounting { .. } => {
                if n == 0 {
                    0.0
                } else {
                    n as f64 * eta * (1.0 - eta).powi(n as i32 - 1)
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        check_unit_interval("herald detector efficiency", self.efficiency())
    }
}

/// Accepted herald outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HeraldPattern {
    /// D1 fires, D2 silent.
    D1,
    /// D2 fires, D1 silent.
    D2,
    /// Exactly one of D1, D2 fires.
    #[default]
    Either,
}

impl HeraldPattern {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::D1 => "d1",
            Self::D2 => "d2",
            Self::Either => "either",
        }
    }
}

/// Ancilla supplied to the scissor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
#[derive(Default)]
pub enum AncillaModel {
    #[default]
    IdealSinglePhoton,
    /// One arm of a two-mode squeezed state with squeezing `chi`, heralded by
    /// a click of a bucket detector D0 on the other arm. Both arms see the
    /// coupling loss.
    HeraldedPdc {
        chi: f64,
        herald_efficiency: f64,
        /// Photon cutoff of the ancilla pair.
        cutoff: usize,
    },
}


/// Ancilla as a Fock-diagonal mixture, unnormalized: `weights[n]` is the
/// probability that D0 heralds and the ancilla mode holds `n` photons.
#[derive(Debug, Clone, PartialEq)]
pub struct AncillaMixture {
    pub weights: Vec<f64>,
}

impl AncillaMixture {
    /// Probability that the ancilla is heralded at all.
    pub fn herald_probability(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn cutoff(&self) -> usize {
        self.weights.len() - 1
    }
}

pub fn ancilla_mixture(model: &AncillaModel, coupling: f64) -> Result<AncillaMixture> {
    check_unit_interval("coupling efficiency", coupling)?;
    match *model {
        AncillaModel::IdealSinglePhoton => Ok(AncillaMixture {
            weights: vec![0.0, 1.0],
        }),
        AncillaModel::HeraldedPdc {
            chi,
            herald_efficiency,
            cutoff,
        } => {
            check_unit_interval("herald efficiency", herald_efficiency)?;
            let pair = super::squeezed::two_mode_squeezed(chi, cutoff)?;
            let d0 = HeraldDetector::Bucket {
                efficiency: coupling * herald_efficiency,
            };
            let loss = LossChannel::new(coupling)?;
            let mut weights = vec![0.0; cutoff + 1];
            for m in 0..=cutoff {
                let pm = pair.state.amplitude(&[m, m]).norm_sqr();
                let click = d0.fires(m);
                for (n, w) in weights.iter_mut().enumerate().take(m + 1) {
                    *w += pm * click * loss.coefficient(m, m - n).powi(2);
                }
            }
            Ok(AncillaMixture { weights })
        }
    }
}

/// Settings of the scissor itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScissorSettings {
    pub transmission: f64,
    pub detector: HeraldDetector,
    pub pattern: HeraldPattern,
    /// Apply `e^{iπn}` to the output after a D2 herald, which makes the two
    /// patterns yield the same state.
    pub feed_forward: bool,
}

impl ScissorSettings {
    pub fn validate(&self) -> Result<()> {
        check_unit_interval("amplifier transmission", self.transmission)?;
        if self.transmission == 0.0 {
            return Err(Error::InvalidParameter {
                name: "amplifier transmission",
                reason: "must be positive".into(),
            });
        }
        self.detector.validate()
    }
}

/// Conditional (unnormalized) state of `(o, b)` after the scissor acts on
/// mode `a` of each input branch. Input branches live on a two-mode `(a, b)`
/// basis without cap; their projectors are summed.
pub fn run_scissor(
    inputs: &[StateVector],
    ancilla: &AncillaMixture,
    settings: &ScissorSettings,
) -> Result<DensityOperator> {
    settings.validate()?;
    let first = inputs.first().ok_or_else(|| Error::InvalidParameter {
        name: "inputs",
        reason: "no input branches".into(),
    })?;
    let in_basis = first.basis().clone();
    if in_basis.mode_count() != 2 || in_basis.total_cap().is_some() {
        return Err(Error::BasisMismatch(
            "scissor input must be an uncapped (a, b) state".into(),
        ));
    }
    let (sa, sb) = (in_basis.cutoffs()[0], in_basis.cutoffs()[1]);
    let n = ancilla.cutoff();
    let circuit = ModeBasis::new(&[sa + n, sb, sa + n, n], None)?;
    let out_basis = ModeBasis::new(&[n, sb], None)?;
    let ancilla_split = BeamSplitter::new(settings.transmission, 0.0)?;
    let mixer = BeamSplitter::balanced();

    let mut acc = nalgebra::DMatrix::<C64>::zeros(out_basis.dimension(), out_basis.dimension());
    for input in inputs {
        if input.basis() != &in_basis {
            return Err(Error::BasisMismatch("input branches on different bases".into()));
        }
        for (j, &w) in ancilla.weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let mut psi = StateVector::zeros(&circuit);
            for (i, occ) in in_basis.iter().enumerate() {
                let amp = input.amplitudes()[i];
                if amp != C64::new(0.0, 0.0) {
                    let k = circuit
                        .index_of(&[occ[0], occ[1], j, 0])
                        .expect("input fits the circuit basis");
                    psi.amplitudes_mut()[k] = amp * w.sqrt();
                }
            }
            let psi = ancilla_split.apply(&psi, 2, 3)?;
            let psi = mixer.apply(&psi, 0, 2)?;
            condition(&psi, &circuit, &out_basis, settings, &mut acc);
        }
    }
    DensityOperator::new(out_basis, acc)
}

fn condition(
    psi: &StateVector,
    circuit: &ModeBasis,
    out_basis: &ModeBasis,
    settings: &ScissorSettings,
    acc: &mut nalgebra::DMatrix<C64>,
) {
    let det = &settings.detector;
    let (ca, cc) = (circuit.cutoffs()[0], circuit.cutoffs()[2]);
    let (no, nb) = (out_basis.cutoffs()[0], out_basis.cutoffs()[1]);
    for na in 0..=ca {
        for nc in 0..=cc {
            let d1 = det.fires(na) * det.silent(nc);
            let d2 = det.silent(na) * det.fires(nc);
            let (w1, w2) = match settings.pattern {
                HeraldPattern::D1 => (d1, 0.0),
                HeraldPattern::D2 => (0.0, d2),
                HeraldPattern::Either => (d1, d2),
            };
            for (w, flip) in [(w1, false), (w2, settings.feed_forward)] {
                if w == 0.0 {
                    continue;
                }
                let mut v = nalgebra::DVector::<C64>::zeros(out_basis.dimension());
                let mut any = false;
                for o in 0..=no {
                    for b in 0..=nb {
                        if let Some(k) = circuit.index_of(&[na, b, nc, o]) {
                            let mut amp = psi.amplitudes()[k] * w.sqrt();
                            if flip && o % 2 == 1 {
                                amp = -amp;
                            }
                            if amp != C64::new(0.0, 0.0) {
                                any = true;
                            }
                            v[o * (nb + 1) + b] = amp;
                        }
                    }
                }
                if any {
                    *acc += &v * v.adjoint();
                }
            }
        }
    }
}

/// Probabilities of the four click patterns of bucket detectors D1, D2:
/// `[neither, D1 only, D2 only, both]`, each including the ancilla herald.
pub fn bucket_pattern_probabilities(
    inputs: &[StateVector],
    ancilla: &AncillaMixture,
    transmission: f64,
    efficiency: f64,
) -> Result<[f64; 4]> {
    let det = HeraldDetector::Bucket { efficiency };
    let in_basis = inputs[0].basis().clone();
    let (sa, sb) = (in_basis.cutoffs()[0], in_basis.cutoffs()[1]);
    let n = ancilla.cutoff();
    let circuit = ModeBasis::new(&[sa + n, sb, sa + n, n], None)?;
    let split = BeamSplitter::new(transmission, 0.0)?;
    let mixer = BeamSplitter::balanced();
    let mut p = [0.0; 4];
    for input in inputs {
        for (j, &w) in ancilla.weights.iter().enumerate() {
            let mut psi = StateVector::zeros(&circuit);
            for (i, occ) in in_basis.iter().enumerate() {
                let k = circuit.index_of(&[occ[0], occ[1], j, 0]).expect("fits");
                psi.amplitudes_mut()[k] = input.amplitudes()[i] * w.sqrt();
            }
            let psi = mixer.apply(&split.apply(&psi, 2, 3)?, 0, 2)?;
            for (k, occ) in circuit.iter().enumerate() {
                let q = psi.amplitudes()[k].norm_sqr();
                let (s1, s2) = (det.silent(occ[0]), det.silent(occ[2]));
                p[0] += q * s1 * s2;
                p[1] += q * (1.0 - s1) * s2;
                p[2] += q * s1 * (1.0 - s2);
                p[3] += q * (1.0 - s1) * (1.0 - s2);
            }
        }
    }
    Ok(p)
}
