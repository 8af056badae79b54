use serde::{Deserialize, Serialize};

use crate::error::{check_unit_interval, Error, Result};
use crate::measurement::HomodyneConvention;

/// Efficiencies seen by one party.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Party {
    /// Channel transmission η_t between the source and this party.
    pub transmission: f64,
    /// Photodetector efficiency η_d.
    pub detection_efficiency: f64,
    /// Homodyne efficiency η_h.
    pub homodyne_efficiency: f64,
}

impl Party {
    pub fn new(transmission: f64, detection_efficiency: f64, homodyne_efficiency: f64) -> Result<Self> {
        let p = Self {
            transmission,
            detection_efficiency,
            homodyne_efficiency,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_unit_interval("transmission", self.transmission)?;
        check_unit_interval("detection efficiency", self.detection_efficiency)?;
        check_unit_interval("homodyne efficiency", self.homodyne_efficiency)
    }

    /// Photodetection efficiency including the channel.
    pub fn effective_detection(&self) -> f64 {
        self.detection_efficiency * self.transmission
    }

    /// Homodyne efficiency including the channel.
    pub fn effective_homodyne(&self) -> f64 {
        self.homodyne_efficiency * self.transmission
    }
}

/// Placement of the source: halfway (both parties see η_t) or next to Alice
/// (Alice sees no channel loss).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Symmetry {
    Symmetric,
    Asymmetric,
}

impl Symmetry {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Symmetric => "symmetric",
            Self::Asymmetric => "asymmetric",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BellScenario {
    pub alice: Party,
    pub bob: Party,
    /// Shared bin half-width δ.
    pub delta: f64,
    /// Bob's half-width when it differs from Alice's.
    pub bob_delta: Option<f64>,
    pub symmetry: Symmetry,
    /// Per-mode photon cutoff of the measurement operators.
    pub cutoff: usize,
    pub convention: HomodyneConvention,
}

pub const DEFAULT_CUTOFF: usize = 2;

impl BellScenario {
    /// Scenario with channel transmission `transmission` placed according to
    /// `symmetry`, ideal homodyne detectors and δ = 0.
    pub fn new(symmetry: Symmetry, transmission: f64, detection_efficiency: f64) -> Result<Self> {
        let bob = Party::new(transmission, detection_efficiency, 1.0)?;
        let alice = match symmetry {
            Symmetry::Symmetric => bob,
            Symmetry::Asymmetric => Party::new(1.0, detection_efficiency, 1.0)?,
        };
        Ok(Self {
            alice,
            bob,
            delta: 0.0,
            bob_delta: None,
            symmetry,
            cutoff: DEFAULT_CUTOFF,
            convention: HomodyneConvention::default(),
        })
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_cutoff(mut self, cutoff: usize) -> Self {
        self.cutoff = cutoff;
        self
    }

    pub fn with_convention(mut self, convention: HomodyneConvention) -> Self {
        self.convention = convention;
        self
    }

    pub fn with_homodyne_efficiency(mut self, efficiency: f64) -> Self {
        self.alice.homodyne_efficiency = efficiency;
        self.bob.homodyne_efficiency = efficiency;
        self
    }

    pub fn bob_half_width(&self) -> f64 {
        self.bob_delta.unwrap_or(self.delta)
    }

    pub fn validate(&self) -> Result<()> {
        self.alice.validate()?;
        self.bob.validate()?;
        for d in [self.delta, self.bob_half_width()] {
            if !(d.is_finite() && d >= 0.0) {
                return Err(Error::InvalidParameter {
                    name: "delta",
                    reason: format!("must be finite and non-negative, got {d}"),
                });
            }
        }
        if self.symmetry == Symmetry::Asymmetric && self.alice.transmission != 1.0 {
            return Err(Error::InvalidParameter {
                name: "symmetry",
                reason: "asymmetric scenarios place the source at Alice (transmission 1)".into(),
            });
        }
        Ok(())
    }
}
