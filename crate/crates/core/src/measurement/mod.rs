//! Two-outcome measurements used by each party: photodetection and binned
//! homodyne detection.

mod homodyne;
mod photodetection;
pub mod quadrature;

pub use homodyne::{
    ideal_binned_homodyne, lossy_binned_homodyne, HomodyneConvention, HomodyneSetting, QUADRATURE_TOLERANCE,
};
pub use photodetection::{click_probabilities, photodetection_povm, PhotodetectionSetting};

use serde::{Deserialize, Serialize};

use crate::error::{check_unit_interval, Result};
use crate::fock::HermitianOperator;

/// POVM with outcomes ±1 on a single mode.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryPovm {
    pub plus: HermitianOperator,
    pub minus: HermitianOperator,
}

impl BinaryPovm {
    /// Dichotomic observable `plus − minus`.
    pub fn observable(&self) -> Result<HermitianOperator> {
        self.plus.sub(&self.minus)
    }

    /// Largest deviation of `plus + minus` from the identity.
    pub fn completeness_defect(&self) -> Result<f64> {
        let sum = self.plus.add(&self.minus)?;
        Ok(sum.max_abs_diff(&HermitianOperator::identity(sum.basis())))
    }

    /// Smallest eigenvalue over both elements.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.plus.eig()?.values[0].min(self.minus.eig()?.values[0]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MeasurementSetting {
    Photodetection(PhotodetectionSetting),
    Homodyne(HomodyneSetting),
}

impl MeasurementSetting {
    pub fn efficiency(&self) -> f64 {
        match self {
            Self::Photodetection(p) => p.efficiency,
            Self::Homodyne(h) => h.efficiency,
        }
    }

    pub fn povm(&self, cutoff: usize) -> Result<BinaryPovm> {
        match self {
            Self::Photodetection(p) => p.povm(cutoff),
            Self::Homodyne(h) => h.povm(cutoff),
        }
    }
}

/// The setting seen through a channel of transmission `transmission`: the
/// detector efficiency is multiplied by it.
pub fn effective_setting(setting: &MeasurementSetting, transmission: f64) -> Result<MeasurementSetting> {
    check_unit_interval("transmission", transmission)?;
    Ok(match *setting {
        MeasurementSetting::Photodetection(p) => MeasurementSetting::Photodetection(PhotodetectionSetting {
            efficiency: p.efficiency * transmission,
        }),
        MeasurementSetting::Homodyne(h) => MeasurementSetting::Homodyne(HomodyneSetting {
            efficiency: h.efficiency * transmission,
            ..h
        }),
    })
}
