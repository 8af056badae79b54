//! Click/no-click detection with a non-resolving detector of efficiency η_d.

use serde::{Deserialize, Serialize};

use super::BinaryPovm;
use crate::error::{check_unit_interval, Result};
use crate::fock::{HermitianOperator, ModeBasis};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotodetectionSetting {
    pub efficiency: f64,
}

impl PhotodetectionSetting {
    pub fn new(efficiency: f64) -> Result<Self> {
        check_unit_interval("detection efficiency", efficiency)?;
        Ok(Self { efficiency })
    }

    pub fn povm(&self, cutoff: usize) -> Result<BinaryPovm> {
        photodetection_povm(self.efficiency, cutoff)
    }
}

/// `N0 = Σ (1−η)^n |n><n|` (no click, outcome −1) and `N1 = 1 − N0`
/// (click, outcome +1).
pub fn photodetection_povm(efficiency: f64, cutoff: usize) -> Result<BinaryPovm> {
    check_unit_interval("detection efficiency", efficiency)?;
    let basis = ModeBasis::single(cutoff);
    let none: Vec<f64> = (0..=cutoff).map(|n| (1.0 - efficiency).powi(n as i32)).collect();
    let click: Vec<f64> = none.iter().map(|p| 1.0 - p).collect();
    Ok(BinaryPovm {
        plus: HermitianOperator::from_diagonal(&basis, &click)?,
        minus: HermitianOperator::from_diagonal(&basis, &none)?,
    })
}

/// Diagonal of the click element, `1 − (1−η)^n`.
pub fn click_probabilities(efficiency: f64, cutoff: usize) -> Vec<f64> {
    (0..=cutoff).map(|n| 1.0 - (1.0 - efficiency).powi(n as i32)).collect()
}
