//! Binned homodyne detection of the quadrature `X = (a + a†)/√2`.
//!
//! The outcome is +1 when `|x| ≤ δ` (element `inside`) and −1 otherwise
//! (element `outside`). Detector inefficiency η_h is modeled as a loss channel
//! in front of an ideal detector, so the lossy elements are the
//! Heisenberg-picture images `Σ_k A_k† X A_k` of the ideal ones.

use serde::{Deserialize, Serialize};

use nalgebra::DMatrix;

use super::quadrature::{hermite_functions, integrate_vec};
use super::BinaryPovm;
use crate::error::{check_unit_interval, Error, Result};
use crate::fock::{HermitianOperator, LossChannel, ModeBasis};

/// Absolute accuracy of every overlap integral.
pub const QUADRATURE_TOLERANCE: f64 = 1e-12;

/// Phase attached to the position wavefunctions of Fock states.
///
/// `RealHermite` takes `<x|n> = ψ_n(x)`. `QuarterTurn` takes
/// `<x|n> = (−i)^n ψ_n(x)`, which multiplies the `(n, m)` element of every
/// binned-homodyne operator by `(−1)^{(n−m)/2}`. The two differ by the local
/// unitary `e^{iπn/2}` on each party, so CHSH values, thresholds and optimal
/// bin widths coincide; only the phases of optimal states differ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HomodyneConvention {
    RealHermite,
    #[default]
    QuarterTurn,
}

impl HomodyneConvention {
    pub fn tag(&self) -> &'static str {
        match self {
            Self::RealHermite => "X=(a+a^dag)/sqrt2; <x|n>=psi_n(x)",
            Self::QuarterTurn => "X=(a+a^dag)/sqrt2; <x|n>=(-i)^n psi_n(x)",
        }
    }

    fn sign(&self, n: usize, m: usize) -> f64 {
        match self {
            Self::RealHermite => 1.0,
            Self::QuarterTurn => {
                if (n.abs_diff(m) / 2).is_multiple_of(2) {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomodyneSetting {
    pub efficiency: f64,
    /// Bin half-width δ.
    pub half_width: f64,
    #[serde(default)]
    pub convention: HomodyneConvention,
}

impl HomodyneSetting {
    pub fn new(efficiency: f64, half_width: f64) -> Result<Self> {
        check_unit_interval("homodyne efficiency", efficiency)?;
        check_half_width(half_width)?;
        Ok(Self {
            efficiency,
            half_width,
            convention: HomodyneConvention::default(),
        })
    }

    pub fn with_convention(mut self, convention: HomodyneConvention) -> Self {
        self.convention = convention;
        self
    }

    pub fn povm(&self, cutoff: usize) -> Result<BinaryPovm> {
        lossy_binned_homodyne(self.efficiency, self.half_width, cutoff, self.convention)
    }
}

fn check_half_width(delta: f64) -> Result<()> {
    if delta.is_finite() && delta >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "half_width",
            reason: format!("must be finite and non-negative, got {delta}"),
        })
    }
}

/// `(X_<)_{nm} = ∫_{−δ}^{δ} ψ_n ψ_m dx`, with the convention's phase.
pub fn ideal_binned_homodyne(
    half_width: f64,
    cutoff: usize,
    convention: HomodyneConvention,
) -> Result<HermitianOperator> {
    check_half_width(half_width)?;
    let dim = cutoff + 1;
    // only pairs with n + m even survive the parity selection rule
    let pairs: Vec<(usize, usize)> = (0..dim)
        .flat_map(|n| (n..dim).step_by(2).map(move |m| (n, m)))
        .collect();
    let integrand = |x: f64, out: &mut [f64]| {
        let mut psi = [0.0; 64];
        let mut heap;
        let psi: &mut [f64] = if dim <= 64 {
            &mut psi[..dim]
        } else {
            heap = vec![0.0; dim];
            &mut heap
        };
        hermite_functions(x, cutoff, psi);
        for (o, &(n, m)) in out.iter_mut().zip(&pairs) {
            *o = psi[n] * psi[m];
        }
    };
    // even integrand: integrate over [0, δ] and double
    let half = integrate_vec(&integrand, pairs.len(), 0.0, half_width, 0.5 * QUADRATURE_TOLERANCE)?;
    let mut m = DMatrix::zeros(dim, dim);
    for (v, &(n, k)) in half.iter().zip(&pairs) {
        let el = 2.0 * v * convention.sign(n, k);
        m[(n, k)] = el;
        m[(k, n)] = el;
    }
    HermitianOperator::from_real(ModeBasis::single(cutoff), &m)
}

/// Lossy binned homodyne POVM `(inside, outside)`.
pub fn lossy_binned_homodyne(
    efficiency: f64,
    half_width: f64,
    cutoff: usize,
    convention: HomodyneConvention,
) -> Result<BinaryPovm> {
    let channel = LossChannel::new(efficiency)?;
    let ideal = ideal_binned_homodyne(half_width, cutoff, convention)?;
    let inside = channel.adjoint_apply(&ideal)?;
    let outside = HermitianOperator::identity(inside.basis()).sub(&inside)?;
    Ok(BinaryPovm {
        plus: inside,
        minus: outside,
    })
}
