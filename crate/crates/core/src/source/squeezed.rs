use crate::error::{Error, Result};
use crate::fock::{ModeBasis, StateVector};

/// Truncated two-mode squeezed vacuum `√(1−λ²) Σ λⁿ |n>|n>`.
#[derive(Debug, Clone)]
pub struct TwoModeSqueezed {
    /// Renormalized state on a `[cutoff, cutoff]` basis.
    pub state: StateVector,
    /// Probability weight discarded by the truncation, `λ^{2(cutoff+1)}`.
    pub truncation_error: f64,
}

pub fn two_mode_squeezed(squeezing: f64, cutoff: usize) -> Result<TwoModeSqueezed> {
    if !(squeezing.is_finite() && (0.0..1.0).contains(&squeezing)) {
        return Err(Error::InvalidParameter {
            name: "squeezing",
            reason: format!("must lie in [0, 1), got {squeezing}"),
        });
    }
    let basis = ModeBasis::uniform(2, cutoff)?;
    let amp0 = (1.0 - squeezing * squeezing).sqrt();
    let coefficients: Vec<f64> = (0..=cutoff).map(|n| amp0 * squeezing.powi(n as i32)).collect();
    let terms: Vec<(f64, [usize; 2])> = coefficients.iter().enumerate().map(|(n, &c)| (c, [n, n])).collect();
    let refs: Vec<(f64, &[usize])> = terms.iter().map(|(c, o)| (*c, &o[..])).collect();
    let state = StateVector::from_terms(&basis, &refs)?.normalize()?;
    Ok(TwoModeSqueezed {
        state,
        truncation_error: squeezing.powi(2 * (cutoff as i32 + 1)),
    })
}
