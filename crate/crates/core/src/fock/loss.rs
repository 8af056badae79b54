//! Pure-loss channel on one mode, modeled as a beam splitter of power
//! transmission η coupling the mode to an unobserved vacuum mode.
//!
//! Kraus operators: `A_k|n> = √C(n,k) η^{(n−k)/2} (1−η)^{k/2} |n−k>`.

use nalgebra::DMatrix;

use super::basis::ModeBasis;
use super::operator::{HermitianOperator, Operator, C64};
use super::state::{DensityOperator, StateVector};
use crate::error::{check_unit_interval, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossChannel {
    transmission: f64,
}

impl LossChannel {
    pub fn new(transmission: f64) -> Result<Self> {
        check_unit_interval("transmission", transmission)?;
        Ok(Self { transmission })
    }

    pub fn transmission(&self) -> f64 {
        self.transmission
    }

    /// `<n−k|A_k|n>`.
    pub fn coefficient(&self, n: usize, k: usize) -> f64 {
        if k > n {
            return 0.0;
        }
        let eta = self.transmission;
        (binomial(n, k) * eta.powi((n - k) as i32) * (1.0 - eta).powi(k as i32)).sqrt()
    }

    /// Kraus operators `A_0..A_cutoff` on a single mode; at η = 1 only the
    /// identity is returned.
    pub fn kraus(&self, cutoff: usize) -> Vec<Operator> {
        let kmax = if self.transmission == 1.0 { 0 } else { cutoff };
        (0..=kmax)
            .map(|k| {
                let mut m = DMatrix::zeros(cutoff + 1, cutoff + 1);
                for n in k..=cutoff {
                    m[(n - k, n)] = C64::new(self.coefficient(n, k), 0.0);
                }
                Operator::new(ModeBasis::single(cutoff), m).expect("square matrix on its basis")
            })
            .collect()
    }

    /// `Σ_k A_k ρ A_k†` acting on `mode`.
    pub fn apply(&self, rho: &DensityOperator, mode: usize) -> Result<DensityOperator> {
        let basis = rho.basis();
        basis.check_mode(mode)?;
        if self.transmission == 1.0 {
            return Ok(rho.clone());
        }
        let d = basis.dimension();
        let cutoff = basis.cutoffs()[mode];
        let coef = self.coefficient_table(cutoff);
        // index of each basis state after removing k photons from `mode`
        let lowered = lowered_indices(basis, mode);
        let m = rho.matrix();
        let mut out = DMatrix::<C64>::zeros(d, d);
        for i in 0..d {
            let ni = basis.occupation(i)[mode];
            for j in 0..d {
                let v = m[(i, j)];
                if v == C64::new(0.0, 0.0) {
                    continue;
                }
                let nj = basis.occupation(j)[mode];
                for k in 0..=ni.min(nj) {
                    let w = coef[ni][k] * coef[nj][k];
                    out[(lowered[i][k], lowered[j][k])] += v * w;
                }
            }
        }
        DensityOperator::new(basis.clone(), out)
    }

    /// Unnormalized branches `A_k|ψ>` whose projectors sum to the channel
    /// output; zero branches are dropped.
    pub fn branches(&self, state: &StateVector, mode: usize) -> Result<Vec<StateVector>> {
        let basis = state.basis();
        basis.check_mode(mode)?;
        if self.transmission == 1.0 {
            return Ok(vec![state.clone()]);
        }
        let cutoff = basis.cutoffs()[mode];
        let coef = self.coefficient_table(cutoff);
        let lowered = lowered_indices(basis, mode);
        let amps = state.amplitudes();
        let mut out = Vec::new();
        for k in 0..=cutoff {
            let mut b = StateVector::zeros(basis);
            let mut any = false;
            for (i, occ) in basis.iter().enumerate() {
                let n = occ[mode];
                if n < k || amps[i] == C64::new(0.0, 0.0) {
                    continue;
                }
                let w = coef[n][k];
                if w != 0.0 {
                    b.amplitudes_mut()[lowered[i][k]] += amps[i] * w;
                    any = true;
                }
            }
            if any {
                out.push(b);
            }
        }
        Ok(out)
    }

    /// Heisenberg-picture action `Σ_k A_k† M A_k` on a single-mode operator.
    pub fn adjoint_apply(&self, m: &HermitianOperator) -> Result<HermitianOperator> {
        let cutoff = m.basis().cutoffs()[0];
        let mut acc = DMatrix::<C64>::zeros(cutoff + 1, cutoff + 1);
        for a in self.kraus(cutoff) {
            acc += a.matrix().adjoint() * m.matrix() * a.matrix();
        }
        HermitianOperator::new(Operator::new(m.basis().clone(), acc)?)
    }

    fn coefficient_table(&self, cutoff: usize) -> Vec<Vec<f64>> {
        (0..=cutoff)
            .map(|n| (0..=n).map(|k| self.coefficient(n, k)).collect())
            .collect()
    }
}

fn lowered_indices(basis: &ModeBasis, mode: usize) -> Vec<Vec<usize>> {
    let mut target = vec![0; basis.mode_count()];
    basis
        .iter()
        .map(|occ| {
            target.copy_from_slice(occ);
            (0..=occ[mode])
                .map(|k| {
                    target[mode] = occ[mode] - k;
                    basis
                        .index_of(&target)
                        .expect("removing photons stays inside the basis")
                })
                .collect()
        })
        .collect()
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut b = 1.0;
    for i in 0..k {
        b = b * (n - i) as f64 / (i + 1) as f64;
    }
    b
}
