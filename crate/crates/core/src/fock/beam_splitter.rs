//! Two-mode beam splitters and single-mode phase shifters.
//!
//! Convention for a splitter acting on modes (p, q) with power transmission
//! `t`, reflection `r = 1 - t` and phase `φ`:
//!
//! ```text
//! a_p† → √t a_p† + √r e^{iφ} a_q†
//! a_q† → −√r e^{−iφ} a_p† + √t a_q†
//! ```
//!
//! Transmitted amplitudes are real and positive. With `φ = 0` a balanced
//! splitter maps `|11>` to `(|02> − |20>)/√2`. The inverse of `(t, φ)` is
//! `(t, φ + π)`.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::basis::ModeBasis;
use super::operator::{Operator, C64, MAX_OPERATOR_DIMENSION};
use super::state::StateVector;
use crate::error::{check_unit_interval, Error, Result};

/// Largest norm that may leak past the cutoff before `apply` fails.
pub const LEAK_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSplitter {
    transmission: f64,
    phase: f64,
}

impl BeamSplitter {
    pub fn new(transmission: f64, phase: f64) -> Result<Self> {
        check_unit_interval("transmission", transmission)?;
        if !phase.is_finite() {
            return Err(Error::InvalidParameter {
                name: "phase",
                reason: format!("{phase} is not finite"),
            });
        }
        Ok(Self { transmission, phase })
    }

    pub fn balanced() -> Self {
        Self {
            transmission: 0.5,
            phase: 0.0,
        }
    }

    pub fn transmission(&self) -> f64 {
        self.transmission
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn inverse(&self) -> Self {
        Self {
            transmission: self.transmission,
            phase: self.phase + PI,
        }
    }

    /// Matrix of the splitter on the `total`-photon block, basis
    /// `|k, total−k>` for `k = 0..=total`; entry `(j, k)` is
    /// `<j, total−j| U |k, total−k>`.
    pub fn block(&self, total: usize) -> DMatrix<C64> {
        let st = self.transmission.sqrt();
        let sr = (1.0 - self.transmission).sqrt();
        let e = C64::from_polar(1.0, self.phase);
        // images of a_p† and a_q† as (coefficient of a_p†, coefficient of a_q†)
        let p_img = (C64::new(st, 0.0), e * sr);
        let q_img = (-e.conj() * sr, C64::new(st, 0.0));
        let f = factorials(total);
        let binom = |n: usize, k: usize| f[n] / (f[k] * f[n - k]);

        let mut m = DMatrix::zeros(total + 1, total + 1);
        for np in 0..=total {
            let nq = total - np;
            // expand (p_img)^np (q_img)^nq
            let mut poly = vec![C64::new(0.0, 0.0); total + 1];
            for i in 0..=np {
                let a = p_img.0.powu(i as u32) * p_img.1.powu((np - i) as u32) * binom(np, i);
                for l in 0..=nq {
                    let b = q_img.0.powu(l as u32) * q_img.1.powu((nq - l) as u32) * binom(nq, l);
                    poly[i + l] += a * b;
                }
            }
            let norm_in = (f[np] * f[nq]).sqrt();
            for (j, c) in poly.into_iter().enumerate() {
                let norm_out = (f[j] * f[total - j]).sqrt();
                m[(j, np)] = c * (norm_out / norm_in);
            }
        }
        m
    }

    /// Apply to modes `(p, q)` of `state`; fails if more than
    /// [`LEAK_TOLERANCE`] of the norm leaves the basis.
    pub fn apply(&self, state: &StateVector, p: usize, q: usize) -> Result<StateVector> {
        let (out, leaked) = self.apply_truncating(state, p, q)?;
        if leaked > LEAK_TOLERANCE {
            return Err(Error::TruncationOverflow { leaked });
        }
        Ok(out)
    }

    /// Apply and report the squared norm lost to truncation.
    pub fn apply_truncating(&self, state: &StateVector, p: usize, q: usize) -> Result<(StateVector, f64)> {
        let basis = state.basis();
        check_pair(basis, p, q)?;
        let max_total = basis.cutoffs()[p] + basis.cutoffs()[q];
        let blocks: Vec<DMatrix<C64>> = (0..=max_total).map(|n| self.block(n)).collect();
        let mut out = StateVector::zeros(basis);
        let amps = state.amplitudes();
        let mut target = vec![0; basis.mode_count()];
        for (i, occ) in basis.iter().enumerate() {
            let a = amps[i];
            if a == C64::new(0.0, 0.0) {
                continue;
            }
            let total = occ[p] + occ[q];
            let block = &blocks[total];
            target.copy_from_slice(occ);
            for j in 0..=total {
                target[p] = j;
                target[q] = total - j;
                if let Some(row) = basis.index_of(&target) {
                    out.amplitudes_mut()[row] += block[(j, occ[p])] * a;
                }
            }
        }
        let leaked = (state.norm_sqr() - out.norm_sqr()).max(0.0);
        Ok((out, leaked))
    }

    /// Dense matrix on `basis`, truncated to it.
    pub fn operator(&self, basis: &ModeBasis, p: usize, q: usize) -> Result<Operator> {
        check_pair(basis, p, q)?;
        let d = basis.dimension();
        if d > MAX_OPERATOR_DIMENSION {
            return Err(Error::DimensionOverflow {
                dimension: d,
                limit: MAX_OPERATOR_DIMENSION,
            });
        }
        let mut cols = Vec::with_capacity(d);
        for i in 0..d {
            let mut e = StateVector::zeros(basis);
            e.amplitudes_mut()[i] = C64::new(1.0, 0.0);
            cols.push(self.apply_truncating(&e, p, q)?.0);
        }
        let m = DMatrix::from_fn(d, d, |r, c| cols[c].amplitudes()[r]);
        Operator::new(basis.clone(), m)
    }
}

/// `e^{iθ n̂}` on one mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseShifter {
    pub angle: f64,
}

impl PhaseShifter {
    pub fn new(angle: f64) -> Self {
        Self { angle }
    }

    pub fn apply(&self, state: &StateVector, mode: usize) -> Result<StateVector> {
        let basis = state.basis();
        basis.check_mode(mode)?;
        let mut out = state.clone();
        for (i, occ) in basis.iter().enumerate() {
            out.amplitudes_mut()[i] *= C64::from_polar(1.0, self.angle * occ[mode] as f64);
        }
        Ok(out)
    }

    pub fn operator(&self, basis: &ModeBasis, mode: usize) -> Result<Operator> {
        basis.check_mode(mode)?;
        let diag = nalgebra::DVector::from_iterator(
            basis.dimension(),
            basis
                .iter()
                .map(|occ| C64::from_polar(1.0, self.angle * occ[mode] as f64)),
        );
        Operator::new(basis.clone(), DMatrix::from_diagonal(&diag))
    }
}

fn check_pair(basis: &ModeBasis, p: usize, q: usize) -> Result<()> {
    basis.check_modes(&[p, q])
}

fn factorials(n: usize) -> Vec<f64> {
    let mut f = vec![1.0; n + 1];
    for k in 1..=n {
        f[k] = f[k - 1] * k as f64;
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::HermitianOperator;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn full_transmission_is_identity() {
        let basis = ModeBasis::uniform(2, 3).unwrap();
        let u = BeamSplitter::new(1.0, 0.3).unwrap().operator(&basis, 0, 1).unwrap();
        assert!(u.max_abs_diff(&Operator::identity(&basis)) < 1e-15);
    }

    #[test]
    fn hong_ou_mandel() {
        let basis = ModeBasis::uniform(2, 2).unwrap();
        let s = StateVector::fock(&basis, &[1, 1]).unwrap();
        let out = BeamSplitter::balanced().apply(&s, 0, 1).unwrap();
        let expected = StateVector::from_terms(&basis, &[(FRAC_1_SQRT_2, &[0, 2]), (-FRAC_1_SQRT_2, &[2, 0])]).unwrap();
        assert!((out.amplitudes() - expected.amplitudes()).norm() < 1e-15);
    }

    #[test]
    fn inverse_undoes_splitter() {
        let basis = ModeBasis::new(&[3, 2, 3], None).unwrap();
        let bs = BeamSplitter::new(0.37, 0.8).unwrap();
        let u = bs.operator(&basis, 0, 2).unwrap();
        let v = bs.inverse().operator(&basis, 0, 2).unwrap();
        let uv = v.compose(&u).unwrap();
        // only blocks with n_0 + n_2 ≤ 3 are complete
        for (i, occ) in basis.iter().enumerate() {
            if occ[0] + occ[2] <= 3 {
                for j in 0..basis.dimension() {
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert!((uv.matrix()[(j, i)] - C64::new(expected, 0.0)).norm() < 1e-12);
                }
            }
        }
        let balanced = BeamSplitter::balanced();
        let twice = balanced
            .inverse()
            .operator(&ModeBasis::uniform(2, 2).unwrap(), 0, 1)
            .unwrap()
            .compose(&balanced.operator(&ModeBasis::uniform(2, 2).unwrap(), 0, 1).unwrap())
            .unwrap();
        for n in 0..=2 {
            let s = StateVector::fock(&ModeBasis::uniform(2, 2).unwrap(), &[n, 2 - n]).unwrap();
            let back = twice.apply(&s).unwrap();
            assert!((back.amplitudes() - s.amplitudes()).norm() < 1e-12);
        }
    }

    #[test]
    fn blocks_are_unitary_and_conserve_number() {
        let bs = BeamSplitter::new(0.23, 1.1).unwrap();
        for n in 0..=8 {
            let b = bs.block(n);
            let id = DMatrix::<C64>::identity(n + 1, n + 1);
            assert!((b.adjoint() * &b - id).norm() < 1e-10);
        }
        let basis = ModeBasis::new(&[4, 4], Some(4)).unwrap();
        let u = bs.operator(&basis, 0, 1).unwrap();
        let n = HermitianOperator::total_number(&basis).into_operator();
        let comm = u.compose(&n).unwrap().sub(&n.compose(&u).unwrap()).unwrap();
        assert!(comm.matrix().norm() < 1e-12);
    }

    #[test]
    fn truncation_is_reported() {
        let basis = ModeBasis::new(&[2, 0], None).unwrap();
        let s = StateVector::fock(&basis, &[1, 0]).unwrap();
        let bs = BeamSplitter::balanced();
        assert!(matches!(bs.apply(&s, 0, 1), Err(Error::TruncationOverflow { .. })));
        let (_, leaked) = bs.apply_truncating(&s, 0, 1).unwrap();
        assert!((leaked - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_transmission() {
        assert!(BeamSplitter::new(1.2, 0.0).is_err());
        assert!(BeamSplitter::new(-0.1, 0.0).is_err());
    }

    #[test]
    fn phase_shifter_on_fock_states() {
        let basis = ModeBasis::uniform(2, 2).unwrap();
        let s = StateVector::fock(&basis, &[2, 1]).unwrap();
        let out = PhaseShifter::new(PI / 2.0).apply(&s, 0).unwrap();
        assert!((out.amplitude(&[2, 1]) - C64::new(-1.0, 0.0)).norm() < 1e-15);
    }
}
