//! Pure and mixed states on a truncated Fock basis.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use super::basis::ModeBasis;
use super::eig::jacobi_eigen;
use super::operator::{sub_basis_map, HermitianOperator, Operator, C64, MAX_OPERATOR_DIMENSION};
use crate::error::{Error, Result};

/// Tolerance on unit norm / unit trace after normalization.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    basis: ModeBasis,
    amplitudes: DVector<C64>,
}

impl StateVector {
    pub fn new(basis: ModeBasis, amplitudes: DVector<C64>) -> Result<Self> {
        if amplitudes.len() != basis.dimension() {
            return Err(Error::BasisMismatch(format!(
                "{} amplitudes for dimension {}",
                amplitudes.len(),
                basis.dimension()
            )));
        }
        Ok(Self { basis, amplitudes })
    }

    pub fn zeros(basis: &ModeBasis) -> Self {
        Self {
            basis: basis.clone(),
            amplitudes: DVector::zeros(basis.dimension()),
        }
    }

    /// The Fock state `|occupation>`.
    pub fn fock(basis: &ModeBasis, occupation: &[usize]) -> Result<Self> {
        Self::from_terms(basis, &[(1.0, occupation)])
    }

    /// Superposition `Σ c |n>` from real coefficients, not normalized.
    pub fn from_terms(basis: &ModeBasis, terms: &[(f64, &[usize])]) -> Result<Self> {
        let mut s = Self::zeros(basis);
        for &(c, occ) in terms {
            let i = basis
                .index_of(occ)
                .ok_or_else(|| Error::BasisMismatch(format!("occupation {occ:?} outside the basis")))?;
            s.amplitudes[i] += C64::new(c, 0.0);
        }
        Ok(s)
    }

    pub fn basis(&self) -> &ModeBasis {
        &self.basis
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut DVector<C64> {
        &mut self.amplitudes
    }

    pub fn amplitude(&self, occupation: &[usize]) -> C64 {
        self.basis
            .index_of(occupation)
            .map_or(C64::new(0.0, 0.0), |i| self.amplitudes[i])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.norm_squared()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn normalize(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::ZeroProbability("cannot normalize a zero vector".into()));
        }
        Ok(Self {
            basis: self.basis.clone(),
            amplitudes: &self.amplitudes / C64::new(n, 0.0),
        })
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            basis: self.basis.clone(),
            amplitudes: &self.amplitudes * factor,
        }
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.basis != other.basis {
            return Err(Error::BasisMismatch("inner product across bases".into()));
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        let basis = self.basis.product(&other.basis)?;
        let amplitudes = self.amplitudes.kronecker(&other.amplitudes);
        Ok(Self { basis, amplitudes })
    }

    /// Restrict to a sub-basis (amplitudes outside it are discarded).
    pub fn project(&self, target: &ModeBasis) -> Result<StateVector> {
        let map = sub_basis_map(&self.basis, target)?;
        let amplitudes = DVector::from_iterator(map.len(), map.iter().map(|&i| self.amplitudes[i]));
        Ok(Self {
            basis: target.clone(),
            amplitudes,
        })
    }

    /// Place into a larger basis containing every tuple of this one.
    pub fn embed(&self, target: &ModeBasis) -> Result<StateVector> {
        let map = sub_basis_map(target, &self.basis)?;
        let mut out = Self::zeros(target);
        for (src, &dst) in map.iter().enumerate() {
            out.amplitudes[dst] = self.amplitudes[src];
        }
        Ok(out)
    }

    pub fn to_density(&self) -> DensityOperator {
        DensityOperator {
            basis: self.basis.clone(),
            matrix: &self.amplitudes * self.amplitudes.adjoint(),
        }
    }

    /// `<ψ|H|ψ>` for a normalized state; the imaginary residue is dropped.
    pub fn expectation(&self, h: &HermitianOperator) -> Result<f64> {
        Ok(self.expectation_complex(h)?.re)
    }

    pub fn expectation_complex(&self, h: &HermitianOperator) -> Result<C64> {
        if h.basis() != &self.basis {
            return Err(Error::BasisMismatch("observable and state bases differ".into()));
        }
        Ok(self.amplitudes.dotc(&(h.matrix() * &self.amplitudes)))
    }

    /// Fidelity |<a|b>|² between normalized states.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }
}

/// Density operator; may be unnormalized while a conditional state is being
/// built, see [`DensityOperator::trace`].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    basis: ModeBasis,
    matrix: DMatrix<C64>,
}

impl DensityOperator {
    pub fn new(basis: ModeBasis, matrix: DMatrix<C64>) -> Result<Self> {
        let d = basis.dimension();
        if d > MAX_OPERATOR_DIMENSION {
            return Err(Error::DimensionOverflow {
                dimension: d,
                limit: MAX_OPERATOR_DIMENSION,
            });
        }
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::BasisMismatch(format!(
                "{}x{} matrix on a basis of dimension {d}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { basis, matrix })
    }

    pub fn zeros(basis: &ModeBasis) -> Self {
        let d = basis.dimension();
        Self {
            basis: basis.clone(),
            matrix: DMatrix::zeros(d, d),
        }
    }

    pub fn from_pure(state: &StateVector) -> Self {
        state.to_density()
    }

    /// `Σ_i |ψ_i><ψ_i|` over unnormalized branches sharing one basis.
    pub fn from_branches(basis: &ModeBasis, branches: &[StateVector]) -> Result<Self> {
        let mut rho = Self::zeros(basis);
        for b in branches {
            if b.basis() != basis {
                return Err(Error::BasisMismatch("branch basis differs".into()));
            }
            let a = b.amplitudes();
            rho.matrix += a * a.adjoint();
        }
        Ok(rho)
    }

    pub fn basis(&self) -> &ModeBasis {
        &self.basis
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn normalize(&self) -> Result<Self> {
        let t = self.trace();
        if t <= 0.0 || !t.is_finite() {
            return Err(Error::ZeroProbability(format!("density operator has trace {t}")));
        }
        Ok(Self {
            basis: self.basis.clone(),
            matrix: &self.matrix / C64::new(t, 0.0),
        })
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            basis: self.basis.clone(),
            matrix: &self.matrix * C64::new(factor, 0.0),
        }
    }

    pub fn add(&self, other: &DensityOperator) -> Result<Self> {
        if self.basis != other.basis {
            return Err(Error::BasisMismatch("sum across bases".into()));
        }
        Ok(Self {
            basis: self.basis.clone(),
            matrix: &self.matrix + &other.matrix,
        })
    }

    pub fn purity(&self) -> f64 {
        let t = self.trace();
        (&self.matrix * &self.matrix).trace().re / (t * t)
    }

    /// `Tr[ρ H]`, real part.
    pub fn expectation(&self, h: &HermitianOperator) -> Result<f64> {
        Ok(self.expectation_complex(h)?.re)
    }

    pub fn expectation_complex(&self, h: &HermitianOperator) -> Result<C64> {
        if h.basis() != &self.basis {
            return Err(Error::BasisMismatch("observable and state bases differ".into()));
        }
        let m = h.matrix();
        let d = self.basis.dimension();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..d {
            for j in 0..d {
                acc += m[(i, j)] * self.matrix[(j, i)];
            }
        }
        Ok(acc)
    }

    /// `<ψ|ρ|ψ>` for a normalized target.
    pub fn fidelity_with(&self, target: &StateVector) -> Result<f64> {
        if target.basis() != &self.basis {
            return Err(Error::BasisMismatch("fidelity across bases".into()));
        }
        let a = target.amplitudes();
        Ok(a.dotc(&(&self.matrix * a)).re)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.basis.dimension();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        let e = jacobi_eigen(&self.matrix)?;
        Ok(e.values[0])
    }

    /// Restrict to a sub-basis.
    pub fn project(&self, target: &ModeBasis) -> Result<Self> {
        let map = sub_basis_map(&self.basis, target)?;
        let d = map.len();
        Ok(Self {
            basis: target.clone(),
            matrix: DMatrix::from_fn(d, d, |i, j| self.matrix[(map[i], map[j])]),
        })
    }

    /// Place into a larger basis containing every tuple of this one.
    pub fn embed(&self, target: &ModeBasis) -> Result<Self> {
        let map = sub_basis_map(target, &self.basis)?;
        let mut out = Self::zeros(target);
        for (i, &ti) in map.iter().enumerate() {
            for (j, &tj) in map.iter().enumerate() {
                out.matrix[(ti, tj)] = self.matrix[(i, j)];
            }
        }
        Ok(out)
    }

    /// `U ρ U†` (no renormalization).
    pub fn conjugate_by(&self, unitary: &Operator) -> Result<Self> {
        if unitary.basis() != &self.basis {
            return Err(Error::BasisMismatch("operator and state bases differ".into()));
        }
        let u = unitary.matrix();
        let m = u * &self.matrix * u.adjoint();
        Ok(Self {
            basis: self.basis.clone(),
            matrix: (&m + m.adjoint()) * C64::new(0.5, 0.0),
        })
    }

    /// Reduced state on `keep` (in the listed order).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        self.basis.check_modes(keep)?;
        let reduced = self.basis.select_modes(keep)?;
        let traced: Vec<usize> = (0..self.basis.mode_count()).filter(|m| !keep.contains(m)).collect();
        let mut groups: HashMap<Vec<usize>, Vec<(usize, usize)>> = HashMap::new();
        for (i, occ) in self.basis.iter().enumerate() {
            let kept: Vec<usize> = keep.iter().map(|&m| occ[m]).collect();
            let env: Vec<usize> = traced.iter().map(|&m| occ[m]).collect();
            let r = reduced.index_of(&kept).expect("kept tuple is inside the reduced basis");
            groups.entry(env).or_default().push((i, r));
        }
        let mut out = Self::zeros(&reduced);
        for members in groups.values() {
            for &(i, ri) in members {
                for &(j, rj) in members {
                    out.matrix[(ri, rj)] += self.matrix[(i, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn max_abs_diff(&self, other: &DensityOperator) -> f64 {
        super::operator::max_abs_diff(&self.matrix, &other.matrix)
    }
}
