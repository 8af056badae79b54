//! Dense operators on a truncated Fock basis.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::basis::ModeBasis;
use super::eig::{hermitian_eig, Eigen};
use super::state::StateVector;
use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Dense operators are limited to this many rows.
pub const MAX_OPERATOR_DIMENSION: usize = 4096;

/// Absolute tolerance of the Hermiticity check, relative to the largest
/// entry when that exceeds one.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;

/// General (not necessarily Hermitian) operator.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    basis: ModeBasis,
    matrix: DMatrix<C64>,
}

impl Operator {
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

    pub fn from_real(basis: ModeBasis, matrix: &DMatrix<f64>) -> Result<Self> {
        Self::new(basis, matrix.map(|x| C64::new(x, 0.0)))
    }

    pub fn identity(basis: &ModeBasis) -> Self {
        let d = basis.dimension();
        Self {
            basis: basis.clone(),
            matrix: DMatrix::identity(d, d),
        }
    }

    pub fn zeros(basis: &ModeBasis) -> Self {
        let d = basis.dimension();
        Self {
            basis: basis.clone(),
            matrix: DMatrix::zeros(d, d),
        }
    }

    pub fn from_diagonal(basis: &ModeBasis, diagonal: &[f64]) -> Result<Self> {
        if diagonal.len() != basis.dimension() {
            return Err(Error::BasisMismatch(format!(
                "{} diagonal entries for dimension {}",
                diagonal.len(),
                basis.dimension()
            )));
        }
        let v = DVector::from_iterator(diagonal.len(), diagonal.iter().map(|&x| C64::new(x, 0.0)));
        Self::new(basis.clone(), DMatrix::from_diagonal(&v))
    }

    /// Single-mode annihilation operator â.
    pub fn annihilation(cutoff: usize) -> Self {
        let basis = ModeBasis::single(cutoff);
        let mut m = DMatrix::zeros(cutoff + 1, cutoff + 1);
        for n in 1..=cutoff {
            m[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
        }
        Self { basis, matrix: m }
    }

    /// Single-mode creation operator â† (truncated at the cutoff).
    pub fn creation(cutoff: usize) -> Self {
        Self::annihilation(cutoff).adjoint()
    }

    pub fn basis(&self) -> &ModeBasis {
        &self.basis
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn dimension(&self) -> usize {
        self.basis.dimension()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            basis: self.basis.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn compose(&self, rhs: &Operator) -> Result<Operator> {
        self.same_basis(rhs)?;
        Ok(Self {
            basis: self.basis.clone(),
            matrix: &self.matrix * &rhs.matrix,
        })
    }

    pub fn add(&self, rhs: &Operator) -> Result<Operator> {
        self.same_basis(rhs)?;
        Ok(Self {
            basis: self.basis.clone(),
            matrix: &self.matrix + &rhs.matrix,
        })
    }

    pub fn sub(&self, rhs: &Operator) -> Result<Operator> {
        self.same_basis(rhs)?;
        Ok(Self {
            basis: self.basis.clone(),
            matrix: &self.matrix - &rhs.matrix,
        })
    }

    pub fn scale(&self, factor: C64) -> Operator {
        Self {
            basis: self.basis.clone(),
            matrix: &self.matrix * factor,
        }
    }

    /// Kronecker product on the concatenated basis.
    pub fn tensor(&self, rhs: &Operator) -> Result<Operator> {
        let basis = self.basis.product(&rhs.basis)?;
        if basis.dimension() > MAX_OPERATOR_DIMENSION {
            return Err(Error::DimensionOverflow {
                dimension: basis.dimension(),
                limit: MAX_OPERATOR_DIMENSION,
            });
        }
        Ok(Self {
            basis,
            matrix: self.matrix.kronecker(&rhs.matrix),
        })
    }

    /// Lift a single-mode operator to act on `mode` of `basis`. Matrix
    /// elements that would leave a capped basis are dropped.
    pub fn embed_single(single: &Operator, basis: &ModeBasis, mode: usize) -> Result<Operator> {
        basis.check_mode(mode)?;
        if single.basis.mode_count() != 1 {
            return Err(Error::BasisMismatch("expected a single-mode operator".into()));
        }
        let cutoff = single.basis.cutoffs()[0];
        if cutoff < basis.cutoffs()[mode] {
            return Err(Error::BasisMismatch(format!(
                "single-mode cutoff {cutoff} below mode cutoff {}",
                basis.cutoffs()[mode]
            )));
        }
        let d = basis.dimension();
        if d > MAX_OPERATOR_DIMENSION {
            return Err(Error::DimensionOverflow {
                dimension: d,
                limit: MAX_OPERATOR_DIMENSION,
            });
        }
        let mut m = DMatrix::zeros(d, d);
        let mut target = vec![0; basis.mode_count()];
        for (col, occ) in basis.iter().enumerate() {
            let n = occ[mode];
            target.copy_from_slice(occ);
            for k in 0..=basis.cutoffs()[mode] {
                let el = single.matrix[(k, n)];
                if el == C64::new(0.0, 0.0) {
                    continue;
                }
                target[mode] = k;
                if let Some(row) = basis.index_of(&target) {
                    m[(row, col)] = el;
                }
            }
        }
        Ok(Self {
            basis: basis.clone(),
            matrix: m,
        })
    }

    /// Restrict to a sub-basis whose tuples all exist in `self.basis()`.
    pub fn project(&self, target: &ModeBasis) -> Result<Operator> {
        let map = sub_basis_map(&self.basis, target)?;
        let d = target.dimension();
        let m = DMatrix::from_fn(d, d, |i, j| self.matrix[(map[i], map[j])]);
        Ok(Self {
            basis: target.clone(),
            matrix: m,
        })
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        if state.basis() != &self.basis {
            return Err(Error::BasisMismatch("operator and state bases differ".into()));
        }
        StateVector::new(self.basis.clone(), &self.matrix * state.amplitudes())
    }

    /// Largest entrywise deviation from the conjugate transpose.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dimension();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        max_abs_diff(&self.matrix, &other.matrix)
    }

    fn same_basis(&self, rhs: &Operator) -> Result<()> {
        if self.basis == rhs.basis {
            Ok(())
        } else {
            Err(Error::BasisMismatch("operands live on different bases".into()))
        }
    }
}

/// Self-adjoint operator; Hermiticity is checked on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator(Operator);

impl HermitianOperator {
    pub fn new(op: Operator) -> Result<Self> {
        let scale = op.matrix.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let deviation = op.hermiticity_defect();
        if deviation > HERMITIAN_TOLERANCE * scale {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self(op))
    }

    pub fn from_real(basis: ModeBasis, matrix: &DMatrix<f64>) -> Result<Self> {
        Self::new(Operator::from_real(basis, matrix)?)
    }

    pub fn identity(basis: &ModeBasis) -> Self {
        Self(Operator::identity(basis))
    }

    pub fn from_diagonal(basis: &ModeBasis, diagonal: &[f64]) -> Result<Self> {
        Operator::from_diagonal(basis, diagonal).map(Self)
    }

    /// Single-mode number operator n̂.
    pub fn number(cutoff: usize) -> Self {
        let diag: Vec<f64> = (0..=cutoff).map(|n| n as f64).collect();
        Self::from_diagonal(&ModeBasis::single(cutoff), &diag).expect("diagonal matches")
    }

    /// Total photon number operator on `basis`.
    pub fn total_number(basis: &ModeBasis) -> Self {
        let diag: Vec<f64> = (0..basis.dimension()).map(|i| basis.photon_number(i) as f64).collect();
        Self::from_diagonal(basis, &diag).expect("diagonal matches")
    }

    pub fn basis(&self) -> &ModeBasis {
        self.0.basis()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        self.0.matrix()
    }

    pub fn as_operator(&self) -> &Operator {
        &self.0
    }

    pub fn into_operator(self) -> Operator {
        self.0
    }

    pub fn dimension(&self) -> usize {
        self.0.dimension()
    }

    pub fn tensor(&self, rhs: &HermitianOperator) -> Result<HermitianOperator> {
        self.0.tensor(&rhs.0).map(Self)
    }

    pub fn add(&self, rhs: &HermitianOperator) -> Result<HermitianOperator> {
        self.0.add(&rhs.0).map(Self)
    }

    pub fn sub(&self, rhs: &HermitianOperator) -> Result<HermitianOperator> {
        self.0.sub(&rhs.0).map(Self)
    }

    pub fn scale(&self, factor: f64) -> HermitianOperator {
        Self(self.0.scale(C64::new(factor, 0.0)))
    }

    pub fn project(&self, target: &ModeBasis) -> Result<HermitianOperator> {
        self.0.project(target).map(Self)
    }

    pub fn embed_single(single: &HermitianOperator, basis: &ModeBasis, mode: usize) -> Result<Self> {
        Operator::embed_single(&single.0, basis, mode).map(Self)
    }

    /// Conjugation U H U†.
    pub fn conjugate_by(&self, unitary: &Operator) -> Result<HermitianOperator> {
        let m = unitary.matrix() * self.matrix() * unitary.matrix().adjoint();
        let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        Ok(Self(Operator::new(self.basis().clone(), m)?))
    }

    /// Ascending eigenvalues with orthonormal eigenvectors (columns).
    pub fn eig(&self) -> Result<Eigen> {
        hermitian_eig(self)
    }

    /// Spectral norm bound: the Frobenius norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.matrix().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &HermitianOperator) -> f64 {
        self.0.max_abs_diff(&other.0)
    }

    /// Largest imaginary part of any entry.
    pub fn max_imaginary(&self) -> f64 {
        self.matrix().iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }
}

pub(crate) fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// For every state of `target`, its index in `source`. Both bases must have
/// the same mode count.
pub(crate) fn sub_basis_map(source: &ModeBasis, target: &ModeBasis) -> Result<Vec<usize>> {
    if source.mode_count() != target.mode_count() {
        return Err(Error::BasisMismatch(format!(
            "{} modes vs {} modes",
            source.mode_count(),
            target.mode_count()
        )));
    }
    target
        .iter()
        .map(|t| {
            source
                .index_of(t)
                .ok_or_else(|| Error::BasisMismatch(format!("basis state {t:?} missing from source basis")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_operators_give_number() {
        let a = Operator::annihilation(4);
        let n = a.adjoint().compose(&a).unwrap();
        let expected = HermitianOperator::number(4);
        assert!(n.max_abs_diff(expected.as_operator()) < 1e-14);
    }

    #[test]
    fn identity_tensor_identity() {
        let a = HermitianOperator::identity(&ModeBasis::single(2));
        let b = HermitianOperator::identity(&ModeBasis::single(3));
        let ab = a.tensor(&b).unwrap();
        let id = HermitianOperator::identity(&ModeBasis::new(&[2, 3], None).unwrap());
        assert_eq!(ab, id);
    }

    #[test]
    fn embed_matches_kronecker() {
        let n = HermitianOperator::number(2);
        let id = HermitianOperator::identity(&ModeBasis::single(2));
        let basis = ModeBasis::uniform(2, 2).unwrap();
        let e0 = HermitianOperator::embed_single(&n, &basis, 0).unwrap();
        let e1 = HermitianOperator::embed_single(&n, &basis, 1).unwrap();
        assert!(e0.max_abs_diff(&n.tensor(&id).unwrap()) < 1e-15);
        assert!(e1.max_abs_diff(&id.tensor(&n).unwrap()) < 1e-15);
    }

    #[test]
    fn rejects_non_hermitian() {
        let a = Operator::annihilation(2);
        assert!(matches!(HermitianOperator::new(a), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn projection_onto_capped_subspace() {
        let full = ModeBasis::uniform(2, 2).unwrap();
        let capped = ModeBasis::new(&[2, 2], Some(2)).unwrap();
        let n = HermitianOperator::total_number(&full);
        let p = n.project(&capped).unwrap();
        assert_eq!(p, HermitianOperator::total_number(&capped));
    }

    #[test]
    fn tensor_dimension_guard() {
        let big = Operator::identity(&ModeBasis::single(99));
        let err = big.tensor(&big).unwrap_err();
        assert!(matches!(err, Error::DimensionOverflow { .. }));
    }
}
