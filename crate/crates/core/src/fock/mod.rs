//! Truncated multimode Fock-space algebra.

mod basis;
mod beam_splitter;
mod eig;
mod loss;
mod operator;
mod state;

pub use basis::{ModeBasis, MAX_DIMENSION};
pub use beam_splitter::{BeamSplitter, PhaseShifter, LEAK_TOLERANCE};
pub use eig::{hermitian_eig, Eigen};
pub use loss::LossChannel;
pub use operator::{HermitianOperator, Operator, C64, HERMITIAN_TOLERANCE, MAX_OPERATOR_DIMENSION};
pub use state::{DensityOperator, StateVector, NORMALIZATION_TOLERANCE};

#[cfg(test)]
pub(crate) use loss::binomial;
