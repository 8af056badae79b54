//! Enumeration of multimode Fock bases under per-mode cutoffs and an optional
//! total photon cap.
//!
//! Basis states are ordered lexicographically by occupation tuple, mode 0
//! being the most significant digit. For two modes with cap 2 this gives
//! `00, 01, 02, 10, 11, 20`.

use crate::error::{Error, Result};

/// Upper bound on the number of basis states of any single basis.
pub const MAX_DIMENSION: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeBasis {
    cutoffs: Vec<usize>,
    total_cap: Option<usize>,
    // Flattened occupation tuples, `mode_count` entries per basis state.
    occupations: Vec<usize>,
    // Mixed-radix strides, used when there is no cap.
    strides: Vec<usize>,
}

impl ModeBasis {
    pub fn new(cutoffs: &[usize], total_cap: Option<usize>) -> Result<Self> {
        if cutoffs.is_empty() {
            return Err(Error::InvalidParameter {
                name: "mode_count",
                reason: "a basis needs at least one mode".into(),
            });
        }
        let mut full: usize = 1;
        for &c in cutoffs {
            full = full
                .checked_mul(c + 1)
                .filter(|&d| d <= MAX_DIMENSION)
                .ok_or(Error::DimensionOverflow {
                    dimension: usize::MAX,
                    limit: MAX_DIMENSION,
                })?;
        }
        let mode_count = cutoffs.len();
        let mut strides = vec![1; mode_count];
        for m in (0..mode_count - 1).rev() {
            strides[m] = strides[m + 1] * (cutoffs[m + 1] + 1);
        }

        let mut occupations = Vec::with_capacity(full * mode_count);
        let mut tuple = vec![0usize; mode_count];
        for _ in 0..full {
            if total_cap.is_none_or(|cap| tuple.iter().sum::<usize>() <= cap) {
                occupations.extend_from_slice(&tuple);
            }
            // odometer increment, last mode fastest
            for m in (0..mode_count).rev() {
                if tuple[m] < cutoffs[m] {
                    tuple[m] += 1;
                    break;
                }
                tuple[m] = 0;
            }
        }
        Ok(Self {
            cutoffs: cutoffs.to_vec(),
            total_cap,
            occupations,
            strides,
        })
    }

    /// Single-mode basis `|0>, ..., |cutoff>`.
    pub fn single(cutoff: usize) -> Self {
        Self::new(&[cutoff], None).expect("single-mode basis is always valid")
    }

    /// Product basis with the same cutoff on every mode.
    pub fn uniform(mode_count: usize, cutoff: usize) -> Result<Self> {
        Self::new(&vec![cutoff; mode_count], None)
    }

    pub fn mode_count(&self) -> usize {
        self.cutoffs.len()
    }

    pub fn cutoffs(&self) -> &[usize] {
        &self.cutoffs
    }

    pub fn total_cap(&self) -> Option<usize> {
        self.total_cap
    }

    pub fn dimension(&self) -> usize {
        self.occupations.len() / self.mode_count()
    }

    /// Occupation tuple of the basis state at `index`.
    pub fn occupation(&self, index: usize) -> &[usize] {
        let m = self.mode_count();
        &self.occupations[index * m..(index + 1) * m]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[usize]> {
        self.occupations.chunks_exact(self.mode_count())
    }

    /// Index of an occupation tuple, `None` if it lies outside the basis.
    pub fn index_of(&self, occupation: &[usize]) -> Option<usize> {
        if occupation.len() != self.mode_count() || occupation.iter().zip(&self.cutoffs).any(|(n, c)| n > c) {
            return None;
        }
        match self.total_cap {
            None => Some(occupation.iter().zip(&self.strides).map(|(n, s)| n * s).sum()),
            Some(cap) => {
                if occupation.iter().sum::<usize>() > cap {
                    return None;
                }
                // tuples are stored in lexicographic order
                let (mut lo, mut hi) = (0, self.dimension());
                while lo < hi {
                    let mid = (lo + hi) / 2;
                    match self.occupation(mid).cmp(occupation) {
                        std::cmp::Ordering::Less => lo = mid + 1,
                        std::cmp::Ordering::Greater => hi = mid,
                        std::cmp::Ordering::Equal => return Some(mid),
                    }
                }
                None
            }
        }
    }

    /// Total photon number of the basis state at `index`.
    pub fn photon_number(&self, index: usize) -> usize {
        self.occupation(index).iter().sum()
    }

    /// Basis of `self` followed by the modes of `other`. Only uncapped bases
    /// have a product structure.
    pub fn product(&self, other: &ModeBasis) -> Result<ModeBasis> {
        if self.total_cap.is_some() || other.total_cap.is_some() {
            return Err(Error::BasisMismatch(
                "tensor products require uncapped bases; project afterwards".into(),
            ));
        }
        let dimension = self.dimension().saturating_mul(other.dimension());
        if dimension > MAX_DIMENSION {
            return Err(Error::DimensionOverflow {
                dimension,
                limit: MAX_DIMENSION,
            });
        }
        let cutoffs: Vec<usize> = self.cutoffs.iter().chain(&other.cutoffs).copied().collect();
        ModeBasis::new(&cutoffs, None)
    }

    /// Basis restricted to the listed modes (in the given order). The cap, if
    /// any, carries over.
    pub fn select_modes(&self, modes: &[usize]) -> Result<ModeBasis> {
        self.check_modes(modes)?;
        let cutoffs: Vec<usize> = modes.iter().map(|&m| self.cutoffs[m]).collect();
        ModeBasis::new(&cutoffs, self.total_cap)
    }

    pub(crate) fn check_mode(&self, mode: usize) -> Result<()> {
        if mode < self.mode_count() {
            Ok(())
        } else {
            Err(Error::InvalidParameter {
                name: "mode",
                reason: format!("mode {mode} out of range for {} modes", self.mode_count()),
            })
        }
    }

    pub(crate) fn check_modes(&self, modes: &[usize]) -> Result<()> {
        for (i, &m) in modes.iter().enumerate() {
            self.check_mode(m)?;
            if modes[..i].contains(&m) {
                return Err(Error::InvalidParameter {
                    name: "modes",
                    reason: format!("mode {m} listed twice"),
                });
            }
        }
        Ok(())
    }
}
