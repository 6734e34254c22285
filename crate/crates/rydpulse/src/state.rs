//! Complex state vectors, tagged by the basis they live in.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::{Error, Result};

/// Which basis the amplitudes refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisTag {
    /// Trivial-sector orbit basis (length = sector dimension).
    Sector,
    /// Full computational basis (length = 2^N).
    Full,
}

/// Complex amplitude vector over either the sector or the full basis.
#[derive(Debug, Clone)]
pub struct StateVector {
    pub amplitudes: DVector<Complex64>,
    pub basis_tag: BasisTag,
    pub n_atoms: usize,
}

impl StateVector {
    pub fn new(amplitudes: DVector<Complex64>, basis_tag: BasisTag, n_atoms: usize) -> Self {
        Self {
            amplitudes,
            basis_tag,
            n_atoms,
        }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            self.amplitudes /= Complex64::new(n, 0.0);
        }
    }

    /// |<self|other>|^2; both states must live in the same basis.
    pub fn overlap_sq(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.basis_tag, other.basis_tag);
        self.amplitudes.dotc(&other.amplitudes).norm_sqr()
    }

    pub fn expect_sector(&self) -> Result<()> {
        if self.basis_tag != BasisTag::Sector {
            return Err(Error::WrongBasis { expected: "sector" });
        }
        Ok(())
    }

    pub fn expect_full(&self) -> Result<()> {
        if self.basis_tag != BasisTag::Full {
            return Err(Error::WrongBasis { expected: "full" });
        }
        Ok(())
    }

    pub fn check_normalized(&self, tol: f64) -> Result<()> {
        let dev = (self.norm() - 1.0).abs();
        if dev > tol {
            return Err(Error::NotNormalized(dev));
        }
        Ok(())
    }
}
