//! Dihedral-group orbits and the trivial-symmetry-sector basis.
//!
//! Bitstrings are packed into integers with bit `i` holding the occupation of
//! site `i`. The group D_N acts by permuting sites: N rotations and N
//! reflections. The trivial-sector basis has one normalized orbit-sum state
//! per orbit; representatives are the lexicographically (numerically) minimal
//! orbit members and orbits are ordered by representative.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::state::{BasisTag, StateVector};
use crate::{Error, Result};

/// Hard cap for 2^N enumeration.
pub const MAX_ATOMS: usize = 20;

/// Site permutations of the dihedral group D_N (2N elements: N rotations
/// followed by N reflections). `perm[s]` is the image of site `s`.
pub fn dihedral_elements(n: usize) -> Vec<Vec<usize>> {
    let mut elems = Vec::with_capacity(2 * n);
    for t in 0..n {
        elems.push((0..n).map(|s| (s + t) % n).collect());
    }
    for t in 0..n {
        elems.push((0..n).map(|s| (t + n - s) % n).collect());
    }
    elems
}

/// Apply a site permutation to a packed bitstring.
pub fn apply_perm(perm: &[usize], bits: u32) -> u32 {
    let mut out = 0u32;
    for (s, &img) in perm.iter().enumerate() {
        if bits >> s & 1 == 1 {
            out |= 1 << img;
        }
    }
    out
}

/// Trivial-irrep basis of D_N acting on N-site bitstrings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SectorBasis {
    n_atoms: usize,
    representatives: Vec<u32>,
    orbit_sizes: Vec<usize>,
    /// Orbit index of every full-basis bitstring.
    #[serde(skip)]
    index_of: Vec<u32>,
}

impl SectorBasis {
    /// Enumerate all dihedral orbits of the 2^N bitstrings.
    pub fn dihedral_orbits(n_atoms: usize) -> Result<Self> {
        if n_atoms < 3 {
            return Err(Error::TooFewAtoms(n_atoms));
        }
        if n_atoms > MAX_ATOMS {
            return Err(Error::AtomCapExceeded {
                n: n_atoms,
                cap: MAX_ATOMS,
            });
        }
        let elems = dihedral_elements(n_atoms);
        let total = 1usize << n_atoms;
        let mut index_of = vec![u32::MAX; total];
        let mut representatives = Vec::new();
        let mut orbit_sizes = Vec::new();
        let mut orbit = Vec::with_capacity(2 * n_atoms);
        for bits in 0..total as u32 {
            if index_of[bits as usize] != u32::MAX {
                continue;
            }
            // `bits` is the minimal unseen element, hence the canonical
            // representative of a new orbit.
            orbit.clear();
            orbit.extend(elems.iter().map(|p| apply_perm(p, bits)));
            orbit.sort_unstable();
            orbit.dedup();
            debug_assert_eq!(orbit[0], bits);
            let idx = representatives.len() as u32;
            for &img in &orbit {
                index_of[img as usize] = idx;
            }
            representatives.push(bits);
            orbit_sizes.push(orbit.len());
        }
        Ok(Self {
            n_atoms,
            representatives,
            orbit_sizes,
            index_of,
        })
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    /// Sector dimension (number of orbits).
    pub fn dim(&self) -> usize {
        self.representatives.len()
    }

    pub fn representatives(&self) -> &[u32] {
        &self.representatives
    }

    pub fn orbit_sizes(&self) -> &[usize] {
        &self.orbit_sizes
    }

    /// Orbit index of an arbitrary full-basis bitstring.
    pub fn index_of(&self, bits: u32) -> usize {
        self.index_of[bits as usize] as usize
    }

    pub fn full_dim(&self) -> usize {
        1 << self.n_atoms
    }

    /// Rebuild the `index_of` table (needed after deserialization).
    fn rebuild_index(&mut self) {
        let elems = dihedral_elements(self.n_atoms);
        let mut index_of = vec![u32::MAX; self.full_dim()];
        for (idx, &rep) in self.representatives.iter().enumerate() {
            for p in &elems {
                index_of[apply_perm(p, rep) as usize] = idx as u32;
            }
        }
        self.index_of = index_of;
    }

    /// Embed a sector state into the full basis (isometry): the amplitude on
    /// each bitstring of orbit `o` is `sector_amp[o] / sqrt(orbit_size[o])`.
    pub fn embed(&self, state: &StateVector) -> Result<StateVector> {
        state.expect_sector()?;
        if state.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: state.dim(),
            });
        }
        let mut full = DVector::from_element(self.full_dim(), Complex64::new(0.0, 0.0));
        for bits in 0..self.full_dim() {
            let o = self.index_of[bits] as usize;
            full[bits] = state.amplitudes[o] / (self.orbit_sizes[o] as f64).sqrt();
        }
        Ok(StateVector::new(full, BasisTag::Full, self.n_atoms))
    }

    /// Project a full-basis state onto the sector. Not renormalized: the norm
    /// of the result is the weight of the symmetric component.
    pub fn project(&self, state: &StateVector) -> Result<StateVector> {
        state.expect_full()?;
        if state.dim() != self.full_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.full_dim(),
                got: state.dim(),
            });
        }
        let mut sector = DVector::from_element(self.dim(), Complex64::new(0.0, 0.0));
        for bits in 0..self.full_dim() {
            let o = self.index_of[bits] as usize;
            sector[o] += state.amplitudes[bits];
        }
        for (o, amp) in sector.iter_mut().enumerate() {
            *amp /= (self.orbit_sizes[o] as f64).sqrt();
        }
        Ok(StateVector::new(sector, BasisTag::Sector, self.n_atoms))
    }

    /// Haar-random state of the trivial sector: independent complex Gaussian
    /// components (re, im ~ N(0, 1/2)) followed by normalization.
    pub fn haar_sector<R: Rng + ?Sized>(&self, rng: &mut R) -> StateVector {
        let normal = Normal::new(0.0, (0.5f64).sqrt()).unwrap();
        let amps = DVector::from_iterator(
            self.dim(),
            (0..self.dim()).map(|_| Complex64::new(normal.sample(rng), normal.sample(rng))),
        );
        let mut state = StateVector::new(amps, BasisTag::Sector, self.n_atoms);
        state.normalize();
        state
    }

    /// Haar-random state of the full 2^N space (same Ginibre construction).
    pub fn haar_full<R: Rng + ?Sized>(n_atoms: usize, rng: &mut R) -> StateVector {
        let dim = 1usize << n_atoms;
        let normal = Normal::new(0.0, (0.5f64).sqrt()).unwrap();
        let amps = DVector::from_iterator(
            dim,
            (0..dim).map(|_| Complex64::new(normal.sample(rng), normal.sample(rng))),
        );
        let mut state = StateVector::new(amps, BasisTag::Full, n_atoms);
        state.normalize();
        state
    }

    /// JSON cache document (representatives as integer bitmasks). File name
    /// convention: `sector_N{N}.json`.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut basis: SectorBasis = serde_json::from_str(text)?;
        basis.validate()?;
        basis.rebuild_index();
        if basis.index_of.iter().any(|&i| i == u32::MAX) {
            return Err(Error::InvalidConfig(
                "representatives do not cover all bitstrings".into(),
            ));
        }
        Ok(basis)
    }

    /// Structural checks used when loading untrusted documents.
    fn validate(&self) -> Result<()> {
        if self.n_atoms < 3 || self.n_atoms > MAX_ATOMS {
            return Err(Error::InvalidConfig(format!(
                "n_atoms {} out of range",
                self.n_atoms
            )));
        }
        if self.representatives.len() != self.orbit_sizes.len() {
            return Err(Error::InvalidConfig(
                "representatives/orbit_sizes length mismatch".into(),
            ));
        }
        let total: usize = self.orbit_sizes.iter().sum();
        if total != self.full_dim() {
            return Err(Error::InvalidConfig(format!(
                "orbit sizes sum to {total}, expected {}",
                self.full_dim()
            )));
        }
        for (&rep, &size) in self.representatives.iter().zip(&self.orbit_sizes) {
            if rep as usize >= self.full_dim() || size == 0 || (2 * self.n_atoms) % size != 0 {
                return Err(Error::InvalidConfig(format!(
                    "invalid orbit (rep {rep}, size {size})"
                )));
            }
        }
        Ok(())
    }

    pub fn cache_file_name(&self) -> String {
        format!("sector_N{}.json", self.n_atoms)
    }
}
