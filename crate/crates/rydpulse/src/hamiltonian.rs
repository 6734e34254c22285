//! Van der Waals Ising drift plus global drive, in the sector basis.
//!
//! The driven Hamiltonian is H = H0 + Omega*Jx - Delta*Nhat with
//! H0 = sum_{i<j} C6 / r_ij^6 * n_i n_j. All operators are real in the
//! computational basis, so sector matrices are real symmetric.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::geometry::RingGeometry;
use crate::sector::SectorBasis;
use crate::state::StateVector;
use crate::{Error, Result};

/// Default van der Waals coefficient, rad us^-1 um^6 (a standard Rb Rydberg
/// value; configurable).
pub const DEFAULT_C6: f64 = 5_420_503.0;
/// Default maximal Rabi frequency, rad us^-1.
pub const DEFAULT_OMEGA_MAX: f64 = 12.0;
/// Default maximal detuning magnitude, rad us^-1.
pub const DEFAULT_DELTA_MAX: f64 = 20.0;

/// Interaction coefficient plus geometry.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub c6: f64,
    pub geometry: RingGeometry,
}

impl PhysicalParams {
    pub fn new(c6: f64, geometry: RingGeometry) -> Result<Self> {
        if c6 <= 0.0 {
            return Err(Error::NonPositiveInteraction(c6));
        }
        Ok(Self { c6, geometry })
    }

    /// Nearest-neighbor interaction energy V(d) = C6 / d^6.
    pub fn v_nn(&self) -> f64 {
        self.c6 / self.geometry.spacing().powi(6)
    }
}

/// Instantaneous drive amplitudes (rad us^-1).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DriveAmplitudes {
    pub rabi: f64,
    pub detuning: f64,
}

impl DriveAmplitudes {
    // Negative `rabi` is allowed: physical pulses keep it non-negative, but
    // gradient checks probe the cost as a smooth function on all of R.
    pub fn new(rabi: f64, detuning: f64) -> Self {
        Self { rabi, detuning }
    }
}

/// Sector-basis matrices of the collective operators.
///
/// H0 and Nhat are diagonal on orbits; Jx is a dense real symmetric matrix
/// connecting orbits whose excitation numbers differ by one.
#[derive(Debug, Clone)]
pub struct SectorOperators {
    pub h0_diag: DVector<f64>,
    pub n_diag: DVector<f64>,
    pub jx: DMatrix<f64>,
}

impl SectorOperators {
    pub fn dim(&self) -> usize {
        self.h0_diag.len()
    }

    /// Orbit index of the all-down product state.
    pub fn all_down_index(&self) -> usize {
        self.n_diag
            .iter()
            .position(|&n| n == 0.0)
            .expect("all-down orbit always present")
    }
}

/// H0 eigenvalue of a single bitstring: sum over up-pairs of C6 / r_ij^6.
/// Constant on each dihedral orbit.
pub fn interaction_energy(bits: u32, params: &PhysicalParams) -> f64 {
    let n = params.geometry.n_atoms();
    let mut energy = 0.0;
    for i in 0..n {
        if bits >> i & 1 == 0 {
            continue;
        }
        for j in (i + 1)..n {
            if bits >> j & 1 == 1 {
                energy += params.c6 / params.geometry.distance(i, j).powi(6);
            }
        }
    }
    energy
}

/// Assemble the sector matrices of H0, Nhat and Jx.
///
/// Jx element between orbits o and o': half the number of single-spin-flip
/// pairs connecting them, weighted by 1/sqrt(|o| |o'|). By transitivity of the
/// group action the flip count from any member of o is the count from its
/// representative, so the pair count is |o| * c_rep and the matrix element
/// reduces to c_rep * sqrt(|o| / |o'|) / 2.
pub fn build_sector_operators(
    basis: &SectorBasis,
    params: &PhysicalParams,
) -> Result<SectorOperators> {
    let n = basis.n_atoms();
    if n != params.geometry.n_atoms() {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: params.geometry.n_atoms(),
        });
    }
    let dim = basis.dim();
    let mut h0_diag = DVector::zeros(dim);
    let mut n_diag = DVector::zeros(dim);
    let mut jx = DMatrix::zeros(dim, dim);
    for (o, &rep) in basis.representatives().iter().enumerate() {
        h0_diag[o] = interaction_energy(rep, params);
        n_diag[o] = rep.count_ones() as f64;
        let size_o = basis.orbit_sizes()[o] as f64;
        for site in 0..n {
            let flipped = rep ^ (1 << site);
            let target = basis.index_of(flipped);
            let size_t = basis.orbit_sizes()[target] as f64;
            jx[(target, o)] += 0.5 * (size_o / size_t).sqrt();
        }
    }
    debug_assert!({
        let asym = (&jx - jx.transpose()).amax();
        asym < 1e-12
    });
    Ok(SectorOperators {
        h0_diag,
        n_diag,
        jx,
    })
}

/// H(Omega, Delta) = diag(h0 - Delta * n) + Omega * Jx. Real symmetric.
pub fn assemble(drive: DriveAmplitudes, ops: &SectorOperators) -> DMatrix<f64> {
    let mut h = &ops.jx * drive.rabi;
    for o in 0..ops.dim() {
        h[(o, o)] += ops.h0_diag[o] - drive.detuning * ops.n_diag[o];
    }
    h
}

/// <n_0 n_1> of a full-basis state: Born-weighted product of the occupations
/// at sites 0 and 1.
pub fn nn_correlation(state: &StateVector) -> Result<f64> {
    state.expect_full()?;
    let mut corr = 0.0;
    for (bits, amp) in state.amplitudes.iter().enumerate() {
        if bits & 0b11 == 0b11 {
            corr += amp.norm_sqr();
        }
    }
    Ok(corr)
}

/// <Nhat>/N of a full-basis state.
pub fn mean_excitation(state: &StateVector) -> Result<f64> {
    state.expect_full()?;
    let mut total = 0.0;
    for (bits, amp) in state.amplitudes.iter().enumerate() {
        total += amp.norm_sqr() * bits.count_ones() as f64;
    }
    Ok(total / state.n_atoms as f64)
}
