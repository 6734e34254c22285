//! Exact piecewise-constant time evolution in the sector basis.
//!
//! Each segment propagator exp(-i dt H) is evaluated through the symmetric
//! eigendecomposition of the (real) sector Hamiltonian, which is exact up to
//! floating point and reusable for GRAPE gradients.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::hamiltonian::{assemble, DriveAmplitudes, SectorOperators};
use crate::pulse::PulseSequence;
use crate::sector::SectorBasis;
use crate::state::{BasisTag, StateVector};
use crate::{Error, Result};

/// Eigendecomposition of one segment Hamiltonian.
#[derive(Debug, Clone)]
pub struct HamiltonianEigen {
    pub eigenvalues: DVector<f64>,
    /// Orthogonal matrix of eigenvectors (columns).
    pub eigenvectors: DMatrix<f64>,
}

impl HamiltonianEigen {
    pub fn new(h: &DMatrix<f64>) -> Self {
        // nalgebra's QR-based symmetric_eigen occasionally misconverges and
        // returns an orthogonal V with V diag(L) V^T far from H, which would
        // silently corrupt the evolution. Verify the decomposition on probe
        // vectors and fall back to cyclic Jacobi (slower, unconditionally
        // robust) when it fails.
        let eig = h.clone().symmetric_eigen();
        let candidate = Self {
            eigenvalues: eig.eigenvalues,
            eigenvectors: eig.eigenvectors,
        };
        if candidate.reconstructs(h) {
            return candidate;
        }
        let (eigenvalues, eigenvectors) = jacobi_eigen(h);
        let fallback = Self {
            eigenvalues,
            eigenvectors,
        };
        debug_assert!(fallback.reconstructs(h));
        fallback
    }

    /// Check H u = V diag(L) V^T u on a few fixed probe vectors.
    fn reconstructs(&self, h: &DMatrix<f64>) -> bool {
        let n = h.nrows();
        let scale = h.norm().max(1.0);
        for probe in 0..3u32 {
            let u = DVector::from_fn(n, |i, _| match probe {
                0 => if i % 2 == 0 { 1.0 } else { -1.0 },
                1 => (i + 1) as f64 / n as f64,
                _ => (1.7 * i as f64).cos() + 0.3,
            });
            let hu = h * &u;
            let mut c = self.eigenvectors.tr_mul(&u);
            for k in 0..n {
                c[k] *= self.eigenvalues[k];
            }
            let vu = &self.eigenvectors * c;
            if (hu - vu).norm() > 1e-12 * scale * u.norm() {
                return false;
            }
        }
        true
    }

    /// Apply exp(-i dt H) to a complex vector using real matvecs on the real
    /// and imaginary parts.
    pub fn propagate(&self, dt: f64, psi: &DVector<Complex64>) -> DVector<Complex64> {
        let dim = psi.len();
        let re = DVector::from_iterator(dim, psi.iter().map(|a| a.re));
        let im = DVector::from_iterator(dim, psi.iter().map(|a| a.im));
        let v = &self.eigenvectors;
        let a = v.tr_mul(&re);
        let b = v.tr_mul(&im);
        // multiply eigenbasis coefficients by exp(-i lambda dt)
        let mut cr = DVector::zeros(dim);
        let mut ci = DVector::zeros(dim);
        for k in 0..dim {
            let phase = -self.eigenvalues[k] * dt;
            let (s, c) = phase.sin_cos();
            cr[k] = a[k] * c - b[k] * s;
            ci[k] = a[k] * s + b[k] * c;
        }
        let out_re = v * cr;
        let out_im = v * ci;
        DVector::from_iterator(
            dim,
            out_re.iter().zip(out_im.iter()).map(|(&r, &i)| Complex64::new(r, i)),
        )
    }
}

/// Cyclic Jacobi diagonalization of a real symmetric matrix.
fn jacobi_eigen(h: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = h.nrows();
    let mut a = h.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    let scale = h.norm().max(1e-300);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if (2.0 * off).sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    1.0 / (theta - (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // A <- J^T A J, V <- V J with the Givens rotation J in (p, q)
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = c * aip - s * aiq;
                    a[(i, q)] = s * aip + c * aiq;
                }
                for j in 0..n {
                    let apj = a[(p, j)];
                    let aqj = a[(q, j)];
                    a[(p, j)] = c * apj - s * aqj;
                    a[(q, j)] = s * apj + c * aqj;
                }
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = c * vip - s * viq;
                    v[(i, q)] = s * vip + c * viq;
                }
            }
        }
    }
    (a.diagonal(), v)
}

/// Propagate a sector state through one constant segment.
pub fn segment_propagate(
    state: &StateVector,
    drive: DriveAmplitudes,
    dt: f64,
    ops: &SectorOperators,
) -> Result<StateVector> {
    if dt <= 0.0 {
        return Err(Error::NonPositiveDuration(dt));
    }
    state.expect_sector()?;
    if state.dim() != ops.dim() {
        return Err(Error::DimensionMismatch {
            expected: ops.dim(),
            got: state.dim(),
        });
    }
    let eigen = HamiltonianEigen::new(&assemble(drive, ops));
    let amps = eigen.propagate(dt, &state.amplitudes);
    Ok(StateVector::new(amps, BasisTag::Sector, state.n_atoms))
}

/// Apply the whole sequence in segment order.
pub fn evolve(
    initial: &StateVector,
    seq: &PulseSequence,
    ops: &SectorOperators,
) -> Result<StateVector> {
    let mut state = initial.clone();
    for seg in &seq.segments {
        state = segment_propagate(&state, seg.drive(), seg.dt_us, ops)?;
    }
    Ok(state)
}

/// The product state |down...down>, unit amplitude on the all-down orbit.
pub fn default_initial(basis: &SectorBasis) -> StateVector {
    let mut amps = DVector::from_element(basis.dim(), Complex64::new(0.0, 0.0));
    let o = basis.index_of(0);
    amps[o] = Complex64::new(1.0, 0.0);
    StateVector::new(amps, BasisTag::Sector, basis.n_atoms())
}
