//! Exact analytic gradient of the total cost.
//!
//! The physical term uses the adjoint scheme: forward states psi_k, backward
//! costates phi_k, and the Frechet derivative of each segment propagator
//! through the eigendecomposition of its Hamiltonian (Daleckii-Krein
//! divided-difference kernel). Penalty gradients are closed-form.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::hamiltonian::SectorOperators;
use crate::state::StateVector;
use crate::Result;

use super::config::{GrapeConfig, GrapeParams};
use super::cost::{forward_pass, OVERLAP_FLOOR};

/// Eigenvalue gaps below this use the confluent limit of the kernel.
pub const CONFLUENCE_TOL: f64 = 1e-10;

/// Gradient split by control variable; same layout as [`GrapeParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct GradientParts {
    pub omega: Vec<f64>,
    pub delta: Vec<f64>,
    pub dt: Vec<f64>,
}

impl GradientParts {
    pub fn zeros(m: usize) -> Self {
        Self {
            omega: vec![0.0; m],
            delta: vec![0.0; m],
            dt: vec![0.0; m],
        }
    }

    /// Flat layout [omega_0..omega_{M-1}, delta_0.., dt_0..].
    pub fn flat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(3 * self.omega.len());
        v.extend_from_slice(&self.omega);
        v.extend_from_slice(&self.delta);
        v.extend_from_slice(&self.dt);
        v
    }

    pub fn add(&mut self, other: &Self) {
        for (a, b) in self.omega.iter_mut().zip(&other.omega) {
            *a += b;
        }
        for (a, b) in self.delta.iter_mut().zip(&other.delta) {
            *a += b;
        }
        for (a, b) in self.dt.iter_mut().zip(&other.dt) {
            *a += b;
        }
    }

    pub fn norm_inf(&self) -> f64 {
        self.flat().iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }
}

fn to_eigenbasis(v: &DMatrix<f64>, psi: &DVector<Complex64>) -> DVector<Complex64> {
    let dim = psi.len();
    let re = DVector::from_iterator(dim, psi.iter().map(|a| a.re));
    let im = DVector::from_iterator(dim, psi.iter().map(|a| a.im));
    let ar = v.tr_mul(&re);
    let ai = v.tr_mul(&im);
    DVector::from_iterator(
        dim,
        ar.iter().zip(ai.iter()).map(|(&r, &i)| Complex64::new(r, i)),
    )
}

/// Divided difference of f(lambda) = exp(-i lambda dt).
fn kernel(la: f64, lb: f64, dt: f64) -> Complex64 {
    if (la - lb).abs() < CONFLUENCE_TOL {
        let mid = 0.5 * (la + lb);
        Complex64::new(0.0, -dt) * Complex64::from_polar(1.0, -mid * dt)
    } else {
        (Complex64::from_polar(1.0, -la * dt) - Complex64::from_polar(1.0, -lb * dt))
            / (la - lb)
    }
}

/// Gradient of C_phys only.
pub fn gradient_phys(
    params: &GrapeParams,
    target: &StateVector,
    ops: &SectorOperators,
) -> Result<GradientParts> {
    target.expect_sector()?;
    target.check_normalized(1e-8)?;
    let m = params.m_segments();
    let dim = ops.dim();
    let (states, eigens) = forward_pass(params, target.n_atoms, ops)?;

    // backward costates: phi[k] = (U_{m-1}...U_k)^dagger |target>
    let mut costates = vec![DVector::zeros(0); m + 1];
    costates[m] = target.amplitudes.clone();
    for k in (0..m).rev() {
        costates[k] = eigens[k].propagate(-params.dt[k], &costates[k + 1]);
    }

    let z = target.amplitudes.dotc(&states[m]);
    let z_sq = z.norm_sqr().max(OVERLAP_FLOOR * OVERLAP_FLOOR);

    let mut grad = GradientParts::zeros(m);
    for k in 0..m {
        let v = &eigens[k].eigenvectors;
        let lambda = &eigens[k].eigenvalues;
        let dt = params.dt[k];
        let x = to_eigenbasis(v, &states[k]);
        let y = to_eigenbasis(v, &costates[k + 1]);

        // dH/dOmega = jx and dH/dDelta = -diag(n), both in the eigenbasis
        let m_omega = v.tr_mul(&(&ops.jx * v));
        let mut nv = v.clone();
        for i in 0..dim {
            let ni = ops.n_diag[i];
            for b in 0..dim {
                nv[(i, b)] *= -ni;
            }
        }
        let m_delta = v.tr_mul(&nv);

        let mut dz_omega = Complex64::new(0.0, 0.0);
        let mut dz_delta = Complex64::new(0.0, 0.0);
        let mut dz_dt = Complex64::new(0.0, 0.0);
        for a in 0..dim {
            let ya = y[a].conj();
            for b in 0..dim {
                let yx = ya * x[b] * kernel(lambda[a], lambda[b], dt);
                dz_omega += yx * m_omega[(a, b)];
                dz_delta += yx * m_delta[(a, b)];
            }
            // dU/d(dt) = -i H U, diagonal in the eigenbasis
            dz_dt += ya
                * x[a]
                * Complex64::new(0.0, -lambda[a])
                * Complex64::from_polar(1.0, -lambda[a] * dt);
        }

        let pull = |dz: Complex64| -2.0 / z_sq * (z.conj() * dz).re;
        grad.omega[k] = pull(dz_omega);
        grad.delta[k] = pull(dz_delta);
        grad.dt[k] = pull(dz_dt);
    }
    Ok(grad)
}

/// Closed-form gradient of the smoothness and total-time penalties.
pub fn gradient_pulse(params: &GrapeParams, config: &GrapeConfig) -> Result<GradientParts> {
    params.validate()?;
    let m = params.m_segments();
    let mut grad = GradientParts::zeros(m);
    for k in 0..m - 1 {
        let tau = 0.5 * (params.dt[k] + params.dt[k + 1]);
        let d_delta = params.delta[k + 1] - params.delta[k];
        let d_omega = params.omega[k + 1] - params.omega[k];
        let two = 2.0 * config.a1 / tau;
        grad.delta[k] -= two * d_delta;
        grad.delta[k + 1] += two * d_delta;
        grad.omega[k] -= two * d_omega;
        grad.omega[k + 1] += two * d_omega;
        // d(1/tau)/d(dt_j) = -1/(2 tau^2) for j = k, k+1
        let s = d_delta * d_delta + d_omega * d_omega;
        let dt_term = -config.a1 * s / (2.0 * tau * tau);
        grad.dt[k] += dt_term;
        grad.dt[k + 1] += dt_term;
    }
    let u = params.total_time() / config.t_max;
    let time_slope =
        config.a2 * u.powf(config.alpha).exp() * config.alpha * u.powf(config.alpha - 1.0)
            / config.t_max;
    for g in &mut grad.dt {
        *g += time_slope;
    }
    Ok(grad)
}

/// Gradient of the quadratic hinge penalty; one-sided, zero at the bound.
pub fn gradient_amp(params: &GrapeParams, config: &GrapeConfig) -> GradientParts {
    let m = params.m_segments();
    let mut grad = GradientParts::zeros(m);
    for k in 0..m {
        let over_d = (params.delta[k].abs() - config.delta_max).max(0.0);
        grad.delta[k] = 2.0 * config.a3 * over_d * params.delta[k].signum();
        let over_w = (params.omega[k] - config.omega_max).max(0.0);
        grad.omega[k] = 2.0 * config.a3 * over_w;
    }
    grad
}

/// Gradient of the full cost F = C_phys + C_pulse + C_amp.
pub fn gradient(
    params: &GrapeParams,
    target: &StateVector,
    config: &GrapeConfig,
    ops: &SectorOperators,
) -> Result<GradientParts> {
    let mut grad = gradient_phys(params, target, ops)?;
    grad.add(&gradient_pulse(params, config)?);
    grad.add(&gradient_amp(params, config));
    Ok(grad)
}
