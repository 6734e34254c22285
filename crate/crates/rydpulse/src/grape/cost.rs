//! The three-term preparation cost F = C_phys + C_pulse + C_amp.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::evolve::{evolve, HamiltonianEigen};
use crate::hamiltonian::SectorOperators;
use crate::state::{BasisTag, StateVector};
use crate::{Error, Result};

use super::config::{GrapeConfig, GrapeParams};

/// Overlap magnitudes below this are clamped before the logarithm so
/// `cost_phys` stays finite.
pub const OVERLAP_FLOOR: f64 = 1e-300;

/// The preparation always starts from |down...down>.
pub fn initial_state(ops: &SectorOperators, n_atoms: usize) -> StateVector {
    let mut amps = DVector::from_element(ops.dim(), Complex64::new(0.0, 0.0));
    amps[ops.all_down_index()] = Complex64::new(1.0, 0.0);
    StateVector::new(amps, BasisTag::Sector, n_atoms)
}

/// Complex overlap <target|U(params)|down...down>.
pub fn final_overlap(
    params: &GrapeParams,
    target: &StateVector,
    ops: &SectorOperators,
) -> Result<Complex64> {
    target.expect_sector()?;
    target.check_normalized(1e-8)?;
    if target.dim() != ops.dim() {
        return Err(Error::DimensionMismatch {
            expected: ops.dim(),
            got: target.dim(),
        });
    }
    let seq = params.to_sequence()?;
    let psi = evolve(&initial_state(ops, target.n_atoms), &seq, ops)?;
    Ok(target.amplitudes.dotc(&psi.amplitudes))
}

/// Infidelity 1 - |<target|U|psi0>|^2.
pub fn infidelity(
    params: &GrapeParams,
    target: &StateVector,
    ops: &SectorOperators,
) -> Result<f64> {
    let z = final_overlap(params, target, ops)?;
    Ok((1.0 - z.norm_sqr()).max(0.0))
}

/// -log |<target|U|psi0>|^2, with the overlap clamped at `OVERLAP_FLOOR`.
pub fn cost_phys(
    params: &GrapeParams,
    target: &StateVector,
    ops: &SectorOperators,
) -> Result<f64> {
    let z = final_overlap(params, target, ops)?;
    Ok(-z.norm_sqr().max(OVERLAP_FLOOR * OVERLAP_FLOOR).ln())
}

/// Smoothness penalty plus total-time penalty.
pub fn cost_pulse(params: &GrapeParams, config: &GrapeConfig) -> Result<f64> {
    params.validate()?;
    let m = params.m_segments();
    let mut smooth = 0.0;
    for k in 0..m - 1 {
        let tau = 0.5 * (params.dt[k] + params.dt[k + 1]);
        let d_delta = params.delta[k + 1] - params.delta[k];
        let d_omega = params.omega[k + 1] - params.omega[k];
        smooth += (d_delta * d_delta + d_omega * d_omega) / tau;
    }
    let u = params.total_time() / config.t_max;
    Ok(config.a1 * smooth + config.a2 * u.powf(config.alpha).exp())
}

/// Quadratic hinge on |Delta_k| <= Delta_max and Omega_k <= Omega_max.
/// Omega_k >= 0 is structural (enforced by the optimizer's
/// reparameterization), so there is no lower hinge on Omega.
pub fn cost_amp(params: &GrapeParams, config: &GrapeConfig) -> f64 {
    let mut total = 0.0;
    for k in 0..params.m_segments() {
        let over_d = (params.delta[k].abs() - config.delta_max).max(0.0);
        let over_w = (params.omega[k] - config.omega_max).max(0.0);
        total += over_d * over_d + over_w * over_w;
    }
    config.a3 * total
}

pub fn total_cost(
    params: &GrapeParams,
    target: &StateVector,
    config: &GrapeConfig,
    ops: &SectorOperators,
) -> Result<f64> {
    Ok(cost_phys(params, target, ops)? + cost_pulse(params, config)? + cost_amp(params, config))
}

/// Eigendecompose every segment Hamiltonian and record the state after each
/// segment: `states[0]` = psi0, `states[k+1]` = U_k ... U_0 psi0. Shared by
/// the cost and the adjoint gradient.
pub fn forward_pass(
    params: &GrapeParams,
    n_atoms: usize,
    ops: &SectorOperators,
) -> Result<(Vec<DVector<Complex64>>, Vec<HamiltonianEigen>)> {
    params.validate()?;
    let m = params.m_segments();
    let mut states = Vec::with_capacity(m + 1);
    let mut eigens = Vec::with_capacity(m);
    states.push(initial_state(ops, n_atoms).amplitudes);
    for k in 0..m {
        let drive = crate::hamiltonian::DriveAmplitudes::new(params.omega[k], params.delta[k]);
        let eigen = HamiltonianEigen::new(&crate::hamiltonian::assemble(drive, ops));
        let next = eigen.propagate(params.dt[k], states.last().unwrap());
        states.push(next);
        eigens.push(eigen);
    }
    Ok((states, eigens))
}
