//! Multi-start local optimization of the preparation cost.
//!
//! The optimizer works in unconstrained coordinates: Omega_k and dt_k are
//! softplus-reparameterized so positivity is structural, Delta_k is raw.
//! Upper amplitude bounds are left to the hinge penalty.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::hamiltonian::SectorOperators;
use crate::pulse::PulseSequence;
use crate::rng::stream;
use crate::state::StateVector;
use crate::{Error, Result};

use super::config::{GrapeConfig, GrapeParams, Optimizer};
use super::cost::{infidelity, total_cost};
use super::gradient::gradient;

/// Domain tag separating GRAPE RNG streams from ensemble-generation streams.
pub const GRAPE_STREAM: u64 = 3;

const LBFGS_MEMORY: usize = 40;
const ARMIJO_C1: f64 = 1e-4;
const WOLFE_C2: f64 = 0.9;
const MAX_BACKTRACKS: usize = 40;

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn softplus_inv(y: f64) -> f64 {
    debug_assert!(y > 0.0);
    // ln(e^y - 1), stable for both tails
    if y > 30.0 {
        y
    } else {
        y.exp_m1().ln()
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Unconstrained coordinates <-> physical controls.
/// Static rescaling of the duration block: the cost curvature along a
/// segment duration scales like the squared Hamiltonian norm, which is two
/// to three orders of magnitude stiffer than along the amplitudes. Working
/// in stretched coordinates keeps the quasi-Newton model well conditioned.
const DT_SCALE: f64 = 10.0;

fn to_unconstrained(p: &GrapeParams) -> Vec<f64> {
    let m = p.m_segments();
    let mut u = Vec::with_capacity(3 * m);
    u.extend(p.omega.iter().map(|&w| softplus_inv(w.max(1e-4))));
    u.extend(p.delta.iter().copied());
    u.extend(p.dt.iter().map(|&t| DT_SCALE * softplus_inv(t)));
    u
}

fn to_physical(u: &[f64]) -> GrapeParams {
    let m = u.len() / 3;
    GrapeParams {
        omega: u[..m].iter().map(|&x| softplus(x)).collect(),
        delta: u[m..2 * m].to_vec(),
        dt: u[2 * m..].iter().map(|&x| softplus(x / DT_SCALE)).collect(),
    }
}

/// Cost and gradient in the unconstrained coordinates.
fn eval(
    u: &[f64],
    target: &StateVector,
    config: &GrapeConfig,
    ops: &SectorOperators,
) -> Result<(f64, Vec<f64>)> {
    let m = u.len() / 3;
    let p = to_physical(u);
    let f = total_cost(&p, target, config, ops)?;
    let g = gradient(&p, target, config, ops)?;
    let mut gu = Vec::with_capacity(3 * m);
    gu.extend((0..m).map(|k| g.omega[k] * sigmoid(u[k])));
    gu.extend(g.delta.iter().copied());
    gu.extend((0..m).map(|k| g.dt[k] * sigmoid(u[2 * m + k] / DT_SCALE) / DT_SCALE));
    Ok((f, gu))
}

/// One local run from a given starting point.
#[derive(Debug, Clone)]
pub struct SingleRun {
    pub params: GrapeParams,
    pub final_cost: f64,
    /// Cost after every accepted iteration (index 0 = initial cost).
    pub costs: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// L-BFGS two-loop recursion; falls back to steepest descent with an empty
/// history.
fn lbfgs_direction(grad: &[f64], s_hist: &[Vec<f64>], y_hist: &[Vec<f64>]) -> Vec<f64> {
    let mut q: Vec<f64> = grad.to_vec();
    let k = s_hist.len();
    let mut alpha = vec![0.0; k];
    for i in (0..k).rev() {
        let rho = 1.0 / dot(&y_hist[i], &s_hist[i]);
        alpha[i] = rho * dot(&s_hist[i], &q);
        for (qj, yj) in q.iter_mut().zip(&y_hist[i]) {
            *qj -= alpha[i] * yj;
        }
    }
    if k > 0 {
        let gamma = dot(&s_hist[k - 1], &y_hist[k - 1]) / dot(&y_hist[k - 1], &y_hist[k - 1]);
        q.iter_mut().for_each(|x| *x *= gamma);
    }
    for i in 0..k {
        let rho = 1.0 / dot(&y_hist[i], &s_hist[i]);
        let beta = rho * dot(&y_hist[i], &q);
        for (qj, sj) in q.iter_mut().zip(&s_hist[i]) {
            *qj += (alpha[i] - beta) * sj;
        }
    }
    q.iter_mut().for_each(|x| *x = -*x);
    q
}

/// Run the local optimizer from `start` until `grad_tol` or `max_iters`.
pub fn optimize_restart(
    start: &GrapeParams,
    target: &StateVector,
    config: &GrapeConfig,
    ops: &SectorOperators,
) -> Result<SingleRun> {
    config.validate()?;
    let mut u = to_unconstrained(start);
    let (mut f, mut g) = eval(&u, target, config, ops)?;
    if !f.is_finite() {
        return Err(Error::InvalidConfig("non-finite cost at start".into()));
    }
    let mut costs = vec![f];
    let mut s_hist: Vec<Vec<f64>> = Vec::new();
    let mut y_hist: Vec<Vec<f64>> = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    for _ in 0..config.max_iters {
        if norm_inf(&g) < config.grad_tol {
            converged = true;
            break;
        }
        let mut dir = match config.optimizer {
            Optimizer::QuasiNewton => lbfgs_direction(&g, &s_hist, &y_hist),
            Optimizer::GradientDescent => g.iter().map(|x| -x).collect(),
        };
        if dot(&dir, &g) >= 0.0 {
            // not a descent direction; reset the history
            s_hist.clear();
            y_hist.clear();
            dir = g.iter().map(|x| -x).collect();
        }

        // weak-Wolfe line search (bisection with expansion): sufficient
        // decrease plus a curvature condition, so steps can grow past 1 in
        // long flat valleys and the (s, y) pairs stay well scaled
        let slope = dot(&dir, &g);
        let mut step = 1.0;
        let mut lo = 0.0f64;
        let mut hi = f64::INFINITY;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let u_new: Vec<f64> = u.iter().zip(&dir).map(|(x, d)| x + step * d).collect();
            match eval(&u_new, target, config, ops) {
                Ok((f_new, g_new)) if f_new.is_finite() => {
                    if f_new > f + ARMIJO_C1 * step * slope {
                        hi = step;
                    } else if dot(&g_new, &dir) < WOLFE_C2 * slope {
                        // still descending steeply: remember and push on
                        lo = step;
                        accepted = Some((u_new, f_new, g_new));
                    } else {
                        accepted = Some((u_new, f_new, g_new));
                        break;
                    }
                }
                _ => hi = step,
            }
            step = if hi.is_finite() {
                0.5 * (lo + hi)
            } else {
                2.0 * step
            };
        }
        let Some((u_new, f_new, g_new)) = accepted else {
            // line search stalled: the iterate is as good as it gets
            converged = norm_inf(&g) < 1e3 * config.grad_tol;
            break;
        };

        if matches!(config.optimizer, Optimizer::QuasiNewton) {
            let s: Vec<f64> = u_new.iter().zip(&u).map(|(a, b)| a - b).collect();
            let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
            // curvature condition keeps the inverse-Hessian estimate positive
            if dot(&s, &y) > 1e-12 {
                s_hist.push(s);
                y_hist.push(y);
                if s_hist.len() > LBFGS_MEMORY {
                    s_hist.remove(0);
                    y_hist.remove(0);
                }
            }
        }
        u = u_new;
        f = f_new;
        g = g_new;
        costs.push(f);
        iterations += 1;
    }

    Ok(SingleRun {
        params: to_physical(&u),
        final_cost: f,
        costs,
        iterations,
        converged,
    })
}

/// Entanglement and provenance of the target state, carried into the result.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TargetMeta {
    pub target_id: u64,
    pub normalized_entropy: Option<f64>,
    pub generation_t_f: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RestartTrace {
    pub restart_id: u64,
    pub final_cost: f64,
    pub infidelity: f64,
    pub iterations: usize,
    pub converged: bool,
    /// False when the run aborted (non-finite cost at its starting point).
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrapeResult {
    pub best_sequence: PulseSequence,
    pub best_infidelity: f64,
    /// Total evolution time of the best sequence.
    pub t_opt: f64,
    pub restarts: Vec<RestartTrace>,
    pub target_meta: TargetMeta,
}

/// Multi-start optimization. Restart `r` draws its starting point from the
/// stream (master_seed, GRAPE_STREAM, target_id, r), so results do not depend
/// on worker count or execution order.
pub fn optimize(
    target: &StateVector,
    meta: TargetMeta,
    config: &GrapeConfig,
    ops: &SectorOperators,
    master_seed: u64,
) -> Result<GrapeResult> {
    config.validate()?;
    target.expect_sector()?;
    target.check_normalized(1e-8)?;

    let runs: Vec<(RestartTrace, Option<GrapeParams>)> = (0..config.n_restarts as u64)
        .into_par_iter()
        .map(|restart_id| {
            let mut rng = stream(master_seed, &[GRAPE_STREAM, meta.target_id, restart_id]);
            let start = GrapeParams::init(config, &mut rng);
            match optimize_restart(&start, target, config, ops) {
                Ok(run) => {
                    // project onto the box before reporting
                    let mut p = run.params;
                    p.omega
                        .iter_mut()
                        .for_each(|w| *w = w.clamp(0.0, config.omega_max));
                    p.delta
                        .iter_mut()
                        .for_each(|d| *d = d.clamp(-config.delta_max, config.delta_max));
                    let inf = infidelity(&p, target, ops).unwrap_or(f64::NAN);
                    let trace = RestartTrace {
                        restart_id,
                        final_cost: run.final_cost,
                        infidelity: inf,
                        iterations: run.iterations,
                        converged: run.converged,
                        ok: inf.is_finite(),
                    };
                    (trace, Some(p))
                }
                Err(_) => (
                    RestartTrace {
                        restart_id,
                        final_cost: f64::NAN,
                        infidelity: f64::NAN,
                        iterations: 0,
                        converged: false,
                        ok: false,
                    },
                    None,
                ),
            }
        })
        .collect();

    let best = runs
        .iter()
        .filter(|(t, p)| t.ok && p.is_some())
        .min_by(|(a, _), (b, _)| a.infidelity.total_cmp(&b.infidelity));
    let Some((best_trace, Some(best_params))) = best else {
        return Err(Error::AllRestartsFailed);
    };
    Ok(GrapeResult {
        best_sequence: best_params.to_sequence()?,
        best_infidelity: best_trace.infidelity,
        t_opt: best_params.total_time(),
        restarts: runs.iter().map(|(t, _)| t.clone()).collect(),
        target_meta: meta,
    })
}
