//! Optimizer configuration and the raw control-parameter vector.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::hamiltonian::{DEFAULT_DELTA_MAX, DEFAULT_OMEGA_MAX};
use crate::pulse::{PulseSegment, PulseSequence};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Optimizer {
    /// L-BFGS with backtracking (Armijo) line search.
    #[default]
    QuasiNewton,
    /// Plain gradient descent with the same line search; reference mode.
    GradientDescent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum InitScheme {
    /// Omega_k ~ U[0, Omega_max], Delta_k ~ U[-Delta_max, Delta_max],
    /// dt_k = T_max / M.
    #[default]
    Uniform,
    /// Same detunings, but Omega_k ~ U[0, Omega_max/10]; useful when the
    /// target sits close to the initial product state.
    LowDrive,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrapeConfig {
    pub m_segments: usize,
    pub t_max: f64,
    /// Smoothness penalty weight.
    pub a1: f64,
    /// Total-time penalty weight.
    pub a2: f64,
    /// Amplitude-bound penalty weight.
    pub a3: f64,
    /// Time-penalty exponent.
    pub alpha: f64,
    pub omega_max: f64,
    pub delta_max: f64,
    pub n_restarts: usize,
    pub optimizer: Optimizer,
    pub max_iters: usize,
    pub grad_tol: f64,
    pub init_scheme: InitScheme,
}

impl Default for GrapeConfig {
    fn default() -> Self {
        Self {
            m_segments: 30,
            t_max: 6.0,
            a1: 1e-6,
            a2: 1e-2,
            a3: 10.0,
            alpha: 4.0,
            omega_max: DEFAULT_OMEGA_MAX,
            delta_max: DEFAULT_DELTA_MAX,
            n_restarts: 16,
            optimizer: Optimizer::default(),
            max_iters: 1500,
            grad_tol: 1e-6,
            init_scheme: InitScheme::default(),
        }
    }
}

impl GrapeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m_segments < 2 {
            return Err(Error::InvalidConfig(
                "m_segments must be at least 2".into(),
            ));
        }
        if self.t_max <= 0.0 {
            return Err(Error::InvalidConfig("t_max must be positive".into()));
        }
        if self.a1 < 0.0 || self.a2 < 0.0 || self.a3 < 0.0 {
            return Err(Error::InvalidConfig(
                "penalty weights must be non-negative".into(),
            ));
        }
        if self.alpha < 1.0 {
            return Err(Error::InvalidConfig("alpha must be at least 1".into()));
        }
        if self.omega_max <= 0.0 || self.delta_max <= 0.0 {
            return Err(Error::InvalidConfig(
                "amplitude bounds must be positive".into(),
            ));
        }
        if self.n_restarts == 0 {
            return Err(Error::InvalidConfig(
                "n_restarts must be at least 1".into(),
            ));
        }
        if self.max_iters == 0 || self.grad_tol <= 0.0 {
            return Err(Error::InvalidConfig(
                "max_iters must be positive and grad_tol > 0".into(),
            ));
        }
        Ok(())
    }
}

/// Raw control variables: one (Omega_k, Delta_k, dt_k) triple per segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrapeParams {
    pub omega: Vec<f64>,
    pub delta: Vec<f64>,
    pub dt: Vec<f64>,
}

impl GrapeParams {
    pub fn m_segments(&self) -> usize {
        self.omega.len()
    }

    pub fn n_params(&self) -> usize {
        3 * self.omega.len()
    }

    pub fn total_time(&self) -> f64 {
        self.dt.iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.omega.len();
        if m < 2 {
            return Err(Error::InvalidConfig(
                "pulse must have at least 2 segments".into(),
            ));
        }
        if self.delta.len() != m || self.dt.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: self.delta.len().min(self.dt.len()),
            });
        }
        for &dt in &self.dt {
            if dt <= 0.0 {
                return Err(Error::NonPositiveDuration(dt));
            }
        }
        Ok(())
    }

    /// Random initialization per the configured scheme.
    pub fn init<R: Rng + ?Sized>(config: &GrapeConfig, rng: &mut R) -> Self {
        let m = config.m_segments;
        let omega_hi = match config.init_scheme {
            InitScheme::Uniform => config.omega_max,
            InitScheme::LowDrive => config.omega_max / 10.0,
        };
        Self {
            omega: (0..m).map(|_| rng.gen_range(0.0..=omega_hi)).collect(),
            delta: (0..m)
                .map(|_| rng.gen_range(-config.delta_max..=config.delta_max))
                .collect(),
            dt: vec![config.t_max / m as f64; m],
        }
    }

    pub fn from_sequence(seq: &PulseSequence) -> Self {
        Self {
            omega: seq.segments.iter().map(|s| s.omega).collect(),
            delta: seq.segments.iter().map(|s| s.delta).collect(),
            dt: seq.segments.iter().map(|s| s.dt_us).collect(),
        }
    }

    pub fn to_sequence(&self) -> Result<PulseSequence> {
        self.validate()?;
        PulseSequence::new(
            (0..self.omega.len())
                .map(|k| PulseSegment {
                    dt_us: self.dt[k],
                    omega: self.omega[k],
                    delta: self.delta[k],
                })
                .collect(),
        )
    }
}
