//! Piecewise-constant pulse sequences and hardware constraints.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::hamiltonian::DriveAmplitudes;
use crate::{Error, Result};

/// One piecewise-constant segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSegment {
    pub dt_us: f64,
    pub omega: f64,
    pub delta: f64,
}

impl PulseSegment {
    pub fn drive(&self) -> DriveAmplitudes {
        DriveAmplitudes::new(self.omega, self.delta)
    }
}

/// Ordered list of segments. Also the GRAPE decision variable; the JSON form
/// `{"segments": [{"dt_us":..., "omega":..., "delta":...}, ...]}` is the wire
/// format for both sampled and optimized sequences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSequence {
    pub segments: Vec<PulseSegment>,
}

impl PulseSequence {
    pub fn new(segments: Vec<PulseSegment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::EmptyInput("pulse sequence"));
        }
        for s in &segments {
            if s.dt_us <= 0.0 {
                return Err(Error::NonPositiveDuration(s.dt_us));
            }
        }
        Ok(Self { segments })
    }

    pub fn total_time(&self) -> f64 {
        self.segments.iter().map(|s| s.dt_us).sum()
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let seq: PulseSequence = serde_json::from_str(text)?;
        // re-run structural checks on untrusted input
        Self::new(seq.segments)
    }
}

/// Hardware constraints for random sampling: amplitude bounds, segment count,
/// total time.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PulseConstraints {
    pub omega_max: f64,
    pub delta_max: f64,
    pub m_segments: usize,
    pub t_final: f64,
}

impl PulseConstraints {
    pub fn new(omega_max: f64, delta_max: f64, m_segments: usize, t_final: f64) -> Result<Self> {
        if omega_max <= 0.0 || delta_max <= 0.0 || t_final <= 0.0 || m_segments == 0 {
            return Err(Error::InvalidConfig(format!(
                "pulse constraints must all be positive: omega_max={omega_max}, \
                 delta_max={delta_max}, M={m_segments}, t_final={t_final}"
            )));
        }
        Ok(Self {
            omega_max,
            delta_max,
            m_segments,
            t_final,
        })
    }
}

/// Random pulse protocol: dt_k = T_f / M, Omega_k ~ U[0, Omega_max],
/// Delta_k ~ U[-Delta_max, Delta_max], all draws independent.
pub fn sample_random_pulses<R: Rng + ?Sized>(
    rng: &mut R,
    constraints: &PulseConstraints,
) -> PulseSequence {
    let dt = constraints.t_final / constraints.m_segments as f64;
    let segments = (0..constraints.m_segments)
        .map(|_| PulseSegment {
            dt_us: dt,
            omega: rng.gen_range(0.0..=constraints.omega_max),
            delta: rng.gen_range(-constraints.delta_max..=constraints.delta_max),
        })
        .collect();
    PulseSequence { segments }
}
