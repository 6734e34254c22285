//! Ring geometry of the atom array.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Regular polygon of `n_atoms` sites with nearest-neighbor distance `spacing`
/// (micrometers). Pairwise distances follow the chord law of a regular N-gon,
/// normalized so that `distances[0][1] == spacing`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RingGeometry {
    n_atoms: usize,
    spacing: f64,
    distances: Vec<Vec<f64>>,
}

impl RingGeometry {
    /// Chord distances: r_ij = spacing * sin(pi k / N) / sin(pi / N) with
    /// k = min(|i-j|, N-|i-j|).
    pub fn build(n_atoms: usize, spacing: f64) -> Result<Self> {
        if n_atoms < 3 {
            return Err(Error::TooFewAtoms(n_atoms));
        }
        if spacing <= 0.0 {
            return Err(Error::NonPositiveSpacing(spacing));
        }
        let n = n_atoms as f64;
        let unit = (PI / n).sin();
        let mut distances = vec![vec![0.0; n_atoms]; n_atoms];
        for i in 0..n_atoms {
            for j in 0..n_atoms {
                if i == j {
                    continue;
                }
                let k = ring_separation(i, j, n_atoms);
                distances[i][j] = spacing * (PI * k as f64 / n).sin() / unit;
            }
        }
        Ok(Self {
            n_atoms,
            spacing,
            distances,
        })
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.distances[i][j]
    }
}

/// Separation along the ring: min(|i-j|, N-|i-j|).
pub fn ring_separation(i: usize, j: usize, n: usize) -> usize {
    let d = i.abs_diff(j);
    d.min(n - d)
}
