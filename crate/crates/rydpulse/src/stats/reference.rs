//! Random-matrix reference ensembles for the entanglement-spectrum ratio
//! statistics: normalized Wishart spectra from Ginibre matrices, plus a
//! Poisson control.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use super::entanglement::{gap_ratios_of_spectrum, SCHMIDT_FLOOR};
use crate::{Error, Result};

/// Which Ginibre ensemble feeds the Wishart construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceEnsemble {
    /// Complex entries: rho_A spectra with GUE-like local statistics.
    GueGinibre,
    /// Real entries: GOE-like statistics.
    GoeRealGinibre,
}

/// Entanglement-like spectrum of one normalized Wishart sample: the squared
/// singular values of X (d_a x d_b), normalized to sum 1, as s = -ln(lambda).
fn wishart_log_spectrum<R: Rng + ?Sized>(
    rng: &mut R,
    d_a: usize,
    d_b: usize,
    ensemble: ReferenceEnsemble,
) -> Vec<f64> {
    let sv = match ensemble {
        ReferenceEnsemble::GueGinibre => {
            let x = DMatrix::from_fn(d_a, d_b, |_, _| {
                Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
            });
            x.svd(false, false).singular_values
        }
        ReferenceEnsemble::GoeRealGinibre => {
            let x = DMatrix::from_fn(d_a, d_b, |_, _| {
                let v: f64 = StandardNormal.sample(rng);
                v
            });
            x.svd(false, false).singular_values
        }
    };
    let total: f64 = sv.iter().map(|s| s * s).sum();
    let mut spectrum: Vec<f64> = sv
        .iter()
        .map(|s| s * s / total)
        .filter(|&l| l > SCHMIDT_FLOOR)
        .map(|l| -l.ln())
        .collect();
    spectrum.sort_by(f64::total_cmp);
    spectrum
}

/// Pooled gap ratios of `n_samples` normalized Wishart spectra, with the same
/// central-fraction trim as the entanglement pipeline.
pub fn wishart_reference_ratios<R: Rng + ?Sized>(
    rng: &mut R,
    d_a: usize,
    d_b: usize,
    ensemble: ReferenceEnsemble,
    n_samples: usize,
    keep_central: f64,
) -> Result<Vec<f64>> {
    if d_a > d_b {
        return Err(Error::InvalidConfig(format!(
            "wishart reference requires d_a <= d_b, got {d_a} > {d_b}"
        )));
    }
    let mut pooled = Vec::new();
    for _ in 0..n_samples {
        let spectrum = wishart_log_spectrum(rng, d_a, d_b, ensemble);
        let (ratios, _) = gap_ratios_of_spectrum(&spectrum, keep_central)?;
        pooled.extend(ratios);
    }
    Ok(pooled)
}

/// Poisson control: spectra with independent exponential gaps, same pipeline.
pub fn poisson_reference_ratios<R: Rng + ?Sized>(
    rng: &mut R,
    n_levels: usize,
    n_samples: usize,
    keep_central: f64,
) -> Result<Vec<f64>> {
    let mut pooled = Vec::new();
    for _ in 0..n_samples {
        let mut level = 0.0;
        let spectrum: Vec<f64> = (0..n_levels)
            .map(|_| {
                let gap: f64 = Exp1.sample(rng);
                level += gap;
                level
            })
            .collect();
        let (ratios, _) = gap_ratios_of_spectrum(&spectrum, keep_central)?;
        pooled.extend(ratios);
    }
    Ok(pooled)
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}
