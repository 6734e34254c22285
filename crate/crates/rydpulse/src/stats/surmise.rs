//! Analytic reference densities: Wigner-Dyson ratio surmises and
//! Porter-Thomas.

use std::f64::consts::PI;

use crate::{Error, Result};

/// Asymptotic GUE mean gap ratio (what pooled large-spectrum data gives).
pub const MEAN_RATIO_GUE: f64 = 0.5996;
/// Mean of the beta=2 surmise itself, 2 sqrt(3)/pi - 1/2. The 3x3 surmise
/// slightly overestimates the asymptotic value above.
pub const MEAN_RATIO_GUE_SURMISE: f64 = 0.602_657;
/// Mean gap ratio of the beta=1 surmise, 4 - 2 sqrt(3).
pub const MEAN_RATIO_GOE: f64 = 0.535_898;
/// Mean gap ratio of Poisson level statistics, 2 ln 2 - 1.
pub const MEAN_RATIO_POISSON: f64 = 0.386_294_361_119_890_6;

/// Wigner-Dyson surmise for the folded ratio r in [0, 1]:
/// P(r) = 2 (r + r^2)^beta / (Z_beta (1 + r + r^2)^{1 + 3 beta / 2}),
/// Z_1 = 8/27, Z_2 = 4 pi / (81 sqrt(3)). The leading 2 folds r -> min(r, 1/r).
pub fn wigner_dyson_pdf(r: f64, beta: u8) -> Result<f64> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::NegativeArgument(r));
    }
    let z = match beta {
        1 => 8.0 / 27.0,
        2 => 4.0 * PI / (81.0 * 3.0f64.sqrt()),
        other => return Err(Error::UnsupportedBeta(other)),
    };
    let b = beta as f64;
    Ok(2.0 * (r + r * r).powf(b) / (z * (1.0 + r + r * r).powf(1.0 + 1.5 * b)))
}

/// Porter-Thomas density exp(-omega) of the rescaled Born probability.
pub fn porter_thomas_pdf(omega: f64) -> Result<f64> {
    if omega < 0.0 {
        return Err(Error::NegativeArgument(omega));
    }
    Ok((-omega).exp())
}

/// Exact bin masses of exp(-omega) on the given edges, with the tail beyond
/// the last edge as a final overflow category (matches `Histogram::masses`).
pub fn porter_thomas_bin_masses(bin_edges: &[f64]) -> Vec<f64> {
    let mut masses: Vec<f64> = bin_edges
        .windows(2)
        .map(|w| (-w[0]).exp() - (-w[1]).exp())
        .collect();
    masses.push((-bin_edges.last().unwrap()).exp());
    masses
}
