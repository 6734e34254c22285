//! Schmidt decomposition, entanglement entropy and spectrum, gap ratios.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::bipartition::{classify_bipartition, exchange_element, Bipartition};
use crate::state::StateVector;
use crate::{Error, Result};

/// Schmidt values below this are treated as rank deficiency and dropped from
/// the log-spectrum.
pub const SCHMIDT_FLOOR: f64 = 1e-14;

/// Normalization convention for S_tilde = S / S_max.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SmaxConvention {
    /// S_max = (N/2) ln 2.
    HalfN,
    /// S_max = floor(N/2) ln 2.
    #[default]
    FloorHalfN,
}

impl SmaxConvention {
    pub fn s_max(&self, n_atoms: usize) -> f64 {
        match self {
            SmaxConvention::HalfN => 0.5 * n_atoms as f64 * std::f64::consts::LN_2,
            SmaxConvention::FloorHalfN => (n_atoms / 2) as f64 * std::f64::consts::LN_2,
        }
    }
}

/// Schmidt data of one state and bipartition.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EntanglementData {
    /// lambda_n^2 in descending order, summing to 1.
    pub schmidt_sq: Vec<f64>,
    /// von Neumann entropy in nats.
    pub entropy: f64,
    /// s_n = -ln(lambda_n^2), ascending, rank-deficient values dropped.
    pub log_spectrum: Vec<f64>,
    /// S / S_max under the configured convention.
    pub normalized_entropy: f64,
}

/// Build the coefficient matrix of a full-basis state: rows indexed by the
/// A-substring (A-sites ascending), columns by the B-substring.
fn coefficient_matrix(state: &StateVector, part: &Bipartition) -> DMatrix<Complex64> {
    let a_sites = part.a_sites();
    let b_sites = part.b_sites();
    let rows = 1usize << a_sites.len();
    let cols = 1usize << b_sites.len();
    let mut m = DMatrix::from_element(rows, cols, Complex64::new(0.0, 0.0));
    for (bits, &amp) in state.amplitudes.iter().enumerate() {
        let mut row = 0usize;
        for (k, &s) in a_sites.iter().enumerate() {
            row |= (bits >> s & 1) << k;
        }
        let mut col = 0usize;
        for (k, &s) in b_sites.iter().enumerate() {
            col |= (bits >> s & 1) << k;
        }
        m[(row, col)] = amp;
    }
    m
}

/// SVD of the coefficient matrix; entropy with the 0 log 0 = 0 convention.
pub fn schmidt_decompose(state: &StateVector, part: &Bipartition) -> Result<EntanglementData> {
    schmidt_decompose_with(state, part, SmaxConvention::default())
}

pub fn schmidt_decompose_with(
    state: &StateVector,
    part: &Bipartition,
    convention: SmaxConvention,
) -> Result<EntanglementData> {
    state.expect_full()?;
    state.check_normalized(1e-8)?;
    if part.n_atoms != state.n_atoms {
        return Err(Error::DimensionMismatch {
            expected: state.n_atoms,
            got: part.n_atoms,
        });
    }
    let m = coefficient_matrix(state, part);
    let svd = m.svd(false, false);
    let mut schmidt_sq: Vec<f64> = svd.singular_values.iter().map(|s| s * s).collect();
    schmidt_sq.sort_by(|a, b| b.total_cmp(a));
    let entropy = -schmidt_sq
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| l * l.ln())
        .sum::<f64>();
    let log_spectrum: Vec<f64> = schmidt_sq
        .iter()
        .filter(|&&l| l > SCHMIDT_FLOOR)
        .map(|&l| -l.ln())
        .collect();
    Ok(EntanglementData {
        normalized_entropy: entropy / convention.s_max(state.n_atoms),
        schmidt_sq,
        entropy,
        log_spectrum,
    })
}

/// Gap ratios of an ascending spectrum after trimming to the central
/// `keep_central` fraction: retained count = round(keep * n), trim split
/// evenly with the extra level removed at the top. Zero gaps yield ratio 0;
/// their count is returned alongside.
pub fn gap_ratios_of_spectrum(spectrum: &[f64], keep_central: f64) -> Result<(Vec<f64>, usize)> {
    let n = spectrum.len();
    let kept = (keep_central * n as f64).round() as usize;
    if kept < 4 {
        return Err(Error::TooFewLevels(kept));
    }
    let trim = n - kept;
    let lo = trim / 2;
    let window = &spectrum[lo..lo + kept];
    debug_assert!(window.windows(2).all(|w| w[0] <= w[1]));
    let gaps: Vec<f64> = window.windows(2).map(|w| w[1] - w[0]).collect();
    let mut degenerate = 0usize;
    let ratios = gaps
        .windows(2)
        .map(|g| {
            if g[0] == 0.0 || g[1] == 0.0 {
                degenerate += 1;
                0.0
            } else {
                (g[0] / g[1]).min(g[1] / g[0])
            }
        })
        .collect();
    Ok((ratios, degenerate))
}

/// Gap ratios of the entanglement spectrum (central 75% by default).
pub fn gap_ratios(data: &EntanglementData, keep_central: f64) -> Result<Vec<f64>> {
    gap_ratios_of_spectrum(&data.log_spectrum, keep_central).map(|(r, _)| r)
}

/// Max-norm asymmetry of the coefficient matrix under an exchange-symmetric
/// bipartition, with the exchange map aligning the column index convention to
/// the row convention. Small (<= 1e-10) for trivial-sector states.
pub fn symmetric_coefficient_check(state: &StateVector, part: &Bipartition) -> Result<f64> {
    state.expect_full()?;
    if !classify_bipartition(part).exchange {
        return Err(Error::NotExchangeSymmetric);
    }
    let g = exchange_element(part).ok_or(Error::NotExchangeSymmetric)?;
    let a_sites = part.a_sites();
    let dim = 1usize << a_sites.len();
    if a_sites.len() != part.size_b() {
        return Err(Error::NotExchangeSymmetric);
    }
    // column index k reads the bit at site g(a_k)
    let col_sites: Vec<usize> = a_sites.iter().map(|&s| g[s]).collect();
    let mut c = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    for (bits, &amp) in state.amplitudes.iter().enumerate() {
        let mut row = 0usize;
        let mut col = 0usize;
        for k in 0..a_sites.len() {
            row |= (bits >> a_sites[k] & 1) << k;
            col |= (bits >> col_sites[k] & 1) << k;
        }
        c[(row, col)] = amp;
    }
    let mut max_asym: f64 = 0.0;
    for i in 0..dim {
        for j in 0..i {
            max_asym = max_asym.max((c[(i, j)] - c[(j, i)]).norm());
        }
    }
    Ok(max_asym)
}
