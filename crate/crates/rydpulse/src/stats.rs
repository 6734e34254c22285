//! Statistical diagnostics of the generated ensembles.

pub mod bipartition;
pub mod entanglement;
pub mod histogram;
pub mod record;
pub mod reference;
pub mod surmise;

pub use bipartition::{
    classify_bipartition, find_asymmetric_bipartition, Bipartition, SymmetryClass, SymmetryFlags,
};
pub use entanglement::{
    gap_ratios, schmidt_decompose, schmidt_decompose_with, symmetric_coefficient_check,
    EntanglementData, SmaxConvention,
};
pub use histogram::{js_divergence, js_divergence_masses, rebin, summarize, Histogram, Summary};
pub use record::EnsembleRecord;
pub use reference::{poisson_reference_ratios, wishart_reference_ratios, ReferenceEnsemble};
pub use surmise::{porter_thomas_bin_masses, porter_thomas_pdf, wigner_dyson_pdf};

use crate::state::StateVector;
use crate::Result;

/// Rescaled Born probabilities omega = D p(sigma) over all 2^N bitstrings.
pub fn bitstring_omegas(state: &StateVector) -> Result<Vec<f64>> {
    state.expect_full()?;
    state.check_normalized(1e-8)?;
    let d = state.dim() as f64;
    Ok(state.amplitudes.iter().map(|a| d * a.norm_sqr()).collect())
}
