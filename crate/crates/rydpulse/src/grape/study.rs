//! Preparation-complexity study: stratified target selection over the
//! normalized entanglement entropy and success statistics of the optimized
//! infidelities.

use serde::{Deserialize, Serialize};

use crate::state::StateVector;
use crate::{Error, Result};

use super::optimize::GrapeResult;

/// A candidate target drawn from the random-pulse ensemble.
#[derive(Debug, Clone)]
pub struct TargetCandidate {
    pub state: StateVector,
    pub normalized_entropy: f64,
    /// Generation time T_f (us) of the random pulse that produced the state.
    pub generation_t_f: f64,
}

/// Outcome of stratified sampling: indices into the candidate pool.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StratifiedSelection {
    pub selected: Vec<usize>,
    /// Bin edges on the observed normalized-entropy range.
    pub bin_edges: Vec<f64>,
    /// Bins for which the pool had no candidate at all.
    pub empty_bins: Vec<usize>,
}

/// Select up to `per_bin` targets in each of `n_bins` uniform bins on the
/// observed entropy range, round-robin across generation-time groups inside
/// a bin so no single T_f dominates. Deterministic given pool order.
pub fn stratified_targets(
    pool: &[TargetCandidate],
    n_bins: usize,
    per_bin: usize,
) -> Result<StratifiedSelection> {
    if pool.is_empty() || n_bins == 0 || per_bin == 0 {
        return Err(Error::EmptyInput("stratified target pool"));
    }
    let lo = pool
        .iter()
        .map(|c| c.normalized_entropy)
        .fold(f64::INFINITY, f64::min);
    let hi = pool
        .iter()
        .map(|c| c.normalized_entropy)
        .fold(f64::NEG_INFINITY, f64::max);
    let width = ((hi - lo) / n_bins as f64).max(f64::MIN_POSITIVE);
    let bin_of = |s: f64| (((s - lo) / width) as usize).min(n_bins - 1);

    // bucket pool indices per bin, grouped by T_f in order of appearance
    let mut bins: Vec<Vec<(f64, Vec<usize>)>> = vec![Vec::new(); n_bins];
    for (i, c) in pool.iter().enumerate() {
        let groups = &mut bins[bin_of(c.normalized_entropy)];
        match groups.iter_mut().find(|(t, _)| *t == c.generation_t_f) {
            Some((_, v)) => v.push(i),
            None => groups.push((c.generation_t_f, vec![i])),
        }
    }

    let mut selected = Vec::new();
    let mut empty_bins = Vec::new();
    for (b, groups) in bins.iter().enumerate() {
        if groups.is_empty() {
            empty_bins.push(b);
            continue;
        }
        let mut taken = 0;
        let mut round = 0;
        while taken < per_bin {
            let mut any = false;
            for (_, members) in groups {
                if let Some(&idx) = members.get(round) {
                    selected.push(idx);
                    taken += 1;
                    any = true;
                    if taken == per_bin {
                        break;
                    }
                }
            }
            if !any {
                break; // bin exhausted
            }
            round += 1;
        }
    }
    let bin_edges = (0..=n_bins).map(|i| lo + i as f64 * width).collect();
    Ok(StratifiedSelection {
        selected,
        bin_edges,
        empty_bins,
    })
}

/// Per-bin success statistics of a set of optimization results.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuccessBin {
    /// Center S-hat of the entropy bin [S-hat - delta_s/2, S-hat + delta_s/2).
    pub s_center: f64,
    pub n: usize,
    /// P(best infidelity <= gamma) within the bin.
    pub p_success: f64,
    pub median_infidelity: f64,
    pub infidelity_p16: f64,
    pub infidelity_p84: f64,
}

/// Conditional success probability P(I <= gamma | S-tilde in bin) over bins
/// of width `delta_s` tiling [0, 1], plus the median infidelity with its
/// central-68% band. Results lacking entropy metadata are skipped; empty
/// bins are omitted.
pub fn success_curve(results: &[GrapeResult], gamma: f64, delta_s: f64) -> Result<Vec<SuccessBin>> {
    if results.is_empty() {
        return Err(Error::EmptyInput("grape results"));
    }
    if !(gamma >= 0.0) || !(delta_s > 0.0) {
        return Err(Error::InvalidConfig(
            "gamma must be >= 0 and delta_s > 0".into(),
        ));
    }
    let n_bins = (1.0 / delta_s).ceil() as usize;
    let mut bins: Vec<Vec<f64>> = vec![Vec::new(); n_bins + 1];
    for r in results {
        let Some(s) = r.target_meta.normalized_entropy else {
            continue;
        };
        let b = ((s / delta_s) as usize).min(n_bins);
        bins[b].push(r.best_infidelity);
    }
    let mut out = Vec::new();
    for (b, infs) in bins.iter_mut().enumerate() {
        if infs.is_empty() {
            continue;
        }
        infs.sort_by(f64::total_cmp);
        let n = infs.len();
        let hits = infs.iter().filter(|&&i| i <= gamma).count();
        let summary = crate::stats::histogram::summarize(infs)?;
        out.push(SuccessBin {
            s_center: (b as f64 + 0.5) * delta_s,
            n,
            p_success: hits as f64 / n as f64,
            median_infidelity: summary.median,
            infidelity_p16: summary.p16,
            infidelity_p84: summary.p84,
        });
    }
    Ok(out)
}
