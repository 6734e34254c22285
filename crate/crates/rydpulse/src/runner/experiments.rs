//! The experiment kinds behind `rydpulse run`.
//!
//! Each kind derives per-sample RNG streams from
//! (master_seed, stream id, cell id, sample_id), computes samples in
//! parallel, and writes results with a single ordered writer, so outputs are
//! identical for any worker count.

use rayon::prelude::*;

use crate::blockade::{characteristic_distance, EtaModel};
use crate::evolve::{default_initial, evolve};
use crate::geometry::RingGeometry;
use crate::grape::optimize::{optimize, GrapeResult, TargetMeta};
use crate::grape::study::{stratified_targets, success_curve, TargetCandidate};
use crate::hamiltonian::{
    build_sector_operators, mean_excitation, nn_correlation, PhysicalParams, SectorOperators,
};
use crate::pulse::{sample_random_pulses, PulseConstraints};
use crate::rng::stream;
use crate::sector::SectorBasis;
use crate::state::StateVector;
use crate::stats::bitstring_omegas;
use crate::stats::bipartition::{classify_bipartition, Bipartition};
use crate::stats::entanglement::{gap_ratios, schmidt_decompose_with, symmetric_coefficient_check};
use crate::stats::histogram::{js_divergence_masses, summarize, Histogram};
use crate::stats::record::EnsembleRecord;
use crate::stats::reference::{mean, poisson_reference_ratios, wishart_reference_ratios, ReferenceEnsemble};
use crate::stats::surmise::porter_thomas_bin_masses;
use crate::{Error, Result};

use super::output::{append_jsonl, completed_sample_ids, fmt_f64, read_jsonl, write_csv, Provenance};
use super::RunContext;

// stream-id namespace; GRAPE restarts use stream 3 inside the optimizer
const ENSEMBLE_STREAM: u64 = 10;
const HAAR_STREAM: u64 = 11;
const REFERENCE_STREAM: u64 = 12;
const TARGET_STREAM: u64 = 13;

fn provenance(ctx: &RunContext, d: Option<f64>, t_f: Option<f64>) -> Provenance {
    Provenance {
        config_hash: ctx.hash.clone(),
        seed: ctx.seed,
        n_atoms: ctx.config.n_atoms,
        d,
        t_f,
        m_segments: ctx.config.m_segments,
    }
}

fn sector_operators(ctx: &RunContext, d: f64) -> Result<SectorOperators> {
    let geometry = RingGeometry::build(ctx.config.n_atoms, d)?;
    let params = PhysicalParams::new(ctx.config.c6, geometry)?;
    build_sector_operators(&ctx.basis, &params)
}

/// Full analysis of one sector state into a record row.
fn analyze_state(
    ctx: &RunContext,
    state: &StateVector,
    sample_id: u64,
    spacing: f64,
    t_final: f64,
) -> Result<EnsembleRecord> {
    let full = ctx.basis.embed(state)?;
    let ent = schmidt_decompose_with(&full, &ctx.bipartition, ctx.config.smax_convention)?;
    // rank-deficient spectra can retain too few levels for ratios; record none
    let ratios = gap_ratios(&ent, ctx.config.trim_fraction).unwrap_or_default();
    let omegas = if ctx.config.record_omegas {
        Some(bitstring_omegas(&full)?)
    } else {
        None
    };
    Ok(EnsembleRecord {
        sample_id,
        seed: ctx.seed,
        spacing,
        t_final,
        entropy: ent.entropy,
        normalized_entropy: ent.normalized_entropy,
        gap_ratios: ratios,
        nn_correlation: nn_correlation(&full)?,
        mean_excitation: mean_excitation(&full)?,
        omegas,
    })
}

pub(crate) fn cell_file(n: usize, d: f64, t_f: f64) -> String {
    format!("ensemble_N{n}_d{d}_Tf{t_f}.jsonl")
}

/// Evolve the missing samples of one (d, T_f) cell and append them in
/// sample_id order; returns all records of the cell including resumed ones.
fn run_cell(
    ctx: &mut RunContext,
    cell_id: u64,
    d: f64,
    t_f: f64,
    ops: &SectorOperators,
) -> Result<Vec<EnsembleRecord>> {
    let name = cell_file(ctx.config.n_atoms, d, t_f);
    let path = ctx.log.path(&name);
    let done = if ctx.resume {
        completed_sample_ids(&path)?
    } else {
        if path.exists() {
            std::fs::remove_file(&path)?;
        }
        Default::default()
    };
    let constraints = PulseConstraints::new(
        ctx.config.omega_max,
        ctx.config.delta_max,
        ctx.config.m_segments,
        t_f,
    )?;
    let initial = default_initial(&ctx.basis);
    let missing: Vec<u64> = (0..ctx.config.n_samples as u64)
        .filter(|id| !done.contains(id))
        .collect();
    let mut fresh = missing
        .par_iter()
        .map(|&id| {
            let mut rng = stream(ctx.seed, &[ENSEMBLE_STREAM, cell_id, id]);
            let seq = sample_random_pulses(&mut rng, &constraints);
            let state = evolve(&initial, &seq, ops)?;
            analyze_state(ctx, &state, id, d, t_f)
        })
        .collect::<Result<Vec<_>>>()?;
    fresh.sort_by_key(|r| r.sample_id);
    append_jsonl(&path, &fresh)?;
    read_jsonl(&path)
}

/// Haar samples in the trivial sector, analyzed like evolved states.
fn haar_sector_records(ctx: &RunContext, n: usize) -> Result<Vec<EnsembleRecord>> {
    (0..n as u64)
        .into_par_iter()
        .map(|id| {
            let mut rng = stream(ctx.seed, &[HAAR_STREAM, 0, id]);
            let state = ctx.basis.haar_sector(&mut rng);
            analyze_state(ctx, &state, id, 0.0, 0.0)
        })
        .collect()
}

fn s_histogram(records: &[EnsembleRecord], bins: usize) -> Histogram {
    let mut h: Histogram = Histogram::uniform(0.0, 1.0, bins);
    h.observe_all(records.iter().map(|r| r.normalized_entropy));
    h
}

fn write_histogram_csv(
    ctx: &mut RunContext,
    name: &str,
    prov: &Provenance,
    hist: &Histogram,
) -> Result<()> {
    let path = ctx.log.path(name);
    let density = hist.density();
    let rows: Vec<Vec<String>> = hist
        .bin_edges
        .windows(2)
        .zip(&density)
        .map(|(e, &rho)| vec![fmt_f64(e[0]), fmt_f64(e[1]), fmt_f64(rho)])
        .collect();
    write_csv(&path, prov, &["bin_lo", "bin_hi", "density"], &rows)
}

/// Random-pulse ensembles over the (d, T_f) grid: record files, entropy
/// histograms, and a summary table with the Haar-sector comparison.
pub fn ensemble(ctx: &mut RunContext) -> Result<()> {
    let haar = haar_sector_records(ctx, ctx.config.n_samples)?;
    let haar_s = s_histogram(&haar, ctx.config.s_bins);

    let mut rows = Vec::new();
    let (ds, tfs) = (ctx.config.d.clone(), ctx.config.t_f.clone());
    for (di, &d) in ds.iter().enumerate() {
        let ops = sector_operators(ctx, d)?;
        for (ti, &t_f) in tfs.iter().enumerate() {
            let cell_id = (di * tfs.len() + ti) as u64;
            let records = run_cell(ctx, cell_id, d, t_f, &ops)?;
            let prov = provenance(ctx, Some(d), Some(t_f));
            let s_hist = s_histogram(&records, ctx.config.s_bins);
            write_histogram_csv(
                ctx,
                &format!("hist_s_N{}_d{d}_Tf{t_f}.csv", ctx.config.n_atoms),
                &prov,
                &s_hist,
            )?;
            let s: Vec<f64> = records.iter().map(|r| r.normalized_entropy).collect();
            let nn: Vec<f64> = records.iter().map(|r| r.nn_correlation).collect();
            let pooled: Vec<f64> = records.iter().flat_map(|r| r.gap_ratios.clone()).collect();
            let s_sum = summarize(&s)?;
            let nn_sum = summarize(&nn)?;
            let js = js_divergence_masses(&s_hist.masses(), &haar_s.masses());
            rows.push(vec![
                d.to_string(),
                t_f.to_string(),
                records.len().to_string(),
                fmt_f64(s_sum.median),
                fmt_f64(s_sum.p16),
                fmt_f64(s_sum.p84),
                fmt_f64(if pooled.is_empty() { f64::NAN } else { mean(&pooled) }),
                fmt_f64(nn_sum.median),
                fmt_f64(nn_sum.p16),
                fmt_f64(nn_sum.p84),
                fmt_f64(js),
            ]);
        }
    }
    let prov = provenance(ctx, None, None);
    let path = ctx.log.path("ensemble_summary.csv");
    write_csv(
        &path,
        &prov,
        &[
            "d", "t_f", "n", "s_median", "s_p16", "s_p84", "r_mean", "nn_median", "nn_p16",
            "nn_p84", "js_s_vs_haar_sector",
        ],
        &rows,
    )
}

/// Haar baselines: trivial-sector and full-Haar record files plus the
/// baseline distributions of S-tilde, r-tilde and omega.
pub fn haar_baseline(ctx: &mut RunContext) -> Result<()> {
    let n = ctx.config.n_samples;
    let sector = haar_sector_records(ctx, n)?;
    let full: Vec<EnsembleRecord> = (0..n as u64)
        .into_par_iter()
        .map(|id| {
            let mut rng = stream(ctx.seed, &[HAAR_STREAM, 1, id]);
            let state = SectorBasis::haar_full(ctx.config.n_atoms, &mut rng);
            let ent =
                schmidt_decompose_with(&state, &ctx.bipartition, ctx.config.smax_convention)?;
            let ratios = gap_ratios(&ent, ctx.config.trim_fraction).unwrap_or_default();
            Ok(EnsembleRecord {
                sample_id: id,
                seed: ctx.seed,
                spacing: 0.0,
                t_final: 0.0,
                entropy: ent.entropy,
                normalized_entropy: ent.normalized_entropy,
                gap_ratios: ratios,
                nn_correlation: nn_correlation(&state)?,
                mean_excitation: mean_excitation(&state)?,
                omegas: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    for (label, records) in [("sector", &sector), ("full", &full)] {
        let name = format!("haar_{label}_N{}.jsonl", ctx.config.n_atoms);
        let path = ctx.log.path(&name);
        if path.exists() {
            std::fs::remove_file(&path)?;
        }
        append_jsonl(&path, records)?;
        let prov = provenance(ctx, None, None);
        write_histogram_csv(
            ctx,
            &format!("hist_s_haar_{label}.csv", ),
            &prov,
            &s_histogram(records, ctx.config.s_bins),
        )?;
        let mut r_hist = Histogram::uniform(0.0, 1.0, 40);
        r_hist.observe_all(records.iter().flat_map(|r| r.gap_ratios.clone()));
        write_histogram_csv(ctx, &format!("hist_r_haar_{label}.csv"), &prov, &r_hist)?;
    }

    // omega distribution of the sector ensemble
    let omegas: Vec<f64> = (0..n as u64)
        .into_par_iter()
        .map(|id| {
            let mut rng = stream(ctx.seed, &[HAAR_STREAM, 0, id]);
            let state = ctx.basis.haar_sector(&mut rng);
            bitstring_omegas(&ctx.basis.embed(&state)?)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let mut w_hist = Histogram::uniform(0.0, 8.0, ctx.config.omega_bins);
    w_hist.observe_all(omegas);
    let prov = provenance(ctx, None, None);
    write_histogram_csv(ctx, "hist_omega_haar_sector.csv", &prov, &w_hist)?;

    let entropies: Vec<f64> = full.iter().map(|r| r.entropy).collect();
    let sector_entropies: Vec<f64> = sector.iter().map(|r| r.entropy).collect();
    let path = ctx.log.path("haar_summary.csv");
    write_csv(
        &path,
        &prov,
        &["ensemble", "n", "mean_entropy", "mean_normalized_entropy", "mean_r"],
        &[
            vec![
                "full".into(),
                n.to_string(),
                fmt_f64(mean(&entropies)),
                fmt_f64(mean(&full.iter().map(|r| r.normalized_entropy).collect::<Vec<_>>())),
                fmt_f64(mean(&full.iter().flat_map(|r| r.gap_ratios.clone()).collect::<Vec<_>>())),
            ],
            vec![
                "sector".into(),
                n.to_string(),
                fmt_f64(mean(&sector_entropies)),
                fmt_f64(mean(&sector.iter().map(|r| r.normalized_entropy).collect::<Vec<_>>())),
                fmt_f64(mean(&sector.iter().flat_map(|r| r.gap_ratios.clone()).collect::<Vec<_>>())),
            ],
        ],
    )
}

/// Pooled gap-ratio means: Haar-sector states against the Wishart and
/// Poisson references.
pub fn ratio_stats(ctx: &mut RunContext) -> Result<()> {
    let records = haar_sector_records(ctx, ctx.config.n_samples)?;
    let pooled: Vec<f64> = records.iter().flat_map(|r| r.gap_ratios.clone()).collect();

    let d_a = 1usize << ctx.bipartition.size_a();
    let d_b = 1usize << ctx.bipartition.size_b();
    let (lo, hi) = (d_a.min(d_b), d_a.max(d_b));
    let n_ref = ctx.config.n_samples;
    let mut rng = stream(ctx.seed, &[REFERENCE_STREAM, 0]);
    let gue = wishart_reference_ratios(&mut rng, lo, hi, ReferenceEnsemble::GueGinibre, n_ref, ctx.config.trim_fraction)?;
    let mut rng = stream(ctx.seed, &[REFERENCE_STREAM, 1]);
    let goe = wishart_reference_ratios(&mut rng, lo, hi, ReferenceEnsemble::GoeRealGinibre, n_ref, ctx.config.trim_fraction)?;
    let mut rng = stream(ctx.seed, &[REFERENCE_STREAM, 2]);
    let poisson = poisson_reference_ratios(&mut rng, lo, n_ref, ctx.config.trim_fraction)?;

    let prov = provenance(ctx, None, None);
    let sources: [(&str, &Vec<f64>); 4] = [
        ("haar-sector", &pooled),
        ("wishart-complex-ginibre", &gue),
        ("wishart-real-ginibre", &goe),
        ("poisson", &poisson),
    ];
    let mut rows = Vec::new();
    for (label, values) in &sources {
        let mut hist = Histogram::uniform(0.0, 1.0, 40);
        hist.observe_all(values.iter().copied());
        write_histogram_csv(ctx, &format!("hist_r_{label}.csv"), &prov, &hist)?;
        rows.push(vec![
            label.to_string(),
            values.len().to_string(),
            fmt_f64(mean(values)),
        ]);
    }
    let path = ctx.log.path("ratio_stats.csv");
    write_csv(&path, &prov, &["source", "n_ratios", "mean_r"], &rows)
}

fn pooled_cell_omegas(
    ctx: &RunContext,
    cell_id: u64,
    t_f: f64,
    ops: &SectorOperators,
) -> Result<Vec<f64>> {
    let constraints = PulseConstraints::new(
        ctx.config.omega_max,
        ctx.config.delta_max,
        ctx.config.m_segments,
        t_f,
    )?;
    let initial = default_initial(&ctx.basis);
    let nested = (0..ctx.config.n_samples as u64)
        .into_par_iter()
        .map(|id| {
            let mut rng = stream(ctx.seed, &[ENSEMBLE_STREAM, cell_id, id]);
            let seq = sample_random_pulses(&mut rng, &constraints);
            let state = evolve(&initial, &seq, ops)?;
            bitstring_omegas(&ctx.basis.embed(&state)?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(nested.into_iter().flatten().collect())
}

/// Porter-Thomas comparison: JS divergence between pooled omega histograms
/// and the bin-integrated exp(-omega) density, per (d, T_f) cell plus the
/// Haar-sector baseline.
pub fn porter_thomas(ctx: &mut RunContext) -> Result<()> {
    let template = Histogram::uniform(0.0, 8.0, ctx.config.omega_bins);
    let analytic = porter_thomas_bin_masses(&template.bin_edges);

    let mut rows = Vec::new();
    let mut emit = |ctx: &mut RunContext, label: String, d: Option<f64>, t_f: Option<f64>, omegas: Vec<f64>| -> Result<()> {
        let mut hist = template.clone();
        let n = omegas.len();
        hist.observe_all(omegas);
        let js = js_divergence_masses(&hist.masses(), &analytic);
        let prov = provenance(ctx, d, t_f);
        write_histogram_csv(ctx, &format!("hist_omega_{label}.csv"), &prov, &hist)?;
        rows.push(vec![
            label,
            d.map(|v| v.to_string()).unwrap_or_else(|| "-".into()),
            t_f.map(|v| v.to_string()).unwrap_or_else(|| "-".into()),
            n.to_string(),
            fmt_f64(js),
        ]);
        Ok(())
    };

    let haar: Vec<f64> = (0..ctx.config.n_samples as u64)
        .into_par_iter()
        .map(|id| {
            let mut rng = stream(ctx.seed, &[HAAR_STREAM, 0, id]);
            let state = ctx.basis.haar_sector(&mut rng);
            bitstring_omegas(&ctx.basis.embed(&state)?)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    emit(ctx, "haar_sector".into(), None, None, haar)?;

    let (ds, tfs) = (ctx.config.d.clone(), ctx.config.t_f.clone());
    for (di, &d) in ds.iter().enumerate() {
        let ops = sector_operators(ctx, d)?;
        for (ti, &t_f) in tfs.iter().enumerate() {
            let cell_id = (di * tfs.len() + ti) as u64;
            let omegas = pooled_cell_omegas(ctx, cell_id, t_f, &ops)?;
            emit(ctx, format!("d{d}_Tf{t_f}"), Some(d), Some(t_f), omegas)?;
        }
    }
    let prov = provenance(ctx, None, None);
    let path = ctx.log.path("porter_thomas.csv");
    write_csv(
        &path,
        &prov,
        &["cell", "d", "t_f", "n_omegas", "js_vs_exp"],
        &rows,
    )
}

/// Nearest-neighbor correlation summaries per (d, T_f) cell.
pub fn blockade(ctx: &mut RunContext) -> Result<()> {
    let mut rows = Vec::new();
    let (ds, tfs) = (ctx.config.d.clone(), ctx.config.t_f.clone());
    for (di, &d) in ds.iter().enumerate() {
        let ops = sector_operators(ctx, d)?;
        for (ti, &t_f) in tfs.iter().enumerate() {
            let cell_id = (di * tfs.len() + ti) as u64;
            let constraints = PulseConstraints::new(
                ctx.config.omega_max,
                ctx.config.delta_max,
                ctx.config.m_segments,
                t_f,
            )?;
            let initial = default_initial(&ctx.basis);
            let nn: Vec<f64> = (0..ctx.config.n_samples as u64)
                .into_par_iter()
                .map(|id| {
                    let mut rng = stream(ctx.seed, &[ENSEMBLE_STREAM, cell_id, id]);
                    let seq = sample_random_pulses(&mut rng, &constraints);
                    let state = evolve(&initial, &seq, &ops)?;
                    nn_correlation(&ctx.basis.embed(&state)?)
                })
                .collect::<Result<Vec<_>>>()?;
            let summary = crate::blockade::blockade_diagnostic(&nn)?;
            rows.push(vec![
                d.to_string(),
                t_f.to_string(),
                nn.len().to_string(),
                fmt_f64(summary.median),
                fmt_f64(summary.p16),
                fmt_f64(summary.p84),
            ]);
        }
    }
    let prov = provenance(ctx, None, None);
    let path = ctx.log.path("blockade_summary.csv");
    write_csv(
        &path,
        &prov,
        &["d", "t_f", "n", "nn_median", "nn_p16", "nn_p84"],
        &rows,
    )
}

/// Analytic (eta, pdf, cdf) grids per spacing, plus the model summary with
/// the characteristic crossover distance.
pub fn eta_pdf(ctx: &mut RunContext) -> Result<()> {
    let mut summary_rows = Vec::new();
    for &d in &ctx.config.d.clone() {
        let geometry = RingGeometry::build(ctx.config.n_atoms, d)?;
        let params = PhysicalParams::new(ctx.config.c6, geometry)?;
        let model = EtaModel::new(params.v_nn(), ctx.config.omega_max, ctx.config.delta_max)?;
        let eta_hi = if model.eta_plus.is_finite() {
            1.25 * model.eta_plus
        } else {
            50.0 * model.eta_minus
        };
        let n = ctx.config.eta_points;
        let rows: Vec<Vec<String>> = (0..=n)
            .map(|i| {
                let eta = eta_hi * i as f64 / n as f64;
                Ok(vec![
                    fmt_f64(eta),
                    fmt_f64(model.pdf(eta)?),
                    fmt_f64(model.cdf(eta)?),
                ])
            })
            .collect::<Result<Vec<_>>>()?;
        let prov = provenance(ctx, Some(d), None);
        let path = ctx.log.path(&format!("eta_d{d}.csv"));
        write_csv(&path, &prov, &["eta", "pdf", "cdf"], &rows)?;
        summary_rows.push(vec![
            d.to_string(),
            fmt_f64(model.v),
            format!("{:?}", model.case),
            fmt_f64(model.eta_minus),
            fmt_f64(model.eta_plus),
        ]);
    }
    let d_tilde =
        characteristic_distance(ctx.config.c6, ctx.config.omega_max, ctx.config.delta_max);
    let prov = provenance(ctx, None, None);
    let path = ctx.log.path("eta_summary.csv");
    let mut rows = summary_rows;
    rows.push(vec![
        "d_tilde".into(),
        fmt_f64(d_tilde),
        "-".into(),
        "-".into(),
        "-".into(),
    ]);
    write_csv(&path, &prov, &["d", "v", "case", "eta_minus", "eta_plus"], &rows)
}

/// A target drawn from the random-pulse ensemble, with its entropy metadata.
fn generate_target(
    ctx: &RunContext,
    target_id: u64,
    t_f: f64,
    ops: &SectorOperators,
) -> Result<(StateVector, f64)> {
    let constraints = PulseConstraints::new(
        ctx.config.omega_max,
        ctx.config.delta_max,
        ctx.config.m_segments,
        t_f,
    )?;
    let mut rng = stream(ctx.seed, &[TARGET_STREAM, target_id]);
    let seq = sample_random_pulses(&mut rng, &constraints);
    let state = evolve(&default_initial(&ctx.basis), &seq, ops)?;
    let ent = schmidt_decompose_with(
        &ctx.basis.embed(&state)?,
        &ctx.bipartition,
        ctx.config.smax_convention,
    )?;
    Ok((state, ent.normalized_entropy))
}

fn grape_csv_row(r: &GrapeResult) -> Vec<String> {
    let converged = r.restarts.iter().filter(|t| t.ok && t.converged).count();
    vec![
        r.target_meta.target_id.to_string(),
        fmt_f64(r.target_meta.normalized_entropy.unwrap_or(f64::NAN)),
        fmt_f64(r.target_meta.generation_t_f.unwrap_or(f64::NAN)),
        fmt_f64(r.best_infidelity),
        fmt_f64(r.t_opt),
        converged.to_string(),
    ]
}

const GRAPE_CSV_COLUMNS: [&str; 6] = [
    "target_id",
    "s_tilde",
    "generation_t_f",
    "best_infidelity",
    "t_opt",
    "n_restarts_converged",
];

fn write_grape_results(ctx: &mut RunContext, name: &str, results: &[GrapeResult]) -> Result<()> {
    let mut failed_restarts = 0usize;
    for r in results {
        failed_restarts += r.restarts.iter().filter(|t| !t.ok).count();
        let path = ctx
            .log
            .path(&format!("grape_target_{}.json", r.target_meta.target_id));
        std::fs::write(&path, serde_json::to_string_pretty(r)?)?;
    }
    if failed_restarts > 0 {
        eprintln!("warning: {failed_restarts} optimizer restarts aborted (non-finite start)");
    }
    let rows: Vec<Vec<String>> = results.iter().map(grape_csv_row).collect();
    let prov = provenance(ctx, None, None);
    let path = ctx.log.path(name);
    write_csv(&path, &prov, &GRAPE_CSV_COLUMNS, &rows)
}

/// Reachability benchmark: targets generated and prepared at the same
/// spacing, with the optimization horizon equal to the generation time.
pub fn grape_benchmark(ctx: &mut RunContext) -> Result<()> {
    let d = ctx.config.d[0];
    let t_f = ctx.config.t_f[0];
    let ops = sector_operators(ctx, d)?;
    let grape = ctx.config.grape_config();

    let mut results = Vec::new();
    for j in 0..ctx.config.n_targets as u64 {
        let (target, s_tilde) = generate_target(ctx, j, t_f, &ops)?;
        let meta = TargetMeta {
            target_id: j,
            normalized_entropy: Some(s_tilde),
            generation_t_f: Some(t_f),
        };
        results.push(optimize(&target, meta, &grape, &ops, ctx.seed)?);
    }
    write_grape_results(ctx, "grape_benchmark.csv", &results)
}

/// Preparation-complexity study: stratified targets from the generation
/// ensemble, optimized at the preparation spacing, with the success curve.
pub fn grape_study(ctx: &mut RunContext) -> Result<()> {
    let gen_ops = sector_operators(ctx, ctx.config.target_d)?;
    let prep_ops = sector_operators(ctx, ctx.config.prep_d)?;
    let tfs = ctx.config.t_f.clone();
    let per_tf = ctx.config.n_samples;

    // deterministic pool order: T_f major, sample minor
    let pool: Vec<TargetCandidate> = tfs
        .iter()
        .enumerate()
        .flat_map(|(ti, &t_f)| (0..per_tf as u64).map(move |s| (ti, t_f, s)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(ti, t_f, s)| {
            let target_id = (ti * per_tf) as u64 + s;
            let (state, s_tilde) = generate_target(ctx, target_id, t_f, &gen_ops)?;
            Ok(TargetCandidate {
                state,
                normalized_entropy: s_tilde,
                generation_t_f: t_f,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let selection = stratified_targets(&pool, ctx.config.strat_bins, ctx.config.per_bin)?;
    if !selection.empty_bins.is_empty() {
        eprintln!(
            "warning: {} of {} entropy strata had no candidates: {:?}",
            selection.empty_bins.len(),
            ctx.config.strat_bins,
            selection.empty_bins
        );
    }

    let grape = ctx.config.grape_config();
    let mut results = Vec::new();
    for &idx in &selection.selected {
        let c = &pool[idx];
        let meta = TargetMeta {
            target_id: idx as u64,
            normalized_entropy: Some(c.normalized_entropy),
            generation_t_f: Some(c.generation_t_f),
        };
        results.push(optimize(&c.state, meta, &grape, &prep_ops, ctx.seed)?);
    }
    write_grape_results(ctx, "grape_study.csv", &results)?;

    let curve = success_curve(&results, ctx.config.gamma, ctx.config.delta_s)?;
    let rows: Vec<Vec<String>> = curve
        .iter()
        .map(|b| {
            vec![
                fmt_f64(b.s_center),
                b.n.to_string(),
                fmt_f64(b.p_success),
                fmt_f64(b.median_infidelity),
                fmt_f64(b.infidelity_p16),
                fmt_f64(b.infidelity_p84),
            ]
        })
        .collect();
    let prov = provenance(ctx, None, None);
    let path = ctx.log.path("success_curve.csv");
    write_csv(
        &path,
        &prov,
        &[
            "s_center",
            "n",
            "p_success",
            "inf_median",
            "inf_p16",
            "inf_p84",
        ],
        &rows,
    )
}

/// Gap-ratio means of Haar-sector states under the three bipartition
/// symmetry classes, with the coefficient-symmetry check where it applies.
pub fn bipartition_scan(ctx: &mut RunContext) -> Result<()> {
    let n = ctx.config.n_atoms;
    let mut parts = vec![
        Bipartition::new((1u32 << (n / 2)) - 1, n)?, // contiguous half
        crate::stats::bipartition::find_asymmetric_bipartition(n),
    ];
    // first mask with only an exchange symmetry (the contiguous half also has
    // the internal reflection through its midpoint, which splits the Schmidt
    // spectrum), then the first mask whose only symmetry is internal
    let all = (1u32 << n) - 1;
    let mut want_exchange_only = true;
    let mut want_internal_only = true;
    for mask in 1..all {
        if !want_exchange_only && !want_internal_only {
            break;
        }
        let part = match Bipartition::new(mask, n) {
            Ok(p) => p,
            Err(_) => continue,
        };
        let flags = classify_bipartition(&part);
        if flags.exchange && !flags.internal && want_exchange_only {
            parts.push(part);
            want_exchange_only = false;
        } else if flags.internal && !flags.exchange && want_internal_only {
            parts.push(part);
            want_internal_only = false;
        }
    }

    let states: Vec<StateVector> = (0..ctx.config.n_samples as u64)
        .into_par_iter()
        .map(|id| {
            let mut rng = stream(ctx.seed, &[HAAR_STREAM, 0, id]);
            ctx.basis.embed(&ctx.basis.haar_sector(&mut rng))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    for part in &parts {
        let class = classify_bipartition(part).class();
        let pooled: Vec<f64> = states
            .par_iter()
            .map(|state| {
                let ent = schmidt_decompose_with(state, part, ctx.config.smax_convention)?;
                Ok(gap_ratios(&ent, ctx.config.trim_fraction).unwrap_or_default())
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect();
        if pooled.is_empty() {
            return Err(Error::TooFewLevels(0));
        }
        let asym = match class {
            crate::stats::bipartition::SymmetryClass::ExchangeSymmetry => {
                fmt_f64(symmetric_coefficient_check(&states[0], part)?)
            }
            _ => "-".into(),
        };
        rows.push(vec![
            format!("{:#b}", part.site_mask),
            format!("{class:?}"),
            pooled.len().to_string(),
            fmt_f64(mean(&pooled)),
            asym,
        ]);
    }
    let prov = provenance(ctx, None, None);
    let path = ctx.log.path("bipartition_scan.csv");
    write_csv(
        &path,
        &prov,
        &["mask", "class", "n_ratios", "mean_r", "coeff_asymmetry"],
        &rows,
    )
}
