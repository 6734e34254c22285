//! Acceptance gate: one test per criterion, each printing a pass/fail line
//! (run with `--nocapture` to see them). Criteria 10 and 11 are the extended
//! suite and are `#[ignore]`d; run them with `cargo test --test acceptance
//! -- --ignored`.

mod common;

use std::collections::HashSet;
use std::time::Instant;

use rayon::prelude::*;

use rydpulse::blockade::{characteristic_distance, EtaModel};
use rydpulse::evolve::{default_initial, evolve};
use rydpulse::geometry::RingGeometry;
use rydpulse::grape::config::{GrapeConfig, GrapeParams};
use rydpulse::grape::cost::{final_overlap, total_cost};
use rydpulse::grape::gradient::{gradient, GradientParts};
use rydpulse::grape::optimize::{optimize, TargetMeta};
use rydpulse::grape::study::{stratified_targets, TargetCandidate};
use rydpulse::hamiltonian::{
    build_sector_operators, nn_correlation, PhysicalParams, SectorOperators, DEFAULT_C6,
    DEFAULT_DELTA_MAX, DEFAULT_OMEGA_MAX,
};
use rydpulse::pulse::{sample_random_pulses, PulseConstraints};
use rydpulse::rng::stream;
use rydpulse::sector::SectorBasis;
use rydpulse::state::StateVector;
use rydpulse::stats::bipartition::{find_asymmetric_bipartition, Bipartition};
use rydpulse::stats::bitstring_omegas;
use rydpulse::stats::entanglement::{
    gap_ratios, schmidt_decompose, symmetric_coefficient_check,
};
use rydpulse::stats::histogram::{js_divergence_masses, summarize, Histogram};
use rydpulse::stats::reference::{
    mean, poisson_reference_ratios, wishart_reference_ratios, ReferenceEnsemble,
};
use rydpulse::stats::surmise::porter_thomas_bin_masses;

use common::{criterion, full_evolve, page_entropy};

const TRIM: f64 = 0.75;
const MEAN_R_GUE: f64 = 0.5996;
const MEAN_R_GOE: f64 = 0.5359;
const MEAN_R_POISSON: f64 = 2.0 * std::f64::consts::LN_2 - 1.0;

fn setup(n: usize, d: f64) -> (SectorBasis, SectorOperators) {
    let basis = SectorBasis::dihedral_orbits(n).unwrap();
    let geometry = RingGeometry::build(n, d).unwrap();
    let params = PhysicalParams::new(DEFAULT_C6, geometry).unwrap();
    let ops = build_sector_operators(&basis, &params).unwrap();
    (basis, ops)
}

/// Brute-force dihedral orbit count, independent of the library's
/// representative-minimum construction: close each bitstring under rotations
/// and bit-order reflection.
fn orbit_count_oracle(n: usize) -> usize {
    let mask = (1u32 << n) - 1;
    let rotate = |b: u32| ((b << 1) | (b >> (n - 1))) & mask;
    let reflect = |b: u32| {
        let mut out = 0u32;
        for s in 0..n {
            out |= (b >> s & 1) << (n - 1 - s);
        }
        out
    };
    let mut seen = HashSet::new();
    let mut orbits = 0;
    for b in 0..=mask {
        if seen.contains(&b) {
            continue;
        }
        orbits += 1;
        let mut frontier = vec![b];
        while let Some(x) = frontier.pop() {
            if seen.insert(x) {
                frontier.push(rotate(x));
                frontier.push(reflect(x));
            }
        }
    }
    orbits
}

#[test]
fn criterion_01_sector_dimensions() {
    let start = Instant::now();
    let dim9 = SectorBasis::dihedral_orbits(9).unwrap().dim();
    let dim10 = SectorBasis::dihedral_orbits(10).unwrap().dim();
    let oracle9 = orbit_count_oracle(9);
    let oracle10 = orbit_count_oracle(10);
    let elapsed = start.elapsed().as_secs_f64();
    let ok = dim9 == 46 && dim10 == 78 && dim9 == oracle9 && dim10 == oracle10 && elapsed < 1.0;
    criterion(
        1,
        "sector dimensions vs brute-force orbit oracle",
        ok,
        &format!("N=9: {dim9} (oracle {oracle9}), N=10: {dim10} (oracle {oracle10}), {elapsed:.2}s"),
    );
}

#[test]
fn criterion_02_evolution_oracle_equivalence() {
    let start = Instant::now();
    let n = 5;
    let d = 7.0;
    let (basis, ops) = setup(n, d);
    let constraints = PulseConstraints::new(DEFAULT_OMEGA_MAX, DEFAULT_DELTA_MAX, 10, 1.0).unwrap();
    let initial = default_initial(&basis);
    let worst = (0..100u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(2024, &[i]);
            let seq = sample_random_pulses(&mut rng, &constraints);
            let sector = evolve(&initial, &seq, &ops).unwrap();
            let full = basis.embed(&sector).unwrap();
            let oracle = full_evolve(&seq, n, d, DEFAULT_C6);
            (&full.amplitudes - &oracle).norm()
        })
        .reduce(|| 0.0, f64::max);
    let elapsed = start.elapsed().as_secs_f64();
    let ok = worst < 1e-9 && elapsed < 10.0;
    criterion(
        2,
        "sector evolution vs full-space dense oracle (N=5, 100 pulses)",
        ok,
        &format!("max state error {worst:.2e}, {elapsed:.1}s"),
    );
}

fn haar_entropies(n: usize, n_samples: usize, sector: bool) -> Vec<f64> {
    let basis = SectorBasis::dihedral_orbits(n).unwrap();
    let part = find_asymmetric_bipartition(n);
    (0..n_samples as u64)
        .into_par_iter()
        .map(|id| {
            let mut rng = stream(7, &[u64::from(sector), id]);
            let full = if sector {
                basis.embed(&basis.haar_sector(&mut rng)).unwrap()
            } else {
                SectorBasis::haar_full(n, &mut rng)
            };
            schmidt_decompose(&full, &part).unwrap().entropy
        })
        .collect()
}

#[test]
fn criterion_03_page_baseline() {
    let start = Instant::now();
    let page = page_entropy(16, 32);
    let full_mean = mean(&haar_entropies(9, 10_000, false));
    let sector_mean = mean(&haar_entropies(9, 10_000, true));
    let rel = (full_mean - page).abs() / page;
    let deficit = (full_mean - sector_mean) / full_mean;
    let elapsed = start.elapsed().as_secs_f64();
    let ok = rel < 0.005 && (0.01..=0.02).contains(&deficit) && elapsed < 60.0;
    criterion(
        3,
        "Haar entropy vs Page value; sector deficit 1-2%",
        ok,
        &format!(
            "full mean {full_mean:.4} vs Page {page:.4} (rel {rel:.1e}), sector mean {sector_mean:.4} (deficit {:.2}%), {elapsed:.0}s",
            100.0 * deficit
        ),
    );
}

fn pooled_haar_ratios(n: usize, part: &Bipartition, n_samples: usize) -> Vec<f64> {
    let basis = SectorBasis::dihedral_orbits(n).unwrap();
    (0..n_samples as u64)
        .into_par_iter()
        .map(|id| {
            let mut rng = stream(7, &[1, id]);
            let full = basis.embed(&basis.haar_sector(&mut rng)).unwrap();
            let ent = schmidt_decompose(&full, part).unwrap();
            gap_ratios(&ent, TRIM).unwrap_or_default()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

#[test]
fn criterion_04_gap_ratio_statistics() {
    let start = Instant::now();
    let n_samples = 10_000;
    let part = find_asymmetric_bipartition(9);
    let haar_mean = mean(&pooled_haar_ratios(9, &part, n_samples));

    let mut rng = stream(8, &[0]);
    let gue = mean(
        &wishart_reference_ratios(&mut rng, 16, 32, ReferenceEnsemble::GueGinibre, n_samples, TRIM)
            .unwrap(),
    );
    let mut rng = stream(8, &[1]);
    let goe = mean(
        &wishart_reference_ratios(
            &mut rng,
            16,
            32,
            ReferenceEnsemble::GoeRealGinibre,
            n_samples,
            TRIM,
        )
        .unwrap(),
    );
    let mut rng = stream(8, &[2]);
    let poisson = mean(&poisson_reference_ratios(&mut rng, 16, n_samples, TRIM).unwrap());
    let elapsed = start.elapsed().as_secs_f64();
    let ok = (haar_mean - MEAN_R_GUE).abs() < 0.010
        && (gue - haar_mean).abs() < 0.010
        && (goe - MEAN_R_GOE).abs() < 0.010
        && (poisson - MEAN_R_POISSON).abs() < 0.010
        && elapsed < 120.0;
    criterion(
        4,
        "pooled gap-ratio means (Haar sector, Wishart refs, Poisson)",
        ok,
        &format!(
            "haar {haar_mean:.4}, complex-Ginibre {gue:.4}, real-Ginibre {goe:.4}, Poisson {poisson:.4}, {elapsed:.0}s"
        ),
    );
}

#[test]
fn criterion_05_bipartition_dependence() {
    let start = Instant::now();
    let n = 10;
    let n_samples = 10_000;
    // {0,1,2,3,5}: the reflection x -> 9-x maps A onto its complement and no
    // nontrivial group element preserves A, so only the exchange symmetry acts.
    // (A contiguous half always carries the internal reflection through its
    // midpoint, which splits the Schmidt spectrum into two blocks.)
    let exchange = Bipartition::new(0b10_1111, n).unwrap();
    let asymmetric = find_asymmetric_bipartition(n);
    let internal = Bipartition::new(0b110_0011, n).unwrap(); // {0,1,5,6}: rotation by 5 preserves A

    let ex_mean = mean(&pooled_haar_ratios(n, &exchange, n_samples));
    let asym_mean = mean(&pooled_haar_ratios(n, &asymmetric, n_samples));
    let int_mean = mean(&pooled_haar_ratios(n, &internal, n_samples));

    let basis = SectorBasis::dihedral_orbits(n).unwrap();
    let mut rng = stream(7, &[1, 0]);
    let state = basis.embed(&basis.haar_sector(&mut rng)).unwrap();
    let asym_coeff = symmetric_coefficient_check(&state, &exchange).unwrap();

    let elapsed = start.elapsed().as_secs_f64();
    let ok = (ex_mean - MEAN_R_GOE).abs() < 0.015
        && asym_coeff < 1e-10
        && (asym_mean - MEAN_R_GUE).abs() < 0.015
        && int_mean < MEAN_R_GOE - 0.02
        && elapsed < 300.0;
    criterion(
        5,
        "N=10 bipartition classes: beta=1, beta=2, Poisson-shifted",
        ok,
        &format!(
            "exchange {ex_mean:.4} (|C-C^T| {asym_coeff:.1e}), asymmetric {asym_mean:.4}, internal {int_mean:.4}, {elapsed:.0}s"
        ),
    );
}

fn pooled_pulse_omegas(
    basis: &SectorBasis,
    ops: &SectorOperators,
    t_f: f64,
    n_samples: usize,
    cell: u64,
) -> Vec<f64> {
    let constraints =
        PulseConstraints::new(DEFAULT_OMEGA_MAX, DEFAULT_DELTA_MAX, 30, t_f).unwrap();
    let initial = default_initial(basis);
    (0..n_samples as u64)
        .into_par_iter()
        .map(|id| {
            let mut rng = stream(12, &[cell, id]);
            let seq = sample_random_pulses(&mut rng, &constraints);
            let state = evolve(&initial, &seq, ops).unwrap();
            bitstring_omegas(&basis.embed(&state).unwrap()).unwrap()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

fn omega_js(omegas: Vec<f64>) -> f64 {
    let mut hist = Histogram::uniform(0.0, 8.0, 60);
    let analytic = porter_thomas_bin_masses(&hist.bin_edges);
    hist.observe_all(omegas);
    js_divergence_masses(&hist.masses(), &analytic)
}

#[test]
fn criterion_06_porter_thomas() {
    let start = Instant::now();
    let (basis, ops) = setup(9, 10.0);
    let haar: Vec<f64> = (0..10_000u64)
        .into_par_iter()
        .map(|id| {
            let mut rng = stream(7, &[1, id]);
            bitstring_omegas(&basis.embed(&basis.haar_sector(&mut rng)).unwrap()).unwrap()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    let js_haar = omega_js(haar);

    let js_short = omega_js(pooled_pulse_omegas(&basis, &ops, 1.0, 2000, 0));
    let js_long = omega_js(pooled_pulse_omegas(&basis, &ops, 100.0, 2000, 1));
    let elapsed = start.elapsed().as_secs_f64();
    let ok = js_haar < 5e-3 && js_short >= 5.0 * js_long;
    criterion(
        6,
        "Porter-Thomas anticoncentration",
        ok,
        &format!(
            "JS(haar) {js_haar:.2e}; pulses d=10: JS(T_f=1) {js_short:.2e} vs JS(T_f=100) {js_long:.2e} (ratio {:.1}), {elapsed:.0}s",
            js_short / js_long
        ),
    );
}

struct CellStats {
    s_tilde: Vec<f64>,
    nn: Vec<f64>,
}

fn pulse_cell(basis: &SectorBasis, ops: &SectorOperators, t_f: f64, n: usize, cell: u64) -> CellStats {
    let part = find_asymmetric_bipartition(basis.n_atoms());
    let constraints =
        PulseConstraints::new(DEFAULT_OMEGA_MAX, DEFAULT_DELTA_MAX, 30, t_f).unwrap();
    let initial = default_initial(basis);
    let rows: Vec<(f64, f64)> = (0..n as u64)
        .into_par_iter()
        .map(|id| {
            let mut rng = stream(13, &[cell, id]);
            let seq = sample_random_pulses(&mut rng, &constraints);
            let state = evolve(&initial, &seq, ops).unwrap();
            let full = basis.embed(&state).unwrap();
            let ent = schmidt_decompose(&full, &part).unwrap();
            (ent.normalized_entropy, nn_correlation(&full).unwrap())
        })
        .collect();
    CellStats {
        s_tilde: rows.iter().map(|r| r.0).collect(),
        nn: rows.iter().map(|r| r.1).collect(),
    }
}

#[test]
fn criterion_07_entanglement_dynamics() {
    let start = Instant::now();
    let n_samples = 2000;
    let (basis, ops10) = setup(9, 10.0);
    let (_, ops5) = setup(9, 5.0);

    let t_fs = [1.0, 7.4, 100.0];
    let cells10: Vec<CellStats> = t_fs
        .iter()
        .enumerate()
        .map(|(i, &t)| pulse_cell(&basis, &ops10, t, n_samples, i as u64))
        .collect();
    let medians: Vec<f64> = cells10
        .iter()
        .map(|c| summarize(&c.s_tilde).unwrap().median)
        .collect();
    let monotone = medians.windows(2).all(|w| w[1] > w[0]);

    // JS between the long-time and Haar-sector entropy distributions, same
    // estimator (equal sample counts, same binning) on both sides
    let haar_s: Vec<f64> = (0..n_samples as u64)
        .into_par_iter()
        .map(|id| {
            let mut rng = stream(7, &[1, id]);
            let full = basis.embed(&basis.haar_sector(&mut rng)).unwrap();
            schmidt_decompose(&full, &find_asymmetric_bipartition(9))
                .unwrap()
                .normalized_entropy
        })
        .collect();
    let mut h_pulse = Histogram::uniform(0.0, 1.0, 50);
    h_pulse.observe_all(cells10[2].s_tilde.iter().copied());
    let mut h_haar = Histogram::uniform(0.0, 1.0, 50);
    h_haar.observe_all(haar_s);
    let js = js_divergence_masses(&h_pulse.masses(), &h_haar.masses());

    let nn_medians: Vec<f64> = t_fs
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let cell = pulse_cell(&basis, &ops5, t, n_samples, 10 + i as u64);
            summarize(&cell.nn).unwrap().median
        })
        .collect();
    let blockaded = nn_medians.iter().all(|&m| m < 0.01);

    let elapsed = start.elapsed().as_secs_f64();
    let ok = monotone && js < 0.02 && blockaded && elapsed < 1800.0;
    criterion(
        7,
        "entanglement dynamics: monotone medians, Haar convergence, blockade",
        ok,
        &format!(
            "d=10 medians {medians:?}, JS(T_f=100 || haar) {js:.3e}, d=5 nn medians {nn_medians:?}, {elapsed:.0}s"
        ),
    );
}

#[test]
fn criterion_08_eta_distribution() {
    let start = Instant::now();
    let mut norm_worst: f64 = 0.0;
    let mut ks_worst: f64 = 0.0;
    for (i, &d) in [5.0f64, 7.0, 10.0].iter().enumerate() {
        let v = DEFAULT_C6 / d.powi(6);
        let model = EtaModel::new(v, DEFAULT_OMEGA_MAX, DEFAULT_DELTA_MAX).unwrap();
        // pdf normalization: trapezoid over the finite support plus the
        // exact 1/eta^2 tail where the density extends to infinity
        let hi = if model.eta_plus.is_finite() {
            model.eta_plus
        } else {
            1000.0 * model.eta_minus
        };
        let steps = 2_000_000;
        let mut integral = 0.0;
        let mut prev = model.pdf(0.0).unwrap();
        for k in 1..=steps {
            let eta = hi * k as f64 / steps as f64;
            let cur = model.pdf(eta).unwrap();
            integral += 0.5 * (prev + cur) * hi / steps as f64;
            prev = cur;
        }
        // the weak-interaction density extends to infinity; add the exact
        // integral of the far branch beyond the quadrature window
        if model.eta_plus.is_finite() && model.v <= DEFAULT_DELTA_MAX {
            integral += DEFAULT_OMEGA_MAX / (2.0 * DEFAULT_DELTA_MAX) / hi;
        } else if !model.eta_plus.is_finite() {
            integral += DEFAULT_OMEGA_MAX / (4.0 * DEFAULT_DELTA_MAX) / hi;
        }
        norm_worst = norm_worst.max((integral - 1.0).abs());

        // Monte Carlo: eta = Omega / |V - Delta| with uniform draws
        let n_mc = 1_000_000;
        let mut etas: Vec<f64> = {
            let mut rng = stream(99, &[i as u64]);
            use rand::Rng;
            (0..n_mc)
                .map(|_| {
                    let omega = rng.gen_range(0.0..=DEFAULT_OMEGA_MAX);
                    let delta = rng.gen_range(-DEFAULT_DELTA_MAX..=DEFAULT_DELTA_MAX);
                    omega / (v - delta).abs()
                })
                .collect()
        };
        etas.sort_by(f64::total_cmp);
        let ks = etas
            .iter()
            .enumerate()
            .map(|(k, &eta)| {
                let cdf = model.cdf(eta).unwrap();
                let lo = k as f64 / n_mc as f64;
                let hi_e = (k + 1) as f64 / n_mc as f64;
                (cdf - lo).abs().max((cdf - hi_e).abs())
            })
            .fold(0.0f64, f64::max);
        ks_worst = ks_worst.max(ks);
    }
    let d_tilde = characteristic_distance(DEFAULT_C6, DEFAULT_OMEGA_MAX, DEFAULT_DELTA_MAX);
    let elapsed = start.elapsed().as_secs_f64();
    let ok = norm_worst < 1e-8 && ks_worst < 2e-3 && (d_tilde - 7.44).abs() < 0.01 && elapsed < 30.0;
    criterion(
        8,
        "eta distribution: normalization, Monte Carlo CDF, crossover distance",
        ok,
        &format!(
            "worst |norm-1| {norm_worst:.1e}, worst KS {ks_worst:.1e}, d_tilde {d_tilde:.4} um, {elapsed:.0}s"
        ),
    );
}

/// Independent finite-difference gradient with Richardson extrapolation and
/// adaptive step shrinking; the eigensolver's ~1e-10 evaluation noise rules
/// out naive small-step stencils.
fn fd_gradient(
    params: &GrapeParams,
    target: &StateVector,
    config: &GrapeConfig,
    ops: &SectorOperators,
) -> Vec<f64> {
    let theta = GradientParts {
        omega: params.omega.clone(),
        delta: params.delta.clone(),
        dt: params.dt.clone(),
    }
    .flat();
    let m = params.m_segments();
    let mut grad = Vec::with_capacity(theta.len());
    for i in 0..theta.len() {
        let h_rel = if i < 2 * m { 3e-4 } else { 1e-4 };
        let eval = |shift: f64| {
            let mut t = theta.clone();
            t[i] += shift;
            let p = GrapeParams {
                omega: t[..m].to_vec(),
                delta: t[m..2 * m].to_vec(),
                dt: t[2 * m..].to_vec(),
            };
            total_cost(&p, target, config, ops).unwrap()
        };
        let mut h = h_rel * theta[i].abs().max(1.0);
        let mut estimate = f64::NAN;
        for _ in 0..8 {
            let d1 = (eval(h) - eval(-h)) / (2.0 * h);
            let d2 = (eval(0.5 * h) - eval(-0.5 * h)) / h;
            estimate = (4.0 * d2 - d1) / 3.0;
            if (d1 - d2).abs() <= 1e-4 * d2.abs().max(1e-8) {
                break;
            }
            h *= 0.25;
        }
        grad.push(estimate);
    }
    grad
}

fn gradient_check(n: usize, n_points: usize, seed: u64) -> f64 {
    let (basis, ops) = setup(n, 7.0);
    let config = GrapeConfig {
        m_segments: 6,
        ..GrapeConfig::default()
    };
    (0..n_points as u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = stream(seed, &[trial]);
            use rand::Rng;
            let target = basis.haar_sector(&mut rng);
            let p = GrapeParams {
                omega: (0..6)
                    .map(|_| rng.gen_range(0.05 * config.omega_max..0.95 * config.omega_max))
                    .collect(),
                delta: (0..6)
                    .map(|_| rng.gen_range(-0.95 * config.delta_max..0.95 * config.delta_max))
                    .collect(),
                dt: (0..6).map(|_| rng.gen_range(0.05..0.3) * config.t_max).collect(),
            };
            let z = final_overlap(&p, &target, &ops).unwrap();
            if z.norm_sqr() < 1e-4 {
                return 0.0; // log-singular region; no stencil is trustworthy
            }
            let analytic = gradient(&p, &target, &config, &ops).unwrap().flat();
            let fd = fd_gradient(&p, &target, &config, &ops);
            let scale = fd.iter().fold(0.0f64, |mx, x| mx.max(x.abs()));
            analytic
                .iter()
                .zip(&fd)
                .map(|(a, f)| (a - f).abs() / f.abs().max(1e-6 * scale).max(0.02))
                .fold(0.0f64, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

#[test]
fn criterion_09_gradient_check() {
    let start = Instant::now();
    let worst5 = gradient_check(5, 100, 41);
    let worst9 = gradient_check(9, 100, 42);
    let elapsed = start.elapsed().as_secs_f64();
    let ok = worst5 < 1e-5 && worst9 < 1e-5 && elapsed < 120.0;
    criterion(
        9,
        "analytic vs finite-difference gradients (100 points, N=5 and 9)",
        ok,
        &format!("worst relative error N=5: {worst5:.1e}, N=9: {worst9:.1e}, {elapsed:.0}s"),
    );
}

fn benchmark_targets(
    basis: &SectorBasis,
    ops: &SectorOperators,
    t_f: f64,
    count: usize,
) -> Vec<StateVector> {
    let constraints =
        PulseConstraints::new(DEFAULT_OMEGA_MAX, DEFAULT_DELTA_MAX, 30, t_f).unwrap();
    let initial = default_initial(basis);
    (0..count as u64)
        .map(|j| {
            let mut rng = stream(77, &[j]);
            let seq = sample_random_pulses(&mut rng, &constraints);
            evolve(&initial, &seq, ops).unwrap()
        })
        .collect()
}

#[test]
#[ignore = "extended suite: about an hour"]
fn criterion_10_reachable_target_benchmark() {
    let start = Instant::now();
    let (basis, ops) = setup(9, 10.0);
    let targets = benchmark_targets(&basis, &ops, 6.0, 10);
    let config = GrapeConfig {
        t_max: 6.0,
        ..GrapeConfig::default()
    };
    let infidelities: Vec<f64> = targets
        .iter()
        .enumerate()
        .map(|(j, target)| {
            let meta = TargetMeta {
                target_id: j as u64,
                ..Default::default()
            };
            let r = optimize(target, meta, &config, &ops, 5).unwrap();
            println!("  target {j}: infidelity {:.2e}", r.best_infidelity);
            r.best_infidelity
        })
        .collect();
    let worst = infidelities.iter().fold(0.0f64, |m, &x| m.max(x));
    let under_1e3 = infidelities.iter().filter(|&&i| i <= 1e-3).count();
    let elapsed = start.elapsed().as_secs_f64();
    let ok = worst <= 2.5e-3 && under_1e3 * 2 >= infidelities.len() && elapsed < 3600.0;
    criterion(
        10,
        "reachable targets: all <= 2.5e-3, half <= 1e-3",
        ok,
        &format!("worst {worst:.2e}, {under_1e3}/10 below 1e-3, {elapsed:.0}s"),
    );
}

#[test]
#[ignore = "extended suite: several hours"]
fn criterion_11_preparation_complexity_trend() {
    let start = Instant::now();
    let n = 9;
    let basis = SectorBasis::dihedral_orbits(n).unwrap();
    let gen_ops = {
        let params = PhysicalParams::new(DEFAULT_C6, RingGeometry::build(n, 10.0).unwrap()).unwrap();
        build_sector_operators(&basis, &params).unwrap()
    };
    let prep_ops = {
        let params = PhysicalParams::new(DEFAULT_C6, RingGeometry::build(n, 7.0).unwrap()).unwrap();
        build_sector_operators(&basis, &params).unwrap()
    };
    let part = find_asymmetric_bipartition(n);

    // candidate pool across generation times, 3 targets per S-tilde decile
    let t_fs = [3.0, 7.0, 10.0, 16.0, 200.0];
    let per_tf = 60;
    let initial = default_initial(&basis);
    let pool: Vec<TargetCandidate> = t_fs
        .iter()
        .enumerate()
        .flat_map(|(ti, &t_f)| (0..per_tf).map(move |s| (ti, t_f, s)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(ti, t_f, s)| {
            let mut rng = stream(78, &[ti as u64, s]);
            let constraints =
                PulseConstraints::new(DEFAULT_OMEGA_MAX, DEFAULT_DELTA_MAX, 30, t_f).unwrap();
            let seq = sample_random_pulses(&mut rng, &constraints);
            let state = evolve(&initial, &seq, &gen_ops).unwrap();
            let ent = schmidt_decompose(&basis.embed(&state).unwrap(), &part).unwrap();
            TargetCandidate {
                state,
                normalized_entropy: ent.normalized_entropy,
                generation_t_f: t_f,
            }
        })
        .collect();
    let selection = stratified_targets(&pool, 10, 3).unwrap();

    let config = GrapeConfig {
        t_max: 6.0,
        ..GrapeConfig::default()
    };
    let mut results: Vec<(f64, f64)> = Vec::new(); // (s_tilde, infidelity)
    for &idx in &selection.selected {
        let c = &pool[idx];
        let meta = TargetMeta {
            target_id: idx as u64,
            normalized_entropy: Some(c.normalized_entropy),
            generation_t_f: Some(c.generation_t_f),
        };
        let r = optimize(&c.state, meta, &config, &prep_ops, 5).unwrap();
        println!(
            "  target {idx}: S~ {:.3}, infidelity {:.2e}",
            c.normalized_entropy, r.best_infidelity
        );
        results.push((c.normalized_entropy, r.best_infidelity));
    }
    results.sort_by(|a, b| a.0.total_cmp(&b.0));
    let k = results.len() / 3;
    let bottom: Vec<f64> = results[..k].iter().map(|r| r.1).collect();
    let top: Vec<f64> = results[results.len() - k..].iter().map(|r| r.1).collect();
    let bottom_med = summarize(&bottom).unwrap().median;
    let top_med = summarize(&top).unwrap().median;
    let worst = results.iter().fold(0.0f64, |m, r| m.max(r.1));
    let elapsed = start.elapsed().as_secs_f64();
    let ok = top_med >= 5.0 * bottom_med && worst < 1e-1;
    criterion(
        11,
        "preparation complexity: top-tercile median >= 5x bottom, all < 1e-1",
        ok,
        &format!(
            "{} targets; tercile medians {bottom_med:.2e} -> {top_med:.2e} (ratio {:.1}), worst {worst:.2e}, {elapsed:.0}s",
            results.len(),
            top_med / bottom_med
        ),
    );
}
