use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nalgebra::DVector;
use num_complex::Complex64;
use serde::Deserialize;

use rydpulse::blockade::{characteristic_distance, EtaModel};
use rydpulse::grape::optimize::{optimize, TargetMeta};
use rydpulse::hamiltonian::{
    build_sector_operators, PhysicalParams, DEFAULT_C6, DEFAULT_DELTA_MAX, DEFAULT_OMEGA_MAX,
};
use rydpulse::runner::{cached_basis, run, ExperimentConfig};
use rydpulse::state::{BasisTag, StateVector};

#[derive(Parser)]
#[command(name = "rydpulse", version, about = "Random-pulse state generation and fixed-time state preparation on Rydberg-Ising rings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a JSON config file.
    Run {
        config: PathBuf,
        /// Skip sample ids already present in the output record files.
        #[arg(long)]
        resume: bool,
    },
    /// Check a config file and print the resolved defaults.
    Validate { config: PathBuf },
    /// Print the analytic (eta, pdf, cdf) grid for a ring spacing, as CSV.
    Eta {
        /// Ring spacing in um.
        #[arg(long)]
        d: f64,
        #[arg(long, default_value_t = DEFAULT_OMEGA_MAX)]
        omega_max: f64,
        #[arg(long, default_value_t = DEFAULT_DELTA_MAX)]
        delta_max: f64,
        #[arg(long, default_value_t = DEFAULT_C6)]
        c6: f64,
        #[arg(long, default_value_t = 400)]
        points: usize,
    },
    /// Optimize a pulse sequence that prepares a target sector state.
    Grape {
        /// Target state file: {"n_atoms": N, "amplitudes": [[re, im], ...]}.
        #[arg(long)]
        target: PathBuf,
        /// Ring spacing (um) of the preparation dynamics.
        #[arg(long, default_value_t = 7.0)]
        d: f64,
        #[arg(long, default_value_t = 6.0)]
        t_max: f64,
        #[arg(long, default_value_t = 30)]
        m_segments: usize,
        #[arg(long, default_value_t = 16)]
        restarts: usize,
        #[arg(long, default_value_t = 500)]
        max_iters: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the result JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// On-disk target format for `rydpulse grape`.
#[derive(Deserialize)]
struct TargetFile {
    n_atoms: usize,
    /// Sector-basis amplitudes as [re, im] pairs.
    amplitudes: Vec<[f64; 2]>,
    #[serde(default)]
    target_id: u64,
    #[serde(default)]
    normalized_entropy: Option<f64>,
    #[serde(default)]
    generation_t_f: Option<f64>,
}

fn cmd_run(config: PathBuf, resume: bool) -> anyhow::Result<()> {
    let cfg = ExperimentConfig::from_file(&config)?;
    let manifest = run(cfg, resume)?;
    println!("wrote {}", manifest.display());
    Ok(())
}

fn cmd_validate(config: PathBuf) -> anyhow::Result<bool> {
    let cfg = ExperimentConfig::from_file(&config)?;
    let report = cfg.validate();
    for e in &report.errors {
        eprintln!("error: {e}");
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    for line in &report.resolved {
        println!("{line}");
    }
    Ok(report.ok())
}

fn cmd_eta(d: f64, omega_max: f64, delta_max: f64, c6: f64, points: usize) -> anyhow::Result<()> {
    anyhow::ensure!(d > 0.0, "d must be positive, got {d}");
    let v = c6 / d.powi(6); // nearest-neighbor pair interaction on the ring
    let model = EtaModel::new(v, omega_max, delta_max)?;
    let d_tilde = characteristic_distance(c6, omega_max, delta_max);
    println!(
        "# d={d} V={v:.6e} case={:?} eta_minus={:.6e} eta_plus={:.6e} d_tilde={d_tilde:.4}",
        model.case, model.eta_minus, model.eta_plus
    );
    println!("eta,pdf,cdf");
    let eta_hi = if model.eta_plus.is_finite() {
        1.25 * model.eta_plus
    } else {
        50.0 * model.eta_minus
    };
    for i in 0..=points {
        let eta = eta_hi * i as f64 / points as f64;
        println!("{eta:.9e},{:.9e},{:.9e}", model.pdf(eta)?, model.cdf(eta)?);
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_grape(
    target: PathBuf,
    d: f64,
    t_max: f64,
    m_segments: usize,
    restarts: usize,
    max_iters: usize,
    seed: u64,
    out: Option<PathBuf>,
) -> anyhow::Result<()> {
    let text = std::fs::read_to_string(&target)?;
    let spec: TargetFile = serde_json::from_str(&text)
        .map_err(|e| anyhow::anyhow!("{}: {e}", target.display()))?;
    let basis = cached_basis(
        spec.n_atoms,
        target.parent().unwrap_or_else(|| std::path::Path::new(".")),
    )?;
    anyhow::ensure!(
        spec.amplitudes.len() == basis.dim(),
        "target has {} amplitudes but the N={} sector has dimension {}",
        spec.amplitudes.len(),
        spec.n_atoms,
        basis.dim()
    );
    let amps = DVector::from_iterator(
        spec.amplitudes.len(),
        spec.amplitudes.iter().map(|&[re, im]| Complex64::new(re, im)),
    );
    let state = StateVector::new(amps, BasisTag::Sector, spec.n_atoms);

    let geometry = rydpulse::geometry::RingGeometry::build(spec.n_atoms, d)?;
    let params = PhysicalParams::new(DEFAULT_C6, geometry)?;
    let ops = build_sector_operators(&basis, &params)?;
    let config = rydpulse::grape::config::GrapeConfig {
        m_segments,
        t_max,
        n_restarts: restarts,
        max_iters,
        ..Default::default()
    };
    let meta = TargetMeta {
        target_id: spec.target_id,
        normalized_entropy: spec.normalized_entropy,
        generation_t_f: spec.generation_t_f,
    };
    let seed = match std::env::var(rydpulse::runner::SEED_ENV) {
        Ok(v) => v.parse().unwrap_or(seed),
        Err(_) => seed,
    };
    let result = optimize(&state, meta, &config, &ops, seed)?;
    eprintln!(
        "best infidelity {:.3e} over {} restarts, t_opt = {:.4} us",
        result.best_infidelity,
        result.restarts.len(),
        result.t_opt
    );
    let json = serde_json::to_string_pretty(&result)?;
    match out {
        Some(path) => std::fs::write(path, json)?,
        None => println!("{json}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { config, resume } => cmd_run(config, resume).map(|_| true),
        Command::Validate { config } => cmd_validate(config),
        Command::Eta {
            d,
            omega_max,
            delta_max,
            c6,
            points,
        } => cmd_eta(d, omega_max, delta_max, c6, points).map(|_| true),
        Command::Grape {
            target,
            d,
            t_max,
            m_segments,
            restarts,
            max_iters,
            seed,
            out,
        } => cmd_grape(target, d, t_max, m_segments, restarts, max_iters, seed, out).map(|_| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
