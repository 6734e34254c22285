//! Experiment orchestration: config parsing and validation, seeding,
//! dispatch to the experiment kinds, and the output manifest.

pub mod experiments;
pub mod output;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::grape::config::GrapeConfig;
use crate::hamiltonian::{DEFAULT_C6, DEFAULT_DELTA_MAX, DEFAULT_OMEGA_MAX};
use crate::sector::SectorBasis;
use crate::stats::bipartition::{try_find_asymmetric_bipartition, Bipartition};
use crate::stats::entanglement::SmaxConvention;
use crate::{Error, Result};

use output::ArtifactLog;

/// Environment variable that overrides the config seed.
pub const SEED_ENV: &str = "RYDPULSE_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Ensemble,
    HaarBaseline,
    RatioStats,
    PorterThomas,
    Blockade,
    EtaPdf,
    GrapeBenchmark,
    GrapeStudy,
    BipartitionScan,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Ensemble => "ensemble",
            ExperimentKind::HaarBaseline => "haar-baseline",
            ExperimentKind::RatioStats => "ratio-stats",
            ExperimentKind::PorterThomas => "porter-thomas",
            ExperimentKind::Blockade => "blockade",
            ExperimentKind::EtaPdf => "eta-pdf",
            ExperimentKind::GrapeBenchmark => "grape-benchmark",
            ExperimentKind::GrapeStudy => "grape-study",
            ExperimentKind::BipartitionScan => "bipartition-scan",
        }
    }
}

fn default_n_atoms() -> usize {
    9
}
fn default_d() -> Vec<f64> {
    vec![10.0]
}
fn default_c6() -> f64 {
    DEFAULT_C6
}
fn default_m_segments() -> usize {
    30
}
fn default_t_f() -> Vec<f64> {
    vec![1.0, 7.4, 100.0]
}
fn default_omega_max() -> f64 {
    DEFAULT_OMEGA_MAX
}
fn default_delta_max() -> f64 {
    DEFAULT_DELTA_MAX
}
fn default_n_samples() -> usize {
    1000
}
fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_s_bins() -> usize {
    50
}
fn default_omega_bins() -> usize {
    60
}
fn default_trim() -> f64 {
    0.75
}
fn default_gamma() -> f64 {
    1e-2
}
fn default_delta_s() -> f64 {
    0.0309
}
fn default_n_targets() -> usize {
    10
}
fn default_n_restarts() -> usize {
    16
}
fn default_t_max() -> f64 {
    6.0
}
fn default_max_iters() -> usize {
    1500
}
fn default_target_d() -> f64 {
    10.0
}
fn default_prep_d() -> f64 {
    7.0
}
fn default_strat_bins() -> usize {
    10
}
fn default_per_bin() -> usize {
    3
}
fn default_eta_points() -> usize {
    400
}

/// Declarative experiment description, read from a JSON file. Every field
/// except `kind` has a default, so small configs stay small.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,

    // physical parameters
    #[serde(default = "default_n_atoms")]
    pub n_atoms: usize,
    /// Ring spacings d (um); grid experiments iterate over the list.
    #[serde(default = "default_d")]
    pub d: Vec<f64>,
    #[serde(default = "default_c6")]
    pub c6: f64,

    // pulse constraints
    #[serde(default = "default_m_segments")]
    pub m_segments: usize,
    /// Generation times T_f (us); grid experiments iterate over the list.
    #[serde(default = "default_t_f")]
    pub t_f: Vec<f64>,
    #[serde(default = "default_omega_max")]
    pub omega_max: f64,
    #[serde(default = "default_delta_max")]
    pub delta_max: f64,

    // sampling
    #[serde(default = "default_n_samples")]
    pub n_samples: usize,
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; default lets rayon decide. Output is identical either
    /// way.
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    /// Store per-sample rescaled Born probabilities in the record files.
    #[serde(default)]
    pub record_omegas: bool,

    // analysis options
    /// Subsystem-A site mask; default is the deterministic asymmetric search.
    #[serde(default)]
    pub bipartition_mask: Option<u32>,
    #[serde(default = "default_s_bins")]
    pub s_bins: usize,
    #[serde(default = "default_omega_bins")]
    pub omega_bins: usize,
    /// Central fraction of the log-spectrum kept for gap ratios.
    #[serde(default = "default_trim")]
    pub trim_fraction: f64,
    #[serde(default)]
    pub smax_convention: SmaxConvention,
    /// Success threshold on infidelity for the preparation study.
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    /// Entropy bin width for the success curve.
    #[serde(default = "default_delta_s")]
    pub delta_s: f64,

    // optimization (grape-benchmark, grape-study)
    #[serde(default = "default_n_targets")]
    pub n_targets: usize,
    #[serde(default = "default_n_restarts")]
    pub n_restarts: usize,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    /// Spacing at which study targets are generated.
    #[serde(default = "default_target_d")]
    pub target_d: f64,
    /// Spacing at which study targets are prepared.
    #[serde(default = "default_prep_d")]
    pub prep_d: f64,
    /// Entropy strata for target selection.
    #[serde(default = "default_strat_bins")]
    pub strat_bins: usize,
    /// Targets per stratum.
    #[serde(default = "default_per_bin")]
    pub per_bin: usize,

    /// Grid resolution of the eta pdf/cdf tables.
    #[serde(default = "default_eta_points")]
    pub eta_points: usize,
}

impl ExperimentConfig {
    /// Parse a config file; serde_json errors carry line/column positions.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: Self = serde_json::from_str(&text)
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        Ok(cfg)
    }

    /// Seed after the `RYDPULSE_SEED` environment override.
    pub fn resolved_seed(&self) -> u64 {
        match std::env::var(SEED_ENV) {
            Ok(v) => v.parse().unwrap_or(self.seed),
            Err(_) => self.seed,
        }
    }

    /// First 16 hex chars of the SHA-256 of the canonical serialization.
    /// Output location and worker count do not affect the data, so they are
    /// normalized out before hashing.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.out_dir = PathBuf::new();
        canonical.workers = None;
        let bytes = serde_json::to_vec(&canonical).expect("config serializes");
        let digest = Sha256::digest(&bytes);
        let mut out = String::new();
        for b in &digest[..8] {
            let _ = write!(out, "{b:02x}");
        }
        out
    }

    /// Default bipartition when no mask is configured: the deterministic
    /// asymmetric search, or the contiguous floor(N/2) half for ring sizes
    /// where no symmetry-free subset exists (N = 5, 6, 8 and below 5).
    pub fn bipartition(&self) -> Result<Bipartition> {
        match self.bipartition_mask {
            Some(mask) => Bipartition::new(mask, self.n_atoms),
            None => match try_find_asymmetric_bipartition(self.n_atoms) {
                Some(part) => Ok(part),
                None => Bipartition::new((1u32 << (self.n_atoms / 2)) - 1, self.n_atoms),
            },
        }
    }

    /// The optimizer configuration for the grape experiment kinds.
    pub fn grape_config(&self) -> GrapeConfig {
        GrapeConfig {
            m_segments: self.m_segments,
            t_max: self.t_max,
            omega_max: self.omega_max,
            delta_max: self.delta_max,
            n_restarts: self.n_restarts,
            max_iters: self.max_iters,
            ..GrapeConfig::default()
        }
    }

    /// Range and consistency checks plus the resolved-defaults report.
    pub fn validate(&self) -> ValidationReport {
        let mut rep = ValidationReport::default();
        let err = |rep: &mut ValidationReport, m: String| rep.errors.push(m);
        let warn = |rep: &mut ValidationReport, m: String| rep.warnings.push(m);

        if self.n_atoms < 3 {
            err(&mut rep, format!("n_atoms = {} (need >= 3)", self.n_atoms));
        }
        if self.n_atoms > 16 {
            err(
                &mut rep,
                format!("n_atoms = {} (full-space analysis capped at 16)", self.n_atoms),
            );
        }
        if self.d.is_empty() {
            err(&mut rep, "d list is empty".into());
        }
        for &d in &self.d {
            if !(d > 0.0) {
                err(&mut rep, format!("d = {d} um (must be positive)"));
            } else if !(5.0..=10.0).contains(&d) {
                warn(
                    &mut rep,
                    format!("d = {d} um is outside the studied band [5, 10] um"),
                );
            }
        }
        if !(self.c6 > 0.0) {
            err(&mut rep, format!("c6 = {} (must be positive)", self.c6));
        }
        if self.m_segments < 1 {
            err(&mut rep, "m_segments must be >= 1".into());
        }
        if self.t_f.is_empty() {
            err(&mut rep, "t_f list is empty".into());
        }
        for &t in &self.t_f {
            if !(t > 0.0) {
                err(&mut rep, format!("T_f = {t} us (must be positive)"));
            }
        }
        if self.omega_max < 0.0 {
            err(&mut rep, format!("omega_max = {} (must be >= 0)", self.omega_max));
        }
        if self.delta_max < 0.0 {
            err(&mut rep, format!("delta_max = {} (must be >= 0)", self.delta_max));
        }
        if self.n_samples < 1 {
            err(&mut rep, "n_samples must be >= 1".into());
        }
        if !(self.trim_fraction > 0.0 && self.trim_fraction <= 1.0) {
            err(
                &mut rep,
                format!("trim_fraction = {} (need 0 < f <= 1)", self.trim_fraction),
            );
        }
        if self.s_bins == 0 || self.omega_bins == 0 {
            err(&mut rep, "bin counts must be >= 1".into());
        }
        if self.gamma < 0.0 {
            err(&mut rep, format!("gamma = {} (must be >= 0)", self.gamma));
        }
        if !(self.delta_s > 0.0) {
            err(&mut rep, format!("delta_s = {} (must be > 0)", self.delta_s));
        }
        if matches!(
            self.kind,
            ExperimentKind::GrapeBenchmark | ExperimentKind::GrapeStudy
        ) {
            if self.n_targets < 1 {
                err(&mut rep, "n_targets must be >= 1".into());
            }
            if self.n_restarts < 1 {
                err(&mut rep, "n_restarts must be >= 1".into());
            }
            if !(self.t_max > 0.0) {
                err(&mut rep, format!("t_max = {} (must be > 0)", self.t_max));
            }
            if self.m_segments < 2 {
                err(&mut rep, "m_segments must be >= 2 for optimization".into());
            }
            for &d in &[self.target_d, self.prep_d] {
                if !(d > 0.0) {
                    err(&mut rep, format!("grape spacing {d} um (must be positive)"));
                }
            }
        }
        if let Some(mask) = self.bipartition_mask {
            if Bipartition::new(mask, self.n_atoms).is_err() {
                err(
                    &mut rep,
                    format!("bipartition_mask {mask:#b} is not a proper subset of {} sites", self.n_atoms),
                );
            }
        }

        if rep.errors.is_empty() {
            let grape = self.grape_config();
            let mask = self
                .bipartition()
                .map(|p| format!("{:#b}", p.site_mask))
                .unwrap_or_else(|_| "invalid".into());
            rep.resolved = vec![
                format!("config_hash = {}", self.hash()),
                format!("seed = {} (env {SEED_ENV} overrides)", self.resolved_seed()),
                format!("c6 = {} rad us^-1 um^6", self.c6),
                format!("bipartition mask = {mask}"),
                format!("smax_convention = {:?}", self.smax_convention),
                format!(
                    "grape: alpha = {}, a1 = {}, a2 = {}, a3 = {}, grad_tol = {}",
                    grape.alpha, grape.a1, grape.a2, grape.a3, grape.grad_tol
                ),
            ];
        }
        rep
    }
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
    /// Resolved defaults, printed by `rydpulse validate`.
    pub resolved: Vec<String>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.errors.is_empty()
    }
}

/// Shared state for one run: resolved seed, config hash, cached sector basis,
/// bipartition, and the artifact log.
pub struct RunContext {
    pub config: ExperimentConfig,
    pub seed: u64,
    pub hash: String,
    pub basis: SectorBasis,
    pub bipartition: Bipartition,
    pub log: ArtifactLog,
    pub resume: bool,
}

/// Load the basis from `sector_N{N}.json` under `out_dir` when present;
/// otherwise compute it and write the cache.
pub fn cached_basis(n_atoms: usize, out_dir: &Path) -> Result<SectorBasis> {
    let probe = SectorBasis::dihedral_orbits(n_atoms)?;
    let path = out_dir.join(probe.cache_file_name());
    if let Ok(text) = std::fs::read_to_string(&path) {
        let cached = SectorBasis::from_json(&text)?;
        if cached.n_atoms() == n_atoms {
            return Ok(cached);
        }
    }
    std::fs::write(&path, probe.to_json()?)?;
    Ok(probe)
}

/// Run the experiment; returns the manifest path.
pub fn run(config: ExperimentConfig, resume: bool) -> Result<PathBuf> {
    let report = config.validate();
    if !report.ok() {
        return Err(Error::InvalidConfig(report.errors.join("; ")));
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    std::fs::create_dir_all(&config.out_dir)?;
    let seed = config.resolved_seed();
    let hash = config.hash();
    let basis = cached_basis(config.n_atoms, &config.out_dir)?;
    let bipartition = config.bipartition()?;
    let mut ctx = RunContext {
        seed,
        hash: hash.clone(),
        log: ArtifactLog::new(&config.out_dir, &hash),
        basis,
        bipartition,
        resume,
        config,
    };
    // record the basis cache as an artifact
    let cache_name = ctx.basis.cache_file_name();
    let _ = ctx.log.path(&cache_name);

    let workers = ctx.config.workers;
    let mut body = || -> Result<()> {
        match ctx.config.kind {
            ExperimentKind::Ensemble => experiments::ensemble(&mut ctx),
            ExperimentKind::HaarBaseline => experiments::haar_baseline(&mut ctx),
            ExperimentKind::RatioStats => experiments::ratio_stats(&mut ctx),
            ExperimentKind::PorterThomas => experiments::porter_thomas(&mut ctx),
            ExperimentKind::Blockade => experiments::blockade(&mut ctx),
            ExperimentKind::EtaPdf => experiments::eta_pdf(&mut ctx),
            ExperimentKind::GrapeBenchmark => experiments::grape_benchmark(&mut ctx),
            ExperimentKind::GrapeStudy => experiments::grape_study(&mut ctx),
            ExperimentKind::BipartitionScan => experiments::bipartition_scan(&mut ctx),
        }
    };
    match workers {
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))?;
            pool.install(body)?;
        }
        None => body()?,
    }
    ctx.log.write_manifest(seed, ctx.config.kind.name())
}
