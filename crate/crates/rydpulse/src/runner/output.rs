//! Output plumbing: JSON-lines appends with resume support, CSV tables with
//! provenance headers, and the run manifest.

use std::collections::HashSet;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::stats::record::EnsembleRecord;
use crate::Result;

/// Sample ids already present in a JSON-lines file (empty set if absent).
/// Unparseable trailing lines — a crashed partial write — are ignored, so a
/// resumed run recomputes them.
pub fn completed_sample_ids(path: &Path) -> Result<HashSet<u64>> {
    let mut done = HashSet::new();
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(done),
        Err(e) => return Err(e.into()),
    };
    for line in BufReader::new(file).lines() {
        let line = line?;
        if let Ok(v) = serde_json::from_str::<Value>(&line) {
            if let Some(id) = v.get("sample_id").and_then(Value::as_u64) {
                done.insert(id);
            }
        }
    }
    Ok(done)
}

/// Append records to a JSON-lines file, one write syscall per line so a crash
/// cannot interleave partial rows from this process.
pub fn append_jsonl(path: &Path, records: &[EnsembleRecord]) -> Result<()> {
    if records.is_empty() {
        return Ok(());
    }
    let mut file = OpenOptions::new().create(true).append(true).open(path)?;
    for r in records {
        let mut line = serde_json::to_string(r)?;
        line.push('\n');
        file.write_all(line.as_bytes())?;
    }
    file.sync_data()?;
    Ok(())
}

pub fn read_jsonl(path: &Path) -> Result<Vec<EnsembleRecord>> {
    let file = File::open(path)?;
    let mut out = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line?;
        if let Ok(r) = serde_json::from_str::<EnsembleRecord>(&line) {
            out.push(r);
        }
    }
    out.sort_by_key(|r| r.sample_id);
    Ok(out)
}

/// Provenance line written as the first row of every CSV artifact.
#[derive(Debug, Clone)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: u64,
    pub n_atoms: usize,
    pub d: Option<f64>,
    pub t_f: Option<f64>,
    pub m_segments: usize,
}

impl Provenance {
    fn header(&self) -> String {
        let fmt_opt = |v: Option<f64>| match v {
            Some(x) => format!("{x}"),
            None => "-".to_string(),
        };
        format!(
            "# config_hash={} seed={} N={} d={} T_f={} M={}",
            self.config_hash,
            self.seed,
            self.n_atoms,
            fmt_opt(self.d),
            fmt_opt(self.t_f),
            self.m_segments,
        )
    }
}

/// Write a CSV file: provenance comment, column header, rows. Overwrites.
pub fn write_csv(
    path: &Path,
    prov: &Provenance,
    columns: &[&str],
    rows: &[Vec<String>],
) -> Result<()> {
    let mut buf = String::new();
    buf.push_str(&prov.header());
    buf.push('\n');
    buf.push_str(&columns.join(","));
    buf.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), columns.len());
        buf.push_str(&row.join(","));
        buf.push('\n');
    }
    std::fs::write(path, buf)?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub config_hash: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub config_hash: String,
    pub master_seed: u64,
    pub kind: String,
    /// Wall-clock creation time, RFC 3339; the only non-deterministic field.
    pub created: String,
    pub artifacts: Vec<ManifestEntry>,
}

/// Collects artifact paths as they are produced and writes `manifest.json`.
pub struct ArtifactLog {
    out_dir: PathBuf,
    config_hash: String,
    paths: Vec<String>,
}

impl ArtifactLog {
    pub fn new(out_dir: &Path, config_hash: &str) -> Self {
        Self {
            out_dir: out_dir.to_path_buf(),
            config_hash: config_hash.to_string(),
            paths: Vec::new(),
        }
    }

    /// Resolve `name` under the output directory and record it.
    pub fn path(&mut self, name: &str) -> PathBuf {
        if !self.paths.iter().any(|p| p == name) {
            self.paths.push(name.to_string());
        }
        self.out_dir.join(name)
    }

    pub fn write_manifest(&self, master_seed: u64, kind: &str) -> Result<PathBuf> {
        let manifest = Manifest {
            config_hash: self.config_hash.clone(),
            master_seed,
            kind: kind.to_string(),
            created: rfc3339_now(),
            artifacts: self
                .paths
                .iter()
                .map(|p| ManifestEntry {
                    path: p.clone(),
                    config_hash: self.config_hash.clone(),
                })
                .collect(),
        };
        let path = self.out_dir.join("manifest.json");
        std::fs::write(&path, serde_json::to_string_pretty(&manifest)?)?;
        Ok(path)
    }
}

fn rfc3339_now() -> String {
    // seconds since the epoch is enough provenance; avoids a chrono dependency
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("unix:{secs}")
}

pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.12e}")
    } else {
        "nan".to_string()
    }
}
