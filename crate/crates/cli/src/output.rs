//! Result CSV, JSON sidecar and gnuplot data files.

use std::collections::{BTreeMap, HashSet};
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tcnot_core::{ExperimentConfig, ExperimentStats};

pub const HEADER: [&str; 15] = [
    "experiment",
    "decoder",
    "d",
    "p",
    "r_e",
    "erasure_kind",
    "noise_model",
    "shots",
    "failures_x",
    "failures_z",
    "failures_total",
    "p_l",
    "ci_low",
    "ci_high",
    "seed",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub experiment: String,
    pub decoder: String,
    pub d: usize,
    pub p: f64,
    pub r_e: f64,
    pub erasure_kind: String,
    pub noise_model: String,
    pub shots: u64,
    pub failures_x: u64,
    pub failures_z: u64,
    pub failures_total: u64,
    pub p_l: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
}

/// Columns that identify a configuration; a sweep skips points whose key
/// is already in the output.
pub type RowKey = (String, String, usize, u64, u64, String, String, u64, u64);

impl Row {
    pub fn from_stats(s: &ExperimentStats) -> Row {
        let c = &s.config;
        Row {
            experiment: c.experiment.name().into(),
            decoder: c.decoder.name().into(),
            d: c.d,
            p: c.p,
            r_e: c.r_e,
            erasure_kind: c.erasure_kind.name().into(),
            noise_model: c.noise_model.name().into(),
            shots: s.shots,
            failures_x: s.failures_x,
            failures_z: s.failures_z,
            failures_total: s.failures_total,
            p_l: s.p_l,
            ci_low: s.ci_low,
            ci_high: s.ci_high,
            seed: c.seed,
        }
    }

    pub fn key(&self) -> RowKey {
        (
            self.experiment.clone(),
            self.decoder.clone(),
            self.d,
            self.p.to_bits(),
            self.r_e.to_bits(),
            self.erasure_kind.clone(),
            self.noise_model.clone(),
            self.shots,
            self.seed,
        )
    }

    /// Identifies the curve family a row belongs to, ignoring `d` and `p`.
    pub fn family(&self) -> String {
        format!(
            "experiment={} decoder={} noise_model={} erasure_kind={} r_e={}",
            self.experiment, self.decoder, self.noise_model, self.erasure_kind, self.r_e
        )
    }

    /// One-sigma error implied by the 95% interval.
    pub fn sigma(&self) -> f64 {
        (self.ci_high - self.ci_low) / (2.0 * tcnot_core::analysis::Z95)
    }
}

pub fn config_key(c: &ExperimentConfig) -> RowKey {
    (
        c.experiment.name().into(),
        c.decoder.name().into(),
        c.d,
        c.p.to_bits(),
        c.r_e.to_bits(),
        c.erasure_kind.name().into(),
        c.noise_model.name().into(),
        c.shots,
        c.seed,
    )
}

pub fn read_rows(path: &Path) -> Result<Vec<Row>, String> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let header = reader.headers().map_err(|e| format!("{}: {e}", path.display()))?;
    if header.iter().ne(HEADER.iter().copied()) {
        return Err(format!("{}: unexpected header; expected {}", path.display(), HEADER.join(",")));
    }
    reader
        .deserialize()
        .enumerate()
        .map(|(i, r)| r.map_err(|e| format!("{}: row {}: {e}", path.display(), i + 2)))
        .collect()
}

/// Keys of rows already present in `path`, or nothing if it does not exist.
pub fn existing_keys(path: &Path) -> Result<HashSet<RowKey>, String> {
    if !path.exists() {
        return Ok(HashSet::new());
    }
    Ok(read_rows(path)?.iter().map(Row::key).collect())
}

/// Appends one row, writing the header first if the file is new or empty.
pub fn append_row(path: &Path, row: &Row) -> std::io::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let fresh = fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let file = OpenOptions::new().create(true).append(true).open(path)?;
    let mut w = csv::WriterBuilder::new().has_headers(fresh).from_writer(file);
    w.serialize(row)?;
    w.flush()
}

pub fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

#[derive(Serialize, Deserialize, Default)]
struct Sidecar {
    tool: String,
    version: String,
    invocations: Vec<serde_json::Value>,
}

/// Records the resolved configuration of an invocation next to the CSV.
pub fn append_sidecar(csv: &Path, command: &str, entries: &[(String, String)], config: &ExperimentConfig) -> Result<(), String> {
    let path = with_suffix(csv, ".json");
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    }
    let mut side: Sidecar = match fs::read_to_string(&path) {
        Ok(text) => serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?,
        Err(_) => Sidecar::default(),
    };
    side.tool = env!("CARGO_PKG_NAME").into();
    side.version = env!("CARGO_PKG_VERSION").into();
    let settings: BTreeMap<&str, &str> = entries.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect();
    side.invocations.push(serde_json::json!({
        "command": command,
        "settings": settings,
        "config": config,
    }));
    let text = serde_json::to_string_pretty(&side).map_err(|e| e.to_string())?;
    fs::write(&path, text + "\n").map_err(|e| format!("{}: {e}", path.display()))
}

/// Gnuplot data: one indexed block per (family, d) with columns
/// `p p_l ci_low ci_high`, blocks separated by two blank lines.
pub fn gnuplot(rows: &[Row]) -> String {
    let mut groups: BTreeMap<(String, usize), Vec<&Row>> = BTreeMap::new();
    for r in rows {
        groups.entry((r.family(), r.d)).or_default().push(r);
    }
    let mut out = String::new();
    for (i, ((family, d), mut rs)) in groups.into_iter().enumerate() {
        rs.sort_by(|a, b| a.p.total_cmp(&b.p));
        if i > 0 {
            out.push_str("\n\n");
        }
        out.push_str(&format!("# {family} d={d}\n# p p_l ci_low ci_high\n"));
        for r in rs {
            out.push_str(&format!("{} {} {} {}\n", r.p, r.p_l, r.ci_low, r.ci_high));
        }
    }
    out
}

pub fn write_gnuplot(csv: &Path) -> Result<PathBuf, String> {
    let path = csv.with_extension("dat");
    let rows = read_rows(csv)?;
    let mut f = fs::File::create(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    f.write_all(gnuplot(&rows).as_bytes()).map_err(|e| e.to_string())?;
    Ok(path)
}
