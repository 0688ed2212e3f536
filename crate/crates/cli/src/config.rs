//! Flat `key = value` configuration with command-line overrides.

use std::path::PathBuf;

use tcnot_core::noise::ErasureTarget;
use tcnot_core::{DecoderKind, ErasureKind, Experiment, ExperimentConfig, NoiseModel};

pub const KEYS: &[&str] = &[
    "experiment",
    "decoder",
    "d",
    "rounds",
    "p",
    "noise_model",
    "r_e",
    "erasure_kind",
    "erasure_target",
    "b",
    "shots",
    "seed",
    "blocks",
    "threads",
    "output",
];

pub const OUTPUT_DIR_ENV: &str = "TCNOT_OUTPUT_DIR";

/// A resolved invocation: one base configuration plus the sweep axes.
#[derive(Clone, Debug)]
pub struct Settings {
    pub base: ExperimentConfig,
    pub ds: Vec<usize>,
    pub ps: Vec<f64>,
    pub threads: Option<usize>,
    pub output: PathBuf,
    pub entries: Vec<(String, String)>,
}

impl Settings {
    /// Every grid point in sweep order (distance-major).
    pub fn points(&self) -> Vec<ExperimentConfig> {
        let mut out = Vec::with_capacity(self.ds.len() * self.ps.len());
        for &d in &self.ds {
            for &p in &self.ps {
                out.push(ExperimentConfig { d, p, ..self.base.clone() });
            }
        }
        out
    }
}

fn normalize(key: &str) -> String {
    key.trim().replace('-', "_")
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_file(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected `key = value`, got `{}`", n + 1, raw.trim()))?;
        out.push((normalize(k), v.trim().to_string()));
    }
    Ok(out)
}

/// Parses `KEY=VALUE` pairs given on the command line.
pub fn parse_override(s: &str) -> Result<(String, String), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("override `{s}` is not KEY=VALUE"))?;
    Ok((normalize(k), v.trim().to_string()))
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, String> {
    v.parse().map_err(|_| format!("`{key}`: cannot parse `{v}`"))
}

/// A comma list, or `lo:hi:n` for `n` evenly spaced values including both ends.
pub fn parse_grid(key: &str, v: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = v.split(':').collect();
    let grid = match parts.as_slice() {
        [lo, hi, n] => {
            let (lo, hi): (f64, f64) = (num(key, lo)?, num(key, hi)?);
            let n: usize = num(key, n)?;
            match n {
                0 => return Err(format!("`{key}`: grid needs at least one point")),
                1 => vec![lo],
                // rounded to 12 significant digits so grid values print cleanly
                _ => (0..n)
                    .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
                    .map(|x| format!("{x:.11e}").parse().unwrap())
                    .collect(),
            }
        }
        [_] => v.split(',').map(|x| num(key, x.trim())).collect::<Result<_, _>>()?,
        _ => return Err(format!("`{key}`: expected a comma list or lo:hi:n, got `{v}`")),
    };
    Ok(grid)
}

fn default_decoder(e: Experiment) -> DecoderKind {
    match e {
        Experiment::Tcnot => DecoderKind::Ordered,
        Experiment::Teleport => DecoderKind::Teleport,
        _ => DecoderKind::Mwpm,
    }
}

fn default_output() -> PathBuf {
    let dir = std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."));
    dir.join("results.csv")
}

/// Applies `entries` in order (later keys win) and validates every grid point.
pub fn resolve(entries: Vec<(String, String)>) -> Result<Settings, String> {
    let mut cfg = ExperimentConfig::default();
    let mut decoder = None;
    let mut ds = vec![cfg.d];
    let mut ps = vec![cfg.p];
    let mut threads = None;
    let mut output = None;
    for (k, v) in &entries {
        let v = v.as_str();
        match k.as_str() {
            "experiment" => cfg.experiment = Experiment::parse(v).ok_or_else(|| format!("unknown experiment `{v}`"))?,
            "decoder" => decoder = Some(DecoderKind::parse(v).ok_or_else(|| format!("unknown decoder `{v}`"))?),
            "d" => ds = v.split(',').map(|x| num("d", x.trim())).collect::<Result<_, _>>()?,
            "rounds" => cfg.rounds = Some(num(k, v)?),
            "p" => ps = parse_grid(k, v)?,
            "noise_model" => cfg.noise_model = NoiseModel::parse(v).ok_or_else(|| format!("unknown noise model `{v}`"))?,
            "r_e" => cfg.r_e = num(k, v)?,
            "erasure_kind" => cfg.erasure_kind = ErasureKind::parse(v).ok_or_else(|| format!("unknown erasure kind `{v}`"))?,
            "erasure_target" => {
                cfg.erasure_target = match v {
                    "one" => ErasureTarget::One,
                    "both" => ErasureTarget::Both,
                    _ => return Err(format!("unknown erasure target `{v}`")),
                }
            }
            "b" => cfg.b = num(k, v)?,
            "shots" => cfg.shots = num(k, v)?,
            "seed" => cfg.seed = num(k, v)?,
            "blocks" => cfg.blocks = num(k, v)?,
            "threads" => threads = Some(num::<usize>(k, v)?).filter(|&t| t > 0),
            "output" => output = Some(PathBuf::from(v)),
            _ => return Err(format!("unknown key `{k}` (known keys: {})", KEYS.join(", "))),
        }
    }
    cfg.decoder = decoder.unwrap_or_else(|| default_decoder(cfg.experiment));
    if ds.is_empty() || ps.is_empty() {
        return Err("empty sweep grid".into());
    }
    if cfg.shots == 0 {
        return Err("`shots` must be positive".into());
    }
    let settings = Settings { base: cfg, ds, ps, threads, output: output.unwrap_or_else(default_output), entries };
    for point in settings.points() {
        point.validate().map_err(|e| e.to_string())?;
    }
    Ok(settings)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kv(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn file_syntax() {
        let e = parse_file("# comment\nexperiment = tcnot\n\nnoise-model=circuit # trailing\n").unwrap();
        assert_eq!(e, kv(&[("experiment", "tcnot"), ("noise_model", "circuit")]));
        assert!(parse_file("d 3").is_err());
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("p", "0.1,0.2").unwrap(), vec![0.1, 0.2]);
        let g = parse_grid("p", "0.01:0.02:3").unwrap();
        assert_eq!(g.len(), 3);
        assert_eq!(g, vec![0.01, 0.015, 0.02]);
        assert_eq!(parse_grid("p", "0.006:0.012:5").unwrap()[2], 0.009);
        assert!(parse_grid("p", "1:2").is_err());
    }

    #[test]
    fn unknown_keys_and_bad_pairs_are_rejected() {
        assert!(resolve(kv(&[("shot", "10")])).unwrap_err().contains("unknown key"));
        assert!(resolve(kv(&[("experiment", "scqm"), ("decoder", "single_update")])).is_err());
        assert!(resolve(kv(&[("d", "4")])).is_err());
    }

    #[test]
    fn decoder_follows_experiment() {
        let s = resolve(kv(&[("experiment", "tcnot"), ("d", "3,5"), ("p", "0.001:0.002:5")])).unwrap();
        assert_eq!(s.base.decoder, DecoderKind::Ordered);
        assert_eq!(s.points().len(), 10);
    }
}
