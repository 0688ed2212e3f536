mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tcnot_core::{fit_threshold, lssa, run_experiment, CurvePoint, Error, LssaKind};

use config::Settings;
use output::Row;

#[derive(Parser)]
#[command(name = "tcnot", version, about = "Surface-code transversal CNOT and lattice-surgery simulations")]
struct Cli {
    /// Worker threads for sampling and decoding (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration and append a CSV row.
    Run(ExperimentArgs),
    /// Run every (d, p) point of a grid, skipping rows already in the output.
    Sweep(ExperimentArgs),
    /// Fit a finite-size-scaling threshold to a result CSV.
    Fit(FitArgs),
    /// Print an exact logical spacetime surface area and its ratio to identity.
    Lssa(LssaArgs),
}

#[derive(Args)]
struct ExperimentArgs {
    /// Flat `key = value` file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// scqm, 2scqm, tcnot, teleport or ls_xx.
    #[arg(long)]
    experiment: Option<String>,
    /// mwpm, single_update, ordered or teleport.
    #[arg(long)]
    decoder: Option<String>,
    /// Code distance; a comma list for sweeps.
    #[arg(long)]
    d: Option<String>,
    #[arg(long)]
    rounds: Option<String>,
    /// Physical error rate; a comma list or lo:hi:n for sweeps.
    #[arg(long)]
    p: Option<String>,
    /// circuit or phenomenological.
    #[arg(long)]
    noise_model: Option<String>,
    /// Fraction of gate faults that are heralded erasures.
    #[arg(long)]
    r_e: Option<String>,
    /// none, conventional or biased.
    #[arg(long)]
    erasure_kind: Option<String>,
    /// one or both.
    #[arg(long)]
    erasure_target: Option<String>,
    /// Lattice-surgery bridge width.
    #[arg(long)]
    b: Option<String>,
    #[arg(long)]
    shots: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Jackknife blocks.
    #[arg(long)]
    blocks: Option<String>,
    /// Result CSV (default: $TCNOT_OUTPUT_DIR/results.csv).
    #[arg(long)]
    output: Option<String>,
    /// Extra KEY=VALUE settings, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args)]
struct FitArgs {
    csv: PathBuf,
    /// JSON report path (default: <csv>.fit.json).
    #[arg(long)]
    report: Option<PathBuf>,
    /// Keep only rows of this experiment.
    #[arg(long)]
    experiment: Option<String>,
    #[arg(long)]
    decoder: Option<String>,
    #[arg(long)]
    noise_model: Option<String>,
    #[arg(long)]
    erasure_kind: Option<String>,
    #[arg(long)]
    r_e: Option<f64>,
}

#[derive(Args)]
struct LssaArgs {
    /// identity, xx_merge, ls_cnot, tcnot_ordered, ls_cnot_multi or tcnot_multi.
    #[arg(long)]
    kind: String,
    #[arg(long)]
    d: u32,
    #[arg(long, default_value_t = 1)]
    b: u32,
    /// Number of targets for the multi-target kinds.
    #[arg(long, default_value_t = 1)]
    n: u32,
}

enum Failure {
    Config(String),
    Fit(String),
    Runtime(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Runtime(_) => 1,
            Failure::Config(_) => 2,
            Failure::Fit(_) => 3,
        }
    }
}

impl ExperimentArgs {
    fn entries(&self, threads: Option<usize>) -> Result<Vec<(String, String)>, String> {
        let mut out = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
                config::parse_file(&text).map_err(|e| format!("{}: {e}", path.display()))?
            }
            None => Vec::new(),
        };
        let flags = [
            ("experiment", &self.experiment),
            ("decoder", &self.decoder),
            ("d", &self.d),
            ("rounds", &self.rounds),
            ("p", &self.p),
            ("noise_model", &self.noise_model),
            ("r_e", &self.r_e),
            ("erasure_kind", &self.erasure_kind),
            ("erasure_target", &self.erasure_target),
            ("b", &self.b),
            ("shots", &self.shots),
            ("seed", &self.seed),
            ("blocks", &self.blocks),
            ("output", &self.output),
        ];
        out.extend(flags.iter().filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone()))));
        for s in &self.set {
            out.push(config::parse_override(s)?);
        }
        if let Some(t) = threads {
            out.push(("threads".into(), t.to_string()));
        }
        Ok(out)
    }

    fn settings(&self, threads: Option<usize>) -> Result<Settings, Failure> {
        self.entries(threads).and_then(config::resolve).map_err(Failure::Config)
    }
}

fn install_pool(threads: Option<usize>) -> Result<(), Failure> {
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Runtime(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn cmd_run(args: &ExperimentArgs, threads: Option<usize>) -> Result<(), Failure> {
    let s = args.settings(threads)?;
    if s.ds.len() != 1 || s.ps.len() != 1 {
        return Err(Failure::Config("`run` takes a single d and p; use `sweep` for grids".into()));
    }
    install_pool(s.threads)?;
    let cfg = s.points().remove(0);
    let stats = run_experiment(&cfg).map_err(|e| Failure::Runtime(e.to_string()))?;
    let row = Row::from_stats(&stats);
    output::append_row(&s.output, &row).map_err(|e| Failure::Runtime(format!("{}: {e}", s.output.display())))?;
    output::append_sidecar(&s.output, "run", &s.entries, &cfg).map_err(Failure::Runtime)?;
    println!(
        "{} {} d={} p={} shots={} failures={} (x {}, z {}) p_L={:.6} 95% CI [{:.6}, {:.6}]{} in {:.1}s",
        row.experiment,
        row.decoder,
        row.d,
        row.p,
        row.shots,
        row.failures_total,
        row.failures_x,
        row.failures_z,
        row.p_l,
        row.ci_low,
        row.ci_high,
        if stats.low_statistics { " low-statistics" } else { "" },
        stats.wall_time_s
    );
    Ok(())
}

fn cmd_sweep(args: &ExperimentArgs, threads: Option<usize>) -> Result<(), Failure> {
    let s = args.settings(threads)?;
    install_pool(s.threads)?;
    let done = output::existing_keys(&s.output).map_err(Failure::Config)?;
    let points = s.points();
    let todo: Vec<_> = points.iter().filter(|c| !done.contains(&output::config_key(c))).collect();
    eprintln!("{} points, {} already present, writing {}", points.len(), points.len() - todo.len(), s.output.display());
    if !todo.is_empty() {
        output::append_sidecar(&s.output, "sweep", &s.entries, &s.base).map_err(Failure::Runtime)?;
    }
    for cfg in todo {
        let stats = run_experiment(cfg).map_err(|e| Failure::Runtime(e.to_string()))?;
        let row = Row::from_stats(&stats);
        output::append_row(&s.output, &row).map_err(|e| Failure::Runtime(format!("{}: {e}", s.output.display())))?;
        eprintln!("d={} p={} p_L={:.6} ({:.1}s)", row.d, row.p, row.p_l, stats.wall_time_s);
    }
    if s.output.exists() {
        let dat = output::write_gnuplot(&s.output).map_err(Failure::Runtime)?;
        eprintln!("gnuplot data in {}", dat.display());
    }
    Ok(())
}

fn cmd_fit(args: &FitArgs) -> Result<(), Failure> {
    let rows = output::read_rows(&args.csv).map_err(Failure::Config)?;
    let keep = |r: &Row| {
        args.experiment.as_ref().is_none_or(|e| &r.experiment == e)
            && args.decoder.as_ref().is_none_or(|e| &r.decoder == e)
            && args.noise_model.as_ref().is_none_or(|e| &r.noise_model == e)
            && args.erasure_kind.as_ref().is_none_or(|e| &r.erasure_kind == e)
            && args.r_e.is_none_or(|e| r.r_e == e)
    };
    let rows: Vec<Row> = rows.into_iter().filter(keep).collect();
    let mut families: Vec<String> = rows.iter().map(Row::family).collect();
    families.sort();
    families.dedup();
    match families.len() {
        0 => return Err(Failure::Fit("no rows to fit".into())),
        1 => {}
        _ => {
            return Err(Failure::Config(format!(
                "the CSV mixes {} curve families; select one with --experiment/--decoder/--noise-model/--erasure-kind/--r-e:\n  {}",
                families.len(),
                families.join("\n  ")
            )))
        }
    }
    let points: Vec<CurvePoint> = rows.iter().map(|r| CurvePoint { d: r.d, p: r.p, p_l: r.p_l, sigma: r.sigma() }).collect();
    let fit = fit_threshold(&points).map_err(|e| match e {
        Error::FitFailed(m) => Failure::Fit(m),
        other => Failure::Runtime(other.to_string()),
    })?;
    println!("{}", families[0]);
    println!("p_t = {:.5} ± {:.5}", fit.p_t, fit.p_t_err);
    if fit.nu_fixed {
        println!("nu = {} (fixed)", fit.nu);
    } else {
        println!("nu = {:.3} ± {:.3}", fit.nu, fit.nu_err);
    }
    println!("window = [{}, {}], distances = {:?}, chi2/dof = {:.2}/{}", fit.window.0, fit.window.1, fit.distances, fit.chi2, fit.dof);
    let report = args.report.clone().unwrap_or_else(|| output::with_suffix(&args.csv, ".fit.json"));
    let json = serde_json::json!({
        "source": args.csv,
        "family": families[0],
        "fit": fit,
    });
    let text = serde_json::to_string_pretty(&json).map_err(|e| Failure::Runtime(e.to_string()))?;
    std::fs::write(&report, text + "\n").map_err(|e| Failure::Runtime(format!("{}: {e}", report.display())))?;
    println!("report written to {}", report.display());
    Ok(())
}

fn cmd_lssa(args: &LssaArgs) -> Result<(), Failure> {
    let kind = LssaKind::parse(&args.kind, args.n).ok_or_else(|| Failure::Config(format!("unknown LSSA kind `{}`", args.kind)))?;
    let l = lssa(kind, args.d, args.b).map_err(|e| Failure::Config(e.to_string()))?;
    println!("area = {} d^2", l.area);
    println!("identity = {} d^2", l.identity);
    println!("ratio = {} ({:.6})", l.ratio, *l.ratio.numer() as f64 / *l.ratio.denom() as f64);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a, cli.threads),
        Command::Sweep(a) => cmd_sweep(a, cli.threads),
        Command::Fit(a) => cmd_fit(a),
        Command::Lssa(a) => cmd_lssa(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (label, msg) = match &f {
                Failure::Config(m) => ("configuration error", m),
                Failure::Fit(m) => ("fit failed", m),
                Failure::Runtime(m) => ("error", m),
            };
            eprintln!("tcnot: {label}: {msg}");
            ExitCode::from(f.code())
        }
    }
}
