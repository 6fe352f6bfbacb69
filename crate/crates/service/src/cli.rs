//! The `ieq` command line.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use ieq_core::alt_models::{Family, FitOptions, ScoringModel};
use ieq_core::diagnostics::{
    cross_partial_sign_map, default_ieq_inputs, ieq_function, monte_carlo_uncertainty,
    run_vuong_experiment, sobol_brute_force, sobol_total_effect, BruteForceOptions, DiagnosticReport,
    NoiseSpec, SignMapOptions, SobolOptions, VuongExperiment, VuongOptions, DEFAULT_SIGNMAP_STEP,
    DEFAULT_ZERO_TOL,
};
use ieq_core::portfolio::{
    generate_population, ingest_portfolio, persist_portfolio, score_portfolio, spearman,
    IngestOptions, InputFormat, PopulationSpec, DEFAULT_ERROR_BUDGET,
};
use ieq_core::{Error, OrganizationProfile, SectorPrior, SectorTable};
use serde::Serialize;
use serde_json::json;

use crate::config::{Config, ParamsOverride};
use crate::surface::{ieq_surface, DEFAULT_SURFACE_H, DEFAULT_SURFACE_M};

pub const ADDR_ENV: &str = "IEQ_ADDR";
pub const DEFAULT_ADDR: &str = "127.0.0.1:8080";

#[derive(Debug, Parser)]
#[command(name = "ieq", version, about = "Harvest-now-decrypt-later exposure scoring")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score a portfolio file.
    Score(ScoreArgs),
    /// Write the IEQ surface over the (V, E) square as CSV.
    Surface(SurfaceArgs),
    /// Run a specification diagnostic.
    Diagnose {
        #[command(subcommand)]
        which: Diagnose,
    },
    /// Generate and persist a synthetic portfolio.
    Simulate(SimulateArgs),
    /// Serve the HTTP API. The listen address comes from IEQ_ADDR.
    Serve {
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// JSON config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// JSON file with (partial) model parameters; overrides the config file.
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// JSON array of sector priors; overrides the config file.
    #[arg(long)]
    pub sectors: Option<PathBuf>,
    /// Reference year; defaults to the current year.
    #[arg(long)]
    pub t0: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long)]
    pub portfolio: PathBuf,
    /// Input format; guessed from the extension when omitted.
    #[arg(long, value_parser = parse_format)]
    pub format: Option<InputFormat>,
    #[command(flatten)]
    pub cfg: ConfigArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Recorded in the output; scoring itself is deterministic.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Reject the whole file when more than this share of rows is invalid.
    #[arg(long, default_value_t = DEFAULT_ERROR_BUDGET)]
    pub max_error_fraction: f64,
}

#[derive(Debug, Args)]
pub struct SurfaceArgs {
    #[arg(long, default_value_t = 21)]
    pub grid: usize,
    #[command(flatten)]
    pub cfg: ConfigArgs,
    #[arg(long = "H", alias = "h", default_value_t = DEFAULT_SURFACE_H)]
    pub h: f64,
    #[arg(long = "M", alias = "m", default_value_t = DEFAULT_SURFACE_M)]
    pub m: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub cfg: ConfigArgs,
}

#[derive(Debug, Subcommand)]
pub enum Diagnose {
    /// Sign map of the log cross-partial.
    Signmap {
        #[arg(long, default_value = "structural", value_parser = parse_family)]
        model: Family,
        #[arg(long, default_value_t = 64)]
        grid: usize,
        #[arg(long, default_value_t = DEFAULT_ZERO_TOL)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_SIGNMAP_STEP)]
        step: f64,
        /// Also write the map as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Structural vs CES on synthetic structural data.
    Vuong {
        #[arg(long, default_value_t = 5000)]
        n: usize,
        #[arg(long, default_value_t = 0.05)]
        noise: f64,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Total-effect indices of IEQ over V, E, T_D and M.
    Sobol {
        #[arg(long, default_value_t = 4096)]
        n: usize,
        #[arg(long, default_value_t = 200)]
        bootstrap: usize,
        /// Use the nested Monte Carlo estimator instead of pick-freeze.
        #[arg(long)]
        brute_force: bool,
        #[arg(long, default_value_t = 1000)]
        outer: usize,
        #[arg(long, default_value_t = 100)]
        inner: usize,
        #[arg(long, default_value = "generic")]
        sector: String,
        #[command(flatten)]
        common: Common,
    },
    /// Monte Carlo perturbation of one profile.
    Uncertainty {
        #[arg(long = "V")]
        v: f64,
        #[arg(long = "E")]
        e: f64,
        #[arg(long = "T_D")]
        t_d: f64,
        #[arg(long = "M", default_value_t = 1.0)]
        m: f64,
        #[arg(long, default_value = "generic")]
        sector: String,
        /// Relative sd applied to every input.
        #[arg(long, default_value_t = 0.05)]
        noise: f64,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub n: Option<usize>,
    /// JSON PopulationSpec; unspecified fields take defaults.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub t0: Option<f64>,
}

fn parse_format(s: &str) -> Result<InputFormat, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// A fatal error tagged with the flag or stage it came from.
#[derive(Debug)]
pub struct Fatal {
    pub context: String,
    pub error: Error,
}

fn ctx<T>(context: &str, r: ieq_core::Result<T>) -> Result<T, Fatal> {
    r.map_err(|error| Fatal { context: context.to_string(), error })
}

fn read_json<T: serde::de::DeserializeOwned>(flag: &str, path: &Path) -> Result<T, Fatal> {
    let text = ctx(flag, std::fs::read_to_string(path).map_err(|e| {
        Error::InvalidInput(format!("cannot read {}: {e}", path.display()))
    }))?;
    ctx(flag, serde_json::from_str(&text).map_err(Error::from))
}

impl ConfigArgs {
    pub fn resolve(&self) -> Result<Config, Fatal> {
        let mut cfg = match &self.config {
            Some(p) => ctx("--config", Config::load(p))?,
            None => Config::default(),
        };
        if let Some(p) = &self.params {
            let ov: ParamsOverride = read_json("--params", p)?;
            cfg.params = ctx("--params", ov.apply(&cfg.params))?;
        }
        if let Some(p) = &self.sectors {
            let priors: Vec<SectorPrior> = read_json("--sectors", p)?;
            cfg.sector_table = ctx("--sectors", SectorTable::from_priors(priors))?;
        }
        if let Some(t0) = self.t0 {
            if !t0.is_finite() {
                return ctx("--t0", Err(Error::InvalidInput("must be finite".into())));
            }
            cfg.t0 = Some(t0);
        }
        Ok(cfg)
    }
}

fn open_out(out: Option<&Path>) -> Result<Box<dyn Write>, Fatal> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(ctx("--out", File::create(p).map_err(Error::from))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), Fatal> {
    let mut w = open_out(out)?;
    ctx("--out", serde_json::to_writer_pretty(&mut w, value).map_err(Error::from))?;
    ctx("--out", writeln!(w).and_then(|_| w.flush()).map_err(Error::from))
}

fn run_score(args: &ScoreArgs) -> Result<i32, Fatal> {
    let cfg = args.cfg.resolve()?;
    let format = match args.format.or_else(|| InputFormat::from_path(&args.portfolio)) {
        Some(f) => f,
        None => {
            return ctx(
                "--format",
                Err(Error::InvalidInput("cannot infer format; pass --format csv|json".into())),
            )
        }
    };
    if !args.portfolio.exists() {
        return ctx(
            "--portfolio",
            Err(Error::InvalidInput(format!("{} does not exist", args.portfolio.display()))),
        );
    }
    let opts = IngestOptions { max_error_fraction: args.max_error_fraction, m_max: cfg.params.m_max };
    let ingested = ctx("--portfolio", ingest_portfolio(&args.portfolio, format, &opts))?;
    let t0 = cfg.t0();
    let batch = ctx(
        "score",
        score_portfolio(&ingested.portfolio, &cfg.params, &cfg.sector_table, t0, args.workers),
    )?;
    let partial = !ingested.rejected.is_empty() || !batch.errors.is_empty();
    emit_json(
        &json!({
            "t0": t0,
            "seed": args.seed,
            "params": cfg.params,
            "summary": batch.summary,
            "rejected": ingested.rejected,
            "row_errors": batch.errors,
            "reports": batch.reports,
        }),
        args.out.as_deref(),
    )?;
    if partial {
        eprintln!(
            "{}",
            json!({
                "warning": "partial",
                "rejected_rows": ingested.rejected.len(),
                "scoring_errors": batch.errors.len(),
                "scored": batch.summary.scored,
            })
        );
        Ok(2)
    } else {
        Ok(0)
    }
}

fn run_surface(args: &SurfaceArgs) -> Result<i32, Fatal> {
    let cfg = args.cfg.resolve()?;
    let s = ctx("surface", ieq_surface(args.grid, args.h, args.m, &cfg.params))?;
    let mut w = open_out(args.out.as_deref())?;
    ctx("--out", s.write_csv(&mut w))?;
    ctx("--out", w.flush().map_err(Error::from))?;
    Ok(0)
}

fn run_diagnose(which: &Diagnose) -> Result<i32, Fatal> {
    let (report, common) = match which {
        Diagnose::Signmap { model, grid, tol, step, csv, common } => {
            let cfg = common.cfg.resolve()?;
            let opts = SignMapOptions {
                grid_size: *grid,
                tol: *tol,
                h: *step,
                epsilon: cfg.params.epsilon,
            };
            let map = ctx("signmap", cross_partial_sign_map(&ScoringModel::default_for(*model), &opts))?;
            if let Some(p) = csv {
                let f = ctx("--csv", File::create(p).map_err(Error::from))?;
                ctx("--csv", map.write_csv(BufWriter::new(f)))?;
            }
            (DiagnosticReport::SignMap(map), common)
        }
        Diagnose::Vuong { n, noise, restarts, common } => {
            let cfg = common.cfg.resolve()?;
            let exp = VuongExperiment {
                n: *n,
                noise: *noise,
                seed: common.seed,
                fit: FitOptions { restarts: *restarts, ..FitOptions::default() },
                vuong: VuongOptions { z_crit: cfg.z_crit, ..VuongOptions::default() },
                ..VuongExperiment::default()
            };
            (DiagnosticReport::Vuong(ctx("vuong", run_vuong_experiment(&exp))?), common)
        }
        Diagnose::Sobol { n, bootstrap, brute_force, outer, inner, sector, common } => {
            let cfg = common.cfg.resolve()?;
            let prior = ctx("--sector", cfg.sector_table.get(sector).cloned())?;
            let f = ctx("sobol", ieq_function(cfg.params, prior, cfg.t0()))?;
            let inputs = default_ieq_inputs();
            let result = if *brute_force {
                let opts = BruteForceOptions {
                    n_outer: *outer,
                    n_inner: *inner,
                    seed: common.seed,
                    bootstrap: *bootstrap,
                    ..BruteForceOptions::default()
                };
                sobol_brute_force(&f, &inputs, &opts)
            } else {
                let opts = SobolOptions { n: *n, seed: common.seed, bootstrap: *bootstrap };
                sobol_total_effect(&f, &inputs, &opts)
            };
            (DiagnosticReport::Sobol(ctx("sobol", result)?), common)
        }
        Diagnose::Uncertainty { v, e, t_d, m, sector, noise, n, common } => {
            let cfg = common.cfg.resolve()?;
            let prior = ctx("--sector", cfg.sector_table.get(sector).cloned())?;
            let profile = OrganizationProfile {
                org_id: "cli".into(),
                v: *v,
                e: *e,
                t_d: *t_d,
                sector_id: sector.clone(),
                m: *m,
            };
            let r = monte_carlo_uncertainty(
                &profile,
                &cfg.params,
                &prior,
                cfg.t0(),
                &NoiseSpec::uniform(*noise),
                *n,
                common.seed,
            );
            (DiagnosticReport::Uncertainty(ctx("uncertainty", r)?), common)
        }
    };
    emit_json(&report, common.out.as_deref())?;
    Ok(0)
}

fn run_simulate(args: &SimulateArgs) -> Result<i32, Fatal> {
    let mut spec: PopulationSpec = match &args.spec {
        Some(p) => read_json("--spec", p)?,
        None => PopulationSpec::default(),
    };
    if let Some(n) = args.n {
        spec.n = n;
    }
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    let portfolio = ctx("simulate", generate_population(&spec))?;
    let cfg = Config::default();
    let t0 = args.t0.unwrap_or_else(|| cfg.t0());
    ctx("--out", persist_portfolio(&args.out, &portfolio, &[], &cfg.params, t0))?;
    let (v, e): (Vec<f64>, Vec<f64>) = portfolio.profiles.iter().map(|p| (p.v, p.e)).unzip();
    emit_json(
        &json!({
            "n": portfolio.len(),
            "seed": spec.seed,
            "spearman_ve": spearman(&v, &e).ok(),
            "path": args.out.display().to_string(),
        }),
        None,
    )?;
    Ok(0)
}

fn run_serve(config: Option<&Path>) -> Result<i32, Fatal> {
    let cfg = match config {
        Some(p) => ctx("--config", Config::load(p))?,
        None => Config::default(),
    };
    let addr = std::env::var(ADDR_ENV).unwrap_or_else(|_| DEFAULT_ADDR.to_string());
    let rt = ctx(
        "serve",
        tokio::runtime::Builder::new_multi_thread().enable_all().build().map_err(Error::from),
    )?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(&addr).await?;
        eprintln!("listening on {}", listener.local_addr()?);
        axum::serve(listener, crate::api::router(cfg)).await
    })
    .map_err(|e| Fatal { context: "serve".into(), error: Error::from(e) })?;
    Ok(0)
}

pub fn run(cli: &Cli) -> Result<i32, Fatal> {
    match &cli.command {
        Command::Score(a) => run_score(a),
        Command::Surface(a) => run_surface(a),
        Command::Diagnose { which } => run_diagnose(which),
        Command::Simulate(a) => run_simulate(a),
        Command::Serve { config } => run_serve(config.as_deref()),
    }
}

/// Parses `std::env::args`, runs, and returns the process exit code.
pub fn main() -> i32 {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(f) => {
            let fields = match &f.error {
                Error::Validation(fields) => serde_json::to_value(fields).unwrap_or_default(),
                _ => serde_json::Value::Null,
            };
            eprintln!(
                "{}",
                json!({ "error": { "context": f.context, "message": f.error.to_string(), "fields": fields } })
            );
            1
        }
    }
}
