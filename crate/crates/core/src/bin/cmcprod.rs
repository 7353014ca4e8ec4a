//! Command-line driver.
//!
//! Exit codes: 0 success, 1 verification failure, 2 invalid input,
//! 3 numerical or I/O failure.

use clap::{Args, Parser, Subcommand};
use cmcprod::cli::{
    self, BoundsConfig, FiguresConfig, GenerateConfig, OutputFormat, VerifyConfig, OUT_DIR_ENV,
};
use cmcprod::estimates::EstimateParams;
use cmcprod::Error;
use std::collections::HashMap;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "cmcprod",
    about = "Invariant CMC surfaces in product spaces and their sharp boundary estimates",
    version
)]
struct Cli {
    /// Optional config file with `key = value` lines; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a generating curve and its pointwise geometry.
    Generate(GenerateArgs),
    /// Run the verification suite for one family.
    Verify(VerifyArgs),
    /// Evaluate the sharp estimates for one parameter set.
    Bounds(BoundsArgs),
    /// Emit the profile-figure data bundles.
    Figures(FiguresArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Family tag (rot-sphere-h2, rot-sphere-s2, rot-torus-s2,
    /// rot-general-s2, hyp-cylinder, hyp-general, parabolic,
    /// euclidean-sphere, euclidean-cylinder).
    #[arg(long)]
    family: Option<String>,
    #[arg(long = "mean-curvature", short = 'H')]
    mean_curvature: Option<f64>,
    /// First-integral constant for rot-general-s2.
    #[arg(long, allow_hyphen_values = true)]
    c0: Option<f64>,
    /// Energy for hyp-general.
    #[arg(long, allow_hyphen_values = true)]
    energy: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Output format: json (default) or csv.
    #[arg(long)]
    format: Option<String>,
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    family: Option<String>,
    #[arg(long = "mean-curvature", short = 'H')]
    mean_curvature: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    c0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    energy: Option<f64>,
    /// Interior lattice size for the CMC residual sweep.
    #[arg(long)]
    grid: Option<usize>,
    /// Replace every check tolerance with this value.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Write the JSON report here (default: stdout).
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BoundsArgs {
    /// Base curvature bound c.
    #[arg(long, short = 'c', allow_hyphen_values = true)]
    c: Option<f64>,
    #[arg(long = "mean-curvature", short = 'H')]
    mean_curvature: Option<f64>,
    /// Boundary angle nu0 in (-1, 0].
    #[arg(long, allow_hyphen_values = true)]
    nu0: Option<f64>,
    /// Height fraction m in (0, 1/2] for the restricted bound.
    #[arg(long = "height-fraction", short = 'm')]
    height_fraction: Option<f64>,
    /// Interior height for the distance bound.
    #[arg(long)]
    height: Option<f64>,
    /// Output format: human (default) or json.
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args)]
struct FiguresArgs {
    /// Output directory (default: $CMCPROD_OUT_DIR or the working dir).
    #[arg(long = "output-dir")]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    samples: Option<usize>,
}

fn read_config(path: &PathBuf) -> Result<HashMap<String, String>, Error> {
    let text = std::fs::read_to_string(path)?;
    let mut map = HashMap::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::InvalidInput(format!("config line without '=': {line}"))
        })?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn merge<T: std::str::FromStr>(cli: Option<T>, file: Option<&String>) -> Result<Option<T>, Error>
where
    T::Err: std::fmt::Display,
{
    if cli.is_some() {
        return Ok(cli);
    }
    match file {
        Some(s) => s
            .parse()
            .map(Some)
            .map_err(|e| Error::InvalidInput(format!("config value '{s}': {e}"))),
        None => Ok(None),
    }
}

fn out_dir_default() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."))
}

fn resolve_output(path: Option<PathBuf>) -> Option<PathBuf> {
    path.map(|p| {
        if p.is_relative() {
            if let Some(dir) = std::env::var_os(OUT_DIR_ENV) {
                return PathBuf::from(dir).join(p);
            }
        }
        p
    })
}

fn run(cli: Cli) -> Result<i32, Error> {
    let file_cfg = match &cli.config {
        Some(p) => read_config(p)?,
        None => HashMap::new(),
    };
    let get = |k: &str| file_cfg.get(k);

    match cli.command {
        Command::Generate(args) => {
            let family_tag = merge(args.family, get("family"))?
                .ok_or_else(|| Error::InvalidInput("--family is required".into()))?;
            let h = merge(args.mean_curvature, get("mean-curvature"))?
                .ok_or_else(|| Error::InvalidInput("--mean-curvature is required".into()))?;
            let c0 = merge(args.c0, get("c0"))?;
            let energy = merge(args.energy, get("energy"))?;
            let samples = merge(args.samples, get("samples"))?.unwrap_or(256);
            let format: OutputFormat = merge(args.format, get("format"))?
                .map(|s: String| s.parse())
                .transpose()?
                .unwrap_or(OutputFormat::Json);
            let family = cli::parse_family(&family_tag, h, c0, energy)?;
            let out = cli::run_generate(&GenerateConfig { family, samples, format })?;
            let text = cli::render_generate(&out, format);
            cli::emit(&text, resolve_output(args.output).as_deref(), &mut std::io::stdout())?;
            Ok(0)
        }
        Command::Verify(args) => {
            let family_tag = merge(args.family, get("family"))?
                .ok_or_else(|| Error::InvalidInput("--family is required".into()))?;
            let h = merge(args.mean_curvature, get("mean-curvature"))?
                .ok_or_else(|| Error::InvalidInput("--mean-curvature is required".into()))?;
            let c0 = merge(args.c0, get("c0"))?;
            let energy = merge(args.energy, get("energy"))?;
            let grid = merge(args.grid, get("grid"))?.unwrap_or(32);
            let tolerance = merge(args.tolerance, get("tolerance"))?;
            let family = cli::parse_family(&family_tag, h, c0, energy)?;
            let report = cli::run_verify(&VerifyConfig {
                family,
                grid,
                tolerance_override: tolerance,
            })?;
            let text = cli::render_report(&report);
            cli::emit(&text, resolve_output(args.output).as_deref(), &mut std::io::stdout())?;
            for c in &report.checks {
                eprintln!(
                    "{:24} expected {:.6e} actual {:.6e} tol {:.1e} {}",
                    c.name,
                    c.expected,
                    c.actual,
                    c.tolerance,
                    if c.pass { "pass" } else { "FAIL" }
                );
            }
            Ok(if report.pass { 0 } else { 1 })
        }
        Command::Bounds(args) => {
            let c = merge(args.c, get("c"))?
                .ok_or_else(|| Error::InvalidInput("-c is required".into()))?;
            let h = merge(args.mean_curvature, get("mean-curvature"))?
                .ok_or_else(|| Error::InvalidInput("-H is required".into()))?;
            let nu0 = merge(args.nu0, get("nu0"))?.unwrap_or(0.0);
            let m = merge(args.height_fraction, get("height-fraction"))?;
            let height = merge(args.height, get("height"))?;
            let json = matches!(
                merge(args.format, get("format"))?.as_deref(),
                Some("json")
            );
            let mut params = EstimateParams::new(c, h, nu0)?;
            if let Some(m) = m {
                params = params.with_height_fraction(m)?;
            }
            let rec = cli::run_bounds(&BoundsConfig { params, height })?;
            print!("{}", cli::render_bounds(&rec, json));
            Ok(0)
        }
        Command::Figures(args) => {
            let out_dir = merge(args.output_dir, get("output-dir"))?.unwrap_or_else(out_dir_default);
            let samples = merge(args.samples, get("samples"))?.unwrap_or(256);
            let written = cli::run_figures(&FiguresConfig { out_dir, samples })?;
            for p in written {
                println!("{}", p.display());
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
