use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use scalefree::atlas::{compute_atlas, Window};
use scalefree::bound::f_bound;
use scalefree::chain::FrequencyGrid;
use scalefree::design::DesignProblem;
use scalefree::platoon::{simulate_with, PlatoonConfig, SimulationOptions};
use scalefree::ratfun::{ExtendedComplex, RationalFunction};
use scalefree::VERSION;

use crate::output::{self, AtlasResponse, BoundResponse, CurveResponse, SimulationResponse};
use crate::service::{self, ServiceConfig};

#[derive(Debug, Parser)]
#[command(
    name = "scalefree",
    version,
    about = "Scale-free disturbance-suppression tools for mass chains and platoons"
)]
pub struct Cli {
    /// Log more (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// f(z) at a point, or f(h(jw)) along a frequency grid.
    Bound(BoundArgs),
    /// Weighted bound |W| f(h) for a design problem file.
    DesignCheck(DesignCheckArgs),
    /// Time-domain platoon simulation from a config file.
    Simulate(SimulateArgs),
    /// Rasterise f, g_n and eps_n over a window.
    Atlas(AtlasArgs),
    /// Run the JSON service.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    /// Point `RE,IM`, or `inf`.
    #[arg(
        long,
        allow_hyphen_values = true,
        required_unless_present = "h",
        conflicts_with = "h"
    )]
    pub z: Option<String>,
    /// Rational function JSON file; prints the f(h(jw)) curve as CSV.
    #[arg(long)]
    pub h: Option<PathBuf>,
    /// Log grid `MIN,MAX,POINTS`, plus w = 0 and w = inf.
    #[arg(long, allow_hyphen_values = true, default_value = "1e-4,1e4,2000")]
    pub grid: String,
    /// Print JSON instead of text or CSV.
    #[arg(long)]
    pub json: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DesignCheckArgs {
    pub problem: PathBuf,
    /// Write the curve CSV here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print the full JSON report instead of the summary.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    pub config: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Keep every integration step instead of decimating to 10^4 points.
    #[arg(long)]
    pub raw: bool,
}

#[derive(Debug, Args)]
pub struct AtlasArgs {
    /// `RE_MIN,RE_MAX,IM_MIN,IM_MAX`.
    #[arg(long, allow_hyphen_values = true, default_value = "-8,4,-6,6")]
    pub window: String,
    /// Cells per side `N`, or `NX,NY`.
    #[arg(long, default_value = "400")]
    pub res: String,
    /// Iteration count for g_n.
    #[arg(long, default_value_t = 1_000_000)]
    pub n_iter: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub bind: String,
    /// Directory with the UI's built assets.
    #[arg(long)]
    pub static_dir: Option<PathBuf>,
    /// Largest atlas the service computes.
    #[arg(long, default_value_t = service::DEFAULT_CELL_CAP)]
    pub cell_cap: usize,
}

fn numbers(text: &str, what: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .with_context(|| format!("{what}: cannot parse {s:?} as a number"))
        })
        .collect()
}

pub fn parse_point(text: &str) -> Result<ExtendedComplex> {
    if text.trim().eq_ignore_ascii_case("inf") {
        return Ok(ExtendedComplex::Infinity);
    }
    match numbers(text, "--z")?.as_slice() {
        [re, im] if re.is_finite() && im.is_finite() => Ok(ExtendedComplex::new(*re, *im)),
        _ => bail!("--z expects RE,IM or inf, got {text:?}"),
    }
}

pub fn parse_grid(text: &str) -> Result<FrequencyGrid> {
    match numbers(text, "--grid")?.as_slice() {
        [lo, hi, n] if *n >= 2.0 && n.fract() == 0.0 => Ok(FrequencyGrid::log_spaced(
            *lo,
            *hi,
            *n as usize,
            true,
            true,
        )?),
        _ => bail!("--grid expects MIN,MAX,POINTS, got {text:?}"),
    }
}

pub fn parse_window(text: &str) -> Result<Window> {
    match numbers(text, "--window")?.as_slice() {
        [a, b, c, d] => {
            let w = Window {
                re_range: [*a, *b],
                im_range: [*c, *d],
            };
            w.validate()?;
            Ok(w)
        }
        _ => bail!("--window expects RE_MIN,RE_MAX,IM_MIN,IM_MAX, got {text:?}"),
    }
}

pub fn parse_resolution(text: &str) -> Result<(usize, usize)> {
    let parts: Vec<&str> = text.split(',').collect();
    let parse = |s: &str| {
        s.trim()
            .parse::<usize>()
            .with_context(|| format!("--res: cannot parse {s:?}"))
    };
    match parts.as_slice() {
        [n] => {
            let n = parse(n)?;
            Ok((n, n))
        }
        [x, y] => Ok((parse(x)?, parse(y)?)),
        _ => bail!("--res expects N or NX,NY, got {text:?}"),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let at = e.path().to_string();
        anyhow::anyhow!("{}: at `{at}`: {}", path.display(), e.into_inner())
    })
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(stdout.flush()?)
        }
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Bound(a) => bound(a),
        Command::DesignCheck(a) => design_check(a),
        Command::Simulate(a) => simulate(a),
        Command::Atlas(a) => atlas(a),
        Command::Serve(a) => serve(a),
    }
}

fn bound(a: BoundArgs) -> Result<()> {
    if let Some(z) = &a.z {
        let z = parse_point(z)?;
        let w = f_bound(z)?;
        let text = if a.json {
            to_json(&BoundResponse {
                version: VERSION,
                z,
                witness: &w,
            })?
        } else {
            output::witness_text(&w)
        };
        return emit(a.out.as_deref(), &text);
    }
    let path = a.h.as_deref().expect("clap requires --z or --h");
    let h: RationalFunction = read_json(path)?;
    let grid = parse_grid(&a.grid)?;
    let curve = output::bound_curve(&h, &grid)?;
    let text = if a.json {
        to_json(&CurveResponse::new(&curve))?
    } else {
        curve.to_csv()
    };
    emit(a.out.as_deref(), &text)
}

fn design_check(a: DesignCheckArgs) -> Result<()> {
    let problem: DesignProblem = read_json(&a.problem)?;
    let curve = output::design_check(&problem)?;
    if let Some(out) = &a.out {
        emit(Some(out), &curve.to_csv())?;
    }
    let text = if a.json {
        to_json(&CurveResponse::new(&curve))?
    } else {
        output::design_summary(&curve)
    };
    emit(None, &text)
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let config: PlatoonConfig = read_json(&a.config)?;
    let result = simulate_with(&config, SimulationOptions { raw: a.raw })?;
    let text = match a.format {
        Format::Csv => result.to_csv(),
        Format::Json => to_json(&SimulationResponse {
            version: VERSION,
            result: &result,
        })?,
    };
    emit(a.out.as_deref(), &text)
}

fn atlas(a: AtlasArgs) -> Result<()> {
    let window = parse_window(&a.window)?;
    let (nx, ny) = parse_resolution(&a.res)?;
    let run = || compute_atlas(&window, nx, ny, a.n_iter);
    let grid = match a.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()?
            .install(run)?,
        None => run()?,
    };
    if grid.failures > 0 {
        log::warn!(
            "atlas: {} cell values failed and are stored as nan",
            grid.failures
        );
    }
    let text = match a.format {
        Format::Csv => grid.to_csv(),
        Format::Json => to_json(&AtlasResponse {
            version: VERSION,
            grid: &grid,
        })?,
    };
    emit(a.out.as_deref(), &text)
}

fn serve(a: ServeArgs) -> Result<()> {
    let config = ServiceConfig {
        static_dir: a.static_dir,
        cell_cap: a.cell_cap,
    };
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()?;
    runtime.block_on(service::serve(&a.bind, a.port, config))
}
