mod commands;
mod complex;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use vesselkit::diffring::RenderFormat;
use vesselkit::verify::{GridSpec, VesselSource};

use commands::{Exit, Suite};
use config::RunConfig;

const GRID_HELP: &str = "grid as x0:x1:nx,t0:t1:nt (endpoints included)";

#[derive(Parser, Debug)]
#[command(name = "vesselkit", version, about = "KdV vessels, the KdV hierarchy and their verification")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Write q, β and τ of a soliton vessel on a grid as CSV.
    Soliton {
        /// Comma-separated positive wavenumbers.
        #[arg(long, allow_hyphen_values = true)]
        k: String,
        /// Comma-separated complex amplitudes (a+bi, √2, ...), one per wavenumber.
        #[arg(long, allow_hyphen_values = true)]
        b: String,
        /// Evolution type (1 is KdV).
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value = "-5:5:101,0:1:21", allow_hyphen_values = true, help = GRID_HELP)]
        grid: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the hierarchy polynomials b_0 ..= b_L.
    Hierarchy {
        #[arg(long, default_value_t = 0)]
        levels: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Also print a_m, c_m, d_m.
        #[arg(long)]
        companions: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite and print its residual report.
    Verify {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        #[arg(long, conflicts_with_all = ["k", "b", "zero"])]
        config: Option<PathBuf>,
        #[arg(long, requires = "b", conflicts_with = "zero", allow_hyphen_values = true)]
        k: Option<String>,
        #[arg(long, requires = "k", allow_hyphen_values = true)]
        b: Option<String>,
        #[arg(long, default_value_t = 1)]
        n: usize,
        /// Use the trivial vessel with B = 0.
        #[arg(long)]
        zero: bool,
        #[arg(long, allow_hyphen_values = true, help = GRID_HELP)]
        grid: Option<String>,
        /// Replace every row's tolerance.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        json: bool,
    },
    /// Step a configured vessel through time and write its fields as CSV.
    Evolve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
    Latex,
}

impl From<Format> for RenderFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Text => RenderFormat::Text,
            Format::Json => RenderFormat::Json,
            Format::Latex => RenderFormat::Latex,
        }
    }
}

fn parse_grid(s: &str) -> Result<GridSpec, Exit> {
    s.parse().map_err(|e| Exit::validation(format!("--grid: {e}")))
}

fn run(cli: Cli) -> Result<(), Exit> {
    match cli.cmd {
        Cmd::Soliton { k, b, n, grid, out } => {
            let spec = commands::soliton_from_flags(&k, &b, n)?;
            commands::cmd_soliton(&spec, &parse_grid(&grid)?, out.as_deref())
        }
        Cmd::Hierarchy { levels, format, companions, out } => {
            commands::cmd_hierarchy(levels, format.into(), companions, out.as_deref())
        }
        Cmd::Verify { suite, config, k, b, n, zero, grid, tol, json } => {
            if let Some(t) = tol {
                if !(t.is_finite() && t > 0.0) {
                    return Err(Exit::validation("--tol: must be a positive number"));
                }
            }
            let (src, cfg_grid) = match (config, k, b, zero) {
                (Some(path), ..) => {
                    let cfg = RunConfig::load(&path).map_err(Exit::validation)?;
                    (cfg.source().map_err(Exit::validation)?, cfg.grid().map_err(Exit::validation)?)
                }
                (None, Some(k), Some(b), false) => (VesselSource::Soliton(commands::soliton_from_flags(&k, &b, n)?), None),
                (None, None, None, true) => (VesselSource::Zero, None),
                _ => return Err(Exit::validation("give one of --config, --k/--b or --zero")),
            };
            let grid = match grid {
                Some(g) => parse_grid(&g)?,
                None => cfg_grid.unwrap_or_default(),
            };
            commands::cmd_verify(&src, &grid, suite, tol, json)
        }
        Cmd::Evolve { config, out } => {
            let cfg = RunConfig::load(&config).map_err(Exit::validation)?;
            commands::cmd_evolve(&cfg, out)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { Exit::VALIDATION } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.msg);
            ExitCode::from(e.code)
        }
    }
}
