//! `idcenter`: centering pipelines for infinitely divisible measures driven by
//! spec files.
//!
//! Exit codes: 0 when every verdict is positive, 2 when a report carries an
//! obstruction or a failed check, 1 on input errors.

mod commands;
mod report;
mod spec;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};

use idcenter::grid::DEFAULT_GRID_POINTS;
use idcenter::quasidecomp::Tolerances;
use idcenter::{FrequencyGrid, Vector};

use commands::{Settings, DEFAULT_DEPTH};
use report::{Format, Report};
use spec::{InputError, Location};

#[derive(Parser)]
#[command(name = "idcenter", version, about = "Centering of infinitely divisible measures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the characteristic function of a measure.
    Charfn {
        #[command(flatten)]
        common: Common,
        /// File with one frequency per line (coordinates separated by spaces
        /// or commas); replaces the grid.
        #[arg(long, conflicts_with = "grid")]
        frequencies: Option<PathBuf>,
    },
    /// Universally center a measure with respect to its symmetry group.
    CenterSymmetry {
        #[command(flatten)]
        common: Common,
    },
    /// Decide and compute a centering that makes the measure strictly quasi-decomposable.
    CenterQd {
        #[command(flatten)]
        common: Common,
        /// Orbit terms on each side of the seeds when materializing an orbit representation.
        #[arg(long, default_value_t = DEFAULT_DEPTH)]
        depth: usize,
    },
    /// Evaluate the seed-pairing criterion of a representation.
    Criterion {
        #[command(flatten)]
        common: Common,
    },
    /// Parse and validate a spec file.
    Validate {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Spec file (TOML).
    #[arg(long)]
    spec: PathBuf,
    /// Number of quasi-random frequencies in the evaluation grid; the d basis
    /// vectors are always appended.
    #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
    grid: usize,
    /// Relative singular-value cutoff for ranks and null spaces.
    #[arg(long)]
    tol_rank: Option<f64>,
    /// Threshold for post-hoc verification checks.
    #[arg(long)]
    tol_verify: Option<f64>,
    /// Seed-pairing threshold, relative to the total seed weight.
    #[arg(long)]
    tol_criterion: Option<f64>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

fn positive(name: &str, v: Option<f64>, default: f64) -> Result<f64> {
    match v {
        None => Ok(default),
        Some(x) if x.is_finite() && x > 0.0 => Ok(x),
        Some(x) => bail!(InputError::new(format!("--{name} must be positive and finite, got {x}"))),
    }
}

fn tolerances(c: &Common) -> Result<Tolerances> {
    let d = Tolerances::default();
    Ok(Tolerances {
        rank: positive("tol-rank", c.tol_rank, d.rank)?,
        verify: positive("tol-verify", c.tol_verify, d.verify)?,
        criterion: positive("tol-criterion", c.tol_criterion, d.criterion)?,
        ..d
    })
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn parse_frequencies(src: &str, dim: usize) -> Result<FrequencyGrid, InputError> {
    let mut points = Vec::new();
    for (i, line) in src.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("");
        if body.trim().is_empty() {
            continue;
        }
        let at = |column: usize, message: String| InputError::at(Location { line: i + 1, column }, message);
        let mut coords = Vec::with_capacity(dim);
        for token in body.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
            let column = token.as_ptr() as usize - line.as_ptr() as usize + 1;
            let x: f64 = token
                .parse()
                .map_err(|_| at(column, format!("not a number: {token:?}")))?;
            if !x.is_finite() {
                return Err(at(column, format!("non-finite frequency coordinate {token:?}")));
            }
            coords.push(x);
        }
        if coords.len() != dim {
            return Err(at(
                1,
                format!("dimension mismatch: frequency has {} coordinates, expected {dim}", coords.len()),
            ));
        }
        points.push(Vector::new(coords).map_err(|e| at(1, e.to_string()))?);
    }
    if points.is_empty() {
        return Err(InputError::new("frequency file lists no frequencies"));
    }
    Ok(FrequencyGrid::from_points(points))
}

fn echo(args: &[String]) -> String {
    args.iter()
        .map(|a| {
            if a.is_empty() || a.chars().any(|c| c.is_whitespace() || c == '"' || c == '\'') {
                format!("{a:?}")
            } else {
                a.clone()
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn with_path(path: &Path, e: anyhow::Error) -> anyhow::Error {
    match e.downcast::<InputError>() {
        Ok(ie) if ie.location.is_some() => anyhow::anyhow!("{}:{ie}", path.display()),
        Ok(ie) => anyhow::anyhow!("{}: {ie}", path.display()),
        Err(e) => e,
    }
}

fn run(cli: Cli, args: &[String]) -> Result<(String, bool, Option<PathBuf>)> {
    let (common, frequencies, depth) = match &cli.command {
        Command::Charfn { common, frequencies } => (common, frequencies.as_deref(), DEFAULT_DEPTH),
        Command::CenterQd { common, depth } => (common, None, *depth),
        Command::CenterSymmetry { common } | Command::Criterion { common } | Command::Validate { common } => {
            (common, None, DEFAULT_DEPTH)
        }
    };
    let tol = tolerances(common)?;
    if common.grid == 0 {
        bail!(InputError::new("--grid must be at least 1"));
    }
    let src = read(&common.spec)?;
    let mut hasher = Sha256::new();
    hasher.update(src.as_bytes());
    let spec = spec::parse(&src).map_err(|e| with_path(&common.spec, e.into()))?;

    let grid = match frequencies {
        Some(path) => {
            let text = read(path)?;
            hasher.update(b"\0frequencies\0");
            hasher.update(text.as_bytes());
            parse_frequencies(&text, spec.dim).map_err(|e| with_path(path, e.into()))?
        }
        None => FrequencyGrid::standard(spec.dim, common.grid),
    };
    let settings = Settings { tol, grid, depth };
    let mut report = Report::new(echo(args), hex::encode(hasher.finalize()));
    settings.record(&mut report);
    let outcome = match &cli.command {
        Command::Charfn { .. } => commands::charfn(&spec, &settings, &mut report),
        Command::CenterSymmetry { .. } => commands::center_symmetry(&spec, &settings, &mut report),
        Command::CenterQd { .. } => commands::center_qd(&spec, &settings, &mut report),
        Command::Criterion { .. } => commands::criterion(&spec, &settings, &mut report),
        Command::Validate { .. } => commands::validate(&spec, &settings, &mut report),
    };
    outcome.map_err(|e| with_path(&common.spec, e))?;
    Ok((report.render(common.format), report.all_positive(), common.report.clone()))
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli, &args) {
        Ok((text, positive, target)) => {
            if let Some(path) = target {
                if let Err(e) = std::fs::write(&path, text) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(1);
                }
            } else {
                print!("{text}");
            }
            if positive {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
