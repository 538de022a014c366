//! Command-line entry point.
//!
//! Exit codes: `0` the command ran, `2` the input was rejected, `3` an
//! internal invariant was breached.

pub mod files;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::bench::{self, ExampleSpec};
use crate::error::{Error, Result};
use crate::estim::aalen_johansen;
use crate::latent::verify_existence;
use crate::model::DiscreteWorld;
use crate::props::{AssumptionReport, DEFAULT_TOLERANCE};
use files::{canonical_json, parse_sample_csv, world_hash, ConstructFile, ReportFile, WorldSpecFile, CONSTRUCT_SCHEMA};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "censoring", version, about = "Exact checks of right-censoring assumptions on discrete worlds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check every assumption on a world file and print the JSON report.
    Check {
        world: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Nelson–Aalen, Kaplan–Meier and Aalen–Johansen paths from a `time,status` CSV.
    Estimate {
        samples: PathBuf,
        /// Number of event types; defaults to the largest status in the file.
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write one uniform-square example world, and optionally its heat maps.
    Example {
        #[arg(long)]
        pair: String,
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long)]
        heatmaps: bool,
        /// Also write PGM images next to the heat-map CSVs.
        #[arg(long)]
        pgm: bool,
        /// Directory for heat-map files.
        #[arg(long, default_value = ".")]
        dir: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reproduce the assumption table for the six example worlds.
    Table1 {
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo sup errors of Kaplan–Meier and Aalen–Johansen.
    Consistency {
        #[arg(long)]
        world: PathBuf,
        /// Comma-separated sample sizes.
        #[arg(long, default_value = "100,10000")]
        nlist: String,
        /// Seeds as `a..b` (inclusive) or a comma-separated list.
        #[arg(long, default_value = "0..9")]
        seeds: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a latent world with independent censoring from an observed law.
    Construct {
        world: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Invariant(_) | Error::ObservedOnly | Error::BadEvent(_) | Error::OutsideJ { .. } => EXIT_INTERNAL,
        Error::NonzeroMassAtSingularity { .. } | Error::InvalidWindow { .. } => EXIT_INTERNAL,
        _ => EXIT_INPUT,
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn read_world(path: &Path) -> Result<DiscreteWorld> {
    WorldSpecFile::parse(&read(path)?)
        .and_then(|f| f.to_world())
        .map_err(|e| match e {
            Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
            Error::InvalidWorld(m) => Error::InvalidWorld(format!("{}: {m}", path.display())),
            other => other,
        })
}

fn emit(out: &Option<PathBuf>, stdout: &mut dyn Write, bytes: &[u8]) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, bytes).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => Ok(stdout.write_all(bytes)?),
    }
}

fn json_line<T: serde::Serialize>(value: &T) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(value).expect("reports serialize");
    v.push(b'\n');
    v
}

fn parse_list(s: &str, what: &str) -> Result<Vec<u64>> {
    if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| Error::Parse(format!("bad {what} range {s:?}")))?;
        let b: u64 = b.trim().parse().map_err(|_| Error::Parse(format!("bad {what} range {s:?}")))?;
        if a > b {
            return Err(Error::Parse(format!("empty {what} range {s:?}")));
        }
        return Ok((a..=b).collect());
    }
    s.split(',')
        .map(|x| x.trim().parse().map_err(|_| Error::Parse(format!("bad {what} {x:?}"))))
        .collect()
}

fn check_invariants(world: &DiscreteWorld) -> Result<crate::model::WorldFunctionals> {
    let f = world.derive()?;
    for (name, v) in f.invariant_defects() {
        if !(v <= 1e-9) {
            return Err(Error::Invariant(format!("{name} defect {v:e}")));
        }
    }
    Ok(f)
}

fn execute(cmd: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::Check { world, tol, out } => {
            if !(tol >= 0.0) {
                return Err(Error::Parse(format!("tolerance {tol} must be non-negative")));
            }
            let w = read_world(&world)?;
            let f = check_invariants(&w)?;
            let report = AssumptionReport::build(&f, tol)?;
            emit(&out, stdout, &json_line(&ReportFile::new(&w, &report)))
        }
        Command::Estimate { samples, d, out } => {
            let sample = parse_sample_csv(&read(&samples)?, d)
                .map_err(|e| Error::Parse(format!("{}: {e}", samples.display())))?;
            let path = aalen_johansen(&sample)?;
            let mut buf = Vec::new();
            path.write_csv(&mut buf)?;
            emit(&out, stdout, &buf)
        }
        Command::Example { pair, n, heatmaps, pgm, dir, out } => {
            let spec = ExampleSpec { n, ..pair.parse()? };
            let w = bench::build_example_world(spec)?;
            if heatmaps {
                for p in bench::emit_heatmaps(n, &dir, pgm)? {
                    writeln!(stderr, "wrote {}", p.display())?;
                }
            }
            emit(&out, stdout, canonical_json(&w).as_bytes())
        }
        Command::Table1 { n, out } => {
            let t = bench::reproduce_table1(n)?;
            if !t.matches_published() {
                writeln!(stderr, "warning: the pattern differs from the published table at n = {n}")?;
            }
            let mut buf = Vec::new();
            t.write_csv(&mut buf)?;
            emit(&out, stdout, &buf)
        }
        Command::Consistency { world, nlist, seeds, out } => {
            let w = read_world(&world)?;
            let f = check_invariants(&w)?;
            let ns = parse_list(&nlist, "sample size")?;
            if ns.contains(&0) {
                return Err(Error::Parse("sample sizes must be positive".into()));
            }
            let ns: Vec<usize> = ns.into_iter().map(|n| n as usize).collect();
            let seeds = parse_list(&seeds, "seed")?;
            let name = world.file_stem().map_or("world".into(), |s| s.to_string_lossy().into_owned());
            let rows = bench::consistency_experiment(&name, &f, &ns, &seeds)?;
            let mut buf = Vec::new();
            bench::write_consistency_csv(&rows, &mut buf)?;
            emit(&out, stdout, &buf)
        }
        Command::Construct { world, out } => {
            let w = read_world(&world)?;
            let f = check_invariants(&w)?;
            let e = verify_existence(&f)?;
            let file = ConstructFile {
                schema: CONSTRUCT_SCHEMA,
                tool_version: env!("CARGO_PKG_VERSION"),
                input_sha256: world_hash(&w),
                existence_defect: e.defect,
                improper_c: e.constructed.improper_c,
                defective_tail: e.constructed.defective_tail,
                world: WorldSpecFile::from_world(&e.constructed.world),
            };
            emit(&out, stdout, &json_line(&file))
        }
    }
}

/// Runs the command line and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_INPUT,
            };
        }
    };
    match execute(cli.command, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}
