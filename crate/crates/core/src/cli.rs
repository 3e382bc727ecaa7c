//! Command-line front end shared by the binary and the CLI tests.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fluxes::FluxKind;
use crate::output::{stem, write_atomic, write_run};
use crate::scenarios::{
    builtin_scenario, l1_distance, reference_solution, trace_error, Coupling, ScenarioConfig, BUILTIN_NAMES,
};
use crate::simulator::{RunOptions, SpeedMode};
use crate::state::State;
use crate::verify::verify_scenario;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "coupled-fv",
    version,
    about = "Finite volumes for conservation laws coupled at x = 0"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario and write profile, traces, ledger and errors.
    Run(RunArgs),
    /// Run one scenario and check the properties that apply to it.
    Verify(RunArgs),
    /// List the built-in scenarios.
    List,
    /// Run one scenario at several resolutions in parallel.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// Built-in name (test1..test12) or path to a JSON config.
    #[arg(long)]
    scenario: String,
    #[arg(long)]
    flux: Option<FluxKind>,
    #[arg(long)]
    courant: Option<f64>,
    /// Coupling for the two-gas scenarios: flux or state.
    #[arg(long)]
    coupling: Option<Coupling>,
    /// Interface speed: global (one A per step) or local.
    #[arg(long)]
    speed: Option<SpeedMode>,
    /// Output directory.
    #[arg(long, env = "COUPLED_FV_OUT")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    cells: Option<usize>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Comma-separated cell counts.
    #[arg(long, value_delimiter = ',', required = true)]
    cells: Vec<usize>,
}

/// Resolves a built-in name or a JSON config path.
pub fn load_scenario(name: &str) -> Result<ScenarioConfig> {
    let path = Path::new(name);
    if path.extension().is_some_and(|e| e == "json") || path.is_file() {
        let cfg = ScenarioConfig::from_json(&std::fs::read_to_string(path)?)?;
        cfg.validate()?;
        return Ok(cfg);
    }
    builtin_scenario(name)
}

fn configure(common: &Common, cells: Option<usize>) -> Result<(ScenarioConfig, PathBuf)> {
    let mut cfg = load_scenario(&common.scenario)?;
    if let Some(c) = common.coupling {
        cfg = cfg.with_coupling(c)?;
    }
    if let Some(f) = common.flux {
        cfg = cfg.with_flux(f);
    }
    if let Some(s) = common.speed {
        cfg = cfg.with_speed(s);
    }
    if let Some(c) = common.courant {
        cfg.courant = c;
    }
    if let Some(n) = cells {
        cfg = cfg.with_cells(n);
    }
    cfg.validate()?;
    let out = common
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    Ok((cfg, out))
}

#[derive(Serialize)]
struct Diagnostics<'a> {
    scenario: &'a str,
    error: String,
    config: &'a ScenarioConfig,
}

fn report_failure(out: &Path, cfg: &ScenarioConfig, err: &Error, stderr: &mut dyn Write) -> i32 {
    let path = out.join(format!("{}_diagnostics.json", stem(cfg)));
    let diag = Diagnostics {
        scenario: &cfg.name,
        error: err.to_string(),
        config: cfg,
    };
    let _ = writeln!(stderr, "error: {err}");
    match serde_json::to_string_pretty(&diag) {
        Ok(text) => match write_atomic(&path, text.as_bytes()) {
            Ok(()) => {
                let _ = writeln!(stderr, "diagnostics written to {}", path.display());
            }
            Err(e) => {
                let _ = writeln!(stderr, "could not write diagnostics: {e}");
            }
        },
        Err(e) => {
            let _ = writeln!(stderr, "could not serialise diagnostics: {e}");
        }
    }
    EXIT_FAILURE
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with(args: &[String], stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(stderr, "{text}")
            } else {
                write!(stdout, "{text}")
            };
            return code;
        }
    };
    match cli.command {
        Command::List => {
            for name in BUILTIN_NAMES {
                let cfg = builtin_scenario(name).expect("built-in scenarios are valid");
                let _ = writeln!(
                    stdout,
                    "{name:<7} {:<14} {} cells, {}, T = {}",
                    cfg.germ.name(),
                    cfg.cells,
                    cfg.flux,
                    cfg.final_time
                );
            }
            EXIT_OK
        }
        Command::Run(args) => {
            let (cfg, out) = match configure(&args.common, args.cells) {
                Ok(v) => v,
                Err(e) => return usage(stderr, &e),
            };
            match cfg
                .run(RunOptions::default())
                .and_then(|t| write_run(&out, &cfg, &t).map(|a| (t, a)))
            {
                Ok((traj, art)) => {
                    let _ = writeln!(
                        stdout,
                        "{}: {} steps to t = {}, final branch {:?}, worst drift {:.3e}",
                        cfg.name,
                        traj.history.len(),
                        traj.grid.time,
                        traj.final_traces.branch,
                        traj.ledger.worst_conserved()
                    );
                    if let Some(e) = &art.trace_errors {
                        let _ = writeln!(
                            stdout,
                            "trace errors (rho-, w-, rho+, w+): {:?}",
                            e.errors.map(|v| format!("{v:.3e}"))
                        );
                    }
                    let _ = writeln!(stdout, "wrote {}", art.profile.display());
                    EXIT_OK
                }
                Err(e) => report_failure(&out, &cfg, &e, stderr),
            }
        }
        Command::Verify(args) => {
            let (cfg, out) = match configure(&args.common, args.cells) {
                Ok(v) => v,
                Err(e) => return usage(stderr, &e),
            };
            match verify_scenario(&cfg) {
                Ok((_, checks)) => {
                    for c in &checks {
                        let _ = writeln!(
                            stdout,
                            "{} {}: {}",
                            if c.passed { "PASS" } else { "FAIL" },
                            c.name,
                            c.detail
                        );
                    }
                    if checks.iter().all(|c| c.passed) {
                        EXIT_OK
                    } else {
                        EXIT_FAILURE
                    }
                }
                Err(e) => report_failure(&out, &cfg, &e, stderr),
            }
        }
        Command::Sweep(args) => {
            let (cfg, out) = match configure(&args.common, None) {
                Ok(v) => v,
                Err(e) => return usage(stderr, &e),
            };
            match sweep(&cfg, &args.cells) {
                Ok(table) => {
                    let _ = write!(stdout, "{}", table.render());
                    let path = out.join(format!("{}_{}_sweep.json", cfg.name, cfg.flux));
                    let written = serde_json::to_string_pretty(&table)
                        .map_err(|e| Error::Config(e.to_string()))
                        .and_then(|t| write_atomic(&path, t.as_bytes()));
                    match written {
                        Ok(()) => EXIT_OK,
                        Err(e) => report_failure(&out, &cfg, &e, stderr),
                    }
                }
                Err(e) => report_failure(&out, &cfg, &e, stderr),
            }
        }
    }
}

fn usage(stderr: &mut dyn Write, err: &Error) -> i32 {
    let _ = writeln!(stderr, "error: {err}");
    EXIT_USAGE
}

/// One resolution of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub cells: usize,
    pub dx: f64,
    /// `(rho-, w-, rho+, w+)` errors against exact traces, when known.
    pub trace_errors: Option<[f64; 4]>,
    /// Density L1 distance to the finest run, cell-averaged onto this grid.
    pub l1_to_finest: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepTable {
    pub scenario: String,
    pub flux: FluxKind,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn render(&self) -> String {
        let mut s = format!(
            "{} ({})\n{:>8} {:>12} {:>12}",
            self.scenario, self.flux, "cells", "dx", "L1 finest"
        );
        if self.rows.iter().any(|r| r.trace_errors.is_some()) {
            s.push_str(&format!(
                " {:>11} {:>11} {:>11} {:>11}",
                "err rho-", "err w-", "err rho+", "err w+"
            ));
        }
        s.push('\n');
        for r in &self.rows {
            let l1 = r.l1_to_finest.map_or("-".to_string(), |v| format!("{v:.4e}"));
            s.push_str(&format!("{:>8} {:>12.4e} {:>12}", r.cells, r.dx, l1));
            if let Some(e) = r.trace_errors {
                for v in e {
                    s.push_str(&format!(" {v:>11.3e}"));
                }
            }
            s.push('\n');
        }
        s
    }
}

/// Runs `cfg` at each cell count on its own thread.
pub fn sweep(cfg: &ScenarioConfig, cells: &[usize]) -> Result<SweepTable> {
    if cells.is_empty() {
        return Err(Error::Config("sweep needs at least one cell count".to_string()));
    }
    let mut cells = cells.to_vec();
    cells.sort_unstable();
    cells.dedup();
    let configs: Vec<ScenarioConfig> = cells.iter().map(|&n| cfg.clone().with_cells(n)).collect();
    for c in &configs {
        c.validate()?;
    }
    let runs: Vec<Result<_>> = std::thread::scope(|s| {
        let handles: Vec<_> = configs
            .iter()
            .map(|c| s.spawn(move || c.run(RunOptions::default())))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    });
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let finest = runs.last().expect("nonempty");
    let n_fine = *cells.last().unwrap();
    let reference = reference_solution(cfg);
    let rows = configs
        .iter()
        .zip(&runs)
        .map(|(c, t)| SweepRow {
            cells: c.cells,
            dx: c.dx(),
            trace_errors: trace_error(c, t, &reference).map(|e| e.errors),
            l1_to_finest: (c.cells < n_fine && n_fine.is_multiple_of(c.cells)).then(|| {
                let avg = cell_average(&finest.grid.cells, n_fine / c.cells);
                l1_distance(&t.grid.cells, &avg, 0, c.dx())
            }),
        })
        .collect();
    Ok(SweepTable {
        scenario: cfg.name.clone(),
        flux: cfg.flux,
        rows,
    })
}

/// Averages consecutive blocks of `ratio` cells.
pub fn cell_average(cells: &[State], ratio: usize) -> Vec<State> {
    cells
        .chunks(ratio)
        .map(|block| {
            let mut acc = block[0];
            for u in &block[1..] {
                for k in 0..acc.len() {
                    acc[k] += u[k];
                }
            }
            for k in 0..acc.len() {
                acc[k] /= block.len() as f64;
            }
            acc
        })
        .collect()
}
