//! Run artifacts: profile CSV, per-step traces, conservation ledger and errors.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fluxes::FluxKind;
use crate::interface::{Branch, TraceSolution};
use crate::scenarios::{reference_solution, trace_error, ScenarioConfig, TraceErrors};
use crate::simulator::{ConservationLedger, EntropyLog, Grid, Trajectory};
use crate::state::State;

/// Writes `bytes` to a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp{}", std::process::id()));
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        e.into()
    })
}

fn num(v: f64) -> String {
    // 17 significant digits round-trip every f64
    format!("{v:.16e}")
}

/// Cell profile with centres, conserved components and primitives.
pub fn profile_csv(cfg: &ScenarioConfig, grid: &Grid) -> Result<String> {
    let names = cfg.model_left.component_names();
    let mut out = String::from("x,side");
    for n in names {
        write!(out, ",{n}").unwrap();
    }
    out.push_str(",density,velocity,pressure\n");
    for (j, u) in grid.cells.iter().enumerate() {
        let left = grid.is_left(j);
        let model = if left { cfg.model_left } else { cfg.model_right };
        let prim = model.primitives(u)?;
        write!(
            out,
            "{},{}",
            num(grid.x_center(j)),
            if left { "left" } else { "right" }
        )
        .unwrap();
        for k in 0..u.len() {
            write!(out, ",{}", num(u[k])).unwrap();
        }
        writeln!(out, ",{},{},{}", num(prim.rho), num(prim.u), num(prim.p)).unwrap();
    }
    Ok(out)
}

/// One interface solve, flattened for plotting.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceRow {
    pub time: f64,
    pub dt: f64,
    pub u_minus: State,
    pub u_plus: State,
    pub branch: Branch,
    pub residual_norm: f64,
    pub a_used: f64,
    pub entropy_check: f64,
    pub admissible: bool,
}

impl TraceRow {
    fn new(time: f64, dt: f64, t: &TraceSolution) -> Self {
        TraceRow {
            time,
            dt,
            u_minus: t.um,
            u_plus: t.up,
            branch: t.branch,
            residual_norm: t.residual_norm,
            a_used: t.a_used,
            entropy_check: t.entropy_check,
            admissible: t.admissible,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TracesFile {
    pub scenario: String,
    pub flux: FluxKind,
    pub cells: usize,
    pub dx: f64,
    pub steps: Vec<TraceRow>,
    /// Traces solved on the final grid (`dt = 0`).
    pub last: TraceRow,
}

pub fn traces_file(cfg: &ScenarioConfig, traj: &Trajectory) -> TracesFile {
    TracesFile {
        scenario: cfg.name.clone(),
        flux: cfg.flux,
        cells: cfg.cells,
        dx: cfg.dx(),
        steps: traj
            .history
            .iter()
            .map(|r| TraceRow::new(r.time, r.dt, &r.traces))
            .collect(),
        last: TraceRow::new(traj.grid.time, 0.0, &traj.final_traces),
    }
}

/// Run summary with the conservation and entropy bookkeeping.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LedgerFile {
    pub scenario: String,
    pub flux: FluxKind,
    pub cells: usize,
    pub dx: f64,
    pub final_time: f64,
    pub steps: usize,
    pub fallback_steps: usize,
    pub sonic_fix_steps: usize,
    pub non_admissible_steps: usize,
    /// Worst relative balance residual over the germ-conserved components.
    pub worst_conserved_residual: f64,
    pub ledger: ConservationLedger,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entropy: Option<EntropyLog>,
}

pub fn ledger_file(cfg: &ScenarioConfig, traj: &Trajectory) -> LedgerFile {
    let count = |f: &dyn Fn(&TraceSolution) -> bool| traj.history.iter().filter(|r| f(&r.traces)).count();
    LedgerFile {
        scenario: cfg.name.clone(),
        flux: cfg.flux,
        cells: cfg.cells,
        dx: cfg.dx(),
        final_time: traj.grid.time,
        steps: traj.history.len(),
        fallback_steps: traj.fallback_steps(),
        sonic_fix_steps: count(&|t| t.branch == Branch::SonicFix),
        non_admissible_steps: count(&|t| !t.admissible),
        worst_conserved_residual: traj.ledger.worst_conserved(),
        ledger: traj.ledger.clone(),
        entropy: traj.entropy.clone(),
    }
}

/// Paths written by [`write_run`].
#[derive(Clone, Debug, PartialEq)]
pub struct RunArtifacts {
    pub profile: PathBuf,
    pub traces: PathBuf,
    pub ledger: PathBuf,
    /// Only for scenarios with exact interface traces.
    pub errors: Option<PathBuf>,
    pub trace_errors: Option<TraceErrors>,
}

/// File stem `<scenario>_<flux>_<cells>`.
pub fn stem(cfg: &ScenarioConfig) -> String {
    format!("{}_{}_{}", cfg.name, cfg.flux, cfg.cells)
}

pub fn write_run(dir: &Path, cfg: &ScenarioConfig, traj: &Trajectory) -> Result<RunArtifacts> {
    let stem = stem(cfg);
    let path = |suffix: &str| dir.join(format!("{stem}_{suffix}"));

    let profile = path("profile.csv");
    write_atomic(&profile, profile_csv(cfg, &traj.grid)?.as_bytes())?;
    let traces = path("traces.json");
    write_atomic(&traces, json(&traces_file(cfg, traj))?.as_bytes())?;
    let ledger = path("ledger.json");
    write_atomic(&ledger, json(&ledger_file(cfg, traj))?.as_bytes())?;

    let trace_errors = trace_error(cfg, traj, &reference_solution(cfg));
    let errors = match &trace_errors {
        Some(e) => {
            let p = path("errors.json");
            write_atomic(&p, json(e)?.as_bytes())?;
            Some(p)
        }
        None => None,
    };
    Ok(RunArtifacts {
        profile,
        traces,
        ledger,
        errors,
        trace_errors,
    })
}

fn json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v).map_err(|e| Error::Config(format!("serialising output: {e}")))
}
