//! Per-scenario checks behind `coupled-fv verify`.

use serde::Serialize;

use crate::error::Result;
use crate::fluxes::FluxKind;
use crate::germs::Germ;
use crate::interface::Branch;
use crate::models::SystemModel;
use crate::scenarios::{
    l1_distance, reconstruct_reference, reference_solution, total_variation, trace_error, ScenarioConfig,
};
use crate::simulator::{RunOptions, Trajectory};

/// Relative drift allowed in the germ-conserved totals.
pub const CONSERVATION_TOL: f64 = 1e-11;
/// Cell entropy inequality residual allowed for Rusanov on isothermal flow.
pub const ENTROPY_TOL: f64 = 1e-12;
/// Germ residual of the final traces.
pub const GERM_TOL: f64 = 1e-6;
/// Accepted ratio band `[1/F, F]` between computed and published errors.
pub const ERROR_FACTOR: f64 = 3.0;
/// Density L1 distance to the side reconstruction, in units of `dx * TV`.
pub const RECONSTRUCTION_FACTOR: f64 = 5.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: String) -> Self {
        Check {
            name: name.into(),
            passed,
            detail,
        }
    }
}

/// Runs the scenario and checks the properties that apply to it.
pub fn verify_scenario(cfg: &ScenarioConfig) -> Result<(Trajectory, Vec<Check>)> {
    let isothermal_rusanov =
        cfg.flux == FluxKind::Rusanov && matches!(cfg.model_left, SystemModel::IsothermalEuler { .. });
    let traj = cfg.run(RunOptions {
        entropy: isothermal_rusanov,
        ..RunOptions::default()
    })?;
    let mut checks = Vec::new();

    let reached = (traj.grid.time - cfg.final_time).abs() <= 1e-12 * cfg.final_time.max(1.0);
    checks.push(Check::new(
        "final time",
        reached,
        format!("t = {}", traj.grid.time),
    ));

    let drift = traj.ledger.worst_conserved();
    checks.push(Check::new(
        "conservation",
        drift <= CONSERVATION_TOL,
        format!("worst relative drift {drift:.3e} (tol {CONSERVATION_TOL:.0e})"),
    ));

    if let Some(log) = &traj.entropy {
        checks.push(Check::new(
            "cell entropy inequality",
            log.max_residual <= ENTROPY_TOL,
            format!("max residual {:.3e} (tol {ENTROPY_TOL:.0e})", log.max_residual),
        ));
        checks.push(Check::new(
            "interface entropy flux",
            log.interface_violations == 0,
            format!(
                "{} violations, smallest gap {:.3e}",
                log.interface_violations, log.min_interface_gap
            ),
        ));
    }

    let tr = &traj.final_traces;
    let germ_res = cfg
        .germ
        .residual(&cfg.model_left, &cfg.model_right, &tr.um, &tr.up)?
        .norm_inf();
    checks.push(Check::new(
        "final traces in germ",
        germ_res <= GERM_TOL && tr.branch != Branch::LeastSquaresFallback,
        format!("residual {germ_res:.3e}, branch {:?}", tr.branch),
    ));

    if matches!(cfg.germ, Germ::HeatExchange { .. }) {
        let exact = reconstruct_reference(cfg, &traj)?;
        let dx = cfg.dx();
        let l1 = l1_distance(&traj.grid.cells, &exact, 0, dx);
        let bound = RECONSTRUCTION_FACTOR * dx * total_variation(&traj.grid.cells, 0);
        checks.push(Check::new(
            "density near side reconstruction",
            l1 <= bound,
            format!("L1 {l1:.3e}, bound {bound:.3e}"),
        ));
    }

    if let Some(err) = trace_error(cfg, &traj, &reference_solution(cfg)) {
        if let Some(ratios) = err.ratios() {
            let labels = ["rho-", "w-", "rho+", "w+"];
            for (k, r) in ratios.iter().enumerate() {
                let ok = (1.0 / ERROR_FACTOR..=ERROR_FACTOR).contains(r);
                checks.push(Check::new(
                    format!("trace error {}", labels[k]),
                    ok,
                    format!(
                        "{:.3e} vs published {:.3e} (ratio {r:.2})",
                        err.errors[k],
                        err.published.unwrap()[k]
                    ),
                ));
            }
        }
    }
    Ok((traj, checks))
}
