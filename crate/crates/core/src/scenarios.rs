//! Scenario configuration, the built-in test catalog and reference data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fluxes::FluxKind;
use crate::germs::{Germ, HeatOrientation};
use crate::interface::{InterfaceSolver, SolverOptions, TraceSolution};
use crate::models::{PressureLaw, SystemModel};
use crate::riemann::{ideal_gas, solve_riemann};
use crate::simulator::{Grid, RunOptions, Scheme, SpeedMode, Trajectory, DEFAULT_COURANT};
use crate::state::State;

pub const BUILTIN_NAMES: [&str; 12] = [
    "test1", "test2", "test3", "test4", "test5", "test6", "test7", "test8", "test9", "test10", "test11",
    "test12",
];

/// Initial state in primitive variables. `p` is used by the ideal gas only.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrimitiveState {
    pub rho: f64,
    pub u: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
}

impl PrimitiveState {
    pub fn new(rho: f64, u: f64) -> Self {
        PrimitiveState { rho, u, p: None }
    }

    pub fn with_pressure(rho: f64, u: f64, p: f64) -> Self {
        PrimitiveState { rho, u, p: Some(p) }
    }

    pub fn conserved(&self, model: &SystemModel) -> Result<State> {
        model.from_primitive(self.rho, self.u, self.p)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub model_left: SystemModel,
    pub model_right: SystemModel,
    pub germ: Germ,
    pub left: PrimitiveState,
    pub right: PrimitiveState,
    /// `[x_min, x_max]` with `x_min < 0 < x_max`.
    pub domain: [f64; 2],
    pub cells: usize,
    #[serde(default = "default_courant")]
    pub courant: f64,
    pub final_time: f64,
    #[serde(default)]
    pub flux: FluxKind,
    #[serde(default)]
    pub speed: SpeedMode,
    #[serde(default)]
    pub solver: SolverOptions,
    /// Directory for output files; the CLI falls back to `COUPLED_FV_OUT`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<std::path::PathBuf>,
}

fn default_courant() -> f64 {
    DEFAULT_COURANT
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn dx(&self) -> f64 {
        (self.domain[1] - self.domain[0]) / self.cells as f64
    }

    /// Cells left of the interface, proportional to `|x_min|`.
    pub fn n_left(&self) -> usize {
        (-self.domain[0] / self.dx()).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let [lo, hi] = self.domain;
        if !(lo < 0.0 && hi > 0.0 && lo.is_finite() && hi.is_finite()) {
            return Err(Error::Config(format!(
                "domain [{lo}, {hi}] must contain 0 in its interior"
            )));
        }
        if self.cells < 4 {
            return Err(Error::Config(format!("{} cells, need at least 4", self.cells)));
        }
        let n_left = self.n_left();
        let offset = (n_left as f64 * self.dx() + lo).abs();
        if n_left == 0 || n_left >= self.cells || offset > 1e-9 * (hi - lo) {
            return Err(Error::Config(format!(
                "x = 0 does not fall on a cell face of [{lo}, {hi}] with {} cells",
                self.cells
            )));
        }
        if !(self.final_time >= 0.0 && self.final_time.is_finite()) {
            return Err(Error::Config(format!("final time {}", self.final_time)));
        }
        if !(self.courant > 0.0 && self.courant < 1.0) {
            return Err(Error::Config(format!(
                "Courant number {} outside (0, 1)",
                self.courant
            )));
        }
        if let Some((l, r)) = self.germ.implied_models() {
            if l != self.model_left || r != self.model_right {
                return Err(Error::Config(format!(
                    "{} germ parameters disagree with the side models",
                    self.germ.name()
                )));
            }
        }
        self.germ.validate(&self.model_left, &self.model_right)?;
        self.left.conserved(&self.model_left)?;
        self.right.conserved(&self.model_right)?;
        Ok(())
    }

    pub fn scheme(&self) -> Result<Scheme> {
        let solver = InterfaceSolver::new(
            self.flux,
            self.model_left,
            self.model_right,
            self.germ,
            self.solver,
        )?;
        let mut scheme = Scheme::new(solver, self.courant)?;
        scheme.speed = self.speed;
        Ok(scheme)
    }

    pub fn initial_grid(&self) -> Result<Grid> {
        let n_left = self.n_left();
        Grid::riemann(
            self.left.conserved(&self.model_left)?,
            self.right.conserved(&self.model_right)?,
            n_left,
            self.cells - n_left,
            self.dx(),
        )
    }

    pub fn run(&self, opts: RunOptions) -> Result<Trajectory> {
        self.validate()?;
        self.scheme()?.run(self.initial_grid()?, self.final_time, opts)
    }

    pub fn with_cells(mut self, cells: usize) -> Self {
        self.cells = cells;
        self
    }

    /// Sets the cell count from a target width.
    pub fn with_dx(self, dx: f64) -> Self {
        let cells = ((self.domain[1] - self.domain[0]) / dx).round() as usize;
        self.with_cells(cells)
    }

    pub fn with_speed(mut self, speed: SpeedMode) -> Self {
        self.speed = speed;
        self
    }

    pub fn with_flux(mut self, flux: FluxKind) -> Self {
        self.flux = flux;
        self
    }

    /// Swaps flux coupling and state coupling, keeping the exponents.
    pub fn with_coupling(mut self, coupling: Coupling) -> Result<Self> {
        let (gamma_l, gamma_r) = match self.germ {
            Germ::FluxCoupling { gamma_l, gamma_r } | Germ::StateCoupling { gamma_l, gamma_r } => {
                (gamma_l, gamma_r)
            }
            other => {
                return Err(Error::Config(format!(
                    "scenario '{}' uses the {} germ, coupling choice applies to tests 9 and 10",
                    self.name,
                    other.name()
                )))
            }
        };
        self.germ = match coupling {
            Coupling::Flux => Germ::FluxCoupling { gamma_l, gamma_r },
            Coupling::State => Germ::StateCoupling { gamma_l, gamma_r },
        };
        Ok(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    Flux,
    State,
}

impl std::str::FromStr for Coupling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "flux" => Ok(Coupling::Flux),
            "state" => Ok(Coupling::State),
            other => Err(Error::Config(format!(
                "unknown coupling '{other}' (expected flux or state)"
            ))),
        }
    }
}

fn particle(
    name: &str,
    rho: f64,
    q: f64,
    lambda: f64,
    left_rho: Option<f64>,
    cells: usize,
    t: f64,
) -> ScenarioConfig {
    let m = SystemModel::isothermal(1.0);
    let rho_l = left_rho.unwrap_or(rho);
    ScenarioConfig {
        name: name.to_string(),
        model_left: m,
        model_right: m,
        germ: Germ::Particle { lambda },
        left: PrimitiveState::new(rho_l, q / rho_l),
        right: PrimitiveState::new(rho, q / rho),
        domain: [-0.5, 0.5],
        cells,
        courant: DEFAULT_COURANT,
        final_time: t,
        flux: FluxKind::Rusanov,
        speed: SpeedMode::Global,
        solver: SolverOptions::default(),
        output_dir: None,
    }
}

fn heat(name: &str, lambda: f64, mu: f64) -> ScenarioConfig {
    let (gamma, rho_ref) = (1.5, 1.0);
    let m = SystemModel::IdealGasEuler { gamma, rho_ref };
    let inflow = PrimitiveState::with_pressure(4.0, 1.0, 4.0);
    ScenarioConfig {
        name: name.to_string(),
        model_left: m,
        model_right: m,
        germ: Germ::HeatExchange {
            lambda,
            mu,
            s_p: 2.0,
            rho_ref,
            gamma,
            orientation: HeatOrientation::Relaxing,
        },
        left: inflow,
        right: inflow,
        domain: [-0.1, 0.1],
        cells: 500,
        courant: DEFAULT_COURANT,
        final_time: 0.03,
        flux: FluxKind::Rusanov,
        speed: SpeedMode::Global,
        solver: SolverOptions::default(),
        output_dir: None,
    }
}

fn two_gas(name: &str, right: PrimitiveState) -> ScenarioConfig {
    let (gamma_l, gamma_r) = (1.4, 1.28);
    ScenarioConfig {
        name: name.to_string(),
        model_left: SystemModel::ideal_gas(gamma_l),
        model_right: SystemModel::ideal_gas(gamma_r),
        germ: Germ::FluxCoupling { gamma_l, gamma_r },
        left: PrimitiveState::with_pressure(1.6, 0.4, 2.35),
        right,
        domain: [-0.5, 0.5],
        cells: 200,
        courant: DEFAULT_COURANT,
        final_time: 0.12,
        flux: FluxKind::Force,
        speed: SpeedMode::Global,
        solver: SolverOptions::default(),
        output_dir: None,
    }
}

fn nozzle(
    name: &str,
    alpha: (f64, f64),
    left: PrimitiveState,
    right: PrimitiveState,
    t: f64,
) -> ScenarioConfig {
    let law = PressureLaw::CUBIC;
    ScenarioConfig {
        name: name.to_string(),
        model_left: SystemModel::nozzle(alpha.0, law),
        model_right: SystemModel::nozzle(alpha.1, law),
        germ: Germ::Nozzle {
            alpha_l: alpha.0,
            alpha_r: alpha.1,
            law,
        },
        left,
        right,
        domain: [-0.5, 0.5],
        cells: 100,
        courant: DEFAULT_COURANT,
        final_time: t,
        flux: FluxKind::Rusanov,
        speed: SpeedMode::Global,
        solver: SolverOptions::default(),
        output_dir: None,
    }
}

pub fn builtin_scenario(name: &str) -> Result<ScenarioConfig> {
    let cfg = match name {
        "test1" => particle(name, 3.0, 1.0, 1.0, None, 200, 0.1),
        "test2" => particle(name, 20.0, 0.0, 0.5, Some(1.0), 200, 0.1),
        "test3" => particle(name, 1.0, 3.0, 1.0, None, 200, 0.08),
        "test4" => particle(name, 1.0, 3.0, 10.0, None, 800, 0.08),
        "test5" => particle(name, 2.5, 3.0, 10.0, None, 200, 0.08),
        "test6" => heat(name, 1.0, 0.0),
        "test7" => heat(name, 0.0, 0.5),
        "test8" => heat(name, 1.0, 0.5),
        "test9" => two_gas(name, PrimitiveState::with_pressure(1.6, 0.4, 2.35)),
        "test10" => two_gas(name, PrimitiveState::with_pressure(1.4, 0.4, 1.9)),
        "test11" => nozzle(
            name,
            (0.3, 0.4),
            PrimitiveState::new(0.206052848877390, -0.003218270138816),
            PrimitiveState::new(0.099, -0.015876669673295),
            1.0,
        ),
        "test12" => nozzle(
            name,
            (1.0, 100.0),
            PrimitiveState::new(0.988056834959612, 0.125759712385390),
            PrimitiveState::new(1.01, 0.018403108075689),
            0.15,
        ),
        _ => {
            return Err(Error::UnknownScenario {
                name: name.to_string(),
                valid: BUILTIN_NAMES.join(", "),
            })
        }
    };
    Ok(cfg)
}

/// Trace values `(rho-, w-, rho+, w+)` in primitive form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrimitiveTraces {
    pub rho_minus: f64,
    pub u_minus: f64,
    pub rho_plus: f64,
    pub u_plus: f64,
}

impl PrimitiveTraces {
    pub fn as_array(&self) -> [f64; 4] {
        [self.rho_minus, self.u_minus, self.rho_plus, self.u_plus]
    }

    pub fn from_traces(left: &SystemModel, right: &SystemModel, tr: &TraceSolution) -> Self {
        PrimitiveTraces {
            rho_minus: left.density(&tr.um),
            u_minus: left.velocity(&tr.um),
            rho_plus: right.density(&tr.up),
            u_plus: right.velocity(&tr.up),
        }
    }

    /// Conserved trace pair for barotropic side models.
    pub fn conserved(&self, left: &SystemModel, right: &SystemModel) -> Result<(State, State)> {
        Ok((
            left.from_primitive(self.rho_minus, self.u_minus, None)?,
            right.from_primitive(self.rho_plus, self.u_plus, None)?,
        ))
    }
}

/// Published trace error for one flux and cell width.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub flux: FluxKind,
    pub dx: f64,
    /// Errors on `(rho-, w-, rho+, w+)`.
    pub errors: [f64; 4],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceData {
    pub scenario: String,
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact_traces: Option<PrimitiveTraces>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub error_table: Vec<ErrorRow>,
}

impl ReferenceData {
    pub fn row(&self, flux: FluxKind, dx: f64) -> Option<&ErrorRow> {
        self.error_table
            .iter()
            .find(|r| r.flux == flux && (r.dx - dx).abs() <= 1e-9 * dx)
    }
}

fn rows(table: [(FluxKind, f64, [f64; 4]); 4]) -> Vec<ErrorRow> {
    table
        .into_iter()
        .map(|(flux, dx, errors)| ErrorRow { flux, dx, errors })
        .collect()
}

pub fn reference_solution(cfg: &ScenarioConfig) -> ReferenceData {
    use FluxKind::{Force, Rusanov};
    let (source, exact, table) = match cfg.name.as_str() {
        "test11" => (
            "published exact traces and error table",
            Some(PrimitiveTraces {
                rho_minus: 0.1440929013128,
                u_minus: 0.10409950707725,
                rho_plus: 0.15,
                u_plus: 0.075,
            }),
            rows([
                (Rusanov, 1e-2, [6.22e-3, 1.36e-4, 3.09e-4, 6.931e-5]),
                (Rusanov, 1e-3, [8.83e-6, 8.26e-5, 1.86e-5, 5.48e-5]),
                (Force, 1e-2, [1.49e-4, 1.38e-4, 1.54e-4, 1.15e-4]),
                (Force, 1e-3, [4.54e-6, 4.59e-5, 9.99e-6, 3.04e-5]),
            ]),
        ),
        "test12" => (
            "published exact traces and error table",
            Some(PrimitiveTraces {
                rho_minus: 0.9980372070299,
                u_minus: 0.108472909864928,
                rho_plus: 1.0,
                u_plus: 0.0010826,
            }),
            rows([
                (Rusanov, 1e-2, [4.96e-7, 2.27e-5, 2.45e-6, 2.91e-7]),
                (Rusanov, 1e-3, [6.35e-7, 6.3e-7, 6.63e-7, 7.57e-9]),
                (Force, 1e-2, [1.68e-6, 1.63e-7, 1.69e-6, 3.35e-8]),
                (Force, 1e-3, [4.82e-7, 3.13e-8, 4.83e-7, 1.22e-9]),
            ]),
        ),
        _ => (
            "self-consistency: exact side Riemann fans from the numeric traces",
            None,
            Vec::new(),
        ),
    };
    ReferenceData {
        scenario: cfg.name.clone(),
        source: source.to_string(),
        exact_traces: exact,
        error_table: table,
    }
}

/// Absolute errors at the interface for one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceErrors {
    pub scenario: String,
    pub flux: FluxKind,
    pub dx: f64,
    pub exact: PrimitiveTraces,
    /// Final values of the two cells adjacent to the interface.
    pub cells: PrimitiveTraces,
    /// `|cells - exact|` on `(rho-, w-, rho+, w+)`; the headline errors.
    pub errors: [f64; 4],
    /// Ghost traces solved on the final grid.
    pub solver_traces: PrimitiveTraces,
    pub solver_trace_errors: [f64; 4],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub published: Option<[f64; 4]>,
}

impl TraceErrors {
    /// `errors / published`, when a published row exists.
    pub fn ratios(&self) -> Option<[f64; 4]> {
        self.published
            .map(|p| [0, 1, 2, 3].map(|k| self.errors[k] / p[k]))
    }
}

pub fn trace_error(
    cfg: &ScenarioConfig,
    traj: &Trajectory,
    reference: &ReferenceData,
) -> Option<TraceErrors> {
    let exact = reference.exact_traces?;
    let (ml, mr) = (&cfg.model_left, &cfg.model_right);
    let (i0, i1) = traj.grid.interface_cells();
    let (c0, c1) = (&traj.grid.cells[i0], &traj.grid.cells[i1]);
    let cells = PrimitiveTraces {
        rho_minus: ml.density(c0),
        u_minus: ml.velocity(c0),
        rho_plus: mr.density(c1),
        u_plus: mr.velocity(c1),
    };
    let solver_traces = PrimitiveTraces::from_traces(ml, mr, &traj.final_traces);
    let diff = |a: &PrimitiveTraces| {
        let (n, e) = (a.as_array(), exact.as_array());
        [0, 1, 2, 3].map(|k| (n[k] - e[k]).abs())
    };
    Some(TraceErrors {
        scenario: cfg.name.clone(),
        flux: cfg.flux,
        dx: cfg.dx(),
        exact,
        cells,
        errors: diff(&cells),
        solver_traces,
        solver_trace_errors: diff(&solver_traces),
        published: reference.row(cfg.flux, cfg.dx()).map(|r| r.errors),
    })
}

/// Exact solution on each side built from the initial data and the final
/// traces: `W(x/t; U_L, U-)` for `x < 0` and `W(x/t; U+, U_R)` for `x > 0`.
/// Available for isothermal and ideal-gas sides.
pub fn reconstruct_reference(cfg: &ScenarioConfig, traj: &Trajectory) -> Result<Vec<State>> {
    let grid = &traj.grid;
    let t = grid.time;
    if !(t > 0.0) {
        return Ok(traj.initial.cells.clone());
    }
    let ul = cfg.left.conserved(&cfg.model_left)?;
    let ur = cfg.right.conserved(&cfg.model_right)?;
    let tr = &traj.final_traces;
    let left = side_sampler(&cfg.model_left, ul, tr.um)?;
    let right = side_sampler(&cfg.model_right, tr.up, ur)?;
    Ok((0..grid.len())
        .map(|j| {
            let xi = grid.x_center(j) / t;
            if grid.is_left(j) {
                left(xi)
            } else {
                right(xi)
            }
        })
        .collect())
}

fn side_sampler(model: &SystemModel, l: State, r: State) -> Result<Box<dyn Fn(f64) -> State>> {
    match *model {
        SystemModel::IsothermalEuler { c } => {
            let fan = solve_riemann(c, l, r)?;
            Ok(Box::new(move |xi| fan.sample(xi)))
        }
        SystemModel::IdealGasEuler { gamma, .. } => {
            let fan = ideal_gas::solve(gamma, l, r)?;
            Ok(Box::new(move |xi| fan.sample(xi)))
        }
        SystemModel::BarotropicNozzle { .. } => Err(Error::Unsupported(
            "no exact Riemann solver for the nozzle model".to_string(),
        )),
    }
}

/// `dx * sum |a_j - b_j|` on one component.
pub fn l1_distance(a: &[State], b: &[State], k: usize, dx: f64) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x[k] - y[k]).abs()).sum::<f64>() * dx
}

pub fn total_variation(cells: &[State], k: usize) -> f64 {
    cells.windows(2).map(|w| (w[1][k] - w[0][k]).abs()).sum()
}
