//! Explicit time marching on a uniform grid with the interface on the face
//! between the last left cell and the first right cell.
//!
//! Cells `0..n_left` carry the left model and the rest the right model. The
//! interface cells see ghost traces: the last left cell uses `g_L(U0, U-)` on
//! its right face and the first right cell uses `g_R(U+, U1)` on its left
//! face. The outer boundaries are transmissive (ghost = copy of the edge cell).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fluxes::{self, FluxKind};
use crate::interface::{Branch, InterfaceSolver, TraceSolution};
use crate::models::SystemModel;
use crate::state::State;

pub const DEFAULT_COURANT: f64 = 0.95;
pub const DEFAULT_FALLBACK_LIMIT: usize = 50;
/// Slack in the interface entropy flux comparison.
pub const INTERFACE_ENTROPY_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub cells: Vec<State>,
    pub dx: f64,
    /// Number of cells left of `x = 0`.
    pub n_left: usize,
    pub time: f64,
}

impl Grid {
    pub fn new(cells: Vec<State>, dx: f64, n_left: usize) -> Result<Self> {
        if !(dx > 0.0 && dx.is_finite()) {
            return Err(Error::Config(format!("cell width {dx}")));
        }
        if n_left == 0 || n_left >= cells.len() {
            return Err(Error::Config(format!(
                "interface index {n_left} must leave cells on both sides of {} cells",
                cells.len()
            )));
        }
        Ok(Grid {
            cells,
            dx,
            n_left,
            time: 0.0,
        })
    }

    /// Piecewise constant data `left | right`.
    pub fn riemann(left: State, right: State, n_left: usize, n_right: usize, dx: f64) -> Result<Self> {
        let mut cells = vec![left; n_left];
        cells.extend(std::iter::repeat_n(right, n_right));
        Grid::new(cells, dx, n_left)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn x_left(&self) -> f64 {
        -(self.n_left as f64) * self.dx
    }

    pub fn x_center(&self, j: usize) -> f64 {
        (j as f64 - self.n_left as f64 + 0.5) * self.dx
    }

    /// Indices of the two cells adjacent to the interface.
    pub fn interface_cells(&self) -> (usize, usize) {
        (self.n_left - 1, self.n_left)
    }

    pub fn is_left(&self, j: usize) -> bool {
        j < self.n_left
    }

    /// `sum_j U_j dx` per component.
    pub fn totals(&self) -> Vec<f64> {
        let d = self.cells[0].len();
        let mut out = vec![0.0; d];
        for u in &self.cells {
            for (k, v) in u.iter().enumerate() {
                out[k] += v;
            }
        }
        out.iter().map(|v| v * self.dx).collect()
    }

    pub fn max_abs_difference(&self, other: &Grid) -> f64 {
        self.cells
            .iter()
            .zip(&other.cells)
            .map(|(a, b)| (*a - *b).norm_inf())
            .fold(0.0, f64::max)
    }
}

/// `courant * dx / speed`, or `dt_max` for a motionless state.
pub fn cfl_dt(dx: f64, speed: f64, courant: f64, dt_max: f64) -> Result<f64> {
    if !(courant > 0.0 && courant < 1.0) {
        return Err(Error::Config(format!("Courant number {courant} outside (0, 1)")));
    }
    if speed > 0.0 {
        Ok(courant * dx / speed)
    } else {
        Ok(dt_max)
    }
}

/// How the Rusanov/FORCE speed `A` is chosen on each face.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpeedMode {
    /// One `A` per step, shared by all faces and the interface.
    #[default]
    Global,
    /// `A` chosen per face from its two states.
    Local,
}

impl std::str::FromStr for SpeedMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "global" => Ok(SpeedMode::Global),
            "local" => Ok(SpeedMode::Local),
            other => Err(Error::Config(format!(
                "unknown speed mode '{other}' (expected global or local)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scheme {
    pub solver: InterfaceSolver,
    pub speed: SpeedMode,
    pub courant: f64,
    pub dt_max: f64,
    pub fallback_limit: usize,
}

/// Face speeds and interface traces for one step, computed from the pre-step
/// grid.
#[derive(Clone, Debug, PartialEq)]
pub struct StepPlan {
    pub traces: TraceSolution,
    /// Speed per face, `face_a[j]` sits left of cell `j`; the outer faces carry
    /// the edge cell's wave speed and the interface face carries `A_used`.
    pub face_a: Vec<f64>,
    /// Largest wave speed over cells, faces and the interface.
    pub max_speed: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// Time at the start of the step.
    pub time: f64,
    pub dt: f64,
    pub traces: TraceSolution,
}

/// Fluxes used in one update.
#[derive(Clone, Debug, PartialEq)]
pub struct StepFluxes {
    /// Face fluxes seen by the cell on the left of face `j` (`j = 1..=n`).
    pub out: Vec<State>,
    /// Face fluxes seen by the cell on the right of face `j` (`j = 0..n`).
    pub inn: Vec<State>,
}

impl Scheme {
    pub fn new(solver: InterfaceSolver, courant: f64) -> Result<Self> {
        cfl_dt(1.0, 1.0, courant, 1.0)?;
        Ok(Scheme {
            solver,
            speed: SpeedMode::default(),
            courant,
            dt_max: f64::INFINITY,
            fallback_limit: DEFAULT_FALLBACK_LIMIT,
        })
    }

    pub fn model(&self, grid: &Grid, j: usize) -> SystemModel {
        if grid.is_left(j) {
            self.solver.left.model
        } else {
            self.solver.right.model
        }
    }

    pub fn kind(&self) -> FluxKind {
        self.solver.kind()
    }

    pub fn check_grid(&self, grid: &Grid) -> Result<()> {
        for (j, u) in grid.cells.iter().enumerate() {
            self.model(grid, j).check(u).map_err(|e| Error::InvalidCell {
                cell: j,
                time: grid.time,
                source: Box::new(e),
            })?;
        }
        Ok(())
    }

    pub fn plan(&self, grid: &Grid, prev: Option<&TraceSolution>) -> Result<StepPlan> {
        let n = grid.len();
        let (i0, i1) = grid.interface_cells();
        let mut face_a = vec![0.0; n + 1];
        let mut max_speed: f64 = 0.0;
        for (j, u) in grid.cells.iter().enumerate() {
            max_speed = max_speed.max(self.model(grid, j).max_wave_speed(u)?);
        }
        face_a[0] = self.model(grid, 0).max_wave_speed(&grid.cells[0])?;
        face_a[n] = self.model(grid, n - 1).max_wave_speed(&grid.cells[n - 1])?;
        for j in (1..n).filter(|&j| j != grid.n_left) {
            face_a[j] = fluxes::select_a(&self.model(grid, j), &grid.cells[j - 1], &grid.cells[j])?;
            max_speed = max_speed.max(face_a[j]);
        }
        let traces = match self.speed {
            SpeedMode::Local => {
                let tr = self.solver.solve(&grid.cells[i0], &grid.cells[i1], prev)?;
                max_speed = max_speed.max(tr.a_used);
                tr
            }
            SpeedMode::Global => {
                // one A for every face: raise it until every face and the
                // interface half-pairs accept it
                let mut a = max_speed;
                let mut rounds = 0;
                loop {
                    rounds += 1;
                    if rounds > 50 {
                        return Err(Error::DegenerateInput(format!(
                            "no shared speed found at t = {} (last A = {a})",
                            grid.time
                        )));
                    }
                    let tr = self
                        .solver
                        .solve_from(&grid.cells[i0], &grid.cells[i1], a, prev)?;
                    let mut need = tr.a_used;
                    for j in (1..n).filter(|&j| j != grid.n_left) {
                        need = need.max(fluxes::grow_a(
                            &self.model(grid, j),
                            &grid.cells[j - 1],
                            &grid.cells[j],
                            need,
                        )?);
                    }
                    if need <= tr.a_used {
                        face_a[1..n].fill(need);
                        max_speed = need;
                        break tr;
                    }
                    a = need;
                }
            }
        };
        face_a[grid.n_left] = traces.a_used;
        Ok(StepPlan {
            traces,
            face_a,
            max_speed,
        })
    }

    pub fn dt(&self, grid: &Grid, plan: &StepPlan) -> Result<f64> {
        cfl_dt(grid.dx, plan.max_speed, self.courant, self.dt_max)
    }

    pub fn fluxes(&self, grid: &Grid, plan: &StepPlan) -> Result<StepFluxes> {
        let n = grid.len();
        let (left, right) = (&self.solver.left, &self.solver.right);
        let tr = &plan.traces;
        let d = grid.cells[0].len();
        let mut out = vec![State::zeros(d); n + 1];
        let mut inn = vec![State::zeros(d); n + 1];
        // transmissive ghosts: g(U, U) = f(U)
        inn[0] = left.model.flux(&grid.cells[0])?;
        out[n] = right.model.flux(&grid.cells[n - 1])?;
        for j in 1..n {
            let (ul, ur, a) = (&grid.cells[j - 1], &grid.cells[j], plan.face_a[j]);
            if j == grid.n_left {
                out[j] = left.eval(ul, &tr.um, a)?;
                inn[j] = right.eval(&tr.up, ur, a)?;
            } else {
                let side = if grid.is_left(j) { left } else { right };
                let g = side.eval(ul, ur, a)?;
                out[j] = g;
                inn[j] = g;
            }
        }
        Ok(StepFluxes { out, inn })
    }

    /// One conservative update with a given `dt`.
    pub fn apply(&self, grid: &Grid, fl: &StepFluxes, dt: f64) -> Result<Grid> {
        let ratio = dt / grid.dx;
        let time = grid.time + dt;
        let mut cells = Vec::with_capacity(grid.len());
        for (j, u) in grid.cells.iter().enumerate() {
            let next = *u - (fl.out[j + 1] - fl.inn[j]) * ratio;
            self.model(grid, j).check(&next).map_err(|e| Error::InvalidCell {
                cell: j,
                time,
                source: Box::new(e),
            })?;
            cells.push(next);
        }
        Ok(Grid {
            cells,
            dx: grid.dx,
            n_left: grid.n_left,
            time,
        })
    }

    /// Advances by the CFL step, clipped to `t_end`.
    pub fn step(&self, grid: &Grid, prev: Option<&TraceSolution>, t_end: f64) -> Result<StepOutcome> {
        let plan = self.plan(grid, prev)?;
        let dt = self.dt(grid, &plan)?.min(t_end - grid.time);
        let fl = self.fluxes(grid, &plan)?;
        let next = self.apply(grid, &fl, dt)?;
        Ok(StepOutcome {
            grid: next,
            dt,
            plan,
            fluxes: fl,
        })
    }

    pub fn run(&self, initial: Grid, t_end: f64, opts: RunOptions) -> Result<Trajectory> {
        self.check_grid(&initial)?;
        if !(t_end >= initial.time) {
            return Err(Error::Config(format!(
                "final time {t_end} before start {}",
                initial.time
            )));
        }
        let mut ledger = ConservationLedger::new(&initial, &self.solver);
        let mut entropy = opts.entropy.then(EntropyLog::default);
        let mut history = Vec::new();
        let mut grid = initial.clone();
        let mut streak = 0;
        let mut prev: Option<TraceSolution> = None;

        while grid.time < t_end {
            if history.len() >= opts.max_steps {
                return Err(Error::Config(format!(
                    "step limit {} reached at t = {}",
                    opts.max_steps, grid.time
                )));
            }
            let step = self.step(&grid, prev.as_ref(), t_end)?;
            let traces = step.plan.traces;
            streak = if traces.branch == Branch::LeastSquaresFallback {
                streak + 1
            } else {
                0
            };
            if streak > self.fallback_limit {
                return Err(Error::FallbackStreak {
                    steps: streak,
                    time: grid.time,
                });
            }
            ledger.record(&step);
            if let Some(log) = entropy.as_mut() {
                let report = entropy_inequality_report(self, &grid, &step)?;
                log.absorb(history.len(), &report);
            }
            history.push(StepRecord {
                time: grid.time,
                dt: step.dt,
                traces,
            });
            // the clipped last step lands on t_end exactly
            grid = step.grid;
            if t_end - grid.time <= 4.0 * f64::EPSILON * t_end.abs() {
                grid.time = t_end;
            }
            prev = Some(traces);
        }
        let (i0, i1) = grid.interface_cells();
        let final_traces = self
            .solver
            .solve(&grid.cells[i0], &grid.cells[i1], prev.as_ref())?;
        Ok(Trajectory {
            initial,
            grid,
            history,
            final_traces,
            ledger,
            entropy,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome {
    pub grid: Grid,
    pub dt: f64,
    pub plan: StepPlan,
    pub fluxes: StepFluxes,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunOptions {
    /// Evaluate the discrete entropy inequality every step.
    pub entropy: bool,
    pub max_steps: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            entropy: false,
            max_steps: 10_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub initial: Grid,
    pub grid: Grid,
    pub history: Vec<StepRecord>,
    /// Traces solved on the final grid.
    pub final_traces: TraceSolution,
    pub ledger: ConservationLedger,
    pub entropy: Option<EntropyLog>,
}

impl Trajectory {
    pub fn fallback_steps(&self) -> usize {
        self.history
            .iter()
            .filter(|r| r.traces.branch == Branch::LeastSquaresFallback)
            .count()
    }
}

/// Running totals `sum U dx` against boundary and interface flux integrals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConservationLedger {
    pub components: Vec<String>,
    /// Components the germ conserves across the interface.
    pub conserved: Vec<usize>,
    pub initial: Vec<f64>,
    /// `int (f(U_last) - f(U_first)) dt`.
    pub boundary_outflow: Vec<f64>,
    /// `int (g_R(U+, U1) - g_L(U0, U-)) dt`, the net interface source.
    pub interface_source: Vec<f64>,
    pub current: Vec<f64>,
    /// Worst relative balance residual over all steps.
    pub max_residual: Vec<f64>,
    /// Per-step maximum over the conserved components.
    pub history: Vec<f64>,
}

impl ConservationLedger {
    pub fn new(grid: &Grid, solver: &InterfaceSolver) -> Self {
        let totals = grid.totals();
        let d = totals.len();
        ConservationLedger {
            components: solver
                .left
                .model
                .component_names()
                .iter()
                .map(|s| s.to_string())
                .collect(),
            conserved: solver.germ.conserved_components(&solver.left.model),
            initial: totals.clone(),
            boundary_outflow: vec![0.0; d],
            interface_source: vec![0.0; d],
            current: totals,
            max_residual: vec![0.0; d],
            history: Vec::new(),
        }
    }

    /// `|current - initial + outflow| / max(|initial|, 1)`.
    pub fn residual(&self, k: usize) -> f64 {
        (self.current[k] - self.initial[k] + self.boundary_outflow[k]).abs() / self.initial[k].abs().max(1.0)
    }

    /// Balance including the interface source; zero up to rounding for
    /// every component.
    pub fn closure(&self, k: usize) -> f64 {
        (self.current[k] - self.initial[k] + self.boundary_outflow[k] - self.interface_source[k]).abs()
            / self.initial[k].abs().max(1.0)
    }

    pub fn worst_conserved(&self) -> f64 {
        self.conserved
            .iter()
            .map(|&k| self.max_residual[k])
            .fold(0.0, f64::max)
    }

    fn record(&mut self, step: &StepOutcome) {
        let n = step.grid.len();
        let i = step.grid.n_left;
        let fl = &step.fluxes;
        for k in 0..self.current.len() {
            self.boundary_outflow[k] += step.dt * (fl.out[n][k] - fl.inn[0][k]);
            self.interface_source[k] += step.dt * (fl.inn[i][k] - fl.out[i][k]);
        }
        self.current = step.grid.totals();
        for k in 0..self.current.len() {
            self.max_residual[k] = self.max_residual[k].max(self.residual(k));
        }
        let worst = self
            .conserved
            .iter()
            .map(|&k| self.residual(k))
            .fold(0.0, f64::max);
        self.history.push(worst);
    }
}

/// Discrete entropy balance of one step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    /// `E(U_j^{n+1}) - E(U_j^n) + dt/dx (F_{j+1/2,-} - F_{j-1/2,+})`.
    pub residuals: Vec<f64>,
    /// `F_{1/2,-}`, from `(U0, U-)`.
    pub interface_minus: f64,
    /// `F_{1/2,+}`, from `(U+, U1)`.
    pub interface_plus: f64,
}

impl EntropyReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn interface_ok(&self) -> bool {
        self.interface_minus >= self.interface_plus - INTERFACE_ENTROPY_TOL
    }
}

/// Rusanov numerical entropy fluxes on every face of the pre-step grid.
pub fn entropy_inequality_report(
    scheme: &Scheme,
    before: &Grid,
    step: &StepOutcome,
) -> Result<EntropyReport> {
    let n = before.len();
    let (left, right) = (&scheme.solver.left.model, &scheme.solver.right.model);
    let tr = &step.plan.traces;
    let mut out = vec![0.0; n + 1];
    let mut inn = vec![0.0; n + 1];
    inn[0] = left.entropy_flux(&before.cells[0])?;
    out[n] = right.entropy_flux(&before.cells[n - 1])?;
    let (mut fm, mut fp) = (0.0, 0.0);
    for j in 1..n {
        let (ul, ur, a) = (&before.cells[j - 1], &before.cells[j], step.plan.face_a[j]);
        if j == before.n_left {
            fm = fluxes::numerical_entropy_flux(left, ul, &tr.um, a)?;
            fp = fluxes::numerical_entropy_flux(right, &tr.up, ur, a)?;
            out[j] = fm;
            inn[j] = fp;
        } else {
            let model = scheme.model(before, j);
            let f = fluxes::numerical_entropy_flux(&model, ul, ur, a)?;
            out[j] = f;
            inn[j] = f;
        }
    }
    let ratio = step.dt / before.dx;
    let mut residuals = Vec::with_capacity(n);
    for j in 0..n {
        let model = scheme.model(before, j);
        let de = model.entropy(&step.grid.cells[j])? - model.entropy(&before.cells[j])?;
        residuals.push(de + ratio * (out[j + 1] - inn[j]));
    }
    Ok(EntropyReport {
        residuals,
        interface_minus: fm,
        interface_plus: fp,
    })
}

/// Worst entropy figures over a run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EntropyLog {
    pub max_residual: f64,
    /// `(step, cell)` of `max_residual`.
    pub worst_at: Option<(usize, usize)>,
    /// Smallest `F_{1/2,-} - F_{1/2,+}` seen.
    pub min_interface_gap: f64,
    pub interface_violations: usize,
    pub steps: usize,
}

impl EntropyLog {
    fn absorb(&mut self, step: usize, report: &EntropyReport) {
        for (j, &r) in report.residuals.iter().enumerate() {
            if self.worst_at.is_none() || r > self.max_residual {
                self.max_residual = r;
                self.worst_at = Some((step, j));
            }
        }
        let gap = report.interface_minus - report.interface_plus;
        if self.steps == 0 || gap < self.min_interface_gap {
            self.min_interface_gap = gap;
        }
        if !report.interface_ok() {
            self.interface_violations += 1;
        }
        self.steps += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::germs::Germ;
    use crate::interface::SolverOptions;

    fn iso_scheme(kind: FluxKind, germ: Germ) -> Scheme {
        let m = SystemModel::isothermal(1.0);
        Scheme::new(
            InterfaceSolver::new(kind, m, m, germ, SolverOptions::default()).unwrap(),
            0.95,
        )
        .unwrap()
    }

    #[test]
    fn cfl_examples() {
        let s = iso_scheme(FluxKind::Rusanov, Germ::Classical);
        let rest = Grid::riemann(State::two(1.0, 0.0), State::two(1.0, 0.0), 5, 5, 0.01).unwrap();
        let plan = s.plan(&rest, None).unwrap();
        assert!((s.dt(&rest, &plan).unwrap() - 0.0095).abs() < 1e-15);
        let moving = Grid::riemann(State::two(1.0, 3.0), State::two(1.0, 3.0), 5, 5, 0.01).unwrap();
        let plan = s.plan(&moving, None).unwrap();
        assert!((s.dt(&moving, &plan).unwrap() - 0.002375).abs() < 1e-15);
        assert!(cfl_dt(0.01, 1.0, 0.0, 1.0).is_err());
        assert!(cfl_dt(0.01, 1.0, 1.0, 1.0).is_err());
        assert_eq!(cfl_dt(0.01, 0.0, 0.5, 0.25).unwrap(), 0.25);
    }

    #[test]
    fn cell_centers_put_the_interface_at_zero() {
        let g = Grid::riemann(State::two(1.0, 0.0), State::two(1.0, 0.0), 3, 7, 0.1).unwrap();
        assert_eq!(g.x_left(), -0.30000000000000004);
        assert!((g.x_center(2) + 0.05).abs() < 1e-15);
        assert!((g.x_center(3) - 0.05).abs() < 1e-15);
        assert_eq!(g.interface_cells(), (2, 3));
        assert!(Grid::riemann(State::two(1.0, 0.0), State::two(1.0, 0.0), 0, 4, 0.1).is_err());
    }

    #[test]
    fn zero_duration_returns_initial_grid() {
        let s = iso_scheme(FluxKind::Rusanov, Germ::Particle { lambda: 1.0 });
        let g = Grid::riemann(State::two(1.0, 0.5), State::two(2.0, 0.5), 4, 4, 0.1).unwrap();
        let t = s.run(g.clone(), 0.0, RunOptions::default()).unwrap();
        assert_eq!(t.grid, g);
        assert!(t.history.is_empty());
    }

    #[test]
    fn single_step_is_two_rusanov_updates_plus_interface() {
        let s = iso_scheme(FluxKind::Rusanov, Germ::Particle { lambda: 1.0 });
        let m = SystemModel::isothermal(1.0);
        let g = Grid::riemann(State::two(3.0, 1.0), State::two(2.0, 0.2), 4, 4, 0.05).unwrap();
        let out = s.step(&g, None, 1.0).unwrap();
        let tr = out.plan.traces;
        let r = out.dt / g.dx;
        // cell 3: Rusanov on its left face, g(U0, U-) on its right face
        let a2 = fluxes::select_a(&m, &g.cells[2], &g.cells[3]).unwrap();
        let want3 = g.cells[3]
            - (fluxes::rusanov(&m, &g.cells[3], &tr.um, tr.a_used).unwrap()
                - fluxes::rusanov(&m, &g.cells[2], &g.cells[3], a2).unwrap())
                * r;
        assert!((out.grid.cells[3] - want3).norm_inf() < 1e-15);
        let a5 = fluxes::select_a(&m, &g.cells[4], &g.cells[5]).unwrap();
        let want4 = g.cells[4]
            - (fluxes::rusanov(&m, &g.cells[4], &g.cells[5], a5).unwrap()
                - fluxes::rusanov(&m, &tr.up, &g.cells[4], tr.a_used).unwrap())
                * r;
        assert!((out.grid.cells[4] - want4).norm_inf() < 1e-15);
        // untouched far cells
        assert_eq!(out.grid.cells[0], g.cells[0]);
        assert_eq!(out.grid.cells[7], g.cells[7]);

        let mut ledger = ConservationLedger::new(&g, &s.solver);
        ledger.record(&out);
        assert!(ledger.residual(0) < 1e-15);
        assert!(ledger.closure(1) < 1e-15);
        // drag removes momentum when the interface flow is positive
        assert!(tr.um[1] > 0.0);
        assert!(ledger.interface_source[1] < 0.0);
    }

    #[test]
    fn exact_stationary_shock_never_moves() {
        for kind in [FluxKind::Rusanov, FluxKind::Force] {
            let s = iso_scheme(kind, Germ::Classical);
            let g = Grid::riemann(State::two(1.0, 2.0), State::two(4.0, 2.0), 10, 10, 0.05).unwrap();
            let mut cur = g.clone();
            let mut prev = None;
            for _ in 0..100 {
                let out = s.step(&cur, prev.as_ref(), f64::INFINITY).unwrap();
                prev = Some(out.plan.traces);
                cur = out.grid;
            }
            assert!(cur.max_abs_difference(&g) < 1e-14, "{kind}");
        }
    }

    #[test]
    fn uniform_state_has_zero_entropy_residual() {
        let s = iso_scheme(FluxKind::Rusanov, Germ::Classical);
        let g = Grid::riemann(State::two(2.0, 0.7), State::two(2.0, 0.7), 5, 5, 0.1).unwrap();
        let out = s.step(&g, None, 1.0).unwrap();
        let rep = entropy_inequality_report(&s, &g, &out).unwrap();
        assert!(rep.residuals.iter().all(|r| r.abs() < 1e-14));
        assert!(rep.interface_ok());
    }

    #[test]
    fn invalid_update_reports_cell_and_time() {
        let mut s = iso_scheme(FluxKind::Rusanov, Germ::Classical);
        s.courant = 0.95;
        let g = Grid::riemann(State::two(1.0, 0.0), State::two(1.0, 0.0), 2, 2, 0.1).unwrap();
        let plan = s.plan(&g, None).unwrap();
        let mut fl = s.fluxes(&g, &plan).unwrap();
        fl.out[1] = State::two(10.0, 0.0);
        match s.apply(&g, &fl, 0.1) {
            Err(Error::InvalidCell { cell, time, .. }) => {
                assert_eq!(cell, 0);
                assert!((time - 0.1).abs() < 1e-15);
            }
            other => panic!("expected invalid cell, got {other:?}"),
        }
    }

    #[test]
    fn last_step_lands_on_final_time() {
        let s = iso_scheme(FluxKind::Rusanov, Germ::Particle { lambda: 1.0 });
        let g = Grid::riemann(State::two(3.0, 1.0), State::two(3.0, 1.0), 20, 20, 0.025).unwrap();
        let t = s.run(g, 0.0123, RunOptions::default()).unwrap();
        assert_eq!(t.grid.time, 0.0123);
        let total: f64 = t.history.iter().map(|r| r.dt).sum();
        assert!((total - 0.0123).abs() < 1e-15);
    }
}
