//! Interface traces `(U-, U+)` at `x = 0`.
//!
//! The traces satisfy the coupling conditions and cancel the fluctuations
//! entering the two interface cells:
//!
//! ```text
//! g_L(U0, U-) - f_L(U-) + f_R(U+) - g_R(U+, U1) = 0
//! ```
//!
//! Rusanov with the classical or particle germ on isothermal Euler is solved
//! in closed form (a cubic in the density half-jump), with entropy-based
//! candidate selection and a sonic fix when no candidate is admissible. Every
//! other combination goes through damped Newton on the stacked residual.
//! Godunov is restricted to the classical germ, where the traces are the
//! value of the Riemann fan at `x/t = 0`.

mod closed_form;
pub mod cubic;
mod newton;

use newton::System;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fluxes::{self, FluxKind, NumericalFlux};
use crate::germs::Germ;
use crate::models::SystemModel;
use crate::riemann;
use crate::state::State;

pub use cubic::{interface_momentum, sonic_exit_density, CubicProblem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `U- = U+ = U*`.
    Trivial,
    /// Stationary shock between the traces (classical germ).
    NontrivialShock,
    /// Root number `i` (ascending) of the particle cubic.
    CubicRoot(usize),
    /// `(U0, U1)` already satisfies the germ and is returned unchanged.
    Equilibrium,
    /// Riemann fan value at `x/t = 0`.
    Godunov,
    Newton,
    LeastSquaresFallback,
    SonicFix,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceSolution {
    #[serde(rename = "u_minus")]
    pub um: State,
    #[serde(rename = "u_plus")]
    pub up: State,
    pub branch: Branch,
    /// Max norm of the stacked germ and wave-cancellation residual.
    pub residual_norm: f64,
    pub a_used: f64,
    /// `F(U1) - F(U0) - A (E(U0) + E(U1) - E(U-) - E(U+))`; nonpositive when
    /// the half-pair entropy inequality holds.
    pub entropy_check: f64,
    pub admissible: bool,
    pub iterations: usize,
}

impl TraceSolution {
    /// Spatial mirror `(x, q) -> (-x, -q)`: sides swap and momenta flip.
    pub fn mirrored(&self) -> Self {
        TraceSolution {
            um: self.up.mirrored(),
            up: self.um.mirrored(),
            ..*self
        }
    }
}

/// Tie-break among several admissible candidates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    /// Closest `(rho-, rho+)` to the cell densities `(rho0, rho1)`.
    #[default]
    NearestCells,
    /// Closest to the previous traces, falling back to `NearestCells`.
    PreviousTraces,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    pub sonic_fix: bool,
    pub tie_break: TieBreak,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub fd_step: f64,
    pub max_a_resolves: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            sonic_fix: true,
            tie_break: TieBreak::NearestCells,
            newton_tol: 1e-10,
            newton_max_iter: 200,
            fd_step: 1e-7,
            max_a_resolves: 5,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InterfaceSolver {
    pub left: NumericalFlux,
    pub right: NumericalFlux,
    pub germ: Germ,
    pub options: SolverOptions,
}

impl InterfaceSolver {
    pub fn new(
        kind: FluxKind,
        left: SystemModel,
        right: SystemModel,
        germ: Germ,
        options: SolverOptions,
    ) -> Result<Self> {
        germ.validate(&left, &right)?;
        if kind == FluxKind::Godunov && germ != Germ::Classical {
            return Err(Error::Unsupported(format!(
                "Godunov interface coupling is only available for the classical germ, got {}",
                germ.name()
            )));
        }
        Ok(InterfaceSolver {
            left: NumericalFlux::new(kind, left)?,
            right: NumericalFlux::new(kind, right)?,
            germ,
            options,
        })
    }

    pub fn kind(&self) -> FluxKind {
        self.left.kind
    }

    fn same_model(&self) -> bool {
        self.left.model == self.right.model
    }

    /// `g_L(U0, U-) - f_L(U-) + f_R(U+) - g_R(U+, U1)`.
    pub fn wave_cancellation(&self, u0: &State, u1: &State, um: &State, up: &State, a: f64) -> Result<State> {
        let gl = self.left.eval(u0, um, a)?;
        let gr = self.right.eval(up, u1, a)?;
        Ok(gl - self.left.model.flux(um)? + self.right.model.flux(up)? - gr)
    }

    /// Max norm of germ residual and wave cancellation.
    pub fn residual_norm(&self, u0: &State, u1: &State, um: &State, up: &State, a: f64) -> Result<f64> {
        let g = self.germ.residual(&self.left.model, &self.right.model, um, up)?;
        let w = self.wave_cancellation(u0, u1, um, up, a)?;
        Ok(g.norm_inf().max(w.norm_inf()))
    }

    /// Left side minus right side of the half-pair entropy inequality.
    pub fn entropy_check(&self, u0: &State, u1: &State, um: &State, up: &State, a: f64) -> Result<f64> {
        let (l, r) = (&self.left.model, &self.right.model);
        let lhs = r.entropy_flux(u1)? - l.entropy_flux(u0)?;
        let rhs = a * (l.entropy(u0)? + r.entropy(u1)? - l.entropy(um)? - r.entropy(up)?);
        Ok(lhs - rhs)
    }

    fn initial_a(&self, u0: &State, u1: &State) -> Result<f64> {
        if self.same_model() {
            fluxes::select_a(&self.left.model, u0, u1)
        } else {
            Ok(self
                .left
                .model
                .max_wave_speed(u0)?
                .max(self.right.model.max_wave_speed(u1)?))
        }
    }

    /// Smallest admissible speed for both half-pairs, or `None` if `a`
    /// already satisfies the subcharacteristic condition on both.
    fn required_a(&self, sol: &TraceSolution, u0: &State, u1: &State, a: f64) -> Result<Option<f64>> {
        let al = fluxes::grow_a(&self.left.model, u0, &sol.um, a)?;
        let ar = fluxes::grow_a(&self.right.model, &sol.up, u1, a)?;
        let need = al.max(ar);
        Ok(if need > a { Some(need) } else { None })
    }

    /// Traces for cells `U0 | U1` adjacent to the interface.
    pub fn solve(&self, u0: &State, u1: &State, prev: Option<&TraceSolution>) -> Result<TraceSolution> {
        self.solve_from(u0, u1, 0.0, prev)
    }

    /// As [`InterfaceSolver::solve`] with the shared speed at least `a_min`.
    pub fn solve_from(
        &self,
        u0: &State,
        u1: &State,
        a_min: f64,
        prev: Option<&TraceSolution>,
    ) -> Result<TraceSolution> {
        self.left.model.check(u0)?;
        self.right.model.check(u1)?;
        if self.kind() == FluxKind::Godunov {
            return self.solve_godunov(u0, u1);
        }
        let mut a = self.initial_a(u0, u1)?.max(a_min);
        let mut sol = self.solve_with_a(u0, u1, a, prev)?;
        for _ in 0..self.options.max_a_resolves {
            match self.required_a(&sol, u0, u1, a)? {
                None => break,
                Some(need) => {
                    a = need.max(fluxes::A_GROWTH * a);
                    sol = self.solve_with_a(u0, u1, a, prev)?;
                }
            }
        }
        Ok(sol)
    }

    /// Solve with a fixed shared speed `a`.
    pub fn solve_with_a(
        &self,
        u0: &State,
        u1: &State,
        a: f64,
        prev: Option<&TraceSolution>,
    ) -> Result<TraceSolution> {
        match (self.kind(), self.germ, self.left.model) {
            (FluxKind::Rusanov, Germ::Classical, SystemModel::IsothermalEuler { .. })
            | (FluxKind::Rusanov, Germ::Particle { .. }, _) => self.closed_form(u0, u1, a, prev),
            (FluxKind::Force, Germ::Classical, SystemModel::IsothermalEuler { .. })
            | (FluxKind::Force, Germ::Particle { .. }, _) => {
                // seed Newton with the Rusanov traces for the same speed
                let seed = self.rusanov_twin().closed_form(u0, u1, a, None).ok();
                let guesses: Vec<(State, State)> = seed
                    .iter()
                    .map(|s| (s.um, s.up))
                    .chain(prev.map(|p| (p.um, p.up)))
                    .collect();
                let mut sol = self.newton_with_fix(u0, u1, a, &guesses)?;
                sol.admissible = self
                    .germ
                    .admissible(&self.left.model, &self.right.model, &sol.um, &sol.up)?
                    .ok;
                Ok(sol)
            }
            _ => {
                let guesses: Vec<(State, State)> = prev.map(|p| (p.um, p.up)).into_iter().collect();
                self.newton_with_fix(u0, u1, a, &guesses)
            }
        }
    }

    /// Newton on the full system; for the drag germs a failed solve is
    /// retried with a sonic exit, mirroring the closed-form fix.
    fn newton_with_fix(
        &self,
        u0: &State,
        u1: &State,
        a: f64,
        guesses: &[(State, State)],
    ) -> Result<TraceSolution> {
        let full = self.newton(u0, u1, a, guesses, System::Full)?;
        let drag = matches!(self.germ, Germ::Particle { .. } | Germ::HeatExchange { .. });
        if full.branch == Branch::Newton || !self.options.sonic_fix || !drag {
            return Ok(full);
        }
        let exit_right = full.um[1] + full.up[1] >= 0.0;
        let mut seeds = vec![(full.um, full.up)];
        seeds.extend_from_slice(guesses);
        match self.newton(u0, u1, a, &seeds, System::Sonic { exit_right }) {
            Ok(fixed) if fixed.branch == Branch::SonicFix => Ok(fixed),
            _ => Ok(full),
        }
    }

    fn rusanov_twin(&self) -> InterfaceSolver {
        let mut twin = *self;
        twin.left.kind = FluxKind::Rusanov;
        twin.right.kind = FluxKind::Rusanov;
        twin
    }

    fn solve_godunov(&self, u0: &State, u1: &State) -> Result<TraceSolution> {
        let c = match self.left.model {
            SystemModel::IsothermalEuler { c } => c,
            _ => unreachable!("checked in NumericalFlux::new"),
        };
        let fan = riemann::solve_riemann(c, *u0, *u1)?;
        let w = fan.sample(0.0);
        let a = self.initial_a(u0, u1)?;
        Ok(TraceSolution {
            um: w,
            up: w,
            branch: Branch::Godunov,
            residual_norm: self.residual_norm(u0, u1, &w, &w, a)?,
            a_used: a,
            entropy_check: self.entropy_check(u0, u1, &w, &w, a)?,
            admissible: true,
            iterations: 0,
        })
    }
}

/// Spurious-equilibrium test for the Godunov flux with the particle germ.
///
/// Returns `[g_rho(U0,U-) - g_rho(U+,U1), g_q(U0,U-) - g_q(U+,U1) - lambda X]`
/// with `X = q_I` (the trace momentum) or, with `mass_flux_drag`,
/// `X = g_rho(U0, U-)`. A zero defect together with
/// `g(U0,U-) = f(U0)` and `g(U+,U1) = f(U1)` makes `(U0, U1)` a numerical
/// equilibrium.
pub fn godunov_particle_defect(
    c: f64,
    lambda: f64,
    u0: &State,
    um: &State,
    up: &State,
    u1: &State,
    mass_flux_drag: bool,
) -> Result<State> {
    let gl = riemann::godunov_flux(c, *u0, *um)?;
    let gr = riemann::godunov_flux(c, *up, *u1)?;
    let drag = if mass_flux_drag {
        gl[0]
    } else {
        0.5 * (um[1] + up[1])
    };
    Ok(State::two(gl[0] - gr[0], gl[1] - gr[1] - lambda * drag))
}
