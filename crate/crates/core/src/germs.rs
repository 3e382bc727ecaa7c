//! Coupling conditions ("germs") at `x = 0`: equality residuals,
//! admissibility predicates, the flux components they conserve, and an ODE
//! oracle for the heat-exchange conditions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{PressureLaw, SystemModel};
use crate::state::State;

/// Comparison slack for the inequality conditions.
pub const ADMISSIBILITY_TOL: f64 = 1e-12;

/// Orientation of the heat-exchange entropy relation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeatOrientation {
    /// Entropy deviation decays by `exp(-mu/|q|)` in the flow direction.
    #[default]
    Relaxing,
    /// `(s+ - sP) = exp(mu/q) (s- - sP)` for every sign of `q`.
    Literal,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatExchangeParams {
    pub lambda: f64,
    pub mu: f64,
    pub s_p: f64,
    pub rho_ref: f64,
    pub gamma: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Germ {
    /// `f(U-) = f(U+)` with `F(U+) <= F(U-)`.
    Classical,
    /// Fixed obstacle with friction `lambda` in isothermal flow.
    Particle { lambda: f64 },
    HeatExchange {
        lambda: f64,
        mu: f64,
        s_p: f64,
        #[serde(default = "unit")]
        rho_ref: f64,
        gamma: f64,
        #[serde(default)]
        orientation: HeatOrientation,
    },
    /// `f_L(U-) = f_R(U+)`.
    FluxCoupling { gamma_l: f64, gamma_r: f64 },
    /// Continuity of density, velocity and pressure.
    StateCoupling { gamma_l: f64, gamma_r: f64 },
    /// Continuity of `alpha rho w` and of the Bernoulli invariant.
    Nozzle {
        alpha_l: f64,
        alpha_r: f64,
        law: PressureLaw,
    },
}

fn unit() -> f64 {
    1.0
}

/// Outcome of an admissibility test.
#[derive(Clone, Debug, PartialEq)]
pub struct Admissibility {
    pub ok: bool,
    pub reason: Option<String>,
}

impl Admissibility {
    fn pass() -> Self {
        Admissibility {
            ok: true,
            reason: None,
        }
    }

    fn fail(reason: String) -> Self {
        Admissibility {
            ok: false,
            reason: Some(reason),
        }
    }
}

impl Germ {
    pub fn name(&self) -> &'static str {
        match self {
            Germ::Classical => "classical",
            Germ::Particle { .. } => "particle",
            Germ::HeatExchange { .. } => "heat_exchange",
            Germ::FluxCoupling { .. } => "flux_coupling",
            Germ::StateCoupling { .. } => "state_coupling",
            Germ::Nozzle { .. } => "nozzle",
        }
    }

    /// Side models implied by the germ parameters, if any.
    pub fn implied_models(&self) -> Option<(SystemModel, SystemModel)> {
        match *self {
            Germ::Classical | Germ::Particle { .. } => None,
            Germ::HeatExchange { gamma, rho_ref, .. } => {
                let m = SystemModel::IdealGasEuler { gamma, rho_ref };
                Some((m, m))
            }
            Germ::FluxCoupling { gamma_l, gamma_r } | Germ::StateCoupling { gamma_l, gamma_r } => {
                Some((SystemModel::ideal_gas(gamma_l), SystemModel::ideal_gas(gamma_r)))
            }
            Germ::Nozzle {
                alpha_l,
                alpha_r,
                law,
            } => Some((
                SystemModel::nozzle(alpha_l, law),
                SystemModel::nozzle(alpha_r, law),
            )),
        }
    }

    /// Checks parameters and compatibility with the side models.
    pub fn validate(&self, left: &SystemModel, right: &SystemModel) -> Result<()> {
        left.validate()?;
        right.validate()?;
        let bad = |msg: &str| Err(Error::InvalidParameter(format!("{} germ: {msg}", self.name())));
        match *self {
            Germ::Classical => {
                if left != right {
                    return bad("requires the same model on both sides");
                }
            }
            Germ::Particle { lambda } => {
                if !(lambda >= 0.0 && lambda.is_finite()) {
                    return bad("lambda must be finite and nonnegative");
                }
                if left != right || !matches!(left, SystemModel::IsothermalEuler { .. }) {
                    return bad("requires isothermal Euler on both sides");
                }
            }
            Germ::HeatExchange { lambda, mu, s_p, .. } if !(lambda >= 0.0 && mu >= 0.0 && s_p >= 0.0) => {
                return bad("lambda, mu and s_P must be nonnegative");
            }
            _ => {}
        }
        if let Some((l, r)) = self.implied_models() {
            if (l, r) != (*left, *right) {
                return bad(&format!("expects models {l:?} | {r:?}"));
            }
        }
        Ok(())
    }

    /// Number of scalar equality constraints.
    pub fn equality_count(&self, left: &SystemModel) -> usize {
        left.dim()
    }

    /// Indices of the flux components that are equal across the interface
    /// for every pair of the germ.
    pub fn conserved_components(&self, left: &SystemModel) -> Vec<usize> {
        match self {
            Germ::Classical | Germ::FluxCoupling { .. } => (0..left.dim()).collect(),
            Germ::StateCoupling { .. } => vec![0, 1],
            Germ::Particle { .. } | Germ::HeatExchange { .. } | Germ::Nozzle { .. } => vec![0],
        }
    }

    /// Equality residuals in the natural units of each relation.
    pub fn residual(&self, left: &SystemModel, right: &SystemModel, um: &State, up: &State) -> Result<State> {
        left.check(um)?;
        right.check(up)?;
        Ok(match *self {
            Germ::Classical | Germ::FluxCoupling { .. } => left.flux(um)? - right.flux(up)?,
            Germ::Particle { lambda } => {
                let q = 0.5 * (um[1] + up[1]);
                let (pm, pp) = (left.primitives(um)?, right.primitives(up)?);
                State::two(um[1] - up[1], pm.eta - pp.eta - lambda * q)
            }
            Germ::HeatExchange {
                lambda,
                mu,
                s_p,
                orientation,
                ..
            } => {
                let q = 0.5 * (um[1] + up[1]);
                let (pm, pp) = (left.primitives(um)?, right.primitives(up)?);
                let (sm, sp) = (pm.s.unwrap_or(0.0) - s_p, pp.s.unwrap_or(0.0) - s_p);
                let entropy = heat_entropy_relation(mu, q, sm, sp, orientation);
                State::three(um[1] - up[1], pm.eta - pp.eta - lambda * q, entropy)
            }
            Germ::StateCoupling { .. } => {
                let (pm, pp) = (left.primitives(um)?, right.primitives(up)?);
                State::three(pm.rho - pp.rho, pm.u - pp.u, pm.p - pp.p)
            }
            Germ::Nozzle { .. } => State::two(um[1] - up[1], left.bernoulli(um)? - right.bernoulli(up)?),
        })
    }

    /// Inequality conditions of the germ. Germs without stated inequalities
    /// accept every pair.
    pub fn admissible(
        &self,
        left: &SystemModel,
        right: &SystemModel,
        um: &State,
        up: &State,
    ) -> Result<Admissibility> {
        match *self {
            Germ::Classical => {
                let jump = right.entropy_flux(up)? - left.entropy_flux(um)?;
                Ok(if jump <= ADMISSIBILITY_TOL {
                    Admissibility::pass()
                } else {
                    Admissibility::fail(format!("entropy flux increases by {jump:e}"))
                })
            }
            Germ::Particle { .. } => {
                let c = left.sound_speed(um)?;
                let q = 0.5 * (um[1] + up[1]);
                let t = ADMISSIBILITY_TOL;
                if q >= -t && q <= c * um[0] + t && q > c * up[0] + t {
                    return Ok(Admissibility::fail(format!(
                        "subsonic entrance but supersonic exit (q = {q}, c rho+ = {})",
                        c * up[0]
                    )));
                }
                if q <= t && q >= -c * up[0] - t && q < -c * um[0] - t {
                    return Ok(Admissibility::fail(format!(
                        "subsonic entrance but supersonic exit (q = {q}, -c rho- = {})",
                        -c * um[0]
                    )));
                }
                Ok(Admissibility::pass())
            }
            _ => Ok(Admissibility::pass()),
        }
    }
}

/// Third heat-exchange relation with `dm = s- - sP`, `dp = s+ - sP`.
/// At `q = 0` both deviations must vanish; the larger one is returned.
fn heat_entropy_relation(mu: f64, q: f64, dm: f64, dp: f64, orientation: HeatOrientation) -> f64 {
    if q == 0.0 {
        return if dp.abs() >= dm.abs() { dp } else { dm };
    }
    match orientation {
        HeatOrientation::Literal => dp - (mu / q).exp() * dm,
        HeatOrientation::Relaxing if q > 0.0 => dp - (-mu / q).exp() * dm,
        HeatOrientation::Relaxing => (mu / q).exp() * dp - dm,
    }
}

/// Regularisation `H_eps` of the Heaviside function on `[-eps, eps]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ramp {
    Cosine,
    Smoothstep,
    Smootherstep,
}

impl Ramp {
    pub const ALL: [Ramp; 3] = [Ramp::Cosine, Ramp::Smoothstep, Ramp::Smootherstep];

    /// `H_eps'(x)` for `x` in `[-eps, eps]`.
    pub fn derivative(&self, x: f64, eps: f64) -> f64 {
        let t = ((x + eps) / (2.0 * eps)).clamp(0.0, 1.0);
        let dt = 1.0 / (2.0 * eps);
        match self {
            Ramp::Cosine => 0.5 * std::f64::consts::PI * (std::f64::consts::PI * t).sin() * dt,
            Ramp::Smoothstep => 6.0 * t * (1.0 - t) * dt,
            Ramp::Smootherstep => 30.0 * t * t * (1.0 - t) * (1.0 - t) * dt,
        }
    }
}

/// Integrates the stationary regularised heat-exchange profile from
/// `x = -eps` (state `um`) to `x = eps` with classical RK4 and returns `U(eps)`.
pub fn regularized_profile_oracle(
    params: &HeatExchangeParams,
    um: &State,
    ramp: Ramp,
    eps: f64,
    n_steps: usize,
) -> Result<State> {
    let HeatExchangeParams {
        lambda,
        mu,
        s_p,
        rho_ref,
        gamma,
    } = *params;
    let model = SystemModel::IdealGasEuler { gamma, rho_ref };
    let pr = model.primitives(um)?;
    let q = um[1];
    if q == 0.0 && (lambda != 0.0 || mu != 0.0) {
        return Err(Error::Oracle("stationary profile needs q != 0".to_string()));
    }
    if !(eps > 0.0) || n_steps == 0 {
        return Err(Error::Oracle(format!("eps = {eps}, n_steps = {n_steps}")));
    }

    // y = (rho, e)
    let rhs = |x: f64, y: [f64; 2]| -> Result<[f64; 2]> {
        let (rho, e) = (y[0], y[1]);
        if !(rho > 0.0 && e > 0.0) {
            return Err(Error::Oracle(format!("nonphysical state rho = {rho}, e = {e}")));
        }
        let vel = q / rho;
        let c2 = gamma * (gamma - 1.0) * e;
        if c2 - vel * vel <= 0.0 {
            return Err(Error::Oracle(format!(
                "profile leaves the subsonic region at x = {x} (u = {vel}, c = {})",
                c2.sqrt()
            )));
        }
        let h = ramp.derivative(x, eps);
        if h == 0.0 {
            return Ok([0.0, 0.0]);
        }
        let d = e - s_p * (rho / rho_ref).powf(gamma - 1.0);
        let drho = h * (-lambda * q + (gamma - 1.0) * rho * mu * d / q) / (c2 - vel * vel);
        let de = (gamma - 1.0) * e * drho / rho - mu * d * h / q;
        Ok([drho, de])
    };

    let dx = 2.0 * eps / n_steps as f64;
    let mut y = [pr.rho, pr.e.unwrap_or(0.0)];
    let add = |y: [f64; 2], k: [f64; 2], s: f64| [y[0] + s * k[0], y[1] + s * k[1]];
    for i in 0..n_steps {
        let x = -eps + i as f64 * dx;
        let k1 = rhs(x, y)?;
        let k2 = rhs(x + 0.5 * dx, add(y, k1, 0.5 * dx))?;
        let k3 = rhs(x + 0.5 * dx, add(y, k2, 0.5 * dx))?;
        let k4 = rhs(x + dx, add(y, k3, dx))?;
        for j in 0..2 {
            y[j] += dx / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
    }
    rhs(eps, y)?;
    let (rho, e) = (y[0], y[1]);
    model.from_primitive(rho, q / rho, Some((gamma - 1.0) * rho * e))
}
