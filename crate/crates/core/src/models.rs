//! Conservation-law systems: isothermal Euler, ideal-gas Euler and the
//! barotropic nozzle, with fluxes, primitive variables, wave speeds and
//! entropy pairs.
//!
//! Every function here is pure. States are checked on entry (positive
//! density, positive internal energy for the ideal gas) and the offending
//! quantity is reported in the error.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::State;

/// Barotropic pressure law `p(tau) = kappa * tau^(-exponent)`, i.e.
/// `p = kappa * rho^exponent`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PressureLaw {
    pub kappa: f64,
    pub exponent: f64,
}

impl PressureLaw {
    /// `p(tau) = tau^-3`.
    pub const CUBIC: PressureLaw = PressureLaw {
        kappa: 1.0,
        exponent: 3.0,
    };

    pub fn pressure(&self, rho: f64) -> f64 {
        self.kappa * rho.powf(self.exponent)
    }

    /// Antiderivative of `-p(tau)` in `tau`, with zero integration constant.
    pub fn internal_energy(&self, rho: f64) -> f64 {
        self.kappa * rho.powf(self.exponent - 1.0) / (self.exponent - 1.0)
    }

    pub fn sound_speed(&self, rho: f64) -> f64 {
        (self.kappa * self.exponent * rho.powf(self.exponent - 1.0)).sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SystemModel {
    /// `U = (rho, q)`, `p = c^2 rho`.
    IsothermalEuler { c: f64 },
    /// `U = (rho, q, E)`, `p = (gamma - 1) rho e`. `rho_ref` only enters
    /// the entropy `s = e (rho / rho_ref)^(1 - gamma)`.
    IdealGasEuler {
        gamma: f64,
        #[serde(default = "unit_density")]
        rho_ref: f64,
    },
    /// `U = (alpha rho, alpha rho w)` on a section of constant area `alpha`.
    BarotropicNozzle { alpha: f64, law: PressureLaw },
}

fn unit_density() -> f64 {
    1.0
}

/// Primitive description of a state. Fields that have no meaning for a
/// model are `None`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Primitives {
    pub rho: f64,
    pub u: f64,
    pub p: f64,
    pub e: Option<f64>,
    pub s: Option<f64>,
    /// Momentum flux `q^2/rho + p` (the "charge").
    pub eta: f64,
}

/// Convex entropy `E` and its flux `F` for one model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntropyPair {
    model: SystemModel,
}

impl EntropyPair {
    pub fn entropy(&self, u: &State) -> Result<f64> {
        self.model.entropy(u)
    }

    pub fn entropy_flux(&self, u: &State) -> Result<f64> {
        self.model.entropy_flux(u)
    }
}

impl SystemModel {
    pub fn isothermal(c: f64) -> Self {
        SystemModel::IsothermalEuler { c }
    }

    pub fn ideal_gas(gamma: f64) -> Self {
        SystemModel::IdealGasEuler { gamma, rho_ref: 1.0 }
    }

    pub fn nozzle(alpha: f64, law: PressureLaw) -> Self {
        SystemModel::BarotropicNozzle { alpha, law }
    }

    pub fn dim(&self) -> usize {
        match self {
            SystemModel::IdealGasEuler { .. } => 3,
            _ => 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match *self {
            SystemModel::IsothermalEuler { c } if !(c > 0.0 && c.is_finite()) => {
                bad(format!("sound speed must be positive, got {c}"))
            }
            SystemModel::IdealGasEuler { gamma, rho_ref } => {
                if !(gamma > 1.0 && gamma.is_finite()) {
                    bad(format!("adiabatic exponent must exceed 1, got {gamma}"))
                } else if !(rho_ref > 0.0) {
                    bad(format!("reference density must be positive, got {rho_ref}"))
                } else {
                    Ok(())
                }
            }
            SystemModel::BarotropicNozzle { alpha, law } => {
                if !(alpha > 0.0 && alpha.is_finite()) {
                    bad(format!("cross-section must be positive, got {alpha}"))
                } else if !(law.kappa > 0.0 && law.exponent > 1.0) {
                    bad(format!(
                        "pressure law needs kappa > 0 and exponent > 1, got {law:?}"
                    ))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// Checks dimension, finiteness, density and internal energy.
    pub fn check(&self, u: &State) -> Result<()> {
        if u.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: u.len(),
            });
        }
        u.check_finite()?;
        if !(u[0] > 0.0) {
            return Err(Error::NonPositiveDensity { value: u[0] });
        }
        if let SystemModel::IdealGasEuler { .. } = self {
            let rho_e = u[2] - 0.5 * u[1] * u[1] / u[0];
            if !(rho_e > 0.0) {
                return Err(Error::NonPositiveInternalEnergy { value: rho_e / u[0] });
            }
        }
        Ok(())
    }

    pub fn is_valid(&self, u: &State) -> bool {
        self.check(u).is_ok()
    }

    /// Physical density (divides out the cross-section for the nozzle).
    pub fn density(&self, u: &State) -> f64 {
        match self {
            SystemModel::BarotropicNozzle { alpha, .. } => u[0] / alpha,
            _ => u[0],
        }
    }

    pub fn velocity(&self, u: &State) -> f64 {
        u[1] / u[0]
    }

    fn pressure_unchecked(&self, u: &State) -> f64 {
        match *self {
            SystemModel::IsothermalEuler { c } => c * c * u[0],
            SystemModel::IdealGasEuler { gamma, .. } => (gamma - 1.0) * (u[2] - 0.5 * u[1] * u[1] / u[0]),
            SystemModel::BarotropicNozzle { alpha, law } => law.pressure(u[0] / alpha),
        }
    }

    pub fn pressure(&self, u: &State) -> Result<f64> {
        self.check(u)?;
        Ok(self.pressure_unchecked(u))
    }

    fn sound_speed_unchecked(&self, u: &State) -> f64 {
        match *self {
            SystemModel::IsothermalEuler { c } => c,
            SystemModel::IdealGasEuler { gamma, .. } => (gamma * self.pressure_unchecked(u) / u[0]).sqrt(),
            SystemModel::BarotropicNozzle { alpha, law } => law.sound_speed(u[0] / alpha),
        }
    }

    pub fn sound_speed(&self, u: &State) -> Result<f64> {
        self.check(u)?;
        Ok(self.sound_speed_unchecked(u))
    }

    pub fn flux(&self, u: &State) -> Result<State> {
        self.check(u)?;
        let v = u[1] / u[0];
        Ok(match *self {
            SystemModel::IsothermalEuler { c } => State::two(u[1], u[1] * v + c * c * u[0]),
            SystemModel::IdealGasEuler { .. } => {
                let p = self.pressure_unchecked(u);
                State::three(u[1], u[1] * v + p, v * (u[2] + p))
            }
            SystemModel::BarotropicNozzle { alpha, law } => {
                State::two(u[1], u[1] * v + alpha * law.pressure(u[0] / alpha))
            }
        })
    }

    pub fn primitives(&self, u: &State) -> Result<Primitives> {
        self.check(u)?;
        let rho = self.density(u);
        let vel = u[1] / u[0];
        let p = self.pressure_unchecked(u);
        let (e, s) = match *self {
            SystemModel::IsothermalEuler { .. } => (None, None),
            SystemModel::IdealGasEuler { gamma, rho_ref } => {
                let e = p / (rho * (gamma - 1.0));
                (Some(e), Some(e * (rho / rho_ref).powf(1.0 - gamma)))
            }
            SystemModel::BarotropicNozzle { law, .. } => (Some(law.internal_energy(rho)), None),
        };
        Ok(Primitives {
            rho,
            u: vel,
            p,
            e,
            s,
            eta: rho * vel * vel + p,
        })
    }

    /// Conserved state from primitive variables. `p` is required for the
    /// ideal gas and ignored by the barotropic models.
    pub fn from_primitive(&self, rho: f64, vel: f64, p: Option<f64>) -> Result<State> {
        let u = match *self {
            SystemModel::IsothermalEuler { .. } => State::two(rho, rho * vel),
            SystemModel::IdealGasEuler { gamma, .. } => {
                let p = p.ok_or_else(|| Error::Config("ideal-gas state needs a pressure".to_string()))?;
                State::three(rho, rho * vel, 0.5 * rho * vel * vel + p / (gamma - 1.0))
            }
            SystemModel::BarotropicNozzle { alpha, .. } => State::two(alpha * rho, alpha * rho * vel),
        };
        self.check(&u)?;
        Ok(u)
    }

    /// `|u| + c`.
    pub fn max_wave_speed(&self, u: &State) -> Result<f64> {
        self.check(u)?;
        Ok((u[1] / u[0]).abs() + self.sound_speed_unchecked(u))
    }

    pub fn entropy(&self, u: &State) -> Result<f64> {
        self.check(u)?;
        Ok(match *self {
            SystemModel::IsothermalEuler { c } => 0.5 * u[1] * u[1] / u[0] + c * c * u[0] * u[0].ln(),
            SystemModel::IdealGasEuler { .. } => {
                let s = self.primitives(u)?.s.unwrap_or(1.0);
                -u[0] * s.ln()
            }
            SystemModel::BarotropicNozzle { alpha, law } => {
                let rho = u[0] / alpha;
                0.5 * u[1] * u[1] / u[0] + u[0] * law.internal_energy(rho)
            }
        })
    }

    pub fn entropy_flux(&self, u: &State) -> Result<f64> {
        let e = self.entropy(u)?;
        let vel = u[1] / u[0];
        Ok(match *self {
            SystemModel::IsothermalEuler { c } => vel * (e + c * c * u[0]),
            SystemModel::IdealGasEuler { .. } => vel * e,
            SystemModel::BarotropicNozzle { alpha, law } => vel * (e + alpha * law.pressure(u[0] / alpha)),
        })
    }

    pub fn entropy_pair(&self) -> EntropyPair {
        EntropyPair { model: *self }
    }

    /// Nozzle Bernoulli invariant `w^2/2 + e(tau) + tau p(tau)`.
    pub fn bernoulli(&self, u: &State) -> Result<f64> {
        match *self {
            SystemModel::BarotropicNozzle { alpha, law } => {
                self.check(u)?;
                let rho = u[0] / alpha;
                let w = u[1] / u[0];
                Ok(0.5 * w * w + law.internal_energy(rho) + law.pressure(rho) / rho)
            }
            _ => Err(Error::Unsupported(
                "Bernoulli invariant is defined for the nozzle model only".to_string(),
            )),
        }
    }

    /// Names of the conserved components, used for output headers.
    pub fn component_names(&self) -> &'static [&'static str] {
        match self {
            SystemModel::IsothermalEuler { .. } => &["rho", "q"],
            SystemModel::IdealGasEuler { .. } => &["rho", "q", "E"],
            SystemModel::BarotropicNozzle { .. } => &["alpha_rho", "alpha_rho_w"],
        }
    }
}
