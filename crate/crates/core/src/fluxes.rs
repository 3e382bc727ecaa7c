//! Two-point numerical fluxes and the Rusanov speed selection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::SystemModel;
use crate::riemann;
use crate::state::State;

/// Growth factor applied to `A` until the middle state is subcharacteristic.
pub const A_GROWTH: f64 = 1.1;
const A_CAP: f64 = 1e6;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FluxKind {
    #[default]
    Rusanov,
    Force,
    Godunov,
}

impl std::str::FromStr for FluxKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rusanov" => Ok(FluxKind::Rusanov),
            "force" => Ok(FluxKind::Force),
            "godunov" => Ok(FluxKind::Godunov),
            other => Err(Error::Config(format!(
                "unknown flux '{other}' (expected rusanov, force or godunov)"
            ))),
        }
    }
}

impl std::fmt::Display for FluxKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FluxKind::Rusanov => "rusanov",
            FluxKind::Force => "force",
            FluxKind::Godunov => "godunov",
        })
    }
}

/// `U* = (UL + UR)/2 - (f(UR) - f(UL)) / (2A)`.
pub fn middle_state(model: &SystemModel, ul: &State, ur: &State, a: f64) -> Result<State> {
    let (fl, fr) = (model.flux(ul)?, model.flux(ur)?);
    Ok((*ul + *ur) * 0.5 - (fr - fl) * (0.5 / a))
}

/// Smallest `A = A0 * 1.1^k` with `A0 = max(|u| + c)` over the pair such that
/// the middle state is valid and `A >= |u*| + c*`.
pub fn select_a(model: &SystemModel, ul: &State, ur: &State) -> Result<f64> {
    let a0 = model.max_wave_speed(ul)?.max(model.max_wave_speed(ur)?);
    grow_a(model, ul, ur, a0)
}

/// Enlarges a starting speed until the middle-state condition holds.
pub fn grow_a(model: &SystemModel, ul: &State, ur: &State, a0: f64) -> Result<f64> {
    if !(a0 > 0.0 && a0.is_finite()) {
        return Err(Error::DegenerateInput(format!("initial speed {a0}")));
    }
    let mut a = a0;
    while a <= A_CAP * a0 {
        let mid = middle_state(model, ul, ur, a)?;
        if let Ok(s) = model.max_wave_speed(&mid) {
            if a >= s {
                return Ok(a);
            }
        }
        a *= A_GROWTH;
    }
    Err(Error::DegenerateInput(format!(
        "no subcharacteristic speed below {:e} for {ul:?} | {ur:?}",
        A_CAP * a0
    )))
}

/// `(f(UL) + f(UR))/2 - (A/2)(UR - UL)`.
pub fn rusanov(model: &SystemModel, ul: &State, ur: &State, a: f64) -> Result<State> {
    let (fl, fr) = (model.flux(ul)?, model.flux(ur)?);
    Ok((fl + fr) * 0.5 - (*ur - *ul) * (0.5 * a))
}

/// `(g_Rus + f(U*)) / 2`.
pub fn force(model: &SystemModel, ul: &State, ur: &State, a: f64) -> Result<State> {
    let (fl, fr) = (model.flux(ul)?, model.flux(ur)?);
    let mid = (*ul + *ur) * 0.5 - (fr - fl) * (0.5 / a);
    let fm = model
        .flux(&mid)
        .map_err(|e| Error::DegenerateInput(format!("FORCE middle state {mid:?}: {e}")))?;
    let g = (fl + fr) * 0.5 - (*ur - *ul) * (0.5 * a);
    Ok((g + fm) * 0.5)
}

/// `(F(UL) + F(UR))/2 - (A/2)(E(UR) - E(UL))`.
pub fn numerical_entropy_flux(model: &SystemModel, ul: &State, ur: &State, a: f64) -> Result<f64> {
    let (el, er) = (model.entropy(ul)?, model.entropy(ur)?);
    let (fl, fr) = (model.entropy_flux(ul)?, model.entropy_flux(ur)?);
    Ok(0.5 * (fl + fr) - 0.5 * a * (er - el))
}

/// A flux kind bound to one model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NumericalFlux {
    pub kind: FluxKind,
    pub model: SystemModel,
}

impl NumericalFlux {
    pub fn new(kind: FluxKind, model: SystemModel) -> Result<Self> {
        model.validate()?;
        if kind == FluxKind::Godunov && !matches!(model, SystemModel::IsothermalEuler { .. }) {
            return Err(Error::Unsupported(
                "the Godunov flux is only available for isothermal Euler".to_string(),
            ));
        }
        Ok(NumericalFlux { kind, model })
    }

    /// Flux with a given speed `A` (ignored by Godunov).
    pub fn eval(&self, ul: &State, ur: &State, a: f64) -> Result<State> {
        match self.kind {
            FluxKind::Rusanov => rusanov(&self.model, ul, ur, a),
            FluxKind::Force => force(&self.model, ul, ur, a),
            FluxKind::Godunov => match self.model {
                SystemModel::IsothermalEuler { c } => riemann::godunov_flux(c, *ul, *ur),
                _ => unreachable!("checked in NumericalFlux::new"),
            },
        }
    }

    pub fn speed(&self, ul: &State, ur: &State) -> Result<f64> {
        select_a(&self.model, ul, ur)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const ISO: SystemModel = SystemModel::IsothermalEuler { c: 1.0 };

    fn close(a: &State, b: &State, tol: f64) -> bool {
        (*a - *b).norm_inf() <= tol
    }

    #[test]
    fn select_a_examples() {
        let u = State::two(3.0, 1.0);
        assert!((select_a(&ISO, &u, &u).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        let rest = State::two(1.0, 0.0);
        assert_eq!(select_a(&ISO, &rest, &rest).unwrap(), 1.0);
        let fast = State::two(1.0, 3.0);
        assert_eq!(select_a(&ISO, &fast, &fast).unwrap(), 4.0);
    }

    #[test]
    fn select_a_grows_for_strong_jumps() {
        let (l, r) = (State::two(1.0, 0.0), State::two(20.0, 0.0));
        let a = select_a(&ISO, &l, &r).unwrap();
        let mid = middle_state(&ISO, &l, &r, a).unwrap();
        assert!(a >= ISO.max_wave_speed(&mid).unwrap());
        // the previous candidate in the 1.1 sequence fails
        if a > 1.0 {
            let prev = a / A_GROWTH;
            let m = middle_state(&ISO, &l, &r, prev).unwrap();
            assert!(!ISO.is_valid(&m) || prev < ISO.max_wave_speed(&m).unwrap());
        }
    }

    #[test]
    fn rusanov_examples() {
        let (l, r) = (State::two(1.0, 0.0), State::two(20.0, 0.0));
        let a = select_a(&ISO, &l, &r).unwrap();
        assert!((rusanov(&ISO, &l, &r, a).unwrap()[0] + 0.5 * a * 19.0).abs() < 1e-12);
        let (l, r) = (State::two(1.0, 2.0), State::two(4.0, 2.0));
        for a in [3.0, 5.0, 7.5] {
            assert!((rusanov(&ISO, &l, &r, a).unwrap()[0] - (2.0 - 1.5 * a)).abs() < 1e-12);
        }
    }

    #[test]
    fn middle_state_and_force_on_stationary_shock() {
        let (l, r) = (State::two(1.0, 2.0), State::two(4.0, 2.0));
        let mid = middle_state(&ISO, &l, &r, 5.0).unwrap();
        assert!(close(&mid, &State::two(2.5, 2.0), 1e-15));
        let expected = (rusanov(&ISO, &l, &r, 5.0).unwrap() + ISO.flux(&mid).unwrap()) * 0.5;
        assert!(close(&force(&ISO, &l, &r, 5.0).unwrap(), &expected, 1e-15));
        let u = State::two(5.0, 2.5);
        assert_eq!(middle_state(&ISO, &u, &u, 0.7).unwrap(), u);
    }

    #[test]
    fn force_rejects_invalid_middle_state() {
        let (l, r) = (State::two(1.0, -3.0), State::two(1.0, 3.0));
        assert!(matches!(force(&ISO, &l, &r, 0.5), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn entropy_flux_examples() {
        let u = State::two(3.0, 1.0);
        let f = numerical_entropy_flux(&ISO, &u, &u, 2.0).unwrap();
        assert!((f - ISO.entropy_flux(&u).unwrap()).abs() < 1e-15);
        let e = std::f64::consts::E;
        let (l, r) = (State::two(1.0, 0.0), State::two(e, 0.0));
        let f = numerical_entropy_flux(&ISO, &l, &r, 2.0).unwrap();
        assert!((f + e).abs() < 1e-14);
    }

    #[test]
    fn godunov_only_for_isothermal() {
        assert!(NumericalFlux::new(FluxKind::Godunov, SystemModel::ideal_gas(1.4)).is_err());
        assert!(NumericalFlux::new(FluxKind::Godunov, ISO).is_ok());
        assert_eq!("FORCE".parse::<FluxKind>().unwrap(), FluxKind::Force);
        assert!("roe".parse::<FluxKind>().is_err());
    }

    fn iso_state() -> impl Strategy<Value = State> {
        (0.2f64..10.0, -0.9f64..0.9).prop_map(|(rho, v)| State::two(rho, rho * v))
    }

    fn any_model_state() -> impl Strategy<Value = (SystemModel, State)> {
        prop_oneof![
            iso_state().prop_map(|u| (ISO, u)),
            (0.2f64..5.0, -2.0f64..2.0, 0.2f64..5.0).prop_map(|(rho, v, p)| {
                let m = SystemModel::ideal_gas(1.4);
                (m, m.from_primitive(rho, v, Some(p)).unwrap())
            }),
            (0.1f64..2.0, -0.5f64..0.5).prop_map(|(rho, v)| {
                let m = SystemModel::nozzle(0.3, crate::models::PressureLaw::CUBIC);
                (m, m.from_primitive(rho, v, None).unwrap())
            }),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn consistency((model, u) in any_model_state(), a in 0.5f64..20.0) {
            let f = model.flux(&u).unwrap();
            prop_assert_eq!(rusanov(&model, &u, &u, a).unwrap(), f);
            prop_assert!(close(&force(&model, &u, &u, a).unwrap(), &f, 1e-14 * f.norm_inf().max(1.0)));
            if let SystemModel::IsothermalEuler { .. } = model {
                let g = NumericalFlux::new(FluxKind::Godunov, model).unwrap().eval(&u, &u, a).unwrap();
                prop_assert!(close(&g, &f, 1e-12 * f.norm_inf().max(1.0)));
            }
        }

        #[test]
        fn rusanov_entropy_inequality(l in iso_state(), r in iso_state()) {
            let a = select_a(&ISO, &l, &r).unwrap();
            let mid = middle_state(&ISO, &l, &r, a).unwrap();
            let e = |u: &State| ISO.entropy(u).unwrap();
            let f = |u: &State| ISO.entropy_flux(u).unwrap();
            let gap = a * (e(&r) + e(&l) - 2.0 * e(&mid)) - (f(&r) - f(&l));
            prop_assert!(gap >= -1e-12);
            if (r - l).norm_inf() > 1e-3 {
                prop_assert!(gap > 0.0);
            }
        }

        #[test]
        fn rusanov_mass_flux_decreases_in_right_density(
            l in iso_state(), q in -2.0f64..2.0, rho in 0.2f64..5.0, d in 0.01f64..5.0, a in 1.0f64..10.0
        ) {
            let lo = rusanov(&ISO, &l, &State::two(rho, q), a).unwrap()[0];
            let hi = rusanov(&ISO, &l, &State::two(rho + d, q), a).unwrap()[0];
            prop_assert!(hi <= lo);
        }
    }
}
