//! Exact Riemann solvers without interface.
//!
//! [`isothermal`] provides the Godunov flux used by the interface analysis.
//! [`ideal_gas`] is only used to rebuild reference profiles from computed
//! interface traces.

pub mod ideal_gas;
pub mod isothermal;

pub use isothermal::{godunov_flux, solve_riemann, Wave, WaveFan};
