//! Finite volumes for one-dimensional conservation laws coupled at `x = 0`
//! through an interface germ, with the interface traces fixed by wave
//! cancellation.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod fluxes;
pub mod germs;
pub mod interface;
pub mod models;
pub mod output;
pub mod riemann;
pub mod scenarios;
pub mod simulator;
pub mod state;
pub mod verify;
