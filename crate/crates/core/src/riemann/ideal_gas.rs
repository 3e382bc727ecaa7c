//! Exact Riemann solver for the ideal-gas Euler equations (pressure-function
//! Newton iteration on `p*`). Vacuum generation is rejected.

use crate::error::{Error, Result};
use crate::models::SystemModel;
use crate::state::State;

const MAX_ITERATIONS: usize = 100;
const TOLERANCE: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq)]
struct Prim {
    rho: f64,
    u: f64,
    p: f64,
}

/// Self-similar solution of a single-gas Riemann problem.
#[derive(Clone, Copy, Debug)]
pub struct EulerFan {
    gamma: f64,
    left: Prim,
    right: Prim,
    p_star: f64,
    u_star: f64,
}

fn to_prim(model: &SystemModel, u: &State) -> Result<Prim> {
    let pr = model.primitives(u)?;
    Ok(Prim {
        rho: pr.rho,
        u: pr.u,
        p: pr.p,
    })
}

/// Pressure function of one side and its derivative.
fn pressure_fn(gamma: f64, k: Prim, p: f64) -> (f64, f64) {
    let a = (gamma * k.p / k.rho).sqrt();
    if p > k.p {
        let ak = 2.0 / ((gamma + 1.0) * k.rho);
        let bk = (gamma - 1.0) / (gamma + 1.0) * k.p;
        let root = (ak / (p + bk)).sqrt();
        ((p - k.p) * root, root * (1.0 - 0.5 * (p - k.p) / (p + bk)))
    } else {
        let ratio = p / k.p;
        let ex = (gamma - 1.0) / (2.0 * gamma);
        (
            2.0 * a / (gamma - 1.0) * (ratio.powf(ex) - 1.0),
            ratio.powf(-(gamma + 1.0) / (2.0 * gamma)) / (k.rho * a),
        )
    }
}

pub fn solve(gamma: f64, left: State, right: State) -> Result<EulerFan> {
    let model = SystemModel::ideal_gas(gamma);
    model.validate()?;
    let (l, r) = (to_prim(&model, &left)?, to_prim(&model, &right)?);
    let (al, ar) = ((gamma * l.p / l.rho).sqrt(), (gamma * r.p / r.rho).sqrt());
    let du = r.u - l.u;
    if 2.0 * (al + ar) / (gamma - 1.0) <= du {
        return Err(Error::DegenerateInput("initial data generate vacuum".to_string()));
    }

    // two-rarefaction guess
    let ex = (gamma - 1.0) / (2.0 * gamma);
    let mut p = ((al + ar - 0.5 * (gamma - 1.0) * du) / (al / l.p.powf(ex) + ar / r.p.powf(ex)))
        .powf(1.0 / ex)
        .max(1e-12 * l.p.min(r.p));

    let mut converged = false;
    for _ in 0..MAX_ITERATIONS {
        let (fl, dl) = pressure_fn(gamma, l, p);
        let (fr, dr) = pressure_fn(gamma, r, p);
        let next = (p - (fl + fr + du) / (dl + dr)).max(0.5 * p);
        let change = 2.0 * (next - p).abs() / (next + p);
        p = next;
        if change < TOLERANCE {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::RiemannNonConvergence {
            iterations: MAX_ITERATIONS,
            last: p,
        });
    }
    let (fl, _) = pressure_fn(gamma, l, p);
    let (fr, _) = pressure_fn(gamma, r, p);
    Ok(EulerFan {
        gamma,
        left: l,
        right: r,
        p_star: p,
        u_star: 0.5 * (l.u + r.u) + 0.5 * (fr - fl),
    })
}

impl EulerFan {
    pub fn star_pressure(&self) -> f64 {
        self.p_star
    }

    pub fn star_velocity(&self) -> f64 {
        self.u_star
    }

    /// Value at `x/t = xi` in conserved variables.
    pub fn sample(&self, xi: f64) -> State {
        let g = self.gamma;
        let (ps, us) = (self.p_star, self.u_star);
        let gm = (g - 1.0) / (g + 1.0);
        let prim = if xi < us {
            let k = self.left;
            let a = (g * k.p / k.rho).sqrt();
            if ps > k.p {
                let speed = k.u - a * ((g + 1.0) / (2.0 * g) * ps / k.p + (g - 1.0) / (2.0 * g)).sqrt();
                if xi < speed {
                    k
                } else {
                    let rho = k.rho * (ps / k.p + gm) / (gm * ps / k.p + 1.0);
                    Prim { rho, u: us, p: ps }
                }
            } else {
                let a_star = a * (ps / k.p).powf((g - 1.0) / (2.0 * g));
                if xi < k.u - a {
                    k
                } else if xi > us - a_star {
                    Prim {
                        rho: k.rho * (ps / k.p).powf(1.0 / g),
                        u: us,
                        p: ps,
                    }
                } else {
                    let c = 2.0 / (g + 1.0) + gm / a * (k.u - xi);
                    Prim {
                        rho: k.rho * c.powf(2.0 / (g - 1.0)),
                        u: 2.0 / (g + 1.0) * (a + 0.5 * (g - 1.0) * k.u + xi),
                        p: k.p * c.powf(2.0 * g / (g - 1.0)),
                    }
                }
            }
        } else {
            let k = self.right;
            let a = (g * k.p / k.rho).sqrt();
            if ps > k.p {
                let speed = k.u + a * ((g + 1.0) / (2.0 * g) * ps / k.p + (g - 1.0) / (2.0 * g)).sqrt();
                if xi >= speed {
                    k
                } else {
                    let rho = k.rho * (ps / k.p + gm) / (gm * ps / k.p + 1.0);
                    Prim { rho, u: us, p: ps }
                }
            } else {
                let a_star = a * (ps / k.p).powf((g - 1.0) / (2.0 * g));
                if xi >= k.u + a {
                    k
                } else if xi < us + a_star {
                    Prim {
                        rho: k.rho * (ps / k.p).powf(1.0 / g),
                        u: us,
                        p: ps,
                    }
                } else {
                    let c = 2.0 / (g + 1.0) - gm / a * (k.u - xi);
                    Prim {
                        rho: k.rho * c.powf(2.0 / (g - 1.0)),
                        u: 2.0 / (g + 1.0) * (-a + 0.5 * (g - 1.0) * k.u + xi),
                        p: k.p * c.powf(2.0 * g / (g - 1.0)),
                    }
                }
            }
        };
        State::three(
            prim.rho,
            prim.rho * prim.u,
            0.5 * prim.rho * prim.u * prim.u + prim.p / (g - 1.0),
        )
    }
}
