//! Rusanov traces for the classical and particle germs on isothermal Euler.

use super::{Branch, InterfaceSolver, TieBreak, TraceSolution};
use crate::error::{Error, Result};
use crate::germs::Germ;
use crate::interface::cubic::{interface_momentum, sonic_exit_density, CubicProblem};
use crate::models::SystemModel;
use crate::state::State;

struct Candidate {
    um: State,
    up: State,
    branch: Branch,
}

impl InterfaceSolver {
    pub(super) fn closed_form(
        &self,
        u0: &State,
        u1: &State,
        a: f64,
        prev: Option<&TraceSolution>,
    ) -> Result<TraceSolution> {
        let model = self.left.model;
        let c = match model {
            SystemModel::IsothermalEuler { c } => c,
            _ => {
                return Err(Error::Unsupported(
                    "closed-form traces need isothermal Euler".to_string(),
                ))
            }
        };
        let lambda = match self.germ {
            Germ::Classical => 0.0,
            Germ::Particle { lambda } => lambda,
            _ => unreachable!("dispatched on the germ"),
        };

        let (eta0, eta1) = (model.primitives(u0)?.eta, model.primitives(u1)?.eta);
        let q = interface_momentum(u0[1], u1[1], eta0, eta1, a, lambda);
        if q < 0.0 {
            // solve the mirrored problem, which has q > 0
            let prev_m = prev.map(TraceSolution::mirrored);
            let sol = self.closed_form(&u1.mirrored(), &u0.mirrored(), a, prev_m.as_ref())?;
            return Ok(sol.mirrored());
        }
        let rho_star = 0.5 * (u0[0] + u1[0]) + (u0[1] - u1[1]) / (2.0 * a);
        if !(rho_star > 0.0) {
            return Err(Error::DegenerateInput(format!(
                "middle density {rho_star} for {u0:?} | {u1:?} with A = {a}"
            )));
        }

        let pair = |r: f64, branch| Candidate {
            um: State::two(rho_star - r, q),
            up: State::two(rho_star + r, q),
            branch,
        };
        let mut candidates = Vec::new();
        // listed first so that it wins distance ties
        let member_tol = 1e-12 * eta0.abs().max(eta1.abs()).max(1.0);
        if self.germ.residual(&model, &model, u0, u1)?.norm_inf() <= member_tol {
            candidates.push(Candidate {
                um: *u0,
                up: *u1,
                branch: Branch::Equilibrium,
            });
        }
        match self.germ {
            Germ::Classical => {
                candidates.push(pair(0.0, Branch::Trivial));
                let disc = rho_star * rho_star - q * q / (c * c);
                if q != 0.0 && disc > 0.0 {
                    candidates.push(pair(disc.sqrt(), Branch::NontrivialShock));
                }
            }
            _ => {
                let cubic = CubicProblem {
                    rho_star,
                    q,
                    c,
                    lambda,
                };
                for (i, r) in cubic.roots()?.into_iter().enumerate() {
                    candidates.push(pair(r, Branch::CubicRoot(i)));
                }
            }
        }
        let entropy_tol = 1e-12
            * (model.entropy_flux(u0)?.abs()
                + model.entropy_flux(u1)?.abs()
                + a * (model.entropy(u0)?.abs() + model.entropy(u1)?.abs()))
            .max(1.0);
        let mut scored = Vec::with_capacity(candidates.len());
        for cand in candidates {
            if !(model.is_valid(&cand.um) && model.is_valid(&cand.up)) {
                continue;
            }
            let admissible = self.germ.admissible(&model, &model, &cand.um, &cand.up)?.ok;
            let check = self.entropy_check(u0, u1, &cand.um, &cand.up, a)?;
            let dist = self.distance(&cand, u0, u1, prev);
            scored.push((cand, admissible, check, dist));
        }
        let nearest = |pred: &dyn Fn(bool, f64) -> bool| {
            scored
                .iter()
                .filter(|(_, ok, check, _)| pred(*ok, *check))
                .min_by(|x, y| x.3.total_cmp(&y.3))
        };

        let chosen = nearest(&|ok, check| ok && check <= entropy_tol);
        let (um, up, branch, admissible) = match chosen {
            Some((cand, ..)) => (cand.um, cand.up, cand.branch, true),
            None if self.options.sonic_fix => {
                let x = sonic_exit_density(rho_star, c, lambda)?;
                let um = State::two(2.0 * rho_star - x, c * x);
                let up = State::two(x, c * x);
                let ok = self.germ.admissible(&model, &model, &um, &up)?.ok;
                (um, up, Branch::SonicFix, ok)
            }
            None => {
                let fallback = nearest(&|_, check| check <= entropy_tol)
                    .or_else(|| nearest(&|_, _| true))
                    .ok_or(Error::NoCubicRoot { rho_star })?;
                (fallback.0.um, fallback.0.up, fallback.0.branch, false)
            }
        };
        Ok(TraceSolution {
            um,
            up,
            branch,
            residual_norm: self.residual_norm(u0, u1, &um, &up, a)?,
            a_used: a,
            entropy_check: self.entropy_check(u0, u1, &um, &up, a)?,
            admissible,
            iterations: 0,
        })
    }

    fn distance(&self, cand: &Candidate, u0: &State, u1: &State, prev: Option<&TraceSolution>) -> f64 {
        let (tm, tp) = match (self.options.tie_break, prev) {
            (TieBreak::PreviousTraces, Some(p)) => (p.um[0], p.up[0]),
            _ => (u0[0], u1[0]),
        };
        (cand.um[0] - tm).powi(2) + (cand.up[0] - tp).powi(2)
    }
}
