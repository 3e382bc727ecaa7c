//! Damped Newton on `[germ residual; wave cancellation] = 0` in the unknowns
//! `(U-, U+)`.

use nalgebra::{DMatrix, DVector};

use super::{Branch, InterfaceSolver, TraceSolution};
use crate::error::{Error, Result};
use crate::state::State;

const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;
const POLISH_STEPS: usize = 3;

/// Equations solved by Newton.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(super) enum System {
    /// Germ and the full wave-cancellation condition.
    Full,
    /// Momentum row of the wave cancellation replaced by a sonic exit,
    /// `u+ = c+` (`exit_right`) or `u- = -c-`.
    Sonic { exit_right: bool },
}

impl InterfaceSolver {
    fn split(&self, x: &DVector<f64>) -> Option<(State, State)> {
        let d = self.left.model.dim();
        let um = State::new(&x.as_slice()[..d]).ok()?;
        let up = State::new(&x.as_slice()[d..]).ok()?;
        Some((um, up))
    }

    fn stacked(
        &self,
        u0: &State,
        u1: &State,
        x: &DVector<f64>,
        a: f64,
        system: System,
    ) -> Option<DVector<f64>> {
        let (um, up) = self.split(x)?;
        if !(self.left.model.is_valid(&um) && self.right.model.is_valid(&up)) {
            return None;
        }
        let g = self
            .germ
            .residual(&self.left.model, &self.right.model, &um, &up)
            .ok()?;
        let mut w = self.wave_cancellation(u0, u1, &um, &up, a).ok()?;
        if let System::Sonic { exit_right } = system {
            w.as_mut_slice()[1] = if exit_right {
                self.right.model.velocity(&up) - self.right.model.sound_speed(&up).ok()?
            } else {
                self.left.model.velocity(&um) + self.left.model.sound_speed(&um).ok()?
            };
        }
        let r = DVector::from_iterator(g.len() + w.len(), g.iter().chain(w.iter()).copied());
        r.iter().all(|v| v.is_finite()).then_some(r)
    }

    #[allow(clippy::too_many_arguments)]
    fn jacobian(
        &self,
        u0: &State,
        u1: &State,
        x: &DVector<f64>,
        r: &DVector<f64>,
        a: f64,
        scale: &[f64],
        system: System,
    ) -> Option<DMatrix<f64>> {
        let n = x.len();
        let mut jac = DMatrix::zeros(r.len(), n);
        for j in 0..n {
            let h = self.options.fd_step * x[j].abs().max(scale[j]);
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += h;
            xm[j] -= h;
            let col = match (
                self.stacked(u0, u1, &xp, a, system),
                self.stacked(u0, u1, &xm, a, system),
            ) {
                (Some(rp), Some(rm)) => (rp - rm) / (2.0 * h),
                (Some(rp), None) => (rp - r) / h,
                (None, Some(rm)) => (r - rm) / h,
                (None, None) => return None,
            };
            jac.set_column(j, &col);
        }
        Some(jac)
    }

    /// Newton direction for the row-equilibrated system, with a
    /// Levenberg-Marquardt step when the matrix is singular.
    fn direction(jac: &DMatrix<f64>, r: &DVector<f64>) -> Option<(DVector<f64>, DVector<f64>)> {
        let rows = jac.nrows();
        let weights = DVector::from_fn(rows, |i, _| {
            let m = jac.row(i).amax();
            if m > 0.0 {
                1.0 / m
            } else {
                1.0
            }
        });
        let js = DMatrix::from_fn(rows, jac.ncols(), |i, j| weights[i] * jac[(i, j)]);
        let rs = r.component_mul(&weights);
        let step = js
            .clone()
            .lu()
            .solve(&(-&rs))
            .filter(|s| s.iter().all(|v| v.is_finite()))
            .or_else(|| {
                let jt = js.transpose();
                let mut normal = &jt * &js;
                let damping = 1e-8 * normal.trace().max(1e-300);
                for i in 0..normal.nrows() {
                    normal[(i, i)] += damping;
                }
                normal.lu().solve(&(-(&jt * &rs)))
            })?;
        Some((step, weights))
    }

    pub(super) fn newton(
        &self,
        u0: &State,
        u1: &State,
        a: f64,
        guesses: &[(State, State)],
        system: System,
    ) -> Result<TraceSolution> {
        let d = self.left.model.dim();
        let scale: Vec<f64> = (0..2 * d)
            .map(|k| {
                let i = k % d;
                u0[i]
                    .abs()
                    .max(u1[i].abs())
                    .max(1e-3 * u0[0].abs().max(u1[0].abs()))
            })
            .collect();
        let flux_scale = self
            .left
            .model
            .flux(u0)?
            .norm_inf()
            .max(self.right.model.flux(u1)?.norm_inf())
            .max(1.0);

        let pack =
            |um: &State, up: &State| DVector::from_iterator(2 * d, um.iter().chain(up.iter()).copied());
        let mut x = pack(u0, u1);
        let mut r = match self.stacked(u0, u1, &x, a, system) {
            Some(r) => r,
            None => {
                // the cells may violate a sonic row's validity; start from a guess
                let (gm, gp) = guesses.first().copied().unwrap_or((*u0, *u1));
                x = pack(&gm, &gp);
                self.stacked(u0, u1, &x, a, system)
                    .ok_or_else(|| Error::DegenerateInput("no valid Newton starting point".to_string()))?
            }
        };
        for (gm, gp) in guesses {
            let xg = pack(gm, gp);
            if let Some(rg) = self.stacked(u0, u1, &xg, a, system) {
                if rg.amax() < r.amax() {
                    x = xg;
                    r = rg;
                }
            }
        }

        let tol = self.options.newton_tol;
        let mut best = (x.clone(), r.amax());
        let mut iterations = 0;
        let mut converged = r.amax() <= 1e-15 * flux_scale;
        let mut polish = 0;

        while !converged && iterations < self.options.newton_max_iter {
            let Some(jac) = self.jacobian(u0, u1, &x, &r, a, &scale, system) else {
                break;
            };
            let Some((step, weights)) = Self::direction(&jac, &r) else {
                break;
            };
            iterations += 1;
            let merit = |res: &DVector<f64>| res.component_mul(&weights).norm_squared();
            let m0 = merit(&r);

            let mut t = 1.0;
            let mut accepted = None;
            for _ in 0..MAX_HALVINGS {
                let xt = &x + &step * t;
                if let Some(rt) = self.stacked(u0, u1, &xt, a, system) {
                    let ok = if best.1 <= tol {
                        rt.amax() < r.amax()
                    } else {
                        merit(&rt) <= (1.0 - ARMIJO * t) * m0
                    };
                    if ok {
                        accepted = Some((xt, rt));
                        break;
                    }
                }
                t *= 0.5;
            }
            let Some((xt, rt)) = accepted else {
                break;
            };
            x = xt;
            r = rt;
            if r.amax() < best.1 {
                best = (x.clone(), r.amax());
            }
            if best.1 <= tol {
                polish += 1;
                if polish > POLISH_STEPS || best.1 == 0.0 {
                    converged = true;
                }
            }
        }
        if best.1 <= tol {
            converged = true;
        }

        let (um, up) = self.split(&best.0).expect("best iterate is valid");
        let branch = match (converged, system) {
            (false, _) => Branch::LeastSquaresFallback,
            (true, System::Full) => Branch::Newton,
            (true, System::Sonic { .. }) => Branch::SonicFix,
        };
        let residual_norm = match system {
            System::Full => best.1,
            System::Sonic { .. } => self.residual_norm(u0, u1, &um, &up, a)?,
        };
        Ok(TraceSolution {
            um,
            up,
            branch,
            residual_norm,
            a_used: a,
            entropy_check: self.entropy_check(u0, u1, &um, &up, a)?,
            admissible: self
                .germ
                .admissible(&self.left.model, &self.right.model, &um, &up)?
                .ok,
            iterations,
        })
    }
}
