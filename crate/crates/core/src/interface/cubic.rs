//! Scalar algebra of the Rusanov traces for the isothermal particle germ.

use crate::error::{Error, Result};

/// Interface momentum imposed by mass conservation and the momentum part of
/// the wave-cancellation condition.
pub fn interface_momentum(q0: f64, q1: f64, eta0: f64, eta1: f64, a: f64, lambda: f64) -> f64 {
    (a * (q0 + q1) + eta0 - eta1) / (lambda + 2.0 * a)
}

/// Traces `rho- = rho* - r`, `rho+ = rho* + r` at momentum `q` satisfy the
/// momentum jump iff `r` is a root of
/// `2c^2 r^3 + lambda q r^2 + (2q^2 - 2c^2 rho*^2) r - lambda q rho*^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CubicProblem {
    pub rho_star: f64,
    pub q: f64,
    pub c: f64,
    pub lambda: f64,
}

impl CubicProblem {
    pub fn poly(&self, r: f64) -> f64 {
        let CubicProblem {
            rho_star: s,
            q,
            c,
            lambda,
        } = *self;
        let c2 = c * c;
        ((2.0 * c2 * r + lambda * q) * r + 2.0 * q * q - 2.0 * c2 * s * s) * r - lambda * q * s * s
    }

    fn dpoly(&self, r: f64) -> f64 {
        let c2 = self.c * self.c;
        6.0 * c2 * r * r + 2.0 * self.lambda * self.q * r + 2.0 * self.q * self.q
            - 2.0 * c2 * self.rho_star * self.rho_star
    }

    /// Momentum-jump defect `eta- - eta+ - lambda q` at `r`.
    pub fn defect(&self, r: f64) -> f64 {
        let (m, p) = (self.rho_star - r, self.rho_star + r);
        let c2 = self.c * self.c;
        let q2 = self.q * self.q;
        (q2 / m + c2 * m) - (q2 / p + c2 * p) - self.lambda * self.q
    }

    /// All roots in `(-rho*, rho*)`, ascending.
    pub fn roots(&self) -> Result<Vec<f64>> {
        let s = self.rho_star;
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::DegenerateInput(format!("rho* = {s}")));
        }
        let c2 = self.c * self.c;
        let scale = 2.0 * c2 * s.powi(3) + self.lambda * self.q.abs() * s * s + 2.0 * self.q * self.q * s;

        let mut breaks = vec![-s];
        let (a, b, cc) = (
            6.0 * c2,
            2.0 * self.lambda * self.q,
            2.0 * self.q * self.q - 2.0 * c2 * s * s,
        );
        let disc = b * b - 4.0 * a * cc;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            for r in [(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)] {
                if r > -s && r < s {
                    breaks.push(r);
                }
            }
        }
        breaks.push(s);
        breaks.dedup();

        let mut roots: Vec<f64> = Vec::new();
        for w in breaks.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let (plo, phi) = (self.poly(lo), self.poly(hi));
            if plo * phi < 0.0 {
                roots.push(bisect(|r| self.poly(r), lo, hi, plo));
            }
        }
        // tangential roots sit at interior critical points
        for &r in &breaks[1..breaks.len() - 1] {
            if self.poly(r).abs() <= 1e-14 * scale && self.dpoly(r).abs() <= 1e-7 * scale / s {
                roots.push(r);
            }
        }
        roots.sort_by(|x, y| x.total_cmp(y));
        roots.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * s);
        if roots.is_empty() {
            return Err(Error::NoCubicRoot { rho_star: s });
        }
        Ok(roots)
    }
}

/// Bisection to machine precision on a bracket with a sign change.
pub(crate) fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, mut flo: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    let (fl, fh) = (f(lo).abs(), f(hi).abs());
    if fl <= fh {
        lo
    } else {
        hi
    }
}

/// Exit density `rho+` of the sonic fix for `q > 0`: the root in
/// `(0, rho*]` of `4c (rho* - x)^2 - lambda x (2 rho* - x)`, which encodes
/// `rho- + rho+ = 2 rho*`, `q = c rho+` and the momentum jump.
pub fn sonic_exit_density(rho_star: f64, c: f64, lambda: f64) -> Result<f64> {
    if !(rho_star > 0.0) {
        return Err(Error::SonicFix(format!("rho* = {rho_star}")));
    }
    if lambda == 0.0 {
        return Ok(rho_star);
    }
    let f = |x: f64| 4.0 * c * (rho_star - x).powi(2) - lambda * x * (2.0 * rho_star - x);
    let (lo, hi) = (0.0, rho_star);
    let (flo, fhi) = (f(lo), f(hi));
    if !(flo > 0.0 && fhi < 0.0) {
        return Err(Error::SonicFix(format!(
            "no sign change on (0, {rho_star}]: f(0) = {flo}, f(rho*) = {fhi}"
        )));
    }
    Ok(bisect(f, lo, hi, flo))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn problem(rho_star: f64, q: f64, lambda: f64) -> CubicProblem {
        CubicProblem {
            rho_star,
            q,
            c: 1.0,
            lambda,
        }
    }

    #[test]
    fn momentum_formula() {
        // equal cells: 2Aq / (lambda + 2A)
        let q = interface_momentum(1.0, 1.0, 3.0, 3.0, 2.0, 1.0);
        assert!((q - 4.0 / 5.0).abs() < 1e-15);
        // lambda = 0 gives the Rusanov middle state
        let q = interface_momentum(1.0, 2.0, 3.0, 5.0, 4.0, 0.0);
        assert!((q - (1.5 + (3.0 - 5.0) / 8.0)).abs() < 1e-15);
        // germ member: eta0 - eta1 = lambda q0, q0 = q1
        let (q0, lambda, a) = (0.7, 1.3, 3.0);
        let q = interface_momentum(q0, q0, 5.0 + lambda * q0, 5.0, a, lambda);
        assert!((q - q0).abs() < 1e-15);
    }

    #[test]
    fn three_roots_without_friction() {
        let roots = problem(5.0, 2.5, 0.0).roots().unwrap();
        assert_eq!(roots.len(), 3);
        let r = 18.75f64.sqrt();
        for (got, want) in roots.iter().zip([-r, 0.0, r]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn single_root_for_supersonic_middle() {
        for lambda in [0.0, 1.0, 10.0, 100.0] {
            let roots = problem(1.0, 2.5, lambda).roots().unwrap();
            assert_eq!(roots.len(), 1, "lambda = {lambda}");
        }
        assert_eq!(problem(1.0, 2.5, 0.0).roots().unwrap(), vec![0.0]);
    }

    #[test]
    fn zero_momentum_has_only_the_trivial_root() {
        for lambda in [0.0, 0.5, 5.0] {
            assert_eq!(problem(2.0, 0.0, lambda).roots().unwrap(), vec![0.0]);
        }
    }

    #[test]
    fn root_count_shrinks_with_friction() {
        let counts: Vec<usize> = [1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0]
            .iter()
            .map(|&l| problem(5.0, 2.5, l).roots().unwrap().len())
            .collect();
        assert_eq!(counts[0], 3);
        assert_eq!(*counts.last().unwrap(), 1);
        assert!(counts.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn sonic_exit_matches_closed_form() {
        // frozen closed-form values rho* (1 - sqrt(lambda / (4c + lambda)))
        assert!((sonic_exit_density(10.5, 1.0, 0.5).unwrap() - 7.000000000000001).abs() < 1e-12);
        assert!((sonic_exit_density(3.0, 1.0, 1.0).unwrap() - 1.6583592135001264).abs() < 1e-12);
        assert_eq!(sonic_exit_density(2.0, 1.0, 0.0).unwrap(), 2.0);
    }

    #[test]
    fn sonic_exit_by_grid_search() {
        // brute-force over (rho-, rho+) with rho- + rho+ = 2 rho*
        let (s, c, lambda) = (3.0, 1.0, 1.0);
        let x = sonic_exit_density(s, c, lambda).unwrap();
        let mut best = (f64::INFINITY, 0.0);
        for i in 1..200_000 {
            let rp = s * i as f64 / 200_000.0;
            let rm = 2.0 * s - rp;
            let q = c * rp;
            let defect = (q * q / rm + c * c * rm) - (q * q / rp + c * c * rp) - lambda * q;
            if defect.abs() < best.0 {
                best = (defect.abs(), rp);
            }
        }
        assert!((best.1 - x).abs() < 1e-4);
    }

    proptest! {
        #[test]
        fn roots_are_accurate_and_inside(
            rho_star in 0.1f64..10.0, q in -5.0f64..5.0, lambda in 0.0f64..50.0
        ) {
            let p = problem(rho_star, q, lambda);
            let roots = p.roots().unwrap();
            prop_assert!((1..=3).contains(&roots.len()));
            for &r in &roots {
                prop_assert!(r > -rho_star && r < rho_star);
                // absolute bound plus the defect change caused by a one-ulp error in r
                let (m, p2) = (rho_star - r, rho_star + r);
                let slope = q * q * (1.0 / (m * m) + 1.0 / (p2 * p2)) + 2.0;
                let tol = 1e-11 + 4.0 * f64::EPSILON * rho_star * slope;
                prop_assert!(p.defect(r).abs() < tol, "defect {} at r = {}", p.defect(r), r);
            }
            prop_assert!(roots.windows(2).all(|w| w[0] < w[1]));
        }
    }
}
