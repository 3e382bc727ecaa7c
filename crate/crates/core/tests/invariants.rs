use proptest::prelude::*;

use coupled_fv::fluxes::FluxKind;
use coupled_fv::germs::Germ;
use coupled_fv::interface::{InterfaceSolver, SolverOptions};
use coupled_fv::models::SystemModel;
use coupled_fv::simulator::{Grid, RunOptions, Scheme};
use coupled_fv::state::State;

const ISO: SystemModel = SystemModel::IsothermalEuler { c: 1.0 };
const CELLS: usize = 12;

fn scheme(kind: FluxKind, lambda: f64) -> Scheme {
    let solver = InterfaceSolver::new(
        kind,
        ISO,
        ISO,
        Germ::Particle { lambda },
        SolverOptions::default(),
    )
    .unwrap();
    Scheme::new(solver, 0.9).unwrap()
}

fn state() -> impl Strategy<Value = State> {
    (0.5f64..5.0, -1.0f64..1.0).prop_map(|(rho, u)| State::two(rho, rho * u))
}

fn kind() -> impl Strategy<Value = FluxKind> {
    prop_oneof![Just(FluxKind::Rusanov), Just(FluxKind::Force)]
}

fn mirror(g: &Grid) -> Grid {
    let cells = g.cells.iter().rev().map(State::mirrored).collect();
    Grid::new(cells, g.dx, g.len() - g.n_left).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn mass_changes_only_through_the_outer_faces(
        l in state(), r in state(), lambda in 0.0f64..5.0, kind in kind()
    ) {
        let s = scheme(kind, lambda);
        let mut grid = Grid::riemann(l, r, CELLS / 2, CELLS / 2, 0.05).unwrap();
        let mut prev = None;
        for _ in 0..20 {
            let before: f64 = grid.cells.iter().map(|u| u[0]).sum::<f64>() * grid.dx;
            // ghost cells copy the edge cells, so the outer fluxes are f(U_edge)
            let inflow = ISO.flux(&grid.cells[0]).unwrap()[0];
            let outflow = ISO.flux(grid.cells.last().unwrap()).unwrap()[0];
            let step = s.step(&grid, prev.as_ref(), f64::INFINITY).unwrap();
            let after: f64 = step.grid.cells.iter().map(|u| u[0]).sum::<f64>() * grid.dx;
            let expected = before - step.dt * (outflow - inflow);
            prop_assert!((after - expected).abs() <= 1e-13 * before.max(1.0), "{after} vs {expected}");
            prop_assert!(step.grid.cells.iter().all(|u| u[0] > 0.0));
            prev = Some(step.plan.traces);
            grid = step.grid;
        }
    }

    #[test]
    fn scheme_commutes_with_the_mirror(
        l in state(), r in state(), lambda in 0.0f64..5.0, kind in kind()
    ) {
        let s = scheme(kind, lambda);
        let grid = Grid::riemann(l, r, CELLS / 2, CELLS / 2, 0.05).unwrap();
        let a = s.run(grid.clone(), 0.1, RunOptions::default()).unwrap();
        let b = s.run(mirror(&grid), 0.1, RunOptions::default()).unwrap();
        let scale = grid.cells.iter().map(State::norm_inf).fold(1.0, f64::max);
        prop_assert!(mirror(&a.grid).max_abs_difference(&b.grid) <= 1e-10 * scale);
    }

    #[test]
    fn rusanov_satisfies_the_cell_entropy_inequality(
        l in state(), r in state(), lambda in 0.0f64..5.0
    ) {
        let s = scheme(FluxKind::Rusanov, lambda);
        let grid = Grid::riemann(l, r, CELLS / 2, CELLS / 2, 0.05).unwrap();
        let t = s.run(grid, 0.1, RunOptions { entropy: true, ..RunOptions::default() }).unwrap();
        let log = t.entropy.unwrap();
        prop_assert!(log.max_residual <= 1e-12, "{log:?}");
    }

    #[test]
    fn germ_members_are_steady(rho in 0.5f64..5.0, q in 0.0f64..0.4, lambda in 0.0f64..2.0, kind in kind()) {
        // subsonic partner of (rho, q): q^2/rho + rho - lambda q = q^2/r + r
        let target = q * q / rho + rho - lambda * q;
        let disc = target * target - 4.0 * q * q;
        prop_assume!(target > 0.0 && disc > 0.0);
        let partner = State::two(0.5 * (target + disc.sqrt()), q);
        prop_assume!(partner[0] > q);
        let grid = Grid::riemann(State::two(rho, q), partner, 6, 6, 0.05).unwrap();
        let t = scheme(kind, lambda).run(grid.clone(), 0.2, RunOptions::default()).unwrap();
        prop_assert!(t.grid.max_abs_difference(&grid) < 1e-14);
    }
}
