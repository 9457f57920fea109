//! Cross-check the PDE stepper against the space-homogeneous ODE
//! system: constant initial data must follow the RK4 reference with
//! first-order error in dt, and the homogeneous equilibria must be
//! fixed points of both.
//!
//! ```bash
//! cargo run --example homogeneous_oracle
//! ```

use aa_lab::analytics::{homogeneous_equilibria, homogeneous_ode_trajectory};
use aa_lab::fields::{Field, FieldState, Grid};
use aa_lab::stepper::{step, StepControl, StepStatus};
use aa_lab::{ModelParams, RunSpec};

fn main() {
    let params = ModelParams {
        chi1: 1.0,
        chi2: 1.0,
        mu1: 1.0,
        mu2: 1.0,
        r1: 2.0,
        r2: 2.0,
        r: 1.0,
        epsilon: 0.0,
        dim_n: 3,
    };

    println!("equilibria of the reaction system:");
    for eq in homogeneous_equilibria(&params) {
        println!(
            "  u* = {:.8}  v* = {:.8}  w* = {:.8}  (residual {:.1e})",
            eq.u_star, eq.v_star, eq.w_star, eq.residual
        );
    }

    let y0 = [1.0, 1.0, 1.0];
    let t_end = 2.0;
    let oracle = homogeneous_ode_trajectory(&params, y0, t_end, 1e-4).expect("RK4 stays positive");
    let reference = oracle.last().unwrap().1;
    println!("\nRK4 reference at t = {t_end}: {reference:?}");

    let grid = Grid::new(1, &[8], &[1.0]);
    println!("\nIMEX error against the oracle under dt-halving:");
    let mut previous: Option<f64> = None;
    for k in 0..5 {
        let dt = 0.02 / 2f64.powi(k);
        let mut state = FieldState::new(
            Field::constant(grid, y0[0]),
            Field::constant(grid, y0[1]),
            Field::constant(grid, y0[2]),
            0.0,
        );
        state.fill_ghosts();
        let mut ctl = StepControl::from_run(&RunSpec {
            dt_max: dt,
            cfl_reaction: 1.0,
            ..RunSpec::default()
        });
        while state.t < t_end - 1e-12 {
            let remaining = t_end - state.t;
            let rep = step(&mut state, &params, &mut ctl, remaining).expect("solve converges");
            assert_eq!(rep.status, StepStatus::Advanced);
        }
        let got = [
            state.u.at([0, 0, 0]),
            state.v.at([0, 0, 0]),
            state.w.at([0, 0, 0]),
        ];
        let err: f64 = (0..3).map(|c| (got[c] - reference[c]).abs()).sum();
        match previous {
            Some(prev) => println!(
                "  dt = {dt:<10.6} error = {err:.3e}   observed order {:.2}",
                (prev / err).log2()
            ),
            None => println!("  dt = {dt:<10.6} error = {err:.3e}"),
        }
        previous = Some(err);
    }
}
