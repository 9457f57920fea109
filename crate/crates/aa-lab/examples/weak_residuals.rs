//! Test computed trajectories against the weak formulation: the three
//! integral identities are evaluated with cosine-mode test functions
//! and their residuals tracked under dt refinement. A first-order
//! scheme halves them per refinement until the spatial quadrature
//! floor.
//!
//! ```bash
//! cargo run --example weak_residuals
//! ```

use aa_lab::config::parse_config;
use aa_lab::monitors::{weak_residuals, WeakTestFunction};
use aa_lab::stepper::run_with_capture;

fn main() {
    println!("weak-form residuals (R1, R2, R3) under dt refinement:\n");
    for mode in [1u32, 2] {
        println!("test mode k = {mode}:");
        let mut previous: Option<[f64; 3]> = None;
        for level in 0..4 {
            let dt = 1.0 / (128 << level) as f64;
            let cfg = parse_config(&format!(
                r#"
[model]
chi1 = 1.0
chi2 = 1.0
mu1 = 1.0
mu2 = 1.0
r = 1.0

[domain]
cells = [256]

[run]
t_end = 0.5
dt_max = {dt}
output_every = {dt}
cfl_advection = 1.0
cfl_reaction = 1.0

[initial]
kind = "cosine-bump"
base = [1.0, 1.0, 1.0]
amplitude = [0.1, 0.08, 0.12]
"#
            ))
            .expect("inline config is valid");

            let out = run_with_capture(&cfg, Some(dt)).expect("run completes");
            let res = weak_residuals(
                &out.trajectory,
                &cfg.model,
                &WeakTestFunction::new([mode, 0, 0], 1.0),
            )
            .expect("quadratic exponents");

            match previous {
                Some(prev) => println!(
                    "  dt = 1/{:<5} R = [{:.3e}, {:.3e}, {:.3e}]  ratios [{:.2}, {:.2}, {:.2}]",
                    128 << level,
                    res[0],
                    res[1],
                    res[2],
                    prev[0] / res[0],
                    prev[1] / res[1],
                    prev[2] / res[2],
                ),
                None => println!(
                    "  dt = 1/{:<5} R = [{:.3e}, {:.3e}, {:.3e}]",
                    128 << level,
                    res[0],
                    res[1],
                    res[2]
                ),
            }
            previous = Some(res);
        }
        println!();
    }
}
