//! Run one 1D simulation and print the diagnostic story: selected
//! norms over time, the boundedness classification, and the verdict of
//! the mass-functional check.
//!
//! ```bash
//! cargo run --example simulate_1d
//! ```

use aa_lab::config::parse_config;
use aa_lab::monitors::{check_mass_inequality, classify_run};
use aa_lab::stepper::{run, StepStatus};

fn main() {
    let cfg = parse_config(
        r#"
[model]
chi1 = 2.0
chi2 = 2.0
mu1 = 1.0
mu2 = 1.0
r = 1.0

[domain]
dims = 1
lengths = [2.0]
cells = [256]

[run]
t_end = 24.0
dt_max = 0.005
output_every = 1.0

[initial]
kind = "gaussian-bumps"
base = [0.2, 0.2, 0.1]
amplitude = [1.5, 1.0, 0.5]
width_frac = 0.08
"#,
    )
    .expect("inline config is valid");

    let out = run(&cfg).expect("run completes");
    println!("status: {:?} after {} steps ({} rejected)\n", out.status, out.steps, out.rejected_steps);

    println!("{:>6} {:>12} {:>12} {:>12} {:>12} {:>12}", "t", "linf_u", "linf_v", "l1_u+l1_v", "grad_w_sq", "energy_y");
    for s in &out.series.samples {
        println!(
            "{:6.2} {:12.5} {:12.5} {:12.5} {:12.5} {:12.5}",
            s.t,
            s.linf_u,
            s.linf_v,
            s.l1_u + s.l1_v,
            s.grad_w_sq,
            s.energy_y
        );
    }

    let class = classify_run(&out.series, out.status == StepStatus::BlowupDetected);
    println!("\nclassification: {class}");

    let mass = check_mass_inequality(&out.series, &cfg.model);
    println!(
        "mass inequality: {} (sup y = {:.4}, envelope = {:.4})",
        mass.verdict, mass.sup_y, mass.absorbing_bound
    );
}
