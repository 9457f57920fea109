//! Sweep the damping rates against the threshold μ*: a grid over
//! (μ₁, μ₂) at fixed chemotaxis, classified per point and partitioned
//! by the sign of the margin min{μ₁,μ₂} − μ*.
//!
//! The threshold is sufficient only: negative-margin points are NOT
//! expected to blow up, and in low dimension they typically stay
//! bounded — the table is a phase portrait, not a converse theorem.
//!
//! ```bash
//! cargo run --example mu_sweep
//! ```

use aa_lab::config::parse_config;
use aa_lab::sweep::{run_sweep, threshold_margin_table, SweepSpec};

fn main() {
    let cfg = parse_config(
        r#"
[model]
chi1 = 1.0
chi2 = 1.0
mu1 = 1.0
mu2 = 1.0
r = 1.0

[domain]
cells = [96]

[run]
t_end = 30.0
dt_max = 0.005
output_every = 0.5

[initial]
kind = "cosine-bump"
base = [1.0, 1.0, 1.0]
amplitude = [0.5, 0.5, 0.5]

[sweep]
axes = [
  { param = "mu1", values = [0.6, 1.2, 2.4] },
  { param = "mu2", values = [0.6, 1.2, 2.4] },
]
replicate_seeds = [0]
"#,
    )
    .expect("inline config is valid");

    let spec = SweepSpec::from_config(&cfg).expect("sweep section present");
    let result = run_sweep(&spec, None, None).expect("sweep completes");

    println!(
        "{:>4} {:>6} {:>6} {:>9} {:>9}  {}",
        "pt", "mu1", "mu2", "mu_star", "margin", "classification"
    );
    for row in &result.rows {
        println!(
            "{:>4} {:>6} {:>6} {:>9.4} {:>+9.4}  {}",
            row.point_id, row.values[0], row.values[1], row.mu_star, row.margin, row.classification
        );
    }
    println!();
    print!("{}", threshold_margin_table(&result));
}
