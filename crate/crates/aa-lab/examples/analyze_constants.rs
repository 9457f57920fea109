//! Evaluate every closed-form constant of the boundedness analysis for
//! one parameter set: the damping threshold μ* and its margin, the
//! Young constant L, the auxiliary minimum of H, interpolation
//! exponents, and all homogeneous equilibria.
//!
//! ```bash
//! cargo run --example analyze_constants
//! ```

use aa_lab::analytics::{
    gn_exponent, h_min, homogeneous_equilibria, mu_star, young_constant, GnQuery, HMinQuery,
    ThresholdInputs,
};
use aa_lab::ModelParams;

fn main() {
    let params = ModelParams {
        chi1: 1.0,
        chi2: 1.5,
        mu1: 2.0,
        mu2: 2.5,
        r1: 2.0,
        r2: 2.0,
        r: 1.0,
        epsilon: 0.0,
        dim_n: 3,
    };
    let c_sobolev = 1.0; // placeholder scale for the maximal-regularity constant

    println!("parameters: {params:#?}\n");

    let threshold = mu_star(&ThresholdInputs::from_model(&params, c_sobolev))
        .expect("dim_n >= 3 by construction");
    println!("damping threshold:");
    println!("  mu*               = {}", threshold.total);
    println!("    chemotaxis term   {}", threshold.chemotaxis_term);
    println!("    proliferation     {}", threshold.proliferation_term);
    let mu_min = params.mu1.min(params.mu2);
    println!("  min(mu1, mu2)     = {mu_min}");
    println!(
        "  margin            = {}  ({})",
        mu_min - threshold.total,
        if mu_min > threshold.total {
            "boundedness guaranteed for r1 = r2 = 2"
        } else {
            "below the sufficient threshold; no conclusion"
        }
    );

    let l = young_constant(params.mu2, params.r2, params.r);
    println!("\nYoung constant L   = {l}  (r²/(2µ₂) in the quadratic case)");

    let h = h_min(&HMinQuery {
        delta: params.dim_n as f64 / 2.0,
        chi: params.chi1.max(params.chi2),
        c_const: c_sobolev,
    });
    println!(
        "min H(y)           = {} at y = {}{}",
        h.value,
        h.y_min,
        if h.attained { "" } else { " (infimum)" }
    );

    println!("\ninterpolation exponents:");
    for (p, q) in [(2.0, 1.0), (3.0, 2.0), (4.0, 2.0)] {
        match gn_exponent(&GnQuery { p, q, dim_n: params.dim_n }) {
            Ok(gn) => println!(
                "  alpha(p={p}, q={q}) = {}{}",
                gn.alpha,
                if gn.in_range { "" } else { "  [outside (0,1)]" }
            ),
            Err(e) => println!("  alpha(p={p}, q={q}) rejected: {e}"),
        }
    }

    println!("\nhomogeneous equilibria (u*, v*, w*):");
    for eq in homogeneous_equilibria(&params) {
        println!(
            "  ({:.6}, {:.6}, {:.6})   residual {:.1e}",
            eq.u_star, eq.v_star, eq.w_star, eq.residual
        );
    }
}
