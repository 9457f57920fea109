//! Numerical laboratory for the three-component chemotaxis system
//!
//! ```text
//! u_t = Δu − χ₁ ∇·(u F_ε(u) ∇w) + w − μ₁ u^r₁
//! v_t = Δv − χ₂ ∇·(v F_ε(v) ∇w) + w + r·u·v − μ₂ v^r₂
//! w_t = Δw + u + v − w
//! ```
//!
//! on an axis-aligned box with homogeneous Neumann boundary conditions,
//! where `F_ε(s) = (1 + εs)^{−(N+1)}` is an optional flux regularization
//! (`ε = 0` recovers the plain system). The model describes the
//! interaction of CD4⁺ T-cells (`u`), CD8⁺ T-cells (`v`) and IFN-γ (`w`)
//! in Alopecia Areata lesion dynamics; the laboratory is organized
//! around the question of when logistic damping (`μᵢ`, `rᵢ`) keeps
//! solutions bounded despite chemotactic aggregation.
//!
//! The crate provides:
//!
//! * [`config`] — TOML configuration, validation, and defaults,
//! * [`analytics`] — closed-form constants and thresholds (damping
//!   threshold `μ*`, Young constants, interpolation exponents,
//!   comparison bounds, homogeneous equilibria, an ODE reference
//!   integrator),
//! * [`fields`] — cell-centered finite-volume fields, mirror-ghost
//!   Neumann handling, discrete operators, and norm/functional
//!   diagnostics,
//! * [`stepper`] — a positivity-aware IMEX time integrator with
//!   blow-up detection,
//! * [`monitors`] — diagnostic time series plus a-posteriori checks of
//!   the mass-functional inequality, ODE comparison bounds, and
//!   weak-form residuals,
//! * [`sweep`] — parallel parameter sweeps and ε-regularization
//!   studies,
//! * [`cli`] — the `aalab` command-line front end and all file
//!   emission.
//!
//! The `examples/` directory contains one runnable program per major
//! capability; start with `cargo run --example analyze_constants`.

pub mod analytics;
pub mod cli;
pub mod config;
pub mod fields;
pub mod monitors;
pub mod stepper;
pub mod sweep;

pub use config::{DomainSpec, InitialData, LabConfig, ModelParams, RunSpec};
pub use fields::{Field, FieldState, FluxScheme, Grid};
pub use stepper::{RunOutput, StepStatus};
