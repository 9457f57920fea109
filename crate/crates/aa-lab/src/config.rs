//! Model, discretization, and run configuration.
//!
//! Everything tunable lives here, loaded from a TOML file with sections
//! `[model]`, `[domain]`, `[run]`, `[initial]` and the optional
//! `[analysis]`, `[sweep]`, `[epsilon_study]` sections used by the
//! corresponding subcommands. Parsing is strict: an unknown key is a
//! hard error naming the key, so a typo cannot silently skew a sweep.
//!
//! Note on the damping threshold: the boundedness condition is read as
//! `min{μ₁, μ₂} > μ*`; the occasionally seen variants `min{μ₁, μ₁}`
//! and `μ₁μ₁²` are treated as typographical and interpreted as
//! `min{μ₁, μ₂}` and `μ₁μ₂²`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// PDE coefficients plus the analytic dimension `N` used inside
/// `F_ε` and `μ*`.
///
/// `dim_n` is deliberately decoupled from the simulated grid dimension:
/// the `N ≥ 3` formulas can be evaluated while running cheap 1D/2D
/// experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Chemotaxis sensitivity of u (> 0).
    pub chi1: f64,
    /// Chemotaxis sensitivity of v (> 0).
    pub chi2: f64,
    /// Logistic damping rate of u (> 0).
    pub mu1: f64,
    /// Logistic damping rate of v (> 0).
    pub mu2: f64,
    /// Logistic exponent of u (≥ 2).
    #[serde(default = "default_logistic_exponent")]
    pub r1: f64,
    /// Logistic exponent of v (≥ 2).
    #[serde(default = "default_logistic_exponent")]
    pub r2: f64,
    /// Cross-activation rate of the u·v term (≥ 0).
    #[serde(default)]
    pub r: f64,
    /// Flux-regularization parameter ε (≥ 0, 0 = unregularized).
    #[serde(default)]
    pub epsilon: f64,
    /// Analytic dimension N in `F_ε(s) = (1+εs)^{-(N+1)}` and in `μ*`.
    #[serde(default = "default_dim_n")]
    pub dim_n: u32,
}

fn default_logistic_exponent() -> f64 {
    2.0
}

fn default_dim_n() -> u32 {
    3
}

/// Axis-aligned box domain and its Cartesian discretization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    /// Spatial dimension of the simulated grid (1, 2, or 3).
    #[serde(default = "default_dims")]
    pub dims: usize,
    /// Per-axis extent (> 0), one entry per dimension.
    #[serde(default = "default_lengths")]
    pub lengths: Vec<f64>,
    /// Per-axis cell count (≥ 4), one entry per dimension.
    #[serde(default = "default_cells")]
    pub cells: Vec<usize>,
    /// Memory cap on the total cell count.
    #[serde(default = "default_max_cells")]
    pub max_cells: usize,
}

fn default_dims() -> usize {
    1
}

fn default_lengths() -> Vec<f64> {
    vec![1.0]
}

fn default_cells() -> Vec<usize> {
    vec![128]
}

fn default_max_cells() -> usize {
    4_000_000
}

impl Default for DomainSpec {
    fn default() -> Self {
        Self {
            dims: default_dims(),
            lengths: default_lengths(),
            cells: default_cells(),
            max_cells: default_max_cells(),
        }
    }
}

/// Time-loop and output controls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    /// Final simulation time.
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    /// Maximum time step.
    #[serde(default = "default_dt_max")]
    pub dt_max: f64,
    /// Safety factor for the chemotactic CFL limit.
    #[serde(default = "default_cfl")]
    pub cfl_advection: f64,
    /// Safety factor for reaction stiffness.
    #[serde(default = "default_cfl")]
    pub cfl_reaction: f64,
    /// Diagnostic sampling interval.
    #[serde(default = "default_output_every")]
    pub output_every: f64,
    /// Field snapshot interval (0 = no snapshots).
    #[serde(default)]
    pub snapshot_every: f64,
    /// L∞ ceiling declaring blow-up.
    #[serde(default = "default_blowup_linf")]
    pub blowup_linf: f64,
    /// Relative residual tolerance of the implicit diffusion solve.
    #[serde(default = "default_linear_tol")]
    pub linear_tol: f64,
    /// Seed for generated initial data.
    #[serde(default)]
    pub seed: u64,
}

fn default_t_end() -> f64 {
    1.0
}

fn default_dt_max() -> f64 {
    1e-2
}

fn default_cfl() -> f64 {
    0.4
}

fn default_output_every() -> f64 {
    0.05
}

fn default_blowup_linf() -> f64 {
    1e8
}

fn default_linear_tol() -> f64 {
    1e-10
}

impl Default for RunSpec {
    fn default() -> Self {
        Self {
            t_end: default_t_end(),
            dt_max: default_dt_max(),
            cfl_advection: default_cfl(),
            cfl_reaction: default_cfl(),
            output_every: default_output_every(),
            snapshot_every: 0.0,
            blowup_linf: default_blowup_linf(),
            linear_tol: default_linear_tol(),
            seed: 0,
        }
    }
}

/// Family of generated initial data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialKind {
    /// Spatially constant levels `base`.
    Constant,
    /// `base + amplitude · Π_d cos(mode·π·x_d/L_d)`.
    CosineBump,
    /// `base + amplitude · exp(−|x−center|²/(2σ²))`, σ = `width_frac·min L`.
    GaussianBumps,
    /// `base · (1 + amplitude·ξ)` with ξ uniform in [−1, 1] per cell.
    RandomPerturbation,
    /// Read all three fields from a snapshot file.
    FromSnapshot,
}

/// Initial data description; `base` and `amplitude` are indexed
/// `[u, v, w]`. Which of the knobs apply depends on `kind`.
///
/// Generated fields must satisfy `u₀ ≥ 0` with `u₀ ≢ 0`, `v₀ ≥ 0`,
/// `w₀ ≥ 0`; parameter combinations that cannot guarantee this are
/// rejected at validation time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialData {
    #[serde(default = "default_kind")]
    pub kind: InitialKind,
    /// Base level per field.
    #[serde(default = "default_base")]
    pub base: [f64; 3],
    /// Bump/perturbation amplitude per field.
    #[serde(default)]
    pub amplitude: [f64; 3],
    /// Cosine mode index (cosine-bump only).
    #[serde(default = "default_mode")]
    pub mode: u32,
    /// Bump center (gaussian-bumps only; defaults to the domain center).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    /// Bump width as a fraction of the shortest axis (gaussian-bumps only).
    #[serde(default = "default_width_frac")]
    pub width_frac: f64,
    /// Snapshot path (from-snapshot only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot: Option<String>,
}

fn default_kind() -> InitialKind {
    InitialKind::Constant
}

fn default_base() -> [f64; 3] {
    [1.0, 1.0, 1.0]
}

fn default_mode() -> u32 {
    1
}

fn default_width_frac() -> f64 {
    0.125
}

impl Default for InitialData {
    fn default() -> Self {
        Self {
            kind: default_kind(),
            base: default_base(),
            amplitude: [0.0; 3],
            mode: default_mode(),
            center: None,
            width_frac: default_width_frac(),
            snapshot: None,
        }
    }
}

/// Inputs consumed by `analyze` and by sweep margin columns that are
/// not part of the PDE itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSpec {
    /// Maximal Sobolev regularity constant `C_{N/2+1}`.
    ///
    /// The constant has no closed form here; 1.0 is a documented
    /// placeholder scale, not a computed value.
    #[serde(default = "default_c_sobolev")]
    pub c_sobolev: f64,
}

fn default_c_sobolev() -> f64 {
    1.0
}

impl Default for AnalysisSpec {
    fn default() -> Self {
        Self {
            c_sobolev: default_c_sobolev(),
        }
    }
}

/// One sweep axis: a model parameter name and the values it takes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxisSpec {
    /// One of `chi1, chi2, mu1, mu2, r, r1, r2, epsilon`.
    pub param: String,
    pub values: Vec<f64>,
}

/// `[sweep]` section: Cartesian parameter grid over the base config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Up to three axes.
    pub axes: Vec<SweepAxisSpec>,
    /// Initial-data seeds; one run per (point, seed).
    #[serde(default = "default_replicate_seeds")]
    pub replicate_seeds: Vec<u64>,
    /// Cap on points × replicates.
    #[serde(default = "default_max_points")]
    pub max_points: usize,
}

fn default_replicate_seeds() -> Vec<u64> {
    vec![0]
}

fn default_max_points() -> usize {
    10_000
}

/// `[epsilon_study]` section: strictly decreasing ε ladder run on the
/// otherwise identical base config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpsilonStudySection {
    pub epsilons: Vec<f64>,
}

/// The whole configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabConfig {
    pub model: ModelParams,
    #[serde(default)]
    pub domain: DomainSpec,
    #[serde(default)]
    pub run: RunSpec,
    #[serde(default)]
    pub initial: InitialData,
    #[serde(default)]
    pub analysis: AnalysisSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_study: Option<EpsilonStudySection>,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid override `{0}` (expected section.key=value)")]
    BadOverride(String),
    #[error("configuration invalid:\n{0}")]
    Invalid(ValidationReport),
}

/// Accumulated invariant violations; empty means runnable.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    fn check(&mut self, ok: bool, msg: impl Into<String>) {
        if !ok {
            self.violations.push(msg.into());
        }
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for v in &self.violations {
            writeln!(f, "  - {v}")?;
        }
        Ok(())
    }
}

/// Check every invariant of the model, domain, and run sections.
///
/// Report-style: returns the full list of violations and never aborts,
/// so a caller can surface all problems at once. Pure — identical
/// inputs yield identical reports.
pub fn validate(params: &ModelParams, domain: &DomainSpec, run: &RunSpec) -> ValidationReport {
    let mut rep = ValidationReport::default();

    rep.check(params.chi1 > 0.0, format!("chi1 must be > 0 (got {})", params.chi1));
    rep.check(params.chi2 > 0.0, format!("chi2 must be > 0 (got {})", params.chi2));
    rep.check(params.mu1 > 0.0, format!("mu1 must be > 0 (got {})", params.mu1));
    rep.check(params.mu2 > 0.0, format!("mu2 must be > 0 (got {})", params.mu2));
    rep.check(params.r1 >= 2.0, format!("r1 ≥ 2 required (got {})", params.r1));
    rep.check(params.r2 >= 2.0, format!("r2 ≥ 2 required (got {})", params.r2));
    rep.check(params.r >= 0.0, format!("r must be ≥ 0 (got {})", params.r));
    rep.check(
        params.epsilon >= 0.0,
        format!("epsilon must be ≥ 0 (got {})", params.epsilon),
    );
    rep.check(params.dim_n >= 1, "dim_n must be ≥ 1".to_string());

    rep.check(
        (1..=3).contains(&domain.dims),
        format!("dims must be 1, 2, or 3 (got {})", domain.dims),
    );
    rep.check(
        domain.lengths.len() == domain.dims,
        format!(
            "lengths must have one entry per dimension (got {} for dims={})",
            domain.lengths.len(),
            domain.dims
        ),
    );
    rep.check(
        domain.cells.len() == domain.dims,
        format!(
            "cells must have one entry per dimension (got {} for dims={})",
            domain.cells.len(),
            domain.dims
        ),
    );
    for (axis, &len) in domain.lengths.iter().enumerate() {
        rep.check(
            len > 0.0 && len.is_finite(),
            format!("lengths[{axis}] must be > 0 (got {len})"),
        );
    }
    for (axis, &n) in domain.cells.iter().enumerate() {
        rep.check(n >= 4, format!("cells[{axis}] must be ≥ 4 (got {n})"));
    }
    let total: usize = domain.cells.iter().product();
    rep.check(
        total <= domain.max_cells,
        format!(
            "total cell count {total} exceeds max_cells {}",
            domain.max_cells
        ),
    );

    rep.check(run.t_end >= 0.0, format!("t_end must be ≥ 0 (got {})", run.t_end));
    rep.check(run.dt_max > 0.0, format!("dt_max must be > 0 (got {})", run.dt_max));
    rep.check(
        run.cfl_advection > 0.0 && run.cfl_advection <= 1.0,
        format!("cfl_advection must be in (0, 1] (got {})", run.cfl_advection),
    );
    rep.check(
        run.cfl_reaction > 0.0 && run.cfl_reaction <= 1.0,
        format!("cfl_reaction must be in (0, 1] (got {})", run.cfl_reaction),
    );
    rep.check(
        run.output_every > 0.0,
        format!("output_every must be > 0 (got {})", run.output_every),
    );
    rep.check(
        run.snapshot_every >= 0.0,
        format!("snapshot_every must be ≥ 0 (got {})", run.snapshot_every),
    );
    rep.check(
        run.blowup_linf > 1.0,
        format!("blowup_linf must be > 1 (got {})", run.blowup_linf),
    );
    rep.check(
        run.linear_tol > 0.0 && run.linear_tol <= 1e-4,
        format!("linear_tol must be in (0, 1e-4] (got {})", run.linear_tol),
    );

    rep
}

/// Check the generated-initial-data invariants that can be decided
/// without building the fields (nonnegativity by construction, u₀ ≢ 0).
pub fn validate_initial(init: &InitialData) -> ValidationReport {
    let mut rep = ValidationReport::default();
    let names = ["u0", "v0", "w0"];
    match init.kind {
        InitialKind::Constant => {
            for (f, name) in names.iter().enumerate() {
                rep.check(
                    init.base[f] >= 0.0,
                    format!("initial {name} must be ≥ 0 (base {})", init.base[f]),
                );
            }
            rep.check(init.base[0] > 0.0, "initial u0 must not be identically zero");
        }
        InitialKind::CosineBump => {
            for (f, name) in names.iter().enumerate() {
                rep.check(
                    init.base[f] - init.amplitude[f].abs() >= 0.0,
                    format!(
                        "initial {name} may dip below 0: base {} < |amplitude| {}",
                        init.base[f], init.amplitude[f]
                    ),
                );
            }
            rep.check(
                init.base[0] > 0.0 || init.amplitude[0] != 0.0,
                "initial u0 must not be identically zero",
            );
            rep.check(init.mode >= 1, "initial mode must be ≥ 1");
        }
        InitialKind::GaussianBumps => {
            for (f, name) in names.iter().enumerate() {
                rep.check(
                    init.base[f] >= 0.0 && init.base[f] + init.amplitude[f].min(0.0) >= 0.0,
                    format!("initial {name} may dip below 0"),
                );
            }
            rep.check(
                init.base[0] > 0.0 || init.amplitude[0] > 0.0,
                "initial u0 must not be identically zero",
            );
            rep.check(
                init.width_frac > 0.0,
                format!("initial width_frac must be > 0 (got {})", init.width_frac),
            );
        }
        InitialKind::RandomPerturbation => {
            for (f, name) in names.iter().enumerate() {
                rep.check(
                    init.base[f] >= 0.0,
                    format!("initial {name} must be ≥ 0 (base {})", init.base[f]),
                );
                rep.check(
                    init.amplitude[f].abs() <= 1.0,
                    format!(
                        "initial {name} perturbation |amplitude| must be ≤ 1 (got {})",
                        init.amplitude[f]
                    ),
                );
            }
            rep.check(init.base[0] > 0.0, "initial u0 must not be identically zero");
        }
        InitialKind::FromSnapshot => {
            rep.check(
                init.snapshot.is_some(),
                "initial.snapshot path required for kind from-snapshot",
            );
        }
    }
    rep
}

/// Validate every section of a full config, aggregating all violations.
pub fn validate_config(cfg: &LabConfig) -> ValidationReport {
    let mut rep = validate(&cfg.model, &cfg.domain, &cfg.run);
    rep.violations
        .extend(validate_initial(&cfg.initial).violations);
    rep.check(
        cfg.analysis.c_sobolev > 0.0,
        format!("analysis.c_sobolev must be > 0 (got {})", cfg.analysis.c_sobolev),
    );
    if let Some(sweep) = &cfg.sweep {
        rep.check(sweep.axes.len() <= 3, "sweep supports at most 3 axes");
        rep.check(!sweep.axes.is_empty(), "sweep.axes must not be empty");
        rep.check(
            !sweep.replicate_seeds.is_empty(),
            "sweep.replicate_seeds must not be empty",
        );
        let points: usize = sweep.axes.iter().map(|a| a.values.len().max(1)).product();
        rep.check(
            points * sweep.replicate_seeds.len() <= sweep.max_points,
            format!(
                "sweep has {} runs, exceeding max_points {}",
                points * sweep.replicate_seeds.len(),
                sweep.max_points
            ),
        );
        for axis in &sweep.axes {
            rep.check(
                matches!(
                    axis.param.as_str(),
                    "chi1" | "chi2" | "mu1" | "mu2" | "r" | "r1" | "r2" | "epsilon"
                ),
                format!("sweep axis param `{}` is not sweepable", axis.param),
            );
            rep.check(
                !axis.values.is_empty(),
                format!("sweep axis `{}` has no values", axis.param),
            );
        }
    }
    if let Some(eps) = &cfg.epsilon_study {
        rep.check(
            eps.epsilons.len() >= 3,
            format!("epsilon_study ladder needs ≥ 3 rungs (got {})", eps.epsilons.len()),
        );
        rep.check(
            eps.epsilons.windows(2).all(|w| w[1] < w[0]),
            "epsilon_study ladder must be strictly decreasing",
        );
        rep.check(
            eps.epsilons.iter().all(|&e| e > 0.0),
            "epsilon_study ladder values must be > 0",
        );
        rep.check(
            cfg.model.r1 == 2.0 && cfg.model.r2 == 2.0,
            "epsilon_study requires the quadratic system (r1 = r2 = 2)",
        );
    }
    rep
}

/// Parse a config from TOML text. Strict: unknown keys are fatal.
pub fn parse_config(text: &str) -> Result<LabConfig, ConfigError> {
    let cfg: LabConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    let rep = validate_config(&cfg);
    if rep.is_ok() {
        Ok(cfg)
    } else {
        Err(ConfigError::Invalid(rep))
    }
}

/// Load and validate a config file.
pub fn load_config(path: impl AsRef<Path>) -> Result<LabConfig, ConfigError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text)
}

/// Serialize a config back to TOML. `load_config` on the result
/// reproduces the input field-for-field.
pub fn write_config(cfg: &LabConfig) -> String {
    toml::to_string_pretty(cfg).expect("config serialization cannot fail")
}

/// Apply `section.key=value` overrides to a raw TOML table before the
/// typed parse, so overridden configs go through the same strict
/// validation as files.
pub fn apply_overrides(text: &str, sets: &[String]) -> Result<LabConfig, ConfigError> {
    let mut doc: toml::Table =
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    for set in sets {
        let (path, raw_value) = set
            .split_once('=')
            .ok_or_else(|| ConfigError::BadOverride(set.clone()))?;
        let value = parse_override_value(raw_value.trim());
        let segments: Vec<&str> = path.trim().split('.').collect();
        if segments.is_empty() || segments.iter().any(|s| s.is_empty()) {
            return Err(ConfigError::BadOverride(set.clone()));
        }
        let mut table = &mut doc;
        for seg in &segments[..segments.len() - 1] {
            table = table
                .entry(seg.to_string())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()))
                .as_table_mut()
                .ok_or_else(|| ConfigError::BadOverride(set.clone()))?;
        }
        table.insert(segments[segments.len() - 1].to_string(), value);
    }
    let cfg: LabConfig =
        LabConfig::deserialize(doc).map_err(|e| ConfigError::Parse(e.to_string()))?;
    let rep = validate_config(&cfg);
    if rep.is_ok() {
        Ok(cfg)
    } else {
        Err(ConfigError::Invalid(rep))
    }
}

fn parse_override_value(raw: &str) -> toml::Value {
    // Reuse the TOML value grammar so arrays and quoted strings work.
    if let Ok(table) = toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        if let Some(v) = table.get("v") {
            return v.clone();
        }
    }
    toml::Value::String(raw.to_string())
}

/// Short stable hash of the canonical serialization, used in the
/// reproducibility stanza of every emitted text file.
pub fn config_hash(cfg: &LabConfig) -> String {
    let canonical = write_config(cfg);
    let digest = Sha256::digest(canonical.as_bytes());
    let mut hex = String::with_capacity(16);
    for byte in digest.iter().take(8) {
        hex.push_str(&format!("{byte:02x}"));
    }
    hex
}

/// Worker-parallelism cap: explicit request first, else `AA_LAB_THREADS`.
pub fn thread_cap(explicit: Option<usize>) -> Option<usize> {
    explicit.or_else(|| {
        std::env::var("AA_LAB_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> &'static str {
        "[model]\nchi1 = 1.0\nchi2 = 1.0\nmu1 = 1.0\nmu2 = 1.0\n"
    }

    #[test]
    fn minimal_config_defaults() {
        let cfg = parse_config(minimal()).unwrap();
        assert_eq!(cfg.model.r1, 2.0);
        assert_eq!(cfg.model.r2, 2.0);
        assert_eq!(cfg.model.r, 0.0);
        assert_eq!(cfg.model.epsilon, 0.0);
        assert_eq!(cfg.model.dim_n, 3);
        assert_eq!(cfg.domain.dims, 1);
        assert_eq!(cfg.run.cfl_advection, 0.4);
        assert_eq!(cfg.run.blowup_linf, 1e8);
        assert_eq!(cfg.run.linear_tol, 1e-10);
        assert_eq!(cfg.initial.kind, InitialKind::Constant);
    }

    #[test]
    fn generalized_logistic_accepted() {
        let text = format!("{}r1 = 3.0\nr2 = 2.5\n", minimal());
        let cfg = parse_config(&text).unwrap();
        assert_eq!(cfg.model.r1, 3.0);
        assert_eq!(cfg.model.r2, 2.5);
    }

    #[test]
    fn unknown_key_is_fatal_and_named() {
        let text = format!("{}bogus_key = 1.0\n", minimal());
        let err = parse_config(&text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bogus_key"), "error should name the key: {msg}");
    }

    #[test]
    fn validate_reports_sign_violations() {
        let mut cfg = parse_config(minimal()).unwrap();
        cfg.model.mu1 = -1.0;
        let rep = validate(&cfg.model, &cfg.domain, &cfg.run);
        assert!(rep.violations.iter().any(|v| v.contains("mu1 must be > 0")));
    }

    #[test]
    fn validate_reports_exponent_floor() {
        let mut cfg = parse_config(minimal()).unwrap();
        cfg.model.r1 = 1.5;
        let rep = validate(&cfg.model, &cfg.domain, &cfg.run);
        assert!(rep.violations.iter().any(|v| v.contains("r1 ≥ 2 required")));
    }

    #[test]
    fn validate_clean_quadratic_case() {
        let cfg = parse_config(minimal()).unwrap();
        let rep = validate(&cfg.model, &cfg.domain, &cfg.run);
        assert!(rep.is_ok(), "unexpected violations: {rep}");
    }

    #[test]
    fn validate_is_pure() {
        let mut cfg = parse_config(minimal()).unwrap();
        cfg.model.mu2 = -3.0;
        cfg.run.t_end = -1.0;
        let a = validate(&cfg.model, &cfg.domain, &cfg.run);
        let b = validate(&cfg.model, &cfg.domain, &cfg.run);
        assert_eq!(a, b);
    }

    #[test]
    fn roundtrip_field_for_field() {
        let text = format!(
            "{}r1 = 2.5\nepsilon = 0.05\n\n[domain]\ndims = 2\nlengths = [2.0, 1.0]\ncells = [16, 8]\n\n[run]\nt_end = 0.25\nseed = 7\n\n[initial]\nkind = \"cosine-bump\"\nbase = [1.0, 1.0, 0.5]\namplitude = [0.5, 0.25, 0.25]\nmode = 2\n",
            minimal()
        );
        let cfg = parse_config(&text).unwrap();
        let reparsed = parse_config(&write_config(&cfg)).unwrap();
        assert_eq!(cfg, reparsed);
    }

    #[test]
    fn overrides_apply_and_revalidate() {
        let cfg = apply_overrides(minimal(), &["model.mu1=3.5".to_string()]).unwrap();
        assert_eq!(cfg.model.mu1, 3.5);
        let err = apply_overrides(minimal(), &["model.mu1=-3.5".to_string()]).unwrap_err();
        assert!(err.to_string().contains("mu1 must be > 0"));
        let err = apply_overrides(minimal(), &["model.no_such=1".to_string()]).unwrap_err();
        assert!(err.to_string().contains("no_such"));
    }

    #[test]
    fn config_hash_stable_and_sensitive() {
        let a = parse_config(minimal()).unwrap();
        let mut b = a.clone();
        assert_eq!(config_hash(&a), config_hash(&b));
        b.model.mu1 = 2.0;
        assert_ne!(config_hash(&a), config_hash(&b));
    }

    #[test]
    fn epsilon_study_requires_quadratic_exponents() {
        let text = format!(
            "{}r1 = 3.0\nr2 = 3.0\n\n[epsilon_study]\nepsilons = [0.1, 0.05, 0.025]\n",
            minimal()
        );
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().contains("quadratic"));
    }
}
