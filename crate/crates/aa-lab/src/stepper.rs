//! IMEX time integration: implicit diffusion (and decay for w),
//! explicit chemotaxis and reactions, with step-size control,
//! positivity enforcement, and blow-up detection.
//!
//! The splitting is first order by design: the acceptance targets are
//! qualitative boundedness phenomenology and first-order agreement
//! with the homogeneous ODE oracle, and a single explicit/implicit
//! pass keeps the positivity logic auditable. A step whose explicit
//! phase drives any field below −1e-12 is rejected and retried with
//! donor-cell upwinding and half the step — never silently clipped,
//! which would corrupt the mass identities the monitors verify.

use thiserror::Error;

use crate::config::{LabConfig, ModelParams, RunSpec};
use crate::fields::{
    chemotactic_divergence, initial_state, max_face_gradient, Field, FieldState, FluxScheme, Grid,
    InitError,
};
use crate::monitors::{DiagnosticSample, DiagnosticSeries};

/// Negativity tolerance of the scheme: accepted states satisfy
/// min(u, v, w) ≥ −`NEG_TOL`.
pub const NEG_TOL: f64 = 1e-12;

/// Steps below this are reported as underflow instead of being taken.
pub const DT_FLOOR: f64 = 1e-13;

const MAX_REJECTIONS: u32 = 5;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(
        "implicit diffusion solve did not converge: relative residual {residual:.3e} after {iterations} iterations (tol {tol:.1e})"
    )]
    NoConvergence {
        iterations: usize,
        residual: f64,
        tol: f64,
    },
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("initial data: {0}")]
    Init(#[from] InitError),
}

/// Mutable step-size state threaded through a run.
#[derive(Debug, Clone)]
pub struct StepControl {
    pub dt_max: f64,
    pub cfl_advection: f64,
    pub cfl_reaction: f64,
    pub blowup_linf: f64,
    pub linear_tol: f64,
    /// Base flux scheme; positivity rejections promote to upwind for
    /// the retried step only.
    pub scheme: FluxScheme,
    /// Total rejected (explicit-phase) attempts so far.
    pub rejected_steps: u64,
    /// dt used by the most recent accepted step.
    pub dt_current: f64,
}

impl StepControl {
    pub fn from_run(run: &RunSpec) -> Self {
        Self {
            dt_max: run.dt_max,
            cfl_advection: run.cfl_advection,
            cfl_reaction: run.cfl_reaction,
            blowup_linf: run.blowup_linf,
            linear_tol: run.linear_tol,
            scheme: FluxScheme::Central,
            rejected_steps: 0,
            dt_current: run.dt_max,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepStatus {
    Advanced,
    BlowupDetected,
    DtUnderflow,
}

/// What one `step` call did.
#[derive(Debug, Clone, Copy)]
pub struct StepReport {
    pub status: StepStatus,
    pub dt_used: f64,
    /// Conjugate-gradient iterations summed over the three solves.
    pub linear_iterations: usize,
}

/// Stability-limited step size:
/// `min(dt_max, cfl_adv·h/V_max, cfl_reac/R_max)` with
/// `V_max = max(χ₁,χ₂)·max|∇w|·max F_ε` and
/// `R_max = max(μ₁r₁u^{r₁−1} + μ₂r₂v^{r₂−1} + r(u+v) + 1)`.
/// Floors at 1e-14; the caller signals underflow. Requires ghosts.
pub fn compute_dt(state: &FieldState, params: &ModelParams, ctl: &StepControl) -> f64 {
    let grad_max = max_face_gradient(&state.w);
    // F_ε ≤ F_ε(min density) since it is nonincreasing in s
    let min_density = state.u.min_value().min(state.v.min_value()).max(0.0);
    let f_max = crate::fields::f_eps(min_density, params.epsilon, params.dim_n);
    let v_max = params.chi1.max(params.chi2) * grad_max * f_max;

    let mut r_max: f64 = 0.0;
    let g = state.grid();
    for i in 0..g.cells[0] {
        for j in 0..g.cells[1] {
            for k in 0..g.cells[2] {
                let u = state.u.at([i, j, k]).max(0.0);
                let v = state.v.at([i, j, k]).max(0.0);
                let rate = params.mu1 * params.r1 * pow_clamped(u, params.r1 - 1.0)
                    + params.mu2 * params.r2 * pow_clamped(v, params.r2 - 1.0)
                    + params.r * (u + v)
                    + 1.0;
                r_max = r_max.max(rate);
            }
        }
    }

    let mut dt = ctl.dt_max;
    if v_max > 0.0 {
        dt = dt.min(ctl.cfl_advection * g.min_spacing() / v_max);
    }
    dt = dt.min(ctl.cfl_reaction / r_max);
    dt.max(1e-14)
}

#[inline]
fn pow_clamped(x: f64, e: f64) -> f64 {
    let x = x.max(0.0);
    if e == 1.0 {
        x
    } else if e == 2.0 {
        x * x
    } else {
        x.powf(e)
    }
}

/// Backward-Euler Helmholtz solve `(1 + dt·decay − dt·Δ_h) f⁺ = f` by
/// matrix-free conjugate gradients to relative residual ≤ `tol`.
///
/// The operator is symmetric positive definite under mirror ghosts;
/// constants are preserved exactly when `decay = 0` and scaled by
/// `1/(1+dt)` when `decay = 1`. The iteration cap is
/// `10·(total cells)^{1/dims}`.
pub fn implicit_diffuse(
    f: &Field,
    dt: f64,
    decay: f64,
    tol: f64,
) -> Result<(Field, usize), SolveError> {
    debug_assert!(dt > 0.0);
    let grid = f.grid;
    let max_iters = (10.0 * (grid.n_cells() as f64).powf(1.0 / grid.dims as f64)).ceil() as usize;

    let apply = |x: &Field| -> Field {
        let mut x = x.clone();
        x.fill_ghosts();
        let lap = x.laplacian();
        linear_combination(&x, 1.0 + dt * decay, &lap, -dt)
    };

    let b_norm = l2(f);
    if b_norm == 0.0 {
        return Ok((Field::zeros(grid), 0));
    }

    let mut x = f.clone();
    let mut residual = sub(f, &apply(&x));
    let mut rho = dot(&residual, &residual);
    if rho.sqrt() <= tol * b_norm {
        x.fill_ghosts();
        return Ok((x, 0));
    }
    let mut p = residual.clone();
    for iter in 1..=max_iters {
        p.fill_ghosts();
        let ap = apply(&p);
        let alpha = rho / dot(&p, &ap);
        x = linear_combination(&x, 1.0, &p, alpha);
        residual = linear_combination(&residual, 1.0, &ap, -alpha);
        let rho_next = dot(&residual, &residual);
        if rho_next.sqrt() <= tol * b_norm {
            x.fill_ghosts();
            return Ok((x, iter));
        }
        let beta = rho_next / rho;
        rho = rho_next;
        p = linear_combination(&residual, 1.0, &p, beta);
    }
    Err(SolveError::NoConvergence {
        iterations: max_iters,
        residual: rho.sqrt() / b_norm,
        tol,
    })
}

fn l2(f: &Field) -> f64 {
    dot(f, f).sqrt()
}

fn dot(a: &Field, b: &Field) -> f64 {
    let g = a.grid;
    let mut acc = 0.0;
    for i in 0..g.cells[0] {
        for j in 0..g.cells[1] {
            for k in 0..g.cells[2] {
                acc += a.at([i, j, k]) * b.at([i, j, k]);
            }
        }
    }
    acc
}

fn sub(a: &Field, b: &Field) -> Field {
    linear_combination(a, 1.0, b, -1.0)
}

fn linear_combination(a: &Field, ca: f64, b: &Field, cb: f64) -> Field {
    let g = a.grid;
    let mut out = Field::zeros(g);
    for i in 0..g.cells[0] {
        for j in 0..g.cells[1] {
            for k in 0..g.cells[2] {
                let c = [i, j, k];
                out.set(c, ca * a.at(c) + cb * b.at(c));
            }
        }
    }
    out
}

/// Advance the state by one IMEX step of at most `dt_cap`.
///
/// Order of operations: blow-up check on the incoming state, CFL step
/// size, explicit chemotaxis + reactions (and the u+v source of w),
/// positivity check with reject/retry, then the three implicit solves.
/// On `Advanced` the state has ghosts filled and t advanced by the
/// returned dt.
pub fn step(
    state: &mut FieldState,
    params: &ModelParams,
    ctl: &mut StepControl,
    dt_cap: f64,
) -> Result<StepReport, SolveError> {
    state.fill_ghosts();

    if state.u.lp_norm(f64::INFINITY) + state.v.lp_norm(f64::INFINITY) > ctl.blowup_linf {
        return Ok(StepReport {
            status: StepStatus::BlowupDetected,
            dt_used: 0.0,
            linear_iterations: 0,
        });
    }

    let dt_cfl = compute_dt(state, params, ctl);
    if dt_cfl < DT_FLOOR {
        return Ok(StepReport {
            status: StepStatus::DtUnderflow,
            dt_used: 0.0,
            linear_iterations: 0,
        });
    }

    let mut dt = dt_cfl.min(dt_cap);
    let mut scheme = ctl.scheme;
    let mut rejections = 0u32;

    loop {
        let (u_star, v_star, w_star) = explicit_phase(state, params, dt, scheme);
        let min_star = u_star
            .min_value()
            .min(v_star.min_value())
            .min(w_star.min_value());
        if min_star < -NEG_TOL {
            ctl.rejected_steps += 1;
            rejections += 1;
            if rejections >= MAX_REJECTIONS {
                return Ok(StepReport {
                    status: StepStatus::DtUnderflow,
                    dt_used: 0.0,
                    linear_iterations: 0,
                });
            }
            scheme = FluxScheme::Upwind;
            dt *= 0.5;
            if dt < DT_FLOOR {
                return Ok(StepReport {
                    status: StepStatus::DtUnderflow,
                    dt_used: 0.0,
                    linear_iterations: 0,
                });
            }
            continue;
        }

        let (u_new, iters_u) = diffuse_nonnegative(&u_star, dt, 0.0, ctl.linear_tol)?;
        let (v_new, iters_v) = diffuse_nonnegative(&v_star, dt, 0.0, ctl.linear_tol)?;
        let (w_new, iters_w) = diffuse_nonnegative(&w_star, dt, 1.0, ctl.linear_tol)?;
        let min_new = u_new
            .min_value()
            .min(v_new.min_value())
            .min(w_new.min_value());
        if min_new < -NEG_TOL {
            // solver noise near vacuum; treat like an explicit-phase rejection
            ctl.rejected_steps += 1;
            rejections += 1;
            if rejections >= MAX_REJECTIONS {
                return Ok(StepReport {
                    status: StepStatus::DtUnderflow,
                    dt_used: 0.0,
                    linear_iterations: 0,
                });
            }
            scheme = FluxScheme::Upwind;
            dt *= 0.5;
            continue;
        }

        state.u = u_new;
        state.v = v_new;
        state.w = w_new;
        state.t += dt;
        ctl.dt_current = dt;
        return Ok(StepReport {
            status: StepStatus::Advanced,
            dt_used: dt,
            linear_iterations: iters_u + iters_v + iters_w,
        });
    }
}

/// Implicit solve with one tolerance-tightening retry if CG noise
/// produced negatives below the scheme tolerance on nonnegative input.
fn diffuse_nonnegative(
    rhs: &Field,
    dt: f64,
    decay: f64,
    tol: f64,
) -> Result<(Field, usize), SolveError> {
    let (out, iters) = implicit_diffuse(rhs, dt, decay, tol)?;
    if out.min_value() >= -NEG_TOL || rhs.min_value() < -NEG_TOL {
        return Ok((out, iters));
    }
    let (tight, more) = implicit_diffuse(rhs, dt, decay, (tol * 1e-4).max(1e-15))?;
    Ok((tight, iters + more))
}

fn explicit_phase(
    state: &FieldState,
    params: &ModelParams,
    dt: f64,
    scheme: FluxScheme,
) -> (Field, Field, Field) {
    let chem_u = chemotactic_divergence(
        &state.u,
        &state.w,
        params.chi1,
        params.epsilon,
        params.dim_n,
        scheme,
    );
    let chem_v = chemotactic_divergence(
        &state.v,
        &state.w,
        params.chi2,
        params.epsilon,
        params.dim_n,
        scheme,
    );

    let g = state.grid();
    let mut u_star = Field::zeros(g);
    let mut v_star = Field::zeros(g);
    let mut w_star = Field::zeros(g);
    for i in 0..g.cells[0] {
        for j in 0..g.cells[1] {
            for k in 0..g.cells[2] {
                let c = [i, j, k];
                let (u, v, w) = (state.u.at(c), state.v.at(c), state.w.at(c));
                u_star.set(
                    c,
                    u + dt * (chem_u.at(c) + w - params.mu1 * pow_clamped(u, params.r1)),
                );
                v_star.set(
                    c,
                    v + dt
                        * (chem_v.at(c) + w + params.r * u * v
                            - params.mu2 * pow_clamped(v, params.r2)),
                );
                w_star.set(c, w + dt * (u + v));
            }
        }
    }
    (u_star, v_star, w_star)
}

/// Everything a finished run hands back: termination status, final
/// state, sampled diagnostics, and (when capturing) the uniformly
/// spaced trajectory including the initial state. File emission is the
/// CLI's job.
#[derive(Debug)]
pub struct RunOutput {
    pub status: StepStatus,
    pub final_state: FieldState,
    pub series: DiagnosticSeries,
    /// States at 0, Δ, 2Δ, … when a capture interval was set.
    pub trajectory: Vec<FieldState>,
    pub steps: u64,
    pub rejected_steps: u64,
}

/// Run a validated config to `t_end`, blow-up, or dt underflow.
///
/// Diagnostics are sampled at exact multiples of `output_every` (steps
/// are clamped to land on sample boundaries, so two runs with the same
/// intervals share sampling times bitwise). The trajectory capture
/// interval defaults to `snapshot_every` when positive.
pub fn run(cfg: &LabConfig) -> Result<RunOutput, RunError> {
    let capture = (cfg.run.snapshot_every > 0.0).then_some(cfg.run.snapshot_every);
    run_with_capture(cfg, capture)
}

/// `run` with an explicit trajectory-capture interval (used by the
/// ε-study and the weak-residual harness).
pub fn run_with_capture(
    cfg: &LabConfig,
    capture_every: Option<f64>,
) -> Result<RunOutput, RunError> {
    let grid = Grid::from_domain(&cfg.domain);
    let state = initial_state(grid, &cfg.initial, cfg.run.seed)?;
    run_from_state(cfg, state, capture_every)
}

/// `run` from an already-built initial state.
pub fn run_from_state(
    cfg: &LabConfig,
    mut state: FieldState,
    capture_every: Option<f64>,
) -> Result<RunOutput, RunError> {
    let params = &cfg.model;
    let run_spec = &cfg.run;
    let mut ctl = StepControl::from_run(run_spec);
    let mut series = DiagnosticSeries::new(crate::config::config_hash(cfg), run_spec.seed);

    state.fill_ghosts();
    series.push(DiagnosticSample::measure(
        &state,
        params,
        ctl.dt_current.min(run_spec.dt_max),
        0,
    ));

    let mut trajectory = Vec::new();
    if capture_every.is_some() {
        trajectory.push(state.clone());
    }

    let t_end = run_spec.t_end;
    let mut status = StepStatus::Advanced;
    let mut steps = 0u64;
    let mut sample_index = 1u64;
    let mut capture_index = 1u64;

    while state.t < t_end {
        let next_sample = sample_index as f64 * run_spec.output_every;
        let next_capture = capture_every.map_or(f64::INFINITY, |d| capture_index as f64 * d);
        let next_stop = t_end.min(next_sample).min(next_capture);
        let dt_cap = next_stop - state.t;

        let report = step(&mut state, params, &mut ctl, dt_cap)?;
        status = report.status;
        if status != StepStatus::Advanced {
            break;
        }
        steps += 1;
        // snap exactly onto the boundary we aimed for
        if (next_stop - state.t).abs() <= 1e-9 * run_spec.output_every.max(report.dt_used) {
            state.t = next_stop;
        }

        if state.t >= next_sample {
            series.push(DiagnosticSample::measure(
                &state,
                params,
                report.dt_used,
                ctl.rejected_steps,
            ));
            sample_index += 1;
        }
        if let Some(_d) = capture_every {
            if state.t >= next_capture {
                trajectory.push(state.clone());
                capture_index += 1;
            }
        }
    }

    // terminal sample if the loop ended between sample boundaries
    if series.last_t() < state.t {
        series.push(DiagnosticSample::measure(
            &state,
            params,
            ctl.dt_current,
            ctl.rejected_steps,
        ));
    }

    Ok(RunOutput {
        status,
        series,
        trajectory,
        steps,
        rejected_steps: ctl.rejected_steps,
        final_state: state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;
    use std::f64::consts::PI;

    fn quadratic_params() -> ModelParams {
        ModelParams {
            chi1: 1.0,
            chi2: 1.0,
            mu1: 1.0,
            mu2: 1.0,
            r1: 2.0,
            r2: 2.0,
            r: 0.0,
            epsilon: 0.0,
            dim_n: 3,
        }
    }

    fn ctl() -> StepControl {
        StepControl::from_run(&RunSpec::default())
    }

    fn constant_state(grid: Grid, u: f64, v: f64, w: f64) -> FieldState {
        let mut s = FieldState::new(
            Field::constant(grid, u),
            Field::constant(grid, v),
            Field::constant(grid, w),
            0.0,
        );
        s.fill_ghosts();
        s
    }

    #[test]
    fn compute_dt_hits_dt_max_without_stiffness() {
        let grid = Grid::new(1, &[32], &[1.0]);
        let state = constant_state(grid, 0.0, 0.0, 0.0);
        let params = quadratic_params();
        let mut control = ctl();
        control.dt_max = 1e-3;
        // zero fields: R_max = 1, ∇w = 0 → reaction limit 0.4 ≫ dt_max
        assert_eq!(compute_dt(&state, &params, &control), 1e-3);
    }

    #[test]
    fn compute_dt_halves_when_chi_doubles() {
        let grid = Grid::new(1, &[64], &[1.0]);
        let mut state = constant_state(grid, 1.0, 1.0, 0.0);
        state.w = Field::from_fn(grid, |x| x[0]);
        state.fill_ghosts();
        let mut params = quadratic_params();
        params.mu1 = 1e-6;
        params.mu2 = 1e-6;
        let mut control = ctl();
        control.dt_max = 1e9; // let advection bind
        control.cfl_reaction = 1.0;
        let dt1 = compute_dt(&state, &params, &control);
        params.chi1 = 2.0;
        params.chi2 = 2.0;
        let dt2 = compute_dt(&state, &params, &control);
        assert!((dt2 - dt1 / 2.0).abs() < 1e-12 * dt1);
    }

    #[test]
    fn compute_dt_reaction_dominated() {
        let grid = Grid::new(1, &[8], &[1.0]);
        let state = constant_state(grid, 1e6, 0.0, 0.0);
        let params = quadratic_params();
        let mut control = ctl();
        control.dt_max = 1.0;
        let dt = compute_dt(&state, &params, &control);
        assert!(dt <= control.cfl_reaction / (2.0 * 1e6));
    }

    #[test]
    fn implicit_preserves_constants() {
        let grid = Grid::new(2, &[8, 8], &[1.0, 1.0]);
        let mut c = Field::constant(grid, 2.5);
        c.fill_ghosts();
        let (out, iters) = implicit_diffuse(&c, 0.1, 0.0, 1e-10).unwrap();
        assert_eq!(iters, 0);
        assert_eq!(out.at([3, 4, 0]), 2.5);

        let (decayed, _) = implicit_diffuse(&c, 0.25, 1.0, 1e-12).unwrap();
        assert!((decayed.at([3, 4, 0]) - 2.5 / 1.25).abs() < 1e-10);
    }

    #[test]
    fn implicit_damps_cosine_mode_at_discrete_rate() {
        let n = 128;
        let grid = Grid::new(1, &[n], &[1.0]);
        let f = Field::from_fn(grid, |x| (PI * x[0]).cos());
        let dt = 0.01;
        let (out, _) = implicit_diffuse(&f, dt, 0.0, 1e-12).unwrap();
        let h = 1.0 / n as f64;
        let lambda_h = 2.0 * (1.0 - (PI * h).cos()) / (h * h);
        let factor = 1.0 / (1.0 + dt * lambda_h);
        for i in (0..n).step_by(13) {
            let want = factor * f.at([i, 0, 0]);
            assert!(
                (out.at([i, 0, 0]) - want).abs() < 1e-9,
                "cell {i}: {} vs {want}",
                out.at([i, 0, 0])
            );
        }
    }

    #[test]
    fn step_keeps_homogeneous_equilibrium() {
        let grid = Grid::new(1, &[32], &[1.0]);
        let mut state = constant_state(grid, 2.0, 2.0, 4.0);
        let params = quadratic_params();
        let mut control = ctl();
        for _ in 0..20 {
            let rep = step(&mut state, &params, &mut control, f64::INFINITY).unwrap();
            assert_eq!(rep.status, StepStatus::Advanced);
        }
        for i in 0..32 {
            assert!((state.u.at([i, 0, 0]) - 2.0).abs() < 1e-10);
            assert!((state.v.at([i, 0, 0]) - 2.0).abs() < 1e-10);
            assert!((state.w.at([i, 0, 0]) - 4.0).abs() < 1e-10);
        }
    }

    #[test]
    fn step_origin_invariant() {
        let grid = Grid::new(1, &[16], &[1.0]);
        let mut state = constant_state(grid, 0.0, 0.0, 0.0);
        let params = quadratic_params();
        let mut control = ctl();
        for _ in 0..5 {
            step(&mut state, &params, &mut control, f64::INFINITY).unwrap();
        }
        assert_eq!(state.u.max_abs(), 0.0);
        assert_eq!(state.v.max_abs(), 0.0);
        assert_eq!(state.w.max_abs(), 0.0);
    }

    #[test]
    fn step_detects_blowup_before_advancing() {
        let grid = Grid::new(1, &[16], &[1.0]);
        let mut state = constant_state(grid, 2.0, 0.0, 0.0);
        let params = quadratic_params();
        let mut control = ctl();
        control.blowup_linf = 1.0;
        let rep = step(&mut state, &params, &mut control, f64::INFINITY).unwrap();
        assert_eq!(rep.status, StepStatus::BlowupDetected);
        assert_eq!(state.t, 0.0);
    }

    #[test]
    fn homogeneous_step_matches_rk4_to_first_order() {
        let params = quadratic_params();
        let grid = Grid::new(1, &[8], &[1.0]);
        let t_end = 1.0;
        let oracle =
            crate::analytics::homogeneous_ode_trajectory(&params, [1.0, 1.0, 1.0], t_end, 1e-4)
                .unwrap();
        let reference = oracle.last().unwrap().1;

        let error_at = |dt: f64| -> f64 {
            let mut state = constant_state(grid, 1.0, 1.0, 1.0);
            let mut control = ctl();
            control.dt_max = dt;
            while state.t < t_end - 1e-12 {
                let remaining = t_end - state.t;
                let rep = step(&mut state, &params, &mut control, remaining).unwrap();
                assert_eq!(rep.status, StepStatus::Advanced);
            }
            let got = [
                state.u.at([3, 0, 0]),
                state.v.at([3, 0, 0]),
                state.w.at([3, 0, 0]),
            ];
            (0..3).map(|c| (got[c] - reference[c]).abs()).sum()
        };

        let coarse = error_at(1e-2);
        let fine = error_at(5e-3);
        assert!(coarse < 1e-2, "error too large at dt = 1e-2: {coarse}");
        let order = (coarse / fine).log2();
        assert!(
            (0.8..=1.2).contains(&order),
            "observed temporal order {order} (errors {coarse} / {fine})"
        );
    }

    fn base_config(extra: &str) -> LabConfig {
        parse_config(&format!(
            "[model]\nchi1 = 1.0\nchi2 = 1.0\nmu1 = 1.0\nmu2 = 1.0\n\n[domain]\ncells = [32]\n\n{extra}"
        ))
        .unwrap()
    }

    #[test]
    fn run_zero_horizon_records_single_sample() {
        let cfg = base_config("[run]\nt_end = 0.0\n");
        let out = run(&cfg).unwrap();
        assert_eq!(out.series.samples.len(), 1);
        assert_eq!(out.steps, 0);
        assert_eq!(out.status, StepStatus::Advanced);
    }

    #[test]
    fn run_flags_immediate_blowup() {
        let cfg = base_config("[run]\nblowup_linf = 1.5\n[initial]\nbase = [2.0, 2.0, 0.0]\n");
        let out = run(&cfg).unwrap();
        assert_eq!(out.status, StepStatus::BlowupDetected);
        assert_eq!(out.steps, 0);
        assert_eq!(out.series.samples.len(), 1);
    }

    #[test]
    fn run_diffusion_only_decays_linf_monotonically() {
        let cfg = base_config(
            "[run]\nt_end = 0.5\noutput_every = 0.05\n\n[initial]\nkind = \"cosine-bump\"\nbase = [1.0, 1.0, 1.0]\namplitude = [0.5, 0.5, 0.5]\n",
        );
        // χ = r = 0 decouples the equations into logistic diffusion
        let mut cfg = cfg;
        cfg.model.chi1 = 1e-12;
        cfg.model.chi2 = 1e-12;
        cfg.model.mu1 = 2.0;
        cfg.model.mu2 = 2.0;
        let out = run(&cfg).unwrap();
        assert_eq!(out.status, StepStatus::Advanced);
        let linf: Vec<f64> = out.series.samples.iter().map(|s| s.linf_u).collect();
        for pair in linf.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-12, "L∞ grew: {pair:?}");
        }
    }

    #[test]
    fn run_samples_land_on_uniform_times() {
        let cfg = base_config("[run]\nt_end = 0.2\noutput_every = 0.05\ndt_max = 0.003\n");
        let out = run(&cfg).unwrap();
        let times: Vec<f64> = out.series.samples.iter().map(|s| s.t).collect();
        assert_eq!(times.len(), 5);
        for (k, &t) in times.iter().enumerate() {
            assert_eq!(t, k as f64 * 0.05, "sample {k} off-grid: {t}");
        }
    }

    #[test]
    fn trajectory_capture_is_uniform_and_fresh() {
        let cfg = base_config("[run]\nt_end = 0.1\noutput_every = 0.02\n");
        let out = run_with_capture(&cfg, Some(0.02)).unwrap();
        assert_eq!(out.trajectory.len(), 6);
        for (k, s) in out.trajectory.iter().enumerate() {
            assert_eq!(s.t, k as f64 * 0.02);
        }
    }

    #[test]
    fn step_changes_mass_only_through_reactions() {
        // chemotaxis and diffusion are conservative, so the update of
        // Σu·vol must equal the reaction quadrature of the pre-step state
        let grid = Grid::new(2, &[12, 10], &[1.0, 1.5]);
        let mut state = FieldState::new(
            Field::from_fn(grid, |x| 0.5 + 0.3 * (PI * x[0]).cos() * (PI * x[1] / 1.5).cos()),
            Field::from_fn(grid, |x| 0.6 + 0.2 * (2.0 * PI * x[0]).cos()),
            Field::from_fn(grid, |x| 0.4 + 0.25 * (PI * x[1] / 1.5).cos()),
            0.0,
        );
        state.fill_ghosts();
        let mut params = quadratic_params();
        params.chi1 = 3.0;
        params.chi2 = 0.7;
        params.r = 0.8;
        params.r2 = 2.5;

        let vol = grid.cell_volume;
        let mut mass_before = 0.0;
        let mut reaction_u = 0.0;
        let mut reaction_v = 0.0;
        for i in 0..grid.cells[0] {
            for j in 0..grid.cells[1] {
                let c = [i, j, 0];
                let (u, v, w) = (state.u.at(c), state.v.at(c), state.w.at(c));
                mass_before += u;
                reaction_u += w - params.mu1 * u * u;
                reaction_v += w + params.r * u * v - params.mu2 * v.powf(params.r2);
            }
        }
        mass_before *= vol;
        reaction_u *= vol;
        reaction_v *= vol;
        let mass_v_before = state.v.integral();

        let mut control = ctl();
        control.dt_max = 1e-3;
        let rep = step(&mut state, &params, &mut control, f64::INFINITY).unwrap();
        assert_eq!(rep.status, StepStatus::Advanced);

        let du = state.u.integral() - mass_before;
        let dv = state.v.integral() - mass_v_before;
        assert!(
            (du - rep.dt_used * reaction_u).abs() <= 1e-9 * mass_before.abs().max(1.0),
            "u mass change {du} vs reaction {}",
            rep.dt_used * reaction_u
        );
        assert!(
            (dv - rep.dt_used * reaction_v).abs() <= 1e-9 * mass_v_before.abs().max(1.0),
            "v mass change {dv} vs reaction {}",
            rep.dt_used * reaction_v
        );
    }

    #[test]
    fn rejected_steps_reported_on_hostile_state() {
        // a sharp density spike against a steep signal gradient forces
        // the positivity guard to trip at the aggressive dt we request
        let grid = Grid::new(1, &[32], &[1.0]);
        let mut state = FieldState::new(
            Field::from_fn(grid, |x| if x[0] < 0.5 { 1e-9 } else { 1.0 }),
            Field::constant(grid, 0.0),
            Field::from_fn(grid, |x| (2.0 * PI * x[0]).sin().abs()),
            0.0,
        );
        state.fill_ghosts();
        let mut params = quadratic_params();
        params.chi1 = 50.0;
        let mut control = ctl();
        control.dt_max = 0.5;
        control.cfl_advection = 1.0;
        control.cfl_reaction = 1.0;
        let mut rejected = 0;
        for _ in 0..40 {
            let rep = step(&mut state, &params, &mut control, f64::INFINITY).unwrap();
            rejected = control.rejected_steps;
            if rep.status != StepStatus::Advanced {
                break;
            }
            assert!(state.min_value() >= -NEG_TOL);
        }
        assert!(rejected > 0, "expected at least one positivity rejection");
    }
}
