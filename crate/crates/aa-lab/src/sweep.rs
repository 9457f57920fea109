//! Parameter sweeps and ε-regularization studies over independent
//! runs.
//!
//! Points are independent work items consumed by a rayon pool; each
//! finished row is flushed to a partial CSV plus a resume marker, so an
//! interrupted sweep can be resumed by point index without re-running
//! completed work. Given identical seeds the result table is
//! deterministic (and byte-identical apart from the wall_seconds
//! column).
//!
//! A sweep table is observational, not a converse of the boundedness
//! theorem: points with negative margin `min{μ₁,μ₂} − μ*` carry no
//! expectation of blow-up — the threshold is sufficient, not necessary.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Mutex;
use std::time::Instant;

use thiserror::Error;

use crate::analytics::{mu_star, ThresholdInputs};
use crate::config::{validate_config, LabConfig, SweepSection};
use crate::monitors::classify_run;
use crate::stepper::{run, run_with_capture, StepStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepParam {
    Chi1,
    Chi2,
    Mu1,
    Mu2,
    R,
    R1,
    R2,
    Epsilon,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Chi1 => "chi1",
            SweepParam::Chi2 => "chi2",
            SweepParam::Mu1 => "mu1",
            SweepParam::Mu2 => "mu2",
            SweepParam::R => "r",
            SweepParam::R1 => "r1",
            SweepParam::R2 => "r2",
            SweepParam::Epsilon => "epsilon",
        }
    }

    fn apply(self, cfg: &mut LabConfig, value: f64) {
        let m = &mut cfg.model;
        match self {
            SweepParam::Chi1 => m.chi1 = value,
            SweepParam::Chi2 => m.chi2 = value,
            SweepParam::Mu1 => m.mu1 = value,
            SweepParam::Mu2 => m.mu2 = value,
            SweepParam::R => m.r = value,
            SweepParam::R1 => m.r1 = value,
            SweepParam::R2 => m.r2 = value,
            SweepParam::Epsilon => m.epsilon = value,
        }
    }
}

impl FromStr for SweepParam {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "chi1" => SweepParam::Chi1,
            "chi2" => SweepParam::Chi2,
            "mu1" => SweepParam::Mu1,
            "mu2" => SweepParam::Mu2,
            "r" => SweepParam::R,
            "r1" => SweepParam::R1,
            "r2" => SweepParam::R2,
            "epsilon" => SweepParam::Epsilon,
            other => return Err(format!("`{other}` is not a sweepable parameter")),
        })
    }
}

/// In-memory sweep description, resolved from the `[sweep]` section.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub base: LabConfig,
    pub axes: Vec<(SweepParam, Vec<f64>)>,
    pub replicate_seeds: Vec<u64>,
    pub max_points: usize,
}

impl SweepSpec {
    pub fn from_config(base: &LabConfig) -> Result<Self, SweepError> {
        let section: &SweepSection = base
            .sweep
            .as_ref()
            .ok_or_else(|| SweepError::Spec("config has no [sweep] section".into()))?;
        let mut axes = Vec::new();
        for axis in &section.axes {
            let param = SweepParam::from_str(&axis.param).map_err(SweepError::Spec)?;
            axes.push((param, axis.values.clone()));
        }
        Ok(Self {
            base: base.clone(),
            axes,
            replicate_seeds: section.replicate_seeds.clone(),
            max_points: section.max_points,
        })
    }

    fn points(&self) -> Vec<Vec<f64>> {
        let mut points = vec![Vec::new()];
        for (_, values) in &self.axes {
            let mut next = Vec::with_capacity(points.len() * values.len());
            for point in &points {
                for &v in values {
                    let mut p = point.clone();
                    p.push(v);
                    next.push(p);
                }
            }
            points = next;
        }
        points
    }

    /// Config for one grid point + replicate seed.
    pub fn config_for(&self, values: &[f64], seed: u64) -> LabConfig {
        let mut cfg = self.base.clone();
        for ((param, _), &v) in self.axes.iter().zip(values) {
            param.apply(&mut cfg, v);
        }
        cfg.run.seed = seed;
        cfg.sweep = None;
        cfg.epsilon_study = None;
        cfg
    }
}

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("sweep spec: {0}")]
    Spec(String),
    #[error("sweep exceeds its cap: {points} runs > max_points {cap}")]
    TooLarge { points: usize, cap: usize },
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("worker pool: {0}")]
    Pool(String),
}

/// One executed (point, replicate) row.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub point_id: usize,
    pub seed: u64,
    pub values: Vec<f64>,
    pub mu_star: f64,
    /// min{μ₁, μ₂} − μ*
    pub margin: f64,
    pub classification: String,
    pub final_linf_u: f64,
    pub final_linf_v: f64,
    pub final_l1_sum: f64,
    pub steps: u64,
    pub wall_seconds: f64,
}

impl SweepRow {
    fn csv_row(&self) -> String {
        let mut cols = vec![self.point_id.to_string(), self.seed.to_string()];
        cols.extend(self.values.iter().map(|v| v.to_string()));
        cols.extend([
            self.mu_star.to_string(),
            self.margin.to_string(),
            // keep error messages on one CSV cell
            self.classification.replace(',', ";"),
            self.final_linf_u.to_string(),
            self.final_linf_v.to_string(),
            self.final_l1_sum.to_string(),
            self.steps.to_string(),
            self.wall_seconds.to_string(),
        ]);
        cols.join(",")
    }

    fn parse_csv(line: &str, n_axes: usize) -> Option<Self> {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != n_axes + 10 {
            return None;
        }
        let mut values = Vec::with_capacity(n_axes);
        for c in &cols[2..2 + n_axes] {
            values.push(c.parse().ok()?);
        }
        Some(Self {
            point_id: cols[0].parse().ok()?,
            seed: cols[1].parse().ok()?,
            values,
            mu_star: cols[2 + n_axes].parse().ok()?,
            margin: cols[3 + n_axes].parse().ok()?,
            classification: cols[4 + n_axes].to_string(),
            final_linf_u: cols[5 + n_axes].parse().ok()?,
            final_linf_v: cols[6 + n_axes].parse().ok()?,
            final_l1_sum: cols[7 + n_axes].parse().ok()?,
            steps: cols[8 + n_axes].parse().ok()?,
            wall_seconds: cols[9 + n_axes].parse().ok()?,
        })
    }
}

/// Completed sweep: rows sorted by (point_id, seed).
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub axis_names: Vec<&'static str>,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn csv_header(&self) -> String {
        let mut cols = vec!["point_id".to_string(), "replicate".to_string()];
        cols.extend(self.axis_names.iter().map(|n| n.to_string()));
        cols.extend(
            [
                "mu_star",
                "margin",
                "classification",
                "final_linf_u",
                "final_linf_v",
                "final_l1_sum",
                "steps",
                "wall_seconds",
            ]
            .map(String::from),
        );
        cols.join(",")
    }

    pub fn csv_rows(&self) -> impl Iterator<Item = String> + '_ {
        self.rows.iter().map(|r| r.csv_row())
    }
}

fn partial_paths(dir: &Path) -> (PathBuf, PathBuf) {
    (dir.join("sweep.partial.csv"), dir.join("sweep.resume"))
}

/// Execute every (point, replicate) of the sweep, in parallel, flushing
/// finished rows to `<partial_dir>/sweep.partial.csv` and the resume
/// marker as they complete. Rows already present in the marker are
/// reused instead of re-run. Per-point failures are recorded in-row
/// (classification `error: …`) and never abort the sweep.
pub fn run_sweep(
    spec: &SweepSpec,
    threads: Option<usize>,
    partial_dir: Option<&Path>,
) -> Result<SweepResult, SweepError> {
    let points = spec.points();
    let total_runs = points.len() * spec.replicate_seeds.len();
    if total_runs > spec.max_points {
        return Err(SweepError::TooLarge {
            points: total_runs,
            cap: spec.max_points,
        });
    }

    // resume: load rows finished by an earlier invocation
    let mut done: BTreeMap<(usize, u64), SweepRow> = BTreeMap::new();
    if let Some(dir) = partial_dir {
        let (partial, marker) = partial_paths(dir);
        if let (Ok(marks), Ok(rows)) = (fs::read_to_string(&marker), fs::read_to_string(&partial))
        {
            let marked: std::collections::BTreeSet<(usize, u64)> = marks
                .lines()
                .filter_map(|l| {
                    let (p, s) = l.split_once(',')?;
                    Some((p.parse().ok()?, s.parse().ok()?))
                })
                .collect();
            for line in rows.lines().filter(|l| !l.starts_with('#')) {
                if let Some(row) = SweepRow::parse_csv(line, spec.axes.len()) {
                    if marked.contains(&(row.point_id, row.seed)) {
                        done.insert((row.point_id, row.seed), row);
                    }
                }
            }
        }
    }

    let flush = match partial_dir {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|source| SweepError::Io {
                path: dir.display().to_string(),
                source,
            })?;
            let (partial, marker) = partial_paths(dir);
            let open = |p: &Path| {
                fs::OpenOptions::new()
                    .create(true)
                    .append(true)
                    .open(p)
                    .map_err(|source| SweepError::Io {
                        path: p.display().to_string(),
                        source,
                    })
            };
            Some(Mutex::new((open(&partial)?, open(&marker)?)))
        }
        None => None,
    };

    let work: Vec<(usize, u64, &Vec<f64>)> = points
        .iter()
        .enumerate()
        .flat_map(|(pid, values)| {
            spec.replicate_seeds
                .iter()
                .map(move |&seed| (pid, seed, values))
        })
        .filter(|(pid, seed, _)| !done.contains_key(&(*pid, *seed)))
        .collect();

    let execute = |(pid, seed, values): &(usize, u64, &Vec<f64>)| -> SweepRow {
        let row = run_point(spec, *pid, *seed, values);
        if let Some(sink) = &flush {
            let mut guard = sink.lock().expect("sweep flush mutex poisoned");
            let _ = writeln!(guard.0, "{}", row.csv_row());
            let _ = writeln!(guard.1, "{},{}", row.point_id, row.seed);
            let _ = guard.0.flush();
            let _ = guard.1.flush();
        }
        row
    };

    let mut rows: Vec<SweepRow> = match crate::config::thread_cap(threads) {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| SweepError::Pool(e.to_string()))?;
            pool.install(|| {
                use rayon::prelude::*;
                work.par_iter().map(execute).collect()
            })
        }
        None => {
            use rayon::prelude::*;
            work.par_iter().map(execute).collect()
        }
    };

    rows.extend(done.into_values());
    rows.sort_by(|a, b| (a.point_id, a.seed).cmp(&(b.point_id, b.seed)));
    Ok(SweepResult {
        axis_names: spec.axes.iter().map(|(p, _)| p.name()).collect(),
        rows,
    })
}

fn run_point(spec: &SweepSpec, point_id: usize, seed: u64, values: &[f64]) -> SweepRow {
    let started = Instant::now();
    let cfg = spec.config_for(values, seed);

    let (mu_star_value, margin) = match mu_star(&ThresholdInputs::from_model(
        &cfg.model,
        cfg.analysis.c_sobolev,
    )) {
        Ok(ms) => (ms.total, cfg.model.mu1.min(cfg.model.mu2) - ms.total),
        Err(_) => (f64::NAN, f64::NAN),
    };

    let mut row = SweepRow {
        point_id,
        seed,
        values: values.to_vec(),
        mu_star: mu_star_value,
        margin,
        classification: String::new(),
        final_linf_u: f64::NAN,
        final_linf_v: f64::NAN,
        final_l1_sum: f64::NAN,
        steps: 0,
        wall_seconds: 0.0,
    };

    let report = validate_config(&cfg);
    if !report.is_ok() {
        row.classification = format!("error: {}", report.violations.join("; "));
        row.wall_seconds = started.elapsed().as_secs_f64();
        return row;
    }

    match run(&cfg) {
        Ok(out) => {
            let class = classify_run(&out.series, out.status == StepStatus::BlowupDetected);
            row.classification = class.to_string();
            if let Some(last) = out.series.samples.last() {
                row.final_linf_u = last.linf_u;
                row.final_linf_v = last.linf_v;
                row.final_l1_sum = last.l1_u + last.l1_v;
            }
            row.steps = out.steps;
        }
        Err(e) => {
            row.classification = format!("error: {e}");
        }
    }
    row.wall_seconds = started.elapsed().as_secs_f64();
    row
}

/// Partition of sweep rows by the sign of the threshold margin.
#[derive(Debug, Clone, Default)]
pub struct MarginTable {
    /// (partition label, classification → count)
    pub partitions: Vec<(String, BTreeMap<String, usize>)>,
}

impl MarginTable {
    pub fn counts(&self, label: &str) -> Option<&BTreeMap<String, usize>> {
        self.partitions
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, c)| c)
    }
}

impl std::fmt::Display for MarginTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.partitions.is_empty() {
            return writeln!(f, "(empty sweep result)");
        }
        writeln!(
            f,
            "margin = min(mu1, mu2) - mu_star; the threshold is sufficient only:"
        )?;
        writeln!(f, "negative margin carries no blow-up expectation")?;
        for (label, counts) in &self.partitions {
            let total: usize = counts.values().sum();
            write!(f, "  margin {label} ({total} runs):")?;
            for (class, n) in counts {
                write!(f, " {class}={n}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Group rows by sign(margin) with classification counts per group.
pub fn threshold_margin_table(result: &SweepResult) -> MarginTable {
    let mut table = MarginTable::default();
    let mut order = Vec::new();
    let mut map: BTreeMap<&'static str, BTreeMap<String, usize>> = BTreeMap::new();
    for row in &result.rows {
        let label = if row.margin.is_nan() {
            "undefined"
        } else if row.margin > 0.0 {
            "> 0"
        } else if row.margin < 0.0 {
            "< 0"
        } else {
            "= 0"
        };
        if !order.contains(&label) {
            order.push(label);
        }
        *map.entry(label)
            .or_default()
            .entry(row.classification.clone())
            .or_insert(0) += 1;
    }
    for label in ["> 0", "= 0", "< 0", "undefined"] {
        if let Some(counts) = map.remove(label) {
            table.partitions.push((label.to_string(), counts));
        }
    }
    table
}

/// One rung-to-rung distance row of an ε study.
#[derive(Debug, Clone)]
pub struct EpsilonDistance {
    pub eps_coarse: f64,
    pub eps_fine: f64,
    /// ‖·‖_{L²(Ω×(0,T))} of the field differences, indexed u, v, w.
    pub distance: [f64; 3],
    /// False when either rung terminated abnormally.
    pub conclusive: bool,
}

#[derive(Debug, Clone)]
pub struct EpsilonStudyResult {
    pub rows: Vec<EpsilonDistance>,
    /// Strict decrease of d_j per field across conclusive rows.
    pub monotone: [bool; 3],
}

/// Run the ε ladder (identical grid, seed, and sampling times across
/// rungs) and report the Cauchy distances d_j between consecutive
/// rungs. A rung that blows up or underflows marks its rows
/// inconclusive.
pub fn epsilon_study(base: &LabConfig, threads: Option<usize>) -> Result<EpsilonStudyResult, SweepError> {
    let section = base
        .epsilon_study
        .as_ref()
        .ok_or_else(|| SweepError::Spec("config has no [epsilon_study] section".into()))?;
    let ladder = section.epsilons.clone();

    let run_rung = |&eps: &f64| {
        let mut cfg = base.clone();
        cfg.model.epsilon = eps;
        cfg.sweep = None;
        cfg.epsilon_study = None;
        run_with_capture(&cfg, Some(cfg.run.output_every))
    };

    let outputs: Vec<_> = match crate::config::thread_cap(threads) {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| SweepError::Pool(e.to_string()))?;
            pool.install(|| {
                use rayon::prelude::*;
                ladder.par_iter().map(run_rung).collect()
            })
        }
        None => {
            use rayon::prelude::*;
            ladder.par_iter().map(run_rung).collect()
        }
    };

    let mut rows = Vec::new();
    for j in 0..ladder.len() - 1 {
        let row = match (&outputs[j], &outputs[j + 1]) {
            (Ok(a), Ok(b))
                if a.status == StepStatus::Advanced && b.status == StepStatus::Advanced =>
            {
                EpsilonDistance {
                    eps_coarse: ladder[j],
                    eps_fine: ladder[j + 1],
                    distance: trajectory_distance(a, b),
                    conclusive: true,
                }
            }
            _ => EpsilonDistance {
                eps_coarse: ladder[j],
                eps_fine: ladder[j + 1],
                distance: [f64::NAN; 3],
                conclusive: false,
            },
        };
        rows.push(row);
    }

    let mut monotone = [true; 3];
    for f in 0..3 {
        for pair in rows.windows(2) {
            if !(pair[0].conclusive && pair[1].conclusive)
                || !(pair[1].distance[f] < pair[0].distance[f])
            {
                monotone[f] = false;
            }
        }
    }
    Ok(EpsilonStudyResult { rows, monotone })
}

/// Space-time L² distance between two stored trajectories that share
/// their sampling times exactly (enforced, not interpolated).
fn trajectory_distance(a: &crate::stepper::RunOutput, b: &crate::stepper::RunOutput) -> [f64; 3] {
    let ta = &a.trajectory;
    let tb = &b.trajectory;
    assert_eq!(ta.len(), tb.len(), "trajectories must share sample times");
    let mut sq = [0.0f64; 3];
    for s in 0..ta.len() - 1 {
        assert_eq!(ta[s].t, tb[s].t, "sampling times must match bitwise");
        let dt = ta[s + 1].t - ta[s].t;
        let here = state_sq_distance(&ta[s], &tb[s]);
        let next = state_sq_distance(&ta[s + 1], &tb[s + 1]);
        for f in 0..3 {
            sq[f] += 0.5 * (here[f] + next[f]) * dt;
        }
    }
    sq.map(f64::sqrt)
}

fn state_sq_distance(
    a: &crate::fields::FieldState,
    b: &crate::fields::FieldState,
) -> [f64; 3] {
    let g = a.grid();
    let mut acc = [0.0f64; 3];
    for i in 0..g.cells[0] {
        for j in 0..g.cells[1] {
            for k in 0..g.cells[2] {
                let c = [i, j, k];
                let du = a.u.at(c) - b.u.at(c);
                let dv = a.v.at(c) - b.v.at(c);
                let dw = a.w.at(c) - b.w.at(c);
                acc[0] += du * du;
                acc[1] += dv * dv;
                acc[2] += dw * dw;
            }
        }
    }
    acc.map(|x| x * g.cell_volume)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn sweep_config(extra: &str) -> LabConfig {
        parse_config(&format!(
            "[model]\nchi1 = 1.0\nchi2 = 1.0\nmu1 = 1.0\nmu2 = 1.0\n\n[domain]\ncells = [16]\n\n[run]\nt_end = 0.1\noutput_every = 0.02\ndt_max = 0.005\n\n{extra}"
        ))
        .unwrap()
    }

    #[test]
    fn single_point_equilibrium_is_bounded() {
        let cfg = sweep_config(
            "[initial]\nbase = [2.0, 2.0, 4.0]\n\n[sweep]\naxes = [{ param = \"mu1\", values = [1.0] }]\n",
        );
        let spec = SweepSpec::from_config(&cfg).unwrap();
        let result = run_sweep(&spec, Some(1), None).unwrap();
        assert_eq!(result.rows.len(), 1);
        assert_eq!(result.rows[0].classification, "Bounded");
        assert!(result.rows[0].margin.is_finite());
    }

    #[test]
    fn margin_column_tracks_mu_axis() {
        let mut cfg = sweep_config(
            "[sweep]\naxes = [{ param = \"mu1\", values = [0.1, 1.0, 10.0] }]\n",
        );
        cfg.model.mu2 = 50.0; // keep min(mu1, mu2) on the swept axis
        let spec = SweepSpec::from_config(&cfg).unwrap();
        let result = run_sweep(&spec, Some(2), None).unwrap();
        assert_eq!(result.rows.len(), 3);
        let margins: Vec<f64> = result.rows.iter().map(|r| r.margin).collect();
        assert!(margins[0] < margins[1] && margins[1] < margins[2]);
        // μ* is fixed per point here (χ's and r swept nowhere)
        for row in &result.rows {
            let want = mu_star(&ThresholdInputs::from_model(
                &spec.config_for(&row.values, row.seed).model,
                 1.0,
            ))
            .unwrap()
            .total;
            assert_eq!(row.mu_star, want);
        }
    }

    #[test]
    fn sweep_is_deterministic_given_seeds() {
        let cfg = sweep_config(
            "[initial]\nkind = \"random-perturbation\"\nbase = [1.0, 1.0, 1.0]\namplitude = [0.3, 0.3, 0.3]\n\n[sweep]\naxes = [{ param = \"chi1\", values = [0.5, 1.5] }]\nreplicate_seeds = [7, 8]\n",
        );
        let spec = SweepSpec::from_config(&cfg).unwrap();
        let a = run_sweep(&spec, Some(2), None).unwrap();
        let b = run_sweep(&spec, Some(1), None).unwrap();
        assert_eq!(a.rows.len(), 4);
        for (ra, rb) in a.rows.iter().zip(&b.rows) {
            let mut ra = ra.clone();
            let mut rb = rb.clone();
            ra.wall_seconds = 0.0;
            rb.wall_seconds = 0.0;
            assert_eq!(ra, rb);
        }
    }

    #[test]
    fn per_point_failures_stay_in_row() {
        let cfg = sweep_config(
            "[sweep]\naxes = [{ param = \"mu1\", values = [1.0, -1.0] }]\n",
        );
        let spec = SweepSpec::from_config(&cfg).unwrap();
        let result = run_sweep(&spec, Some(1), None).unwrap();
        assert_eq!(result.rows.len(), 2);
        assert_eq!(result.rows[0].classification, "Bounded");
        assert!(result.rows[1].classification.starts_with("error:"));
        assert!(result.rows[1].classification.contains("mu1 must be > 0"));
    }

    #[test]
    fn sweep_resumes_from_marker() {
        let cfg = sweep_config(
            "[sweep]\naxes = [{ param = \"mu1\", values = [1.0, 2.0, 3.0] }]\n",
        );
        let spec = SweepSpec::from_config(&cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let first = run_sweep(&spec, Some(1), Some(dir.path())).unwrap();
        // resumed sweep reuses every completed row verbatim, including timing
        let second = run_sweep(&spec, Some(1), Some(dir.path())).unwrap();
        assert_eq!(first.rows.len(), second.rows.len());
        for (a, b) in first.rows.iter().zip(&second.rows) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn sweep_cap_enforced() {
        // config-level validation rejects an oversized sweep outright
        let text = "[model]\nchi1 = 1.0\nchi2 = 1.0\nmu1 = 1.0\nmu2 = 1.0\n\n[sweep]\naxes = [{ param = \"mu1\", values = [1.0, 2.0] }]\nmax_points = 10\nreplicate_seeds = [1, 2, 3, 4, 5, 6]\n";
        let err = parse_config(text).unwrap_err();
        assert!(err.to_string().contains("max_points"));

        // and run_sweep enforces the cap on hand-built specs too
        let cfg = sweep_config(
            "[sweep]\naxes = [{ param = \"mu1\", values = [1.0, 2.0] }]\nreplicate_seeds = [1, 2, 3, 4, 5, 6]\n",
        );
        let mut spec = SweepSpec::from_config(&cfg).unwrap();
        spec.max_points = 10;
        assert!(matches!(
            run_sweep(&spec, Some(1), None),
            Err(SweepError::TooLarge { points: 12, cap: 10 })
        ));
    }

    #[test]
    fn margin_table_partitions_and_counts() {
        let mk = |margin: f64, class: &str| SweepRow {
            point_id: 0,
            seed: 0,
            values: vec![],
            mu_star: 1.0,
            margin,
            classification: class.to_string(),
            final_linf_u: 1.0,
            final_linf_v: 1.0,
            final_l1_sum: 1.0,
            steps: 1,
            wall_seconds: 0.0,
        };
        let result = SweepResult {
            axis_names: vec![],
            rows: vec![
                mk(0.5, "Bounded"),
                mk(1.5, "Bounded"),
                mk(-0.5, "Bounded"),
                mk(-1.5, "GrowthSuspected"),
            ],
        };
        let table = threshold_margin_table(&result);
        assert_eq!(table.partitions.len(), 2);
        assert_eq!(table.counts("> 0").unwrap()["Bounded"], 2);
        assert_eq!(table.counts("< 0").unwrap()["Bounded"], 1);
        assert_eq!(table.counts("< 0").unwrap()["GrowthSuspected"], 1);

        let empty = threshold_margin_table(&SweepResult {
            axis_names: vec![],
            rows: vec![],
        });
        assert!(empty.partitions.is_empty());
    }

    #[test]
    fn epsilon_study_zero_for_equilibrium_data() {
        // constant equilibrium has ∇w ≡ 0, so ε never enters
        let cfg = sweep_config(
            "[initial]\nbase = [2.0, 2.0, 4.0]\n\n[epsilon_study]\nepsilons = [0.1, 0.05, 0.025]\n",
        );
        let study = epsilon_study(&cfg, Some(2)).unwrap();
        assert_eq!(study.rows.len(), 2);
        for row in &study.rows {
            assert!(row.conclusive);
            for d in row.distance {
                assert!(d.abs() < 1e-12, "distance {d}");
            }
        }
    }

    #[test]
    fn epsilon_study_inert_without_chemotaxis() {
        // ε enters only through the chemotactic flux; χ ≈ 0 freezes it
        let mut cfg = sweep_config(
            "[initial]\nkind = \"cosine-bump\"\nbase = [1.0, 1.0, 1.0]\namplitude = [0.5, 0.5, 0.5]\n\n[epsilon_study]\nepsilons = [0.1, 0.05, 0.025]\n",
        );
        cfg.model.chi1 = 1e-300;
        cfg.model.chi2 = 1e-300;
        let study = epsilon_study(&cfg, Some(2)).unwrap();
        for row in &study.rows {
            for d in row.distance {
                assert!(d.abs() < 1e-12, "distance {d}");
            }
        }
    }
}
