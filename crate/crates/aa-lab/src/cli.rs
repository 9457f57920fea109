//! The `aalab` command-line front end and all file emission.
//!
//! Exit codes are a total function of the outcome category:
//!
//! | code | meaning                                  |
//! |------|------------------------------------------|
//! | 0    | success (verify: consistent)             |
//! | 1    | configuration or validation error        |
//! | 2    | verify: inequality violated              |
//! | 3    | verify: inconclusive                     |
//! | 4    | I/O failure                              |
//!
//! Every emitted text file starts with a reproducibility stanza
//! (`# aa-lab <version>`, config hash, seed) so identical config+seed
//! reproduce outputs byte-for-byte apart from wall-clock columns.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::analytics::{
    gn_exponent, h_min, homogeneous_equilibria, mu_star, young_constant, GnQuery, HMinQuery,
    ThresholdInputs,
};
use crate::config::{self, config_hash, LabConfig};
use crate::monitors::{
    check_mass_inequality, classify_run, DiagnosticSample, DiagnosticSeries, Verdict,
};
use crate::stepper::{run, StepStatus};
use crate::sweep::{epsilon_study, run_sweep, threshold_margin_table, SweepSpec};

#[derive(Parser)]
#[command(name = "aalab", version, about = "Chemotaxis boundedness laboratory")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Configuration file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory, created if absent.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Override a config key, e.g. --set model.mu1=3.0 (repeatable).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Worker-thread cap (overrides AA_LAB_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the analytical constants for a config and write analyze.csv.
    Analyze,
    /// Run one simulation: diagnostics CSV, snapshots, plot data,
    /// classification line.
    Simulate,
    /// Run the [sweep] section across a worker pool; writes sweep.csv.
    Sweep,
    /// Run the [epsilon_study] ladder; writes epsilon_study.csv.
    EpsilonStudy,
    /// Re-check the mass-functional inequality on an existing
    /// diagnostics.csv; exit code carries the verdict.
    Verify,
}

pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version as "errors" with exit 0 semantics
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };

    let config_path = match &cli.config {
        Some(p) => p.clone(),
        None => {
            eprintln!("error: --config PATH is required");
            return 1;
        }
    };

    let text = match fs::read_to_string(&config_path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read config {}: {e}", config_path.display());
            return 1;
        }
    };
    let cfg = match config::apply_overrides(&text, &cli.set) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };

    if let Err(e) = fs::create_dir_all(&cli.out) {
        eprintln!("error: cannot create output directory {}: {e}", cli.out.display());
        return 4;
    }

    match cli.command {
        Command::Analyze => cmd_analyze(&cfg, &cli.out),
        Command::Simulate => cmd_simulate(&cfg, &cli.out),
        Command::Sweep => cmd_sweep(&cfg, &cli.out, cli.threads),
        Command::EpsilonStudy => cmd_epsilon_study(&cfg, &cli.out, cli.threads),
        Command::Verify => cmd_verify(&cfg, &cli.out),
    }
}

fn stanza(cfg: &LabConfig) -> String {
    format!(
        "# aa-lab {}\n# config_hash: {}\n# seed: {}\n",
        env!("CARGO_PKG_VERSION"),
        config_hash(cfg),
        cfg.run.seed
    )
}

fn write_file(path: &Path, contents: &str) -> Result<(), i32> {
    fs::write(path, contents).map_err(|e| {
        eprintln!("error: cannot write {}: {e}", path.display());
        4
    })
}

fn cmd_analyze(cfg: &LabConfig, out: &Path) -> i32 {
    let inputs = ThresholdInputs::from_model(&cfg.model, cfg.analysis.c_sobolev);
    let threshold = mu_star(&inputs);
    let l = young_constant(cfg.model.mu2, cfg.model.r2, cfg.model.r);
    let equilibria = homogeneous_equilibria(&cfg.model);
    let n = cfg.model.dim_n as f64;
    let h = h_min(&HMinQuery {
        delta: (n / 2.0).max(1.0),
        chi: cfg.model.chi1.max(cfg.model.chi2),
        c_const: cfg.analysis.c_sobolev,
    });
    let gn_21 = gn_exponent(&GnQuery {
        p: 2.0,
        q: 1.0,
        dim_n: cfg.model.dim_n.max(3),
    });
    let gn_32 = gn_exponent(&GnQuery {
        p: 3.0,
        q: 2.0,
        dim_n: cfg.model.dim_n.max(3),
    });

    println!("analytical constants (c_sobolev = {}):", cfg.analysis.c_sobolev);
    let (ms_total, ms_chemo, ms_prolif, margin) = match &threshold {
        Ok(ms) => {
            let margin = cfg.model.mu1.min(cfg.model.mu2) - ms.total;
            println!(
                "  mu_star          = {}  (chemotaxis {} + proliferation {})",
                ms.total, ms.chemotaxis_term, ms.proliferation_term
            );
            println!("  min(mu1, mu2)    = {}", cfg.model.mu1.min(cfg.model.mu2));
            println!("  margin           = {margin}");
            (ms.total, ms.chemotaxis_term, ms.proliferation_term, margin)
        }
        Err(e) => {
            println!("  mu_star          = n/a ({e})");
            (f64::NAN, f64::NAN, f64::NAN, f64::NAN)
        }
    };
    println!("  young_L          = {l}");
    println!(
        "  h_min(delta=N/2) = {} at y = {}{}",
        h.value,
        h.y_min,
        if h.attained { "" } else { " (infimum, not attained)" }
    );
    for (label, gn) in [("p=2,q=1", &gn_21), ("p=3,q=2", &gn_32)] {
        match gn {
            Ok(g) => println!(
                "  gn_alpha({label}) = {}{}",
                g.alpha,
                if g.in_range { "" } else { " (outside (0,1))" }
            ),
            Err(e) => println!("  gn_alpha({label}) = n/a ({e})"),
        }
    }
    println!("  homogeneous equilibria (u*, v*, w*, residual):");
    for eq in &equilibria {
        println!(
            "    ({}, {}, {})  residual {:.2e}",
            eq.u_star, eq.v_star, eq.w_star, eq.residual
        );
    }

    let mut csv = stanza(cfg);
    csv.push_str(
        "mu_star,mu_star_chemotaxis,mu_star_proliferation,margin,young_L,h_min_value,h_min_y,gn_alpha_p2_q1,n_equilibria,eq_u,eq_v,eq_w\n",
    );
    let nontrivial = equilibria.iter().find(|e| e.u_star > 0.0);
    csv.push_str(&format!(
        "{},{},{},{},{},{},{},{},{},{},{},{}\n",
        ms_total,
        ms_chemo,
        ms_prolif,
        margin,
        l,
        h.value,
        h.y_min,
        gn_21.map(|g| g.alpha).unwrap_or(f64::NAN),
        equilibria.len(),
        nontrivial.map_or(f64::NAN, |e| e.u_star),
        nontrivial.map_or(f64::NAN, |e| e.v_star),
        nontrivial.map_or(f64::NAN, |e| e.w_star),
    ));
    match write_file(&out.join("analyze.csv"), &csv) {
        Ok(()) => 0,
        Err(code) => code,
    }
}

fn diagnostics_csv(cfg: &LabConfig, series: &DiagnosticSeries, classification: &str) -> String {
    let mut text = stanza(cfg);
    text.push_str(&format!("# classification: {classification}\n"));
    text.push_str(&DiagnosticSample::COLUMNS.join(","));
    text.push('\n');
    for s in &series.samples {
        text.push_str(&s.csv_row());
        text.push('\n');
    }
    text
}

fn cmd_simulate(cfg: &LabConfig, out: &Path) -> i32 {
    let output = match run(cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let classification = classify_run(&output.series, output.status == StepStatus::BlowupDetected);

    if let Err(code) = write_file(
        &out.join("diagnostics.csv"),
        &diagnostics_csv(cfg, &output.series, &classification.to_string()),
    ) {
        return code;
    }

    for (index, state) in output.trajectory.iter().enumerate() {
        let path = out.join(format!("snapshot_{index:06}.bin"));
        let write = fs::File::create(&path)
            .map_err(crate::fields::SnapshotError::Io)
            .and_then(|f| crate::fields::write_snapshot(std::io::BufWriter::new(f), state));
        if let Err(e) = write {
            eprintln!("error: cannot write {}: {e}", path.display());
            return 4;
        }
    }

    if let Err(code) = emit_plot_data(
        cfg,
        &output.series,
        &DiagnosticSample::COLUMNS[1..],
        &out.join("plots"),
    ) {
        return code;
    }

    println!("classification: {classification}");
    0
}

/// Write one gnuplot-ready two-column file per requested diagnostic
/// column, plus a driver script template. Unknown columns are skipped
/// with a warning; an empty effective subset emits nothing.
pub fn emit_plot_data(
    cfg: &LabConfig,
    series: &DiagnosticSeries,
    columns: &[&str],
    dir: &Path,
) -> Result<(), i32> {
    let known = &DiagnosticSample::COLUMNS[1..];
    let selected: Vec<&str> = columns
        .iter()
        .copied()
        .filter(|c| {
            let ok = known.contains(c);
            if !ok {
                eprintln!("warning: unknown plot column `{c}` skipped");
            }
            ok
        })
        .collect();
    if selected.is_empty() {
        eprintln!("warning: no plot columns selected, nothing emitted");
        return Ok(());
    }
    fs::create_dir_all(dir).map_err(|e| {
        eprintln!("error: cannot create {}: {e}", dir.display());
        4
    })?;

    for col in &selected {
        let mut text = stanza(cfg);
        text.push_str(&format!("# t {col}\n"));
        for s in &series.samples {
            let value = column_value(s, col);
            text.push_str(&format!("{} {}\n", s.t, value));
        }
        write_file(&dir.join(format!("{col}.dat")), &text)?;
    }

    let mut script = String::from("# gnuplot driver template\nset key outside\nset xlabel \"t\"\nplot \\\n");
    for (i, col) in selected.iter().enumerate() {
        let sep = if i + 1 < selected.len() { ", \\\n" } else { "\n" };
        script.push_str(&format!("  \"{col}.dat\" using 1:2 with lines title \"{col}\"{sep}"));
    }
    write_file(&dir.join("plot.gp"), &script)?;
    Ok(())
}

fn column_value(s: &DiagnosticSample, col: &str) -> f64 {
    match col {
        "l1_u" => s.l1_u,
        "l1_v" => s.l1_v,
        "l1_w" => s.l1_w,
        "l2_u" => s.l2_u,
        "l2_v" => s.l2_v,
        "l2_w" => s.l2_w,
        "linf_u" => s.linf_u,
        "linf_v" => s.linf_v,
        "linf_w" => s.linf_w,
        "grad_w_sq" => s.grad_w_sq,
        "lap_w_sq" => s.lap_w_sq,
        "entropy_u" => s.entropy_u,
        "entropy_v" => s.entropy_v,
        "fisher_u" => s.fisher_u,
        "fisher_v" => s.fisher_v,
        "energy_y" => s.energy_y,
        "dt" => s.dt,
        "rejected_steps" => s.rejected_steps as f64,
        _ => f64::NAN,
    }
}

fn cmd_sweep(cfg: &LabConfig, out: &Path, threads: Option<usize>) -> i32 {
    let spec = match SweepSpec::from_config(cfg) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let result = match run_sweep(&spec, threads, Some(out)) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return match e {
                crate::sweep::SweepError::Io { .. } => 4,
                _ => 1,
            };
        }
    };

    let mut csv = stanza(cfg);
    csv.push_str(&result.csv_header());
    csv.push('\n');
    for row in result.csv_rows() {
        csv.push_str(&row);
        csv.push('\n');
    }
    if let Err(code) = write_file(&out.join("sweep.csv"), &csv) {
        return code;
    }
    print!("{}", threshold_margin_table(&result));
    0
}

fn cmd_epsilon_study(cfg: &LabConfig, out: &Path, threads: Option<usize>) -> i32 {
    let study = match epsilon_study(cfg, threads) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let mut csv = stanza(cfg);
    csv.push_str(&format!(
        "# monotone_decreasing: u={} v={} w={}\n",
        study.monotone[0], study.monotone[1], study.monotone[2]
    ));
    csv.push_str("eps_coarse,eps_fine,d_u,d_v,d_w,conclusive\n");
    for row in &study.rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            row.eps_coarse,
            row.eps_fine,
            row.distance[0],
            row.distance[1],
            row.distance[2],
            row.conclusive
        ));
        println!(
            "eps {} -> {}: d_u = {}, d_v = {}, d_w = {}{}",
            row.eps_coarse,
            row.eps_fine,
            row.distance[0],
            row.distance[1],
            row.distance[2],
            if row.conclusive { "" } else { " (inconclusive)" }
        );
    }
    println!(
        "monotone decreasing: u={} v={} w={}",
        study.monotone[0], study.monotone[1], study.monotone[2]
    );
    match write_file(&out.join("epsilon_study.csv"), &csv) {
        Ok(()) => 0,
        Err(code) => code,
    }
}

fn cmd_verify(cfg: &LabConfig, out: &Path) -> i32 {
    let path = out.join("diagnostics.csv");
    let text = match fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            return 4;
        }
    };
    let series = match parse_diagnostics_csv(&text) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {}: {e}", path.display());
            return 4;
        }
    };
    let report = check_mass_inequality(&series, &cfg.model);
    println!(
        "mass inequality: {} (sup y = {}, fitted C = {}, envelope = {})",
        report.verdict, report.sup_y, report.fitted_c, report.absorbing_bound
    );
    println!("  {}", report.detail);
    match report.verdict {
        Verdict::Consistent => 0,
        Verdict::Violated => 2,
        Verdict::Inconclusive => 3,
    }
}

/// Parse a diagnostics CSV written by `simulate` (or hand-crafted with
/// the same columns) back into a series.
pub fn parse_diagnostics_csv(text: &str) -> Result<DiagnosticSeries, String> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.is_empty());
    let header = lines.next().ok_or("missing header row")?;
    let names: Vec<&str> = header.split(',').collect();
    if names != DiagnosticSample::COLUMNS {
        return Err(format!(
            "unexpected columns: got `{header}`, want `{}`",
            DiagnosticSample::COLUMNS.join(",")
        ));
    }
    let mut series = DiagnosticSeries::new(String::new(), 0);
    for (i, line) in lines.enumerate() {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != DiagnosticSample::COLUMNS.len() {
            return Err(format!("row {} has {} columns", i + 1, cols.len()));
        }
        let num = |j: usize| -> Result<f64, String> {
            cols[j]
                .parse()
                .map_err(|_| format!("row {}: bad number `{}`", i + 1, cols[j]))
        };
        series.push(DiagnosticSample {
            t: num(0)?,
            l1_u: num(1)?,
            l1_v: num(2)?,
            l1_w: num(3)?,
            l2_u: num(4)?,
            l2_v: num(5)?,
            l2_w: num(6)?,
            linf_u: num(7)?,
            linf_v: num(8)?,
            linf_w: num(9)?,
            grad_w_sq: num(10)?,
            lap_w_sq: num(11)?,
            entropy_u: num(12)?,
            entropy_v: num(13)?,
            fisher_u: num(14)?,
            fisher_v: num(15)?,
            energy_y: num(16)?,
            dt: num(17)?,
            rejected_steps: cols[18]
                .parse()
                .map_err(|_| format!("row {}: bad counter `{}`", i + 1, cols[18]))?,
        });
    }
    Ok(series)
}
