//! Batch driver for the annulus laboratory.
//!
//! Every subcommand reads one flat `key = value` config file (defaults
//! apply when none is given), writes its artifacts into the configured
//! output directory and prints a one line summary per result. Artifacts
//! are plain CSV and JSON with full `f64` precision, so reruns of the same
//! config produce byte identical files.
//!
//! Exit codes: 0 success, 1 filesystem trouble, 2 invalid input (bad
//! config text, bad parameters, missing artifacts), 3 a computation that
//! started from valid input but failed (no convergence, exhausted constant
//! search, failed certification).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Parser, Subcommand};

use puccilab::barriers::{search_constants, Inequality};
use puccilab::config::RunConfig;
use puccilab::diagnostics::{fit_power, oscillation_decay, rate_report, regime_predict};
use puccilab::eigen::principal_eig;
use puccilab::solver::{solve_singular_on, Solution};
use puccilab::{derived_constants, Error, GridFunction, RadialGrid, Result};

#[derive(Parser)]
#[command(
    name = "puccilab",
    about = "Radial solver, barrier certifier and boundary diagnostics for singular annulus problems",
    version
)]
struct Cli {
    /// Flat key = value config file; built in defaults apply when absent.
    #[arg(short, long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the singular problem by vanishing regularization and write
    /// the profile.
    Solve,
    /// Search barrier constants and certify the comparison inequalities.
    Certify {
        /// One inequality (I1 .. I7); all seven when absent.
        #[arg(long)]
        ineq: Option<String>,
        /// Override a starting constant, e.g. --set m1=0.25. Repeatable.
        #[arg(long = "set", value_name = "KEY=VAL")]
        set: Vec<String>,
    },
    /// Solve the principal half eigenpair of the lower extremal operator.
    Eigen,
    /// Fit the boundary growth rate of a solved profile.
    Rates,
    /// Harnack quotients over dyadic scales and oscillation decay of a
    /// solved profile.
    Harnack,
    /// Run every row of the config sweep table.
    Sweep {
        /// Worker threads.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Write the fully resolved configuration and the derived constants.
    Report,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match &e {
                Error::Io(_) => 1u8,
                e if e.is_validation() => 2,
                _ => 3,
            })
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let cfg = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Solve => cmd_solve(&cfg),
        Command::Certify { ineq, set } => cmd_certify(&cfg, ineq.as_deref(), &set),
        Command::Eigen => cmd_eigen(&cfg),
        Command::Rates => cmd_rates(&cfg),
        Command::Harnack => cmd_harnack(&cfg),
        Command::Sweep { jobs } => cmd_sweep(&cfg, jobs),
        Command::Report => cmd_report(&cfg),
    }
}

fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    let cfg = match path {
        Some(p) => RunConfig::parse(&std::fs::read_to_string(p)?)?,
        None => RunConfig::default(),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(cfg: &RunConfig) -> Result<PathBuf> {
    let dir = PathBuf::from(&cfg.output_dir);
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)?;
    Ok(())
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Parse(format!("could not serialize {}: {e}", path.display())))?;
    text.push('\n');
    write_text(path, &text)
}

fn read_solution(dir: &Path) -> Result<GridFunction> {
    let path = dir.join("solution.csv");
    if !path.exists() {
        return Err(Error::MissingArtifact(format!(
            "{} does not exist; run solve first",
            path.display()
        )));
    }
    GridFunction::read_csv(&path)
}

fn solve_grid(cfg: &RunConfig) -> Result<RadialGrid> {
    RadialGrid::boundary_refined(cfg.spec.geometry.rho, cfg.spec.geometry.R, cfg.nodes)
}

fn run_solve(cfg: &RunConfig) -> Result<Solution> {
    let grid = solve_grid(cfg)?;
    solve_singular_on(&cfg.spec, &grid, &cfg.solve)
}

fn cmd_solve(cfg: &RunConfig) -> Result<()> {
    let sol = run_solve(cfg)?;
    let dir = out_dir(cfg)?;
    sol.w.write_csv(dir.join("solution.csv"))?;
    write_json(&dir.join("report.json"), &sol.report)?;
    println!(
        "solved: delta {:.3e}, {} sweeps, residual {:.3e}, max {:.6}, hopf radius {:.6}",
        sol.report.delta_final,
        sol.report.sweeps_total,
        sol.report.residual_max,
        sol.report.max_value,
        sol.report.hopf_radius
    );
    println!("wrote {} and report.json", dir.join("solution.csv").display());
    Ok(())
}

fn parse_overrides(set: &[String]) -> Result<BTreeMap<String, f64>> {
    let mut map = BTreeMap::new();
    for item in set {
        let Some((key, value)) = item.split_once('=') else {
            return Err(Error::Validation(format!(
                "--set wants KEY=VAL, got `{item}`"
            )));
        };
        let parsed: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("--set {key}: `{value}` is not a number")))?;
        map.insert(key.trim().to_string(), parsed);
    }
    Ok(map)
}

fn cmd_certify(cfg: &RunConfig, ineq: Option<&str>, set: &[String]) -> Result<()> {
    let overrides = parse_overrides(set)?;
    if ineq.is_none() && !overrides.is_empty() {
        return Err(Error::Validation(
            "--set pins constants of one inequality, so it needs --ineq".to_string(),
        ));
    }
    let list: Vec<Inequality> = match ineq {
        Some(name) => vec![name.parse()?],
        None => Inequality::all().to_vec(),
    };
    let mut certificates = Vec::new();
    let mut first_failure: Option<Error> = None;
    for ineq in list {
        match search_constants(ineq, &cfg.spec, &overrides) {
            Ok(cert) => {
                let consts = cert
                    .constants
                    .iter()
                    .map(|(k, v)| format!("{k} = {v}"))
                    .collect::<Vec<_>>()
                    .join(", ");
                println!(
                    "{ineq} ok: margin {:.3e} over {} samples after {} steps ({consts})",
                    cert.report.min_margin, cert.report.samples, cert.steps
                );
                certificates.push(cert);
            }
            Err(e) => {
                println!("{ineq} FAILED: {e}");
                first_failure.get_or_insert(e);
            }
        }
    }
    let dir = out_dir(cfg)?;
    write_json(&dir.join("certificates.json"), &certificates)?;
    match first_failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn cmd_eigen(cfg: &RunConfig) -> Result<()> {
    let spec = &cfg.spec;
    let grid = RadialGrid::uniform(spec.geometry.rho, spec.geometry.R, cfg.nodes)?;
    let pair = principal_eig(
        &spec.ell,
        spec.growth.b,
        spec.dim,
        &spec.geometry,
        None,
        Some(&grid),
    )?;
    let dir = out_dir(cfg)?;
    pair.psi.write_csv(dir.join("psi.csv"))?;
    let summary = serde_json::json!({
        "lambda_hat": pair.lambda_hat,
        "sweeps": pair.sweeps,
        "residual": pair.residual(),
        "dim": pair.dim,
        "b": pair.b,
        "nodes": pair.psi.len(),
    });
    write_json(&dir.join("eigen.json"), &summary)?;
    println!(
        "eigenpair: lambda_hat {:.12e}, residual {:.3e}, {} sweeps",
        pair.lambda_hat,
        pair.residual(),
        pair.sweeps
    );
    Ok(())
}

fn cmd_rates(cfg: &RunConfig) -> Result<()> {
    let dir = out_dir(cfg)?;
    let u = read_solution(&dir)?;
    let report = rate_report(&u, &cfg.spec, (cfg.window_lo, cfg.window_hi))?;
    write_json(&dir.join("rates.json"), &report)?;
    println!(
        "predicted {:?}; power fit d^{:.6} (log residual {:.3e}); log fit offset {:.6} (log residual {:.3e}{})",
        report.prediction,
        report.power.exponent,
        report.power.residual,
        report.log.offset,
        report.log.residual,
        if report.log.at_bracket_edge {
            ", offset at bracket edge"
        } else {
            ""
        }
    );
    Ok(())
}

fn cmd_harnack(cfg: &RunConfig) -> Result<()> {
    let dir = out_dir(cfg)?;
    let u = read_solution(&dir)?;
    let spec = &cfg.spec;
    let l = derived_constants(spec).l2;
    let width = spec.geometry.width();
    let mut csv = String::from("scale,ratio\n");
    let mut worst = 0.0f64;
    for k in 1..=cfg.scales {
        let scale = width * 0.5f64.powi(k as i32);
        let ratio = puccilab::diagnostics::harnack_ratio(&u, spec, scale, cfg.p, l)?;
        worst = worst.max(ratio);
        let _ = writeln!(csv, "{scale:.16e},{ratio:.16e}");
    }
    write_text(&dir.join("harnack.csv"), &csv)?;
    let osc = oscillation_decay(&u, cfg.nu, spec.forcing.M)?;
    let mut csv = String::from("scale,oscillation,gamma\n");
    for i in 0..osc.scales.len() {
        let _ = writeln!(
            csv,
            "{:.16e},{:.16e},{:.16e}",
            osc.scales[i], osc.oscillations[i], osc.gammas[i]
        );
    }
    write_text(&dir.join("oscillation.csv"), &csv)?;
    match (osc.flat, osc.fitted_tau) {
        (true, _) => println!(
            "harnack max {:.6} over {} scales; boundary quotient flat",
            worst, cfg.scales
        ),
        (false, Some(tau)) => println!(
            "harnack max {:.6} over {} scales; oscillation decays like s^{:.4} (fit residual {:.3e})",
            worst,
            cfg.scales,
            tau,
            osc.fit_residual.unwrap_or(f64::NAN)
        ),
        (false, None) => println!(
            "harnack max {:.6} over {} scales; oscillation decay not identifiable",
            worst, cfg.scales
        ),
    }
    Ok(())
}

struct SweepRow {
    values: Vec<f64>,
    predicted: f64,
    exponent: f64,
    amplitude: f64,
    fit_residual: f64,
    residual_max: f64,
    sweeps: usize,
    delta_final: f64,
}

fn sweep_one(cfg: &RunConfig, tuple: &[f64]) -> Result<SweepRow> {
    let mut run = cfg.clone();
    for (key, value) in run.sweep.clone().iter().zip(tuple) {
        run.set_key(key, &value.to_string())?;
    }
    run.validate()?;
    let sol = run_solve(&run)?;
    let fit = fit_power(&sol.w, (run.window_lo, run.window_hi))?;
    let predicted = regime_predict(run.spec.forcing.mu, run.spec.forcing.alpha)?;
    Ok(SweepRow {
        values: tuple.to_vec(),
        predicted: predicted.exponent(),
        exponent: fit.exponent,
        amplitude: fit.amplitude,
        fit_residual: fit.residual,
        residual_max: sol.report.residual_max,
        sweeps: sol.report.sweeps_total,
        delta_final: sol.report.delta_final,
    })
}

fn cmd_sweep(cfg: &RunConfig, jobs: usize) -> Result<()> {
    if cfg.pairs.is_empty() {
        return Err(Error::Validation(
            "the sweep table is empty; set `pairs` in the config".to_string(),
        ));
    }
    let n = cfg.pairs.len();
    let workers = jobs.clamp(1, n);
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<SweepRow>>>> = Mutex::new((0..n).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::Relaxed);
                if idx >= n {
                    break;
                }
                let row = sweep_one(cfg, &cfg.pairs[idx]);
                slots.lock().unwrap()[idx] = Some(row);
            });
        }
    });
    let rows: Vec<SweepRow> = slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|slot| slot.expect("every sweep slot is filled"))
        .collect::<Result<_>>()?;
    let mut csv = String::new();
    for key in &cfg.sweep {
        let _ = write!(csv, "{key},");
    }
    csv.push_str("predicted,exponent,amplitude,fit_residual,residual_max,sweeps,delta_final\n");
    for (tuple, row) in cfg.pairs.iter().zip(&rows) {
        for v in &row.values {
            let _ = write!(csv, "{v:.16e},");
        }
        let _ = writeln!(
            csv,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{:.16e}",
            row.predicted,
            row.exponent,
            row.amplitude,
            row.fit_residual,
            row.residual_max,
            row.sweeps,
            row.delta_final
        );
        let labels = cfg
            .sweep
            .iter()
            .zip(tuple)
            .map(|(k, v)| format!("{k} = {v}"))
            .collect::<Vec<_>>()
            .join(", ");
        println!(
            "{labels}: fitted d^{:.4} (predicted {:.4}), solve residual {:.3e}",
            row.exponent, row.predicted, row.residual_max
        );
    }
    let dir = out_dir(cfg)?;
    write_text(&dir.join("sweep.csv"), &csv)?;
    println!("wrote {}", dir.join("sweep.csv").display());
    Ok(())
}

fn cmd_report(cfg: &RunConfig) -> Result<()> {
    let text = cfg.to_text();
    let back = RunConfig::parse(&text)?;
    if back != *cfg {
        return Err(Error::Validation(
            "effective config failed to round trip".to_string(),
        ));
    }
    let dir = out_dir(cfg)?;
    write_text(&dir.join("effective.cfg"), &text)?;
    let dc = derived_constants(&cfg.spec);
    println!(
        "derived: l1 {:.6e}, l2 {:.6e}, N+ {:.6}, N- {:.6}",
        dc.l1, dc.l2, dc.n_plus, dc.n_minus
    );
    println!("wrote {}", dir.join("effective.cfg").display());
    Ok(())
}
