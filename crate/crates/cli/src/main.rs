//! `lognls`: run simulations, reduced ODEs and named experiments.
//!
//! Exit status: 0 when every check passes, 2 when a check fails, 1 on an
//! execution error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use lognls::config::RunConfig;
use lognls::diagnostics::{dual_logsob_residual, read_density_csv, relative_entropy_and_ck, write_records_csv};
use lognls::experiments::{run_experiment, validate_report_file, ExperimentName};
use lognls::gaussian::{integrate_gaussian_strided, GaussianState};
use lognls::snapshot::write_snapshot;
use lognls::solver::run;
use lognls::tau::{first_integral_residual, integrate_tau_strided, TauParams};

/// Residual and slack floors used by `check-inequality`.
const RESIDUAL_FLOOR: f64 = -1e-8;
const SLACK_FLOOR: f64 = -1e-9;

#[derive(Parser)]
#[command(name = "lognls", version, about = "Logarithmic Schrödinger solvers and experiments")]
struct Cli {
    /// Seed for randomized data.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve a configured field and write diagnostics plus a final snapshot.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Integrate the τ oscillator.
    Tau(TauArgs),
    /// Integrate the Gaussian ODEs for the Gaussian datum of a run config.
    Gaussian {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a named experiment and write `report.json` and CSV series.
    Experiment(ExperimentArgs),
    /// Audit the dual log-Sobolev and Csiszár–Kullback inequalities on a
    /// sampled density.
    CheckInequality {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        a: f64,
    },
    /// Validate a report file; violations are listed by JSON pointer.
    ValidateReport { path: PathBuf },
}

#[derive(Args)]
struct TauArgs {
    #[arg(long)]
    lambda: f64,
    /// Signed curvature Ω.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    omega2: f64,
    #[arg(long, default_value_t = false, action = clap::ArgAction::Set)]
    cubic: bool,
    #[arg(long, default_value_t = 1.0)]
    tau0: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    tau1: f64,
    #[arg(long)]
    dt: f64,
    #[arg(long)]
    t_end: f64,
    /// Record every `stride`-th step.
    #[arg(long, default_value_t = 1)]
    stride: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExperimentArgs {
    name: ExperimentName,
    #[arg(long)]
    out: PathBuf,
    /// JSON object merged over the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `key=value` overrides (dotted keys nest; values parse as JSON).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Shortcut for `--set eta=..`.
    #[arg(long)]
    eta: Option<f64>,
    /// Shortcut for `--set t_end=..`.
    #[arg(long = "T")]
    t_end: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> Result<bool> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match cli.cmd {
        Command::Simulate { config, out } => simulate(&config, &out),
        Command::Tau(a) => tau(&a),
        Command::Gaussian { config, out } => gaussian(&config, &out),
        Command::Experiment(a) => experiment(&a, cli.seed),
        Command::CheckInequality { input, a } => check_inequality(&input, a),
        Command::ValidateReport { path } => {
            let v = validate_report_file(&path)?;
            for x in &v {
                println!("{x}");
            }
            if v.is_empty() {
                println!("ok");
            }
            Ok(v.is_empty())
        }
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn create_parent(file: &Path) -> Result<()> {
    match file.parent() {
        Some(p) if !p.as_os_str().is_empty() => create_dir(p),
        _ => Ok(()),
    }
}

fn simulate(config: &Path, out: &Path) -> Result<bool> {
    let text = fs::read_to_string(config).with_context(|| format!("reading {}", config.display()))?;
    let cfg = RunConfig::parse(&text)?;
    let base = config.parent().unwrap_or(Path::new("."));
    let field = cfg.build_field(base)?;
    let d = field.dim();
    let result = run(field, &cfg.run_options())?;
    create_dir(out)?;
    let mut csv = Vec::new();
    write_records_csv(&mut csv, d, &result.records)?;
    fs::write(out.join("records.csv"), csv)?;
    let sidecar = json!({
        "config": serde_json::to_value(&cfg)?,
        "hash": cfg.hash(),
        "t": result.field.t,
        "frame": match result.field.rescaled_frame() {
            Some(f) => json!({"kind": f.kind, "norm_factor": f.norm_factor}),
            None => json!("physical"),
        },
    });
    write_snapshot(&out.join("final.lnls"), &result.field, &sidecar)?;
    println!("{} samples, t = {}", result.records.len(), result.field.t);
    Ok(true)
}

fn tau(a: &TauArgs) -> Result<bool> {
    let p = TauParams {
        lambda: a.lambda,
        omega_sq: a.omega2,
        include_cubic: a.cubic,
        tau0: a.tau0,
        tau1: a.tau1,
    };
    let traj = integrate_tau_strided(p, a.t_end, a.dt, a.stride)?;
    let res = first_integral_residual(&traj);
    create_parent(&a.out)?;
    let mut w = csv::Writer::from_path(&a.out)?;
    w.write_record(["t", "tau", "tau_dot", "residual"])?;
    for i in 0..traj.len() {
        w.write_record([traj.times[i], traj.tau[i], traj.tau_dot[i], res[i]].map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(true)
}

fn gaussian(config: &Path, out: &Path) -> Result<bool> {
    let text = fs::read_to_string(config).with_context(|| format!("reading {}", config.display()))?;
    let cfg = RunConfig::parse(&text)?;
    let lognls::config::InitialDatum::Gaussian {
        a_re, a_im, amplitude, ..
    } = &cfg.initial
    else {
        bail!("the gaussian command needs a `gaussian` initial datum");
    };
    let widths = a_re
        .iter()
        .zip(a_im)
        .map(|(&r, &i)| lognls::Complex64::new(r, i))
        .collect();
    let init = GaussianState::centered(widths, lognls::Complex64::new(*amplitude, 0.0));
    let t = &cfg.time;
    let states = integrate_gaussian_strided(&init, &cfg.potential, cfg.lambda, t.t_end, t.dt, t.save_every)?;
    create_parent(out)?;
    let mut w = csv::Writer::from_path(out)?;
    let d = init.dim();
    let mut header = vec!["t".to_string()];
    for j in 0..d {
        header.push(format!("re_a{j}"));
        header.push(format!("im_a{j}"));
    }
    header.extend(["abs_b", "arg_b", "mass"].map(String::from));
    w.write_record(&header)?;
    for s in &states {
        let mut row = vec![s.t];
        for a in &s.widths {
            row.push(a.re);
            row.push(a.im);
        }
        row.extend([s.amplitude.norm(), s.amplitude.arg(), s.mass()]);
        w.write_record(row.iter().map(f64::to_string))?;
    }
    w.flush()?;
    Ok(true)
}

/// Insert `value` at the dotted path `key` of `obj`.
fn set_path(obj: &mut Value, key: &str, value: Value) -> Result<()> {
    let mut cur = obj;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        if part.is_empty() {
            bail!("empty component in key `{key}`");
        }
        let Value::Object(map) = cur else {
            bail!("`{key}` crosses a non-object value");
        };
        if i + 1 == parts.len() {
            map.insert(part.to_string(), value);
            return Ok(());
        }
        cur = map.entry(part.to_string()).or_insert_with(|| json!({}));
    }
    Ok(())
}

fn overrides(a: &ExperimentArgs) -> Result<Option<Value>> {
    let mut o = match &a.config {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => json!({}),
    };
    for s in &a.set {
        let Some((k, v)) = s.split_once('=') else {
            bail!("--set expects KEY=VALUE, got `{s}`");
        };
        let value = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()));
        set_path(&mut o, k, value)?;
    }
    if let Some(eta) = a.eta {
        set_path(&mut o, "eta", json!(eta))?;
    }
    if let Some(t) = a.t_end {
        set_path(&mut o, "t_end", json!(t))?;
    }
    Ok(match &o {
        Value::Object(m) if m.is_empty() => None,
        _ => Some(o),
    })
}

fn experiment(a: &ExperimentArgs, seed: u64) -> Result<bool> {
    let o = overrides(a)?;
    let out = run_experiment(a.name, o.as_ref(), seed)?;
    create_dir(&a.out)?;
    fs::write(a.out.join("report.json"), out.report.to_json())?;
    for s in &out.series {
        fs::write(a.out.join(format!("{}.csv", s.name)), &s.csv)?;
    }
    for c in &out.report.checks {
        let v = c.value.map_or("non-finite".to_string(), |v| format!("{v:.6e}"));
        let cmp = serde_json::to_value(c.comparison)?;
        println!(
            "{} {} = {v} ({} {:e})",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            cmp.as_str().unwrap_or("?"),
            c.threshold
        );
    }
    println!("{}: {}", a.name, if out.report.pass { "pass" } else { "FAIL" });
    Ok(out.report.pass)
}

fn check_inequality(input: &Path, a: f64) -> Result<bool> {
    let s = read_density_csv(input)?;
    let d = s.dim();
    let r2 = s.r2();
    let dl = dual_logsob_residual(&s.density, &r2, s.cell_volume, d, a)?;
    let m: f64 = s.density.iter().sum::<f64>() * s.cell_volume;
    // Both sides as probabilities, normalized on the sample grid.
    let mut reference: Vec<f64> = r2.iter().map(|r| (-a * r).exp()).collect();
    let z: f64 = reference.iter().sum::<f64>() * s.cell_volume;
    reference.iter_mut().for_each(|q| *q /= z);
    let mu: Vec<f64> = s.density.iter().map(|p| p / m).collect();
    let gap = relative_entropy_and_ck(&mu, &reference, s.cell_volume)?;
    let pass = dl.residual >= RESIDUAL_FLOOR && gap.slack >= SLACK_FLOOR;
    let report = json!({
        "a": a,
        "dim": d,
        "mass": m,
        "dual_logsob_residual": dl.residual,
        "a_star": dl.a_star,
        "dual_logsob_residual_at_a_star": dl.residual_at_a_star,
        "relative_entropy": gap.kl,
        "l1_distance": gap.l1,
        "ck_slack": gap.slack,
        "residual_floor": RESIDUAL_FLOOR,
        "slack_floor": SLACK_FLOOR,
        "pass": pass,
    });
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(pass)
}
