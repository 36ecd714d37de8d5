//! `ptc` command-line front end.
//!
//! Exit codes: `0` every assertion passed, `1` an assertion failed, `2`
//! usage, configuration, infeasibility or I/O error.

pub mod csv_io;
pub mod svg;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use ptc_core::runner::{run_lemma, LemmaParams, LemmaWhich};
use ptc_core::synth::{design_linear, LinearDesign};
use ptc_core::{run_scenario, Psi, ScenarioConfig, Summary, UncertaintyClass};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

/// Env var capping sweep parallelism.
pub const THREADS_ENV: &str = "PTC_THREADS";

#[derive(Debug, Parser)]
#[command(name = "ptc", version, about = "Sampled-data prescribed-time control test bench")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Linear-gain + relay design for known gain and drift bounds.
    Design(DesignArgs),
    /// Run one scenario config.
    Simulate(SimulateArgs),
    /// Run a named assertion suite.
    Lemma(LemmaArgs),
    /// Run many scenario configs in parallel.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    #[arg(long = "b-lower")]
    pub b_lower: f64,
    #[arg(long = "b-upper")]
    pub b_upper: f64,
    /// Drift envelope: abs, square, sinabs, zero or const:v.
    #[arg(long, default_value = "abs")]
    pub psi: String,
    /// Bound on the initial state.
    #[arg(long = "M", required_unless_present = "from_x0")]
    pub m: Option<f64>,
    #[arg(long)]
    pub eps: f64,
    #[arg(long = "T")]
    pub horizon: f64,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Design for `M = |x0|`.
    #[arg(long = "from-x0", allow_negative_numbers = true, conflicts_with = "m")]
    pub from_x0: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Overrides `run.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides `run.dense` (dense rows per interval).
    #[arg(long)]
    pub dense: Option<usize>,
}

#[derive(Debug, Args)]
pub struct LemmaArgs {
    /// 1a, 1b, 1c, 2, 3, 4, linear, invariance or example2.
    #[arg(long)]
    pub which: String,
    #[arg(long)]
    pub a: Option<f64>,
    /// Gain power `m` of `k(t) = A/(T−t)^m`.
    #[arg(long = "m")]
    pub m_power: Option<u32>,
    #[arg(long = "A")]
    pub amplitude: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long = "M")]
    pub big_m: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long = "N")]
    pub n: Option<usize>,
    #[arg(long = "b-lower")]
    pub b_lower: Option<f64>,
    #[arg(long = "b-upper")]
    pub b_upper: Option<f64>,
    #[arg(long = "T")]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub x0: Option<f64>,
    #[arg(long)]
    pub psi: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Config files, or directories scanned for `*.ini`.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Write `<id>.csv` per scenario here.
    #[arg(long = "out-dir")]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Parse `args` (including the program name) and run, writing reports to
/// `out` and diagnostics to `err`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_PASS };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Design(a) => cmd_design(a, out),
        Command::Simulate(a) => cmd_simulate(a, out),
        Command::Lemma(a) => cmd_lemma(a, out),
        Command::Sweep(a) => cmd_sweep(a, out),
    };
    match result {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_FAIL,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_ERROR
        }
    }
}

fn parse_psi(name: &str) -> Result<Psi> {
    Psi::parse(name).map_err(|e| anyhow!("{e}"))
}

pub fn design_report(d: &LinearDesign) -> String {
    let i = &d.inputs;
    let mut s = String::new();
    for (k, v) in [
        ("lambda", d.lambda),
        ("delta", d.delta),
        ("N", d.n as f64),
        ("K", d.gain),
        ("K_upper", d.gain_upper),
        ("K_slack", d.gain_slack()),
        ("C", d.relay),
        ("delta_inv", d.delta_inv),
        ("psi_bar_M", d.psi_bar_m),
        ("psi_bar_eps", d.psi_bar_eps),
        ("psi_resolution", d.psi_resolution),
        ("delta_bound", d.delta_bound),
    ] {
        s.push_str(&format!("{k}={v}\n"));
    }
    s.push_str(&format!("relay_invariance={}\n", d.relay_invariance_holds()));
    s.push_str("\n# scenario block\n[design]\n");
    s.push_str(&format!(
        "b_lower = {}\nb_upper = {}\npsi = {}\nM = {}\neps = {}\nT = {}\nlambda = {}\n",
        i.b_lower, i.b_upper, i.psi, i.m, i.eps, i.horizon, d.lambda
    ));
    s
}

fn cmd_design(a: &DesignArgs, out: &mut dyn Write) -> Result<bool> {
    let m = match (a.m, a.from_x0) {
        (_, Some(x0)) => x0.abs(),
        (Some(m), None) => m,
        (None, None) => unreachable!("clap requires --M or --from-x0"),
    };
    let cls = UncertaintyClass::bounded(a.b_lower, a.b_upper, parse_psi(&a.psi)?).map_err(|e| anyhow!("{e}"))?;
    let d = design_linear(&cls, m, a.eps, a.horizon, a.lambda).map_err(|e| anyhow!("{e}"))?;
    write!(out, "{}", design_report(&d))?;
    Ok(true)
}

fn load_config(path: &Path, seed: Option<u64>, dense: Option<usize>) -> Result<ScenarioConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut cfg = ScenarioConfig::parse(&text).map_err(|e| anyhow!("{}: {e}", path.display()))?;
    if let Some(s) = seed {
        cfg.set("run", "seed", &s.to_string()).map_err(|e| anyhow!("{e}"))?;
    }
    if let Some(d) = dense {
        cfg.set("run", "dense", &d.to_string()).map_err(|e| anyhow!("{e}"))?;
    }
    Ok(cfg)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn cmd_simulate(a: &SimulateArgs, out: &mut dyn Write) -> Result<bool> {
    let cfg = load_config(&a.config, a.seed, a.dense)?;
    let (traj, summary) = run_scenario(&cfg).map_err(|e| anyhow!("{}: {e}", a.config.display()))?;
    if let Some(p) = &a.csv {
        let mut buf = Vec::new();
        csv_io::write_csv(&traj, &mut buf)?;
        write_file(p, &buf)?;
    }
    if let Some(p) = &a.svg {
        write_file(p, svg::render(&traj, &summary.id).as_bytes())?;
    }
    write!(out, "{}", summary.to_report())?;
    Ok(summary.passed())
}

fn cmd_lemma(a: &LemmaArgs, out: &mut dyn Write) -> Result<bool> {
    let which = LemmaWhich::parse(&a.which).map_err(|e| anyhow!("{e}"))?;
    let params = LemmaParams {
        a: a.a,
        m_power: a.m_power,
        amplitude: a.amplitude,
        c: a.c,
        steps: a.steps,
        big_m: a.big_m,
        eps: a.eps,
        n: a.n,
        b_lower: a.b_lower,
        b_upper: a.b_upper,
        horizon: a.horizon,
        lambda: a.lambda,
        dt: a.dt,
        x0: a.x0,
        psi: a.psi.as_deref().map(parse_psi).transpose()?,
        seed: a.seed,
    };
    let verdict = run_lemma(which, &params).map_err(|e| anyhow!("{e}"))?;
    writeln!(out, "which={}", which.name())?;
    writeln!(out, "{verdict}")?;
    Ok(verdict.passed())
}

fn collect_configs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(p)
                .with_context(|| format!("reading {}", p.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "ini"))
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(p.clone());
        }
    }
    Ok(files)
}

fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => {
            let n: usize = v.trim().parse().with_context(|| format!("{THREADS_ENV}={v} is not a thread count"))?;
            Ok((n > 0).then_some(n))
        }
    }
}

fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write) -> Result<bool> {
    let files = collect_configs(&a.inputs)?;
    if let Some(dir) = &a.out_dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads_from_env()? {
        pool = pool.num_threads(n);
    }
    let pool = pool.build()?;
    let run_one = |path: &PathBuf| -> Result<Summary> {
        let cfg = load_config(path, a.seed, None)?;
        let (traj, summary) = run_scenario(&cfg).map_err(|e| anyhow!("{}: {e}", path.display()))?;
        if let Some(dir) = &a.out_dir {
            let mut buf = Vec::new();
            csv_io::write_csv(&traj, &mut buf)?;
            write_file(&dir.join(format!("{}.csv", summary.id)), &buf)?;
        }
        Ok(summary)
    };
    let results: Vec<Result<Summary>> = pool.install(|| files.par_iter().map(run_one).collect());
    let mut all_pass = true;
    let mut ids = std::collections::BTreeMap::new();
    for (path, r) in files.iter().zip(results) {
        let s = r?;
        if let Some(prev) = ids.insert(s.id.clone(), path.clone()) {
            return Err(anyhow!("duplicate scenario id `{}` in {} and {}", s.id, prev.display(), path.display()));
        }
        all_pass &= s.passed();
        writeln!(
            out,
            "id={} verdict={} steps={} final_abs_x={:e} converged_at={} diverged={} config_hash={}",
            s.id,
            if s.passed() { "PASS" } else { "FAIL" },
            s.steps,
            s.final_abs_x,
            s.converged_at.map_or("none".into(), |v| v.to_string()),
            s.diverged,
            s.config_hash
        )?;
    }
    writeln!(out, "scenarios={} verdict={}", files.len(), if all_pass { "PASS" } else { "FAIL" })?;
    Ok(all_pass)
}
