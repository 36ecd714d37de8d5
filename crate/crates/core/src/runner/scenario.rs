//! Config-driven scenarios.
//!
//! The format is flat `key = value` lines grouped in `[plant]`,
//! `[schedule]`, `[controller]` and `[run]` sections, plus an optional
//! `[design]` section. A top-level `schema = 1` line is required. `#` and
//! `;` start comments.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::adversary::{Lemma1Adversary, Lemma1Config, Lemma2Adversary, Lemma2Config, Lemma3Adversary, Lemma3Config};
use crate::control::{
    CompositeController, Controller, LinearController, PhiFunction, PrescribedController, RelayController,
    TimeVaryingGainController, ZeroController,
};
use crate::error::{Error, Result};
use crate::integrate::DEFAULT_TOL;
use crate::model::{AffinePlant, BProfile, EnvelopeMode, EnvelopePlant, Plant, Psi, Trajectory, UncertaintyClass, WorstCasePlant};
use crate::runner::lemmas::Check;
use crate::runner::{hash_hex, simulate, SimOptions};
use crate::schedules::{SamplingSchedule, DEFAULT_K_MAX};
use crate::synth::{check_invariance, design_linear, LinearDesign};

pub const SCHEMA_VERSION: u32 = 1;

const SECTIONS: [&str; 5] = ["plant", "schedule", "controller", "run", "design"];

#[derive(Clone, Debug, PartialEq)]
struct Entry {
    value: String,
    line: usize,
}

/// Parsed scenario file. Keys are looked up lazily so diagnostics can name
/// the offending line.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    sections: BTreeMap<String, BTreeMap<String, Entry>>,
}

impl FromStr for ScenarioConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        Self::parse(text)
    }
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut sections: BTreeMap<String, BTreeMap<String, Entry>> = BTreeMap::new();
        let mut current = String::new();
        let mut schema: Option<usize> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split(['#', ';']).next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            if let Some(name) = body.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| Error::config(line, body, "unterminated section header"))?
                    .trim();
                if !SECTIONS.contains(&name) {
                    return Err(Error::config(line, name, format!("unknown section (expected one of {})", SECTIONS.join(", "))));
                }
                if sections.contains_key(name) {
                    return Err(Error::config(line, name, "duplicate section"));
                }
                current = name.to_string();
                sections.insert(current.clone(), BTreeMap::new());
                continue;
            }
            let (key, value) = body
                .split_once('=')
                .ok_or_else(|| Error::config(line, body, "expected `key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(Error::config(line, "", "empty key"));
            }
            if current.is_empty() {
                if key != "schema" {
                    return Err(Error::config(line, key, "only `schema` may appear before the first section"));
                }
                if value != SCHEMA_VERSION.to_string() {
                    return Err(Error::config(line, key, format!("unsupported schema {value} (expected {SCHEMA_VERSION})")));
                }
                schema = Some(line);
                continue;
            }
            let sec = sections.get_mut(&current).expect("section inserted");
            if sec.contains_key(key) {
                return Err(Error::config(line, key, format!("duplicate key in [{current}]")));
            }
            sec.insert(
                key.to_string(),
                Entry {
                    value: value.to_string(),
                    line,
                },
            );
        }
        if schema.is_none() {
            return Err(Error::config(0, "schema", "missing `schema = 1` header"));
        }
        for required in ["plant", "schedule", "controller", "run"] {
            if !sections.contains_key(required) {
                return Err(Error::config(0, required, "missing section"));
            }
        }
        Ok(Self { sections })
    }

    /// Replace or insert a key, e.g. a seed override from the command line.
    pub fn set(&mut self, section: &str, key: &str, value: &str) -> Result<()> {
        if !SECTIONS.contains(&section) {
            return Err(Error::config(0, section, "unknown section"));
        }
        let sec = self.sections.entry(section.to_string()).or_default();
        sec.insert(
            key.to_string(),
            Entry {
                value: value.to_string(),
                line: 0,
            },
        );
        let text = self.to_text();
        *self = Self::parse(&text)?;
        Ok(())
    }

    /// Canonical text: sorted sections and keys, comments dropped. This is
    /// what the configuration hash covers.
    pub fn to_text(&self) -> String {
        let mut out = format!("schema = {SCHEMA_VERSION}\n");
        for (name, sec) in &self.sections {
            out.push_str(&format!("[{name}]\n"));
            for (k, e) in sec {
                out.push_str(&format!("{k} = {}\n", e.value));
            }
        }
        out
    }

    pub fn config_hash(&self) -> String {
        hash_hex(&self.to_text())
    }

    pub fn has_section(&self, section: &str) -> bool {
        self.sections.contains_key(section)
    }

    fn entry(&self, section: &str, key: &str) -> Option<&Entry> {
        self.sections.get(section).and_then(|s| s.get(key))
    }

    fn line_of(&self, section: &str, key: &str) -> usize {
        self.entry(section, key).map_or(0, |e| e.line)
    }

    pub fn get_str(&self, section: &str, key: &str) -> Option<&str> {
        self.entry(section, key).map(|e| e.value.as_str())
    }

    fn require_str(&self, section: &str, key: &str) -> Result<&str> {
        self.get_str(section, key)
            .ok_or_else(|| Error::config(0, format!("{section}.{key}"), "missing required key"))
    }

    fn get<T: FromStr>(&self, section: &str, key: &str) -> Result<Option<T>> {
        match self.entry(section, key) {
            None => Ok(None),
            Some(e) => e.value.parse::<T>().map(Some).map_err(|_| {
                Error::config(
                    e.line,
                    format!("{section}.{key}"),
                    format!("cannot parse `{}` as {}", e.value, std::any::type_name::<T>()),
                )
            }),
        }
    }

    fn require<T: FromStr>(&self, section: &str, key: &str) -> Result<T> {
        self.get(section, key)?
            .ok_or_else(|| Error::config(0, format!("{section}.{key}"), "missing required key"))
    }

    fn num(&self, section: &str, key: &str, default: f64) -> Result<f64> {
        Ok(self.get(section, key)?.unwrap_or(default))
    }

    fn wrap<T>(&self, section: &str, key: &str, r: Result<T>) -> Result<T> {
        r.map_err(|e| match e {
            Error::Config { .. } => e,
            other => Error::config(self.line_of(section, key), format!("{section}.{key}"), other.to_string()),
        })
    }

    fn psi(&self, section: &str) -> Result<Psi> {
        let name = self.get_str(section, "psi").unwrap_or("zero");
        self.wrap(section, "psi", Psi::parse(name))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub id: String,
    pub config_hash: String,
    pub plant: String,
    pub controller: String,
    pub schedule: String,
    pub x0: f64,
    pub steps: usize,
    pub final_abs_x: f64,
    pub max_abs_x: f64,
    pub converged_at: Option<usize>,
    pub diverged: bool,
    pub overflow: bool,
    pub truncated: bool,
    pub design: Option<LinearDesign>,
    pub checks: Vec<Check>,
}

impl Summary {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// `key=value` lines followed by one PASS/FAIL line per assertion.
    pub fn to_report(&self) -> String {
        let mut out = String::new();
        let opt = |v: Option<usize>| v.map_or("none".to_string(), |v| v.to_string());
        for (k, v) in [
            ("id", self.id.clone()),
            ("config_hash", self.config_hash.clone()),
            ("plant", self.plant.clone()),
            ("controller", self.controller.clone()),
            ("schedule", self.schedule.clone()),
            ("x0", format!("{}", self.x0)),
            ("steps", self.steps.to_string()),
            ("final_abs_x", format!("{:e}", self.final_abs_x)),
            ("max_abs_x", format!("{:e}", self.max_abs_x)),
            ("converged_at", opt(self.converged_at)),
            ("diverged", self.diverged.to_string()),
            ("overflow", self.overflow.to_string()),
            ("truncated", self.truncated.to_string()),
        ] {
            out.push_str(&format!("{k}={v}\n"));
        }
        if let Some(d) = &self.design {
            out.push_str(&format!("design.N={}\ndesign.delta={}\ndesign.K={}\ndesign.C={}\n", d.n, d.delta, d.gain, d.relay));
        }
        for c in &self.checks {
            out.push_str(&format!("{c}\n"));
        }
        out.push_str(&format!("verdict={}\n", if self.passed() { "PASS" } else { "FAIL" }));
        out
    }
}

/// Parse `b` profile specs: `1.5`, `const:1.5`, `alt:lo,hi`, `rand:lo,hi`.
fn parse_b_profile(spec: &str, seed: u64) -> Result<BProfile> {
    let spec = spec.trim();
    let pair = |rest: &str| -> Result<(f64, f64)> {
        let (lo, hi) = rest
            .split_once(',')
            .ok_or_else(|| Error::invalid(format!("expected `lo,hi` in `{spec}`")))?;
        let lo: f64 = lo.trim().parse().map_err(|_| Error::invalid(format!("bad number `{lo}`")))?;
        let hi: f64 = hi.trim().parse().map_err(|_| Error::invalid(format!("bad number `{hi}`")))?;
        if !(lo > 0.0 && lo <= hi) {
            return Err(Error::invalid(format!("need 0 < lo <= hi in `{spec}`")));
        }
        Ok((lo, hi))
    };
    if let Some(rest) = spec.strip_prefix("alt:") {
        let (lo, hi) = pair(rest)?;
        return Ok(BProfile::Alternating { lo, hi });
    }
    if let Some(rest) = spec.strip_prefix("rand:") {
        let (lo, hi) = pair(rest)?;
        return Ok(BProfile::Random { lo, hi, seed });
    }
    let v = spec.strip_prefix("const:").unwrap_or(spec);
    let b: f64 = v.parse().map_err(|_| Error::invalid(format!("bad b profile `{spec}`")))?;
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::invalid(format!("input gain must be positive, got {b}")));
    }
    Ok(BProfile::Constant(b))
}

fn class_from(cfg: &ScenarioConfig, section: &str) -> Result<UncertaintyClass> {
    let lo = cfg.num(section, "b_lower", 1.0)?;
    let hi: Option<f64> = cfg.get(section, "b_upper")?;
    let psi = cfg.psi(section)?;
    cfg.wrap(section, "b_lower", UncertaintyClass::new(lo, hi, psi))
}

fn build_design(cfg: &ScenarioConfig) -> Result<Option<LinearDesign>> {
    if !cfg.has_section("design") {
        return Ok(None);
    }
    let cls = class_from(cfg, "design")?;
    let d = design_linear(
        &cls,
        cfg.require("design", "M")?,
        cfg.require("design", "eps")?,
        cfg.num("design", "T", 1.0)?,
        cfg.get("design", "lambda")?,
    );
    cfg.wrap("design", "M", d).map(Some)
}

fn need_design<'a>(design: &'a Option<LinearDesign>, section: &str) -> Result<&'a LinearDesign> {
    design
        .as_ref()
        .ok_or_else(|| Error::config(0, format!("{section}.kind"), "`design` kind needs a [design] section"))
}

fn build_schedule(cfg: &ScenarioConfig, design: &Option<LinearDesign>) -> Result<SamplingSchedule> {
    let s = "schedule";
    let kind = cfg.require_str(s, "kind")?;
    let t0 = cfg.num(s, "t0", 0.0)?;
    let k_max: usize = cfg.get(s, "k_max")?.unwrap_or(DEFAULT_K_MAX);
    let built = match kind {
        "uniform" => {
            let n: usize = cfg.require(s, "N")?;
            if n == 0 {
                return Err(Error::config(cfg.line_of(s, "N"), "schedule.N", "empty horizon: N must be at least 1"));
            }
            let total: usize = cfg.get(s, "total")?.unwrap_or(n);
            SamplingSchedule::uniform_extended(t0, cfg.require(s, "T")?, n, total)
        }
        "design" => {
            let d = need_design(design, s)?;
            let total: usize = cfg.get(s, "total")?.unwrap_or(d.n);
            SamplingSchedule::uniform_extended(t0, d.inputs.horizon, d.n, total)
        }
        "geometric" => SamplingSchedule::geometric(cfg.require(s, "a")?, k_max),
        "stretched" => SamplingSchedule::stretched(cfg.require(s, "a")?, cfg.require(s, "m")?, k_max),
        "explicit" => {
            let list = cfg.require_str(s, "instants")?;
            let ts: std::result::Result<Vec<f64>, _> = list.split(',').map(|v| v.trim().parse::<f64>()).collect();
            let ts = ts.map_err(|_| Error::config(cfg.line_of(s, "instants"), "schedule.instants", "bad number list"))?;
            SamplingSchedule::explicit(t0, &ts)
        }
        other => {
            return Err(Error::config(
                cfg.line_of(s, "kind"),
                "schedule.kind",
                format!("unknown schedule `{other}` (uniform, design, geometric, stretched, explicit)"),
            ))
        }
    };
    cfg.wrap(s, "kind", built)
}

fn build_plant(cfg: &ScenarioConfig, schedule: &SamplingSchedule, design: &Option<LinearDesign>, seed: u64) -> Result<Box<dyn Plant>> {
    let s = "plant";
    let kind = cfg.require_str(s, "kind")?;
    let b_spec = cfg.get_str(s, "b").unwrap_or("1");
    let profile = || cfg.wrap(s, "b", parse_b_profile(b_spec, seed));
    let plant: Box<dyn Plant> = match kind {
        "affine" => Box::new(AffinePlant::new(cfg.num(s, "f_slope", 0.0)?, cfg.num(s, "f_offset", 0.0)?, profile()?)),
        "envelope" => {
            let mode = cfg.wrap(s, "mode", EnvelopeMode::parse(cfg.get_str(s, "mode").unwrap_or("outward")))?;
            Box::new(EnvelopePlant::new(cfg.psi(s)?, mode, profile()?))
        }
        "worst_case" => match design {
            Some(d) => Box::new(WorstCasePlant::new(d.psi_bar_eps, d.psi_bar_m, d.inputs.eps, d.inputs.b_lower, d.inputs.b_upper)),
            None => Box::new(WorstCasePlant::uniform(
                cfg.require(s, "f_bound")?,
                cfg.require(s, "b_lower")?,
                cfg.require(s, "b_upper")?,
            )),
        },
        "lemma1" => {
            let c = cfg.wrap(s, "c", Lemma1Config::new(cfg.num(s, "b_lower", 1.0)?, cfg.num(s, "c", 3.0)?))?;
            Box::new(Lemma1Adversary::new(c))
        }
        "lemma2" => {
            let cls = class_from(cfg, s)?;
            let c = cfg.wrap(
                s,
                "eps",
                Lemma2Config::for_schedule(&cls, cfg.require(s, "eps")?, cfg.require(s, "M")?, schedule),
            )?;
            let b = match cfg.get_str(s, "b") {
                Some(_) => profile()?,
                None => BProfile::Constant(cls.b_lower),
            };
            Box::new(Lemma2Adversary::new(c, b))
        }
        "lemma3" => {
            let dt = match schedule.kind {
                crate::schedules::ScheduleKind::Uniform { delta } => delta,
                _ => return Err(Error::config(cfg.line_of(s, "kind"), "plant.kind", "lemma3 adversary needs a uniform schedule")),
            };
            let c = cfg.wrap(s, "c", Lemma3Config::new(cfg.psi(s)?, cfg.num(s, "c", 2.0)?, dt))?;
            Box::new(Lemma3Adversary::new(c))
        }
        other => {
            return Err(Error::config(
                cfg.line_of(s, "kind"),
                "plant.kind",
                format!("unknown plant `{other}` (affine, envelope, worst_case, lemma1, lemma2, lemma3)"),
            ))
        }
    };
    Ok(plant)
}

fn build_controller(cfg: &ScenarioConfig, design: &Option<LinearDesign>) -> Result<Box<dyn Controller>> {
    let s = "controller";
    let kind = cfg.require_str(s, "kind")?;
    let ctl: Box<dyn Controller> = match kind {
        "zero" => Box::new(ZeroController),
        "linear" => Box::new(LinearController {
            gain: cfg.require(s, "K")?,
        }),
        "relay" => Box::new(RelayController {
            amplitude: cfg.require(s, "C")?,
        }),
        "composite" => Box::new(CompositeController {
            gain: cfg.require(s, "K")?,
            relay: cfg.require(s, "C")?,
            eps: cfg.require(s, "eps")?,
        }),
        "tv_gain" => Box::new(TimeVaryingGainController {
            amplitude: cfg.num(s, "A", 1.0)?,
            power: cfg.get(s, "m")?.unwrap_or(1),
        }),
        "prescribed" => {
            let section = if cfg.get_str(s, "psi").is_some() { s } else { "plant" };
            let cls = class_from(cfg, section)?;
            let phi = cfg.wrap(s, "T", PhiFunction::new(cfg.num(s, "T", 1.0)?))?;
            Box::new(PrescribedController { class: cls, phi })
        }
        "design" => {
            let d = need_design(design, s)?;
            Box::new(CompositeController {
                gain: d.gain,
                relay: d.relay,
                eps: d.inputs.eps,
            })
        }
        other => {
            return Err(Error::config(
                cfg.line_of(s, "kind"),
                "controller.kind",
                format!("unknown controller `{other}` (zero, linear, relay, composite, tv_gain, prescribed, design)"),
            ))
        }
    };
    Ok(ctl)
}

fn assertions(cfg: &ScenarioConfig, traj: &Trajectory, eps: Option<f64>) -> Result<Vec<Check>> {
    let s = "run";
    let mut checks = Vec::new();
    if cfg.get::<bool>(s, "expect_diverged")? == Some(true) {
        checks.push(Check::new("diverged", traj.final_state().abs(), "overflow flag set", traj.events.diverged));
    }
    if cfg.get::<bool>(s, "expect_nondecreasing")? == Some(true) {
        let bad = traj.steps.windows(2).position(|w| w[1].x.abs() < w[0].x.abs());
        checks.push(
            Check::new("|x_k| nondecreasing", traj.final_state().abs(), "nondecreasing", bad.is_none())
                .with_detail(bad.map_or(String::new(), |k| format!("decrease at k={k}"))),
        );
    }
    if let Some(g) = cfg.get::<f64>(s, "expect_min_growth")? {
        let worst = traj.growth_factors().into_iter().map(|(_, r)| r).fold(f64::INFINITY, f64::min);
        checks.push(Check::at_least("min per-step growth", worst, g * (1.0 - 1e-9)));
    }
    if let Some(n) = cfg.get::<usize>(s, "expect_converged_by")? {
        let at = traj.events.converged_at.map_or(f64::INFINITY, |l| l as f64);
        checks.push(Check::at_most("converged_at", at, n as f64));
    }
    let need_eps = |key: &str| {
        eps.ok_or_else(|| Error::config(cfg.line_of(s, key), format!("{s}.{key}"), "needs run.eps"))
    };
    if let Some(from) = cfg.get::<usize>(s, "expect_tail_within_eps_from")? {
        let e = need_eps("expect_tail_within_eps_from")?;
        let tail = traj.steps.iter().skip(from).map(|st| st.x.abs()).fold(0.0, f64::max);
        checks.push(Check::at_most(format!("max |x_k| for k >= {from}"), tail, e));
    }
    if cfg.get::<bool>(s, "expect_invariant")? == Some(true) {
        let e = need_eps("expect_invariant")?;
        let r = check_invariance(traj, e, 1e-12 * e);
        checks.push(Check::new(
            "|x_k| <= eps => |x_k+1| <= eps",
            r.violations.len() as f64,
            "violations == 0",
            r.passed && r.entered_at.is_some(),
        ));
    }
    Ok(checks)
}

/// Build and run the configured closed loop, then evaluate the `[run]`
/// assertions. Randomized gain profiles are keyed by `run.seed`.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<(Trajectory, Summary)> {
    let seed: u64 = cfg.get("run", "seed")?.unwrap_or(0);
    let design = build_design(cfg)?;
    let schedule = build_schedule(cfg, &design)?;
    let mut plant = build_plant(cfg, &schedule, &design, seed)?;
    let controller = build_controller(cfg, &design)?;
    let x0: f64 = cfg.require("run", "x0")?;
    let eps: Option<f64> = match cfg.get("run", "eps")? {
        Some(e) => Some(e),
        None => design.as_ref().map(|d| d.inputs.eps),
    };
    let opts = SimOptions {
        eps,
        tol: cfg.num("run", "tol", DEFAULT_TOL)?,
        dense_points: cfg.get("run", "dense")?.unwrap_or(0),
        config_hash: Some(cfg.config_hash()),
        ..SimOptions::default()
    };
    let traj = simulate(plant.as_mut(), &schedule, controller.as_ref(), x0, &opts)?;
    let checks = assertions(cfg, &traj, eps)?;
    let summary = Summary {
        id: cfg.get_str("run", "id").unwrap_or("scenario").to_string(),
        config_hash: traj.config_hash.clone(),
        plant: traj.plant_id.clone(),
        controller: traj.controller.clone(),
        schedule: schedule.describe(),
        x0,
        steps: traj.steps.len() - 1,
        final_abs_x: traj.final_state().abs(),
        max_abs_x: traj.xs().map(f64::abs).fold(0.0, f64::max),
        converged_at: traj.events.converged_at,
        diverged: traj.events.diverged,
        overflow: traj.events.overflow,
        truncated: traj.events.truncated,
        design,
        checks,
    };
    Ok((traj, summary))
}

#[cfg(test)]
mod tests {
    use super::*;

    const LEMMA1: &str = "schema = 1
[plant]
kind = lemma1
c = 3
[schedule]
kind = geometric
a = 0.5
k_max = 1000
[controller]
kind = tv_gain
A = 1
m = 1
[run]
x0 = 1
expect_diverged = true
expect_min_growth = 2
";

    const LINEAR: &str = "schema = 1
[design]
b_lower = 1
b_upper = 2
psi = abs
M = 10
eps = 0.1
T = 1
lambda = 0.5
[plant]
kind = worst_case
[schedule]
kind = design
total = 2000
[controller]
kind = design
[run]
x0 = 10
expect_converged_by = 600
expect_invariant = true
";

    #[test]
    fn lemma1_demo_diverges() {
        let cfg: ScenarioConfig = LEMMA1.parse().unwrap();
        let (traj, summary) = run_scenario(&cfg).unwrap();
        assert!(summary.diverged && summary.passed(), "{}", summary.to_report());
        assert!(traj.growth_factors().iter().all(|&(_, g)| g >= 2.0 * (1.0 - 1e-12)));
    }

    #[test]
    fn linear_demo_converges_and_stays() {
        let cfg: ScenarioConfig = LINEAR.parse().unwrap();
        let (_, summary) = run_scenario(&cfg).unwrap();
        assert!(summary.passed(), "{}", summary.to_report());
        assert!(summary.converged_at.unwrap() <= 600);
        assert_eq!(summary.design.unwrap().n, 600);
    }

    #[test]
    fn empty_horizon_rejected() {
        let text = "schema = 1\n[plant]\nkind = affine\n[schedule]\nkind = uniform\nT = 1\nN = 0\n[controller]\nkind = zero\n[run]\nx0 = 1\n";
        let err = run_scenario(&text.parse().unwrap()).unwrap_err();
        assert!(matches!(err, Error::Config { line: 7, .. }), "{err}");
    }

    #[test]
    fn diagnostics_name_line_and_key() {
        let err = ScenarioConfig::parse("schema = 1\n[plant]\nkind = affine\n[bogus]\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 4, ref key, .. } if key == "bogus"));
        let err = ScenarioConfig::parse("schema = 2\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 1, .. }));
        assert!(ScenarioConfig::parse("[plant]\nkind = affine\n").is_err());
        let bad_num = "schema = 1\n[plant]\nkind = affine\n[schedule]\nkind = uniform\nT = x\nN = 4\n[controller]\nkind = zero\n[run]\nx0 = 1\n";
        let err = run_scenario(&bad_num.parse().unwrap()).unwrap_err();
        assert!(matches!(err, Error::Config { line: 6, ref key, .. } if key == "schedule.T"), "{err}");
    }

    #[test]
    fn seeded_runs_are_reproducible() {
        let text = "schema = 1\n[plant]\nkind = affine\nb = rand:1,2\n[schedule]\nkind = uniform\nT = 1\nN = 8\n[controller]\nkind = linear\nK = 3\n[run]\nx0 = 1\nseed = 5\n";
        let mut cfg: ScenarioConfig = text.parse().unwrap();
        let a = run_scenario(&cfg).unwrap().0;
        let b = run_scenario(&cfg).unwrap().0;
        assert_eq!(a, b);
        cfg.set("run", "seed", "6").unwrap();
        let c = run_scenario(&cfg).unwrap().0;
        assert_ne!(a.steps, c.steps);
        assert_ne!(a.config_hash, c.config_hash);
    }
}
