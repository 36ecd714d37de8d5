//! Assertion suites reproducing each growth, contraction and invariance
//! inequality numerically.

use std::fmt;

use crate::adversary::{
    Lemma1Adversary, Lemma1Config, Lemma2Adversary, Lemma2Config, Lemma3Adversary, Lemma3Config,
    DEFAULT_LEMMA1_C,
};
use crate::control::{
    CompositeController, Controller, LinearController, PhiFunction, PrescribedController, TimeVaryingGainController,
    ZeroController,
};
use crate::error::{Error, Result};
use crate::model::{validate_membership, BProfile, Psi, Trajectory, UncertaintyClass, WorstCasePlant};
use crate::runner::{simulate, SimOptions};
use crate::schedules::{example2_ratio, SamplingSchedule, DEFAULT_K_MAX};
use crate::synth::{check_contraction, check_invariance, design_linear, select_delta_lemma4, standard_ensemble};

/// Relative slack on growth inequalities.
pub const GROWTH_REL_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LemmaWhich {
    L1a,
    L1b,
    L1c,
    L2,
    L3,
    L4,
    Linear,
    Invariance,
    Example2,
}

impl LemmaWhich {
    pub const ALL: [LemmaWhich; 9] = [
        LemmaWhich::L1a,
        LemmaWhich::L1b,
        LemmaWhich::L1c,
        LemmaWhich::L2,
        LemmaWhich::L3,
        LemmaWhich::L4,
        LemmaWhich::Linear,
        LemmaWhich::Invariance,
        LemmaWhich::Example2,
    ];

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|w| w.name() == s.trim())
            .ok_or_else(|| Error::invalid(format!("unknown lemma '{s}' (expected one of 1a,1b,1c,2,3,4,linear,invariance,example2)")))
    }

    pub fn name(self) -> &'static str {
        match self {
            LemmaWhich::L1a => "1a",
            LemmaWhich::L1b => "1b",
            LemmaWhich::L1c => "1c",
            LemmaWhich::L2 => "2",
            LemmaWhich::L3 => "3",
            LemmaWhich::L4 => "4",
            LemmaWhich::Linear => "linear",
            LemmaWhich::Invariance => "invariance",
            LemmaWhich::Example2 => "example2",
        }
    }
}

/// Overrides for the suite defaults. Unset fields take the values of the
/// canonical demo for the chosen suite.
#[derive(Clone, Debug, Default)]
pub struct LemmaParams {
    pub a: Option<f64>,
    pub m_power: Option<u32>,
    pub amplitude: Option<f64>,
    pub c: Option<f64>,
    pub steps: Option<usize>,
    pub big_m: Option<f64>,
    pub eps: Option<f64>,
    pub n: Option<usize>,
    pub b_lower: Option<f64>,
    pub b_upper: Option<f64>,
    pub horizon: Option<f64>,
    pub lambda: Option<f64>,
    pub dt: Option<f64>,
    pub x0: Option<f64>,
    pub psi: Option<Psi>,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    /// Human-readable form of the inequality, e.g. `>= 1073741824`.
    pub bound: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, measured: f64, bound: impl Into<String>, passed: bool) -> Self {
        Self {
            name: name.into(),
            measured,
            bound: bound.into(),
            passed,
            detail: String::new(),
        }
    }

    pub fn at_least(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self::new(name, measured, format!(">= {}", fmt_real(bound)), measured >= bound)
    }

    pub fn at_most(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self::new(name, measured, format!("<= {}", fmt_real(bound)), measured <= bound)
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

/// Plain notation for moderate magnitudes, scientific otherwise.
pub fn fmt_real(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-4..1e6).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: measured={} {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            fmt_real(self.measured),
            self.bound
        )?;
        if !self.detail.is_empty() {
            write!(f, " ({})", self.detail)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub which: LemmaWhich,
    pub checks: Vec<Check>,
    /// Derived constants worth reporting (`c`, `D`, `Δ`, ...).
    pub values: Vec<(String, f64)>,
}

impl Verdict {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn value(&mut self, key: &str, v: f64) {
        self.values.push((key.to_string(), v));
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.values {
            writeln!(f, "{k}={}", fmt_real(*v))?;
        }
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        write!(f, "verdict={}", if self.passed() { "PASS" } else { "FAIL" })
    }
}

pub fn run_lemma(which: LemmaWhich, p: &LemmaParams) -> Result<Verdict> {
    let mut v = Verdict {
        which,
        checks: Vec::new(),
        values: Vec::new(),
    };
    match which {
        LemmaWhich::L1a => lemma1a(p, &mut v)?,
        LemmaWhich::L1b => lemma1b(p, &mut v)?,
        LemmaWhich::L1c => lemma1c(p, &mut v)?,
        LemmaWhich::L2 => lemma2(p, &mut v)?,
        LemmaWhich::L3 => lemma3(p, &mut v)?,
        LemmaWhich::L4 => lemma4(p, &mut v)?,
        LemmaWhich::Linear => linear(p, &mut v)?,
        LemmaWhich::Invariance => invariance(p, &mut v)?,
        LemmaWhich::Example2 => example2(p, &mut v)?,
    }
    Ok(v)
}

/// Smallest `|x_{k+1}|/|x_k|` over all recorded steps, ignoring a final
/// overflowed state.
fn min_growth(traj: &Trajectory) -> f64 {
    traj.growth_factors()
        .into_iter()
        .map(|(_, g)| g)
        .fold(f64::INFINITY, f64::min)
}

fn is_nondecreasing(traj: &Trajectory) -> (bool, Option<usize>) {
    let bad = traj.steps.windows(2).position(|w| w[1].x.abs() < w[0].x.abs());
    (bad.is_none(), bad)
}

fn lemma1_run(p: &LemmaParams, controller: &dyn Controller) -> Result<(Trajectory, Lemma1Adversary)> {
    let a = p.a.unwrap_or(0.5);
    let steps = p.steps.unwrap_or(30);
    let cfg = Lemma1Config::new(p.b_lower.unwrap_or(1.0), p.c.unwrap_or(DEFAULT_LEMMA1_C))?;
    let schedule = SamplingSchedule::geometric(a, steps)?;
    let mut plant = Lemma1Adversary::new(cfg);
    let traj = simulate(&mut plant, &schedule, controller, p.x0.unwrap_or(1.0), &SimOptions::default())?;
    Ok((traj, plant))
}

fn example1_controller(p: &LemmaParams) -> TimeVaryingGainController {
    TimeVaryingGainController {
        amplitude: p.amplitude.unwrap_or(1.0),
        power: p.m_power.unwrap_or(1),
    }
}

fn lemma1a(p: &LemmaParams, v: &mut Verdict) -> Result<()> {
    let controllers: Vec<Box<dyn Controller>> = vec![
        Box::new(ZeroController),
        Box::new(LinearController { gain: 10.0 }),
        Box::new(example1_controller(p)),
    ];
    let unbounded = UncertaintyClass::new(p.b_lower.unwrap_or(1.0), None, Psi::Zero)?;
    for ctl in &controllers {
        let (traj, plant) = lemma1_run(p, ctl.as_ref())?;
        let (ok, bad) = is_nondecreasing(&traj);
        let last = traj.final_state().abs();
        v.checks.push(
            Check::new(format!("|x_k| nondecreasing [{}]", ctl.label()), last, "nondecreasing", ok)
                .with_detail(bad.map_or("".into(), |k| format!("decrease at k={k}"))),
        );
        let member = validate_membership(&plant, &unbounded, &traj)?;
        v.checks.push(Check::new(
            format!("membership, unbounded b [{}]", ctl.label()),
            member.steps.len() as f64,
            "all steps admissible",
            member.passed,
        ));
    }
    Ok(())
}

fn lemma1b(p: &LemmaParams, v: &mut Verdict) -> Result<()> {
    let c = p.c.unwrap_or(DEFAULT_LEMMA1_C);
    let ctl = example1_controller(p);
    let (traj, _) = lemma1_run(p, &ctl)?;
    let x0 = traj.steps[0].x.abs();
    let k = traj.steps.len() - 1;
    let (ok, _) = is_nondecreasing(&traj);
    v.checks.push(Check::new("|x_k| nondecreasing", traj.final_state().abs(), "nondecreasing", ok));
    v.checks.push(Check::at_least(
        "min per-step growth",
        min_growth(&traj),
        (c - 1.0) * (1.0 - GROWTH_REL_TOL),
    ));
    v.checks.push(
        Check::at_least(
            format!("|x_{k}|/|x_0|"),
            traj.final_state().abs() / x0,
            (c - 1.0).powi(k as i32) * (1.0 - GROWTH_REL_TOL),
        )
        .with_detail(format!("(c-1)^{k}")),
    );
    Ok(())
}

fn lemma1c(p: &LemmaParams, v: &mut Verdict) -> Result<()> {
    let c = p.c.unwrap_or(DEFAULT_LEMMA1_C);
    let b_upper = p.b_upper.unwrap_or(10.0);
    let p = LemmaParams {
        m_power: Some(p.m_power.unwrap_or(2)),
        steps: Some(p.steps.unwrap_or(DEFAULT_K_MAX)),
        ..p.clone()
    };
    let ctl = example1_controller(&p);
    let (traj, _) = lemma1_run(&p, &ctl)?;
    let holds: Vec<(usize, bool, f64)> = traj
        .steps
        .iter()
        .filter_map(|s| {
            s.hold
                .map(|h| (s.k, h.u.abs() >= c * s.x.abs() / (b_upper * h.dt), h.b))
        })
        .collect();
    // First index from which the large-control condition holds for good.
    let k0 = holds
        .iter()
        .rposition(|&(_, ok, _)| !ok)
        .map_or(0, |i| holds[i].0 + 1);
    v.value("k0", k0 as f64);
    v.checks.push(Check::at_most("k0 with |u_k| >= c|x_k|/(b_upper dt_k) for all k >= k0", k0 as f64, 10.0));
    let b_max = holds
        .iter()
        .filter(|h| h.0 >= k0)
        .map(|h| h.2)
        .fold(0.0, f64::max);
    v.checks.push(Check::at_most("max realized b_k for k >= k0", b_max, b_upper));
    v.checks.push(Check::new(
        "divergence (overflow)",
        traj.final_state().abs(),
        "overflow flag set",
        traj.events.overflow,
    ));
    Ok(())
}

fn lemma2(p: &LemmaParams, v: &mut Verdict) -> Result<()> {
    let eps = p.eps.unwrap_or(1.0);
    let m = p.big_m.unwrap_or(32.0);
    let n = p.n.unwrap_or(5);
    let horizon = p.horizon.unwrap_or(1.0);
    let (lo, hi) = (p.b_lower.unwrap_or(1.0), p.b_upper.unwrap_or(2.0));
    let seed = p.seed.unwrap_or(7);
    let x0 = p.x0.unwrap_or(eps);
    let cls = UncertaintyClass::bounded(lo, hi, p.psi.clone().unwrap_or(Psi::Abs))?;
    let schedule = SamplingSchedule::uniform(0.0, horizon, n)?;
    let cfg = Lemma2Config::for_schedule(&cls, eps, m, &schedule)?;
    v.value("a", cfg.a);
    v.value("c", cfg.c);
    v.value("D", cfg.d_max);
    let realized = cfg.realized_class(&cls);
    let phi = PhiFunction::new(horizon)?;
    let profiles = [
        BProfile::Constant(lo),
        BProfile::Constant(hi),
        BProfile::Alternating { lo, hi },
        BProfile::Random { lo, hi, seed },
    ];
    let controllers: Vec<Box<dyn Controller>> = vec![
        Box::new(ZeroController),
        Box::new(LinearController { gain: 1e3 }),
        Box::new(PrescribedController {
            class: cls.clone(),
            phi,
        }),
    ];
    let target = cfg.c.powi(n as i32) * x0.abs();
    for b in &profiles {
        for ctl in &controllers {
            let tag = format!("{} {}", b.label(), ctl.label());
            let mut plant = Lemma2Adversary::new(cfg, b.clone());
            let traj = simulate(&mut plant, &schedule, ctl.as_ref(), x0, &SimOptions::default())?;
            v.checks.push(Check::at_least(
                format!("min per-step growth [{tag}]"),
                min_growth(&traj),
                cfg.c * (1.0 - GROWTH_REL_TOL),
            ));
            v.checks.push(Check::at_least(
                format!("|x_{n}| [{tag}]"),
                traj.final_state().abs(),
                (target * (1.0 - GROWTH_REL_TOL)).min(m * (1.0 - GROWTH_REL_TOL)),
            ));
            let member = validate_membership(&plant, &realized, &traj)?;
            let d_max = plant.drift_scales().iter().copied().fold(0.0, f64::max);
            v.checks.push(
                Check::new(format!("membership [{tag}]"), d_max, format!("d_k <= D = {}", cfg.d_max), member.passed && d_max <= cfg.d_max)
                    .with_detail(member.first_violation().map_or(String::new(), |s| format!("violation at k={}", s.k))),
            );
        }
    }
    Ok(())
}

fn lemma3(p: &LemmaParams, v: &mut Verdict) -> Result<()> {
    let c = p.c.unwrap_or(2.0);
    let dt = p.dt.unwrap_or(0.1);
    let psi = p.psi.clone().unwrap_or(Psi::Square);
    let x0 = p.x0.unwrap_or(60.0);
    let cfg = Lemma3Config::new(psi.clone(), c, dt)?;
    v.value("M_threshold", cfg.m_threshold);
    let cls = UncertaintyClass::bounded(1.0, 1.0, psi)?;
    let steps = p.steps.unwrap_or(1000);
    let schedule = SamplingSchedule::uniform_extended(0.0, dt, 1, steps)?;
    for gain in [0.0, 10.0, 1e3] {
        let ctl = LinearController { gain };
        let mut plant = Lemma3Adversary::new(cfg.clone());
        let traj = simulate(&mut plant, &schedule, &ctl, x0, &SimOptions::default())?;
        let above: Vec<f64> = traj
            .growth_factors()
            .into_iter()
            .filter(|&(k, _)| traj.steps[k].x.abs() >= cfg.m_threshold)
            .map(|(_, g)| g)
            .collect();
        let worst = above.iter().copied().fold(f64::INFINITY, f64::min);
        v.checks.push(
            Check::at_least(format!("min growth above threshold [K={gain}]"), worst, c * (1.0 - GROWTH_REL_TOL))
                .with_detail(format!("{} steps", above.len())),
        );
        v.checks.push(Check::new(
            format!("overflow reached [K={gain}]"),
            traj.steps.len() as f64,
            "overflow flag set",
            traj.events.overflow,
        ));
        let member = validate_membership(&plant, &cls, &traj)?;
        v.checks.push(Check::new(
            format!("membership [K={gain}]"),
            member.steps.len() as f64,
            "all steps admissible",
            member.passed,
        ));
    }
    Ok(())
}

fn lemma4(p: &LemmaParams, v: &mut Verdict) -> Result<()> {
    let cls = UncertaintyClass::bounded(
        p.b_lower.unwrap_or(1.0),
        p.b_upper.unwrap_or(2.0),
        p.psi.clone().unwrap_or(Psi::Abs),
    )?;
    let m = p.big_m.unwrap_or(10.0);
    let eps = p.eps.unwrap_or(0.01);
    let horizon = p.horizon.unwrap_or(1.0);
    let phi = PhiFunction::new(horizon)?;
    let ensemble = standard_ensemble(&cls, m, p.seed.unwrap_or(1))?;
    match select_delta_lemma4(&cls, &phi, m, eps, horizon, &ensemble) {
        Ok(sel) => {
            v.value("Q", sel.q.value);
            v.value("delta0", sel.delta0);
            v.value("delta", sel.delta);
            v.value("N", sel.n as f64);
            v.value("halvings", f64::from(sel.halvings));
            for r in &sel.runs {
                v.checks.push(Check::at_most(format!("max |x_k| for k >= N [{}]", r.label), r.tail_max, eps));
            }
        }
        Err(Error::DeltaUnderflow { floor, plant }) => {
            v.checks.push(
                Check::new("period search", floor, "finds passing period", false)
                    .with_detail(format!("underflow; failing plant {plant}")),
            );
        }
        Err(e) => return Err(e),
    }
    Ok(())
}

fn linear_class(p: &LemmaParams) -> Result<UncertaintyClass> {
    UncertaintyClass::bounded(
        p.b_lower.unwrap_or(1.0),
        p.b_upper.unwrap_or(2.0),
        p.psi.clone().unwrap_or(Psi::Abs),
    )
}

fn linear(p: &LemmaParams, v: &mut Verdict) -> Result<()> {
    let cls = linear_class(p)?;
    let m = p.big_m.unwrap_or(10.0);
    let eps = p.eps.unwrap_or(0.1);
    let d = design_linear(&cls, m, eps, p.horizon.unwrap_or(1.0), Some(p.lambda.unwrap_or(0.5)))?;
    v.value("lambda", d.lambda);
    v.value("delta", d.delta);
    v.value("N", d.n as f64);
    v.value("K", d.gain);
    v.value("C", d.relay);
    v.value("delta_inv", d.delta_inv);
    let bad = d.violations();
    v.checks.push(Check::new("design invariants", bad.len() as f64, "== 0", bad.is_empty()).with_detail(bad.join(", ")));
    let schedule = SamplingSchedule::uniform(0.0, d.inputs.horizon, d.n)?;
    let ctl = LinearController { gain: d.gain };
    for x0 in [m, -m] {
        let mut plant = WorstCasePlant::uniform(d.psi_bar_m, d.inputs.b_lower, d.inputs.b_upper);
        let traj = simulate(&mut plant, &schedule, &ctl, p.x0.unwrap_or(x0), &SimOptions::with_eps(eps))?;
        let report = check_contraction(&traj, d.lambda, eps, d.n, 1e-9);
        v.checks.push(
            Check::new(
                format!("|x_k+1| <= lambda|x_k| + 1e-9 while |x_k| >= eps [x0={x0}]"),
                report.max_ratio,
                format!("violations == 0 (lambda = {})", d.lambda),
                report.violations.is_empty(),
            )
            .with_detail(format!("{} violations", report.violations.len())),
        );
        v.checks.push(Check::at_most(
            format!("entry index l [x0={x0}]"),
            report.entered_at.map_or(f64::INFINITY, |l| l as f64),
            d.n as f64,
        ));
    }
    Ok(())
}

/// Rounding slack on `|x| ≤ ε` at the exact boundary case `b̲C = ψ̄_ε`.
pub const INVARIANCE_SLACK_REL: f64 = 1e-12;

fn invariance(p: &LemmaParams, v: &mut Verdict) -> Result<()> {
    let cls = linear_class(p)?;
    let m = p.big_m.unwrap_or(10.0);
    let eps = p.eps.unwrap_or(0.1);
    let d = design_linear(&cls, m, eps, p.horizon.unwrap_or(1.0), Some(p.lambda.unwrap_or(0.5)))?;
    let steps = p.steps.unwrap_or(10_000);
    v.value("delta", d.delta);
    v.value("delta_inv", d.delta_inv);
    v.checks.push(Check::at_most("delta", d.delta, d.delta_inv));
    let schedule = SamplingSchedule::uniform_extended(0.0, d.inputs.horizon, d.n, steps)?;
    let ctl = CompositeController {
        gain: d.gain,
        relay: d.relay,
        eps,
    };
    for x0 in [m, -m, eps, 0.0] {
        let x0 = p.x0.unwrap_or(x0);
        let mut plant = WorstCasePlant::new(d.psi_bar_eps, d.psi_bar_m, eps, d.inputs.b_lower, d.inputs.b_upper);
        let traj = simulate(&mut plant, &schedule, &ctl, x0, &SimOptions::with_eps(eps))?;
        let report = check_invariance(&traj, eps, INVARIANCE_SLACK_REL * eps);
        v.checks.push(
            Check::at_most(
                format!("max |x_k| after entry [x0={x0}]"),
                report.max_after_entry,
                eps * (1.0 + INVARIANCE_SLACK_REL),
            )
            .with_detail(format!("entry at {:?}, {} steps", report.entered_at, traj.steps.len() - 1)),
        );
        v.checks.push(Check::new(
            format!("|x_k| <= eps => |x_k+1| <= eps [x0={x0}]"),
            report.violations.len() as f64,
            "violations == 0",
            report.passed && report.entered_at.is_some(),
        ));
    }
    Ok(())
}

fn example2(p: &LemmaParams, v: &mut Verdict) -> Result<()> {
    let pairs: Vec<(f64, u32)> = match (p.a, p.m_power) {
        (Some(a), Some(m)) => vec![(a, m)],
        (Some(a), None) => (1..=3).map(|m| (a, m)).collect(),
        (None, Some(m)) => [0.3, 0.5, 0.9].into_iter().map(|a| (a, m)).collect(),
        (None, None) => [0.3, 0.5, 0.9]
            .into_iter()
            .flat_map(|a| (1..=3).map(move |m| (a, m)))
            .collect(),
    };
    let k_end = p.steps.map_or(1_000_000, |s| s as u64);
    for (a, m) in pairs {
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::invalid(format!("ratio a must lie in (0, 1), got {a}")));
        }
        let r = example2_ratio(a, m, k_end);
        let earlier = example2_ratio(a, m, k_end / 100);
        v.checks.push(
            Check::new(
                format!("ratio(a={a},m={m},k={k_end})"),
                r,
                "< 0.001 and decreasing",
                r < 1e-3 && r < earlier,
            )
            .with_detail(format!("ratio at k={} is {earlier}", k_end / 100)),
        );
    }
    Ok(())
}
