//! Stateful worst-case plants.
//!
//! Each adversary commits constant data per hold interval as a function of
//! the observed state and the held control:
//!
//! * unbounded input gain (`f ≡ 0`, `b_k` sized against `ū_k`): the state
//!   never shrinks and grows by at least `c − 1` whenever `ū_k ≠ 0`;
//! * unknown drift scale (`f = d_k·a·x`, `d_k ∈ [0, D]`): `|x|` grows by `c`
//!   per interval for every admissible constant `b`;
//! * superlinear drift under a fixed period (`b ≡ 1`, `f ∈ {0, ψ(x_k)sign(x_k)}`):
//!   growth by `c` once `|x_k|` passes a threshold.

use crate::error::{Error, Result};
use crate::integrate::step_affine;
use crate::model::{BProfile, IntervalContext, Plant, Psi, Realization, UncertaintyClass};
use crate::numeric::{golden_max, sign0};
use crate::schedules::SamplingSchedule;

/// Default growth constant of the unbounded-gain adversary (must exceed 2).
pub const DEFAULT_LEMMA1_C: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lemma1Config {
    pub b_lower: f64,
    pub c: f64,
}

impl Lemma1Config {
    pub fn new(b_lower: f64, c: f64) -> Result<Self> {
        if !(c > 2.0) {
            return Err(Error::invalid(format!("growth constant c must exceed 2, got {c}")));
        }
        if !(b_lower > 0.0) {
            return Err(Error::invalid("b_lower must be positive"));
        }
        Ok(Self { b_lower, c })
    }
}

/// `b_k = max{b̲, c|x_k|/(|ū_k|Δ_k)}` if `ū_k ≠ 0`, else `b̲`.
pub fn lemma1_b(x: f64, u: f64, dt: f64, b_lower: f64, c: f64) -> f64 {
    if u == 0.0 {
        b_lower
    } else {
        b_lower.max(c * x.abs() / (u.abs() * dt))
    }
}

/// Closed form `x_{k+1} = x_k + max{Δ_k b̲|ū_k|, c|x_k|}·sign(ū_k)` (or `x_k`
/// when `ū_k = 0`).
pub fn lemma1_step(x: f64, u: f64, dt: f64, b_lower: f64, c: f64) -> f64 {
    if u == 0.0 {
        x
    } else {
        x + (dt * b_lower * u.abs()).max(c * x.abs()) * sign0(u)
    }
}

#[derive(Clone, Debug)]
pub struct Lemma1Adversary {
    id: String,
    pub config: Lemma1Config,
}

impl Lemma1Adversary {
    pub fn new(config: Lemma1Config) -> Self {
        Self {
            id: format!("lemma1(b_lower={},c={})", config.b_lower, config.c),
            config,
        }
    }
}

impl Plant for Lemma1Adversary {
    fn id(&self) -> &str {
        &self.id
    }

    fn realize(&mut self, ctx: &IntervalContext) -> Result<Realization> {
        let b = lemma1_b(ctx.x, ctx.u, ctx.dt, self.config.b_lower, self.config.c);
        Ok(Realization::constant(0.0, b))
    }
}

/// `inf_{|s| ≥ ε} ψ(s)/|s|`: closed form for registry envelopes, otherwise a
/// log-spaced grid over `|s| ∈ [ε, 10¹²ε]` refined by golden section.
pub fn linear_growth_floor(psi: &Psi, eps: f64) -> f64 {
    if let Some(a) = psi.growth_floor_exact(eps) {
        return a;
    }
    let ratio = |s: f64| psi.eval(s) / s.abs();
    let (lo, hi) = (eps.ln(), (eps * 1e12).ln());
    let n = 4000;
    let mut best = (f64::INFINITY, 0.0, 1.0);
    for sgn in [1.0, -1.0] {
        for i in 0..=n {
            let l = lo + (hi - lo) * i as f64 / n as f64;
            let v = ratio(sgn * l.exp());
            if v < best.0 {
                best = (v, l, sgn);
            }
        }
    }
    let (_, l, sgn) = best;
    let h = (hi - lo) / n as f64;
    let (_, neg) = golden_max(|l| -ratio(sgn * l.exp()), (l - h).max(lo), (l + h).min(hi), 200);
    best.0.min(-neg)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lemma2Config {
    /// `a = inf_{|s|≥ε} ψ(s)/|s|`.
    pub a: f64,
    /// `c = max{1, (M/ε)^{1/N}}`.
    pub c: f64,
    /// `D = (1/(aΔ̲))·max{2(1+c)b̄/b̲, ln(1+2(c−1))}`.
    pub d_max: f64,
    pub eps: f64,
    pub m: f64,
    pub b_lower: f64,
    pub b_upper: f64,
    /// `Δ̲`, the smallest hold interval before the deadline.
    pub min_dt: f64,
    pub n: usize,
}

impl Lemma2Config {
    pub fn new(cls: &UncertaintyClass, eps: f64, m: f64, n: usize, min_dt: f64) -> Result<Self> {
        let b_upper = cls
            .b_upper
            .ok_or_else(|| Error::invalid("drift adversary needs a bounded input gain class"))?;
        if !(eps > 0.0 && m > 0.0) {
            return Err(Error::invalid("eps and M must be positive"));
        }
        if n == 0 || !(min_dt > 0.0) {
            return Err(Error::invalid("need at least one positive sampling interval"));
        }
        let a = linear_growth_floor(&cls.psi, eps);
        if !(a > 0.0) {
            return Err(Error::invalid(format!(
                "inf over |s| >= eps of psi(s)/|s| must be positive; got {a} for psi = {}",
                cls.psi.name()
            )));
        }
        let c = 1f64.max((m / eps).powf(1.0 / n as f64));
        let d_max = drift_scale(a, min_dt, c, cls.b_lower, b_upper);
        Ok(Self {
            a,
            c,
            d_max,
            eps,
            m,
            b_lower: cls.b_lower,
            b_upper,
            min_dt,
            n,
        })
    }

    /// Configuration for the finite schedule's first `N` intervals.
    pub fn for_schedule(cls: &UncertaintyClass, eps: f64, m: f64, schedule: &SamplingSchedule) -> Result<Self> {
        let n = schedule
            .deadline_index()
            .ok_or_else(|| Error::invalid("drift adversary needs a finite schedule"))?;
        let min_dt = schedule.increments()[..n].iter().copied().fold(f64::INFINITY, f64::min);
        Self::new(cls, eps, m, n, min_dt)
    }

    /// Class of the realized drift, `|f| ≤ D·ψ(x)`.
    pub fn realized_class(&self, cls: &UncertaintyClass) -> UncertaintyClass {
        cls.with_psi(cls.psi.clone().scaled(self.d_max))
    }
}

fn drift_scale(a: f64, dt: f64, c: f64, b_lower: f64, b_upper: f64) -> f64 {
    let lead = 2.0 * (1.0 + c) * b_upper / b_lower;
    let log_term = (2.0 * (c - 1.0)).ln_1p();
    lead.max(log_term) / (a * dt)
}

/// Per-interval drift scale `d_k`: `0` when `q̲_k = b̲Δ_kū_k/x_k ≤ −(1+c)`
/// (the control alone overshoots by `c`), otherwise the value making the
/// exponential drift win within the interval.
pub fn lemma2_d(x: f64, u: f64, dt: f64, cfg: &Lemma2Config) -> Result<f64> {
    if x == 0.0 {
        return Err(Error::AdversaryInapplicable {
            step: 0,
            reason: "state is zero".into(),
        });
    }
    let q_lower = cfg.b_lower * dt * u / x;
    if q_lower <= -(1.0 + cfg.c) {
        Ok(0.0)
    } else {
        Ok(drift_scale(cfg.a, dt, cfg.c, cfg.b_lower, cfg.b_upper))
    }
}

/// Smallest `|x_{k+1}|/|x_k|` over every constant `b ∈ [b̲, b̄]` once `d_k`
/// is committed. `x_{k+1}` is affine in `b`, so the endpoints decide.
pub fn lemma2_min_growth(x: f64, u: f64, dt: f64, cfg: &Lemma2Config) -> Result<f64> {
    let d = lemma2_d(x, u, dt, cfg)?;
    let alpha = cfg.a * d;
    let lo = step_affine(x, alpha, cfg.b_lower * u, dt);
    let hi = step_affine(x, alpha, cfg.b_upper * u, dt);
    if lo * hi <= 0.0 {
        return Ok(0.0);
    }
    Ok(lo.abs().min(hi.abs()) / x.abs())
}

/// Drift adversary with a chosen admissible gain sequence.
#[derive(Clone, Debug)]
pub struct Lemma2Adversary {
    id: String,
    pub config: Lemma2Config,
    pub b: BProfile,
    committed: Vec<f64>,
}

impl Lemma2Adversary {
    pub fn new(config: Lemma2Config, b: BProfile) -> Self {
        Self {
            id: format!("lemma2(a={},c={},D={},{})", config.a, config.c, config.d_max, b.label()),
            config,
            b,
            committed: Vec::new(),
        }
    }

    /// `d_k` committed on each interval so far.
    pub fn drift_scales(&self) -> &[f64] {
        &self.committed
    }
}

impl Plant for Lemma2Adversary {
    fn id(&self) -> &str {
        &self.id
    }

    fn realize(&mut self, ctx: &IntervalContext) -> Result<Realization> {
        let b = self.b.at(ctx.k);
        // Inactive inside the ball; in case 2 the state never re-enters it
        // within the interval, so the affine form holds on the whole interval.
        let d = if ctx.x.abs() < self.config.eps {
            0.0
        } else {
            lemma2_d(ctx.x, ctx.u, ctx.dt, &self.config).map_err(|e| match e {
                Error::AdversaryInapplicable { reason, .. } => Error::AdversaryInapplicable { step: ctx.k, reason },
                other => other,
            })?
        };
        self.committed.push(d);
        Ok(Realization::Affine {
            f_slope: self.config.a * d,
            f_offset: 0.0,
            b,
        })
    }
}

/// Least `r` with `min(ψ(r), ψ(−r))/r ≥ slope` on a log grid over `[r, 10⁶r]`
/// (and, by the superlinearity assumption, beyond).
pub fn superlinear_threshold(psi: &Psi, slope: f64) -> Result<f64> {
    if let Some(r) = psi.superlinear_threshold_exact(slope) {
        return Ok(r);
    }
    let g = |r: f64| psi.eval(r).min(psi.eval(-r)) / r;
    let mut hi = 1.0;
    'outer: loop {
        while g(hi) < slope {
            hi *= 2.0;
            if hi > 1e150 {
                return Err(Error::invalid(format!(
                    "psi = {} does not reach slope {slope}; it must be superlinear",
                    psi.name()
                )));
            }
        }
        for i in 1..=400 {
            let r = hi * 10f64.powf(6.0 * i as f64 / 400.0);
            if g(r) < slope {
                hi = r * 2.0;
                continue 'outer;
            }
        }
        break;
    }
    let mut lo = hi / 2.0;
    while lo > 1e-300 && g(lo) >= slope {
        hi = lo;
        lo /= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) >= slope {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[derive(Clone, Debug)]
pub struct Lemma3Config {
    pub c: f64,
    pub dt: f64,
    /// `M` with `ψ(x)/|x| ≥ (1+2c)/Δ` for all `|x| ≥ M`.
    pub m_threshold: f64,
    pub psi: Psi,
}

impl Lemma3Config {
    pub fn new(psi: Psi, c: f64, dt: f64) -> Result<Self> {
        if !(c >= 1.0) {
            return Err(Error::invalid(format!("growth constant c must be >= 1, got {c}")));
        }
        if !(dt > 0.0) {
            return Err(Error::invalid("sampling period must be positive"));
        }
        let m_threshold = superlinear_threshold(&psi, (1.0 + 2.0 * c) / dt)?;
        Ok(Self { c, dt, m_threshold, psi })
    }
}

/// `f_k = 0` below the threshold or when `|ū_k| ≥ (1+c)|x_k|/Δ`, otherwise
/// `ψ(x_k)·sign(x_k)`.
pub fn lemma3_f(x: f64, u: f64, dt: f64, cfg: &Lemma3Config) -> f64 {
    if x.abs() < cfg.m_threshold || u.abs() >= (1.0 + cfg.c) * x.abs() / dt {
        0.0
    } else {
        cfg.psi.eval(x) * sign0(x)
    }
}

/// Superlinear-drift adversary; input gain fixed at 1.
#[derive(Clone, Debug)]
pub struct Lemma3Adversary {
    id: String,
    pub config: Lemma3Config,
}

impl Lemma3Adversary {
    pub fn new(config: Lemma3Config) -> Self {
        Self {
            id: format!("lemma3(psi={},c={},M={})", config.psi.name(), config.c, config.m_threshold),
            config,
        }
    }
}

impl Plant for Lemma3Adversary {
    fn id(&self) -> &str {
        &self.id
    }

    fn realize(&mut self, ctx: &IntervalContext) -> Result<Realization> {
        Ok(Realization::constant(lemma3_f(ctx.x, ctx.u, ctx.dt, &self.config), 1.0))
    }
}

/// Any of the three adversaries, by configuration.
#[derive(Clone, Debug)]
pub enum AdversaryConfig {
    Lemma1(Lemma1Config),
    Lemma2(Lemma2Config),
    Lemma3(Lemma3Config),
}

impl AdversaryConfig {
    /// Fresh plant; `b` is only used by the drift adversary.
    pub fn build(&self, b: BProfile) -> Box<dyn Plant> {
        match self {
            AdversaryConfig::Lemma1(c) => Box::new(Lemma1Adversary::new(*c)),
            AdversaryConfig::Lemma2(c) => Box::new(Lemma2Adversary::new(*c, b)),
            AdversaryConfig::Lemma3(c) => Box::new(Lemma3Adversary::new(c.clone())),
        }
    }
}
