//! Gain and period synthesis.
//!
//! [`design_linear`] computes the linear-gain plus relay design for known
//! bounds `(b̲, b̄, ψ)` and an initial-condition bound `M`;
//! [`check_contraction`] and [`check_invariance`] verify its two guarantees
//! on a simulated trajectory. [`select_delta_lemma4`] searches a sampling
//! period for the non-Lipschitz prescribed-time law by ensemble simulation,
//! starting from the period implied by the inclusion bound `Q_{M,δ}`.

use std::collections::VecDeque;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::control::{psi_bar, PhiFunction, PrescribedController};
use crate::error::{Error, Result};
use crate::model::{BProfile, EnvelopeMode, EnvelopePlant, Plant, Trajectory, UncertaintyClass};
use crate::runner::{simulate, SimOptions};
use crate::schedules::SamplingSchedule;

/// Relative slack when re-checking design inequalities that hold with
/// equality in exact arithmetic.
pub const DESIGN_REL_TOL: f64 = 1e-9;

/// `N = ⌈T/bound⌉`, treating values within `10⁻⁹` of an integer as that integer.
fn steps_for(horizon: f64, bound: f64) -> usize {
    let ratio = horizon / bound;
    let nearest = ratio.round();
    let n = if (ratio - nearest).abs() <= 1e-9 * ratio.max(1.0) {
        nearest
    } else {
        ratio.ceil()
    };
    n.max(1.0) as usize
}

#[derive(Clone, Debug, PartialEq)]
pub struct DesignInputs {
    pub b_lower: f64,
    pub b_upper: f64,
    pub psi: String,
    pub m: f64,
    pub eps: f64,
    pub horizon: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearDesign {
    pub lambda: f64,
    /// Sampling period `Δ = T/N`.
    pub delta: f64,
    pub n: usize,
    /// Linear gain `K`, at the lower end of its admissible interval.
    pub gain: f64,
    /// Upper end of the admissible gain interval.
    pub gain_upper: f64,
    /// Relay amplitude `C = ψ̄_ε/b̲`.
    pub relay: f64,
    /// Largest period keeping `|x| ≤ ε` invariant under the relay.
    pub delta_inv: f64,
    pub psi_bar_m: f64,
    pub psi_bar_eps: f64,
    /// Period bound before rounding to an integer step count.
    pub delta_bound: f64,
    /// Grid spacing of the `ψ̄` evaluations, `0` when exact.
    pub psi_resolution: f64,
    pub inputs: DesignInputs,
}

impl LinearDesign {
    /// `(b̄−b̲)/(b̄+b̲)`, the least admissible contraction factor.
    pub fn gain_spread(&self) -> f64 {
        let DesignInputs { b_lower, b_upper, .. } = self.inputs;
        (b_upper - b_lower) / (b_upper + b_lower)
    }

    pub fn gain_slack(&self) -> f64 {
        self.gain_upper - self.gain
    }

    /// Width of the admissible gain interval,
    /// `((1+λ)/Δ − ψ̄_M/ε)/b̄ − ((1−λ)/Δ + ψ̄_M/ε)/b̲`.
    pub fn gain_interval_width(&self) -> f64 {
        let DesignInputs { b_lower, b_upper, eps, .. } = self.inputs;
        let drift = self.psi_bar_m / eps;
        ((1.0 + self.lambda) / self.delta - drift) / b_upper - ((1.0 - self.lambda) / self.delta + drift) / b_lower
    }

    pub fn relay_invariance_holds(&self) -> bool {
        self.delta <= self.delta_inv * (1.0 + DESIGN_REL_TOL)
    }

    /// Re-derive every design inequality from the inputs. Returns the names
    /// of the violated ones.
    pub fn violations(&self) -> Vec<&'static str> {
        let DesignInputs {
            b_lower,
            b_upper,
            m,
            eps,
            horizon,
            ..
        } = self.inputs;
        let tol = DESIGN_REL_TOL;
        let spread = self.gain_spread();
        let mut bad = Vec::new();
        if !(spread < self.lambda && self.lambda < 1.0) {
            bad.push("lambda range");
        }
        let bound1 = if self.psi_bar_m == 0.0 {
            f64::INFINITY
        } else {
            (self.lambda - spread) / (self.psi_bar_m / eps)
        };
        let bound2 = horizon * (1.0 / self.lambda).ln() / (m / eps).ln();
        if self.delta > bound1.min(bound2) * (1.0 + tol) {
            bad.push("period bound");
        }
        if ((self.n as f64) * self.delta - horizon).abs() > tol * horizon {
            bad.push("integer step count");
        }
        let k_lo = ((1.0 - self.lambda) / self.delta + self.psi_bar_m / eps) / b_lower;
        let k_hi = ((1.0 + self.lambda) / self.delta - self.psi_bar_m / eps) / b_upper;
        if self.gain < k_lo * (1.0 - tol) || self.gain > k_hi + tol * k_hi.abs().max(k_lo) {
            bad.push("gain interval");
        }
        if self.gain_interval_width() < -tol * k_lo {
            bad.push("gain interval width");
        }
        if ((self.relay - self.psi_bar_eps / b_lower).abs()) > tol * self.relay.max(1e-300) {
            bad.push("relay amplitude");
        }
        let d_inv = if self.psi_bar_eps == 0.0 {
            f64::INFINITY
        } else {
            eps * b_lower / ((b_lower + b_upper) * self.psi_bar_eps)
        };
        if d_inv.is_finite() && (self.delta_inv - d_inv).abs() > tol * d_inv {
            bad.push("invariance period");
        }
        bad
    }
}

/// Linear gain `K`, uniform period `Δ` and relay `C` for states starting in
/// `|x| ≤ M` to reach `|x| ≤ ε` by the deadline `T` and stay there.
///
/// `λ` defaults to the midpoint of `((b̄−b̲)/(b̄+b̲), 1)`. The period is the
/// largest `T/N` not exceeding the bound; `ψ̄_M = 0` leaves only the
/// step-count bound.
pub fn design_linear(cls: &UncertaintyClass, m: f64, eps: f64, horizon: f64, lambda: Option<f64>) -> Result<LinearDesign> {
    let b_lower = cls.b_lower;
    let b_upper = cls
        .b_upper
        .ok_or_else(|| Error::Infeasible("input gain must be bounded above".into()))?;
    if !(eps > 0.0) {
        return Err(Error::Infeasible(format!("eps must be positive, got {eps}")));
    }
    if !(eps < m) {
        return Err(Error::Infeasible(format!("eps >= M ({eps} >= {m})")));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::Infeasible(format!("horizon must be positive, got {horizon}")));
    }
    let spread = (b_upper - b_lower) / (b_upper + b_lower);
    let lambda = lambda.unwrap_or(0.5 * (spread + 1.0));
    if !(spread < lambda && lambda < 1.0) {
        return Err(Error::Infeasible(format!(
            "lambda must lie in ({spread}, 1), got {lambda}"
        )));
    }
    let bar_m = psi_bar(cls, m, 1);
    let bar_eps = psi_bar(cls, eps, 1);
    let psi_bar_m = bar_m.value;
    let psi_bar_eps = bar_eps.value;
    let bound1 = if psi_bar_m == 0.0 {
        f64::INFINITY
    } else {
        (lambda - spread) / (psi_bar_m / eps)
    };
    let bound2 = horizon * (1.0 / lambda).ln() / (m / eps).ln();
    let delta_bound = bound1.min(bound2);
    let n = steps_for(horizon, delta_bound);
    let delta = horizon / n as f64;
    let gain = ((1.0 - lambda) / delta + psi_bar_m / eps) / b_lower;
    let gain_upper = ((1.0 + lambda) / delta - psi_bar_m / eps) / b_upper;
    let relay = psi_bar_eps / b_lower;
    let delta_inv = if psi_bar_eps == 0.0 {
        f64::INFINITY
    } else {
        eps * b_lower / ((b_lower + b_upper) * psi_bar_eps)
    };
    let design = LinearDesign {
        lambda,
        delta,
        n,
        gain,
        gain_upper,
        relay,
        delta_inv,
        psi_bar_m,
        psi_bar_eps,
        delta_bound,
        psi_resolution: bar_m.resolution.max(bar_eps.resolution),
        inputs: DesignInputs {
            b_lower,
            b_upper,
            psi: cls.psi.name(),
            m,
            eps,
            horizon,
        },
    };
    let bad = design.violations();
    if !bad.is_empty() {
        return Err(Error::Infeasible(format!("design violates: {}", bad.join(", "))));
    }
    Ok(design)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContractionReport {
    /// `(k, |x_{k+1}|/|x_k|)` where the contraction bound failed.
    pub violations: Vec<(usize, f64)>,
    /// Largest observed ratio among steps with `|x_k| ≥ ε`.
    pub max_ratio: f64,
    /// First `ℓ` with `|x_ℓ| ≤ ε`.
    pub entered_at: Option<usize>,
    pub passed: bool,
}

/// `|x_{k+1}| ≤ λ|x_k| + slack` at every step with `|x_k| ≥ ε`, and
/// `|x_ℓ| ≤ ε` for some `ℓ ≤ n`.
pub fn check_contraction(traj: &Trajectory, lambda: f64, eps: f64, n: usize, slack: f64) -> ContractionReport {
    let mut violations = Vec::new();
    let mut max_ratio: f64 = 0.0;
    for w in traj.steps.windows(2) {
        let (x, x_next) = (w[0].x.abs(), w[1].x.abs());
        if x >= eps {
            max_ratio = max_ratio.max(x_next / x);
            if x_next > lambda * x + slack {
                violations.push((w[0].k, x_next / x));
            }
        }
    }
    let entered_at = traj.steps.iter().find(|s| s.x.abs() <= eps).map(|s| s.k);
    let passed = violations.is_empty() && entered_at.is_some_and(|l| l <= n);
    ContractionReport {
        violations,
        max_ratio,
        entered_at,
        passed,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InvarianceReport {
    /// Steps `k` with `|x_k| ≤ ε` but `|x_{k+1}| > ε + slack`.
    pub violations: Vec<usize>,
    pub entered_at: Option<usize>,
    /// Largest `|x_k|` observed after entry.
    pub max_after_entry: f64,
    pub passed: bool,
}

/// `|x_k| ≤ ε ⇒ |x_{k+1}| ≤ ε + slack` along the whole trajectory.
pub fn check_invariance(traj: &Trajectory, eps: f64, slack: f64) -> InvarianceReport {
    let violations: Vec<usize> = traj
        .steps
        .windows(2)
        .filter(|w| w[0].x.abs() <= eps && w[1].x.abs() > eps + slack)
        .map(|w| w[0].k)
        .collect();
    let entered_at = traj.steps.iter().position(|s| s.x.abs() <= eps);
    let max_after_entry = entered_at.map_or(f64::NAN, |i| {
        traj.steps[i..].iter().map(|s| s.x.abs()).fold(0.0, f64::max)
    });
    InvarianceReport {
        passed: violations.is_empty(),
        violations,
        entered_at,
        max_after_entry,
    }
}

/// Numerical `Q_{M,δ} = sup_{|x| ≤ M+ε} [ψ(x) + (b̄/b̲)·sup_{|y−x| ≤ δ}(ψ(y) + φ(|y|))]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QEstimate {
    pub value: f64,
    /// Grid spacing, `0` when evaluated in closed form.
    pub resolution: f64,
}

pub fn q_estimate(cls: &UncertaintyClass, phi: &PhiFunction, m: f64, eps: f64, delta: f64) -> Result<QEstimate> {
    let b_upper = cls
        .b_upper
        .ok_or_else(|| Error::invalid("Q estimate needs a bounded input gain"))?;
    let ratio = b_upper / cls.b_lower;
    let reach = m + eps;
    let inner = |y: f64| cls.psi(y) + phi.eval(y.abs());
    if cls.psi_monotone_even {
        return Ok(QEstimate {
            value: cls.psi(reach) + ratio * inner(reach + delta),
            resolution: 0.0,
        });
    }
    // Grid over [−(reach+δ), reach+δ]; sliding-window max of `inner` over ±δ.
    let points = 20_001usize;
    let span = reach + delta;
    let h = 2.0 * span / (points - 1) as f64;
    let w = (delta / h).floor() as usize;
    let ys: Vec<f64> = (0..points).map(|i| -span + h * i as f64).collect();
    let g: Vec<f64> = ys.iter().map(|&y| inner(y)).collect();
    let mut window: VecDeque<usize> = VecDeque::new();
    let mut best = 0.0f64;
    let mut next = 0;
    for (i, &x) in ys.iter().enumerate() {
        while next < points && next <= i + w {
            while window.back().is_some_and(|&j| g[j] <= g[next]) {
                window.pop_back();
            }
            window.push_back(next);
            next += 1;
        }
        while window.front().is_some_and(|&j| j + w < i) {
            window.pop_front();
        }
        if x.abs() <= reach {
            best = best.max(cls.psi(x) + ratio * g[*window.front().unwrap()]);
        }
    }
    Ok(QEstimate {
        value: best,
        resolution: h,
    })
}

pub type PlantFactory = Arc<dyn Fn() -> Box<dyn Plant> + Send + Sync>;

/// One plant of the period-selection ensemble, built fresh for every run.
#[derive(Clone)]
pub struct EnsembleMember {
    pub label: String,
    pub x0: f64,
    pub build: PlantFactory,
}

impl fmt::Debug for EnsembleMember {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EnsembleMember")
            .field("label", &self.label)
            .field("x0", &self.x0)
            .finish()
    }
}

impl EnsembleMember {
    pub fn new(label: impl Into<String>, x0: f64, build: impl Fn() -> Box<dyn Plant> + Send + Sync + 'static) -> Self {
        Self {
            label: label.into(),
            x0,
            build: Arc::new(build),
        }
    }
}

/// Twenty envelope plants: gains {b̲, b̄, alternating, two random seeds} ×
/// drift {zero, outward, inward, flipping}, started alternately at `±M`.
pub fn standard_ensemble(cls: &UncertaintyClass, m: f64, seed: u64) -> Result<Vec<EnsembleMember>> {
    let lo = cls.b_lower;
    let hi = cls
        .b_upper
        .ok_or_else(|| Error::invalid("ensemble needs a bounded input gain"))?;
    let profiles = [
        BProfile::Constant(lo),
        BProfile::Constant(hi),
        BProfile::Alternating { lo, hi },
        BProfile::Random { lo, hi, seed },
        BProfile::Random {
            lo,
            hi,
            seed: seed.wrapping_add(1),
        },
    ];
    let modes = [
        EnvelopeMode::Zero,
        EnvelopeMode::Outward,
        EnvelopeMode::Inward,
        EnvelopeMode::Flipping,
    ];
    let mut out = Vec::with_capacity(profiles.len() * modes.len());
    for (i, b) in profiles.iter().enumerate() {
        for (j, &mode) in modes.iter().enumerate() {
            let x0 = if (i + j) % 2 == 0 { m } else { -m };
            let psi = cls.psi.clone();
            let b = b.clone();
            let plant = EnvelopePlant::new(psi.clone(), mode, b.clone());
            out.push(EnsembleMember::new(plant.id().to_string(), x0, move || {
                Box::new(EnvelopePlant::new(psi.clone(), mode, b.clone()))
            }));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleRun {
    pub label: String,
    /// Largest `|x_k|` over `k ≥ N`.
    pub tail_max: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Lemma4Selection {
    pub delta: f64,
    pub n: usize,
    pub q: QEstimate,
    /// Starting period `min{δ/Q, T/8}` rounded to `T/N`.
    pub delta0: f64,
    pub halvings: u32,
    pub runs: Vec<EnsembleRun>,
}

/// Sampling period for the prescribed-time law such that every ensemble run
/// from `|x₀| ≤ M` satisfies `|x_k| ≤ ε` for all `k ≥ T/Δ`.
///
/// Starts at `Δ₀ = min{δ/Q_{M,δ}, T/8}` with `δ = ε` and halves until the
/// whole ensemble passes. Runs continue for `max(N, 16)` intervals past the
/// deadline. Fails with [`Error::DeltaUnderflow`] below `T/2²⁰`.
pub fn select_delta_lemma4(
    cls: &UncertaintyClass,
    phi: &PhiFunction,
    m: f64,
    eps: f64,
    horizon: f64,
    ensemble: &[EnsembleMember],
) -> Result<Lemma4Selection> {
    if ensemble.is_empty() {
        return Err(Error::invalid("ensemble must not be empty"));
    }
    if !(eps > 0.0 && m >= 0.0 && horizon > 0.0) {
        return Err(Error::invalid("need eps > 0, M >= 0, T > 0"));
    }
    let delta = eps;
    let q = q_estimate(cls, phi, m, eps, delta)?;
    let raw = if q.value > 0.0 { delta / q.value } else { f64::INFINITY };
    let mut n = steps_for(horizon, raw.min(horizon / 8.0));
    let delta0 = horizon / n as f64;
    let floor = horizon / (1u64 << 20) as f64;
    let controller = PrescribedController {
        class: cls.clone(),
        phi: *phi,
    };
    let mut halvings = 0;
    loop {
        let total = n + n.max(16);
        let schedule = SamplingSchedule::uniform_extended(0.0, horizon, n, total)?;
        let runs: Vec<EnsembleRun> = ensemble
            .par_iter()
            .map(|member| {
                let mut plant = (member.build)();
                let outcome = simulate(plant.as_mut(), &schedule, &controller, member.x0, &SimOptions::default());
                match outcome {
                    Ok(tr) if !tr.events.overflow => {
                        let tail_max = tr.steps[n..].iter().map(|s| s.x.abs()).fold(0.0, f64::max);
                        EnsembleRun {
                            label: member.label.clone(),
                            tail_max,
                            passed: tail_max <= eps,
                        }
                    }
                    _ => EnsembleRun {
                        label: member.label.clone(),
                        tail_max: f64::INFINITY,
                        passed: false,
                    },
                }
            })
            .collect();
        if runs.iter().all(|r| r.passed) {
            return Ok(Lemma4Selection {
                delta: horizon / n as f64,
                n,
                q,
                delta0,
                halvings,
                runs,
            });
        }
        n *= 2;
        halvings += 1;
        if horizon / (n as f64) < floor {
            let failing = runs.into_iter().find(|r| !r.passed).map(|r| r.label).unwrap_or_default();
            return Err(Error::DeltaUnderflow { floor, plant: failing });
        }
    }
}
