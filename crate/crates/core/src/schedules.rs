//! Sampling-instant generators.
//!
//! Accumulating schedules are stored as time-to-go `τ_k = t₀+T−t_k` and
//! increments `Δ_k`, both computed in the log domain; the instants `t_k`
//! themselves stop being distinguishable in `f64` long before the step cap.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Step cap for theoretically infinite schedules.
pub const DEFAULT_K_MAX: usize = 200;

/// Next-instant rule `t_{k+1} = S({x_i}, {t_i})`.
pub type NextInstant = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum ScheduleKind {
    Uniform { delta: f64 },
    Geometric { a: f64 },
    Stretched { a: f64, m: u32, q: f64 },
    Explicit,
    StateDependent { rule: NextInstant, k_max: usize },
}

impl fmt::Debug for ScheduleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Uniform { delta } => write!(f, "Uniform {{ delta: {delta} }}"),
            Self::Geometric { a } => write!(f, "Geometric {{ a: {a} }}"),
            Self::Stretched { a, m, q } => write!(f, "Stretched {{ a: {a}, m: {m}, q: {q} }}"),
            Self::Explicit => f.write_str("Explicit"),
            Self::StateDependent { k_max, .. } => write!(f, "StateDependent {{ k_max: {k_max} }}"),
        }
    }
}

/// The hold interval starting at sampling instant `k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub k: usize,
    pub t: f64,
    pub dt: f64,
    /// `t₀ + T − t_k`, negative past the deadline.
    pub time_to_go: f64,
}

#[derive(Clone, Debug)]
pub struct SamplingSchedule {
    pub kind: ScheduleKind,
    pub t0: f64,
    pub horizon: f64,
    instants: Vec<f64>,
    increments: Vec<f64>,
    time_to_go: Vec<f64>,
    /// Index `N` with `t_N = t₀ + T`, for finite schedules.
    deadline_index: Option<usize>,
    truncated: bool,
}

impl SamplingSchedule {
    /// `t_k = t₀ + kΔ`, `Δ = T/N`, `k = 0..=N`.
    pub fn uniform(t0: f64, horizon: f64, n: usize) -> Result<Self> {
        Self::uniform_extended(t0, horizon, n, n)
    }

    /// Uniform grid of period `T/N` continued past the deadline to `total`
    /// intervals, for checks of the form "for all `k ≥ N`".
    pub fn uniform_extended(t0: f64, horizon: f64, n: usize, total: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("uniform schedule needs N >= 1"));
        }
        if !(horizon > 0.0 && horizon.is_finite() && t0.is_finite()) {
            return Err(Error::invalid(format!("horizon must be positive and finite, got {horizon}")));
        }
        let total = total.max(n);
        let delta = horizon / n as f64;
        let instants = (0..=total)
            .map(|k| if k == n { t0 + horizon } else { t0 + k as f64 * delta })
            .collect();
        let time_to_go = (0..=total).map(|k| (n as f64 - k as f64) * delta).collect();
        Ok(Self {
            kind: ScheduleKind::Uniform { delta },
            t0,
            horizon,
            instants,
            increments: vec![delta; total],
            time_to_go,
            deadline_index: Some(n),
            truncated: false,
        })
    }

    /// `t_k = 1 − a^k` on `[0, 1]`, `k = 0..=k_max`.
    pub fn geometric(a: f64, k_max: usize) -> Result<Self> {
        check_ratio(a)?;
        let ln_a = a.ln();
        let time_to_go: Vec<f64> = (0..=k_max).map(|k| (k as f64 * ln_a).exp()).collect();
        let increments = time_to_go[..k_max].iter().map(|tau| tau * (1.0 - a)).collect();
        Ok(Self::accumulating(ScheduleKind::Geometric { a }, time_to_go, increments))
    }

    /// `t_k = 1 − a^{k^q}`, `q = 1/(m²+1)`, on `[0, 1]`, `k = 0..=k_max`.
    pub fn stretched(a: f64, m: u32, k_max: usize) -> Result<Self> {
        check_ratio(a)?;
        if m == 0 {
            return Err(Error::invalid("stretched schedule needs m >= 1"));
        }
        let q = stretch_exponent(m);
        let ln_a = a.ln();
        let time_to_go: Vec<f64> = (0..=k_max).map(|k| (pow_q(k, q) * ln_a).exp()).collect();
        let increments = (0..k_max)
            .map(|k| time_to_go[k] * -(power_gap(k, q) * ln_a).exp_m1())
            .collect();
        Ok(Self::accumulating(ScheduleKind::Stretched { a, m, q }, time_to_go, increments))
    }

    /// Explicit instants `t_1 < … < t_N` after `t₀`; the deadline is `t_N`.
    pub fn explicit(t0: f64, instants: &[f64]) -> Result<Self> {
        if instants.is_empty() {
            return Err(Error::invalid("explicit schedule needs at least one instant"));
        }
        let mut all = Vec::with_capacity(instants.len() + 1);
        all.push(t0);
        for &t in instants {
            if !(t.is_finite() && t > *all.last().unwrap()) {
                return Err(Error::invalid(format!("explicit instants must be finite and strictly increasing (at {t})")));
            }
            all.push(t);
        }
        let end = *all.last().unwrap();
        let increments = all.windows(2).map(|w| w[1] - w[0]).collect();
        let time_to_go = all.iter().map(|t| end - t).collect();
        let n = instants.len();
        Ok(Self {
            kind: ScheduleKind::Explicit,
            t0,
            horizon: end - t0,
            instants: all,
            increments,
            time_to_go,
            deadline_index: Some(n),
            truncated: false,
        })
    }

    /// Instants chosen online by `rule` from the observed history; the rule
    /// must return a time in `(t_k, t₀+T]`. Stops at the deadline or `k_max`.
    pub fn state_dependent(t0: f64, horizon: f64, k_max: usize, rule: NextInstant) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::invalid("horizon must be positive and finite"));
        }
        Ok(Self {
            kind: ScheduleKind::StateDependent { rule, k_max },
            t0,
            horizon,
            instants: vec![t0],
            increments: Vec::new(),
            time_to_go: vec![horizon],
            deadline_index: None,
            truncated: false,
        })
    }

    /// Cuts the sequence before time-to-go leaves the normal `f64` range or
    /// stops decreasing.
    fn accumulating(kind: ScheduleKind, mut time_to_go: Vec<f64>, mut increments: Vec<f64>) -> Self {
        let keep = (1..time_to_go.len())
            .find(|&k| {
                !(time_to_go[k] >= f64::MIN_POSITIVE && time_to_go[k] < time_to_go[k - 1] && increments[k - 1] > 0.0)
            })
            .unwrap_or(time_to_go.len());
        time_to_go.truncate(keep);
        increments.truncate(keep - 1);
        let instants = time_to_go.iter().map(|tau| 1.0 - tau).collect();
        Self {
            kind,
            t0: 0.0,
            horizon: 1.0,
            instants,
            increments,
            time_to_go,
            deadline_index: None,
            truncated: true,
        }
    }

    pub fn deadline(&self) -> f64 {
        self.t0 + self.horizon
    }

    /// Precomputed instants (only `t₀` for state-dependent schedules).
    pub fn instants(&self) -> &[f64] {
        &self.instants
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    pub fn time_to_go(&self) -> &[f64] {
        &self.time_to_go
    }

    pub fn deadline_index(&self) -> Option<usize> {
        self.deadline_index
    }

    /// Whether the schedule is a finite prefix of an infinite one.
    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    /// Number of precomputed hold intervals.
    pub fn len(&self) -> usize {
        self.increments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.increments.is_empty() && !matches!(self.kind, ScheduleKind::StateDependent { .. })
    }

    /// Interval `k`, given the instants and states observed so far
    /// (`ts.len() == xs.len() == k + 1`). `None` once the schedule is exhausted.
    pub fn interval(&self, k: usize, ts: &[f64], xs: &[f64]) -> Result<Option<Interval>> {
        match &self.kind {
            ScheduleKind::StateDependent { rule, k_max } => {
                let t = *ts.last().unwrap_or(&self.t0);
                let end = self.deadline();
                if k >= *k_max || t >= end {
                    return Ok(None);
                }
                let next = rule(xs, ts);
                if !(next > t && next <= end) {
                    return Err(Error::invalid(format!(
                        "state-dependent rule returned {next} at step {k}; need a value in ({t}, {end}]"
                    )));
                }
                Ok(Some(Interval { k, t, dt: next - t, time_to_go: end - t }))
            }
            _ => Ok(self.increments.get(k).map(|&dt| Interval {
                k,
                t: self.instants[k],
                dt,
                time_to_go: self.time_to_go[k],
            })),
        }
    }

    pub fn describe(&self) -> String {
        format!("{:?} t0={} T={} intervals={}", self.kind, self.t0, self.horizon, self.len())
    }
}

fn check_ratio(a: f64) -> Result<()> {
    if a > 0.0 && a < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("ratio a must lie in (0, 1), got {a}")))
    }
}

/// `q = 1/(m²+1)`.
pub fn stretch_exponent(m: u32) -> f64 {
    1.0 / (f64::from(m) * f64::from(m) + 1.0)
}

#[inline]
fn pow_q(k: usize, q: f64) -> f64 {
    if k == 0 {
        0.0
    } else {
        (k as f64).powf(q)
    }
}

/// `(k+1)^q − k^q` without cancellation.
fn power_gap(k: usize, q: f64) -> f64 {
    if k == 0 {
        1.0
    } else {
        let kf = k as f64;
        kf.powf(q) * (q * (1.0 / kf).ln_1p()).exp_m1()
    }
}

/// `ln[(a^{k^q} − a^{(k+1)^q}) / a^{m·k^q}]` with `q = 1/(m²+1)`.
pub fn example2_log_ratio(a: f64, m: u32, k: u64) -> f64 {
    let q = stretch_exponent(m);
    let ln_a = a.ln();
    let kq = if k == 0 { 0.0 } else { (k as f64).powf(q) };
    let gap = if k == 0 {
        1.0
    } else {
        let kf = k as f64;
        kq * (q * (1.0 / kf).ln_1p()).exp_m1()
    };
    (1.0 - f64::from(m)) * kq * ln_a + (-(gap * ln_a).exp_m1()).ln()
}

/// `(a^{k^q} − a^{(k+1)^q}) / a^{m·k^q}`, the gain-times-period factor of the
/// stretched schedule driven by `k(t) = A/(1−t)^m` (per unit `A`).
pub fn example2_ratio(a: f64, m: u32, k: u64) -> f64 {
    example2_log_ratio(a, m, k).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn uniform_grids() {
        assert_eq!(SamplingSchedule::uniform(0.0, 1.0, 4).unwrap().instants(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(SamplingSchedule::uniform(0.0, 1.0, 1).unwrap().instants(), &[0.0, 1.0]);
        assert_eq!(SamplingSchedule::uniform(2.0, 1.0, 2).unwrap().instants(), &[2.0, 2.5, 3.0]);
        assert!(SamplingSchedule::uniform(0.0, 1.0, 0).is_err());
    }

    #[test]
    fn uniform_extension_continues_past_deadline() {
        let s = SamplingSchedule::uniform_extended(0.0, 1.0, 4, 8).unwrap();
        assert_eq!(s.len(), 8);
        assert_eq!(s.instants()[4], 1.0);
        assert_eq!(s.instants()[8], 2.0);
        assert_eq!(s.time_to_go()[6], -0.5);
        assert_eq!(s.deadline_index(), Some(4));
    }

    #[test]
    fn geometric_values() {
        let s = SamplingSchedule::geometric(0.5, 10).unwrap();
        assert_eq!(s.instants()[1], 0.5);
        assert_eq!(s.instants()[2], 0.75);
        assert_eq!(s.increments()[1], 0.25);
        let s = SamplingSchedule::geometric(0.9, 20).unwrap();
        assert_relative_eq!(s.increments()[10], 0.9f64.powi(10) * 0.1, max_relative = 1e-13);
        assert_relative_eq!(s.increments()[10], 0.034_867_844_01, max_relative = 1e-9);
        assert!(SamplingSchedule::geometric(1.0, 5).is_err());
        assert!(SamplingSchedule::geometric(0.0, 5).is_err());
    }

    #[test]
    fn geometric_partial_sums_telescope() {
        let a = 0.7;
        let s = SamplingSchedule::geometric(a, 60).unwrap();
        let mut acc = 0.0;
        for (k, dt) in s.increments().iter().enumerate() {
            acc += dt;
            assert_relative_eq!(acc, 1.0 - a.powi(k as i32 + 1), max_relative = 1e-12);
        }
    }

    #[test]
    fn stretched_values() {
        let s = SamplingSchedule::stretched(0.5, 1, 40).unwrap();
        assert_eq!(s.instants()[0], 0.0);
        assert_relative_eq!(s.instants()[4], 0.75, max_relative = 1e-15);
        let s = SamplingSchedule::stretched(0.5, 2, 40).unwrap();
        assert_relative_eq!(s.instants()[32], 0.75, max_relative = 1e-14);
        assert!(SamplingSchedule::stretched(0.5, 0, 4).is_err());
    }

    #[test]
    fn stretched_increments_match_direct_difference() {
        let s = SamplingSchedule::stretched(0.6, 2, 50).unwrap();
        let q = stretch_exponent(2);
        for k in 0..50usize {
            let direct = 0.6f64.powf((k as f64).powf(q)) - 0.6f64.powf(((k + 1) as f64).powf(q));
            assert_relative_eq!(s.increments()[k], direct, max_relative = 1e-9);
        }
    }

    #[test]
    fn explicit_schedule_validation() {
        let s = SamplingSchedule::explicit(0.0, &[0.1, 0.5, 1.0]).unwrap();
        assert_eq!(s.increments().len(), 3);
        assert_eq!(s.horizon, 1.0);
        assert!(SamplingSchedule::explicit(0.0, &[0.1, 0.1]).is_err());
        assert!(SamplingSchedule::explicit(0.0, &[]).is_err());
        assert!(SamplingSchedule::explicit(0.5, &[0.2]).is_err());
    }

    #[test]
    fn state_dependent_rule_is_validated() {
        let rule: NextInstant = Arc::new(|_xs, ts| (ts.last().unwrap() + 0.3).min(1.0));
        let s = SamplingSchedule::state_dependent(0.0, 1.0, 100, rule).unwrap();
        let iv = s.interval(0, &[0.0], &[1.0]).unwrap().unwrap();
        assert_relative_eq!(iv.dt, 0.3);
        assert!(s.interval(3, &[0.0, 0.3, 0.6, 1.0], &[0.0; 4]).unwrap().is_none());
        let bad: NextInstant = Arc::new(|_xs, _ts| 2.0);
        let s = SamplingSchedule::state_dependent(0.0, 1.0, 100, bad).unwrap();
        assert!(s.interval(0, &[0.0], &[1.0]).is_err());
    }

    #[test]
    fn example2_ratio_oracle_values() {
        // Frozen from a 50-digit mpmath evaluation of the defining quotient.
        let cases = [
            (0.5, 1, 10u64, 0.10146),
            (0.5, 1, 1_000_000, 3.4651e-4),
            (0.3, 1, 1_000_000, 6.0181e-4),
            (0.9, 2, 1_000_000, 1.7738e-6),
            (0.5, 2, 1_000_000, 0.12968),
            (0.3, 2, 10_000, 0.30251),
            (0.5, 3, 10_000, 5.6638e-4),
            (0.3, 3, 1_000_000, 6.9799e-3),
        ];
        for (a, m, k, want) in cases {
            assert_relative_eq!(example2_ratio(a, m, k), want, max_relative = 2e-4);
        }
    }

    #[test]
    fn example2_ratio_decreases_for_unit_power() {
        for a in [0.3, 0.5, 0.9] {
            let mut prev = f64::INFINITY;
            for e in 1..=12 {
                let r = example2_ratio(a, 1, 10u64.pow(e));
                assert!(r < prev);
                prev = r;
            }
            assert!(example2_ratio(a, 1, 1_000_000) < 1e-3);
            assert!(example2_ratio(a, 1, 10_000) < example2_ratio(a, 1, 100));
        }
    }

    #[test]
    fn example2_ratio_grows_without_bound_for_higher_powers() {
        // a^{(1−m)k^q} outgrows the O(k^{q−1}) increment once m ≥ 2.
        // (a, m) = (0.9, 3) only turns around beyond the u64 range.
        for (a, m) in [(0.3, 2), (0.5, 2), (0.9, 2), (0.3, 3), (0.5, 3)] {
            assert!(example2_log_ratio(a, m, u64::MAX / 2) > example2_log_ratio(a, m, 1_000_000));
        }
    }
}
