//! Control laws and the `ψ̄` / `φ` helpers.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::UncertaintyClass;
use crate::numeric::{grid_max, integrate_half_line, sign0};

/// What a controller sees at sampling instant `k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub k: usize,
    pub t: f64,
    pub x: f64,
    /// Length of the upcoming hold interval.
    pub dt: f64,
    /// `t₀ + T − t_k`, as computed by the schedule.
    pub time_to_go: f64,
}

/// Sampled feedback `ū_k = α(x_k, t_k)`, held constant over `[t_k, t_{k+1})`.
pub trait Controller: Send + Sync {
    fn label(&self) -> String;

    fn control(&self, s: &Sample) -> f64;
}

/// `φ(z) = κ(z^{1/2} + z^{3/2})` with `κ = π/T`, so that `∫₀^∞ dz/φ(z) = T`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhiFunction {
    pub kappa: f64,
    pub horizon: f64,
}

impl PhiFunction {
    pub fn new(horizon: f64) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::invalid(format!("horizon must be positive, got {horizon}")));
        }
        Ok(Self {
            kappa: PI / horizon,
            horizon,
        })
    }

    #[inline]
    pub fn eval(&self, z: f64) -> f64 {
        let s = z.sqrt();
        self.kappa * (s + z * s)
    }

    /// `∫₀^∞ dz/φ(z)` by quadrature.
    pub fn reciprocal_integral(&self, rel_tol: f64) -> f64 {
        integrate_half_line(|z| 1.0 / self.eval(z), rel_tol)
    }

    /// `∫₀^r dz/φ(z)`, the worst-case settling time from `|x₀| = r` of the
    /// continuous-time comparison system `V̇ = −φ(V)`.
    pub fn settling_time(&self, r: f64) -> f64 {
        // With z = s²: (2/κ)∫₀^{√r} ds/(1+s²).
        2.0 / self.kappa * r.max(0.0).sqrt().atan()
    }
}

/// `k(t) = A/(t₀+T−t)^m`.
pub fn gain_tv(a: f64, m: u32, t0: f64, horizon: f64, t: f64) -> Result<f64> {
    let to_go = t0 + horizon - t;
    if !(to_go > 0.0) {
        return Err(Error::invalid(format!("gain undefined at t = {t} >= deadline {}", t0 + horizon)));
    }
    Ok(a / to_go.powi(m as i32))
}

/// Value of `ψ̄_r = sup_{|x|≤r} ψ(x)` together with how it was obtained.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PsiBar {
    pub value: f64,
    pub argmax: f64,
    /// Grid spacing used, `0` when exact.
    pub resolution: f64,
}

/// `ψ̄_r = sup_{|x| ≤ r} ψ(x)`.
///
/// Exact (`ψ(r)`) for monotone-even envelopes; otherwise the maximum over a
/// symmetric grid of at least `10⁴·density` points on `[−r, r]`, refined by
/// golden-section search. The numerical value is attained, so it is a lower
/// bound on the true supremum.
pub fn psi_bar(cls: &UncertaintyClass, r: f64, density: usize) -> PsiBar {
    let r = r.max(0.0);
    if cls.psi_monotone_even {
        return PsiBar {
            value: cls.psi(r),
            argmax: r,
            resolution: 0.0,
        };
    }
    let points = 10_000 * density.max(1) + 1;
    let (argmax, value, resolution) = grid_max(|x| cls.psi(x), -r, r, points);
    PsiBar {
        value: value.max(cls.psi(0.0)),
        argmax,
        resolution,
    }
}

/// `α̃(x) = −b̲⁻¹(ψ(x) + φ(|x|))·sign(x)`, `sign(0) = 0`.
pub fn law_prescribed(cls: &UncertaintyClass, phi: &PhiFunction, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    -(cls.psi(x) + phi.eval(x.abs())) * sign0(x) / cls.b_lower
}

pub fn law_linear(gain: f64, x: f64) -> f64 {
    -gain * x
}

/// `−C·sign(x_k)` with the admissible selection `0` at `x_k = 0`.
pub fn law_relay(c: f64, x: f64) -> f64 {
    -c * sign0(x)
}

/// Linear outside the ball `|x| ≤ ε`, relay inside (boundary included).
pub fn law_composite(gain: f64, c: f64, eps: f64, x: f64) -> f64 {
    if x.abs() > eps {
        law_linear(gain, x)
    } else {
        law_relay(c, x)
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ZeroController;

impl Controller for ZeroController {
    fn label(&self) -> String {
        "zero".into()
    }

    fn control(&self, _s: &Sample) -> f64 {
        0.0
    }
}

#[derive(Clone, Copy, Debug)]
pub struct LinearController {
    pub gain: f64,
}

impl Controller for LinearController {
    fn label(&self) -> String {
        format!("linear(K={})", self.gain)
    }

    fn control(&self, s: &Sample) -> f64 {
        law_linear(self.gain, s.x)
    }
}

/// `ū_k = −k(t_k)·x_k` with `k(t) = A/(t₀+T−t)^m`, evaluated from the
/// schedule's time-to-go so accumulating schedules keep full precision.
/// Returns NaN at or past the deadline.
#[derive(Clone, Copy, Debug)]
pub struct TimeVaryingGainController {
    pub amplitude: f64,
    pub power: u32,
}

impl TimeVaryingGainController {
    pub fn gain(&self, time_to_go: f64) -> f64 {
        if time_to_go > 0.0 {
            self.amplitude / time_to_go.powi(self.power as i32)
        } else {
            f64::NAN
        }
    }
}

impl Controller for TimeVaryingGainController {
    fn label(&self) -> String {
        format!("tv_gain(A={},m={})", self.amplitude, self.power)
    }

    fn control(&self, s: &Sample) -> f64 {
        -self.gain(s.time_to_go) * s.x
    }
}

#[derive(Clone, Debug)]
pub struct PrescribedController {
    pub class: UncertaintyClass,
    pub phi: PhiFunction,
}

impl Controller for PrescribedController {
    fn label(&self) -> String {
        format!("prescribed(psi={},T={})", self.class.psi.name(), self.phi.horizon)
    }

    fn control(&self, s: &Sample) -> f64 {
        law_prescribed(&self.class, &self.phi, s.x)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct RelayController {
    pub amplitude: f64,
}

impl Controller for RelayController {
    fn label(&self) -> String {
        format!("relay(C={})", self.amplitude)
    }

    fn control(&self, s: &Sample) -> f64 {
        law_relay(self.amplitude, s.x)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CompositeController {
    pub gain: f64,
    pub relay: f64,
    pub eps: f64,
}

impl Controller for CompositeController {
    fn label(&self) -> String {
        format!("composite(K={},C={},eps={})", self.gain, self.relay, self.eps)
    }

    fn control(&self, s: &Sample) -> f64 {
        law_composite(self.gain, self.relay, self.eps, s.x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Psi;
    use approx::assert_relative_eq;

    fn abs_class(b_lower: f64) -> UncertaintyClass {
        UncertaintyClass::bounded(b_lower, 2.0 * b_lower, Psi::Abs).unwrap()
    }

    #[test]
    fn time_varying_gain_values() {
        assert_relative_eq!(gain_tv(1.0, 1, 0.0, 1.0, 0.5).unwrap(), 2.0);
        assert_eq!(gain_tv(1.0, 2, 0.0, 1.0, 0.0).unwrap(), 1.0);
        assert_relative_eq!(gain_tv(3.0, 1, 0.0, 1.0, 0.9).unwrap(), 30.0, max_relative = 1e-14);
        assert!(gain_tv(1.0, 1, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn psi_bar_monotone_forms_are_exact() {
        let c = abs_class(1.0);
        assert_eq!(psi_bar(&c, 10.0, 1).value, 10.0);
        let c = c.with_psi(Psi::Square);
        assert_eq!(psi_bar(&c, 3.0, 1).value, 9.0);
    }

    #[test]
    fn psi_bar_sinabs_matches_brute_force() {
        let c = abs_class(1.0).with_psi(Psi::SinAbs);
        // Oracle: plain 10⁶-point grid, no refinement.
        let n = 1_000_000;
        let r = PI;
        let oracle = (0..=n)
            .map(|i| -r + 2.0 * r * i as f64 / n as f64)
            .map(|x| x.sin().abs() * x.abs())
            .fold(f64::NEG_INFINITY, f64::max);
        let got = psi_bar(&c, r, 1);
        assert!(got.value >= oracle - 1e-12);
        assert!((got.value - oracle).abs() < 1e-9);
        assert!((got.argmax.abs() - 2.028_757_838).abs() < 1e-5);
        assert!(got.resolution > 0.0);
    }

    #[test]
    fn prescribed_law_values() {
        let phi = PhiFunction::new(1.0).unwrap();
        assert_relative_eq!(law_prescribed(&abs_class(1.0), &phi, 4.0), -(4.0 + PI * 10.0), max_relative = 1e-15);
        assert_relative_eq!(law_prescribed(&abs_class(1.0), &phi, 4.0), -35.415_926_535_9, max_relative = 1e-11);
        assert_eq!(law_prescribed(&abs_class(1.0), &phi, 0.0), 0.0);
        assert_relative_eq!(law_prescribed(&abs_class(2.0), &phi, -1.0), (1.0 + 2.0 * PI) / 2.0, max_relative = 1e-15);
    }

    #[test]
    fn prescribed_law_is_not_lipschitz_at_zero() {
        let phi = PhiFunction::new(1.0).unwrap();
        let c = abs_class(1.0);
        let mut prev = 0.0;
        for k in 1..=7 {
            let h = 10f64.powi(-2 * k);
            let slope = law_prescribed(&c, &phi, h).abs() / h;
            assert!(slope > prev);
            prev = slope;
        }
    }

    #[test]
    fn simple_laws() {
        assert_eq!(law_linear(400.0, 1.0), -400.0);
        assert_eq!(law_linear(5.0, 0.0), 0.0);
        assert_eq!(law_linear(2.0, -3.0), 6.0);
        assert_eq!(law_relay(0.1, 0.05), -0.1);
        assert_eq!(law_relay(0.1, 0.0), 0.0);
        assert_eq!(law_relay(0.1, -1e-9), 0.1);
        assert_eq!(law_composite(400.0, 0.1, 0.1, 1.0), -400.0);
        assert_eq!(law_composite(400.0, 0.1, 0.1, 0.1), -0.1);
        assert_eq!(law_composite(400.0, 0.1, 0.1, 0.0), 0.0);
    }

    #[test]
    fn phi_normalization() {
        for t in [0.5, 1.0, 10.0] {
            let phi = PhiFunction::new(t).unwrap();
            assert_eq!(phi.eval(0.0), 0.0);
            assert_relative_eq!(phi.reciprocal_integral(1e-12), t, max_relative = 1e-9);
            assert!(phi.settling_time(1e12) < t);
        }
        assert!(PhiFunction::new(0.0).is_err());
    }

    #[test]
    fn tv_controller_uses_time_to_go() {
        let c = TimeVaryingGainController { amplitude: 1.0, power: 1 };
        let s = Sample { k: 30, t: 1.0, x: 2.0, dt: 0.0, time_to_go: 0.5f64.powi(30) };
        assert_eq!(c.control(&s), -2.0 * 2f64.powi(30));
        assert!(c.control(&Sample { time_to_go: 0.0, ..s }).is_nan());
    }
}
