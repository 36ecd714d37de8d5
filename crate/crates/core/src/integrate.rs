//! One hold interval of `ẋ = f(x,t) + b(x,t)ū`: closed form when the
//! interval data is affine in `x`, adaptive Dormand–Prince 5(4) otherwise.

use crate::error::{Error, Result};

/// Default local error tolerance of [`step_general`].
pub const DEFAULT_TOL: f64 = 1e-10;

/// Magnitude beyond which a state counts as overflowed.
pub const OVERFLOW_GUARD: f64 = 1e300;

/// `|αΔ|` below which `(e^{αΔ}−1)/α` is taken from its series.
const SERIES_SWITCH: f64 = 1e-8;

/// Minimum dense points per interval produced by [`step_general`].
pub const MIN_DENSE_POINTS: usize = 8;

// Per-step error target, as a fraction of `tol`.
const LOCAL_SAFETY: f64 = 0.1;

/// `Δ·(e^{z}−1)/z` with `z = αΔ`, cancellation-free near `z = 0`.
#[inline]
fn phi1_scaled(alpha: f64, dt: f64) -> f64 {
    let z = alpha * dt;
    if z.abs() < SERIES_SWITCH {
        dt * (1.0 + z / 2.0 + z * z / 6.0)
    } else {
        z.exp_m1() / alpha
    }
}

/// Exact solution of `ẋ = αx + β` after `dt`, from `x`:
/// `e^{αΔ}x + β(e^{αΔ}−1)/α`, evaluated as `x + (αx+β)(e^{αΔ}−1)/α`.
///
/// Overflow saturates to `±∞`; it never produces NaN from finite inputs.
pub fn step_affine(x: f64, alpha: f64, beta: f64, dt: f64) -> f64 {
    let drive = alpha * x + beta;
    if drive == 0.0 {
        return x;
    }
    let gain = phi1_scaled(alpha, dt);
    let next = x + drive * gain;
    if next.is_nan() {
        // inf - inf: the exponential dominates.
        f64::INFINITY.copysign(drive)
    } else {
        next
    }
}

/// Whether the affine flow from `x` changes sign within `dt`. The flow is
/// monotone in `t`, so endpoint signs decide.
pub fn affine_crosses_zero(x: f64, x_next: f64) -> bool {
    x * x_next < 0.0 || (x != 0.0 && x_next == 0.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneralStep {
    pub x: f64,
    /// `(t, x)` at evenly spaced interior and end points of the interval.
    pub dense: Vec<(f64, f64)>,
    pub crossed_zero: bool,
    pub overflow: bool,
    pub accepted_steps: usize,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// Fifth-order minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrate `ẋ = rhs(t, x)` over `[t0, t0 + dt]` from `x0` with local error
/// per accepted step at most `tol·max(1, |x|)`.
///
/// A NaN derivative at a finite state is reported as
/// [`Error::NonFinite`]; rejected steps shrinking below `10⁻¹⁴·dt` give
/// [`Error::StepSizeUnderflow`].
///
/// With `dense_points > 0`, dense output is taken at `max(dense_points, 8)`
/// evenly spaced times, each reached by the integrator itself rather than
/// interpolated; with `0` only the end point is recorded.
pub fn step_general(
    x0: f64,
    t0: f64,
    dt: f64,
    rhs: &dyn Fn(f64, f64) -> f64,
    tol: f64,
    dense_points: usize,
) -> Result<GeneralStep> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid(format!("interval length must be positive, got {dt}")));
    }
    if !(tol > 0.0 && tol <= 1e-3) {
        return Err(Error::invalid(format!("tolerance must lie in (0, 1e-3], got {tol}")));
    }
    if !x0.is_finite() {
        return Err(Error::invalid("initial state must be finite"));
    }
    let segments = if dense_points == 0 {
        1
    } else {
        dense_points.max(MIN_DENSE_POINTS)
    };
    let h_min = 1e-14 * dt;
    let mut out = GeneralStep {
        x: x0,
        dense: Vec::with_capacity(segments),
        crossed_zero: false,
        overflow: false,
        accepted_steps: 0,
    };
    let mut t = t0;
    let mut x = x0;
    let mut h = dt / segments as f64;
    let mut k1 = rhs(t, x);
    if k1.is_nan() {
        return Err(Error::NonFinite { step: 0, what: "rhs" });
    }
    for seg in 1..=segments {
        let t_end = if seg == segments {
            t0 + dt
        } else {
            t0 + dt * seg as f64 / segments as f64
        };
        while t < t_end {
            let last = t + h >= t_end;
            let hh = if last { t_end - t } else { h };
            let mut k = [0.0; 7];
            k[0] = k1;
            for i in 1..7 {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate().take(i) {
                    acc += A[i][j] * kj;
                }
                let xi = x + hh * acc;
                k[i] = rhs(t + C[i] * hh, xi);
                if k[i].is_nan() && xi.is_finite() {
                    return Err(Error::NonFinite { step: 0, what: "rhs" });
                }
            }
            let x_new = x + hh * (0..6).map(|j| A[6][j] * k[j]).sum::<f64>();
            let err_abs = hh * E.iter().zip(&k).map(|(e, ki)| e * ki).sum::<f64>();
            let scale = LOCAL_SAFETY * tol * 1f64.max(x.abs()).max(x_new.abs());
            let err = (err_abs / scale).abs();
            if err.is_finite() && x_new.is_finite() && err <= 1.0 {
                if x * x_new < 0.0 || (x != 0.0 && x_new == 0.0) {
                    out.crossed_zero = true;
                }
                t = if last { t_end } else { t + hh };
                x = x_new;
                k1 = k[6];
                out.accepted_steps += 1;
                if x.abs() > OVERFLOW_GUARD {
                    out.x = x;
                    out.overflow = true;
                    out.dense.push((t, x));
                    return Ok(out);
                }
                let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                if !last {
                    h = hh * grow;
                } else {
                    h = h.max(hh * grow);
                }
            } else {
                let shrink = if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.1, 0.5) } else { 0.1 };
                h = hh * shrink;
                if h < h_min {
                    return Err(Error::StepSizeUnderflow { t });
                }
            }
        }
        out.dense.push((t_end, x));
    }
    out.x = x;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn affine_pure_integrator() {
        assert_eq!(step_affine(1.0, 0.0, -2.0, 0.5), 0.0);
    }

    #[test]
    fn affine_exponential_doubling() {
        assert_relative_eq!(step_affine(1.0, 1.0, 0.0, std::f64::consts::LN_2), 2.0, max_relative = 1e-15);
    }

    #[test]
    fn affine_lemma2_case2_growth() {
        // a·d·Δ = 12 with q_k = b̲Δū/x at its smallest admissible value −(1+c)·b̄/b̲ = −6,
        // i.e. β = b·ū with b·ū·Δ = −6: h(t_{k+1}) ≥ 1 + (e^{12}−1)/2 ≥ 2.
        let alpha = 60.0;
        let dt = 0.2;
        let beta = -6.0 / dt;
        let x1 = step_affine(1.0, alpha, beta, dt);
        let lower = 1.0 + (12f64.exp() - 1.0) / 2.0;
        assert!(x1 >= lower * (1.0 - 1e-12), "{x1} < {lower}");
        assert!(x1 >= 2.0);
    }

    #[test]
    fn affine_series_branch_matches_exact_limit() {
        // Below the switch the series is used; compare with a high-order
        // hand expansion of e^{z}: x + (αx+β)Δ(1 + z/2 + z²/6 + z³/24).
        let (x, beta, dt) = (3.0, -1.5, 0.7);
        for alpha in [1e-9, -1e-9, 1e-12, 5e-9] {
            let z: f64 = alpha * dt;
            let exact = x + (alpha * x + beta) * dt * (1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0);
            assert_relative_eq!(step_affine(x, alpha, beta, dt), exact, max_relative = 1e-16);
        }
        assert_eq!(step_affine(3.0, 0.0, -1.5, 0.7), 3.0 - 1.5 * 0.7);
    }

    #[test]
    fn affine_overflow_saturates() {
        let v = step_affine(1.0, 1e4, 0.0, 1.0);
        assert_eq!(v, f64::INFINITY);
        let v = step_affine(1.0, 1e4, -1e6, 1.0);
        assert_eq!(v, f64::NEG_INFINITY);
        assert_eq!(step_affine(0.0, 1e4, 0.0, 1.0), 0.0);
    }

    #[test]
    fn general_matches_integrator_example() {
        let tol = DEFAULT_TOL;
        let s = step_general(1.0, 0.0, 0.5, &|_, _| -2.0, tol, 8).unwrap();
        assert!(s.x.abs() <= tol);
        assert!(s.dense.len() >= 8);
    }

    #[test]
    fn general_equilibrium_of_sine() {
        let pi = std::f64::consts::PI;
        let s = step_general(pi, 0.0, 1.0, &|_, x: f64| x.sin(), DEFAULT_TOL, 8).unwrap();
        assert!((s.x - pi).abs() <= DEFAULT_TOL);
    }

    #[test]
    fn general_quadratic_blowup_solution() {
        // ẋ = x², x(0) = 1 ⇒ x(t) = 1/(1−t), x(0.5) = 2.
        let tol = DEFAULT_TOL;
        let s = step_general(1.0, 0.0, 0.5, &|_, x| x * x, tol, 8).unwrap();
        assert!((s.x - 2.0).abs() <= 10.0 * tol * 2.0, "{}", s.x);
        for &(t, x) in &s.dense {
            assert!((x - 1.0 / (1.0 - t)).abs() <= 10.0 * tol * x.abs());
        }
    }

    #[test]
    fn general_reports_sign_change() {
        let s = step_general(1.0, 0.0, 1.0, &|_, _| -2.0, DEFAULT_TOL, 8).unwrap();
        assert!(s.crossed_zero);
        let s = step_general(1.0, 0.0, 1.0, &|_, x| -x, DEFAULT_TOL, 8).unwrap();
        assert!(!s.crossed_zero);
    }

    #[test]
    fn general_rejects_bad_inputs() {
        assert!(step_general(1.0, 0.0, 0.0, &|_, _| 0.0, 1e-10, 8).is_err());
        assert!(step_general(1.0, 0.0, 1.0, &|_, _| 0.0, 1e-2, 8).is_err());
    }

    #[test]
    fn general_nan_rhs_is_reported() {
        let r = step_general(1.0, 0.0, 1.0, &|_, x| if x < 0.5 { f64::NAN } else { -1.0 }, 1e-10, 8);
        assert!(matches!(r, Err(Error::NonFinite { .. })));
    }

    #[test]
    fn general_stiff_rhs_underflows() {
        // Discontinuous sign flip: step control cannot resolve the chatter.
        let r = step_general(0.0, 0.0, 1.0, &|_, x: f64| if x >= 0.0 { -1e12 } else { 1e12 }, 1e-12, 8);
        assert!(matches!(r, Err(Error::StepSizeUnderflow { .. })), "{r:?}");
    }

    #[test]
    fn general_flags_overflow() {
        // ẋ = x² from x=1 blows up at t=1; overflow fires before the step collapses.
        let s = step_general(1.0, 0.0, 2.0, &|_, x| x * x, 1e-10, 8);
        match s {
            Ok(s) => assert!(s.overflow),
            Err(Error::StepSizeUnderflow { t }) => assert!((t - 1.0).abs() < 1e-3),
            Err(e) => panic!("{e}"),
        }
    }
}
