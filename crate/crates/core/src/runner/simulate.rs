use sha2::{Digest, Sha256};

use crate::control::{Controller, Sample};
use crate::error::{Error, Result};
use crate::integrate::{affine_crosses_zero, step_affine, step_general, DEFAULT_TOL, OVERFLOW_GUARD};
use crate::model::{DensePoint, Events, Hold, IntervalContext, Plant, Realization, Step, Trajectory};
use crate::schedules::SamplingSchedule;

#[derive(Clone, Debug, PartialEq)]
pub struct SimOptions {
    /// Practical-convergence radius; sets `events.converged_at`.
    pub eps: Option<f64>,
    pub tol: f64,
    /// Dense points per interval; `0` records none.
    pub dense_points: usize,
    pub overflow_guard: f64,
    /// Overrides the hash derived from plant, controller, schedule and `x₀`.
    pub config_hash: Option<String>,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            eps: None,
            tol: DEFAULT_TOL,
            dense_points: 0,
            overflow_guard: OVERFLOW_GUARD,
            config_hash: None,
        }
    }
}

impl SimOptions {
    pub fn with_eps(eps: f64) -> Self {
        Self {
            eps: Some(eps),
            ..Self::default()
        }
    }
}

pub(crate) fn hash_hex(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// Closed loop under zero-order hold: at each instant the controller picks
/// `ū_k`, the plant commits its interval data, and the state is advanced in
/// closed form (affine data) or by the adaptive integrator.
///
/// Overflow of the state past `opts.overflow_guard`, or of the control or
/// the plant data to infinity, ends the run with `events.overflow` set; a non-finite control or plant value is an error naming the step.
pub fn simulate(
    plant: &mut dyn Plant,
    schedule: &SamplingSchedule,
    controller: &dyn Controller,
    x0: f64,
    opts: &SimOptions,
) -> Result<Trajectory> {
    if !x0.is_finite() {
        return Err(Error::invalid(format!("initial state must be finite, got {x0}")));
    }
    let config_hash = opts.config_hash.clone().unwrap_or_else(|| {
        hash_hex(&format!(
            "{}|{}|{}|{:e}",
            plant.id(),
            controller.label(),
            schedule.describe(),
            x0
        ))
    });
    let mut traj = Trajectory {
        plant_id: plant.id().to_string(),
        controller: controller.label(),
        config_hash,
        steps: Vec::with_capacity(schedule.len() + 1),
        dense: Vec::new(),
        events: Events::default(),
    };
    let mut ts = vec![schedule.t0];
    let mut xs = vec![x0];
    let mut x = x0;
    let mut t = schedule.t0;
    let mut k = 0;
    let converged = |x: f64| opts.eps.is_some_and(|e| x.abs() <= e);
    if converged(x) {
        traj.events.converged_at = Some(0);
    }
    loop {
        let Some(iv) = schedule.interval(k, &ts, &xs)? else {
            traj.steps.push(Step { k, t, x, hold: None });
            traj.events.truncated = schedule.is_truncated();
            break;
        };
        let sample = Sample {
            k,
            t: iv.t,
            x,
            dt: iv.dt,
            time_to_go: iv.time_to_go,
        };
        let u = controller.control(&sample);
        if u.is_nan() {
            return Err(Error::NonFinite { step: k, what: "control" });
        }
        if u.is_infinite() {
            // The control saturates before the state does.
            traj.steps.push(Step { k, t, x, hold: None });
            traj.events.overflow = true;
            traj.events.diverged = true;
            break;
        }
        let ctx = IntervalContext {
            k,
            t: iv.t,
            dt: iv.dt,
            x,
            u,
        };
        let real = plant.realize(&ctx)?;
        let f = real.f_at(x, iv.t);
        let b = real.b_at(x, iv.t);
        if f.is_nan() {
            return Err(Error::NonFinite { step: k, what: "f" });
        }
        if b.is_nan() {
            return Err(Error::NonFinite { step: k, what: "b" });
        }
        if f.is_infinite() || b.is_infinite() {
            traj.steps.push(Step { k, t, x, hold: None });
            traj.events.overflow = true;
            traj.events.diverged = true;
            break;
        }
        let (x_next, crossed) = match &real {
            Realization::Affine { f_slope, f_offset, b } => {
                let beta = f_offset + b * u;
                let x_next = step_affine(x, *f_slope, beta, iv.dt);
                if opts.dense_points > 0 {
                    let n = opts.dense_points;
                    for j in 1..n {
                        let s = iv.dt * j as f64 / n as f64;
                        traj.dense.push(DensePoint {
                            k,
                            t: iv.t + s,
                            x: step_affine(x, *f_slope, beta, s),
                        });
                    }
                }
                (x_next, affine_crosses_zero(x, x_next))
            }
            Realization::General { f, b } => {
                let rhs = |t: f64, x: f64| f(x, t) + b(x, t) * u;
                let step = step_general(x, iv.t, iv.dt, &rhs, opts.tol, opts.dense_points).map_err(|e| match e {
                    Error::NonFinite { what, .. } => Error::NonFinite { step: k, what },
                    other => other,
                })?;
                if opts.dense_points > 0 {
                    let last = step.dense.len().saturating_sub(1);
                    traj.dense.extend(
                        step.dense[..last]
                            .iter()
                            .map(|&(t, x)| DensePoint { k, t, x }),
                    );
                }
                (step.x, step.crossed_zero)
            }
        };
        traj.steps.push(Step {
            k,
            t: iv.t,
            x,
            hold: Some(Hold {
                u,
                f,
                b,
                dt: iv.dt,
                crossed_zero: crossed,
            }),
        });
        k += 1;
        t = iv.t + iv.dt;
        x = x_next;
        if !x.is_finite() || x.abs() > opts.overflow_guard {
            traj.steps.push(Step { k, t, x, hold: None });
            traj.events.overflow = true;
            traj.events.diverged = true;
            break;
        }
        if traj.events.converged_at.is_none() && converged(x) {
            traj.events.converged_at = Some(k);
        }
        ts.push(t);
        xs.push(x);
    }
    // Use the schedule's own instants where it has them.
    for step in &mut traj.steps {
        if let Some(&t) = schedule.instants().get(step.k) {
            step.t = t;
        }
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::{Lemma1Adversary, Lemma1Config};
    use crate::control::{LinearController, TimeVaryingGainController, ZeroController};
    use crate::model::{AffinePlant, FnPlant};

    #[test]
    fn linear_gain_on_pure_integrator() {
        let sched = SamplingSchedule::uniform(0.0, 1.0, 4).unwrap();
        let tr = simulate(
            &mut AffinePlant::pure_gain(1.0),
            &sched,
            &LinearController { gain: 1.0 },
            1.0,
            &SimOptions::default(),
        )
        .unwrap();
        let xs: Vec<f64> = tr.xs().collect();
        assert_eq!(xs, vec![1.0, 0.75, 0.5625, 0.421875, 0.31640625]);
        assert_eq!(tr.steps.last().unwrap().t, 1.0);
        assert!(tr.steps.last().unwrap().hold.is_none());
    }

    #[test]
    fn zero_control_holds_state() {
        let sched = SamplingSchedule::uniform(0.0, 1.0, 10).unwrap();
        let tr = simulate(&mut AffinePlant::pure_gain(1.0), &sched, &ZeroController, 3.5, &SimOptions::default()).unwrap();
        assert!(tr.xs().all(|x| x == 3.5));
    }

    #[test]
    fn unbounded_gain_adversary_doubles_state() {
        let sched = SamplingSchedule::geometric(0.5, 40).unwrap();
        let mut plant = Lemma1Adversary::new(Lemma1Config::new(1.0, 3.0).unwrap());
        let ctrl = TimeVaryingGainController { amplitude: 1.0, power: 1 };
        let tr = simulate(&mut plant, &sched, &ctrl, 1.0, &SimOptions::default()).unwrap();
        for (k, x) in tr.xs().enumerate() {
            assert!(x.abs() >= 2f64.powi(k as i32) * (1.0 - 1e-12));
        }
        assert!(tr.events.truncated);
    }

    #[test]
    fn convergence_flag_and_dense_output() {
        let sched = SamplingSchedule::uniform(0.0, 1.0, 4).unwrap();
        let opts = SimOptions {
            eps: Some(0.5),
            dense_points: 8,
            ..SimOptions::default()
        };
        let tr = simulate(&mut AffinePlant::pure_gain(1.0), &sched, &LinearController { gain: 1.0 }, 1.0, &opts).unwrap();
        assert_eq!(tr.events.converged_at, Some(3));
        assert_eq!(tr.dense.len(), 4 * 7);
        for p in &tr.dense {
            let s = &tr.steps[p.k];
            assert!(p.t > s.t && p.t < tr.steps[p.k + 1].t);
        }
    }

    #[test]
    fn general_plant_dense_continuity() {
        let sched = SamplingSchedule::uniform(0.0, 1.0, 5).unwrap();
        let mut plant = FnPlant::new("sin", |x: f64, _| x.sin(), |_, _| 1.0);
        let opts = SimOptions {
            dense_points: 8,
            ..SimOptions::default()
        };
        let tr = simulate(&mut plant, &sched, &LinearController { gain: 2.0 }, 1.0, &opts).unwrap();
        assert_eq!(tr.dense.len(), 5 * 7);
        assert_eq!(tr.steps.len(), 6);
    }

    #[test]
    fn nan_plant_is_a_hard_error() {
        let sched = SamplingSchedule::uniform(0.0, 1.0, 5).unwrap();
        // x_k = 0.8^k; the drift turns NaN inside interval 3 (0.512 -> 0.4096).
        let mut plant = FnPlant::new("nan", |x: f64, _| if x < 0.5 { f64::NAN } else { 0.0 }, |_, _| 1.0);
        let err = simulate(&mut plant, &sched, &LinearController { gain: 1.0 }, 1.0, &SimOptions::default()).unwrap_err();
        match err {
            Error::NonFinite { step, .. } => assert_eq!(step, 3),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn overflow_is_flagged_not_fatal() {
        let sched = SamplingSchedule::uniform(0.0, 1.0, 100).unwrap();
        let mut plant = AffinePlant::new(1e4, 0.0, crate::model::BProfile::Constant(1.0));
        let tr = simulate(&mut plant, &sched, &ZeroController, 1.0, &SimOptions::default()).unwrap();
        assert!(tr.events.overflow && tr.events.diverged);
        assert!(tr.steps.len() < 101);
    }
}
