use proptest::prelude::*;

use ptc_core::adversary::{lemma1_step, lemma2_min_growth, lemma3_f, Lemma2Config, Lemma3Config};
use ptc_core::control::{law_prescribed, psi_bar, LinearController, PhiFunction};
use ptc_core::integrate::{step_affine, step_general, DEFAULT_TOL};
use ptc_core::model::{AffinePlant, BProfile, Psi, UncertaintyClass};
use ptc_core::schedules::SamplingSchedule;
use ptc_core::synth::design_linear;
use ptc_core::{simulate, SimOptions};

fn psi_strategy() -> impl Strategy<Value = Psi> {
    prop_oneof![Just(Psi::Abs), Just(Psi::Square), Just(Psi::SinAbs), Just(Psi::Const(0.5)), Just(Psi::Zero)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn uniform_increments_sum_to_horizon(t0 in -5.0..5.0f64, horizon in 1e-3..100.0f64, n in 1usize..2000) {
        let s = SamplingSchedule::uniform(t0, horizon, n).unwrap();
        let sum: f64 = s.increments().iter().sum();
        prop_assert!((sum - horizon).abs() <= 1e-12 * horizon * n as f64);
        prop_assert_eq!(s.instants()[n], t0 + horizon);
        prop_assert!(s.instants().windows(2).all(|w| w[1] > w[0]));
        let again = SamplingSchedule::uniform(t0, horizon, n).unwrap();
        prop_assert_eq!(s.instants(), again.instants());
    }

    #[test]
    fn accumulating_schedules_shrink(a in 0.05..0.95f64, m in 1u32..4, k_max in 1usize..400) {
        for s in [SamplingSchedule::geometric(a, k_max).unwrap(), SamplingSchedule::stretched(a, m, k_max).unwrap()] {
            prop_assert!(s.increments().iter().all(|&d| d > 0.0));
            prop_assert!(s.time_to_go().windows(2).all(|w| w[1] < w[0]));
            prop_assert!(s.instants().iter().all(|&t| (0.0..=1.0).contains(&t)));
        }
    }

    #[test]
    fn prescribed_law_is_odd(x in -1e6..1e6f64, bl in 0.1..10.0f64, horizon in 0.1..10.0f64, psi in psi_strategy()) {
        let cls = UncertaintyClass::new(bl, None, psi).unwrap();
        let phi = PhiFunction::new(horizon).unwrap();
        prop_assert_eq!(law_prescribed(&cls, &phi, -x), -law_prescribed(&cls, &phi, x));
        prop_assert!(law_prescribed(&cls, &phi, x) * x <= 0.0);
    }

    #[test]
    fn psi_bar_is_monotone(r1 in 0.0..20.0f64, dr in 0.0..20.0f64, psi in psi_strategy()) {
        let cls = UncertaintyClass::bounded(1.0, 2.0, psi).unwrap();
        prop_assert!(psi_bar(&cls, r1, 1).value <= psi_bar(&cls, r1 + dr, 1).value * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn general_agrees_with_affine(x in -10.0..10.0f64, alpha in -5.0..5.0f64, beta in -10.0..10.0f64, dt in 1e-3..1.0f64) {
        let exact = step_affine(x, alpha, beta, dt);
        let num = step_general(x, 0.0, dt, &|_, y| alpha * y + beta, DEFAULT_TOL, 0).unwrap().x;
        prop_assert!((num - exact).abs() <= 10.0 * DEFAULT_TOL * exact.abs().max(1.0));
    }

    #[test]
    fn random_gain_profile_in_range(lo in 0.1..5.0f64, w in 0.0..5.0f64, seed in any::<u64>(), k in 0usize..100_000) {
        let p = BProfile::Random { lo, hi: lo + w, seed };
        let b = p.at(k);
        prop_assert!(b >= lo && b <= lo + w);
        prop_assert_eq!(b, p.at(k));
    }

    #[test]
    fn design_satisfies_invariants(
        bl in 0.1..5.0f64,
        spread in 1.0..4.0f64,
        m in 0.2..100.0f64,
        eps_frac in 0.001..0.9f64,
        horizon in 0.1..10.0f64,
        psi in prop_oneof![Just(Psi::Abs), Just(Psi::Square), Just(Psi::Const(1.0)), Just(Psi::Zero)],
    ) {
        let cls = UncertaintyClass::bounded(bl, bl * spread, psi).unwrap();
        let eps = m * eps_frac;
        let d = design_linear(&cls, m, eps, horizon, None).unwrap();
        prop_assert!(d.violations().is_empty(), "{:?}", d.violations());
        prop_assert!(d.gain_interval_width() >= -1e-9 * d.gain);
        prop_assert!(d.relay_invariance_holds() || d.delta_inv < d.delta);
        let bigger = design_linear(&cls, m * 2.0, eps, horizon, None).unwrap();
        prop_assert!(bigger.delta <= d.delta);
        let smaller_eps = design_linear(&cls, m, eps / 2.0, horizon, None).unwrap();
        prop_assert!(smaller_eps.delta <= d.delta);
    }

    #[test]
    fn unbounded_gain_step_grows(x in -1e3..1e3f64, u in -1e3..1e3f64, dt in 1e-4..1.0f64, c in 2.01..10.0f64) {
        prop_assume!(u != 0.0);
        let next = lemma1_step(x, u, dt, 1.0, c);
        prop_assert!(next.abs() >= (c - 1.0) * x.abs() * (1.0 - 1e-12));
    }

    #[test]
    fn drift_adversary_grows_for_every_gain(x in prop_oneof![-30.0..-1.0f64, 1.0..30.0f64], u in -1e4..1e4f64) {
        let cls = UncertaintyClass::bounded(1.0, 2.0, Psi::Abs).unwrap();
        let cfg = Lemma2Config::new(&cls, 1.0, 32.0, 5, 0.2).unwrap();
        prop_assert!(lemma2_min_growth(x, u, 0.2, &cfg).unwrap() >= cfg.c * (1.0 - 1e-9));
    }

    #[test]
    fn superlinear_adversary_grows(x in prop_oneof![-1e4..-50.0f64, 50.0..1e4f64], u in -1e7..1e7f64) {
        let cfg = Lemma3Config::new(Psi::Square, 2.0, 0.1).unwrap();
        let f = lemma3_f(x, u, 0.1, &cfg);
        let next = step_affine(x, 0.0, f + u, 0.1);
        prop_assert!(next.abs() >= 2.0 * x.abs() * (1.0 - 1e-12));
    }

    #[test]
    fn simulation_is_deterministic_and_holds_control(seed in any::<u64>(), gain in 0.0..5.0f64, x0 in -10.0..10.0f64) {
        let sched = SamplingSchedule::uniform(0.0, 1.0, 16).unwrap();
        let run = || {
            let mut plant = AffinePlant::new(0.3, 0.1, BProfile::Random { lo: 1.0, hi: 2.0, seed });
            simulate(&mut plant, &sched, &LinearController { gain }, x0, &SimOptions { dense_points: 4, ..SimOptions::default() }).unwrap()
        };
        let (a, b) = (run(), run());
        prop_assert_eq!(&a, &b);
        for s in &a.steps {
            if let Some(h) = s.hold {
                prop_assert_eq!(h.u, -gain * s.x);
            }
        }
    }
}
