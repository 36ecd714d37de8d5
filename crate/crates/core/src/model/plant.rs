use std::fmt;
use std::sync::Arc;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::integrate::step_affine;
use crate::model::Psi;
use crate::numeric::{sign0, unit_f64};

/// What a plant sees when it commits the data for `[t_k, t_k + dt)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntervalContext {
    pub k: usize,
    pub t: f64,
    pub dt: f64,
    pub x: f64,
    /// Control held over the interval.
    pub u: f64,
}

pub type StateFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Plant data committed for one hold interval.
#[derive(Clone)]
pub enum Realization {
    /// `f(x) = f_slope·x + f_offset`, `b` constant: solved in closed form.
    Affine { f_slope: f64, f_offset: f64, b: f64 },
    /// Arbitrary `f(x, t)` and `b(x, t)`, integrated numerically.
    General { f: StateFn, b: StateFn },
}

impl Realization {
    pub fn constant(f: f64, b: f64) -> Self {
        Realization::Affine {
            f_slope: 0.0,
            f_offset: f,
            b,
        }
    }

    pub fn f_at(&self, x: f64, t: f64) -> f64 {
        match self {
            Realization::Affine { f_slope, f_offset, .. } => f_slope * x + f_offset,
            Realization::General { f, .. } => f(x, t),
        }
    }

    pub fn b_at(&self, x: f64, t: f64) -> f64 {
        match self {
            Realization::Affine { b, .. } => *b,
            Realization::General { b, .. } => b(x, t),
        }
    }
}

impl fmt::Debug for Realization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Realization::Affine { f_slope, f_offset, b } => f
                .debug_struct("Affine")
                .field("f_slope", f_slope)
                .field("f_offset", f_offset)
                .field("b", b)
                .finish(),
            Realization::General { .. } => f.write_str("General"),
        }
    }
}

/// The uncertain pair `(f, b)` of `ẋ = f(x,t) + b(x,t)u`.
///
/// A plant is asked once per hold interval, after the controller has chosen
/// the held value. Honest plants ignore `ctx.u` and `ctx.k`; adversarial
/// plants use them to commit worst-case data. A plant instance belongs to a
/// single simulation.
pub trait Plant: Send {
    fn id(&self) -> &str;

    fn realize(&mut self, ctx: &IntervalContext) -> Result<Realization>;
}

impl<P: Plant + ?Sized> Plant for Box<P> {
    fn id(&self) -> &str {
        (**self).id()
    }

    fn realize(&mut self, ctx: &IntervalContext) -> Result<Realization> {
        (**self).realize(ctx)
    }
}

/// Per-interval input gain sequence.
#[derive(Clone, Debug, PartialEq)]
pub enum BProfile {
    Constant(f64),
    /// `lo` on even intervals, `hi` on odd ones.
    Alternating { lo: f64, hi: f64 },
    /// Uniform in `[lo, hi]`, drawn from a ChaCha stream keyed by `(seed, k)`.
    Random { lo: f64, hi: f64, seed: u64 },
}

impl BProfile {
    pub fn at(&self, k: usize) -> f64 {
        match *self {
            BProfile::Constant(b) => b,
            BProfile::Alternating { lo, hi } => {
                if k.is_multiple_of(2) {
                    lo
                } else {
                    hi
                }
            }
            BProfile::Random { lo, hi, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(k as u64);
                lo + (hi - lo) * unit_f64(rng.next_u64())
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            BProfile::Constant(b) => format!("b={b}"),
            BProfile::Alternating { lo, hi } => format!("b=alt[{lo},{hi}]"),
            BProfile::Random { lo, hi, seed } => format!("b=rand[{lo},{hi}]#{seed}"),
        }
    }

    pub fn with_seed(&self, new_seed: u64) -> Self {
        match self {
            BProfile::Random { lo, hi, .. } => BProfile::Random {
                lo: *lo,
                hi: *hi,
                seed: new_seed,
            },
            other => other.clone(),
        }
    }
}

/// `f(x) = slope·x + offset` with a gain profile.
#[derive(Clone, Debug)]
pub struct AffinePlant {
    id: String,
    pub f_slope: f64,
    pub f_offset: f64,
    pub b: BProfile,
}

impl AffinePlant {
    pub fn new(f_slope: f64, f_offset: f64, b: BProfile) -> Self {
        Self {
            id: format!("affine(f={f_slope}x+{f_offset},{})", b.label()),
            f_slope,
            f_offset,
            b,
        }
    }

    /// `f ≡ 0` with constant gain.
    pub fn pure_gain(b: f64) -> Self {
        Self::new(0.0, 0.0, BProfile::Constant(b))
    }
}

impl Plant for AffinePlant {
    fn id(&self) -> &str {
        &self.id
    }

    fn realize(&mut self, ctx: &IntervalContext) -> Result<Realization> {
        Ok(Realization::Affine {
            f_slope: self.f_slope,
            f_offset: self.f_offset,
            b: self.b.at(ctx.k),
        })
    }
}

/// How an [`EnvelopePlant`] orients `f = s_k·ψ(x)` on each interval.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnvelopeMode {
    Zero,
    /// `s_k = sign(x_k)`: pushes away from the origin.
    Outward,
    /// `s_k = -sign(x_k)`.
    Inward,
    /// `s_k = (-1)^k`.
    Flipping,
}

impl EnvelopeMode {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "zero" => Ok(Self::Zero),
            "outward" => Ok(Self::Outward),
            "inward" => Ok(Self::Inward),
            "flipping" => Ok(Self::Flipping),
            other => Err(Error::invalid(format!("unknown envelope mode `{other}`"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Zero => "zero",
            Self::Outward => "outward",
            Self::Inward => "inward",
            Self::Flipping => "flipping",
        }
    }
}

/// Drift riding the envelope, `f(x,t) = s_k·ψ(x(t))`, so `|f| ≤ ψ(x)` holds
/// along the whole interval, not only at the sample.
#[derive(Clone, Debug)]
pub struct EnvelopePlant {
    id: String,
    psi: Psi,
    mode: EnvelopeMode,
    b: BProfile,
}

impl EnvelopePlant {
    pub fn new(psi: Psi, mode: EnvelopeMode, b: BProfile) -> Self {
        Self {
            id: format!("envelope({},{},{})", psi.name(), mode.name(), b.label()),
            psi,
            mode,
            b,
        }
    }
}

impl Plant for EnvelopePlant {
    fn id(&self) -> &str {
        &self.id
    }

    fn realize(&mut self, ctx: &IntervalContext) -> Result<Realization> {
        let b = self.b.at(ctx.k);
        let s = match self.mode {
            EnvelopeMode::Zero => return Ok(Realization::constant(0.0, b)),
            EnvelopeMode::Outward => sign0(ctx.x),
            EnvelopeMode::Inward => -sign0(ctx.x),
            EnvelopeMode::Flipping => {
                if ctx.k.is_multiple_of(2) {
                    1.0
                } else {
                    -1.0
                }
            }
        };
        if s == 0.0 {
            return Ok(Realization::constant(0.0, b));
        }
        let psi = self.psi.clone();
        Ok(Realization::General {
            f: Arc::new(move |x, _t| s * psi.eval(x)),
            b: Arc::new(move |_x, _t| b),
        })
    }
}

/// Interval-wise worst case of the relaxed inclusion `|f| ≤ F`, `b ∈ {b̲, b̄}`:
/// commits the constant pair maximizing `|x_{k+1}|`.
///
/// `F` is `inner_bound` while `|x_k| ≤ radius` and `outer_bound` otherwise.
#[derive(Clone, Debug)]
pub struct WorstCasePlant {
    id: String,
    pub inner_bound: f64,
    pub outer_bound: f64,
    pub radius: f64,
    pub b_lower: f64,
    pub b_upper: f64,
}

impl WorstCasePlant {
    pub fn new(inner_bound: f64, outer_bound: f64, radius: f64, b_lower: f64, b_upper: f64) -> Self {
        Self {
            id: format!("worst_case(F={inner_bound}|{outer_bound}@{radius},b=[{b_lower},{b_upper}])"),
            inner_bound,
            outer_bound,
            radius,
            b_lower,
            b_upper,
        }
    }

    pub fn uniform(bound: f64, b_lower: f64, b_upper: f64) -> Self {
        Self::new(bound, bound, f64::INFINITY, b_lower, b_upper)
    }
}

impl Plant for WorstCasePlant {
    fn id(&self) -> &str {
        &self.id
    }

    fn realize(&mut self, ctx: &IntervalContext) -> Result<Realization> {
        let bound = if ctx.x.abs() <= self.radius {
            self.inner_bound
        } else {
            self.outer_bound
        };
        let mut best = (f64::NEG_INFINITY, 0.0, self.b_lower);
        for f in [bound, -bound] {
            for b in [self.b_lower, self.b_upper] {
                let next = step_affine(ctx.x, 0.0, f + b * ctx.u, ctx.dt).abs();
                if next > best.0 {
                    best = (next, f, b);
                }
            }
        }
        Ok(Realization::constant(best.1, best.2))
    }
}

/// Honest plant from arbitrary closures `f(x,t)` and `b(x,t)`.
#[derive(Clone)]
pub struct FnPlant {
    id: String,
    f: StateFn,
    b: StateFn,
}

impl FnPlant {
    pub fn new(
        id: impl Into<String>,
        f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        b: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            id: id.into(),
            f: Arc::new(f),
            b: Arc::new(b),
        }
    }
}

impl Plant for FnPlant {
    fn id(&self) -> &str {
        &self.id
    }

    fn realize(&mut self, _ctx: &IntervalContext) -> Result<Realization> {
        Ok(Realization::General {
            f: self.f.clone(),
            b: self.b.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(k: usize, x: f64, u: f64) -> IntervalContext {
        IntervalContext { k, t: 0.0, dt: 0.1, x, u }
    }

    #[test]
    fn random_profile_is_keyed_by_seed_and_step() {
        let p = BProfile::Random { lo: 1.0, hi: 2.0, seed: 7 };
        let a: Vec<f64> = (0..50).map(|k| p.at(k)).collect();
        let b: Vec<f64> = (0..50).rev().map(|k| p.at(k)).rev().collect();
        assert_eq!(a, b);
        assert!(a.iter().all(|&v| (1.0..=2.0).contains(&v)));
        assert_ne!(a[0], a[1]);
        assert_ne!(p.at(3), p.with_seed(8).at(3));
    }

    #[test]
    fn alternating_profile() {
        let p = BProfile::Alternating { lo: 1.0, hi: 2.0 };
        assert_eq!([p.at(0), p.at(1), p.at(2)], [1.0, 2.0, 1.0]);
    }

    #[test]
    fn worst_case_picks_largest_next_state() {
        let mut p = WorstCasePlant::uniform(10.0, 1.0, 2.0);
        // x = 1, u = -400, dt = 0.1: candidates 1 + 0.1(±10 - b·400).
        let r = p.realize(&ctx(0, 1.0, -400.0)).unwrap();
        assert_eq!(r.f_at(0.0, 0.0), -10.0);
        assert_eq!(r.b_at(0.0, 0.0), 2.0);
    }

    #[test]
    fn envelope_orientation() {
        let mut p = EnvelopePlant::new(Psi::Abs, EnvelopeMode::Outward, BProfile::Constant(1.0));
        let r = p.realize(&ctx(0, -2.0, 0.0)).unwrap();
        assert_eq!(r.f_at(-3.0, 0.0), -3.0);
        let mut p = EnvelopePlant::new(Psi::Abs, EnvelopeMode::Flipping, BProfile::Constant(1.0));
        assert_eq!(p.realize(&ctx(1, 5.0, 0.0)).unwrap().f_at(2.0, 0.0), -2.0);
    }
}
