/// Data held over `[t_k, t_{k+1})`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hold {
    pub u: f64,
    /// `f(x_k, t_k)` of the committed realization.
    pub f: f64,
    /// `b(x_k, t_k)` of the committed realization.
    pub b: f64,
    pub dt: f64,
    pub crossed_zero: bool,
}

/// One sampling instant. The last instant of a run carries no hold.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Step {
    pub k: usize,
    pub t: f64,
    pub x: f64,
    pub hold: Option<Hold>,
}

/// Inter-sample point inside interval `k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensePoint {
    pub k: usize,
    pub t: f64,
    pub x: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Events {
    /// First sampling index `ℓ` with `|x_ℓ| ≤ ε`.
    pub converged_at: Option<usize>,
    pub diverged: bool,
    /// `|x|` exceeded the overflow guard.
    pub overflow: bool,
    /// An infinite schedule was cut at its step cap.
    pub truncated: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub plant_id: String,
    pub controller: String,
    pub config_hash: String,
    pub steps: Vec<Step>,
    pub dense: Vec<DensePoint>,
    pub events: Events,
}

impl Trajectory {
    pub fn xs(&self) -> impl Iterator<Item = f64> + '_ {
        self.steps.iter().map(|s| s.x)
    }

    pub fn final_state(&self) -> f64 {
        self.steps.last().map_or(f64::NAN, |s| s.x)
    }

    /// `(k, |x_{k+1}| / |x_k|)` for every interval with `x_k ≠ 0`.
    pub fn growth_factors(&self) -> Vec<(usize, f64)> {
        self.steps
            .windows(2)
            .filter(|w| w[0].x != 0.0)
            .map(|w| (w[0].k, w[1].x.abs() / w[0].x.abs()))
            .collect()
    }

    /// Dense points of interval `k`.
    pub fn dense_in(&self, k: usize) -> impl Iterator<Item = &DensePoint> {
        self.dense.iter().filter(move |p| p.k == k)
    }
}
