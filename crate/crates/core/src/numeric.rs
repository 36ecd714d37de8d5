//! Small numerical kernels shared by the control and synthesis modules.

/// `sign` with the selection `sign(0) = 0`.
#[inline]
pub fn sign0(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Golden-section search for a local maximum of `g` on `[lo, hi]`.
/// Returns `(argmax, max)`.
pub fn golden_max(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut g1 = g(x1);
    let mut g2 = g(x2);
    for _ in 0..iters {
        if hi - lo <= f64::EPSILON * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
        if g1 < g2 {
            lo = x1;
            x1 = x2;
            g1 = g2;
            x2 = lo + INV_PHI * (hi - lo);
            g2 = g(x2);
        } else {
            hi = x2;
            x2 = x1;
            g2 = g1;
            x1 = hi - INV_PHI * (hi - lo);
            g1 = g(x1);
        }
    }
    let mut best = if g1 >= g2 { (x1, g1) } else { (x2, g2) };
    for x in [lo, hi] {
        let v = g(x);
        if v > best.1 {
            best = (x, v);
        }
    }
    best
}

/// Maximum of `g` over `[lo, hi]`: uniform grid of `points` samples, then
/// golden-section refinement in the bracket around the grid argmax.
/// Returns `(argmax, max, grid_step)`.
pub fn grid_max(g: impl Fn(f64) -> f64, lo: f64, hi: f64, points: usize) -> (f64, f64, f64) {
    let points = points.max(2);
    let h = (hi - lo) / (points - 1) as f64;
    if h == 0.0 {
        return (lo, g(lo), 0.0);
    }
    let mut best_i = 0;
    let mut best = f64::NEG_INFINITY;
    for i in 0..points {
        let v = g(lo + h * i as f64);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let a = lo + h * best_i.saturating_sub(1) as f64;
    let b = (lo + h * (best_i + 1) as f64).min(hi);
    let (x, v) = golden_max(&g, a, b, 200);
    if v >= best {
        (x, v, h)
    } else {
        (lo + h * best_i as f64, best, h)
    }
}

/// `∫₀^∞ g(z) dz` by the substitution `z = eᵗ` and the trapezoidal rule on
/// `t ∈ [-L, L]`, halving the step until successive sums agree to `rel_tol`.
/// Suitable for integrands with algebraic behaviour at both ends.
pub fn integrate_half_line(g: impl Fn(f64) -> f64, rel_tol: f64) -> f64 {
    let h_of = |t: f64| {
        let z = t.exp();
        if z == 0.0 || !z.is_finite() {
            0.0
        } else {
            g(z) * z
        }
    };
    let half_width = 120.0;
    let mut h = 1.0;
    let mut n = (2.0 * half_width / h) as usize;
    let mut sum: f64 = (0..=n).map(|i| h_of(-half_width + h * i as f64)).sum::<f64>()
        - 0.5 * (h_of(-half_width) + h_of(half_width));
    let mut estimate = sum * h;
    for _ in 0..20 {
        // Add the midpoints of the current grid.
        let mids: f64 = (0..n).map(|i| h_of(-half_width + h * (i as f64 + 0.5))).sum();
        sum += mids;
        h *= 0.5;
        n *= 2;
        let next = sum * h;
        if (next - estimate).abs() <= rel_tol * next.abs() {
            return next;
        }
        estimate = next;
    }
    estimate
}

/// Bits of a `u64` mapped to a uniform double in `[0, 1)`.
#[inline]
pub(crate) fn unit_f64(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
