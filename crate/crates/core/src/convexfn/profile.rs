//! Exact one-dimensional arithmetic on continuous piecewise-linear functions.
//!
//! A [`Profile`] stores the knots of a continuous piecewise-linear function
//! on an interval together with its values there. Max-of-affine functions,
//! their differences and their restrictions are all of this form, and
//! `∫ |g|^q` over each linear segment has a closed form for every real
//! `q ≥ 0`, so `L^q` norms and distances in one dimension are exact up to
//! rounding.

use super::PLConvexFn;

#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl Profile {
    /// Restriction of a one-dimensional max-of-affine function to `[lo, hi]`,
    /// with a knot at every kink of the upper envelope.
    pub fn of(f: &PLConvexFn, lo: f64, hi: f64) -> Self {
        debug_assert_eq!(f.dim(), 1);
        let xs = envelope_knots(f, lo, hi);
        let ys = xs.iter().map(|&x| f.value_at(&[x])).collect();
        Profile { xs, ys }
    }

    pub fn from_knots(xs: Vec<f64>, ys: Vec<f64>) -> Self {
        debug_assert!(xs.len() == ys.len() && xs.len() >= 2);
        debug_assert!(xs.windows(2).all(|w| w[0] < w[1]));
        Profile { xs, ys }
    }

    pub fn knots(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[f64] {
        &self.ys
    }

    pub fn lo(&self) -> f64 {
        self.xs[0]
    }

    pub fn hi(&self) -> f64 {
        self.xs[self.xs.len() - 1]
    }

    /// Linear interpolation; `x` is clamped into the knot range.
    pub fn value_at(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        let j = self.xs.partition_point(|&k| k <= x) - 1;
        let (x0, x1) = (self.xs[j], self.xs[j + 1]);
        let t = (x - x0) / (x1 - x0);
        self.ys[j] + t * (self.ys[j + 1] - self.ys[j])
    }

    /// Pointwise difference `self - other` on the common knot set. Both
    /// profiles must span the same interval.
    pub fn sub(&self, other: &Profile) -> Profile {
        let mut xs = Vec::with_capacity(self.xs.len() + other.xs.len());
        let mut ys = Vec::with_capacity(xs.capacity());
        let (mut i, mut j) = (0, 0);
        while i < self.xs.len() || j < other.xs.len() {
            let xa = self.xs.get(i).copied().unwrap_or(f64::INFINITY);
            let xb = other.xs.get(j).copied().unwrap_or(f64::INFINITY);
            let (x, ya, yb) = if xa == xb {
                let v = (xa, self.ys[i], other.ys[j]);
                i += 1;
                j += 1;
                v
            } else if xa < xb {
                let v = (xa, self.ys[i], other.value_at(xa));
                i += 1;
                v
            } else {
                let v = (xb, self.value_at(xb), other.ys[j]);
                j += 1;
                v
            };
            if xs.last().is_some_and(|&last| x <= last) {
                continue;
            }
            xs.push(x);
            ys.push(ya - yb);
        }
        Profile { xs, ys }
    }

    /// Restriction to `[lo, hi] ⊆ [self.lo(), self.hi()]`.
    pub fn restrict(&self, lo: f64, hi: f64) -> Profile {
        let mut xs = vec![lo];
        let mut ys = vec![self.value_at(lo)];
        for (&x, &y) in self.xs.iter().zip(&self.ys) {
            if x > lo && x < hi {
                xs.push(x);
                ys.push(y);
            }
        }
        xs.push(hi);
        ys.push(self.value_at(hi));
        Profile { xs, ys }
    }

    /// `∫ |g|^q` over the profile's interval, exact per linear segment.
    pub fn integrate_abs_pow(&self, q: f64) -> f64 {
        self.xs
            .windows(2)
            .zip(self.ys.windows(2))
            .map(|(x, y)| segment_abs_pow(x[1] - x[0], y[0], y[1], q))
            .sum()
    }

    /// `max |g|`, attained at a knot.
    pub fn sup_abs(&self) -> f64 {
        self.ys.iter().fold(0.0, |m, y| m.max(y.abs()))
    }
}

/// `∫₀ʰ |y0 + (y1 - y0) t/h|^q dt`.
fn segment_abs_pow(h: f64, y0: f64, y1: f64, q: f64) -> f64 {
    if h <= 0.0 {
        return 0.0;
    }
    let (a, b) = (y0.abs(), y1.abs());
    if y0 * y1 < 0.0 {
        // split at the root
        let h0 = h * a / (a + b);
        return (h0 * a.powf(q) + (h - h0) * b.powf(q)) / (q + 1.0);
    }
    h * ramp_power_mean(a, b, q)
}

/// Mean of `t^q` along the linear ramp from `a` to `b` (both ≥ 0):
/// `(b^{q+1} - a^{q+1}) / ((q + 1)(b - a))`, evaluated without cancellation.
fn ramp_power_mean(a: f64, b: f64, q: f64) -> f64 {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    if hi == 0.0 {
        return 0.0;
    }
    if q.fract() == 0.0 && q <= 32.0 {
        let n = q as i32;
        let mut sum = 0.0;
        for k in 0..=n {
            sum += lo.powi(k) * hi.powi(n - k);
        }
        return sum / (q + 1.0);
    }
    let s = 1.0 - lo / hi;
    if s == 0.0 {
        return hi.powf(q);
    }
    hi.powf(q) * -((q + 1.0) * (-s).ln_1p()).exp_m1() / ((q + 1.0) * s)
}

/// Knots of the upper envelope of the pieces of `f` on `[lo, hi]`.
fn envelope_knots(f: &PLConvexFn, lo: f64, hi: f64) -> Vec<f64> {
    let lines: Vec<(f64, f64)> = f.pieces().iter().map(|p| (p.slope[0], p.intercept)).collect();
    let value = |k: usize, x: f64| lines[k].0 * x + lines[k].1;

    // active line at lo: highest value, ties broken by larger slope
    let mut active = 0;
    for k in 1..lines.len() {
        let (vk, va) = (value(k, lo), value(active, lo));
        if vk > va || (vk == va && lines[k].0 > lines[active].0) {
            active = k;
        }
    }
    let mut xs = vec![lo];
    let mut x = lo;
    loop {
        let (sa, ca) = lines[active];
        let mut next: Option<(f64, usize)> = None;
        for (k, &(s, c)) in lines.iter().enumerate() {
            if s <= sa {
                continue;
            }
            let xi = (ca - c) / (s - sa);
            if xi <= x || xi >= hi {
                continue;
            }
            next = match next {
                Some((bx, bk)) if xi > bx || (xi == bx && s <= lines[bk].0) => Some((bx, bk)),
                _ => Some((xi, k)),
            };
        }
        match next {
            Some((xi, k)) => {
                xs.push(xi);
                x = xi;
                active = k;
            }
            None => break,
        }
    }
    xs.push(hi);
    xs
}
