//! Smooth ellipticity cutoff `ζ(s) = s·χ(s)`.

use crate::math;

/// `C^∞` step rising from 0 at `t ≤ 0` to 1 at `t ≥ 1`.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = math::exp(-1.0 / t);
    let b = math::exp(-1.0 / (1.0 - t));
    a / (a + b)
}

/// Cutoff acting as the identity on `[−(1−β)/a, M + 1/a]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cutoff {
    pub a: f64,
    pub beta: f64,
    pub m: f64,
}

impl Cutoff {
    pub fn new(a: f64, beta: f64, m: f64) -> Self {
        Self { a, beta, m }
    }

    /// Interval on which `ζ(s) = s`.
    pub fn identity_interval(&self) -> (f64, f64) {
        (-(1.0 - self.beta) / self.a, self.m + 1.0 / self.a)
    }

    pub fn chi(&self, s: f64) -> f64 {
        let (l1, u1) = self.identity_interval();
        let l0 = -(1.0 - 0.5 * self.beta) / self.a;
        let u2 = self.m + 2.0 / self.a;
        if s < l1 {
            smooth_step((s - l0) / (l1 - l0))
        } else if s > u1 {
            1.0 - smooth_step((s - u1) / (u2 - u1))
        } else {
            1.0
        }
    }

    pub fn zeta(&self, s: f64) -> f64 {
        s * self.chi(s)
    }

    /// True when `ζ` differs from the identity at `s`.
    pub fn is_active(&self, s: f64) -> bool {
        let (l1, u1) = self.identity_interval();
        s < l1 || s > u1
    }
}
