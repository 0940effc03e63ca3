//! Shock-boundary algebra at `Γ_shock`: the combined Rankine–Hugoniot condition
//! `E`, its restriction `F` to the shock, the sonic-coordinate form `Ψ`, and the
//! linearized coefficients `b̂_k`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::reflection_config::ReflectionConfiguration;

/// `E`, `F` and `Ψ` for one configuration.
#[derive(Debug, Clone)]
pub struct ShockBoundaryFns {
    pub config: ReflectionConfiguration,
    gamma: f64,
    rho1: f64,
    rho2: f64,
    u1: f64,
    u2: f64,
    v2: f64,
    xi1: f64,
    eta1: f64,
    c2: f64,
    theta_w: f64,
}

/// One boundary sample `(x, y, ψ, ψ_x, ψ_y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TraceSample {
    pub x: f64,
    pub y: f64,
    pub psi: f64,
    pub psi_x: f64,
    pub psi_y: f64,
}

/// Coefficients `b̂₁, b̂₂, b̂₃` at one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BhatSample {
    pub trace: TraceSample,
    pub b: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BhatReport {
    pub samples: Vec<BhatSample>,
    pub min_b1: f64,
    pub max_abs_b2: f64,
    pub max_abs_b3: f64,
    /// `Ψ_{p₁}(0,0,0,0,y₁)/2`.
    pub lambda: f64,
    /// Largest sampled `x` such that `b̂₁ ≥ λ` on every sample with smaller or equal `x`.
    pub largest_eps: f64,
}

const FD_STEP: f64 = 1e-6;
const SIMPSON_INTERVALS: usize = 32;

impl ShockBoundaryFns {
    pub fn new(config: &ReflectionConfiguration) -> Self {
        Self {
            config: config.clone(),
            gamma: config.gas.gamma,
            rho1: config.gas.rho1,
            rho2: config.state2.rho,
            u1: config.u1,
            u2: config.state2.u,
            v2: config.state2.v,
            xi1: config.p1.0,
            eta1: config.p1.1,
            c2: config.c2,
            theta_w: config.theta_w,
        }
    }

    fn bernoulli_term(&self, p1: f64, p2: f64, p3: f64, xi: f64, eta: f64) -> f64 {
        (xi - self.u2) * p1 + (eta - self.v2) * p2 - 0.5 * (p1 * p1 + p2 * p2) - p3
    }

    /// Density of `φ₂ + ψ` with `Dψ = (p₁, p₂)`, `ψ = p₃`.
    pub fn rho(&self, p1: f64, p2: f64, p3: f64, xi: f64, eta: f64) -> Result<f64> {
        let t = self.bernoulli_term(p1, p2, p3, xi, eta);
        if self.gamma == 1.0 {
            let r = self.rho2 * math::exp(t);
            return if r.is_finite() && r > 0.0 { Ok(r) } else { Err(Error::VacuumState) };
        }
        let gm1 = self.gamma - 1.0;
        let arg = math::powf(self.rho2, gm1) + gm1 * t;
        if !(arg > 0.0) {
            return Err(Error::VacuumState);
        }
        Ok(math::powf(arg, 1.0 / gm1))
    }

    pub fn e(&self, p1: f64, p2: f64, p3: f64, xi: f64, eta: f64) -> Result<f64> {
        let rho = self.rho(p1, p2, p3, xi, eta)?;
        let (u1, u2, v2) = (self.u1, self.u2, self.v2);
        Ok(self.rho1 * ((u1 - xi) * (u1 - u2 - p1) + eta * (v2 + p2))
            - rho * ((u2 - xi + p1) * (u1 - u2 - p1) - (v2 - eta + p2) * (v2 + p2)))
    }

    /// `η` on the shock from `φ = φ₁`.
    pub fn eta_on_shock(&self, p3: f64, xi: f64) -> f64 {
        ((self.u1 - self.u2) * (xi - self.xi1) - p3) / self.v2 + self.eta1
    }

    pub fn f(&self, p1: f64, p2: f64, p3: f64, xi: f64) -> Result<f64> {
        self.e(p1, p2, p3, xi, self.eta_on_shock(p3, xi))
    }

    /// Arguments of `F` produced by the sonic-coordinate rotation.
    fn rotate(&self, p1: f64, p2: f64, x: f64, y: f64) -> (f64, f64, f64) {
        let (s, c) = (math::sin(y + self.theta_w), math::cos(y + self.theta_w));
        let r = self.c2 - x;
        (-p1 * c - p2 / r * s, -p1 * s + p2 / r * c, self.u2 + r * c)
    }

    pub fn psi(&self, p1: f64, p2: f64, p3: f64, x: f64, y: f64) -> Result<f64> {
        let (q1, q2, xi) = self.rotate(p1, p2, x, y);
        self.f(q1, q2, p3, xi)
    }

    /// Central-difference gradient of `Ψ` in `(p₁, p₂, p₃)`.
    pub fn psi_partials(&self, p: [f64; 3], x: f64, y: f64) -> Result<[f64; 3]> {
        let mut out = [0.0; 3];
        for k in 0..3 {
            let h = FD_STEP * (1.0 + p[k].abs());
            let mut pp = p;
            let mut pm = p;
            pp[k] += h;
            pm[k] -= h;
            out[k] = (self.psi(pp[0], pp[1], pp[2], x, y)? - self.psi(pm[0], pm[1], pm[2], x, y)?)
                / (2.0 * h);
        }
        Ok(out)
    }

    /// Closed form of `Ψ_{p₁}(0,0,0,0,y₁)` in terms of the state constants at `P₁`.
    pub fn psi_p1_at_p1(&self) -> f64 {
        let (xi1, eta1) = (self.xi1, self.eta1);
        let (u1, u2, v2) = (self.u1, self.u2, self.v2);
        self.rho1 / self.c2 * ((u1 - xi1) * (xi1 - u2) - eta1 * (eta1 - v2))
            - self.rho2 / self.c2 * ((u2 - xi1) * (xi1 - u2) + (v2 - eta1) * (eta1 - v2))
    }

    /// The same quantity as `(ρ₂ − ρ₁)(Dφ₂(P₁)·τ₀)²/c₂`.
    pub fn psi_p1_at_p1_tangential(&self) -> f64 {
        let tau = self.config.s1_direction;
        let d2 = (self.u2 - self.xi1, self.v2 - self.eta1);
        let dt = d2.0 * tau.0 + d2.1 * tau.1;
        (self.rho2 - self.rho1) * dt * dt / self.c2
    }

    /// Smallest positive Bernoulli argument along `t ↦ t·p` for `t ∈ [0, 2]`.
    ///
    /// The sample lies inside the domain ball when this stays positive, which
    /// places `|p|` within half the distance to vacuum along its ray.
    fn ray_margin(&self, p: [f64; 3], x: f64, y: f64) -> f64 {
        if self.gamma == 1.0 {
            return f64::INFINITY;
        }
        let gm1 = self.gamma - 1.0;
        let arg = |t: f64| {
            let (q1, q2, xi) = self.rotate(t * p[0], t * p[1], x, y);
            let eta = self.eta_on_shock(t * p[2], xi);
            math::powf(self.rho2, gm1) + gm1 * self.bernoulli_term(q1, q2, t * p[2], xi, eta)
        };
        // The argument is quadratic in t.
        let (a0, a1, a2) = (arg(0.0), arg(1.0), arg(2.0));
        let c2 = 0.5 * (a2 - 2.0 * a1 + a0);
        let c1 = a1 - a0 - c2;
        let mut m = a0.min(a2);
        if c2 > 0.0 {
            let ts = -c1 / (2.0 * c2);
            if ts > 0.0 && ts < 2.0 {
                m = m.min(a0 + c1 * ts + c2 * ts * ts);
            }
        }
        m
    }

    /// `b̂_k = ∫₀¹ Ψ_{p_k}(tψ_x, tψ_y, tψ, x, y) dt` by composite Simpson.
    pub fn bhat_at(&self, s: &TraceSample) -> Result<[f64; 3]> {
        let p = [s.psi_x, s.psi_y, s.psi];
        if !(self.ray_margin(p, s.x, s.y) > 0.0) || s.x >= self.c2 {
            return Err(Error::OutsideDomain);
        }
        let n = SIMPSON_INTERVALS;
        let mut acc = [0.0; 3];
        for i in 0..=n {
            let t = i as f64 / n as f64;
            let w = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let d = self.psi_partials([t * p[0], t * p[1], t * p[2]], s.x, s.y)?;
            for k in 0..3 {
                acc[k] += w * d[k];
            }
        }
        let scale = 1.0 / (3.0 * n as f64);
        Ok([acc[0] * scale, acc[1] * scale, acc[2] * scale])
    }

    pub fn bhat_coefficients(&self, trace: &[TraceSample]) -> Result<BhatReport> {
        let lambda = 0.5 * self.psi_p1_at_p1();
        let mut samples = Vec::with_capacity(trace.len());
        for s in trace {
            samples.push(BhatSample { trace: *s, b: self.bhat_at(s)? });
        }
        let mut order: Vec<usize> = (0..samples.len()).collect();
        order.sort_by(|&i, &j| samples[i].trace.x.total_cmp(&samples[j].trace.x));
        let mut largest_eps = 0.0;
        for &i in &order {
            if samples[i].b[0] >= lambda {
                largest_eps = samples[i].trace.x;
            } else {
                break;
            }
        }
        let fold = |f: fn(&BhatSample) -> f64, init: f64, max: bool| {
            samples.iter().map(f).fold(init, |a, b| if max { a.max(b) } else { a.min(b) })
        };
        Ok(BhatReport {
            min_b1: fold(|s| s.b[0], f64::INFINITY, false),
            max_abs_b2: fold(|s| s.b[1].abs(), 0.0, true),
            max_abs_b3: fold(|s| s.b[2].abs(), 0.0, true),
            lambda,
            largest_eps,
            samples,
        })
    }
}

/// `g(s) = (2/(γ+1))s^{γ−1} + ((γ−1)/(γ+1))s^{−2}`.
pub fn g_function(s: f64, gamma: f64) -> f64 {
    2.0 / (gamma + 1.0) * math::powf(s, gamma - 1.0) + (gamma - 1.0) / (gamma + 1.0) / (s * s)
}

fn g_derivative(s: f64, gamma: f64) -> f64 {
    2.0 * (gamma - 1.0) / (gamma + 1.0) * (math::powf(s, gamma - 2.0) - 1.0 / (s * s * s))
}

/// Confirms on a log grid over `[10⁻³, 10³]` that `g = 1` only at `s = 1`.
pub fn check_g_unique(gamma: f64) -> bool {
    if !(gamma > 1.0) {
        return false;
    }
    let n = 100_000usize;
    let (l0, l1) = (math::ln(1e-3), math::ln(1e3));
    let node = |i: usize| math::exp(l0 + (l1 - l0) * i as f64 / (n - 1) as f64);
    let mut i_one = 0;
    let mut best = f64::INFINITY;
    for i in 0..n {
        let d = (node(i) - 1.0).abs();
        if d < best {
            best = d;
            i_one = i;
        }
    }
    (0..n).all(|i| {
        if i.abs_diff(i_one) <= 1 {
            return true;
        }
        let s = node(i);
        let sign_ok = if s < 1.0 { g_derivative(s, gamma) < 0.0 } else { g_derivative(s, gamma) > 0.0 };
        g_function(s, gamma) > 1.0 && sign_ok
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euler_states::GasParameters;
    use crate::reflection_config::solve_state2;

    fn fns() -> ShockBoundaryFns {
        let g = GasParameters::new(1.4, 1.0, 2.0).unwrap();
        ShockBoundaryFns::new(&solve_state2(&g, core::f64::consts::PI / 3.0).unwrap().weak)
    }

    #[test]
    fn anchors_at_p1() {
        let f = fns();
        let (xi1, eta1) = f.config.p1;
        assert!(f.e(0.0, 0.0, 0.0, xi1, eta1).unwrap().abs() < 1e-13);
        assert_eq!(f.rho(0.0, 0.0, 0.0, 0.3, -2.0).unwrap(), f.config.state2.rho);
        let y1 = f.config.y1();
        assert!(f.psi(0.0, 0.0, 0.0, 0.0, y1).unwrap().abs() < 1e-13);
    }

    #[test]
    fn f_vanishes_for_every_xi() {
        let f = fns();
        for i in 0..20 {
            let xi = f.config.p1.0 - 1.0 + 2.0 * i as f64 / 19.0;
            assert!(f.f(0.0, 0.0, 0.0, xi).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn psi_p1_forms_agree() {
        let f = fns();
        let a = f.psi_p1_at_p1();
        let b = f.psi_p1_at_p1_tangential();
        assert!((a - 1.034_437_802_810_313).abs() < 1e-12, "{a}");
        assert!((a - b).abs() < 1e-10);
        let d = f.psi_partials([0.0; 3], 0.0, f.config.y1()).unwrap();
        assert!((d[0] - a).abs() < 1e-6 * a);
        assert!((d[1] - 2.131_946_97).abs() < 1e-6);
        assert!((d[2] - 2.845_711_54).abs() < 1e-6);
    }

    #[test]
    fn zero_trace_gives_pointwise_partials() {
        let f = fns();
        let s = TraceSample { x: 0.0, y: f.config.y1(), psi: 0.0, psi_x: 0.0, psi_y: 0.0 };
        let b = f.bhat_at(&s).unwrap();
        assert!((b[0] - f.psi_p1_at_p1()).abs() < 1e-6);
    }

    #[test]
    fn far_trace_is_outside_domain() {
        let f = fns();
        let s = TraceSample { x: 0.0, y: f.config.y1(), psi: 40.0, psi_x: 0.0, psi_y: 0.0 };
        assert_eq!(f.bhat_at(&s), Err(Error::OutsideDomain));
    }

    #[test]
    fn g_values() {
        for gamma in [1.1, 1.4, 2.0, 3.0] {
            assert!((g_function(1.0, gamma) - 1.0).abs() < 1e-15);
            assert!(check_g_unique(gamma));
        }
        assert!((g_function(2.0, 1.4) - 1.141_256_6).abs() < 1e-7);
        assert!(!check_g_unique(1.0));
    }
}
