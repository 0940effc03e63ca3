//! State (2), the reflected shock line `S₁`, the sonic circle of state (2) and the
//! sonic chart `x = c₂ − r`, `y = θ − θ_w`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::euler_states::{incident_shock, rh_residual, GasParameters, UniformState};
use crate::math;

pub type Point = (f64, f64);

/// Root of the state (2) algebra.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Branch {
    Weak,
    Strong,
}

/// Wedge half-plane domain `Λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WedgeGeometry {
    pub theta_w: f64,
}

impl WedgeGeometry {
    pub fn new(theta_w: f64) -> Result<Self> {
        if !(theta_w > 0.0 && theta_w < core::f64::consts::FRAC_PI_2) {
            return Err(Error::InvalidParameter("theta_w must lie in (0, pi/2)"));
        }
        Ok(Self { theta_w })
    }

    /// Membership in `{ξ<0, η>0} ∪ {η > ξ tanθ_w, ξ>0}`.
    pub fn contains(&self, p: Point) -> bool {
        (p.0 < 0.0 && p.1 > 0.0) || (p.0 >= 0.0 && p.1 > p.0 * math::tan(self.theta_w))
    }
}

/// A converged regular-reflection configuration.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReflectionConfiguration {
    pub gas: GasParameters,
    pub theta_w: f64,
    pub xi0: f64,
    pub u1: f64,
    pub state1: UniformState,
    pub state2: UniformState,
    pub c2: f64,
    pub p0: Point,
    pub p1: Point,
    pub p4: Point,
    pub s1_direction: Point,
    pub branch: Branch,
    /// `|Dφ₂(P₀)| > c₂`; a weak root violating this is kept but flagged.
    pub supersonic_at_p0: bool,
    pub continuity_residual: f64,
    pub rh_residual: f64,
}

/// Both roots of the state (2) algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct State2Roots {
    pub weak: ReflectionConfiguration,
    pub strong: Option<ReflectionConfiguration>,
}

impl State2Roots {
    pub fn get(&self, branch: Branch) -> Option<&ReflectionConfiguration> {
        match branch {
            Branch::Weak => Some(&self.weak),
            Branch::Strong => self.strong.as_ref(),
        }
    }
}

/// Invariant residuals of a configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantReport {
    pub v2_exact: bool,
    pub entropy: bool,
    pub supersonic_at_p0: bool,
    pub p1_circle_error: f64,
    pub p1_sonic_error: f64,
    pub s1_continuity_error: f64,
    pub p4_wedge_error: f64,
}

impl InvariantReport {
    pub fn all_hold(&self, tol: f64) -> bool {
        self.v2_exact
            && self.entropy
            && self.supersonic_at_p0
            && self.p1_circle_error <= tol
            && self.p1_sonic_error <= tol
            && self.s1_continuity_error <= tol
            && self.p4_wedge_error <= tol
    }
}

struct Setup {
    gas: GasParameters,
    theta_w: f64,
    tan_t: f64,
    sec2: f64,
    xi0: f64,
    u1: f64,
}

impl Setup {
    fn new(gas: &GasParameters, theta_w: f64) -> Result<Self> {
        WedgeGeometry::new(theta_w)?;
        GasParameters::new(gas.gamma, gas.rho0, gas.rho1)?;
        let (xi0, u1) = incident_shock(gas)?;
        let c = math::cos(theta_w);
        Ok(Self { gas: *gas, theta_w, tan_t: math::tan(theta_w), sec2: 1.0 / (c * c), xi0, u1 })
    }

    fn rho2(&self, u2: f64) -> Result<f64> {
        self.gas.density_from_head(self.sec2 * (0.5 * u2 * u2 - u2 * self.xi0))
    }

    /// Mass balance across `S₁` at `P₀`, scaled by `|n|/u₂` so that `u₂ = 0` is not a root.
    fn g(&self, u2: f64) -> Result<f64> {
        let v2 = u2 * self.tan_t;
        let eta0 = self.xi0 * self.tan_t;
        let rho2 = self.rho2(u2)?;
        let r1 = self.gas.rho1;
        let f = r1 * ((self.u1 - self.xi0) * (self.u1 - u2) + eta0 * v2)
            - rho2 * ((u2 - self.xi0) * (self.u1 - u2) - (v2 - eta0) * v2);
        Ok(f / u2)
    }

    fn scan_nodes(&self) -> Vec<f64> {
        let hi = 2.0 * self.xi0;
        let mut nodes = Vec::with_capacity(1400);
        // Log-spaced head resolves weak roots near u₂ = 0 at grazing wedges.
        let (l0, l1) = (math::ln(1e-9 * self.xi0), math::ln(1e-2 * self.xi0));
        let nl = 400;
        for i in 0..nl {
            nodes.push(math::exp(l0 + (l1 - l0) * i as f64 / nl as f64));
        }
        let nu = 1000;
        let lo = 1e-2 * self.xi0;
        for i in 0..nu {
            nodes.push(lo + (hi - lo) * i as f64 / (nu - 1) as f64);
        }
        nodes
    }

    fn refine(&self, mut a: f64, mut b: f64) -> Result<f64> {
        let mut ga = self.g(a)?;
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            let gm = self.g(m)?;
            if gm == 0.0 {
                return Ok(m);
            }
            if (ga < 0.0) == (gm < 0.0) {
                a = m;
                ga = gm;
            } else {
                b = m;
            }
        }
        let mut u = 0.5 * (a + b);
        // Newton polish; a step is kept only if it lowers |g|.
        for _ in 0..3 {
            let gu = self.g(u)?;
            let h = 1e-7 * u.abs().max(1e-12);
            let dg = (self.g(u + h)? - self.g(u - h)?) / (2.0 * h);
            if dg == 0.0 || !dg.is_finite() {
                break;
            }
            let cand = u - gu / dg;
            match self.g(cand) {
                Ok(gc) if gc.abs() < gu.abs() => u = cand,
                _ => break,
            }
        }
        Ok(u)
    }

    fn roots(&self) -> Vec<f64> {
        let nodes = self.scan_nodes();
        let vals: Vec<Option<f64>> = nodes
            .iter()
            .map(|&u| self.g(u).ok().filter(|v| v.is_finite()))
            .collect();
        let mut roots = Vec::new();
        for i in 0..nodes.len() - 1 {
            if let (Some(ga), Some(gb)) = (vals[i], vals[i + 1]) {
                if ga == 0.0 {
                    roots.push(nodes[i]);
                } else if (ga < 0.0) != (gb < 0.0) {
                    if let Ok(r) = self.refine(nodes[i], nodes[i + 1]) {
                        roots.push(r);
                    }
                }
            }
        }
        roots
    }

    fn build(&self, u2: f64, branch: Branch) -> Result<ReflectionConfiguration> {
        let gas = self.gas;
        let v2 = u2 * self.tan_t;
        let eta0 = self.xi0 * self.tan_t;
        let rho2 = self.rho2(u2)?;
        let state1 = UniformState::state1(&gas, self.xi0, self.u1);
        let state2 = UniformState { u: u2, v: v2, k: -u2 * self.xi0 - v2 * eta0, rho: rho2 };
        let c2 = math::sqrt(gas.sound_speed_sq(rho2));
        let p0 = (self.xi0, eta0);
        let center = (u2, v2);
        let n = (self.u1 - u2, -v2);
        let nn = math::hypot(n.0, n.1);
        let mut d = (n.1 / nn, -n.0 / nn);
        if d.0 * (center.0 - p0.0) + d.1 * (center.1 - p0.1) < 0.0 {
            d = (-d.0, -d.1);
        }
        let p1 = line_circle(p0, d, center, c2).ok_or(Error::NoSonicIntersection)?;
        let p4 = (center.0 + c2 * math::cos(self.theta_w), center.1 + c2 * math::sin(self.theta_w));
        let g0 = state2.grad(p0.0, p0.1);
        let supersonic = math::hypot(g0.0, g0.1) > c2;
        let nu = (n.0 / nn, n.1 / nn);
        let rh = rh_residual(&state1, &state2, p0, nu, &gas)?;
        let cont = (state1.phi(p0.0, p0.1) - state2.phi(p0.0, p0.1))
            .abs()
            .max((state1.phi(p1.0, p1.1) - state2.phi(p1.0, p1.1)).abs());
        Ok(ReflectionConfiguration {
            gas,
            theta_w: self.theta_w,
            xi0: self.xi0,
            u1: self.u1,
            state1,
            state2,
            c2,
            p0,
            p1,
            p4,
            s1_direction: d,
            branch,
            supersonic_at_p0: supersonic,
            continuity_residual: cont,
            rh_residual: rh.abs(),
        })
    }
}

/// Nearer intersection of `p + t·d` (`t ≥ 0` toward the circle) with the circle.
fn line_circle(p: Point, d: Point, center: Point, radius: f64) -> Option<Point> {
    let w = (p.0 - center.0, p.1 - center.1);
    let b = d.0 * w.0 + d.1 * w.1;
    let c = w.0 * w.0 + w.1 * w.1 - radius * radius;
    let disc = b * b - c;
    if !(disc >= 0.0) {
        return None;
    }
    let t = -b - math::sqrt(disc);
    Some((p.0 + t * d.0, p.1 + t * d.1))
}

/// Solves for state (2), returning the weak root and the strong root when present.
pub fn solve_state2(gas: &GasParameters, theta_w: f64) -> Result<State2Roots> {
    let setup = Setup::new(gas, theta_w)?;
    let roots = setup.roots();
    let mut cands: Vec<(f64, f64)> = roots
        .iter()
        .filter_map(|&u| setup.rho2(u).ok().map(|r| (u, r)))
        .collect();
    if cands.is_empty() {
        return Err(Error::NoRegularReflection);
    }
    cands.sort_by(|a, b| a.1.total_cmp(&b.1));
    let weak = setup.build(cands[0].0, Branch::Weak)?;
    let strong = if cands.len() > 1 {
        setup.build(cands[cands.len() - 1].0, Branch::Strong).ok()
    } else {
        None
    };
    Ok(State2Roots { weak, strong })
}

/// Single-branch convenience wrapper around [`solve_state2`].
pub fn solve_branch(gas: &GasParameters, theta_w: f64, branch: Branch) -> Result<ReflectionConfiguration> {
    let roots = solve_state2(gas, theta_w)?;
    roots.get(branch).cloned().ok_or(Error::NoRegularReflection)
}

/// Brackets the smallest wedge angle with a root by bisection on root existence.
///
/// `lo` must have no root and `hi` must have one.
pub fn detect_theta_c(gas: &GasParameters, lo: f64, hi: f64, iterations: usize) -> Result<(f64, f64)> {
    let exists = |t: f64| solve_state2(gas, t).is_ok();
    if exists(lo) || !exists(hi) {
        return Err(Error::EmptyInterval);
    }
    let (mut a, mut b) = (lo, hi);
    for _ in 0..iterations {
        let m = 0.5 * (a + b);
        if exists(m) {
            b = m;
        } else {
            a = m;
        }
    }
    Ok((a, b))
}

/// Brackets the wedge angle below which the weak state (2) is subsonic at `P₀`.
pub fn detect_sonic_angle(gas: &GasParameters, lo: f64, hi: f64, iterations: usize) -> Result<(f64, f64)> {
    let supersonic = |t: f64| {
        solve_state2(gas, t)
            .map(|r| r.weak.supersonic_at_p0)
            .unwrap_or(false)
    };
    if supersonic(lo) || !supersonic(hi) {
        return Err(Error::EmptyInterval);
    }
    let (mut a, mut b) = (lo, hi);
    for _ in 0..iterations {
        let m = 0.5 * (a + b);
        if supersonic(m) {
            b = m;
        } else {
            a = m;
        }
    }
    Ok((a, b))
}

impl ReflectionConfiguration {
    pub fn center(&self) -> Point {
        (self.state2.u, self.state2.v)
    }

    pub fn eta0(&self) -> f64 {
        self.p0.1
    }

    /// Center and radius of the sonic circle of state (2).
    pub fn sonic_circle(&self) -> (Point, f64) {
        (self.center(), self.c2)
    }

    pub fn locate_points(&self) -> (Point, Point, Point) {
        (self.p0, self.p1, self.p4)
    }

    /// Unit normal of `S₁`, pointing from state (2) toward state (1).
    pub fn s1_normal(&self) -> Point {
        let n = (self.u1 - self.state2.u, -self.state2.v);
        let nn = math::hypot(n.0, n.1);
        (n.0 / nn, n.1 / nn)
    }

    pub fn to_sonic_coords(&self, p: Point) -> Result<Point> {
        let c = self.center();
        let (dx, dy) = (p.0 - c.0, p.1 - c.1);
        let r = math::hypot(dx, dy);
        if r == 0.0 {
            return Err(Error::CenterSingularity);
        }
        let th = math::atan2(dy, dx);
        Ok((self.c2 - r, math::wrap_angle(th - self.theta_w)))
    }

    pub fn from_sonic_coords(&self, q: Point) -> Point {
        let c = self.center();
        let r = self.c2 - q.0;
        let th = q.1 + self.theta_w;
        (c.0 + r * math::cos(th), c.1 + r * math::sin(th))
    }

    /// Angular coordinate `y₁` of `P₁`.
    pub fn y1(&self) -> f64 {
        self.to_sonic_coords(self.p1).map(|q| q.1).unwrap_or(f64::NAN)
    }

    fn s1_at_radius(&self, r: f64) -> Option<(Point, f64)> {
        let c = self.center();
        let d = self.s1_direction;
        let w = (self.p0.0 - c.0, self.p0.1 - c.1);
        let b = d.0 * w.0 + d.1 * w.1;
        let disc = b * b - (w.0 * w.0 + w.1 * w.1 - r * r);
        if !(disc > 0.0) || !(r > 0.0) {
            return None;
        }
        let t = -b - math::sqrt(disc);
        Some(((self.p0.0 + t * d.0, self.p0.1 + t * d.1), disc))
    }

    /// Image `y = f̂(x)` of the line `S₁` in sonic coordinates on `0 ≤ x ≤ eps`.
    pub fn shock_curve_fhat(&self, x: f64, eps: f64) -> Result<f64> {
        if !(x >= 0.0 && x <= eps && eps < self.c2) {
            return Err(Error::OutOfRange);
        }
        Ok(self.fhat_derivatives(x)?.0)
    }

    /// `(f̂, f̂′, f̂″)` at `x`, in closed form.
    pub fn fhat_derivatives(&self, x: f64) -> Result<(f64, f64, f64)> {
        let r = self.c2 - x;
        let (p, disc) = self.s1_at_radius(r).ok_or(Error::OutOfRange)?;
        let c = self.center();
        let d = self.s1_direction;
        let y = math::wrap_angle(math::atan2(p.1 - c.1, p.0 - c.0) - self.theta_w);
        // cross(P − C, d) is constant along the line.
        let cross = (p.0 - c.0) * d.1 - (p.1 - c.1) * d.0;
        let sd = math::sqrt(disc);
        let f1 = cross / (r * sd);
        let f2 = cross * (disc + r * r) / (r * r * disc * sd);
        Ok((y, f1, f2))
    }

    pub fn check_invariants(&self) -> InvariantReport {
        let c = self.center();
        let s2 = &self.state2;
        let g1 = s2.grad(self.p1.0, self.p1.1);
        let mut cont: f64 = 0.0;
        for i in 0..=16 {
            let t = -1.0 + 0.125 * i as f64;
            let p = (self.p0.0 + t * self.s1_direction.0, self.p0.1 + t * self.s1_direction.1);
            let diff = (self.state1.phi(p.0, p.1) - s2.phi(p.0, p.1)).abs();
            cont = cont.max(diff);
        }
        InvariantReport {
            v2_exact: s2.v == s2.u * math::tan(self.theta_w),
            entropy: s2.rho > self.gas.rho1,
            supersonic_at_p0: self.supersonic_at_p0,
            p1_circle_error: (math::hypot(self.p1.0 - c.0, self.p1.1 - c.1) - self.c2).abs(),
            p1_sonic_error: (math::hypot(g1.0, g1.1) - self.c2).abs(),
            s1_continuity_error: cont,
            p4_wedge_error: (self.p4.1 - self.p4.0 * math::tan(self.theta_w)).abs(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn deg(d: f64) -> f64 {
        d * core::f64::consts::PI / 180.0
    }

    fn air() -> GasParameters {
        GasParameters::new(1.4, 1.0, 2.0).unwrap()
    }

    #[test]
    fn fixture_sixty_degrees() {
        let r = solve_state2(&air(), deg(60.0)).unwrap();
        let w = &r.weak;
        assert!((w.state2.u - 0.316_080_765_580_975_94).abs() < 1e-11);
        assert!((w.state2.rho - 3.540_570_851_584_972_6).abs() < 1e-10);
        assert!((w.c2 - 1.287_699_888_01).abs() < 1e-10);
        assert!(w.supersonic_at_p0);
        assert!(w.rh_residual <= 1e-12 && w.continuity_residual <= 1e-12);
        assert!((w.p1.0 - 0.520_965_65).abs() < 1e-7);
        assert!((w.p1.1 - 1.818_763_81).abs() < 1e-7);
        assert!((w.y1() - 0.363_810_493_477_762_6).abs() < 1e-11);
        let s = r.strong.as_ref().unwrap();
        assert!(s.state2.rho > w.state2.rho);
        assert_eq!(s.branch, Branch::Strong);
    }

    #[test]
    fn sonic_circle_radius() {
        let w = solve_state2(&air(), deg(60.0)).unwrap().weak;
        let (c, r) = w.sonic_circle();
        assert_eq!(c, (w.state2.u, w.state2.v));
        assert!((r * r - math::powf(w.state2.rho, 0.4)).abs() < 1e-14);
        let iso = GasParameters::new(1.0, 1.0, 2.0).unwrap();
        assert_eq!(solve_state2(&iso, deg(60.0)).unwrap().weak.c2, 1.0);
    }

    #[test]
    fn normal_reflection_limit() {
        let speeds: Vec<f64> = [85.0, 87.0, 89.0]
            .iter()
            .map(|&t| {
                let w = solve_state2(&air(), deg(t)).unwrap().weak;
                math::hypot(w.state2.u, w.state2.v)
            })
            .collect();
        let expect = [0.101_923_678_9, 0.061_139_352_43, 0.020_377_370_3];
        for (s, e) in speeds.iter().zip(expect) {
            assert!((s - e).abs() < 1e-9, "{s} vs {e}");
        }
        assert!(speeds[0] > speeds[1] && speeds[1] > speeds[2]);
    }

    #[test]
    fn chart_roundtrip_and_anchors() {
        let w = solve_state2(&air(), deg(60.0)).unwrap().weak;
        let q4 = w.to_sonic_coords(w.p4).unwrap();
        assert!(q4.0.abs() < 1e-14 && q4.1.abs() < 1e-14);
        assert!(w.to_sonic_coords(w.p1).unwrap().0.abs() < 1e-12);
        assert_eq!(w.to_sonic_coords(w.center()), Err(Error::CenterSingularity));
        let p = (0.9, 1.2);
        let back = w.from_sonic_coords(w.to_sonic_coords(p).unwrap());
        assert!((back.0 - p.0).abs() < 1e-13 && (back.1 - p.1).abs() < 1e-13);
    }

    #[test]
    fn fhat_matches_chart_composition() {
        let w = solve_state2(&air(), deg(60.0)).unwrap().weak;
        let eps = w.c2 / 20.0;
        assert!((w.shock_curve_fhat(0.0, eps).unwrap() - w.y1()).abs() < 1e-13);
        let (_, f1, f2) = w.fhat_derivatives(0.0).unwrap();
        assert!((f1 - 0.743_96).abs() < 1e-4, "{f1}");
        let h = 1e-5;
        let (fp, fp1, _) = w.fhat_derivatives(h).unwrap();
        let (fm, fm1, _) = w.fhat_derivatives(-h).unwrap();
        assert!(((fp - fm) / (2.0 * h) - f1).abs() < 1e-8);
        assert!(((fp1 - fm1) / (2.0 * h) - f2).abs() < 1e-6);
        assert_eq!(w.shock_curve_fhat(-1e-3, eps), Err(Error::OutOfRange));
        assert_eq!(w.shock_curve_fhat(2.0 * eps, eps), Err(Error::OutOfRange));
    }

    #[test]
    fn invariants_hold() {
        for t in [60.0, 75.0, 85.0] {
            let w = solve_state2(&air(), deg(t)).unwrap().weak;
            let rep = w.check_invariants();
            assert!(rep.all_hold(1e-10), "{t}: {rep:?}");
        }
    }

    #[test]
    fn rejects_bad_angles() {
        assert!(solve_state2(&air(), 0.0).is_err());
        assert!(solve_state2(&air(), core::f64::consts::FRAC_PI_2).is_err());
    }
}
