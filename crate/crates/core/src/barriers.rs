//! Closed-form comparison functions, the parameter recipes that make them
//! sub- or supersolutions, and sign scans of `𝓛₁`, `𝓛₂` on `Q⁺_{r,1}`.

use alloc::vec::Vec;

use crate::degenerate_solver::{CoefficientModel, Jet, ScalarField2D};
use crate::error::{Error, Result};
use crate::math;

/// `y`-profile of one barrier term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Profile {
    OneMinusY2,
    Y2,
}

/// `c·x^p·g(y)`.
#[derive(Debug, Clone, Copy)]
struct Term {
    c: f64,
    p: f64,
    g: Profile,
}

impl Term {
    fn jet(&self, x: f64, y: f64) -> Jet {
        let (g, gy, gyy) = match self.g {
            Profile::OneMinusY2 => (1.0 - y * y, -2.0 * y, -2.0),
            Profile::Y2 => (y * y, 2.0 * y, 2.0),
        };
        let p = self.p;
        let xp = math::powf(x, p);
        let xp1 = if p == 0.0 { 0.0 } else { p * math::powf(x, p - 1.0) };
        let xp2 = if p == 0.0 || p == 1.0 { 0.0 } else { p * (p - 1.0) * math::powf(x, p - 2.0) };
        Jet {
            v: self.c * xp * g,
            x: self.c * xp1 * g,
            y: self.c * xp * gy,
            xx: self.c * xp2 * g,
            xy: self.c * xp1 * gy,
            yy: self.c * xp * gyy,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum BarrierFunction {
    /// `μx²(1−y²) − kxy²`.
    SubsolutionW { mu: f64, k: f64 },
    /// `A₁x^{2+α}(1−y²) + B₁x²y²`.
    SupersolutionV { a1: f64, b1: f64, alpha: f64 },
    /// `−Lx^{2+α}(1−y²) − Kx²y²`.
    SubsolutionUMinus { l: f64, k: f64, alpha: f64 },
    /// `c₁x^{2+α}(1−y²) + c₂x^{2+α′}y²`.
    GeneralU { c1: f64, alpha: f64, c2: f64, alpha_prime: f64 },
}

impl BarrierFunction {
    fn terms(&self) -> [Term; 2] {
        use Profile::*;
        match *self {
            BarrierFunction::SubsolutionW { mu, k } => [Term { c: mu, p: 2.0, g: OneMinusY2 }, Term { c: -k, p: 1.0, g: Y2 }],
            BarrierFunction::SupersolutionV { a1, b1, alpha } => {
                [Term { c: a1, p: 2.0 + alpha, g: OneMinusY2 }, Term { c: b1, p: 2.0, g: Y2 }]
            }
            BarrierFunction::SubsolutionUMinus { l, k, alpha } => {
                [Term { c: -l, p: 2.0 + alpha, g: OneMinusY2 }, Term { c: -k, p: 2.0, g: Y2 }]
            }
            BarrierFunction::GeneralU { c1, alpha, c2, alpha_prime } => {
                [Term { c: c1, p: 2.0 + alpha, g: OneMinusY2 }, Term { c: c2, p: 2.0 + alpha_prime, g: Y2 }]
            }
        }
    }

    /// Value and exact derivatives at `x > 0`.
    pub fn jet(&self, x: f64, y: f64) -> Jet {
        let [t0, t1] = self.terms();
        let (a, b) = (t0.jet(x, y), t1.jet(x, y));
        Jet { v: a.v + b.v, x: a.x + b.x, y: a.y + b.y, xx: a.xx + b.xx, xy: a.xy + b.xy, yy: a.yy + b.yy }
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        self.jet(x, y).v
    }

    /// Upper growth function with `A₁r^α = B₁ = (1−μ₁)/(2a)`.
    pub fn upper(a: f64, mu1: f64, alpha: f64, r: f64) -> Self {
        let b1 = (1.0 - mu1) / (2.0 * a);
        BarrierFunction::SupersolutionV { a1: b1 / math::powf(r, alpha), b1, alpha }
    }

    /// Lower function with `Lr^α = K = (1−β)/(2a)`.
    pub fn lower(a: f64, beta: f64, alpha: f64, r: f64) -> Self {
        let k = (1.0 - beta) / (2.0 * a);
        BarrierFunction::SubsolutionUMinus { l: k / math::powf(r, alpha), k, alpha }
    }

    /// Upper function for `α > α₁` built from the pair `(α₁, r₁)`.
    pub fn upper_any_alpha(a: f64, mu1: f64, alpha: f64, alpha1: f64, r: f64, r1: f64) -> Self {
        let base = (1.0 - mu1) / (2.0 * a * math::powf(r1, alpha1));
        BarrierFunction::GeneralU { c1: base / math::powf(r, alpha - alpha1), alpha, c2: base, alpha_prime: alpha1 }
    }

    /// Lower function for `α > α₂` built from the pair `(α₂, r₂)`.
    pub fn lower_any_alpha(a: f64, beta: f64, alpha: f64, alpha2: f64, r: f64, r2: f64) -> Self {
        let base = (1.0 - beta) / (2.0 * a * math::powf(r2, alpha2));
        BarrierFunction::GeneralU { c1: -base / math::powf(r, alpha - alpha2), alpha, c2: -base, alpha_prime: alpha2 }
    }

    pub fn l1(&self, coeffs: &dyn CoefficientModel, x: f64, y: f64) -> f64 {
        apply_l1(&self.jet(x, y), coeffs, x, y)
    }

    /// `𝓛₂ − (O₁−xO₄)/a`.
    pub fn l2(&self, coeffs: &dyn CoefficientModel, x: f64, y: f64) -> f64 {
        apply_l2(&self.jet(x, y), coeffs, x, y)
    }
}

/// `(2x−aψ_x+O₁)ψ_xx + O₂ψ_xy + (b+O₃)ψ_yy − (1+O₄)ψ_x + O₅ψ_y`.
pub fn apply_l1(j: &Jet, coeffs: &dyn CoefficientModel, x: f64, y: f64) -> f64 {
    let o = coeffs.o_terms(x, y, j.v, j.x, j.y);
    (2.0 * x - coeffs.a() * j.x + o.o1) * j.xx + o.o2 * j.xy + (coeffs.b() + o.o3) * j.yy - (1.0 + o.o4) * j.x + o.o5 * j.y
}

/// `(x+aW_x+O₁)W_xx + O₂W_xy + (b+O₃)W_yy − (2+O₄)W_x + O₅W_y − (O₁−xO₄)/a`,
/// with `O_k` evaluated at `ψ = x²/(2a) − W`.
pub fn apply_l2(w: &Jet, coeffs: &dyn CoefficientModel, x: f64, y: f64) -> f64 {
    let a = coeffs.a();
    let o = coeffs.o_terms(x, y, x * x / (2.0 * a) - w.v, x / a - w.x, -w.y);
    (x + a * w.x + o.o1) * w.xx + o.o2 * w.xy + (coeffs.b() + o.o3) * w.yy - (2.0 + o.o4) * w.x + o.o5 * w.y
        - (o.o1 - x * o.o4) / a
}

/// `𝓛₁` on a field node by its finite-difference jet.
pub fn apply_l1_field(field: &ScalarField2D, coeffs: &dyn CoefficientModel, i: usize, j: usize) -> f64 {
    apply_l1(&field.jet(i, j), coeffs, field.xs[i], field.y(i, j))
}

/// `𝓛₂ − rhs` on a field of `W` by its finite-difference jet.
pub fn apply_l2_field(field: &ScalarField2D, coeffs: &dyn CoefficientModel, i: usize, j: usize) -> f64 {
    apply_l2(&field.jet(i, j), coeffs, field.xs[i], field.y(i, j))
}

/// Constant of the lower bounds for `I₁, I₂` on `Q⁺_{r,1}`, `r ≤ r̂`, taking
/// absolute values termwise with `|O₁| ≤ Nx²`, `|O_k| ≤ Nx`.
pub fn c0_bound(b: f64, n: f64, rhat: f64) -> f64 {
    2.0 * b + 4.0 * n * (1.0 + rhat)
}

/// Constant `C` with `|T₁|, |T₂| ≤ Cr^{1−α}` plus the `O₁/x`, `O₄` terms of
/// `J₁, J₂`, for `r ≤ r₀ ≤ 1` and `B₁ = (1−μ₁)/(2a)`.
pub fn growth_constant(a: f64, b: f64, n: f64, r0: f64, mu1: f64) -> f64 {
    let b1 = (1.0 - mu1) / (2.0 * a);
    7.0 * n + 2.0 * b + 4.0 * n * r0 + 2.0 * n / (a * b1)
}

/// `(1+α)(1+((2+α)/2)(1−μ₁)) − 2 + μ₁/4`; nonpositive where the growth step closes.
pub fn growth_inequality(alpha: f64, mu1: f64) -> f64 {
    (1.0 + alpha) * (1.0 + 0.5 * (2.0 + alpha) * (1.0 - mu1)) - 2.0 + 0.25 * mu1
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GrowthParams {
    pub mu1: f64,
    pub alpha1: f64,
}

impl GrowthParams {
    /// `min{(μ₁/4C)^{1/(1−α)}, r₀}`.
    pub fn r1_bound(&self, c: f64, alpha: f64, r0: f64) -> f64 {
        math::powf(self.mu1 / (4.0 * c), 1.0 / (1.0 - alpha)).min(r0)
    }
}

/// Largest `α ∈ (0, 1)` with `growth_inequality(α, μ₁) ≤ 0`, by bisection to `10⁻¹⁰`.
pub fn choose_growth_params(mu1: f64) -> Result<GrowthParams> {
    if !(mu1 > 0.0 && mu1 <= 0.5) {
        return Err(Error::InvalidParameter("mu1 must lie in (0, 1/2]"));
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if growth_inequality(mid, mu1) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(GrowthParams { mu1, alpha1: lo })
}

/// Parameters of the quadratic lower bound and the first growth step.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BarrierRecipe {
    pub a: f64,
    pub b: f64,
    pub n: f64,
    pub rhat: f64,
    pub c0: f64,
    pub r0: f64,
    pub sigma_r0: f64,
    pub mu0: f64,
    pub a0_interval: (f64, f64),
    pub a0: f64,
    pub k: f64,
    pub halvings: u32,
    pub mu1: f64,
    pub alpha1: f64,
    pub c_growth: f64,
    pub r1: f64,
}

impl BarrierRecipe {
    pub fn subsolution(&self) -> BarrierFunction {
        BarrierFunction::SubsolutionW { mu: self.mu0, k: self.k }
    }

    pub fn supersolution(&self) -> BarrierFunction {
        BarrierFunction::upper(self.a, self.mu1, self.alpha1, self.r1)
    }

    /// Every defining inequality, re-checked by substitution.
    pub fn checks(&self) -> Vec<(&'static str, bool)> {
        let bn = self.b + self.n;
        let c0 = self.c0;
        let mut v = Vec::new();
        v.push(("r0 <= 1/(4 C0)", self.r0 <= 1.0 / (4.0 * c0)));
        v.push(("r0 <= (b+N)/C0", self.r0 <= bn / c0));
        v.push(("r0 <= 1/(8 sqrt(C0 (b+N)))", self.r0 <= 1.0 / (8.0 * math::sqrt(c0 * bn))));
        v.push(("r0 <= rhat/2", self.r0 <= 0.5 * self.rhat));
        v.push(("mu0 <= 1/(8a)", self.mu0 <= 1.0 / (8.0 * self.a)));
        v.push(("mu0 <= sigma(r0)/r0^2", self.mu0 <= self.sigma_r0 / (self.r0 * self.r0)));
        v.push(("mu0 > 0", self.mu0 > 0.0));
        v.push(("4 C0 r0^2 < A0", 4.0 * c0 * self.r0 * self.r0 < self.a0));
        v.push(("A0 < 1/(8(b+N))", self.a0 < 1.0 / (8.0 * bn)));
        v.push(("k = mu0 A0", (self.k - self.mu0 * self.a0).abs() <= 1e-15 * self.k.abs().max(1.0)));
        v.push(("mu1 = min(2 a mu0, 1/2)", self.mu1 == (2.0 * self.a * self.mu0).min(0.5)));
        v.push(("growth inequality at alpha1", growth_inequality(self.alpha1, self.mu1) <= 0.0));
        v.push((
            "r1 < min((mu1/4C)^(1/(1-alpha1)), r0)",
            self.r1 < GrowthParams { mu1: self.mu1, alpha1: self.alpha1 }.r1_bound(self.c_growth, self.alpha1, self.r0),
        ));
        v
    }

    pub fn holds(&self) -> bool {
        self.checks().iter().all(|c| c.1)
    }
}

/// Fraction of the admissible bound used for `r₁` and `r₂`.
pub const RADIUS_FRACTION: f64 = 0.9;

/// Builds the recipe; `sigma(r)` is a lower bound of `ψ` on `{x > r}`.
pub fn choose_subsolution_params(
    a: f64,
    b: f64,
    n: f64,
    c0: f64,
    rhat: f64,
    sigma: &dyn Fn(f64) -> f64,
) -> Result<BarrierRecipe> {
    if !(a > 0.0 && b > 0.0 && n >= 0.0 && c0 > 0.0 && rhat > 0.0) {
        return Err(Error::InvalidParameter("recipe inputs must be positive"));
    }
    let bn = b + n;
    let mut r0 = (1.0 / (4.0 * c0)).min(bn / c0).min(1.0 / (8.0 * math::sqrt(c0 * bn))).min(0.5 * rhat);
    let hi = 1.0 / (8.0 * bn);
    for halvings in 0..60u32 {
        let s = sigma(r0);
        let lo = 4.0 * c0 * r0 * r0;
        if s > 0.0 && lo < hi {
            let mu0 = (1.0 / (8.0 * a)).min(s / (r0 * r0));
            let a0 = 0.5 * (lo + hi);
            let mu1 = (2.0 * a * mu0).min(0.5);
            let g = choose_growth_params(mu1)?;
            let c = growth_constant(a, b, n, r0, mu1);
            let r1 = RADIUS_FRACTION * g.r1_bound(c, g.alpha1, r0);
            return Ok(BarrierRecipe {
                a,
                b,
                n,
                rhat,
                c0,
                r0,
                sigma_r0: s,
                mu0,
                a0_interval: (lo, hi),
                a0,
                k: mu0 * a0,
                halvings,
                mu1,
                alpha1: g.alpha1,
                c_growth: c,
                r1,
            });
        }
        r0 *= 0.5;
    }
    Err(Error::EmptyInterval)
}

/// Parameters of the lower growth bound `W ≥ −((1−β)/(2ar^α))x^{2+α}`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LowerRecipe {
    pub a: f64,
    pub beta: f64,
    pub alpha2: f64,
    pub c_growth: f64,
    pub r2: f64,
}

impl LowerRecipe {
    pub fn barrier(&self) -> BarrierFunction {
        BarrierFunction::lower(self.a, self.beta, self.alpha2, self.r2)
    }
}

/// The growth step with `μ₁, r₁` replaced by `β, r₂`.
pub fn choose_lower_params(recipe: &BarrierRecipe, beta: f64) -> Result<LowerRecipe> {
    if !(beta > 0.0 && beta <= 0.5) {
        return Err(Error::InvalidParameter("beta must lie in (0, 1/2]"));
    }
    let g = choose_growth_params(beta)?;
    let c = growth_constant(recipe.a, recipe.b, recipe.n, recipe.r0, beta);
    Ok(LowerRecipe {
        a: recipe.a,
        beta,
        alpha2: g.alpha1,
        c_growth: c,
        r2: RADIUS_FRACTION * g.r1_bound(c, g.alpha1, recipe.r0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Operator {
    L1,
    L2,
}

/// Result of a dense sign scan. It is a sampling check, not a proof.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SignScan {
    pub operator: Operator,
    pub expect_positive: bool,
    pub x_max: f64,
    pub half_height: f64,
    pub samples: usize,
    pub refined_samples: usize,
    /// Minimum for positive scans, maximum otherwise.
    pub extreme: f64,
    pub at: (f64, f64),
    pub violations: usize,
    pub violation_points: Vec<(f64, f64, f64)>,
}

const REFINE_CELLS: usize = 8;
const REFINE_N: usize = 16;
const MAX_LISTED: usize = 32;

#[cfg(feature = "parallel")]
fn rows<T: Send, F: Fn(usize) -> T + Sync + Send>(n: usize, f: F) -> Vec<T> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn rows<T, F: Fn(usize) -> T>(n: usize, f: F) -> Vec<T> {
    (0..n).map(f).collect()
}

/// Samples the operator at `n × n` cell centres of `(0, x_max) × (−h, h)`,
/// then refines around the cells of smallest margin.
pub fn sign_scan<C: CoefficientModel + Sync>(
    barrier: &BarrierFunction,
    op: Operator,
    coeffs: &C,
    x_max: f64,
    half_height: f64,
    n: usize,
    expect_positive: bool,
) -> SignScan {
    let eval = |x: f64, y: f64| match op {
        Operator::L1 => barrier.l1(coeffs, x, y),
        Operator::L2 => barrier.l2(coeffs, x, y),
    };
    let margin = |v: f64| if expect_positive { v } else { -v };
    let hx = x_max / n as f64;
    let hy = 2.0 * half_height / n as f64;
    let grid: Vec<Vec<f64>> = rows(n, |i| {
        let x = (i as f64 + 0.5) * hx;
        (0..n).map(|j| margin(eval(x, -half_height + (j as f64 + 0.5) * hy))).collect()
    });
    let mut worst = (f64::INFINITY, (0.0, 0.0));
    let mut violations = 0;
    let mut points = Vec::new();
    let mut cells: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
    for (i, row) in grid.iter().enumerate() {
        for (j, &m) in row.iter().enumerate() {
            let p = ((i as f64 + 0.5) * hx, -half_height + (j as f64 + 0.5) * hy);
            cells.push((m, i, j));
            if m < worst.0 || m.is_nan() {
                worst = (m, p);
            }
            if !(m > 0.0) {
                violations += 1;
                if points.len() < MAX_LISTED {
                    points.push((p.0, p.1, m));
                }
            }
        }
    }
    cells.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut refined = 0;
    for &(_, i, j) in cells.iter().take(REFINE_CELLS) {
        let (x0, y0) = ((i as f64 - 0.5) * hx, -half_height + (j as f64 - 0.5) * hy);
        for p in 0..REFINE_N {
            for q in 0..REFINE_N {
                let x = x0 + (p as f64 + 0.5) * 2.0 * hx / REFINE_N as f64;
                let y = y0 + (q as f64 + 0.5) * 2.0 * hy / REFINE_N as f64;
                if !(x > 0.0 && x < x_max && y.abs() < half_height) {
                    continue;
                }
                refined += 1;
                let m = margin(eval(x, y));
                if m < worst.0 {
                    worst = (m, (x, y));
                }
                if !(m > 0.0) {
                    violations += 1;
                    if points.len() < MAX_LISTED {
                        points.push((x, y, m));
                    }
                }
            }
        }
    }
    SignScan {
        operator: op,
        expect_positive,
        x_max,
        half_height,
        samples: n * n,
        refined_samples: refined,
        extreme: margin(worst.0),
        at: worst.1,
        violations,
        violation_points: points,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Direction {
    /// The barrier lies below the field.
    Below,
    /// The barrier lies above the field.
    Above,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ComparisonReport {
    pub direction: Direction,
    pub applicable: bool,
    pub boundary_violations: usize,
    pub nodes_checked: usize,
    pub violations: usize,
    /// Smallest signed margin, positive when the ordering holds.
    pub worst_margin: f64,
    pub worst_at: (f64, f64),
    pub violation_points: Vec<(f64, f64, f64)>,
}

/// Node-wise check of the ordering on `{x ≤ x_max} × (−h, h)` within a field
/// whose rows span `[−h, h]`. `tol` absorbs rounding at coincident values.
pub fn verify_comparison(
    field: &ScalarField2D,
    barrier: &BarrierFunction,
    direction: Direction,
    x_max: f64,
    tol: f64,
) -> ComparisonReport {
    let last = field.xs.iter().rposition(|&x| x <= x_max).unwrap_or(0);
    let ny = field.ny();
    let margin = |i: usize, j: usize| {
        let (x, y) = (field.xs[i], field.y(i, j));
        let (f, w) = (field.at(i, j), barrier.value(x, y));
        (match direction {
            Direction::Below => f - w,
            Direction::Above => w - f,
        }, (x, y))
    };
    let on_boundary = |i: usize, j: usize| i == 0 || i == last || j == 0 || j == ny - 1;
    let mut boundary_violations = 0;
    let mut violations = 0;
    let mut checked = 0;
    let mut worst = (f64::INFINITY, (0.0, 0.0));
    let mut points = Vec::new();
    for i in 0..=last {
        for j in 0..ny {
            let (m, p) = margin(i, j);
            if on_boundary(i, j) {
                if m < -tol {
                    boundary_violations += 1;
                }
                continue;
            }
            checked += 1;
            if m < worst.0 {
                worst = (m, p);
            }
            if m < -tol {
                violations += 1;
                if points.len() < MAX_LISTED {
                    points.push((p.0, p.1, m));
                }
            }
        }
    }
    ComparisonReport {
        direction,
        applicable: boundary_violations == 0 && last >= 2,
        boundary_violations,
        nodes_checked: checked,
        violations,
        worst_margin: worst.0,
        worst_at: worst.1,
        violation_points: points,
    }
}

/// `σ(r)`: the smallest field value on nodes with `x ≥ r`.
pub fn sigma_from_field(field: &ScalarField2D, r: f64) -> f64 {
    let mut m = f64::INFINITY;
    for i in 0..field.nx() {
        if field.xs[i] >= r {
            for j in 0..field.ny() {
                m = m.min(field.at(i, j));
            }
        }
    }
    m
}
