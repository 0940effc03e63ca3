//! Picard driver and the public solve entry points.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use super::assemble::{Problem, Side};
use super::coeffs::{CoefficientModel, ReflectionClosure};
use super::cutoff::Cutoff;
use super::grid::{graded_nodes, uniform_nodes, Grading, Mapping, ScalarField2D};
use super::linear::bicgstab;
use super::{BoundaryConditions, GridSpec, SideCondition, Solution, SolveReport, SolverOptions, Unknown};
use crate::error::{Error, Result};
use crate::rankine_hugoniot::ShockBoundaryFns;
use crate::reflection_config::ReflectionConfiguration;

/// Grid of the near-sonic strip: `nx` graded nodes on `[0, ε]`, `ny` uniform nodes in `s = y/f̂(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReflectionGrid {
    pub nx: usize,
    pub ny: usize,
    pub grading: Grading,
}

const MAX_CLAMP_FRACTION: f64 = 0.2;

fn unknown_for(a: f64) -> Result<Unknown> {
    if a > 0.0 {
        Ok(Unknown::W)
    } else if a == 0.0 {
        Ok(Unknown::Psi)
    } else {
        Err(Error::InvalidParameter("a must be non-negative"))
    }
}

fn convert_side(side: &SideCondition, xs: &[f64], y: f64, p: &Problem) -> Result<Side> {
    Ok(match side {
        SideCondition::Dirichlet(d) => {
            if d.len() != xs.len() {
                return Err(Error::InvalidParameter("side data length must equal nx"));
            }
            let _ = y;
            Side::Dirichlet(xs.iter().zip(d).map(|(&x, &v)| p.from_psi(x, v)).collect())
        }
        SideCondition::Neumann => Side::Neumann,
        SideCondition::Shock => Side::Shock,
    })
}

fn picard(p: &Problem, opts: &SolverOptions, surrogate_outer: bool) -> Result<(Vec<f64>, SolveReport)> {
    let n = p.nx() * p.ny();
    let mut u = vec![0.0; n];
    for j in 0..p.ny() {
        u[(p.nx() - 1) * p.ny() + j] = p.outer[j];
    }
    let mut history = Vec::new();
    let mut lin_its = Vec::new();
    let mut converged = None;
    for it in 0..=opts.max_iterations {
        let asm = p.assemble(&u)?;
        let r = asm.matrix.residual(&u, &asm.rhs);
        let res = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !res.is_finite() {
            return Err(Error::NoConvergence { iterations: it, residual: res });
        }
        history.push(res);
        if res <= opts.tolerance {
            converged = Some((it, res, asm));
            break;
        }
        if it == opts.max_iterations {
            return Err(Error::NoConvergence { iterations: it, residual: res });
        }
        let mut next = u.clone();
        let rep = bicgstab(
            &asm.matrix,
            &asm.rhs,
            &mut next,
            1e-14,
            (0.05 * opts.tolerance).max(1e-3 * res),
            opts.linear_max_iterations,
            opts.preconditioner_sweeps,
        );
        lin_its.push(rep.iterations);
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NoConvergence { iterations: it, residual: res });
        }
        for k in 0..n {
            u[k] += opts.damping * (next[k] - u[k]);
        }
    }
    let (iterations, residual, asm) = converged.ok_or(Error::NoConvergence { iterations: opts.max_iterations, residual: f64::NAN })?;
    if asm.clamp_fraction > MAX_CLAMP_FRACTION {
        return Err(Error::EllipticityLoss { fraction: asm.clamp_fraction });
    }
    let a = p.coeffs.a();
    let mut violations = 0;
    let mut min_psi = f64::INFINITY;
    for i in 1..p.nx() - 1 {
        let x = p.xs[i];
        for j in 0..p.ny() {
            let psi = p.to_psi(i, u[i * p.ny() + j]);
            min_psi = min_psi.min(psi);
            if a > 0.0 && !(psi > 0.0 && psi <= (2.0 - opts.beta) / (2.0 * a) * x * x) {
                violations += 1;
            }
        }
    }
    let report = SolveReport {
        coefficients: p.coeffs.name().to_string(),
        unknown: p.unknown,
        iterations,
        residual,
        residual_history: history,
        linear_iterations: lin_its,
        clamp_fraction: asm.clamp_fraction,
        o_audit: asm.o_audit,
        quadratic_bound_violations: violations,
        min_interior_psi: min_psi,
        surrogate_outer,
    };
    Ok((u, report))
}

fn to_field(p: &Problem, u: &[f64], grading: Grading, mapping: Option<Mapping>) -> ScalarField2D {
    let ny = p.ny();
    let values = (0..u.len()).map(|k| p.to_psi(k / ny, u[k])).collect();
    ScalarField2D { xs: p.xs.clone(), ss: p.ss.clone(), values, grading, mapping }
}

/// Solves on the rectangle `(0, x_max) × (y_min, y_max)` with `ψ = 0` on `x = 0`.
pub fn solve(coeffs: &dyn CoefficientModel, bc: &BoundaryConditions, grid: &GridSpec, opts: &SolverOptions) -> Result<Solution> {
    opts.validate()?;
    let (xs, ys) = grid.nodes()?;
    if bc.outer.len() != ys.len() {
        return Err(Error::InvalidParameter("outer data length must equal ny"));
    }
    if matches!(bc.low, SideCondition::Shock) || matches!(bc.high, SideCondition::Shock) {
        return Err(Error::InvalidParameter("shock sides need a reflection configuration"));
    }
    let nx = xs.len();
    let a = coeffs.a();
    let mut p = Problem {
        coeffs,
        f: vec![1.0; nx],
        fp: vec![0.0; nx],
        fpp: vec![0.0; nx],
        xs: xs.clone(),
        ss: ys.clone(),
        low: Side::Neumann,
        high: Side::Neumann,
        outer: Vec::new(),
        shock: None,
        unknown: unknown_for(a)?,
        cutoff: Cutoff::new(a, opts.beta, opts.m_cut),
        eps_ell: opts.eps_ell,
    };
    let xm = xs[nx - 1];
    p.outer = bc.outer.iter().map(|&v| p.from_psi(xm, v)).collect();
    p.low = convert_side(&bc.low, &xs, ys[0], &p)?;
    p.high = convert_side(&bc.high, &xs, ys[ys.len() - 1], &p)?;
    let (u, report) = picard(&p, opts, false)?;
    Ok(Solution { field: to_field(&p, &u, grid.grading, None), report })
}

/// Solves for `ψ = φ − φ₂` on `{0 < x < ε, 0 < y < f̂(x)}`.
///
/// Sides: `ψ = 0` on the sonic arc, `ψ_y = 0` on the wedge, the shock condition
/// on `y = f̂(x)` and the synthetic profile `ψ = x²/(2(γ+1))` on `x = ε`.
pub fn solve_reflection_near_sonic(config: &ReflectionConfiguration, eps: f64, grid: &ReflectionGrid, opts: &SolverOptions) -> Result<Solution> {
    opts.validate()?;
    if !(eps > 0.0 && eps < config.c2) {
        return Err(Error::OutOfRange);
    }
    let xs = graded_nodes(eps, grid.nx, grid.grading)?;
    if grid.ny < 4 {
        return Err(Error::InvalidParameter("reflection grid needs ny >= 4"));
    }
    let ss = uniform_nodes(0.0, 1.0, grid.ny);
    let nx = xs.len();
    let mut f = Vec::with_capacity(nx);
    let mut fp = Vec::with_capacity(nx);
    let mut fpp = Vec::with_capacity(nx);
    for &x in &xs {
        let (v, d1, d2) = config.fhat_derivatives(x)?;
        if !(v > 0.0 && d1 > 0.0) {
            return Err(Error::InvalidParameter("shock curve must be positive and increasing"));
        }
        f.push(v);
        fp.push(d1);
        fpp.push(d2);
    }
    let closure = ReflectionClosure { gamma: config.gas.gamma, c2: config.c2 };
    let a = closure.a();
    let p = Problem {
        coeffs: &closure,
        xs,
        ss,
        f: f.clone(),
        fp: fp.clone(),
        fpp: fpp.clone(),
        low: Side::Neumann,
        high: Side::Shock,
        outer: vec![0.0; grid.ny],
        shock: Some(ShockBoundaryFns::new(config)),
        unknown: Unknown::W,
        cutoff: Cutoff::new(a, opts.beta, opts.m_cut),
        eps_ell: opts.eps_ell,
    };
    let (u, report) = picard(&p, opts, true)?;
    let mapping = Some(Mapping { f, fp, fpp });
    Ok(Solution { field: to_field(&p, &u, grid.grading, mapping), report })
}

/// Max-norm of `𝓛₁ψ` over interior nodes, and the pointwise residual field.
pub fn residual(field: &ScalarField2D, coeffs: &dyn CoefficientModel) -> (f64, ScalarField2D) {
    let (nx, ny) = (field.nx(), field.ny());
    let a = coeffs.a();
    let b = coeffs.b();
    let mut out = field.clone();
    out.values.iter_mut().for_each(|v| *v = 0.0);
    let mut worst = 0.0f64;
    for i in 1..nx - 1 {
        let x = field.xs[i];
        for j in 1..ny - 1 {
            let jt = field.jet(i, j);
            let o = coeffs.o_terms(x, field.y(i, j), jt.v, jt.x, jt.y);
            let l = (2.0 * x - a * jt.x + o.o1) * jt.xx + o.o2 * jt.xy + (b + o.o3) * jt.yy - (1.0 + o.o4) * jt.x
                + o.o5 * jt.y;
            out.values[i * ny + j] = l;
            worst = worst.max(l.abs());
        }
    }
    (worst, out)
}
