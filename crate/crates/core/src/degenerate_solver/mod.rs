//! Finite-difference solution of the degenerate elliptic equation
//! `(2x − aψ_x + O₁)ψ_xx + O₂ψ_xy + (b + O₃)ψ_yy − (1 + O₄)ψ_x + O₅ψ_y = 0`
//! on `(0, r̂) × (y₀, y₁)` or on the curvilinear strip `{0 < x < ε, 0 < y < f̂(x)}`.
//!
//! For `a > 0` the unknown is `W = x²/(2a) − ψ` and the x-coefficient carries the
//! cutoff `x(1 + aζ(W_x/x) + O₁/x)`, floored at `ε_ell·x`. For `a = 0` the
//! equation is solved for `ψ` directly. Each Picard step freezes the
//! coefficients, assembles a nine-point system and solves it with
//! line-preconditioned BiCGSTAB.

mod assemble;
pub mod coeffs;
pub mod cutoff;
pub mod grid;
pub mod linear;
mod solve;

pub use coeffs::{CoefficientModel, ModelCoefficients, OTerms, ReflectionClosure};
pub use cutoff::Cutoff;
pub use grid::{graded_nodes, uniform_nodes, Grading, Jet, Mapping, ScalarField2D};
pub use solve::{residual, solve, solve_reflection_near_sonic, ReflectionGrid};

use alloc::string::String;
use alloc::vec::Vec;

/// Condition on a side `y = const` (or `s = const` on the mapped strip).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum SideCondition {
    /// Values of `ψ` along the side, one per `x` node.
    Dirichlet(Vec<f64>),
    /// `ψ_y = 0`.
    Neumann,
    /// Nonlinear shock condition `Ψ(ψ_x, ψ_y, ψ, x, y) = 0`.
    Shock,
}

/// Boundary data; `ψ = 0` on `x = 0` is implied.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundaryConditions {
    /// `ψ` on `x = x_max`, one per `y` node.
    pub outer: Vec<f64>,
    pub low: SideCondition,
    pub high: SideCondition,
}

impl BoundaryConditions {
    /// Outer Dirichlet data from `g`, with the given side conditions.
    pub fn outer_from(grid: &GridSpec, g: impl Fn(f64, f64) -> f64, low: SideCondition, high: SideCondition) -> crate::Result<Self> {
        let (xs, ys) = grid.nodes()?;
        let xm = xs[xs.len() - 1];
        Ok(Self { outer: ys.iter().map(|&y| g(xm, y)).collect(), low, high })
    }

    /// Dirichlet data from `g` on the outer side and on both `y` sides.
    pub fn dirichlet_from(grid: &GridSpec, g: impl Fn(f64, f64) -> f64) -> crate::Result<Self> {
        let (xs, ys) = grid.nodes()?;
        let (y0, y1) = (ys[0], ys[ys.len() - 1]);
        let low = SideCondition::Dirichlet(xs.iter().map(|&x| g(x, y0)).collect());
        let high = SideCondition::Dirichlet(xs.iter().map(|&x| g(x, y1)).collect());
        Self::outer_from(grid, g, low, high)
    }
}

/// Rectangle `(0, x_max) × (y_min, y_max)` with `nx × ny` nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub grading: Grading,
}

impl GridSpec {
    pub fn nodes(&self) -> crate::Result<(Vec<f64>, Vec<f64>)> {
        if self.ny < 3 || !(self.y_max > self.y_min) {
            return Err(crate::Error::InvalidParameter("grid needs ny >= 3 and y_max > y_min"));
        }
        Ok((graded_nodes(self.x_max, self.nx, self.grading)?, uniform_nodes(self.y_min, self.y_max, self.ny)))
    }
}

/// Iteration controls.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SolverOptions {
    /// Stop when the max-norm residual of the cutoff equation is below this.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub damping: f64,
    /// Cutoff parameters `β ∈ (0, 1)`, `M ≥ 0`.
    pub beta: f64,
    pub m_cut: f64,
    /// Ellipticity floor factor, `0 < ε_ell < β`.
    pub eps_ell: f64,
    pub linear_max_iterations: usize,
    pub preconditioner_sweeps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 100,
            damping: 1.0,
            beta: 0.5,
            m_cut: 1.0,
            eps_ell: 0.05,
            linear_max_iterations: 4000,
            preconditioner_sweeps: 1,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> crate::Result<()> {
        use crate::Error::InvalidParameter;
        if !(self.tolerance > 0.0) {
            return Err(InvalidParameter("tolerance must be positive"));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(InvalidParameter("damping must lie in (0, 1]"));
        }
        if !(self.eps_ell > 0.0 && self.eps_ell < self.beta && self.beta < 1.0) {
            return Err(InvalidParameter("need 0 < eps_ell < beta < 1"));
        }
        if !(self.m_cut >= 0.0) {
            return Err(InvalidParameter("M must be non-negative"));
        }
        if self.max_iterations == 0 {
            return Err(InvalidParameter("max_iterations must be positive"));
        }
        Ok(())
    }
}

/// Which unknown the Picard iteration carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Unknown {
    /// `W = x²/(2a) − ψ`.
    W,
    Psi,
}

/// Measured sizes of the small terms on a converged field.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OAudit {
    pub max_o1_over_x2: f64,
    /// `max |O_k|/x` for `k = 2..5`.
    pub max_ok_over_x: [f64; 4],
}

/// Iteration history and checks attached to a converged field.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SolveReport {
    pub coefficients: String,
    pub unknown: Unknown,
    pub iterations: usize,
    pub residual: f64,
    pub residual_history: Vec<f64>,
    pub linear_iterations: Vec<usize>,
    /// Fraction of interior nodes where the cutoff or the floor is active.
    pub clamp_fraction: f64,
    pub o_audit: OAudit,
    /// Interior nodes violating `0 < ψ ≤ ((2−β)/2a)x²` (only meaningful for `a > 0`).
    pub quadratic_bound_violations: usize,
    pub min_interior_psi: f64,
    /// Outer data on `x = ε` is the synthetic profile `x²/(2a)`.
    pub surrogate_outer: bool,
}

/// A converged field with its report.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Solution {
    pub field: ScalarField2D,
    pub report: SolveReport,
}
