//! Frozen-coefficient assembly of one Picard step.

use alloc::vec;
use alloc::vec::Vec;

use super::coeffs::CoefficientModel;
use super::cutoff::Cutoff;
use super::grid::{backward_weights, central_weights};
use super::linear::{slot, StencilMatrix};
use super::{OAudit, Unknown};
use crate::error::{Error, Result};
use crate::rankine_hugoniot::ShockBoundaryFns;

/// Side condition with Dirichlet data already expressed in the unknown.
pub(crate) enum Side {
    Dirichlet(Vec<f64>),
    Neumann,
    Shock,
}

pub(crate) struct Problem<'a> {
    pub coeffs: &'a dyn CoefficientModel,
    pub xs: Vec<f64>,
    pub ss: Vec<f64>,
    pub f: Vec<f64>,
    pub fp: Vec<f64>,
    pub fpp: Vec<f64>,
    pub low: Side,
    pub high: Side,
    pub outer: Vec<f64>,
    pub shock: Option<ShockBoundaryFns>,
    pub unknown: Unknown,
    pub cutoff: Cutoff,
    pub eps_ell: f64,
}

pub(crate) struct Assembly {
    pub matrix: StencilMatrix,
    pub rhs: Vec<f64>,
    pub clamp_fraction: f64,
    pub o_audit: OAudit,
}

/// `ψ`, `ψ_x`, `ψ_y` from the unknown and its physical derivatives.
#[inline]
fn physical(unknown: Unknown, a: f64, x: f64, u: f64, ux: f64, uy: f64) -> (f64, f64, f64) {
    match unknown {
        Unknown::W => (x * x / (2.0 * a) - u, x / a - ux, -uy),
        Unknown::Psi => (u, ux, uy),
    }
}

impl<'a> Problem<'a> {
    pub fn nx(&self) -> usize {
        self.xs.len()
    }

    pub fn ny(&self) -> usize {
        self.ss.len()
    }

    pub fn hs(&self) -> f64 {
        self.ss[1] - self.ss[0]
    }

    pub fn to_psi(&self, i: usize, u: f64) -> f64 {
        match self.unknown {
            Unknown::W => self.xs[i] * self.xs[i] / (2.0 * self.coeffs.a()) - u,
            Unknown::Psi => u,
        }
    }

    pub fn from_psi(&self, x: f64, psi: f64) -> f64 {
        match self.unknown {
            Unknown::W => x * x / (2.0 * self.coeffs.a()) - psi,
            Unknown::Psi => psi,
        }
    }

    fn is_dirichlet(&self, i: usize, j: usize) -> Option<f64> {
        let (nx, ny) = (self.nx(), self.ny());
        if i == 0 {
            return Some(0.0);
        }
        if i == nx - 1 {
            return Some(self.outer[j]);
        }
        if j == 0 {
            if let Side::Dirichlet(d) = &self.low {
                return Some(d[i]);
            }
        }
        if j == ny - 1 {
            if let Side::Dirichlet(d) = &self.high {
                return Some(d[i]);
            }
        }
        None
    }

    fn neumann_row(&self, j: usize) -> bool {
        (j == 0 && matches!(self.low, Side::Neumann)) || (j == self.ny() - 1 && matches!(self.high, Side::Neumann))
    }

    fn shock_row(&self, j: usize) -> bool {
        j == self.ny() - 1 && matches!(self.high, Side::Shock)
    }

    /// `u_s` at `(i, j)` consistent with the side treatment.
    fn u_s(&self, u: &[f64], i: usize, j: usize) -> f64 {
        let ny = self.ny();
        let h = self.hs();
        let at = |jj: usize| u[i * ny + jj];
        if self.neumann_row(j) {
            0.0
        } else if j == 0 {
            (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h)
        } else if j == ny - 1 {
            (3.0 * at(j) - 4.0 * at(j - 1) + at(j - 2)) / (2.0 * h)
        } else {
            (at(j + 1) - at(j - 1)) / (2.0 * h)
        }
    }

    /// Backward `u_x` weights along the shock row: second order, first order at `i = 1`.
    fn shock_x_weights(&self, i: usize) -> [f64; 3] {
        if i == 1 {
            let h = self.xs[1] - self.xs[0];
            [1.0 / h, -1.0 / h, 0.0]
        } else {
            backward_weights(&self.xs, i)
        }
    }

    pub fn assemble(&self, u: &[f64]) -> Result<Assembly> {
        let (nx, ny) = (self.nx(), self.ny());
        let n_last = ny - 1;
        let hs = self.hs();
        let a = self.coeffs.a();
        let b = self.coeffs.b();
        let mut m = StencilMatrix::zeros(nx, ny);
        let mut rhs = vec![0.0; nx * ny];
        let mut audit = OAudit::default();
        let mut interior = 0usize;
        let mut clamped = 0usize;
        for i in 0..nx {
            let x = self.xs[i];
            let (f, fp, fpp) = (self.f[i], self.fp[i], self.fpp[i]);
            for j in 0..ny {
                let r = i * ny + j;
                if let Some(v) = self.is_dirichlet(i, j) {
                    m.set_identity(i, j);
                    rhs[r] = v;
                    continue;
                }
                let s = self.ss[j];
                let sx = -s * fp / f;
                let sxx = s * (2.0 * fp * fp - f * fpp) / (f * f);
                let y = s * f;
                let us = self.u_s(u, i, j);
                if self.shock_row(j) {
                    let bx = self.shock_x_weights(i);
                    let ux = bx[0] * u[r] + bx[1] * u[r - ny] + if i >= 2 { bx[2] * u[r - 2 * ny] } else { 0.0 };
                    let (p, px, py) = physical(self.unknown, a, x, u[r], ux + sx * us, us / f);
                    let o = self.coeffs.o_terms(x, y, p, px, py);
                    audit_push(&mut audit, x, &o);
                    let fns = self.shock.as_ref().ok_or(Error::InvalidParameter("shock side without shock data"))?;
                    let psi0 = fns.psi(px, py, p, x, y).map_err(|_| Error::ShockConditionDiverged)?;
                    let d = fns.psi_partials([px, py, p], x, y).map_err(|_| Error::ShockConditionDiverged)?;
                    if !(psi0.is_finite() && d.iter().all(|v| v.is_finite())) {
                        return Err(Error::ShockConditionDiverged);
                    }
                    let sign = if self.unknown == Unknown::W { -1.0 } else { 1.0 };
                    let cs = d[0] * sx + d[1] / f;
                    let row = &mut m.c[r];
                    row[slot(0, 0)] = sign * (d[0] * bx[0] + cs * 3.0 / (2.0 * hs) + d[2]);
                    row[slot(-1, 0)] = sign * d[0] * bx[1];
                    row[slot(0, -1)] = sign * cs * (-4.0) / (2.0 * hs);
                    if i >= 2 {
                        m.far_x[r] = sign * d[0] * bx[2];
                    }
                    m.far_s[r] = sign * cs / (2.0 * hs);
                    let mut lin = row[slot(0, 0)] * u[r] + row[slot(-1, 0)] * u[r - ny] + row[slot(0, -1)] * u[r - 1];
                    lin += m.far_x[r] * if i >= 2 { u[r - 2 * ny] } else { 0.0 };
                    lin += m.far_s[r] * u[r - 2];
                    rhs[r] = lin - psi0;
                    continue;
                }
                let (dxx, dx) = central_weights(&self.xs, i);
                let ux = dx[0] * u[r - ny] + dx[1] * u[r] + dx[2] * u[r + ny];
                let (p, px, py) = physical(self.unknown, a, x, u[r], ux + sx * us, us / f);
                let o = self.coeffs.o_terms(x, y, p, px, py);
                audit_push(&mut audit, x, &o);
                interior += 1;
                let (ca, cd, src) = match self.unknown {
                    Unknown::W => {
                        let t = -(px - x / a) / x;
                        let inner = 1.0 + a * self.cutoff.zeta(t) + o.o1 / x;
                        if self.cutoff.is_active(t) || inner < self.eps_ell {
                            clamped += 1;
                        }
                        (x * inner.max(self.eps_ell), -(2.0 + o.o4), (o.o1 - x * o.o4) / a)
                    }
                    Unknown::Psi => {
                        let inner = 2.0 * x - a * px + o.o1;
                        if inner < self.eps_ell * x {
                            clamped += 1;
                        }
                        (inner.max(self.eps_ell * x), -(1.0 + o.o4), 0.0)
                    }
                };
                let (cb, cc, ce) = (o.o2, b + o.o3, o.o5);
                let kxx = ca;
                let kxs = 2.0 * ca * sx + cb / f;
                let kss = ca * sx * sx + cb * sx / f + cc / (f * f);
                let kx = cd;
                let ks = ca * sxx - cb * fp / (f * f) + cd * sx + ce / f;
                let row = &mut m.c[r];
                for (o_i, di) in (-1isize..=1).enumerate() {
                    row[slot(di, 0)] += kxx * dxx[o_i] + kx * dx[o_i];
                }
                let jp: isize = if j == n_last { -1 } else { 1 };
                let jm: isize = if j == 0 { 1 } else { -1 };
                let w = kss / (hs * hs);
                row[slot(0, jp)] += w;
                row[slot(0, jm)] += w;
                row[slot(0, 0)] -= 2.0 * w;
                if !self.neumann_row(j) {
                    row[slot(0, 1)] += ks / (2.0 * hs);
                    row[slot(0, -1)] -= ks / (2.0 * hs);
                    for (o_i, di) in (-1isize..=1).enumerate() {
                        row[slot(di, 1)] += kxs * dx[o_i] / (2.0 * hs);
                        row[slot(di, -1)] -= kxs * dx[o_i] / (2.0 * hs);
                    }
                }
                rhs[r] = src;
            }
        }
        let clamp_fraction = if interior > 0 { clamped as f64 / interior as f64 } else { 0.0 };
        Ok(Assembly { matrix: m, rhs, clamp_fraction, o_audit: audit })
    }
}

fn audit_push(a: &mut OAudit, x: f64, o: &super::OTerms) {
    if x > 0.0 {
        a.max_o1_over_x2 = a.max_o1_over_x2.max(o.o1.abs() / (x * x));
        for (k, v) in [o.o2, o.o3, o.o4, o.o5].iter().enumerate() {
            a.max_ok_over_x[k] = a.max_ok_over_x[k].max(v.abs() / x);
        }
    }
}
