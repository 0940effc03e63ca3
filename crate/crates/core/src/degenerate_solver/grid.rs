//! Graded grids, mapped fields and finite-difference stencils.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Node distribution in `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Grading {
    Uniform,
    /// Spacing grows by `1/q` per cell away from `x = 0`, starting at `r/(4(n−1))`
    /// and capped so the cells fill `[0, r]`.
    Geometric { q: f64 },
}

/// Nodes `0 = x₀ < … < x_{n−1} = r`.
pub fn graded_nodes(r: f64, n: usize, grading: Grading) -> Result<Vec<f64>> {
    if n < 3 || !(r > 0.0) {
        return Err(Error::InvalidParameter("grid needs n >= 3 and positive extent"));
    }
    let cells = n - 1;
    let h: Vec<f64> = match grading {
        Grading::Uniform => vec![r / cells as f64; cells],
        Grading::Geometric { q } => {
            if !(q > 0.0 && q <= 1.0) {
                return Err(Error::InvalidParameter("grading ratio must lie in (0, 1]"));
            }
            let hmin = r / (4.0 * cells as f64);
            let raw: Vec<f64> = (0..cells).map(|k| hmin * libm::pow(q, -(k as f64))).collect();
            let total = |cap: f64| raw.iter().map(|&v| v.min(cap)).sum::<f64>();
            let (mut lo, mut hi) = (hmin, r);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if total(mid) > r {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let cap = 0.5 * (lo + hi);
            let mut h: Vec<f64> = raw.iter().map(|&v| v.min(cap)).collect();
            let s: f64 = h.iter().sum();
            for v in &mut h {
                *v *= r / s;
            }
            h
        }
    };
    let mut xs = Vec::with_capacity(n);
    xs.push(0.0);
    let mut acc = 0.0;
    for v in &h {
        acc += v;
        xs.push(acc);
    }
    xs[cells] = r;
    Ok(xs)
}

pub fn uniform_nodes(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|j| lo + (hi - lo) * j as f64 / (n - 1) as f64).collect()
}

/// Column-wise map `y = s·f(x)` with its first two derivatives.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Mapping {
    pub f: Vec<f64>,
    pub fp: Vec<f64>,
    pub fpp: Vec<f64>,
}

/// Values of `ψ` on a tensor grid in `(x, s)`; physical `y = s·f(x)`, with
/// `f ≡ 1` when no mapping is present.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScalarField2D {
    pub xs: Vec<f64>,
    pub ss: Vec<f64>,
    /// Row-major in `x`: index `i·ny + j`.
    pub values: Vec<f64>,
    pub grading: Grading,
    pub mapping: Option<Mapping>,
}

/// Physical value and derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Jet {
    pub v: f64,
    pub x: f64,
    pub y: f64,
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

/// Three-point weights `(u_xx, u_x)` on a nonuniform stencil centred at `i`.
pub fn central_weights(xs: &[f64], i: usize) -> ([f64; 3], [f64; 3]) {
    let hm = xs[i] - xs[i - 1];
    let hp = xs[i + 1] - xs[i];
    let dxx = [2.0 / (hm * (hm + hp)), -2.0 / (hm * hp), 2.0 / (hp * (hm + hp))];
    let den = hp * hm * (hp + hm);
    let dx = [-hp * hp / den, (hp * hp - hm * hm) / den, hm * hm / den];
    (dxx, dx)
}

/// Second-order backward weights for `u_x` at `i` from nodes `i, i−1, i−2`.
pub fn backward_weights(xs: &[f64], i: usize) -> [f64; 3] {
    let h1 = xs[i] - xs[i - 1];
    let h2 = xs[i - 1] - xs[i - 2];
    [
        (2.0 * h1 + h2) / (h1 * (h1 + h2)),
        -(h1 + h2) / (h1 * h2),
        h1 / (h2 * (h1 + h2)),
    ]
}

/// Second-order forward weights for `u_x` at `i` from nodes `i, i+1, i+2`.
pub fn forward_weights(xs: &[f64], i: usize) -> [f64; 3] {
    let h1 = xs[i + 1] - xs[i];
    let h2 = xs[i + 2] - xs[i + 1];
    [
        -(2.0 * h1 + h2) / (h1 * (h1 + h2)),
        (h1 + h2) / (h1 * h2),
        -h1 / (h2 * (h1 + h2)),
    ]
}

impl ScalarField2D {
    pub fn new(xs: Vec<f64>, ss: Vec<f64>, values: Vec<f64>, grading: Grading, mapping: Option<Mapping>) -> Result<Self> {
        if xs.len() < 3 || ss.len() < 3 || values.len() != xs.len() * ss.len() {
            return Err(Error::InvalidParameter("field shape mismatch"));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) || ss.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("nodes must be strictly increasing"));
        }
        if let Some(m) = &mapping {
            if m.f.len() != xs.len() || m.fp.len() != xs.len() || m.fpp.len() != xs.len() {
                return Err(Error::InvalidParameter("mapping length mismatch"));
            }
        }
        Ok(Self { xs, ss, values, grading, mapping })
    }

    /// Samples `g(x, y)` on an unmapped rectangle.
    pub fn from_fn(xs: Vec<f64>, ys: Vec<f64>, grading: Grading, g: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(xs.len() * ys.len());
        for &x in &xs {
            for &y in &ys {
                values.push(g(x, y));
            }
        }
        Self { xs, ss: ys, values, grading, mapping: None }
    }

    pub fn nx(&self) -> usize {
        self.xs.len()
    }

    pub fn ny(&self) -> usize {
        self.ss.len()
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ss.len() + j]
    }

    /// `(f, f′, f″)` of column `i`.
    #[inline]
    pub fn column_map(&self, i: usize) -> (f64, f64, f64) {
        match &self.mapping {
            Some(m) => (m.f[i], m.fp[i], m.fpp[i]),
            None => (1.0, 0.0, 0.0),
        }
    }

    pub fn y(&self, i: usize, j: usize) -> f64 {
        self.ss[j] * self.column_map(i).0
    }

    /// Returns a copy with every value replaced by `g(x, y, ψ)`.
    pub fn map_values(&self, g: impl Fn(f64, f64, f64) -> f64) -> Self {
        let mut out = self.clone();
        let ny = self.ny();
        for i in 0..self.nx() {
            for j in 0..ny {
                out.values[i * ny + j] = g(self.xs[i], self.y(i, j), self.at(i, j));
            }
        }
        out
    }

    fn s_derivs(&self, i: usize, j: usize) -> (f64, f64) {
        let ny = self.ny();
        let h = self.ss[1] - self.ss[0];
        let u = |jj: usize| self.at(i, jj);
        if j == 0 {
            let us = (-3.0 * u(0) + 4.0 * u(1) - u(2)) / (2.0 * h);
            let uss = if ny >= 4 {
                (2.0 * u(0) - 5.0 * u(1) + 4.0 * u(2) - u(3)) / (h * h)
            } else {
                (u(0) - 2.0 * u(1) + u(2)) / (h * h)
            };
            (us, uss)
        } else if j == ny - 1 {
            let n = ny - 1;
            let us = (3.0 * u(n) - 4.0 * u(n - 1) + u(n - 2)) / (2.0 * h);
            let uss = if ny >= 4 {
                (2.0 * u(n) - 5.0 * u(n - 1) + 4.0 * u(n - 2) - u(n - 3)) / (h * h)
            } else {
                (u(n) - 2.0 * u(n - 1) + u(n - 2)) / (h * h)
            };
            (us, uss)
        } else {
            ((u(j + 1) - u(j - 1)) / (2.0 * h), (u(j + 1) - 2.0 * u(j) + u(j - 1)) / (h * h))
        }
    }

    /// `x`-derivative weights and the node indices they apply to.
    fn x_weights(&self, i: usize) -> ([usize; 3], [f64; 3], [f64; 3]) {
        let nx = self.nx();
        if i == 0 {
            let (dxx, _) = central_weights(&self.xs, 1);
            ([0, 1, 2], forward_weights(&self.xs, 0), dxx)
        } else if i == nx - 1 {
            let (dxx, _) = central_weights(&self.xs, nx - 2);
            let b = backward_weights(&self.xs, nx - 1);
            ([nx - 1, nx - 2, nx - 3], b, [dxx[2], dxx[1], dxx[0]])
        } else {
            let (dxx, dx) = central_weights(&self.xs, i);
            ([i - 1, i, i + 1], dx, dxx)
        }
    }

    /// Physical derivatives at node `(i, j)` in computational stencils.
    pub fn jet(&self, i: usize, j: usize) -> Jet {
        let (idx, wx, wxx) = self.x_weights(i);
        let mut ux = 0.0;
        let mut uxx = 0.0;
        let mut uxs = 0.0;
        for k in 0..3 {
            let v = self.at(idx[k], j);
            ux += wx[k] * v;
            uxx += wxx[k] * v;
            uxs += wx[k] * self.s_derivs(idx[k], j).0;
        }
        let (us, uss) = self.s_derivs(i, j);
        let (f, fp, fpp) = self.column_map(i);
        let s = self.ss[j];
        let sx = -s * fp / f;
        let sxx = s * (2.0 * fp * fp - f * fpp) / (f * f);
        Jet {
            v: self.at(i, j),
            x: ux + sx * us,
            y: us / f,
            xx: uxx + 2.0 * sx * uxs + sx * sx * uss + sxx * us,
            xy: uxs / f + sx * uss / f - fp / (f * f) * us,
            yy: uss / (f * f),
        }
    }

    /// Index of the `s` node nearest to `s`.
    pub fn nearest_s(&self, s: f64) -> usize {
        let mut best = 0;
        for j in 0..self.ny() {
            if (self.ss[j] - s).abs() < (self.ss[best] - s).abs() {
                best = j;
            }
        }
        best
    }

    /// Bilinear interpolation in `(x, s)`.
    pub fn sample(&self, x: f64, s: f64) -> Result<f64> {
        let (i, tx) = locate(&self.xs, x)?;
        let (j, ts) = locate(&self.ss, s)?;
        let v00 = self.at(i, j);
        let v10 = self.at(i + 1, j);
        let v01 = self.at(i, j + 1);
        let v11 = self.at(i + 1, j + 1);
        Ok((1.0 - tx) * ((1.0 - ts) * v00 + ts * v01) + tx * ((1.0 - ts) * v10 + ts * v11))
    }
}

/// Cell index and local coordinate of `t` in sorted nodes.
pub fn locate(nodes: &[f64], t: f64) -> Result<(usize, f64)> {
    let n = nodes.len();
    if !(t >= nodes[0] && t <= nodes[n - 1]) {
        return Err(Error::OutOfRange);
    }
    let mut lo = 0;
    let mut hi = n - 1;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if nodes[mid] <= t {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo, (t - nodes[lo]) / (nodes[lo + 1] - nodes[lo])))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_nodes_fill_interval() {
        let xs = graded_nodes(0.5, 65, Grading::Geometric { q: 0.95 }).unwrap();
        assert_eq!(xs[0], 0.0);
        assert_eq!(xs[64], 0.5);
        assert!(xs.windows(2).all(|w| w[1] > w[0]));
        let h0 = xs[1];
        assert!((h0 - 0.5 / 256.0).abs() < 0.05 * h0);
        let u = graded_nodes(1.0, 5, Grading::Uniform).unwrap();
        assert_eq!(u, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn stencils_exact_on_quadratics() {
        let xs = [0.0, 0.1, 0.25, 0.45];
        let f = |x: f64| 3.0 * x * x - x + 2.0;
        let (dxx, dx) = central_weights(&xs, 1);
        let v = [f(xs[0]), f(xs[1]), f(xs[2])];
        let d2: f64 = dxx.iter().zip(v).map(|(w, v)| w * v).sum();
        let d1: f64 = dx.iter().zip(v).map(|(w, v)| w * v).sum();
        assert!((d2 - 6.0).abs() < 1e-10);
        assert!((d1 - (6.0 * 0.1 - 1.0)).abs() < 1e-12);
        let b = backward_weights(&xs, 3);
        let d1b = b[0] * f(xs[3]) + b[1] * f(xs[2]) + b[2] * f(xs[1]);
        assert!((d1b - (6.0 * 0.45 - 1.0)).abs() < 1e-12);
        let fw = forward_weights(&xs, 0);
        let d1f = fw[0] * f(xs[0]) + fw[1] * f(xs[1]) + fw[2] * f(xs[2]);
        assert!((d1f + 1.0).abs() < 1e-12);
    }

    #[test]
    fn jet_of_quadratic_field() {
        let xs = graded_nodes(0.5, 17, Grading::Geometric { q: 0.9 }).unwrap();
        let ys = uniform_nodes(-1.0, 1.0, 9);
        let fld = ScalarField2D::from_fn(xs, ys, Grading::Uniform, |x, y| x * x + 2.0 * x * y - y * y);
        for (i, j) in [(0, 0), (3, 4), (16, 8), (8, 0)] {
            let jt = fld.jet(i, j);
            let (x, y) = (fld.xs[i], fld.y(i, j));
            assert!((jt.x - (2.0 * x + 2.0 * y)).abs() < 1e-9);
            assert!((jt.y - (2.0 * x - 2.0 * y)).abs() < 1e-9);
            assert!((jt.xx - 2.0).abs() < 1e-8);
            assert!((jt.xy - 2.0).abs() < 1e-8);
            assert!((jt.yy + 2.0).abs() < 1e-8);
        }
    }

    #[test]
    fn mapped_jet_matches_physical_derivatives() {
        let xs = uniform_nodes(0.0, 0.2, 41);
        let ss = uniform_nodes(0.0, 1.0, 41);
        let fl = |x: f64| 0.3 + 0.7 * x + 0.5 * x * x;
        let m = Mapping {
            f: xs.iter().map(|&x| fl(x)).collect(),
            fp: xs.iter().map(|&x| 0.7 + x).collect(),
            fpp: vec![1.0; 41],
        };
        let g = |x: f64, y: f64| x * x * y + y * y;
        let mut vals = Vec::new();
        for &x in &xs {
            for &s in &ss {
                vals.push(g(x, s * fl(x)));
            }
        }
        let fld = ScalarField2D::new(xs, ss, vals, Grading::Uniform, Some(m)).unwrap();
        let (i, j) = (20, 20);
        let (x, y) = (fld.xs[i], fld.y(i, j));
        let jt = fld.jet(i, j);
        assert!((jt.x - 2.0 * x * y).abs() < 1e-4);
        assert!((jt.y - (x * x + 2.0 * y)).abs() < 1e-4);
        assert!((jt.xx - 2.0 * y).abs() < 1e-3);
        assert!((jt.xy - 2.0 * x).abs() < 1e-3);
        assert!((jt.yy - 2.0).abs() < 1e-3);
    }
}
