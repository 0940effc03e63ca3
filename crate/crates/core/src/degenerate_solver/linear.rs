//! Nine-point stencil matrices, a red-black alternating line Gauss–Seidel
//! preconditioner and right-preconditioned BiCGSTAB.
//!
//! Every floating-point reduction runs in a fixed order, so results do not
//! depend on the number of worker threads.

use alloc::vec;
use alloc::vec::Vec;

/// Row coefficients on the `(i, j)` tensor grid.
///
/// `c[(di+1)*3 + (dj+1)]` couples to node `(i+di, j+dj)`; `far_x` couples to
/// `(i−2, j)` and `far_s` to `(i, j−2)`.
#[derive(Debug, Clone)]
pub struct StencilMatrix {
    pub nx: usize,
    pub ny: usize,
    pub c: Vec<[f64; 9]>,
    pub far_x: Vec<f64>,
    pub far_s: Vec<f64>,
}

pub const CENTER: usize = 4;
pub const WEST: usize = 1;
pub const EAST: usize = 7;
pub const SOUTH: usize = 3;
pub const NORTH: usize = 5;

#[inline]
pub fn slot(di: isize, dj: isize) -> usize {
    ((di + 1) * 3 + (dj + 1)) as usize
}

impl StencilMatrix {
    pub fn zeros(nx: usize, ny: usize) -> Self {
        let n = nx * ny;
        Self { nx, ny, c: vec![[0.0; 9]; n], far_x: vec![0.0; n], far_s: vec![0.0; n] }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Sets row `(i, j)` to the identity.
    pub fn set_identity(&mut self, i: usize, j: usize) {
        let r = i * self.ny + j;
        self.c[r] = [0.0; 9];
        self.c[r][CENTER] = 1.0;
        self.far_x[r] = 0.0;
        self.far_s[r] = 0.0;
    }

    #[inline]
    fn row_product(&self, i: usize, j: usize, u: &[f64]) -> f64 {
        let ny = self.ny;
        let r = i * ny + j;
        let c = &self.c[r];
        let mut acc = 0.0;
        for di in -1isize..=1 {
            let ii = i as isize + di;
            if ii < 0 || ii >= self.nx as isize {
                continue;
            }
            for dj in -1isize..=1 {
                let jj = j as isize + dj;
                if jj < 0 || jj >= ny as isize {
                    continue;
                }
                let w = c[slot(di, dj)];
                if w != 0.0 {
                    acc += w * u[ii as usize * ny + jj as usize];
                }
            }
        }
        if i >= 2 && self.far_x[r] != 0.0 {
            acc += self.far_x[r] * u[(i - 2) * ny + j];
        }
        if j >= 2 && self.far_s[r] != 0.0 {
            acc += self.far_s[r] * u[i * ny + j - 2];
        }
        acc
    }

    /// `out = A·u`.
    pub fn matvec(&self, u: &[f64], out: &mut [f64]) {
        let ny = self.ny;
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            out.par_chunks_mut(ny).enumerate().for_each(|(i, row)| {
                for (j, o) in row.iter_mut().enumerate() {
                    *o = self.row_product(i, j, u);
                }
            });
        }
        #[cfg(not(feature = "parallel"))]
        for i in 0..self.nx {
            for j in 0..ny {
                out[i * ny + j] = self.row_product(i, j, u);
            }
        }
    }

    /// `r = b − A·u`.
    pub fn residual(&self, u: &[f64], b: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.matvec(u, &mut out);
        for (o, bv) in out.iter_mut().zip(b) {
            *o = bv - *o;
        }
        out
    }
}

/// Solves a band system with two sub-diagonals and one super-diagonal by
/// elimination without pivoting. Returns `None` on a vanishing pivot.
pub fn solve_band(mut sub2: Vec<f64>, mut sub1: Vec<f64>, mut diag: Vec<f64>, sup1: &[f64], mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = diag.len();
    for k in 0..n {
        let p = diag[k];
        if p == 0.0 || !p.is_finite() {
            return None;
        }
        if k + 1 < n && sub1[k + 1] != 0.0 {
            let m = sub1[k + 1] / p;
            diag[k + 1] -= m * sup1[k];
            rhs[k + 1] -= m * rhs[k];
            sub1[k + 1] = 0.0;
        }
        if k + 2 < n && sub2[k + 2] != 0.0 {
            let m = sub2[k + 2] / p;
            sub1[k + 2] -= m * sup1[k];
            rhs[k + 2] -= m * rhs[k];
            sub2[k + 2] = 0.0;
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let up = if k + 1 < n { sup1[k] * x[k + 1] } else { 0.0 };
        x[k] = (rhs[k] - up) / diag[k];
    }
    Some(x)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Dir {
    X,
    S,
}

/// Band LU factors of one line, stored as elimination multipliers.
struct LineFactor {
    m1: Vec<f64>,
    m2: Vec<f64>,
    diag: Vec<f64>,
    sup1: Vec<f64>,
    /// Point-Jacobi fallback after a vanishing pivot.
    jacobi: bool,
}

impl LineFactor {
    fn new(mut sub2: Vec<f64>, mut sub1: Vec<f64>, mut diag: Vec<f64>, sup1: Vec<f64>) -> Self {
        let n = diag.len();
        let orig = diag.clone();
        let mut m1 = vec![0.0; n];
        let mut m2 = vec![0.0; n];
        for k in 0..n {
            let p = diag[k];
            if p == 0.0 || !p.is_finite() {
                return Self { m1: vec![0.0; n], m2: vec![0.0; n], diag: orig, sup1, jacobi: true };
            }
            if k + 1 < n && sub1[k + 1] != 0.0 {
                m1[k + 1] = sub1[k + 1] / p;
                diag[k + 1] -= m1[k + 1] * sup1[k];
                sub1[k + 1] = 0.0;
            }
            if k + 2 < n && sub2[k + 2] != 0.0 {
                m2[k + 2] = sub2[k + 2] / p;
                sub1[k + 2] -= m2[k + 2] * sup1[k];
                sub2[k + 2] = 0.0;
            }
        }
        Self { m1, m2, diag, sup1, jacobi: false }
    }

    fn solve(&self, rhs: &mut [f64]) {
        let n = self.diag.len();
        if self.jacobi {
            for k in 0..n {
                rhs[k] = if self.diag[k] != 0.0 { rhs[k] / self.diag[k] } else { 0.0 };
            }
            return;
        }
        for k in 0..n {
            let v = rhs[k];
            if k + 1 < n {
                rhs[k + 1] -= self.m1[k + 1] * v;
            }
            if k + 2 < n {
                rhs[k + 2] -= self.m2[k + 2] * v;
            }
        }
        for k in (0..n).rev() {
            let up = if k + 1 < n { self.sup1[k] * rhs[k + 1] } else { 0.0 };
            rhs[k] = (rhs[k] - up) / self.diag[k];
        }
    }
}

/// Red-black alternating line Gauss–Seidel used as a fixed linear preconditioner.
///
/// Each half-sweep solves every line of one colour against a snapshot of the
/// current iterate, so the result does not depend on how lines are scheduled.
pub struct LinePreconditioner<'a> {
    a: &'a StencilMatrix,
    sweeps: usize,
    x_lines: Vec<LineFactor>,
    s_lines: Vec<LineFactor>,
}

impl<'a> LinePreconditioner<'a> {
    pub fn new(a: &'a StencilMatrix, sweeps: usize) -> Self {
        let (nx, ny) = (a.nx, a.ny);
        let x_lines = (0..ny)
            .map(|j| {
                let rows = |f: &dyn Fn(usize) -> f64| (0..nx).map(f).collect::<Vec<f64>>();
                LineFactor::new(
                    rows(&|i| a.far_x[i * ny + j]),
                    rows(&|i| a.c[i * ny + j][WEST]),
                    rows(&|i| a.c[i * ny + j][CENTER]),
                    rows(&|i| a.c[i * ny + j][EAST]),
                )
            })
            .collect();
        let s_lines = (0..nx)
            .map(|i| {
                let rows = |f: &dyn Fn(usize) -> f64| (0..ny).map(f).collect::<Vec<f64>>();
                LineFactor::new(
                    rows(&|j| a.far_s[i * ny + j]),
                    rows(&|j| a.c[i * ny + j][SOUTH]),
                    rows(&|j| a.c[i * ny + j][CENTER]),
                    rows(&|j| a.c[i * ny + j][NORTH]),
                )
            })
            .collect();
        Self { a, sweeps: sweeps.max(1), x_lines, s_lines }
    }

    /// Couplings of row `(i, j)` that leave the line, applied to `z`.
    #[inline]
    fn off_line(&self, dir: Dir, i: usize, j: usize, z: &[f64]) -> f64 {
        let a = self.a;
        let (nx, ny) = (a.nx, a.ny);
        let r = i * ny + j;
        let c = &a.c[r];
        let mut acc = 0.0;
        match dir {
            Dir::X => {
                for di in -1isize..=1 {
                    let ii = i as isize + di;
                    if ii < 0 || ii >= nx as isize {
                        continue;
                    }
                    let base = ii as usize * ny;
                    if j >= 1 {
                        acc += c[slot(di, -1)] * z[base + j - 1];
                    }
                    if j + 1 < ny {
                        acc += c[slot(di, 1)] * z[base + j + 1];
                    }
                }
                if j >= 2 {
                    acc += a.far_s[r] * z[r - 2];
                }
            }
            Dir::S => {
                for di in [-1isize, 1] {
                    let ii = i as isize + di;
                    if ii < 0 || ii >= nx as isize {
                        continue;
                    }
                    let base = ii as usize * ny;
                    for dj in -1isize..=1 {
                        let jj = j as isize + dj;
                        if jj < 0 || jj >= ny as isize {
                            continue;
                        }
                        acc += c[slot(di, dj)] * z[base + jj as usize];
                    }
                }
                if i >= 2 {
                    acc += a.far_x[r] * z[r - 2 * ny];
                }
            }
        }
        acc
    }

    fn solve_line(&self, dir: Dir, line: usize, r: &[f64], z: &[f64], out: &mut [f64]) {
        let ny = self.a.ny;
        for (k, o) in out.iter_mut().enumerate() {
            let (i, j) = if dir == Dir::X { (k, line) } else { (line, k) };
            *o = r[i * ny + j] - self.off_line(dir, i, j, z);
        }
        let f = if dir == Dir::X { &self.x_lines[line] } else { &self.s_lines[line] };
        f.solve(out);
    }

    fn half_sweep(&self, dir: Dir, colour: usize, r: &[f64], z: &mut [f64], buf: &mut Vec<f64>) {
        let (nx, ny) = (self.a.nx, self.a.ny);
        let (count, len) = if dir == Dir::X { (ny, nx) } else { (nx, ny) };
        let lines: Vec<usize> = (colour..count).step_by(2).collect();
        buf.resize(lines.len() * len, 0.0);
        {
            let snapshot: &[f64] = z;
            #[cfg(feature = "parallel")]
            {
                use rayon::prelude::*;
                buf.par_chunks_mut(len)
                    .zip(lines.par_iter())
                    .for_each(|(out, &l)| self.solve_line(dir, l, r, snapshot, out));
            }
            #[cfg(not(feature = "parallel"))]
            for (out, &l) in buf.chunks_mut(len).zip(lines.iter()) {
                self.solve_line(dir, l, r, snapshot, out);
            }
        }
        for (out, &l) in buf.chunks(len).zip(lines.iter()) {
            for (k, &v) in out.iter().enumerate() {
                let idx = if dir == Dir::X { k * ny + l } else { l * ny + k };
                z[idx] = v;
            }
        }
    }

    /// `z ≈ A⁻¹ r`.
    pub fn apply(&self, r: &[f64]) -> Vec<f64> {
        let mut z = vec![0.0; r.len()];
        let mut buf = Vec::new();
        for _ in 0..self.sweeps {
            for dir in [Dir::X, Dir::S] {
                for colour in 0..2 {
                    self.half_sweep(dir, colour, r, &mut z, &mut buf);
                }
            }
            for dir in [Dir::S, Dir::X] {
                for colour in (0..2).rev() {
                    self.half_sweep(dir, colour, r, &mut z, &mut buf);
                }
            }
        }
        z
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        s += x * y;
    }
    s
}

fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearReport {
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

/// Right-preconditioned BiCGSTAB, restarted on breakdown.
pub fn bicgstab(a: &StencilMatrix, b: &[f64], x: &mut [f64], rtol: f64, atol: f64, max_iter: usize, sweeps: usize) -> LinearReport {
    let n = b.len();
    let m = LinePreconditioner::new(a, sweeps);
    let target = (rtol * norm(b)).max(atol);
    let mut r = a.residual(x, b);
    let mut rn = norm(&r);
    let mut it = 0;
    let mut v = vec![0.0; n];
    let mut t = vec![0.0; n];
    let mut best_x = x.to_vec();
    let mut best = rn;
    'restart: while it < max_iter && rn > target {
        let rhat = r.clone();
        let mut p = vec![0.0; n];
        v.iter_mut().for_each(|e| *e = 0.0);
        let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
        while it < max_iter {
            it += 1;
            let rho_new = dot(&rhat, &r);
            if rho_new == 0.0 || !rho_new.is_finite() {
                r = a.residual(x, b);
                rn = norm(&r);
                continue 'restart;
            }
            let beta = (rho_new / rho) * (alpha / omega);
            for k in 0..n {
                p[k] = r[k] + beta * (p[k] - omega * v[k]);
            }
            let y = m.apply(&p);
            a.matvec(&y, &mut v);
            let den = dot(&rhat, &v);
            if den == 0.0 || !den.is_finite() {
                r = a.residual(x, b);
                rn = norm(&r);
                continue 'restart;
            }
            alpha = rho_new / den;
            let mut s = r.clone();
            for k in 0..n {
                s[k] -= alpha * v[k];
            }
            if norm(&s) <= target {
                for k in 0..n {
                    x[k] += alpha * y[k];
                }
                r = a.residual(x, b);
                rn = norm(&r);
                break 'restart;
            }
            let z = m.apply(&s);
            a.matvec(&z, &mut t);
            let tt = dot(&t, &t);
            omega = if tt > 0.0 { dot(&t, &s) / tt } else { 0.0 };
            for k in 0..n {
                x[k] += alpha * y[k] + omega * z[k];
                r[k] = s[k] - omega * t[k];
            }
            rho = rho_new;
            rn = norm(&r);
            if !rn.is_finite() {
                x.copy_from_slice(&best_x);
                r = a.residual(x, b);
                rn = norm(&r);
                break 'restart;
            }
            if rn < best {
                best = rn;
                best_x.copy_from_slice(x);
            }
            if rn <= target {
                break 'restart;
            }
            if omega == 0.0 {
                continue 'restart;
            }
        }
    }
    LinearReport { iterations: it, residual: rn, converged: rn <= target }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian(nx: usize, ny: usize) -> StencilMatrix {
        let mut a = StencilMatrix::zeros(nx, ny);
        for i in 0..nx {
            for j in 0..ny {
                if i == 0 || j == 0 || i == nx - 1 || j == ny - 1 {
                    a.set_identity(i, j);
                    continue;
                }
                let r = i * ny + j;
                a.c[r][CENTER] = -4.0 - 0.1 * i as f64;
                a.c[r][WEST] = 1.0;
                a.c[r][EAST] = 1.0;
                a.c[r][SOUTH] = 1.0;
                a.c[r][NORTH] = 1.0;
                a.c[r][slot(1, 1)] = 0.05;
                a.c[r][slot(-1, -1)] = -0.05;
                if i >= 2 {
                    a.far_x[r] = 0.02;
                }
            }
        }
        a
    }

    #[test]
    fn band_solver_matches_dense() {
        let sub2 = vec![0.0, 0.0, 0.3, -0.2, 0.1];
        let sub1 = vec![0.0, 1.0, -0.5, 0.4, 0.7];
        let diag = vec![4.0, 5.0, 3.0, 6.0, -4.0];
        let sup1 = vec![1.0, -1.0, 0.5, 0.2, 0.0];
        let x_true = [1.0, -2.0, 0.5, 3.0, -1.0];
        let mut rhs = vec![0.0; 5];
        for k in 0..5 {
            rhs[k] = diag[k] * x_true[k];
            if k >= 1 {
                rhs[k] += sub1[k] * x_true[k - 1];
            }
            if k >= 2 {
                rhs[k] += sub2[k] * x_true[k - 2];
            }
            if k + 1 < 5 {
                rhs[k] += sup1[k] * x_true[k + 1];
            }
        }
        let x = solve_band(sub2, sub1, diag, &sup1, rhs).unwrap();
        for k in 0..5 {
            assert!((x[k] - x_true[k]).abs() < 1e-13);
        }
    }

    #[test]
    fn bicgstab_solves_stencil_system() {
        let a = laplacian(33, 17);
        let n = a.len();
        let xt: Vec<f64> = (0..n).map(|k| libm::sin(0.37 * k as f64)).collect();
        let mut b = vec![0.0; n];
        a.matvec(&xt, &mut b);
        let mut x = vec![0.0; n];
        let rep = bicgstab(&a, &b, &mut x, 1e-13, 0.0, 500, 1);
        assert!(rep.converged, "{rep:?}");
        for k in 0..n {
            assert!((x[k] - xt[k]).abs() < 1e-9);
        }
    }
}
