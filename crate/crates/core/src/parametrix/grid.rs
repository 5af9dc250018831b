//! Mapped polar grids on S² about a branch source.
//!
//! Nodes are `(x_i, θ̃_j)` with Gauss–Legendre `x ∈ [-1, 1]` and uniform
//! `θ̃ ∈ [0, 2π)`; the arc length is `s = s_lo(θ̃) + (x + 1) L(θ̃) / 2`.
//! A diameter grid runs `s` from `-s_eq(θ̃ + π)` to `s_eq(θ̃)` so the source
//! is an interior point of every column; an annulus grid runs from the
//! equator crossing `s_eq(θ̃)` to a fixed `s_hi`.

use crate::geometry::{Direction, TangentFrame, Vec3};
use crate::quadrature::{barycentric_row, barycentric_weights, differentiation_matrix, fourier_derivative, gauss_legendre, trig_interp_row};
use num_complex::Complex64;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridKind {
    Diameter,
    Annulus { s_hi: f64 },
}

/// `s_eq(θ̃)` and its first two θ̃-derivatives.
fn crossing_jet(frame: &TangentFrame, theta: f64) -> [f64; 3] {
    let a = frame.source[2];
    let (sn, cs) = theta.sin_cos();
    let b = cs * frame.e1[2] + sn * frame.e2[2];
    let b1 = -sn * frame.e1[2] + cs * frame.e2[2];
    let b2 = -b;
    let q = a * a + b * b;
    let s = if a > 0.0 { a.atan2(-b) } else { (-a).atan2(b) };
    let s1 = a * b1 / q;
    let s2 = a * (b2 * q - 2.0 * b * b1 * b1) / (q * q);
    [s, s1, s2]
}

#[derive(Debug, Clone)]
pub struct PolarGrid {
    pub frame: TangentFrame,
    pub kind: GridKind,
    pub x: Vec<f64>,
    pub theta: Vec<f64>,
    bw: Vec<f64>,
    dmat: Vec<Vec<f64>>,
    /// Per column: `[s_lo, s_lo', s_lo'']` and `[L, L', L'']`.
    lo: Vec<[f64; 3]>,
    len: Vec<[f64; 3]>,
}

/// Tangential derivatives of a field at every node.
#[derive(Debug, Clone)]
pub struct FieldDerivatives {
    /// `∂_s b`.
    pub ds: Vec<Complex64>,
    /// `∂_θ̃ b` at fixed `s`.
    pub dtheta: Vec<Complex64>,
    /// Laplace–Beltrami operator of `b`.
    pub lb: Vec<Complex64>,
}

impl PolarGrid {
    pub fn new(source: Direction, kind: GridKind, n_s: usize, n_theta: usize) -> Self {
        let frame = TangentFrame::new(source);
        let (x, _) = gauss_legendre(n_s);
        let bw = barycentric_weights(&x);
        let dmat = differentiation_matrix(&x);
        let theta: Vec<f64> = (0..n_theta).map(|j| 2.0 * PI * j as f64 / n_theta as f64).collect();
        let mut grid = Self { frame, kind, x, theta, bw, dmat, lo: Vec::new(), len: Vec::new() };
        let (lo, len): (Vec<_>, Vec<_>) = grid.theta.iter().map(|t| grid.map_at(*t)).unzip();
        grid.lo = lo;
        grid.len = len;
        grid
    }

    /// `(s_lo, L)` jets at an arbitrary θ̃.
    pub fn map_at(&self, theta: f64) -> ([f64; 3], [f64; 3]) {
        let e = crossing_jet(&self.frame, theta);
        match self.kind {
            GridKind::Diameter => {
                let o = crossing_jet(&self.frame, theta + PI);
                ([-o[0], -o[1], -o[2]], [e[0] + o[0], e[1] + o[1], e[2] + o[2]])
            }
            GridKind::Annulus { s_hi } => (e, [s_hi - e[0], -e[1], -e[2]]),
        }
    }

    pub fn n_s(&self) -> usize {
        self.x.len()
    }

    pub fn n_theta(&self) -> usize {
        self.theta.len()
    }

    pub fn len(&self) -> usize {
        self.n_s() * self.n_theta()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat index of node `(i, j)`; columns are contiguous.
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.n_s() + i
    }

    pub fn s_at(&self, i: usize, j: usize) -> f64 {
        self.lo[j][0] + 0.5 * (self.x[i] + 1.0) * self.len[j][0]
    }

    /// Lower transport limit of column `j` (`0` on a diameter grid).
    pub fn s_start(&self, j: usize) -> f64 {
        match self.kind {
            GridKind::Diameter => 0.0,
            GridKind::Annulus { .. } => self.lo[j][0],
        }
    }

    pub fn node_point(&self, i: usize, j: usize) -> Vec3 {
        self.frame.point(self.s_at(i, j), self.theta[j])
    }

    /// Node `(s, θ̃)` pairs in flat order.
    pub fn nodes(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.len());
        for j in 0..self.n_theta() {
            for i in 0..self.n_s() {
                out.push((self.s_at(i, j), self.theta[j]));
            }
        }
        out
    }

    fn column_diff(&self, f: &[Complex64]) -> Vec<Complex64> {
        let n = self.n_s();
        let mut out = vec![Complex64::default(); f.len()];
        for j in 0..self.n_theta() {
            let col = &f[j * n..(j + 1) * n];
            for i in 0..n {
                out[j * n + i] = self.dmat[i].iter().zip(col).map(|(d, v)| v * d).sum();
            }
        }
        out
    }

    fn row_diff(&self, f: &[Complex64], order: u32) -> Vec<Complex64> {
        let (n, m) = (self.n_s(), self.n_theta());
        let mut out = vec![Complex64::default(); f.len()];
        for i in 0..n {
            let row: Vec<Complex64> = (0..m).map(|j| f[j * n + i]).collect();
            for (j, v) in fourier_derivative(&row, order).into_iter().enumerate() {
                out[j * n + i] = v;
            }
        }
        out
    }

    pub fn derivatives(&self, f: &[Complex64]) -> FieldDerivatives {
        let n = self.n_s();
        let fx = self.column_diff(f);
        let fxx = self.column_diff(&fx);
        let ft = self.row_diff(f, 1);
        let ftt = self.row_diff(f, 2);
        let fxt = self.row_diff(&fx, 1);
        let mut ds = vec![Complex64::default(); f.len()];
        let mut dtheta = ds.clone();
        let mut lb = ds.clone();
        for j in 0..self.n_theta() {
            let [_, lo1, lo2] = self.lo[j];
            let [l0, l1, l2] = self.len[j];
            for i in 0..n {
                let k = j * n + i;
                let xp = self.x[i] + 1.0;
                let xt = -(2.0 * lo1 + xp * l1) / l0;
                let dxt = -(2.0 * lo2 + xp * l2) / l0 + 2.0 * l1 * (2.0 * lo1 + xp * l1) / (l0 * l0);
                let b_s = fx[k] * (2.0 / l0);
                let b_ss = fxx[k] * (4.0 / (l0 * l0));
                let b_t = ft[k] + fx[k] * xt;
                let b_tt = ftt[k] + fxt[k] * (2.0 * xt) + fxx[k] * (xt * xt) + fx[k] * dxt;
                let s = self.s_at(i, j);
                let (sn, cs) = s.sin_cos();
                ds[k] = b_s;
                dtheta[k] = b_t;
                lb[k] = b_ss + b_s * (cs / sn) + b_tt / (sn * sn);
            }
        }
        FieldDerivatives { ds, dtheta, lb }
    }

    /// Interpolation weights `(x-row, θ̃-row)` for the point `(s, θ̃)`, or
    /// `None` outside the grid's `s`-range.
    pub fn interp_rows(&self, s: f64, theta: f64) -> Option<(Vec<f64>, Vec<f64>)> {
        let (lo, len) = self.map_at(theta);
        let x = -1.0 + 2.0 * (s - lo[0]) / len[0];
        if !(-1.0 - 1e-9..=1.0 + 1e-9).contains(&x) {
            return None;
        }
        Some((barycentric_row(&self.x, &self.bw, x.clamp(-1.0, 1.0)), trig_interp_row(self.n_theta(), theta)))
    }

    pub fn apply_rows(&self, rows: &(Vec<f64>, Vec<f64>), f: &[Complex64]) -> Complex64 {
        let n = self.n_s();
        let mut acc = Complex64::default();
        for (j, wt) in rows.1.iter().enumerate() {
            if *wt == 0.0 {
                continue;
            }
            let col: Complex64 = rows.0.iter().zip(&f[j * n..(j + 1) * n]).map(|(w, v)| v * w).sum();
            acc += col * wt;
        }
        acc
    }

    /// Values of `f` on column `j` at local coordinate `x`.
    pub fn column_eval(&self, j: usize, x: f64, f: &[Complex64]) -> Complex64 {
        let n = self.n_s();
        let row = barycentric_row(&self.x, &self.bw, x);
        row.iter().zip(&f[j * n..(j + 1) * n]).map(|(w, v)| v * w).sum()
    }

    /// Local coordinate of arc length `s` on column `j`.
    pub fn x_of(&self, j: usize, s: f64) -> f64 {
        -1.0 + 2.0 * (s - self.lo[j][0]) / self.len[j][0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphharm::HarmonicTable;

    fn field(grid: &PolarGrid, t: &HarmonicTable) -> Vec<Complex64> {
        let mut f = vec![Complex64::default(); grid.len()];
        for j in 0..grid.n_theta() {
            for i in 0..grid.n_s() {
                f[grid.idx(i, j)] = Complex64::new(t.eval(grid.node_point(i, j)), 0.0);
            }
        }
        f
    }

    #[test]
    fn laplace_beltrami_of_harmonics() {
        let mut t = HarmonicTable::zeros(4);
        t.set(3, 1, 0.8);
        t.set(3, -2, -0.5);
        let src = Direction::from_angles(0.6, 0.4);
        for kind in [GridKind::Diameter, GridKind::Annulus { s_hi: PI - 0.1 }] {
            let src = if matches!(kind, GridKind::Annulus { .. }) { src.neg() } else { src };
            let g = PolarGrid::new(src, kind, 48, 48);
            let f = field(&g, &t);
            let d = g.derivatives(&f);
            for j in 0..g.n_theta() {
                for i in 0..g.n_s() {
                    let k = g.idx(i, j);
                    let e = (d.lb[k] + 12.0 * f[k]).norm();
                    // Nodes that land next to the source lose digits in the
                    // 1/sin² s term.
                    let tol = if g.s_at(i, j).abs() > 0.2 { 1e-8 } else { 1e-4 };
                    assert!(e < tol, "{kind:?} s = {}: {e:e}", g.s_at(i, j));
                }
            }
            let p = crate::geometry::normalize([0.3, -0.2, 0.7]);
            let (s, th) = g.frame.coordinates(p);
            let rows = g.interp_rows(s, th).unwrap();
            assert!((g.apply_rows(&rows, &f).re - t.eval(p)).abs() < 1e-11);
        }
    }
}
