//! The operator `c²Δ - λ²` (with `Δ = -∇²`) acting on a branch ansatz
//! `e^{iκ z·ω_b} Σ_m |z|^{-m} b_m(z/|z|)`, `κ = λ/c_b`.
//!
//! Stripping the carrier, a homogeneous term contributes
//! `-c² r^{-m-2}[m(m-1) b + Δ_S b] - 2iκc² r^{-m-1} t_m(b) + κ²(c² - c_b²) r^{-m} b`
//! with `t_m(b) = -m cos s b - sin s ∂_s b`, `s` the distance from `ω_b`
//! and `Δ_S` the Laplace–Beltrami operator. Expanding
//! `c² = Σ_i C_i r^{-i}` sorts everything by homogeneity.

use super::grid::PolarGrid;
use crate::geometry::{dot, Vec3};
use crate::media::{Hemisphere, PerturbationExpansion};
use num_complex::Complex64;

/// Carrier data of one branch.
#[derive(Debug, Clone)]
pub struct BranchOperator {
    pub lambda: f64,
    /// Background speed `c_b` on the branch's side.
    pub c_b: f64,
    pub source: Vec3,
    pub hemisphere: Hemisphere,
    pub perturbation: PerturbationExpansion,
}

/// Amplitude sampled on a grid with the derivatives the operator needs.
#[derive(Debug, Clone)]
pub struct GridAmplitude {
    pub m: usize,
    pub values: Vec<Complex64>,
    pub ds: Vec<Complex64>,
    pub dtheta: Vec<Complex64>,
    pub lb: Vec<Complex64>,
}

impl GridAmplitude {
    pub fn constant(grid: &PolarGrid, value: Complex64) -> Self {
        let z = vec![Complex64::default(); grid.len()];
        Self { m: 0, values: vec![value; grid.len()], ds: z.clone(), dtheta: z.clone(), lb: z }
    }

    pub fn from_values(grid: &PolarGrid, m: usize, values: Vec<Complex64>) -> Self {
        let d = grid.derivatives(&values);
        Self { m, values, ds: d.ds, dtheta: d.dtheta, lb: d.lb }
    }
}

/// `(b, ∂_s b, ∂_θ̃ b, Δ_S b)` of one amplitude at a point.
#[derive(Debug, Clone, Copy)]
pub struct PointAmplitude {
    pub m: usize,
    pub b: Complex64,
    pub ds: Complex64,
    pub dtheta: Complex64,
    pub lb: Complex64,
}

impl BranchOperator {
    pub fn kappa(&self) -> f64 {
        self.lambda / self.c_b
    }

    /// `γ_i(θ)` for `i = 0..=max_order` (index 0 unused).
    pub fn gammas(&self, theta: Vec3) -> Vec<f64> {
        let top = self.perturbation.max_order();
        (0..=top)
            .map(|i| if i == 0 { 0.0 } else { self.perturbation.gamma_on(i, self.hemisphere, theta) })
            .collect()
    }

    /// `C_i(θ)` of `c² = Σ C_i r^{-i}`, `i = 0..=2·max_order`.
    pub fn c2_coefficients(&self, theta: Vec3) -> Vec<f64> {
        let g = self.gammas(theta);
        let top = g.len() - 1;
        let mut c = vec![0.0; 2 * top + 1];
        c[0] = self.c_b * self.c_b;
        for i in 1..=top {
            c[i] += 2.0 * self.c_b * g[i];
            for k in 1..=top {
                c[i + k] += g[i] * g[k];
            }
        }
        c
    }

    /// Coefficient of `r^{-k}` in the carrier-stripped error of the ansatz
    /// `Σ r^{-m} b_m`, at one direction with arc length `s` from the source.
    pub fn error_coefficient_at(&self, k: usize, s: f64, c2: &[f64], amps: &[PointAmplitude]) -> Complex64 {
        let kappa = self.kappa();
        let (sn, cs) = s.sin_cos();
        let i = Complex64::i();
        let coeff = |idx: isize| -> f64 {
            if idx < 0 || idx as usize >= c2.len() {
                0.0
            } else {
                c2[idx as usize]
            }
        };
        let mut d = Complex64::default();
        for a in amps {
            let m = a.m as isize;
            let k = k as isize;
            let mf = a.m as f64;
            let curv = coeff(k - m - 2);
            if curv != 0.0 {
                d -= (a.b * (mf * (mf - 1.0)) + a.lb) * curv;
            }
            let tr = coeff(k - m - 1);
            if tr != 0.0 {
                let t = -(a.b * (mf * cs)) - a.ds * sn;
                d -= 2.0 * i * kappa * tr * t;
            }
            if k - m >= 1 {
                let v = coeff(k - m);
                if v != 0.0 {
                    d += a.b * (kappa * kappa * v);
                }
            }
        }
        d
    }

    /// Error coefficient of order `k` at every grid node.
    pub fn error_coefficients(&self, grid: &PolarGrid, k: usize, amps: &[GridAmplitude]) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); grid.len()];
        for j in 0..grid.n_theta() {
            for ii in 0..grid.n_s() {
                let idx = grid.idx(ii, j);
                let c2 = self.c2_coefficients(grid.node_point(ii, j));
                let pts: Vec<PointAmplitude> = amps
                    .iter()
                    .map(|a| PointAmplitude { m: a.m, b: a.values[idx], ds: a.ds[idx], dtheta: a.dtheta[idx], lb: a.lb[idx] })
                    .collect();
                out[idx] = self.error_coefficient_at(k, grid.s_at(ii, j), &c2, &pts);
            }
        }
        out
    }

    /// `g(z) = c(z) - c_b` from the full expansion on this branch's hemisphere.
    pub fn speed_offset(&self, z: Vec3) -> f64 {
        let r = dot(z, z).sqrt();
        let theta = [z[0] / r, z[1] / r, z[2] / r];
        let g = self.gammas(theta);
        g.iter().enumerate().skip(1).map(|(i, gi)| gi * r.powi(-(i as i32))).sum()
    }

    /// Carrier-stripped `(c²Δ - λ²)` of the ansatz at `z`, with the full
    /// speed `c = c_b + g` and `c²κ² - λ² = κ²(2c_b g + g²)`.
    pub fn residual_at(&self, z: Vec3, amps: &[PointAmplitude]) -> Complex64 {
        let r = dot(z, z).sqrt();
        let theta = [z[0] / r, z[1] / r, z[2] / r];
        let cos_s = dot(theta, self.source).clamp(-1.0, 1.0);
        let sin_s = (1.0 - cos_s * cos_s).sqrt();
        let g = self.speed_offset(z);
        let c2 = (self.c_b + g) * (self.c_b + g);
        let kappa = self.kappa();
        let pot = kappa * kappa * (2.0 * self.c_b * g + g * g);
        let i = Complex64::i();
        let mut acc = Complex64::default();
        for a in amps {
            let mf = a.m as f64;
            let rm = r.powi(-(a.m as i32));
            let lap = (a.b * (mf * (mf - 1.0)) + a.lb) * (rm / (r * r));
            let t = -(a.b * (mf * cos_s)) - a.ds * sin_s;
            acc += -lap * c2 - 2.0 * i * kappa * c2 * t * (rm / r) + a.b * (pot * rm);
        }
        acc
    }
}
