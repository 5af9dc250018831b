//! One-dimensional inverse scattering for `-u'' + q u = k² u` by the
//! Marchenko equation
//! `K(x, y) + F(x + y) + ∫_x^∞ K(x, t) F(t + y) dt = 0`, `q = -2 d/dx K(x, x)`.
//!
//! Reflection data follow the plane-wave convention `e^{iky} + R e^{-iky}`
//! above the profile, so `F(t) = (1/2π) ∫ R(k) e^{-ikt} dk + Σ c_j e^{-κ_j t}`.

use super::InverseError;
use crate::media::StratifiedProfile;
use crate::quadrature::gauss_legendre_on;
use crate::spectral1d::helmholtz_coefficient;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundState {
    pub kappa: f64,
    /// Coefficient `c` of `c e^{-κ t}` in `F`.
    pub norming: f64,
}

impl BoundState {
    /// From the energy `-κ²`.
    pub fn from_energy(energy: f64, norming: f64) -> Self {
        Self { kappa: (-energy).sqrt(), norming }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarchenkoConfig {
    pub x_min: f64,
    /// Right end of the support of `q`; `K(x, ·)` is truncated at `2 x_max - x`.
    pub x_max: f64,
    pub n_x: usize,
    pub nodes: usize,
    pub max_condition: f64,
}

impl Default for MarchenkoConfig {
    fn default() -> Self {
        Self { x_min: -3.0, x_max: 3.0, n_x: 121, nodes: 512, max_condition: 1e10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Potential1D {
    pub x: Vec<f64>,
    pub q: Vec<f64>,
    /// Largest condition estimate of the Nyström systems.
    pub condition: f64,
}

impl Potential1D {
    /// Linear interpolation, `0` outside the grid.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.x.len();
        if n < 2 || x < self.x[0] || x > self.x[n - 1] {
            return 0.0;
        }
        let h = (self.x[n - 1] - self.x[0]) / (n - 1) as f64;
        let i = (((x - self.x[0]) / h) as usize).min(n - 2);
        let t = (x - self.x[i]) / h;
        self.q[i] * (1.0 - t) + self.q[i + 1] * t
    }
}

/// Continuous part of `F` tabulated on a uniform grid, cubic interpolation.
struct KernelTable {
    t0: f64,
    h: f64,
    values: Vec<f64>,
}

impl KernelTable {
    fn new(k: &[f64], r: &[Complex64], t0: f64, t1: f64) -> Self {
        let n = ((t1 - t0) / 2e-3).ceil() as usize + 4;
        let h = (t1 - t0) / (n - 4) as f64;
        let half_line = k.first().is_some_and(|k0| *k0 >= 0.0);
        let values = (0..n)
            .into_par_iter()
            .map(|j| {
                let t = t0 + (j as f64 - 1.0) * h;
                let mut acc = 0.0;
                for q in 0..k.len().saturating_sub(1) {
                    let dk = k[q + 1] - k[q];
                    let f = |i: usize| (r[i] * Complex64::new(0.0, -k[i] * t).exp()).re;
                    acc += 0.5 * dk * (f(q) + f(q + 1));
                }
                if half_line {
                    acc / std::f64::consts::PI
                } else {
                    acc / (2.0 * std::f64::consts::PI)
                }
            })
            .collect();
        Self { t0: t0 - h, h, values }
    }

    fn eval(&self, t: f64) -> f64 {
        let u = (t - self.t0) / self.h;
        let i = (u.floor() as isize).clamp(1, self.values.len() as isize - 3) as usize;
        let s = u - i as f64;
        let (p0, p1, p2, p3) = (self.values[i - 1], self.values[i], self.values[i + 1], self.values[i + 2]);
        // Catmull-Rom.
        p1 + 0.5 * s * (p2 - p0 + s * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + s * (3.0 * (p1 - p2) + p3 - p0)))
    }
}

/// Hager's estimate of `‖A⁻¹‖₁` for symmetric positive definite `A`.
fn inverse_norm_estimate(chol: &nalgebra::Cholesky<f64, nalgebra::Dyn>, n: usize) -> f64 {
    let mut x = DVector::from_element(n, 1.0 / n as f64);
    let mut est = 0.0;
    for _ in 0..5 {
        let y = chol.solve(&x);
        est = y.iter().map(|v| v.abs()).sum::<f64>();
        let xi = y.map(|v| if v >= 0.0 { 1.0 } else { -1.0 });
        let z = chol.solve(&xi);
        let (j, zmax) = z.iter().enumerate().fold((0, f64::MIN), |a, (i, v)| if v.abs() > a.1 { (i, v.abs()) } else { a });
        if zmax <= z.dot(&x) {
            break;
        }
        x = DVector::zeros(n);
        x[j] = 1.0;
    }
    est
}

/// `K(x, x)` from the symmetrized Nyström system on `[x, x + span]`.
fn diagonal_kernel(x: f64, span: f64, nodes: usize, f: &(dyn Fn(f64) -> f64 + Sync)) -> Result<(f64, f64), InverseError> {
    if span <= 1e-12 {
        return Ok((0.0, 1.0));
    }
    let (t, w) = gauss_legendre_on(nodes, x, x + span);
    let sw: Vec<f64> = w.iter().map(|v| v.sqrt()).collect();
    let a = DMatrix::from_fn(nodes, nodes, |i, j| (if i == j { 1.0 } else { 0.0 }) + sw[i] * f(t[i] + t[j]) * sw[j]);
    let rhs = DVector::from_fn(nodes, |i, _| -sw[i] * f(x + t[i]));
    let a_norm = (0..nodes).map(|j| a.column(j).iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    let chol = a.cholesky().ok_or(InverseError::IllPosedKernel(f64::INFINITY))?;
    let cond = a_norm * inverse_norm_estimate(&chol, nodes);
    // z_i = √w_i K(x, t_i); Nyström interpolation back to y = x.
    let z = chol.solve(&rhs);
    let kxx = -f(2.0 * x) - (0..nodes).map(|i| sw[i] * z[i] * f(t[i] + x)).sum::<f64>();
    Ok((kxx, cond))
}

/// Potential from reflection data `R(k)` (ascending `k`, either `k ≥ 0` or
/// symmetric) and bound states.
pub fn marchenko_invert_1d(
    k: &[f64],
    r: &[Complex64],
    bound_states: &[BoundState],
    config: &MarchenkoConfig,
) -> Result<Potential1D, InverseError> {
    let extra = bound_states.iter().map(|b| 40.0 / b.kappa).fold(0.0, f64::max);
    let dx = (config.x_max - config.x_min) / (config.n_x - 1) as f64;
    let xs: Vec<f64> = (-2..config.n_x as isize + 2).map(|i| config.x_min + dx * i as f64).collect();
    let t_lo = 2.0 * xs[0] - 1.0;
    let t_hi = 2.0 * config.x_max.max(xs[xs.len() - 1]) + 2.0 * extra + 1.0;
    // Half-line data starting above k = 0 is closed with the real part of
    // its first sample; a missing low-k strip shifts F by a constant.
    let (k, r): (Vec<f64>, Vec<Complex64>) = match (k.first(), r.first()) {
        (Some(&k0), Some(&r0)) if k0 > 0.0 => {
            (std::iter::once(0.0).chain(k.iter().copied()).collect(), std::iter::once(Complex64::new(r0.re, 0.0)).chain(r.iter().copied()).collect())
        }
        _ => (k.to_vec(), r.to_vec()),
    };
    let table = if r.iter().any(|v| v.norm() > 0.0) { Some(KernelTable::new(&k, &r, t_lo, t_hi)) } else { None };
    let f = |t: f64| {
        let cont = table.as_ref().map(|tb| tb.eval(t)).unwrap_or(0.0);
        cont + bound_states.iter().map(|b| b.norming * (-b.kappa * t).exp()).sum::<f64>()
    };
    let diag: Vec<(f64, f64)> = xs
        .par_iter()
        .map(|&x| {
            let span = (2.0 * (config.x_max - x)).max(0.0) + extra;
            diagonal_kernel(x, span, config.nodes, &f)
        })
        .collect::<Result<_, _>>()?;
    let condition = diag.iter().map(|d| d.1).fold(0.0, f64::max);
    if condition > config.max_condition {
        return Err(InverseError::IllPosedKernel(condition));
    }
    let kd: Vec<f64> = diag.iter().map(|d| d.0).collect();
    let q = (2..kd.len() - 2)
        .map(|i| -2.0 * (kd[i - 2] - 8.0 * kd[i - 1] + 8.0 * kd[i + 1] - kd[i + 2]) / (12.0 * dx))
        .collect();
    Ok(Potential1D { x: xs[2..xs.len() - 2].to_vec(), q, condition })
}

/// `R(k)` for `-u'' + q u = k² u` with `q = λ²(1/c₊² - 1/c₀²)`, `c₊ = c₋`.
pub fn schrodinger_reflection(profile: &StratifiedProfile, lambda: f64, k: f64) -> Result<Complex64, InverseError> {
    if profile.c_plus() != profile.c_minus() {
        return Err(InverseError::SteplikeUnsupported);
    }
    let cp = profile.c_plus();
    let l2 = lambda * lambda;
    let coef = helmholtz_coefficient(profile, l2, l2 / (cp * cp) - k * k, false);
    let ym = profile.y_m();
    let i = Complex64::i();
    let e0 = (-i * k * ym).exp();
    let end = coef.transfer(-ym, ym).apply_c([e0, i * k * e0]);
    let ratio = end[1] / (i * k);
    let a = (end[0] + ratio) * (-i * k * ym).exp();
    let b = (end[0] - ratio) * (i * k * ym).exp();
    Ok(b / a)
}

/// `c₀` on the grid of the recovered potential from `R₊(λ, ω_n)` samples
/// (ascending `ω_n ∈ (0, 1]`), with `k = λ ω_n / c₊`.
pub fn recover_c0_from_coefficients(
    omega_n: &[f64],
    r_plus: &[Complex64],
    lambda: f64,
    c_plus: f64,
    c_minus: f64,
    config: &MarchenkoConfig,
) -> Result<(Vec<f64>, Vec<f64>), InverseError> {
    if c_plus != c_minus {
        return Err(InverseError::SteplikeUnsupported);
    }
    let k: Vec<f64> = omega_n.iter().map(|w| lambda * w / c_plus).collect();
    let pot = marchenko_invert_1d(&k, r_plus, &[], config)?;
    let l2 = lambda * lambda;
    let c0 = pot.q.iter().map(|q| (1.0 / (c_plus * c_plus) - q / l2).max(1e-300).powf(-0.5)).collect();
    Ok((pot.x, c0))
}
