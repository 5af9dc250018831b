//! Weighted integrals along half great circles and their organization in
//! one-parameter families of starting points.

use super::InverseError;
use crate::geometry::{cross, normalize, Direction, TangentFrame, Vec3};
use crate::quadrature::{fourier_derivative, gauss_legendre_on, trig_fit_fill};
use crate::sphharm::SphereGrid;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const RAY_NODES: usize = 64;

/// `∫_0^π W(γ(s)) sin^{k-2}(s) ds` along the geodesic leaving `ω` in
/// direction `θ̃`.
pub fn weighted_ray_integral(w: &dyn Fn(Vec3) -> f64, omega: Direction, theta_tilde: f64, k: usize) -> Result<f64, InverseError> {
    if k < 2 {
        return Err(InverseError::InvalidOrder(k));
    }
    let frame = TangentFrame::new(omega);
    let (s, ws) = gauss_legendre_on(RAY_NODES, 0.0, PI);
    Ok(s.iter().zip(&ws).map(|(s, q)| q * w(frame.point(*s, theta_tilde)) * s.sin().powi(k as i32 - 2)).sum())
}

/// Great circles with normals on a Gauss–Legendre × uniform grid; circle
/// `i` is `u_i(α) = cos α a_i + sin α b_i` with `a_i` its highest point, and
/// the geodesic of sample `(i, α)` starts at `u_i(α)` heading along `u_i'(α)`.
#[derive(Debug, Clone)]
pub struct CircleFamilies {
    pub band_limit: usize,
    pub n_alpha: usize,
    pub normals: Vec<Vec3>,
    pub normal_weights: Vec<f64>,
    pub axes: Vec<(Vec3, Vec3)>,
}

impl CircleFamilies {
    /// Families resolving functions of degree `≤ band_limit`.
    pub fn new(band_limit: usize, n_alpha: usize) -> Self {
        let grid = SphereGrid::for_band_limit(band_limit);
        let normals = grid.points();
        let normal_weights = (0..grid.len()).map(|i| grid.weight(i)).collect();
        let axes = normals
            .iter()
            .map(|n| {
                let mut a = [-n[2] * n[0], -n[2] * n[1], 1.0 - n[2] * n[2]];
                if a[2] < 1e-20 {
                    a = [1.0 - n[0] * n[0], -n[0] * n[1], -n[0] * n[2]];
                }
                let a = normalize(a);
                (a, cross(*n, a))
            })
            .collect();
        Self { band_limit, n_alpha, normals, normal_weights, axes }
    }

    pub fn len(&self) -> usize {
        self.normals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.normals.is_empty()
    }

    pub fn alpha(&self, l: usize) -> f64 {
        2.0 * PI * l as f64 / self.n_alpha as f64
    }

    pub fn point(&self, i: usize, alpha: f64) -> Vec3 {
        let (a, b) = self.axes[i];
        let (s, c) = alpha.sin_cos();
        std::array::from_fn(|q| c * a[q] + s * b[q])
    }

    /// `∫_0^π W(u_i(α + s)) sin^{k-2}(s) ds` at every sample.
    pub fn integrals(&self, w: &(dyn Fn(Vec3) -> f64 + Sync), k: usize) -> Vec<Vec<f64>> {
        use rayon::prelude::*;
        let (s, ws) = gauss_legendre_on(RAY_NODES, 0.0, PI);
        let weights: Vec<f64> = s.iter().zip(&ws).map(|(s, q)| q * s.sin().powi(k as i32 - 2)).collect();
        (0..self.len())
            .into_par_iter()
            .map(|i| {
                (0..self.n_alpha)
                    .map(|l| {
                        let a = self.alpha(l);
                        s.iter().zip(&weights).map(|(s, q)| q * w(self.point(i, a + s))).sum()
                    })
                    .collect()
            })
            .collect()
    }

    /// Minimum samples per circle for degree `band_limit` data.
    pub fn required_alpha(&self) -> usize {
        2 * self.band_limit + 2
    }
}

/// Ray data `I_k` on circle families, with the availability mask.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RayIntegralData {
    pub order: usize,
    /// `values[i][l]` for circle `i`, starting angle `α_l`.
    pub values: Vec<Vec<Complex64>>,
    /// `true` where the sample is available.
    pub mask: Vec<Vec<bool>>,
}

impl RayIntegralData {
    pub fn from_real(order: usize, values: Vec<Vec<f64>>) -> Self {
        let mask = values.iter().map(|r| vec![true; r.len()]).collect();
        let values = values.into_iter().map(|r| r.into_iter().map(|v| Complex64::new(v, 0.0)).collect()).collect();
        Self { order, values, mask }
    }

    /// Replaces masked samples by the degree-`degree` trigonometric fit of
    /// each circle's available samples.
    pub fn filled(&self, degree: usize) -> Result<Self, InverseError> {
        let mut values = Vec::with_capacity(self.values.len());
        for (i, (row, mask)) in self.values.iter().zip(&self.mask).enumerate() {
            if mask.iter().all(|m| *m) {
                values.push(row.clone());
                continue;
            }
            let fit = trig_fit_fill(row, mask, degree).ok_or(InverseError::VanishingCoefficient { circle: i })?;
            values.push(row.iter().zip(&fit).zip(mask).map(|((v, f), m)| if *m { *v } else { *f }).collect());
        }
        let mask = self.mask.iter().map(|r| vec![true; r.len()]).collect();
        Ok(Self { order: self.order, values, mask })
    }
}

/// `I_{k-2} = (∂_α² I_k + (k-2)² I_k) / ((k-2)(k-3))` on complete families.
pub fn reduce_order(data: &RayIntegralData, families: &CircleFamilies) -> Result<RayIntegralData, InverseError> {
    let k = data.order;
    if k < 4 {
        return Err(InverseError::InvalidOrder(k));
    }
    if families.n_alpha < families.required_alpha() {
        return Err(InverseError::InsufficientFamilyResolution { samples: families.n_alpha, needed: families.required_alpha() });
    }
    let p = (k - 2) as f64;
    let values = data
        .values
        .iter()
        .map(|row| {
            let d2 = fourier_derivative(row, 2);
            row.iter().zip(&d2).map(|(v, d)| (d + v * (p * p)) / (p * (p - 1.0))).collect()
        })
        .collect();
    Ok(RayIntegralData { order: k - 2, values, mask: data.mask.clone() })
}
