//! Funk (great-circle) transform on S² and its inversion on even functions
//! by numerically computed harmonic multipliers.

use super::rays::{CircleFamilies, RayIntegralData};
use super::InverseError;
use crate::geometry::Vec3;
use crate::quadrature::{fourier_derivative, trig_interp_row};
use crate::sphharm::{coeff_count, eval_all, HarmonicTable, SphereGrid};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Circle families with the multipliers `μ_lm = ⟨F Y_lm, Y_lm⟩`.
#[derive(Debug, Clone)]
pub struct FunkOperator {
    pub families: CircleFamilies,
    pub multipliers: Vec<f64>,
}

impl FunkOperator {
    pub fn new(families: CircleFamilies) -> Self {
        let n = coeff_count(families.band_limit);
        let mut mult = vec![0.0; n];
        let h = 2.0 * PI / families.n_alpha as f64;
        for i in 0..families.len() {
            let mut f = vec![0.0; n];
            for l in 0..families.n_alpha {
                for (acc, y) in f.iter_mut().zip(eval_all(families.band_limit, families.point(i, families.alpha(l)))) {
                    *acc += h * y;
                }
            }
            let yn = eval_all(families.band_limit, families.normals[i]);
            for q in 0..n {
                mult[q] += families.normal_weights[i] * f[q] * yn[q];
            }
        }
        Self { families, multipliers: mult }
    }

    /// Multiplier of degree `l`, order `m`.
    pub fn multiplier(&self, l: usize, m: i64) -> f64 {
        self.multipliers[crate::sphharm::index(l, m)]
    }

    /// `∫_0^{2π} W(u_i(α)) dα` for every circle.
    pub fn transform(&self, w: &dyn Fn(Vec3) -> f64) -> Vec<f64> {
        let fam = &self.families;
        let h = 2.0 * PI / fam.n_alpha as f64;
        (0..fam.len()).map(|i| (0..fam.n_alpha).map(|l| h * w(fam.point(i, fam.alpha(l)))).sum()).collect()
    }

    /// Harmonic coefficients from values at every circle sample, using
    /// `∫_{S²} f = (1/2π) ∫_n ∫_α f(u_n(α))`. `parity` keeps degrees of
    /// that parity only.
    pub fn project_samples(&self, values: &[Vec<f64>], parity: Option<usize>) -> HarmonicTable {
        let fam = &self.families;
        let bl = fam.band_limit;
        let mut coeffs = vec![0.0; coeff_count(bl)];
        let h = 1.0 / fam.n_alpha as f64;
        for i in 0..fam.len() {
            for l in 0..fam.n_alpha {
                let wv = fam.normal_weights[i] * h * values[i][l];
                for (c, y) in coeffs.iter_mut().zip(eval_all(bl, fam.point(i, fam.alpha(l)))) {
                    *c += wv * y;
                }
            }
        }
        let t = HarmonicTable::from_coeffs(bl, coeffs);
        match parity {
            Some(p) => t.parity_part(p),
            None => t,
        }
    }
}

/// Even function whose great-circle integrals are `g` (one per circle).
pub fn funk_invert_even(g: &[f64], op: &FunkOperator) -> Result<HarmonicTable, InverseError> {
    let fam = &op.families;
    let grid = SphereGrid::for_band_limit(fam.band_limit);
    let proj = grid.project(g, fam.band_limit);
    let mut out = HarmonicTable::zeros(fam.band_limit);
    for l in (0..=fam.band_limit).step_by(2) {
        for m in -(l as i64)..=(l as i64) {
            let mu = op.multiplier(l, m);
            if mu.abs() < 1e-12 {
                return Err(InverseError::DegenerateMultiplier { l, value: mu });
            }
            out.set(l, m, proj.get(l, m) / mu);
        }
    }
    Ok(out)
}

fn sample_at(row: &[Complex64], alpha: f64) -> Complex64 {
    trig_interp_row(row.len(), alpha).iter().zip(row).map(|(w, v)| v * w).sum()
}

/// Odd part of `W` from complete sin-weighted half-circle data `G = I_3`:
/// the integrals from the two equatorial starting points of each circle
/// give `∫ z W`, which is inverted as an even function and divided by `z`
/// outside `|z| < δ_eq`. Returns degrees `< band_limit`.
pub fn recover_odd_part(data: &RayIntegralData, op: &FunkOperator, delta_eq: f64) -> Result<HarmonicTable, InverseError> {
    if data.order != 3 {
        return Err(InverseError::InvalidOrder(data.order));
    }
    let fam = &op.families;
    let g: Vec<f64> = (0..fam.len())
        .map(|i| {
            let a_z = fam.axes[i].0[2];
            let row = &data.values[i];
            a_z * (sample_at(row, 1.5 * PI) - sample_at(row, 0.5 * PI)).re
        })
        .collect();
    let zw = funk_invert_even(&g, op)?;
    divide_by_z(&zw, fam.band_limit - 1, delta_eq)
}

/// Least-squares odd-degree fit of `f/z` on grid points with `|z| > δ`.
pub(crate) fn divide_by_z(f: &HarmonicTable, band_limit: usize, delta_eq: f64) -> Result<HarmonicTable, InverseError> {
    let grid = SphereGrid::new(band_limit + 4, 2 * band_limit + 6);
    let pts: Vec<Vec3> = grid.points().into_iter().filter(|p| p[2].abs() > delta_eq.sin()).collect();
    let cols: Vec<usize> = (0..=band_limit)
        .filter(|l| l % 2 == 1)
        .flat_map(|l| (0..2 * l + 1).map(move |q| l * l + q))
        .collect();
    if pts.len() < cols.len() {
        return Err(InverseError::EquatorBand);
    }
    let mut a = DMatrix::zeros(pts.len(), cols.len());
    let mut rhs = DVector::zeros(pts.len());
    for (r, p) in pts.iter().enumerate() {
        let y = eval_all(band_limit, *p);
        for (c, &q) in cols.iter().enumerate() {
            a[(r, c)] = y[q];
        }
        rhs[r] = f.eval(*p) / p[2];
    }
    let x = a.svd(true, true).solve(&rhs, 1e-12).map_err(|_| InverseError::EquatorBand)?;
    let mut out = HarmonicTable::zeros(band_limit);
    for (c, &q) in cols.iter().enumerate() {
        out.coeffs[q] = x[c];
    }
    Ok(out)
}

/// Pointwise parts from complete reduced data:
/// even `k` (`H = I_2`): odd part `W_odd(u(α)) = -H'(α)/2`;
/// odd `k` (`G = I_3`): even part `W_even(u(α)) = (G'' + G)(α)/2`.
pub fn pointwise_part(data: &RayIntegralData) -> Result<Vec<Vec<f64>>, InverseError> {
    match data.order {
        2 => Ok(data.values.iter().map(|r| fourier_derivative(r, 1).iter().map(|d| -0.5 * d.re).collect()).collect()),
        3 => Ok(data
            .values
            .iter()
            .map(|r| fourier_derivative(r, 2).iter().zip(r).map(|(d, v)| 0.5 * (d + v).re).collect())
            .collect()),
        k => Err(InverseError::InvalidOrder(k)),
    }
}

/// Even part of `W` from complete half-circle data `H = I_2`.
pub fn even_part_from_half_circles(data: &RayIntegralData, op: &FunkOperator) -> Result<HarmonicTable, InverseError> {
    if data.order != 2 {
        return Err(InverseError::InvalidOrder(data.order));
    }
    let fam = &op.families;
    let g: Vec<f64> = data
        .values
        .iter()
        .map(|row| {
            let m = fam.n_alpha;
            (0..m).map(|l| (row[l] + sample_at(row, fam.alpha(l) + PI)).re).sum::<f64>() / m as f64
        })
        .collect();
    funk_invert_even(&g, op)
}
