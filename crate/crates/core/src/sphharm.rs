//! Real orthonormal spherical harmonics on S² and quadrature grids for
//! projecting band-limited functions onto them.
//!
//! Coordinates: the polar axis is the last Cartesian coordinate, so the
//! colatitude of `(x, y, z)` is `acos(z)` and the azimuth is `atan2(y, x)`.
//! Index convention: `(l, m)` with `-l ≤ m ≤ l` lives at `l*l + l + m`.

use crate::quadrature::gauss_legendre;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub fn index(l: usize, m: i64) -> usize {
    ((l * l + l) as i64 + m) as usize
}

/// Number of coefficients for band limit `l_max`.
pub fn coeff_count(l_max: usize) -> usize {
    (l_max + 1) * (l_max + 1)
}

/// Evaluates every real harmonic up to `l_max` at the unit vector `p`.
pub fn eval_all(l_max: usize, p: [f64; 3]) -> Vec<f64> {
    let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    let (x, y, z) = (p[0] / r, p[1] / r, p[2] / r);
    let ct = z.clamp(-1.0, 1.0);
    let st = (x * x + y * y).sqrt();
    let phi = y.atan2(x);
    let plm = normalized_legendre(l_max, ct, st);
    let mut out = vec![0.0; coeff_count(l_max)];
    for l in 0..=l_max {
        for m in 0..=l {
            let base = plm[l][m];
            if m == 0 {
                out[l * l + l] = base;
            } else {
                let s2 = std::f64::consts::SQRT_2;
                let mf = m as f64;
                out[l * l + l + m] = s2 * base * (mf * phi).cos();
                out[l * l + l - m] = s2 * base * (mf * phi).sin();
            }
        }
    }
    out
}

/// Fully normalized associated Legendre functions
/// `sqrt((2l+1)/(4π) (l-m)!/(l+m)!) P_l^m(cos θ)` without Condon–Shortley phase.
fn normalized_legendre(l_max: usize, ct: f64, st: f64) -> Vec<Vec<f64>> {
    let mut p = vec![vec![0.0; l_max + 1]; l_max + 1];
    p[0][0] = (1.0 / (4.0 * PI)).sqrt();
    for m in 1..=l_max {
        let mf = m as f64;
        p[m][m] = p[m - 1][m - 1] * ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * st;
    }
    for m in 0..l_max {
        let mf = m as f64;
        p[m + 1][m] = (2.0 * mf + 3.0).sqrt() * ct * p[m][m];
    }
    for m in 0..=l_max {
        let mf = m as f64;
        for l in (m + 2)..=l_max {
            let lf = l as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
            p[l][m] = a * (ct * p[l - 1][m] - b * p[l - 2][m]);
        }
    }
    p
}

/// Coefficient table of a band-limited real function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicTable {
    pub band_limit: usize,
    pub coeffs: Vec<f64>,
}

impl HarmonicTable {
    pub fn zeros(band_limit: usize) -> Self {
        Self {
            band_limit,
            coeffs: vec![0.0; coeff_count(band_limit)],
        }
    }

    pub fn from_coeffs(band_limit: usize, mut coeffs: Vec<f64>) -> Self {
        coeffs.resize(coeff_count(band_limit), 0.0);
        Self { band_limit, coeffs }
    }

    pub fn get(&self, l: usize, m: i64) -> f64 {
        self.coeffs[index(l, m)]
    }

    pub fn set(&mut self, l: usize, m: i64, v: f64) {
        self.coeffs[index(l, m)] = v;
    }

    pub fn eval(&self, p: [f64; 3]) -> f64 {
        let y = eval_all(self.band_limit, p);
        y.iter().zip(&self.coeffs).map(|(a, b)| a * b).sum()
    }

    /// Sum of absolute coefficients times the sup of each normalized
    /// harmonic; an upper bound for the sup norm.
    pub fn sup_bound(&self) -> f64 {
        let mut s = 0.0;
        for l in 0..=self.band_limit {
            let ymax = ((2 * l + 1) as f64 / (4.0 * PI)).sqrt() * std::f64::consts::SQRT_2;
            for m in -(l as i64)..=(l as i64) {
                s += self.get(l, m).abs() * ymax;
            }
        }
        s
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            band_limit: self.band_limit,
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Keeps only degrees of the given parity (`0` even, `1` odd).
    pub fn parity_part(&self, parity: usize) -> Self {
        let mut out = self.clone();
        for l in 0..=self.band_limit {
            if l % 2 != parity {
                for m in -(l as i64)..=(l as i64) {
                    out.set(l, m, 0.0);
                }
            }
        }
        out
    }
}

/// Product quadrature on S²: Gauss–Legendre in `cos θ`, uniform azimuth.
#[derive(Debug, Clone)]
pub struct SphereGrid {
    pub cos_theta: Vec<f64>,
    pub lat_weights: Vec<f64>,
    pub n_lon: usize,
}

impl SphereGrid {
    /// Grid exact for products of harmonics up to degree `2 * band_limit`.
    pub fn for_band_limit(band_limit: usize) -> Self {
        Self::new(band_limit + 1, 2 * band_limit + 2)
    }

    pub fn new(n_lat: usize, n_lon: usize) -> Self {
        let (x, w) = gauss_legendre(n_lat);
        Self {
            cos_theta: x,
            lat_weights: w,
            n_lon,
        }
    }

    pub fn len(&self) -> usize {
        self.cos_theta.len() * self.n_lon
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, i: usize) -> [f64; 3] {
        let (ilat, ilon) = (i / self.n_lon, i % self.n_lon);
        let ct = self.cos_theta[ilat];
        let st = (1.0 - ct * ct).sqrt();
        let phi = 2.0 * PI * ilon as f64 / self.n_lon as f64;
        [st * phi.cos(), st * phi.sin(), ct]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.lat_weights[i / self.n_lon] * 2.0 * PI / self.n_lon as f64
    }

    pub fn points(&self) -> Vec<[f64; 3]> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    /// Projects grid samples onto harmonics up to `band_limit`.
    pub fn project(&self, values: &[f64], band_limit: usize) -> HarmonicTable {
        let mut coeffs = vec![0.0; coeff_count(band_limit)];
        for (i, v) in values.iter().enumerate() {
            let y = eval_all(band_limit, self.point(i));
            let wv = self.weight(i) * v;
            for (c, yk) in coeffs.iter_mut().zip(&y) {
                *c += wv * yk;
            }
        }
        HarmonicTable { band_limit, coeffs }
    }
}
