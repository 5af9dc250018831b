//! Guided-mode channel: the part of a strip error that is resonant with a
//! guided mode `f_j` at `κ_j` and the solve in its orthogonal complement.

use super::middle::{BvpSolution, Composite};
use super::ParametrixError;
use crate::spectral1d::{helmholtz_coefficient, ModeSpectrum};
use num_complex::Complex64;

/// `d = d_perp + coeff·f_j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeDecomposition {
    pub j: usize,
    pub coeff: Complex64,
}

impl ModeDecomposition {
    pub fn perp(&self, spectrum: &ModeSpectrum, d: Complex64, y: f64) -> Complex64 {
        d - self.coeff * spectrum.eval(self.j, y)
    }
}

/// Splits each column `d(·, y)` along `f_j`; columns may extend past the
/// strip if they decay at least like `f_j`.
pub fn mode_channel_decompose(
    spectrum: &ModeSpectrum,
    j: usize,
    columns: &[&dyn Fn(f64) -> Complex64],
) -> Vec<ModeDecomposition> {
    let profile = spectrum.profile();
    let ym = profile.y_m();
    let (pm, pp) = spectrum.decay[j];
    let comp = Composite::new(profile, -ym - 20.0 / pm, ym + 20.0 / pp, 0.25);
    let weighted: Vec<f64> = comp
        .nodes
        .iter()
        .map(|&y| {
            let c = profile.eval_c0(y);
            spectrum.eval(j, y) / (c * c)
        })
        .collect();
    columns
        .iter()
        .map(|d| {
            let prod: Vec<Complex64> = comp.nodes.iter().zip(&weighted).map(|(&y, w)| d(y) * w).collect();
            ModeDecomposition { j, coeff: comp.cumulative(&prod).1 }
        })
        .collect()
}

/// Decaying solution of `c₀²(κ_j² + D_y²)g - λ_j²g = d_perp` orthogonal to
/// `f_j`; `d_perp` must be orthogonal to `f_j` and decay like it.
pub fn mode_channel_solve(
    spectrum: &ModeSpectrum,
    j: usize,
    d_perp: &dyn Fn(f64) -> Complex64,
) -> Result<BvpSolution, ParametrixError> {
    let profile = spectrum.profile();
    let ym = profile.y_m();
    let lambda_sq = spectrum.eigenvalues[j];
    let kappa = spectrum.kappa;
    let (pm, pp) = spectrum.decay[j];
    let (y_lo, y_hi) = (-ym - 15.0 / pm, ym + 15.0 / pp);
    let coef = helmholtz_coefficient(profile, lambda_sq, kappa * kappa, false);
    let (c_lo, _) = profile.speed_bounds();
    let kmax = (lambda_sq / (c_lo * c_lo) + kappa * kappa).sqrt().max(pm).max(pp);
    let comp = Composite::new(profile, y_lo, y_hi, 1.0 / (1.0 + kmax));
    let nodes = comp.nodes.clone();

    let one = Complex64::new(1.0, 0.0);
    let u = coef.sweep(y_lo, [one, one * pm], &nodes);
    // Solution growing at -∞; W(u, v) = -2p₋.
    let v = coef.sweep(y_lo, [one, -one * pm], &nodes);
    let w = -2.0 * pm;
    let g: Vec<Complex64> = nodes
        .iter()
        .map(|&y| {
            let c = profile.eval_c0(y);
            -d_perp(y) / (c * c)
        })
        .collect();
    let ug: Vec<Complex64> = g.iter().zip(&u).map(|(g, u)| g * u[0]).collect();
    let vg: Vec<Complex64> = g.iter().zip(&v).map(|(g, v)| g * v[0]).collect();
    let (cu, total) = comp.cumulative(&ug);
    let (cv, _) = comp.cumulative(&vg);
    let scale: f64 = comp.cumulative(&ug.iter().map(|z| Complex64::new(z.norm(), 0.0)).collect::<Vec<_>>()).1.re;
    if scale > 0.0 && total.norm() > 1e-8 * scale {
        return Err(ParametrixError::NonOrthogonalSource(total.norm() / scale));
    }
    let mut values = Vec::with_capacity(nodes.len());
    let mut derivatives = Vec::with_capacity(nodes.len());
    for k in 0..nodes.len() {
        let big_u = if nodes[k] < 0.0 { cu[k] } else { cu[k] - total };
        values.push((v[k][0] * big_u - u[k][0] * cv[k]) / w);
        derivatives.push((v[k][1] * big_u - u[k][1] * cv[k]) / w);
    }
    // Remove the f_j component: f_j = u / |u|.
    let w2: Vec<Complex64> = nodes
        .iter()
        .zip(&u)
        .map(|(&y, u)| {
            let c = profile.eval_c0(y);
            u[0] * u[0] / (c * c)
        })
        .collect();
    let norm2 = comp.cumulative(&w2).1;
    let wg: Vec<Complex64> = nodes
        .iter()
        .zip(u.iter().zip(&values))
        .map(|(&y, (u, g))| {
            let c = profile.eval_c0(y);
            u[0] * g / (c * c)
        })
        .collect();
    let beta = comp.cumulative(&wg).1 / norm2;
    for k in 0..nodes.len() {
        values[k] -= beta * u[k][0];
        derivatives[k] -= beta * u[k][1];
    }
    let n = nodes.len();
    Ok(BvpSolution {
        lower: (values[0], derivatives[0]),
        upper: (values[n - 1], derivatives[n - 1]),
        nodes,
        values,
        derivatives,
        composite: comp,
    })
}
