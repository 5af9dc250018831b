//! Leading singular coefficient of the reflected and transmitted branches
//! at their antipodal end.

use super::assemble::{BranchTag, PiecewiseParametrix};
use super::operator::PointAmplitude;
use super::ParametrixError;
use crate::quadrature::gauss_legendre_on;
use num_complex::Complex64;
use std::f64::consts::PI;

/// One column of the symbol: the incident geodesic `(ω, θ̃)` it continues
/// and the coefficient `lim_{s→π} sin^m(s) b_m(s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolSample {
    pub theta_tilde: f64,
    pub value: Complex64,
}

/// Symbol of the first transported order `m = J - 1` on branch `tag`,
/// completing the transport integral analytically beyond the grid.
pub fn antipodal_symbol(par: &PiecewiseParametrix, tag: BranchTag) -> Result<Vec<SymbolSample>, ParametrixError> {
    if tag == BranchTag::I || par.orders == 0 {
        return Err(ParametrixError::InvalidOrder(par.orders));
    }
    let br = par.branches.iter().find(|b| b.tag == tag).ok_or(ParametrixError::InvalidOrder(0))?;
    let inc = &par.branches[0];
    let amp = &br.amplitudes[1];
    let b0 = br.amplitudes[0].values[0];
    let m = amp.m;
    let k = m + 1;
    let (lambda, c) = (br.op.lambda, br.op.c_b);
    let i = Complex64::i();
    let grid = &br.grid;
    let const_amp = [PointAmplitude { m: 0, b: b0, ds: Complex64::default(), dtheta: Complex64::default(), lb: Complex64::default() }];
    let mut out = Vec::with_capacity(grid.n_theta());
    for j in 0..grid.n_theta() {
        let th = grid.theta[j];
        let s_end = grid.s_at(grid.n_s() - 1, j);
        let b_end = grid.column_eval(j, 1.0, &amp.values);
        let mut bracket = -2.0 * i * lambda * c * s_end.sin().powi(m as i32) * b_end;
        let (tail_nodes, tail_weights) = gauss_legendre_on(48, s_end, PI);
        for (s, w) in tail_nodes.iter().zip(&tail_weights) {
            let p = grid.frame.point(*s, th);
            let c2 = br.op.c2_coefficients(p);
            let d = br.op.error_coefficient_at(k, *s, &c2, &const_amp);
            bracket += d * (w * s.sin().powi(m as i32 - 1));
        }
        let p0 = grid.frame.point(grid.s_start(j), th);
        let (_, theta_i) = inc.grid.frame.coordinates([p0[0], p0[1], 0.0]);
        out.push(SymbolSample { theta_tilde: theta_i, value: bracket * i / (2.0 * lambda * c) });
    }
    Ok(out)
}
