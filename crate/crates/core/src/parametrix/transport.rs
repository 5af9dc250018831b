//! Transport along geodesics from the branch source:
//! `b_m(s) = i / (2λc sin^m s) [∫_{s0}^s sin^{m-1}(s') d(s') ds' + C]`,
//! which cancels the order-`(m+1)` error of the ansatz.

use super::grid::{GridKind, PolarGrid};
use super::ParametrixError;
use crate::quadrature::gauss_legendre_on;
use num_complex::Complex64;

/// `i/(2λc) · (s - s0) ∫_0^1 (sin(s0 + t(s - s0)) / sin s)^{m-1} d(…) dt / sin s`
/// for one column, with `d` evaluated by `d_at(s')`.
fn column_integral(
    m: usize,
    s0: f64,
    s: f64,
    t_nodes: &[f64],
    t_weights: &[f64],
    d_at: &dyn Fn(f64) -> Complex64,
) -> Complex64 {
    let span = s - s0;
    if span == 0.0 {
        return Complex64::default();
    }
    let sin_s = s.sin();
    let mut acc = Complex64::default();
    for (t, w) in t_nodes.iter().zip(t_weights) {
        let sp = s0 + t * span;
        let ratio = if m > 1 { (sp.sin() / sin_s).powi(m as i32 - 1) } else { 1.0 };
        acc += d_at(sp) * (w * ratio);
    }
    acc * (span / sin_s)
}

/// Solves the transport equation for amplitude order `m ≥ 1` on every node
/// of `grid`, given the order-`(m+1)` error `d` on the same grid. On an
/// annulus grid `constants[j]` is `C` for column `j`.
pub fn transport_on_grid(
    grid: &PolarGrid,
    d: &[Complex64],
    m: usize,
    lambda: f64,
    c: f64,
    constants: Option<&[Complex64]>,
) -> Result<Vec<Complex64>, ParametrixError> {
    if m == 0 || (matches!(grid.kind, GridKind::Diameter) && constants.is_some()) {
        return Err(ParametrixError::InvalidOrder(m));
    }
    let n = grid.n_s();
    let (tn, tw) = gauss_legendre_on(n.max(16), 0.0, 1.0);
    let pref = Complex64::new(0.0, 1.0 / (2.0 * lambda * c));
    let mut out = vec![Complex64::default(); grid.len()];
    for j in 0..grid.n_theta() {
        let s0 = grid.s_start(j);
        let d_at = |sp: f64| grid.column_eval(j, grid.x_of(j, sp), d);
        let cj = constants.map(|c| c[j]).unwrap_or_default();
        for i in 0..n {
            let s = grid.s_at(i, j);
            let mut v = column_integral(m, s0, s, &tn, &tw, &d_at);
            if cj != Complex64::default() {
                v += cj / s.sin().powi(m as i32);
            }
            out[grid.idx(i, j)] = pref * v;
        }
    }
    Ok(out)
}

/// Transport for a single geodesic with `d` given as a function of `s`:
/// returns `b_m(s)`. `s = s0` on a source (`s0 = 0`) is handled by the limit.
pub fn transport_along(
    d_at: &dyn Fn(f64) -> Complex64,
    m: usize,
    lambda: f64,
    c: f64,
    s0: f64,
    s: f64,
    constant: Complex64,
) -> Complex64 {
    let pref = Complex64::new(0.0, 1.0 / (2.0 * lambda * c));
    if s0 == 0.0 && s.abs() < 1e-300 {
        return pref * d_at(0.0) / m as f64;
    }
    let (tn, tw) = gauss_legendre_on(64, 0.0, 1.0);
    let mut v = column_integral(m, s0, s, &tn, &tw, d_at);
    if constant != Complex64::default() {
        v += constant / s.sin().powi(m as i32);
    }
    pref * v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Direction;

    #[test]
    fn constant_error_closed_form() {
        let (lam, c, d) = (3.0, 1.2, Complex64::new(0.7, -0.2));
        let i = Complex64::i();
        for s in [0.3, 1.0, 2.0] {
            let b = transport_along(&|_| d, 1, lam, c, 0.0, s, Complex64::default());
            let exact = i * d * s / (2.0 * lam * c * s.sin());
            assert!((b - exact).norm() < 1e-13);
        }
        let b0 = transport_along(&|_| d, 1, lam, c, 0.0, 0.0, Complex64::default());
        assert!((b0 - i * d / (2.0 * lam * c)).norm() < 1e-15);
        let b_small = transport_along(&|_| d, 1, lam, c, 0.0, 1e-6, Complex64::default());
        assert!((b_small - b0).norm() < 1e-11);
    }

    #[test]
    fn offset_constant_only() {
        let (lam, c) = (2.0, 1.0);
        let cst = Complex64::new(0.4, 0.9);
        let i = Complex64::i();
        for m in 1..4 {
            for s in [0.8, 1.7, 2.5] {
                let b = transport_along(&|_| Complex64::default(), m, lam, c, 0.8, s, cst);
                let exact = i * cst / (2.0 * lam * c * s.sin().powi(m as i32));
                assert!((b - exact).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn grid_transport_matches_single_geodesic() {
        let src = Direction::from_angles(0.5, 0.2);
        let grid = PolarGrid::new(src, GridKind::Diameter, 32, 16);
        let f = |s: f64| Complex64::new(s.cos() * 0.3 + 1.0, 0.1 * s);
        // d depends only on the signed arc length (not smooth in θ̃, but the
        // column integral is per column).
        let d: Vec<Complex64> = (0..grid.n_theta())
            .flat_map(|j| (0..grid.n_s()).map(move |i| (i, j)))
            .map(|(i, j)| f(grid.s_at(i, j)))
            .collect();
        let b = transport_on_grid(&grid, &d, 3, 2.0, 1.5, None).unwrap();
        for j in [0, 5] {
            for i in [0, 10, 31] {
                let s = grid.s_at(i, j);
                let direct = transport_along(&f, 3, 2.0, 1.5, 0.0, s, Complex64::default());
                assert!((b[grid.idx(i, j)] - direct).norm() < 1e-10);
            }
        }
    }
}
