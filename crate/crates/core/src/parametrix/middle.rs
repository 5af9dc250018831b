//! The strip `|y| < y_M`: Robin boundary value problems for
//! `c₀²(κ_x² + D_y²)b - λ²b = f`, matching of the far-field branches and
//! the cutoff-localized C¹ corrections.

use super::ParametrixError;
use crate::media::StratifiedProfile;
use crate::quadrature::{barycentric_row, barycentric_weights, gauss_legendre, gauss_legendre_on};
use crate::spectral1d::helmholtz_coefficient;
use num_complex::Complex64;

const PIECE_NODES: usize = 12;

/// Composite Gauss–Legendre discretization of `[y_lo, y_hi]` respecting
/// layer breakpoints, with per-piece indefinite-integration matrices.
#[derive(Debug, Clone)]
pub(crate) struct Composite {
    pub pieces: Vec<(f64, f64)>,
    pub nodes: Vec<f64>,
    ref_nodes: Vec<f64>,
    ref_weights: Vec<f64>,
    bary: Vec<f64>,
    /// `S[i][j] = ∫_{-1}^{x_i} ℓ_j`.
    smat: Vec<Vec<f64>>,
}

impl Composite {
    pub fn new(profile: &StratifiedProfile, y_lo: f64, y_hi: f64, max_len: f64) -> Self {
        let mut cuts = vec![y_lo, y_hi];
        for l in profile.layers() {
            for y in [l.y_lo, l.y_hi] {
                if y > y_lo && y < y_hi {
                    cuts.push(y);
                }
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        let mut pieces = Vec::new();
        for w in cuts.windows(2) {
            let k = ((w[1] - w[0]) / max_len).ceil().max(1.0) as usize;
            let h = (w[1] - w[0]) / k as f64;
            for i in 0..k {
                pieces.push((w[0] + h * i as f64, w[0] + h * (i + 1) as f64));
            }
        }
        let (x, w) = gauss_legendre(PIECE_NODES);
        let bary = barycentric_weights(&x);
        let smat = x
            .iter()
            .map(|&xi| {
                let (t, tw) = gauss_legendre_on(PIECE_NODES, -1.0, xi);
                let mut row = vec![0.0; PIECE_NODES];
                for (tq, wq) in t.iter().zip(&tw) {
                    for (r, l) in row.iter_mut().zip(barycentric_row(&x, &bary, *tq)) {
                        *r += wq * l;
                    }
                }
                row
            })
            .collect();
        let nodes = pieces
            .iter()
            .flat_map(|(a, b)| x.iter().map(move |xi| a + 0.5 * (xi + 1.0) * (b - a)))
            .collect();
        Self { pieces, nodes, ref_nodes: x, ref_weights: w, bary, smat }
    }

    /// Cumulative integral `∫_{y_lo}^{node} g` at every node.
    pub fn cumulative(&self, g: &[Complex64]) -> (Vec<Complex64>, Complex64) {
        let mut out = Vec::with_capacity(g.len());
        let mut base = Complex64::default();
        for (p, (a, b)) in self.pieces.iter().enumerate() {
            let half = 0.5 * (b - a);
            let gp = &g[p * PIECE_NODES..(p + 1) * PIECE_NODES];
            for row in &self.smat {
                out.push(base + row.iter().zip(gp).map(|(s, v)| v * s).sum::<Complex64>() * half);
            }
            base += self.ref_weights.iter().zip(gp).map(|(w, v)| v * w).sum::<Complex64>() * half;
        }
        (out, base)
    }

    /// Polynomial interpolation of node values inside the piece holding `y`.
    pub fn interpolate(&self, values: &[Complex64], y: f64) -> Complex64 {
        let p = self.pieces.iter().position(|(_, b)| y <= *b).unwrap_or(self.pieces.len() - 1);
        let (a, b) = self.pieces[p];
        let x = 2.0 * (y - a) / (b - a) - 1.0;
        let row = barycentric_row(&self.ref_nodes, &self.bary, x);
        row.iter().zip(&values[p * PIECE_NODES..(p + 1) * PIECE_NODES]).map(|(w, v)| v * w).sum()
    }
}

/// Solution of a Robin problem sampled on composite nodes.
#[derive(Debug, Clone)]
pub struct BvpSolution {
    pub nodes: Vec<f64>,
    pub values: Vec<Complex64>,
    pub derivatives: Vec<Complex64>,
    /// `(b, b')` at the two ends.
    pub lower: (Complex64, Complex64),
    pub upper: (Complex64, Complex64),
    pub(crate) composite: Composite,
}

impl BvpSolution {
    pub fn eval(&self, y: f64) -> (Complex64, Complex64) {
        (self.composite.interpolate(&self.values, y), self.composite.interpolate(&self.derivatives, y))
    }
}

/// `-ik_hi b(y_hi) - b'(y_hi) = α₁`, `ik_lo b(y_lo) - b'(y_lo) = α₂` for
/// `-b'' = (λ²/c₀² - κ_x²) b + f/c₀²`, by the Green's function built from
/// the solutions satisfying each homogeneous Robin condition.
#[allow(clippy::too_many_arguments)]
pub(crate) fn robin_bvp(
    profile: &StratifiedProfile,
    lambda: f64,
    kx: f64,
    y_lo: f64,
    y_hi: f64,
    k_lo: Complex64,
    k_hi: Complex64,
    f: &dyn Fn(f64) -> Complex64,
    alpha1: Complex64,
    alpha2: Complex64,
) -> Result<BvpSolution, ParametrixError> {
    let i = Complex64::i();
    let coef = helmholtz_coefficient(profile, lambda * lambda, kx * kx, false);
    let (c_lo, _) = profile.speed_bounds();
    let kmax = (lambda * lambda / (c_lo * c_lo) + kx * kx).sqrt();
    let comp = Composite::new(profile, y_lo, y_hi, 1.0 / (1.0 + kmax));
    let nodes = comp.nodes.clone();

    let lo_start = [Complex64::new(1.0, 0.0), i * k_lo];
    let mut pts = nodes.clone();
    pts.push(y_hi);
    let u_lo = coef.sweep(y_lo, lo_start, &pts);
    let u_lo_top = u_lo[u_lo.len() - 1];

    let mut u_hi = vec![[Complex64::default(); 2]; nodes.len()];
    let mut state = [Complex64::new(1.0, 0.0), -i * k_hi];
    let mut y = y_hi;
    for (k, &yn) in nodes.iter().enumerate().rev() {
        state = coef.transfer(yn, y).inverse().apply_c(state);
        y = yn;
        u_hi[k] = state;
    }
    let u_hi_bot = coef.transfer(y_lo, y).inverse().apply_c(state);

    let w = u_lo[0][0] * u_hi[0][1] - u_lo[0][1] * u_hi[0][0];
    let scale = (u_lo[0][0].norm() + u_lo[0][1].norm()) * (u_hi[0][0].norm() + u_hi[0][1].norm());
    if w.norm() < 1e-12 * scale {
        return Err(ParametrixError::SingularBoundarySystem(w.norm() / scale));
    }

    let g: Vec<Complex64> = nodes
        .iter()
        .map(|&y| {
            let c = profile.eval_c0(y);
            -f(y) / (c * c)
        })
        .collect();
    let glo: Vec<Complex64> = g.iter().zip(&u_lo).map(|(g, u)| g * u[0]).collect();
    let ghi: Vec<Complex64> = g.iter().zip(&u_hi).map(|(g, u)| g * u[0]).collect();
    let (i_lo, _) = comp.cumulative(&glo);
    let (c_hi, total_hi) = comp.cumulative(&ghi);

    // Homogeneous data: b_h = A u_lo + B u_hi.
    let beta_hi = -i * k_hi * u_lo_top[0] - u_lo_top[1];
    let beta_lo = i * k_lo * u_hi_bot[0] - u_hi_bot[1];
    let a = alpha1 / beta_hi;
    let b = alpha2 / beta_lo;

    let mut values = Vec::with_capacity(nodes.len());
    let mut derivatives = Vec::with_capacity(nodes.len());
    for k in 0..nodes.len() {
        let upper_int = total_hi - c_hi[k];
        values.push((u_hi[k][0] * i_lo[k] + u_lo[k][0] * upper_int) / w + u_lo[k][0] * a + u_hi[k][0] * b);
        derivatives.push((u_hi[k][1] * i_lo[k] + u_lo[k][1] * upper_int) / w + u_lo[k][1] * a + u_hi[k][1] * b);
    }
    let (_, total_lo) = comp.cumulative(&glo);
    let upper = (
        u_lo_top[0] * a + Complex64::new(1.0, 0.0) * b + total_lo / w,
        u_lo_top[1] * a - i * k_hi * b - i * k_hi * total_lo / w,
    );
    let lower = (
        u_hi_bot[0] * b + Complex64::new(1.0, 0.0) * a + total_hi / w,
        u_hi_bot[1] * b + i * k_lo * a + i * k_lo * total_hi / w,
    );
    Ok(BvpSolution { nodes, values, derivatives, lower, upper, composite: comp })
}

/// Vertical wavenumber below the strip for horizontal slowness `|ω̄|/c₊`;
/// `-i p` in the evanescent case.
pub fn lower_wavenumber(profile: &StratifiedProfile, lambda: f64, omega_bar: f64) -> Complex64 {
    let (cp, cm) = (profile.c_plus(), profile.c_minus());
    let arg = 1.0 / (cm * cm) - omega_bar * omega_bar / (cp * cp);
    if arg >= 0.0 {
        Complex64::new(lambda * arg.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, -lambda.abs() * (-arg).sqrt())
    }
}

/// Middle problem on `[-y_M, y_M]` with the Robin conditions of the strip.
pub fn middle_bvp_solve(
    profile: &StratifiedProfile,
    lambda: f64,
    omega_bar: f64,
    f: &dyn Fn(f64) -> Complex64,
    alpha1: Complex64,
    alpha2: Complex64,
) -> Result<BvpSolution, ParametrixError> {
    let ym = profile.y_m();
    let omega_n = (1.0 - omega_bar * omega_bar).max(0.0).sqrt();
    let kx = lambda * omega_bar / profile.c_plus();
    let k_hi = Complex64::new(lambda * omega_n / profile.c_plus(), 0.0);
    let k_lo = lower_wavenumber(profile, lambda, omega_bar);
    robin_bvp(profile, lambda, kx, -ym, ym, k_lo, k_hi, f, alpha1, alpha2)
}

/// Square-integrable solution on `(-∞, y_M]` when the lower side is
/// evanescent; the source may extend below `-y_M`.
pub fn evanescent_lower_solve(
    profile: &StratifiedProfile,
    lambda: f64,
    omega_bar: f64,
    f: &dyn Fn(f64) -> Complex64,
    alpha1: Complex64,
) -> Result<BvpSolution, ParametrixError> {
    let k_lo = lower_wavenumber(profile, lambda, omega_bar);
    if k_lo.im == 0.0 {
        return Err(ParametrixError::InvalidOrder(0));
    }
    let p = -k_lo.im;
    let ym = profile.y_m();
    let omega_n = (1.0 - omega_bar * omega_bar).max(0.0).sqrt();
    let kx = lambda * omega_bar / profile.c_plus();
    let k_hi = Complex64::new(lambda * omega_n / profile.c_plus(), 0.0);
    let y_lo = -ym - 40.0 / p;
    robin_bvp(profile, lambda, kx, y_lo, ym, k_lo, k_hi, f, alpha1, Complex64::default())
}

/// Offset constants of the reflected and transmitted branches for one
/// equatorial point and amplitude order `m ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchingConstants {
    pub c_r: Complex64,
    pub c_t: Option<Complex64>,
    /// Branch amplitudes at the equator, `b_R(s_R0)` and `b_T(s_T0)`.
    pub b_r: Complex64,
    pub b_t: Option<Complex64>,
}

/// Inputs of the four matching conditions at one equatorial point.
#[derive(Debug, Clone, Copy)]
pub struct MatchingInput {
    pub m: usize,
    pub lambda: f64,
    pub c_plus: f64,
    pub c_minus: f64,
    /// `λω_n/c₊`.
    pub k_up: f64,
    /// Lower vertical wavenumber (real when the T branch exists).
    pub k_down: Complex64,
    pub y_m: f64,
    /// `b_I` at the equatorial point.
    pub incident: Complex64,
    pub sin_s_r0: f64,
    pub sin_s_t0: f64,
}

/// Eliminates `C_R`, `C_T` from the value conditions at `±y_M`; the
/// derivative conditions hold through the Robin data of the middle problem.
pub fn match_layers(inp: &MatchingInput, middle: &BvpSolution) -> MatchingConstants {
    let i = Complex64::i();
    let e_up = (i * inp.k_up * inp.y_m).exp();
    let b_r = (middle.upper.0 - inp.incident * e_up) * e_up;
    let to_c = |b: Complex64, c: f64, sin0: f64| -2.0 * i * inp.lambda * c * sin0.powi(inp.m as i32) * b;
    let c_r = to_c(b_r, inp.c_plus, inp.sin_s_r0);
    let (b_t, c_t) = if inp.k_down.im == 0.0 {
        let b = middle.lower.0 * (i * inp.k_down * inp.y_m).exp();
        (Some(b), Some(to_c(b, inp.c_minus, inp.sin_s_t0)))
    } else {
        (None, None)
    };
    MatchingConstants { c_r, c_t, b_r, b_t }
}

/// Residuals of the four matching equations (value and derivative at `±y_M`).
pub fn matching_residuals(inp: &MatchingInput, middle: &BvpSolution, mc: &MatchingConstants) -> [f64; 4] {
    let i = Complex64::i();
    let amp = |c: Complex64, sp: f64, sin0: f64| i * c / (2.0 * inp.lambda * sp * sin0.powi(inp.m as i32));
    let br = amp(mc.c_r, inp.c_plus, inp.sin_s_r0);
    let (eu, ed) = ((i * inp.k_up * inp.y_m).exp(), (-i * inp.k_up * inp.y_m).exp());
    let v_up = inp.incident * eu + br * ed - middle.upper.0;
    let d_up = i * inp.k_up * (inp.incident * eu - br * ed) - middle.upper.1;
    let (v_lo, d_lo) = match mc.c_t {
        Some(ct) => {
            let bt = amp(ct, inp.c_minus, inp.sin_s_t0);
            let e = (-i * inp.k_down * inp.y_m).exp();
            (bt * e - middle.lower.0, i * inp.k_down * bt * e - middle.lower.1)
        }
        None => (Complex64::default(), Complex64::default()),
    };
    [v_up.norm(), d_up.norm(), v_lo.norm(), d_lo.norm()]
}

/// Smooth cutoff: `1` on `|t| ≤ 1/2`, `0` for `|t| ≥ 1`.
pub fn cutoff(t: f64) -> (f64, f64) {
    let psi = |u: f64| if u > 0.0 { (-1.0 / u).exp() } else { 0.0 };
    let dpsi = |u: f64| if u > 0.0 { (-1.0 / u).exp() / (u * u) } else { 0.0 };
    let a = t.abs();
    let (p, q) = (psi(1.0 - a), psi(a - 0.5));
    if p + q == 0.0 {
        return (0.0, 0.0);
    }
    let v = p / (p + q);
    let (dp, dq) = (-dpsi(1.0 - a), dpsi(a - 0.5));
    let dv = (dp * (p + q) - p * (dp + dq)) / ((p + q) * (p + q));
    (v, dv * t.signum())
}

/// Jumps across `y = ±y_M` and the corrector added on the strip side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct C1Correction {
    pub beta_u: Complex64,
    pub gamma_u: Complex64,
    pub beta_l: Complex64,
    pub gamma_l: Complex64,
    pub y_m: f64,
}

/// `outer_*`/`inner_*` are one-sided `(value, ∂_y)` limits from outside and
/// inside the strip.
pub fn c1_correction(
    y_m: f64,
    outer_up: (Complex64, Complex64),
    inner_up: (Complex64, Complex64),
    outer_lo: (Complex64, Complex64),
    inner_lo: (Complex64, Complex64),
) -> C1Correction {
    C1Correction {
        beta_u: outer_up.0 - inner_up.0,
        gamma_u: outer_up.1 - inner_up.1,
        beta_l: outer_lo.0 - inner_lo.0,
        gamma_l: outer_lo.1 - inner_lo.1,
        y_m,
    }
}

impl C1Correction {
    /// Corrector `(value, ∂_y)` at `y` inside the strip.
    pub fn eval(&self, y: f64) -> (Complex64, Complex64) {
        let ym = self.y_m;
        let (cu, dcu) = cutoff(3.0 * (y - ym) / ym);
        let (cl, dcl) = cutoff(3.0 * (y + ym) / ym);
        let up = self.beta_u + self.gamma_u * (y - ym);
        let lo = self.beta_l + self.gamma_l * (y + ym);
        let v = up * cu + lo * cl;
        let d = up * (dcu * 3.0 / ym) + self.gamma_u * cu + lo * (dcl * 3.0 / ym) + self.gamma_l * cl;
        (v, d)
    }
}

#[cfg(test)]
#[path = "middle_tests.rs"]
mod tests;
