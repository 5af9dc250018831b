//! Guided modes of `c₀²(κ² + D_y²)`: eigenvalues below `c₊²κ²`, normalized
//! mode functions and thresholds.

use super::{helmholtz_coefficient, SpectralError};
use crate::media::StratifiedProfile;
use crate::quadrature::gauss_legendre_on;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

const REL_TOL: f64 = 1e-12;
const UNIFORM_POINTS: usize = 801;

/// `F(μ) = θ(y_M) - θ_R`, with the Prüfer angle started on the decaying
/// solution below. Eigenvalue `j` (1-based) sits at `F = (j-1)π`.
fn phase_mismatch(profile: &StratifiedProfile, kappa: f64, mu: f64) -> f64 {
    let k2 = kappa * kappa;
    let (cp, cm) = (profile.c_plus(), profile.c_minus());
    let p_minus = (k2 - mu / (cm * cm)).max(0.0).sqrt();
    let p_plus = (k2 - mu / (cp * cp)).max(0.0).sqrt();
    let coef = helmholtz_coefficient(profile, mu, k2, false);
    let ym = profile.y_m();
    let theta = coef.prufer(-ym, 1f64.atan2(p_minus), ym);
    theta - 1f64.atan2(-p_plus)
}

/// Number of eigenvalues of `c₀²(κ² + D_y²)` strictly below `μ ≤ c₊²κ²`.
pub fn mode_count(profile: &StratifiedProfile, kappa: f64, mu: f64) -> usize {
    let f = phase_mismatch(profile, kappa, mu);
    if f <= 0.0 {
        0
    } else {
        (f / PI).ceil() as usize
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ModeSpectrum {
    pub kappa: f64,
    /// `λ_j²(κ)`, ascending.
    pub eigenvalues: Vec<f64>,
    /// Uniform grid on `[-y_max, y_max]`.
    pub grid: Vec<f64>,
    /// `f_j` sampled on `grid`.
    pub modes: Vec<Vec<f64>>,
    /// Tail decay rates `(p₋, p₊)` per mode.
    pub decay: Vec<(f64, f64)>,
    /// Quadrature nodes/weights on `[-y_M, y_M]` for `c₀^{-2} dy` products.
    #[serde(skip)]
    pub quad_nodes: Vec<f64>,
    #[serde(skip)]
    pub quad_weights: Vec<f64>,
    #[serde(skip)]
    pub quad_values: Vec<Vec<f64>>,
    /// `f_j(±y_M)`.
    #[serde(skip)]
    pub edge_values: Vec<(f64, f64)>,
    #[serde(skip)]
    y_m: f64,
    #[serde(skip)]
    c_pm: (f64, f64),
    #[serde(skip)]
    profile: StratifiedProfile,
}

impl ModeSpectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `∫ f_j g c₀^{-2} dy` for `g` supported in `[-y_M, y_M]`.
    pub fn project_interior(&self, j: usize, g: impl Fn(f64) -> f64) -> f64 {
        self.quad_nodes
            .iter()
            .zip(&self.quad_weights)
            .zip(&self.quad_values[j])
            .map(|((y, w), f)| w * f * g(*y))
            .sum()
    }

    /// Gram matrix in `L²(c₀^{-2} dy)` including the analytic tails.
    pub fn gram(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        let (cp, cm) = self.c_pm;
        let mut g = vec![vec![0.0; n]; n];
        for a in 0..n {
            for b in 0..n {
                let inner: f64 = self
                    .quad_weights
                    .iter()
                    .zip(self.quad_values[a].iter().zip(&self.quad_values[b]))
                    .map(|(w, (x, y))| w * x * y)
                    .sum();
                let (la, ua) = self.edge_values[a];
                let (lb, ub) = self.edge_values[b];
                let (pma, ppa) = self.decay[a];
                let (pmb, ppb) = self.decay[b];
                g[a][b] = inner + la * lb / ((pma + pmb) * cm * cm) + ua * ub / ((ppa + ppb) * cp * cp);
            }
        }
        g
    }

    /// `(f_j(y), f_j'(y))`, analytic tails outside `[-y_M, y_M]`,
    /// propagated from `-y_M` inside.
    pub fn eval_with_derivative(&self, j: usize, y: f64) -> (f64, f64) {
        let (lo, hi) = self.edge_values[j];
        let (pm, pp) = self.decay[j];
        if y <= -self.y_m {
            let v = lo * (pm * (y + self.y_m)).exp();
            return (v, pm * v);
        }
        if y >= self.y_m {
            let v = hi * (-pp * (y - self.y_m)).exp();
            return (v, -pp * v);
        }
        let coef = helmholtz_coefficient(&self.profile, self.eigenvalues[j], self.kappa * self.kappa, false);
        let st = coef.transfer(-self.y_m, y).apply([lo, lo * pm]);
        (st[0], st[1])
    }

    pub fn profile(&self) -> &StratifiedProfile {
        &self.profile
    }

    pub fn eval(&self, j: usize, y: f64) -> f64 {
        self.eval_with_derivative(j, y).0
    }

    /// `∫ f_j g c₀^{-2} dy` for complex `g` supported in `[-y_M, y_M]`.
    pub fn project_interior_c(&self, j: usize, g: impl Fn(f64) -> Complex64) -> Complex64 {
        self.quad_nodes
            .iter()
            .zip(&self.quad_weights)
            .zip(&self.quad_values[j])
            .map(|((y, w), f)| g(*y) * (w * f))
            .sum()
    }
}

fn bisect_eigenvalue(profile: &StratifiedProfile, kappa: f64, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    while hi - lo > REL_TOL * hi.abs().max(1e-300) {
        let mid = 0.5 * (lo + hi);
        if phase_mismatch(profile, kappa, mid) > target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Interior quadrature: each layer split into pieces short against the
/// local wavelength, 12 Gauss points per piece.
fn interior_quadrature(profile: &StratifiedProfile, kappa: f64, mu_max: f64) -> (Vec<f64>, Vec<f64>) {
    let (c_lo, _) = profile.speed_bounds();
    let k = (mu_max / (c_lo * c_lo) + kappa * kappa).sqrt();
    let max_len = 1.0 / (1.0 + k);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for l in profile.layers() {
        let pieces = ((l.y_hi - l.y_lo) / max_len).ceil().max(1.0) as usize;
        let h = (l.y_hi - l.y_lo) / pieces as f64;
        for p in 0..pieces {
            let a = l.y_lo + h * p as f64;
            let (x, w) = gauss_legendre_on(12, a, a + h);
            for (xi, wi) in x.into_iter().zip(w) {
                let c = l.speed(xi);
                nodes.push(xi);
                weights.push(wi / (c * c));
            }
        }
    }
    (nodes, weights)
}

/// All guided modes at horizontal wavenumber `κ > 0`.
pub fn guided_modes(profile: &StratifiedProfile, kappa: f64) -> Result<ModeSpectrum, SpectralError> {
    if !(kappa > 0.0) {
        return Err(SpectralError::NonpositiveKappa);
    }
    let (cp, cm) = (profile.c_plus(), profile.c_minus());
    let (c_lo, _) = profile.speed_bounds();
    let mu_top = cp * cp * kappa * kappa;
    let mu_bot = c_lo * c_lo * kappa * kappa;
    let count = mode_count(profile, kappa, mu_top);
    let eigenvalues: Vec<f64> = (0..count)
        .map(|j| bisect_eigenvalue(profile, kappa, j as f64 * PI, mu_bot, mu_top))
        .collect();
    let ym = profile.y_m();
    let decay: Vec<(f64, f64)> = eigenvalues
        .iter()
        .map(|mu| {
            let k2 = kappa * kappa;
            ((k2 - mu / (cm * cm)).max(0.0).sqrt(), (k2 - mu / (cp * cp)).max(0.0).sqrt())
        })
        .collect();
    let p_min = decay
        .iter()
        .flat_map(|(a, b)| [*a, *b])
        .fold(f64::INFINITY, f64::min)
        .max(1e-3);
    let y_max = ym + 15.0 / p_min;
    let grid: Vec<f64> = (0..UNIFORM_POINTS)
        .map(|i| -y_max + 2.0 * y_max * i as f64 / (UNIFORM_POINTS - 1) as f64)
        .collect();
    let (quad_nodes, quad_weights) = interior_quadrature(profile, kappa, mu_top);

    let mut modes = Vec::new();
    let mut quad_values = Vec::new();
    let mut edge_values = Vec::new();
    for (mu, &(pm, pp)) in eigenvalues.iter().zip(&decay) {
        let coef = helmholtz_coefficient(profile, *mu, kappa * kappa, false);
        let start = [Complex64::new(1.0, 0.0), Complex64::new(pm, 0.0)];
        let q: Vec<f64> = coef.sweep(-ym, start, &quad_nodes).iter().map(|s| s[0].re).collect();
        let inner_grid: Vec<f64> = grid.iter().copied().filter(|y| *y > -ym && *y < ym).collect();
        let mut pts = inner_grid.clone();
        pts.push(ym);
        let on_grid = coef.sweep(-ym, start, &pts);
        let top = on_grid[on_grid.len() - 1][0].re;
        let norm2: f64 = quad_weights.iter().zip(&q).map(|(w, f)| w * f * f).sum::<f64>()
            + 1.0 / (2.0 * pm * cm * cm)
            + top * top / (2.0 * pp * cp * cp);
        let scale = 1.0 / norm2.sqrt();
        let mut it = on_grid.iter();
        let vals: Vec<f64> = grid
            .iter()
            .map(|&y| {
                if y <= -ym {
                    scale * (pm * (y + ym)).exp()
                } else if y >= ym {
                    scale * top * (-pp * (y - ym)).exp()
                } else {
                    scale * it.next().unwrap()[0].re
                }
            })
            .collect();
        modes.push(vals);
        quad_values.push(q.iter().map(|f| f * scale).collect());
        edge_values.push((scale, scale * top));
    }
    Ok(ModeSpectrum {
        kappa,
        eigenvalues,
        grid,
        modes,
        decay,
        quad_nodes,
        quad_weights,
        quad_values,
        edge_values,
        y_m: ym,
        c_pm: (cp, cm),
        profile: profile.clone(),
    })
}

/// Counting function and thresholds at frequency `λ`.
#[derive(Debug, Clone, Serialize)]
pub struct Thresholds {
    /// `T(λ) = #{j : t_j < λ²}`.
    pub count: usize,
    /// `t_j` for `j ≤ T(λ)`.
    pub values: Vec<f64>,
    /// `κ_j⁰`.
    pub cutoffs: Vec<f64>,
}

pub fn thresholds(profile: &StratifiedProfile, lambda: f64) -> Result<Thresholds, SpectralError> {
    if lambda == 0.0 || !lambda.is_finite() {
        return Err(SpectralError::NonzeroLambdaRequired);
    }
    let cp = profile.c_plus();
    let k_star = lambda.abs() / cp;
    let count_at = |k: f64| {
        if k <= 0.0 {
            0
        } else {
            mode_count(profile, k, cp * cp * k * k)
        }
    };
    let count = count_at(k_star);
    let mut cutoffs = Vec::with_capacity(count);
    for j in 1..=count {
        let (mut lo, mut hi) = (0.0, k_star);
        while hi - lo > REL_TOL * k_star {
            let mid = 0.5 * (lo + hi);
            if count_at(mid) >= j {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        cutoffs.push(0.5 * (lo + hi));
    }
    let values = cutoffs.iter().map(|k| cp * cp * k * k).collect();
    Ok(Thresholds { count, values, cutoffs })
}

/// `κ_j(λ)`, the inverse of `κ ↦ λ_j(κ)` (`j` is 1-based).
pub fn kappa_of_lambda(profile: &StratifiedProfile, lambda: f64, j: usize) -> Result<f64, SpectralError> {
    let th = thresholds(profile, lambda)?;
    let l2 = lambda * lambda;
    if j == 0 || j > th.count {
        let threshold = if j >= 1 && j <= th.values.len() { th.values[j - 1] } else { f64::INFINITY };
        return Err(SpectralError::BelowThreshold { j, lambda_sq: l2, threshold });
    }
    let (c_lo, _) = profile.speed_bounds();
    let mut lo = lambda.abs() / profile.c_plus();
    let mut hi = lambda.abs() / c_lo;
    // μ_j(κ) < λ² iff at least j eigenvalues lie below λ².
    while hi - lo > REL_TOL * hi {
        let mid = 0.5 * (lo + hi);
        if mode_count(profile, mid, l2) >= j {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
