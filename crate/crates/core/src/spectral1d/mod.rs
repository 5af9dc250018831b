//! One-dimensional reduced problems for the background profile: generalized
//! plane waves with reflection/transmission coefficients, guided modes and
//! thresholds.
//!
//! Conventions: `D_y = -i d/dy`, time factor `e^{iλt}`; the plane-wave ODE is
//! `-φ'' = (λ²/c₀² - λ²(1-ω_n²)/c₊²) φ`.

mod modes;
pub mod ode;

pub use modes::{guided_modes, kappa_of_lambda, mode_count, thresholds, ModeSpectrum, Thresholds};

use crate::media::StratifiedProfile;
use num_complex::Complex64;
use ode::Coefficient;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("omega_n = {omega_n} lies within {delta} of the critical direction {critical}")]
    CriticalAngle { omega_n: f64, critical: f64, delta: f64 },
    #[error("lambda must be nonzero")]
    NonzeroLambdaRequired,
    #[error("omega_n = {0} outside (0, 1] or inside the grazing band")]
    InvalidDirection(f64),
    #[error("lambda^2 = {lambda_sq} is not above threshold t_{j} = {threshold}")]
    BelowThreshold { j: usize, lambda_sq: f64, threshold: f64 },
    #[error("kappa must be positive")]
    NonpositiveKappa,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Propagating,
    Evanescent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RTCoefficients {
    #[serde(rename = "R")]
    pub r: Complex64,
    #[serde(rename = "T")]
    pub t: Complex64,
    pub omega_n: f64,
    pub lambda: f64,
    pub regime: Regime,
}

/// Which side the plane wave comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// From `y = +∞` (`φ₊`).
    Upper,
    /// From `y = -∞` (`φ₋`).
    Lower,
}

/// `√(1 - c₊²/c₋²)`; zero when `c₊ = c₋`.
pub fn critical_direction(profile: &StratifiedProfile) -> f64 {
    let r = profile.c_plus() / profile.c_minus();
    (1.0 - r * r).max(0.0).sqrt()
}

/// Line coefficient `Q(y) = a / c₀(y)² - b`; `flip` reads the profile at `-y`.
pub fn helmholtz_coefficient(
    profile: &StratifiedProfile,
    a: f64,
    b: f64,
    flip: bool,
) -> Coefficient<'_> {
    let sign = if flip { -1.0 } else { 1.0 };
    let mut segments: Vec<(f64, f64, bool)> = profile
        .layers()
        .iter()
        .map(|l| {
            if flip {
                (-l.y_hi, -l.y_lo, l.is_constant())
            } else {
                (l.y_lo, l.y_hi, l.is_constant())
            }
        })
        .collect();
    segments.sort_by(|x, y| x.0.total_cmp(&y.0));
    Coefficient {
        q: Box::new(move |y: f64| {
            let c = profile.eval_c0(sign * y);
            a / (c * c) - b
        }),
        segments,
        max_step: 0.02,
    }
}

/// Generalized plane wave together with its gridded samples.
#[derive(Debug, Clone)]
pub struct PhiSolution {
    pub coefficients: RTCoefficients,
    pub side: Side,
    /// Vertical wavenumber on the incident side.
    pub k_in: f64,
    /// Vertical wavenumber on the far side; `-i p` with `p > 0` when evanescent.
    pub k_out: Complex64,
    pub y_m: f64,
    pub grid: Vec<f64>,
    pub values: Vec<Complex64>,
    pub derivatives: Vec<Complex64>,
    profile: StratifiedProfile,
}

impl PhiSolution {
    /// `(φ(y), φ'(y))`, closed form outside `[-y_M, y_M]`.
    pub fn eval(&self, y: f64) -> (Complex64, Complex64) {
        let i = Complex64::i();
        // Work in upward-incidence coordinates.
        let (u, s) = match self.side {
            Side::Upper => (y, 1.0),
            Side::Lower => (-y, -1.0),
        };
        let (r, t) = (self.coefficients.r, self.coefficients.t);
        let k = self.k_in;
        if u >= self.y_m {
            let a = (i * k * u).exp();
            let b = r * (-i * k * u).exp();
            return (a + b, s * (i * k * (a - b)));
        }
        if u <= -self.y_m {
            let e = t * (i * self.k_out * u).exp();
            return (e, s * i * self.k_out * e);
        }
        let idx = match self.grid.binary_search_by(|g| g.total_cmp(&y)) {
            Ok(j) => return (self.values[j], self.derivatives[j]),
            Err(j) => j.saturating_sub(1),
        };
        let side = self.side;
        let lam = self.coefficients.lambda;
        let wn = self.coefficients.omega_n;
        let (a, b) = plane_wave_ab(&self.profile, lam, wn, side);
        let coef = helmholtz_coefficient(&self.profile, a, b, false);
        let st = coef
            .transfer(self.grid[idx], y)
            .apply_c([self.values[idx], self.derivatives[idx]]);
        (st[0], st[1])
    }

    /// Wronskian `φ φ̄' - φ' φ̄` at every grid node.
    pub fn wronskian_conj(&self) -> Vec<Complex64> {
        self.values
            .iter()
            .zip(&self.derivatives)
            .map(|(f, d)| f * d.conj() - d * f.conj())
            .collect()
    }
}

fn plane_wave_ab(profile: &StratifiedProfile, lambda: f64, omega_n: f64, side: Side) -> (f64, f64) {
    let c_in = match side {
        Side::Upper => profile.c_plus(),
        Side::Lower => profile.c_minus(),
    };
    let l2 = lambda * lambda;
    (l2, l2 * (1.0 - omega_n * omega_n) / (c_in * c_in))
}

fn check_direction(profile: &StratifiedProfile, lambda: f64, omega_n: f64, delta: f64, side: Side) -> Result<(), SpectralError> {
    if lambda == 0.0 || !lambda.is_finite() {
        return Err(SpectralError::NonzeroLambdaRequired);
    }
    if !(omega_n > delta && omega_n <= 1.0) {
        return Err(SpectralError::InvalidDirection(omega_n));
    }
    if side == Side::Upper {
        let crit = critical_direction(profile);
        if crit > 0.0 && (omega_n - crit).abs() <= delta {
            return Err(SpectralError::CriticalAngle { omega_n, critical: crit, delta });
        }
    }
    Ok(())
}

/// Node count of the output grid on `[-2y_M, 2y_M]`.
pub const GRID_POINTS: usize = 401;

/// `φ₊` for incidence from above.
pub fn solve_phi_plus(
    profile: &StratifiedProfile,
    lambda: f64,
    omega_n: f64,
    delta_crit: f64,
) -> Result<PhiSolution, SpectralError> {
    check_direction(profile, lambda, omega_n, delta_crit, Side::Upper)?;
    Ok(solve_unchecked(profile, lambda, omega_n, Side::Upper))
}

/// `φ₋` for incidence from below.
pub fn solve_phi_minus(
    profile: &StratifiedProfile,
    lambda: f64,
    omega_n: f64,
    delta_crit: f64,
) -> Result<PhiSolution, SpectralError> {
    check_direction(profile, lambda, omega_n, delta_crit, Side::Lower)?;
    Ok(solve_unchecked(profile, lambda, omega_n, Side::Lower))
}

/// Reflection coefficient seen from above for vertical wavenumber `k > 0`
/// on the incident side, no band checks.
/// `(R₊, T₊)` for incidence from above without sampling `φ₊`.
pub fn rt_plus(profile: &StratifiedProfile, lambda: f64, omega_n: f64, delta_crit: f64) -> Result<(Complex64, Complex64), SpectralError> {
    check_direction(profile, lambda, omega_n, delta_crit, Side::Upper)?;
    Ok(rt_only(profile, lambda, omega_n, Side::Upper))
}

pub fn reflection_at_k(profile: &StratifiedProfile, k: f64) -> Complex64 {
    let cp = profile.c_plus();
    // Normal incidence with λ = c₊ k gives vertical wavenumber k.
    rt_only(profile, cp * k, 1.0, Side::Upper).0
}

fn far_wavenumber(profile: &StratifiedProfile, lambda: f64, omega_n: f64, side: Side) -> Complex64 {
    let (c_in, c_out) = match side {
        Side::Upper => (profile.c_plus(), profile.c_minus()),
        Side::Lower => (profile.c_minus(), profile.c_plus()),
    };
    let arg = 1.0 / (c_out * c_out) - (1.0 - omega_n * omega_n) / (c_in * c_in);
    if arg >= 0.0 {
        Complex64::new(lambda * arg.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, -lambda.abs() * (-arg).sqrt())
    }
}

/// Shoots from `-y_M` (in incidence coordinates) and returns `(R, T)` plus
/// the unnormalized start state.
fn rt_only(profile: &StratifiedProfile, lambda: f64, omega_n: f64, side: Side) -> (Complex64, Complex64) {
    let (a, b) = plane_wave_ab(profile, lambda, omega_n, side);
    let flip = side == Side::Lower;
    let coef = helmholtz_coefficient(profile, a, b, flip);
    let ym = profile.y_m();
    let (c_in, _) = match side {
        Side::Upper => (profile.c_plus(), ()),
        Side::Lower => (profile.c_minus(), ()),
    };
    let k_in = lambda * omega_n / c_in;
    let k_out = far_wavenumber(profile, lambda, omega_n, side);
    let i = Complex64::i();
    let e0 = (-i * k_out * ym).exp();
    let start = [e0, i * k_out * e0];
    let end = coef.transfer(-ym, ym).apply_c(start);
    let (amp_a, amp_b) = decompose(end, k_in, ym);
    (amp_b / amp_a, 1.0 / amp_a)
}

fn decompose(state: [Complex64; 2], k: f64, y: f64) -> (Complex64, Complex64) {
    let i = Complex64::i();
    let ratio = state[1] / (i * k);
    let a = (state[0] + ratio) * (-i * k * y).exp() * 0.5;
    let b = (state[0] - ratio) * (i * k * y).exp() * 0.5;
    (a, b)
}

fn solve_unchecked(profile: &StratifiedProfile, lambda: f64, omega_n: f64, side: Side) -> PhiSolution {
    let (a, b) = plane_wave_ab(profile, lambda, omega_n, side);
    let flip = side == Side::Lower;
    let coef = helmholtz_coefficient(profile, a, b, flip);
    let ym = profile.y_m();
    let c_in = match side {
        Side::Upper => profile.c_plus(),
        Side::Lower => profile.c_minus(),
    };
    let k_in = lambda * omega_n / c_in;
    let k_out = far_wavenumber(profile, lambda, omega_n, side);
    let i = Complex64::i();
    let ymax = 2.0 * ym;
    let n = GRID_POINTS;
    // Grid in incidence coordinates u, ascending.
    let us: Vec<f64> = (0..n).map(|j| -ymax + 2.0 * ymax * j as f64 / (n - 1) as f64).collect();
    let e0 = (-i * k_out * ym).exp();
    let start = [e0, i * k_out * e0];
    let inner: Vec<f64> = us.iter().copied().filter(|u| *u > -ym && *u < ym).chain([ym]).collect();
    let states = coef.sweep(-ym, start, &inner);
    let (amp_a, amp_b) = decompose(states[states.len() - 1], k_in, ym);
    let (r, t) = (amp_b / amp_a, 1.0 / amp_a);
    let mut vals_u = Vec::with_capacity(n);
    let mut ders_u = Vec::with_capacity(n);
    let mut it = states.iter();
    for &u in &us {
        let (f, d) = if u <= -ym {
            let e = t * (i * k_out * u).exp();
            (e, i * k_out * e)
        } else if u >= ym {
            let p = (i * k_in * u).exp();
            let q = r * (-i * k_in * u).exp();
            (p + q, i * k_in * (p - q))
        } else {
            let s = it.next().expect("state per interior node");
            (s[0] / amp_a, s[1] / amp_a)
        };
        vals_u.push(f);
        ders_u.push(d);
    }
    let regime = if k_out.im != 0.0 { Regime::Evanescent } else { Regime::Propagating };
    let (grid, values, derivatives) = match side {
        Side::Upper => (us, vals_u, ders_u),
        Side::Lower => (
            us.iter().rev().map(|u| -u).collect(),
            vals_u.into_iter().rev().collect(),
            ders_u.into_iter().rev().map(|d| -d).collect(),
        ),
    };
    PhiSolution {
        coefficients: RTCoefficients { r, t, omega_n, lambda, regime },
        side,
        k_in,
        k_out,
        y_m: ym,
        grid,
        values,
        derivatives,
        profile: profile.clone(),
    }
}
