//! Pointwise evaluation of an assembled ansatz, its residual and the
//! residual decay fit.

use super::assemble::{BranchRecord, BranchTag, PiecewiseParametrix};
use super::middle::{c1_correction, C1Correction};
use super::ParametrixError;
use crate::geometry::{dot, Vec3};
use num_complex::Complex64;
use serde::Serialize;

type ValueDy = (Complex64, Complex64);

fn norm(z: Vec3) -> f64 {
    dot(z, z).sqrt()
}

impl BranchRecord {
    /// `(u, ∂_y u)` of this branch's term at `z`, carrier included.
    pub fn eval_at(&self, z: Vec3) -> Option<ValueDy> {
        let r = norm(z);
        let theta = [z[0] / r, z[1] / r, z[2] / r];
        let (s, th, pts) = self.point_amplitudes(theta)?;
        let kappa = self.op.kappa();
        let w = self.op.source;
        let i = Complex64::i();
        let carrier = (i * kappa * dot(z, w)).exp();
        let frame = &self.grid.frame;
        let vel = frame.velocity(s, th);
        let perp = frame.tangent(th + std::f64::consts::FRAC_PI_2);
        let sn = s.sin();
        // Tangential part of e_n, divided by r.
        let en_t = [-theta[2] * theta[0], -theta[2] * theta[1], 1.0 - theta[2] * theta[2]];
        let (g_s, g_t) = (dot(en_t, vel), if sn > 1e-8 { dot(en_t, perp) / sn } else { 0.0 });
        let mut v = Complex64::default();
        let mut dy = Complex64::default();
        for a in &pts {
            let rm = r.powi(-(a.m as i32));
            v += a.b * rm;
            dy += a.b * (i * kappa * w[2] * rm) - a.b * (a.m as f64 * theta[2] * rm / r)
                + (a.ds * g_s + a.dtheta * g_t) * (rm / r);
        }
        Some((carrier * v, carrier * dy))
    }

    /// Carrier-included `(c²Δ - λ²)` of this branch's term at `z`.
    pub fn residual_at(&self, z: Vec3) -> Option<Complex64> {
        let r = norm(z);
        let theta = [z[0] / r, z[1] / r, z[2] / r];
        let (_, _, pts) = self.point_amplitudes(theta)?;
        let carrier = (Complex64::i() * self.op.kappa() * dot(z, self.op.source)).exp();
        Some(carrier * self.op.residual_at(z, &pts))
    }
}

impl PiecewiseParametrix {
    fn check_disks(&self, z: Vec3) -> Result<(), ParametrixError> {
        let r = norm(z);
        for c in &self.excluded {
            if (dot(z, *c) / r).clamp(-1.0, 1.0).acos() < self.config.delta_ant {
                return Err(ParametrixError::AntipodeProximity);
            }
        }
        Ok(())
    }

    fn tagged<'a>(&'a self, tags: &'a [BranchTag]) -> impl Iterator<Item = &'a BranchRecord> + 'a {
        self.branches.iter().filter(move |b| tags.contains(&b.tag))
    }

    fn has_t(&self) -> bool {
        self.branches.iter().any(|b| b.tag == BranchTag::T)
    }

    /// Far-field sum above (`upper`) or below the strip.
    pub fn eval_outer(&self, z: Vec3, upper: bool) -> Result<ValueDy, ParametrixError> {
        if !upper && !self.has_t() {
            return self.eval_strip_uncorrected(z);
        }
        let tags: &[BranchTag] = if upper { &[BranchTag::I, BranchTag::R] } else { &[BranchTag::T] };
        let mut acc = (Complex64::default(), Complex64::default());
        for b in self.tagged(tags) {
            let (v, d) = b.eval_at(z).ok_or(ParametrixError::AntipodeProximity)?;
            acc.0 += v;
            acc.1 += d;
        }
        Ok(acc)
    }

    /// Strip ansatz `e^{iλx̄·ω̄/c₊} Σ |x̄|^{-m} b_{I,m}(x̄/|x̄|) φ₊(y)`.
    pub fn eval_strip_uncorrected(&self, z: Vec3) -> Result<ValueDy, ParametrixError> {
        let rho = z[0].hypot(z[1]);
        if rho == 0.0 {
            return Err(ParametrixError::AntipodeProximity);
        }
        let p = [z[0] / rho, z[1] / rho, 0.0];
        let inc = &self.branches[0];
        let mut x = Complex64::default();
        for a in &inc.amplitudes {
            let b = inc.amplitude_at(a.m, p).ok_or(ParametrixError::AntipodeProximity)?;
            x += b * rho.powi(-(a.m as i32));
        }
        let w = self.omega.0;
        let carrier = (Complex64::i() * self.lambda * (z[0] * w[0] + z[1] * w[1]) / self.profile.c_plus()).exp();
        let (ph, dph) = self.phi.eval(z[2]);
        Ok((carrier * x * ph, carrier * x * dph))
    }

    /// Corrector data at the horizontal position of `z`.
    pub fn c1_at(&self, z: Vec3) -> Result<C1Correction, ParametrixError> {
        let ym = self.profile.y_m();
        let up = [z[0], z[1], ym];
        let lo = [z[0], z[1], -ym];
        Ok(c1_correction(
            ym,
            self.eval_outer(up, true)?,
            self.eval_strip_uncorrected(up)?,
            self.eval_outer(lo, false)?,
            self.eval_strip_uncorrected(lo)?,
        ))
    }

    /// Strip value including the C¹ corrector.
    pub fn eval_strip(&self, z: Vec3) -> Result<ValueDy, ParametrixError> {
        let (v, d) = self.eval_strip_uncorrected(z)?;
        let (cv, cd) = self.c1_at(z)?.eval(z[2]);
        Ok((v + cv, d + cd))
    }

    /// `(P̃, ∂_y P̃)` at `z`.
    pub fn eval(&self, z: Vec3) -> Result<ValueDy, ParametrixError> {
        self.check_disks(z)?;
        let ym = self.profile.y_m();
        if z[2] >= ym {
            self.eval_outer(z, true)
        } else if z[2] <= -ym {
            self.eval_outer(z, false)
        } else {
            self.eval_strip(z)
        }
    }

    /// Value and derivative jumps `[|Δu|, |Δ∂_y u|]` at `y = ±y_M` after correction.
    pub fn c1_jumps(&self, x: [f64; 2]) -> Result<[f64; 4], ParametrixError> {
        let ym = self.profile.y_m();
        let up = [x[0], x[1], ym];
        let lo = [x[0], x[1], -ym];
        let (ou, iu) = (self.eval_outer(up, true)?, self.eval_strip(up)?);
        let (ol, il) = (self.eval_outer(lo, false)?, self.eval_strip(lo)?);
        Ok([(ou.0 - iu.0).norm(), (ou.1 - iu.1).norm(), (ol.0 - il.0).norm(), (ol.1 - il.1).norm()])
    }

    /// `(c²Δ - λ²)P̃` at a point outside the strip.
    pub fn residual(&self, z: Vec3) -> Result<Complex64, ParametrixError> {
        self.check_disks(z)?;
        let ym = self.profile.y_m();
        let tags: &[BranchTag] = if z[2] >= ym {
            &[BranchTag::I, BranchTag::R]
        } else if z[2] <= -ym && self.has_t() {
            &[BranchTag::T]
        } else {
            return Err(ParametrixError::AntipodeProximity);
        };
        let mut acc = Complex64::default();
        for b in self.tagged(tags) {
            acc += b.residual_at(z).ok_or(ParametrixError::AntipodeProximity)?;
        }
        Ok(acc)
    }
}

/// Result of fitting `log|residual|` against `log r`.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct DecayFit {
    /// Least-squares slope per direction.
    pub slopes: Vec<f64>,
    /// Largest (least negative) slope.
    pub worst: f64,
    pub mean: f64,
    /// Spread of the per-direction slopes.
    pub band: f64,
    /// Every residual at roundoff level.
    pub floor: bool,
}

/// Fits the residual decay along each direction over the given radii.
pub fn residual_decay_check(par: &PiecewiseParametrix, radii: &[f64], directions: &[Vec3]) -> Result<DecayFit, ParametrixError> {
    let mut slopes = Vec::new();
    let mut floor = true;
    for d in directions {
        let mut pts = Vec::new();
        for &r in radii {
            let res = par.residual([d[0] * r, d[1] * r, d[2] * r])?.norm();
            if res > 1e-300 {
                pts.push((r.ln(), res.ln()));
            }
            // Roundoff of the cancelling terms, which are of size λ²r^{-J}.
            if res > 1e-13 * par.lambda * par.lambda * r.powi(-(par.leading_order as i32)) {
                floor = false;
            }
        }
        if pts.len() >= 2 {
            let n = pts.len() as f64;
            let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
            let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
            slopes.push(sxy / sxx);
        }
    }
    let worst = slopes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = if slopes.is_empty() { f64::NAN } else { slopes.iter().sum::<f64>() / slopes.len() as f64 };
    let band = slopes.iter().map(|s| (s - mean).abs()).fold(0.0, f64::max);
    Ok(DecayFit { slopes, worst, mean, band, floor })
}
