//! Geodesic coordinates on S² about a source direction, the singularity maps
//! of the scattering matrix and the even folding across the equator.
//!
//! Directions are `[ω̄₁, ω̄₂, ω_n]` with the stratification axis last.

use crate::media::StratifiedProfile;
use serde::{Deserialize, Serialize};

pub type Vec3 = [f64; 3];

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("direction is not of unit length (|ω| = {0})")]
    NotUnit(f64),
    #[error("geodesic does not cross the equator")]
    NoCrossing,
    #[error("direction with omega_n = {0} lies in an excluded band")]
    EquatorialInput(f64),
    #[error("omega_n = {omega_n} is below the critical value {critical}: no transmitted branch")]
    TotalInternalReflection { omega_n: f64, critical: f64 },
}

pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub fn normalize(a: Vec3) -> Vec3 {
    let n = dot(a, a).sqrt();
    [a[0] / n, a[1] / n, a[2] / n]
}

/// Unit direction `(ω̄, ω_n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Direction(pub Vec3);

impl Direction {
    pub fn new(v: Vec3) -> Result<Self, GeometryError> {
        let n = dot(v, v).sqrt();
        if (n - 1.0).abs() > 1e-12 {
            return Err(GeometryError::NotUnit(n));
        }
        Ok(Self(v))
    }

    /// `(sin α cos φ, sin α sin φ, cos α)`.
    pub fn from_angles(polar: f64, azimuth: f64) -> Self {
        let (s, c) = polar.sin_cos();
        Self([s * azimuth.cos(), s * azimuth.sin(), c])
    }

    /// Direction with given `ω_n` and `ω̄` along the first axis.
    pub fn from_omega_n(omega_n: f64) -> Self {
        Self([(1.0 - omega_n * omega_n).max(0.0).sqrt(), 0.0, omega_n])
    }

    pub fn omega_n(&self) -> f64 {
        self.0[2]
    }

    pub fn omega_bar(&self) -> [f64; 2] {
        [self.0[0], self.0[1]]
    }

    pub fn neg(&self) -> Self {
        Self([-self.0[0], -self.0[1], -self.0[2]])
    }
}

/// Orthonormal tangent frame at a source: `e₁` from Gram–Schmidt of the
/// last axis against the source (first axis at the poles), `e₂ = ω × e₁`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentFrame {
    pub source: Vec3,
    pub e1: Vec3,
    pub e2: Vec3,
}

impl TangentFrame {
    pub fn new(source: Direction) -> Self {
        let w = source.0;
        let mut e = [-w[2] * w[0], -w[2] * w[1], 1.0 - w[2] * w[2]];
        if dot(e, e) < 1e-20 {
            e = [1.0 - w[0] * w[0], -w[0] * w[1], -w[0] * w[2]];
        }
        let e1 = normalize(e);
        Self { source: w, e1, e2: cross(w, e1) }
    }

    /// Unit tangent at the source pointing along `θ̃`.
    pub fn tangent(&self, theta: f64) -> Vec3 {
        let (s, c) = theta.sin_cos();
        std::array::from_fn(|i| c * self.e1[i] + s * self.e2[i])
    }

    /// Point at arc length `s` along the geodesic with initial tangent `θ̃`.
    pub fn point(&self, s: f64, theta: f64) -> Vec3 {
        let t = self.tangent(theta);
        let (ss, cs) = s.sin_cos();
        std::array::from_fn(|i| cs * self.source[i] + ss * t[i])
    }

    /// Unit velocity `∂_s point(s, θ̃)`.
    pub fn velocity(&self, s: f64, theta: f64) -> Vec3 {
        let t = self.tangent(theta);
        let (ss, cs) = s.sin_cos();
        std::array::from_fn(|i| -ss * self.source[i] + cs * t[i])
    }

    /// Inverse of [`point`](Self::point): `(s, θ̃)` with `θ̃ ∈ [0, 2π)`.
    pub fn coordinates(&self, p: Vec3) -> (f64, f64) {
        let c = dot(p, self.source).clamp(-1.0, 1.0);
        let (a, b) = (dot(p, self.e1), dot(p, self.e2));
        let s = (a.hypot(b)).atan2(c);
        let theta = b.atan2(a).rem_euclid(2.0 * std::f64::consts::PI);
        (s, theta)
    }

    /// Arc length `s₀ ∈ (0, π)` where the geodesic meets `θ_n = 0`.
    pub fn equator_crossing(&self, theta: f64) -> Result<f64, GeometryError> {
        let a = self.source[2];
        let b = self.tangent(theta)[2];
        if a > 0.0 {
            Ok(a.atan2(-b))
        } else if a < 0.0 {
            Ok((-a).atan2(b))
        } else {
            Err(GeometryError::NoCrossing)
        }
    }
}

/// `(source, s, θ̃)` triple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicFrame {
    pub source: Direction,
    pub s: f64,
    pub theta_tilde: f64,
}

pub fn geodesic_point(frame: &GeodesicFrame) -> Direction {
    Direction(TangentFrame::new(frame.source).point(frame.s, frame.theta_tilde))
}

pub fn equator_crossing(frame: &GeodesicFrame) -> Result<f64, GeometryError> {
    TangentFrame::new(frame.source).equator_crossing(frame.theta_tilde)
}

/// `√(1 - c₊²/c₋²)`.
pub fn critical_omega_n(profile: &StratifiedProfile) -> f64 {
    let r = profile.c_plus() / profile.c_minus();
    (1.0 - r * r).max(0.0).sqrt()
}

/// True if `ω_n` is within `delta` of `0` or of the critical value.
pub fn in_excluded_band(omega_n: f64, profile: &StratifiedProfile, delta: f64) -> bool {
    let crit = critical_omega_n(profile);
    omega_n.abs() <= delta || (crit > 0.0 && (omega_n - crit).abs() <= delta)
}

/// `(ω̄, ω_n) ↦ (-ω̄, ω_n)`.
pub fn map_reflect(omega: Direction, delta: f64) -> Result<Direction, GeometryError> {
    let w = omega.0;
    if w[2].abs() <= delta {
        return Err(GeometryError::EquatorialInput(w[2]));
    }
    Ok(Direction([-w[0], -w[1], w[2]]))
}

/// Transmitted singularity image (Snell's law across the stratification).
pub fn map_transmit(
    omega: Direction,
    profile: &StratifiedProfile,
    delta: f64,
) -> Result<Direction, GeometryError> {
    let w = omega.0;
    let wn = w[2];
    if in_excluded_band(wn, profile, delta) {
        return Err(GeometryError::EquatorialInput(wn));
    }
    let (cp, cm) = (profile.c_plus(), profile.c_minus());
    if cp == cm {
        return Ok(omega.neg());
    }
    let bar2 = w[0] * w[0] + w[1] * w[1];
    if wn > 0.0 {
        let crit = critical_omega_n(profile);
        if wn < crit {
            return Err(GeometryError::TotalInternalReflection { omega_n: wn, critical: crit });
        }
        let r = cm / cp;
        let n = (1.0 - r * r * bar2).max(0.0).sqrt();
        Ok(Direction([-r * w[0], -r * w[1], -n]))
    } else {
        let r = cp / cm;
        let n = (1.0 - r * r * bar2).max(0.0).sqrt();
        Ok(Direction([-r * w[0], -r * w[1], n]))
    }
}

/// Even extension across the equator of a function known on `φ_n ≥ 0`.
pub fn fold_even_extension<F: Fn(Vec3) -> f64>(w: F) -> impl Fn(Vec3) -> f64 {
    move |p: Vec3| {
        if p[2] >= 0.0 {
            w(p)
        } else {
            w([p[0], p[1], -p[2]])
        }
    }
}
