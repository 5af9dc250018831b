//! The order loop: error extraction, incident transport, matching through
//! the strip and transport of the reflected and transmitted branches.

use super::grid::{GridKind, PolarGrid};
use super::operator::{BranchOperator, GridAmplitude, PointAmplitude};
use super::transport::transport_on_grid;
use super::ParametrixError;
use crate::geometry::{in_excluded_band, Direction, Vec3};
use crate::media::{Hemisphere, PerturbationExpansion, StratifiedProfile};
use crate::spectral1d::{solve_phi_plus, PhiSolution, Regime};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParametrixConfig {
    pub n_s: usize,
    pub n_theta: usize,
    /// Radius of the excluded disks around the singular directions.
    pub delta_ant: f64,
    pub n_max: usize,
    /// Half-width of the excluded bands around `ω_n = 0` and the critical angle.
    pub delta_crit: f64,
}

impl Default for ParametrixConfig {
    fn default() -> Self {
        Self { n_s: 128, n_theta: 128, delta_ant: 0.1, n_max: 4, delta_crit: 0.05 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BranchTag {
    I,
    R,
    T,
}

/// One far-field branch: carrier, grid and amplitudes by order.
#[derive(Debug, Clone)]
pub struct BranchRecord {
    pub tag: BranchTag,
    pub op: BranchOperator,
    pub grid: PolarGrid,
    /// `b_0` first, then one entry per transported order.
    pub amplitudes: Vec<GridAmplitude>,
    /// Error grids `d_k` that the transported orders cancel, aligned with
    /// `amplitudes[1..]`.
    pub errors: Vec<Vec<Complex64>>,
    /// Offset constants per transported order and column (annulus grids).
    pub constants: Vec<Vec<Complex64>>,
}

impl BranchRecord {
    fn new(tag: BranchTag, op: BranchOperator, grid: PolarGrid, b0: Complex64) -> Self {
        let amp = GridAmplitude::constant(&grid, b0);
        Self { tag, op, grid, amplitudes: vec![amp], errors: Vec::new(), constants: Vec::new() }
    }

    /// All stored amplitudes interpolated at the direction `theta`, or
    /// `None` outside the grid.
    pub fn point_amplitudes(&self, theta: Vec3) -> Option<(f64, f64, Vec<PointAmplitude>)> {
        let (s, th) = self.grid.frame.coordinates(theta);
        let rows = self.grid.interp_rows(s, th)?;
        let pts = self
            .amplitudes
            .iter()
            .map(|a| PointAmplitude {
                m: a.m,
                b: self.grid.apply_rows(&rows, &a.values),
                ds: self.grid.apply_rows(&rows, &a.ds),
                dtheta: self.grid.apply_rows(&rows, &a.dtheta),
                lb: self.grid.apply_rows(&rows, &a.lb),
            })
            .collect();
        Some((s, th, pts))
    }

    /// Amplitude of order `m` at `theta`.
    pub fn amplitude_at(&self, m: usize, theta: Vec3) -> Option<Complex64> {
        let a = self.amplitudes.iter().find(|a| a.m == m)?;
        let (s, th) = self.grid.frame.coordinates(theta);
        let rows = self.grid.interp_rows(s, th)?;
        Some(self.grid.apply_rows(&rows, &a.values))
    }

    /// Error grid `d_k` interpolated at `theta`.
    pub fn error_at(&self, k: usize, theta: Vec3) -> Option<Complex64> {
        let pos = self.amplitudes.iter().skip(1).position(|a| a.m + 1 == k)?;
        let (s, th) = self.grid.frame.coordinates(theta);
        let rows = self.grid.interp_rows(s, th)?;
        Some(self.grid.apply_rows(&rows, &self.errors[pos]))
    }

    fn push_order(&mut self, d: Vec<Complex64>, m: usize, constants: Option<Vec<Complex64>>) -> Result<(), ParametrixError> {
        let b = transport_on_grid(&self.grid, &d, m, self.op.lambda, self.op.c_b, constants.as_deref())?;
        self.amplitudes.push(GridAmplitude::from_values(&self.grid, m, b));
        self.errors.push(d);
        self.constants.push(constants.unwrap_or_default());
        Ok(())
    }
}

/// Assembled ansatz with per-order amplitude records.
#[derive(Debug, Clone)]
pub struct PiecewiseParametrix {
    pub profile: StratifiedProfile,
    pub lambda: f64,
    pub omega: Direction,
    pub leading_order: usize,
    pub orders: usize,
    pub phi: PhiSolution,
    pub branches: Vec<BranchRecord>,
    /// Centres of the excluded disks.
    pub excluded: Vec<Vec3>,
    pub config: ParametrixConfig,
}

/// Runs `N` correction steps for the incident direction `ω` (`ω_n > 0`,
/// incidence from above).
pub fn assemble_parametrix(
    profile: &StratifiedProfile,
    perturbation: &PerturbationExpansion,
    lambda: f64,
    omega: Direction,
    n: usize,
    config: &ParametrixConfig,
) -> Result<PiecewiseParametrix, ParametrixError> {
    if n > config.n_max {
        return Err(ParametrixError::GridResolutionExceeded { requested: n, max: config.n_max });
    }
    let w = omega.0;
    let wn = w[2];
    if wn <= 0.0 || in_excluded_band(wn, profile, config.delta_crit) {
        return Err(ParametrixError::ExcludedDirection(wn));
    }
    let phi = solve_phi_plus(profile, lambda, wn, config.delta_crit)?;
    let (cp, cm) = (profile.c_plus(), profile.c_minus());
    let make_op = |c_b: f64, source: Vec3, hemisphere: Hemisphere| BranchOperator {
        lambda,
        c_b,
        source,
        hemisphere,
        perturbation: perturbation.clone(),
    };
    let s_hi = PI - config.delta_ant;
    let annulus = |source: Vec3| PolarGrid::new(Direction(source), GridKind::Annulus { s_hi }, config.n_s, config.n_theta);

    let mut branches = Vec::new();
    let grid_i = PolarGrid::new(omega, GridKind::Diameter, config.n_s, config.n_theta);
    branches.push(BranchRecord::new(BranchTag::I, make_op(cp, w, Hemisphere::Upper), grid_i, Complex64::new(1.0, 0.0)));
    let w_r = [w[0], w[1], -wn];
    branches.push(BranchRecord::new(BranchTag::R, make_op(cp, w_r, Hemisphere::Upper), annulus(w_r), phi.coefficients.r));
    let mut excluded = vec![[-w_r[0], -w_r[1], -w_r[2]]];
    if phi.coefficients.regime == Regime::Propagating {
        let r = cm / cp;
        let bar2 = w[0] * w[0] + w[1] * w[1];
        let w_t = [r * w[0], r * w[1], (1.0 - r * r * bar2).max(0.0).sqrt()];
        branches.push(BranchRecord::new(BranchTag::T, make_op(cm, w_t, Hemisphere::Lower), annulus(w_t), phi.coefficients.t));
        excluded.push([-w_t[0], -w_t[1], -w_t[2]]);
    }

    let j0 = perturbation.leading_order;
    for step in 0..n {
        let k = j0 + step;
        let m = k - 1;
        let d_i = branches[0].op.error_coefficients(&branches[0].grid, k, &branches[0].amplitudes);
        branches[0].push_order(d_i, m, None)?;
        for bi in 1..branches.len() {
            let factor = match branches[bi].tag {
                BranchTag::R => phi.coefficients.r,
                _ => phi.coefficients.t,
            };
            let br = &branches[bi];
            let mut consts = Vec::with_capacity(br.grid.n_theta());
            for j in 0..br.grid.n_theta() {
                let s0 = br.grid.s_start(j);
                let p = br.grid.frame.point(s0, br.grid.theta[j]);
                let p = [p[0], p[1], 0.0];
                let x = branches[0].amplitude_at(m, p).ok_or(ParametrixError::AntipodeProximity)?;
                consts.push(-2.0 * Complex64::i() * lambda * br.op.c_b * s0.sin().powi(m as i32) * factor * x);
            }
            let d = br.op.error_coefficients(&br.grid, k, &br.amplitudes);
            branches[bi].push_order(d, m, Some(consts))?;
        }
    }
    Ok(PiecewiseParametrix {
        profile: profile.clone(),
        lambda,
        omega,
        leading_order: j0,
        orders: n,
        phi,
        branches,
        excluded,
        config: *config,
    })
}
