//! Scattering-symbol data, the leading-order forward model, extraction of
//! ray data and the layer-stripping loop.

use super::funk::{even_part_from_half_circles, pointwise_part, recover_odd_part, FunkOperator};
use super::rays::{reduce_order, weighted_ray_integral, CircleFamilies, RayIntegralData};
use super::InverseError;
use crate::geometry::{Direction, Vec3};
use crate::media::{Hemisphere, PerturbationExpansion, StratifiedProfile};
use crate::parametrix::{antipodal_symbol, assemble_parametrix, BranchTag, ParametrixConfig};
use crate::spectral1d::rt_plus;
use crate::sphharm::HarmonicTable;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SymbolMode {
    Transmitted,
    Reflected,
}

/// Recovered angular coefficient `W_{-k}` of `λ²(c⁻² - c₀⁻²)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngularLayer {
    pub order: usize,
    pub table: HarmonicTable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StripConfig {
    pub lambda: f64,
    /// Families resolve degree `band_limit`; recovered layers have degree `band_limit - 1`.
    pub band_limit: usize,
    pub n_alpha: usize,
    pub delta_eq: f64,
    pub delta_crit: f64,
    pub residual_tol: f64,
}

impl StripConfig {
    pub fn new(lambda: f64, band_limit: usize) -> Self {
        Self { lambda, band_limit, n_alpha: 4 * band_limit + 4, delta_eq: 0.05, delta_crit: 0.05, residual_tol: 1e-3 }
    }
}

/// Order-`k` symbol difference on circle families:
/// `S = calibration · prefactor · (-ic/(2λ)) · I_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatteringSymbolData {
    pub order: usize,
    pub mode: SymbolMode,
    pub config: StripConfig,
    pub c: f64,
    /// `"T+"` or `"R+"`.
    pub prefactor_tag: String,
    pub calibration: Complex64,
    pub values: Vec<Vec<Complex64>>,
    pub prefactors: Vec<Vec<Complex64>>,
    pub mask: Vec<Vec<bool>>,
}

/// `W_k(θ)` of `λ²((c + g)⁻² - c⁻²)` with `g = Σ γ_j r^{-j}`, including the
/// products of lower orders.
pub fn w_from_gammas(gammas: &[f64], c: f64, lambda: f64, k: usize) -> f64 {
    // Series of x = g/c and of Σ_{p≥1} (p+1)(-x)^p, both up to r^{-k}.
    let x: Vec<f64> = (0..=k).map(|j| gammas.get(j).copied().unwrap_or(0.0) / c).collect();
    let mut power = x.clone();
    let mut total = vec![0.0; k + 1];
    for p in 1..=k {
        let coef = (p as f64 + 1.0) * if p % 2 == 1 { -1.0 } else { 1.0 };
        if power.iter().all(|v| *v == 0.0) {
            break;
        }
        for j in 0..=k {
            total[j] += coef * power[j];
        }
        let mut next = vec![0.0; k + 1];
        for a in 0..=k {
            for b in 0..=k - a {
                next[a + b] += power[a] * x[b];
            }
        }
        power = next;
    }
    lambda * lambda / (c * c) * total[k]
}

/// Linearized inverse of [`w_from_gammas`] at one order.
pub fn gamma_from_w(w: &HarmonicTable, c: f64, lambda: f64) -> HarmonicTable {
    w.scaled(-c * c * c / (2.0 * lambda * lambda))
}

fn w_at(pert: &PerturbationExpansion, c: f64, lambda: f64, k: usize, mode: SymbolMode, theta: Vec3) -> f64 {
    let theta = match mode {
        SymbolMode::Transmitted => theta,
        SymbolMode::Reflected => [theta[0], theta[1], theta[2].abs()],
    };
    let g: Vec<f64> = (0..=k).map(|j| if j == 0 { 0.0 } else { pert.gamma(j, theta) }).collect();
    w_from_gammas(&g, c, lambda, k)
}

fn mode_speed(profile: &StratifiedProfile, mode: SymbolMode) -> Result<f64, InverseError> {
    if mode == SymbolMode::Transmitted && profile.c_plus() != profile.c_minus() {
        return Err(InverseError::ModeRequiresEqualSpeeds("transmitted"));
    }
    Ok(profile.c_plus())
}

/// Leading-order symbol of `pert` at order `k` on the families of `config`.
pub fn synthesize_symbols(
    profile: &StratifiedProfile,
    pert: &PerturbationExpansion,
    k: usize,
    mode: SymbolMode,
    config: &StripConfig,
) -> Result<ScatteringSymbolData, InverseError> {
    let c = mode_speed(profile, mode)?;
    let fam = CircleFamilies::new(config.band_limit, config.n_alpha);
    let lambda = config.lambda;
    let w = |p: Vec3| w_at(pert, c, lambda, k, mode, p);
    let ints = fam.integrals(&w, k);
    let scale = Complex64::new(0.0, -c / (2.0 * lambda));
    let mut values = Vec::with_capacity(fam.len());
    let mut prefactors = Vec::with_capacity(fam.len());
    let mut mask = Vec::with_capacity(fam.len());
    for (i, row) in ints.iter().enumerate() {
        let (mut v, mut p, mut m) = (Vec::new(), Vec::new(), Vec::new());
        for (l, ik) in row.iter().enumerate() {
            let wn = fam.point(i, fam.alpha(l))[2].abs();
            let pref = if wn <= config.delta_eq.sin() {
                None
            } else {
                rt_plus(profile, lambda, wn, config.delta_crit).ok().map(|(r, t)| match mode {
                    SymbolMode::Transmitted => t,
                    SymbolMode::Reflected => r,
                })
            };
            let pref_v = pref.unwrap_or_default();
            p.push(pref_v);
            m.push(pref.is_some());
            v.push(pref_v * scale * ik);
        }
        values.push(v);
        prefactors.push(p);
        mask.push(m);
    }
    let prefactor_tag = match mode {
        SymbolMode::Transmitted => "T+",
        SymbolMode::Reflected => "R+",
    };
    Ok(ScatteringSymbolData {
        order: k,
        mode,
        config: *config,
        c,
        prefactor_tag: prefactor_tag.into(),
        calibration: Complex64::new(1.0, 0.0),
        values,
        prefactors,
        mask,
    })
}

/// `I_k = S / (calibration · prefactor · (-ic/(2λ)))`, masking samples where
/// the divisor is below `1e-10`.
pub fn extract_leading_symbol(data: &ScatteringSymbolData) -> RayIntegralData {
    let scale = data.calibration * Complex64::new(0.0, -data.c / (2.0 * data.config.lambda));
    let mut values = Vec::with_capacity(data.values.len());
    let mut mask = Vec::with_capacity(data.values.len());
    for ((row, pref), avail) in data.values.iter().zip(&data.prefactors).zip(&data.mask) {
        let mut v = Vec::with_capacity(row.len());
        let mut m = Vec::with_capacity(row.len());
        for ((s, p), a) in row.iter().zip(pref).zip(avail) {
            let div = p * scale;
            let ok = *a && div.norm() >= 1e-10;
            v.push(if ok { s / div } else { Complex64::default() });
            m.push(ok);
        }
        values.push(v);
        mask.push(m);
    }
    RayIntegralData { order: data.order, values, mask }
}

/// Output of [`layer_strip`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StripReport {
    pub mode: SymbolMode,
    /// Linear parts `W_{-k}` after subtracting lower-order products.
    pub layers: Vec<AngularLayer>,
    pub gammas: Vec<AngularLayer>,
    /// `(k, ‖S_k - model‖ / ‖S_k‖)` over available samples.
    pub residuals: Vec<(usize, f64)>,
    /// First order whose residual exceeded the tolerance.
    pub halted_at: Option<usize>,
}

impl StripReport {
    /// Recovered expansion (global tables when transmitted, upper ones when reflected).
    pub fn expansion(&self, r0: f64) -> PerturbationExpansion {
        let lead = self.gammas.first().map(|g| g.order).unwrap_or(1);
        let mut e = PerturbationExpansion::new(lead, r0);
        for g in &self.gammas {
            e = add_term(e, self.mode, g.order, g.table.clone());
        }
        e
    }
}

fn add_term(e: PerturbationExpansion, mode: SymbolMode, k: usize, table: HarmonicTable) -> PerturbationExpansion {
    match mode {
        SymbolMode::Transmitted => e.with_global_term(k, table),
        SymbolMode::Reflected => e.with_term(k, Hemisphere::Upper, table),
    }
}

fn sum_truncated(a: &HarmonicTable, b: &HarmonicTable, band_limit: usize) -> HarmonicTable {
    let n = crate::sphharm::coeff_count(band_limit);
    let get = |t: &HarmonicTable, q: usize| t.coeffs.get(q).copied().unwrap_or(0.0);
    HarmonicTable::from_coeffs(band_limit, (0..n).map(|q| get(a, q) + get(b, q)).collect())
}

fn relative_misfit(data: &ScatteringSymbolData, model: &ScatteringSymbolData) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for ((a, b), m) in data.values.iter().zip(&model.values).zip(&data.mask) {
        for ((x, y), ok) in a.iter().zip(b).zip(m) {
            if *ok {
                num += (x - y * data.calibration).norm_sqr();
                den += x.norm_sqr();
            }
        }
    }
    if den == 0.0 {
        num.sqrt()
    } else {
        (num / den).sqrt()
    }
}

/// `W` of degree `< band_limit` from complete ray data of order `k`.
fn recover_w(ray: &RayIntegralData, fam: &CircleFamilies, op: &FunkOperator, delta_eq: f64) -> Result<HarmonicTable, InverseError> {
    let mut ray = ray.clone();
    while ray.order > 3 {
        ray = reduce_order(&ray, fam)?;
    }
    let pointwise = pointwise_part(&ray)?;
    let (even, odd) = match ray.order {
        2 => (even_part_from_half_circles(&ray, op)?, op.project_samples(&pointwise, Some(1))),
        3 => (op.project_samples(&pointwise, Some(0)), recover_odd_part(&ray, op, delta_eq)?),
        k => return Err(InverseError::InvalidOrder(k)),
    };
    Ok(sum_truncated(&even, &odd, fam.band_limit - 1))
}

/// Recovers `γ_J, γ_{J+1}, …` from symbol data sorted by order, removing
/// the contribution of already recovered layers before each extraction.
pub fn layer_strip(data: &[ScatteringSymbolData], profile: &StratifiedProfile) -> Result<StripReport, InverseError> {
    let first = data.first().ok_or(InverseError::InvalidOrder(0))?;
    let (cfg, mode) = (first.config, first.mode);
    let c = mode_speed(profile, mode)?;
    let fam = CircleFamilies::new(cfg.band_limit, cfg.n_alpha);
    if fam.n_alpha < fam.required_alpha() {
        return Err(InverseError::InsufficientFamilyResolution { samples: fam.n_alpha, needed: fam.required_alpha() });
    }
    let op = FunkOperator::new(fam.clone());
    let mut partial = PerturbationExpansion::new(first.order, 1.0);
    let mut report = StripReport { mode, layers: Vec::new(), gammas: Vec::new(), residuals: Vec::new(), halted_at: None };
    for d in data {
        if d.order < 2 || d.mode != mode {
            return Err(InverseError::InvalidOrder(d.order));
        }
        let mut rem = d.clone();
        if !partial.terms.is_empty() {
            let lower = synthesize_symbols(profile, &partial, d.order, mode, &cfg)?;
            for (r, l) in rem.values.iter_mut().zip(&lower.values) {
                for (x, y) in r.iter_mut().zip(l) {
                    *x -= y * d.calibration;
                }
            }
        }
        let ray = extract_leading_symbol(&rem).filled(cfg.band_limit)?;
        let w = recover_w(&ray, &fam, &op, cfg.delta_eq)?;
        let gamma = gamma_from_w(&w, c, cfg.lambda);
        partial = add_term(partial, mode, d.order, gamma.clone());
        let model = synthesize_symbols(profile, &partial, d.order, mode, &cfg)?;
        let misfit = relative_misfit(d, &model);
        report.layers.push(AngularLayer { order: d.order, table: w });
        report.gammas.push(AngularLayer { order: d.order, table: gamma });
        report.residuals.push((d.order, misfit));
        if misfit > cfg.residual_tol {
            report.halted_at = Some(d.order);
            break;
        }
    }
    Ok(report)
}

/// Agreement of the forward symbol model with the parametrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymbolCalibration {
    /// Least-squares ratio parametrix / model; `1` when they agree.
    pub ratio: Complex64,
    /// `max |parametrix - model| / max |model|`.
    pub rel_error: f64,
}

/// Compares the antipodal symbol of the parametrix for `pert` (leading
/// order `J`, incidence `omega`) with the order-`J` symbol model.
pub fn calibrate_symbol_constant(
    profile: &StratifiedProfile,
    pert: &PerturbationExpansion,
    lambda: f64,
    omega: Direction,
    mode: SymbolMode,
    config: &ParametrixConfig,
) -> Result<SymbolCalibration, InverseError> {
    let c = mode_speed(profile, mode)?;
    let par = assemble_parametrix(profile, pert, lambda, omega, 1, config)?;
    let tag = match mode {
        SymbolMode::Transmitted => BranchTag::T,
        SymbolMode::Reflected => BranchTag::R,
    };
    let samples = antipodal_symbol(&par, tag)?;
    let k = pert.leading_order;
    let (r, t) = rt_plus(profile, lambda, omega.omega_n(), config.delta_crit)?;
    let pref = match mode {
        SymbolMode::Transmitted => t,
        SymbolMode::Reflected => r,
    } * Complex64::new(0.0, -c / (2.0 * lambda));
    let w = |p: Vec3| w_at(pert, c, lambda, k, mode, p);
    let (mut num, mut den, mut worst, mut top) = (Complex64::default(), 0.0, 0.0f64, 0.0f64);
    for s in &samples {
        let model = pref * weighted_ray_integral(&w, omega, s.theta_tilde, k)?;
        num += model.conj() * s.value;
        den += model.norm_sqr();
        worst = worst.max((s.value - model).norm());
        top = top.max(model.norm());
    }
    Ok(SymbolCalibration { ratio: num / den, rel_error: worst / top })
}
