//! Sound-speed models: the stratified background `c₀(y)`, the homogeneous
//! asymptotic expansion of the perturbation, and the effective potential.

use crate::sphharm::HarmonicTable;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MediaError {
    #[error("layer table invalid: {0}")]
    InvalidLayers(String),
    #[error("speed must be positive and finite, found {0}")]
    NonPositiveSpeed(f64),
    #[error("point lies in the equatorial band (|latitude| < {delta_eq})")]
    EquatorialEvaluation { delta_eq: f64 },
    #[error("|z| = {radius} is below the expansion radius r0 = {r0}")]
    BelowExpansionRadius { radius: f64, r0: f64 },
    #[error("perturbation invalid: {0}")]
    InvalidPerturbation(String),
}

/// One slab `[y_lo, y_hi]` whose speed is a polynomial in absolute `y`
/// (`poly[k]` multiplies `y^k`; a single entry is a constant layer).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub y_lo: f64,
    pub y_hi: f64,
    #[serde(rename = "poly_coeffs")]
    pub poly: Vec<f64>,
}

impl Layer {
    pub fn constant(y_lo: f64, y_hi: f64, speed: f64) -> Self {
        Self { y_lo, y_hi, poly: vec![speed] }
    }

    pub fn is_constant(&self) -> bool {
        self.poly.iter().skip(1).all(|c| *c == 0.0)
    }

    pub fn speed(&self, y: f64) -> f64 {
        self.poly.iter().rev().fold(0.0, |acc, c| acc * y + c)
    }

    /// `k`-th derivative of the speed polynomial at `y`.
    pub fn derivative(&self, k: usize, y: f64) -> f64 {
        let mut acc = 0.0;
        for (i, c) in self.poly.iter().enumerate().skip(k).rev() {
            let falling: f64 = ((i - k + 1)..=i).map(|v| v as f64).product();
            acc = acc * y + c * falling;
        }
        acc
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StratifiedProfile {
    layers: Vec<Layer>,
    c_plus: f64,
    c_minus: f64,
    y_m: f64,
}

impl StratifiedProfile {
    /// Validates the partition of `[-y_M, y_M]`, positivity of every speed
    /// and the ordering `c₋ ≥ c₊`.
    pub fn new(layers: Vec<Layer>, c_plus: f64, c_minus: f64, y_m: f64) -> Result<Self, MediaError> {
        for c in [c_plus, c_minus] {
            if !(c.is_finite() && c > 0.0) {
                return Err(MediaError::NonPositiveSpeed(c));
            }
        }
        if c_minus < c_plus {
            return Err(MediaError::InvalidLayers(format!(
                "c_minus = {c_minus} must be >= c_plus = {c_plus}"
            )));
        }
        if !(y_m > 0.0 && y_m.is_finite()) {
            return Err(MediaError::InvalidLayers(format!("y_M = {y_m} must be positive")));
        }
        if layers.is_empty() {
            return Err(MediaError::InvalidLayers("at least one layer required".into()));
        }
        let tol = 1e-12 * y_m.max(1.0);
        if (layers[0].y_lo + y_m).abs() > tol || (layers[layers.len() - 1].y_hi - y_m).abs() > tol {
            return Err(MediaError::InvalidLayers("layers must cover [-y_M, y_M]".into()));
        }
        for w in layers.windows(2) {
            if (w[0].y_hi - w[1].y_lo).abs() > tol {
                return Err(MediaError::InvalidLayers(format!(
                    "gap or overlap between layers at y = {}",
                    w[0].y_hi
                )));
            }
        }
        for l in &layers {
            if !(l.y_hi > l.y_lo) || l.poly.is_empty() {
                return Err(MediaError::InvalidLayers(format!(
                    "degenerate layer [{}, {}]",
                    l.y_lo, l.y_hi
                )));
            }
        }
        let profile = Self { layers, c_plus, c_minus, y_m };
        let (lo, _) = profile.speed_bounds();
        if !(lo > 0.0) {
            return Err(MediaError::NonPositiveSpeed(lo));
        }
        Ok(profile)
    }

    pub fn constant(c: f64, y_m: f64) -> Result<Self, MediaError> {
        Self::new(vec![Layer::constant(-y_m, y_m, c)], c, c, y_m)
    }

    /// Single interface at `y = 0`: `c₊` above, `c₋` below.
    pub fn two_layer(c_plus: f64, c_minus: f64, y_m: f64) -> Result<Self, MediaError> {
        Self::new(
            vec![Layer::constant(-y_m, 0.0, c_minus), Layer::constant(0.0, y_m, c_plus)],
            c_plus,
            c_minus,
            y_m,
        )
    }

    /// Symmetric slab of speed `c_mid` on `[-half_width, half_width]` in a
    /// uniform background `c_out`.
    pub fn slab(c_out: f64, c_mid: f64, half_width: f64, y_m: f64) -> Result<Self, MediaError> {
        let mut layers = Vec::new();
        if half_width < y_m {
            layers.push(Layer::constant(-y_m, -half_width, c_out));
        }
        layers.push(Layer::constant(-half_width.min(y_m), half_width.min(y_m), c_mid));
        if half_width < y_m {
            layers.push(Layer::constant(half_width, y_m, c_out));
        }
        Self::new(layers, c_out, c_out, y_m)
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn c_plus(&self) -> f64 {
        self.c_plus
    }

    pub fn c_minus(&self) -> f64 {
        self.c_minus
    }

    pub fn y_m(&self) -> f64 {
        self.y_m
    }

    /// `c₀(y)`; exact `c±` outside `[-y_M, y_M]`, layers are closed below.
    pub fn eval_c0(&self, y: f64) -> f64 {
        if y > self.y_m {
            return self.c_plus;
        }
        if y < -self.y_m {
            return self.c_minus;
        }
        self.layer_at(y).speed(y)
    }

    pub fn layer_at(&self, y: f64) -> &Layer {
        let idx = self
            .layers
            .iter()
            .position(|l| y < l.y_hi)
            .unwrap_or(self.layers.len() - 1);
        &self.layers[idx]
    }

    /// Interior breakpoints of the layer table.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.layers.iter().skip(1).map(|l| l.y_lo).collect()
    }

    /// Global `(c_m, c_M)` over the line, from dense sampling of each layer
    /// plus the two half-line limits.
    pub fn speed_bounds(&self) -> (f64, f64) {
        let mut lo = self.c_plus.min(self.c_minus);
        let mut hi = self.c_plus.max(self.c_minus);
        for l in &self.layers {
            let n = if l.is_constant() { 1 } else { 400 };
            for i in 0..=n {
                let y = l.y_lo + (l.y_hi - l.y_lo) * i as f64 / n as f64;
                let c = l.speed(y);
                lo = lo.min(c);
                hi = hi.max(c);
            }
        }
        (lo, hi)
    }

    /// True when every layer boundary (including `±y_M`) joins the two
    /// neighbouring polynomials with all derivatives equal.
    pub fn is_smooth(&self) -> bool {
        let mut pieces: Vec<Layer> = vec![Layer::constant(f64::NEG_INFINITY, -self.y_m, self.c_minus)];
        pieces.extend(self.layers.iter().cloned());
        pieces.push(Layer::constant(self.y_m, f64::INFINITY, self.c_plus));
        pieces.windows(2).all(|w| {
            let y = w[0].y_hi;
            let deg = w[0].poly.len().max(w[1].poly.len());
            (0..deg).all(|k| {
                let a = w[0].derivative(k, y);
                let b = w[1].derivative(k, y);
                (a - b).abs() <= 1e-12 * (1.0 + a.abs())
            })
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hemisphere {
    Upper,
    Lower,
}

impl Hemisphere {
    pub fn of(theta_n: f64) -> Self {
        if theta_n >= 0.0 {
            Hemisphere::Upper
        } else {
            Hemisphere::Lower
        }
    }
}

/// Angular coefficient `γ_j` on one open hemisphere.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionTerm {
    pub order: usize,
    pub hemisphere: Hemisphere,
    pub table: HarmonicTable,
}

/// `c(z) - c₀(y) ~ Σ_j γ_j(z/|z|) |z|^{-j}` for `|z| ≥ r₀`, off the equator.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationExpansion {
    pub leading_order: usize,
    pub dimension: usize,
    pub terms: Vec<ExpansionTerm>,
    pub r0: f64,
    pub delta_eq: f64,
}

impl PerturbationExpansion {
    pub fn new(leading_order: usize, r0: f64) -> Self {
        Self {
            leading_order,
            dimension: 3,
            terms: Vec::new(),
            r0,
            delta_eq: 0.05,
        }
    }

    pub fn with_term(mut self, order: usize, hemisphere: Hemisphere, table: HarmonicTable) -> Self {
        self.terms.push(ExpansionTerm { order, hemisphere, table });
        self
    }

    /// Same table on both hemispheres.
    pub fn with_global_term(self, order: usize, table: HarmonicTable) -> Self {
        self.with_term(order, Hemisphere::Upper, table.clone())
            .with_term(order, Hemisphere::Lower, table)
    }

    pub fn max_order(&self) -> usize {
        self.terms.iter().map(|t| t.order).max().unwrap_or(0)
    }

    /// `γ_j(θ)` for the hemisphere of `θ` (sum of matching terms).
    pub fn gamma(&self, order: usize, theta: [f64; 3]) -> f64 {
        let h = Hemisphere::of(theta[2]);
        self.gamma_on(order, h, theta)
    }

    /// `γ_j` of the given hemisphere's table evaluated at `θ`, which need
    /// not lie in that hemisphere (the tables extend smoothly).
    pub fn gamma_on(&self, order: usize, hemisphere: Hemisphere, theta: [f64; 3]) -> f64 {
        self.terms
            .iter()
            .filter(|t| t.order == order && t.hemisphere == hemisphere)
            .map(|t| t.table.eval(theta))
            .sum()
    }

    pub fn sup_gamma(&self, order: usize) -> f64 {
        [Hemisphere::Upper, Hemisphere::Lower]
            .iter()
            .map(|h| {
                self.terms
                    .iter()
                    .filter(|t| t.order == order && t.hemisphere == *h)
                    .map(|t| t.table.sup_bound())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// `Σ_{j=J}^{N} γ_j(θ) r^{-j}` with the hemisphere chosen by `θ_n`.
    pub fn tail(&self, z: [f64; 3], truncation: usize) -> Result<f64, MediaError> {
        if self.terms.is_empty() {
            return Ok(0.0);
        }
        let r = norm(z);
        if r < self.r0 {
            return Err(MediaError::BelowExpansionRadius { radius: r, r0: self.r0 });
        }
        let theta = [z[0] / r, z[1] / r, z[2] / r];
        if theta[2].clamp(-1.0, 1.0).asin().abs() < self.delta_eq {
            return Err(MediaError::EquatorialEvaluation { delta_eq: self.delta_eq });
        }
        Ok((self.leading_order..=truncation)
            .map(|j| self.gamma(j, theta) * r.powi(-(j as i32)))
            .sum())
    }
}

pub(crate) fn norm(z: [f64; 3]) -> f64 {
    (z[0] * z[0] + z[1] * z[1] + z[2] * z[2]).sqrt()
}

/// `c(z) = c₀(y) + Σ_{j=J}^{N} γ_j(z/|z|)|z|^{-j}`.
pub fn eval_c(
    profile: &StratifiedProfile,
    perturbation: &PerturbationExpansion,
    z: [f64; 3],
    truncation: usize,
) -> Result<f64, MediaError> {
    Ok(profile.eval_c0(z[2]) + perturbation.tail(z, truncation)?)
}

/// `V = λ²(c^{-2} - c₀^{-2})`.
#[derive(Debug, Clone)]
pub struct EffectivePotential<'a> {
    pub lambda: f64,
    pub profile: &'a StratifiedProfile,
    pub perturbation: &'a PerturbationExpansion,
    pub truncation: usize,
}

impl EffectivePotential<'_> {
    pub fn eval(&self, z: [f64; 3]) -> Result<f64, MediaError> {
        let c0 = self.profile.eval_c0(z[2]);
        let g = self.perturbation.tail(z, self.truncation)?;
        // c^{-2} - c0^{-2} = -(2 c0 g + g²) / (c² c0²), formed without cancellation
        let c = c0 + g;
        Ok(-self.lambda * self.lambda * g * (2.0 * c0 + g) / (c * c * c0 * c0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Hypothesis {
    H1,
    H2,
}

/// One violated admissibility clause.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub clause: String,
}

pub fn validate_hypotheses(
    profile: &StratifiedProfile,
    perturbation: &PerturbationExpansion,
    hypothesis: Hypothesis,
) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |s: &str| out.push(Violation { clause: s.to_string() });
    let (lo, hi) = profile.speed_bounds();
    if !(lo > 0.0 && hi.is_finite()) {
        push("0 < c_m <= c_0 <= c_M < inf required");
    }
    if profile.c_minus() < profile.c_plus() {
        push("c_- >= c_+ required");
    }
    let j = perturbation.leading_order;
    if j < 2 {
        push("J >= 2 required");
    }
    if perturbation.terms.iter().any(|t| t.order < j) {
        push("all expansion orders must be >= J");
    }
    if perturbation.dimension < 2 {
        push("n >= 2 required");
    }
    match hypothesis {
        Hypothesis::H1 => {
            if j != 2 {
                push("J = 2 required");
            }
            if profile.c_plus() != profile.c_minus() {
                push("c_+ = c_- required");
            }
            if !profile.is_smooth() {
                push("c_0 must be smooth");
            }
            let smooth_tail = perturbation.terms.iter().all(|t| {
                let other = match t.hemisphere {
                    Hemisphere::Upper => Hemisphere::Lower,
                    Hemisphere::Lower => Hemisphere::Upper,
                };
                perturbation
                    .terms
                    .iter()
                    .any(|u| u.order == t.order && u.hemisphere == other && u.table == t.table)
            });
            if !smooth_tail {
                push("c must be smooth across the equator");
            }
        }
        Hypothesis::H2 => {
            if j < 4 {
                push("J >= 4 required");
            }
        }
    }
    out
}

/// JSON document for profile + perturbation ingestion.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MediumDocument {
    pub c_plus: f64,
    pub c_minus: f64,
    #[serde(rename = "y_M")]
    pub y_m: f64,
    pub layers: Vec<Layer>,
    #[serde(default)]
    pub perturbation: Option<PerturbationDocument>,
    #[serde(default)]
    pub hypothesis: Option<Hypothesis>,
    #[serde(default)]
    pub r0: Option<f64>,
    #[serde(default)]
    pub delta_eq: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PerturbationDocument {
    #[serde(rename = "J")]
    pub leading_order: usize,
    #[serde(default = "default_dimension")]
    pub n: usize,
    #[serde(default)]
    pub terms: Vec<TermDocument>,
}

fn default_dimension() -> usize {
    3
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermDocument {
    pub order: usize,
    pub hemisphere: Hemisphere,
    pub band_limit: usize,
    pub coeffs: Vec<f64>,
}

impl MediumDocument {
    pub fn profile(&self) -> Result<StratifiedProfile, MediaError> {
        StratifiedProfile::new(self.layers.clone(), self.c_plus, self.c_minus, self.y_m)
    }

    pub fn perturbation(&self) -> Result<PerturbationExpansion, MediaError> {
        let r0 = self.r0.unwrap_or(10.0 * self.y_m);
        let mut p = match &self.perturbation {
            Some(doc) => {
                let mut p = PerturbationExpansion::new(doc.leading_order, r0);
                p.dimension = doc.n;
                for t in &doc.terms {
                    if t.coeffs.len() > crate::sphharm::coeff_count(t.band_limit) {
                        return Err(MediaError::InvalidPerturbation(format!(
                            "order {} has more coefficients than band limit {} allows",
                            t.order, t.band_limit
                        )));
                    }
                    p.terms.push(ExpansionTerm {
                        order: t.order,
                        hemisphere: t.hemisphere,
                        table: HarmonicTable::from_coeffs(t.band_limit, t.coeffs.clone()),
                    });
                }
                p
            }
            None => PerturbationExpansion::new(2, r0),
        };
        if let Some(d) = self.delta_eq {
            p.delta_eq = d;
        }
        Ok(p)
    }

    pub fn from_parts(profile: &StratifiedProfile, perturbation: &PerturbationExpansion) -> Self {
        Self {
            c_plus: profile.c_plus(),
            c_minus: profile.c_minus(),
            y_m: profile.y_m(),
            layers: profile.layers().to_vec(),
            perturbation: Some(PerturbationDocument {
                leading_order: perturbation.leading_order,
                n: perturbation.dimension,
                terms: perturbation
                    .terms
                    .iter()
                    .map(|t| TermDocument {
                        order: t.order,
                        hemisphere: t.hemisphere,
                        band_limit: t.table.band_limit,
                        coeffs: t.table.coeffs.clone(),
                    })
                    .collect(),
            }),
            hypothesis: None,
            r0: Some(perturbation.r0),
            delta_eq: Some(perturbation.delta_eq),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_gamma() -> HarmonicTable {
        // Y_00 = 1/sqrt(4π), so this table is the constant function 1.
        HarmonicTable::from_coeffs(0, vec![(4.0 * std::f64::consts::PI).sqrt()])
    }

    #[test]
    fn eval_c0_examples() {
        let c = StratifiedProfile::constant(1.0, 1.0).unwrap();
        assert_eq!(c.eval_c0(5.0), 1.0);
        let two = StratifiedProfile::two_layer(1.0, 2.0, 1.0).unwrap();
        assert_eq!(two.eval_c0(-3.0), 2.0);
        assert_eq!(two.eval_c0(3.0), 1.0);
        let slab = StratifiedProfile::slab(1.0, 0.5, 1.0, 2.0).unwrap();
        assert_eq!(slab.eval_c0(0.0), 0.5);
    }

    #[test]
    fn profile_validation_rejects_bad_tables() {
        assert!(StratifiedProfile::two_layer(2.0, 1.0, 1.0).is_err());
        let gap = vec![Layer::constant(-1.0, -0.1, 1.0), Layer::constant(0.0, 1.0, 1.0)];
        assert!(StratifiedProfile::new(gap, 1.0, 1.0, 1.0).is_err());
        let neg = vec![Layer { y_lo: -1.0, y_hi: 1.0, poly: vec![0.5, 1.0] }];
        assert!(matches!(
            StratifiedProfile::new(neg, 1.0, 1.0, 1.0),
            Err(MediaError::NonPositiveSpeed(_))
        ));
    }

    #[test]
    fn eval_c_examples() {
        let prof = StratifiedProfile::constant(1.0, 1.0).unwrap();
        let empty = PerturbationExpansion::new(4, 5.0);
        assert_eq!(eval_c(&prof, &empty, [3.0, 0.0, 7.0], 8).unwrap(), 1.0);
        let p = PerturbationExpansion::new(4, 5.0).with_term(4, Hemisphere::Upper, unit_gamma());
        let v = eval_c(&prof, &p, [0.0, 0.0, 10.0], 4).unwrap();
        assert!((v - (1.0 + 1e-4)).abs() < 1e-15);
        assert!(matches!(
            eval_c(&prof, &p, [10.0, 0.0, 0.0], 4),
            Err(MediaError::EquatorialEvaluation { .. })
        ));
        assert!(matches!(
            eval_c(&prof, &p, [0.0, 0.0, 1.0], 4),
            Err(MediaError::BelowExpansionRadius { .. })
        ));
    }

    #[test]
    fn potential_vanishes_for_zero_frequency_or_no_perturbation() {
        let prof = StratifiedProfile::constant(1.0, 1.0).unwrap();
        let p = PerturbationExpansion::new(4, 5.0).with_term(4, Hemisphere::Upper, unit_gamma());
        let v = EffectivePotential { lambda: 0.0, profile: &prof, perturbation: &p, truncation: 4 };
        assert_eq!(v.eval([0.0, 0.0, 20.0]).unwrap(), 0.0);
        let empty = PerturbationExpansion::new(4, 5.0);
        let v = EffectivePotential { lambda: 3.0, profile: &prof, perturbation: &empty, truncation: 4 };
        assert_eq!(v.eval([1.0, 2.0, 20.0]).unwrap(), 0.0);
    }

    #[test]
    fn hypothesis_examples() {
        let constant = StratifiedProfile::constant(1.0, 1.0).unwrap();
        let p2 = PerturbationExpansion::new(2, 10.0).with_global_term(2, unit_gamma());
        assert!(validate_hypotheses(&constant, &p2, Hypothesis::H1).is_empty());

        let two = StratifiedProfile::two_layer(1.0, 2.0, 1.0).unwrap();
        let v = validate_hypotheses(&two, &PerturbationExpansion::new(2, 10.0), Hypothesis::H2);
        assert!(v.iter().any(|c| c.clause == "J >= 4 required"));
        let v = validate_hypotheses(&two, &PerturbationExpansion::new(4, 10.0), Hypothesis::H1);
        assert!(v.iter().any(|c| c.clause == "c_+ = c_- required"));
    }

    #[test]
    fn document_round_trip() {
        let json = r#"{
            "c_plus": 1.0, "c_minus": 2.0, "y_M": 1.0,
            "layers": [{"y_lo": -1.0, "y_hi": 0.0, "poly_coeffs": [2.0]},
                       {"y_lo": 0.0, "y_hi": 1.0, "poly_coeffs": [1.0]}],
            "perturbation": {"J": 4, "n": 3, "terms": [
                {"order": 4, "hemisphere": "upper", "band_limit": 1, "coeffs": [0.1, 0.0, 0.2, 0.0]}]},
            "hypothesis": "H2", "r0": 20.0, "delta_eq": 0.05
        }"#;
        let doc: MediumDocument = serde_json::from_str(json).unwrap();
        let prof = doc.profile().unwrap();
        let pert = doc.perturbation().unwrap();
        assert_eq!(prof.eval_c0(-0.5), 2.0);
        assert_eq!(pert.terms.len(), 1);
        let again = MediumDocument::from_parts(&prof, &pert);
        let s = serde_json::to_string(&again).unwrap();
        let doc2: MediumDocument = serde_json::from_str(&s).unwrap();
        assert_eq!(doc2.perturbation().unwrap(), pert);
    }
}
