//! Run configuration: a JSON document with a medium and a `numerics` block.

use crate::CliError;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use stratscat_core::inverse::{MarchenkoConfig, StripConfig};
use stratscat_core::media::{MediumDocument, PerturbationExpansion, StratifiedProfile};
use stratscat_core::parametrix::ParametrixConfig;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Numerics {
    pub delta_crit: f64,
    pub delta_eq: f64,
    pub delta_ant: f64,
    pub n_s: usize,
    pub n_theta: usize,
    pub n_max: usize,
    pub band_limit: usize,
    pub n_alpha: usize,
    pub residual_tol: f64,
    pub marchenko_nodes: usize,
    pub marchenko_n_x: usize,
    pub marchenko_max_condition: f64,
    /// Symbol calibration constant `(re, im)`.
    pub calibration: [f64; 2],
}

impl Default for Numerics {
    fn default() -> Self {
        let p = ParametrixConfig::default();
        let m = MarchenkoConfig::default();
        Self {
            delta_crit: p.delta_crit,
            delta_eq: 0.05,
            delta_ant: p.delta_ant,
            n_s: p.n_s,
            n_theta: p.n_theta,
            n_max: p.n_max,
            band_limit: 9,
            n_alpha: 40,
            residual_tol: 1e-3,
            marchenko_nodes: m.nodes,
            marchenko_n_x: m.n_x,
            marchenko_max_condition: m.max_condition,
            calibration: [1.0, 0.0],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Medium document (profile and optional perturbation); relative to the config file.
    pub medium: Option<PathBuf>,
    pub lambda: f64,
    pub numerics: Numerics,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self { medium: None, lambda: 2.0, numerics: Numerics::default() }
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::ConfigInvalid(msg.into())
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
                let mut c: RunConfig = serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", p.display())))?;
                if let (Some(m), Some(dir)) = (&c.medium, p.parent()) {
                    if m.is_relative() {
                        c.medium = Some(dir.join(m));
                    }
                }
                c
            }
            None => RunConfig::default(),
        };
        cfg.numerics.n_alpha = cfg.numerics.n_alpha.max(1);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let n = &self.numerics;
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(invalid(format!("lambda must be positive, got {}", self.lambda)));
        }
        for (name, d) in [("delta_crit", n.delta_crit), ("delta_eq", n.delta_eq), ("delta_ant", n.delta_ant)] {
            if !(d > 0.0 && d < 0.5) {
                return Err(invalid(format!("{name} = {d} must lie in (0, 0.5)")));
            }
        }
        for (name, v) in [("n_s", n.n_s), ("n_theta", n.n_theta), ("band_limit", n.band_limit), ("marchenko_nodes", n.marchenko_nodes)] {
            if v == 0 {
                return Err(invalid(format!("{name} must be positive")));
            }
        }
        if n.marchenko_n_x < 5 {
            return Err(invalid("marchenko_n_x must be at least 5"));
        }
        if !(n.residual_tol > 0.0) {
            return Err(invalid("residual_tol must be positive"));
        }
        Ok(())
    }

    pub fn medium_document(&self) -> Result<MediumDocument, CliError> {
        match &self.medium {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
                serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", p.display())))
            }
            None => {
                let p = StratifiedProfile::two_layer(1.0, 1.5, 1.0).expect("default profile");
                Ok(MediumDocument::from_parts(&p, &PerturbationExpansion::new(2, 10.0)))
            }
        }
    }

    pub fn profile(&self) -> Result<StratifiedProfile, CliError> {
        self.medium_document()?.profile().map_err(|e| invalid(e.to_string()))
    }

    pub fn perturbation(&self) -> Result<PerturbationExpansion, CliError> {
        self.medium_document()?.perturbation().map_err(|e| invalid(e.to_string()))
    }

    pub fn parametrix(&self) -> ParametrixConfig {
        let n = &self.numerics;
        ParametrixConfig { n_s: n.n_s, n_theta: n.n_theta, delta_ant: n.delta_ant, n_max: n.n_max, delta_crit: n.delta_crit }
    }

    pub fn strip(&self) -> StripConfig {
        let n = &self.numerics;
        StripConfig {
            lambda: self.lambda,
            band_limit: n.band_limit,
            n_alpha: n.n_alpha,
            delta_eq: n.delta_eq,
            delta_crit: n.delta_crit,
            residual_tol: n.residual_tol,
        }
    }

    pub fn marchenko(&self, x_min: f64, x_max: f64) -> MarchenkoConfig {
        let n = &self.numerics;
        MarchenkoConfig { x_min, x_max, n_x: n.marchenko_n_x, nodes: n.marchenko_nodes, max_condition: n.marchenko_max_condition }
    }
}
