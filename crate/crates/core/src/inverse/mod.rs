//! Recovery of the perturbation expansion from scattering-symbol data:
//! weighted geodesic ray transforms on S², order reduction, Funk inversion
//! of even functions, the `z_n/|z|` device for odd ones, layer stripping,
//! and Marchenko inversion of the 1D background.

pub mod funk;
pub mod marchenko;
pub mod rays;
pub mod strip;

pub use funk::{funk_invert_even, recover_odd_part, FunkOperator};
pub use marchenko::{marchenko_invert_1d, recover_c0_from_coefficients, schrodinger_reflection, BoundState, MarchenkoConfig, Potential1D};
pub use rays::{reduce_order, weighted_ray_integral, CircleFamilies, RayIntegralData};
pub use strip::{
    calibrate_symbol_constant, extract_leading_symbol, gamma_from_w, layer_strip, synthesize_symbols, w_from_gammas, AngularLayer,
    ScatteringSymbolData, StripConfig, StripReport, SymbolCalibration, SymbolMode,
};

use crate::parametrix::ParametrixError;
use crate::spectral1d::SpectralError;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum InverseError {
    #[error("family resolution too low: {samples} samples per circle, need more than {needed}")]
    InsufficientFamilyResolution { samples: usize, needed: usize },
    #[error("Funk multiplier for degree {l} is degenerate ({value:e})")]
    DegenerateMultiplier { l: usize, value: f64 },
    #[error("prefactor vanishes on too many samples of circle {circle}")]
    VanishingCoefficient { circle: usize },
    #[error("weight exponent {0} is not valid here")]
    InvalidOrder(usize),
    #[error("no usable samples outside the equator band")]
    EquatorBand,
    #[error("Marchenko system is ill conditioned (condition estimate {0:e})")]
    IllPosedKernel(f64),
    #[error("steplike backgrounds (c_plus != c_minus) are not supported by the 1D inversion")]
    SteplikeUnsupported,
    #[error("mode {0} requires c_plus = c_minus")]
    ModeRequiresEqualSpeeds(&'static str),
    #[error("residual symbol at order {order} is {value:e}, above tolerance")]
    ResidualTooLarge { order: usize, value: f64 },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Parametrix(#[from] ParametrixError),
}
