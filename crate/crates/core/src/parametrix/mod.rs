//! Order-by-order construction of the approximate Poisson operator.
//!
//! Three far-field branches carry their own carrier exponential and an
//! amplitude grid on the sphere: the incident branch `I` about `ω`, the
//! reflected branch `R` about `(ω̄, -ω_n)` and the transmitted branch `T`
//! about `(c₋ω̄/c₊, √(1 - c₋²|ω̄|²/c₊²))`. They are tied together through
//! the strip `|y| < y_M`, where the ansatz is `e^{iλx·ω̄/c₊} b_M(x/|x|, y)`.

pub mod assemble;
pub mod channel;
pub mod evaluate;
pub mod grid;
pub mod middle;
pub mod operator;
pub mod symbol;
pub mod transport;

pub use assemble::{assemble_parametrix, BranchRecord, BranchTag, ParametrixConfig, PiecewiseParametrix};
pub use symbol::{antipodal_symbol, SymbolSample};
pub use evaluate::{residual_decay_check, DecayFit};
pub use channel::{mode_channel_decompose, mode_channel_solve, ModeDecomposition};
pub use middle::{
    c1_correction, evanescent_lower_solve, match_layers, middle_bvp_solve, BvpSolution, C1Correction,
    MatchingConstants, MatchingInput,
};

use crate::media::MediaError;
use crate::spectral1d::SpectralError;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum ParametrixError {
    #[error("amplitude order {0} is not valid here")]
    InvalidOrder(usize),
    #[error("point lies within the excluded disk around a singular direction")]
    AntipodeProximity,
    #[error("boundary system is singular (|det| = {0:e})")]
    SingularBoundarySystem(f64),
    #[error("source is not orthogonal to the mode (overlap {0:e})")]
    NonOrthogonalSource(f64),
    #[error("requested order {requested} exceeds N_max = {max}")]
    GridResolutionExceeded { requested: usize, max: usize },
    #[error("direction omega_n = {0} lies in an excluded band")]
    ExcludedDirection(f64),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Media(#[from] MediaError),
}
