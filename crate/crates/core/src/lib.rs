//! Numerical core for fixed-energy scattering on perturbed stratified media.
//!
//! * [`media`]: background profiles, perturbation expansions, effective potential.
//! * [`spectral1d`]: plane-wave solutions with reflection/transmission
//!   coefficients, guided modes and thresholds.
//! * [`geometry`]: geodesic coordinates on the sphere and the singularity maps.
//! * [`parametrix`]: order-by-order transport construction of the approximate
//!   Poisson operator.
//! * [`inverse`]: weighted ray transforms, Funk inversion, layer stripping and
//!   1D Marchenko inversion.

pub mod geometry;
pub mod inverse;
pub mod media;
pub mod parametrix;
pub mod spectral1d;
pub mod quadrature;
pub mod sphharm;
