//! Recovery of hyperspectral datacubes from separable compressive
//! measurements `Y = Φ_s X Φ_pᵀ + N`.
//!
//! Two solvers are provided: an accelerated proximal-gradient solver for
//! basis-pursuit denoising with a Haar ⊗ spectral basis, and an
//! accelerated proximal-subgradient solver for a hybrid objective that
//! combines per-band total variation with spectral ℓ1 sparsity.
//!
//! Everything is generic over [`Real`] (`f32` or `f64`); the aliases at the
//! crate root fix the scalar to `f64`, which is what the solvers are tuned
//! for.

pub mod datacube;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod regularizers;
pub mod rng;
pub mod scalar;
pub mod sensing;
pub mod solvers;
pub mod transforms;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Datacube = datacube::Datacube<f64>;
pub type Datacube32 = datacube::Datacube<f32>;
pub type SpectralBasis = transforms::SpectralBasis<f64>;
pub type SpectralBasis32 = transforms::SpectralBasis<f32>;
pub type SpatialProjector = sensing::SpatialProjector<f64>;
pub type SpectralProjector = sensing::SpectralProjector<f64>;
pub type Measurements = sensing::Measurements<f64>;
pub type Measurements32 = sensing::Measurements<f32>;
pub type SolverConfig = solvers::SolverConfig<f64>;
pub type SolverConfig32 = solvers::SolverConfig<f32>;
pub type Trace = solvers::Trace<f64>;
pub type ExperimentSpec = harness::ExperimentSpec<f64>;
pub type Phantom = harness::Phantom<f64>;
