//! Pseudo-spectral laboratory for Oldroyd-B-type complex fluid models on
//! periodic domains: Fourier-multiplier calculus, steady Stokes inversion,
//! the closed 2D (a, b, c, ρ) system, a Lagrangian solution oracle, the 1D
//! Hilbert-coupled blow-up model, the truncated cone-invariant scalar model,
//! the strain-responsive regularized system, and the diagnostics layer the
//! experiments report through.

pub mod cone;
pub mod diagnostics;
pub mod error;
pub mod field;
pub mod grid;
pub mod lagrangian;
pub mod oldroyd;
pub mod oned;
pub mod regularized;
pub mod rng;
pub mod snapshot;
pub mod stokes;
pub mod symbol;

pub use error::CoreError;
pub use field::SpectralField;
pub use grid::Grid;
pub use rng::CounterRng;
pub use symbol::MultiplierSymbol;

pub use diagnostics::{DiagnosticsRecord, NormBundle, SmallnessReport};
pub use lagrangian::{ParticleSet, VelocitySampler};
pub use oldroyd::{ModelParams, OldroydState, SolverConfig};
pub use stokes::{StressField2D, VelocityField2D};

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, CoreError>;
