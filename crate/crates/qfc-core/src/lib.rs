//! Simulation of quantum frequency conversion by four-wave-mixing Bragg
//! scattering in optical fiber, including stimulated and spontaneous Raman
//! scattering.
//!
//! The library computes Green functions for the signal/idler pair driven by
//! two strong classical pumps — in closed form for continuous-wave pumps and
//! numerically with a symmetric three-operator split-step scheme for pulsed
//! pumps — together with converted-photon fluxes, Schmidt decompositions and
//! second-order correlation statistics of the converted light.
//!
//! Units are fixed globally: time in ps, angular frequency in rad/ps,
//! distance in m, power in W, nonlinear coefficients in (W·m)⁻¹ and
//! temperature in K.

pub mod cw;
pub mod error;
pub mod green;
pub mod grid;
pub mod pump;
pub mod raman;
pub mod schmidt;
pub mod stats;

pub use cw::{CwGreens, FiberScenario};
pub use error::CoreError;
pub use green::{GreenResult, PropagationConfig};
pub use grid::{FftEngine, FieldDomain, GreenMatrix, SampledField, TimeGrid};
pub use pump::PumpPair;
pub use raman::{OscillatorTable, PolarizationConfig, RamanResponse};
pub use schmidt::SchmidtDecomposition;
pub use stats::{CorrelationResult, SpectralFilter};

/// ħ/k_B in K·ps: ħω/(k_B T) = `HBAR_OVER_KB` · ω[rad/ps] / T[K].
pub const HBAR_OVER_KB: f64 = 7.6382326;

/// Speed of light in m/ps.
pub const C_M_PER_PS: f64 = 2.99792458e-4;
