//! Simulation and analysis of single-neuron action-potential magnetometry with
//! NV-diamond ensembles.
//!
//! The crate is organised as a forward model and a recovery side:
//!
//! * [`neuro`] turns an intracellular action-potential voltage into the
//!   azimuthal magnetic field of a conducting-wire axon.
//! * [`geometry`] and [`odmr`] describe how that field shifts the NV
//!   resonances and what the lock-in amplifier sees.
//! * [`sensor`] is the measurement chain: transduction, lock-in filter
//!   cascade, noise, digitisation, calibration and the analytic noise budget.
//! * [`analysis`] recovers the signal: comb filtering, trigger averaging,
//!   matched filtering, SNR accounting and the three sensitivity estimators.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`). The aliases
//! below fix the scalar to `f64`, which is what the command-line tools use.

// `!(x > 0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod constants;
pub mod error;
pub mod geometry;
pub mod neuro;
pub mod odmr;
pub mod optimize;
pub mod scalar;
pub mod sensor;
pub mod trace;

pub use error::{Error, Result};
pub use scalar::Real;
pub use trace::{TimeTrace, Unit};

pub type Constants = constants::Constants<f64>;
pub type OdmrParams = odmr::OdmrParams<f64>;
pub type NvAxes = geometry::NvAxes<f64>;
pub type BiasField = geometry::BiasField<f64>;
pub type SensingGeometry = geometry::SensingGeometry<f64>;
pub type LockInConfig = sensor::LockInConfig<f64>;
pub type NoiseBudget = sensor::NoiseBudget<f64>;
pub type Digitizer = sensor::Digitizer<f64>;
pub type SensorChain = sensor::SensorChain<f64>;
pub type AxonParams = neuro::AxonParams<f64>;
pub type ApTemplate = neuro::ApTemplate<f64>;
pub type MatchedTemplate = analysis::MatchedTemplate<f64>;
pub type SensitivityReport = analysis::SensitivityReport<f64>;
pub type CombFilter = analysis::CombFilter<f64>;
pub type Trace = TimeTrace<f64>;

pub type Trace32 = TimeTrace<f32>;
pub type OdmrParams32 = odmr::OdmrParams<f32>;
pub type AxonParams32 = neuro::AxonParams<f32>;
