//! The measurement chain and its analytic noise budget.

pub mod budget;
pub mod calibration;
pub mod chain;
pub mod lockin;
pub mod servo;

pub use budget::{
    diamond_temperature_rise, fit_noise_curve, fractional_lif_change, modulation_penalty,
    photodiode_noise_model, ramsey_sensitivity, shot_noise_sensitivity_cwesr,
    spin_projection_limit, BudgetChain, NoiseBudget, NoiseCurveFit, Penalties, PhotodiodeModel,
};
pub use calibration::{calibration_constant, coil_field, volts_to_field};
pub use chain::{
    phase_factor, resample, synthesize_measurement, Digitizer, SensorChain, SlopeSign,
};
pub use lockin::{
    analytic_cutoff, analytic_enbw, cascade_response, filter_cascade, rise_time_10_90,
    CascadeResponse, Filtered, LockInConfig,
};
pub use servo::{drift_servo, DEFAULT_SERVO_RATE};
