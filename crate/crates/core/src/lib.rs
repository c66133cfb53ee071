//! Slow-light simulation for a Doppler-broadened sodium Λ system.
//!
//! The crate models the full measurement chain of an EIT slow-light
//! experiment: the three-level atomic response, thermal averaging,
//! frequency-domain spectra and their calibration, time-domain pulse
//! propagation, homodyne and Sagnac interferometry, and the four-wave-mixing
//! phase-conjugate reflection that acts as a parasitic field in a Sagnac loop.
//!
//! Unit conventions: all rates and detunings are angular (rad/s), times in
//! seconds, lengths in metres. Configuration files accept cyclic units such
//! as `MHz` and convert at parse time.

pub mod constants;
pub mod doppler;
pub mod error;
pub mod fwm;
pub mod gyro;
pub mod homodyne;
pub mod lambda;
pub mod medium;
pub mod optimize;
pub mod output;
pub mod pipeline;
pub mod pulse;
pub mod scenario;
pub mod species;
pub mod spectra;
pub mod units;

pub use num_complex::Complex64;

pub use doppler::{
    doppler_average, thermal_speed, transit_gamma, vapor_number_density, CellConfig, GaussHermite,
};
pub use error::{Error, Result};
pub use fwm::{grating_amplitude, pc_reflectivity_spectrum, FwmConfig};
pub use gyro::{pc_bias, sagnac_phase, GyroScenario, PcBias};
pub use homodyne::{homodyne_trace, index_variation_from_trace, HomodyneConfig, HomodyneTrace};
pub use lambda::{steady_state, weak_probe_chi, DensityMatrixState, LambdaConfig};
pub use medium::MediumConfig;
pub use pulse::{gaussian_pulse, measure_delay, propagate, spreading_metrics, Pulse};
pub use scenario::{load_scenario, Scenario};
pub use species::{rabi_from_intensity, AtomicSpecies};
pub use spectra::{
    calibrate::{calibrate, CalibrationTargets, ParameterBounds},
    dispersion_slope, eit_fwhm, group_index, lock_in_signal, medium_response,
    second_order_dispersion, transmission_spectrum, ComplexSpectrum, MediumResponse, RealSpectrum,
};
pub use pipeline::{run, Report, RunOptions, Stages};
