//! Phase-conjugate reflection read out from the ground-state coherence grating.
//!
//! The backward pump Ω_b (on |1⟩↔|3⟩) and the probe Ω′ (on |2⟩↔|3⟩) write a
//! grating in ρ₁₂; the forward pump reads it out. In the dark-state limit
//! (δ = 0, γ₁₂ → 0) the population sits in (Ω′|1⟩ − Ω_b|2⟩)/√(Ω_b² + Ω′²),
//! so |ρ₁₂| = Ω_b·Ω′/(Ω_b² + Ω′²), largest (1/2) for balanced drives.
//!
//! The reflectivity is a thin-medium, undepleted-pump lineshape
//! R(δ) ∝ |ρ₁₂(δ)·Ω_f|², normalized to a calibrated peak value.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lambda::{steady_state, LambdaConfig};
use crate::spectra::RealSpectrum;

#[derive(Debug, Clone, PartialEq)]
pub struct FwmConfig {
    /// Ω_f, rad/s.
    pub forward_pump_rabi: f64,
    /// Ω_b, rad/s.
    pub backward_pump_rabi: f64,
    /// Ω′, rad/s.
    pub probe_rabi: f64,
    /// rad/s
    pub two_photon_detuning_grid: Vec<f64>,
    /// rad/s
    pub gamma12: f64,
    /// Γ, rad/s.
    pub excited_decay: f64,
    /// Δ, rad/s.
    pub one_photon_detuning: f64,
    /// Peak power reflectivity the lineshape is scaled to.
    pub peak_reflectivity_calibration: f64,
}

impl FwmConfig {
    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("forward_pump_rabi", self.forward_pump_rabi),
            ("backward_pump_rabi", self.backward_pump_rabi),
            ("probe_rabi", self.probe_rabi),
            ("gamma12", self.gamma12),
            ("excited_decay", self.excited_decay),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::validation(field, "must be finite and >= 0"));
            }
        }
        if !self.one_photon_detuning.is_finite() {
            return Err(Error::validation("one_photon_detuning", "must be finite"));
        }
        if !(0.0..1.0).contains(&self.peak_reflectivity_calibration) {
            return Err(Error::validation(
                "peak_reflectivity_calibration",
                "must lie in [0, 1)",
            ));
        }
        // Uniformity is checked by the spectrum constructor.
        RealSpectrum::new(
            self.two_photon_detuning_grid.clone(),
            vec![0.0; self.two_photon_detuning_grid.len()],
        )?;
        Ok(())
    }

    fn lambda_at(&self, delta: f64) -> LambdaConfig {
        LambdaConfig {
            pump_rabi: self.backward_pump_rabi,
            probe_rabi: self.probe_rabi,
            one_photon_detuning: self.one_photon_detuning,
            two_photon_detuning: delta,
            ..LambdaConfig::new(self.excited_decay, self.backward_pump_rabi, self.gamma12)
        }
    }
}

/// ρ₁₂(δ) from the full steady state with Ω_b and Ω′ as the Λ pair.
pub fn grating_amplitude(cfg: &FwmConfig, delta: f64) -> Result<Complex64> {
    if cfg.backward_pump_rabi == 0.0 && cfg.probe_rabi == 0.0 {
        return Err(Error::DegenerateModel(
            "grating needs a backward pump or a probe field".into(),
        ));
    }
    Ok(steady_state(&cfg.lambda_at(delta))?.ground_coherence())
}

/// Dark-state value Ω_b·Ω′/(Ω_b² + Ω′²).
pub fn dark_state_coherence(backward_pump_rabi: f64, probe_rabi: f64) -> f64 {
    backward_pump_rabi * probe_rabi / (backward_pump_rabi.powi(2) + probe_rabi.powi(2))
}

pub fn pc_reflectivity_spectrum(cfg: &FwmConfig) -> Result<RealSpectrum> {
    cfg.validate()?;
    let readout = cfg
        .two_photon_detuning_grid
        .par_iter()
        .map(|&d| Ok((grating_amplitude(cfg, d)? * cfg.forward_pump_rabi).norm_sqr()))
        .collect::<Result<Vec<f64>>>()?;
    let peak = readout.iter().copied().fold(0.0, f64::max);
    if !(peak > 0.0) {
        return Err(Error::Normalization("grating read-out is zero everywhere".into()));
    }
    RealSpectrum::new(
        cfg.two_photon_detuning_grid.clone(),
        readout
            .iter()
            .map(|v| cfg.peak_reflectivity_calibration * v / peak)
            .collect(),
    )
}
