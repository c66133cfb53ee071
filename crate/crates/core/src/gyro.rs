//! Sagnac loop with a slow-light medium and a parasitic phase-conjugate field.
//!
//! Fringe model at the detection port, as a function of a scanned bias phase φ:
//!
//! ```text
//! I(φ) = |e^{i(φ + Δφ)} + 1 + r·e^{iθ}|²
//! ```
//!
//! Writing 1 + r·e^{iθ} = |B|e^{iβ} gives I = 1 + |B|² + 2|B| cos(φ + Δφ − β),
//! so a fringe fit recovers Δφ − β and the bias is exactly −arg(1 + r·e^{iθ}),
//! independent of the true rotation phase. For small r this is −r·sin θ, and
//! the largest bias over θ is arcsin r.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};

use crate::constants::SPEED_OF_LIGHT;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GyroScenario {
    /// m²
    pub loop_area: f64,
    /// rad/s
    pub rotation_rate: f64,
    /// m
    pub wavelength: f64,
    pub group_index: f64,
    /// Amplitude reflectivity r, the square root of the power reflectivity.
    pub pc_amplitude_reflectivity: f64,
    /// θ, rad.
    pub parasitic_phase: f64,
}

impl GyroScenario {
    pub fn validate(&self) -> Result<()> {
        if !(self.loop_area > 0.0 && self.loop_area.is_finite()) {
            return Err(Error::validation("loop_area", "must be > 0"));
        }
        if !self.rotation_rate.is_finite() {
            return Err(Error::validation("rotation_rate", "must be finite"));
        }
        if !(self.wavelength > 0.0) {
            return Err(Error::validation("wavelength", "must be > 0"));
        }
        if !(self.group_index >= 1.0 && self.group_index.is_finite()) {
            return Err(Error::validation("group_index", "must be >= 1"));
        }
        if !(0.0..1.0).contains(&self.pc_amplitude_reflectivity) {
            return Err(Error::validation("pc_amplitude_reflectivity", "must lie in [0, 1)"));
        }
        if !self.parasitic_phase.is_finite() {
            return Err(Error::validation("parasitic_phase", "must be finite"));
        }
        Ok(())
    }

    /// ∂Δφ/∂Ω_rot, s.
    pub fn scale_factor(&self) -> f64 {
        self.group_index * 8.0 * PI * self.loop_area / (self.wavelength * SPEED_OF_LIGHT)
    }

    /// Detected intensity at scan phase `phi`.
    pub fn fringe(&self, phi: f64, true_phase: f64) -> f64 {
        let r = self.pc_amplitude_reflectivity;
        let re = (phi + true_phase).cos() + 1.0 + r * self.parasitic_phase.cos();
        let im = (phi + true_phase).sin() + r * self.parasitic_phase.sin();
        re * re + im * im
    }
}

/// Δφ = n_g·8πAΩ/(λc).
pub fn sagnac_phase(scenario: &GyroScenario) -> Result<f64> {
    scenario.validate()?;
    Ok(scenario.scale_factor() * scenario.rotation_rate)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcBias {
    /// Recovered minus true Sagnac phase, rad.
    pub phase_bias: f64,
    /// Equivalent spurious rotation rate, rad/s.
    pub rotation_bias: f64,
}

/// Fits offset + contrast·cos(φ + ψ) to `samples` uniformly spaced fringe
/// points and returns ψ.
pub fn fit_fringe_phase(samples: &[(f64, f64)]) -> Result<f64> {
    if samples.len() < 3 {
        return Err(Error::Fit("need at least three fringe samples".into()));
    }
    let mut normal = Matrix3::<f64>::zeros();
    let mut rhs = Vector3::<f64>::zeros();
    for &(phi, y) in samples {
        let row = Vector3::new(1.0, phi.cos(), phi.sin());
        normal += row * row.transpose();
        rhs += row * y;
    }
    let coeffs = normal
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Fit("singular fringe design matrix".into()))?;
    let (a, b) = (coeffs[1], coeffs[2]);
    // a·cos φ + b·sin φ = C·cos(φ + ψ) with C cos ψ = a, −C sin ψ = b.
    let contrast = a.hypot(b);
    let offset = coeffs[0].abs().max(f64::MIN_POSITIVE);
    if !(contrast > 1e-9 * offset) {
        return Err(Error::Fit("fringe contrast vanished".into()));
    }
    Ok((-b).atan2(a))
}

fn wrap(phase: f64) -> f64 {
    let w = (phase + PI).rem_euclid(2.0 * PI) - PI;
    if w <= -PI {
        w + 2.0 * PI
    } else {
        w
    }
}

/// Bias of the fitted Sagnac phase caused by the parasitic field.
pub fn pc_bias(scenario: &GyroScenario, fringe_probe_points: usize) -> Result<PcBias> {
    scenario.validate()?;
    if scenario.pc_amplitude_reflectivity >= 0.5 {
        return Err(Error::validation(
            "pc_amplitude_reflectivity",
            "must be < 0.5 for the bias model",
        ));
    }
    let true_phase = sagnac_phase(scenario)?;
    let samples: Vec<(f64, f64)> = (0..fringe_probe_points)
        .map(|i| {
            let phi = 2.0 * PI * i as f64 / fringe_probe_points as f64;
            (phi, scenario.fringe(phi, true_phase))
        })
        .collect();
    let recovered = fit_fringe_phase(&samples)?;
    let phase_bias = if scenario.pc_amplitude_reflectivity == 0.0 {
        0.0
    } else {
        wrap(recovered - true_phase)
    };
    Ok(PcBias {
        phase_bias,
        rotation_bias: phase_bias / scenario.scale_factor(),
    })
}

/// Closed form −arg(1 + r·e^{iθ}) of the phase bias.
pub fn analytic_phase_bias(scenario: &GyroScenario) -> f64 {
    let r = scenario.pc_amplitude_reflectivity;
    let th = scenario.parasitic_phase;
    -(r * th.sin()).atan2(1.0 + r * th.cos())
}

/// Bias over a sweep of parasitic phases.
pub fn bias_versus_parasitic_phase(
    scenario: &GyroScenario,
    phases: &[f64],
    fringe_probe_points: usize,
) -> Result<Vec<(f64, PcBias)>> {
    phases
        .iter()
        .map(|&theta| {
            let s = GyroScenario {
                parasitic_phase: theta,
                ..*scenario
            };
            Ok((theta, pc_bias(&s, fringe_probe_points)?))
        })
        .collect()
}
