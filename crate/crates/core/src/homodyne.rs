//! Mach-Zehnder homodyne readout of the probe phase shift.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::spectra::{MediumResponse, RealSpectrum};

/// Phase magnitude above which the linear small-phase reading is flagged.
pub const SMALL_PHASE_LIMIT: f64 = 0.1;
/// Probe amplitudes below this fraction of the maximum are masked on inversion.
pub const AMPLITUDE_MASK: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct HomodyneConfig {
    /// φ_ref, rad.
    pub reference_phase: f64,
    pub reference_amplitude: f64,
    /// |E_p(δ)| after the cell, on the response grid.
    pub probe_amplitude: RealSpectrum,
    /// m
    pub length: f64,
    /// m
    pub wavelength: f64,
}

impl HomodyneConfig {
    /// Probe amplitude `incident·exp(−α L/2)` taken from `resp`, wavelength
    /// from its carrier.
    pub fn from_response(
        resp: &MediumResponse,
        length: f64,
        incident_amplitude: f64,
        reference_amplitude: f64,
        reference_phase: f64,
    ) -> Result<Self> {
        let probe_amplitude = RealSpectrum::new(
            resp.detunings().to_vec(),
            resp.absorption_coeff
                .iter()
                .map(|a| incident_amplitude * (-0.5 * a * length).exp())
                .collect(),
        )?;
        let cfg = Self {
            reference_phase,
            reference_amplitude,
            probe_amplitude,
            length,
            wavelength: 2.0 * PI * crate::constants::SPEED_OF_LIGHT
                / resp.carrier_angular_frequency,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.reference_amplitude >= 0.0) {
            return Err(Error::validation("reference_amplitude", "must be >= 0"));
        }
        if self.probe_amplitude.values().iter().any(|&a| a < 0.0) {
            return Err(Error::validation("probe_amplitude", "must be >= 0"));
        }
        if !(self.length > 0.0) {
            return Err(Error::validation("length", "must be > 0"));
        }
        if !(self.wavelength > 0.0) {
            return Err(Error::validation("wavelength", "must be > 0"));
        }
        if !self.reference_phase.is_finite() {
            return Err(Error::validation("reference_phase", "must be finite"));
        }
        Ok(())
    }

    fn phase_per_index(&self) -> f64 {
        2.0 * PI / self.wavelength * self.length
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HomodyneTrace {
    /// i_D(δ) in units of the field amplitudes squared.
    pub signal: RealSpectrum,
    /// max |Δφ| over the grid, rad.
    pub max_phase: f64,
    /// True when max |Δφ| exceeds [`SMALL_PHASE_LIMIT`].
    pub beyond_small_phase: bool,
}

/// i_D = 2|E_p||E_ref| cos(Δφ + φ_ref) with Δφ = (2π/λ) Re(n − 1) L.
pub fn homodyne_trace(resp: &MediumResponse, cfg: &HomodyneConfig) -> Result<HomodyneTrace> {
    cfg.validate()?;
    if cfg.probe_amplitude.detunings() != resp.detunings() {
        return Err(Error::Shape("probe amplitude grid differs from the response grid".into()));
    }
    let scale = cfg.phase_per_index();
    let mut max_phase: f64 = 0.0;
    let values = resp
        .index_minus_one
        .values()
        .iter()
        .zip(cfg.probe_amplitude.values())
        .map(|(n1, &ep)| {
            let phase = scale * n1.re;
            max_phase = max_phase.max(phase.abs());
            2.0 * ep * cfg.reference_amplitude * (phase + cfg.reference_phase).cos()
        })
        .collect();
    Ok(HomodyneTrace {
        signal: RealSpectrum::new(resp.detunings().to_vec(), values)?,
        max_phase,
        beyond_small_phase: max_phase > SMALL_PHASE_LIMIT,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexVariation {
    /// Re(n − 1); zero where masked.
    pub delta_n: RealSpectrum,
    /// False where |E_p| is too small or the trace exceeds the fringe amplitude.
    pub valid: Vec<bool>,
}

/// Linear small-phase reading Δn = −i_D/(2|E_p||E_ref|)·λ/(2πL).
pub fn index_variation_from_trace(trace: &RealSpectrum, cfg: &HomodyneConfig) -> Result<IndexVariation> {
    invert(trace, cfg, |x| x)
}

/// Exact inversion Δφ = arcsin(−i_D/(2|E_p||E_ref|)), valid for |Δφ| < π/2.
/// Agrees with [`index_variation_from_trace`] to O(Δφ³).
pub fn index_variation_exact(trace: &RealSpectrum, cfg: &HomodyneConfig) -> Result<IndexVariation> {
    invert(trace, cfg, f64::asin)
}

fn invert(
    trace: &RealSpectrum,
    cfg: &HomodyneConfig,
    phase_of: impl Fn(f64) -> f64,
) -> Result<IndexVariation> {
    cfg.validate()?;
    if (cfg.reference_phase - FRAC_PI_2).abs() > 1e-9 {
        return Err(Error::Domain(
            "index inversion needs the reference phase set to π/2".into(),
        ));
    }
    if trace.detunings() != cfg.probe_amplitude.detunings() {
        return Err(Error::Shape("trace grid differs from the probe amplitude grid".into()));
    }
    let floor = AMPLITUDE_MASK * cfg.probe_amplitude.max();
    let scale = cfg.phase_per_index();
    let mut valid = Vec::with_capacity(trace.len());
    let values = trace
        .values()
        .iter()
        .zip(cfg.probe_amplitude.values())
        .map(|(&i_d, &ep)| {
            let fringe = 2.0 * ep * cfg.reference_amplitude;
            let ratio = -i_d / fringe;
            let ok = ep > floor && fringe > 0.0 && ratio.abs() <= 1.0;
            valid.push(ok);
            if ok {
                phase_of(ratio) / scale
            } else {
                0.0
            }
        })
        .collect();
    Ok(IndexVariation {
        delta_n: RealSpectrum::new(trace.detunings().to_vec(), values)?,
        valid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{symmetric_grid, ComplexSpectrum};
    use num_complex::Complex64;

    const OMEGA0: f64 = 3.194e15;

    fn dispersive_response(scale: f64) -> MediumResponse {
        let grid = symmetric_grid(6e7, 1201);
        let w = 3e6;
        let index = ComplexSpectrum::from_fn(grid, |d| {
            Complex64::new(scale * d * w / (d * d + w * w), 1e-9)
        })
        .unwrap();
        MediumResponse::from_index(index, OMEGA0).unwrap()
    }

    #[test]
    fn vacuum_quadrature_trace_is_zero() {
        let resp = MediumResponse::vacuum(symmetric_grid(1e7, 101), OMEGA0).unwrap();
        let cfg = HomodyneConfig::from_response(&resp, 0.1, 1.0, 0.8, FRAC_PI_2).unwrap();
        let t = homodyne_trace(&resp, &cfg).unwrap();
        assert!(t.signal.values().iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn vacuum_in_phase_trace_is_constant() {
        let resp = MediumResponse::vacuum(symmetric_grid(1e7, 101), OMEGA0).unwrap();
        let cfg = HomodyneConfig::from_response(&resp, 0.1, 0.5, 0.8, 0.0).unwrap();
        let t = homodyne_trace(&resp, &cfg).unwrap();
        assert!(t.signal.values().iter().all(|&v| (v - 0.8).abs() < 1e-15));
    }

    #[test]
    fn zero_trace_gives_zero_index() {
        let resp = dispersive_response(1e-8);
        let cfg = HomodyneConfig::from_response(&resp, 0.1, 1.0, 1.0, FRAC_PI_2).unwrap();
        let zero = RealSpectrum::new(resp.detunings().to_vec(), vec![0.0; resp.detunings().len()])
            .unwrap();
        let inv = index_variation_from_trace(&zero, &cfg).unwrap();
        assert!(inv.delta_n.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn small_phase_round_trip() {
        let resp = dispersive_response(1e-9);
        let cfg = HomodyneConfig::from_response(&resp, 0.1, 1.0, 1.0, FRAC_PI_2).unwrap();
        let trace = homodyne_trace(&resp, &cfg).unwrap();
        assert!(!trace.beyond_small_phase);
        let inv = index_variation_from_trace(&trace.signal, &cfg).unwrap();
        for ((n1, &got), &ok) in resp
            .index_minus_one
            .values()
            .iter()
            .zip(inv.delta_n.values())
            .zip(&inv.valid)
        {
            assert!(ok);
            assert!((got - n1.re).abs() <= 0.01 * n1.re.abs() + 1e-20);
        }
    }

    #[test]
    fn large_phase_is_flagged_and_exact_inversion_recovers_it() {
        let resp = dispersive_response(1e-6);
        let cfg = HomodyneConfig::from_response(&resp, 0.1, 1.0, 1.0, FRAC_PI_2).unwrap();
        let trace = homodyne_trace(&resp, &cfg).unwrap();
        assert!(trace.beyond_small_phase && trace.max_phase < FRAC_PI_2);
        let inv = index_variation_exact(&trace.signal, &cfg).unwrap();
        for (n1, &got) in resp.index_minus_one.values().iter().zip(inv.delta_n.values()) {
            assert!((got - n1.re).abs() <= 1e-9 * n1.re.abs() + 1e-20);
        }
    }

    #[test]
    fn weak_probe_points_are_masked() {
        let resp = dispersive_response(1e-9);
        let mut cfg = HomodyneConfig::from_response(&resp, 0.1, 1.0, 1.0, FRAC_PI_2).unwrap();
        let mut amp = cfg.probe_amplitude.values().to_vec();
        amp[10] = 1e-4;
        cfg.probe_amplitude = RealSpectrum::new(resp.detunings().to_vec(), amp).unwrap();
        let trace = homodyne_trace(&resp, &cfg).unwrap();
        let inv = index_variation_from_trace(&trace.signal, &cfg).unwrap();
        assert!(!inv.valid[10] && inv.valid[11]);
    }
}
