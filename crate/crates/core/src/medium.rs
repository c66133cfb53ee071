//! Thermal Λ medium: a [`LambdaConfig`] in a heated [`CellConfig`].

use num_complex::Complex64;

use crate::doppler::{average_with_speed, thermal_speed, transit_gamma, CellConfig, GaussHermite};
use crate::error::{Error, Result};
use crate::lambda::{check_weak_probe, susceptibility_scale, weak_probe_kernel, LambdaConfig};
use crate::species::AtomicSpecies;

type C64 = Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct MediumConfig {
    pub species: AtomicSpecies,
    pub lambda: LambdaConfig,
    pub cell: CellConfig,
    /// Multiplies the reduced D1 dipole for the unresolved hyperfine manifold.
    pub dipole_scale: f64,
    /// Two-photon Doppler wavenumber Δk, rad/m.
    pub residual_k: f64,
    pub quadrature: GaussHermite,
}

impl MediumConfig {
    /// Sodium reference cell with the given pump Rabi frequency; γ₁₂ is the
    /// transit rate plus the cell's residual dephasing.
    pub fn sodium(pump_rabi: f64, cell: CellConfig) -> Result<Self> {
        let species = AtomicSpecies::sodium_d1();
        let gamma12 = transit_gamma(&species, &cell)? + cell.residual_dephasing;
        let lambda = LambdaConfig::new(species.natural_linewidth, pump_rabi, gamma12);
        Ok(Self {
            residual_k: species.copropagating_residual_k(),
            species,
            lambda,
            cell,
            dipole_scale: 1.0,
            quadrature: GaussHermite::default(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.species.validate()?;
        self.lambda.validate()?;
        self.cell.validate()?;
        check_weak_probe(&self.lambda)?;
        if !(self.dipole_scale > 0.0 && self.dipole_scale.is_finite()) {
            return Err(Error::validation("dipole_scale", "must be > 0"));
        }
        if !(self.residual_k >= 0.0 && self.residual_k.is_finite()) {
            return Err(Error::validation("residual_k", "must be finite and >= 0"));
        }
        Ok(())
    }

    pub fn dipole(&self) -> f64 {
        self.species.dipole_moment * self.dipole_scale
    }

    pub fn number_density(&self) -> Result<f64> {
        self.cell.number_density(&self.species)
    }

    pub fn carrier_angular_frequency(&self) -> f64 {
        self.species.angular_frequency()
    }

    /// Rough half width of the Doppler-narrowed transparency window,
    /// γ₁₂ + Ω²/(4(γ₁₃ + k·u)).
    pub fn expected_eit_halfwidth(&self) -> f64 {
        let ku = self.species.wavenumber() * thermal_speed(&self.species, self.cell.temperature);
        let omega = self.lambda.pump_rabi;
        self.lambda.gamma12 + omega * omega / (4.0 * (self.lambda.gamma13() + ku))
    }

    /// Doppler-averaged susceptibility at two-photon detuning `delta`, with
    /// the configured one-photon detuning.
    pub fn chi_at(&self, delta: f64) -> Result<C64> {
        let density = self.number_density()?;
        self.chi_with_density(delta, density)
    }

    /// exp(−α(δ)·L) with n − 1 = χ/2, for point-wise evaluation.
    pub fn transmission_at(&self, delta: f64) -> Result<f64> {
        let chi = self.chi_at(delta)?;
        let omega = self.carrier_angular_frequency() + delta;
        let alpha = omega / crate::constants::SPEED_OF_LIGHT * chi.im;
        Ok((-alpha * self.cell.length).exp())
    }

    pub(crate) fn chi_with_density(&self, delta: f64, density: f64) -> Result<C64> {
        if density == 0.0 {
            return Ok(C64::from(0.0));
        }
        let scale = susceptibility_scale(density, self.dipole());
        let g13 = self.lambda.gamma13();
        let g12 = self.lambda.gamma12;
        let omega = self.lambda.pump_rabi;
        let one_photon = self.lambda.one_photon_detuning;
        let u = thermal_speed(&self.species, self.cell.temperature);
        let avg = average_with_speed(
            |kv, dkv| {
                weak_probe_kernel(g13, g12, omega, one_photon - kv, delta - dkv)
            },
            self.species.wavenumber(),
            self.residual_k,
            u,
            &self.quadrature,
        )?;
        Ok(scale * avg)
    }
}
