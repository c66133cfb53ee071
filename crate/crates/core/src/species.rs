//! Sodium D1 constants and field-strength conversions.

use crate::constants::{
    ATOMIC_MASS_UNIT, EA0, HBAR, SPEED_OF_LIGHT, TORR, TWO_PI, VACUUM_PERMITTIVITY,
};
use crate::error::{Error, Result};

/// Two-branch (solid/liquid) vapor-pressure correlation of the form
/// `log10(P / atm) = a + b / T`.
///
/// Coefficients for sodium follow Alcock, Itkin & Horrigan,
/// Canadian Metallurgical Quarterly 23, 309 (1984).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VaporPressureModel {
    pub solid_a: f64,
    pub solid_b: f64,
    pub liquid_a: f64,
    pub liquid_b: f64,
    pub melting_point: f64,
    pub valid_min: f64,
    pub valid_max: f64,
}

impl VaporPressureModel {
    pub const SODIUM: Self = Self {
        solid_a: 5.298,
        solid_b: -5603.0,
        liquid_a: 4.704,
        liquid_b: -5377.0,
        melting_point: 370.95,
        valid_min: 298.0,
        valid_max: 700.0,
    };

    /// Saturated vapor pressure in pascal.
    pub fn pressure(&self, temperature: f64) -> Result<f64> {
        if !(self.valid_min..=self.valid_max).contains(&temperature) {
            return Err(Error::Range {
                quantity: "temperature",
                value: temperature,
                min: self.valid_min,
                max: self.valid_max,
            });
        }
        let (a, b) = if temperature < self.melting_point {
            (self.solid_a, self.solid_b)
        } else {
            (self.liquid_a, self.liquid_b)
        };
        Ok(10f64.powf(a + b / temperature) * 760.0 * TORR)
    }
}

/// Immutable constants of the alkali species driving the Λ system.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicSpecies {
    pub name: &'static str,
    /// kg
    pub mass: f64,
    /// Vacuum wavelength of the D1 line, m.
    pub d1_wavelength: f64,
    /// Excited-state decay rate Γ, rad/s.
    pub natural_linewidth: f64,
    /// Reduced D1 dipole matrix element, C·m.
    pub dipole_moment: f64,
    /// Ground hyperfine interval, rad/s.
    pub ground_splitting: f64,
    pub vapor_pressure: VaporPressureModel,
}

impl AtomicSpecies {
    /// Sodium D1 line (3²S½ → 3²P½).
    ///
    /// Values from D. A. Steck, "Sodium D Line Data". The ground splitting is
    /// the 1.7716 GHz hyperfine interval (not MHz).
    pub fn sodium_d1() -> Self {
        Self {
            name: "sodium",
            mass: 22.989_769_280_7 * ATOMIC_MASS_UNIT,
            d1_wavelength: 589.755_814_7e-9,
            natural_linewidth: TWO_PI * 9.765e6,
            dipole_moment: 2.4923 * EA0,
            ground_splitting: TWO_PI * 1.771_626_128_8e9,
            vapor_pressure: VaporPressureModel::SODIUM,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("mass", self.mass),
            ("d1_wavelength", self.d1_wavelength),
            ("natural_linewidth", self.natural_linewidth),
            ("dipole_moment", self.dipole_moment),
            ("ground_splitting", self.ground_splitting),
        ];
        for (field, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::validation(field, "must be strictly positive"));
            }
        }
        Ok(())
    }

    /// Optical wavenumber k = 2π/λ, rad/m.
    pub fn wavenumber(&self) -> f64 {
        TWO_PI / self.d1_wavelength
    }

    /// Optical angular frequency ω₀ = 2πc/λ.
    pub fn angular_frequency(&self) -> f64 {
        SPEED_OF_LIGHT * self.wavenumber()
    }

    /// Wavenumber mismatch between co-propagating pump and probe, rad/m.
    pub fn copropagating_residual_k(&self) -> f64 {
        self.ground_splitting / SPEED_OF_LIGHT
    }
}

/// Rabi frequency Ω = d·E₀/ħ of a plane wave with intensity `intensity`
/// (W/m²), where E₀ = sqrt(2I/(ε₀c)) is the field amplitude.
pub fn rabi_from_intensity(intensity: f64, dipole: f64) -> Result<f64> {
    if !(intensity >= 0.0) || !intensity.is_finite() {
        return Err(Error::Domain(format!(
            "intensity must be non-negative, got {intensity}"
        )));
    }
    let field = (2.0 * intensity / (VACUUM_PERMITTIVITY * SPEED_OF_LIGHT)).sqrt();
    Ok(dipole * field / HBAR)
}

/// Inverse of [`rabi_from_intensity`].
pub fn intensity_from_rabi(rabi: f64, dipole: f64) -> f64 {
    let field = rabi * HBAR / dipole;
    0.5 * VACUUM_PERMITTIVITY * SPEED_OF_LIGHT * field * field
}
