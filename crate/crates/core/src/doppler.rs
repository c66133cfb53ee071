//! Thermal vapor: number density, transit broadening and Maxwell-Boltzmann
//! velocity averaging.

use num_complex::Complex64;

use crate::constants::BOLTZMANN;
use crate::error::{Error, Result};
use crate::species::AtomicSpecies;

type C64 = Complex64;

/// Vapor cell and beam geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellConfig {
    /// m
    pub length: f64,
    /// K
    pub temperature: f64,
    /// 1/e intensity radius, m.
    pub beam_waist: f64,
    /// Extra ground dephasing from residual magnetic fields, rad/s.
    pub residual_dephasing: f64,
    /// Replaces the vapor-pressure density when set, m⁻³.
    pub density_override: Option<f64>,
}

impl CellConfig {
    /// 10 cm cell at 100 °C with a 100 μm waist.
    pub fn sodium_reference() -> Self {
        Self {
            length: 0.1,
            temperature: 373.15,
            beam_waist: 100e-6,
            residual_dephasing: 0.0,
            density_override: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(Error::validation("length", "must be > 0"));
        }
        if !(self.temperature > 273.0 && self.temperature.is_finite()) {
            return Err(Error::validation("temperature", "must be > 273 K"));
        }
        if !(self.beam_waist > 0.0) {
            return Err(Error::validation("beam_waist", "must be > 0"));
        }
        if !(self.residual_dephasing >= 0.0 && self.residual_dephasing.is_finite()) {
            return Err(Error::validation(
                "residual_dephasing",
                "must be finite and non-negative",
            ));
        }
        if let Some(n) = self.density_override {
            if !(n >= 0.0 && n.is_finite()) {
                return Err(Error::validation("density", "must be finite and non-negative"));
            }
        }
        Ok(())
    }

    /// Number density, honouring the override.
    pub fn number_density(&self, species: &AtomicSpecies) -> Result<f64> {
        match self.density_override {
            Some(n) => Ok(n),
            None => vapor_number_density(species, self.temperature),
        }
    }
}

/// Saturated vapor number density P(T)/(k_B T), m⁻³.
pub fn vapor_number_density(species: &AtomicSpecies, temperature: f64) -> Result<f64> {
    let p = species.vapor_pressure.pressure(temperature)?;
    Ok(p / (BOLTZMANN * temperature))
}

/// Most probable speed sqrt(2 k_B T / m).
pub fn thermal_speed(species: &AtomicSpecies, temperature: f64) -> f64 {
    (2.0 * BOLTZMANN * temperature / species.mass).sqrt()
}

/// Transit-time dephasing ū/(2w) with ū the most probable speed.
pub fn transit_gamma(species: &AtomicSpecies, cell: &CellConfig) -> Result<f64> {
    if !(cell.beam_waist > 0.0) {
        return Err(Error::validation("beam_waist", "must be > 0"));
    }
    Ok(thermal_speed(species, cell.temperature) / (2.0 * cell.beam_waist))
}

/// Doppler FWHM of the D1 line in Hz, (2/λ)·sqrt(2 ln2 k_B T/m).
pub fn doppler_fwhm_hz(species: &AtomicSpecies, temperature: f64) -> f64 {
    2.0 / species.d1_wavelength
        * (2.0 * std::f64::consts::LN_2 * BOLTZMANN * temperature / species.mass).sqrt()
}

/// Gauss-Hermite rule for ∫ e^{-x²} f(x) dx, optionally evaluated on the
/// contour x − i·`contour_shift`.
///
/// Atomic susceptibilities have poles a natural linewidth away from the real
/// velocity axis, far narrower than the thermal width, so nodes on the real
/// axis converge slowly. A causal response is analytic for detunings in the
/// upper half plane, which lets the contour move to Im v < 0 where the
/// integrand is smooth on the thermal scale.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    contour_shift: f64,
}

impl Default for GaussHermite {
    fn default() -> Self {
        Self::new(64)
    }
}

impl GaussHermite {
    pub const DEFAULT_SHIFT: f64 = 1.5;

    pub fn new(order: usize) -> Self {
        Self::with_shift(order, Self::DEFAULT_SHIFT)
    }

    /// `contour_shift` in units of the thermal speed; zero gives the plain
    /// real-axis rule.
    pub fn with_shift(order: usize, contour_shift: f64) -> Self {
        assert!(order >= 2, "Gauss-Hermite needs at least two nodes");
        let (nodes, weights) = hermite_nodes(order);
        Self {
            nodes,
            weights,
            contour_shift,
        }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn contour_shift(&self) -> f64 {
        self.contour_shift
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Sample points (scaled velocities on the contour) and the matching
    /// normalized weights, such that Σ wᵢ f(zᵢ) ≈ π^{-1/2} ∫ e^{-x²} f(x) dx.
    pub fn contour(&self) -> impl Iterator<Item = (C64, C64)> + '_ {
        let s = self.contour_shift;
        let norm = (s * s).exp() / std::f64::consts::PI.sqrt();
        self.nodes.iter().zip(&self.weights).map(move |(&x, &w)| {
            let z = C64::new(x, -s);
            let phase = C64::from_polar(1.0, 2.0 * s * x);
            (z, w * norm * phase)
        })
    }
}

/// Nodes and weights for weight e^{-x²} by Newton iteration on the
/// orthonormal Hermite recurrence.
fn hermite_nodes(n: usize) -> (Vec<f64>, Vec<f64>) {
    let pim4 = std::f64::consts::PI.powf(-0.25);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = (n + 1) / 2;
    let nf = n as f64;
    let mut z = 0.0;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Maxwell-Boltzmann average of a velocity-dependent susceptibility.
///
/// `chi` receives the Doppler shifts `(k·v, Δk·v)` of one velocity class and
/// returns χ(Δ − k·v, δ − Δk·v). It is evaluated at complex velocities on the
/// rule's contour, so it must be analytic for shifts with negative imaginary
/// part (any causal response satisfies this). `wavenumber` and
/// `residual_wavenumber` must be non-negative.
pub fn doppler_average<F>(
    chi: F,
    species: &AtomicSpecies,
    temperature: f64,
    residual_wavenumber: f64,
    rule: &GaussHermite,
) -> Result<C64>
where
    F: Fn(C64, C64) -> C64,
{
    let u = thermal_speed(species, temperature);
    average_with_speed(chi, species.wavenumber(), residual_wavenumber, u, rule)
}

pub(crate) fn average_with_speed<F>(
    chi: F,
    wavenumber: f64,
    residual_wavenumber: f64,
    thermal_speed: f64,
    rule: &GaussHermite,
) -> Result<C64>
where
    F: Fn(C64, C64) -> C64,
{
    if wavenumber < 0.0 || residual_wavenumber < 0.0 {
        return Err(Error::Domain(
            "wavenumbers must be non-negative along the velocity axis".into(),
        ));
    }
    let mut acc = C64::from(0.0);
    for (node, (z, w)) in rule.contour().enumerate() {
        let v = z * thermal_speed;
        let value = chi(v * wavenumber, v * residual_wavenumber);
        if !(value.re.is_finite() && value.im.is_finite()) {
            return Err(Error::NonFiniteIntegrand {
                node,
                velocity: v.re,
            });
        }
        acc += w * value;
    }
    Ok(acc)
}
