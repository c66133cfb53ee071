//! Frequency-domain observables on a uniform two-photon detuning grid.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::constants::SPEED_OF_LIGHT;
use crate::error::{Error, Result};
use crate::medium::MediumConfig;

pub mod calibrate;
mod dispersion;
pub mod kramers_kronig;
mod lockin;

pub use dispersion::{
    dispersion_slope, group_index, second_order_dispersion, DispersionSlope,
    DEFAULT_FIT_DEGREE,
};
pub use lockin::{lock_in_signal, LockIn, LockInStatus, LockInTrace};

type C64 = Complex64;

/// Default grid: ±2π·10 MHz with 4001 points (2π·5 kHz step).
pub const DEFAULT_HALF_SPAN: f64 = crate::constants::TWO_PI * 10e6;
pub const DEFAULT_POINTS: usize = 4001;

/// Symmetric uniform grid with an exact zero at the centre for odd `points`.
pub fn symmetric_grid(half_span: f64, points: usize) -> Vec<f64> {
    assert!(points >= 2);
    let step = 2.0 * half_span / (points - 1) as f64;
    let centre = (points - 1) as f64 / 2.0;
    (0..points).map(|i| (i as f64 - centre) * step).collect()
}

fn check_grid(detunings: &[f64]) -> Result<f64> {
    if detunings.len() < 2 {
        return Err(Error::Shape("grid needs at least two points".into()));
    }
    let step = detunings[1] - detunings[0];
    if !(step > 0.0) {
        return Err(Error::Shape("grid must be strictly increasing".into()));
    }
    for pair in detunings.windows(2) {
        let d = pair[1] - pair[0];
        if !((d - step).abs() <= 1e-9 * step) {
            return Err(Error::Shape(format!(
                "grid is not uniform: step {d:e} vs {step:e}"
            )));
        }
    }
    Ok(step)
}

/// Complex values on a uniform detuning grid (rad/s).
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrum {
    detunings: Vec<f64>,
    values: Vec<C64>,
}

impl ComplexSpectrum {
    pub fn new(detunings: Vec<f64>, values: Vec<C64>) -> Result<Self> {
        check_grid(&detunings)?;
        if detunings.len() != values.len() {
            return Err(Error::Shape(format!(
                "{} detunings but {} values",
                detunings.len(),
                values.len()
            )));
        }
        if let Some(i) = values
            .iter()
            .position(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(Error::Shape(format!("non-finite value at index {i}")));
        }
        Ok(Self { detunings, values })
    }

    pub fn from_fn(detunings: Vec<f64>, f: impl Fn(f64) -> C64) -> Result<Self> {
        let values = detunings.iter().map(|&d| f(d)).collect();
        Self::new(detunings, values)
    }

    pub fn detunings(&self) -> &[f64] {
        &self.detunings
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn step(&self) -> f64 {
        self.detunings[1] - self.detunings[0]
    }

    pub fn real(&self) -> RealSpectrum {
        RealSpectrum {
            detunings: self.detunings.clone(),
            values: self.values.iter().map(|z| z.re).collect(),
        }
    }

    pub fn imag(&self) -> RealSpectrum {
        RealSpectrum {
            detunings: self.detunings.clone(),
            values: self.values.iter().map(|z| z.im).collect(),
        }
    }

    /// Linear interpolation; `None` outside the grid.
    pub fn interpolate(&self, detuning: f64) -> Option<C64> {
        let (i, t) = locate(&self.detunings, detuning)?;
        Some(self.values[i] * (1.0 - t) + self.values[i + 1] * t)
    }
}

/// Real values on a uniform detuning grid (rad/s).
#[derive(Debug, Clone, PartialEq)]
pub struct RealSpectrum {
    detunings: Vec<f64>,
    values: Vec<f64>,
}

impl RealSpectrum {
    pub fn new(detunings: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_grid(&detunings)?;
        if detunings.len() != values.len() {
            return Err(Error::Shape(format!(
                "{} detunings but {} values",
                detunings.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Shape(format!("non-finite value at index {i}")));
        }
        Ok(Self { detunings, values })
    }

    pub fn from_fn(detunings: Vec<f64>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = detunings.iter().map(|&d| f(d)).collect();
        Self::new(detunings, values)
    }

    pub fn detunings(&self) -> &[f64] {
        &self.detunings
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn step(&self) -> f64 {
        self.detunings[1] - self.detunings[0]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = i;
            }
        }
        best
    }

    pub fn interpolate(&self, detuning: f64) -> Option<f64> {
        let (i, t) = locate(&self.detunings, detuning)?;
        Some(self.values[i] * (1.0 - t) + self.values[i + 1] * t)
    }
}

fn locate(grid: &[f64], x: f64) -> Option<(usize, f64)> {
    let first = grid[0];
    let step = grid[1] - grid[0];
    let last = grid[grid.len() - 1];
    if !(x >= first && x <= last) {
        return None;
    }
    let pos = (x - first) / step;
    let i = (pos.floor() as usize).min(grid.len() - 2);
    Some((i, pos - i as f64))
}

/// How the refractive index is derived from χ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IndexModel {
    /// n − 1 = χ/2, the dilute-medium linearization.
    #[default]
    Linearized,
    /// n − 1 = sqrt(1 + χ) − 1.
    Exact,
}

/// Susceptibility, refractive index and absorption on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MediumResponse {
    pub chi: ComplexSpectrum,
    pub index_minus_one: ComplexSpectrum,
    /// α(δ) = (2ω/c) Im n, per metre, with ω = ω₀ + δ.
    pub absorption_coeff: Vec<f64>,
    pub carrier_angular_frequency: f64,
}

impl MediumResponse {
    pub fn from_chi(chi: ComplexSpectrum, carrier: f64, model: IndexModel) -> Result<Self> {
        let index: Vec<C64> = chi
            .values()
            .iter()
            .map(|&x| match model {
                IndexModel::Linearized => 0.5 * x,
                IndexModel::Exact => (C64::from(1.0) + x).sqrt() - 1.0,
            })
            .collect();
        let index_minus_one = ComplexSpectrum::new(chi.detunings().to_vec(), index)?;
        Ok(Self::assemble(chi, index_minus_one, carrier))
    }

    /// Builds a response from a prescribed n − 1 profile (χ = 2(n − 1)).
    pub fn from_index(index_minus_one: ComplexSpectrum, carrier: f64) -> Result<Self> {
        let chi = ComplexSpectrum::new(
            index_minus_one.detunings().to_vec(),
            index_minus_one.values().iter().map(|z| 2.0 * z).collect(),
        )?;
        Ok(Self::assemble(chi, index_minus_one, carrier))
    }

    pub fn vacuum(detunings: Vec<f64>, carrier: f64) -> Result<Self> {
        let zeros = vec![C64::from(0.0); detunings.len()];
        Self::from_chi(
            ComplexSpectrum::new(detunings, zeros)?,
            carrier,
            IndexModel::Linearized,
        )
    }

    fn assemble(chi: ComplexSpectrum, index_minus_one: ComplexSpectrum, carrier: f64) -> Self {
        let absorption_coeff = index_minus_one
            .detunings()
            .iter()
            .zip(index_minus_one.values())
            .map(|(&d, n)| 2.0 * (carrier + d) / SPEED_OF_LIGHT * n.im)
            .collect();
        Self {
            chi,
            index_minus_one,
            absorption_coeff,
            carrier_angular_frequency: carrier,
        }
    }

    pub fn detunings(&self) -> &[f64] {
        self.chi.detunings()
    }

    pub fn step(&self) -> f64 {
        self.chi.step()
    }
}

/// Doppler-averaged weak-probe response of `medium` on `grid`.
pub fn medium_response(medium: &MediumConfig, grid: &[f64]) -> Result<MediumResponse> {
    medium.validate()?;
    check_grid(grid)?;
    let density = medium.number_density()?;
    if density > 0.0 {
        let reach = (-grid[0]).min(grid[grid.len() - 1]);
        let needed = 10.0 * medium.expected_eit_halfwidth();
        if reach < needed {
            return Err(Error::Resolution(format!(
                "grid reaches ±{reach:.4e} rad/s but the transparency window needs ±{needed:.4e}"
            )));
        }
    }
    let values = grid
        .par_iter()
        .map(|&d| medium.chi_with_density(d, density))
        .collect::<Result<Vec<_>>>()?;
    let chi = ComplexSpectrum::new(grid.to_vec(), values)?;
    MediumResponse::from_chi(chi, medium.carrier_angular_frequency(), IndexModel::Linearized)
}

/// Beer-Lambert transmission exp(−α·L).
pub fn transmission_spectrum(resp: &MediumResponse, length: f64) -> Result<RealSpectrum> {
    if !(length > 0.0) {
        return Err(Error::validation("length", "must be > 0"));
    }
    RealSpectrum::new(
        resp.detunings().to_vec(),
        resp.absorption_coeff
            .iter()
            .map(|a| (-a * length).exp())
            .collect(),
    )
}

/// Full width at half of (peak − wing baseline), in rad/s.
///
/// The baseline is the mean of the outer 10% of samples on both sides; the
/// half-level crossings are linearly interpolated.
pub fn eit_fwhm(spectrum: &RealSpectrum) -> Result<f64> {
    let v = spectrum.values();
    let x = spectrum.detunings();
    let n = v.len();
    let wing = (n / 10).max(1);
    if 2 * wing + 1 > n {
        return Err(Error::Shape("too few samples for a wing baseline".into()));
    }
    let baseline = (v[..wing].iter().sum::<f64>() + v[n - wing..].iter().sum::<f64>())
        / (2 * wing) as f64;
    let peak_index = spectrum.argmax();
    let peak = v[peak_index];
    if peak_index < wing || peak_index >= n - wing || !(peak > baseline) {
        return Err(Error::Shape("no interior peak above the wings".into()));
    }
    let half = baseline + 0.5 * (peak - baseline);

    let mut left = None;
    for i in (0..peak_index).rev() {
        if v[i] <= half {
            let t = (half - v[i]) / (v[i + 1] - v[i]);
            left = Some(x[i] + t * (x[i + 1] - x[i]));
            break;
        }
    }
    let mut right = None;
    for i in peak_index + 1..n {
        if v[i] <= half {
            let t = (v[i - 1] - half) / (v[i - 1] - v[i]);
            right = Some(x[i - 1] + t * (x[i] - x[i - 1]));
            break;
        }
    }
    match (left, right) {
        (Some(l), Some(r)) => Ok(r - l),
        _ => Err(Error::Shape("half-maximum crossing outside the grid".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_grid_has_exact_zero() {
        let g = symmetric_grid(DEFAULT_HALF_SPAN, DEFAULT_POINTS);
        assert_eq!(g[DEFAULT_POINTS / 2], 0.0);
        assert!((g[1] - g[0] - crate::constants::TWO_PI * 5e3).abs() < 1e-6);
        check_grid(&g).unwrap();
    }

    #[test]
    fn non_uniform_grid_rejected() {
        let err = RealSpectrum::new(vec![0.0, 1.0, 2.5], vec![0.0; 3]).unwrap_err();
        assert!(matches!(err, Error::Shape(_)));
    }

    #[test]
    fn vacuum_transmits_everything() {
        let resp = MediumResponse::vacuum(symmetric_grid(1e6, 101), 3e15).unwrap();
        let t = transmission_spectrum(&resp, 0.1).unwrap();
        assert!(t.values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn doubling_length_squares_transmission() {
        let grid = symmetric_grid(1e7, 201);
        let chi = ComplexSpectrum::from_fn(grid, |d| {
            C64::new(0.0, 1e-6) / C64::new(1.0, -d / 3e6)
        })
        .unwrap();
        let resp = MediumResponse::from_chi(chi, 3.2e15, IndexModel::Linearized).unwrap();
        let t1 = transmission_spectrum(&resp, 0.05).unwrap();
        let t2 = transmission_spectrum(&resp, 0.1).unwrap();
        for (a, b) in t1.values().iter().zip(t2.values()) {
            assert!((a * a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn lorentzian_peak_width_recovered() {
        let w = 2.0e6;
        let grid = symmetric_grid(25.0 * w, 2501);
        assert!(grid[1] - grid[0] <= w / 50.0);
        let hw = 0.5 * w;
        let s = RealSpectrum::from_fn(grid, |d| 0.05 + 0.2 * hw * hw / (d * d + hw * hw)).unwrap();
        let fwhm = eit_fwhm(&s).unwrap();
        assert!((fwhm / w - 1.0).abs() < 0.01, "{fwhm}");
    }

    #[test]
    fn flat_spectrum_has_no_peak() {
        let s = RealSpectrum::new(symmetric_grid(1e6, 101), vec![0.4; 101]).unwrap();
        assert!(matches!(eit_fwhm(&s), Err(Error::Shape(_))));
    }

    #[test]
    fn exact_index_model_close_to_linearized_for_dilute_media() {
        let grid = symmetric_grid(1e6, 11);
        let chi = ComplexSpectrum::from_fn(grid, |d| C64::new(1e-7 * d / 1e6, 2e-7)).unwrap();
        let lin = MediumResponse::from_chi(chi.clone(), 3e15, IndexModel::Linearized).unwrap();
        let exact = MediumResponse::from_chi(chi, 3e15, IndexModel::Exact).unwrap();
        for (a, b) in lin
            .index_minus_one
            .values()
            .iter()
            .zip(exact.index_minus_one.values())
        {
            assert!((a - b).norm() < 1e-13);
        }
    }
}
