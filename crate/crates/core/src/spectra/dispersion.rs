use nalgebra::{DMatrix, DVector};

use super::{eit_fwhm, MediumResponse, RealSpectrum};
use crate::error::{Error, Result};

pub const DEFAULT_FIT_DEGREE: usize = 5;

/// First-order dispersion ∂(Re n)/∂ω at δ = 0 and the grid step it used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionSlope {
    /// rad⁻¹·s
    pub slope: f64,
    pub step: f64,
}

fn richardson_derivative(values: &[f64], i: usize, step: f64) -> Option<f64> {
    if i < 2 || i + 2 >= values.len() {
        return None;
    }
    let d1 = (values[i + 1] - values[i - 1]) / (2.0 * step);
    let d2 = (values[i + 2] - values[i - 2]) / (4.0 * step);
    Some((4.0 * d1 - d2) / 3.0)
}

/// Central difference of Re n at δ = 0 with one Richardson step.
///
/// When a transparency feature is visible in Im n, the grid step must be at
/// most a twentieth of its FWHM.
pub fn dispersion_slope(resp: &MediumResponse) -> Result<DispersionSlope> {
    let x = resp.detunings();
    let step = resp.step();
    let real: Vec<f64> = resp.index_minus_one.values().iter().map(|z| z.re).collect();

    let transparency = RealSpectrum::new(
        x.to_vec(),
        resp.index_minus_one.values().iter().map(|z| -z.im).collect(),
    )?;
    if let Ok(width) = eit_fwhm(&transparency) {
        if step > width / 20.0 {
            return Err(Error::Resolution(format!(
                "grid step {step:.3e} rad/s exceeds FWHM/20 = {:.3e}",
                width / 20.0
            )));
        }
    }

    let pos = -x[0] / step;
    if !(pos >= 0.0 && pos <= (x.len() - 1) as f64) {
        return Err(Error::Resolution("δ = 0 is not bracketed by the grid".into()));
    }
    let lo = pos.floor() as usize;
    let t = pos - lo as f64;
    let at = |i| {
        richardson_derivative(&real, i, step)
            .ok_or_else(|| Error::Resolution("δ = 0 too close to the grid edge".into()))
    };
    let slope = if t.abs() < 1e-9 {
        at(lo)?
    } else if (1.0 - t).abs() < 1e-9 {
        at(lo + 1)?
    } else {
        (1.0 - t) * at(lo)? + t * at(lo + 1)?
    };
    Ok(DispersionSlope { slope, step })
}

/// n_g = Re n(0) + ω·(∂n/∂ω)|₀.
pub fn group_index(resp: &MediumResponse, carrier_angular_frequency: f64) -> Result<f64> {
    let slope = dispersion_slope(resp)?.slope;
    let n0 = resp
        .index_minus_one
        .interpolate(0.0)
        .ok_or_else(|| Error::Resolution("δ = 0 is not bracketed by the grid".into()))?;
    Ok(1.0 + n0.re + carrier_angular_frequency * slope)
}

/// ∂²(Re n)/∂ω² at δ = 0 from a least-squares polynomial fit over
/// |δ| ≤ `fit_halfwidth`.
pub fn second_order_dispersion(
    resp: &MediumResponse,
    fit_halfwidth: f64,
    degree: usize,
) -> Result<f64> {
    if !(fit_halfwidth > 0.0) {
        return Err(Error::Fit("fit half width must be positive".into()));
    }
    let x = resp.detunings();
    if fit_halfwidth > -x[0] || fit_halfwidth > x[x.len() - 1] {
        return Err(Error::Fit("fit window extends beyond the grid".into()));
    }
    let samples: Vec<(f64, f64)> = x
        .iter()
        .zip(resp.index_minus_one.values())
        .filter(|(d, _)| d.abs() <= fit_halfwidth * (1.0 + 1e-12))
        .map(|(&d, z)| (d / fit_halfwidth, z.re))
        .collect();
    if samples.len() < 25 {
        return Err(Error::Fit(format!(
            "{} samples in the fit window, need at least 25",
            samples.len()
        )));
    }
    if degree < 2 || samples.len() <= degree {
        return Err(Error::Fit(format!("degree {degree} cannot be fitted")));
    }
    let coeffs = polyfit(&samples, degree)?;
    Ok(2.0 * coeffs[2] / (fit_halfwidth * fit_halfwidth))
}

/// Least-squares polynomial coefficients (ascending powers) via SVD.
pub(crate) fn polyfit(samples: &[(f64, f64)], degree: usize) -> Result<Vec<f64>> {
    let rows = samples.len();
    let a = DMatrix::from_fn(rows, degree + 1, |i, j| samples[i].0.powi(j as i32));
    let b = DVector::from_iterator(rows, samples.iter().map(|s| s.1));
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 0.0) || smax / smin > 1e12 {
        return Err(Error::Fit(format!(
            "ill-conditioned fit, condition number {:.3e}",
            smax / smin
        )));
    }
    let solution = svd
        .solve(&b, 0.0)
        .map_err(|e| Error::Fit(e.to_string()))?;
    Ok(solution.iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{symmetric_grid, ComplexSpectrum};
    use num_complex::Complex64;

    fn from_real_index(half_span: f64, points: usize, f: impl Fn(f64) -> f64) -> MediumResponse {
        let grid = symmetric_grid(half_span, points);
        let index = ComplexSpectrum::from_fn(grid, |d| Complex64::new(f(d), 0.0)).unwrap();
        MediumResponse::from_index(index, 3.19e15).unwrap()
    }

    #[test]
    fn linear_profile_slope_is_exact() {
        let s = 1.89e-13;
        let resp = from_real_index(6.3e7, 4001, |d| s * d);
        let got = dispersion_slope(&resp).unwrap();
        assert!((got.slope / s - 1.0).abs() < 1e-10);
        assert_eq!(got.step, resp.step());
    }

    #[test]
    fn even_profile_has_zero_slope() {
        let resp = from_real_index(6.3e7, 4001, |d| 1e-20 * d * d);
        assert!(dispersion_slope(&resp).unwrap().slope.abs() < 1e-12);
    }

    #[test]
    fn off_grid_zero_is_interpolated() {
        let s = 2.0e-13;
        let grid: Vec<f64> = (0..400).map(|i| -1e6 + 0.5e4 + i as f64 * 1e4).collect();
        let index = ComplexSpectrum::from_fn(grid, |d| Complex64::new(s * d, 0.0)).unwrap();
        let resp = MediumResponse::from_index(index, 3.19e15).unwrap();
        assert!((dispersion_slope(&resp).unwrap().slope / s - 1.0).abs() < 1e-9);
    }

    #[test]
    fn vacuum_group_index_is_one() {
        let resp = MediumResponse::vacuum(symmetric_grid(1e7, 401), 3.19e15).unwrap();
        assert_eq!(group_index(&resp, 3.19e15).unwrap(), 1.0);
    }

    #[test]
    fn coarse_grid_is_rejected() {
        // Transparency dip of FWHM 1e5 rad/s sampled at 1e5 rad/s.
        let grid = symmetric_grid(5e6, 101);
        let index = ComplexSpectrum::from_fn(grid, |d| {
            let w: f64 = 5e4;
            Complex64::new(1e-7 * d * w / (d * d + w * w), 1e-6 - 1e-7 * w * w / (d * d + w * w))
        })
        .unwrap();
        let resp = MediumResponse::from_index(index, 3.19e15).unwrap();
        assert!(matches!(dispersion_slope(&resp), Err(Error::Resolution(_))));
    }

    #[test]
    fn quadratic_profile_second_derivative() {
        let c2 = 3.7e-21;
        let resp = from_real_index(6.3e7, 4001, |d| c2 * d * d);
        let got = second_order_dispersion(&resp, 3.14e6, DEFAULT_FIT_DEGREE).unwrap();
        assert!((got / (2.0 * c2) - 1.0).abs() < 1e-8, "{got}");
    }

    #[test]
    fn odd_cubic_profile_has_no_curvature() {
        let resp = from_real_index(6.3e7, 4001, |d| 1e-13 * d + 4e-28 * d * d * d);
        let got = second_order_dispersion(&resp, 3.14e6, DEFAULT_FIT_DEGREE).unwrap();
        assert!(got.abs() < 1e-10, "{got}");
    }

    #[test]
    fn too_few_samples_rejected() {
        let resp = from_real_index(6.3e7, 4001, |d| d);
        assert!(matches!(
            second_order_dispersion(&resp, 1e5, DEFAULT_FIT_DEGREE),
            Err(Error::Fit(_))
        ));
    }

    #[test]
    fn window_outside_grid_rejected() {
        let resp = from_real_index(1e6, 401, |d| d);
        assert!(second_order_dispersion(&resp, 2e6, DEFAULT_FIT_DEGREE).is_err());
    }
}
