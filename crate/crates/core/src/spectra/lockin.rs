use std::f64::consts::PI;

use rayon::prelude::*;

use super::{eit_fwhm, RealSpectrum};
use crate::error::Result;

/// Frequency-dither parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LockIn {
    /// Dither amplitude a in δ(t) = δ₀ + a·sin(ω_d t), rad/s.
    pub dither_amplitude: f64,
    /// ω_d, rad/s. Only sets the time axis of the simulated demodulation.
    pub dither_rate: f64,
    pub periods: usize,
    pub samples_per_period: usize,
}

impl LockIn {
    pub fn new(dither_amplitude: f64, dither_rate: f64) -> Self {
        Self {
            dither_amplitude,
            dither_rate,
            periods: 2,
            samples_per_period: 32,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LockInStatus {
    Ok,
    /// Dither amplitude is not below FWHM/5; the two paths may disagree.
    DitherTooLarge { amplitude_over_fwhm: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LockInTrace {
    /// First-harmonic demodulation of the dithered transmission.
    pub simulated: RealSpectrum,
    /// a·T′ + (a³/8)·T‴ from finite-difference derivatives.
    pub analytic: RealSpectrum,
    pub status: LockInStatus,
}

impl LockInTrace {
    /// RMS of (simulated − analytic) relative to the RMS of the simulated trace.
    pub fn relative_rms_discrepancy(&self) -> f64 {
        let s = self.simulated.values();
        let a = self.analytic.values();
        let diff: f64 = s.iter().zip(a).map(|(x, y)| (x - y) * (x - y)).sum();
        let norm: f64 = s.iter().map(|x| x * x).sum();
        (diff / norm).sqrt()
    }

    /// d(signal)/dδ at δ = 0 from the simulated trace.
    pub fn central_slope(&self) -> Option<f64> {
        let x = self.simulated.detunings();
        let v = self.simulated.values();
        let i = x.iter().position(|&d| d.abs() < 1e-9 * (x[1] - x[0]))?;
        if i == 0 || i + 1 >= x.len() {
            return None;
        }
        Some((v[i + 1] - v[i - 1]) / (x[i + 1] - x[i - 1]))
    }
}

/// Simulates frequency-dithered lock-in detection of `transmission` on `grid`.
pub fn lock_in_signal<F>(transmission: F, grid: &[f64], lock_in: &LockIn) -> Result<LockInTrace>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let a = lock_in.dither_amplitude;
    let samples = lock_in.periods * lock_in.samples_per_period;
    let period = 2.0 * PI / lock_in.dither_rate;
    let dt = period / lock_in.samples_per_period as f64;

    let simulated = grid
        .par_iter()
        .map(|&centre| {
            let mut acc = 0.0;
            for k in 0..samples {
                let phase = lock_in.dither_rate * (k as f64 * dt);
                acc += transmission(centre + a * phase.sin())? * phase.sin();
            }
            Ok(2.0 * acc / samples as f64)
        })
        .collect::<Result<Vec<f64>>>()?;

    let h = 0.5 * a;
    let analytic = grid
        .par_iter()
        .map(|&centre| {
            let p2 = transmission(centre + 2.0 * h)?;
            let p1 = transmission(centre + h)?;
            let m1 = transmission(centre - h)?;
            let m2 = transmission(centre - 2.0 * h)?;
            let first = (-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * h);
            let third = (p2 - 2.0 * p1 + 2.0 * m1 - m2) / (2.0 * h * h * h);
            Ok(a * first + a * a * a / 8.0 * third)
        })
        .collect::<Result<Vec<f64>>>()?;

    let sampled = grid
        .par_iter()
        .map(|&d| transmission(d))
        .collect::<Result<Vec<f64>>>()?;
    let status = match eit_fwhm(&RealSpectrum::new(grid.to_vec(), sampled)?) {
        Ok(width) if a < width / 5.0 => LockInStatus::Ok,
        Ok(width) => LockInStatus::DitherTooLarge {
            amplitude_over_fwhm: a / width,
        },
        Err(_) => LockInStatus::DitherTooLarge {
            amplitude_over_fwhm: f64::INFINITY,
        },
    };

    Ok(LockInTrace {
        simulated: RealSpectrum::new(grid.to_vec(), simulated)?,
        analytic: RealSpectrum::new(grid.to_vec(), analytic)?,
        status,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::symmetric_grid;

    fn lorentz_peak(d: f64) -> Result<f64> {
        let w = 1e6;
        Ok(0.1 + 0.2 * w * w / (d * d + w * w))
    }

    #[test]
    fn symmetric_peak_gives_odd_trace() {
        let grid = symmetric_grid(2e7, 401);
        let trace = lock_in_signal(lorentz_peak, &grid, &LockIn::new(1e5, 2e4)).unwrap();
        let v = trace.simulated.values();
        let n = v.len();
        for i in 0..n {
            assert!((v[i] + v[n - 1 - i]).abs() < 1e-12);
        }
        assert!(v[n / 2].abs() < 1e-15);
        assert!(trace.central_slope().unwrap() < 0.0);
        assert_eq!(trace.status, LockInStatus::Ok);
    }

    #[test]
    fn analytic_path_matches_simulation() {
        let grid = symmetric_grid(2e7, 401);
        let lock = LockIn::new(0.3e6, 2e4);
        let trace = lock_in_signal(lorentz_peak, &grid, &lock).unwrap();
        assert!(trace.relative_rms_discrepancy() < 0.02);
    }

    #[test]
    fn large_dither_is_flagged() {
        let grid = symmetric_grid(2e7, 401);
        let trace = lock_in_signal(lorentz_peak, &grid, &LockIn::new(1e6, 2e4)).unwrap();
        assert!(matches!(trace.status, LockInStatus::DitherTooLarge { .. }));
    }
}
