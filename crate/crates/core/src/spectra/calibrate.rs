//! Fits vapor density, ground dephasing and pump Rabi frequency so that the
//! simulated spectrum reproduces measured peak transmission, EIT width and
//! group index.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    eit_fwhm, group_index, medium_response, symmetric_grid, transmission_spectrum,
    DEFAULT_HALF_SPAN, DEFAULT_POINTS,
};
use crate::error::{Error, Result};
use crate::medium::MediumConfig;
use crate::optimize::{nelder_mead, NelderMeadOptions};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationTargets {
    /// Maximum of T(δ), in (0, 1].
    pub peak_transmission: f64,
    /// rad/s
    pub eit_fwhm: f64,
    pub group_index: f64,
}

impl CalibrationTargets {
    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("peak_transmission", self.peak_transmission),
            ("eit_fwhm", self.eit_fwhm),
            ("group_index", self.group_index),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::validation(field, "must be finite and > 0"));
            }
        }
        // A passive cell cannot transmit more than it receives.
        if self.peak_transmission > 1.0 {
            return Err(Error::InfeasibleTarget {
                target: "peak_transmission",
                requested: self.peak_transmission,
                min: 0.0,
                max: 1.0,
            });
        }
        Ok(())
    }
}

/// Closed intervals for the three free parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParameterBounds {
    /// m⁻³
    pub density: (f64, f64),
    /// rad/s
    pub gamma12: (f64, f64),
    /// rad/s
    pub pump_rabi: (f64, f64),
}

impl Default for ParameterBounds {
    fn default() -> Self {
        let mhz = crate::constants::TWO_PI * 1e6;
        Self {
            density: (1e15, 1e18),
            gamma12: (0.01 * mhz, 3.0 * mhz),
            pump_rabi: (1.0 * mhz, 150.0 * mhz),
        }
    }
}

impl ParameterBounds {
    fn as_log(&self) -> Result<([f64; 3], [f64; 3])> {
        let mut lo = [0.0; 3];
        let mut hi = [0.0; 3];
        for (k, (field, (a, b))) in [
            ("density", self.density),
            ("gamma12", self.gamma12),
            ("pump_rabi", self.pump_rabi),
        ]
        .into_iter()
        .enumerate()
        {
            if !(a > 0.0 && b > a && b.is_finite()) {
                return Err(Error::validation(
                    format!("bounds.{field}"),
                    "needs 0 < lower < upper",
                ));
            }
            lo[k] = a.ln();
            hi[k] = b.ln();
        }
        Ok((lo, hi))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationOptions {
    pub seed: u64,
    /// Total number of simplex runs: the best coarse-scan point plus
    /// `starts − 1` random points.
    pub starts: usize,
    /// Points per axis of the coarse bracketing scan.
    pub scan_points: usize,
    /// Evaluation grid; the fitted width depends on its wing baseline.
    pub half_span: f64,
    pub grid_points: usize,
    /// Relative agreement every target must reach.
    pub tolerance: f64,
    pub simplex: NelderMeadOptions,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            starts: 4,
            scan_points: 4,
            half_span: DEFAULT_HALF_SPAN,
            grid_points: DEFAULT_POINTS,
            tolerance: 0.05,
            simplex: NelderMeadOptions {
                max_evaluations: 400,
                f_tolerance: 1e-12,
                x_tolerance: 1e-7,
                initial_step: 0.1,
            },
        }
    }
}

/// Peak transmission, EIT width and group index of a medium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables {
    pub peak_transmission: f64,
    pub eit_fwhm: f64,
    pub group_index: f64,
}

impl Observables {
    pub fn of(medium: &MediumConfig, grid: &[f64]) -> Result<Self> {
        let resp = medium_response(medium, grid)?;
        let t = transmission_spectrum(&resp, medium.cell.length)?;
        Ok(Self {
            peak_transmission: t.max(),
            eit_fwhm: eit_fwhm(&t)?,
            group_index: group_index(&resp, resp.carrier_angular_frequency)?,
        })
    }

    fn log_residual(&self, targets: &CalibrationTargets) -> f64 {
        let r = [
            (self.peak_transmission / targets.peak_transmission).ln(),
            (self.eit_fwhm / targets.eit_fwhm).ln(),
            (self.group_index / targets.group_index).ln(),
        ];
        r.iter().map(|x| x * x).sum()
    }

    fn worst_relative_error(&self, targets: &CalibrationTargets) -> f64 {
        [
            self.peak_transmission / targets.peak_transmission,
            self.eit_fwhm / targets.eit_fwhm,
            self.group_index / targets.group_index,
        ]
        .iter()
        .map(|q| (q - 1.0).abs())
        .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub medium: MediumConfig,
    pub observables: Observables,
    /// Sum of squared log residuals at the solution.
    pub objective: f64,
    pub evaluations: usize,
}

/// Replaces density, γ₁₂ and pump Rabi in `base`, keeping the probe-to-pump
/// ratio fixed.
pub fn with_parameters(base: &MediumConfig, density: f64, gamma12: f64, pump_rabi: f64) -> MediumConfig {
    let mut m = base.clone();
    m.cell.density_override = Some(density);
    m.cell.residual_dephasing = 0.0;
    if base.lambda.pump_rabi > 0.0 {
        m.lambda.probe_rabi = base.lambda.probe_rabi * pump_rabi / base.lambda.pump_rabi;
    }
    m.lambda.gamma12 = gamma12;
    m.lambda.pump_rabi = pump_rabi;
    m
}

/// Penalty for parameter points whose spectrum cannot be measured on the grid.
const UNMEASURABLE: f64 = 1e6;

pub fn calibrate(
    base: &MediumConfig,
    targets: &CalibrationTargets,
    bounds: &ParameterBounds,
    options: &CalibrationOptions,
) -> Result<Calibration> {
    targets.validate()?;
    base.validate()?;
    let (lo, hi) = bounds.as_log()?;
    let grid = symmetric_grid(options.half_span, options.grid_points);
    let evaluate = |x: &[f64]| {
        let m = with_parameters(base, x[0].exp(), x[1].exp(), x[2].exp());
        Observables::of(&m, &grid)
    };

    // Coarse scan: brackets each target and seeds the first start.
    let n = options.scan_points.max(2);
    let mut scanned: Vec<(Vec<f64>, Observables)> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let at = |idx: usize, axis: usize| {
                    lo[axis] + (hi[axis] - lo[axis]) * idx as f64 / (n - 1) as f64
                };
                let x = vec![at(i, 0), at(j, 1), at(k, 2)];
                if let Ok(obs) = evaluate(&x) {
                    scanned.push((x, obs));
                }
            }
        }
    }
    if scanned.is_empty() {
        return Err(Error::InfeasibleTarget {
            target: "all",
            requested: f64::NAN,
            min: f64::NAN,
            max: f64::NAN,
        });
    }
    let extent = |f: fn(&Observables) -> f64| {
        scanned.iter().map(|(_, o)| f(o)).fold(
            (f64::INFINITY, f64::NEG_INFINITY),
            |(a, b), v| (a.min(v), b.max(v)),
        )
    };
    let checks: [(&'static str, f64, fn(&Observables) -> f64); 3] = [
        ("peak_transmission", targets.peak_transmission, |o| o.peak_transmission),
        ("eit_fwhm", targets.eit_fwhm, |o| o.eit_fwhm),
        ("group_index", targets.group_index, |o| o.group_index),
    ];
    for (target, requested, f) in checks {
        let (min, max) = extent(f);
        if !(requested >= min && requested <= max) {
            return Err(Error::InfeasibleTarget {
                target,
                requested,
                min,
                max,
            });
        }
    }

    let mut starts: Vec<Vec<f64>> = Vec::with_capacity(options.starts.max(1));
    let best_scan = scanned
        .iter()
        .min_by(|a, b| a.1.log_residual(targets).total_cmp(&b.1.log_residual(targets)))
        .map(|(x, _)| x.clone())
        .unwrap_or_default();
    starts.push(best_scan);
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    while starts.len() < options.starts.max(1) {
        starts.push((0..3).map(|k| rng.random_range(lo[k]..=hi[k])).collect());
    }

    let objective = |x: &[f64]| match evaluate(x) {
        Ok(obs) => obs.log_residual(targets),
        Err(_) => UNMEASURABLE,
    };
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut evaluations = scanned.len();
    for start in &starts {
        let m = nelder_mead(objective, start, &lo, &hi, &options.simplex);
        evaluations += m.evaluations;
        if best.as_ref().map_or(true, |(_, v)| m.value < *v) {
            best = Some((m.x, m.value));
        }
    }
    let (x, value) = best.expect("at least one start");
    let medium = with_parameters(base, x[0].exp(), x[1].exp(), x[2].exp());
    let observables = Observables::of(&medium, &grid)?;
    let worst = observables.worst_relative_error(targets);
    if worst > options.tolerance {
        return Err(Error::NotConverged(format!(
            "best fit misses a target by {:.2}% (T = {:.4}, FWHM = {:.4e} rad/s, n_g = {:.2})",
            100.0 * worst,
            observables.peak_transmission,
            observables.eit_fwhm,
            observables.group_index
        )));
    }
    Ok(Calibration {
        medium,
        observables,
        objective: value,
        evaluations,
    })
}
