//! Scenario files: line-oriented `key = value unit` settings.
//!
//! Keys are dotted (`medium.cell.length = 10 cm`), `#` starts a comment, and
//! every dimensional value needs a unit suffix (see [`crate::units`]). A
//! section such as `pulse` or `gyro` is enabled by setting any of its keys;
//! unspecified keys take their defaults. [`Scenario::to_config_string`]
//! writes the fully resolved scenario in canonical units, and parsing that
//! dump reproduces it byte for byte.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, LN_2};
use std::path::Path;

use crate::doppler::{CellConfig, GaussHermite};
use crate::error::{Error, Result};
use crate::medium::MediumConfig;
use crate::species::rabi_from_intensity;
use crate::spectra::calibrate::{CalibrationTargets, ParameterBounds};
use crate::spectra::{LockIn, DEFAULT_HALF_SPAN, DEFAULT_POINTS};
use crate::units::{format_value, split_value, Quantity};

use Quantity::*;

/// Every key the parser accepts.
const KEYS: &[&str] = &[
    "name",
    "seed",
    "grid.half_span",
    "grid.points",
    "medium.cell.length",
    "medium.cell.temperature",
    "medium.cell.beam_waist",
    "medium.cell.residual_dephasing",
    "medium.cell.density",
    "medium.pump.rabi",
    "medium.pump.intensity",
    "medium.probe.rabi",
    "medium.probe.intensity_ratio",
    "medium.one_photon_detuning",
    "medium.gamma12",
    "medium.gamma_extra",
    "medium.ground_relaxation",
    "medium.branching_1",
    "medium.dipole_scale",
    "medium.quadrature.nodes",
    "medium.quadrature.shift",
    "medium.calibrate",
    "calibration.peak_transmission",
    "calibration.eit_fwhm",
    "calibration.group_index",
    "calibration.density_min",
    "calibration.density_max",
    "calibration.gamma12_min",
    "calibration.gamma12_max",
    "calibration.pump_rabi_min",
    "calibration.pump_rabi_max",
    "calibration.starts",
    "calibration.grid.half_span",
    "calibration.grid.points",
    "homodyne.reference_phase",
    "homodyne.reference_amplitude",
    "homodyne.incident_amplitude",
    "lockin.dither_amplitude",
    "lockin.dither_rate",
    "pulse.fwhm",
    "pulse.window",
    "pulse.samples",
    "pulse.carrier_detuning",
    "fwm.forward_pump_rabi",
    "fwm.backward_pump_rabi",
    "fwm.backward_pump_intensity",
    "fwm.probe_rabi",
    "fwm.probe_intensity_ratio",
    "fwm.gamma12",
    "fwm.peak_reflectivity",
    "fwm.grid.half_span",
    "fwm.grid.points",
    "gyro.loop_area",
    "gyro.rotation_rate",
    "gyro.group_index",
    "gyro.pc_reflectivity",
    "gyro.parasitic_phase",
    "gyro.fringe_points",
    "sweep.parameter",
    "sweep.values",
];

/// Shipped scenario presets as (name, file contents).
pub const PRESETS: &[(&str, &str)] = &[
    ("eit_sweep", include_str!("../presets/eit_sweep.cfg")),
    ("dispersion", include_str!("../presets/dispersion.cfg")),
    ("slowlight", include_str!("../presets/slowlight.cfg")),
    ("pulse_spreading", include_str!("../presets/pulse_spreading.cfg")),
    ("gyro", include_str!("../presets/gyro.cfg")),
    ("phase_conjugate", include_str!("../presets/phase_conjugate.cfg")),
    ("vacuum", include_str!("../presets/vacuum.cfg")),
];

pub fn preset(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

pub fn load_preset(name: &str) -> Result<Scenario> {
    let text = preset(name).ok_or_else(|| Error::validation("preset", format!("unknown preset `{name}`")))?;
    Scenario::parse(text, &format!("preset:{name}"))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub half_span: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn detunings(&self) -> Vec<f64> {
        crate::spectra::symmetric_grid(self.half_span, self.points)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationSpec {
    pub targets: CalibrationTargets,
    pub bounds: ParameterBounds,
    pub starts: usize,
    pub grid: GridSpec,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomodyneSpec {
    pub reference_phase: f64,
    pub reference_amplitude: f64,
    pub incident_amplitude: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSpec {
    pub fwhm: f64,
    pub window: f64,
    pub samples: usize,
    pub carrier_detuning: f64,
}

impl PulseSpec {
    /// Half width of the spectrum down to 10⁻⁴ of its peak amplitude, rad/s.
    pub fn spectral_reach(&self) -> f64 {
        // Amplitude spectrum ∝ exp(−ω²·fwhm²/(8 ln 2)).
        (8.0 * LN_2 * (1.0 / crate::pulse::SPECTRAL_SUPPORT_LEVEL).ln()).sqrt() / self.fwhm
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FwmSpec {
    /// `None` reads out with the medium's pump.
    pub forward_pump_rabi: Option<f64>,
    pub backward_pump_rabi: f64,
    pub probe_rabi: f64,
    /// `None` uses the (calibrated) medium γ₁₂.
    pub gamma12: Option<f64>,
    pub peak_reflectivity: f64,
    pub grid: GridSpec,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GyroSpec {
    pub loop_area: f64,
    pub rotation_rate: f64,
    /// `None` uses the medium's group index.
    pub group_index: Option<f64>,
    /// Power reflectivity of the phase-conjugate field; r = sqrt of it.
    pub pc_reflectivity: f64,
    pub parasitic_phase: f64,
    pub fringe_points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    /// Multiplies pump and probe intensity (probe ratio kept).
    PumpIntensity,
    /// Multiplies backward-pump and grating-probe intensity.
    BackwardPumpIntensity,
    CarrierDetuning,
    PulseFwhm,
    RotationRate,
    ParasiticPhase,
}

impl SweepParameter {
    const ALL: [(&'static str, SweepParameter); 6] = [
        ("pump_intensity", SweepParameter::PumpIntensity),
        ("backward_pump_intensity", SweepParameter::BackwardPumpIntensity),
        ("carrier_detuning", SweepParameter::CarrierDetuning),
        ("pulse_fwhm", SweepParameter::PulseFwhm),
        ("rotation_rate", SweepParameter::RotationRate),
        ("parasitic_phase", SweepParameter::ParasiticPhase),
    ];

    pub fn name(self) -> &'static str {
        Self::ALL.iter().find(|(_, p)| *p == self).map(|(n, _)| *n).unwrap_or("")
    }

    /// Quantity of the swept values; multipliers are dimensionless.
    pub fn quantity(self) -> Quantity {
        match self {
            SweepParameter::PumpIntensity | SweepParameter::BackwardPumpIntensity => Dimensionless,
            SweepParameter::CarrierDetuning | SweepParameter::RotationRate => AngularRate,
            SweepParameter::PulseFwhm => Time,
            SweepParameter::ParasiticPhase => Angle,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    pub grid: GridSpec,
    pub medium: MediumConfig,
    pub calibration: Option<CalibrationSpec>,
    pub homodyne: HomodyneSpec,
    pub lockin: Option<LockIn>,
    pub pulse: Option<PulseSpec>,
    pub fwm: Option<FwmSpec>,
    pub gyro: Option<GyroSpec>,
    pub sweep: Option<Sweep>,
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    Scenario::parse(&text, &path.display().to_string())
}

struct Entry {
    line: usize,
    /// 1-based column where the value starts.
    column: usize,
    text: String,
}

struct Raw<'a> {
    origin: &'a str,
    entries: BTreeMap<String, Entry>,
}

impl<'a> Raw<'a> {
    fn parse(text: &str, origin: &'a str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (index, raw_line) in text.lines().enumerate() {
            let line = index + 1;
            let content = raw_line.split('#').next().unwrap_or("");
            if content.trim().is_empty() {
                continue;
            }
            let err = |column: usize, message: String| Error::Parse {
                path: origin.to_string(),
                line,
                column,
                message,
            };
            let eq = content
                .find('=')
                .ok_or_else(|| err(1, "expected `key = value`".into()))?;
            let key = content[..eq].trim();
            let key_col = content.len() - content.trim_start().len() + 1;
            if key.is_empty() {
                return Err(err(key_col, "missing key before `=`".into()));
            }
            if !KEYS.contains(&key) {
                return Err(err(key_col, format!("unknown key `{key}`")));
            }
            let after = &content[eq + 1..];
            let value = after.trim();
            let column = eq + 2 + (after.len() - after.trim_start().len());
            if value.is_empty() {
                return Err(err(column, format!("missing value for `{key}`")));
            }
            if entries.contains_key(key) {
                return Err(err(key_col, format!("duplicate key `{key}`")));
            }
            entries.insert(
                key.to_string(),
                Entry {
                    line,
                    column,
                    text: value.to_string(),
                },
            );
        }
        Ok(Self { origin, entries })
    }

    fn error(&self, key: &str, offset: usize, message: String) -> Error {
        let e = &self.entries[key];
        Error::Parse {
            path: self.origin.to_string(),
            line: e.line,
            column: e.column + offset,
            message: format!("`{key}`: {message}"),
        }
    }

    fn has(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    fn section(&self, prefix: &str) -> bool {
        self.entries.keys().any(|k| k.starts_with(prefix))
    }

    fn is_auto(&self, key: &str) -> bool {
        self.entries.get(key).is_some_and(|e| e.text == "auto")
    }

    fn quantity(&self, key: &str, quantity: Quantity) -> Result<Option<f64>> {
        let Some(entry) = self.entries.get(key) else {
            return Ok(None);
        };
        let (value, unit) = split_value(&entry.text).map_err(|m| self.error(key, 0, m))?;
        let offset = unit.map(|(o, _)| o).unwrap_or(0);
        quantity
            .convert(value, unit.map(|(_, u)| u))
            .map(Some)
            .map_err(|m| self.error(key, offset, m))
    }

    fn quantity_or(&self, key: &str, quantity: Quantity, default: f64) -> Result<f64> {
        Ok(self.quantity(key, quantity)?.unwrap_or(default))
    }

    /// `auto` → `Ok(None)`.
    fn auto_or_quantity(&self, key: &str, quantity: Quantity) -> Result<Option<f64>> {
        if self.is_auto(key) || !self.has(key) {
            Ok(None)
        } else {
            self.quantity(key, quantity)
        }
    }

    fn integer(&self, key: &str, default: u64) -> Result<u64> {
        match self.entries.get(key) {
            None => Ok(default),
            Some(e) => e
                .text
                .parse()
                .map_err(|_| self.error(key, 0, format!("`{}` is not a non-negative integer", e.text))),
        }
    }

    fn switch(&self, key: &str, default: bool) -> Result<bool> {
        match self.entries.get(key).map(|e| e.text.as_str()) {
            None => Ok(default),
            Some("on") => Ok(true),
            Some("off") => Ok(false),
            Some(other) => Err(self.error(key, 0, format!("expected `on` or `off`, got `{other}`"))),
        }
    }

    fn exclusive(&self, a: &str, b: &str) -> Result<()> {
        if self.has(a) && self.has(b) {
            return Err(self.error(b, 0, format!("conflicts with `{a}`")));
        }
        Ok(())
    }

    fn list(&self, key: &str, quantity: Quantity) -> Result<Vec<f64>> {
        let entry = &self.entries[key];
        let parts: Vec<&str> = entry.text.split(',').collect();
        let last = parts.len() - 1;
        let (_, unit) = split_value(parts[last]).map_err(|m| self.error(key, 0, m))?;
        let unit = unit.map(|(_, u)| u);
        let mut offset = 0;
        let mut values = Vec::with_capacity(parts.len());
        for (i, part) in parts.iter().enumerate() {
            let (v, u) = split_value(part).map_err(|m| self.error(key, offset, m))?;
            if i != last && u.is_some() {
                return Err(self.error(key, offset, "only the last list entry may carry the unit".into()));
            }
            values.push(quantity.convert(v, unit).map_err(|m| self.error(key, offset, m))?);
            offset += part.len() + 1;
        }
        Ok(values)
    }
}

fn prefixed(prefix: &str) -> impl Fn(Error) -> Error + '_ {
    move |e| match e {
        Error::Validation { field, constraint } => Error::Validation {
            field: format!("{prefix}{field}"),
            constraint,
        },
        other => other,
    }
}

fn positive(field: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::validation(field, "must be finite and > 0"))
    }
}

fn grid_points(field: &str, raw: u64) -> Result<usize> {
    if raw < 101 {
        return Err(Error::validation(field, "needs at least 101 points"));
    }
    Ok(raw as usize)
}

impl Scenario {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let raw = Raw::parse(text, origin)?;
        let name = raw
            .entries
            .get("name")
            .map(|e| e.text.clone())
            .unwrap_or_default();
        let seed = raw.integer("seed", 0)?;
        let grid = GridSpec {
            half_span: raw.quantity_or("grid.half_span", AngularRate, DEFAULT_HALF_SPAN)?,
            points: grid_points("grid.points", raw.integer("grid.points", DEFAULT_POINTS as u64)?)?,
        };

        let reference = CellConfig::sodium_reference();
        let cell = CellConfig {
            length: raw.quantity_or("medium.cell.length", Length, reference.length)?,
            temperature: raw.quantity_or("medium.cell.temperature", Temperature, reference.temperature)?,
            beam_waist: raw.quantity_or("medium.cell.beam_waist", Length, reference.beam_waist)?,
            residual_dephasing: raw.quantity_or("medium.cell.residual_dephasing", AngularRate, 0.0)?,
            density_override: raw.auto_or_quantity("medium.cell.density", NumberDensity)?,
        };
        cell.validate().map_err(prefixed("medium.cell."))?;

        raw.exclusive("medium.pump.rabi", "medium.pump.intensity")?;
        raw.exclusive("medium.probe.rabi", "medium.probe.intensity_ratio")?;
        let mut medium = MediumConfig::sodium(0.0, cell)?;
        let pump_rabi = match raw.quantity("medium.pump.rabi", AngularRate)? {
            Some(v) => v,
            None => {
                let intensity = raw.quantity_or("medium.pump.intensity", Intensity, 20e4)?;
                if intensity < 0.0 {
                    return Err(Error::validation("medium.pump.intensity", "must be >= 0"));
                }
                rabi_from_intensity(intensity, medium.species.dipole_moment)?
            }
        };
        let probe_rabi = match raw.quantity("medium.probe.rabi", AngularRate)? {
            Some(v) => v,
            None => {
                let ratio = raw.quantity_or("medium.probe.intensity_ratio", Dimensionless, 0.0)?;
                if !(ratio >= 0.0) {
                    return Err(Error::validation("medium.probe.intensity_ratio", "must be >= 0"));
                }
                pump_rabi * ratio.sqrt()
            }
        };
        medium.lambda.pump_rabi = pump_rabi;
        medium.lambda.probe_rabi = probe_rabi;
        medium.lambda.one_photon_detuning = raw.quantity_or("medium.one_photon_detuning", AngularRate, 0.0)?;
        if let Some(g) = raw.auto_or_quantity("medium.gamma12", AngularRate)? {
            medium.lambda.gamma12 = g;
        }
        medium.lambda.gamma_extra = raw.quantity_or("medium.gamma_extra", AngularRate, 0.0)?;
        medium.lambda.ground_relaxation = raw.quantity_or("medium.ground_relaxation", AngularRate, 0.0)?;
        let b1 = raw.quantity_or("medium.branching_1", Dimensionless, 0.5)?;
        if !(0.0..=1.0).contains(&b1) {
            return Err(Error::validation("medium.branching_1", "must lie in [0, 1]"));
        }
        medium.lambda.branching_1 = b1;
        medium.lambda.branching_2 = 1.0 - b1;
        medium.dipole_scale = raw.quantity_or("medium.dipole_scale", Dimensionless, 1.0)?;
        let nodes = raw.integer("medium.quadrature.nodes", 64)?;
        if !(2..=512).contains(&nodes) {
            return Err(Error::validation("medium.quadrature.nodes", "must lie in [2, 512]"));
        }
        let shift = raw.quantity_or("medium.quadrature.shift", Dimensionless, GaussHermite::DEFAULT_SHIFT)?;
        if !(0.0..=4.0).contains(&shift) {
            return Err(Error::validation("medium.quadrature.shift", "must lie in [0, 4]"));
        }
        medium.quadrature = GaussHermite::with_shift(nodes as usize, shift);
        medium.validate().map_err(prefixed("medium."))?;

        let calibration = if raw.switch("medium.calibrate", false)? {
            let defaults = ParameterBounds::default();
            let pair = |lo: &str, hi: &str, q, d: (f64, f64)| -> Result<(f64, f64)> {
                Ok((raw.quantity_or(lo, q, d.0)?, raw.quantity_or(hi, q, d.1)?))
            };
            let targets = CalibrationTargets {
                peak_transmission: raw.quantity_or("calibration.peak_transmission", Dimensionless, 0.23)?,
                eit_fwhm: raw.quantity_or(
                    "calibration.eit_fwhm",
                    AngularRate,
                    crate::constants::TWO_PI * 1e6,
                )?,
                group_index: raw.quantity_or("calibration.group_index", Dimensionless, 607.0)?,
            };
            targets.validate().map_err(prefixed("calibration."))?;
            let bounds = ParameterBounds {
                density: pair("calibration.density_min", "calibration.density_max", NumberDensity, defaults.density)?,
                gamma12: pair("calibration.gamma12_min", "calibration.gamma12_max", AngularRate, defaults.gamma12)?,
                pump_rabi: pair(
                    "calibration.pump_rabi_min",
                    "calibration.pump_rabi_max",
                    AngularRate,
                    defaults.pump_rabi,
                )?,
            };
            for (field, (lo, hi)) in [
                ("calibration.density", bounds.density),
                ("calibration.gamma12", bounds.gamma12),
                ("calibration.pump_rabi", bounds.pump_rabi),
            ] {
                if !(lo > 0.0 && hi > lo && hi.is_finite()) {
                    return Err(Error::validation(field, "bounds need 0 < min < max"));
                }
            }
            let starts = raw.integer("calibration.starts", 4)?;
            if starts == 0 {
                return Err(Error::validation("calibration.starts", "must be >= 1"));
            }
            Some(CalibrationSpec {
                targets,
                bounds,
                starts: starts as usize,
                grid: GridSpec {
                    half_span: raw.quantity_or("calibration.grid.half_span", AngularRate, DEFAULT_HALF_SPAN)?,
                    points: grid_points(
                        "calibration.grid.points",
                        raw.integer("calibration.grid.points", DEFAULT_POINTS as u64)?,
                    )?,
                },
            })
        } else {
            if raw.section("calibration.") {
                return Err(Error::validation(
                    "calibration",
                    "calibration keys need `medium.calibrate = on`",
                ));
            }
            None
        };

        let homodyne = HomodyneSpec {
            reference_phase: raw.quantity_or("homodyne.reference_phase", Angle, FRAC_PI_2)?,
            reference_amplitude: raw.quantity_or("homodyne.reference_amplitude", Dimensionless, 1.0)?,
            incident_amplitude: raw.quantity_or("homodyne.incident_amplitude", Dimensionless, 1.0)?,
        };

        let lockin = if raw.section("lockin.") {
            Some(LockIn::new(
                raw.quantity_or("lockin.dither_amplitude", AngularRate, crate::constants::TWO_PI * 50e3)?,
                raw.quantity_or("lockin.dither_rate", AngularRate, crate::constants::TWO_PI * 1e3)?,
            ))
        } else {
            None
        };

        let pulse = if raw.section("pulse.") {
            Some(PulseSpec {
                fwhm: raw.quantity_or("pulse.fwhm", Time, 400e-9)?,
                window: raw.quantity_or("pulse.window", Time, 10e-6)?,
                samples: raw.integer("pulse.samples", 16384)? as usize,
                carrier_detuning: raw.quantity_or("pulse.carrier_detuning", AngularRate, 0.0)?,
            })
        } else {
            None
        };

        let fwm = if raw.section("fwm.") {
            raw.exclusive("fwm.backward_pump_rabi", "fwm.backward_pump_intensity")?;
            raw.exclusive("fwm.probe_rabi", "fwm.probe_intensity_ratio")?;
            let backward = match raw.quantity("fwm.backward_pump_rabi", AngularRate)? {
                Some(v) => v,
                None => match raw.quantity("fwm.backward_pump_intensity", Intensity)? {
                    Some(i) => rabi_from_intensity(i, medium.dipole())?,
                    None => crate::constants::TWO_PI * 1.5e6,
                },
            };
            let probe = match raw.quantity("fwm.probe_rabi", AngularRate)? {
                Some(v) => v,
                None => backward * raw.quantity_or("fwm.probe_intensity_ratio", Dimensionless, 0.1)?.max(0.0).sqrt(),
            };
            Some(FwmSpec {
                forward_pump_rabi: raw.auto_or_quantity("fwm.forward_pump_rabi", AngularRate)?,
                backward_pump_rabi: backward,
                probe_rabi: probe,
                gamma12: raw.auto_or_quantity("fwm.gamma12", AngularRate)?,
                peak_reflectivity: raw.quantity_or("fwm.peak_reflectivity", Dimensionless, 0.017)?,
                grid: GridSpec {
                    half_span: raw.quantity_or("fwm.grid.half_span", AngularRate, DEFAULT_HALF_SPAN)?,
                    points: grid_points("fwm.grid.points", raw.integer("fwm.grid.points", 2001)?)?,
                },
            })
        } else {
            None
        };

        let gyro = if raw.section("gyro.") {
            Some(GyroSpec {
                loop_area: raw.quantity_or("gyro.loop_area", Area, 0.01)?,
                rotation_rate: raw.quantity_or("gyro.rotation_rate", AngularRate, 1e-3)?,
                group_index: raw.auto_or_quantity("gyro.group_index", Dimensionless)?,
                pc_reflectivity: raw.quantity_or("gyro.pc_reflectivity", Dimensionless, 0.017)?,
                parasitic_phase: raw.quantity_or("gyro.parasitic_phase", Angle, FRAC_PI_2)?,
                fringe_points: raw.integer("gyro.fringe_points", 64)? as usize,
            })
        } else {
            None
        };

        let sweep = match (raw.has("sweep.parameter"), raw.has("sweep.values")) {
            (false, false) => None,
            (true, true) => {
                let text = &raw.entries["sweep.parameter"].text;
                let parameter = SweepParameter::ALL
                    .iter()
                    .find(|(n, _)| n == text)
                    .map(|(_, p)| *p)
                    .ok_or_else(|| {
                        raw.error(
                            "sweep.parameter",
                            0,
                            format!(
                                "unknown parameter `{text}`; expected one of {}",
                                SweepParameter::ALL.map(|(n, _)| n).join(", ")
                            ),
                        )
                    })?;
                Some(Sweep {
                    parameter,
                    values: raw.list("sweep.values", parameter.quantity())?,
                })
            }
            _ => {
                return Err(Error::validation(
                    "sweep",
                    "`sweep.parameter` and `sweep.values` must be given together",
                ))
            }
        };

        let scenario = Self {
            name,
            seed,
            grid,
            medium,
            calibration,
            homodyne,
            lockin,
            pulse,
            fwm,
            gyro,
            sweep,
        };
        scenario.validate()?;
        for member in scenario.expand_sweep()? {
            member.validate()?;
        }
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty()
            || !self
                .name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        {
            return Err(Error::validation("name", "must be a nonempty identifier"));
        }
        positive("grid.half_span", self.grid.half_span)?;
        if self.grid.points < 101 {
            return Err(Error::validation("grid.points", "needs at least 101 points"));
        }
        self.medium.validate().map_err(prefixed("medium."))?;
        if let Some(c) = &self.calibration {
            positive("calibration.grid.half_span", c.grid.half_span)?;
        }
        let h = &self.homodyne;
        if !h.reference_phase.is_finite() {
            return Err(Error::validation("homodyne.reference_phase", "must be finite"));
        }
        if !(h.reference_amplitude >= 0.0) {
            return Err(Error::validation("homodyne.reference_amplitude", "must be >= 0"));
        }
        if !(h.incident_amplitude > 0.0) {
            return Err(Error::validation("homodyne.incident_amplitude", "must be > 0"));
        }
        if let Some(l) = &self.lockin {
            positive("lockin.dither_amplitude", l.dither_amplitude)?;
            positive("lockin.dither_rate", l.dither_rate)?;
        }
        if let Some(p) = &self.pulse {
            positive("pulse.fwhm", p.fwhm)?;
            if !(p.samples >= 4096 && p.samples.is_power_of_two()) {
                return Err(Error::validation("pulse.samples", "must be a power of two >= 4096"));
            }
            if !(p.window >= 10.0 * p.fwhm) {
                return Err(Error::validation("pulse.window", "must be at least 10 × pulse.fwhm"));
            }
            if !p.carrier_detuning.is_finite() {
                return Err(Error::validation("pulse.carrier_detuning", "must be finite"));
            }
            let reach = p.carrier_detuning.abs() + p.spectral_reach();
            if reach > self.grid.half_span {
                return Err(Error::validation(
                    "pulse.fwhm",
                    format!(
                        "pulse spectrum reaches {reach:.4e} rad/s, beyond grid.half_span {:.4e}",
                        self.grid.half_span
                    ),
                ));
            }
        }
        if let Some(f) = &self.fwm {
            for (field, v) in [
                ("fwm.backward_pump_rabi", Some(f.backward_pump_rabi)),
                ("fwm.probe_rabi", Some(f.probe_rabi)),
                ("fwm.forward_pump_rabi", f.forward_pump_rabi),
                ("fwm.gamma12", f.gamma12),
            ] {
                if let Some(v) = v {
                    if !(v >= 0.0 && v.is_finite()) {
                        return Err(Error::validation(field, "must be finite and >= 0"));
                    }
                }
            }
            if !(0.0..1.0).contains(&f.peak_reflectivity) {
                return Err(Error::validation("fwm.peak_reflectivity", "must lie in [0, 1)"));
            }
            positive("fwm.grid.half_span", f.grid.half_span)?;
        }
        if let Some(g) = &self.gyro {
            positive("gyro.loop_area", g.loop_area)?;
            if !g.rotation_rate.is_finite() {
                return Err(Error::validation("gyro.rotation_rate", "must be finite"));
            }
            if let Some(n) = g.group_index {
                if !(n >= 1.0 && n.is_finite()) {
                    return Err(Error::validation("gyro.group_index", "must be >= 1"));
                }
            }
            if !(0.0..0.25).contains(&g.pc_reflectivity) {
                return Err(Error::validation(
                    "gyro.pc_reflectivity",
                    "power reflectivity must lie in [0, 0.25)",
                ));
            }
            if !g.parasitic_phase.is_finite() {
                return Err(Error::validation("gyro.parasitic_phase", "must be finite"));
            }
            if g.fringe_points < 3 {
                return Err(Error::validation("gyro.fringe_points", "must be >= 3"));
            }
        }
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return Err(Error::validation("sweep.values", "must not be empty"));
            }
            let needs = match s.parameter {
                SweepParameter::PumpIntensity => None,
                SweepParameter::BackwardPumpIntensity => self.fwm.is_none().then_some("fwm"),
                SweepParameter::CarrierDetuning | SweepParameter::PulseFwhm => {
                    self.pulse.is_none().then_some("pulse")
                }
                SweepParameter::RotationRate | SweepParameter::ParasiticPhase => {
                    self.gyro.is_none().then_some("gyro")
                }
            };
            if let Some(section) = needs {
                return Err(Error::validation(
                    "sweep.parameter",
                    format!("`{}` needs a {section} section", s.parameter.name()),
                ));
            }
            if s.parameter.quantity() == Dimensionless && s.values.iter().any(|&v| !(v > 0.0)) {
                return Err(Error::validation("sweep.values", "scale factors must be > 0"));
            }
        }
        Ok(())
    }

    /// One scenario per sweep value, named `<name>_<index>`; a scenario
    /// without a sweep expands to itself.
    pub fn expand_sweep(&self) -> Result<Vec<Scenario>> {
        let Some(sweep) = &self.sweep else {
            return Ok(vec![self.clone()]);
        };
        Ok(sweep
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let mut m = self.clone();
                m.sweep = None;
                m.name = format!("{}_{}", self.name, i);
                match sweep.parameter {
                    SweepParameter::PumpIntensity => {
                        m.medium.lambda.pump_rabi *= v.sqrt();
                        m.medium.lambda.probe_rabi *= v.sqrt();
                    }
                    SweepParameter::BackwardPumpIntensity => {
                        if let Some(f) = m.fwm.as_mut() {
                            f.backward_pump_rabi *= v.sqrt();
                            f.probe_rabi *= v.sqrt();
                        }
                    }
                    SweepParameter::CarrierDetuning => {
                        if let Some(p) = m.pulse.as_mut() {
                            p.carrier_detuning = v;
                        }
                    }
                    SweepParameter::PulseFwhm => {
                        if let Some(p) = m.pulse.as_mut() {
                            p.fwhm = v;
                        }
                    }
                    SweepParameter::RotationRate => {
                        if let Some(g) = m.gyro.as_mut() {
                            g.rotation_rate = v;
                        }
                    }
                    SweepParameter::ParasiticPhase => {
                        if let Some(g) = m.gyro.as_mut() {
                            g.parasitic_phase = v;
                        }
                    }
                }
                m
            })
            .collect())
    }

    /// Fully resolved settings in canonical units.
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        let mut put = |key: &str, value: String| {
            out.push_str(key);
            out.push_str(" = ");
            out.push_str(&value);
            out.push('\n');
        };
        let q = format_value;
        let auto = |v: Option<f64>, quantity| v.map_or("auto".to_string(), |x| q(x, quantity));

        put("name", self.name.clone());
        put("seed", self.seed.to_string());
        put("grid.half_span", q(self.grid.half_span, AngularRate));
        put("grid.points", self.grid.points.to_string());
        let m = &self.medium;
        put("medium.cell.length", q(m.cell.length, Length));
        put("medium.cell.temperature", q(m.cell.temperature, Temperature));
        put("medium.cell.beam_waist", q(m.cell.beam_waist, Length));
        put("medium.cell.residual_dephasing", q(m.cell.residual_dephasing, AngularRate));
        put("medium.cell.density", auto(m.cell.density_override, NumberDensity));
        put("medium.pump.rabi", q(m.lambda.pump_rabi, AngularRate));
        put("medium.probe.rabi", q(m.lambda.probe_rabi, AngularRate));
        put("medium.one_photon_detuning", q(m.lambda.one_photon_detuning, AngularRate));
        put("medium.gamma12", q(m.lambda.gamma12, AngularRate));
        put("medium.gamma_extra", q(m.lambda.gamma_extra, AngularRate));
        put("medium.ground_relaxation", q(m.lambda.ground_relaxation, AngularRate));
        put("medium.branching_1", q(m.lambda.branching_1, Dimensionless));
        put("medium.dipole_scale", q(m.dipole_scale, Dimensionless));
        put("medium.quadrature.nodes", m.quadrature.order().to_string());
        put("medium.quadrature.shift", q(m.quadrature.contour_shift(), Dimensionless));
        put(
            "medium.calibrate",
            if self.calibration.is_some() { "on" } else { "off" }.into(),
        );
        if let Some(c) = &self.calibration {
            put("calibration.peak_transmission", q(c.targets.peak_transmission, Dimensionless));
            put("calibration.eit_fwhm", q(c.targets.eit_fwhm, AngularRate));
            put("calibration.group_index", q(c.targets.group_index, Dimensionless));
            put("calibration.density_min", q(c.bounds.density.0, NumberDensity));
            put("calibration.density_max", q(c.bounds.density.1, NumberDensity));
            put("calibration.gamma12_min", q(c.bounds.gamma12.0, AngularRate));
            put("calibration.gamma12_max", q(c.bounds.gamma12.1, AngularRate));
            put("calibration.pump_rabi_min", q(c.bounds.pump_rabi.0, AngularRate));
            put("calibration.pump_rabi_max", q(c.bounds.pump_rabi.1, AngularRate));
            put("calibration.starts", c.starts.to_string());
            put("calibration.grid.half_span", q(c.grid.half_span, AngularRate));
            put("calibration.grid.points", c.grid.points.to_string());
        }
        let h = &self.homodyne;
        put("homodyne.reference_phase", q(h.reference_phase, Angle));
        put("homodyne.reference_amplitude", q(h.reference_amplitude, Dimensionless));
        put("homodyne.incident_amplitude", q(h.incident_amplitude, Dimensionless));
        if let Some(l) = &self.lockin {
            put("lockin.dither_amplitude", q(l.dither_amplitude, AngularRate));
            put("lockin.dither_rate", q(l.dither_rate, AngularRate));
        }
        if let Some(p) = &self.pulse {
            put("pulse.fwhm", q(p.fwhm, Time));
            put("pulse.window", q(p.window, Time));
            put("pulse.samples", p.samples.to_string());
            put("pulse.carrier_detuning", q(p.carrier_detuning, AngularRate));
        }
        if let Some(f) = &self.fwm {
            put("fwm.forward_pump_rabi", auto(f.forward_pump_rabi, AngularRate));
            put("fwm.backward_pump_rabi", q(f.backward_pump_rabi, AngularRate));
            put("fwm.probe_rabi", q(f.probe_rabi, AngularRate));
            put("fwm.gamma12", auto(f.gamma12, AngularRate));
            put("fwm.peak_reflectivity", q(f.peak_reflectivity, Dimensionless));
            put("fwm.grid.half_span", q(f.grid.half_span, AngularRate));
            put("fwm.grid.points", f.grid.points.to_string());
        }
        if let Some(g) = &self.gyro {
            put("gyro.loop_area", q(g.loop_area, Area));
            put("gyro.rotation_rate", q(g.rotation_rate, AngularRate));
            put("gyro.group_index", auto(g.group_index, Dimensionless));
            put("gyro.pc_reflectivity", q(g.pc_reflectivity, Dimensionless));
            put("gyro.parasitic_phase", q(g.parasitic_phase, Angle));
            put("gyro.fringe_points", g.fringe_points.to_string());
        }
        if let Some(s) = &self.sweep {
            put("sweep.parameter", s.parameter.name().into());
            let quantity = s.parameter.quantity();
            let mut list: Vec<String> = s.values.iter().map(|v| format!("{v:e}")).collect();
            if let (Some(last), Some(unit)) = (list.last_mut(), quantity.canonical_unit()) {
                last.push(' ');
                last.push_str(unit);
            }
            put("sweep.values", list.join(", "));
        }
        out
    }
}
