//! Unit suffixes accepted in scenario files and their conversion to the
//! internal m / s / K / rad/s system.
//!
//! Cyclic frequency units (Hz, kHz, MHz, GHz) are multiplied by 2π, so
//! `1 MHz` becomes 2π·10⁶ rad/s.

use std::f64::consts::PI;

use crate::constants::TWO_PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Dimensionless,
    Length,
    Area,
    Time,
    Temperature,
    /// Detunings, Rabi frequencies, decay and rotation rates.
    AngularRate,
    Angle,
    NumberDensity,
    Intensity,
}

impl Quantity {
    /// Unit written by the normalized dump.
    pub fn canonical_unit(self) -> Option<&'static str> {
        match self {
            Quantity::Dimensionless => None,
            Quantity::Length => Some("m"),
            Quantity::Area => Some("m2"),
            Quantity::Time => Some("s"),
            Quantity::Temperature => Some("K"),
            Quantity::AngularRate => Some("rad/s"),
            Quantity::Angle => Some("rad"),
            Quantity::NumberDensity => Some("m^-3"),
            Quantity::Intensity => Some("W/m2"),
        }
    }

    fn units(self) -> &'static [(&'static str, f64)] {
        match self {
            Quantity::Dimensionless => &[],
            Quantity::Length => &[
                ("m", 1.0),
                ("cm", 1e-2),
                ("mm", 1e-3),
                ("um", 1e-6),
                ("nm", 1e-9),
            ],
            Quantity::Area => &[("m2", 1.0), ("cm2", 1e-4), ("mm2", 1e-6)],
            Quantity::Time => &[
                ("s", 1.0),
                ("ms", 1e-3),
                ("us", 1e-6),
                ("ns", 1e-9),
                ("ps", 1e-12),
            ],
            Quantity::Temperature => &[("K", 1.0)],
            Quantity::AngularRate => &[
                ("rad/s", 1.0),
                ("Hz", TWO_PI),
                ("kHz", TWO_PI * 1e3),
                ("MHz", TWO_PI * 1e6),
                ("GHz", TWO_PI * 1e9),
                ("deg/s", PI / 180.0),
                ("deg/h", PI / 180.0 / 3600.0),
            ],
            Quantity::Angle => &[("rad", 1.0), ("deg", PI / 180.0)],
            Quantity::NumberDensity => &[("m^-3", 1.0), ("cm^-3", 1e6)],
            Quantity::Intensity => &[
                ("W/m2", 1.0),
                ("W/cm2", 1e4),
                ("mW/cm2", 10.0),
            ],
        }
    }

    pub fn accepted_units(self) -> Vec<&'static str> {
        let mut u: Vec<&str> = self.units().iter().map(|(s, _)| *s).collect();
        if self == Quantity::Temperature {
            u.push("degC");
        }
        u
    }

    /// Converts `value` given in `unit` to the canonical unit.
    pub fn convert(self, value: f64, unit: Option<&str>) -> Result<f64, String> {
        match (self, unit) {
            (Quantity::Dimensionless, None) => Ok(value),
            (Quantity::Dimensionless, Some(u)) => {
                Err(format!("dimensionless value must not carry a unit (got `{u}`)"))
            }
            (_, None) => Err(format!(
                "missing unit; expected one of {}",
                self.accepted_units().join(", ")
            )),
            (Quantity::Temperature, Some("degC")) => Ok(value + 273.15),
            (_, Some(u)) => self
                .units()
                .iter()
                .find(|(name, _)| *name == u)
                .map(|(_, factor)| value * factor)
                .ok_or_else(|| {
                    format!(
                        "unknown unit `{u}`; expected one of {}",
                        self.accepted_units().join(", ")
                    )
                }),
        }
    }
}

/// Splits `"12.5 MHz"` into the number and an optional unit, returning the
/// byte offset of the unit for error reporting.
pub fn split_value(text: &str) -> Result<(f64, Option<(usize, &str)>), String> {
    let trimmed = text.trim_start();
    let lead = text.len() - trimmed.len();
    let end = trimmed.find(char::is_whitespace).unwrap_or(trimmed.len());
    let number = &trimmed[..end];
    let value: f64 = number
        .parse()
        .map_err(|_| format!("`{number}` is not a number"))?;
    if !value.is_finite() {
        return Err(format!("`{number}` is not finite"));
    }
    let rest = &trimmed[end..];
    let unit = rest.trim();
    if unit.is_empty() {
        Ok((value, None))
    } else {
        let offset = lead + end + (rest.len() - rest.trim_start().len());
        if unit.contains(char::is_whitespace) {
            return Err(format!("unexpected text `{unit}` after the unit"));
        }
        Ok((value, Some((offset, unit))))
    }
}

/// Formats a canonical value so that parsing it back reproduces the bits.
pub fn format_value(value: f64, quantity: Quantity) -> String {
    match quantity.canonical_unit() {
        Some(u) => format!("{value:e} {u}"),
        None => format!("{value:e}"),
    }
}
