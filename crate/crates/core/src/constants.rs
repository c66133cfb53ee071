//! CODATA 2018 constants in SI units.

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const HBAR: f64 = 1.054_571_817e-34;
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
pub const BOLTZMANN: f64 = 1.380_649e-23;
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
/// Bohr radius times elementary charge, C·m.
pub const EA0: f64 = 8.478_353_625_5e-30;
pub const TORR: f64 = 101_325.0 / 760.0;

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
