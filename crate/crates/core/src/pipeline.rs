//! Runs a scenario end to end and writes its tables, plots and summary.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::constants::{SPEED_OF_LIGHT, TWO_PI};
use crate::error::{Error, Result};
use crate::fwm::{pc_reflectivity_spectrum, FwmConfig};
use crate::gyro::{bias_versus_parasitic_phase, pc_bias, sagnac_phase, GyroScenario};
use crate::homodyne::{homodyne_trace, index_variation_exact, HomodyneConfig};
use crate::medium::MediumConfig;
use crate::output::{write_csv, write_svg, Series};
use crate::pulse::{gaussian_pulse, measure_delay, profile_fwhm, propagate, spreading_metrics};
use crate::scenario::Scenario;
use crate::spectra::calibrate::{calibrate, Calibration, CalibrationOptions};
use crate::spectra::kramers_kronig::{flat_background_cutoff, relative_rms_error};
use crate::spectra::{
    dispersion_slope, eit_fwhm, group_index, lock_in_signal, medium_response,
    second_order_dispersion, transmission_spectrum, LockInStatus, MediumResponse, DEFAULT_FIT_DEGREE,
};

/// Which parts of a scenario to execute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Stages {
    pub spectrum: bool,
    pub dispersion: bool,
    pub lockin: bool,
    pub pulse: bool,
    pub fwm: bool,
    pub gyro: bool,
}

impl Stages {
    pub const ALL: Self = Self {
        spectrum: true,
        dispersion: true,
        lockin: true,
        pulse: true,
        fwm: true,
        gyro: true,
    };
    pub const NONE: Self = Self {
        spectrum: false,
        dispersion: false,
        lockin: false,
        pulse: false,
        fwm: false,
        gyro: false,
    };
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub stages: Stages,
    pub svg: bool,
    /// Overrides the scenario seed.
    pub seed: Option<u64>,
    /// Overrides `grid.points`.
    pub grid_points: Option<usize>,
    /// Fail when a stage is requested but its section is missing.
    pub require_sections: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            stages: Stages::ALL,
            svg: false,
            seed: None,
            grid_points: None,
            require_sections: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub name: String,
    pub values: Vec<(String, f64)>,
    pub notes: Vec<String>,
    pub members: Vec<Report>,
}

impl Report {
    fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            ..Default::default()
        }
    }

    fn set(&mut self, key: &str, value: f64) {
        self.values.push((key.to_string(), value));
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.values.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    pub fn member(&self, name: &str) -> Option<&Report> {
        self.members.iter().find(|m| m.name == name)
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        self.write_summary(&mut out);
        out
    }

    fn write_summary(&self, out: &mut String) {
        let _ = writeln!(out, "[{}]", self.name);
        for (k, v) in &self.values {
            let _ = writeln!(out, "{k} = {v:e}");
        }
        for n in &self.notes {
            let _ = writeln!(out, "note = {n}");
        }
        for m in &self.members {
            out.push('\n');
            m.write_summary(out);
        }
    }
}

/// Applies overrides and calibration, returning the scenario that is
/// actually simulated.
pub fn resolve(scenario: &Scenario, options: &RunOptions, report: &mut Report) -> Result<Scenario> {
    let mut s = scenario.clone();
    if let Some(seed) = options.seed {
        s.seed = seed;
    }
    if let Some(points) = options.grid_points {
        s.grid.points = points;
        s.validate()?;
    }
    if let Some(spec) = s.calibration.take() {
        let cal = calibrate(
            &s.medium,
            &spec.targets,
            &spec.bounds,
            &CalibrationOptions {
                seed: s.seed,
                starts: spec.starts,
                half_span: spec.grid.half_span,
                grid_points: spec.grid.points,
                ..Default::default()
            },
        )?;
        record_calibration(&s.medium, &cal, report);
        s.medium = cal.medium;
    }
    Ok(s)
}

fn record_calibration(base: &MediumConfig, cal: &Calibration, report: &mut Report) {
    let m = &cal.medium;
    report.set("calibrated_density_m3", m.cell.density_override.unwrap_or(f64::NAN));
    report.set("calibrated_gamma12_hz", m.lambda.gamma12 / TWO_PI);
    report.set("calibrated_pump_rabi_hz", m.lambda.pump_rabi / TWO_PI);
    report.set("configured_pump_rabi_hz", base.lambda.pump_rabi / TWO_PI);
    report.set("calibration_objective", cal.objective);
    report.set("calibration_evaluations", cal.evaluations as f64);
}

/// Runs every requested stage, writing files under `out_dir`.
pub fn run(scenario: &Scenario, out_dir: &Path, options: &RunOptions) -> Result<Report> {
    std::fs::create_dir_all(out_dir)?;
    if options.require_sections {
        check_sections(scenario, &options.stages)?;
    }
    let mut report = Report::new(&scenario.name);
    let resolved = resolve(scenario, options, &mut report)?;
    if resolved.medium != scenario.medium {
        let mut dump = resolved.clone();
        dump.calibration = None;
        std::fs::write(out_dir.join("resolved.cfg"), dump.to_config_string())?;
    }
    if options.stages == Stages::NONE {
        std::fs::write(out_dir.join("summary.txt"), report.summary())?;
        return Ok(report);
    }

    if resolved.sweep.is_some() {
        let members = resolved.expand_sweep()?;
        let reports = members
            .par_iter()
            .map(|m| run_member(m, &out_dir.join(&m.name), options))
            .collect::<Result<Vec<_>>>()?;
        report.members = reports;
    } else {
        let single = run_member(&resolved, out_dir, options)?;
        report.values.extend(single.values);
        report.notes.extend(single.notes);
    }
    std::fs::write(out_dir.join("summary.txt"), report.summary())?;
    Ok(report)
}

fn check_sections(s: &Scenario, stages: &Stages) -> Result<()> {
    let missing = [
        (stages.lockin && !stages.spectrum, s.lockin.is_none(), "lockin"),
        (stages.pulse, s.pulse.is_none(), "pulse"),
        (stages.fwm, s.fwm.is_none(), "fwm"),
        (stages.gyro, s.gyro.is_none(), "gyro"),
    ];
    for (wanted, absent, section) in missing {
        if wanted && absent {
            return Err(Error::validation(section, "section required by this command is missing"));
        }
    }
    Ok(())
}

fn hz(values: &[f64]) -> Vec<f64> {
    values.iter().map(|v| v / TWO_PI).collect()
}

struct Member<'a> {
    s: &'a Scenario,
    dir: PathBuf,
    svg: bool,
    report: Report,
}

fn run_member(s: &Scenario, dir: &Path, options: &RunOptions) -> Result<Report> {
    std::fs::create_dir_all(dir)?;
    let mut m = Member {
        s,
        dir: dir.to_path_buf(),
        svg: options.svg,
        report: Report::new(&s.name),
    };
    let stages = options.stages;
    let grid = s.grid.detunings();
    let resp = medium_response(&s.medium, &grid)?;
    let n_g = group_index(&resp, resp.carrier_angular_frequency)?;

    if stages.spectrum || stages.dispersion {
        m.spectrum(&resp)?;
    }
    if stages.dispersion {
        m.dispersion(&resp)?;
    }
    if stages.lockin {
        if let Some(lock) = &s.lockin {
            m.lockin(lock)?;
        }
    }
    if stages.pulse {
        if let Some(_) = &s.pulse {
            m.pulse(&resp, n_g)?;
        }
    }
    if stages.fwm {
        if s.fwm.is_some() {
            m.fwm()?;
        }
    }
    if stages.gyro {
        if s.gyro.is_some() {
            m.gyro(n_g)?;
        }
    }
    std::fs::write(dir.join("summary.txt"), m.report.summary())?;
    Ok(m.report)
}

impl Member<'_> {
    fn spectrum(&mut self, resp: &MediumResponse) -> Result<()> {
        let t = transmission_spectrum(resp, self.s.medium.cell.length)?;
        self.report.set("peak_transmission", t.max());
        self.report.set("transmission_at_resonance", t.interpolate(0.0).unwrap_or(f64::NAN));
        self.report.set("argmax_detuning_hz", t.detunings()[t.argmax()] / TWO_PI);
        match eit_fwhm(&t) {
            Ok(w) => self.report.set("eit_fwhm_hz", w / TWO_PI),
            Err(e) => self.report.notes.push(format!("eit_fwhm unavailable: {e}")),
        }
        let d_hz = hz(resp.detunings());
        let chi = resp.chi.values();
        let n1 = resp.index_minus_one.values();
        let cols: Vec<Vec<f64>> = vec![
            d_hz.clone(),
            t.values().to_vec(),
            chi.iter().map(|z| z.re).collect(),
            chi.iter().map(|z| z.im).collect(),
            n1.iter().map(|z| z.re).collect(),
            n1.iter().map(|z| z.im).collect(),
            resp.absorption_coeff.clone(),
        ];
        write_csv(
            &self.dir.join("spectrum.csv"),
            &["detuning_hz", "transmission", "chi_re", "chi_im", "n_minus_1_re", "n_minus_1_im", "alpha_per_m"],
            &cols.iter().map(|c| c.as_slice()).collect::<Vec<_>>(),
        )?;
        if self.svg {
            write_svg(
                &self.dir.join("spectrum.svg"),
                "Probe transmission",
                "two-photon detuning (Hz)",
                "transmission",
                &[Series { label: &self.s.name, x: &d_hz, y: t.values() }],
            )?;
        }
        Ok(())
    }

    fn dispersion(&mut self, resp: &MediumResponse) -> Result<()> {
        let s = self.s;
        let slope = dispersion_slope(resp)?;
        self.report.set("dispersion_slope_s_per_rad", slope.slope);
        self.report.set("group_index", group_index(resp, resp.carrier_angular_frequency)?);
        let fit_halfwidth = TWO_PI * 0.5e6;
        match second_order_dispersion(resp, fit_halfwidth, DEFAULT_FIT_DEGREE) {
            Ok(v) => self.report.set("second_order_dispersion_s2_per_rad2", v),
            Err(e) => self.report.notes.push(format!("second-order dispersion unavailable: {e}")),
        }
        let density = s.medium.number_density()?;
        if density > 0.0 {
            let cutoff = flat_background_cutoff(&s.medium);
            let t = transmission_spectrum(resp, s.medium.cell.length)?;
            let window = eit_fwhm(&t).map(|w| 5.0 * w).unwrap_or(TWO_PI * 5e6);
            self.report.set("kramers_kronig_rms_error", relative_rms_error(&resp.chi, cutoff, window));
        }

        let h = &s.homodyne;
        let cfg = HomodyneConfig::from_response(
            resp,
            s.medium.cell.length,
            h.incident_amplitude,
            h.reference_amplitude,
            h.reference_phase,
        )?;
        let trace = homodyne_trace(resp, &cfg)?;
        self.report.set("homodyne_max_phase_rad", trace.max_phase);
        if trace.beyond_small_phase {
            self.report.notes.push(format!(
                "homodyne phase reaches {:.3} rad, beyond the small-phase regime; index read back with arcsin",
                trace.max_phase
            ));
        }
        let d_hz = hz(resp.detunings());
        let (delta_n, valid): (Vec<f64>, Vec<f64>) = if (h.reference_phase - std::f64::consts::FRAC_PI_2).abs() < 1e-9 {
            let inv = index_variation_exact(&trace.signal, &cfg)?;
            (
                inv.delta_n.values().to_vec(),
                inv.valid.iter().map(|&v| if v { 1.0 } else { 0.0 }).collect(),
            )
        } else {
            (vec![f64::NAN; d_hz.len()], vec![0.0; d_hz.len()])
        };
        write_csv(
            &self.dir.join("homodyne.csv"),
            &["detuning_hz", "signal", "delta_n", "valid"],
            &[&d_hz, trace.signal.values(), &delta_n, &valid],
        )?;
        if self.svg {
            let n_re: Vec<f64> = resp.index_minus_one.values().iter().map(|z| z.re).collect();
            write_svg(
                &self.dir.join("dispersion.svg"),
                "Refractive index variation",
                "two-photon detuning (Hz)",
                "Re(n) - 1",
                &[Series { label: "model", x: &d_hz, y: &n_re }],
            )?;
        }
        Ok(())
    }

    fn lockin(&mut self, lock: &crate::spectra::LockIn) -> Result<()> {
        let grid = self.s.grid.detunings();
        let centre = grid.len() / 2;
        let stride = (grid.len() - 1).div_ceil(4000).max(1);
        let sub: Vec<f64> = grid
            .iter()
            .enumerate()
            .filter(|(i, _)| i.abs_diff(centre) % stride == 0)
            .map(|(_, &d)| d)
            .collect();
        let medium = &self.s.medium;
        let trace = lock_in_signal(|d| medium.transmission_at(d), &sub, lock)?;
        if let Some(slope) = trace.central_slope() {
            self.report.set("lockin_central_slope", slope);
        }
        self.report.set("lockin_rms_discrepancy", trace.relative_rms_discrepancy());
        if let LockInStatus::DitherTooLarge { amplitude_over_fwhm } = trace.status {
            self.report.notes.push(format!(
                "lock-in dither is {amplitude_over_fwhm:.3} of the FWHM; small-dither contract not met"
            ));
        }
        let d_hz = hz(&sub);
        write_csv(
            &self.dir.join("lockin.csv"),
            &["detuning_hz", "simulated", "analytic"],
            &[&d_hz, trace.simulated.values(), trace.analytic.values()],
        )?;
        if self.svg {
            write_svg(
                &self.dir.join("lockin.svg"),
                "Lock-in signal",
                "two-photon detuning (Hz)",
                "first harmonic",
                &[
                    Series { label: "simulated", x: &d_hz, y: trace.simulated.values() },
                    Series { label: "analytic", x: &d_hz, y: trace.analytic.values() },
                ],
            )?;
        }
        Ok(())
    }

    fn pulse(&mut self, resp: &MediumResponse, n_g: f64) -> Result<()> {
        let spec = self.s.pulse.expect("pulse section");
        let length = self.s.medium.cell.length;
        let reference = gaussian_pulse(spec.fwhm, spec.window, spec.samples, spec.carrier_detuning)?;
        let out = propagate(&reference, resp, length, resp.carrier_angular_frequency)?;
        let delay = measure_delay(&out, &reference)?;
        let spread = spreading_metrics(&out, &reference)?;
        self.report.set("delay_ns", delay.centroid * 1e9);
        self.report.set("xcorr_delay_ns", delay.cross_correlation * 1e9);
        self.report.set("group_delay_ns", (n_g - 1.0) * length / SPEED_OF_LIGHT * 1e9);
        self.report.set("fwhm_ratio", spread.fwhm_ratio);
        self.report.set("skewness", spread.skewness);
        self.report.set("energy_transmission", spread.energy_transmission);
        for (file, p) in [("pulse_reference.csv", &reference), ("pulse_out.csv", &out)] {
            let re: Vec<f64> = p.envelope().iter().map(|z| z.re).collect();
            let im: Vec<f64> = p.envelope().iter().map(|z| z.im).collect();
            write_csv(
                &self.dir.join(file),
                &["time_s", "re", "im", "intensity"],
                &[p.times(), &re, &im, &p.intensity()],
            )?;
        }
        if self.svg {
            let t_ns: Vec<f64> = reference.times().iter().map(|t| t * 1e9).collect();
            write_svg(
                &self.dir.join("pulse.svg"),
                "Probe pulse",
                "time (ns)",
                "intensity",
                &[
                    Series { label: "reference", x: &t_ns, y: &reference.intensity() },
                    Series { label: "through cell", x: &t_ns, y: &out.intensity() },
                ],
            )?;
        }
        Ok(())
    }

    fn fwm(&mut self) -> Result<()> {
        let spec = self.s.fwm.expect("fwm section");
        let medium = &self.s.medium;
        let cfg = FwmConfig {
            forward_pump_rabi: spec.forward_pump_rabi.unwrap_or(medium.lambda.pump_rabi),
            backward_pump_rabi: spec.backward_pump_rabi,
            probe_rabi: spec.probe_rabi,
            two_photon_detuning_grid: spec.grid.detunings(),
            gamma12: spec.gamma12.unwrap_or(medium.lambda.gamma12),
            excited_decay: medium.lambda.excited_decay,
            one_photon_detuning: medium.lambda.one_photon_detuning,
            peak_reflectivity_calibration: spec.peak_reflectivity,
        };
        let r = pc_reflectivity_spectrum(&cfg)?;
        self.report.set("pc_peak", r.max());
        self.report.set("pc_peak_detuning_hz", r.detunings()[r.argmax()] / TWO_PI);
        if let Some(w) = profile_fwhm(r.detunings(), r.values()) {
            self.report.set("pc_fwhm_hz", w / TWO_PI);
        }
        let d_hz = hz(r.detunings());
        write_csv(&self.dir.join("pc_spectrum.csv"), &["detuning_hz", "reflectivity"], &[&d_hz, r.values()])?;
        if self.svg {
            write_svg(
                &self.dir.join("pc_spectrum.svg"),
                "Phase-conjugate reflectivity",
                "two-photon detuning (Hz)",
                "reflectivity",
                &[Series { label: &self.s.name, x: &d_hz, y: r.values() }],
            )?;
        }
        Ok(())
    }

    fn gyro(&mut self, medium_group_index: f64) -> Result<()> {
        let spec = self.s.gyro.expect("gyro section");
        let scenario = GyroScenario {
            loop_area: spec.loop_area,
            rotation_rate: spec.rotation_rate,
            wavelength: self.s.medium.species.d1_wavelength,
            group_index: spec.group_index.unwrap_or(medium_group_index),
            pc_amplitude_reflectivity: spec.pc_reflectivity.sqrt(),
            parasitic_phase: spec.parasitic_phase,
        };
        let phase = sagnac_phase(&scenario)?;
        let bare = sagnac_phase(&GyroScenario { group_index: 1.0, ..scenario })?;
        let bias = pc_bias(&scenario, spec.fringe_points)?;
        self.report.set("gyro_group_index", scenario.group_index);
        self.report.set("sagnac_phase_rad", phase);
        self.report.set("sagnac_phase_bare_rad", bare);
        self.report.set("sagnac_enhancement", phase / bare);
        self.report.set("pc_phase_bias_rad", bias.phase_bias);
        self.report.set("pc_rotation_bias_rad_per_s", bias.rotation_bias);

        let thetas: Vec<f64> = (0..=72).map(|i| TWO_PI * i as f64 / 72.0).collect();
        let table = bias_versus_parasitic_phase(&scenario, &thetas, spec.fringe_points)?;
        let phase_bias: Vec<f64> = table.iter().map(|(_, b)| b.phase_bias).collect();
        let rotation_bias: Vec<f64> = table.iter().map(|(_, b)| b.rotation_bias).collect();
        let worst = phase_bias.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        self.report.set("pc_worst_phase_bias_rad", worst);
        write_csv(
            &self.dir.join("gyro_bias.csv"),
            &["parasitic_phase_rad", "phase_bias_rad", "rotation_bias_rad_per_s"],
            &[&thetas, &phase_bias, &rotation_bias],
        )?;
        if self.svg {
            write_svg(
                &self.dir.join("gyro_bias.svg"),
                "Sagnac phase bias from the parasitic field",
                "parasitic phase (rad)",
                "phase bias (rad)",
                &[Series { label: &self.s.name, x: &thetas, y: &phase_bias }],
            )?;
        }
        Ok(())
    }
}
