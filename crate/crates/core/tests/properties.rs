//! Randomized invariants of the physical model and the numerical methods.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::Matrix3;
use proptest::prelude::*;
use slowlight_core::constants::{SPEED_OF_LIGHT, TWO_PI};
use slowlight_core::gyro::analytic_phase_bias;
use slowlight_core::lambda::{bloch_rhs, weak_probe_kernel};
use slowlight_core::scenario::load_preset;
use slowlight_core::spectra::calibrate::with_parameters;
use slowlight_core::spectra::kramers_kronig::{flat_background_cutoff, relative_rms_error};
use slowlight_core::spectra::symmetric_grid;
use slowlight_core::*;

type C64 = Complex64;

const GAMMA: f64 = 6.1542e7;

/// The slow-light cell at the calibrated operating point.
fn medium(density: f64, gamma12: f64, pump_rabi: f64) -> MediumConfig {
    let base = load_preset("slowlight").unwrap().medium;
    with_parameters(&base, density, gamma12, pump_rabi)
}

fn calibrated() -> MediumConfig {
    medium(2.1935e16, TWO_PI * 0.3783e6, TWO_PI * 37.65e6)
}

/// Grid wide enough for the medium's transparency window with a step well
/// below its width.
fn adaptive_grid(m: &MediumConfig, min_reach: f64) -> Vec<f64> {
    let half = m.expected_eit_halfwidth();
    let reach = (12.0 * half).max(min_reach);
    let points = 2 * (reach / (half / 40.0)).ceil() as usize + 1;
    symmetric_grid(reach, points)
}

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 32,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn medium_is_passive(
        log_density in 15.0f64..17.5,
        gamma12_mhz in 0.01f64..2.0,
        pump_mhz in 2.0f64..100.0,
        one_photon_mhz in -300.0f64..300.0,
    ) {
        let mut m = medium(10f64.powf(log_density), TWO_PI * gamma12_mhz * 1e6, TWO_PI * pump_mhz * 1e6);
        m.lambda.one_photon_detuning = TWO_PI * one_photon_mhz * 1e6;
        let reach = 12.0 * m.expected_eit_halfwidth();
        let resp = medium_response(&m, &symmetric_grid(reach, 101)).unwrap();
        for z in resp.chi.values() {
            prop_assert!(z.im >= 0.0, "gain Im χ = {}", z.im);
        }
        let t = transmission_spectrum(&resp, m.cell.length).unwrap();
        prop_assert!(t.values().iter().all(|&v| v <= 1.0));
    }

    #[test]
    fn weak_probe_matches_full_solver(
        pump in 0.05f64..2.0,
        gamma12 in 1e-3f64..0.1,
        one_photon in -2.0f64..2.0,
        two_photon in -5.0f64..5.0,
    ) {
        let mut cfg = LambdaConfig::new(GAMMA, pump * GAMMA, gamma12 * GAMMA);
        cfg.one_photon_detuning = one_photon * GAMMA;
        cfg.two_photon_detuning = two_photon * cfg.gamma12;
        cfg.probe_rabi = 1e-4 * cfg.gamma12.min(cfg.pump_rabi);
        let full = steady_state(&cfg).unwrap().probe_coherence();
        let weak = 0.5 * cfg.probe_rabi * weak_probe_kernel(
            cfg.gamma13(),
            cfg.gamma12,
            cfg.pump_rabi,
            C64::from(cfg.one_photon_detuning),
            C64::from(cfg.two_photon_detuning),
        );
        prop_assert!((full - weak).norm() <= 1e-3 * weak.norm(), "{full} vs {weak}");
    }

    #[test]
    fn steady_state_is_a_density_matrix(
        pump in 0.0f64..3.0,
        probe in 0.01f64..3.0,
        gamma12 in 1e-4f64..0.5,
        one_photon in -3.0f64..3.0,
        two_photon in -0.5f64..0.5,
    ) {
        let mut cfg = LambdaConfig::new(GAMMA, pump * GAMMA, gamma12 * GAMMA);
        cfg.probe_rabi = probe * GAMMA;
        cfg.one_photon_detuning = one_photon * GAMMA;
        cfg.two_photon_detuning = two_photon * GAMMA;
        let s = steady_state(&cfg).unwrap();
        prop_assert!((s.trace() - C64::from(1.0)).norm() <= 1e-12);
        prop_assert!(s.hermiticity_error() <= 1e-12);
        for level in 0..3 {
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&s.population(level)));
        }
    }

    #[test]
    fn quadrature_order_converged(delta_mhz in -5.0f64..5.0, one_photon_mhz in -500.0f64..500.0) {
        let mut m = calibrated();
        m.lambda.one_photon_detuning = TWO_PI * one_photon_mhz * 1e6;
        let delta = TWO_PI * delta_mhz * 1e6;
        let low = m.chi_at(delta).unwrap();
        m.quadrature = GaussHermite::new(128);
        let high = m.chi_at(delta).unwrap();
        prop_assert!((low - high).norm() <= 1e-8 * high.norm(), "{low} vs {high}");
    }

    #[test]
    fn response_has_even_absorption_and_odd_dispersion(delta_mhz in 0.0f64..8.0) {
        let m = calibrated();
        let d = TWO_PI * delta_mhz * 1e6;
        let plus = m.chi_at(d).unwrap();
        let minus = m.chi_at(-d).unwrap();
        let scale = plus.norm().max(minus.norm());
        prop_assert!((plus.im - minus.im).abs() <= 1e-10 * scale);
        prop_assert!((plus.re + minus.re).abs() <= 1e-10 * scale);
    }

    // Below about 20 MHz the window is dephasing limited and its width is
    // flat in the pump; the Ω² growth only shows once power broadening leads.
    #[test]
    fn transparency_widens_with_pump(pump_mhz in 20.0f64..80.0, factor in 1.2f64..3.0) {
        let at = |p: f64| {
            let m = medium(2.1935e16, TWO_PI * 0.3783e6, TWO_PI * p * 1e6);
            let grid = adaptive_grid(&m, 0.0);
            let resp = medium_response(&m, &grid).unwrap();
            eit_fwhm(&transmission_spectrum(&resp, m.cell.length).unwrap()).unwrap()
        };
        prop_assert!(at(pump_mhz * factor) > at(pump_mhz));
    }

    #[test]
    fn kramers_kronig_holds(gamma12_mhz in 0.1f64..1.0, pump_mhz in 20.0f64..60.0) {
        let m = medium(2.1935e16, TWO_PI * gamma12_mhz * 1e6, TWO_PI * pump_mhz * 1e6);
        let resp = medium_response(&m, &adaptive_grid(&m, (24.0 * m.expected_eit_halfwidth()).max(TWO_PI * 10e6))).unwrap();
        let t = transmission_spectrum(&resp, m.cell.length).unwrap();
        let fwhm = eit_fwhm(&t).unwrap();
        let err = relative_rms_error(&resp.chi, flat_background_cutoff(&m), 5.0 * fwhm);
        prop_assert!(err <= 0.02, "KK error {err}");
    }

    #[test]
    fn parseval_holds(fwhm_ns in 100.0f64..2000.0, carrier_mhz in -1.0f64..1.0) {
        let p = gaussian_pulse(fwhm_ns * 1e-9, 40e-6, 16384, TWO_PI * carrier_mhz * 1e6).unwrap();
        prop_assert!((p.spectral_energy() - p.energy()).abs() <= 1e-10 * p.energy());
    }

    #[test]
    fn propagation_never_adds_energy(fwhm_ns in 200.0f64..2000.0, carrier_mhz in -0.7f64..0.7) {
        let m = calibrated();
        let resp = medium_response(&m, &symmetric_grid(TWO_PI * 10e6, 4001)).unwrap();
        let p = gaussian_pulse(fwhm_ns * 1e-9, 40e-6, 16384, TWO_PI * carrier_mhz * 1e6).unwrap();
        let out = propagate(&p, &resp, m.cell.length, resp.carrier_angular_frequency).unwrap();
        prop_assert!(out.energy() <= p.energy());
    }

    #[test]
    fn homodyne_round_trip(scale in 1e-9f64..1e-7, width_mhz in 0.5f64..3.0) {
        let grid = symmetric_grid(TWO_PI * 20e6, 2001);
        let w = TWO_PI * width_mhz * 1e6;
        let index = ComplexSpectrum::from_fn(grid, |d| C64::new(scale * d * w / (d * d + w * w), 1e-10)).unwrap();
        let resp = MediumResponse::from_index(index, AtomicSpecies::sodium_d1().angular_frequency()).unwrap();
        let cfg = HomodyneConfig::from_response(&resp, 0.1, 1.0, 0.7, FRAC_PI_2).unwrap();
        let trace = homodyne_trace(&resp, &cfg).unwrap();
        prop_assume!(!trace.beyond_small_phase);
        let inv = index_variation_from_trace(&trace.signal, &cfg).unwrap();
        let (mut diff, mut norm) = (0.0, 0.0);
        for (n1, got) in resp.index_minus_one.values().iter().zip(inv.delta_n.values()) {
            diff += (got - n1.re).powi(2);
            norm += n1.re * n1.re;
        }
        prop_assert!((diff / norm).sqrt() <= 0.01);
    }

    #[test]
    fn bias_is_linear_in_small_reflectivity(r in 1e-4f64..1e-2, theta in 0.3f64..2.8) {
        let s = GyroScenario {
            loop_area: 0.01,
            rotation_rate: 1e-3,
            wavelength: 589.6e-9,
            group_index: 607.0,
            pc_amplitude_reflectivity: r,
            parasitic_phase: theta,
        };
        let slope = pc_bias(&s, 64).unwrap().phase_bias / r;
        let linear = -theta.sin();
        prop_assert!((slope - linear).abs() <= 0.05 * linear.abs(), "{slope} vs {linear}");
        prop_assert!((pc_bias(&s, 64).unwrap().phase_bias - analytic_phase_bias(&s)).abs() <= 1e-10);
    }
}

/// Doppler average by the trapezoid rule on a dense real velocity grid.
fn trapezoid_average(m: &MediumConfig, delta: f64) -> C64 {
    let lam = &m.lambda;
    let u = thermal_speed(&m.species, m.cell.temperature);
    let k = m.species.wavenumber();
    let n = 400_001;
    let vmax = 7.0 * u;
    let dv = 2.0 * vmax / (n - 1) as f64;
    let mut sum = C64::from(0.0);
    for i in 0..n {
        let v = -vmax + i as f64 * dv;
        let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        let kernel = weak_probe_kernel(
            lam.gamma13(),
            lam.gamma12,
            lam.pump_rabi,
            C64::from(lam.one_photon_detuning - k * v),
            C64::from(delta - m.residual_k * v),
        );
        sum += kernel * (w * (-(v / u).powi(2)).exp());
    }
    sum * (dv / (PI.sqrt() * u))
}

#[test]
fn gauss_hermite_matches_trapezoid_oracle() {
    let m = calibrated();
    let density = m.number_density().unwrap();
    let k = lambda::susceptibility_scale(density, m.dipole());
    for delta_mhz in [0.0, 0.2, 0.5, 1.3, 4.0] {
        for one_photon_mhz in [0.0, 150.0, -700.0] {
            let mut m = m.clone();
            m.lambda.one_photon_detuning = TWO_PI * one_photon_mhz * 1e6;
            let delta = TWO_PI * delta_mhz * 1e6;
            let gh = m.chi_at(delta).unwrap();
            let trap = k * trapezoid_average(&m, delta);
            assert!((gh - trap).norm() <= 1e-6 * trap.norm(), "{delta_mhz} {one_photon_mhz}: {gh} vs {trap}");
        }
    }
}

/// Integrates the master equation with classical RK4 and compares the end
/// state with the linear-algebra steady state, including the dark-state
/// coherence Ω·Ω_p/(Ω² + Ω_p²) for negligible ground dephasing.
#[test]
fn time_evolution_relaxes_to_steady_state() {
    for (pump, probe, gamma12) in [(0.5, 0.3, 0.05), (0.3, 0.3, 1e-6), (1.0, 0.1, 0.02)] {
        let mut cfg = LambdaConfig::new(GAMMA, pump * GAMMA, gamma12 * GAMMA);
        cfg.probe_rabi = probe * GAMMA;
        let mut rho = Matrix3::<C64>::zeros();
        rho[(1, 1)] = C64::from(1.0);
        let dt = 0.02 / GAMMA;
        let pumping = (pump * pump + probe * probe) * GAMMA / 4.0;
        let t_end = 40.0 / pumping.min(cfg.gamma12.max(pumping));
        let steps = (t_end / dt) as usize;
        for _ in 0..steps {
            let k1 = bloch_rhs(&cfg, &rho);
            let k2 = bloch_rhs(&cfg, &(rho + k1 * C64::from(0.5 * dt)));
            let k3 = bloch_rhs(&cfg, &(rho + k2 * C64::from(0.5 * dt)));
            let k4 = bloch_rhs(&cfg, &(rho + k3 * C64::from(dt)));
            rho += (k1 + k2 * C64::from(2.0) + k3 * C64::from(2.0) + k4) * C64::from(dt / 6.0);
        }
        let steady = steady_state(&cfg).unwrap();
        let diff = (rho - steady.rho).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff < 1e-6, "({pump}, {probe}, {gamma12}): {diff}");
        if gamma12 < 1e-5 {
            let dark = fwm::dark_state_coherence(cfg.pump_rabi, cfg.probe_rabi);
            assert!((rho[(0, 1)].norm() - dark).abs() < 1e-4, "{} vs {dark}", rho[(0, 1)].norm());
        }
    }
}

fn delay_through(m: &MediumConfig, fwhm: f64, window: f64, samples: usize) -> f64 {
    let resp = medium_response(m, &symmetric_grid(TWO_PI * 10e6, 8001)).unwrap();
    let p = gaussian_pulse(fwhm, window, samples, 0.0).unwrap();
    let out = propagate(&p, &resp, m.cell.length, resp.carrier_angular_frequency).unwrap();
    measure_delay(&out, &p).unwrap().centroid
}

#[test]
fn narrowband_delay_approaches_group_delay() {
    let m = calibrated();
    let resp = medium_response(&m, &symmetric_grid(TWO_PI * 10e6, 8001)).unwrap();
    let n_g = group_index(&resp, resp.carrier_angular_frequency).unwrap();
    let group_delay = (n_g - 1.0) * m.cell.length / SPEED_OF_LIGHT;
    let errors: Vec<f64> = [1e-6, 3e-6, 10e-6]
        .iter()
        .map(|&fwhm| (delay_through(&m, fwhm, 40.0 * fwhm, 1 << 16) / group_delay - 1.0).abs())
        .collect();
    assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
    assert!(errors[2] < 0.02, "{errors:?}");
}

#[test]
fn delay_is_resolution_independent() {
    let m = calibrated();
    let coarse = delay_through(&m, 400e-9, 20e-6, 1 << 14);
    let fine = delay_through(&m, 400e-9, 20e-6, 1 << 16);
    assert!((coarse - fine).abs() <= 1e-3 * fine.abs(), "{coarse} vs {fine}");
}
