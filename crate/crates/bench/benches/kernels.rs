use criterion::{criterion_group, criterion_main, Criterion};
use slowlight_core::constants::TWO_PI;
use slowlight_core::scenario::load_preset;
use slowlight_core::spectra::calibrate::with_parameters;
use slowlight_core::spectra::symmetric_grid;
use slowlight_core::*;
use std::hint::black_box;

fn calibrated() -> MediumConfig {
    let base = load_preset("slowlight").unwrap().medium;
    with_parameters(&base, 2.1935e16, TWO_PI * 0.3783e6, TWO_PI * 37.65e6)
}

fn steady_state_solve(c: &mut Criterion) {
    let mut cfg = LambdaConfig::new(6.15e7, 3e7, 1e5);
    cfg.probe_rabi = 3e6;
    cfg.two_photon_detuning = 2e5;
    c.bench_function("steady_state", |b| b.iter(|| steady_state(black_box(&cfg)).unwrap()));
}

fn doppler_point(c: &mut Criterion) {
    let m = calibrated();
    c.bench_function("chi_at (64-node Doppler average)", |b| {
        b.iter(|| m.chi_at(black_box(1.0e6)).unwrap())
    });
}

fn spectrum(c: &mut Criterion) {
    let m = calibrated();
    let grid = symmetric_grid(TWO_PI * 10e6, 4001);
    c.bench_function("medium_response 4001 points", |b| {
        b.iter(|| medium_response(black_box(&m), &grid).unwrap())
    });
}

fn pulse_propagation(c: &mut Criterion) {
    let m = calibrated();
    let resp = medium_response(&m, &symmetric_grid(TWO_PI * 10e6, 4001)).unwrap();
    let p = gaussian_pulse(400e-9, 10e-6, 16384, 0.0).unwrap();
    c.bench_function("propagate 16384 samples", |b| {
        b.iter(|| propagate(black_box(&p), &resp, 0.1, resp.carrier_angular_frequency).unwrap())
    });
}

fn calibration(c: &mut Criterion) {
    let s = load_preset("slowlight").unwrap();
    let spec = s.calibration.unwrap();
    let mut group = c.benchmark_group("calibrate");
    group.sample_size(10);
    group.bench_function("slowlight targets", |b| {
        b.iter(|| calibrate(&s.medium, &spec.targets, &spec.bounds, &Default::default()).unwrap())
    });
    group.finish();
}

criterion_group!(benches, steady_state_solve, doppler_point, spectrum, pulse_propagation, calibration);
criterion_main!(benches);
