//! Single-velocity-class Λ-system response.
//!
//! Level labels: |1⟩ and |2⟩ are the ground states, |3⟩ the excited state.
//! The pump (Rabi Ω) drives |1⟩↔|3⟩ and the probe drives |2⟩↔|3⟩.
//!
//! Detuning convention: `one_photon_detuning` Δ is the probe detuning from
//! |2⟩↔|3⟩ and `two_photon_detuning` δ = Δ_probe − Δ_pump, so the pump sits
//! at Δ − δ from its own transition. In the rotating frame (ħ = 1)
//!
//! ```text
//! H = −δ|1⟩⟨1| − Δ|3⟩⟨3| − (Ω/2)(|3⟩⟨1| + h.c.) − (Ω_p/2)(|3⟩⟨2| + h.c.)
//! ```
//!
//! With this choice the weak-probe susceptibility
//! `χ = K·i(γ₁₂ − iδ)/[(γ₁₃ − iΔ)(γ₁₂ − iδ) + Ω²/4]`, K = N|d|²/(ε₀ħ), is the
//! exact linear response of the full steady state, and Im χ > 0 is absorption.

use nalgebra::{Matrix3, SMatrix, SVector};
use num_complex::Complex64;

use crate::constants::{HBAR, VACUUM_PERMITTIVITY};
use crate::error::{Error, Result};
use crate::species::AtomicSpecies;

type C64 = Complex64;
type Liouvillian = SMatrix<C64, 9, 9>;

const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaConfig {
    /// Ω, drives |1⟩↔|3⟩, rad/s.
    pub pump_rabi: f64,
    /// Drives |2⟩↔|3⟩, rad/s.
    pub probe_rabi: f64,
    /// Δ, rad/s.
    pub one_photon_detuning: f64,
    /// δ, rad/s.
    pub two_photon_detuning: f64,
    /// Ground-coherence dephasing γ₁₂ (transit time plus residual fields), rad/s.
    pub gamma12: f64,
    /// Γ, rad/s.
    pub excited_decay: f64,
    /// Extra optical dephasing added to Γ/2, rad/s.
    pub gamma_extra: f64,
    /// Population exchange between the ground states, relaxing toward the
    /// branching ratios, rad/s.
    pub ground_relaxation: f64,
    pub branching_1: f64,
    pub branching_2: f64,
}

impl LambdaConfig {
    /// Symmetric Λ with the given pump Rabi frequency and dephasing, all
    /// detunings and the probe set to zero.
    pub fn new(excited_decay: f64, pump_rabi: f64, gamma12: f64) -> Self {
        Self {
            pump_rabi,
            probe_rabi: 0.0,
            one_photon_detuning: 0.0,
            two_photon_detuning: 0.0,
            gamma12,
            excited_decay,
            gamma_extra: 0.0,
            ground_relaxation: 0.0,
            branching_1: 0.5,
            branching_2: 0.5,
        }
    }

    /// Optical coherence decay γ₁₃ = Γ/2 + γ_extra.
    pub fn gamma13(&self) -> f64 {
        0.5 * self.excited_decay + self.gamma_extra
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("pump_rabi", self.pump_rabi),
            ("probe_rabi", self.probe_rabi),
            ("gamma12", self.gamma12),
            ("excited_decay", self.excited_decay),
            ("gamma_extra", self.gamma_extra),
            ("ground_relaxation", self.ground_relaxation),
            ("branching_1", self.branching_1),
            ("branching_2", self.branching_2),
        ];
        for (field, value) in nonneg {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::validation(field, "must be finite and non-negative"));
            }
        }
        for (field, value) in [
            ("one_photon_detuning", self.one_photon_detuning),
            ("two_photon_detuning", self.two_photon_detuning),
        ] {
            if !value.is_finite() {
                return Err(Error::validation(field, "must be finite"));
            }
        }
        if (self.branching_1 + self.branching_2 - 1.0).abs() > 1e-12 {
            return Err(Error::validation(
                "branching_1 + branching_2",
                "must sum to 1",
            ));
        }
        Ok(())
    }
}

/// Steady-state 3×3 density matrix, indices 0..3 for |1⟩, |2⟩, |3⟩.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrixState {
    pub rho: Matrix3<C64>,
}

impl DensityMatrixState {
    pub fn element(&self, i: usize, j: usize) -> C64 {
        self.rho[(i, j)]
    }

    pub fn population(&self, level: usize) -> f64 {
        self.rho[(level, level)].re
    }

    /// Ground-state coherence ρ₁₂.
    pub fn ground_coherence(&self) -> C64 {
        self.rho[(0, 1)]
    }

    /// Probe coherence ρ₃₂.
    pub fn probe_coherence(&self) -> C64 {
        self.rho[(2, 1)]
    }

    pub fn trace(&self) -> C64 {
        self.rho.trace()
    }

    /// Largest |ρᵢⱼ − ρⱼᵢ*|.
    pub fn hermiticity_error(&self) -> f64 {
        (self.rho - self.rho.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

#[inline]
fn idx(i: usize, j: usize) -> usize {
    3 * i + j
}

/// Right-hand side of the master equation, dρ/dt = L(ρ).
pub fn bloch_rhs(config: &LambdaConfig, rho: &Matrix3<C64>) -> Matrix3<C64> {
    let h = hamiltonian(config);
    let mut d = (h * rho - rho * h) * (-I);

    let gamma = config.excited_decay;
    let g13 = config.gamma13();
    let r = config.ground_relaxation;
    let (b1, b2) = (config.branching_1, config.branching_2);

    let p3 = rho[(2, 2)];
    d[(2, 2)] -= gamma * p3;
    d[(0, 0)] += b1 * gamma * p3;
    d[(1, 1)] += b2 * gamma * p3;

    let ground = rho[(0, 0)] + rho[(1, 1)];
    d[(0, 0)] -= r * (rho[(0, 0)] - b1 * ground);
    d[(1, 1)] -= r * (rho[(1, 1)] - b2 * ground);

    for (i, j) in [(0, 2), (2, 0), (1, 2), (2, 1)] {
        d[(i, j)] -= g13 * rho[(i, j)];
    }
    for (i, j) in [(0, 1), (1, 0)] {
        d[(i, j)] -= config.gamma12 * rho[(i, j)];
    }
    d
}

fn hamiltonian(config: &LambdaConfig) -> Matrix3<C64> {
    let mut h = Matrix3::<C64>::zeros();
    h[(0, 0)] = C64::from(-config.two_photon_detuning);
    h[(2, 2)] = C64::from(-config.one_photon_detuning);
    let pump = C64::from(-0.5 * config.pump_rabi);
    let probe = C64::from(-0.5 * config.probe_rabi);
    h[(2, 0)] = pump;
    h[(0, 2)] = pump;
    h[(2, 1)] = probe;
    h[(1, 2)] = probe;
    h
}

/// Matrix of the linear map ρ ↦ L(ρ) acting on row-major vec(ρ).
pub fn liouvillian(config: &LambdaConfig) -> SMatrix<C64, 9, 9> {
    let mut l = Liouvillian::zeros();
    for i in 0..3 {
        for j in 0..3 {
            let mut basis = Matrix3::<C64>::zeros();
            basis[(i, j)] = C64::from(1.0);
            let image = bloch_rhs(config, &basis);
            for a in 0..3 {
                for b in 0..3 {
                    l[(idx(a, b), idx(i, j))] = image[(a, b)];
                }
            }
        }
    }
    l
}

/// Solve L(ρ) = 0 with Tr ρ = 1 replacing the ρ₁₁ row.
pub fn steady_state(config: &LambdaConfig) -> Result<DensityMatrixState> {
    config.validate()?;
    if config.excited_decay == 0.0 && config.gamma12 == 0.0 && config.ground_relaxation == 0.0 {
        return Err(Error::DegenerateModel(
            "all relaxation rates are zero".into(),
        ));
    }
    let l = liouvillian(config);
    let mut system = l;
    for col in 0..9 {
        system[(0, col)] = C64::from(0.0);
    }
    for k in 0..3 {
        system[(0, idx(k, k))] = C64::from(1.0);
    }
    let mut rhs = SVector::<C64, 9>::zeros();
    rhs[0] = C64::from(1.0);

    let singular = system.singular_values();
    let smax = singular.max();
    let smin = singular.min();
    if !(smax > 0.0) || smin / smax < 1e-13 {
        return Err(Error::DegenerateModel(format!(
            "steady state is not unique (condition ratio {:.2e})",
            smin / smax
        )));
    }

    let solution = system
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::DegenerateModel("singular Liouvillian".into()))?;

    let mut rho = Matrix3::<C64>::zeros();
    for i in 0..3 {
        for j in 0..3 {
            rho[(i, j)] = solution[idx(i, j)];
        }
    }
    let rho = (rho + rho.adjoint()) * C64::from(0.5);
    let rho = rho / rho.trace();

    let residual = (l * vec_of(&rho)).norm();
    let scale = l.norm() * vec_of(&rho).norm();
    if !(residual <= 1e-10 * scale) {
        return Err(Error::DegenerateModel(format!(
            "steady-state residual {residual:.3e} exceeds tolerance"
        )));
    }
    Ok(DensityMatrixState { rho })
}

fn vec_of(rho: &Matrix3<C64>) -> SVector<C64, 9> {
    SVector::<C64, 9>::from_fn(|k, _| rho[(k / 3, k % 3)])
}

/// Dimensionless weak-probe response per unit K, for complex detunings.
///
/// Complex detunings are used by the Doppler average; the function is
/// analytic whenever Im Δ ≥ 0 and Im δ ≥ 0.
#[inline]
pub fn weak_probe_kernel(
    gamma13: f64,
    gamma12: f64,
    pump_rabi: f64,
    one_photon: C64,
    two_photon: C64,
) -> C64 {
    let ground = C64::from(gamma12) - I * two_photon;
    let optical = C64::from(gamma13) - I * one_photon;
    I * ground / (optical * ground + 0.25 * pump_rabi * pump_rabi)
}

/// Susceptibility prefactor K = N|d|²/(ε₀ħ), rad/s.
pub fn susceptibility_scale(number_density: f64, dipole: f64) -> f64 {
    number_density * dipole * dipole / (VACUUM_PERMITTIVITY * HBAR)
}

pub(crate) fn check_weak_probe(config: &LambdaConfig) -> Result<()> {
    if config.probe_rabi == 0.0 {
        return Ok(());
    }
    let ratio = if config.pump_rabi > 0.0 {
        (config.probe_rabi / config.pump_rabi).powi(2)
    } else {
        f64::INFINITY
    };
    // Allow for rounding when the ratio is set exactly at the limit.
    if ratio > 0.1 * (1.0 + 1e-12) {
        return Err(Error::WeakProbeRegime { ratio });
    }
    Ok(())
}

/// Closed-form weak-probe susceptibility of a single velocity class.
pub fn weak_probe_chi(
    config: &LambdaConfig,
    species: &AtomicSpecies,
    number_density: f64,
) -> Result<C64> {
    config.validate()?;
    check_weak_probe(config)?;
    if !(number_density >= 0.0) {
        return Err(Error::Domain("number density must be non-negative".into()));
    }
    let k = susceptibility_scale(number_density, species.dipole_moment);
    Ok(k * weak_probe_kernel(
        config.gamma13(),
        config.gamma12,
        config.pump_rabi,
        C64::from(config.one_photon_detuning),
        C64::from(config.two_photon_detuning),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    const GAMMA: f64 = 6.135e7;

    fn assert_physical(state: &DensityMatrixState) {
        assert!((state.trace() - C64::from(1.0)).norm() < 1e-12);
        assert!(state.hermiticity_error() < 1e-12);
        for level in 0..3 {
            let p = state.population(level);
            assert!((-1e-12..=1.0 + 1e-12).contains(&p), "population {p}");
        }
    }

    #[test]
    fn undriven_populations_follow_branching() {
        let mut cfg = LambdaConfig::new(GAMMA, 0.0, 1e5);
        cfg.ground_relaxation = 1e5;
        cfg.branching_1 = 0.3;
        cfg.branching_2 = 0.7;
        let s = steady_state(&cfg).unwrap();
        assert!((s.population(0) - 0.3).abs() < 1e-12);
        assert!((s.population(1) - 0.7).abs() < 1e-12);
        assert!(s.population(2).abs() < 1e-12);
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            assert!(s.element(i, j).norm() < 1e-14);
        }
        assert_physical(&s);
    }

    #[test]
    fn undriven_without_ground_relaxation_is_degenerate() {
        let cfg = LambdaConfig::new(GAMMA, 0.0, 1e5);
        assert!(matches!(steady_state(&cfg), Err(Error::DegenerateModel(_))));
    }

    #[test]
    fn all_rates_zero_is_degenerate() {
        let mut cfg = LambdaConfig::new(0.0, 1e7, 0.0);
        cfg.probe_rabi = 1e6;
        assert!(matches!(steady_state(&cfg), Err(Error::DegenerateModel(_))));
    }

    #[test]
    fn strong_pump_empties_pumped_ground_state() {
        let mut cfg = LambdaConfig::new(GAMMA, GAMMA, 1e4);
        cfg.probe_rabi = 1e-3 * GAMMA;
        let s = steady_state(&cfg).unwrap();
        assert!(s.population(0) < 1e-5);
        assert!(s.population(1) > 1.0 - 1e-5);
        assert_physical(&s);
    }

    #[test]
    fn pump_off_reduces_to_two_level_lorentzian() {
        let na = AtomicSpecies::sodium_d1();
        let mut cfg = LambdaConfig::new(GAMMA, 0.0, 1e5);
        cfg.one_photon_detuning = 0.7 * GAMMA;
        cfg.two_photon_detuning = 0.2 * GAMMA;
        let n = 1e16;
        let chi = weak_probe_chi(&cfg, &na, n).unwrap();
        let k = susceptibility_scale(n, na.dipole_moment);
        let expected = I * k / (C64::from(cfg.gamma13()) - I * cfg.one_photon_detuning);
        assert!((chi - expected).norm() < 1e-14 * expected.norm());
        assert!(chi.im > 0.0);
    }

    #[test]
    fn ideal_dark_state_is_transparent() {
        let na = AtomicSpecies::sodium_d1();
        let cfg = LambdaConfig::new(GAMMA, 0.3 * GAMMA, 0.0);
        assert_eq!(weak_probe_chi(&cfg, &na, 1e16).unwrap(), C64::from(0.0));
    }

    #[test]
    fn probe_too_strong_is_rejected() {
        let na = AtomicSpecies::sodium_d1();
        let mut cfg = LambdaConfig::new(GAMMA, 1e7, 1e5);
        cfg.probe_rabi = 0.5e7;
        assert!(matches!(
            weak_probe_chi(&cfg, &na, 1e16),
            Err(Error::WeakProbeRegime { .. })
        ));
    }

    #[test]
    fn branching_must_sum_to_one() {
        let mut cfg = LambdaConfig::new(GAMMA, 1e7, 1e5);
        cfg.branching_1 = 0.6;
        assert!(cfg.validate().is_err());
    }
}
