//! Rate and frequency scales.
//!
//! Units: rates are measured in whatever unit the caller picks for Γ′
//! (conventionally Γ′ = 1), lengths in resonant wavelengths λ_A, and
//! dimensionless detunings are δ = Δ/(Γ/2).

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Default ω_A/Γ, the optical-to-linewidth ratio of the Cs D2 line used for
/// the Bragg mirror figures.
pub const DEFAULT_OMEGA_A_OVER_GAMMA: f64 = 5.4e7;

fn default_omega_ratio() -> f64 {
    DEFAULT_OMEGA_A_OVER_GAMMA
}

/// Emission rates of a single atom and the optical carrier frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Γ1D, emission rate into the guided mode.
    pub gamma_1d: f64,
    /// Γ′, emission rate into all non-guided channels.
    pub gamma_prime: f64,
    /// ω_A/Γ.
    #[serde(default = "default_omega_ratio")]
    pub omega_a_over_gamma: f64,
}

/// How free-propagation phases depend on the probe frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PhaseMode {
    /// `e^{i ω_P d / v}` with the actual probe frequency.
    #[default]
    Exact,
    /// Phases evaluated at resonance, `ω_P ≈ ω_A`.
    Approx,
}

impl PhysicalParams {
    pub fn new(gamma_1d: f64, gamma_prime: f64) -> Result<Self> {
        let p = Self {
            gamma_1d,
            gamma_prime,
            omega_a_over_gamma: DEFAULT_OMEGA_A_OVER_GAMMA,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_omega_a_over_gamma(mut self, ratio: f64) -> Result<Self> {
        self.omega_a_over_gamma = ratio;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma_1d.is_finite() && self.gamma_1d >= 0.0) {
            return Err(invalid(format!("gamma_1d must be finite and >= 0, got {}", self.gamma_1d)));
        }
        if !(self.gamma_prime.is_finite() && self.gamma_prime >= 0.0) {
            return Err(invalid(format!(
                "gamma_prime must be finite and >= 0, got {}",
                self.gamma_prime
            )));
        }
        if self.gamma_total() <= 0.0 {
            return Err(invalid("gamma_1d + gamma_prime must be positive"));
        }
        if !(self.omega_a_over_gamma.is_finite() && self.omega_a_over_gamma > 0.0) {
            return Err(invalid(format!(
                "omega_a_over_gamma must be positive, got {}",
                self.omega_a_over_gamma
            )));
        }
        Ok(())
    }

    /// Γ = Γ1D + Γ′.
    pub fn gamma_total(&self) -> f64 {
        self.gamma_1d + self.gamma_prime
    }

    /// ω_A in rate units.
    pub fn omega_a(&self) -> f64 {
        self.omega_a_over_gamma * self.gamma_total()
    }

    /// N_gap = √(ω_A/Γ1D); infinite for an uncoupled atom.
    pub fn n_gap(&self) -> f64 {
        (self.omega_a() / self.gamma_1d).sqrt()
    }

    /// Γ/2, the rate that one unit of dimensionless detuning represents.
    pub fn half_linewidth(&self) -> f64 {
        0.5 * self.gamma_total()
    }

    /// Δ → δ = Δ/(Γ/2).
    pub fn to_dimensionless(&self, detuning: f64) -> f64 {
        detuning / self.half_linewidth()
    }

    /// δ → Δ.
    pub fn to_rate(&self, delta: f64) -> f64 {
        delta * self.half_linewidth()
    }

    /// Wavenumber in turns per λ_A for probe detuning Δ, i.e. ω_P/ω_A.
    pub fn wavenumber_turns(&self, detuning: f64, mode: PhaseMode) -> f64 {
        match mode {
            PhaseMode::Exact => 1.0 + detuning / self.omega_a(),
            PhaseMode::Approx => 1.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_rates() {
        assert!(PhysicalParams::new(-1.0, 1.0).is_err());
        assert!(PhysicalParams::new(0.0, 0.0).is_err());
        assert!(PhysicalParams::new(f64::NAN, 1.0).is_err());
        assert!(PhysicalParams::new(0.25, 1.0).unwrap().with_omega_a_over_gamma(0.0).is_err());
        assert!(PhysicalParams::new(1.0, 0.0).is_ok());
    }

    #[test]
    fn n_gap_for_mirror_figures() {
        let p = PhysicalParams::new(0.25, 1.0).unwrap();
        assert!((p.omega_a() - 6.75e7).abs() < 1e-6);
        let n_gap = p.n_gap();
        assert!((n_gap - 16431.676725).abs() < 1e-5, "{n_gap}");
        assert!((n_gap * n_gap * p.gamma_1d - p.omega_a()).abs() <= 1e-12 * p.omega_a());
    }

    #[test]
    fn missing_omega_ratio_uses_default() {
        let p: PhysicalParams = serde_json::from_str(r#"{"gamma_1d":0.25,"gamma_prime":1.0}"#).unwrap();
        assert_eq!(p.omega_a_over_gamma, DEFAULT_OMEGA_A_OVER_GAMMA);
    }
}
