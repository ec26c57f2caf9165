//! Single-excitation spin model of atoms coupled through a waveguide.
//!
//! Amplitudes `c_j` of the excited states obey `ċ = G c` with the no-jump
//! generator
//!
//! `G_jk = −(Γ1D/2)·e^{i k_A |z_j − z_k|} − δ_jk (Γ′/2 + i Δ_j)`,
//!
//! which is `−i·h_dd − d_mat/2 − Γ′/2 − i·diag(Δ_j)` split into the coherent
//! exchange `h_dd = (Γ1D/2) sin(k_A|z_j − z_k|)` and the waveguide decay
//! matrix `d_mat = Γ1D cos(k_A(z_j − z_k))`. Phases use the resonant
//! wavevector. Population leaving the single-excitation sector is counted as
//! loss and never re-injected.

mod evolve;
mod modes;
mod steady;

pub use evolve::{emission_budget, evolve, evolve_with, EmissionBudget, EvolveMethod, TrajectoryTable};
pub use modes::{collective_mode, mode_decay_rate, retrieval_efficiency, CollectiveMode, ModeKind};
pub use steady::{
    driven_impurity_spectrum, field_limits, local_field, reconstruct_fields, steady_state_weak_drive,
    weak_drive_spectrum, FieldLimits, GuidedInput, Solver,
};

use faer::Mat;
use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::geometry::{ChainGeometry, Role, Site};
use crate::linalg::CMat;
use crate::params::PhysicalParams;
use crate::phase::{cis_turns, sin_cos_turns};

/// Amplitudes on the active sites, ordered by position.
pub type ExcitationVector = Vec<Complex64>;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Structured no-jump generator for the active atoms of a chain.
#[derive(Debug, Clone)]
pub struct Generator {
    sites: Vec<Site>,
    detunings: Vec<f64>,
    gamma_1d: f64,
    gamma_prime: f64,
    /// `e^{i k_A z_j}`.
    phases: Vec<Complex64>,
    /// `e^{i k_A (z_{j+1} − z_j)}`.
    steps: Vec<Complex64>,
}

impl Generator {
    /// Generator with each atom detuned by its site offset.
    pub fn new(geom: &ChainGeometry, params: &PhysicalParams) -> Result<Self> {
        let detunings: Vec<f64> = geom.active_sites().map(|s| s.detuning_offset).collect();
        build_generator(geom, params, &detunings)
    }

    pub fn dim(&self) -> usize {
        self.sites.len()
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn positions(&self) -> Vec<f64> {
        self.sites.iter().map(|s| s.position).collect()
    }

    pub fn detunings(&self) -> &[f64] {
        &self.detunings
    }

    pub fn gamma_1d(&self) -> f64 {
        self.gamma_1d
    }

    pub fn gamma_prime(&self) -> f64 {
        self.gamma_prime
    }

    /// Slots holding impurity atoms.
    pub fn impurities(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&j| self.sites[j].role == Role::Impurity).collect()
    }

    pub fn unit_vector(&self, slot: usize) -> ExcitationVector {
        let mut v = vec![ZERO; self.dim()];
        v[slot] = Complex64::new(1.0, 0.0);
        v
    }

    fn separation(&self, j: usize, k: usize) -> f64 {
        (self.sites[j].position - self.sites[k].position).abs()
    }

    /// Coherent exchange `(Γ1D/2) sin(k_A|z_j − z_k|)`.
    pub fn h_dd(&self) -> Mat<f64> {
        let half = 0.5 * self.gamma_1d;
        Mat::from_fn(self.dim(), self.dim(), |j, k| half * sin_cos_turns(self.separation(j, k)).0)
    }

    /// Waveguide decay matrix `Γ1D cos(k_A(z_j − z_k))`.
    pub fn d_mat(&self) -> Mat<f64> {
        Mat::from_fn(self.dim(), self.dim(), |j, k| self.gamma_1d * sin_cos_turns(self.separation(j, k)).1)
    }

    /// Dense `G`.
    pub fn no_jump(&self) -> CMat {
        let half = 0.5 * self.gamma_1d;
        Mat::from_fn(self.dim(), self.dim(), |j, k| {
            let mut g = -half * cis_turns(self.separation(j, k));
            if j == k {
                g -= Complex64::new(0.5 * self.gamma_prime, self.detunings[j]);
            }
            g
        })
    }

    /// `G x` in O(N) using running sums of the right- and left-going
    /// emission.
    pub fn apply(&self, x: &[Complex64], out: &mut [Complex64]) {
        let n = self.dim();
        assert_eq!(x.len(), n);
        assert_eq!(out.len(), n);
        let half = 0.5 * self.gamma_1d;
        let mut forward = ZERO;
        for j in 0..n {
            if j > 0 {
                forward = self.steps[j - 1] * (forward + x[j - 1]);
            }
            out[j] = Complex64::new(-0.5 * self.gamma_prime - half, -self.detunings[j]) * x[j] - half * forward;
        }
        let mut backward = ZERO;
        for j in (0..n).rev() {
            if j + 1 < n {
                backward = self.steps[j] * (backward + x[j + 1]);
            }
            out[j] -= half * backward;
        }
    }

    pub fn applied(&self, x: &[Complex64]) -> ExcitationVector {
        let mut out = vec![ZERO; self.dim()];
        self.apply(x, &mut out);
        out
    }

    /// `⟨a|G|b⟩`.
    pub fn matrix_element(&self, a: &[Complex64], b: &[Complex64]) -> Complex64 {
        dot(a, &self.applied(b))
    }

    /// Instantaneous emission rate into the waveguide, `c† d_mat c`, using
    /// `d_mat = Γ1D Re(u u†)` with `u_j = e^{i k_A z_j}`.
    pub fn waveguide_rate(&self, c: &[Complex64]) -> f64 {
        let plus: Complex64 = self.phases.iter().zip(c).map(|(u, x)| u.conj() * x).sum();
        let minus: Complex64 = self.phases.iter().zip(c).map(|(u, x)| u * x).sum();
        0.5 * self.gamma_1d * (plus.norm_sqr() + minus.norm_sqr())
    }

    /// Emission rate into free space, `Γ′ ‖c‖²`.
    pub fn free_space_rate(&self, c: &[Complex64]) -> f64 {
        self.gamma_prime * norm_sqr(c)
    }

    /// Gershgorin bound on the spectral radius of `G`.
    pub fn spectral_bound(&self) -> f64 {
        let max_det = self.detunings.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        0.5 * self.gamma_1d * self.dim() as f64 + 0.5 * self.gamma_prime + max_det
    }

    pub(crate) fn steps(&self) -> &[Complex64] {
        &self.steps
    }

    pub(crate) fn phases(&self) -> &[Complex64] {
        &self.phases
    }
}

/// Generator with explicit per-site detunings (rate units, one per active
/// site). Transparent sites are dropped.
pub fn build_generator(geom: &ChainGeometry, params: &PhysicalParams, detunings: &[f64]) -> Result<Generator> {
    params.validate()?;
    let sites: Vec<Site> = geom.active_sites().copied().collect();
    if sites.is_empty() {
        return Err(invalid("chain has no active atoms"));
    }
    if detunings.len() != sites.len() {
        return Err(invalid(format!(
            "expected {} detunings, got {}",
            sites.len(),
            detunings.len()
        )));
    }
    if detunings.iter().any(|d| !d.is_finite()) {
        return Err(invalid("detunings must be finite"));
    }
    let phases = sites.iter().map(|s| cis_turns(s.position)).collect();
    let steps = sites.windows(2).map(|w| cis_turns(w[1].position - w[0].position)).collect();
    Ok(Generator {
        sites,
        detunings: detunings.to_vec(),
        gamma_1d: params.gamma_1d,
        gamma_prime: params.gamma_prime,
        phases,
        steps,
    })
}

pub(crate) fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn norm_sqr(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}
