//! Damped Jaynes-Cummings reduction of an impurity inside an atomic cavity.
//!
//! The impurity couples only to the subradiant spin wave of the mirrors,
//! with strength `g = Γ1D√N_A/2`. That mode decays at `κ = Γ′`, the
//! impurity at `Γ = Γ1D + Γ′`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::params::PhysicalParams;
use crate::spin_model::TrajectoryTable;
use crate::transfer_matrix::SpectrumTable;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JcParams {
    pub g: f64,
    pub kappa: f64,
    pub gamma: f64,
    /// `4g²/(κΓ) = (Γ1D/Γ)(N_AΓ1D/Γ′)`; infinite when `κΓ = 0`.
    pub cooperativity: f64,
}

impl JcParams {
    pub fn new(g: f64, kappa: f64, gamma: f64) -> Result<Self> {
        if ![g, kappa, gamma].iter().all(|x| x.is_finite() && *x >= 0.0) {
            return Err(invalid("g, kappa and gamma must be finite and non-negative"));
        }
        let loss = kappa * gamma;
        let cooperativity = if loss > 0.0 { 4.0 * g * g / loss } else { f64::INFINITY };
        Ok(Self { g, kappa, gamma, cooperativity })
    }

    /// `g > max(κ, Γ)`.
    pub fn is_strong_coupling(&self) -> bool {
        self.g > self.kappa.max(self.gamma)
    }
}

pub fn jc_from_physical(n_a: usize, params: &PhysicalParams) -> Result<JcParams> {
    params.validate()?;
    if n_a == 0 {
        return Err(invalid("need at least one mirror atom"));
    }
    JcParams::new(0.5 * params.gamma_1d * (n_a as f64).sqrt(), params.gamma_prime, params.gamma_total())
}

/// Energies `±g√n` of the dressed states with `n` excitations.
pub fn dressed_energies(jc: &JcParams, n_cav: usize) -> Result<(f64, f64)> {
    if n_cav == 0 {
        return Err(invalid("dressed states need at least one excitation"));
    }
    let e = jc.g * (n_cav as f64).sqrt();
    Ok((e, -e))
}

/// `sin(x)/x` for complex `x`.
fn sinc(x: Complex64) -> Complex64 {
    if x.norm() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Impurity and cavity amplitudes at time `t` starting from the excited
/// impurity, for `ċ_e = −(Γ/2)c_e − ig c_cav`, `ċ_cav = −(κ/2)c_cav − ig c_e`.
pub fn rabi_amplitudes(jc: &JcParams, t: f64) -> (Complex64, Complex64) {
    let mean = -0.25 * (jc.gamma + jc.kappa);
    let skew = 0.25 * (jc.gamma - jc.kappa);
    let omega = Complex64::new(jc.g * jc.g - skew * skew, 0.0).sqrt();
    let envelope = (mean * t).exp();
    let s = t * sinc(omega * t);
    let c_e = envelope * ((omega * t).cos() - skew * s);
    let c_cav = Complex64::new(0.0, -jc.g) * envelope * s;
    (c_e, c_cav)
}

/// Closed-form trajectory with states `[c_e, c_cav]`.
pub fn rabi_population_analytic(jc: &JcParams, times: &[f64]) -> TrajectoryTable {
    let states = times
        .iter()
        .map(|&t| {
            let (e, c) = rabi_amplitudes(jc, t);
            vec![e, c]
        })
        .collect();
    TrajectoryTable { times: times.to_vec(), states }
}

/// Interior local maxima refined by a parabola through each maximum and its
/// neighbours, as `(position, height)`.
pub fn local_maxima(xs: &[f64], ys: &[f64]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for i in 1..ys.len().saturating_sub(1) {
        let (y0, y1, y2) = (ys[i - 1], ys[i], ys[i + 1]);
        if !(y1 > y0 && y1 >= y2) {
            continue;
        }
        let curv = y0 - 2.0 * y1 + y2;
        let (hl, hr) = (xs[i] - xs[i - 1], xs[i + 1] - xs[i]);
        if curv < 0.0 && (hl - hr).abs() <= 1e-9 * hl.abs().max(hr.abs()) {
            let shift = 0.5 * (y0 - y2) / curv;
            out.push((xs[i] + shift * hr, y1 - 0.25 * (y0 - y2) * shift));
        } else {
            out.push((xs[i], y1));
        }
    }
    out
}

/// Separation (rate units) of the two highest peaks of the intra-cavity
/// intensity.
pub fn peak_splitting(spectrum: &SpectrumTable) -> Result<f64> {
    let ys = spectrum.intracavity().ok_or_else(|| invalid("spectrum has no intra-cavity column"))?;
    let deltas = spectrum.deltas();
    let mut peaks = local_maxima(&deltas, &ys);
    if peaks.len() < 2 {
        return Err(Error::NoSplitting);
    }
    peaks.sort_by(|a, b| b.1.total_cmp(&a.1));
    Ok((peaks[0].0 - peaks[1].0).abs() * spectrum.half_linewidth)
}
