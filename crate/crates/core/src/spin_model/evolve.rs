use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{dot, norm_sqr, ExcitationVector, Generator};
use crate::error::{invalid, Error, Result};
use crate::linalg::{all_finite, expm, matvec, Eigenbasis};

/// Eigenbases worse conditioned than this are abandoned for the matrix
/// exponential.
const MAX_CONDITION: f64 = 1e8;
/// Largest dimension handled densely by [`EvolveMethod::Auto`].
const DENSE_LIMIT: usize = 1500;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvolveMethod {
    /// Dense for up to 1500 atoms, otherwise structured.
    #[default]
    Auto,
    /// Eigendecomposition of `G`, or the matrix exponential if the
    /// eigenbasis is ill conditioned.
    Dense,
    /// Matrix exponential of `G·Δt` for every distinct time step.
    Expm,
    /// Fourth-order Runge-Kutta with the O(N) generator product.
    Structured,
}

/// Amplitudes sampled on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryTable {
    pub times: Vec<f64>,
    pub states: Vec<ExcitationVector>,
}

impl TrajectoryTable {
    pub fn population(&self, slot: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[slot].norm_sqr()).collect()
    }

    /// `|⟨v|c(t)⟩|²`.
    pub fn projection(&self, v: &[Complex64]) -> Vec<f64> {
        self.states.iter().map(|s| dot(v, s).norm_sqr()).collect()
    }

    pub fn norms(&self) -> Vec<f64> {
        self.states.iter().map(|s| norm_sqr(s)).collect()
    }
}

fn check_inputs(gen: &Generator, state0: &[Complex64], times: &[f64]) -> Result<()> {
    if state0.len() != gen.dim() {
        return Err(invalid(format!("state has {} amplitudes, chain has {} atoms", state0.len(), gen.dim())));
    }
    let n = norm_sqr(state0);
    if !(n - 1.0).abs().le(&1e-9) {
        return Err(invalid(format!("initial state must be normalized, |c|² = {n}")));
    }
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(invalid("times must be finite and non-negative"));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(invalid("times must be non-decreasing"));
    }
    Ok(())
}

/// `c(t) = e^{G t} c(0)` on every requested time.
pub fn evolve(gen: &Generator, state0: &[Complex64], times: &[f64]) -> Result<TrajectoryTable> {
    evolve_with(gen, state0, times, EvolveMethod::Auto)
}

pub fn evolve_with(
    gen: &Generator,
    state0: &[Complex64],
    times: &[f64],
    method: EvolveMethod,
) -> Result<TrajectoryTable> {
    check_inputs(gen, state0, times)?;
    let method = match method {
        EvolveMethod::Auto if gen.dim() <= DENSE_LIMIT => EvolveMethod::Dense,
        EvolveMethod::Auto => EvolveMethod::Structured,
        m => m,
    };
    let states = match method {
        EvolveMethod::Dense => match eigen_states(gen, state0, times)? {
            Some(states) => states,
            None => expm_states(gen, state0, times)?,
        },
        EvolveMethod::Expm => expm_states(gen, state0, times)?,
        _ => rk4_states(gen, state0, times, None)?,
    };
    for s in &states {
        if !all_finite(s) {
            return Err(Error::NumericalFailure("evolution produced non-finite amplitudes".into()));
        }
    }
    Ok(TrajectoryTable { times: times.to_vec(), states })
}

fn eigen_states(gen: &Generator, state0: &[Complex64], times: &[f64]) -> Result<Option<Vec<ExcitationVector>>> {
    let eb = Eigenbasis::new(&gen.no_jump())?;
    if eb.condition > MAX_CONDITION {
        return Ok(None);
    }
    let w = matvec(&eb.inverse, state0);
    let n = gen.dim();
    let states = times
        .iter()
        .map(|&t| {
            let scaled: Vec<Complex64> = w.iter().zip(&eb.values).map(|(x, l)| x * (l * t).exp()).collect();
            let mut out = vec![Complex64::new(0.0, 0.0); n];
            for (k, s) in scaled.iter().enumerate() {
                let col = eb.vectors.col(k);
                for (j, o) in out.iter_mut().enumerate() {
                    *o += col[j] * s;
                }
            }
            out
        })
        .collect();
    Ok(Some(states))
}

fn expm_states(gen: &Generator, state0: &[Complex64], times: &[f64]) -> Result<Vec<ExcitationVector>> {
    let g = gen.no_jump();
    let mut cache: HashMap<u64, crate::linalg::CMat> = HashMap::new();
    let mut state = state0.to_vec();
    let mut now = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let dt = t - now;
        if dt > 0.0 {
            let prop = match cache.get(&dt.to_bits()) {
                Some(p) => p,
                None => {
                    let p = expm(&(&g * faer::Scale(Complex64::new(dt, 0.0))))?;
                    cache.entry(dt.to_bits()).or_insert(p)
                }
            };
            state = matvec(prop, &state);
        }
        now = t;
        out.push(state.clone());
    }
    Ok(out)
}

/// Default Runge-Kutta step as a fraction of `1/ρ(G)`.
const RK4_STEP: f64 = 0.01;

fn rk4_states(
    gen: &Generator,
    state0: &[Complex64],
    times: &[f64],
    max_step: Option<f64>,
) -> Result<Vec<ExcitationVector>> {
    let h_max = max_step.unwrap_or(RK4_STEP / gen.spectral_bound());
    let mut rk = Rk4::new(gen.dim());
    let mut state = state0.to_vec();
    let mut now = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let dt = t - now;
        if dt > 0.0 {
            let steps = (dt / h_max).ceil().max(1.0) as usize;
            let h = dt / steps as f64;
            for _ in 0..steps {
                rk.step(gen, &mut state, h, &mut [], |_, _, _| {});
            }
        }
        now = t;
        out.push(state.clone());
    }
    Ok(out)
}

/// Scratch space for classic fourth-order Runge-Kutta on `ċ = G c`, with
/// optional scalar accumulators integrated alongside.
struct Rk4 {
    k: [Vec<Complex64>; 4],
    tmp: Vec<Complex64>,
}

impl Rk4 {
    fn new(n: usize) -> Self {
        let z = vec![Complex64::new(0.0, 0.0); n];
        Self { k: [z.clone(), z.clone(), z.clone(), z.clone()], tmp: z }
    }

    /// `rates(gen, c, out)` writes the derivatives of the accumulators at `c`.
    fn step<F>(&mut self, gen: &Generator, c: &mut [Complex64], h: f64, acc: &mut [f64], rates: F)
    where
        F: Fn(&Generator, &[Complex64], &mut [f64]),
    {
        let m = acc.len();
        let mut r = [[0.0f64; 2]; 4];
        let weights = [0.0, 0.5, 0.5, 1.0];
        for s in 0..4 {
            if s == 0 {
                self.tmp.copy_from_slice(c);
            } else {
                let (prev, _) = self.k.split_at(s);
                let kp = &prev[s - 1];
                for ((t, x), d) in self.tmp.iter_mut().zip(c.iter()).zip(kp) {
                    *t = x + d * (weights[s] * h);
                }
            }
            gen.apply(&self.tmp, &mut self.k[s]);
            if m > 0 {
                rates(gen, &self.tmp, &mut r[s][..m]);
            }
        }
        for (j, x) in c.iter_mut().enumerate() {
            *x += (self.k[0][j] + 2.0 * self.k[1][j] + 2.0 * self.k[2][j] + self.k[3][j]) * (h / 6.0);
        }
        for (i, a) in acc.iter_mut().enumerate() {
            *a += (r[0][i] + 2.0 * r[1][i] + 2.0 * r[2][i] + r[3][i]) * (h / 6.0);
        }
    }
}

/// Where an initial excitation ends up.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmissionBudget {
    /// Probability emitted into the waveguide.
    pub waveguide: f64,
    /// Probability emitted into free space.
    pub free_space: f64,
    /// Population still excited when the integration stopped.
    pub remaining: f64,
    pub time: f64,
}

/// Integrates the waveguide flux `c† d_mat c` and free-space flux `Γ′|c|²`
/// along the evolution of `state0` until the remaining population drops
/// below `tolerance` or `t_max` is reached.
pub fn emission_budget(gen: &Generator, state0: &[Complex64], t_max: f64, tolerance: f64) -> Result<EmissionBudget> {
    check_inputs(gen, state0, &[])?;
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(invalid("t_max must be positive and finite"));
    }
    let h = RK4_STEP / gen.spectral_bound();
    let mut rk = Rk4::new(gen.dim());
    let mut c = state0.to_vec();
    let mut acc = [0.0f64; 2];
    let mut t = 0.0;
    let mut remaining = norm_sqr(&c);
    while remaining > tolerance && t < t_max {
        rk.step(gen, &mut c, h, &mut acc, |g, x, out| {
            out[0] = g.waveguide_rate(x);
            out[1] = g.free_space_rate(x);
        });
        t += h;
        remaining = norm_sqr(&c);
        if !remaining.is_finite() {
            return Err(Error::NumericalFailure("emission integration diverged".into()));
        }
    }
    Ok(EmissionBudget { waveguide: acc[0], free_space: acc[1], remaining, time: t })
}
