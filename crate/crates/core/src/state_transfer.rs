//! Adiabatic transfer of a stored excitation between two impurities that
//! share one atomic cavity.
//!
//! Each impurity has a metastable state `s` coupled to its excited state by
//! a classical pulse. In the reduced model the five states
//! `|s_p⟩, |e_p⟩, |1_cav⟩, |e_q⟩, |s_q⟩` form a chain with couplings
//! `Ω_p, g, g, Ω_q`; the full model replaces the cavity by every mirror atom
//! of the chain. Population lost through decay counts as error.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

use crate::error::{invalid, Error, Result};
use crate::geometry::ChainGeometry;
use crate::jc_model::JcParams;
use crate::optimize::{maximize_log, Maximum};
use crate::params::PhysicalParams;
use crate::spin_model::{collective_mode, Generator, ModeKind};
use crate::table::{fmt_csv, write_csv};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Largest time step as a fraction of `min(1/g, 1/Ω₀, 1/Γ)`.
const STEP_FRACTION: f64 = 1.0 / 50.0;
/// Largest full-model step as a fraction of `1/ρ(G)`.
const FULL_STEP: f64 = 0.05;
/// Tolerated numerical growth of the norm over one step.
const NORM_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PulseShape {
    /// `Ω_p = Ω₀ sin(πt/2T)`, `Ω_q = Ω₀ cos(πt/2T)`.
    CounterIntuitive,
    /// The same pulses with `p` and `q` exchanged.
    Intuitive,
    /// Piecewise-linear samples on an increasing time grid from 0 to `T`.
    Tabulated { times: Vec<f64>, omega_p: Vec<f64>, omega_q: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule {
    /// Peak Rabi amplitude Ω₀.
    pub omega0: f64,
    pub duration: f64,
    pub shape: PulseShape,
}

impl PulseSchedule {
    pub fn counter_intuitive(omega0: f64, duration: f64) -> Result<Self> {
        Self::analytic(omega0, duration, PulseShape::CounterIntuitive)
    }

    pub fn intuitive(omega0: f64, duration: f64) -> Result<Self> {
        Self::analytic(omega0, duration, PulseShape::Intuitive)
    }

    fn analytic(omega0: f64, duration: f64, shape: PulseShape) -> Result<Self> {
        if !(omega0.is_finite() && omega0 >= 0.0) {
            return Err(invalid(format!("omega0 must be finite and non-negative, got {omega0}")));
        }
        if !(duration.is_finite() && duration > 0.0) {
            return Err(invalid(format!("duration must be positive, got {duration}")));
        }
        Ok(Self { omega0, duration, shape })
    }

    pub fn tabulated(times: Vec<f64>, omega_p: Vec<f64>, omega_q: Vec<f64>) -> Result<Self> {
        if times.len() < 2 || times.len() != omega_p.len() || times.len() != omega_q.len() {
            return Err(invalid("tabulated pulses need at least two samples of equal length"));
        }
        if times[0] != 0.0 || times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("sample times must start at 0 and increase"));
        }
        if times.iter().chain(&omega_p).chain(&omega_q).any(|x| !x.is_finite()) {
            return Err(invalid("samples must be finite"));
        }
        let duration = times[times.len() - 1];
        let omega0 = omega_p.iter().chain(&omega_q).fold(0.0f64, |m, x| m.max(x.abs()));
        Ok(Self { omega0, duration, shape: PulseShape::Tabulated { times, omega_p, omega_q } })
    }

    /// `(Ω_p(t), Ω_q(t))`.
    pub fn rabi(&self, t: f64) -> (f64, f64) {
        match &self.shape {
            PulseShape::CounterIntuitive | PulseShape::Intuitive => {
                let (s, c) = (FRAC_PI_2 * t / self.duration).sin_cos();
                let (s, c) = (self.omega0 * s, self.omega0 * c);
                if self.shape == PulseShape::CounterIntuitive {
                    (s, c)
                } else {
                    (c, s)
                }
            }
            PulseShape::Tabulated { times, omega_p, omega_q } => {
                let k = times.partition_point(|&x| x <= t).clamp(1, times.len() - 1);
                let w = ((t - times[k - 1]) / (times[k] - times[k - 1])).clamp(0.0, 1.0);
                let lerp = |v: &[f64]| v[k - 1] + w * (v[k] - v[k - 1]);
                (lerp(omega_p), lerp(omega_q))
            }
        }
    }

    /// CSV `t,omega_p,omega_q` on `points` equally spaced times.
    pub fn to_csv(&self, points: usize) -> String {
        let n = points.max(2);
        write_csv(
            &["t", "omega_p", "omega_q"],
            (0..n).map(|i| {
                let t = self.duration * i as f64 / (n - 1) as f64;
                let (p, q) = self.rabi(t);
                vec![fmt_csv(t), fmt_csv(p), fmt_csv(q)]
            }),
        )
    }
}

/// Five-level chain `|s_p⟩ –Ω_p– |e_p⟩ –g– |1_cav⟩ –g– |e_q⟩ –Ω_q– |s_q⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaSystem {
    pub g: f64,
    pub kappa: f64,
    pub gamma: f64,
    /// Dissipative coupling `γ_pq` between the two excited states through
    /// the waveguide, entering `H_eff` as `−iγ_pq/2`. Zero in the plain
    /// five-level model; `Γ1D` reproduces the full chain when the
    /// impurities are a whole number of wavelengths apart.
    #[serde(default)]
    pub collective: f64,
}

impl LambdaSystem {
    pub fn new(g: f64, kappa: f64, gamma: f64) -> Result<Self> {
        let jc = JcParams::new(g, kappa, gamma)?;
        Ok(Self::from_jc(&jc))
    }

    pub fn from_jc(jc: &JcParams) -> Self {
        Self { g: jc.g, kappa: jc.kappa, gamma: jc.gamma, collective: 0.0 }
    }

    pub fn with_collective_decay(mut self, gamma_pq: f64) -> Result<Self> {
        if !(gamma_pq.is_finite() && gamma_pq >= 0.0 && gamma_pq <= self.gamma) {
            return Err(invalid(format!("collective decay must lie in [0, gamma], got {gamma_pq}")));
        }
        self.collective = gamma_pq;
        Ok(self)
    }

    /// Hermitian coupling matrix at the given pulse amplitudes.
    pub fn hamiltonian(&self, omega_p: f64, omega_q: f64) -> [[f64; 5]; 5] {
        let mut h = [[0.0; 5]; 5];
        let links = [(0, 1, omega_p), (1, 2, self.g), (2, 3, self.g), (3, 4, omega_q)];
        for (a, b, w) in links {
            h[a][b] = w;
            h[b][a] = w;
        }
        h
    }

    fn decay(&self) -> [f64; 5] {
        [0.0, 0.5 * self.gamma, 0.5 * self.kappa, 0.5 * self.gamma, 0.0]
    }

    /// `−i H_eff ψ` with `H_eff = H − i·diag(0, Γ/2, κ/2, Γ/2, 0)` plus the
    /// collective term.
    fn rate(&self, omega_p: f64, omega_q: f64, psi: &[Complex64; 5]) -> [Complex64; 5] {
        let h = self.hamiltonian(omega_p, omega_q);
        let d = self.decay();
        let mut out = [ZERO; 5];
        for a in 0..5 {
            let mut acc = -d[a] * psi[a];
            for b in 0..5 {
                if h[a][b] != 0.0 {
                    acc -= I * h[a][b] * psi[b];
                }
            }
            out[a] = acc;
        }
        out[1] -= 0.5 * self.collective * psi[3];
        out[3] -= 0.5 * self.collective * psi[1];
        out
    }
}

/// Normalized `(gΩ_q, 0, −Ω_pΩ_q, 0, gΩ_p)`, the zero-energy eigenvector
/// of the coupling matrix at time `t`.
pub fn dark_state(sys: &LambdaSystem, schedule: &PulseSchedule, t: f64) -> Result<[f64; 5]> {
    let (p, q) = schedule.rabi(t);
    let v = [sys.g * q, 0.0, -p * q, 0.0, sys.g * p];
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n == 0.0 {
        return Err(Error::UndefinedDarkState);
    }
    Ok(v.map(|x| x / n))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferResult {
    /// `|⟨s_q|ψ(T)⟩|²`.
    pub fidelity: f64,
    /// `‖ψ(T)‖²`; `1 − norm` is the population lost to decay.
    pub norm: f64,
    pub steps: usize,
}

fn step_count(schedule: &PulseSchedule, rates: &[f64], min_steps: usize) -> Result<usize> {
    let fastest = rates.iter().fold(schedule.omega0, |m, r| m.max(*r));
    let required = if fastest > 0.0 { (schedule.duration * fastest / STEP_FRACTION).ceil() as usize } else { 1 };
    let steps = required.max(min_steps).max(1);
    if steps > 500_000_000 {
        return Err(invalid(format!("transfer would need {steps} integration steps")));
    }
    Ok(steps)
}

fn check_norm(prev: f64, now: f64, t: f64) -> Result<()> {
    if !now.is_finite() || now > prev * (1.0 + NORM_SLACK) + NORM_SLACK {
        return Err(Error::IntegrationFailure(format!("norm grew from {prev} to {now} at t = {t}")));
    }
    Ok(())
}

/// Integrates the five-level chain from `|s_p⟩` with fourth-order
/// Runge-Kutta. At least `min_steps` steps are used, and never steps longer
/// than `min(1/g, 1/Ω₀, 1/Γ)/50`.
pub fn simulate_transfer_reduced(
    sys: &LambdaSystem,
    schedule: &PulseSchedule,
    min_steps: usize,
) -> Result<TransferResult> {
    let steps = step_count(schedule, &[sys.g, sys.gamma, sys.kappa], min_steps)?;
    let h = schedule.duration / steps as f64;
    let mut psi = [ZERO; 5];
    psi[0] = Complex64::new(1.0, 0.0);
    let mut norm = 1.0;
    let axpy = |a: &[Complex64; 5], k: &[Complex64; 5], s: f64| -> [Complex64; 5] {
        std::array::from_fn(|i| a[i] + k[i] * s)
    };
    for n in 0..steps {
        let t = n as f64 * h;
        let (p0, q0) = schedule.rabi(t);
        let (pm, qm) = schedule.rabi(t + 0.5 * h);
        let (p1, q1) = schedule.rabi(t + h);
        let k1 = sys.rate(p0, q0, &psi);
        let k2 = sys.rate(pm, qm, &axpy(&psi, &k1, 0.5 * h));
        let k3 = sys.rate(pm, qm, &axpy(&psi, &k2, 0.5 * h));
        let k4 = sys.rate(p1, q1, &axpy(&psi, &k3, h));
        for i in 0..5 {
            psi[i] += (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (h / 6.0);
        }
        let now: f64 = psi.iter().map(|x| x.norm_sqr()).sum();
        check_norm(norm, now, t + h)?;
        norm = now;
    }
    Ok(TransferResult { fidelity: psi[4].norm_sqr(), norm, steps })
}

/// Transfer through every atom of a two-impurity chain. The state holds the
/// excited-state amplitudes of all active atoms followed by `s_p` and `s_q`:
///
/// - `ċ = G c − iΩ_p s_p e_p − iΩ_q s_q e_q`
/// - `ṡ_p = −iΩ_p c_p`, `ṡ_q = −iΩ_q c_q`
pub fn simulate_transfer_full(
    geom: &ChainGeometry,
    params: &PhysicalParams,
    schedule: &PulseSchedule,
    min_steps: usize,
) -> Result<TransferResult> {
    let gen = Generator::new(geom, params)?;
    let imps = gen.impurities();
    if imps.len() != 2 {
        return Err(Error::UnsupportedGeometry(format!("transfer needs two impurities, found {}", imps.len())));
    }
    let (ip, iq) = (imps[0], imps[1]);
    let g = full_model_coupling(geom, params)?;
    let rho = gen.spectral_bound();
    let steps = step_count(schedule, &[g, params.gamma_total(), params.gamma_prime], min_steps)?
        .max((schedule.duration * rho / FULL_STEP).ceil() as usize);
    let h = schedule.duration / steps as f64;

    let n = gen.dim();
    let mut c = vec![ZERO; n];
    let mut sp = Complex64::new(1.0, 0.0);
    let mut sq = ZERO;
    let mut k: [(Vec<Complex64>, Complex64, Complex64); 4] = std::array::from_fn(|_| (vec![ZERO; n], ZERO, ZERO));
    let mut tmp = vec![ZERO; n];
    let mut norm = 1.0;
    let eval = |om: (f64, f64), c: &[Complex64], sp: Complex64, sq: Complex64, out: &mut (Vec<Complex64>, Complex64, Complex64)| {
        gen.apply(c, &mut out.0);
        out.0[ip] -= I * om.0 * sp;
        out.0[iq] -= I * om.1 * sq;
        out.1 = -I * om.0 * c[ip];
        out.2 = -I * om.1 * c[iq];
    };
    for step in 0..steps {
        let t = step as f64 * h;
        let om = [schedule.rabi(t), schedule.rabi(t + 0.5 * h), schedule.rabi(t + 0.5 * h), schedule.rabi(t + h)];
        let frac = [0.0, 0.5, 0.5, 1.0];
        for s in 0..4 {
            let (mut sp_s, mut sq_s) = (sp, sq);
            if s == 0 {
                tmp.copy_from_slice(&c);
            } else {
                let (prev, _) = k.split_at(s);
                let kp = &prev[s - 1];
                for ((t, x), d) in tmp.iter_mut().zip(&c).zip(&kp.0) {
                    *t = x + d * (frac[s] * h);
                }
                sp_s += kp.1 * (frac[s] * h);
                sq_s += kp.2 * (frac[s] * h);
            }
            eval(om[s], &tmp, sp_s, sq_s, &mut k[s]);
        }
        for j in 0..n {
            c[j] += (k[0].0[j] + 2.0 * k[1].0[j] + 2.0 * k[2].0[j] + k[3].0[j]) * (h / 6.0);
        }
        sp += (k[0].1 + 2.0 * k[1].1 + 2.0 * k[2].1 + k[3].1) * (h / 6.0);
        sq += (k[0].2 + 2.0 * k[1].2 + 2.0 * k[2].2 + k[3].2) * (h / 6.0);
        let now = c.iter().map(|x| x.norm_sqr()).sum::<f64>() + sp.norm_sqr() + sq.norm_sqr();
        check_norm(norm, now, t + h)?;
        norm = now;
    }
    Ok(TransferResult { fidelity: sq.norm_sqr(), norm, steps })
}

/// `|⟨e_p|G|cav⟩|` of a two-impurity chain, the cavity coupling felt by
/// each impurity.
pub fn full_model_coupling(geom: &ChainGeometry, params: &PhysicalParams) -> Result<f64> {
    let gen = Generator::new(geom, params)?;
    let imps = gen.impurities();
    let Some(&ip) = imps.first() else {
        return Err(Error::UnsupportedGeometry("no impurity".into()));
    };
    let cav = collective_mode(geom, ModeKind::Cavity)?;
    Ok(gen.matrix_element(&gen.unit_vector(ip), &cav.vector).norm())
}

/// Which model evaluates the fidelity during optimization.
#[derive(Debug, Clone)]
pub enum TransferModel {
    Reduced(LambdaSystem),
    Full { geom: ChainGeometry, params: PhysicalParams },
}

impl TransferModel {
    pub fn coupling(&self) -> Result<f64> {
        match self {
            TransferModel::Reduced(sys) => Ok(sys.g),
            TransferModel::Full { geom, params } => full_model_coupling(geom, params),
        }
    }

    pub fn fidelity(&self, schedule: &PulseSchedule, min_steps: usize) -> Result<TransferResult> {
        match self {
            TransferModel::Reduced(sys) => simulate_transfer_reduced(sys, schedule, min_steps),
            TransferModel::Full { geom, params } => simulate_transfer_full(geom, params, schedule, min_steps),
        }
    }
}

/// Default pulse length `50/g`.
pub fn default_duration(g: f64) -> f64 {
    50.0 / g
}

/// Maximizes the counter-intuitive transfer fidelity over Ω₀ in `bracket`
/// at fixed duration, to a relative Ω₀ tolerance of 1e-3.
pub fn optimize_omega0(model: &TransferModel, duration: f64, bracket: (f64, f64)) -> Result<Maximum> {
    maximize_log(
        |omega0| Ok(model.fidelity(&PulseSchedule::counter_intuitive(omega0, duration)?, 1000)?.fidelity),
        bracket.0,
        bracket.1,
        17,
        1e-3,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counter_intuitive_ordering() {
        let s = PulseSchedule::counter_intuitive(2.0, 10.0).unwrap();
        assert_eq!(s.rabi(0.0), (0.0, 2.0));
        let (p, q) = s.rabi(10.0);
        assert_eq!(p, 2.0);
        assert!(q.abs() < 1e-15);
        for t in [0.0, 1.3, 5.0, 9.9] {
            let (p, q) = s.rabi(t);
            assert!((p * p + q * q - 4.0).abs() < 1e-14);
        }
        let r = PulseSchedule::intuitive(2.0, 10.0).unwrap();
        assert_eq!(r.rabi(0.0), (2.0, 0.0));
    }

    #[test]
    fn tabulated_interpolates() {
        let s = PulseSchedule::tabulated(vec![0.0, 1.0, 3.0], vec![0.0, 1.0, 2.0], vec![2.0, 1.0, 0.0]).unwrap();
        assert_eq!(s.rabi(0.5), (0.5, 1.5));
        assert_eq!(s.rabi(2.0), (1.5, 0.5));
        assert_eq!(s.rabi(3.0), (2.0, 0.0));
        assert_eq!(s.omega0, 2.0);
        assert!(PulseSchedule::tabulated(vec![0.0, 0.0], vec![1.0, 1.0], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn schedule_csv() {
        let s = PulseSchedule::counter_intuitive(1.0, 2.0).unwrap();
        let csv = s.to_csv(3);
        assert!(csv.starts_with("t,omega_p,omega_q\n0,0,1\n1,"));
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn dark_state_examples() {
        let sys = LambdaSystem::new(1.0, 0.0, 0.0).unwrap();
        let s = PulseSchedule::counter_intuitive(1.0, 1.0).unwrap();
        assert_eq!(dark_state(&sys, &s, 0.0).unwrap(), [1.0, 0.0, 0.0, 0.0, 0.0]);
        let end = dark_state(&sys, &s, 1.0).unwrap();
        assert!((end[4] - 1.0).abs() < 1e-15 && end[0].abs() < 1e-15);
        // Equal pulses Ω₀/√2 with g = Ω₀.
        let w = std::f64::consts::FRAC_1_SQRT_2;
        let tab = PulseSchedule::tabulated(vec![0.0, 1.0], vec![w, w], vec![w, w]).unwrap();
        let d = dark_state(&sys, &tab, 0.5).unwrap();
        let norm = (2.5f64).sqrt();
        let want = [1.0 / norm, 0.0, -w / norm, 0.0, 1.0 / norm];
        for (a, b) in d.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        let off = PulseSchedule::counter_intuitive(0.0, 1.0).unwrap();
        assert!(matches!(dark_state(&sys, &off, 0.3), Err(Error::UndefinedDarkState)));
    }

    #[test]
    fn no_pulses_no_transfer() {
        let sys = LambdaSystem::new(1.0, 0.5, 0.5).unwrap();
        let s = PulseSchedule::counter_intuitive(0.0, 50.0).unwrap();
        let r = simulate_transfer_reduced(&sys, &s, 1000).unwrap();
        assert_eq!(r.fidelity, 0.0);
        assert!((r.norm - 1.0).abs() < 1e-15);
    }

    #[test]
    fn lossless_adiabatic_transfer_is_complete() {
        // Only near Ω₀ ≈ 2g is T = 50/g adiabatic enough for 0.999.
        let sys = LambdaSystem::new(1.0, 0.0, 0.0).unwrap();
        let s = PulseSchedule::counter_intuitive(2.0, 50.0).unwrap();
        let r = simulate_transfer_reduced(&sys, &s, 1000).unwrap();
        assert!(r.fidelity >= 0.999, "{r:?}");
        assert!((r.norm - 1.0).abs() < 1e-9);
        let slow = PulseSchedule::counter_intuitive(50.0, 50.0).unwrap();
        assert!(simulate_transfer_reduced(&sys, &slow, 1000).unwrap().fidelity < 0.5);
    }

    #[test]
    fn coarse_steps_are_refined() {
        let sys = LambdaSystem::new(1.0, 0.2, 0.2).unwrap();
        let s = PulseSchedule::counter_intuitive(1.0, 50.0).unwrap();
        let r = simulate_transfer_reduced(&sys, &s, 10).unwrap();
        assert!(r.steps >= 2500);
    }
}
