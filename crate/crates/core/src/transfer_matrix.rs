//! Linear scattering of guided light by chains of atoms.
//!
//! Every atom is a symmetric two-port with reflection `r1` and transmission
//! `t1 = 1 + r1`; free propagation multiplies the right- and left-moving
//! amplitudes by `e^{±ikd}`. A [`TransferMatrix`] maps the amplitude pair
//! `(E_R, E_L)` just left of an element to the pair just right of it, so a
//! chain is the left-fold of its elements in order of increasing position.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::ops::Mul;

use crate::error::{invalid, Error, Result};
use crate::geometry::{ChainGeometry, Role};
use crate::params::{PhaseMode, PhysicalParams};
use crate::phase::cis_turns;
use crate::table::{fmt_csv, write_csv};

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const RESCALE_ABOVE: f64 = 1e150;

/// Reflection and transmission amplitudes of a symmetric element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterCoeffs {
    pub r: Complex64,
    pub t: Complex64,
}

impl ScatterCoeffs {
    pub fn reflectance(&self) -> f64 {
        self.r.norm_sqr()
    }

    pub fn transmittance(&self) -> f64 {
        self.t.norm_sqr()
    }

    /// Probability scattered out of the guided mode.
    pub fn loss(&self) -> f64 {
        1.0 - self.reflectance() - self.transmittance()
    }
}

/// `r1(Δ) = −Γ1D/(Γ − 2iΔ)`, `t1 = 1 + r1`, for probe detuning Δ (rate units).
pub fn single_atom_coeffs(detuning: f64, params: &PhysicalParams) -> ScatterCoeffs {
    let r = -params.gamma_1d / Complex64::new(params.gamma_total(), -2.0 * detuning);
    ScatterCoeffs { r, t: ONE + r }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix {
    pub m: [[Complex64; 2]; 2],
}

impl Mul for TransferMatrix {
    type Output = TransferMatrix;

    fn mul(self, rhs: TransferMatrix) -> TransferMatrix {
        let (a, b) = (self.m, rhs.m);
        let mut m = [[ZERO; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        TransferMatrix { m }
    }
}

impl TransferMatrix {
    pub fn identity() -> Self {
        Self { m: [[ONE, ZERO], [ZERO, ONE]] }
    }

    /// Lossy beam-splitter embedding of a symmetric scatterer,
    /// `(1/t)·[[t² − r², r], [−r, 1]]`. `None` for an opaque element (`t = 0`).
    pub fn from_scatter(s: ScatterCoeffs) -> Option<Self> {
        if s.t == ZERO {
            return None;
        }
        let inv_t = ONE / s.t;
        Some(Self {
            m: [[(s.t * s.t - s.r * s.r) * inv_t, s.r * inv_t], [-s.r * inv_t, inv_t]],
        })
    }

    /// Free propagation over `distance` (λ_A) at probe frequency ω_P, given as
    /// `ω_P/ω_A`.
    pub fn propagation(distance: f64, omega_p_over_omega_a: f64) -> Self {
        let phase = cis_turns(distance * omega_p_over_omega_a);
        Self { m: [[phase, ZERO], [ZERO, phase.conj()]] }
    }

    /// The element `next` placed to the right of `self`.
    pub fn then(&self, next: &TransferMatrix) -> TransferMatrix {
        *next * *self
    }

    pub fn det(&self) -> Complex64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn pow(&self, mut n: usize) -> TransferMatrix {
        let mut acc = Scaled::identity();
        let mut base = Scaled { matrix: *self, log_scale: 0.0 };
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.then(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.then(&base);
            }
        }
        acc.unscaled()
    }

    /// Amplitudes for light incident from the left.
    pub fn left_incidence(&self) -> ScatterCoeffs {
        let m = &self.m;
        ScatterCoeffs { r: -m[1][0] / m[1][1], t: self.det() / m[1][1] }
    }

    /// Amplitudes for light incident from the right.
    pub fn right_incidence(&self) -> ScatterCoeffs {
        let m = &self.m;
        ScatterCoeffs { r: m[0][1] / m[1][1], t: ONE / m[1][1] }
    }

    fn max_abs(&self) -> f64 {
        self.m.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Product kept as `e^{log_scale}·matrix` so long chains cannot overflow.
#[derive(Debug, Clone, Copy)]
struct Scaled {
    matrix: TransferMatrix,
    log_scale: f64,
}

impl Scaled {
    fn identity() -> Self {
        Self { matrix: TransferMatrix::identity(), log_scale: 0.0 }
    }

    fn then(&self, next: &Scaled) -> Scaled {
        let mut out = Scaled {
            matrix: self.matrix.then(&next.matrix),
            log_scale: self.log_scale + next.log_scale,
        };
        let big = out.matrix.max_abs();
        if big > RESCALE_ABOVE {
            for z in out.matrix.m.iter_mut().flatten() {
                *z /= big;
            }
            out.log_scale += big.ln();
        }
        out
    }

    fn unscaled(&self) -> TransferMatrix {
        let s = self.log_scale.exp();
        let mut m = self.matrix;
        for z in m.m.iter_mut().flatten() {
            *z *= s;
        }
        m
    }

    /// Scattering amplitudes of a product of unimodular factors. Using
    /// `det = 1` avoids the cancellation in evaluating the determinant.
    fn two_port(&self) -> TwoPort {
        let m = &self.matrix.m;
        TwoPort {
            r_left: -m[1][0] / m[1][1],
            r_right: m[0][1] / m[1][1],
            t: ONE / (m[1][1] * self.log_scale.exp()),
        }
    }
}

/// Response of a reciprocal chain, referenced to its first and last atoms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPort {
    pub r_left: Complex64,
    pub r_right: Complex64,
    pub t: Complex64,
}

impl TwoPort {
    pub fn transparent() -> Self {
        Self { r_left: ZERO, r_right: ZERO, t: ONE }
    }

    pub fn left(&self) -> ScatterCoeffs {
        ScatterCoeffs { r: self.r_left, t: self.t }
    }

    pub fn right(&self) -> ScatterCoeffs {
        ScatterCoeffs { r: self.r_right, t: self.t }
    }

    /// Cascade `self` followed by `next` (Redheffer star product).
    fn cascade(&self, next: &TwoPort) -> TwoPort {
        let denom = ONE - self.r_right * next.r_left;
        TwoPort {
            r_left: self.r_left + self.t * self.t * next.r_left / denom,
            r_right: next.r_right + next.t * next.t * self.r_right / denom,
            t: self.t * next.t / denom,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Cell {
    /// Distance from the previous active atom (0 for the first).
    gap: f64,
    offset: f64,
}

/// Active atoms as run-length compressed (gap, offset) cells.
fn cells(geom: &ChainGeometry) -> Vec<(Cell, usize)> {
    let mut runs: Vec<(Cell, usize)> = Vec::new();
    let mut prev: Option<f64> = None;
    for site in geom.active_sites() {
        let cell = Cell {
            gap: prev.map_or(0.0, |p| site.position - p),
            offset: site.detuning_offset,
        };
        prev = Some(site.position);
        match runs.last_mut() {
            Some((last, count)) if *last == cell => *count += 1,
            _ => runs.push((cell, 1)),
        }
    }
    runs
}

/// Scattering response of all active atoms in `geom` at probe detuning Δ.
pub fn chain_response(
    geom: &ChainGeometry,
    params: &PhysicalParams,
    detuning: f64,
    mode: PhaseMode,
) -> Result<TwoPort> {
    runs_response(&cells(geom), params, detuning, mode)
}

fn runs_response(runs: &[(Cell, usize)], params: &PhysicalParams, detuning: f64, mode: PhaseMode) -> Result<TwoPort> {
    if runs.is_empty() {
        return Err(invalid("chain has no active atoms"));
    }
    let k = params.wavenumber_turns(detuning, mode);

    let mut acc = Scaled::identity();
    let mut opaque = false;
    for (cell, count) in runs {
        let atom = single_atom_coeffs(detuning - cell.offset, params);
        let Some(atom_m) = TransferMatrix::from_scatter(atom) else {
            opaque = true;
            break;
        };
        let unit = TransferMatrix::propagation(cell.gap, k).then(&atom_m);
        let block = Scaled { matrix: unit, log_scale: 0.0 };
        let block = if *count == 1 { block } else { scaled_pow(block, *count) };
        acc = acc.then(&block);
    }
    let port = if opaque { cascade_response(runs, params, detuning, k) } else { acc.two_port() };
    if !(port.r_left.is_finite() && port.r_right.is_finite() && port.t.is_finite()) {
        return Err(Error::NumericalFailure(format!("chain response diverged at detuning {detuning}")));
    }
    Ok(port)
}

fn scaled_pow(base: Scaled, mut n: usize) -> Scaled {
    let mut acc = Scaled::identity();
    let mut base = base;
    while n > 0 {
        if n & 1 == 1 {
            acc = acc.then(&base);
        }
        n >>= 1;
        if n > 0 {
            base = base.then(&base);
        }
    }
    acc
}

/// Star-product evaluation used when some atom reflects perfectly and has no
/// transfer matrix. Light cannot cross an opaque atom, so each reflection
/// only sees the atoms up to the nearest opaque one.
fn cascade_response(runs: &[(Cell, usize)], params: &PhysicalParams, detuning: f64, k: f64) -> TwoPort {
    let elements: Vec<(TwoPort, TwoPort)> = runs
        .iter()
        .flat_map(|(cell, count)| {
            let atom = single_atom_coeffs(detuning - cell.offset, params);
            let atom = TwoPort { r_left: atom.r, r_right: atom.r, t: atom.t };
            let prop = TwoPort { r_left: ZERO, r_right: ZERO, t: cis_turns(cell.gap * k) };
            std::iter::repeat_n((prop, atom), *count)
        })
        .collect();
    let first = elements.iter().position(|(_, a)| a.t == ZERO).unwrap_or(elements.len() - 1);
    let last = elements.iter().rposition(|(_, a)| a.t == ZERO).unwrap_or(0);

    let mut front = TwoPort::transparent();
    for (i, (prop, atom)) in elements[..=first].iter().enumerate() {
        if i > 0 {
            front = front.cascade(prop);
        }
        front = front.cascade(atom);
    }
    let mut back = elements[last].1;
    for (prop, atom) in &elements[last + 1..] {
        back = back.cascade(prop).cascade(atom);
    }
    TwoPort { r_left: front.r_left, r_right: back.r_right, t: ZERO }
}

/// One detuning point of a spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    /// δ = Δ/(Γ/2).
    pub delta: f64,
    pub reflectance: f64,
    pub transmittance: f64,
    pub loss: f64,
    /// Intra-cavity intensity at a driven impurity (normalized).
    pub intracavity: Option<f64>,
    /// Intensity transmitted through one mirror (normalized).
    pub transmitted: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumTable {
    /// Γ/2 of the parameters used, converting `delta` back to a rate.
    pub half_linewidth: f64,
    pub rows: Vec<SpectrumRow>,
}

impl SpectrumTable {
    pub fn deltas(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.delta).collect()
    }

    pub fn intracavity(&self) -> Option<Vec<f64>> {
        self.rows.iter().map(|r| r.intracavity).collect()
    }

    pub fn reflectance(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.reflectance).collect()
    }

    /// CSV with header `delta,R,T,L` plus `Ic,Tc` when every row carries them.
    pub fn to_csv(&self) -> String {
        let cavity = !self.rows.is_empty()
            && self.rows.iter().all(|r| r.intracavity.is_some() && r.transmitted.is_some());
        let header: &[&str] =
            if cavity { &["delta", "R", "T", "L", "Ic", "Tc"] } else { &["delta", "R", "T", "L"] };
        write_csv(
            header,
            self.rows.iter().map(|r| {
                let mut v = vec![
                    fmt_csv(r.delta),
                    fmt_csv(r.reflectance),
                    fmt_csv(r.transmittance),
                    fmt_csv(r.loss),
                ];
                if cavity {
                    v.push(fmt_csv(r.intracavity.unwrap_or(f64::NAN)));
                    v.push(fmt_csv(r.transmitted.unwrap_or(f64::NAN)));
                }
                v
            }),
        )
    }
}

fn check_grid(deltas: &[f64]) -> Result<()> {
    if deltas.is_empty() {
        return Err(invalid("detuning grid is empty"));
    }
    if deltas.iter().any(|d| !d.is_finite()) {
        return Err(invalid("detuning grid contains non-finite values"));
    }
    Ok(())
}

/// Reflectance, transmittance and loss of a chain over a grid of
/// dimensionless detunings. Transparent atoms do not scatter.
pub fn chain_spectrum(
    geom: &ChainGeometry,
    params: &PhysicalParams,
    deltas: &[f64],
    mode: PhaseMode,
) -> Result<SpectrumTable> {
    params.validate()?;
    check_grid(deltas)?;
    let runs = cells(geom);
    let rows = deltas
        .iter()
        .map(|&delta| {
            let port = runs_response(&runs, params, params.to_rate(delta), mode)?;
            let s = port.left();
            Ok(SpectrumRow {
                delta,
                reflectance: s.reflectance(),
                transmittance: s.transmittance(),
                loss: s.loss(),
                intracavity: None,
                transmitted: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectrumTable { half_linewidth: params.half_linewidth(), rows })
}

/// Half-width √(ω_AΓ1D/π) of the band gap of an infinite lattice (rate units).
pub fn band_gap_halfwidth(params: &PhysicalParams) -> f64 {
    (params.omega_a() * params.gamma_1d / PI).sqrt()
}

/// Effective finesse `π/(1 − R)` at dimensionless detuning δ, using exact
/// propagation phases. A perfect reflector returns `f64::INFINITY`.
pub fn finesse(geom: &ChainGeometry, params: &PhysicalParams, delta: f64) -> Result<f64> {
    params.validate()?;
    let r = chain_response(geom, params, params.to_rate(delta), PhaseMode::Exact)?.left().reflectance();
    let leak = 1.0 - r;
    Ok(if leak <= 0.0 { f64::INFINITY } else { PI / leak })
}

/// Geometry pieces of a single-impurity cavity.
struct CavityParts {
    left: Option<ChainGeometry>,
    right: Option<ChainGeometry>,
    gap_left: f64,
    gap_right: f64,
    impurity_offset: f64,
}

fn split_cavity(geom: &ChainGeometry) -> Result<CavityParts> {
    let active: Vec<_> = geom.active_sites().copied().collect();
    let imps: Vec<usize> = active
        .iter()
        .enumerate()
        .filter(|(_, s)| s.role == Role::Impurity)
        .map(|(i, _)| i)
        .collect();
    if imps.len() != 1 {
        return Err(Error::UnsupportedGeometry(format!(
            "driven cavity needs exactly one impurity, found {}",
            imps.len()
        )));
    }
    let k = imps[0];
    let (n_left, n_right) = (k, active.len() - k - 1);
    if n_left != n_right {
        return Err(Error::UnsupportedGeometry(format!(
            "mirrors are asymmetric ({n_left} atoms left, {n_right} right)"
        )));
    }
    let imp = active[k];
    let left = (n_left > 0).then(|| ChainGeometry::new(active[..k].to_vec())).transpose()?;
    let right = (n_right > 0).then(|| ChainGeometry::new(active[k + 1..].to_vec())).transpose()?;
    Ok(CavityParts {
        gap_left: if n_left > 0 { imp.position - active[k - 1].position } else { 0.0 },
        gap_right: if n_right > 0 { active[k + 1].position - imp.position } else { 0.0 },
        left,
        right,
        impurity_offset: imp.detuning_offset,
    })
}

/// Spectra of an impurity driven from free space between two atomic mirrors.
///
/// The impurity field is summed over all round trips between the mirrors in
/// closed form. `Ic` is the right-moving intensity just right of the impurity
/// and `Tc` the intensity leaving through the right mirror; both are divided
/// by the resonant emission of the same impurity without mirrors. The
/// `R, T, L` columns hold the response of the whole structure to a guided
/// probe.
pub fn driven_impurity_spectrum_analytic(
    geom: &ChainGeometry,
    params: &PhysicalParams,
    deltas: &[f64],
    mode: PhaseMode,
) -> Result<SpectrumTable> {
    params.validate()?;
    check_grid(deltas)?;
    if params.gamma_1d <= 0.0 {
        return Err(invalid("an impurity with gamma_1d = 0 emits nothing into the waveguide"));
    }
    let parts = split_cavity(geom)?;
    let gamma = params.gamma_total();
    let h2 = 0.5 * params.gamma_1d;
    let reference = 4.0 * h2 / (gamma * gamma);
    let left_runs = parts.left.as_ref().map(cells);
    let right_runs = parts.right.as_ref().map(cells);
    let whole_runs = cells(geom);

    let rows = deltas
        .iter()
        .map(|&delta| {
            let detuning = params.to_rate(delta);
            let k = params.wavenumber_turns(detuning, mode);
            let ports = |r: &Option<Vec<(Cell, usize)>>| -> Result<TwoPort> {
                r.as_ref().map_or(Ok(TwoPort::transparent()), |r| runs_response(r, params, detuning, mode))
            };
            let left = ports(&left_runs)?;
            let right = ports(&right_runs)?;
            let rho_l = left.r_right * cis_turns(2.0 * parts.gap_left * k);
            let rho_r = right.r_left * cis_turns(2.0 * parts.gap_right * k);
            let round_trip = ONE - rho_l * rho_r;
            let q = (rho_l * (ONE + rho_r) + rho_r * (ONE + rho_l)) / round_trip;
            let atom = Complex64::new(-0.5 * gamma, detuning - parts.impurity_offset);
            let source = h2.sqrt() / (atom - h2 * q);
            let e_right = source * (ONE + rho_l) / round_trip;
            let ic = e_right.norm_sqr() / reference;
            let tc = right.t.norm_sqr() * ic;

            let whole = runs_response(&whole_runs, params, detuning, mode)?.left();
            Ok(SpectrumRow {
                delta,
                reflectance: whole.reflectance(),
                transmittance: whole.transmittance(),
                loss: whole.loss(),
                intracavity: Some(ic),
                transmitted: Some(tc),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectrumTable { half_linewidth: params.half_linewidth(), rows })
}
