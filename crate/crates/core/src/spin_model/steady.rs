use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{ExcitationVector, Generator};
use crate::error::{invalid, Error, Result};
use crate::geometry::{ChainGeometry, Role};
use crate::linalg::{lu_solve, BandedMatrix};
use crate::params::PhysicalParams;
use crate::phase::cis_turns;
use crate::transfer_matrix::{SpectrumRow, SpectrumTable};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
/// Largest dimension solved densely by [`Solver::Auto`].
const DENSE_LIMIT: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    #[default]
    Auto,
    /// LU with partial pivoting on the dense system.
    Dense,
    /// Banded elimination of the equivalent O(N) system.
    Structured,
}

/// Stationary amplitudes under a weak coherent drive, solving
/// `(iΔ + G) c = −i·drive` in the frame rotating at the probe frequency.
pub fn steady_state_weak_drive(
    gen: &Generator,
    detuning: f64,
    drive: &[Complex64],
    solver: Solver,
) -> Result<ExcitationVector> {
    if drive.len() != gen.dim() {
        return Err(invalid(format!("drive has {} entries, chain has {} atoms", drive.len(), gen.dim())));
    }
    if !detuning.is_finite() || drive.iter().any(|d| !d.is_finite()) {
        return Err(invalid("drive and detuning must be finite"));
    }
    if drive.iter().all(|d| *d == ZERO) {
        return Err(invalid("drive vanishes on every site"));
    }
    let rhs: Vec<Complex64> = drive.iter().map(|d| -I * d).collect();
    let dense = match solver {
        Solver::Auto => gen.dim() <= DENSE_LIMIT,
        Solver::Dense => true,
        Solver::Structured => false,
    };
    if dense {
        let mut a = gen.no_jump();
        for j in 0..gen.dim() {
            a[(j, j)] += I * detuning;
        }
        lu_solve(&a, &rhs)
    } else {
        structured_solve(gen, detuning, &rhs)
    }
}

/// Unknowns `(c_j, F_j, B_j)` at `3j, 3j+1, 3j+2`, where `F_j` and `B_j`
/// are the fields arriving at atom j from its left and right:
///
/// - `(a_j − γ) c_j − γ F_j − γ B_j = b_j`
/// - `F_j = p_{j−1}(F_{j−1} + c_{j−1})`, `F_0 = 0`
/// - `B_j = p_j(B_{j+1} + c_{j+1})`, `B_{N−1} = 0`
fn structured_solve(gen: &Generator, detuning: f64, rhs: &[Complex64]) -> Result<ExcitationVector> {
    let n = gen.dim();
    let gamma = 0.5 * gen.gamma_1d();
    let steps = gen.steps();
    let one = Complex64::new(1.0, 0.0);
    let mut m = BandedMatrix::zeros(3 * n, 4, 3);
    let mut b = vec![ZERO; 3 * n];
    for j in 0..n {
        let (c, f, bk) = (3 * j, 3 * j + 1, 3 * j + 2);
        let a = Complex64::new(-0.5 * gen.gamma_prime() - gamma, detuning - gen.detunings()[j]);
        m.set(c, c, a);
        m.set(c, f, Complex64::new(-gamma, 0.0));
        m.set(c, bk, Complex64::new(-gamma, 0.0));
        b[c] = rhs[j];
        m.set(f, f, one);
        if j > 0 {
            m.set(f, f - 3, -steps[j - 1]);
            m.set(f, c - 3, -steps[j - 1]);
        }
        m.set(bk, bk, one);
        if j + 1 < n {
            m.set(bk, bk + 3, -steps[j]);
            m.set(bk, c + 3, -steps[j]);
        }
    }
    let x = m.solve(&b)?;
    Ok((0..n).map(|j| x[3 * j]).collect())
}

/// Guided probe fields `E_in,R(z) = right·e^{ik_A z}` and
/// `E_in,L(z) = left·e^{−ik_A z}`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GuidedInput {
    pub right: Complex64,
    pub left: Complex64,
}

impl GuidedInput {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn from_left(amplitude: Complex64) -> Self {
        Self { right: amplitude, left: ZERO }
    }

    /// Drive `√(Γ1D/2)(E_in,R + E_in,L)` seen by every atom.
    pub fn drive(&self, gen: &Generator) -> Vec<Complex64> {
        let h = (0.5 * gen.gamma_1d()).sqrt();
        gen.phases().iter().map(|u| h * (self.right * u + self.left * u.conj())).collect()
    }
}

/// Right- and left-moving fields at `z`: the input plus
/// `i√(Γ1D/2) Σ e^{ik_A|z − z_j|} c_j` over atoms strictly left (for `E_R`)
/// or strictly right (for `E_L`) of `z`. An atom sitting exactly at `z`
/// enters neither sum.
pub fn reconstruct_fields(
    gen: &Generator,
    amplitudes: &[Complex64],
    input: GuidedInput,
    z: f64,
) -> (Complex64, Complex64) {
    let h = (0.5 * gen.gamma_1d()).sqrt();
    let mut e_r = input.right * cis_turns(z);
    let mut e_l = input.left * cis_turns(-z);
    for (site, c) in gen.sites().iter().zip(amplitudes) {
        if site.position < z {
            e_r += I * h * cis_turns(z - site.position) * c;
        } else if site.position > z {
            e_l += I * h * cis_turns(site.position - z) * c;
        }
    }
    (e_r, e_l)
}

/// One-sided limits of the fields at an atom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldLimits {
    pub right_before: Complex64,
    pub right_after: Complex64,
    pub left_before: Complex64,
    pub left_after: Complex64,
}

pub fn field_limits(gen: &Generator, amplitudes: &[Complex64], input: GuidedInput, slot: usize) -> FieldLimits {
    let z = gen.sites()[slot].position;
    let (right_before, left_after) = reconstruct_fields(gen, amplitudes, input, z);
    let own = I * (0.5 * gen.gamma_1d()).sqrt() * amplitudes[slot];
    FieldLimits { right_before, right_after: right_before + own, left_before: left_after + own, left_after }
}

/// Total field driving an atom, taking the mean of both one-sided limits
/// so that the atom sees half of its own emission in each direction.
pub fn local_field(gen: &Generator, amplitudes: &[Complex64], input: GuidedInput, slot: usize) -> Complex64 {
    let f = field_limits(gen, amplitudes, input, slot);
    0.5 * (f.right_before + f.right_after + f.left_before + f.left_after)
}

fn guided_row(gen: &Generator, delta: f64, detuning: f64, solver: Solver) -> Result<SpectrumRow> {
    let input = GuidedInput::from_left(Complex64::new(1.0, 0.0));
    let c = steady_state_weak_drive(gen, detuning, &input.drive(gen), solver)?;
    let sites = gen.sites();
    let (_, reflected) = reconstruct_fields(gen, &c, GuidedInput::none(), sites[0].position - 1.0);
    let (transmitted, _) = reconstruct_fields(gen, &c, input, sites[sites.len() - 1].position + 1.0);
    let (r, t) = (reflected.norm_sqr(), transmitted.norm_sqr());
    Ok(SpectrumRow { delta, reflectance: r, transmittance: t, loss: 1.0 - r - t, intracavity: None, transmitted: None })
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

/// Reflectance and transmittance of a guided probe incident from the left,
/// reconstructed from the weak-drive steady state.
pub fn weak_drive_spectrum(
    geom: &ChainGeometry,
    params: &PhysicalParams,
    deltas: &[f64],
    solver: Solver,
) -> Result<SpectrumTable> {
    check_grid(deltas)?;
    let gen = Generator::new(geom, params)?;
    let rows = deltas
        .iter()
        .map(|&delta| guided_row(&gen, delta, params.to_rate(delta), solver))
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectrumTable { half_linewidth: params.half_linewidth(), rows })
}

/// Spectra of a single impurity driven from free space with unit Rabi
/// amplitude. `Ic` is `|E_R|²` just right of the impurity and `Tc` the
/// intensity leaving to the right, both divided by `2Γ1D/Γ²`, the resonant
/// emission of the same atom without mirrors. `R, T, L` are the guided-probe
/// response of the whole structure.
pub fn driven_impurity_spectrum(
    geom: &ChainGeometry,
    params: &PhysicalParams,
    deltas: &[f64],
    solver: Solver,
) -> Result<SpectrumTable> {
    check_grid(deltas)?;
    if params.gamma_1d <= 0.0 {
        return Err(invalid("an impurity with gamma_1d = 0 emits nothing into the waveguide"));
    }
    let gen = Generator::new(geom, params)?;
    let imps = gen.impurities();
    if imps.len() != 1 {
        return Err(Error::UnsupportedGeometry(format!(
            "driven cavity needs exactly one impurity, found {}",
            imps.len()
        )));
    }
    let slot = imps[0];
    let drive = gen.unit_vector(slot);
    let reference = 2.0 * params.gamma_1d / params.gamma_total().powi(2);
    let end = gen.sites()[gen.dim() - 1].position + 1.0;
    debug_assert_eq!(gen.sites()[slot].role, Role::Impurity);

    let rows = deltas
        .iter()
        .map(|&delta| {
            let detuning = params.to_rate(delta);
            let c = steady_state_weak_drive(&gen, detuning, &drive, solver)?;
            let ic = field_limits(&gen, &c, GuidedInput::none(), slot).right_after.norm_sqr() / reference;
            let tc = reconstruct_fields(&gen, &c, GuidedInput::none(), end).0.norm_sqr() / reference;
            let mut row = guided_row(&gen, delta, detuning, solver)?;
            row.intracavity = Some(ic);
            row.transmitted = Some(tc);
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectrumTable { half_linewidth: params.half_linewidth(), rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ChainGeometry;

    fn params() -> PhysicalParams {
        PhysicalParams::new(0.25, 1.0).unwrap()
    }

    #[test]
    fn single_atom_resonant_amplitude() {
        let g = ChainGeometry::build_mirror_chain(1, 0.5).unwrap();
        let gen = Generator::new(&g, &params()).unwrap();
        let c = steady_state_weak_drive(&gen, 0.0, &[Complex64::new(1.0, 0.0)], Solver::Dense).unwrap();
        assert!((c[0].norm() - 2.0 / 1.25).abs() < 1e-15);
    }

    #[test]
    fn structured_matches_dense() {
        let g = ChainGeometry::build_cavity_chain(7, 0.5, 0.75).unwrap();
        let g = g.with_detuning_offset(7, 0.3).unwrap();
        let gen = Generator::new(&g, &params()).unwrap();
        let drive: Vec<Complex64> = (0..gen.dim()).map(|j| Complex64::new(j as f64, 1.0 - j as f64)).collect();
        for det in [-2.0, 0.0, 0.4] {
            let a = steady_state_weak_drive(&gen, det, &drive, Solver::Dense).unwrap();
            let b = steady_state_weak_drive(&gen, det, &drive, Solver::Structured).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).norm() < 1e-11 * x.norm().max(1.0));
            }
        }
    }

    #[test]
    fn singular_lossless_pole_is_reported() {
        let p = PhysicalParams::new(1.0, 0.0).unwrap();
        let g = ChainGeometry::build_mirror_chain(2, 0.5).unwrap();
        let gen = Generator::new(&g, &p).unwrap();
        let drive = [Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)];
        for s in [Solver::Dense, Solver::Structured] {
            assert!(matches!(steady_state_weak_drive(&gen, 0.0, &drive, s), Err(Error::LinearSolveFailure(_))));
        }
    }

    #[test]
    fn zero_drive_is_rejected() {
        let g = ChainGeometry::build_mirror_chain(2, 0.5).unwrap();
        let gen = Generator::new(&g, &params()).unwrap();
        assert!(steady_state_weak_drive(&gen, 0.0, &[ZERO, ZERO], Solver::Auto).is_err());
    }

    #[test]
    fn no_emission_leaves_input_untouched() {
        let g = ChainGeometry::build_mirror_chain(3, 0.5).unwrap();
        let gen = Generator::new(&g, &params()).unwrap();
        let input = GuidedInput { right: Complex64::new(0.3, 0.1), left: Complex64::new(0.0, 2.0) };
        let (r, l) = reconstruct_fields(&gen, &[ZERO; 3], input, 0.3);
        assert_eq!(r, input.right * cis_turns(0.3));
        assert_eq!(l, input.left * cis_turns(-0.3));
    }
}
