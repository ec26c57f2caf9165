use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{norm_sqr, ExcitationVector, Generator};
use crate::error::{invalid, Error, Result};
use crate::geometry::ChainGeometry;
use crate::params::PhysicalParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeKind {
    /// Spin wave of the mirror atoms that does not emit into the waveguide.
    Cavity,
    /// Spin wave of the mirror atoms with maximal waveguide emission.
    Radiant,
    Custom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollectiveMode {
    pub vector: ExcitationVector,
    pub kind: ModeKind,
}

impl CollectiveMode {
    /// Normalized copy of an arbitrary amplitude vector.
    pub fn custom(vector: ExcitationVector) -> Result<Self> {
        let n = norm_sqr(&vector).sqrt();
        if !(n > 0.0 && n.is_finite()) {
            return Err(invalid("mode vector must be nonzero and finite"));
        }
        Ok(Self { vector: vector.into_iter().map(|x| x / n).collect(), kind: ModeKind::Custom })
    }
}

/// Cavity or radiant spin wave of the two mirrors around the cavity
/// interior. The j-th atom outward on each side carries `(−1)^j/√N_A`; the
/// radiant mode flips the sign on the left mirror.
pub fn collective_mode(geom: &ChainGeometry, kind: ModeKind) -> Result<CollectiveMode> {
    let (left, right) = geom.mirror_arms()?;
    if left.len() != right.len() || left.is_empty() {
        return Err(Error::UnsupportedGeometry(format!(
            "mirrors are not paired ({} atoms left, {} right)",
            left.len(),
            right.len()
        )));
    }
    let left_sign = match kind {
        ModeKind::Cavity => 1.0,
        ModeKind::Radiant => -1.0,
        ModeKind::Custom => return Err(invalid("custom modes are built with CollectiveMode::custom")),
    };
    let dim = geom.active_sites().count();
    let weight = 1.0 / ((2 * left.len()) as f64).sqrt();
    let mut vector = vec![Complex64::new(0.0, 0.0); dim];
    for (j, (&l, &r)) in left.iter().zip(&right).enumerate() {
        let sign = if j % 2 == 0 { -1.0 } else { 1.0 };
        vector[r] = Complex64::new(sign * weight, 0.0);
        vector[l] = Complex64::new(left_sign * sign * weight, 0.0);
    }
    Ok(CollectiveMode { vector, kind })
}

/// Population decay rate `v†(d_mat + Γ′)v` of a normalized mode.
pub fn mode_decay_rate(gen: &Generator, mode: &CollectiveMode) -> f64 {
    gen.waveguide_rate(&mode.vector) + gen.free_space_rate(&mode.vector)
}

/// Probability `N_AΓ1D/(N_AΓ1D + Γ′)` that the radiant excitation of `n_a`
/// atoms is emitted into the waveguide.
pub fn retrieval_efficiency(n_a: usize, params: &PhysicalParams) -> Result<f64> {
    params.validate()?;
    if n_a == 0 {
        return Err(invalid("need at least one atom"));
    }
    let guided = n_a as f64 * params.gamma_1d;
    Ok(guided / (guided + params.gamma_prime))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_cavity_modes() {
        let g = ChainGeometry::build_cavity_chain(1, 0.5, 0.75).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let cav = collective_mode(&g, ModeKind::Cavity).unwrap();
        let want = [-s, 0.0, -s];
        for (v, w) in cav.vector.iter().zip(want) {
            assert!((v - w).norm() < 1e-15);
        }
        let rad = collective_mode(&g, ModeKind::Radiant).unwrap();
        let overlap: Complex64 = cav.vector.iter().zip(&rad.vector).map(|(a, b)| a.conj() * b).sum();
        assert_eq!(overlap, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn works_without_the_impurity() {
        let g = ChainGeometry::build_cavity_chain(3, 0.5, 0.75).unwrap().without_impurities();
        let cav = collective_mode(&g, ModeKind::Cavity).unwrap();
        assert_eq!(cav.vector.len(), 6);
        assert!((norm_sqr(&cav.vector) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn plain_mirror_has_no_cavity_mode() {
        let g = ChainGeometry::build_mirror_chain(4, 0.5).unwrap();
        assert!(matches!(collective_mode(&g, ModeKind::Cavity), Err(Error::UnsupportedGeometry(_))));
    }

    #[test]
    fn retrieval_examples() {
        let p = PhysicalParams::new(0.25, 1.0).unwrap();
        assert!((1.0 - retrieval_efficiency(900, &p).unwrap() - 1.0 / 226.0).abs() < 1e-15);
        assert!((retrieval_efficiency(1, &p).unwrap() - 0.2).abs() < 1e-15);
        let lossless = PhysicalParams::new(0.25, 0.0).unwrap();
        assert_eq!(retrieval_efficiency(5, &lossless).unwrap(), 1.0);
    }
}
