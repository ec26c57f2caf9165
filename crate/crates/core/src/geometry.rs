//! Atom positions along the waveguide.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::params::PhysicalParams;

/// Bragg lattice constant d_M = λ_A/2.
pub const MIRROR_SPACING: f64 = 0.5;
/// Impurity-to-neighbour distance d_I = 3λ_A/4, placing the impurity at a
/// cavity anti-node.
pub const IMPURITY_SPACING: f64 = 0.75;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Mirror,
    Impurity,
    /// Shelved in a state that does not couple to the guided mode.
    Transparent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Site {
    /// Position in units of λ_A.
    pub position: f64,
    pub role: Role,
    /// Shift of this atom's resonance from ω_A, in rate units.
    #[serde(default)]
    pub detuning_offset: f64,
}

impl Site {
    pub fn new(position: f64, role: Role) -> Self {
        Self { position, role, detuning_offset: 0.0 }
    }

    pub fn is_active(&self) -> bool {
        self.role != Role::Transparent
    }
}

/// Ordered chain of atoms. Positions are strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainGeometry {
    sites: Vec<Site>,
}

impl<'de> Deserialize<'de> for ChainGeometry {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            sites: Vec<Site>,
        }
        let raw = Raw::deserialize(d)?;
        ChainGeometry::new(raw.sites).map_err(serde::de::Error::custom)
    }
}

impl ChainGeometry {
    pub fn new(sites: Vec<Site>) -> Result<Self> {
        for (i, s) in sites.iter().enumerate() {
            if !s.position.is_finite() || !s.detuning_offset.is_finite() {
                return Err(invalid(format!("site {i} has a non-finite coordinate")));
            }
        }
        if let Some(i) = sites.windows(2).position(|w| w[1].position <= w[0].position) {
            return Err(invalid(format!(
                "positions must be strictly increasing (sites {} and {})",
                i,
                i + 1
            )));
        }
        Ok(Self { sites })
    }

    /// `n_m` mirror atoms at spacing `d_m`, the first at the origin.
    pub fn build_mirror_chain(n_m: usize, d_m: f64) -> Result<Self> {
        if n_m == 0 {
            return Err(invalid("a mirror needs at least one atom"));
        }
        check_spacing("d_m", d_m)?;
        Self::new((0..n_m).map(|j| Site::new(j as f64 * d_m, Role::Mirror)).collect())
    }

    /// Two mirrors of `n_m_per_side` atoms around an impurity at the origin.
    ///
    /// The nearest mirror atoms sit at ±`d_i`; site −j is the exact negative
    /// of site j.
    pub fn build_cavity_chain(n_m_per_side: usize, d_m: f64, d_i: f64) -> Result<Self> {
        if n_m_per_side == 0 {
            return Err(invalid("each mirror needs at least one atom"));
        }
        check_spacing("d_m", d_m)?;
        check_spacing("d_i", d_i)?;
        let right: Vec<f64> = (0..n_m_per_side).map(|j| d_i + j as f64 * d_m).collect();
        let mut sites = Vec::with_capacity(2 * n_m_per_side + 1);
        sites.extend(right.iter().rev().map(|&z| Site::new(-z, Role::Mirror)));
        sites.push(Site::new(0.0, Role::Impurity));
        sites.extend(right.iter().map(|&z| Site::new(z, Role::Mirror)));
        Self::new(sites)
    }

    /// Common cavity for two impurities `p` (at the origin) and `q`.
    ///
    /// `gap_sites` transparent atoms fill the region between the impurities
    /// on the λ_A/2 lattice. The impurity separation is rounded up to a whole
    /// number of wavelengths, `1 + ⌈gap_sites/2⌉`, so that both impurities sit
    /// at anti-nodes of the mode formed by the outer mirrors and couple to it
    /// with the same sign.
    pub fn build_two_impurity_chain(n_m_outer: usize, gap_sites: usize) -> Result<Self> {
        if n_m_outer == 0 {
            return Err(invalid("each outer mirror needs at least one atom"));
        }
        let separation = 1.0 + gap_sites.div_ceil(2) as f64;
        let outer: Vec<f64> =
            (0..n_m_outer).map(|j| IMPURITY_SPACING + j as f64 * MIRROR_SPACING).collect();

        let mut sites = Vec::with_capacity(2 * n_m_outer + gap_sites + 2);
        sites.extend(outer.iter().rev().map(|&z| Site::new(-z, Role::Mirror)));
        sites.push(Site::new(0.0, Role::Impurity));
        sites.extend(
            (0..gap_sites)
                .map(|m| Site::new(IMPURITY_SPACING + m as f64 * MIRROR_SPACING, Role::Transparent)),
        );
        sites.push(Site::new(separation, Role::Impurity));
        sites.extend(outer.iter().map(|&z| Site::new(separation + z, Role::Mirror)));
        Self::new(sites)
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    /// Indices of atoms that couple to the waveguide, in position order.
    pub fn active_indices(&self) -> Vec<usize> {
        self.sites
            .iter()
            .enumerate()
            .filter(|(_, s)| s.is_active())
            .map(|(i, _)| i)
            .collect()
    }

    pub fn active_sites(&self) -> impl Iterator<Item = &Site> {
        self.sites.iter().filter(|s| s.is_active())
    }

    pub fn count(&self, role: Role) -> usize {
        self.sites.iter().filter(|s| s.role == role).count()
    }

    /// Active-site indices (positions in the excitation vector) of impurities.
    pub fn impurity_slots(&self) -> Vec<usize> {
        self.active_sites()
            .enumerate()
            .filter(|(_, s)| s.role == Role::Impurity)
            .map(|(k, _)| k)
            .collect()
    }

    pub fn with_role(mut self, index: usize, role: Role) -> Result<Self> {
        let site = self
            .sites
            .get_mut(index)
            .ok_or_else(|| invalid(format!("site {index} out of range")))?;
        site.role = role;
        Ok(self)
    }

    pub fn with_detuning_offset(mut self, index: usize, offset: f64) -> Result<Self> {
        if !offset.is_finite() {
            return Err(invalid("detuning offset must be finite"));
        }
        let site = self
            .sites
            .get_mut(index)
            .ok_or_else(|| invalid(format!("site {index} out of range")))?;
        site.detuning_offset = offset;
        Ok(self)
    }

    /// Replace every impurity by a transparent atom.
    pub fn without_impurities(mut self) -> Self {
        for s in &mut self.sites {
            if s.role == Role::Impurity {
                s.role = Role::Transparent;
            }
        }
        self
    }

    /// Split the mirror atoms into the arms left and right of the cavity
    /// interior, the single run of non-mirror sites (impurities or
    /// transparent atoms) enclosed by mirrors. Each arm lists active-slot
    /// indices ordered outward, so entry `j-1` is the j-th neighbour.
    pub fn mirror_arms(&self) -> Result<(Vec<usize>, Vec<usize>)> {
        let sites = &self.sites;
        let first = sites.iter().position(|s| s.role == Role::Mirror);
        let last = sites.iter().rposition(|s| s.role == Role::Mirror);
        let (Some(first), Some(last)) = (first, last) else {
            return Err(Error::UnsupportedGeometry("no mirror atoms".into()));
        };
        let inner: Vec<usize> =
            (first..=last).filter(|&i| sites[i].role != Role::Mirror).collect();
        let (Some(&lo), Some(&hi)) = (inner.first(), inner.last()) else {
            return Err(Error::UnsupportedGeometry("mirror atoms enclose no cavity".into()));
        };
        if inner.len() != hi - lo + 1 {
            return Err(Error::UnsupportedGeometry(
                "mirror atoms inside the cavity region".into(),
            ));
        }
        let mut slot = 0;
        let (mut left, mut right) = (Vec::new(), Vec::new());
        for (i, s) in sites.iter().enumerate() {
            if !s.is_active() {
                continue;
            }
            if s.role == Role::Mirror {
                if i < lo {
                    left.push(slot);
                } else {
                    right.push(slot);
                }
            }
            slot += 1;
        }
        left.reverse();
        Ok((left, right))
    }
}

fn check_spacing(name: &str, d: f64) -> Result<()> {
    if d.is_finite() && d > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive, got {d}")))
    }
}

/// Parameters plus geometry, the unit exchanged as a JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSystem {
    #[serde(flatten)]
    pub params: PhysicalParams,
    #[serde(flatten)]
    pub geometry: ChainGeometry,
}

impl ChainSystem {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data always serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let sys: ChainSystem =
            serde_json::from_str(text).map_err(|e| invalid(format!("bad system document: {e}")))?;
        sys.params.validate()?;
        Ok(sys)
    }
}
