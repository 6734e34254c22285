//! Bipartitions of the ring and their symmetry classification.

use serde::{Deserialize, Serialize};

use crate::sector::dihedral_elements;
use crate::{Error, Result};

/// Subsystem A of a bipartition, as a site mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bipartition {
    pub site_mask: u32,
    pub n_atoms: usize,
}

/// Symmetry flags of a bipartition under D_N.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymmetryFlags {
    /// Some group element maps A onto B.
    pub exchange: bool,
    /// Some non-identity element maps A onto itself.
    pub internal: bool,
}

/// Reporting label; exchange takes precedence over internal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SymmetryClass {
    NoSymmetry,
    ExchangeSymmetry,
    InternalSymmetry,
}

impl SymmetryFlags {
    pub fn class(&self) -> SymmetryClass {
        if self.exchange {
            SymmetryClass::ExchangeSymmetry
        } else if self.internal {
            SymmetryClass::InternalSymmetry
        } else {
            SymmetryClass::NoSymmetry
        }
    }
}

impl Bipartition {
    pub fn new(site_mask: u32, n_atoms: usize) -> Result<Self> {
        let all = (1u32 << n_atoms) - 1;
        if site_mask == 0 || site_mask & all != site_mask || site_mask == all {
            return Err(Error::InvalidBipartition);
        }
        Ok(Self { site_mask, n_atoms })
    }

    /// A-sites in ascending order.
    pub fn a_sites(&self) -> Vec<usize> {
        (0..self.n_atoms)
            .filter(|&s| self.site_mask >> s & 1 == 1)
            .collect()
    }

    /// B-sites in ascending order.
    pub fn b_sites(&self) -> Vec<usize> {
        (0..self.n_atoms)
            .filter(|&s| self.site_mask >> s & 1 == 0)
            .collect()
    }

    pub fn size_a(&self) -> usize {
        self.site_mask.count_ones() as usize
    }

    pub fn size_b(&self) -> usize {
        self.n_atoms - self.size_a()
    }
}

fn image_mask(perm: &[usize], mask: u32) -> u32 {
    let mut out = 0u32;
    for (s, &img) in perm.iter().enumerate() {
        if mask >> s & 1 == 1 {
            out |= 1 << img;
        }
    }
    out
}

/// Exhaustive check over the 2N elements of D_N.
pub fn classify_bipartition(part: &Bipartition) -> SymmetryFlags {
    let elems = dihedral_elements(part.n_atoms);
    let a = part.site_mask;
    let b = ((1u32 << part.n_atoms) - 1) ^ a;
    let mut exchange = false;
    let mut internal = false;
    for (i, perm) in elems.iter().enumerate() {
        let img = image_mask(perm, a);
        if img == b {
            exchange = true;
        }
        if i != 0 && img == a {
            internal = true;
        }
    }
    SymmetryFlags { exchange, internal }
}

/// First element of D_N that maps A onto B, preferring involutions (needed to
/// align indices for the symmetric-coefficient check).
pub fn exchange_element(part: &Bipartition) -> Option<Vec<usize>> {
    let elems = dihedral_elements(part.n_atoms);
    let a = part.site_mask;
    let b = ((1u32 << part.n_atoms) - 1) ^ a;
    let mut fallback = None;
    for perm in &elems {
        if image_mask(perm, a) != b {
            continue;
        }
        let involutive = (0..part.n_atoms).all(|s| perm[perm[s]] == s);
        if involutive {
            return Some(perm.clone());
        }
        fallback.get_or_insert_with(|| perm.clone());
    }
    fallback
}

/// Deterministic search for the lexicographically first floor(N/2)-subset with
/// no exchange and no internal symmetry.
///
/// Panics if none exists. On a ring this actually happens at N = 5 (every
/// 2-subset is preserved by the reflection swapping its two sites) and at
/// N = 6 and 8; exhaustive search shows all other N up to 12 qualify.
pub fn find_asymmetric_bipartition(n_atoms: usize) -> Bipartition {
    try_find_asymmetric_bipartition(n_atoms)
        .expect("no asymmetric bipartition exists for this ring size")
}

/// Non-panicking variant; `None` at N < 5 and at N = 5, 6, 8.
pub fn try_find_asymmetric_bipartition(n_atoms: usize) -> Option<Bipartition> {
    if n_atoms < 5 {
        return None;
    }
    let k = n_atoms / 2;
    let mut sites: Vec<usize> = (0..k).collect();
    loop {
        let mask = sites.iter().fold(0u32, |m, &s| m | (1 << s));
        let part = Bipartition::new(mask, n_atoms).unwrap();
        let flags = classify_bipartition(&part);
        if !flags.exchange && !flags.internal {
            return Some(part);
        }
        // next k-combination of {0..N-1} in lexicographic order
        let mut i = k;
        loop {
            if i == 0 {
                return None;
            }
            i -= 1;
            if sites[i] != i + n_atoms - k {
                break;
            }
        }
        sites[i] += 1;
        for j in i + 1..k {
            sites[j] = sites[j - 1] + 1;
        }
    }
}
