use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A collective spin of `N` two-level atoms restricted to the symmetric
/// (Dicke) subspace: spin quantum number `j = N/2`, dimension `N + 1`.
///
/// Basis states are ordered by ascending `m`, so index `0` is `m = -j`
/// (all atoms in `g2`) and index `N` is `m = +j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct SpinSystem {
    atoms: u64,
}

impl SpinSystem {
    pub fn new(atoms: u64) -> Result<Self> {
        if atoms == 0 {
            return Err(Error::InvalidAtomCount(atoms));
        }
        Ok(Self { atoms })
    }

    pub fn atoms(&self) -> u64 {
        self.atoms
    }

    pub fn j(&self) -> f64 {
        self.atoms as f64 / 2.0
    }

    pub fn dim(&self) -> usize {
        self.atoms as usize + 1
    }

    /// Magnetic quantum number of basis index `k`.
    pub fn m(&self, k: usize) -> f64 {
        k as f64 - self.j()
    }
}

impl TryFrom<u64> for SpinSystem {
    type Error = Error;

    fn try_from(atoms: u64) -> Result<Self> {
        Self::new(atoms)
    }
}

impl From<SpinSystem> for u64 {
    fn from(s: SpinSystem) -> u64 {
        s.atoms
    }
}

impl fmt::Display for SpinSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "N={}", self.atoms)
    }
}

/// Tensor product of one or more collective spins. Mode 0 is the most
/// significant factor of the product basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Space {
    modes: Vec<SpinSystem>,
}

impl Space {
    pub fn single(system: SpinSystem) -> Self {
        Self {
            modes: vec![system],
        }
    }

    pub fn pair(first: SpinSystem, second: SpinSystem) -> Self {
        Self {
            modes: vec![first, second],
        }
    }

    pub fn new(modes: Vec<SpinSystem>) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::InvalidParameter {
                name: "modes",
                reason: "a space needs at least one mode".into(),
            });
        }
        Ok(Self { modes })
    }

    /// Convenience constructor from atom counts.
    pub fn from_atoms(atoms: &[u64]) -> Result<Self> {
        let modes = atoms
            .iter()
            .map(|&n| SpinSystem::new(n))
            .collect::<Result<Vec<_>>>()?;
        Self::new(modes)
    }

    pub fn modes(&self) -> &[SpinSystem] {
        &self.modes
    }

    pub fn num_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn mode(&self, index: usize) -> Result<SpinSystem> {
        self.modes.get(index).copied().ok_or(Error::UnknownMode {
            mode: index,
            modes: self.modes.len(),
        })
    }

    pub fn dim(&self) -> usize {
        self.modes.iter().map(SpinSystem::dim).product()
    }

    pub fn is_single(&self) -> bool {
        self.modes.len() == 1
    }

    pub(crate) fn ensure_same(&self, other: &Space) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::SpaceMismatch {
                left: self.to_string(),
                right: other.to_string(),
            })
        }
    }
}

impl From<SpinSystem> for Space {
    fn from(s: SpinSystem) -> Self {
        Space::single(s)
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, m) in self.modes.iter().enumerate() {
            if i > 0 {
                f.write_str(" x ")?;
            }
            write!(f, "{m}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_atoms_rejected() {
        assert!(matches!(SpinSystem::new(0), Err(Error::InvalidAtomCount(0))));
    }

    #[test]
    fn labels_run_from_minus_j() {
        let s = SpinSystem::new(3).unwrap();
        assert_eq!(s.dim(), 4);
        assert_eq!(s.m(0), -1.5);
        assert_eq!(s.m(3), 1.5);
    }

    #[test]
    fn pair_dimension() {
        let p = Space::from_atoms(&[4, 6]).unwrap();
        assert_eq!(p.dim(), 35);
        assert!(p.mode(2).is_err());
    }
}
