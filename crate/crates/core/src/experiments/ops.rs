use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::spin::{build_collective_ops, casimir_check, su2_deviation, SpinSystem};

/// Tolerance on the algebra checks.
pub const OPS_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OpsReport {
    pub atoms: u64,
    pub dim: usize,
    /// Largest of `[X,Y]-iZ` and its cyclic versions, max-norm.
    pub commutator_deviation: f64,
    /// Max-norm of `X^2+Y^2+Z^2 - j(j+1)`.
    pub casimir_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn run_ops_check(atoms: u64) -> Result<OpsReport> {
    let sys = SpinSystem::new(atoms)?;
    let ops = build_collective_ops(sys);
    let commutator_deviation = su2_deviation(&ops);
    let casimir_deviation = casimir_check(&ops.x, &ops.y, &ops.z)?;
    Ok(OpsReport {
        atoms,
        dim: sys.dim(),
        commutator_deviation,
        casimir_deviation,
        tolerance: OPS_TOLERANCE,
        pass: commutator_deviation < OPS_TOLERANCE && casimir_deviation < OPS_TOLERANCE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_systems_pass() {
        for n in [1, 2, 9] {
            let r = run_ops_check(n).unwrap();
            assert!(r.pass, "{r:?}");
            assert_eq!(r.dim, n as usize + 1);
        }
        assert!(run_ops_check(0).is_err());
    }
}
