use super::collective::build_collective_ops;
use super::operator::{SpinOperator, C64};
use super::state::SpinState;
use super::system::SpinSystem;
use crate::error::Result;

/// Scaled quadratures `q = sqrt(2/N) Z`, `p = sqrt(2/N) X`.
///
/// Near the `+Y` pole `[q, p] = i (2/N) Y` approaches `i`, so the pair
/// behaves as a canonical position/momentum pair.
#[derive(Clone, Debug)]
pub struct QuasiCv {
    system: SpinSystem,
    pub q: SpinOperator,
    pub p: SpinOperator,
    y: SpinOperator,
}

impl QuasiCv {
    pub fn new(system: SpinSystem) -> Self {
        let ops = build_collective_ops(system);
        let s = (2.0 / system.atoms() as f64).sqrt();
        Self {
            system,
            q: ops.z.scale_real(s),
            p: ops.x.scale_real(s),
            y: ops.y,
        }
    }

    pub fn system(&self) -> SpinSystem {
        self.system
    }

    /// Max-norm of `[q, p] - i (2/N) Y`.
    pub fn commutator_identity_deviation(&self) -> f64 {
        let n = self.system.atoms() as f64;
        let rhs = self.y.scale(C64::new(0.0, 2.0 / n));
        (&self.q.commutator(&self.p) - &rhs).max_norm()
    }

    /// `<psi|[q, p]|psi>`.
    pub fn commutator_expectation(&self, psi: &SpinState) -> Result<C64> {
        psi.expectation(&self.q.commutator(&self.p))
    }
}

/// Coherent state polarised along `+Y`.
pub fn y_polarized(system: SpinSystem) -> SpinState {
    SpinState::coherent(system, std::f64::consts::FRAC_PI_2, -std::f64::consts::FRAC_PI_2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn commutator_identity_exact() {
        for n in [1, 2, 17, 100] {
            let cv = QuasiCv::new(SpinSystem::new(n).unwrap());
            assert!(cv.commutator_identity_deviation() < 1e-13);
        }
    }

    #[test]
    fn canonical_near_y_pole() {
        for n in [10u64, 100, 400] {
            let sys = SpinSystem::new(n).unwrap();
            let cv = QuasiCv::new(sys);
            let c = cv.commutator_expectation(&y_polarized(sys)).unwrap();
            assert!(c.re.abs() < 1e-12);
            assert!((c.im - 1.0).abs() <= 3.0 / (n as f64).sqrt());
        }
    }
}
