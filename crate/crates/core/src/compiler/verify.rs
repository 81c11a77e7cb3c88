use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::generator::Generator;
use super::sequence::{Element, PulseSequence};
use crate::error::{Error, Result};
use crate::spin::operator::dense_max_abs;
use crate::spin::{Propagator, Space, SpinOperator, SpinState, C64};

/// Largest Hilbert-space dimension for which dense unitaries are formed.
pub const MAX_UNITARY_DIM: usize = 20_000;

/// Eigenphases closer than this to `+-pi` make the logarithm ambiguous.
pub const BRANCH_MARGIN: f64 = 1e-6;

/// Dense unitaries of sequences on a fixed space. Spectral decompositions
/// are cached per generator and step unitaries per (generator, duration).
pub struct SequenceEvaluator {
    space: Space,
    propagators: HashMap<String, Propagator>,
    steps: HashMap<(String, u64), DMatrix<C64>>,
}

impl SequenceEvaluator {
    pub fn new(space: Space) -> Result<Self> {
        let dim = space.dim();
        if dim > MAX_UNITARY_DIM {
            return Err(Error::DimensionTooLarge {
                dim,
                limit: MAX_UNITARY_DIM,
            });
        }
        Ok(Self {
            space,
            propagators: HashMap::new(),
            steps: HashMap::new(),
        })
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    fn step_unitary(&mut self, g: &Generator, t: f64) -> Result<DMatrix<C64>> {
        let key = serde_json::to_string(g)?;
        if let Some(u) = self.steps.get(&(key.clone(), t.to_bits())) {
            return Ok(u.clone());
        }
        if !self.propagators.contains_key(&key) {
            let h = g.materialize(&self.space)?;
            self.propagators.insert(key.clone(), Propagator::new(&h)?);
        }
        let u = self.propagators[&key].unitary(t);
        self.steps.insert((key, t.to_bits()), u.clone());
        Ok(u)
    }

    fn elements_unitary(&mut self, elements: &[Element]) -> Result<DMatrix<C64>> {
        let mut u = DMatrix::identity(self.space.dim(), self.space.dim());
        for e in elements {
            let f = match e {
                Element::Step(s) => self.step_unitary(&s.generator, s.duration)?,
                Element::Repeat { count, body } => {
                    let b = self.elements_unitary(body)?;
                    matrix_power(&b, *count)
                }
            };
            u = f * u;
        }
        Ok(u)
    }

    /// Ordered product of step exponentials, last step leftmost.
    pub fn unitary(&mut self, seq: &PulseSequence) -> Result<DMatrix<C64>> {
        let needed = seq.num_modes();
        if needed > self.space.num_modes() {
            return Err(Error::UnknownMode {
                mode: needed - 1,
                modes: self.space.num_modes(),
            });
        }
        self.elements_unitary(seq.elements())
    }
}

fn matrix_power(m: &DMatrix<C64>, mut k: u64) -> DMatrix<C64> {
    let mut result = DMatrix::identity(m.nrows(), m.ncols());
    let mut base = m.clone();
    while k > 0 {
        if k & 1 == 1 {
            result = &result * &base;
        }
        k >>= 1;
        if k > 0 {
            base = &base * &base;
        }
    }
    result
}

pub fn sequence_to_unitary(seq: &PulseSequence, space: &Space) -> Result<DMatrix<C64>> {
    SequenceEvaluator::new(space.clone())?.unitary(seq)
}

/// `exp(-i H t)` as a dense matrix.
pub fn exact_unitary(h: &SpinOperator, t: f64) -> Result<DMatrix<C64>> {
    if h.dim() > MAX_UNITARY_DIM {
        return Err(Error::DimensionTooLarge {
            dim: h.dim(),
            limit: MAX_UNITARY_DIM,
        });
    }
    Ok(Propagator::new(h)?.unitary(t))
}

/// Max-norm of `U^dagger U - I`.
pub fn unitarity_deviation(u: &DMatrix<C64>) -> f64 {
    let d = u.nrows();
    dense_max_abs(&(u.ad_mul(u) - DMatrix::<C64>::identity(d, d)))
}

/// `min_phi |U - e^{i phi} V|_max` with `phi = arg tr(V^dagger U)`; compares
/// unitaries that may differ by a global phase.
pub fn phase_aligned_distance(u: &DMatrix<C64>, v: &DMatrix<C64>) -> f64 {
    let tr = v.ad_mul(u).trace();
    let phase = if tr.norm() > 0.0 {
        tr / tr.norm()
    } else {
        C64::new(1.0, 0.0)
    };
    dense_max_abs(&(u - v * phase))
}

/// Principal logarithm `H = (i/t) log U` through the complex Schur form,
/// which is diagonal for unitary input. Eigenphases are taken in
/// `(-pi, pi]`; a warning is logged when one sits within `BRANCH_MARGIN`
/// of the cut.
pub fn effective_generator(u: &DMatrix<C64>, space: &Space, t: f64) -> Result<SpinOperator> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter {
            name: "t",
            reason: format!("must be positive and finite, got {t}"),
        });
    }
    let d = space.dim();
    if u.nrows() != d || u.ncols() != d {
        return Err(Error::InvalidParameter {
            name: "u",
            reason: format!("shape {}x{} does not match space dimension {d}", u.nrows(), u.ncols()),
        });
    }
    let (q, tri) = u.clone().schur().unpack();
    let mut phases = DVector::<C64>::zeros(d);
    let mut worst: f64 = 0.0;
    for k in 0..d {
        let theta = tri[(k, k)].arg();
        worst = worst.max(theta.abs());
        phases[k] = C64::new(-theta / t, 0.0);
    }
    if worst > PI - BRANCH_MARGIN {
        log::warn!(
            "eigenphase {worst:.9} is within {BRANCH_MARGIN:e} of the branch cut; the effective generator is ambiguous"
        );
    }
    let h = &q * DMatrix::from_diagonal(&phases) * q.adjoint();
    let h = (&h + h.adjoint()) * C64::new(0.5, 0.0);
    SpinOperator::from_dense(space.clone(), &h, true)
}

/// `|<psi| U^dagger V |psi>|^2`.
pub fn state_fidelity(u: &DMatrix<C64>, v: &DMatrix<C64>, psi: &SpinState) -> f64 {
    let a = u * psi.vector();
    let b = v * psi.vector();
    a.dotc(&b).norm_sqr()
}

/// Fidelities of `U` against `V` on `count` random product states.
pub fn product_state_fidelities<R: Rng + ?Sized>(
    u: &DMatrix<C64>,
    v: &DMatrix<C64>,
    space: &Space,
    count: usize,
    rng: &mut R,
) -> Vec<f64> {
    (0..count)
        .map(|_| state_fidelity(u, v, &SpinState::random_product(space, rng)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::sequence::{SequenceMetadata, Step};
    use crate::spin::{build_collective_ops, evolve, SpinSystem};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn single(n: u64) -> Space {
        Space::single(SpinSystem::new(n).unwrap())
    }

    #[test]
    fn empty_sequence_is_identity() {
        let u = sequence_to_unitary(&PulseSequence::empty(), &single(5)).unwrap();
        assert_eq!(u, DMatrix::identity(6, 6));
    }

    #[test]
    fn single_step_matches_evolve() {
        let space = single(6);
        let g = Generator::word("0.3 Z^2 + 0.7 X".parse().unwrap());
        let u = sequence_to_unitary(&PulseSequence::single(g.clone(), 0.9).unwrap(), &space).unwrap();
        let h = g.materialize(&space).unwrap();
        for k in 0..space.dim() {
            let e = SpinState::basis(space.clone(), k).unwrap();
            let ev = evolve(&e, &h, 0.9).unwrap();
            let col = u.column(k).into_owned();
            assert!((col - ev.vector()).iter().all(|v| v.norm() < 1e-12));
        }
    }

    #[test]
    fn sequence_then_inverse_is_identity() {
        let space = single(12);
        let steps = vec![
            Step::new(Generator::twist(0, 0.7), 0.3),
            Step::new(Generator::linear(0, [0.2, -1.0, 0.4]), 0.8),
            Step::new(Generator::word("YZ+ZY".parse().unwrap()), 0.11),
        ];
        let s = PulseSequence::from_steps(steps, SequenceMetadata::default())
            .unwrap()
            .repeated(5);
        let both = s.concat(&s.inverse().unwrap());
        let u = sequence_to_unitary(&both, &space).unwrap();
        assert!(dense_max_abs(&(u - DMatrix::identity(13, 13))) < 1e-10);
    }

    #[test]
    fn repeat_matches_flat_product() {
        let space = single(4);
        let s = PulseSequence::from_steps(
            vec![
                Step::new(Generator::twist(0, 1.0), 0.2),
                Step::new(Generator::linear(0, [1.0, 0.0, 0.0]), 0.3),
            ],
            SequenceMetadata::default(),
        )
        .unwrap();
        let rep = sequence_to_unitary(&s.repeated(13), &space).unwrap();
        let flat = PulseSequence::from_steps(s.repeated(13).flatten().unwrap(), SequenceMetadata::default()).unwrap();
        let flat = sequence_to_unitary(&flat, &space).unwrap();
        assert!(dense_max_abs(&(rep.clone() - flat)) < 1e-12);
        assert!(unitarity_deviation(&rep) < 1e-12);
    }

    #[test]
    fn dimension_guard() {
        let s = SpinSystem::new(150).unwrap();
        let big = Space::pair(s, s);
        assert!(matches!(
            sequence_to_unitary(&PulseSequence::empty(), &big),
            Err(Error::DimensionTooLarge { .. })
        ));
    }

    #[test]
    fn effective_generator_recovers_twist() {
        let sys = SpinSystem::new(10).unwrap();
        let space = Space::single(sys);
        let z = build_collective_ops(sys).z;
        let z2 = &z * &z;
        let u = exact_unitary(&z2, 0.01).unwrap();
        let h = effective_generator(&u, &space, 0.01).unwrap();
        assert!(h.max_abs_diff(&z2).unwrap() < 1e-10);
        let id = DMatrix::identity(11, 11);
        assert_eq!(effective_generator(&id, &space, 1.0).unwrap().max_norm(), 0.0);
    }

    #[test]
    fn fidelity_of_identical_unitaries() {
        let sys = SpinSystem::new(3).unwrap();
        let space = Space::pair(sys, sys);
        let u = exact_unitary(&Generator::qnd(0, 1, 1.0).materialize(&space).unwrap(), 0.4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for f in product_state_fidelities(&u, &u, &space, 5, &mut rng) {
            assert!((f - 1.0).abs() < 1e-12);
        }
        let v = &u * C64::from_polar(1.0, 0.3);
        assert!(phase_aligned_distance(&u, &v) < 1e-12);
    }
}
