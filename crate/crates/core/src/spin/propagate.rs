use nalgebra::{DMatrix, DVector, SymmetricEigen};
use nalgebra_sparse::CsrMatrix;

use super::operator::{SpinOperator, C64};
use super::state::SpinState;
use super::system::Space;
use crate::error::Result;

/// Largest dimension handled by dense eigendecomposition.
pub const EIGEN_DIM_LIMIT: usize = 4096;

const KRYLOV_DIM: usize = 30;
const KRYLOV_TOL: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Backend {
    Eigen,
    Krylov,
}

#[derive(Clone, Debug)]
enum Inner {
    Eigen {
        values: DVector<f64>,
        vectors: DMatrix<C64>,
    },
    Krylov {
        h: CsrMatrix<C64>,
        norm_bound: f64,
    },
}

/// Time evolution `exp(-i H t)` for a fixed Hermitian `H`.
///
/// The eigen backend diagonalises once and is reused for every `t`.
#[derive(Clone, Debug)]
pub struct Propagator {
    space: Space,
    inner: Inner,
}

impl Propagator {
    /// Chooses the backend from the dimension.
    pub fn new(h: &SpinOperator) -> Result<Self> {
        let backend = if h.dim() <= EIGEN_DIM_LIMIT {
            Backend::Eigen
        } else {
            Backend::Krylov
        };
        Self::with_backend(h, backend)
    }

    pub fn with_backend(h: &SpinOperator, backend: Backend) -> Result<Self> {
        h.ensure_hermitian()?;
        let inner = match backend {
            Backend::Eigen => {
                let eig = SymmetricEigen::new(h.to_dense());
                Inner::Eigen {
                    values: eig.eigenvalues,
                    vectors: eig.eigenvectors,
                }
            }
            Backend::Krylov => {
                let m = h.matrix();
                let mut bound: f64 = 0.0;
                for row in m.row_iter() {
                    bound = bound.max(row.values().iter().map(|v| v.norm()).sum());
                }
                Inner::Krylov {
                    h: m.clone(),
                    norm_bound: bound,
                }
            }
        };
        Ok(Self {
            space: h.space().clone(),
            inner,
        })
    }

    pub fn backend(&self) -> Backend {
        match self.inner {
            Inner::Eigen { .. } => Backend::Eigen,
            Inner::Krylov { .. } => Backend::Krylov,
        }
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    /// Spectrum of `H` (eigen backend only).
    pub fn eigenvalues(&self) -> Option<&DVector<f64>> {
        match &self.inner {
            Inner::Eigen { values, .. } => Some(values),
            Inner::Krylov { .. } => None,
        }
    }

    pub fn apply(&self, state: &SpinState, t: f64) -> Result<SpinState> {
        self.space.ensure_same(state.space())?;
        Ok(SpinState::from_parts_unchecked(
            self.space.clone(),
            self.apply_vector(state.vector(), t),
        ))
    }

    pub fn apply_vector(&self, v: &DVector<C64>, t: f64) -> DVector<C64> {
        match &self.inner {
            Inner::Eigen { values, vectors } => {
                let mut c = vectors.ad_mul(v);
                for (ck, &l) in c.iter_mut().zip(values.iter()) {
                    *ck *= C64::from_polar(1.0, -l * t);
                }
                vectors * c
            }
            Inner::Krylov { h, norm_bound } => krylov_expmv(h, *norm_bound, v, t),
        }
    }

    /// Dense `exp(-i H t)`.
    pub fn unitary(&self, t: f64) -> DMatrix<C64> {
        match &self.inner {
            Inner::Eigen { values, vectors } => {
                let ph = values.map(|l| C64::from_polar(1.0, -l * t));
                let mut scaled = vectors.clone();
                for (j, p) in ph.iter().enumerate() {
                    for x in scaled.column_mut(j).iter_mut() {
                        *x *= p;
                    }
                }
                scaled * vectors.adjoint()
            }
            Inner::Krylov { .. } => {
                let d = self.space.dim();
                let mut u = DMatrix::zeros(d, d);
                for j in 0..d {
                    let mut e = DVector::zeros(d);
                    e[j] = C64::new(1.0, 0.0);
                    u.set_column(j, &self.apply_vector(&e, t));
                }
                u
            }
        }
    }
}

/// `exp(-i H t) state`, choosing the backend from the dimension.
pub fn evolve(state: &SpinState, h: &SpinOperator, t: f64) -> Result<SpinState> {
    Propagator::new(h)?.apply(state, t)
}

/// Lanczos approximation of `exp(-i H t) v` with full reorthogonalisation and
/// adaptive substeps. The local error estimate is
/// `beta_m |e_m^T exp(-i T tau) e_1|` scaled by `|v|`.
fn krylov_expmv(h: &CsrMatrix<C64>, norm_bound: f64, v: &DVector<C64>, t: f64) -> DVector<C64> {
    let mut w = v.clone();
    if t == 0.0 || norm_bound == 0.0 {
        return w;
    }
    let total = t.abs();
    let sign = t.signum();
    let mut done = 0.0;
    let mut tau = total.min(0.5 * KRYLOV_DIM as f64 / norm_bound);
    while done < total {
        tau = tau.min(total - done);
        let beta0 = w.norm();
        if beta0 == 0.0 {
            return w;
        }
        let (basis, alpha, beta, breakdown) = lanczos(h, &w.unscale(beta0));
        let k = alpha.len();
        loop {
            let (coef, tail) = small_exp(&alpha, &beta[..k - 1], sign * tau);
            let err = if breakdown {
                0.0
            } else {
                beta[k - 1] * tail * beta0
            };
            // the estimate cannot resolve below roundoff in the small exponential
            let floor = 64.0 * f64::EPSILON * beta[k - 1] * beta0;
            let tol = (KRYLOV_TOL * beta0 * tau / total).max(floor);
            if err <= tol || tau < 1e-9 * total {
                let mut next = DVector::zeros(w.len());
                for (j, c) in coef.iter().enumerate() {
                    next.axpy(*c * beta0, &basis[j], C64::new(1.0, 0.0));
                }
                w = next;
                done += tau;
                if err < 0.1 * tol {
                    tau *= 1.5;
                }
                break;
            }
            tau *= 0.5;
        }
    }
    w
}

type LanczosOut = (Vec<DVector<C64>>, Vec<f64>, Vec<f64>, bool);

fn lanczos(h: &CsrMatrix<C64>, v0: &DVector<C64>) -> LanczosOut {
    let mut basis = vec![v0.clone()];
    let mut alpha = Vec::with_capacity(KRYLOV_DIM);
    let mut beta = Vec::with_capacity(KRYLOV_DIM);
    let dim = v0.len();
    for j in 0..KRYLOV_DIM.min(dim) {
        let mut w = h * &basis[j];
        let a = basis[j].dotc(&w).re;
        alpha.push(a);
        // two passes of Gram-Schmidt against the whole basis
        for _ in 0..2 {
            for b in &basis {
                let c = b.dotc(&w);
                w.axpy(-c, b, C64::new(1.0, 0.0));
            }
        }
        let bn = w.norm();
        beta.push(bn);
        if bn < 1e-12 * (a.abs() + 1.0) {
            return (basis, alpha, beta, true);
        }
        if j + 1 < KRYLOV_DIM.min(dim) {
            basis.push(w.unscale(bn));
        }
    }
    let breakdown = alpha.len() == dim;
    (basis, alpha, beta, breakdown)
}

/// `exp(-i T s) e_1` for the real tridiagonal `T`; returns the vector and
/// the modulus of its last entry.
fn small_exp(alpha: &[f64], beta: &[f64], s: f64) -> (Vec<C64>, f64) {
    let k = alpha.len();
    let t = DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            alpha[i]
        } else if i == j + 1 {
            beta[j]
        } else if j == i + 1 {
            beta[i]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(t);
    let q = &eig.eigenvectors;
    let out: Vec<C64> = (0..k)
        .map(|i| {
            (0..k)
                .map(|l| C64::from_polar(q[(i, l)] * q[(0, l)], -eig.eigenvalues[l] * s))
                .sum()
        })
        .collect();
    let tail = out[k - 1].norm();
    (out, tail)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::collective::{build_collective_ops, mode_ops};
    use crate::spin::operator::dense_max_abs;
    use crate::spin::system::SpinSystem;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn sys(n: u64) -> SpinSystem {
        SpinSystem::new(n).unwrap()
    }

    #[test]
    fn diagonal_generator_phases() {
        let s = sys(6);
        let z = build_collective_ops(s).z;
        for k in 0..7 {
            let b = SpinState::basis(Space::single(s), k).unwrap();
            let out = evolve(&b, &z, 0.37).unwrap();
            let want = C64::from_polar(1.0, -s.m(k) * 0.37);
            assert!((out.vector()[k] - want).norm() < 1e-14);
        }
    }

    #[test]
    fn y_quarter_turn_is_coherent_state() {
        let s = sys(12);
        let y = build_collective_ops(s).y;
        let b = SpinState::dicke(s, -6.0).unwrap();
        let out = evolve(&b, &y, PI / 2.0).unwrap();
        let c = SpinState::coherent(s, PI / 2.0, 0.0);
        assert!((out.inner(&c).unwrap() - C64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn non_hermitian_rejected() {
        let s = sys(3);
        let o = build_collective_ops(s);
        let bad = &o.x * &o.y;
        assert!(evolve(&SpinState::coherent(s, 0.0, 0.0), &bad, 1.0).is_err());
    }

    #[test]
    fn krylov_matches_eigen() {
        let s = sys(12);
        let space = Space::pair(s, s);
        let a = mode_ops(&space, 0).unwrap();
        let b = mode_ops(&space, 1).unwrap();
        let h = &(&(&a.z * &a.z) + &(&a.x * &b.z)) + &b.y.scale_real(0.7);
        let h = h.into_hermitian().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let psi = SpinState::random(space, &mut rng);
        let e = Propagator::with_backend(&h, Backend::Eigen).unwrap();
        let k = Propagator::with_backend(&h, Backend::Krylov).unwrap();
        for t in [0.0, 0.01, 1.0, -2.5, 10.0] {
            let u = e.apply(&psi, t).unwrap();
            let v = k.apply(&psi, t).unwrap();
            assert!((u.vector() - v.vector()).norm() < 1e-10, "t = {t}");
            assert!((v.norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn unitary_is_unitary() {
        let s = sys(8);
        let o = build_collective_ops(s);
        let h = (&(&o.z * &o.z) + &o.x).into_hermitian().unwrap();
        let u = Propagator::new(&h).unwrap().unitary(3.0);
        let dev = dense_max_abs(&(&u * u.adjoint() - DMatrix::<C64>::identity(9, 9)));
        assert!(dev < 1e-12);
    }
}
