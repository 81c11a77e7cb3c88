use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::{CooMatrix, CsrMatrix};
use num_complex::Complex64;

use super::system::{Space, SpinSystem};
use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Relative tolerance of the Hermiticity check.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// A linear operator on a (tensor product of) Dicke space(s).
///
/// Storage is compressed sparse row: collective spin operators are banded
/// and their products stay sparse, which keeps two-mode spaces with a
/// hundred atoms per mode within reach of the Krylov propagator.
#[derive(Clone, Debug)]
pub struct SpinOperator {
    space: Space,
    matrix: CsrMatrix<C64>,
    hermitian: bool,
}

impl SpinOperator {
    /// Wraps a sparse matrix. When `hermitian` is set the matrix is checked.
    pub fn from_csr(space: Space, matrix: CsrMatrix<C64>, hermitian: bool) -> Result<Self> {
        let d = space.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::InvalidParameter {
                name: "matrix",
                reason: format!(
                    "shape {}x{} does not match space dimension {d}",
                    matrix.nrows(),
                    matrix.ncols()
                ),
            });
        }
        let op = Self {
            space,
            matrix,
            hermitian: false,
        };
        if hermitian {
            op.into_hermitian()
        } else {
            Ok(op)
        }
    }

    pub fn from_dense(space: Space, matrix: &DMatrix<C64>, hermitian: bool) -> Result<Self> {
        Self::from_csr(space, CsrMatrix::from(matrix), hermitian)
    }

    pub(crate) fn from_parts_unchecked(space: Space, matrix: CsrMatrix<C64>, hermitian: bool) -> Self {
        Self {
            space,
            matrix,
            hermitian,
        }
    }

    pub fn identity(space: Space) -> Self {
        let d = space.dim();
        Self::from_parts_unchecked(space, CsrMatrix::identity(d), true)
    }

    pub fn zero(space: Space) -> Self {
        let d = space.dim();
        Self::from_parts_unchecked(space, CsrMatrix::zeros(d, d), true)
    }

    /// Diagonal operator from its diagonal entries.
    pub fn diagonal(space: Space, diag: &[f64]) -> Result<Self> {
        let d = space.dim();
        if diag.len() != d {
            return Err(Error::InvalidParameter {
                name: "diagonal",
                reason: format!("expected {d} entries, got {}", diag.len()),
            });
        }
        let mut coo = CooMatrix::new(d, d);
        for (k, &v) in diag.iter().enumerate() {
            if v != 0.0 {
                coo.push(k, k, C64::new(v, 0.0));
            }
        }
        Ok(Self::from_parts_unchecked(space, CsrMatrix::from(&coo), true))
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn matrix(&self) -> &CsrMatrix<C64> {
        &self.matrix
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        DMatrix::from(&self.matrix)
    }

    /// Whether the operator carries the (verified) Hermitian flag.
    pub fn is_hermitian_flagged(&self) -> bool {
        self.hermitian
    }

    /// Largest entry of `A - A^dagger`.
    pub fn hermitian_deviation(&self) -> f64 {
        (&self.matrix - &adjoint_csr(&self.matrix))
            .values()
            .iter()
            .fold(0.0, |m, v| m.max(v.norm()))
    }

    /// Verifies Hermiticity (relative to the max-norm) and sets the flag.
    pub fn into_hermitian(mut self) -> Result<Self> {
        let dev = self.hermitian_deviation();
        if dev > HERMITIAN_TOL * self.max_norm().max(1.0) {
            return Err(Error::NotHermitian { deviation: dev });
        }
        self.hermitian = true;
        Ok(self)
    }

    /// Returns an error unless the operator is flagged Hermitian or passes
    /// the numerical check.
    pub fn ensure_hermitian(&self) -> Result<()> {
        if self.hermitian {
            return Ok(());
        }
        let dev = self.hermitian_deviation();
        if dev > HERMITIAN_TOL * self.max_norm().max(1.0) {
            Err(Error::NotHermitian { deviation: dev })
        } else {
            Ok(())
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_parts_unchecked(self.space.clone(), adjoint_csr(&self.matrix), self.hermitian)
    }

    pub fn scale(&self, factor: C64) -> Self {
        let keeps = self.hermitian && factor.im == 0.0;
        Self::from_parts_unchecked(self.space.clone(), &self.matrix * factor, keeps)
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(C64::new(factor, 0.0))
    }

    /// `A B - B A`.
    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    /// `A B + B A`.
    pub fn anticommutator(&self, other: &Self) -> Self {
        &(self * other) + &(other * self)
    }

    /// Largest absolute entry.
    pub fn max_norm(&self) -> f64 {
        self.matrix.values().iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// Max-norm of the difference; errors when the spaces differ.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.space.ensure_same(&other.space)?;
        Ok((self - other).max_norm())
    }

    pub fn apply(&self, v: &DVector<C64>) -> DVector<C64> {
        &self.matrix * v
    }

    /// `<v|A|v>` for a normalised vector.
    pub fn expectation(&self, v: &DVector<C64>) -> C64 {
        v.dotc(&self.apply(v))
    }

    /// Kronecker product `self (x) other` on the concatenated space.
    pub fn kron(&self, other: &Self) -> Self {
        let mut modes = self.space.modes().to_vec();
        modes.extend_from_slice(other.space.modes());
        let space = Space::new(modes).expect("non-empty");
        Self::from_parts_unchecked(
            space,
            kron_csr(&self.matrix, &other.matrix),
            self.hermitian && other.hermitian,
        )
    }

    fn check_same(&self, other: &Self) {
        if self.space != other.space {
            panic!(
                "operator space mismatch: {} vs {}",
                self.space, other.space
            );
        }
    }
}

/// Largest entry modulus of a dense complex matrix.
pub fn dense_max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0, |a, v| a.max(v.norm()))
}

pub(crate) fn adjoint_csr(m: &CsrMatrix<C64>) -> CsrMatrix<C64> {
    let mut t = m.transpose();
    for v in t.values_mut() {
        *v = v.conj();
    }
    t
}

pub(crate) fn kron_csr(a: &CsrMatrix<C64>, b: &CsrMatrix<C64>) -> CsrMatrix<C64> {
    let (br, bc) = (b.nrows(), b.ncols());
    let mut coo = CooMatrix::new(a.nrows() * br, a.ncols() * bc);
    for (i, j, va) in a.triplet_iter() {
        for (k, l, vb) in b.triplet_iter() {
            coo.push(i * br + k, j * bc + l, va * vb);
        }
    }
    CsrMatrix::from(&coo)
}

/// Identity on a single mode.
pub fn mode_identity(system: SpinSystem) -> SpinOperator {
    SpinOperator::identity(Space::single(system))
}

/// Places a single-mode operator on `mode` of a multi-mode space:
/// `I (x) ... (x) op (x) ... (x) I`.
pub fn embed(op: &SpinOperator, mode: usize, space: &Space) -> Result<SpinOperator> {
    if !op.space().is_single() {
        return Err(Error::InvalidParameter {
            name: "op",
            reason: "only single-mode operators can be embedded".into(),
        });
    }
    let target = space.mode(mode)?;
    let own = op.space().modes()[0];
    if own != target {
        return Err(Error::SpaceMismatch {
            left: own.to_string(),
            right: target.to_string(),
        });
    }
    let mut acc: Option<SpinOperator> = None;
    for (k, &sys) in space.modes().iter().enumerate() {
        let factor = if k == mode {
            op.clone()
        } else {
            mode_identity(sys)
        };
        acc = Some(match acc {
            None => factor,
            Some(a) => a.kron(&factor),
        });
    }
    Ok(acc.expect("space has at least one mode"))
}

impl<'a> Add<&'a SpinOperator> for &'a SpinOperator {
    type Output = SpinOperator;

    fn add(self, rhs: &'a SpinOperator) -> SpinOperator {
        self.check_same(rhs);
        SpinOperator::from_parts_unchecked(
            self.space.clone(),
            &self.matrix + &rhs.matrix,
            self.hermitian && rhs.hermitian,
        )
    }
}

impl<'a> Sub<&'a SpinOperator> for &'a SpinOperator {
    type Output = SpinOperator;

    fn sub(self, rhs: &'a SpinOperator) -> SpinOperator {
        self.check_same(rhs);
        SpinOperator::from_parts_unchecked(
            self.space.clone(),
            &self.matrix - &rhs.matrix,
            self.hermitian && rhs.hermitian,
        )
    }
}

impl<'a> Mul<&'a SpinOperator> for &'a SpinOperator {
    type Output = SpinOperator;

    fn mul(self, rhs: &'a SpinOperator) -> SpinOperator {
        self.check_same(rhs);
        SpinOperator::from_parts_unchecked(self.space.clone(), &self.matrix * &rhs.matrix, false)
    }
}

impl Mul<f64> for &SpinOperator {
    type Output = SpinOperator;

    fn mul(self, rhs: f64) -> SpinOperator {
        self.scale_real(rhs)
    }
}

impl Mul<C64> for &SpinOperator {
    type Output = SpinOperator;

    fn mul(self, rhs: C64) -> SpinOperator {
        self.scale(rhs)
    }
}

impl Neg for &SpinOperator {
    type Output = SpinOperator;

    fn neg(self) -> SpinOperator {
        self.scale_real(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(n: u64) -> SpinSystem {
        SpinSystem::new(n).unwrap()
    }

    #[test]
    fn shape_checked() {
        let m = CsrMatrix::<C64>::identity(3);
        assert!(SpinOperator::from_csr(Space::single(sys(1)), m, false).is_err());
    }

    #[test]
    fn non_hermitian_flag_rejected() {
        let mut coo = CooMatrix::new(2, 2);
        coo.push(0, 1, C64::new(1.0, 0.0));
        let m = CsrMatrix::from(&coo);
        let err = SpinOperator::from_csr(Space::single(sys(1)), m, true).unwrap_err();
        assert!(matches!(err, Error::NotHermitian { .. }));
    }

    #[test]
    fn embedded_identity_is_identity() {
        let space = Space::pair(sys(3), sys(2));
        let e = embed(&mode_identity(sys(3)), 0, &space).unwrap();
        assert_eq!(e.max_abs_diff(&SpinOperator::identity(space)).unwrap(), 0.0);
    }

    #[test]
    fn embed_rejects_wrong_mode_system() {
        let space = Space::pair(sys(3), sys(2));
        assert!(embed(&mode_identity(sys(2)), 0, &space).is_err());
        assert!(embed(&mode_identity(sys(2)), 2, &space).is_err());
    }
}
