use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use super::collective::build_collective_ops;
use super::operator::{SpinOperator, C64};
use super::system::{Space, SpinSystem};
use crate::error::{Error, Result};

/// Tolerance on the Euclidean norm of a state.
pub const NORM_TOL: f64 = 1e-10;

/// A normalised pure state on a (tensor product of) Dicke space(s).
#[derive(Clone, Debug, PartialEq)]
pub struct SpinState {
    space: Space,
    vector: DVector<C64>,
}

impl SpinState {
    /// Wraps a vector; rejects wrong length or norm off by more than `NORM_TOL`.
    pub fn new(space: Space, vector: DVector<C64>) -> Result<Self> {
        if vector.len() != space.dim() {
            return Err(Error::InvalidParameter {
                name: "vector",
                reason: format!("length {} does not match dimension {}", vector.len(), space.dim()),
            });
        }
        let n = vector.norm();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidParameter {
                name: "vector",
                reason: format!("norm {n} is not 1"),
            });
        }
        Ok(Self { space, vector })
    }

    /// Wraps a vector after rescaling it to unit norm.
    pub fn normalized(space: Space, vector: DVector<C64>) -> Result<Self> {
        let n = vector.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "vector",
                reason: "cannot normalise a zero or non-finite vector".into(),
            });
        }
        Self::new(space, vector.unscale(n))
    }

    pub(crate) fn from_parts_unchecked(space: Space, vector: DVector<C64>) -> Self {
        Self { space, vector }
    }

    /// Product-basis state with flat index `index`.
    pub fn basis(space: Space, index: usize) -> Result<Self> {
        let d = space.dim();
        if index >= d {
            return Err(Error::InvalidParameter {
                name: "index",
                reason: format!("{index} out of range for dimension {d}"),
            });
        }
        let mut v = DVector::zeros(d);
        v[index] = C64::new(1.0, 0.0);
        Ok(Self { space, vector: v })
    }

    /// Dicke state with `Z` eigenvalue `m` (must be one of `-j..=j`).
    pub fn dicke(system: SpinSystem, m: f64) -> Result<Self> {
        let k = m + system.j();
        if k < 0.0 || k > system.atoms() as f64 || k.fract() != 0.0 {
            return Err(Error::InvalidParameter {
                name: "m",
                reason: format!("{m} is not an eigenvalue of Z for {system}"),
            });
        }
        Self::basis(Space::single(system), k as usize)
    }

    /// `exp(-i Z phi) exp(-i Y theta) |m=-j>`.
    pub fn coherent(system: SpinSystem, theta: f64, phi: f64) -> Self {
        let n = system.atoms() as usize;
        let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        let (lc, ls) = (c.abs().ln(), s.abs().ln());
        let mut ln_fact = vec![0.0; n + 1];
        for k in 1..=n {
            ln_fact[k] = ln_fact[k - 1] + (k as f64).ln();
        }
        let v = DVector::from_fn(n + 1, |k, _| {
            let up = k as f64;
            let down = (n - k) as f64;
            let mut ln = 0.5 * (ln_fact[n] - ln_fact[k] - ln_fact[n - k]);
            if down > 0.0 {
                ln += down * lc;
            }
            if up > 0.0 {
                ln += up * ls;
            }
            // amplitude is cos^(N-k) (-sin)^k
            let sign_c = if c < 0.0 && (n - k) % 2 == 1 { -1.0 } else { 1.0 };
            let sign_s = if s > 0.0 && k % 2 == 1 { -1.0 } else { 1.0 };
            let amp = sign_c * sign_s * ln.exp();
            C64::from_polar(amp, -system.m(k) * phi)
        });
        let norm = v.norm();
        Self {
            space: Space::single(system),
            vector: v.unscale(norm),
        }
    }

    /// Tensor product of single- or multi-mode states, in order.
    pub fn product(parts: &[SpinState]) -> Result<Self> {
        let first = parts.first().ok_or(Error::InvalidParameter {
            name: "parts",
            reason: "empty product".into(),
        })?;
        let mut modes = first.space.modes().to_vec();
        let mut v = first.vector.clone();
        for p in &parts[1..] {
            modes.extend_from_slice(p.space.modes());
            v = v.kronecker(&p.vector);
        }
        Ok(Self {
            space: Space::new(modes)?,
            vector: v,
        })
    }

    /// Haar-random state (normalised complex Gaussian vector).
    pub fn random<R: Rng + ?Sized>(space: Space, rng: &mut R) -> Self {
        let v = DVector::from_fn(space.dim(), |_, _| {
            C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let n = v.norm();
        Self {
            space,
            vector: v.unscale(n),
        }
    }

    /// Product of independent Haar-random states, one per mode.
    pub fn random_product<R: Rng + ?Sized>(space: &Space, rng: &mut R) -> Self {
        let parts: Vec<_> = space
            .modes()
            .iter()
            .map(|&m| Self::random(Space::single(m), rng))
            .collect();
        Self::product(&parts).expect("space has at least one mode")
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn vector(&self) -> &DVector<C64> {
        &self.vector
    }

    pub fn into_vector(self) -> DVector<C64> {
        self.vector
    }

    pub fn norm(&self) -> f64 {
        self.vector.norm()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &SpinState) -> Result<C64> {
        self.space.ensure_same(&other.space)?;
        Ok(self.vector.dotc(&other.vector))
    }

    /// `|<self|other>|^2`.
    pub fn overlap(&self, other: &SpinState) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr().min(1.0))
    }

    /// Mean and variance of a Hermitian observable.
    pub fn moments(&self, op: &SpinOperator) -> Result<(f64, f64)> {
        self.space.ensure_same(op.space())?;
        op.ensure_hermitian()?;
        let w = op.apply(&self.vector);
        let mean = self.vector.dotc(&w);
        let second = w.norm_squared();
        let var = second - mean.re * mean.re;
        Ok((mean.re, var.max(0.0)))
    }

    /// `<self|op|self>` without Hermiticity requirement.
    pub fn expectation(&self, op: &SpinOperator) -> Result<C64> {
        self.space.ensure_same(op.space())?;
        Ok(op.expectation(&self.vector))
    }

    /// Applies `exp(-i theta n.S)` to every mode at once (requires a single-mode state).
    pub fn rotate(&self, axis: [f64; 3], theta: f64) -> Result<Self> {
        if !self.space.is_single() {
            return Err(Error::InvalidParameter {
                name: "state",
                reason: "use rotate_mode on multi-mode states".into(),
            });
        }
        self.rotate_mode(0, axis, theta)
    }

    /// Applies `exp(-i theta n.S_mode)` to one mode.
    pub fn rotate_mode(&self, mode: usize, axis: [f64; 3], theta: f64) -> Result<Self> {
        let sys = self.space.mode(mode)?;
        let r = rotation_matrix(sys, axis, theta)?;
        Ok(Self {
            space: self.space.clone(),
            vector: apply_on_mode(&r, mode, &self.space, &self.vector),
        })
    }
}

/// Unit vector of `axis`; rejects the zero vector.
pub fn unit_axis(axis: [f64; 3]) -> Result<[f64; 3]> {
    let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    if !(n > 1e-300) || !n.is_finite() {
        return Err(Error::ZeroAxis);
    }
    Ok([axis[0] / n, axis[1] / n, axis[2] / n])
}

/// Dense `exp(-i theta n.S)` on one mode. Rotations about `z` are exact
/// phases; other axes go through the spectrum of `n.S`, which is `-j..=j`.
pub fn rotation_matrix(system: SpinSystem, axis: [f64; 3], theta: f64) -> Result<DMatrix<C64>> {
    let n = unit_axis(axis)?;
    let d = system.dim();
    if n[0] == 0.0 && n[1] == 0.0 {
        let s = n[2].signum();
        return Ok(DMatrix::from_fn(d, d, |i, j| {
            if i == j {
                C64::from_polar(1.0, -s * theta * system.m(i))
            } else {
                C64::new(0.0, 0.0)
            }
        }));
    }
    let g = build_collective_ops(system).along(n).to_dense();
    let eig = SymmetricEigen::new(g);
    // eigenvalues of n.S are exactly m; snapping removes solver noise from the phases
    let phases = eig
        .eigenvalues
        .map(|l| C64::from_polar(1.0, -theta * snap_half_integer(l)));
    let v = &eig.eigenvectors;
    Ok(v * DMatrix::from_diagonal(&phases) * v.adjoint())
}

fn snap_half_integer(x: f64) -> f64 {
    let r = (2.0 * x).round() / 2.0;
    if (r - x).abs() < 1e-8 {
        r
    } else {
        x
    }
}

/// Applies a single-mode matrix to factor `mode` of a product-basis vector.
pub fn apply_on_mode(m: &DMatrix<C64>, mode: usize, space: &Space, v: &DVector<C64>) -> DVector<C64> {
    let dims: Vec<usize> = space.modes().iter().map(|s| s.dim()).collect();
    let dm = dims[mode];
    let left: usize = dims[..mode].iter().product();
    let right: usize = dims[mode + 1..].iter().product();
    let mut out = DVector::zeros(v.len());
    for l in 0..left {
        for r in 0..right {
            for i in 0..dm {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..dm {
                    acc += m[(i, k)] * v[(l * dm + k) * right + r];
                }
                out[(l * dm + i) * right + r] = acc;
            }
        }
    }
    out
}

/// Free-function form of `SpinState::coherent`.
pub fn coherent_state(system: SpinSystem, theta: f64, phi: f64) -> SpinState {
    SpinState::coherent(system, theta, phi)
}
