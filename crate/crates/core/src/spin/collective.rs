use nalgebra_sparse::{CooMatrix, CsrMatrix};

use super::operator::{embed, SpinOperator, C64};
use super::system::{Space, SpinSystem};
use crate::error::Result;

/// The three collective spin components of one mode.
#[derive(Clone, Debug)]
pub struct CollectiveOps {
    pub x: SpinOperator,
    pub y: SpinOperator,
    pub z: SpinOperator,
}

impl CollectiveOps {
    /// `n_x X + n_y Y + n_z Z`.
    pub fn along(&self, n: [f64; 3]) -> SpinOperator {
        let mut acc = self.x.scale_real(n[0]);
        acc = &acc + &self.y.scale_real(n[1]);
        &acc + &self.z.scale_real(n[2])
    }

    pub fn component(&self, axis: usize) -> &SpinOperator {
        match axis {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("axis index {axis} out of range"),
        }
    }
}

/// Raising operator `J+` with `<m+1|J+|m> = sqrt(j(j+1) - m(m+1))`.
pub fn raising(system: SpinSystem) -> CsrMatrix<C64> {
    let d = system.dim();
    let j = system.j();
    let mut coo = CooMatrix::new(d, d);
    for k in 0..d - 1 {
        let m = system.m(k);
        coo.push(k + 1, k, C64::new((j * (j + 1.0) - m * (m + 1.0)).sqrt(), 0.0));
    }
    CsrMatrix::from(&coo)
}

/// Builds `X = (J+ + J-)/2`, `Y = (J+ - J-)/(2i)` and diagonal `Z` for one mode.
pub fn build_collective_ops(system: SpinSystem) -> CollectiveOps {
    let space = Space::single(system);
    let jp = raising(system);
    let jm = jp.transpose();
    let x = (&jp + &jm) * C64::new(0.5, 0.0);
    let y = (&jp - &jm) * C64::new(0.0, -0.5);
    let z: Vec<f64> = (0..system.dim()).map(|k| system.m(k)).collect();
    CollectiveOps {
        x: SpinOperator::from_parts_unchecked(space.clone(), x, true),
        y: SpinOperator::from_parts_unchecked(space.clone(), y, true),
        z: SpinOperator::diagonal(space, &z).expect("dimension matches"),
    }
}

/// Collective operators of `mode` embedded in a (possibly multi-mode) space.
pub fn mode_ops(space: &Space, mode: usize) -> Result<CollectiveOps> {
    let ops = build_collective_ops(space.mode(mode)?);
    if space.is_single() {
        return Ok(ops);
    }
    Ok(CollectiveOps {
        x: embed(&ops.x, mode, space)?,
        y: embed(&ops.y, mode, space)?,
        z: embed(&ops.z, mode, space)?,
    })
}

/// Max-norm of `X^2 + Y^2 + Z^2 - j(j+1) I`.
pub fn casimir_check(x: &SpinOperator, y: &SpinOperator, z: &SpinOperator) -> Result<f64> {
    x.space().ensure_same(y.space())?;
    x.space().ensure_same(z.space())?;
    let sys = x.space().mode(0)?;
    let j = sys.j();
    let c = &(&(x * x) + &(y * y)) + &(z * z);
    let id = SpinOperator::identity(x.space().clone()).scale_real(j * (j + 1.0));
    Ok((&c - &id).max_norm())
}

/// Largest max-norm deviation among `[X,Y]-iZ`, `[Y,Z]-iX`, `[Z,X]-iY`.
pub fn su2_deviation(ops: &CollectiveOps) -> f64 {
    let i = C64::new(0.0, 1.0);
    let dev = |a: &SpinOperator, b: &SpinOperator, c: &SpinOperator| {
        (&a.commutator(b) - &c.scale(i)).max_norm()
    };
    dev(&ops.x, &ops.y, &ops.z)
        .max(dev(&ops.y, &ops.z, &ops.x))
        .max(dev(&ops.z, &ops.x, &ops.y))
}
