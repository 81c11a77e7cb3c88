use std::collections::BTreeMap;

use nalgebra::{Matrix3, SymmetricEigen};

use super::generator::Generator;
use super::poly::PolynomialHamiltonian;
use super::sequence::{PulseSequence, SequenceMetadata};
use super::synth::{qnd_along, twist_along};
use crate::error::{Error, Result};
use crate::spin::C64;

/// Imaginary residue (relative) tolerated when reading a formally Hermitian
/// expression as real su(2) components.
const REAL_TOL: f64 = 1e-12;

/// Coefficients below this (relative to the largest) are dropped.
const DROP_TOL: f64 = 1e-14;

/// A polynomial of degree at most two per term, read in the su(2) basis.
///
/// `S_a S_b` on one mode splits as `(S_a S_b + S_b S_a)/2 + (i/2) e_abc S_c`,
/// so every same-mode product lands in the symmetric `quadratic` matrix plus a
/// `linear` correction.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Decomposition {
    pub constant: f64,
    pub linear: BTreeMap<usize, [f64; 3]>,
    pub quadratic: BTreeMap<usize, [[f64; 3]; 3]>,
    /// Keyed by (lower mode, higher mode): `sum_ab B_ab S^p_a S^q_b`.
    pub bilinear: BTreeMap<(usize, usize), [[f64; 3]; 3]>,
}

fn levi_civita(a: usize, b: usize) -> (usize, f64) {
    let c = 3 - a - b;
    let sign = if (a + 1) % 3 == b { 1.0 } else { -1.0 };
    (c, sign)
}

pub fn decompose(expr: &PolynomialHamiltonian) -> Result<Decomposition> {
    let zero = C64::new(0.0, 0.0);
    let mut constant = zero;
    let mut linear: BTreeMap<usize, [C64; 3]> = BTreeMap::new();
    let mut quadratic: BTreeMap<usize, [[C64; 3]; 3]> = BTreeMap::new();
    let mut bilinear: BTreeMap<(usize, usize), [[C64; 3]; 3]> = BTreeMap::new();
    for (w, c) in expr.terms() {
        match w {
            [] => constant += c,
            [l] => linear.entry(l.mode).or_insert([zero; 3])[l.axis.index()] += c,
            [p, q] if p.mode == q.mode => {
                let (a, b) = (p.axis.index(), q.axis.index());
                let m = quadratic.entry(p.mode).or_insert([[zero; 3]; 3]);
                if a == b {
                    m[a][a] += c;
                } else {
                    m[a][b] += c * 0.5;
                    m[b][a] += c * 0.5;
                    let (k, s) = levi_civita(a, b);
                    linear.entry(p.mode).or_insert([zero; 3])[k] += c * C64::new(0.0, 0.5 * s);
                }
            }
            [p, q] => {
                bilinear.entry((p.mode, q.mode)).or_insert([[zero; 3]; 3])[p.axis.index()]
                    [q.axis.index()] += c;
            }
            _ => {
                return Err(Error::NotRealizable(format!(
                    "word of degree {} in `{expr}`; only linear, single-mode quadratic and \
                     two-mode bilinear terms lower to primitives",
                    w.len()
                )))
            }
        }
    }
    let scale = expr.max_coefficient().max(1.0);
    let mut worst: f64 = constant.im.abs();
    let mut take = |v: C64| {
        worst = worst.max(v.im.abs());
        v.re
    };
    let out = Decomposition {
        constant: take(constant),
        linear: linear.into_iter().map(|(k, v)| (k, v.map(&mut take))).collect(),
        quadratic: quadratic
            .into_iter()
            .map(|(k, m)| (k, m.map(|r| r.map(&mut take))))
            .collect(),
        bilinear: bilinear
            .into_iter()
            .map(|(k, m)| (k, m.map(|r| r.map(&mut take))))
            .collect(),
    };
    if worst > REAL_TOL * scale {
        return Err(Error::NotHermitian { deviation: worst });
    }
    Ok(out)
}

/// One factor of the product formula; each realizes `exp(-i H t)` exactly.
#[derive(Clone, Debug, PartialEq)]
pub enum LoweredTerm {
    Linear { mode: usize, coefficients: [f64; 3] },
    /// `strength (n.S)^2`
    Twist { mode: usize, axis: [f64; 3], strength: f64 },
    /// `strength (u.S_a)(v.S_b)`
    Qnd { modes: [usize; 2], u: [f64; 3], v: [f64; 3], strength: f64 },
}

impl LoweredTerm {
    pub fn sequence(&self, duration: f64) -> Result<PulseSequence> {
        match self {
            LoweredTerm::Linear { mode, coefficients } => {
                PulseSequence::single(Generator::linear(*mode, *coefficients), duration)
            }
            LoweredTerm::Twist {
                mode,
                axis,
                strength,
            } => twist_along(*mode, *axis, *strength, duration),
            LoweredTerm::Qnd {
                modes,
                u,
                v,
                strength,
            } => qnd_along(*modes, *u, *v, *strength, duration),
        }
    }
}

fn clean_axis(v: [f64; 3]) -> [f64; 3] {
    let v = v.map(|x| if x.abs() < 1e-14 { 0.0 } else { x });
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    v.map(|x| x / n)
}

fn column(m: &Matrix3<f64>, k: usize) -> [f64; 3] {
    [m[(0, k)], m[(1, k)], m[(2, k)]]
}

impl Decomposition {
    /// Product-formula factors. A quadratic form is diagonalized and its
    /// median eigenvalue removed through the Casimir `X^2+Y^2+Z^2 = j(j+1)`,
    /// leaving at most two rotated twists; the removed part is a global
    /// phase. Bilinear forms split by singular value decomposition into
    /// rotated QND couplings. The constant is likewise a global phase.
    pub fn terms(&self) -> Vec<LoweredTerm> {
        let mut scale: f64 = 0.0;
        for v in self.linear.values() {
            scale = v.iter().fold(scale, |s, x| s.max(x.abs()));
        }
        for m in self.quadratic.values().chain(self.bilinear.values()) {
            scale = m.iter().flatten().fold(scale, |s, x| s.max(x.abs()));
        }
        let tol = DROP_TOL * scale;
        let mut out = Vec::new();
        for (&mode, v) in &self.linear {
            if v.iter().any(|x| x.abs() > tol) {
                out.push(LoweredTerm::Linear {
                    mode,
                    coefficients: v.map(|x| if x.abs() > tol { x } else { 0.0 }),
                });
            }
        }
        for (&mode, m) in &self.quadratic {
            let eig = SymmetricEigen::new(Matrix3::from_fn(|i, j| m[i][j]));
            let mut idx = [0usize, 1, 2];
            idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
            let median = eig.eigenvalues[idx[1]];
            for &k in &[idx[0], idx[2]] {
                let s = eig.eigenvalues[k] - median;
                if s.abs() > tol {
                    out.push(LoweredTerm::Twist {
                        mode,
                        axis: clean_axis(column(&eig.eigenvectors, k)),
                        strength: s,
                    });
                }
            }
        }
        for (&(a, b), m) in &self.bilinear {
            let svd = Matrix3::from_fn(|i, j| m[i][j]).svd(true, true);
            let (u, vt) = (svd.u.expect("requested"), svd.v_t.expect("requested"));
            for k in 0..3 {
                let s = svd.singular_values[k];
                if s > tol {
                    out.push(LoweredTerm::Qnd {
                        modes: [a, b],
                        u: clean_axis(column(&u, k)),
                        v: clean_axis([vt[(k, 0)], vt[(k, 1)], vt[(k, 2)]]),
                        strength: s,
                    });
                }
            }
        }
        out
    }
}

/// Symmetric (Strang) product over `duration`: every factor but the last at
/// half time, the last at full time, then the first ones mirrored. The
/// result is palindromic, so its error is odd in the step and starts at
/// third order.
pub fn strang_step(terms: &[LoweredTerm], duration: f64) -> Result<PulseSequence> {
    let Some((last, rest)) = terms.split_last() else {
        return Ok(PulseSequence::empty());
    };
    let mut parts = Vec::with_capacity(2 * terms.len());
    for t in rest {
        parts.push(t.sequence(duration / 2.0)?);
    }
    parts.push(last.sequence(duration)?);
    for t in rest.iter().rev() {
        parts.push(t.sequence(duration / 2.0)?);
    }
    Ok(PulseSequence::concat_all(&parts))
}

/// One Strang step of `expr` over `duration`.
pub fn lower_step(expr: &PolynomialHamiltonian, duration: f64) -> Result<PulseSequence> {
    strang_step(&decompose(expr)?.terms(), duration)
}

/// `exp(-i expr time)` as `ceil(time / dt)` repeated Strang steps. Exact up
/// to a global phase when all factors commute.
pub fn lower(expr: &PolynomialHamiltonian, time: f64, dt: f64) -> Result<PulseSequence> {
    if !(dt > 0.0) || !(time >= 0.0) || !dt.is_finite() || !time.is_finite() {
        return Err(Error::InvalidParameter {
            name: "dt",
            reason: format!("need dt > 0 and time >= 0, got dt = {dt}, time = {time}"),
        });
    }
    let terms = decompose(expr)?.terms();
    let n = ((time / dt).ceil() as u64).max(1);
    let body = strang_step(&terms, time / n as f64)?;
    let order = if terms.len() > 1 { 3 } else { 0 };
    let mut meta = SequenceMetadata::method("strang").with_target(expr.clone(), time);
    meta.error_order = (order > 0).then_some(order);
    meta.notes.push(format!("{n} symmetric steps of {}", time / n as f64));
    Ok(body.repeated(n).with_metadata(meta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::verify::{exact_unitary, phase_aligned_distance, sequence_to_unitary};
    use crate::spin::{Space, SpinSystem};

    fn p(s: &str) -> PolynomialHamiltonian {
        s.parse().unwrap()
    }

    #[test]
    fn antisymmetric_products_become_linear() {
        let d = decompose(&p("i(XY - YX)")).unwrap();
        assert_eq!(d.linear[&0], [0.0, 0.0, -1.0]);
        assert!(d.quadratic[&0].iter().flatten().all(|&x| x == 0.0));
        assert!(matches!(decompose(&p("XY")), Err(Error::NotHermitian { .. })));
        assert!(matches!(decompose(&p("X^3")), Err(Error::NotRealizable(_))));
    }

    #[test]
    fn quadratic_form_uses_two_twists() {
        let terms = decompose(&p("YZ+ZY")).unwrap().terms();
        assert_eq!(terms.len(), 2);
        let terms = decompose(&p("Z^2")).unwrap().terms();
        assert_eq!(terms.len(), 1);
    }

    #[test]
    fn commuting_terms_lower_exactly() {
        let sys = SpinSystem::new(5).unwrap();
        let space = Space::pair(sys, sys);
        for e in ["0.3 X1 Z2", "X1^2 + 0.5 Z2 - 0.2 X1 Z2", "(X1+Y1)^2"] {
            let target = p(e);
            let u = sequence_to_unitary(&lower(&target, 0.7, 1.0).unwrap(), &space).unwrap();
            let exact = exact_unitary(&target.materialize(&space).unwrap(), 0.7).unwrap();
            assert!(phase_aligned_distance(&u, &exact) < 1e-10, "{e}");
        }
    }

    #[test]
    fn strang_converges_second_order() {
        let sys = SpinSystem::new(6).unwrap();
        let space = Space::single(sys);
        let target = p("Z^2 - 0.5(XY+YX) + 0.3X");
        let exact = exact_unitary(&target.materialize(&space).unwrap(), 1.0).unwrap();
        let err = |dt: f64| {
            let u = sequence_to_unitary(&lower(&target, 1.0, dt).unwrap(), &space).unwrap();
            phase_aligned_distance(&u, &exact)
        };
        let (e1, e2) = (err(0.1), err(0.05));
        assert!((e1 / e2 - 4.0).abs() < 0.4, "{e1} {e2}");
    }
}
