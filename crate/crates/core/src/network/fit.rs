use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::solver::solve_steady_state;
use super::spec::NetworkSpec;
use crate::error::{Error, Result};
use crate::optics::{ac_stark_shift_rate, phase_per_atom, PhysicalParams};

/// Largest acceptable condition number of the column-scaled design matrix.
pub const MAX_FIT_CONDITION: f64 = 1e12;

/// Light-atom coupling constants shared by all cavities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomCoupling {
    pub wavelength_ratio: f64,
    pub linewidth_ratio: f64,
    /// Input photons per second.
    pub photon_rate: f64,
}

impl AtomCoupling {
    pub fn from_params(params: &PhysicalParams) -> Result<Self> {
        Ok(Self {
            wavelength_ratio: params.wavelength_ratio,
            linewidth_ratio: params.linewidth_ratio,
            photon_rate: params.photon_rate()?,
        })
    }

    fn as_params(&self) -> PhysicalParams {
        PhysicalParams {
            wavelength_ratio: self.wavelength_ratio,
            linewidth_ratio: self.linewidth_ratio,
            mirror_transmissivity: 0.5,
            roundtrip_loss: 0.0,
            cavity_length: 1.0,
            detuning: 0.0,
            beam_splitter_transmissivity: 0.5,
            flux: crate::optics::LightFlux::PhotonRate(self.photon_rate),
            wavelength: None,
        }
    }

    /// Phase per unit `Z` and round trip.
    pub fn phase_per_atom(&self) -> f64 {
        phase_per_atom(&self.as_params())
    }
}

/// Classical energy `H/hbar = 2 sum_j omega_ac(P_j) Z_j`, rad/s, with
/// `phi_j = 2 delta_phi Z_j`. `z[m]` is the spin of ensemble `m`.
pub fn network_energy(spec: &NetworkSpec, z: &[f64], coupling: &AtomCoupling) -> Result<f64> {
    let dphi = coupling.phase_per_atom();
    let phases: Vec<f64> = z.iter().map(|v| 2.0 * dphi * v).collect();
    let sol = solve_steady_state(spec, &phases)?;
    let p = coupling.as_params();
    Ok(sol
        .cavities
        .iter()
        .map(|c| {
            let zj = z.get(c.mode).copied().unwrap_or(0.0);
            2.0 * ac_stark_shift_rate(&p, c.gain * coupling.photon_rate) * zj
        })
        .sum())
}

/// Quadratic model `H = sum_j omega_j Z_j + sum_{j<=k} q_jk Z_j Z_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalHamiltonian {
    /// Ensemble indices, ascending; all vectors below follow this order.
    pub modes: Vec<usize>,
    pub omega: Vec<f64>,
    /// Monomial coefficients, stored symmetrically: `quadratic[j][k]` multiplies
    /// `Z_j Z_k` for `j != k` and `Z_j^2` on the diagonal.
    pub quadratic: Vec<Vec<f64>>,
    /// Largest absolute residual over the grid, rad/s.
    pub max_residual: f64,
    /// Condition number of the column-scaled design matrix.
    pub condition: f64,
    pub points: usize,
}

impl ClassicalHamiltonian {
    fn index(&self, mode: usize) -> Option<usize> {
        self.modes.iter().position(|&m| m == mode)
    }

    /// Coefficient of `Z_j Z_k` (or `Z_j^2`).
    pub fn monomial(&self, j: usize, k: usize) -> Option<f64> {
        Some(self.quadratic[self.index(j)?][self.index(k)?])
    }

    pub fn linear(&self, j: usize) -> Option<f64> {
        Some(self.omega[self.index(j)?])
    }

    pub fn evaluate(&self, z: &[f64]) -> f64 {
        let zz = |m: usize| z.get(m).copied().unwrap_or(0.0);
        let mut h = 0.0;
        for (a, &ma) in self.modes.iter().enumerate() {
            h += self.omega[a] * zz(ma);
            for (b, &mb) in self.modes.iter().enumerate().skip(a) {
                h += self.quadratic[a][b] * zz(ma) * zz(mb);
            }
        }
        h
    }
}

/// Points with at most two non-zero coordinates from `{-h, 0, h}` over
/// ensembles `0..n`; enough to determine every quadratic coefficient.
pub fn pair_grid(n: usize, h: f64) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; n]];
    for j in 0..n {
        for s in [-h, h] {
            let mut z = vec![0.0; n];
            z[j] = s;
            out.push(z);
        }
        for k in j + 1..n {
            for (sj, sk) in [(-h, -h), (-h, h), (h, -h), (h, h)] {
                let mut z = vec![0.0; n];
                z[j] = sj;
                z[k] = sk;
                out.push(z);
            }
        }
    }
    out
}

/// Rectangular grid with `steps` points per axis over `[-h, h]`.
pub fn box_grid(n: usize, h: f64, steps: usize) -> Vec<Vec<f64>> {
    let axis: Vec<f64> = (0..steps)
        .map(|i| if steps == 1 { 0.0 } else { -h + 2.0 * h * i as f64 / (steps - 1) as f64 })
        .collect();
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    out
}

/// Least-squares quadratic fit of the network energy over `grid`.
pub fn effective_classical_hamiltonian(
    spec: &NetworkSpec,
    grid: &[Vec<f64>],
    coupling: &AtomCoupling,
) -> Result<ClassicalHamiltonian> {
    let modes = spec.modes();
    let n = modes.len();
    let unknowns = n + n * (n + 1) / 2;
    let values: Vec<f64> = grid
        .par_iter()
        .map(|z| network_energy(spec, z, coupling))
        .collect::<Result<_>>()?;
    let zz = |p: &[f64], m: usize| p.get(m).copied().unwrap_or(0.0);
    let mut design = DMatrix::<f64>::zeros(grid.len(), unknowns);
    for (r, p) in grid.iter().enumerate() {
        let mut c = 0;
        for &m in &modes {
            design[(r, c)] = zz(p, m);
            c += 1;
        }
        for a in 0..n {
            for b in a..n {
                design[(r, c)] = zz(p, modes[a]) * zz(p, modes[b]);
                c += 1;
            }
        }
    }
    let distinct = {
        let mut v: Vec<&Vec<f64>> = grid.iter().collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        v.dedup();
        v.len()
    };
    if distinct < unknowns {
        return Err(Error::UnderdeterminedFit {
            points: distinct,
            unknowns,
        });
    }
    let scales: Vec<f64> = (0..unknowns)
        .map(|c| design.column(c).norm())
        .collect();
    if scales.contains(&0.0) {
        return Err(Error::UnderdeterminedFit {
            points: distinct,
            unknowns,
        });
    }
    let mut scaled = design.clone();
    for (c, s) in scales.iter().enumerate() {
        scaled.column_mut(c).unscale_mut(*s);
    }
    let svd = scaled.svd(true, true);
    let sv = &svd.singular_values;
    let smax = sv.max();
    let smin = sv.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if condition > MAX_FIT_CONDITION {
        return Err(Error::IllConditionedFit(condition));
    }
    let y = DVector::from_vec(values.clone());
    let x = svd
        .solve(&y, 0.0)
        .map_err(|e| Error::IllConditionedFit(if e.is_empty() { condition } else { f64::INFINITY }))?;
    let coef: Vec<f64> = x.iter().zip(&scales).map(|(v, s)| v / s).collect();
    let omega = coef[..n].to_vec();
    let mut quadratic = vec![vec![0.0; n]; n];
    let mut c = n;
    #[allow(clippy::needless_range_loop)]
    for a in 0..n {
        for b in a..n {
            quadratic[a][b] = coef[c];
            quadratic[b][a] = coef[c];
            c += 1;
        }
    }
    let fitted = &design * DVector::from_vec(coef);
    let max_residual = (fitted - y).amax();
    Ok(ClassicalHamiltonian {
        modes,
        omega,
        quadratic,
        max_residual,
        condition,
        points: grid.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::spec::{michelson_network, CavityTemplate};

    fn coupling() -> AtomCoupling {
        AtomCoupling {
            wavelength_ratio: 1e-2,
            linewidth_ratio: 6.06 / 3400.0,
            photon_rate: 4.7e10,
        }
    }

    fn cav(dk: f64) -> CavityTemplate {
        CavityTemplate {
            mirror_transmissivity: 5e-3,
            roundtrip_loss: 1.2e-6,
            cavity_length: 0.026,
            detuning: dk,
        }
    }

    #[test]
    fn origin_only_is_underdetermined() {
        let s = michelson_network(0.5, cav(0.1));
        let err = effective_classical_hamiltonian(&s, &[vec![0.0, 0.0]], &coupling()).unwrap_err();
        assert!(matches!(err, Error::UnderdeterminedFit { points: 1, unknowns: 5 }));
    }

    #[test]
    fn grid_shapes() {
        assert_eq!(pair_grid(5, 1.0).len(), 1 + 10 + 40);
        assert_eq!(box_grid(2, 1.0, 3).len(), 9);
    }

    #[test]
    fn fitted_quadratic_is_symmetric() {
        let s = michelson_network(0.5, cav(0.02 * 5e-3 / 0.026));
        let fit = effective_classical_hamiltonian(&s, &pair_grid(2, 5.0), &coupling()).unwrap();
        assert_eq!(fit.monomial(0, 1), fit.monomial(1, 0));
        assert!(fit.monomial(0, 1).unwrap().abs() > 0.0);
        let z = [3.0, -2.0];
        let h = network_energy(&s, &z, &coupling()).unwrap();
        assert!((fit.evaluate(&z) - h).abs() < 1e-3 * h.abs().max(1.0));
    }
}
