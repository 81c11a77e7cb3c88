use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::{effective_classical_hamiltonian, network_energy, pair_grid, AtomCoupling, ClassicalHamiltonian};
use super::spec::{five_cavity_network, CavityTemplate, FiveCavityPhases, NetworkSpec};
use crate::error::Result;

/// Default PASS threshold on the off-target suppression ratio.
pub const DEFAULT_SELECTIVITY_THRESHOLD: f64 = 0.1;

/// Detuning schedule for switching pairs on and off.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetuningSchedule {
    /// `L Delta k / T` of the two target cavities.
    pub near: f64,
    /// `2 L Delta k / T` of every other cavity.
    pub far: f64,
    /// Fit half-width as a fraction of the near round-trip detuning `2 L Delta k`,
    /// expressed through the atom phase `2 delta_phi Z`.
    pub grid_fraction: f64,
    /// Search the sub-interferometer path phases for the strongest target coupling.
    pub phase_search: bool,
}

impl Default for DetuningSchedule {
    fn default() -> Self {
        Self {
            near: 0.02,
            far: 10.0,
            grid_fraction: 0.01,
            phase_search: true,
        }
    }
}

/// Outcome for one target pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairSelectivity {
    pub target: (usize, usize),
    /// Fitted coefficient of `Z_j Z_k`, rad/s.
    pub target_coefficient: f64,
    /// Largest |coefficient| of a quadratic monomial not confined to the target pair.
    pub worst_off_target: f64,
    pub worst_term: (usize, usize),
    pub ratio: f64,
    pub pass: bool,
    pub phases: Option<FiveCavityPhases>,
    pub fit: ClassicalHamiltonian,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectivityReport {
    pub threshold: f64,
    pub schedule: DetuningSchedule,
    pub pairs: Vec<PairSelectivity>,
}

impl SelectivityReport {
    pub fn all_pass(&self) -> bool {
        self.pairs.iter().all(|p| p.pass)
    }

    pub fn worst_ratio(&self) -> f64 {
        self.pairs.iter().map(|p| p.ratio).fold(0.0, f64::max)
    }
}

/// Suppression ratio of a fitted Hamiltonian for target `(j, k)`. Every
/// quadratic monomial other than `Z_j^2`, `Z_k^2`, `Z_j Z_k` counts as off-target.
pub fn selectivity_of(fit: &ClassicalHamiltonian, target: (usize, usize), threshold: f64) -> (f64, f64, (usize, usize), f64, bool) {
    let (j, k) = target;
    let tc = fit.monomial(j, k).unwrap_or(0.0);
    let mut worst = 0.0f64;
    let mut term = (j, k);
    for (a, &ma) in fit.modes.iter().enumerate() {
        for (b, &mb) in fit.modes.iter().enumerate().skip(a) {
            let inside = [ma, mb].iter().all(|m| *m == j || *m == k);
            if inside {
                continue;
            }
            let v = fit.quadratic[a][b].abs();
            if v > worst {
                worst = v;
                term = (ma, mb);
            }
        }
    }
    let ratio = if tc == 0.0 { f64::INFINITY } else { worst / tc.abs() };
    (tc, worst, term, ratio, ratio < threshold)
}

/// Fits `spec` on a pair grid of half-width `h` and scores target `(j, k)`.
pub fn pair_selectivity(
    spec: &NetworkSpec,
    target: (usize, usize),
    coupling: &AtomCoupling,
    h: f64,
    threshold: f64,
) -> Result<PairSelectivity> {
    let n = spec.modes().iter().max().map_or(0, |m| m + 1);
    let fit = effective_classical_hamiltonian(spec, &pair_grid(n, h), coupling)?;
    let (tc, worst, term, ratio, pass) = selectivity_of(&fit, target, threshold);
    Ok(PairSelectivity {
        target,
        target_coefficient: tc,
        worst_off_target: worst,
        worst_term: term,
        ratio,
        pass,
        phases: None,
        fit,
    })
}

/// Mixed second difference estimate of the `Z_j Z_k` coefficient.
fn mixed_coefficient(spec: &NetworkSpec, j: usize, k: usize, n: usize, h: f64, coupling: &AtomCoupling) -> Result<f64> {
    let mut acc = 0.0;
    for (sj, sk, w) in [(1.0, 1.0, 1.0), (1.0, -1.0, -1.0), (-1.0, 1.0, -1.0), (-1.0, -1.0, 1.0)] {
        let mut z = vec![0.0; n];
        z[j] = sj * h;
        z[k] = sk * h;
        acc += w * network_energy(spec, &z, coupling)?;
    }
    Ok(acc / (4.0 * h * h))
}

/// Phase settings scanned by the path-phase search.
pub fn phase_candidates() -> Vec<FiveCavityPhases> {
    let links = [0.0, FRAC_PI_4, FRAC_PI_2, 3.0 * FRAC_PI_4];
    let mirrors = [FRAC_PI_2, 0.0];
    let mut out = Vec::new();
    for &l in &links {
        for &r in &links {
            for &ml in &mirrors {
                for &mr in &mirrors {
                    out.push(FiveCavityPhases {
                        left_link: l,
                        right_link: r,
                        left_mirror: ml,
                        right_mirror: mr,
                    });
                }
            }
        }
    }
    out
}

/// Five-cavity network with cavities `j`, `k` near resonance and the rest far detuned.
pub fn scheduled_five_cavity(
    cavity: CavityTemplate,
    target: (usize, usize),
    schedule: &DetuningSchedule,
    phases: &FiveCavityPhases,
) -> Result<NetworkSpec> {
    let t = cavity.mirror_transmissivity;
    let l = cavity.cavity_length;
    let mut spec = five_cavity_network(cavity, phases);
    for m in 0..5 {
        let dk = if m == target.0 || m == target.1 {
            schedule.near * t / l
        } else {
            schedule.far * t / (2.0 * l)
        };
        spec.set_detuning(m, dk)?;
    }
    Ok(spec)
}

/// Scores all ten pairs of the five-cavity network under `schedule`.
pub fn five_cavity_selectivity_report(
    cavity: CavityTemplate,
    coupling: &AtomCoupling,
    schedule: &DetuningSchedule,
    threshold: f64,
) -> Result<SelectivityReport> {
    let targets: Vec<(usize, usize)> = (0..5).flat_map(|j| (j + 1..5).map(move |k| (j, k))).collect();
    let dphi = coupling.phase_per_atom();
    let near_roundtrip = 2.0 * schedule.near * cavity.mirror_transmissivity;
    let h = (schedule.grid_fraction * near_roundtrip / (2.0 * dphi)).abs();
    let pairs = targets
        .par_iter()
        .map(|&target| {
            let phases = if schedule.phase_search {
                let mut best = (f64::NEG_INFINITY, FiveCavityPhases::default());
                for cand in phase_candidates() {
                    let spec = scheduled_five_cavity(cavity, target, schedule, &cand)?;
                    let c = mixed_coefficient(&spec, target.0, target.1, 5, h, coupling)?.abs();
                    if c > best.0 {
                        best = (c, cand);
                    }
                }
                best.1
            } else {
                FiveCavityPhases::default()
            };
            let spec = scheduled_five_cavity(cavity, target, schedule, &phases)?;
            let mut p = pair_selectivity(&spec, target, coupling, h, threshold)?;
            p.phases = Some(phases);
            Ok(p)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SelectivityReport {
        threshold,
        schedule: *schedule,
        pairs,
    })
}
