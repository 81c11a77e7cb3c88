use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::spec::{Endpoint, NetworkSpec, Node, Termination};
use crate::error::{Error, Result};
use crate::optics::{cavity_buildup_exact, cavity_reflection};
use crate::spin::C64;

/// Relative pivot size below which the scattering system counts as singular.
const SINGULAR_PIVOT: f64 = 1e-13;

/// Steady state of one cavity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CavityField {
    pub id: String,
    pub mode: usize,
    /// Round-trip phase deviation `alpha = phi + 2 L Delta k`.
    pub alpha: f64,
    /// Field amplitude arriving at the input mirror.
    pub incident: C64,
    /// Intracavity power relative to the network input power.
    pub gain: f64,
}

/// Monochromatic steady state of a network driven with unit amplitude.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkSolution {
    /// Wave leaving each end of each edge: `[from end, to end]`.
    pub outgoing: Vec<[C64; 2]>,
    /// Cavities in termination order.
    pub cavities: Vec<CavityField>,
    /// Amplitude returning to the input port.
    pub input_return: C64,
    /// Power leaving through the input and all drains.
    pub output_power: f64,
    /// Max-norm residual of the linear system.
    pub residual: f64,
}

impl NetworkSolution {
    /// Wave arriving at end `k` of edge `e`.
    pub fn arriving(&self, spec: &NetworkSpec, e: usize, k: usize) -> C64 {
        C64::from_polar(1.0, spec.edges[e].phase) * self.outgoing[e][1 - k]
    }

    /// Gain of the cavity holding `mode`.
    pub fn gain(&self, mode: usize) -> Option<f64> {
        self.cavities.iter().find(|c| c.mode == mode).map(|c| c.gain)
    }
}

/// Beam-splitter scattering: amplitude into `out` from a wave entering `inp`.
fn splitter_coefficient(t: f64, r: f64, out: usize, inp: usize) -> Option<C64> {
    let side = |p: usize| p / 2;
    if side(out) == side(inp) {
        return None;
    }
    // straight-through pairs (0,2) and (1,3) transmit
    if out % 2 == inp % 2 {
        Some(C64::new(t, 0.0))
    } else {
        Some(C64::new(0.0, r))
    }
}

/// Solves for all edge amplitudes. `atom_phases[m]` is the phase imprinted by
/// ensemble `m`; missing entries count as zero.
pub fn solve_steady_state(spec: &NetworkSpec, atom_phases: &[f64]) -> Result<NetworkSolution> {
    let ne = spec.edges.len();
    let n = 2 * ne;
    let mut ends = Vec::with_capacity(ne);
    let mut port_of = std::collections::HashMap::new();
    for (e, edge) in spec.edges.iter().enumerate() {
        let pair = [spec.resolve(&edge.from)?, spec.resolve(&edge.to)?];
        for (k, end) in pair.iter().enumerate() {
            if let Endpoint::Port { splitter, port } = end {
                port_of.insert((*splitter, *port), (e, k));
            }
        }
        ends.push(pair);
    }
    let phase = |e: usize| C64::from_polar(1.0, spec.edges[e].phase);
    // incoming wave at end k of edge e is phase(e) * x[2e + 1 - k]
    let incoming = |e: usize, k: usize| (2 * e + 1 - k, phase(e));
    let phase_of = |mode: usize| atom_phases.get(mode).copied().unwrap_or(0.0);

    let mut a = DMatrix::<C64>::identity(n, n);
    let mut b = DVector::<C64>::zeros(n);
    let mut alphas = vec![0.0; spec.terminations.len()];
    for (e, pair) in ends.iter().enumerate() {
        for (k, end) in pair.iter().enumerate() {
            let row = 2 * e + k;
            match *end {
                Endpoint::Input => b[row] = C64::new(1.0, 0.0),
                Endpoint::Drain(_) => {}
                Endpoint::Termination(i) => {
                    let (col, ph) = incoming(e, k);
                    let coef = match &spec.terminations[i] {
                        Termination::Cavity {
                            mode,
                            mirror_transmissivity,
                            roundtrip_loss,
                            cavity_length,
                            detuning,
                            ..
                        } => {
                            let alpha = phase_of(*mode) + 2.0 * cavity_length * detuning;
                            alphas[i] = alpha;
                            cavity_reflection(alpha, *mirror_transmissivity, *roundtrip_loss)
                        }
                        Termination::Mirror { reflectivity, .. } => C64::new(*reflectivity, 0.0),
                    };
                    a[(row, col)] -= coef * ph;
                }
                Endpoint::Port { splitter, port } => {
                    let tb = match spec.nodes[splitter] {
                        Node::BeamSplitter { transmissivity, .. } => transmissivity,
                        _ => unreachable!("ports resolve to beam splitters"),
                    };
                    let (t, r) = (tb.sqrt(), (1.0 - tb).sqrt());
                    for q in 0..4 {
                        if let Some(c) = splitter_coefficient(t, r, port, q) {
                            let (ee, kk) = port_of[&(splitter, q)];
                            let (col, ph) = incoming(ee, kk);
                            a[(row, col)] -= c * ph;
                        }
                    }
                }
            }
        }
    }

    let lu = a.clone().lu();
    let u = lu.u();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for i in 0..n {
        let v = u[(i, i)].norm();
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let x = match lu.solve(&b) {
        Some(x) if n == 0 || lo > SINGULAR_PIVOT * hi => x,
        _ => return Err(Error::SingularNetwork(null_loop(spec, &a))),
    };
    let residual = (&a * &x - &b).iter().fold(0.0f64, |m, v| m.max(v.norm()));

    let outgoing: Vec<[C64; 2]> = (0..ne).map(|e| [x[2 * e], x[2 * e + 1]]).collect();
    let mut cavities = Vec::new();
    let mut input_return = C64::new(0.0, 0.0);
    let mut output_power = 0.0;
    for (e, pair) in ends.iter().enumerate() {
        for (k, end) in pair.iter().enumerate() {
            let (col, ph) = incoming(e, k);
            let arr = ph * x[col];
            match *end {
                Endpoint::Input => {
                    input_return = arr;
                    output_power += arr.norm_sqr();
                }
                Endpoint::Drain(_) => output_power += arr.norm_sqr(),
                Endpoint::Termination(i) => {
                    if let Termination::Cavity {
                        id,
                        mode,
                        mirror_transmissivity,
                        roundtrip_loss,
                        ..
                    } = &spec.terminations[i]
                    {
                        cavities.push((
                            i,
                            CavityField {
                                id: id.clone(),
                                mode: *mode,
                                alpha: alphas[i],
                                incident: arr,
                                gain: arr.norm_sqr() * cavity_buildup_exact(alphas[i], *mirror_transmissivity, *roundtrip_loss),
                            },
                        ));
                    }
                }
                Endpoint::Port { .. } => {}
            }
        }
    }
    cavities.sort_by_key(|(i, _)| *i);
    Ok(NetworkSolution {
        outgoing,
        cavities: cavities.into_iter().map(|(_, c)| c).collect(),
        input_return,
        output_power,
        residual,
    })
}

/// Edges carrying the null vector of a singular system.
fn null_loop(spec: &NetworkSpec, a: &DMatrix<C64>) -> Vec<String> {
    let svd = a.clone().svd(false, true);
    let vt = match svd.v_t {
        Some(v) => v,
        None => return vec![],
    };
    let k = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let row = vt.row(k);
    let peak = row.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    let mut out = Vec::new();
    for (e, edge) in spec.edges.iter().enumerate() {
        if row[2 * e].norm().max(row[2 * e + 1].norm()) > 0.1 * peak {
            out.push(edge.label());
        }
    }
    out
}
