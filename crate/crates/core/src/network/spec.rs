use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::FRAC_PI_2;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Free-space node of the network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Node {
    /// Four-port beam splitter. Ports `0, 1` face ports `2, 3`:
    /// `0 -> 2` and `1 -> 3` transmit with `t_B`, `0 -> 3` and `1 -> 2`
    /// reflect with `i r_B` (and the same from the other side).
    BeamSplitter { id: String, transmissivity: f64 },
    /// The single driven port; injects unit amplitude.
    Input { id: String },
    /// Open port; absorbs whatever arrives.
    Drain { id: String },
}

impl Node {
    pub fn id(&self) -> &str {
        match self {
            Node::BeamSplitter { id, .. } | Node::Input { id } | Node::Drain { id } => id,
        }
    }
}

/// End element of an arm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Termination {
    /// One-sided cavity holding atomic ensemble `mode`.
    Cavity {
        id: String,
        mode: usize,
        mirror_transmissivity: f64,
        roundtrip_loss: f64,
        /// m
        cavity_length: f64,
        /// 1/m
        detuning: f64,
    },
    /// Ideal mirror with real amplitude reflectivity.
    Mirror {
        id: String,
        #[serde(default = "unit")]
        reflectivity: f64,
    },
}

fn unit() -> f64 {
    1.0
}

impl Termination {
    pub fn id(&self) -> &str {
        match self {
            Termination::Cavity { id, .. } | Termination::Mirror { id, .. } => id,
        }
    }
}

/// Propagation segment between two endpoints. Endpoints are written
/// `"<beam splitter id>:<port>"` or the bare id of a termination, input or drain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Edge {
    pub from: String,
    pub to: String,
    /// One-way propagation phase `k L_segment`, rad.
    #[serde(default)]
    pub phase: f64,
}

impl Edge {
    pub fn new(from: impl Into<String>, to: impl Into<String>, phase: f64) -> Self {
        Self {
            from: from.into(),
            to: to.into(),
            phase,
        }
    }

    pub fn label(&self) -> String {
        format!("{} -- {}", self.from, self.to)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    pub nodes: Vec<Node>,
    pub terminations: Vec<Termination>,
    pub edges: Vec<Edge>,
}

/// Resolved endpoint of an edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Endpoint {
    Port { splitter: usize, port: usize },
    Termination(usize),
    Input,
    Drain(usize),
}

impl NetworkSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("network spec serialises")
    }

    /// Indices of beam splitters in node order.
    pub fn splitters(&self) -> Vec<(usize, f64)> {
        self.nodes
            .iter()
            .enumerate()
            .filter_map(|(i, n)| match n {
                Node::BeamSplitter { transmissivity, .. } => Some((i, *transmissivity)),
                _ => None,
            })
            .collect()
    }

    /// Atomic modes addressed by cavities, ascending.
    pub fn modes(&self) -> Vec<usize> {
        let set: BTreeSet<usize> = self
            .terminations
            .iter()
            .filter_map(|t| match t {
                Termination::Cavity { mode, .. } => Some(*mode),
                _ => None,
            })
            .collect();
        set.into_iter().collect()
    }

    pub fn resolve(&self, name: &str) -> Result<Endpoint> {
        if let Some((id, port)) = name.rsplit_once(':') {
            let port: usize = port
                .parse()
                .map_err(|_| Error::InvalidNetwork(format!("bad port in endpoint {name:?}")))?;
            if port > 3 {
                return Err(Error::InvalidNetwork(format!("port {port} out of range in {name:?}")));
            }
            return match self.nodes.iter().position(|n| n.id() == id) {
                Some(i) if matches!(self.nodes[i], Node::BeamSplitter { .. }) => Ok(Endpoint::Port { splitter: i, port }),
                Some(_) => Err(Error::InvalidNetwork(format!("{id:?} has no ports"))),
                None => Err(Error::InvalidNetwork(format!("unknown node {id:?}"))),
            };
        }
        if let Some(i) = self.terminations.iter().position(|t| t.id() == name) {
            return Ok(Endpoint::Termination(i));
        }
        match self.nodes.iter().position(|n| n.id() == name) {
            Some(i) => match self.nodes[i] {
                Node::Input { .. } => Ok(Endpoint::Input),
                Node::Drain { .. } => Ok(Endpoint::Drain(i)),
                Node::BeamSplitter { .. } => Err(Error::InvalidNetwork(format!(
                    "beam splitter {name:?} needs a port, e.g. \"{name}:0\""
                ))),
            },
            None => Err(Error::InvalidNetwork(format!("unknown endpoint {name:?}"))),
        }
    }

    /// Structural checks: unique ids, one input, every port and every
    /// termination connected exactly once, parameters in range.
    pub fn validate(&self) -> Result<()> {
        let mut ids = BTreeSet::new();
        for id in self
            .nodes
            .iter()
            .map(Node::id)
            .chain(self.terminations.iter().map(Termination::id))
        {
            if id.contains(':') {
                return Err(Error::InvalidNetwork(format!("id {id:?} must not contain ':'")));
            }
            if !ids.insert(id) {
                return Err(Error::InvalidNetwork(format!("duplicate id {id:?}")));
            }
        }
        let inputs = self.nodes.iter().filter(|n| matches!(n, Node::Input { .. })).count();
        if inputs != 1 {
            return Err(Error::InvalidNetwork(format!("expected exactly one input, found {inputs}")));
        }
        for n in &self.nodes {
            if let Node::BeamSplitter { id, transmissivity } = n {
                if !(*transmissivity > 0.0 && *transmissivity < 1.0) {
                    return Err(Error::InvalidNetwork(format!("{id}: transmissivity must lie in (0, 1)")));
                }
            }
        }
        for t in &self.terminations {
            match t {
                Termination::Cavity {
                    id,
                    mirror_transmissivity,
                    roundtrip_loss,
                    cavity_length,
                    detuning,
                    ..
                } => {
                    let ok = *mirror_transmissivity > 0.0
                        && *mirror_transmissivity < 1.0
                        && *roundtrip_loss >= 0.0
                        && *roundtrip_loss < 1.0
                        && *cavity_length > 0.0
                        && detuning.is_finite();
                    if !ok {
                        return Err(Error::InvalidNetwork(format!("{id}: cavity parameters out of range")));
                    }
                }
                Termination::Mirror { id, reflectivity } => {
                    if !(0.0..=1.0).contains(reflectivity) {
                        return Err(Error::InvalidNetwork(format!("{id}: reflectivity must lie in [0, 1]")));
                    }
                }
            }
        }
        let mut used: BTreeMap<Endpoint, usize> = BTreeMap::new();
        for e in &self.edges {
            if !e.phase.is_finite() {
                return Err(Error::InvalidNetwork(format!("edge {} has a non-finite phase", e.label())));
            }
            for end in [&e.from, &e.to] {
                *used.entry(self.resolve(end)?).or_default() += 1;
            }
        }
        for (end, count) in &used {
            if *count > 1 {
                return Err(Error::InvalidNetwork(format!("{} connected {count} times", self.endpoint_name(*end))));
            }
        }
        for (i, _) in self.splitters() {
            for port in 0..4 {
                if !used.contains_key(&Endpoint::Port { splitter: i, port }) {
                    return Err(Error::InvalidNetwork(format!("{}:{port} is not connected", self.nodes[i].id())));
                }
            }
        }
        for (i, t) in self.terminations.iter().enumerate() {
            if !used.contains_key(&Endpoint::Termination(i)) {
                return Err(Error::InvalidNetwork(format!("{} is not connected", t.id())));
            }
        }
        if !used.contains_key(&Endpoint::Input) {
            return Err(Error::InvalidNetwork("input is not connected".into()));
        }
        Ok(())
    }

    pub fn endpoint_name(&self, end: Endpoint) -> String {
        match end {
            Endpoint::Port { splitter, port } => format!("{}:{port}", self.nodes[splitter].id()),
            Endpoint::Termination(i) => self.terminations[i].id().to_string(),
            Endpoint::Input => self
                .nodes
                .iter()
                .find(|n| matches!(n, Node::Input { .. }))
                .map(|n| n.id().to_string())
                .unwrap_or_default(),
            Endpoint::Drain(i) => self.nodes[i].id().to_string(),
        }
    }

    /// Mutable access to the detuning of the cavity holding `mode`.
    pub fn set_detuning(&mut self, mode: usize, value: f64) -> Result<()> {
        for t in &mut self.terminations {
            if let Termination::Cavity { mode: m, detuning, .. } = t {
                if *m == mode {
                    *detuning = value;
                    return Ok(());
                }
            }
        }
        Err(Error::InvalidNetwork(format!("no cavity for mode {mode}")))
    }

    /// Sets the one-way phase of the edge touching `endpoint`.
    pub fn set_edge_phase(&mut self, endpoint: &str, phase: f64) -> Result<()> {
        for e in &mut self.edges {
            if e.from == endpoint || e.to == endpoint {
                e.phase = phase;
                return Ok(());
            }
        }
        Err(Error::InvalidNetwork(format!("no edge touches {endpoint:?}")))
    }
}

/// Cavity parameters shared by the built-in topologies.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavityTemplate {
    pub mirror_transmissivity: f64,
    pub roundtrip_loss: f64,
    pub cavity_length: f64,
    pub detuning: f64,
}

impl CavityTemplate {
    fn cavity(&self, id: &str, mode: usize) -> Termination {
        Termination::Cavity {
            id: id.into(),
            mode,
            mirror_transmissivity: self.mirror_transmissivity,
            roundtrip_loss: self.roundtrip_loss,
            cavity_length: self.cavity_length,
            detuning: self.detuning,
        }
    }
}

/// Two-cavity Michelson: cavity of mode 0 in arm `a` (port 3), mirror arm
/// `b` (port 2, round trip `pi`), cavity of mode 1 in arm `c` (port 1).
pub fn michelson_network(beam_splitter_transmissivity: f64, cavity: CavityTemplate) -> NetworkSpec {
    NetworkSpec {
        nodes: vec![
            Node::BeamSplitter {
                id: "bs".into(),
                transmissivity: beam_splitter_transmissivity,
            },
            Node::Input { id: "in".into() },
        ],
        terminations: vec![
            cavity.cavity("cav1", 0),
            Termination::Mirror {
                id: "mirror".into(),
                reflectivity: 1.0,
            },
            cavity.cavity("cav2", 1),
        ],
        edges: vec![
            Edge::new("bs:0", "in", 0.0),
            Edge::new("bs:3", "cav1", 0.0),
            Edge::new("bs:2", "mirror", FRAC_PI_2),
            Edge::new("bs:1", "cav2", 0.0),
        ],
    }
}

/// Cavity directly at the input, no beam splitter.
pub fn single_cavity_network(cavity: CavityTemplate) -> NetworkSpec {
    NetworkSpec {
        nodes: vec![Node::Input { id: "in".into() }],
        terminations: vec![cavity.cavity("cav1", 0)],
        edges: vec![Edge::new("in", "cav1", 0.0)],
    }
}

/// Tunable one-way phases of the five-cavity network.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiveCavityPhases {
    /// Link from the central splitter to the left sub-interferometer.
    pub left_link: f64,
    /// Link from the central splitter to the right sub-interferometer.
    pub right_link: f64,
    /// Mirror arm of the left sub-interferometer.
    pub left_mirror: f64,
    /// Mirror arm of the right sub-interferometer.
    pub right_mirror: f64,
}

impl Default for FiveCavityPhases {
    fn default() -> Self {
        Self {
            left_link: 0.0,
            right_link: 0.0,
            left_mirror: FRAC_PI_2,
            right_mirror: FRAC_PI_2,
        }
    }
}

/// Five cavities (modes 0..5, ids `cav1`..`cav5`) on three 50/50 splitters.
///
/// The central splitter `bs0` takes the input on port 0, feeds `cav5`
/// from port 1 and the two Michelson sub-interferometers `bs1`
/// (`cav1`, `cav2`) and `bs2` (`cav3`, `cav4`) from ports 2 and 3. Each
/// sub-interferometer has a mirror arm on port 2.
pub fn five_cavity_network(cavity: CavityTemplate, phases: &FiveCavityPhases) -> NetworkSpec {
    let bs = |id: &str| Node::BeamSplitter {
        id: id.into(),
        transmissivity: 0.5,
    };
    let mirror = |id: &str| Termination::Mirror {
        id: id.into(),
        reflectivity: 1.0,
    };
    NetworkSpec {
        nodes: vec![bs("bs0"), bs("bs1"), bs("bs2"), Node::Input { id: "in".into() }],
        terminations: vec![
            cavity.cavity("cav1", 0),
            cavity.cavity("cav2", 1),
            cavity.cavity("cav3", 2),
            cavity.cavity("cav4", 3),
            cavity.cavity("cav5", 4),
            mirror("mirror1"),
            mirror("mirror2"),
        ],
        edges: vec![
            Edge::new("bs0:0", "in", 0.0),
            Edge::new("bs0:1", "cav5", 0.0),
            Edge::new("bs0:2", "bs1:0", phases.left_link),
            Edge::new("bs0:3", "bs2:0", phases.right_link),
            Edge::new("bs1:2", "mirror1", phases.left_mirror),
            Edge::new("bs1:3", "cav1", 0.0),
            Edge::new("bs1:1", "cav2", 0.0),
            Edge::new("bs2:2", "mirror2", phases.right_mirror),
            Edge::new("bs2:3", "cav3", 0.0),
            Edge::new("bs2:1", "cav4", 0.0),
        ],
    }
}
