use std::path::Path;

use serde::{Deserialize, Serialize};

use super::generator::Generator;
use super::poly::PolynomialHamiltonian;
use crate::error::{Error, Result};

/// Largest expanded step count `flatten` will produce.
pub const MAX_FLAT_STEPS: u64 = 10_000_000;

/// `exp(-i H duration)` for one primitive. Frame steps are basis rotations
/// that bracket a generator; they are excluded from time rescaling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Step {
    pub generator: Generator,
    pub duration: f64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub frame: bool,
}

impl Step {
    pub fn new(generator: Generator, duration: f64) -> Self {
        Self {
            generator,
            duration,
            frame: false,
        }
    }

    pub fn frame(generator: Generator, duration: f64) -> Self {
        Self {
            generator,
            duration,
            frame: true,
        }
    }

    pub fn inverse(&self) -> Result<Self> {
        Ok(Self {
            generator: self.generator.negated()?,
            duration: self.duration,
            frame: self.frame,
        })
    }
}

/// A step or a repeated block; repeats keep long Trotter sequences compact
/// and let verification use repeated squaring.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Element {
    Step(Step),
    Repeat { count: u64, body: Vec<Element> },
}

impl Element {
    fn validate(&self) -> Result<()> {
        match self {
            Element::Step(s) => {
                if !s.duration.is_finite() || s.duration < 0.0 {
                    return Err(Error::InvalidParameter {
                        name: "duration",
                        reason: format!("must be finite and non-negative, got {}", s.duration),
                    });
                }
                s.generator.validate()
            }
            Element::Repeat { body, .. } => body.iter().try_for_each(Element::validate),
        }
    }

    fn inverse(&self) -> Result<Self> {
        Ok(match self {
            Element::Step(s) => Element::Step(s.inverse()?),
            Element::Repeat { count, body } => Element::Repeat {
                count: *count,
                body: invert(body)?,
            },
        })
    }

    fn scaled(&self, f: f64) -> Self {
        match self {
            Element::Step(s) if !s.frame => Element::Step(Step {
                duration: s.duration * f,
                ..s.clone()
            }),
            Element::Step(s) => Element::Step(s.clone()),
            Element::Repeat { count, body } => Element::Repeat {
                count: *count,
                body: body.iter().map(|e| e.scaled(f)).collect(),
            },
        }
    }

    fn step_count(&self) -> u128 {
        match self {
            Element::Step(_) => 1,
            Element::Repeat { count, body } => {
                u128::from(*count) * body.iter().map(Element::step_count).sum::<u128>()
            }
        }
    }

    fn duration(&self) -> f64 {
        match self {
            Element::Step(s) if s.frame => 0.0,
            Element::Step(s) => s.duration,
            Element::Repeat { count, body } => {
                *count as f64 * body.iter().map(Element::duration).sum::<f64>()
            }
        }
    }

    fn max_mode(&self) -> Option<usize> {
        match self {
            Element::Step(s) => Some(s.generator.max_mode()),
            Element::Repeat { body, .. } => body.iter().filter_map(Element::max_mode).max(),
        }
    }

    fn flatten_into(&self, out: &mut Vec<Step>) {
        match self {
            Element::Step(s) => out.push(s.clone()),
            Element::Repeat { count, body } => {
                for _ in 0..*count {
                    for e in body {
                        e.flatten_into(out);
                    }
                }
            }
        }
    }
}

fn invert(elements: &[Element]) -> Result<Vec<Element>> {
    elements.iter().rev().map(Element::inverse).collect()
}

/// What a sequence is meant to realize.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceMetadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<PolynomialHamiltonian>,
    /// Time for which `target` is simulated: the sequence approximates
    /// `exp(-i target simulated_time)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulated_time: Option<f64>,
    #[serde(default)]
    pub method: String,
    /// Leading power of the step size in the per-slice error.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_order: Option<u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl SequenceMetadata {
    pub fn method(method: impl Into<String>) -> Self {
        Self {
            method: method.into(),
            ..Self::default()
        }
    }

    pub fn with_target(mut self, target: PolynomialHamiltonian, time: f64) -> Self {
        self.target = Some(target);
        self.simulated_time = Some(time);
        self
    }

    pub fn with_order(mut self, order: u32) -> Self {
        self.error_order = Some(order);
        self
    }
}

/// Ordered steps; the first element acts first.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSequence {
    #[serde(default)]
    pub metadata: SequenceMetadata,
    elements: Vec<Element>,
}

impl PulseSequence {
    pub fn new(elements: Vec<Element>, metadata: SequenceMetadata) -> Result<Self> {
        let s = Self { metadata, elements };
        s.validate()?;
        Ok(s)
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_steps(steps: Vec<Step>, metadata: SequenceMetadata) -> Result<Self> {
        Self::new(steps.into_iter().map(Element::Step).collect(), metadata)
    }

    pub fn single(generator: Generator, duration: f64) -> Result<Self> {
        Self::from_steps(vec![Step::new(generator, duration)], SequenceMetadata::default())
    }

    pub fn validate(&self) -> Result<()> {
        self.elements.iter().try_for_each(Element::validate)
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn with_metadata(mut self, metadata: SequenceMetadata) -> Self {
        self.metadata = metadata;
        self
    }

    /// Number of primitive steps after expanding repeats.
    pub fn step_count(&self) -> u128 {
        self.elements.iter().map(Element::step_count).sum()
    }

    /// Total time with generators switched on (frame steps excluded).
    pub fn total_duration(&self) -> f64 {
        self.elements.iter().map(Element::duration).sum()
    }

    /// Modes needed to run the sequence.
    pub fn num_modes(&self) -> usize {
        self.elements
            .iter()
            .filter_map(Element::max_mode)
            .max()
            .map_or(0, |m| m + 1)
    }

    pub fn flatten(&self) -> Result<Vec<Step>> {
        let n = self.step_count();
        if n > u128::from(MAX_FLAT_STEPS) {
            return Err(Error::InvalidParameter {
                name: "sequence",
                reason: format!("{n} expanded steps exceed the limit {MAX_FLAT_STEPS}"),
            });
        }
        let mut out = Vec::with_capacity(n as usize);
        for e in &self.elements {
            e.flatten_into(&mut out);
        }
        Ok(out)
    }

    /// Formal inverse: reversed order, every generator negated.
    pub fn inverse(&self) -> Result<Self> {
        Ok(Self {
            metadata: SequenceMetadata::method("inverse"),
            elements: invert(&self.elements)?,
        })
    }

    /// `self` followed by `other`. Element lists concatenate, so the
    /// operation is associative; metadata is kept from `self`.
    pub fn concat(&self, other: &Self) -> Self {
        let mut elements = self.elements.clone();
        elements.extend_from_slice(&other.elements);
        Self {
            metadata: self.metadata.clone(),
            elements,
        }
    }

    pub fn concat_all<'a>(parts: impl IntoIterator<Item = &'a PulseSequence>) -> Self {
        let mut elements = Vec::new();
        for p in parts {
            elements.extend_from_slice(&p.elements);
        }
        Self {
            metadata: SequenceMetadata::default(),
            elements,
        }
    }

    /// Multiplies every non-frame duration by `f`. For sequences built from
    /// (conjugated) primitive exponentials this rescales simulated time.
    pub fn scaled(&self, f: f64) -> Self {
        Self {
            metadata: self.metadata.clone(),
            elements: self.elements.iter().map(|e| e.scaled(f)).collect(),
        }
    }

    pub fn repeated(&self, count: u64) -> Self {
        Self {
            metadata: self.metadata.clone(),
            elements: vec![Element::Repeat {
                count,
                body: self.elements.clone(),
            }],
        }
    }

    pub fn push(&mut self, step: Step) {
        self.elements.push(Element::Step(step));
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let seq: Self = serde_json::from_str(s)?;
        seq.validate()?;
        Ok(seq)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}
