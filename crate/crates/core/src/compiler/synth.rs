use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::generator::Generator;
use super::lower::lower_step;
use super::poly::{Axis, PolynomialHamiltonian};
use super::sequence::{Element, PulseSequence, SequenceMetadata, Step};
use crate::error::{Error, Result};
use crate::spin::state::unit_axis;
use crate::spin::C64;

/// `exp(-i angle n.S)` on one mode; negative angles flip the axis so that
/// durations stay non-negative.
pub fn rotation_step(mode: usize, axis: [f64; 3], angle: f64) -> Result<Step> {
    let n = unit_axis(axis)?;
    let (n, angle) = if angle < 0.0 {
        (n.map(|x| -x), -angle)
    } else {
        (n, angle)
    };
    Ok(Step::frame(Generator::linear(mode, n), angle))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rotation {
    pub mode: usize,
    pub axis: [f64; 3],
    pub angle: f64,
}

/// Rotation `(a, theta)` with `e^{i theta a.S} Z e^{-i theta a.S} = n.S`, or
/// `None` when `n` is already `z`. Uses `e^{i t a.S} (v.S) e^{-i t a.S} =
/// (R_a(-t) v).S`, so the axis is `n x z` and the angle `acos n_z`.
pub fn rotation_to(n: [f64; 3]) -> Result<Option<([f64; 3], f64)>> {
    let n = unit_axis(n)?;
    if n[0] == 0.0 && n[1] == 0.0 {
        return Ok(if n[2] > 0.0 {
            None
        } else {
            Some(([1.0, 0.0, 0.0], PI))
        });
    }
    Ok(Some(([n[1], -n[0], 0.0], n[2].clamp(-1.0, 1.0).acos())))
}

/// `R^-1 . gen . R`: realizes the conjugated generator
/// `e^{i theta G} H e^{-i theta G}` for `duration`. A zero angle returns the
/// bare generator.
pub fn conjugate_by_rotation(
    generator: &Generator,
    duration: f64,
    mode: usize,
    axis: [f64; 3],
    angle: f64,
) -> Result<PulseSequence> {
    conjugate_by_rotations(generator, duration, &[Rotation { mode, axis, angle }])
}

pub fn conjugate_by_rotations(
    generator: &Generator,
    duration: f64,
    rotations: &[Rotation],
) -> Result<PulseSequence> {
    let active: Vec<_> = rotations.iter().filter(|r| r.angle != 0.0).collect();
    let mut steps = Vec::with_capacity(2 * active.len() + 1);
    for r in &active {
        steps.push(rotation_step(r.mode, r.axis, r.angle)?);
    }
    steps.push(Step::new(generator.clone(), duration));
    for r in active.iter().rev() {
        steps.push(rotation_step(r.mode, r.axis, -r.angle)?);
    }
    PulseSequence::from_steps(steps, SequenceMetadata::method("conjugation"))
}

/// `strength (n.S)^2` on `mode` for `duration`, from a twist rotated onto `n`.
pub fn twist_along(mode: usize, n: [f64; 3], strength: f64, duration: f64) -> Result<PulseSequence> {
    let n = unit_axis(n)?;
    // (n.S)^2 is even in n; keeping n_z >= 0 keeps the rotation within pi/2
    let n = if n[2] < 0.0 { n.map(|x| -x) } else { n };
    let gen = Generator::twist(mode, strength);
    match rotation_to(n)? {
        None => PulseSequence::single(gen, duration),
        Some((axis, angle)) => conjugate_by_rotation(&gen, duration, mode, axis, angle),
    }
}

/// `strength (u.S_a)(v.S_b)` for `duration`, from a QND coupling with both
/// modes rotated.
pub fn qnd_along(
    modes: [usize; 2],
    u: [f64; 3],
    v: [f64; 3],
    strength: f64,
    duration: f64,
) -> Result<PulseSequence> {
    let mut rots = Vec::new();
    for (mode, n) in [(modes[0], u), (modes[1], v)] {
        if let Some((axis, angle)) = rotation_to(n)? {
            rots.push(Rotation { mode, axis, angle });
        }
    }
    conjugate_by_rotations(&Generator::qnd(modes[0], modes[1], strength), duration, &rots)
}

/// Commutator of two blocks, `b^-1 a^-1 b a` in time order. If
/// `a ~ exp(-i A t)` and `b ~ exp(-i B t)` the product is
/// `exp(-i (-i[A,B]) t^2) + O(t^3)`.
pub fn commutator_of_blocks(a: &PulseSequence, b: &PulseSequence) -> Result<PulseSequence> {
    Ok(PulseSequence::concat_all(&[b.inverse()?, a.inverse()?, b.clone(), a.clone()]))
}

/// The four-step gadget `e^{-iA dt} e^{-iB dt} e^{iA dt} e^{iB dt}` (rightmost
/// first). Its effective generator is `-i[A,B]` over time `dt^2`; the unitary
/// error is third order in `dt`.
pub fn group_commutator_gadget(a: &Generator, b: &Generator, dt: f64) -> Result<PulseSequence> {
    let seq = commutator_of_blocks(&PulseSequence::single(a.clone(), dt)?, &PulseSequence::single(b.clone(), dt)?)?;
    let target = a
        .to_polynomial()
        .commutator(&b.to_polynomial())
        .scale(C64::new(0.0, -1.0));
    Ok(seq.with_metadata(
        SequenceMetadata::method("group-commutator")
            .with_target(target, dt * dt)
            .with_order(3),
    ))
}

/// Gadget for `(-A,-B)` at `dt/sqrt 2` followed by the gadget for `(A,B)` at
/// the same step. The third-order error is odd under `(A,B) -> (-A,-B)` and
/// cancels, leaving a fourth-order unitary error for eight steps.
pub fn balanced_commutator_gadget(a: &Generator, b: &Generator, dt: f64) -> Result<PulseSequence> {
    let d = CommutatorScheme::Balanced.block_duration(dt, 2);
    let pa = PulseSequence::single(a.clone(), d)?;
    let pb = PulseSequence::single(b.clone(), d)?;
    let seq = CommutatorScheme::Balanced.compose(&pa, &pb)?;
    let target = a
        .to_polynomial()
        .commutator(&b.to_polynomial())
        .scale(C64::new(0.0, -1.0));
    Ok(seq.with_metadata(
        SequenceMetadata::method("balanced-group-commutator")
            .with_target(target, dt * dt)
            .with_order(4),
    ))
}

/// How commutators of blocks are realized.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommutatorScheme {
    /// Four blocks, unitary error `O(dt^3)` per commutator.
    #[default]
    Plain,
    /// Eight blocks, unitary error `O(dt^4)` per commutator.
    Balanced,
}

impl CommutatorScheme {
    /// Block duration giving total effective time `dt^power` for a
    /// commutator whose blocks scale as `duration^power`.
    pub fn block_duration(self, dt: f64, power: i32) -> f64 {
        match self {
            CommutatorScheme::Plain => dt,
            CommutatorScheme::Balanced => dt * 2f64.powf(-1.0 / f64::from(power)),
        }
    }

    pub fn compose(self, a: &PulseSequence, b: &PulseSequence) -> Result<PulseSequence> {
        match self {
            CommutatorScheme::Plain => commutator_of_blocks(a, b),
            CommutatorScheme::Balanced => Ok(commutator_of_blocks(&a.inverse()?, &b.inverse()?)?
                .concat(&commutator_of_blocks(a, b)?)),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrotterOrder {
    First,
    #[default]
    Second,
}

/// `exp(-i (H_1 + ... + H_k) t)` from parts that each realize
/// `exp(-i H_j t)` and rescale linearly in their non-frame durations.
/// First order repeats `P_1(t/n) ... P_k(t/n)`; second order repeats the
/// palindrome with half steps on all but the last part.
pub fn trotter_compose(parts: &[PulseSequence], n: u64, order: TrotterOrder) -> Result<PulseSequence> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: "at least one repetition is required".into(),
        });
    }
    let h = 1.0 / n as f64;
    let body = match (order, parts.split_last()) {
        (_, None) => PulseSequence::empty(),
        (TrotterOrder::First, _) => {
            PulseSequence::concat_all(&parts.iter().map(|p| p.scaled(h)).collect::<Vec<_>>())
        }
        (TrotterOrder::Second, Some((last, rest))) => {
            let mut seqs: Vec<_> = rest.iter().map(|p| p.scaled(h / 2.0)).collect();
            seqs.push(last.scaled(h));
            seqs.extend(rest.iter().rev().map(|p| p.scaled(h / 2.0)));
            PulseSequence::concat_all(&seqs)
        }
    };
    let (method, local) = match order {
        TrotterOrder::First => ("trotter-1", 2),
        TrotterOrder::Second => ("trotter-2", 3),
    };
    let seq = if n == 1 { body } else { body.repeated(n) };
    Ok(seq.with_metadata(SequenceMetadata::method(method).with_order(local)))
}

/// Sign configurations `(Z_a, Z_b, chi)` of the four QND segments.
pub const QND_CONFIGURATIONS: [(i8, i8, i8); 4] = [(1, 1, 1), (-1, 1, -1), (-1, -1, 1), (1, -1, -1)];

fn pair_parts(pair: &Generator) -> Result<([usize; 2], f64, f64, f64)> {
    match pair {
        Generator::Pair {
            modes,
            omega,
            transmissivity,
            chi,
        } => Ok((*modes, *omega, *transmissivity, *chi)),
        other => Err(Error::InvalidParameter {
            name: "pair",
            reason: format!("expected a pair generator, got {other:?}"),
        }),
    }
}

/// Image of `expr` under the pi rotation about X on `mode`: `Y,Z -> -Y,-Z`.
fn pi_x_image(expr: &PolynomialHamiltonian, mode: usize) -> PolynomialHamiltonian {
    let mut out = PolynomialHamiltonian::zero();
    for (w, c) in expr.terms() {
        let odd = w.iter().filter(|l| l.mode == mode && l.axis != Axis::X).count() % 2 == 1;
        out.add_term(if odd { -c } else { c }, w.to_vec());
    }
    out
}

/// Symbolic sum of the four segment Hamiltonians times `tau/4`. For any pair
/// generator this is `-2 chi tau Z_a Z_b`: the linear and single-mode
/// quadratic terms cancel exactly.
pub fn qnd_segment_sum(pair: &Generator, tau: f64) -> Result<PolynomialHamiltonian> {
    let (modes, ..) = pair_parts(pair)?;
    let mut total = PolynomialHamiltonian::zero();
    for (sa, sb, sc) in QND_CONFIGURATIONS {
        let g = if sc < 0 {
            pair.with_flipped_detuning()
        } else {
            pair.clone()
        };
        let mut h = g.to_polynomial();
        if sa < 0 {
            h = pi_x_image(&h, modes[0]);
        }
        if sb < 0 {
            h = pi_x_image(&h, modes[1]);
        }
        total = &total + &h.scale_real(tau / 4.0);
    }
    Ok(total)
}

/// Four equal segments of the pair generator in the sign configurations
/// `QND_CONFIGURATIONS`. `Z_j -> -Z_j` is a pi rotation about the mode's X
/// axis and the `chi` flip is a detuning flip. The product is exactly
/// `exp(+i 2 chi Z_a Z_b tau)` since every segment is diagonal in `Z`.
pub fn qnd_four_step(pair: &Generator, tau: f64) -> Result<PulseSequence> {
    pair.validate()?;
    let (modes, _, _, chi) = pair_parts(pair)?;
    let x = [1.0, 0.0, 0.0];
    let mut steps = Vec::new();
    for (sa, sb, sc) in QND_CONFIGURATIONS {
        let flipped: Vec<usize> = [(modes[0], sa), (modes[1], sb)]
            .iter()
            .filter(|(_, s)| *s < 0)
            .map(|(m, _)| *m)
            .collect();
        for &m in &flipped {
            steps.push(rotation_step(m, x, PI)?);
        }
        let g = if sc < 0 {
            pair.with_flipped_detuning()
        } else {
            pair.clone()
        };
        steps.push(Step::new(g, tau / 4.0));
        for &m in flipped.iter().rev() {
            steps.push(rotation_step(m, x, -PI)?);
        }
    }
    let target = PolynomialHamiltonian::term(
        C64::new(-2.0 * chi, 0.0),
        vec![
            super::poly::Letter::new(modes[0], Axis::Z),
            super::poly::Letter::new(modes[1], Axis::Z),
        ],
    );
    PulseSequence::from_steps(
        steps,
        SequenceMetadata::method("qnd-four-step").with_target(target, tau),
    )
}

/// `exp(-i strength Z_a Z_b time)` from the pair generator `pair` (its
/// modes are replaced by `modes`): run the four-step for
/// `tau = |strength| time / (2|chi|)` with `chi` signed as `-sign(strength)`.
pub fn qnd_from_pair(pair: &Generator, modes: [usize; 2], strength: f64, time: f64) -> Result<PulseSequence> {
    let (_, omega, transmissivity, chi) = pair_parts(pair)?;
    if strength == 0.0 || time == 0.0 {
        return Ok(PulseSequence::empty());
    }
    if chi == 0.0 {
        return Err(Error::NotRealizable(
            "a QND coupling needs a pair generator with non-zero chi".into(),
        ));
    }
    let tau = strength.abs() * time / (2.0 * chi.abs());
    let pair = Generator::Pair {
        modes,
        omega,
        transmissivity,
        chi: -strength.signum() * chi.abs(),
    };
    qnd_four_step(&pair, tau)
}

/// Replaces every QND step by its four-step realization with `pair`.
pub fn expand_qnd(seq: &PulseSequence, pair: &Generator) -> Result<PulseSequence> {
    fn walk(elements: &[Element], pair: &Generator) -> Result<Vec<Element>> {
        let mut out = Vec::with_capacity(elements.len());
        for e in elements {
            match e {
                Element::Step(Step {
                    generator: Generator::Qnd { modes, strength },
                    duration,
                    ..
                }) => {
                    let s = qnd_from_pair(pair, *modes, *strength, *duration)?;
                    out.extend_from_slice(s.elements());
                }
                Element::Step(s) => out.push(Element::Step(s.clone())),
                Element::Repeat { count, body } => out.push(Element::Repeat {
                    count: *count,
                    body: walk(body, pair)?,
                }),
            }
        }
        Ok(out)
    }
    let mut meta = seq.metadata.clone();
    meta.notes.push("QND steps expanded into pair four-step sequences".into());
    PulseSequence::new(walk(seq.elements(), pair)?, meta)
}

/// Options shared by the polynomial synthesizers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthOptions {
    /// Realize quadratic words by rotated twists and QNDs (true) or apply
    /// them as ideal word generators (false).
    pub lowered: bool,
    pub scheme: CommutatorScheme,
}

impl Default for SynthOptions {
    fn default() -> Self {
        Self {
            lowered: true,
            scheme: CommutatorScheme::Plain,
        }
    }
}

fn block(expr: &PolynomialHamiltonian, duration: f64, opts: SynthOptions) -> Result<PulseSequence> {
    if opts.lowered {
        lower_step(expr, duration)
    } else {
        PulseSequence::single(Generator::word(expr.clone()), duration)
    }
}

fn check_step(dt: f64, time: f64) -> Result<()> {
    if !(dt > 0.0) || !dt.is_finite() || !(time > 0.0) || !time.is_finite() {
        return Err(Error::InvalidParameter {
            name: "dt",
            reason: format!("need dt > 0 and time > 0, got dt = {dt}, time = {time}"),
        });
    }
    Ok(())
}

fn p(s: &str, mode_map: &[usize]) -> PolynomialHamiltonian {
    let e: PolynomialHamiltonian = s.parse().expect("internal expression");
    let mut out = PolynomialHamiltonian::zero();
    for (w, c) in e.terms() {
        let w = w
            .iter()
            .map(|l| super::poly::Letter::new(mode_map[l.mode], l.axis))
            .collect();
        out.add_term(c, w);
    }
    out
}

/// Slice count and adjusted step with `n dt^power = time`.
fn slices(dt: f64, time: f64, power: i32) -> (u64, f64) {
    let n = ((time / dt.powi(power)).round() as u64).max(1);
    (n, (time / n as f64).powf(1.0 / f64::from(power)))
}

/// `exp(-i c X^3 time)` on `mode` from
/// `X^3 = (i/4)[Z^2-Y^2, YZ+ZY] + (i/4)[XZ+ZX, XY+YX] + X/4`.
/// Each slice runs both commutators as gadgets with step `dt` (effective
/// time `dt^2`) and the linear term for `dt^2`; `round(time/dt^2)` slices
/// are repeated with `dt` adjusted to land exactly on `time`.
pub fn synth_x3(mode: usize, coefficient: f64, dt: f64, time: f64, opts: SynthOptions) -> Result<PulseSequence> {
    check_step(dt, time)?;
    let (n, dt) = slices(dt, time, 2);
    let m = [mode];
    let d = opts.scheme.block_duration(dt, 2);
    let half = |s: &str, f: f64| block(&p(s, &m).scale_real(f / 2.0), d, opts);
    // -i[B/2, cA/2] = (ic/4)[A, B]
    let g1 = opts.scheme.compose(&half("YZ+ZY", 1.0)?, &half("Z^2-Y^2", coefficient)?)?;
    let g2 = opts.scheme.compose(&half("XY+YX", 1.0)?, &half("XZ+ZX", coefficient)?)?;
    let lin = PulseSequence::single(Generator::linear(mode, [coefficient / 4.0, 0.0, 0.0]), dt * dt)?;
    let slice = PulseSequence::concat_all(&[g1, g2, lin]);
    let target = p("X^3", &m).scale_real(coefficient);
    let mut meta = SequenceMetadata::method(format!("x3-{}", scheme_name(opts.scheme)))
        .with_target(target, time)
        .with_order(scheme_order(opts.scheme));
    meta.notes.push(format!("{n} slices, commutator step {dt}"));
    Ok(slice.repeated(n).with_metadata(meta))
}

/// `exp(-i c X_a^3 Z_b time)` from
/// `X_a^3 Z_b = X_a Z_b/4 + (1/4)[Z_a^2-Y_a^2, [Z_a^2, X_a Z_b]]
///            - (1/4)[X_a Z_a + Z_a X_a, [X_a^2, Z_a Z_b]]`.
/// Nested gadgets `[R,[P,Q]]` realize `-[R,[P,Q]]` over `dt^3`; slices are
/// repeated `round(time/dt^3)` times.
pub fn synth_x3z(modes: [usize; 2], coefficient: f64, dt: f64, time: f64, opts: SynthOptions) -> Result<PulseSequence> {
    check_step(dt, time)?;
    if modes[0] == modes[1] {
        return Err(Error::InvalidParameter {
            name: "modes",
            reason: "X^3 Z needs two distinct modes".into(),
        });
    }
    let (n, dt) = slices(dt, time, 3);
    let m = [modes[0], modes[1]];
    let d = opts.scheme.block_duration(dt, 3);
    let b = |s: &str, f: f64| block(&p(s, &m).scale_real(f), d, opts);
    let nested = |r: PulseSequence, pp: PulseSequence, q: PulseSequence| -> Result<PulseSequence> {
        let inner = commutator_of_blocks(&pp, &q)?;
        opts.scheme.compose(&r, &inner)
    };
    let c = coefficient;
    let t2 = nested(b("Z1^2-Y1^2", -c / 4.0)?, b("Z1^2", 1.0)?, b("X1 Z2", 1.0)?)?;
    let t3 = nested(b("X1 Z1 + Z1 X1", c / 4.0)?, b("X1^2", 1.0)?, b("Z1 Z2", 1.0)?)?;
    let lin = block(&p("X1 Z2", &m).scale_real(c / 4.0), dt.powi(3), opts)?;
    let slice = PulseSequence::concat_all(&[lin, t2, t3]);
    let target = p("X1^3 Z2", &m).scale_real(c);
    let mut meta = SequenceMetadata::method(format!("x3z-{}", scheme_name(opts.scheme)))
        .with_target(target, time)
        .with_order(scheme_order(opts.scheme) + 1);
    meta.notes.push(format!("{n} slices, commutator step {dt}"));
    Ok(slice.repeated(n).with_metadata(meta))
}

fn scheme_name(s: CommutatorScheme) -> &'static str {
    match s {
        CommutatorScheme::Plain => "plain",
        CommutatorScheme::Balanced => "balanced",
    }
}

fn scheme_order(s: CommutatorScheme) -> u32 {
    match s {
        CommutatorScheme::Plain => 3,
        CommutatorScheme::Balanced => 4,
    }
}

/// Two-axis countertwisting targets built from rotated twists.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TactForm {
    /// `X^2 - Y^2`: `+Z^2` rotated onto `x`, `-Z^2` rotated onto `y`.
    XxMinusYy,
    /// `XY + YX = (n+.S)^2 - (n-.S)^2` with `n+- = (x +- y)/sqrt 2`.
    XyPlusYx,
}

impl TactForm {
    pub fn target(self, mode: usize) -> PolynomialHamiltonian {
        match self {
            TactForm::XxMinusYy => p("X^2 - Y^2", &[mode]),
            TactForm::XyPlusYx => p("XY + YX", &[mode]),
        }
    }

    fn axes(self) -> [[f64; 3]; 2] {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            TactForm::XxMinusYy => [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            TactForm::XyPlusYx => [[r, r, 0.0], [r, -r, 0.0]],
        }
    }
}

/// `exp(-i strength T time)` for a TACT form `T` from the two signed,
/// rotated twists composed by a Trotter product with `n` repetitions.
pub fn tact(
    mode: usize,
    form: TactForm,
    strength: f64,
    time: f64,
    n: u64,
    order: TrotterOrder,
) -> Result<PulseSequence> {
    let [a, b] = form.axes();
    let parts = [
        twist_along(mode, a, strength, time)?,
        twist_along(mode, b, -strength, time)?,
    ];
    let seq = trotter_compose(&parts, n, order)?;
    let mut meta = seq.metadata.clone();
    meta.target = Some(form.target(mode).scale_real(strength));
    meta.simulated_time = Some(time);
    Ok(seq.with_metadata(meta))
}
