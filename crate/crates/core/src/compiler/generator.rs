use serde::{Deserialize, Serialize};

use super::poly::{Axis, PolynomialHamiltonian};
use crate::error::{Error, Result};
use crate::spin::{Space, SpinOperator, C64};

/// A Hamiltonian the hardware can switch on directly. Mode indices are
/// zero-based.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Generator {
    /// `c_x X + c_y Y + c_z Z` (microwave drive and Zeeman detuning).
    /// Negated by a microwave phase flip.
    Linear { mode: usize, coefficients: [f64; 3] },
    /// `sign * strength * Z^2` (one-axis twisting from a detuned cavity).
    /// Negated by flipping the cavity detuning.
    Twist { mode: usize, sign: i8, strength: f64 },
    /// `omega (Z_a + T_B Z_b) + chi (Z_a - Z_b)^2` from two cavities in a
    /// Michelson interferometer. Flipping the detuning negates `chi` only.
    Pair {
        modes: [usize; 2],
        omega: f64,
        transmissivity: f64,
        chi: f64,
    },
    /// `strength * Z_a Z_b`, realized by the four-step pair sequence.
    Qnd { modes: [usize; 2], strength: f64 },
    /// An explicit formally Hermitian polynomial, applied as an ideal gate.
    Word { expr: PolynomialHamiltonian },
}

fn z(mode: usize) -> PolynomialHamiltonian {
    PolynomialHamiltonian::letter(mode, Axis::Z)
}

impl Generator {
    pub fn linear(mode: usize, coefficients: [f64; 3]) -> Self {
        Generator::Linear { mode, coefficients }
    }

    /// Twist with signed strength `s`: `s Z^2`.
    pub fn twist(mode: usize, s: f64) -> Self {
        Generator::Twist {
            mode,
            sign: if s < 0.0 { -1 } else { 1 },
            strength: s.abs(),
        }
    }

    pub fn qnd(a: usize, b: usize, strength: f64) -> Self {
        Generator::Qnd {
            modes: [a, b],
            strength,
        }
    }

    pub fn word(expr: PolynomialHamiltonian) -> Self {
        Generator::Word { expr }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |name: &'static str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite, got {v}"),
                })
            }
        };
        match self {
            Generator::Linear { coefficients, .. } => {
                for &c in coefficients {
                    finite("coefficients", c)?;
                }
            }
            Generator::Twist { sign, strength, .. } => {
                if *sign != 1 && *sign != -1 {
                    return Err(Error::InvalidParameter {
                        name: "sign",
                        reason: format!("must be +1 or -1, got {sign}"),
                    });
                }
                finite("strength", *strength)?;
                if *strength < 0.0 {
                    return Err(Error::InvalidParameter {
                        name: "strength",
                        reason: "twist strength is a magnitude; use `sign`".into(),
                    });
                }
            }
            Generator::Pair {
                modes,
                omega,
                transmissivity,
                chi,
            } => {
                distinct(modes)?;
                finite("omega", *omega)?;
                finite("chi", *chi)?;
                if !(0.0..=1.0).contains(transmissivity) {
                    return Err(Error::InvalidParameter {
                        name: "transmissivity",
                        reason: format!("must lie in [0, 1], got {transmissivity}"),
                    });
                }
            }
            Generator::Qnd { modes, strength } => {
                distinct(modes)?;
                finite("strength", *strength)?;
            }
            Generator::Word { expr } => {
                if !expr.is_formally_hermitian() {
                    return Err(Error::NotHermitian {
                        deviation: expr.hermitian_defect(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Symbolic form of the generator.
    pub fn to_polynomial(&self) -> PolynomialHamiltonian {
        let re = |v: f64| C64::new(v, 0.0);
        match self {
            Generator::Linear { mode, coefficients } => {
                let mut p = PolynomialHamiltonian::zero();
                for (axis, &c) in Axis::ALL.iter().zip(coefficients) {
                    if c != 0.0 {
                        p.add_term(re(c), vec![super::poly::Letter::new(*mode, *axis)]);
                    }
                }
                p
            }
            Generator::Twist {
                mode,
                sign,
                strength,
            } => z(*mode).pow(2).scale_real(f64::from(*sign) * strength),
            Generator::Pair {
                modes: [a, b],
                omega,
                transmissivity,
                chi,
            } => {
                let lin = &z(*a) + &z(*b).scale_real(*transmissivity);
                let diff = &z(*a) - &z(*b);
                &lin.scale_real(*omega) + &diff.pow(2).scale_real(*chi)
            }
            Generator::Qnd {
                modes: [a, b],
                strength,
            } => (&z(*a) * &z(*b)).scale_real(*strength),
            Generator::Word { expr } => expr.clone(),
        }
    }

    /// Hermitian matrix of the generator on `space`.
    pub fn materialize(&self, space: &Space) -> Result<SpinOperator> {
        self.validate()?;
        self.to_polynomial().materialize(space)?.into_hermitian()
    }

    /// Highest zero-based mode index the generator acts on.
    pub fn max_mode(&self) -> usize {
        match self {
            Generator::Linear { mode, .. } | Generator::Twist { mode, .. } => *mode,
            Generator::Pair { modes, .. } | Generator::Qnd { modes, .. } => modes[0].max(modes[1]),
            Generator::Word { expr } => expr.num_modes().saturating_sub(1),
        }
    }

    /// The sign-flipped primitive, `-H`, using the documented hardware knob.
    /// A pair generator with non-zero `omega` has no such knob: the detuning
    /// flip reverses `chi` but leaves the linear term.
    pub fn negated(&self) -> Result<Self> {
        Ok(match self {
            Generator::Linear { mode, coefficients } => Generator::Linear {
                mode: *mode,
                coefficients: coefficients.map(|c| -c),
            },
            Generator::Twist {
                mode,
                sign,
                strength,
            } => Generator::Twist {
                mode: *mode,
                sign: -sign,
                strength: *strength,
            },
            Generator::Pair { omega, .. } if *omega != 0.0 => {
                return Err(Error::UnflippablePrimitive(format!(
                    "pair generator with omega = {omega}"
                )))
            }
            Generator::Pair { .. } => self.with_flipped_detuning(),
            Generator::Qnd { modes, strength } => Generator::Qnd {
                modes: *modes,
                strength: -strength,
            },
            Generator::Word { expr } => Generator::Word { expr: -expr },
        })
    }

    /// Effect of reversing the cavity detuning: twists and the pair `chi`
    /// change sign, the pair `omega` is even in the detuning.
    pub fn with_flipped_detuning(&self) -> Self {
        match self {
            Generator::Twist {
                mode,
                sign,
                strength,
            } => Generator::Twist {
                mode: *mode,
                sign: -sign,
                strength: *strength,
            },
            Generator::Pair {
                modes,
                omega,
                transmissivity,
                chi,
            } => Generator::Pair {
                modes: *modes,
                omega: *omega,
                transmissivity: *transmissivity,
                chi: -chi,
            },
            other => other.clone(),
        }
    }
}

fn distinct(modes: &[usize; 2]) -> Result<()> {
    if modes[0] == modes[1] {
        return Err(Error::InvalidParameter {
            name: "modes",
            reason: format!("two-mode generator needs distinct modes, got {modes:?}"),
        });
    }
    Ok(())
}
