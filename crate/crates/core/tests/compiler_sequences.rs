use proptest::prelude::*;
use qcv_core::compiler::{
    lower, qnd_four_step, sequence_to_unitary, synth_x3z, unitarity_deviation, Axis, Generator, Letter,
    PolynomialHamiltonian, PulseSequence, SynthOptions,
};
use qcv_core::spin::{Space, C64};

fn axis() -> impl Strategy<Value = Axis> {
    (0usize..3).prop_map(Axis::from_index)
}

fn word() -> impl Strategy<Value = Vec<Letter>> {
    prop::collection::vec((0usize..3, axis()).prop_map(|(m, a)| Letter::new(m, a)), 1..4)
}

fn polynomial() -> impl Strategy<Value = PolynomialHamiltonian> {
    prop::collection::vec((-50i32..50, word()), 1..5).prop_map(|terms| {
        let mut p = PolynomialHamiltonian::zero();
        for (c, w) in terms {
            p.add_term(C64::new(f64::from(c) / 8.0, 0.0), w);
        }
        p
    })
}

fn generator() -> impl Strategy<Value = Generator> {
    prop_oneof![
        (0usize..2, -2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0).prop_map(|(m, a, b, c)| Generator::linear(m, [a, b, c])),
        (0usize..2, -2.0f64..2.0).prop_map(|(m, s)| Generator::twist(m, s)),
        (-2.0f64..2.0).prop_map(|s| Generator::qnd(0, 1, s)),
        (0.05f64..0.95, -2.0f64..2.0).prop_map(|(tb, chi)| Generator::Pair {
            modes: [0, 1],
            omega: 0.0,
            transmissivity: tb,
            chi,
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn display_parse_round_trip(p in polynomial()) {
        let back: PolynomialHamiltonian = p.to_string().parse().unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn sign_flip_negates_the_generator(g in generator()) {
        let space = Space::from_atoms(&[3, 2]).unwrap();
        let h = g.materialize(&space).unwrap();
        let minus = g.negated().unwrap().materialize(&space).unwrap();
        prop_assert!((&h + &minus).max_norm() < 1e-12);
    }

    #[test]
    fn sequence_json_round_trip(p in polynomial(), dt in 0.05f64..0.5) {
        let Ok(expr) = p.symmetrized() else { return Ok(()) };
        let Ok(seq) = lower(&expr, 0.3, dt) else { return Ok(()) };
        let text = serde_json::to_string(&seq).unwrap();
        let back: PulseSequence = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, seq);
    }

    #[test]
    fn lowered_sequences_are_unitary(p in polynomial()) {
        let Ok(expr) = p.symmetrized() else { return Ok(()) };
        let Ok(seq) = lower(&expr, 0.5, 0.1) else { return Ok(()) };
        let space = Space::from_atoms(&vec![2; expr.num_modes().max(1)]).unwrap();
        let u = sequence_to_unitary(&seq, &space).unwrap();
        prop_assert!(unitarity_deviation(&u) < 1e-10);
    }
}

#[test]
fn inverse_undoes_a_sequence() {
    let pair = Generator::Pair {
        modes: [0, 1],
        omega: 0.0,
        transmissivity: 0.5,
        chi: 1.0,
    };
    let seq = qnd_four_step(&pair, 0.2).unwrap();
    let both = seq.concat(&seq.inverse().unwrap());
    let space = Space::from_atoms(&[3, 3]).unwrap();
    let u = sequence_to_unitary(&both, &space).unwrap();
    assert!((u - nalgebra::DMatrix::identity(16, 16)).camax() < 1e-12);
}

#[test]
fn x3z_sequence_is_unitary_and_targets_the_word() {
    let seq = synth_x3z([0, 1], 1.0, 0.2, 0.01, SynthOptions::default()).unwrap();
    let space = Space::from_atoms(&[3, 2]).unwrap();
    assert!(unitarity_deviation(&sequence_to_unitary(&seq, &space).unwrap()) < 1e-10);
    let target: PolynomialHamiltonian = "X1^3 Z2".parse().unwrap();
    assert_eq!(seq.metadata.target, Some(target));
}
