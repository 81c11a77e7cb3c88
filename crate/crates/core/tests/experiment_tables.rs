use proptest::prelude::*;
use qcv_core::experiments::{
    run_fig2, run_overlap_study, run_squeeze_protocols, Fig2Config, OverlapConfig, SqueezeConfig, SqueezeProtocol,
};
use qcv_core::ResultTable;

fn finite() -> impl Strategy<Value = f64> {
    prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO
}

proptest! {
    #[test]
    fn csv_round_trip_is_bit_exact(rows in prop::collection::vec(prop::collection::vec(finite(), 3), 0..20)) {
        let mut t = ResultTable::new("prop", &[("a", "s"), ("b value", "1"), ("c", "rad/s")]);
        for r in &rows {
            t.push(r.clone()).unwrap();
        }
        let back = ResultTable::read_csv(t.to_csv_string().unwrap().as_bytes()).unwrap();
        prop_assert_eq!(back.columns(), t.columns());
        for (x, y) in back.rows().iter().flatten().zip(t.rows().iter().flatten()) {
            prop_assert_eq!(x.to_bits(), y.to_bits());
        }
    }
}

#[test]
fn saved_tables_reload_with_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let t = run_squeeze_protocols(&SqueezeConfig {
        time_points: 5,
        ..SqueezeConfig::new(SqueezeProtocol::Oat, 20)
    })
    .unwrap();
    t.save(dir.path(), "squeeze").unwrap();
    let back = ResultTable::load(dir.path(), "squeeze").unwrap();
    assert_eq!(back.rows(), t.rows());
    assert_eq!(back.metadata, t.metadata);
}

#[test]
fn identical_configs_give_identical_tables() {
    let cfg = OverlapConfig {
        atoms: vec![30, 60],
        time_points: 9,
        ..OverlapConfig::default()
    };
    let a = run_overlap_study(&cfg).unwrap().to_csv_string().unwrap();
    let b = run_overlap_study(&cfg).unwrap().to_csv_string().unwrap();
    assert_eq!(a, b);
}

#[test]
fn fig2_metadata_lists_assumed_parameters() {
    let out = run_fig2(&Fig2Config::reference()).unwrap();
    for table in [&out.map, &out.inset] {
        let notes = table.metadata.assumptions.join("\n");
        assert!(notes.contains("R_B"), "{notes}");
        assert!(notes.contains("linewidth_ratio"), "{notes}");
    }
}
