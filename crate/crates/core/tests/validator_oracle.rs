use augvis_core::augment::compile;
use augvis_core::spec::ArMode;
use augvis_core::validator::{oracle_for, validate_compiled, Verdict};
use augvis_testkit::agree::first_differing_stage;
use augvis_testkit::{gen, rng};

const CASES: u64 = 200;

#[test]
fn validator_agrees_with_scene_oracle() {
    let mut disagreements = Vec::new();
    let mut invalid = 0;
    for seed in 0..CASES {
        let (doc, spec) = gen::extend_spec(&mut rng(seed));
        let compiled = compile(&spec).unwrap_or_else(|e| panic!("seed {seed}: {e}\n{doc:#}"));
        let report = validate_compiled(&spec, &compiled).unwrap();
        let diff_empty = report.stage_diffs.is_empty() && report.scale_diffs.is_empty();
        let oracle = oracle_for(&compiled).unwrap();
        if diff_empty != oracle.valid {
            disagreements.push((seed, report.to_text(), oracle.flagged.len()));
        }
        if !diff_empty {
            invalid += 1;
        }

        let base = &compiled.base.traces["t"];
        let aug = &compiled.augmented[0].traces["t"];
        let first = report.stage_diffs.first().map(|d| d.stage_index);
        assert_eq!(first, first_differing_stage(base, aug), "seed {seed}");
    }
    assert!(disagreements.is_empty(), "{disagreements:#?}");
    // Both outcomes must be exercised for the agreement to mean anything.
    assert!(invalid > 20 && invalid < CASES - 20, "{invalid} invalid cases");
}

#[test]
fn multiple_view_is_never_invalid() {
    for seed in 0..50 {
        let (_, spec) = gen::nested_spec(&mut rng(1000 + seed), "multipleView");
        assert_eq!(spec.ar.as_ref().unwrap().mode, ArMode::MultipleView);
        let compiled = compile(&spec).unwrap();
        let report = validate_compiled(&spec, &compiled).unwrap();
        assert_ne!(report.verdict, Verdict::Invalid, "seed {seed}");
    }
}

#[test]
fn composite_never_diffs_stages() {
    for seed in 0..50 {
        let (_, spec) = gen::nested_spec(&mut rng(2000 + seed), "composite");
        let compiled = compile(&spec).unwrap();
        let report = validate_compiled(&spec, &compiled).unwrap();
        assert!(report.stage_diffs.is_empty(), "seed {seed}");
    }
}
