use augvis_core::spec::AggOp;
use augvis_testkit::{agree, gen, rng};
use rand::Rng;

const TABLES: u64 = 100;
const TOL: f64 = 1e-9;

fn check(name: &str, seed: u64, r: agree::Agreement) {
    match r {
        Ok(worst) => assert!(worst <= TOL, "{name} seed {seed}: |Δ| = {worst}"),
        Err(e) => panic!("{name} seed {seed}: {e}"),
    }
}

#[test]
fn aggregate_matches_reference() {
    for seed in 0..TABLES {
        let t = gen::table(&mut rng(seed), 0);
        for op in [AggOp::Sum, AggOp::Count, AggOp::Mean, AggOp::Min, AggOp::Max] {
            check(op.name(), seed, agree::aggregate(&t, op));
        }
    }
}

#[test]
fn stack_matches_reference() {
    for seed in 0..TABLES {
        let t = gen::table(&mut rng(seed), 0);
        check("stack", seed, agree::stack(&t, false));
        check("stack sorted", seed, agree::stack(&t, true));
    }
}

#[test]
fn pie_matches_reference() {
    for seed in 0..TABLES {
        let mut r = rng(seed);
        let start = r.gen_range(-3.0..3.0);
        let t = gen::table(&mut r, 0);
        check("pie", seed, agree::pie(&t, start));
    }
}

#[test]
fn bin_matches_reference() {
    for seed in 0..TABLES {
        let mut r = rng(seed);
        let maxbins = r.gen_range(1..=30);
        let t = gen::table(&mut r, 1);
        check("bin", seed, agree::bin(&t, maxbins));
    }
}
