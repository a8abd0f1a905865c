// Load a data bundle, print what it holds, and show how a broken bundle is
// reported.

use sitelens::{load_bundle, Error};

fn main() {
    let root = env!("CARGO_MANIFEST_DIR");
    let snap = load_bundle(format!("{root}/fixtures/nrw")).expect("fixture loads");

    let p = snap.provenance();
    println!("{} (stamp {})", p.source, p.stamp);
    for level in snap.levels() {
        let n = snap.level_members(level.ordinal, None).unwrap().len();
        println!("  level {} {:<13} {n} sites", level.ordinal, level.name);
    }
    for f in snap.factors() {
        println!("  factor {:<22} {:<10} {:?}", f.id, f.unit, f.aggregation);
    }
    println!("  {} stored values", snap.value_count());

    match load_bundle(format!("{root}/fixtures/broken")) {
        Err(Error::Validation(report)) => {
            println!("broken bundle rejected:");
            for issue in report.errors() {
                println!("  {issue}");
            }
        }
        other => panic!("expected a validation failure, got {other:?}"),
    }
}
