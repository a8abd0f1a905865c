// Generate a seeded synthetic hierarchy, load it and check that parents
// carry the sum of their children.

use sitelens::ingest::{generate_synthetic_with, SynthSpec};

fn main() {
    let mut spec = SynthSpec::new(vec![1, 4, 16, 64], 3, 12, 42);
    spec.missing_rate = 0.1;
    spec.parent_store_rate = 0.5;
    let bundle = generate_synthetic_with(&spec);
    let snap = bundle.into_snapshot().unwrap();
    println!("{} sites, {} factors, {} values, stamp {}", snap.sites().len(), snap.factors().len(), snap.value_count(), bundle.digest());

    let t = "2000-06".parse().unwrap();
    for state in snap.children("s0_00000").unwrap() {
        let total = snap.aggregate_value(state.id.as_str(), "f00", t).unwrap();
        let children: f64 = snap
            .children(state.id.as_str())
            .unwrap()
            .iter()
            .filter_map(|c| snap.aggregate_value(c.id.as_str(), "f00", t).unwrap().value)
            .sum();
        println!("{}: f00 = {:?}, sum of children = {children}, coverage {:.2}", state.name, total.value, total.coverage);
        assert_eq!(total.value, Some(children));
    }
}
