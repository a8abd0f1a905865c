// Walk the hierarchy from the nation down to municipalities and watch
// values roll up, including how much of each region the data covers.

use sitelens::{load_bundle, DatasetSnapshot, TimePoint};

fn show(snap: &DatasetSnapshot, id: &str, depth: usize, t: TimePoint) {
    let site = snap.site(id).unwrap();
    let pop = snap.aggregate_value(id, "population", t).unwrap();
    let income = snap.aggregate_value(id, "income_per_household", t).unwrap();
    let fmt = |v: Option<f64>| v.map_or("-".to_owned(), |v| format!("{v:.0}"));
    println!(
        "{:indent$}{} [{}]  population {} (coverage {:.2})  income/household {}",
        "",
        site.name,
        snap.levels()[usize::from(site.level)].name,
        fmt(pop.value),
        pop.coverage,
        fmt(income.value),
        indent = depth * 2
    );
    for child in snap.children(id).unwrap() {
        show(snap, child.id.as_str(), depth + 1, t);
    }
}

fn main() {
    let snap = load_bundle(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/nrw")).unwrap();
    show(&snap, "DE", 0, TimePoint::year(2016));

    let path: Vec<_> = snap.path_to_root("05754012002").unwrap().iter().rev().map(|s| s.name.as_str()).collect();
    println!("roll-up path: {}", path.join(" > "));
}
