// Side by side: Gütersloh has the higher income per household, Unna the
// larger population.

use sitelens::load_bundle;
use sitelens::query::compare_sites;

fn main() {
    let snap = load_bundle(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/nrw")).unwrap();
    let sites = ["05754".into(), "05978".into()];
    let factors = ["population".into(), "income_per_household".into(), "supermarket_count".into()];
    let cmp = compare_sites(&snap, &sites, &factors, "2016-01".parse().unwrap()).unwrap();

    print!("{:<22}", "");
    for s in &sites {
        print!("{:>12}", snap.site(s.as_str()).unwrap().name);
    }
    println!();
    for (j, f) in factors.iter().enumerate() {
        print!("{:<22}", f.as_str());
        for row in &cmp.matrix {
            print!("{:>12}", row[j].value.map_or("-".into(), |v| v.to_string()));
        }
        let best = cmp.winner(f.as_str()).map_or("-", |s| s.as_str());
        println!("   best: {best} ({})", cmp.rankings[j].direction.as_str());
    }
}
