// The side-panel content for a selection of counties: a pie over the first
// factor, bars for every factor, child statistics and the raw data table.

use sitelens::load_bundle;
use sitelens::present::{build_insights, child_statistics, data_table};

fn main() {
    let snap = load_bundle(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/nrw")).unwrap();
    let t = "2016-01".parse().unwrap();
    let sites = ["05558", "05974", "05978"].map(Into::into);
    let factors = ["population".into(), "income_per_household".into()];

    let charts = build_insights(&snap, &sites, &factors, t).unwrap();
    for slice in &charts.pie {
        println!("pie  {:<6} {:>6.1} %", slice.site_id, slice.proportion * 100.0);
    }
    for bar in &charts.bars {
        println!("bar  {:<6} {:<21} {}", bar.site_id, bar.factor_id, "#".repeat((bar.length * 30.0).round() as usize));
    }
    for (site, factor) in &charts.missing_cells {
        println!("no data: {site} {factor}");
    }

    let stats = child_statistics(&snap, "NRW", "population", t).unwrap();
    println!("NRW counties: n {} mean {:.1} min {:?} max {:?} sd {:.1}", stats.n, stats.mean.unwrap(), stats.min.unwrap(), stats.max.unwrap(), stats.stddev.unwrap());

    print!("{}", data_table(&snap, &sites, &factors, t).unwrap().to_csv());
}
