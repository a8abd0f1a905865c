// When was Hamburg's unemployment rate below 7 %? The same reference value
// drives the horizontal line of the series view.

use sitelens::load_bundle;
use sitelens::present::build_series_view;
use sitelens::query::{search_when, Condition};

fn main() {
    let snap = load_bundle(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/nrw")).unwrap();

    for interval in search_when(&snap, "02", "unemployment_rate", &Condition::Lt(7.0)).unwrap() {
        println!("below 7 %: {}..{}", interval.from, interval.to);
    }

    let view = build_series_view(&snap, &["02".into()], "unemployment_rate", None, Some(7.0), None).unwrap();
    for p in &view.series[0].points {
        let mark = if p.value < 7.0 { "  <" } else { "" };
        println!("{}  {:>4} {}{mark}", p.t, p.value, view.unit);
    }
}
