// Classify the NRW counties by population and write the map as SVG into the
// system temp directory.

use sitelens::load_bundle;
use sitelens::present::{build_choropleth, class_color, render_choropleth_svg, Scheme};

fn main() {
    let snap = load_bundle(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/nrw")).unwrap();
    let layer = build_choropleth(&snap, "NRW", "population", "2016-01".parse().unwrap(), Scheme::Quantile, 4).unwrap();

    println!("breaks: {:?}", layer.classification.breaks);
    for s in &layer.sites {
        println!("  {:<10} {:>8} class {} {}", s.name, s.value.unwrap_or(f64::NAN), s.class, class_color(s.class, layer.classification.k));
    }
    for label in &layer.legend {
        println!("  legend: {label}");
    }

    let out = std::env::temp_dir().join("nrw_population.svg");
    std::fs::write(&out, render_choropleth_svg(&layer, 640, 480)).unwrap();
    println!("wrote {}", out.display());
}
