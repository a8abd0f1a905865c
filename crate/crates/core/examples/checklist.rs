// Checklist scoring two ways: a hand-rated matrix for three candidate
// locations, and ratings derived from data with explicit thresholds.

use sitelens::load_bundle;
use sitelens::model::Direction;
use sitelens::query::{checklist_score, score_ratings, ChecklistCriterion, Rating};

fn main() {
    let factors = ["resources", "income structure", "consumer structure", "infrastructure", "taxes"].map(Into::into);
    let rated = |cells: [&str; 5]| cells.map(|c| Rating::from_symbol(c).unwrap()).to_vec();
    let table = score_ratings(
        &["L1".into(), "L2".into(), "L3".into()],
        &factors,
        &[1.0; 5],
        &[rated(["+", "+", "-", "+", "o"]), rated(["+", "-", "o", "+", "o"]), rated(["o", "+", "o", "+", "+"])],
    )
    .unwrap();
    for row in &table.rows {
        let cells: Vec<_> = row.cells.iter().map(|c| c.rating.symbol()).collect();
        println!("{}. {}  {}  total {}", row.rank, row.site_id, cells.join(" "), row.total);
    }

    let snap = load_bundle(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/nrw")).unwrap();
    let criteria = [
        ChecklistCriterion {
            factor_id: "population".into(),
            weight: 2.0,
            plus_threshold: 400_000.0,
            minus_threshold: 300_000.0,
            direction: Direction::HigherIsBetter,
        },
        ChecklistCriterion {
            factor_id: "income_per_household".into(),
            weight: 1.0,
            plus_threshold: 18_000.0,
            minus_threshold: 15_000.0,
            direction: Direction::HigherIsBetter,
        },
    ];
    let counties = ["05558", "05754", "05974", "05978"].map(Into::into);
    let table = checklist_score(&snap, &counties, &criteria, "2016-01".parse().unwrap()).unwrap();
    println!();
    for row in &table.rows {
        let name = &snap.site(row.site_id.as_str()).unwrap().name;
        let cells: Vec<String> =
            row.cells.iter().map(|c| format!("{}{}", c.rating, if c.missing { "?" } else { "" })).collect();
        println!("{}. {name:<10} {}  total {}", row.rank, cells.join(" "), row.total);
    }
    println!("(? = no data, rated -)");
}
