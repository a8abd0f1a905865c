// Rank the counties of North Rhine-Westphalia by population, then screen
// Gütersloh's districts for a discounter that needs 2,500 inhabitants and no
// competing supermarket.

use sitelens::load_bundle;
use sitelens::query::{search_where, RankKey, SortOrder, WhereQuery};

fn main() {
    let snap = load_bundle(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/nrw")).unwrap();
    let t = "2016-01".parse().unwrap();

    let ranking = WhereQuery {
        level: "county".into(),
        scope: Some("NRW".into()),
        t,
        predicates: vec![],
        rank_by: vec![RankKey("population".into(), SortOrder::Desc)],
        limit: None,
    };
    println!("counties by population:");
    for m in search_where(&snap, &ranking).unwrap() {
        println!("  {}. {:<10} {}", m.rank, m.name, m.value_of("population").unwrap());
    }

    let screening = WhereQuery {
        level: "district".into(),
        scope: Some("05754".into()),
        t,
        predicates: vec!["population>=2500".parse().unwrap(), "supermarket_count = 0".parse().unwrap()],
        rank_by: vec![RankKey("income_per_household".into(), SortOrder::Desc)],
        limit: None,
    };
    println!("districts with >= 2500 inhabitants and no supermarket:");
    for m in search_where(&snap, &screening).unwrap() {
        println!(
            "  {} (population {}, income/household {})",
            m.name,
            m.value_of("population").unwrap(),
            m.value_of("income_per_household").unwrap()
        );
    }
}
