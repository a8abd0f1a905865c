#![allow(dead_code)]

use std::path::PathBuf;

use sitelens::{load_bundle, DatasetSnapshot, FactorId, SiteId, TimePoint};

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/nrw")
}

pub fn broken_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/broken")
}

pub fn fixture() -> DatasetSnapshot {
    load_bundle(fixture_dir()).expect("fixture loads")
}

pub fn t0() -> TimePoint {
    "2016-01".parse().unwrap()
}

pub fn ids(list: &[&str]) -> Vec<SiteId> {
    list.iter().map(|s| SiteId::from(*s)).collect()
}

pub fn fids(list: &[&str]) -> Vec<FactorId> {
    list.iter().map(|s| FactorId::from(*s)).collect()
}

// Published 2016 county populations and incomes of the case study.
pub const COESFELD: (&str, f64) = ("05558", 220_662.0);
pub const GUETERSLOH: (&str, f64) = ("05754", 353_944.0);
pub const SOEST: (&str, f64) = ("05974", 306_131.0);
pub const UNNA: (&str, f64) = ("05978", 416_679.0);
pub const INCOME_GUETERSLOH: f64 = 18_102.0;
pub const INCOME_UNNA: f64 = 14_451.0;
pub const HERZEBROCK_CLARHOLZ: &str = "05754012";
