//! Exploratory site selection over an administrative hierarchy.
//!
//! A [`DatasetSnapshot`] holds sites, a factor catalog and per-site time
//! series. On top of it sit hierarchy navigation and aggregation,
//! where/when/what queries with comparison and checklist scoring, view
//! builders (choropleth, series, insights, tables, SVG export), an HTTP
//! service with atomic snapshot reload, and a command line front end.

pub mod cli;
pub mod error;
pub mod hierarchy;
pub mod ingest;
pub mod model;
pub mod present;
pub mod query;
pub mod service;

pub use error::{Error, Result};
pub use hierarchy::AggregatedValue;
pub use ingest::{load_bundle, Bundle};
pub use model::{DatasetSnapshot, FactorId, SiteId, TimePoint};

#[cfg(test)]
pub(crate) mod testutil {
    use crate::model::{DatasetSnapshot, TimePoint};

    pub fn fixture() -> DatasetSnapshot {
        crate::load_bundle(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/nrw")).expect("fixture loads")
    }

    pub fn t0() -> TimePoint {
        TimePoint::year(2016)
    }
}
