//! Core types shared by every other module: sites of the administrative
//! hierarchy, the factor catalog, time points and observations.

mod geometry;
mod snapshot;
mod validate;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

pub use geometry::{Geometry, Ring};
pub use snapshot::{DatasetSnapshot, Provenance, Series, SnapshotParts};
pub use validate::{validate_snapshot, Issue, Severity, ValidationReport};

macro_rules! string_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                Self(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }

        impl std::borrow::Borrow<str> for $name {
            fn borrow(&self) -> &str {
                &self.0
            }
        }
    };
}

string_id!(
    /// Stable, opaque identifier of a site (e.g. an official region key).
    SiteId
);
string_id!(
    /// Identifier of a location factor in the catalog.
    FactorId
);

/// One level of the administrative hierarchy. Ordinal 0 is the root.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdminLevel {
    pub ordinal: u8,
    pub name: String,
}

/// A node of the administrative hierarchy. Sites are static: their
/// position and shape never change over time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Site {
    pub id: SiteId,
    pub name: String,
    pub level: u8,
    pub parent_id: Option<SiteId>,
    pub geometry_ref: Option<SiteId>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Transportation,
    Labor,
    RawMaterials,
    Markets,
    IndustrialSite,
    Utilities,
    GovernmentAttitude,
    TaxStructure,
    ClimateEcology,
    Other,
}

impl Category {
    pub const ALL: [Category; 10] = [
        Category::Transportation,
        Category::Labor,
        Category::RawMaterials,
        Category::Markets,
        Category::IndustrialSite,
        Category::Utilities,
        Category::GovernmentAttitude,
        Category::TaxStructure,
        Category::ClimateEcology,
        Category::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Transportation => "transportation",
            Category::Labor => "labor",
            Category::RawMaterials => "raw_materials",
            Category::Markets => "markets",
            Category::IndustrialSite => "industrial_site",
            Category::Utilities => "utilities",
            Category::GovernmentAttitude => "government_attitude",
            Category::TaxStructure => "tax_structure",
            Category::ClimateEcology => "climate_ecology",
            Category::Other => "other",
        }
    }
}

impl FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Category::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown factor category `{s}`")))
    }
}

/// Hard factors are quantitative; soft factors are qualitative and kept as
/// catalog metadata only.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorKind {
    Hard,
    Soft,
}

/// How values of a factor roll up the hierarchy.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule", content = "weight")]
pub enum Aggregation {
    Sum,
    Mean,
    WeightedMean(FactorId),
    None,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    HigherIsBetter,
    LowerIsBetter,
    Neutral,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::HigherIsBetter => "higher_is_better",
            Direction::LowerIsBetter => "lower_is_better",
            Direction::Neutral => "neutral",
        }
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "higher_is_better" => Ok(Direction::HigherIsBetter),
            "lower_is_better" => Ok(Direction::LowerIsBetter),
            "neutral" => Ok(Direction::Neutral),
            _ => Err(Error::InvalidArgument(format!("unknown direction `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorDefinition {
    pub id: FactorId,
    pub name: String,
    pub category: Category,
    pub unit: String,
    pub kind: FactorKind,
    pub aggregation: Aggregation,
    pub direction: Direction,
}

/// Month-granular point in time, ordered by (year, month).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimePoint {
    year: i32,
    month: u8,
}

impl TimePoint {
    pub fn new(year: i32, month: u8) -> Result<Self, Error> {
        if !(1..=12).contains(&month) {
            return Err(Error::InvalidTime(format!("{year:04}-{month:02}: invalid month")));
        }
        Ok(Self { year, month })
    }

    /// Year-only time points normalize to January.
    pub fn year(year: i32) -> Self {
        Self { year, month: 1 }
    }

    pub fn year_value(self) -> i32 {
        self.year
    }

    pub fn month(self) -> u8 {
        self.month
    }
}

impl fmt::Display for TimePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for TimePoint {
    type Err = Error;

    /// Accepts `YYYY` or `YYYY-MM`.
    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || Error::InvalidTime(s.to_owned());
        let s = s.trim();
        let (year, month) = match s.split_once('-') {
            Some((y, m)) => (y, Some(m)),
            None => (s, None),
        };
        if year.len() != 4 || !year.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let year: i32 = year.parse().map_err(|_| bad())?;
        match month {
            None => Ok(TimePoint::year(year)),
            Some(m) => {
                if m.is_empty() || m.len() > 2 || !m.bytes().all(|b| b.is_ascii_digit()) {
                    return Err(bad());
                }
                let month: u8 = m.parse().map_err(|_| bad())?;
                if !(1..=12).contains(&month) {
                    return Err(Error::InvalidTime(format!("{s}: invalid month")));
                }
                Ok(TimePoint { year, month })
            }
        }
    }
}

impl Serialize for TimePoint {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TimePoint {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One observation of a factor at a site.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorValue {
    pub site_id: SiteId,
    pub factor_id: FactorId,
    pub t: TimePoint,
    pub value: f64,
}
