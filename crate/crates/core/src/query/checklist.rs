//! Checklist scoring: each weighted criterion rates a site `+`, `o` or `-`,
//! and the site total is the weighted sum of +1 / 0 / -1.

use std::fmt;

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::{DatasetSnapshot, Direction, FactorId, SiteId, TimePoint};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rating {
    Plus,
    Neutral,
    Minus,
}

impl Rating {
    pub fn score(self) -> f64 {
        match self {
            Rating::Plus => 1.0,
            Rating::Neutral => 0.0,
            Rating::Minus => -1.0,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Rating::Plus => "+",
            Rating::Neutral => "o",
            Rating::Minus => "-",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Self> {
        match s {
            "+" => Some(Rating::Plus),
            "o" | "0" => Some(Rating::Neutral),
            "-" | "−" => Some(Rating::Minus),
            _ => None,
        }
    }
}

impl fmt::Display for Rating {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl Serialize for Rating {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.symbol())
    }
}

/// For `higher_is_better`: value >= plus → `+`, value >= minus → `o`,
/// otherwise `-`. Mirrored for `lower_is_better`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChecklistCriterion {
    #[serde(rename = "factor")]
    pub factor_id: FactorId,
    pub weight: f64,
    pub plus_threshold: f64,
    pub minus_threshold: f64,
    pub direction: Direction,
}

impl ChecklistCriterion {
    pub fn check(&self) -> Result<()> {
        if !(self.weight.is_finite() && self.weight > 0.0) {
            return Err(Error::InvalidCriteria(format!("`{}`: weights must be positive", self.factor_id)));
        }
        if !self.plus_threshold.is_finite() || !self.minus_threshold.is_finite() {
            return Err(Error::InvalidCriteria(format!("`{}`: thresholds must be finite", self.factor_id)));
        }
        let ordered = match self.direction {
            Direction::HigherIsBetter => self.plus_threshold >= self.minus_threshold,
            Direction::LowerIsBetter => self.plus_threshold <= self.minus_threshold,
            Direction::Neutral => {
                return Err(Error::InvalidCriteria(format!("`{}`: direction must be higher_is_better or lower_is_better", self.factor_id)))
            }
        };
        if !ordered {
            return Err(Error::InvalidCriteria(format!(
                "`{}`: plus threshold {} and minus threshold {} are inconsistent with {}",
                self.factor_id,
                self.plus_threshold,
                self.minus_threshold,
                self.direction.as_str()
            )));
        }
        Ok(())
    }

    pub fn rate(&self, value: f64) -> Rating {
        let better_or_equal = |v: f64, threshold: f64| match self.direction {
            Direction::LowerIsBetter => v <= threshold,
            _ => v >= threshold,
        };
        if better_or_equal(value, self.plus_threshold) {
            Rating::Plus
        } else if better_or_equal(value, self.minus_threshold) {
            Rating::Neutral
        } else {
            Rating::Minus
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChecklistCell {
    pub rating: Rating,
    pub value: Option<f64>,
    /// The site had no value; it was rated `-`.
    pub missing: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChecklistRow {
    pub rank: usize,
    pub site_id: SiteId,
    pub cells: Vec<ChecklistCell>,
    pub total: f64,
}

/// Rows are ordered by total (highest first), ties by site id.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChecklistTable {
    pub factor_ids: Vec<FactorId>,
    pub weights: Vec<f64>,
    pub rows: Vec<ChecklistRow>,
}

impl ChecklistTable {
    pub fn ranking(&self) -> Vec<&SiteId> {
        self.rows.iter().map(|r| &r.site_id).collect()
    }

    pub fn total_of(&self, site_id: &str) -> Option<f64> {
        self.rows.iter().find(|r| r.site_id.as_str() == site_id).map(|r| r.total)
    }
}

fn assemble(factor_ids: Vec<FactorId>, weights: Vec<f64>, rows: Vec<(SiteId, Vec<ChecklistCell>)>) -> ChecklistTable {
    let mut rows: Vec<ChecklistRow> = rows
        .into_iter()
        .map(|(site_id, cells)| {
            let total = cells.iter().zip(&weights).map(|(c, w)| w * c.rating.score()).sum();
            ChecklistRow { rank: 0, site_id, cells, total }
        })
        .collect();
    rows.sort_by(|a, b| b.total.total_cmp(&a.total).then_with(|| a.site_id.cmp(&b.site_id)));
    for (i, row) in rows.iter_mut().enumerate() {
        row.rank = i + 1;
    }
    ChecklistTable { factor_ids, weights, rows }
}

/// Scores an already-rated matrix: `ratings[site][criterion]`.
pub fn score_ratings(site_ids: &[SiteId], factor_ids: &[FactorId], weights: &[f64], ratings: &[Vec<Rating>]) -> Result<ChecklistTable> {
    if weights.is_empty() || weights.len() != factor_ids.len() {
        return Err(Error::InvalidCriteria("one weight per criterion is required".into()));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(Error::InvalidCriteria("weights must be positive".into()));
    }
    if ratings.len() != site_ids.len() || ratings.iter().any(|r| r.len() != weights.len()) {
        return Err(Error::InvalidCriteria("rating matrix does not match sites x criteria".into()));
    }
    let rows = site_ids
        .iter()
        .zip(ratings)
        .map(|(id, r)| (id.clone(), r.iter().map(|&rating| ChecklistCell { rating, value: None, missing: false }).collect()))
        .collect();
    Ok(assemble(factor_ids.to_vec(), weights.to_vec(), rows))
}

/// Rates every site on every criterion from its aggregated value at `t`.
/// A missing value is rated `-` and flagged.
pub fn checklist_score(snapshot: &DatasetSnapshot, site_ids: &[SiteId], criteria: &[ChecklistCriterion], t: TimePoint) -> Result<ChecklistTable> {
    if criteria.is_empty() {
        return Err(Error::InvalidCriteria("at least one criterion is required".into()));
    }
    let mut factors = Vec::with_capacity(criteria.len());
    for c in criteria {
        c.check()?;
        factors.push(snapshot.factor_idx(c.factor_id.as_str())?);
    }
    let sites: Vec<usize> = site_ids.iter().map(|s| snapshot.site_idx(s.as_str())).collect::<Result<_>>()?;
    let rows = sites
        .iter()
        .zip(site_ids)
        .map(|(&s, id)| {
            let cells = criteria
                .iter()
                .zip(&factors)
                .map(|(c, &f)| match snapshot.aggregate_idx(s, f, t).value {
                    Some(v) => ChecklistCell { rating: c.rate(v), value: Some(v), missing: false },
                    None => ChecklistCell { rating: Rating::Minus, value: None, missing: true },
                })
                .collect();
            (id.clone(), cells)
        })
        .collect();
    Ok(assemble(
        criteria.iter().map(|c| c.factor_id.clone()).collect(),
        criteria.iter().map(|c| c.weight).collect(),
        rows,
    ))
}
