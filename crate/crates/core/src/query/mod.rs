//! Identify and compare: what/where/when questions over a snapshot, site
//! comparison and checklist scoring.

mod checklist;
mod predicate;

use std::cmp::Ordering;
use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hierarchy::AggregatedValue;
use crate::model::{DatasetSnapshot, Direction, FactorId, SiteId, TimePoint};

pub use checklist::{checklist_score, score_ratings, ChecklistCell, ChecklistCriterion, ChecklistRow, ChecklistTable, Rating};
pub use predicate::{Condition, Predicate};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LookupMode {
    #[default]
    Exact,
    LatestAtOrBefore,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FactorReading {
    pub factor_id: FactorId,
    /// The time point the value was taken at; absent when nothing qualified.
    pub t: Option<TimePoint>,
    #[serde(flatten)]
    pub value: AggregatedValue,
}

/// When + where → what: factor values of one site at a given time.
pub fn lookup_what(
    snapshot: &DatasetSnapshot,
    site_id: &str,
    factor_ids: &[FactorId],
    t: TimePoint,
    mode: LookupMode,
) -> Result<Vec<FactorReading>> {
    let site = snapshot.site_idx(site_id)?;
    factor_ids
        .iter()
        .map(|f| {
            let factor = snapshot.factor_idx(f.as_str())?;
            let at = match mode {
                LookupMode::Exact => Some(t),
                LookupMode::LatestAtOrBefore => snapshot.subtree_times(site, factor).range(..=t).next_back().copied(),
            };
            let value = at.map_or(AggregatedValue::ABSENT, |at| snapshot.aggregate_idx(site, factor, at));
            Ok(FactorReading { factor_id: f.clone(), t: at.filter(|_| value.value.is_some()), value })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SortOrder {
    #[serde(alias = "ascending")]
    Asc,
    #[serde(alias = "descending")]
    Desc,
}

/// One ranking key, `[factor_id, "asc" | "desc"]` on the wire.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankKey(pub FactorId, pub SortOrder);

/// When + what → where.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WhereQuery {
    /// Level name, e.g. `county`.
    pub level: String,
    #[serde(default)]
    pub scope: Option<SiteId>,
    pub t: TimePoint,
    #[serde(default)]
    pub predicates: Vec<Predicate>,
    #[serde(default)]
    pub rank_by: Vec<RankKey>,
    #[serde(default)]
    pub limit: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvaluatedValue {
    pub factor_id: FactorId,
    #[serde(flatten)]
    pub value: AggregatedValue,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SiteMatch {
    pub rank: usize,
    pub site_id: SiteId,
    pub name: String,
    /// Values of every factor named by a predicate or ranking key.
    pub values: Vec<EvaluatedValue>,
}

impl SiteMatch {
    pub fn value_of(&self, factor_id: &str) -> Option<f64> {
        self.values.iter().find(|v| v.factor_id.as_str() == factor_id).and_then(|v| v.value.value)
    }
}

/// Orders present values by `order`; absent values sort last either way.
fn cmp_values(a: Option<f64>, b: Option<f64>, order: SortOrder) -> Ordering {
    match (a, b) {
        (Some(a), Some(b)) => match order {
            SortOrder::Asc => a.total_cmp(&b),
            SortOrder::Desc => b.total_cmp(&a),
        },
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    }
}

/// Sites at the query level (within scope) that satisfy every predicate,
/// ordered by the ranking keys, then site id.
pub fn search_where(snapshot: &DatasetSnapshot, query: &WhereQuery) -> Result<Vec<SiteMatch>> {
    let level = snapshot.level_by_name(&query.level)?;
    let mut evaluated: Vec<(FactorId, usize)> = Vec::new();
    let mut seen = HashSet::new();
    for p in &query.predicates {
        p.condition.check()?;
    }
    for f in query.predicates.iter().map(|p| &p.factor_id).chain(query.rank_by.iter().map(|k| &k.0)) {
        let idx = snapshot.factor_idx(f.as_str())?;
        if seen.insert(idx) {
            evaluated.push((f.clone(), idx));
        }
    }
    let slot = |f: &FactorId| evaluated.iter().position(|(id, _)| id == f).unwrap();
    let predicates: Vec<(usize, &Condition)> = query.predicates.iter().map(|p| (slot(&p.factor_id), &p.condition)).collect();
    let keys: Vec<(usize, SortOrder)> = query.rank_by.iter().map(|k| (slot(&k.0), k.1)).collect();

    let candidates = snapshot.level_member_idx(level, query.scope.as_ref().map(SiteId::as_str))?;
    let mut matches: Vec<(usize, Vec<AggregatedValue>)> = candidates
        .into_iter()
        .filter_map(|site| {
            let values: Vec<AggregatedValue> =
                evaluated.iter().map(|&(_, f)| snapshot.aggregate_idx(site, f, query.t)).collect();
            predicates
                .iter()
                .all(|&(i, cond)| values[i].value.is_some_and(|v| cond.holds(v)))
                .then_some((site, values))
        })
        .collect();

    let sites = snapshot.sites();
    matches.sort_by(|(sa, va), (sb, vb)| {
        keys.iter()
            .map(|&(i, order)| cmp_values(va[i].value, vb[i].value, order))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
            .then_with(|| sites[*sa].id.cmp(&sites[*sb].id))
    });
    if let Some(limit) = query.limit {
        matches.truncate(limit);
    }

    Ok(matches
        .into_iter()
        .enumerate()
        .map(|(i, (site, values))| SiteMatch {
            rank: i + 1,
            site_id: sites[site].id.clone(),
            name: sites[site].name.clone(),
            values: evaluated.iter().zip(values).map(|((f, _), value)| EvaluatedValue { factor_id: f.clone(), value }).collect(),
        })
        .collect())
}

/// A closed run `[from, to]` of consecutive stored observations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TimeInterval {
    pub from: TimePoint,
    pub to: TimePoint,
}

/// Where + what → when: maximal runs of adjacent stored observations of the
/// site's series that satisfy the condition. Gaps are not interpolated.
pub fn search_when(snapshot: &DatasetSnapshot, site_id: &str, factor_id: &str, condition: &Condition) -> Result<Vec<TimeInterval>> {
    condition.check()?;
    let Some(series) = snapshot.series(site_id, factor_id)? else {
        return Ok(Vec::new());
    };
    let mut out = Vec::new();
    let mut open: Option<TimeInterval> = None;
    for &(t, v) in series.points() {
        if condition.holds(v) {
            match &mut open {
                Some(run) => run.to = t,
                None => open = Some(TimeInterval { from: t, to: t }),
            }
        } else if let Some(run) = open.take() {
            out.push(run);
        }
    }
    out.extend(open);
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FactorRanking {
    pub factor_id: FactorId,
    pub direction: Direction,
    /// Best first; sites without a value are left out.
    pub order: Vec<SiteId>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SiteComparison {
    pub t: TimePoint,
    pub site_ids: Vec<SiteId>,
    pub factor_ids: Vec<FactorId>,
    /// One row per site, one cell per factor.
    pub matrix: Vec<Vec<AggregatedValue>>,
    pub rankings: Vec<FactorRanking>,
    pub warnings: Vec<String>,
}

impl SiteComparison {
    pub fn winner(&self, factor_id: &str) -> Option<&SiteId> {
        self.rankings.iter().find(|r| r.factor_id.as_str() == factor_id)?.order.first()
    }
}

pub(crate) fn direction_order(direction: Direction) -> SortOrder {
    match direction {
        Direction::LowerIsBetter => SortOrder::Asc,
        Direction::HigherIsBetter | Direction::Neutral => SortOrder::Desc,
    }
}

/// Compares two or more sites on preselected factors; each factor ranks the
/// sites by its direction hint (neutral ranks descending), ties by id.
pub fn compare_sites(snapshot: &DatasetSnapshot, site_ids: &[SiteId], factor_ids: &[FactorId], t: TimePoint) -> Result<SiteComparison> {
    if site_ids.len() < 2 {
        return Err(Error::InvalidArgument("comparison needs at least two sites".into()));
    }
    let sites: Vec<usize> = site_ids.iter().map(|s| snapshot.site_idx(s.as_str())).collect::<Result<_>>()?;
    let factors: Vec<usize> = factor_ids.iter().map(|f| snapshot.factor_idx(f.as_str())).collect::<Result<_>>()?;

    let mut warnings = Vec::new();
    let levels: HashSet<u8> = sites.iter().map(|&s| snapshot.sites()[s].level).collect();
    if levels.len() > 1 {
        warnings.push("compared sites are on different hierarchy levels".to_owned());
    }

    let matrix: Vec<Vec<AggregatedValue>> =
        sites.iter().map(|&s| factors.iter().map(|&f| snapshot.aggregate_idx(s, f, t)).collect()).collect();

    let rankings = factors
        .iter()
        .enumerate()
        .map(|(j, &f)| {
            let direction = snapshot.factors()[f].direction;
            let order = direction_order(direction);
            let mut present: Vec<(&SiteId, f64)> =
                site_ids.iter().zip(&matrix).filter_map(|(id, row)| row[j].value.map(|v| (id, v))).collect();
            present.sort_by(|a, b| cmp_values(Some(a.1), Some(b.1), order).then_with(|| a.0.cmp(b.0)));
            FactorRanking { factor_id: factor_ids[j].clone(), direction, order: present.into_iter().map(|(id, _)| id.clone()).collect() }
        })
        .collect();

    Ok(SiteComparison { t, site_ids: site_ids.to_vec(), factor_ids: factor_ids.to_vec(), matrix, rankings, warnings })
}
