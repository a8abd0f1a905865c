//! Drill-down/roll-up navigation and aggregation of factor values along the
//! administrative hierarchy.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Aggregation, DatasetSnapshot, Site, TimePoint};

/// A factor value at a site, either stored or rolled up from descendants.
///
/// `coverage` is the fraction of the site's leaf descendants whose data
/// contributed. A stored value always has full coverage.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AggregatedValue {
    pub value: Option<f64>,
    pub coverage: f64,
    pub partial: bool,
}

impl AggregatedValue {
    pub const ABSENT: AggregatedValue = AggregatedValue { value: None, coverage: 0.0, partial: true };

    pub fn stored(value: f64) -> Self {
        Self { value: Some(value), coverage: 1.0, partial: false }
    }

    fn computed(value: Option<f64>, coverage: f64) -> Self {
        Self { value, coverage, partial: coverage < 1.0 }
    }
}

impl DatasetSnapshot {
    /// Children sorted by name, then id. Leaves have none.
    pub fn children(&self, site_id: &str) -> Result<Vec<&Site>> {
        let i = self.site_idx(site_id)?;
        Ok(self.children[i].iter().map(|&c| &self.sites[c]).collect())
    }

    pub fn parent(&self, site_id: &str) -> Result<Option<&Site>> {
        let i = self.site_idx(site_id)?;
        Ok(self.parent[i].map(|p| &self.sites[p]))
    }

    pub fn is_leaf(&self, site_id: &str) -> Result<bool> {
        Ok(self.children[self.site_idx(site_id)?].is_empty())
    }

    /// The site itself, then each ancestor up to its root.
    pub fn path_to_root(&self, site_id: &str) -> Result<Vec<&Site>> {
        let mut i = self.site_idx(site_id)?;
        let mut path = vec![&self.sites[i]];
        while let Some(p) = self.parent[i] {
            path.push(&self.sites[p]);
            i = p;
        }
        Ok(path)
    }

    /// All sites at `level` that descend from `scope` (or every site at the
    /// level when unscoped), ordered by name, then id.
    pub fn level_members(&self, level: u8, scope: Option<&str>) -> Result<Vec<&Site>> {
        Ok(self.level_member_idx(level, scope)?.into_iter().map(|i| &self.sites[i]).collect())
    }

    pub(crate) fn level_member_idx(&self, level: u8, scope: Option<&str>) -> Result<Vec<usize>> {
        let members = self
            .by_level
            .get(usize::from(level))
            .ok_or_else(|| Error::UnknownLevel(level.to_string()))?;
        let Some(scope) = scope else {
            return Ok(members.clone());
        };
        let scope = self.site_idx(scope)?;
        if self.sites[scope].level >= level {
            return Ok(Vec::new());
        }
        let steps = usize::from(level - self.sites[scope].level);
        Ok(members
            .iter()
            .copied()
            .filter(|&m| self.ancestor(m, steps) == Some(scope))
            .collect())
    }

    fn ancestor(&self, mut i: usize, steps: usize) -> Option<usize> {
        for _ in 0..steps {
            i = self.parent[i]?;
        }
        Some(i)
    }

    /// The stored value at `t` if there is one; otherwise the factor's
    /// aggregation rule applied recursively over the children.
    pub fn aggregate_value(&self, site_id: &str, factor_id: &str, t: TimePoint) -> Result<AggregatedValue> {
        let site = self.site_idx(site_id)?;
        let factor = self.factor_idx(factor_id)?;
        Ok(self.aggregate_idx(site, factor, t))
    }

    pub(crate) fn aggregate_idx(&self, site: usize, factor: usize, t: TimePoint) -> AggregatedValue {
        if let Some(v) = self.series_at(site, factor).and_then(|s| s.at(t)) {
            return AggregatedValue::stored(v);
        }
        let kids = &self.children[site];
        if kids.is_empty() {
            return AggregatedValue::ABSENT;
        }
        let total_leaves = self.leaf_count[site] as f64;
        match &self.factors[factor].aggregation {
            Aggregation::None => AggregatedValue::ABSENT,
            Aggregation::Sum | Aggregation::Mean => {
                let mut sum = 0.0;
                let mut n = 0usize;
                let mut covered = 0.0;
                for &c in kids {
                    let agg = self.aggregate_idx(c, factor, t);
                    if let Some(v) = agg.value {
                        sum += v;
                        n += 1;
                        covered += agg.coverage * self.leaf_count[c] as f64;
                    }
                }
                let value = match (n, &self.factors[factor].aggregation) {
                    (0, _) => None,
                    (_, Aggregation::Sum) => Some(sum),
                    _ => Some(sum / n as f64),
                };
                AggregatedValue::computed(value, covered / total_leaves)
            }
            Aggregation::WeightedMean(weight_id) => {
                let weight = self.factor_index[weight_id];
                let mut weighted = 0.0;
                let mut weights = 0.0;
                let mut covered = 0.0;
                let mut any = false;
                for &c in kids {
                    let v = self.aggregate_idx(c, factor, t);
                    let w = self.aggregate_idx(c, weight, t);
                    if let (Some(v_val), Some(w_val)) = (v.value, w.value) {
                        weighted += v_val * w_val;
                        weights += w_val;
                        covered += v.coverage * self.leaf_count[c] as f64;
                        any = true;
                    }
                }
                let value = (any && weights != 0.0).then(|| weighted / weights);
                AggregatedValue::computed(value, covered / total_leaves)
            }
        }
    }

    /// Every time point at which the site or one of its descendants has a
    /// stored observation of the factor.
    pub(crate) fn subtree_times(&self, site: usize, factor: usize) -> BTreeSet<TimePoint> {
        let mut out = BTreeSet::new();
        let mut stack = vec![site];
        while let Some(s) = stack.pop() {
            if let Some(series) = self.series_at(s, factor) {
                out.extend(series.points().iter().map(|(t, _)| *t));
            }
            stack.extend(self.children[s].iter().copied());
        }
        out
    }
}
