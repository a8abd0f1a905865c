use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde::Serialize;

use super::validate::{validate_snapshot, Issue, ValidationReport};
use super::{AdminLevel, FactorDefinition, FactorValue, Geometry, Site, SiteId, TimePoint};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub source: String,
    /// Seconds since the Unix epoch.
    pub loaded_at: u64,
    /// Content digest of the loaded bundle. Identical bytes give an
    /// identical stamp; any data change gives a new one.
    pub stamp: String,
}

/// Time-ordered observations of one factor at one site.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Series {
    points: Vec<(TimePoint, f64)>,
}

impl Series {
    pub(crate) fn from_sorted(points: Vec<(TimePoint, f64)>) -> Self {
        debug_assert!(points.windows(2).all(|w| w[0].0 < w[1].0));
        Self { points }
    }

    pub fn points(&self) -> &[(TimePoint, f64)] {
        &self.points
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn at(&self, t: TimePoint) -> Option<f64> {
        self.points.binary_search_by(|(pt, _)| pt.cmp(&t)).ok().map(|i| self.points[i].1)
    }

    /// The latest observation at or before `t`.
    pub fn latest_at_or_before(&self, t: TimePoint) -> Option<(TimePoint, f64)> {
        let end = self.points.partition_point(|(pt, _)| *pt <= t);
        end.checked_sub(1).map(|i| self.points[i])
    }

    pub fn range(&self, from: TimePoint, to: TimePoint) -> &[(TimePoint, f64)] {
        let start = self.points.partition_point(|(pt, _)| *pt < from);
        let end = self.points.partition_point(|(pt, _)| *pt <= to);
        if start >= end {
            &[]
        } else {
            &self.points[start..end]
        }
    }
}

/// Immutable, fully indexed dataset. Safe to share between threads.
#[derive(Debug)]
pub struct DatasetSnapshot {
    pub(crate) levels: Vec<AdminLevel>,
    /// Sorted by id.
    pub(crate) sites: Vec<Site>,
    pub(crate) site_index: HashMap<SiteId, usize>,
    /// Per level, site indices sorted by (name, id).
    pub(crate) by_level: Vec<Vec<usize>>,
    /// Per site, child indices sorted by (name, id).
    pub(crate) children: Vec<Vec<usize>>,
    pub(crate) parent: Vec<Option<usize>>,
    pub(crate) leaf_count: Vec<usize>,
    pub(crate) factors: Vec<FactorDefinition>,
    pub(crate) factor_index: HashMap<super::FactorId, usize>,
    pub(crate) series: BTreeMap<(usize, usize), Series>,
    pub(crate) geometries: BTreeMap<SiteId, Arc<Geometry>>,
    pub(crate) default_t: Option<TimePoint>,
    pub(crate) provenance: Provenance,
    pub(crate) warnings: Vec<Issue>,
}

/// Unindexed inputs of [`DatasetSnapshot::build`].
#[derive(Clone, Debug, Default)]
pub struct SnapshotParts {
    pub levels: Vec<AdminLevel>,
    pub sites: Vec<Site>,
    pub factors: Vec<FactorDefinition>,
    pub values: Vec<FactorValue>,
    pub geometries: BTreeMap<SiteId, Geometry>,
    pub default_t: Option<TimePoint>,
    /// Issues found while parsing, merged into the validation report.
    pub notes: ValidationReport,
}

impl DatasetSnapshot {
    /// Validates and indexes the parts. Any validation error aborts
    /// construction with the full report; warnings are kept on the snapshot.
    pub fn build(parts: SnapshotParts, provenance: Provenance) -> Result<Self> {
        let SnapshotParts { levels, mut sites, factors, values, geometries, default_t, notes } = parts;
        let mut report = validate_snapshot(&levels, &sites, &factors, &values);
        report.extend(notes);
        for site in &mut sites {
            if site.geometry_ref.is_none() && geometries.contains_key(&site.id) {
                site.geometry_ref = Some(site.id.clone());
            }
            if let Some(key) = &site.geometry_ref {
                if !geometries.contains_key(key) {
                    report.error("unresolved geometry", Some(&site.id), None, format!("site `{}` references missing geometry `{key}`", site.id));
                }
            }
        }
        for (id, geom) in &geometries {
            if let Err(e) = geom.validate() {
                report.error("invalid geometry", Some(id), None, format!("geometry of `{id}`: {e}"));
            }
        }
        if !report.is_valid() {
            return Err(Error::Validation(report));
        }

        sites.sort_by(|a, b| a.id.cmp(&b.id));
        let site_index: HashMap<SiteId, usize> = sites.iter().enumerate().map(|(i, s)| (s.id.clone(), i)).collect();
        let by_name = |a: &usize, b: &usize| {
            let (sa, sb) = (&sites[*a], &sites[*b]);
            sa.name.cmp(&sb.name).then_with(|| sa.id.cmp(&sb.id))
        };

        let mut by_level = vec![Vec::new(); levels.len()];
        let mut children = vec![Vec::new(); sites.len()];
        let mut parent = vec![None; sites.len()];
        for (i, site) in sites.iter().enumerate() {
            by_level[usize::from(site.level)].push(i);
            if let Some(p) = &site.parent_id {
                let pi = site_index[p];
                children[pi].push(i);
                parent[i] = Some(pi);
            }
        }
        for list in by_level.iter_mut().chain(children.iter_mut()) {
            list.sort_by(by_name);
        }

        // Deepest levels first so children are counted before their parents.
        let mut leaf_count = vec![0usize; sites.len()];
        for level in by_level.iter().rev() {
            for &i in level {
                leaf_count[i] = if children[i].is_empty() { 1 } else { children[i].iter().map(|&c| leaf_count[c]).sum() };
            }
        }

        let factor_index = factors.iter().enumerate().map(|(i, f)| (f.id.clone(), i)).collect::<HashMap<_, _>>();

        let mut grouped: BTreeMap<(usize, usize), Vec<(TimePoint, f64)>> = BTreeMap::new();
        for v in values {
            grouped
                .entry((site_index[&v.site_id], factor_index[&v.factor_id]))
                .or_default()
                .push((v.t, v.value));
        }
        let series = grouped
            .into_iter()
            .map(|(k, mut pts)| {
                pts.sort_by_key(|a| a.0);
                (k, Series::from_sorted(pts))
            })
            .collect();

        Ok(Self {
            levels,
            sites,
            site_index,
            by_level,
            children,
            parent,
            leaf_count,
            factors,
            factor_index,
            series,
            geometries: geometries.into_iter().map(|(k, g)| (k, Arc::new(g))).collect(),
            default_t,
            provenance,
            warnings: report.issues,
        })
    }

    pub fn levels(&self) -> &[AdminLevel] {
        &self.levels
    }

    pub fn level_by_name(&self, name: &str) -> Result<u8> {
        self.levels
            .iter()
            .find(|l| l.name == name)
            .map(|l| l.ordinal)
            .ok_or_else(|| Error::UnknownLevel(name.to_owned()))
    }

    /// All sites, ordered by id.
    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn site(&self, id: &str) -> Result<&Site> {
        self.site_idx(id).map(|i| &self.sites[i])
    }

    pub(crate) fn site_idx(&self, id: &str) -> Result<usize> {
        self.site_index.get(id).copied().ok_or_else(|| Error::UnknownSite(id.to_owned()))
    }

    /// Resolves a site by id, or else by a name that is unique in the dataset.
    pub fn resolve_site(&self, key: &str) -> Result<&Site> {
        if let Ok(site) = self.site(key) {
            return Ok(site);
        }
        let mut named = self.sites.iter().filter(|s| s.name == key);
        match (named.next(), named.next()) {
            (Some(site), None) => Ok(site),
            _ => Err(Error::UnknownSite(key.to_owned())),
        }
    }

    pub fn factors(&self) -> &[FactorDefinition] {
        &self.factors
    }

    pub fn factor(&self, id: &str) -> Result<&FactorDefinition> {
        self.factor_idx(id).map(|i| &self.factors[i])
    }

    pub(crate) fn factor_idx(&self, id: &str) -> Result<usize> {
        self.factor_index.get(id).copied().ok_or_else(|| Error::UnknownFactor(id.to_owned()))
    }

    /// Stored series, if any observation exists for the pair.
    pub fn series(&self, site_id: &str, factor_id: &str) -> Result<Option<&Series>> {
        let key = (self.site_idx(site_id)?, self.factor_idx(factor_id)?);
        Ok(self.series.get(&key))
    }

    pub(crate) fn series_at(&self, site: usize, factor: usize) -> Option<&Series> {
        self.series.get(&(site, factor))
    }

    pub fn geometry(&self, site_id: &str) -> Option<&Arc<Geometry>> {
        let site = self.site(site_id).ok()?;
        site.geometry_ref.as_ref().and_then(|k| self.geometries.get(k))
    }

    pub fn geometries(&self) -> &BTreeMap<SiteId, Arc<Geometry>> {
        &self.geometries
    }

    pub fn default_time(&self) -> Option<TimePoint> {
        self.default_t
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Non-fatal issues found while loading.
    pub fn warnings(&self) -> &[Issue] {
        &self.warnings
    }

    pub fn value_count(&self) -> usize {
        self.series.values().map(Series::len).sum()
    }

    /// Every stored observation, ordered by (site id, factor catalog order, time).
    pub fn values(&self) -> impl Iterator<Item = FactorValue> + '_ {
        self.series.iter().flat_map(move |(&(s, f), series)| {
            series.points().iter().map(move |&(t, value)| FactorValue {
                site_id: self.sites[s].id.clone(),
                factor_id: self.factors[f].id.clone(),
                t,
                value,
            })
        })
    }
}
