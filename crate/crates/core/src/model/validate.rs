use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::Serialize;

use super::{AdminLevel, Aggregation, FactorDefinition, FactorId, FactorKind, FactorValue, Site, SiteId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Error,
    Warning,
}

/// A single rule violation. Violations are data, not faults.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Issue {
    pub severity: Severity,
    pub rule: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub site_id: Option<SiteId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub factor_id: Option<FactorId>,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev}: {}: {}", self.rule, self.message)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.errors().next().is_none()
    }

    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn errors(&self) -> impl Iterator<Item = &Issue> {
        self.issues.iter().filter(|i| i.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Issue> {
        self.issues.iter().filter(|i| i.severity == Severity::Warning)
    }

    /// The first few error messages, `; `-separated.
    pub fn summary(&self) -> String {
        let mut msgs: Vec<String> = self.errors().take(5).map(ToString::to_string).collect();
        let rest = self.errors().count().saturating_sub(5);
        if rest > 0 {
            msgs.push(format!("... and {rest} more"));
        }
        msgs.join("; ")
    }

    pub(crate) fn error(&mut self, rule: &str, site: Option<&SiteId>, factor: Option<&FactorId>, message: String) {
        self.push(Severity::Error, rule, site, factor, message);
    }

    pub(crate) fn warning(&mut self, rule: &str, site: Option<&SiteId>, factor: Option<&FactorId>, message: String) {
        self.push(Severity::Warning, rule, site, factor, message);
    }

    fn push(&mut self, severity: Severity, rule: &str, site: Option<&SiteId>, factor: Option<&FactorId>, message: String) {
        self.issues.push(Issue {
            severity,
            rule: rule.to_owned(),
            site_id: site.cloned(),
            factor_id: factor.cloned(),
            message,
        });
    }

    pub(crate) fn extend(&mut self, other: ValidationReport) {
        self.issues.extend(other.issues);
    }
}

/// Checks every structural rule of a dataset: contiguous levels, a
/// single-parent forest whose levels step by one, a consistent factor catalog,
/// and observations that resolve and are unique.
pub fn validate_snapshot(
    levels: &[AdminLevel],
    sites: &[Site],
    factors: &[FactorDefinition],
    values: &[FactorValue],
) -> ValidationReport {
    let mut report = ValidationReport::default();

    for (i, level) in levels.iter().enumerate() {
        if usize::from(level.ordinal) != i {
            report.error(
                "non-contiguous levels",
                None,
                None,
                format!("level `{}` has ordinal {} at position {i}", level.name, level.ordinal),
            );
        }
    }

    let mut by_id: HashMap<&SiteId, &Site> = HashMap::with_capacity(sites.len());
    for site in sites {
        if by_id.insert(&site.id, site).is_some() {
            report.error("duplicate site id", Some(&site.id), None, format!("site id `{}` appears more than once", site.id));
        }
    }

    for site in sites {
        if usize::from(site.level) >= levels.len() {
            report.error(
                "unknown level",
                Some(&site.id),
                None,
                format!("site `{}` has level ordinal {} but only {} levels are defined", site.id, site.level, levels.len()),
            );
        }
        match (&site.parent_id, site.level) {
            (Some(p), 0) => report.error("root with parent", Some(&site.id), None, format!("level-0 site `{}` has parent `{p}`", site.id)),
            (None, 0) => {}
            (None, _) => report.error("missing parent", Some(&site.id), None, format!("non-root site `{}` has no parent", site.id)),
            (Some(p), level) => match by_id.get(p) {
                None => report.error("unresolved parent", Some(&site.id), None, format!("site `{}` references missing parent `{p}`", site.id)),
                Some(parent) if parent.level + 1 != level => report.error(
                    "level mismatch",
                    Some(&site.id),
                    None,
                    format!("site `{}` at level {level} has parent `{p}` at level {}", site.id, parent.level),
                ),
                Some(_) => {}
            },
        }
    }

    // Level stepping already rules out cycles for well-formed data; this
    // catches them when that rule is also broken.
    for site in sites {
        let mut seen = HashSet::new();
        let mut cur = site;
        while let Some(p) = &cur.parent_id {
            if !seen.insert(&cur.id) {
                report.error("cycle", Some(&site.id), None, format!("parent chain of `{}` is cyclic", site.id));
                break;
            }
            match by_id.get(p) {
                Some(next) => cur = next,
                None => break,
            }
        }
    }

    let mut factor_by_id: HashMap<&FactorId, &FactorDefinition> = HashMap::new();
    for f in factors {
        if factor_by_id.insert(&f.id, f).is_some() {
            report.error("duplicate factor id", None, Some(&f.id), format!("factor id `{}` appears more than once", f.id));
        }
    }
    for f in factors {
        if f.kind == FactorKind::Soft && f.aggregation != Aggregation::None {
            report.error("soft factor aggregated", None, Some(&f.id), format!("soft factor `{}` must use aggregation none", f.id));
        }
        if let Aggregation::WeightedMean(w) = &f.aggregation {
            match factor_by_id.get(w) {
                None => report.error(
                    "unresolved weight factor",
                    None,
                    Some(&f.id),
                    format!("factor `{}` is weighted by missing factor `{w}`", f.id),
                ),
                Some(wf) if wf.aggregation != Aggregation::Sum => report.error(
                    "weight factor not summed",
                    None,
                    Some(&f.id),
                    format!("weight factor `{w}` of `{}` must use aggregation sum", f.id),
                ),
                Some(_) => {}
            }
        }
    }

    let mut keys = HashSet::with_capacity(values.len());
    for v in values {
        if !by_id.contains_key(&v.site_id) {
            report.error("unresolved site", Some(&v.site_id), Some(&v.factor_id), format!("observation references missing site `{}`", v.site_id));
        }
        match factor_by_id.get(&v.factor_id) {
            None => report.error(
                "unresolved factor",
                Some(&v.site_id),
                Some(&v.factor_id),
                format!("observation references missing factor `{}`", v.factor_id),
            ),
            Some(f) if f.kind == FactorKind::Soft => report.warning(
                "soft factor value",
                Some(&v.site_id),
                Some(&v.factor_id),
                format!("soft factor `{}` has a numeric observation; it is never scored", f.id),
            ),
            Some(_) => {}
        }
        if !v.value.is_finite() {
            report.error("non-finite value", Some(&v.site_id), Some(&v.factor_id), format!("value {} at {} is not finite", v.value, v.t));
        }
        if !keys.insert((&v.site_id, &v.factor_id, v.t)) {
            report.error(
                "duplicate observation",
                Some(&v.site_id),
                Some(&v.factor_id),
                format!("more than one value for ({}, {}, {})", v.site_id, v.factor_id, v.t),
            );
        }
    }

    report
}
