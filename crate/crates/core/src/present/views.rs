use std::sync::Arc;

use serde::Serialize;

use super::classify::{classify, ClassBreaks, Scheme};
use crate::error::{Error, Result};
use crate::model::{DatasetSnapshot, FactorId, Geometry, SiteId, TimePoint};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChoroplethSite {
    pub site_id: SiteId,
    pub name: String,
    pub geometry_ref: Option<SiteId>,
    pub value: Option<f64>,
    pub coverage: f64,
    pub class: i32,
    #[serde(skip)]
    pub geometry: Option<Arc<Geometry>>,
}

/// The children of one site colored by a single factor.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChoroplethLayer {
    pub parent_id: SiteId,
    pub factor_id: FactorId,
    pub factor_name: String,
    pub unit: String,
    pub t: TimePoint,
    pub classification: ClassBreaks,
    pub sites: Vec<ChoroplethSite>,
    /// One label per class, lowest first.
    pub legend: Vec<String>,
}

/// Plain decimal rendering: integers without a fraction, otherwise at most
/// two decimals with trailing zeros removed.
pub fn format_number(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{v:.0}")
    } else {
        let s = format!("{v:.2}");
        s.trim_end_matches('0').trim_end_matches('.').to_owned()
    }
}

pub fn build_choropleth(
    snapshot: &DatasetSnapshot,
    parent_id: &str,
    factor_id: &str,
    t: TimePoint,
    scheme: Scheme,
    k: usize,
) -> Result<ChoroplethLayer> {
    let parent = snapshot.site(parent_id)?;
    let factor = snapshot.factor(factor_id)?;
    let children = snapshot.children(parent_id)?;
    if children.is_empty() {
        return Err(Error::ChildlessParent(parent_id.to_owned()));
    }
    let aggregated: Vec<_> = children
        .iter()
        .map(|c| snapshot.aggregate_value(c.id.as_str(), factor_id, t))
        .collect::<Result<_>>()?;
    let values: Vec<(SiteId, Option<f64>)> = children.iter().zip(&aggregated).map(|(c, a)| (c.id.clone(), a.value)).collect();
    let classification = classify(&values, scheme, k)?;

    let sites = children
        .iter()
        .zip(&aggregated)
        .zip(&classification.classes)
        .map(|((c, a), (_, class))| ChoroplethSite {
            site_id: c.id.clone(),
            name: c.name.clone(),
            geometry_ref: c.geometry_ref.clone(),
            value: a.value,
            coverage: a.coverage,
            class: *class,
            geometry: snapshot.geometry(c.id.as_str()).cloned(),
        })
        .collect();

    let unit = if factor.unit.is_empty() { String::new() } else { format!(" {}", factor.unit) };
    let legend = (0..k)
        .map(|c| match classification.class_range(c) {
            Some((lo, hi)) => format!("{} to {}{unit}", format_number(lo), format_number(hi)),
            None => "no data".to_owned(),
        })
        .collect();

    Ok(ChoroplethLayer {
        parent_id: parent.id.clone(),
        factor_id: factor.id.clone(),
        factor_name: factor.name.clone(),
        unit: factor.unit.clone(),
        t,
        classification,
        sites,
        legend,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeriesPoint {
    pub t: TimePoint,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SiteSeries {
    pub site_id: SiteId,
    pub name: String,
    pub highlighted: bool,
    pub points: Vec<SeriesPoint>,
}

/// Time-series graph content for one factor, with an optional horizontal
/// reference line and one optionally highlighted site.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeriesView {
    pub factor_id: FactorId,
    pub unit: String,
    pub range: Option<(TimePoint, TimePoint)>,
    pub reference: Option<f64>,
    pub highlight: Option<SiteId>,
    pub series: Vec<SiteSeries>,
}

impl SeriesView {
    /// Points strictly below the reference line, per site.
    pub fn points_below_reference(&self) -> Vec<(&SiteId, &SeriesPoint)> {
        let Some(r) = self.reference else { return Vec::new() };
        self.series
            .iter()
            .flat_map(|s| s.points.iter().filter(move |p| p.value < r).map(move |p| (&s.site_id, p)))
            .collect()
    }
}

pub fn build_series_view(
    snapshot: &DatasetSnapshot,
    site_ids: &[SiteId],
    factor_id: &str,
    range: Option<(TimePoint, TimePoint)>,
    reference: Option<f64>,
    highlight: Option<&SiteId>,
) -> Result<SeriesView> {
    let factor = snapshot.factor(factor_id)?;
    if let Some((from, to)) = range {
        if from > to {
            return Err(Error::InvertedRange { from: from.to_string(), to: to.to_string() });
        }
    }
    if let Some(h) = highlight {
        snapshot.site(h.as_str())?;
    }
    if reference.is_some_and(|r| !r.is_finite()) {
        return Err(Error::InvalidArgument("reference value must be finite".into()));
    }
    let series = site_ids
        .iter()
        .map(|id| {
            let site = snapshot.site(id.as_str())?;
            let stored = snapshot.series(id.as_str(), factor_id)?;
            let points = stored
                .map(|s| match range {
                    Some((from, to)) => s.range(from, to),
                    None => s.points(),
                })
                .unwrap_or(&[])
                .iter()
                .map(|&(t, value)| SeriesPoint { t, value })
                .collect();
            Ok(SiteSeries { site_id: site.id.clone(), name: site.name.clone(), highlighted: highlight == Some(&site.id), points })
        })
        .collect::<Result<_>>()?;
    Ok(SeriesView {
        factor_id: factor.id.clone(),
        unit: factor.unit.clone(),
        range,
        reference,
        highlight: highlight.cloned(),
        series,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PieSlice {
    pub site_id: SiteId,
    pub value: f64,
    pub proportion: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Bar {
    pub site_id: SiteId,
    pub factor_id: FactorId,
    pub value: f64,
    /// `value / max |value|` over the factor's bars.
    pub length: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BarScale {
    pub factor_id: FactorId,
    pub unit: String,
    pub min: f64,
    pub max: f64,
}

/// Side-panel charts: a pie of the primary (first) factor across sites and
/// bars for every site and factor.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InsightCharts {
    pub t: TimePoint,
    pub pie_factor: FactorId,
    pub pie: Vec<PieSlice>,
    pub bars: Vec<Bar>,
    pub scales: Vec<BarScale>,
    /// Sites without a primary-factor value, or with a negative one.
    pub missing: Vec<SiteId>,
    /// Every `(site, factor)` pair without a value.
    pub missing_cells: Vec<(SiteId, FactorId)>,
}

pub fn build_insights(snapshot: &DatasetSnapshot, site_ids: &[SiteId], factor_ids: &[FactorId], t: TimePoint) -> Result<InsightCharts> {
    if site_ids.is_empty() || factor_ids.is_empty() {
        return Err(Error::InvalidArgument("insights need at least one site and one factor".into()));
    }
    let factors = factor_ids.iter().map(|f| snapshot.factor(f.as_str())).collect::<Result<Vec<_>>>()?;
    let grid: Vec<Vec<Option<f64>>> = site_ids
        .iter()
        .map(|s| {
            factor_ids
                .iter()
                .map(|f| Ok(snapshot.aggregate_value(s.as_str(), f.as_str(), t)?.value))
                .collect::<Result<_>>()
        })
        .collect::<Result<_>>()?;

    let mut pie = Vec::new();
    let mut missing = Vec::new();
    for (site, row) in site_ids.iter().zip(&grid) {
        match row[0] {
            Some(v) if v >= 0.0 => pie.push(PieSlice { site_id: site.clone(), value: v, proportion: 0.0 }),
            _ => missing.push(site.clone()),
        }
    }
    let total: f64 = pie.iter().map(|s| s.value).sum();
    if total > 0.0 {
        for slice in &mut pie {
            slice.proportion = slice.value / total;
        }
    }

    let mut bars = Vec::new();
    let mut scales = Vec::new();
    let mut missing_cells = Vec::new();
    for (j, factor) in factors.iter().enumerate() {
        let present: Vec<(usize, f64)> = grid.iter().enumerate().filter_map(|(i, row)| row[j].map(|v| (i, v))).collect();
        let extent = present.iter().map(|(_, v)| v.abs()).fold(0.0, f64::max);
        for (i, row) in grid.iter().enumerate() {
            if row[j].is_none() {
                missing_cells.push((site_ids[i].clone(), factor.id.clone()));
            }
        }
        for &(i, v) in &present {
            let length = if extent > 0.0 { v / extent } else { 0.0 };
            bars.push(Bar { site_id: site_ids[i].clone(), factor_id: factor.id.clone(), value: v, length });
        }
        if !present.is_empty() {
            scales.push(BarScale {
                factor_id: factor.id.clone(),
                unit: factor.unit.clone(),
                min: present.iter().map(|p| p.1).fold(f64::INFINITY, f64::min),
                max: present.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max),
            });
        }
    }

    Ok(InsightCharts { t, pie_factor: factor_ids[0].clone(), pie, bars, scales, missing, missing_cells })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChildStatistics {
    pub n: usize,
    pub mean: Option<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    /// Population standard deviation.
    pub stddev: Option<f64>,
}

/// Summary statistics over the children's values at `t`.
pub fn child_statistics(snapshot: &DatasetSnapshot, site_id: &str, factor_id: &str, t: TimePoint) -> Result<ChildStatistics> {
    snapshot.factor(factor_id)?;
    let values: Vec<f64> = snapshot
        .children(site_id)?
        .iter()
        .map(|c| snapshot.aggregate_value(c.id.as_str(), factor_id, t).map(|a| a.value))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let n = values.len();
    if n == 0 {
        return Ok(ChildStatistics { n, mean: None, min: None, max: None, stddev: None });
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
    Ok(ChildStatistics {
        n,
        mean: Some(mean),
        min: values.iter().copied().reduce(f64::min),
        max: values.iter().copied().reduce(f64::max),
        stddev: Some(var.sqrt()),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TableColumn {
    pub factor_id: FactorId,
    pub name: String,
    pub unit: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TableCell {
    pub value: Option<f64>,
    pub coverage: f64,
    pub partial: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TableRow {
    pub site_id: SiteId,
    pub name: String,
    pub cells: Vec<TableCell>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DataTable {
    pub t: TimePoint,
    pub columns: Vec<TableColumn>,
    pub rows: Vec<TableRow>,
}

impl DataTable {
    /// `site_id,name,<factor>...`; absent cells are empty.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["site_id".to_owned(), "name".to_owned()];
        header.extend(self.columns.iter().map(|c| c.factor_id.to_string()));
        w.write_record(&header).unwrap();
        for row in &self.rows {
            let mut rec = vec![row.site_id.to_string(), row.name.clone()];
            rec.extend(row.cells.iter().map(|c| c.value.map(|v| v.to_string()).unwrap_or_default()));
            w.write_record(&rec).unwrap();
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }
}

pub fn data_table(snapshot: &DatasetSnapshot, site_ids: &[SiteId], factor_ids: &[FactorId], t: TimePoint) -> Result<DataTable> {
    let columns = factor_ids
        .iter()
        .map(|f| {
            let def = snapshot.factor(f.as_str())?;
            Ok(TableColumn { factor_id: def.id.clone(), name: def.name.clone(), unit: def.unit.clone() })
        })
        .collect::<Result<_>>()?;
    let rows = site_ids
        .iter()
        .map(|s| {
            let site = snapshot.site(s.as_str())?;
            let cells = factor_ids
                .iter()
                .map(|f| {
                    let a = snapshot.aggregate_value(s.as_str(), f.as_str(), t)?;
                    Ok(TableCell { value: a.value, coverage: a.coverage, partial: a.partial })
                })
                .collect::<Result<_>>()?;
            Ok(TableRow { site_id: site.id.clone(), name: site.name.clone(), cells })
        })
        .collect::<Result<_>>()?;
    Ok(DataTable { t, columns, rows })
}
