//! CSV tables: comma-separated, mandatory header row, RFC-4180 quoting.
//! Numbers use a decimal point and no thousands separators.

use std::collections::HashSet;

use csv::{ReaderBuilder, StringRecord, WriterBuilder};

use crate::error::{Error, Result};
use crate::model::{
    AdminLevel, Aggregation, FactorDefinition, FactorId, FactorKind, FactorValue, Site, SiteId, TimePoint,
};

struct Table {
    file: String,
    header: StringRecord,
    rows: Vec<(usize, StringRecord)>,
}

impl Table {
    fn read(data: &[u8], file: &str, required: &[&str]) -> Result<Self> {
        let mut reader = ReaderBuilder::new().has_headers(true).from_reader(data);
        let header = reader
            .headers()
            .map_err(|e| csv_error(file, e))?
            .iter()
            .map(str::trim)
            .collect::<StringRecord>();
        for col in required {
            if !header.iter().any(|h| h == *col) {
                return Err(Error::parse(file, 1, format!("missing column `{col}`")));
            }
        }
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| csv_error(file, e))?;
            let line = record.position().map_or(0, |p| p.line() as usize);
            rows.push((line, record));
        }
        Ok(Self { file: file.to_owned(), header, rows })
    }

    fn col(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    fn err(&self, line: usize, message: impl Into<String>) -> Error {
        Error::parse(self.file.clone(), line, message)
    }
}

fn csv_error(file: &str, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    let message = match e.kind() {
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => {
            format!("malformed row: expected {expected_len} columns, found {len}")
        }
        _ => e.to_string(),
    };
    Error::parse(file, line, message)
}

fn field(record: &StringRecord, idx: usize) -> &str {
    record.get(idx).unwrap_or("").trim()
}

/// One [`Site`] per row; an empty `parent_id` marks a root.
pub fn parse_sites_table(data: &[u8], file: &str, levels: &[AdminLevel]) -> Result<Vec<Site>> {
    let table = Table::read(data, file, &["id", "name", "level", "parent_id"])?;
    let (id, name, level, parent) = (
        table.col("id").unwrap(),
        table.col("name").unwrap(),
        table.col("level").unwrap(),
        table.col("parent_id").unwrap(),
    );
    table
        .rows
        .iter()
        .map(|(line, r)| {
            let level_name = field(r, level);
            let ordinal = levels
                .iter()
                .find(|l| l.name == level_name)
                .ok_or_else(|| table.err(*line, format!("unknown level `{level_name}`")))?
                .ordinal;
            let site_id = field(r, id);
            if site_id.is_empty() {
                return Err(table.err(*line, "empty site id"));
            }
            let parent_id = Some(field(r, parent)).filter(|p| !p.is_empty()).map(SiteId::from);
            Ok(Site {
                id: site_id.into(),
                name: field(r, name).to_owned(),
                level: ordinal,
                parent_id,
                geometry_ref: None,
            })
        })
        .collect()
}

fn parse_aggregation(s: &str) -> Option<Aggregation> {
    match s {
        "sum" => Some(Aggregation::Sum),
        "mean" => Some(Aggregation::Mean),
        "none" | "" => Some(Aggregation::None),
        _ => s
            .strip_prefix("weighted_mean(")
            .and_then(|rest| rest.strip_suffix(')'))
            .map(|w| Aggregation::WeightedMean(FactorId::new(w.trim()))),
    }
}

fn format_aggregation(a: &Aggregation) -> String {
    match a {
        Aggregation::Sum => "sum".into(),
        Aggregation::Mean => "mean".into(),
        Aggregation::None => "none".into(),
        Aggregation::WeightedMean(w) => format!("weighted_mean({w})"),
    }
}

/// Factor catalog rows: `id,name,category,unit,kind,aggregation,direction`,
/// where aggregation is `sum`, `mean`, `none` or `weighted_mean(<factor id>)`.
pub fn parse_factor_catalog(data: &[u8], file: &str) -> Result<Vec<FactorDefinition>> {
    let cols = ["id", "name", "category", "unit", "kind", "aggregation", "direction"];
    let table = Table::read(data, file, &cols)?;
    let idx: Vec<usize> = cols.iter().map(|c| table.col(c).unwrap()).collect();
    table
        .rows
        .iter()
        .map(|(line, r)| {
            let get = |i: usize| field(r, idx[i]);
            let kind = match get(4) {
                "hard" => FactorKind::Hard,
                "soft" => FactorKind::Soft,
                other => return Err(table.err(*line, format!("unknown factor kind `{other}`"))),
            };
            let aggregation = parse_aggregation(get(5))
                .ok_or_else(|| table.err(*line, format!("unknown aggregation `{}`", get(5))))?;
            Ok(FactorDefinition {
                id: get(0).into(),
                name: get(1).to_owned(),
                category: get(2).parse().map_err(|e: Error| table.err(*line, e.to_string()))?,
                unit: get(3).to_owned(),
                kind,
                aggregation,
                direction: get(6).parse().map_err(|e: Error| table.err(*line, e.to_string()))?,
            })
        })
        .collect()
}

/// Long-format observations: `site_id,factor_id,t,value` with `t` as `YYYY`
/// or `YYYY-MM`.
pub fn parse_series_table(data: &[u8], file: &str) -> Result<Vec<FactorValue>> {
    let table = Table::read(data, file, &["site_id", "factor_id", "t", "value"])?;
    let (site, factor, t, value) = (
        table.col("site_id").unwrap(),
        table.col("factor_id").unwrap(),
        table.col("t").unwrap(),
        table.col("value").unwrap(),
    );
    let mut seen = HashSet::with_capacity(table.rows.len());
    let mut out = Vec::with_capacity(table.rows.len());
    for (line, r) in &table.rows {
        let tp: TimePoint = field(r, t).parse().map_err(|e: Error| {
            let msg = e.to_string();
            if msg.contains("invalid month") {
                table.err(*line, format!("invalid month in `{}`", field(r, t)))
            } else {
                table.err(*line, format!("unparsable time `{}`", field(r, t)))
            }
        })?;
        let raw = field(r, value);
        let v: f64 = raw
            .parse()
            .map_err(|_| table.err(*line, format!("unparsable value `{raw}`")))?;
        if !v.is_finite() {
            return Err(table.err(*line, format!("non-finite value `{raw}`")));
        }
        let fv = FactorValue { site_id: field(r, site).into(), factor_id: field(r, factor).into(), t: tp, value: v };
        if !seen.insert((fv.site_id.clone(), fv.factor_id.clone(), tp)) {
            return Err(table.err(
                *line,
                format!("duplicate observation for ({}, {}, {tp})", fv.site_id, fv.factor_id),
            ));
        }
        out.push(fv);
    }
    Ok(out)
}

fn finish(writer: csv::Writer<Vec<u8>>) -> Vec<u8> {
    writer.into_inner().expect("in-memory writer")
}

pub fn write_sites_table(sites: &[Site], levels: &[AdminLevel]) -> Vec<u8> {
    let mut w = WriterBuilder::new().from_writer(Vec::new());
    w.write_record(["id", "name", "level", "parent_id"]).unwrap();
    for site in sites {
        let level = &levels[usize::from(site.level)].name;
        let parent = site.parent_id.as_ref().map_or("", SiteId::as_str);
        w.write_record([site.id.as_str(), &site.name, level, parent]).unwrap();
    }
    finish(w)
}

pub fn write_factor_catalog(factors: &[FactorDefinition]) -> Vec<u8> {
    let mut w = WriterBuilder::new().from_writer(Vec::new());
    w.write_record(["id", "name", "category", "unit", "kind", "aggregation", "direction"]).unwrap();
    for f in factors {
        let kind = match f.kind {
            FactorKind::Hard => "hard",
            FactorKind::Soft => "soft",
        };
        w.write_record([
            f.id.as_str(),
            &f.name,
            f.category.as_str(),
            &f.unit,
            kind,
            &format_aggregation(&f.aggregation),
            f.direction.as_str(),
        ])
        .unwrap();
    }
    finish(w)
}

/// Values are written in shortest round-trip form.
pub fn write_series_table(values: impl IntoIterator<Item = FactorValue>) -> Vec<u8> {
    let mut w = WriterBuilder::new().from_writer(Vec::new());
    w.write_record(["site_id", "factor_id", "t", "value"]).unwrap();
    for v in values {
        w.write_record([v.site_id.as_str(), v.factor_id.as_str(), &v.t.to_string(), &v.value.to_string()])
            .unwrap();
    }
    finish(w)
}
