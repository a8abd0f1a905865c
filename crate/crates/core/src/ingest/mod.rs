//! Dataset bundles: a TOML manifest next to CSV tables and a GeoJSON file.
//!
//! ```text
//! manifest.toml       format_version, source, levels, default_t, [files]
//! sites.csv           id,name,level,parent_id
//! factors.csv         id,name,category,unit,kind,aggregation,direction
//! series.csv          site_id,factor_id,t,value      (long format)
//! geometries.geojson  FeatureCollection, property "site_id"
//! ```

mod synth;
mod tables;

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{
    AdminLevel, DatasetSnapshot, Geometry, Provenance, Ring, SiteId, SnapshotParts, TimePoint, ValidationReport,
};

pub use synth::{generate_synthetic, generate_synthetic_with, SynthSpec};
pub use tables::{parse_factor_catalog, parse_series_table, parse_sites_table, write_factor_catalog, write_series_table, write_sites_table};

pub const FORMAT_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.toml";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BundleManifest {
    pub format_version: u32,
    pub source: String,
    /// Level names from the root (ordinal 0) downwards.
    pub levels: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default_t: Option<TimePoint>,
    pub files: BundleFiles,
}

/// Paths relative to the manifest's directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BundleFiles {
    pub sites: String,
    pub factors: String,
    pub series: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometries: Option<String>,
}

impl BundleManifest {
    pub fn admin_levels(&self) -> Vec<AdminLevel> {
        self.levels
            .iter()
            .enumerate()
            .map(|(i, name)| AdminLevel { ordinal: i as u8, name: name.clone() })
            .collect()
    }

    fn referenced_files(&self) -> impl Iterator<Item = &String> {
        [&self.files.sites, &self.files.factors]
            .into_iter()
            .chain(self.files.series.iter())
            .chain(self.files.geometries.iter())
    }
}

/// A complete bundle held in memory: the manifest plus the raw bytes of every
/// file it references, keyed by relative path.
#[derive(Clone, Debug, PartialEq)]
pub struct Bundle {
    pub manifest: BundleManifest,
    pub files: BTreeMap<String, Vec<u8>>,
}

impl Bundle {
    /// Reads the manifest and every file it references.
    pub fn read(manifest_path: impl AsRef<Path>) -> Result<Self> {
        let manifest_path = resolve_manifest(manifest_path.as_ref());
        let text = fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
        let manifest: BundleManifest =
            toml::from_str(&text).map_err(|e| Error::parse(manifest_path.display().to_string(), 0, e.to_string()))?;
        if manifest.format_version != FORMAT_VERSION {
            return Err(Error::UnsupportedVersion(manifest.format_version));
        }
        let dir = manifest_path.parent().unwrap_or(Path::new("."));
        let mut files = BTreeMap::new();
        for rel in manifest.referenced_files() {
            let path = dir.join(rel);
            let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
            files.insert(rel.clone(), bytes);
        }
        Ok(Self { manifest, files })
    }

    /// Writes the manifest and files into `dir`, creating it if needed.
    /// Returns the manifest path.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<PathBuf> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (rel, bytes) in &self.files {
            let path = dir.join(rel);
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
            fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        }
        let path = dir.join(MANIFEST_FILE);
        fs::write(&path, self.manifest_text()).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    pub fn manifest_text(&self) -> String {
        toml::to_string(&self.manifest).expect("manifest serializes")
    }

    /// SHA-256 over the manifest and all files, truncated to 16 hex digits.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.manifest_text().as_bytes());
        for (rel, bytes) in &self.files {
            hasher.update((rel.len() as u64).to_le_bytes());
            hasher.update(rel.as_bytes());
            hasher.update((bytes.len() as u64).to_le_bytes());
            hasher.update(bytes);
        }
        let digest = hasher.finalize();
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    fn file(&self, rel: &str) -> Result<&[u8]> {
        self.files
            .get(rel)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::io(rel, std::io::Error::new(std::io::ErrorKind::NotFound, "file missing from bundle")))
    }

    /// Parses and validates the bundle into a snapshot.
    pub fn into_snapshot(&self) -> Result<DatasetSnapshot> {
        let parts = self.parse()?;
        let provenance = Provenance {
            source: self.manifest.source.clone(),
            loaded_at: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            stamp: self.digest(),
        };
        DatasetSnapshot::build(parts, provenance)
    }

    /// Parses every table without building indexes.
    pub fn parse(&self) -> Result<SnapshotParts> {
        let m = &self.manifest;
        let levels = m.admin_levels();
        let sites = parse_sites_table(self.file(&m.files.sites)?, &m.files.sites, &levels)?;
        let factors = parse_factor_catalog(self.file(&m.files.factors)?, &m.files.factors)?;
        let mut values = Vec::new();
        for rel in &m.files.series {
            values.extend(parse_series_table(self.file(rel)?, rel)?);
        }
        let mut notes = ValidationReport::default();
        let geometries = match &m.files.geometries {
            Some(rel) => {
                let known: HashSet<SiteId> = sites.iter().map(|s| s.id.clone()).collect();
                let parsed = parse_geometries(self.file(rel)?, &known)?;
                notes.extend(parsed.warnings);
                parsed.geometries
            }
            None => BTreeMap::new(),
        };
        Ok(SnapshotParts { levels, sites, factors, values, geometries, default_t: m.default_t, notes })
    }

    /// Serializes a snapshot back into bundle form. Loading the result gives
    /// a snapshot with the same query results.
    pub fn export(snapshot: &DatasetSnapshot) -> Self {
        let mut files = BTreeMap::new();
        files.insert("sites.csv".to_owned(), write_sites_table(snapshot.sites(), snapshot.levels()));
        files.insert("factors.csv".to_owned(), write_factor_catalog(snapshot.factors()));
        files.insert("series.csv".to_owned(), write_series_table(snapshot.values()));
        let geometries = if snapshot.geometries().is_empty() {
            None
        } else {
            let features: Vec<(SiteId, Geometry)> =
                snapshot.geometries().iter().map(|(k, g)| (k.clone(), (**g).clone())).collect();
            files.insert("geometries.geojson".to_owned(), write_geometries(&features));
            Some("geometries.geojson".to_owned())
        };
        let manifest = BundleManifest {
            format_version: FORMAT_VERSION,
            source: snapshot.provenance().source.clone(),
            levels: snapshot.levels().iter().map(|l| l.name.clone()).collect(),
            default_t: snapshot.default_time(),
            files: BundleFiles {
                sites: "sites.csv".into(),
                factors: "factors.csv".into(),
                series: vec!["series.csv".into()],
                geometries,
            },
        };
        Self { manifest, files }
    }
}

fn resolve_manifest(path: &Path) -> PathBuf {
    if path.is_dir() {
        path.join(MANIFEST_FILE)
    } else {
        path.to_path_buf()
    }
}

/// Loads a bundle from its manifest path (or the directory containing
/// `manifest.toml`) into a validated snapshot.
pub fn load_bundle(manifest_location: impl AsRef<Path>) -> Result<DatasetSnapshot> {
    Bundle::read(manifest_location)?.into_snapshot()
}

/// Serializes `snapshot` into `dir` as a bundle; returns the manifest path.
pub fn export_bundle(snapshot: &DatasetSnapshot, dir: impl AsRef<Path>) -> Result<PathBuf> {
    Bundle::export(snapshot).write(dir)
}

#[derive(Debug, Default)]
pub struct ParsedGeometries {
    pub geometries: BTreeMap<SiteId, Geometry>,
    pub warnings: ValidationReport,
}

/// Reads a GeoJSON FeatureCollection whose features carry a `site_id`
/// property and a Polygon or MultiPolygon geometry. Features naming sites
/// outside `known_sites` are dropped with a warning.
pub fn parse_geometries(document: &[u8], known_sites: &HashSet<SiteId>) -> Result<ParsedGeometries> {
    let doc: Value = serde_json::from_slice(document)
        .map_err(|e| Error::parse("geometries", e.line(), e.to_string()))?;
    if doc.get("type").and_then(Value::as_str) != Some("FeatureCollection") {
        return Err(Error::Geometry { feature: 0, message: "document is not a FeatureCollection".into() });
    }
    let features = doc
        .get("features")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Geometry { feature: 0, message: "missing features array".into() })?;

    let mut out = ParsedGeometries::default();
    for (i, feature) in features.iter().enumerate() {
        let err = |message: String| Error::Geometry { feature: i, message };
        let site_id = match feature.pointer("/properties/site_id") {
            Some(Value::String(s)) => SiteId::new(s.as_str()),
            Some(Value::Number(n)) => SiteId::new(n.to_string()),
            _ => return Err(err("missing site_id property".into())),
        };
        let geometry = feature.get("geometry").ok_or_else(|| err("missing geometry".into()))?;
        let kind = geometry.get("type").and_then(Value::as_str).unwrap_or("null");
        let coords = geometry.get("coordinates");
        let geometry = match (kind, coords) {
            ("Polygon", Some(c)) => Geometry::Polygon(parse_polygon(c).map_err(err)?),
            ("MultiPolygon", Some(Value::Array(polys))) => {
                Geometry::MultiPolygon(polys.iter().map(parse_polygon).collect::<Result<_, _>>().map_err(err)?)
            }
            ("Polygon" | "MultiPolygon", _) => return Err(err("malformed coordinates".into())),
            (other, _) => return Err(err(format!("unsupported geometry type `{other}`"))),
        };
        if !known_sites.contains(&site_id) {
            out.warnings.warning(
                "unknown geometry site",
                Some(&site_id),
                None,
                format!("feature #{i} references unknown site `{site_id}`; ignored"),
            );
            continue;
        }
        if out.geometries.insert(site_id.clone(), geometry).is_some() {
            return Err(err(format!("second geometry for site `{site_id}`")));
        }
    }
    Ok(out)
}

fn parse_polygon(value: &Value) -> Result<Vec<Ring>, String> {
    let rings = value.as_array().ok_or("polygon is not an array of rings")?;
    rings
        .iter()
        .map(|ring| {
            ring.as_array()
                .ok_or("ring is not an array")?
                .iter()
                .map(|pos| match pos.as_array().map(Vec::as_slice) {
                    Some([x, y, ..]) => match (x.as_f64(), y.as_f64()) {
                        (Some(x), Some(y)) => Ok([x, y]),
                        _ => Err("non-numeric coordinate".to_owned()),
                    },
                    _ => Err("position needs two coordinates".to_owned()),
                })
                .collect()
        })
        .collect()
}

pub fn write_geometries(features: &[(SiteId, Geometry)]) -> Vec<u8> {
    let features: Vec<Value> = features
        .iter()
        .map(|(id, g)| {
            serde_json::json!({
                "type": "Feature",
                "properties": { "site_id": id },
                "geometry": g.to_geojson(),
            })
        })
        .collect();
    let doc = serde_json::json!({ "type": "FeatureCollection", "features": features });
    let mut bytes = serde_json::to_vec(&doc).expect("geojson serializes");
    bytes.push(b'\n');
    bytes
}
