//! Seeded synthetic bundles for property tests and demos.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{write_factor_catalog, write_geometries, write_series_table, write_sites_table, Bundle, BundleFiles, BundleManifest, FORMAT_VERSION};
use crate::model::{
    AdminLevel, Aggregation, Category, Direction, FactorDefinition, FactorId, FactorKind, FactorValue, Geometry, Site, SiteId, TimePoint,
};

const LEVEL_NAMES: [&str; 5] = ["nation", "state", "county", "district", "municipality"];

#[derive(Clone, Debug, PartialEq)]
pub struct SynthSpec {
    /// Number of sites per level, root level first.
    pub levels: Vec<usize>,
    pub factors: usize,
    pub timepoints: usize,
    pub seed: u64,
    /// Probability that a leaf observation is left out.
    pub missing_rate: f64,
    /// Probability that a non-leaf sum value is stored rather than left to
    /// aggregation. Stored parent sums always equal the sum of their children.
    pub parent_store_rate: f64,
    /// Leaf values are integers drawn from `0..=max_value`.
    pub max_value: u32,
}

impl SynthSpec {
    pub fn new(levels: Vec<usize>, factors: usize, timepoints: usize, seed: u64) -> Self {
        Self { levels, factors, timepoints, seed, missing_rate: 0.0, parent_store_rate: 1.0, max_value: 10_000 }
    }
}

/// Balanced hierarchy with `levels[i]` sites at level `i`, full data and
/// stored parent sums. Deterministic per seed.
pub fn generate_synthetic(levels: &[usize], factors: usize, timepoints: usize, seed: u64) -> Bundle {
    generate_synthetic_with(&SynthSpec::new(levels.to_vec(), factors, timepoints, seed))
}

pub fn generate_synthetic_with(spec: &SynthSpec) -> Bundle {
    assert!(!spec.levels.is_empty() && spec.levels.iter().all(|&n| n >= 1), "every level needs at least one site");
    assert!(spec.factors >= 1 && spec.timepoints >= 1, "factor and time point counts must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let levels: Vec<AdminLevel> = (0..spec.levels.len())
        .map(|i| AdminLevel {
            ordinal: i as u8,
            name: LEVEL_NAMES.get(i).map_or_else(|| format!("level{i}"), |n| n.to_string()),
        })
        .collect();

    // Child j of level l hangs under parent floor(j * n_{l-1} / n_l), which keeps
    // siblings contiguous and spreads children evenly.
    let mut sites = Vec::new();
    let mut level_ids: Vec<Vec<SiteId>> = Vec::new();
    let mut parent_of: Vec<Vec<Option<usize>>> = Vec::new();
    for (l, &n) in spec.levels.iter().enumerate() {
        let mut ids = Vec::with_capacity(n);
        let mut parents = Vec::with_capacity(n);
        for j in 0..n {
            let id = SiteId::new(format!("s{l}_{j:05}"));
            let parent = (l > 0).then(|| j * spec.levels[l - 1] / n);
            sites.push(Site {
                id: id.clone(),
                name: format!("Site {l}.{j}"),
                level: l as u8,
                parent_id: parent.map(|p| level_ids[l - 1][p].clone()),
                geometry_ref: None,
            });
            ids.push(id);
            parents.push(parent);
        }
        level_ids.push(ids);
        parent_of.push(parents);
    }
    let depth = spec.levels.len();
    let mut children: Vec<Vec<Vec<usize>>> = spec.levels.iter().map(|&n| vec![Vec::new(); n]).collect();
    for l in 1..depth {
        for (j, p) in parent_of[l].iter().enumerate() {
            children[l - 1][p.unwrap()].push(j);
        }
    }

    let aggregations = [Aggregation::Mean, Aggregation::Sum, Aggregation::WeightedMean(FactorId::new("f00")), Aggregation::None];
    let directions = [Direction::HigherIsBetter, Direction::LowerIsBetter, Direction::Neutral];
    let factors: Vec<FactorDefinition> = (0..spec.factors)
        .map(|i| FactorDefinition {
            id: FactorId::new(format!("f{i:02}")),
            name: format!("Factor {i}"),
            category: Category::ALL[i % Category::ALL.len()],
            unit: "units".into(),
            kind: FactorKind::Hard,
            aggregation: if i == 0 { Aggregation::Sum } else { aggregations[(i - 1) % aggregations.len()].clone() },
            direction: directions[i % directions.len()],
        })
        .collect();

    let times: Vec<TimePoint> = (0..spec.timepoints)
        .map(|k| TimePoint::new(2000 + (k / 12) as i32, (k % 12 + 1) as u8).unwrap())
        .collect();

    let mut values = Vec::new();
    for factor in &factors {
        let summed = factor.aggregation == Aggregation::Sum;
        for &t in &times {
            // Leaves first; every parent's full sum is then exact over its children.
            let mut full: Vec<Vec<Option<f64>>> = spec.levels.iter().map(|&n| vec![None; n]).collect();
            let mut stored: Vec<Vec<bool>> = spec.levels.iter().map(|&n| vec![false; n]).collect();
            for l in (0..depth).rev() {
                for j in 0..spec.levels[l] {
                    let kids = if l + 1 < depth { children[l][j].as_slice() } else { &[] };
                    if kids.is_empty() {
                        let present = rng.gen_bool(1.0 - spec.missing_rate);
                        let v = f64::from(rng.gen_range(0..=spec.max_value));
                        full[l][j] = present.then_some(v);
                        stored[l][j] = present;
                    } else if summed {
                        let present: Vec<f64> = kids.iter().filter_map(|&c| full[l + 1][c]).collect();
                        if !present.is_empty() {
                            full[l][j] = Some(present.iter().sum());
                            stored[l][j] = rng.gen_bool(spec.parent_store_rate);
                        }
                    }
                }
            }
            for l in 0..depth {
                for j in 0..spec.levels[l] {
                    if let (true, Some(v)) = (stored[l][j], full[l][j]) {
                        values.push(FactorValue { site_id: level_ids[l][j].clone(), factor_id: factor.id.clone(), t, value: v });
                    }
                }
            }
        }
    }
    values.sort_by(|a, b| (&a.site_id, &a.factor_id, a.t).cmp(&(&b.site_id, &b.factor_id, b.t)));

    let mut geometries = Vec::new();
    let root_box = (5.0, 47.0, 15.0, 55.0);
    let mut boxes: Vec<Vec<(f64, f64, f64, f64)>> = spec.levels.iter().map(|&n| vec![root_box; n]).collect();
    for l in 0..depth {
        if l == 0 {
            // roots share the root box in strips
            split_box(root_box, spec.levels[0], &mut boxes[0]);
        }
        for j in 0..spec.levels[l] {
            geometries.push((level_ids[l][j].clone(), rectangle(boxes[l][j])));
            if l + 1 < depth {
                let kids = &children[l][j];
                let mut sub = vec![root_box; kids.len()];
                split_box(boxes[l][j], kids.len(), &mut sub);
                for (k, &c) in kids.iter().enumerate() {
                    boxes[l + 1][c] = sub[k];
                }
            }
        }
    }
    geometries.sort_by(|a, b| a.0.cmp(&b.0));

    let manifest = BundleManifest {
        format_version: FORMAT_VERSION,
        source: format!("synthetic levels={:?} factors={} timepoints={} seed={}", spec.levels, spec.factors, spec.timepoints, spec.seed),
        levels: levels.iter().map(|l| l.name.clone()).collect(),
        default_t: times.last().copied(),
        files: BundleFiles {
            sites: "sites.csv".into(),
            factors: "factors.csv".into(),
            series: vec!["series.csv".into()],
            geometries: Some("geometries.geojson".into()),
        },
    };
    let mut files = BTreeMap::new();
    files.insert("sites.csv".to_owned(), write_sites_table(&sites, &levels));
    files.insert("factors.csv".to_owned(), write_factor_catalog(&factors));
    files.insert("series.csv".to_owned(), write_series_table(values));
    files.insert("geometries.geojson".to_owned(), write_geometries(&geometries));
    Bundle { manifest, files }
}

/// Splits a box into `n` equal strips along its longer side.
fn split_box((x0, y0, x1, y1): (f64, f64, f64, f64), n: usize, out: &mut [(f64, f64, f64, f64)]) {
    let n_f = n as f64;
    for (k, slot) in out.iter_mut().enumerate().take(n) {
        let (a, b) = (k as f64 / n_f, (k + 1) as f64 / n_f);
        *slot = if x1 - x0 >= y1 - y0 {
            (x0 + (x1 - x0) * a, y0, x0 + (x1 - x0) * b, y1)
        } else {
            (x0, y0 + (y1 - y0) * a, x1, y0 + (y1 - y0) * b)
        };
    }
}

fn rectangle((x0, y0, x1, y1): (f64, f64, f64, f64)) -> Geometry {
    Geometry::Polygon(vec![vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1], [x0, y0]]])
}
