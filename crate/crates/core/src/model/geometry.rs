use serde_json::{json, Value};

/// Closed linear ring of `[longitude, latitude]` positions; first == last.
pub type Ring = Vec<[f64; 2]>;

/// Areal shape of a site in WGS84 longitude/latitude.
#[derive(Clone, Debug, PartialEq)]
pub enum Geometry {
    /// Exterior ring followed by optional holes.
    Polygon(Vec<Ring>),
    MultiPolygon(Vec<Vec<Ring>>),
}

impl Geometry {
    pub fn polygons(&self) -> impl Iterator<Item = &[Ring]> {
        let slice: Vec<&[Ring]> = match self {
            Geometry::Polygon(rings) => vec![rings.as_slice()],
            Geometry::MultiPolygon(polys) => polys.iter().map(Vec::as_slice).collect(),
        };
        slice.into_iter()
    }

    /// `(min_lon, min_lat, max_lon, max_lat)`.
    pub fn bounds(&self) -> (f64, f64, f64, f64) {
        let mut b = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for rings in self.polygons() {
            for [x, y] in rings.iter().flatten() {
                b.0 = b.0.min(*x);
                b.1 = b.1.min(*y);
                b.2 = b.2.max(*x);
                b.3 = b.3.max(*y);
            }
        }
        b
    }

    /// Checks ring closure, ring length, coordinate ranges and that no ring
    /// crosses itself.
    pub fn validate(&self) -> Result<(), String> {
        let mut any = false;
        for (p, rings) in self.polygons().enumerate() {
            if rings.is_empty() {
                return Err(format!("polygon {p} has no rings"));
            }
            for (r, ring) in rings.iter().enumerate() {
                any = true;
                check_ring(ring).map_err(|e| format!("polygon {p} ring {r}: {e}"))?;
            }
        }
        if !any {
            return Err("empty geometry".into());
        }
        Ok(())
    }

    pub fn to_geojson(&self) -> Value {
        match self {
            Geometry::Polygon(rings) => json!({ "type": "Polygon", "coordinates": rings }),
            Geometry::MultiPolygon(polys) => {
                json!({ "type": "MultiPolygon", "coordinates": polys })
            }
        }
    }
}

fn check_ring(ring: &Ring) -> Result<(), String> {
    if ring.len() < 4 {
        return Err(format!("ring needs at least 4 positions, got {}", ring.len()));
    }
    if ring.first() != ring.last() {
        return Err("ring is not closed".into());
    }
    for [lon, lat] in ring {
        if !lon.is_finite() || !lat.is_finite() {
            return Err("non-finite coordinate".into());
        }
        if !(-180.0..=180.0).contains(lon) || !(-90.0..=90.0).contains(lat) {
            return Err(format!("coordinate ({lon}, {lat}) outside WGS84 range"));
        }
    }
    let n = ring.len() - 1;
    for i in 0..n {
        for j in (i + 1)..n {
            // adjacent edges share an endpoint, as do the first and last edge
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            if segments_intersect(ring[i], ring[i + 1], ring[j], ring[j + 1]) {
                return Err(format!("ring self-intersects at edges {i} and {j}"));
            }
        }
    }
    Ok(())
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn on_segment(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> bool {
    p[0] >= a[0].min(b[0]) && p[0] <= a[0].max(b[0]) && p[1] >= a[1].min(b[1]) && p[1] <= a[1].max(b[1])
}

fn segments_intersect(p1: [f64; 2], p2: [f64; 2], q1: [f64; 2], q2: [f64; 2]) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(q1, q2, p1))
        || (d2 == 0.0 && on_segment(q1, q2, p2))
        || (d3 == 0.0 && on_segment(p1, p2, q1))
        || (d4 == 0.0 && on_segment(p1, p2, q2))
}
