use std::fmt::Write;

use super::views::ChoroplethLayer;

/// Sequential single-hue ramp, light to dark.
pub const PALETTE: [&str; 9] = ["#f7fbff", "#deebf7", "#c6dbef", "#9ecae1", "#6baed6", "#4292c6", "#2171b5", "#08519c", "#08306b"];
pub const NO_DATA_FILL: &str = "#cccccc";

const LEGEND_WIDTH: f64 = 180.0;
const MARGIN: f64 = 10.0;
const SWATCH: f64 = 14.0;
const ROW: f64 = 20.0;

/// Fill for class `class` of `k`; classes spread evenly over the ramp so
/// the lightest and darkest entries are always used.
pub fn class_color(class: i32, k: usize) -> &'static str {
    if class < 0 || k < 2 {
        return NO_DATA_FILL;
    }
    let idx = (class as f64 * (PALETTE.len() - 1) as f64 / (k - 1) as f64).round() as usize;
    PALETTE[idx.min(PALETTE.len() - 1)]
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

/// Equirectangular projection fitted to the bounds of all geometries, with
/// longitudes shrunk by the cosine of the central latitude.
struct Projection {
    min_x: f64,
    max_y: f64,
    kx: f64,
    scale: f64,
    ox: f64,
    oy: f64,
}

impl Projection {
    fn fit(bounds: (f64, f64, f64, f64), width: f64, height: f64) -> Self {
        let (min_x, min_y, max_x, max_y) = bounds;
        let kx = ((min_y + max_y) / 2.0).to_radians().cos();
        let w = ((max_x - min_x) * kx).max(1e-12);
        let h = (max_y - min_y).max(1e-12);
        let scale = (width / w).min(height / h);
        Projection { min_x, max_y, kx, scale, ox: (width - w * scale) / 2.0, oy: (height - h * scale) / 2.0 }
    }

    fn apply(&self, [x, y]: [f64; 2]) -> (f64, f64) {
        (MARGIN + self.ox + (x - self.min_x) * self.kx * self.scale, MARGIN + self.oy + (self.max_y - y) * self.scale)
    }
}

/// Renders the layer as an SVG 1.1 document: the map on the left, the
/// legend on the right. Sites without a geometry are skipped and listed in
/// the document metadata. Output is a pure function of the input.
pub fn render_choropleth_svg(layer: &ChoroplethLayer, width: u32, height: u32) -> String {
    let (width, height) = (f64::from(width.max(1)), f64::from(height.max(1)));
    let map_w = (width - LEGEND_WIDTH - 3.0 * MARGIN).max(1.0);
    let map_h = (height - 2.0 * MARGIN).max(1.0);
    let k = layer.classification.k;

    let drawn: Vec<_> = layer.sites.iter().filter_map(|s| s.geometry.as_ref().map(|g| (s, g))).collect();
    let warnings: Vec<String> =
        layer.sites.iter().filter(|s| s.geometry.is_none()).map(|s| format!("no geometry for site {}", s.site_id)).collect();

    let bounds = drawn.iter().map(|(_, g)| g.bounds()).reduce(|a, b| (a.0.min(b.0), a.1.min(b.1), a.2.max(b.2), a.3.max(b.3)));

    let mut svg = String::new();
    writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    )
    .unwrap();
    writeln!(svg, "<title>{} by {} at {}</title>", escape(&layer.parent_id.to_string()), escape(&layer.factor_name), layer.t).unwrap();
    if !warnings.is_empty() {
        writeln!(svg, "<metadata>").unwrap();
        for w in &warnings {
            writeln!(svg, r#"<warning>{}</warning>"#, escape(w)).unwrap();
        }
        writeln!(svg, "</metadata>").unwrap();
    }

    writeln!(svg, r##"<g id="map" stroke="#555555" stroke-width="0.5">"##).unwrap();
    if let Some(bounds) = bounds {
        let proj = Projection::fit(bounds, map_w, map_h);
        for (site, geometry) in &drawn {
            let mut d = String::new();
            for polygon in geometry.polygons() {
                for ring in polygon {
                    for (i, &p) in ring.iter().enumerate() {
                        let (x, y) = proj.apply(p);
                        write!(d, "{}{x:.2},{y:.2}", if i == 0 { "M" } else { "L" }).unwrap();
                    }
                    d.push('Z');
                }
            }
            writeln!(
                svg,
                r#"<path id="site-{}" class="class-{}" fill="{}" fill-rule="evenodd" d="{d}"><title>{}</title></path>"#,
                escape(site.site_id.as_str()),
                site.class,
                class_color(site.class, k),
                escape(&site.name),
            )
            .unwrap();
        }
    }
    writeln!(svg, "</g>").unwrap();

    let lx = width - LEGEND_WIDTH - MARGIN;
    writeln!(svg, r#"<g id="legend" font-family="sans-serif" font-size="11">"#).unwrap();
    writeln!(svg, r#"<text x="{lx}" y="{}" font-weight="bold">{}</text>"#, MARGIN + 11.0, escape(&layer.factor_name)).unwrap();
    let mut y = MARGIN + ROW;
    let mut entry = |fill: &str, label: &str, svg: &mut String| {
        writeln!(
            svg,
            r##"<g class="legend-entry"><rect x="{lx}" y="{y}" width="{SWATCH}" height="{SWATCH}" fill="{fill}" stroke="#555555" stroke-width="0.5"/><text x="{}" y="{}">{}</text></g>"##,
            lx + SWATCH + 6.0,
            y + SWATCH - 3.0,
            escape(label),
        )
        .unwrap();
        y += ROW;
    };
    for (c, label) in layer.legend.iter().enumerate() {
        entry(class_color(c as i32, k), label, &mut svg);
    }
    if layer.sites.iter().any(|s| s.class < 0) {
        entry(NO_DATA_FILL, "no data", &mut svg);
    }
    writeln!(svg, "</g>").unwrap();
    svg.push_str("</svg>\n");
    svg
}
