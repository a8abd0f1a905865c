//! View-ready structures: choropleth layers, time-series graphs, insight
//! charts, data tables and static SVG export.

mod classify;
mod svg;
mod views;

pub use classify::{check_class_count, classify, ClassBreaks, Scheme, DEFAULT_CLASSES, MAX_CLASSES, MIN_CLASSES};
pub use svg::{class_color, render_choropleth_svg, NO_DATA_FILL, PALETTE};
pub use views::{
    build_choropleth, build_insights, build_series_view, child_statistics, data_table, format_number, Bar, BarScale,
    ChildStatistics, ChoroplethLayer, ChoroplethSite, DataTable, InsightCharts, PieSlice, SeriesPoint, SeriesView,
    SiteSeries, TableCell, TableColumn, TableRow,
};
