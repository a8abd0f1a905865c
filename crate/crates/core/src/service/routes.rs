use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::QueryRejection;
use axum::extract::{Path, Query, State};
use axum::http::header;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{ApiError, ServiceState};
use crate::model::{AdminLevel, DatasetSnapshot, FactorDefinition, FactorId, Site, SiteId, TimePoint};
use crate::present::{self, Scheme};
use crate::query::{self, ChecklistCriterion, Condition, LookupMode, WhereQuery};

type Shared = Arc<ServiceState>;
type Params = Result<Query<BTreeMap<String, String>>, QueryRejection>;
type ApiResult = Result<Response, ApiError>;

/// Carries the snapshot stamp on responses that have no JSON envelope.
pub const STAMP_HEADER: header::HeaderName = header::HeaderName::from_static("x-sitelens-stamp");

pub fn router(state: Shared) -> Router {
    Router::new()
        .route("/api/health", get(health))
        .route("/api/levels", get(levels))
        .route("/api/sites", get(sites))
        .route("/api/sites/:id", get(site))
        .route("/api/sites/:id/children", get(children))
        .route("/api/sites/:id/parent", get(parent))
        .route("/api/sites/:id/path", get(path))
        .route("/api/geometries", get(geometries))
        .route("/api/factors", get(factors))
        .route("/api/series", get(series))
        .route("/api/statistics", get(statistics))
        .route("/api/what", get(what))
        .route("/api/query/where", post(where_query))
        .route("/api/query/when", post(when_query))
        .route("/api/compare", post(compare))
        .route("/api/checklist", post(checklist))
        .route("/api/insights", post(insights))
        .route("/api/choropleth", get(choropleth))
        .route("/api/admin/reload", post(reload))
        .fallback(|| async { ApiError::not_found("no such route") })
        .with_state(state)
}

/// Success body: `{"stamp": <provenance stamp>, "data": ...}`.
fn envelope<T: Serialize>(snap: &DatasetSnapshot, data: T) -> ApiResult {
    Ok(Json(json!({ "stamp": snap.provenance().stamp, "data": data })).into_response())
}

fn params(p: Params) -> Result<BTreeMap<String, String>, ApiError> {
    p.map(|Query(q)| q).map_err(|e| ApiError::bad_request(e.body_text()))
}

fn body<T: DeserializeOwned>(bytes: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(bytes).map_err(|e| ApiError::bad_request(format!("malformed request body: {e}")))
}

fn required<'a>(q: &'a BTreeMap<String, String>, key: &str) -> Result<&'a str, ApiError> {
    q.get(key).map(String::as_str).filter(|v| !v.is_empty()).ok_or_else(|| ApiError::bad_request(format!("missing parameter `{key}`")))
}

fn list<T: From<&'static str> + From<String>>(raw: &str) -> Vec<T> {
    raw.split(',').map(str::trim).filter(|s| !s.is_empty()).map(|s| T::from(s.to_owned())).collect()
}

/// `t` from the request, falling back to the bundle's default time.
fn time_or_default(snap: &DatasetSnapshot, t: Option<&str>) -> Result<TimePoint, ApiError> {
    match t.filter(|t| !t.is_empty()) {
        Some(t) => Ok(t.parse()?),
        None => snap.default_time().ok_or_else(|| ApiError::bad_request("missing parameter `t` and the dataset has no default time")),
    }
}

#[derive(Serialize)]
struct SiteRecord<'a> {
    id: &'a SiteId,
    name: &'a str,
    level: &'a str,
    level_ordinal: u8,
    parent_id: Option<&'a SiteId>,
    child_count: usize,
    geometry_ref: Option<&'a SiteId>,
}

fn record<'a>(snap: &'a DatasetSnapshot, site: &'a Site) -> SiteRecord<'a> {
    SiteRecord {
        id: &site.id,
        name: &site.name,
        level: &snap.levels()[usize::from(site.level)].name,
        level_ordinal: site.level,
        parent_id: site.parent_id.as_ref(),
        child_count: snap.children(site.id.as_str()).map_or(0, |c| c.len()),
        geometry_ref: site.geometry_ref.as_ref(),
    }
}

fn records<'a>(snap: &'a DatasetSnapshot, sites: Vec<&'a Site>) -> Vec<SiteRecord<'a>> {
    sites.into_iter().map(|s| record(snap, s)).collect()
}

async fn health(State(state): State<Shared>) -> ApiResult {
    let snap = state.snapshot();
    let p = snap.provenance();
    envelope(
        &snap,
        json!({
            "status": "ok",
            "source": p.source,
            "stamp": p.stamp,
            "loaded_at": p.loaded_at,
            "levels": snap.levels().len(),
            "sites": snap.sites().len(),
            "factors": snap.factors().len(),
            "values": snap.value_count(),
            "default_t": snap.default_time(),
            "warnings": snap.warnings().len(),
        }),
    )
}

async fn levels(State(state): State<Shared>) -> ApiResult {
    #[derive(Serialize)]
    struct Level<'a> {
        #[serde(flatten)]
        level: &'a AdminLevel,
        site_count: usize,
    }
    let snap = state.snapshot();
    let out: Vec<Level> = snap
        .levels()
        .iter()
        .map(|l| Level { level: l, site_count: snap.level_members(l.ordinal, None).map_or(0, |m| m.len()) })
        .collect();
    envelope(&snap, out)
}

async fn sites(State(state): State<Shared>, q: Params) -> ApiResult {
    let q = params(q)?;
    let snap = state.snapshot();
    let parent = q.get("parent").filter(|p| !p.is_empty());
    let list = match q.get("level").filter(|l| !l.is_empty()) {
        Some(level) => snap.level_members(snap.level_by_name(level)?, parent.map(String::as_str))?,
        None => match parent {
            Some(p) => snap.children(p)?,
            None => snap.sites().iter().collect(),
        },
    };
    envelope(&snap, records(&snap, list))
}

async fn site(State(state): State<Shared>, Path(id): Path<String>) -> ApiResult {
    let snap = state.snapshot();
    let site = snap.site(&id)?;
    envelope(&snap, record(&snap, site))
}

async fn children(State(state): State<Shared>, Path(id): Path<String>) -> ApiResult {
    let snap = state.snapshot();
    let list = snap.children(&id)?;
    envelope(&snap, records(&snap, list))
}

async fn parent(State(state): State<Shared>, Path(id): Path<String>) -> ApiResult {
    let snap = state.snapshot();
    let parent = snap.parent(&id)?;
    envelope(&snap, parent.map(|p| record(&snap, p)))
}

/// Root first, ending at the site itself.
async fn path(State(state): State<Shared>, Path(id): Path<String>) -> ApiResult {
    let snap = state.snapshot();
    let mut list = snap.path_to_root(&id)?;
    list.reverse();
    envelope(&snap, records(&snap, list))
}

/// GeoJSON FeatureCollection of the parent's children, with the stamp as a
/// foreign member.
async fn geometries(State(state): State<Shared>, q: Params) -> ApiResult {
    let q = params(q)?;
    let snap = state.snapshot();
    let parent = required(&q, "parent")?;
    let features: Vec<Value> = snap
        .children(parent)?
        .into_iter()
        .filter_map(|s| {
            let g = snap.geometry(s.id.as_str())?;
            Some(json!({
                "type": "Feature",
                "properties": { "site_id": s.id, "name": s.name },
                "geometry": g.to_geojson(),
            }))
        })
        .collect();
    Ok(Json(json!({ "type": "FeatureCollection", "stamp": snap.provenance().stamp, "features": features })).into_response())
}

async fn factors(State(state): State<Shared>) -> ApiResult {
    let snap = state.snapshot();
    let list: &[FactorDefinition] = snap.factors();
    envelope(&snap, list)
}

/// `site` may list several comma-separated ids.
async fn series(State(state): State<Shared>, q: Params) -> ApiResult {
    let q = params(q)?;
    let snap = state.snapshot();
    let sites: Vec<SiteId> = list(required(&q, "site")?);
    let factor = required(&q, "factor")?;
    let range = match (q.get("from"), q.get("to")) {
        (None, None) => None,
        (from, to) => {
            let from = from.map_or(Ok(TimePoint::year(0)), |s| s.parse())?;
            let to = to.map_or(Ok(TimePoint::year(9999)), |s| s.parse())?;
            Some((from, to))
        }
    };
    let reference = match q.get("reference") {
        Some(r) => Some(r.parse::<f64>().map_err(|_| ApiError::bad_request(format!("reference `{r}` is not a number")))?),
        None => None,
    };
    let highlight = q.get("highlight").map(|h| SiteId::from(h.as_str()));
    envelope(&snap, present::build_series_view(&snap, &sites, factor, range, reference, highlight.as_ref())?)
}

async fn statistics(State(state): State<Shared>, q: Params) -> ApiResult {
    let q = params(q)?;
    let snap = state.snapshot();
    let t = time_or_default(&snap, q.get("t").map(String::as_str))?;
    envelope(&snap, present::child_statistics(&snap, required(&q, "site")?, required(&q, "factor")?, t)?)
}

async fn what(State(state): State<Shared>, q: Params) -> ApiResult {
    let q = params(q)?;
    let snap = state.snapshot();
    let site = required(&q, "site")?;
    let factors: Vec<FactorId> = list(required(&q, "factors")?);
    let t = time_or_default(&snap, q.get("t").map(String::as_str))?;
    let mode = match q.get("mode").map(String::as_str) {
        None | Some("exact") => LookupMode::Exact,
        Some("latest_at_or_before") | Some("latest") => LookupMode::LatestAtOrBefore,
        Some(m) => return Err(ApiError::bad_request(format!("unknown mode `{m}`"))),
    };
    envelope(&snap, query::lookup_what(&snap, site, &factors, t, mode)?)
}

async fn where_query(State(state): State<Shared>, raw: Bytes) -> ApiResult {
    let request: WhereQuery = body(&raw)?;
    let snap = state.snapshot();
    envelope(&snap, query::search_where(&snap, &request)?)
}

/// Either `{"op": "lt", "value": 7}` or the text form `"<7"`.
#[derive(Deserialize)]
#[serde(untagged)]
enum ConditionInput {
    Structured(Condition),
    Text(String),
}

#[derive(Deserialize)]
struct WhenRequest {
    site: SiteId,
    factor: FactorId,
    condition: ConditionInput,
}

async fn when_query(State(state): State<Shared>, raw: Bytes) -> ApiResult {
    let request: WhenRequest = body(&raw)?;
    let condition = match request.condition {
        ConditionInput::Structured(c) => c,
        ConditionInput::Text(s) => s.parse()?,
    };
    let snap = state.snapshot();
    envelope(&snap, query::search_when(&snap, request.site.as_str(), request.factor.as_str(), &condition)?)
}

#[derive(Deserialize)]
struct SitesFactorsRequest {
    sites: Vec<SiteId>,
    factors: Vec<FactorId>,
    #[serde(default)]
    t: Option<String>,
}

async fn compare(State(state): State<Shared>, raw: Bytes) -> ApiResult {
    let request: SitesFactorsRequest = body(&raw)?;
    let snap = state.snapshot();
    let t = time_or_default(&snap, request.t.as_deref())?;
    envelope(&snap, query::compare_sites(&snap, &request.sites, &request.factors, t)?)
}

#[derive(Deserialize)]
struct ChecklistRequest {
    sites: Vec<SiteId>,
    criteria: Vec<ChecklistCriterion>,
    #[serde(default)]
    t: Option<String>,
}

async fn checklist(State(state): State<Shared>, raw: Bytes) -> ApiResult {
    let request: ChecklistRequest = body(&raw)?;
    let snap = state.snapshot();
    let t = time_or_default(&snap, request.t.as_deref())?;
    envelope(&snap, query::checklist_score(&snap, &request.sites, &request.criteria, t)?)
}

/// Charts plus the raw-value table for the same selection.
async fn insights(State(state): State<Shared>, raw: Bytes) -> ApiResult {
    let request: SitesFactorsRequest = body(&raw)?;
    let snap = state.snapshot();
    let t = time_or_default(&snap, request.t.as_deref())?;
    let charts = present::build_insights(&snap, &request.sites, &request.factors, t)?;
    let table = present::data_table(&snap, &request.sites, &request.factors, t)?;
    envelope(&snap, json!({ "charts": charts, "table": table }))
}

/// JSON layer by default; `format=svg` returns the rendered map.
async fn choropleth(State(state): State<Shared>, q: Params) -> ApiResult {
    let q = params(q)?;
    let snap = state.snapshot();
    let t = time_or_default(&snap, q.get("t").map(String::as_str))?;
    let scheme: Scheme = q.get("scheme").map_or(Ok(Scheme::default()), |s| s.parse())?;
    let k = match q.get("k") {
        Some(k) => k.parse::<usize>().map_err(|_| ApiError::bad_request(format!("k `{k}` is not a count")))?,
        None => present::DEFAULT_CLASSES,
    };
    let layer = present::build_choropleth(&snap, required(&q, "parent")?, required(&q, "factor")?, t, scheme, k)?;
    match q.get("format").map(String::as_str) {
        None | Some("json") => envelope(&snap, layer),
        Some("svg") => {
            let headers = [(header::CONTENT_TYPE, "image/svg+xml"), (STAMP_HEADER, snap.provenance().stamp.as_str())];
            Ok((headers, present::render_choropleth_svg(&layer, 800, 600)).into_response())
        }
        Some(f) => Err(ApiError::bad_request(format!("unknown format `{f}`"))),
    }
}

#[derive(Default, Deserialize)]
struct ReloadRequest {
    #[serde(default)]
    path: Option<PathBuf>,
}

/// An empty body reloads the current source bundle.
async fn reload(State(state): State<Shared>, raw: Bytes) -> ApiResult {
    let request: ReloadRequest = if raw.iter().all(u8::is_ascii_whitespace) { ReloadRequest::default() } else { body(&raw)? };
    let previous = state.snapshot().provenance().stamp.clone();
    let snap = state.reload(request.path).await?;
    envelope(
        &snap,
        json!({
            "previous_stamp": previous,
            "stamp": snap.provenance().stamp,
            "sites": snap.sites().len(),
            "factors": snap.factors().len(),
        }),
    )
}
